import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lcpga.analysis import (
    PcaResult,
    TmiChain,
    assemble_chain,
    format_process_table,
    pca,
    report_processes,
)
from lcpga.evolver import GenerationRecord, RunRecord, SurvivorRecord

chains = arrays(np.float64, st.tuples(st.integers(3, 40), st.just(3)), elements=st.floats(0.0, 10.0))


def synthetic_record(n_gen, n_surv, rng):
    gens = []
    for g in range(n_gen):
        survivors = [
            SurvivorRecord(rank, rank * 2, rng.uniform(size=(2, 5)), 10.0 - rank, rng.uniform(size=3), 1.0, rng.uniform(size=3))
            for rank in range(n_surv)
        ]
        gens.append(GenerationRecord(g, [10.0] * n_surv, 0, 10.0, 10.0, survivors))
    return RunRecord({}, gens)


def _result(components, w=(1.0, 0.5, 0.1)):
    return PcaResult(np.array(w), np.array(components, dtype=float), np.zeros(3), np.zeros(3), True, True)


class TestChain:
    def test_row_count_and_order(self, rng):
        rec = synthetic_record(20, 16, rng)
        chain = assemble_chain(rec)
        assert len(chain) == 320
        assert chain.provenance[:3] == [(0, 0), (0, 2), (0, 4)]
        assert chain.provenance[16] == (1, 0)
        np.testing.assert_array_equal(chain.rows[17], rec.generations[1].survivors[1].ti_tmi)

    def test_small(self, rng):
        assert len(assemble_chain(synthetic_record(1, 2, rng))) == 2

    def test_empty(self):
        with pytest.raises(ValueError):
            assemble_chain(RunRecord({}, []))

    def test_round_trip_through_jsonl(self, rng, tmp_path):
        rec = synthetic_record(3, 4, rng)
        rec.to_jsonl(tmp_path / "r.jsonl")
        back = assemble_chain(RunRecord.from_jsonl(tmp_path / "r.jsonl"))
        np.testing.assert_array_equal(back.rows, assemble_chain(rec).rows)
        assert back.provenance == assemble_chain(rec).provenance

    def test_csv(self, rng, tmp_path):
        chain = assemble_chain(synthetic_record(2, 3, rng))
        chain.to_csv(tmp_path / "c.csv")
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[0] == "generation,slot,p12,p23,p31"
        assert len(lines) == 7
        np.testing.assert_array_equal(np.loadtxt(tmp_path / "c.csv", delimiter=",", skiprows=1)[:, 2:], chain.rows)


class TestPca:
    def test_identical_rows(self):
        res = pca(np.tile([1.0, 2.0, 3.0], (5, 1)))
        np.testing.assert_array_equal(res.singular_values, 0.0)
        np.testing.assert_array_equal(res.explained_fraction, 0.0)

    def test_too_few_rows(self):
        with pytest.raises(ValueError):
            pca(np.ones((1, 3)))
        with pytest.raises(ValueError):
            pca(np.ones((4, 2)))

    def test_rank_one(self):
        x = np.arange(1, 101, dtype=float)
        res = pca(np.column_stack([x, 2 * x, 0 * x]))
        np.testing.assert_allclose(res.components[0], np.array([1, 2, 0]) / np.sqrt(5), atol=1e-12)
        assert res.singular_values[1] < 1e-10 * res.singular_values[0]
        assert res.explained_fraction[0] == pytest.approx(1.0, abs=1e-12)

    def test_two_rows(self):
        res = pca(np.array([[0.0, 1.0, 2.0], [1.0, 1.0, 2.0]]))
        np.testing.assert_allclose(res.components[0], [1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(res.components @ res.components.T, np.eye(3), atol=1e-12)

    def test_random_orthonormal_and_reconstruction(self, rng):
        x = rng.uniform(size=(100, 3))
        res = pca(x)
        v = res.components
        np.testing.assert_allclose(v @ v.T, np.eye(3), atol=1e-10)
        xc = x - x.mean(axis=0)
        np.testing.assert_allclose(xc @ v.T @ v, xc, atol=1e-8)
        assert np.all(np.diff(res.singular_values) <= 0)

    @given(chains)
    def test_covariance_oracle(self, x):
        res = pca(x)
        evals, evecs = np.linalg.eigh(np.cov(x, rowvar=False))
        evals, evecs = np.clip(evals[::-1], 0, None), evecs[:, ::-1]
        scale = max(1.0, evals[0])
        np.testing.assert_allclose(res.singular_values**2, evals, atol=1e-8 * scale)
        # eigenvectors are only defined for well-separated eigenvalues
        for c in range(3):
            gaps = [abs(evals[c] - evals[o]) for o in range(3) if o != c]
            if min(gaps) > 1e-6 * scale:
                assert abs(abs(res.components[c] @ evecs[:, c]) - 1) < 1e-8

    def test_uncentered_matches_raw_svd(self, rng):
        x = rng.uniform(size=(30, 3))
        res = pca(x, center_columns=False, scale_by_sqrt_nm1=False)
        np.testing.assert_allclose(res.singular_values, np.linalg.svd(x, compute_uv=False), rtol=1e-12)
        np.testing.assert_array_equal(res.column_means, 0.0)

    @given(chains, st.randoms(use_true_random=False))
    def test_permutation_invariance_exact(self, x, r):
        perm = list(range(x.shape[0]))
        r.shuffle(perm)
        a, b = pca(x), pca(x[perm])
        np.testing.assert_array_equal(a.singular_values, b.singular_values)
        np.testing.assert_array_equal(a.components, b.components)

    def test_scale_covariance(self, rng):
        x = rng.uniform(size=(50, 3))
        a, b = pca(x), pca(4.0 * x)
        np.testing.assert_allclose(b.singular_values, 4.0 * a.singular_values, rtol=1e-12)
        np.testing.assert_allclose(b.components, a.components, atol=1e-12)

    @given(chains)
    def test_sign_convention(self, x):
        res = pca(x)
        for row in res.components:
            assert row[np.argmax(np.abs(row))] > 0

    def test_json(self, rng):
        doc = pca(rng.uniform(size=(10, 3))).to_json()
        json.dumps(doc)
        assert doc["labels"] == ["P1->2", "P2->3", "P3->1"]
        assert doc["convention"]["center_columns"] is True


class TestReport:
    def test_table3_process_columns(self):
        rows = report_processes(_result([[-0.150, 0.770, -0.620], [0.825, -0.253, -0.500], [0, 0, 1]]))
        assert rows[0].dominant == ["P2->3", "P3->1"]
        assert rows[1].dominant == ["P1->2", "P3->1"]
        assert rows[0].singular_value == 1.0

    def test_threshold_configurable(self):
        rows = report_processes(_result([[-0.150, 0.770, -0.620], [1, 0, 0], [0, 0, 1]]), top_k=1, threshold=0.7)
        assert rows[0].dominant == ["P2->3"]

    def test_unit_loadings(self, rng):
        for row in report_processes(pca(rng.uniform(size=(20, 3))), top_k=3):
            assert sum(v * v for v in row.loadings.values()) == pytest.approx(1.0, abs=1e-10)

    def test_bad_top_k(self):
        with pytest.raises(ValueError):
            report_processes(_result(np.eye(3)), top_k=4)

    def test_table_format(self):
        text = format_process_table(report_processes(_result([[-0.150, 0.770, -0.620], [0.825, -0.253, -0.500], [0, 0, 1]])))
        lines = text.splitlines()
        assert "Process 1" in lines[0] and "Process 2" in lines[0]
        assert lines[1].split() == ["P1->2", "-0.150", "0.825"]
        assert "{P2->3,P3->1}" in lines[-1]


def test_tmichain_len():
    assert len(TmiChain(np.zeros((4, 3)))) == 4

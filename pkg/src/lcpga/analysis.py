"""PCA of the transition-moment vectors recorded for GA survivors."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .evolver import RunRecord
from .observables import TMI_LABELS


@dataclass
class TmiChain:
    rows: np.ndarray  # (n, 3): P1->2, P2->3, P3->1
    provenance: list[tuple[int, int]] = field(default_factory=list)  # (generation, slot)

    def __len__(self) -> int:
        return self.rows.shape[0]

    def to_csv(self, path) -> None:
        prov = np.array(self.provenance, dtype=float).reshape(-1, 2)
        np.savetxt(
            path,
            np.column_stack([prov, self.rows]),
            delimiter=",",
            fmt=["%d", "%d", "%.17g", "%.17g", "%.17g"],
            header="generation,slot,p12,p23,p31",
            comments="",
        )


@dataclass
class PcaResult:
    singular_values: np.ndarray  # descending, length 3
    components: np.ndarray  # (3, 3); row c is component c over (P1->2, P2->3, P3->1)
    explained_fraction: np.ndarray
    column_means: np.ndarray
    centered: bool
    scaled: bool
    sign_convention: str = "largest-magnitude loading positive"

    def to_json(self) -> dict:
        return {
            "singular_values": self.singular_values.tolist(),
            "components": self.components.tolist(),
            "explained_fraction": self.explained_fraction.tolist(),
            "column_means": self.column_means.tolist(),
            "labels": list(TMI_LABELS),
            "convention": {
                "center_columns": self.centered,
                "scale_by_sqrt_nm1": self.scaled,
                "sign": self.sign_convention,
            },
        }


def assemble_chain(record: RunRecord) -> TmiChain:
    if not record.generations:
        raise ValueError("run record has no generations")
    rows, prov = [], []
    for g in record.generations:
        for s in g.survivors:  # already in rank order
            rows.append(np.asarray(s.ti_tmi, dtype=float))
            prov.append((g.generation, s.slot))
    if not rows:
        raise ValueError("run record has no survivors")
    return TmiChain(np.array(rows).reshape(-1, 3), prov)


def _fix_signs(components: np.ndarray) -> np.ndarray:
    out = components.copy()
    for c in range(out.shape[0]):
        k = int(np.argmax(np.abs(out[c])))
        if out[c, k] < 0:
            out[c] = -out[c]
    return out


def pca(chain: TmiChain | np.ndarray, center_columns: bool = True, scale_by_sqrt_nm1: bool = True) -> PcaResult:
    """SVD of the (optionally centered) chain matrix.

    Rows are put in lexicographic order first, so the result is exactly
    invariant under any permutation of the chain.
    """
    x = np.asarray(chain.rows if isinstance(chain, TmiChain) else chain, dtype=float)
    if x.ndim != 2 or x.shape[1] != 3:
        raise ValueError(f"chain must be an (n, 3) matrix, got shape {x.shape}")
    n = x.shape[0]
    if n < 2:
        raise ValueError("PCA needs at least two rows")
    x = x[np.lexsort(x.T[::-1])]
    means = x.mean(axis=0) if center_columns else np.zeros(3)
    xc = x - means
    _, s, vt = np.linalg.svd(xc, full_matrices=n < 3)
    s = np.concatenate([s, np.zeros(3 - s.size)])
    if scale_by_sqrt_nm1:
        s = s / np.sqrt(n - 1)
    total = float(np.sum(s**2))
    explained = s**2 / total if total > 0 else np.zeros(3)
    return PcaResult(s, _fix_signs(vt[:3]), explained, means, center_columns, scale_by_sqrt_nm1)


@dataclass
class ProcessRow:
    index: int
    singular_value: float
    loadings: dict[str, float]
    dominant: list[str]


def report_processes(res: PcaResult, top_k: int = 2, threshold: float = 0.3) -> list[ProcessRow]:
    if not 0 <= top_k <= 3:
        raise ValueError("top_k must be between 0 and 3")
    rows = []
    for c in range(top_k):
        loadings = dict(zip(TMI_LABELS, map(float, res.components[c])))
        dominant = [lab for lab, v in loadings.items() if abs(v) >= threshold]
        rows.append(ProcessRow(c + 1, float(res.singular_values[c]), loadings, dominant))
    return rows


def format_process_table(rows: list[ProcessRow]) -> str:
    head = f"{'':8s}" + "".join(f"{'Process ' + str(r.index):>14s}" for r in rows)
    lines = [head]
    for lab in TMI_LABELS:
        lines.append(f"{lab:8s}" + "".join(f"{r.loadings[lab]:14.3f}" for r in rows))
    lines.append(f"{'W':8s}" + "".join(f"{r.singular_value:14.4g}" for r in rows))
    lines.append(f"{'dominant':8s}" + "".join(f"{'{' + ','.join(r.dominant) + '}':>14s}" for r in rows))
    return "\n".join(lines)

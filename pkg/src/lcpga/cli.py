"""Command-line front end.

    lcpga default-config [--out DIR]
    lcpga free-run   [--config PATH] [--out DIR]
    lcpga propagate  --pulse PULSES.json [--config PATH] [--out DIR]
    lcpga optimize   [--config PATH] [--seed N] [--workers N] [--out DIR]
    lcpga analyze    --record RECORD.jsonl [--out DIR]
    lcpga spectrum   --pulse PULSES.json [--config PATH] [--out DIR]

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import assemble_chain, format_process_table, pca, report_processes
from .config import RunConfig, load_config
from .errors import ConfigError, PropagationDiverged, PulseFileError
from .evolver import GenerationRecord, RunRecord, evolve
from .pulse import PulseEnsemble, dump_pulses, load_pulses, power_spectrum, sample_field, step_midpoints
from .propagator import write_trajectory_csv

log = logging.getLogger("lcpga")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _write_two_column(path: Path, x, y, header: str) -> None:
    np.savetxt(path, np.column_stack([x, y]), delimiter=",", fmt="%.17g", header=header, comments="")


def _out_dir(args, cfg: Optional[RunConfig] = None) -> Path:
    out = Path(args.out) if args.out else Path(cfg.output.dir if cfg else "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_and_write(cfg: RunConfig, ens: Optional[PulseEnsemble], out: Path) -> dict:
    problem = cfg.problem()
    field = None if ens is None else sample_field(ens, problem.plan)
    obs = problem.run(field, stride=cfg.output.stride)
    write_trajectory_csv(obs, out / "trajectory.csv")
    result = obs.to_json()
    _write_json(out / "observables.json", result)
    return result


def cmd_default_config(args) -> int:
    text = RunConfig().dumps()
    if args.out:
        _out_dir(args).joinpath("config.json").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_free_run(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    res = _run_and_write(cfg, None, out)
    print(f"J1={res['j1']:.6g} J2={res['j2']:.6g} J3={res['j3']:.6g} J2/J3={res['ratio_j2_j3']}")
    return EXIT_OK


def cmd_propagate(args) -> int:
    cfg = load_config(args.config)
    ens = load_pulses(args.pulse)
    out = _out_dir(args, cfg)
    res = _run_and_write(cfg, ens, out)
    print(f"J2/J3 = {res['ratio_j2_j3']}  (fluence {res['fluence']:.6g})")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = load_config(args.config)
    ens = load_pulses(args.pulse)
    out = _out_dir(args, cfg)
    plan = cfg.problem().plan
    omega, power = power_spectrum(ens, plan)
    _write_two_column(out / "spectrum.csv", omega, power, "omega,power")
    _write_two_column(out / "field.csv", step_midpoints(plan.dt_full, plan.n_steps),
                      sample_field(ens, plan), "t,field")
    print(f"spectral peak at omega = {omega[np.argmax(power)]:.6g}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed", "must be an unsigned 64-bit integer")
        cfg.ga = dataclasses.replace(cfg.ga, seed=args.seed)
        cfg.validate()
    out = _out_dir(args, cfg)
    problem = cfg.problem()
    ga = cfg.ga_config()

    def progress(g: GenerationRecord) -> None:
        b = g.survivors[0]
        log.info("generation %d: best %.6g  J2/J3 %.4g  survivors %d  diverged %d",
                 g.generation, g.best_fitness, b.ratio_j2_j3, len(g.survivors), len(g.diverged_slots))

    record = evolve(ga, problem, workers=args.workers, callback=progress)
    record.to_jsonl(out / "record.jsonl")
    summary = record.summary()
    _write_json(out / "summary.json", summary)
    best = PulseEnsemble.from_genes(record.best().genes)
    dump_pulses(best, out / "best_pulse.json")
    omega, power = power_spectrum(best, problem.plan)
    _write_two_column(out / "best_spectrum.csv", omega, power, "omega,power")
    print(f"best fitness {summary['best_fitness']:.6g}, J2/J3 = {summary['ratio_j2_j3']}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        record = RunRecord.from_jsonl(args.record)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError("--record", f"cannot read run record: {exc}") from exc
    chain = assemble_chain(record)
    if len(chain) < 2:
        raise ConfigError("--record", "need at least two survivor rows for PCA")
    out = _out_dir(args)
    chain.to_csv(out / "chain.csv")
    centered = pca(chain, center_columns=True)
    raw = pca(chain, center_columns=False)
    rows = report_processes(centered, top_k=2)
    _write_json(
        out / "pca_report.json",
        {
            "n_rows": len(chain),
            "centered": centered.to_json(),
            "uncentered": raw.to_json(),
            "processes": [dataclasses.asdict(r) for r in rows],
        },
    )
    print(format_process_table(rows))
    return EXIT_OK


COMMANDS = {
    "default-config": cmd_default_config,
    "free-run": cmd_free_run,
    "propagate": cmd_propagate,
    "optimize": cmd_optimize,
    "analyze": cmd_analyze,
    "spectrum": cmd_spectrum,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (JSON); defaults if omitted")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--seed", type=int, help="GA seed (overrides ga.seed)")
    common.add_argument("--workers", type=int, default=1, help="parallel fitness evaluations")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lcpga", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("propagate", "spectrum"):
            p.add_argument("--pulse", required=True, help="pulse ensemble JSON")
        if name == "analyze":
            p.add_argument("--record", required=True, help="run record JSON-lines")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, PulseFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PropagationDiverged as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

"""Linearly chirped pulses and their superposition into a driving field."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import PulseFileError

# Gene order inside one 5-block of a chromosome.
PARAM_NAMES = ("e0", "tau0", "chirp", "width", "omega0")


@dataclass(frozen=True)
class LcpParams:
    e0: float
    tau0: float
    chirp: float
    width: float
    omega0: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"pulse width must be positive, got {self.width}")
        if self.e0 < 0:
            raise ValueError(f"pulse amplitude must be non-negative, got {self.e0}")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.e0, self.tau0, self.chirp, self.width, self.omega0)


class PulseEnsemble:
    """Ordered set of N chirped pulses, stored as an (N, 5) parameter array."""

    def __init__(self, params: np.ndarray | Sequence[LcpParams]):
        if len(params) and isinstance(params[0], LcpParams):
            arr = np.array([p.as_tuple() for p in params], dtype=float)
        else:
            arr = np.array(params, dtype=float).reshape(-1, 5)
        if arr.shape[0] < 1:
            raise ValueError("a pulse ensemble needs at least one pulse")
        if np.any(arr[:, 3] <= 0):
            raise ValueError("pulse widths must be positive")
        arr.setflags(write=False)
        self.params = arr

    @classmethod
    def from_genes(cls, genes: np.ndarray) -> "PulseEnsemble":
        return cls(np.asarray(genes, dtype=float).reshape(-1, 5))

    def __len__(self) -> int:
        return self.params.shape[0]

    def __iter__(self):
        for row in self.params:
            yield LcpParams(*map(float, row))

    def __eq__(self, other) -> bool:
        return isinstance(other, PulseEnsemble) and np.array_equal(self.params, other.params)

    def shifted(self, s: float) -> "PulseEnsemble":
        p = self.params.copy()
        p[:, 1] += s
        return PulseEnsemble(p)

    def to_list(self) -> list[dict]:
        return [dict(zip(PARAM_NAMES, map(float, row))) for row in self.params]


def lcp_value(p: LcpParams, t):
    dt = np.asarray(t, dtype=float) - p.tau0
    envelope = np.exp(-(dt**2) / (2.0 * p.width**2))
    return p.e0 * envelope * np.cos(0.5 * p.chirp * dt**2 + p.omega0 * dt)


def field_value(ens: PulseEnsemble, t):
    """Sum of all pulses at time(s) ``t``."""
    t = np.asarray(t, dtype=float)
    e0, tau0, chirp, width, omega0 = (ens.params[:, i, None] for i in range(5))
    dt = t.reshape(1, -1) - tau0
    terms = e0 * np.exp(-(dt**2) / (2.0 * width**2)) * np.cos(0.5 * chirp * dt**2 + omega0 * dt)
    total = terms.sum(axis=0)
    return total.reshape(t.shape) if t.ndim else float(total[0])


def step_midpoints(dt_full: float, n_steps: int) -> np.ndarray:
    return (np.arange(n_steps) + 0.5) * dt_full


def sample_field(ens: PulseEnsemble, plan) -> np.ndarray:
    """Field at the midpoint of every propagation step of ``plan``."""
    return field_value(ens, step_midpoints(plan.dt_full, plan.n_steps))


def spectrum_of_samples(samples: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """One-sided power density on an angular-frequency axis.

    Normalized so that ``sum(power) * d_omega == sum(samples**2) * dt``.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    f = np.fft.rfft(samples)
    weight = np.full(f.size, 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
    power = weight * np.abs(f) ** 2 * dt**2 / (2.0 * np.pi)
    omega = 2.0 * np.pi * np.fft.rfftfreq(n, d=dt)
    return omega, power


def power_spectrum(ens: PulseEnsemble, plan) -> tuple[np.ndarray, np.ndarray]:
    return spectrum_of_samples(sample_field(ens, plan), plan.dt_full)


def band_power_fraction(omega: np.ndarray, power: np.ndarray, lo: float, hi: float) -> float:
    total = power.sum()
    if total == 0:
        return 0.0
    mask = (omega >= lo) & (omega <= hi)
    return float(power[mask].sum() / total)


def dump_pulses(ens: PulseEnsemble, path: str | Path) -> None:
    Path(path).write_text(json.dumps(ens.to_list(), indent=1) + "\n")


def parse_pulses(text: str) -> PulseEnsemble:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PulseFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, list) or not doc:
        raise PulseFileError("expected a non-empty JSON array of pulse objects")
    rows = []
    for i, item in enumerate(doc):
        if not isinstance(item, dict):
            raise PulseFileError(f"pulse {i}: expected an object")
        unknown = set(item) - set(PARAM_NAMES)
        if unknown:
            raise PulseFileError(f"pulse {i}: unknown field(s) {sorted(unknown)}")
        row = []
        for name in PARAM_NAMES:
            if name not in item:
                raise PulseFileError(f"pulse {i}: missing field '{name}'")
            value = item[name]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise PulseFileError(f"pulse {i}: field '{name}' is not a number")
            if not math.isfinite(value):
                raise PulseFileError(f"pulse {i}: field '{name}' is not finite")
            row.append(float(value))
        try:
            LcpParams(*row)
        except ValueError as exc:
            raise PulseFileError(f"pulse {i}: {exc}") from exc
        rows.append(row)
    return PulseEnsemble(np.array(rows))


def load_pulses(path: str | Path) -> PulseEnsemble:
    return parse_pulses(Path(path).read_text())


def zero_ensemble(n: int = 1, like: Iterable[float] = (0.0, 500.0, 0.0, 40.0, 0.15)) -> PulseEnsemble:
    row = np.array(list(like), dtype=float)
    row[0] = 0.0
    return PulseEnsemble(np.tile(row, (n, 1)))

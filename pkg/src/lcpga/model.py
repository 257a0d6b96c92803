"""Three-surface diatomic model: grid, potentials, dipoles, couplings, initial state.

All quantities are in atomic units. Channel indices are 1-based (1, 2, 3) in the
public API to match the usual E1/E2/E3 labelling; arrays are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError

N_CHANNELS = 3


@dataclass(frozen=True)
class SpatialGrid:
    r_min: float
    dr: float
    n_r: int
    r: np.ndarray = field(init=False, repr=False, compare=False)
    momenta: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        r = self.r_min + self.dr * np.arange(self.n_r)
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_r, d=self.dr)
        r.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "momenta", k)

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    def nearest_index(self, x: float) -> int:
        return int(np.argmin(np.abs(self.r - x)))


def build_grid(r_min: float, dr: float, n_r: int) -> SpatialGrid:
    if not dr > 0:
        raise ValueError(f"grid spacing must be positive, got {dr}")
    if int(n_r) != n_r or n_r < 8:
        raise ValueError(f"grid needs at least 8 points, got {n_r}")
    return SpatialGrid(float(r_min), float(dr), int(n_r))


@dataclass(frozen=True)
class Absorber:
    """Power-ramp optical potential -i*W(R), W = strength*((R-r_start)/(r_end-r_start))**power."""

    r_start: float = 8.6
    r_end: float = 11.165625
    strength: float = 0.08
    power: float = 3.0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        x = np.clip((r - self.r_start) / (self.r_end - self.r_start), 0.0, None)
        return self.strength * x**self.power


@dataclass(frozen=True)
class MolecularModel:
    """Analytic Hamiltonian ingredients of the three-state model.

    E1 is a Morse ground state; E2 and E3 are linear-plus-repulsive dissociative
    curves. Channels 2 and 3 are coupled diabatically by a Gaussian C23; all
    pairs couple to the field through the transition dipoles.
    """

    mass: float = 1836.0
    # Morse ground state
    de: float = 0.075
    omega_e: float = 0.0077782
    r_e: float = 4.125
    # dissociative curves E_a = m_a (R - r_ref) + b_a + c exp(-d (R - r_ref))
    slope2: float = -0.008681
    slope3: float = -0.01736
    offset2: float = 0.1805
    offset3: float = 0.2
    wall_c: float = 0.25
    wall_d: float = 5.0
    r_ref: float = 3.15
    # dipoles and diabatic coupling
    mu: float = 0.2
    dipole_a: float = 5.0
    r_x: float = 5.25
    coupling_amplitude: float = 0.003
    interaction_prefactor: float = 1.0
    absorber: Optional[Absorber] = Absorber()

    def __post_init__(self):
        if not self.de > 0:
            raise ValueError("Morse well depth must be positive")
        if not self.mass > 0:
            raise ValueError("mass must be positive")

    @property
    def morse_y(self) -> float:
        return self.omega_e * np.sqrt(self.mass / (2.0 * self.de))

    def ground_potential(self, r):
        r = np.asarray(r, dtype=float)
        return self.de * (1.0 - np.exp(-self.morse_y * (r - self.r_e))) ** 2

    def dissociative_potential(self, alpha: int, r):
        if alpha == 2:
            m, b = self.slope2, self.offset2
        elif alpha == 3:
            m, b = self.slope3, self.offset3
        else:
            raise ValueError(f"dissociative channel must be 2 or 3, got {alpha}")
        x = np.asarray(r, dtype=float) - self.r_ref
        return m * x + b + self.wall_c * np.exp(-self.wall_d * x)

    def potential(self, k: int, r):
        if k == 1:
            return self.ground_potential(r)
        return self.dissociative_potential(k, r)

    def dipole(self, k: int, l: int, r):
        if k == l:
            raise ValueError("the model has no permanent dipoles")
        pair = frozenset((k, l))
        r = np.asarray(r, dtype=float)
        if pair in (frozenset((1, 2)), frozenset((2, 3))):
            return self.mu * np.exp(-self.dipole_a * (r - self.r_x) ** 2)
        if pair == frozenset((1, 3)):
            return np.where(
                r >= self.r_x,
                self.mu * np.tanh(-10.0 * (8.0 - r)),
                self.mu * np.tanh(-10.0 * (r - 3.0)),
            )
        raise ValueError(f"no dipole between channels {k} and {l}")

    def diabatic_coupling(self, r):
        r = np.asarray(r, dtype=float)
        return self.coupling_amplitude * np.exp(-self.dipole_a * (r - self.r_x) ** 2)

    def absorbing_potential(self, r):
        if self.absorber is None:
            return np.zeros_like(np.asarray(r, dtype=float))
        return self.absorber(r)


@dataclass
class WavepacketState:
    channels: np.ndarray  # (3, n_r) complex
    time: float = 0.0

    def copy(self) -> "WavepacketState":
        return WavepacketState(self.channels.copy(), self.time)


def initial_wavepacket(
    grid: SpatialGrid, center: float, width: float, channel: int = 3
) -> WavepacketState:
    """Real Gaussian exp(-(R-center)^2 / (2 width^2)) on one channel, unit norm."""
    if channel not in (1, 2, 3):
        raise ValueError(f"channel must be 1, 2 or 3, got {channel}")
    if not width > 0:
        raise ConfigError("initial_state.width", "width must be positive")
    if center - 3 * width < grid.r[0] or center + 3 * width > grid.r[-1]:
        raise ConfigError(
            "initial_state.center", f"packet {center}+-3*{width} leaves the grid"
        )
    g = np.exp(-((grid.r - center) ** 2) / (2.0 * width**2))
    if max(g[0], g[-1]) > 1e-6 * g.max():
        raise ConfigError("initial_state.width", "packet tail clipped by grid edge")
    g /= np.sqrt(np.sum(g**2) * grid.dr)
    psi = np.zeros((N_CHANNELS, grid.n_r), dtype=complex)
    psi[channel - 1] = g
    return WavepacketState(psi, 0.0)

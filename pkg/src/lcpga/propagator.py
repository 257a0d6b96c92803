"""Symmetric split-operator propagation of the three coupled channels.

One full step of length ``dt_full`` is

    exp(-i T dt/2) exp(-i V(t + dt/2) dt) exp(-i T dt/2)

followed by the optical-potential decay. The kinetic factors are applied in
momentum space by FFT; the potential factor is applied pointwise by
diagonalizing the real symmetric 3x3 matrix V(R, eps) (diabatic -> adiabatic),
attaching the phases, and rotating back.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft as sfft
from numba import njit

from .errors import PropagationDiverged
from .model import MolecularModel, SpatialGrid, WavepacketState
from .observables import STENCIL, ProbeSet, RunObservables, absorb_and_observe, check_detector


@dataclass(frozen=True)
class PropagatorPlan:
    grid: SpatialGrid
    mass: float
    dt_full: float
    n_steps: int
    kinetic_phase: np.ndarray
    absorber_decay: np.ndarray

    @property
    def final_time(self) -> float:
        return self.n_steps * self.dt_full


def build_plan(
    grid: SpatialGrid,
    model: MolecularModel,
    dt_full: float = 0.1875,
    n_steps: int = 8192,
) -> PropagatorPlan:
    if not dt_full > 0:
        raise ValueError("time step must be positive")
    if n_steps < 1:
        raise ValueError("need at least one step")
    k = grid.momenta
    phase = np.exp(-1j * k**2 / (2.0 * model.mass) * (0.5 * dt_full))
    decay = np.exp(-model.absorbing_potential(grid.r) * dt_full)
    return PropagatorPlan(grid, model.mass, float(dt_full), int(n_steps), phase, decay)


@dataclass(frozen=True)
class PotentialMatrixCache:
    """Field-independent pieces of V(R) plus the dipoles, on the grid.

    ``diag`` is (3, n_r); the couplings are length n_r. Dipoles already carry
    the interaction prefactor, so V_kl = dip_kl * eps (+ c23 for k,l = 2,3).
    """

    diag: np.ndarray
    c23: np.ndarray
    dip12: np.ndarray
    dip13: np.ndarray
    dip23: np.ndarray

    def matrix(self, j: int, eps: float) -> np.ndarray:
        v = np.diag(self.diag[:, j]).astype(float)
        v[0, 1] = v[1, 0] = self.dip12[j] * eps
        v[0, 2] = v[2, 0] = self.dip13[j] * eps
        v[1, 2] = v[2, 1] = self.dip23[j] * eps + self.c23[j]
        return v


def build_cache(model: MolecularModel, grid: SpatialGrid) -> PotentialMatrixCache:
    r = grid.r
    s = model.interaction_prefactor
    arrays = dict(
        diag=np.stack([model.potential(k, r) for k in (1, 2, 3)]),
        c23=model.diabatic_coupling(r),
        dip12=s * model.dipole(1, 2, r),
        dip13=s * model.dipole(1, 3, r),
        dip23=s * model.dipole(2, 3, r),
    )
    for a in arrays.values():
        a.setflags(write=False)
    return PotentialMatrixCache(**arrays)


# ---------------------------------------------------------------------------
# 3x3 symmetric eigensolver (cyclic Jacobi) and the pointwise potential step
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _rotate(app, aqq, apq, arp, arq, vp0, vp1, vp2, vq0, vq1, vq2):
    theta = (aqq - app) / (2.0 * apq)
    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
    if theta < 0.0:
        t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    return (
        app - t * apq,
        aqq + t * apq,
        c * arp - s * arq,
        s * arp + c * arq,
        c * vp0 - s * vq0,
        c * vp1 - s * vq1,
        c * vp2 - s * vq2,
        s * vp0 + c * vq0,
        s * vp1 + c * vq1,
        s * vp2 + c * vq2,
    )


@njit(cache=True, inline="always")
def eigh3(a00, a11, a22, a01, a02, a12):
    """Eigenpairs of a real symmetric 3x3 matrix.

    Returns (w0, w1, w2, *v) where v = (v00, v01, v02, v10, ...) and
    (vc0, vc1, vc2) is the eigenvector for w_c.
    """
    v00 = 1.0
    v01 = 0.0
    v02 = 0.0
    v10 = 0.0
    v11 = 1.0
    v12 = 0.0
    v20 = 0.0
    v21 = 0.0
    v22 = 1.0
    for _ in range(50):
        off = a01 * a01 + a02 * a02 + a12 * a12
        if off == 0.0 or off <= 1e-34 * (a00 * a00 + a11 * a11 + a22 * a22):
            break
        if a01 != 0.0:
            a00, a11, a02, a12, v00, v01, v02, v10, v11, v12 = _rotate(
                a00, a11, a01, a02, a12, v00, v01, v02, v10, v11, v12
            )
            a01 = 0.0
        if a02 != 0.0:
            a00, a22, a01, a12, v00, v01, v02, v20, v21, v22 = _rotate(
                a00, a22, a02, a01, a12, v00, v01, v02, v20, v21, v22
            )
            a02 = 0.0
        if a12 != 0.0:
            a11, a22, a01, a02, v10, v11, v12, v20, v21, v22 = _rotate(
                a11, a22, a12, a01, a02, v10, v11, v12, v20, v21, v22
            )
            a12 = 0.0
    return a00, a11, a22, v00, v01, v02, v10, v11, v12, v20, v21, v22


@njit(cache=True)
def eigh3_array(a):
    """Array wrapper around :func:`eigh3` (test and diagnostics use)."""
    r = eigh3(a[0, 0], a[1, 1], a[2, 2], a[0, 1], a[0, 2], a[1, 2])
    w = np.array([r[0], r[1], r[2]])
    v = np.empty((3, 3))
    for c in range(3):
        for k in range(3):
            v[k, c] = r[3 + 3 * c + k]
    return w, v


@njit(cache=True)
def potential_kernel(psi, diag, c23, dip12, dip13, dip23, eps, dt):
    """In place: psi(R) <- exp(-i V(R, eps) dt) psi(R) at every grid point."""
    for j in range(psi.shape[1]):
        w0, w1, w2, v00, v01, v02, v10, v11, v12, v20, v21, v22 = eigh3(
            diag[0, j],
            diag[1, j],
            diag[2, j],
            dip12[j] * eps,
            dip13[j] * eps,
            dip23[j] * eps + c23[j],
        )
        p0 = psi[0, j]
        p1 = psi[1, j]
        p2 = psi[2, j]
        x0 = (v00 * p0 + v01 * p1 + v02 * p2) * complex(np.cos(w0 * dt), -np.sin(w0 * dt))
        x1 = (v10 * p0 + v11 * p1 + v12 * p2) * complex(np.cos(w1 * dt), -np.sin(w1 * dt))
        x2 = (v20 * p0 + v21 * p1 + v22 * p2) * complex(np.cos(w2 * dt), -np.sin(w2 * dt))
        psi[0, j] = v00 * x0 + v10 * x1 + v20 * x2
        psi[1, j] = v01 * x0 + v11 * x1 + v21 * x2
        psi[2, j] = v02 * x0 + v12 * x1 + v22 * x2


# ---------------------------------------------------------------------------
# Single factors (pure; return new states)
# ---------------------------------------------------------------------------


def _kinetic(psi: np.ndarray, phase: np.ndarray) -> np.ndarray:
    return sfft.ifft(sfft.fft(psi, axis=-1) * phase, axis=-1, overwrite_x=True)


def kinetic_half_step(state: WavepacketState, plan: PropagatorPlan) -> WavepacketState:
    return WavepacketState(_kinetic(state.channels, plan.kinetic_phase), state.time)


def potential_full_step(
    state: WavepacketState,
    cache: PotentialMatrixCache,
    field_value: float,
    plan: PropagatorPlan,
) -> WavepacketState:
    psi = np.array(state.channels, dtype=complex, copy=True)
    potential_kernel(
        psi, cache.diag, cache.c23, cache.dip12, cache.dip13, cache.dip23,
        float(field_value), plan.dt_full,
    )
    return WavepacketState(psi, state.time)


def apply_absorber(state: WavepacketState, plan: PropagatorPlan) -> WavepacketState:
    return WavepacketState(state.channels * plan.absorber_decay, state.time)


# ---------------------------------------------------------------------------
# Full propagation
# ---------------------------------------------------------------------------


def propagate(
    initial: WavepacketState,
    model: MolecularModel | PotentialMatrixCache,
    field: Optional[np.ndarray],
    plan: PropagatorPlan,
    probes: ProbeSet,
    keep_final_state: bool = True,
) -> RunObservables:
    """Run ``plan.n_steps`` steps and return the accumulated observables.

    ``field`` holds eps at the step midpoints (see ``pulse.sample_field``);
    ``None`` means field-free.
    """
    grid = plan.grid
    cache = model if isinstance(model, PotentialMatrixCache) else build_cache(model, grid)
    n_steps = plan.n_steps
    if field is None:
        field = np.zeros(n_steps)
    field = np.ascontiguousarray(field, dtype=float)
    if field.shape != (n_steps,):
        raise ValueError(f"field needs {n_steps} midpoint samples, got {field.shape}")
    det = int(probes.detector_index)
    check_detector(det, grid.n_r)
    stride = max(1, int(probes.stride))

    dt = plan.dt_full
    t_final = plan.final_time
    psi = np.array(initial.channels, dtype=complex, copy=True)
    phase = plan.kinetic_phase
    decay = plan.absorber_decay
    r = grid.r
    dr = grid.dr
    inv_mass = 1.0 / plan.mass
    diag, c23, d12, d13, d23 = cache.diag, cache.c23, cache.dip12, cache.dip13, cache.dip23
    fft, ifft = sfft.fft, sfft.ifft

    n_rec = n_steps // stride + 1
    times = np.empty(n_rec)
    pops_rec = np.empty((n_rec, 3))
    norm_rec = np.empty(n_rec)
    flux_rec = np.empty((n_rec, 3))
    pops = np.sum(np.abs(psi) ** 2, axis=1) * dr
    flux_acc = np.zeros(3)
    tmi_acc = np.zeros(3)
    times[0] = initial.time
    pops_rec[0] = pops
    norm_rec[0] = pops.sum()
    flux_rec[0] = 0.0
    k = 1

    for n in range(n_steps):
        psi = ifft(fft(psi, axis=-1) * phase, axis=-1, overwrite_x=True)
        potential_kernel(psi, diag, c23, d12, d13, d23, field[n], dt)
        psi = ifft(fft(psi, axis=-1) * phase, axis=-1, overwrite_x=True)
        total = absorb_and_observe(
            psi, decay, r, dr, det, STENCIL, inv_mass, dt, 1.0 / t_final, pops, flux_acc, tmi_acc
        )
        if not np.isfinite(total):
            raise PropagationDiverged(n + 1)
        if (n + 1) % stride == 0:
            times[k] = initial.time + (n + 1) * dt
            pops_rec[k] = pops
            norm_rec[k] = total
            flux_rec[k] = flux_acc
            k += 1

    final = WavepacketState(psi, initial.time + t_final) if keep_final_state else None
    return RunObservables(
        j_flux=flux_acc.copy(),
        fluence=float(np.sum(field**2) * dt),
        ti_tmi=tmi_acc.copy(),
        times=times[:k],
        populations=pops_rec[:k],
        norm=norm_rec[:k],
        flux_cumulative=flux_rec[:k],
        final_time=initial.time + t_final,
        final_state=final,
    )


def step_once(
    state: WavepacketState,
    cache: PotentialMatrixCache,
    field_value: float,
    plan: PropagatorPlan,
) -> WavepacketState:
    """One full split-operator step composed from the public factors."""
    s = kinetic_half_step(state, plan)
    s = potential_full_step(s, cache, field_value, plan)
    s = kinetic_half_step(s, plan)
    s = apply_absorber(s, plan)
    s.time = state.time + plan.dt_full
    return s


def write_trajectory_csv(obs: RunObservables, path) -> None:
    cols = np.column_stack(
        [
            obs.times,
            obs.populations,
            obs.norm,
            obs.flux_cumulative[:, 1],
            obs.flux_cumulative[:, 2],
        ]
    )
    np.savetxt(
        path, cols, delimiter=",", fmt="%.17g",
        header="t,pop1,pop2,pop3,norm,flux2_cum,flux3_cum", comments="",
    )

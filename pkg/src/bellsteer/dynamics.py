"""Coupled Liouville integration for the controlled state and its drifting
target.

The closed loop

    drho/dt   = -i [H0 + f(rho, rho_d, t) H1, rho]
    drho_d/dt = -i [H0, rho_d]

is integrated as one autonomous system with an adaptive embedded
Dormand-Prince 5(4) scheme. The feedback is re-evaluated from the stage values
inside every Runge-Kutta stage, never precomputed. Unitary-dynamics invariants
(trace, Hermiticity, purity, positivity) are monitored at every output sample
and violations beyond ten times the stated tolerances abort the run; nothing
is silently renormalized, because the descent property of the feedback law is
exactly what the integration is supposed to expose.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import (
    ControlLaw,
    Geometric,
    Lyapunov,
    control_field,
    geometric_field,
    lyapunov_value,
)
from .linalg import expm, hs_norm
from .model import (
    Basis,
    HamiltonianPair,
    ModelParams,
    Paradigm,
    S_FRAME_BELL,
    S_FRAME_X,
    X_PRODUCT,
    subspace_populations,
)
from . import metrics

TRACE_TOL = 1e-9
HERM_TOL = 1e-9
PURITY_TOL = 1e-6
EIGEN_FLOOR = -1e-8
ABORT_FACTOR = 10.0

# Dormand-Prince 5(4) tableau (FSAL: the 7th stage is the next step's first).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_ERR = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)


class IntegrationError(RuntimeError):
    """Raised when the integrator cannot continue (step underflow or an
    invariant violation beyond the abort threshold)."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (at t={t:.6g})")
        self.t = t


@dataclass(frozen=True)
class IntegratorConfig:
    """Adaptive-step configuration; times are in units of 1/J."""

    t_max: float
    dt: float = 0.01
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    sample_every: float = 0.1
    v_stop: float | None = None

    def __post_init__(self) -> None:
        for name in ("t_max", "dt", "rel_tol", "abs_tol", "sample_every"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class CoupledState:
    t: float
    rho: np.ndarray
    rho_d: np.ndarray
    f: float


@dataclass(frozen=True)
class TrajectoryMetadata:
    params: ModelParams | None
    paradigm: Paradigm | None
    law: ControlLaw
    cfg: IntegratorConfig
    basis_tag: str
    stalled: bool


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered samples of the coupled run.

    Arrays share a common length n: t (n,), rho and rho_d (n, d, d), f, V,
    concurrence and p_S (n,). Times are strictly increasing.
    """

    t: np.ndarray
    rho: np.ndarray = field(repr=False)
    rho_d: np.ndarray = field(repr=False)
    f: np.ndarray
    V: np.ndarray
    concurrence: np.ndarray
    p_S: np.ndarray
    metadata: TrajectoryMetadata

    def __post_init__(self) -> None:
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.t)


def rhs(
    h: HamiltonianPair, f: float, rho: np.ndarray, rho_d: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Liouville right-hand sides for the state (with field f) and the target."""
    ht = h.h0 + f * h.h1
    drho = -1j * (ht @ rho - rho @ ht)
    drho_d = -1j * (h.h0 @ rho_d - rho_d @ h.h0)
    return drho, drho_d


def geometric_evolve(h_tot: np.ndarray, rho0: np.ndarray, t: float) -> np.ndarray:
    """Exact constant-Hamiltonian propagation U rho0 U†, U = expm(-i h_tot t)."""
    h_tot = np.asarray(h_tot, dtype=complex)
    herm = hs_norm(h_tot - h_tot.conj().T)
    if herm > 1e-10:
        raise ValueError(f"h_tot is not Hermitian (deviation {herm:.3e})")
    u = expm(-1j * h_tot * t)
    return u @ np.asarray(rho0, dtype=complex) @ u.conj().T


def _field_value(
    law: ControlLaw, t: float, rho: np.ndarray, rho_d: np.ndarray, h: HamiltonianPair
) -> float:
    if law is None:
        return 0.0
    if isinstance(law, Geometric):
        return geometric_field(t, law)
    return control_field(rho, rho_d, h.h1, law.kappa, law.sign)


def _sample_grid(cfg: IntegratorConfig) -> np.ndarray:
    n = int(np.floor(cfg.t_max / cfg.sample_every + 1e-9))
    grid = np.arange(n + 1) * cfg.sample_every
    if grid[-1] < cfg.t_max - 1e-9 * max(1.0, cfg.t_max):
        grid = np.append(grid, cfg.t_max)
    else:
        grid[-1] = cfg.t_max
    return grid


def _check_invariants(name: str, mat: np.ndarray, purity0: float, t: float) -> None:
    tr_err = abs(np.trace(mat) - 1.0)
    herm_err = hs_norm(mat - mat.conj().T)
    purity = float(np.real(np.trace(mat @ mat)))
    if tr_err > ABORT_FACTOR * TRACE_TOL:
        raise IntegrationError(f"{name} trace drift {tr_err:.3e} exceeds abort threshold", t)
    if herm_err > ABORT_FACTOR * HERM_TOL:
        raise IntegrationError(
            f"{name} Hermiticity drift {herm_err:.3e} exceeds abort threshold", t
        )
    if abs(purity - purity0) > ABORT_FACTOR * PURITY_TOL:
        raise IntegrationError(
            f"{name} purity drift {abs(purity - purity0):.3e} exceeds abort threshold", t
        )


def integrate(
    h: HamiltonianPair,
    law: ControlLaw,
    rho0: np.ndarray,
    rho_d0: np.ndarray,
    cfg: IntegratorConfig,
) -> Trajectory:
    """Integrate the coupled closed loop over [0, t_max] and sample it.

    Steps are clipped to the sample grid and, for a geometric law, to the
    switch time t0, so the discontinuous field never straddles a step. With
    v_stop set, the run ends at the first sample where V < v_stop.
    """
    rho = np.asarray(rho0, dtype=complex).copy()
    rho_d = np.asarray(rho_d0, dtype=complex).copy()
    if rho.shape != rho_d.shape or rho.shape != h.h0.shape:
        raise ValueError("state and Hamiltonian dimensions do not match")

    y = np.stack([rho, rho_d])
    purity0 = float(np.real(np.trace(rho @ rho)))
    purity0_d = float(np.real(np.trace(rho_d @ rho_d)))

    def deriv(t: float, state: np.ndarray) -> np.ndarray:
        f = _field_value(law, t, state[0], state[1], h)
        drho, drho_d = rhs(h, f, state[0], state[1])
        return np.stack([drho, drho_d])

    grid = _sample_grid(cfg)
    breakpoints = []
    if isinstance(law, Geometric) and 0.0 < law.t0 < cfg.t_max:
        breakpoints.append(law.t0)

    times = [0.0]
    rhos = [y[0].copy()]
    rho_ds = [y[1].copy()]
    fs = [_field_value(law, 0.0, y[0], y[1], h)]

    t = 0.0
    h_step = cfg.dt
    k1 = deriv(t, y)
    n_stages = 7
    k = [None] * n_stages

    for target in grid[1:]:
        snap_tol = 1e-10 * max(1.0, target)
        while target - t > snap_tol:
            next_stop = target
            for bp in breakpoints:
                if bp - t > snap_tol and bp < next_stop:
                    next_stop = bp
            h_try = min(h_step, next_stop - t)
            if h_try < 1e-13:
                raise IntegrationError("step size underflow", t)

            # One embedded DP5(4) attempt.
            k[0] = k1
            for i in range(1, n_stages):
                yi = y + h_try * sum(_A[i][j] * k[j] for j in range(i))
                k[i] = deriv(t + _C[i] * h_try, yi)
            y_new = y + h_try * sum(_B5[i] * k[i] for i in range(n_stages))
            err_vec = h_try * sum(_ERR[i] * k[i] for i in range(n_stages))

            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean(np.abs(err_vec / scale) ** 2)))

            if err <= 1.0:
                t = t + h_try
                y = y_new
                k1 = k[6]  # FSAL
                factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                h_step = h_try * factor
            else:
                h_step = h_try * max(0.2, 0.9 * err ** -0.2)

        t = target
        times.append(t)
        rhos.append(y[0].copy())
        rho_ds.append(y[1].copy())
        fs.append(_field_value(law, t, y[0], y[1], h))
        _check_invariants("rho", y[0], purity0, t)
        _check_invariants("rho_d", y[1], purity0_d, t)
        ev_min = float(np.linalg.eigvalsh(0.5 * (y[0] + y[0].conj().T))[0])
        if ev_min < ABORT_FACTOR * EIGEN_FLOOR:
            raise IntegrationError(f"rho eigenvalue {ev_min:.3e} below abort threshold", t)
        if cfg.v_stop is not None and lyapunov_value(y[0], y[1]) < cfg.v_stop:
            break

    ts = np.array(times)
    rho_arr = np.array(rhos)
    rho_d_arr = np.array(rho_ds)
    f_arr = np.array(fs)
    v_arr = np.array([lyapunov_value(a, b) for a, b in zip(rho_arr, rho_d_arr)])

    dim = rho_arr.shape[1]
    if dim == 4:
        c_arr = np.array([metrics.concurrence(r, h.basis) for r in rho_arr])
        p_arr = np.array([subspace_populations(r, h.basis)[0] for r in rho_arr])
    else:
        # Reduced pair frame: embed back into 4D X-product coordinates. The
        # whole reduced state lives in the invariant subspace, so p_S = Tr(rho).
        frame = S_FRAME_BELL if h.basis.tag == "Bell" else S_FRAME_X
        c_arr = np.array(
            [metrics.concurrence(frame @ r @ frame.conj().T, X_PRODUCT) for r in rho_arr]
        )
        p_arr = np.array([float(np.real(np.trace(r))) for r in rho_arr])

    stalled = bool(
        isinstance(law, Lyapunov)
        and v_arr[0] > 1e-12
        and np.max(np.abs(f_arr)) <= 1e-14 * law.kappa * hs_norm(h.h1)
    )
    meta = TrajectoryMetadata(h.params, h.paradigm, law, cfg, h.basis.tag, stalled)
    return Trajectory(ts, rho_arr, rho_d_arr, f_arr, v_arr, c_arr, p_arr, meta)

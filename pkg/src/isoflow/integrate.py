"""Adaptive Dormand-Prince 5(4) integration of symmetric-matrix ODEs.

The state is stored as the lower triangle of X, so the symmetric matrix
handed to the vector field is exactly symmetric at every stage.

Step control (Matlab ode45 style):

    err    = max_ij |e_ij| / (abstol + reltol * max(|X_ij|, |Xnew_ij|))
    accept if err <= 1
    h_new  = h * clip(0.9 * err**(-1/5), 0.2, 5)     (no growth right after a rejection)

There is no dense output. Monitors are recorded at t = 0, at the first
accepted step at or past each sample point, and at t_final.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import IntegratorError, StiffnessError
from .flows import default_target, objective_f
from .symspace import _check_square, sym_eigen, unvech, vech

# Dormand & Prince (1980), RK5(4)7M.
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [np.array(row) for row in [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
E = B5 - B4

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0


@dataclass
class IntegratorConfig:
    t_final: float
    abstol: float = 1e-13
    reltol: float = 1e-13
    max_steps: int = 10**7
    initial_step: float | None = None
    sample_interval: float | None = None

    def __post_init__(self):
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if not (self.abstol > 0 and self.reltol > 0):
            raise ValueError("tolerances must be positive")
        if self.sample_interval is None:
            self.sample_interval = self.t_final / 400
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")
        if self.initial_step is not None and not self.initial_step > 0:
            raise ValueError("initial_step must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")

    def first_step(self) -> float:
        if self.initial_step is not None:
            return min(self.initial_step, self.t_final)
        return min(1e-3, self.t_final / 100)


# ---------------------------------------------------------------------------
# monitors


def d_ev(X0, X) -> float:
    """|ev(X0) - ev(X)|_2 / |ev(X0)|_2 with ev the ascending eigenvalues."""
    e0 = sym_eigen(X0).values
    e = sym_eigen(X).values
    denom = float(np.linalg.norm(e0))
    if denom == 0.0:
        raise ZeroDivisionError("initial matrix has an all-zero spectrum")
    return float(np.linalg.norm(e0 - e)) / denom


def _offdiag_norm(X) -> float:
    X = _check_square(X)
    return float(np.linalg.norm(X - np.diag(np.diag(X))))


def d_off(X0, X) -> float:
    """|X - diag X|_F / |X0 - diag X0|_F."""
    denom = _offdiag_norm(X0)
    if denom == 0.0:
        raise ZeroDivisionError("initial matrix is diagonal")
    return _offdiag_norm(X) / denom


class TrajectoryMonitor:
    """Computes (d_ev, d_off, f) for a state; undefined ratios come out as NaN."""

    def __init__(self, X0, D=None):
        X0 = _check_square(X0)
        self.D = default_target(X0.shape[0]) if D is None else _check_square(D)
        self._ev0 = sym_eigen(X0).values
        self._ev0_norm = float(np.linalg.norm(self._ev0))
        self._off0 = _offdiag_norm(X0)

    def __call__(self, X) -> tuple[float, float, float]:
        ev = sym_eigen(X).values
        dev = float(np.linalg.norm(self._ev0 - ev)) / self._ev0_norm if self._ev0_norm else math.nan
        doff = _offdiag_norm(X) / self._off0 if self._off0 else math.nan
        return dev, doff, objective_f(X, self.D)


@dataclass
class TrajectoryLog:
    times: np.ndarray
    d_ev: np.ndarray
    d_off: np.ndarray
    f: np.ndarray
    accepted_steps: int
    rejected_steps: int
    final_state: np.ndarray
    singular_flag_count: int = 0
    truncated: bool = False
    states: list | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.times)

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def first_time_below(self, threshold: float, key: str = "d_off") -> float:
        """Earliest sample time with ``key <= threshold``; ``inf`` if never reached."""
        vals = getattr(self, key)
        hit = np.nonzero(vals <= threshold)[0]
        return float(self.times[hit[0]]) if hit.size else math.inf


def rk45_integrate(field: Callable[[np.ndarray], np.ndarray], X0, cfg: IntegratorConfig,
                   monitor: Callable[[np.ndarray], tuple[float, float, float]] | None = None,
                   keep_states: bool = False, exact_samples: bool = False) -> TrajectoryLog:
    """Integrate ``X' = field(X)`` from ``X0`` on ``[0, cfg.t_final]``.

    ``monitor`` maps a state to ``(d_ev, d_off, f)``; it defaults to a
    :class:`TrajectoryMonitor` with target ``diag(1..n)``. With
    ``exact_samples`` steps are shortened to land on every sample point, so
    the recorded times are exactly ``k * sample_interval``. If
    ``field`` has a ``singular_count`` attribute its increase is reported.

    Raises :class:`StiffnessError` when the step size falls below
    ``1e-14 * t_final``. Hitting ``max_steps`` returns a partial log with
    ``truncated=True``.
    """
    X0 = _check_square(X0)
    if not np.all(np.isfinite(X0)):
        raise IntegratorError("initial state has non-finite entries")
    if monitor is None:
        monitor = TrajectoryMonitor(X0)
    T = float(cfg.t_final)
    dt = float(cfg.sample_interval)
    n_samples = max(1, math.ceil(T / dt - 1e-9))
    h_min = 1e-14 * T
    singular0 = getattr(field, "singular_count", 0)

    def rhs(v):
        return vech(field(unvech(v)))

    def sample_time(k):
        return T if k >= n_samples else k * dt

    y = vech(X0)
    t = 0.0
    h = cfg.first_step()
    times, mons, states = [0.0], [monitor(unvech(y))], [unvech(y)] if keep_states else None
    k_next = 1
    accepted = rejected = 0
    truncated = False
    just_rejected = False
    K = np.empty((7, y.size))
    K[0] = rhs(y)

    while t < T:
        if accepted + rejected >= cfg.max_steps:
            truncated = True
            break
        target = sample_time(k_next) if exact_samples else T
        clipped = h >= target - t
        h_step = target - t if clipped else h
        with np.errstate(over="ignore", invalid="ignore"):
            for s in range(1, 6):
                K[s] = rhs(y + h_step * (A[s] @ K[:s]))
            y_new = y + h_step * (A[6] @ K[:6])
            K[6] = rhs(y_new)
            err_vec = h_step * (E @ K)
            scale = cfg.abstol + cfg.reltol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale)) if y.size else 0.0
        if not np.isfinite(err):
            # overflow in a trial step: reject hard and retry smaller
            err = math.inf

        if err <= 1.0:
            accepted += 1
            t = target if clipped else t + h_step
            y = y_new
            K[0] = K[6]
            if t >= sample_time(k_next) or t >= T:
                X = unvech(y)
                times.append(t)
                mons.append(monitor(X))
                if keep_states:
                    states.append(X)
                while k_next < n_samples and sample_time(k_next) <= t:
                    k_next += 1
                if t >= T:
                    k_next = n_samples
            fac = FAC_MAX if err == 0.0 else min(FAC_MAX, SAFETY * err ** -0.2)
            if just_rejected:
                fac = min(fac, 1.0)
            just_rejected = False
            # a clipped step does not invalidate the larger proposal
            h = max(h, h_step * fac) if clipped else h_step * fac
        else:
            rejected += 1
            just_rejected = True
            h = h_step * (FAC_MIN if math.isinf(err) else max(FAC_MIN, SAFETY * err ** -0.2))
            if h < h_min:
                raise StiffnessError(f"step size {h:.3e} underflow at t={t:.6g}")

    mons = np.array(mons, dtype=float).reshape(-1, 3)
    return TrajectoryLog(
        times=np.array(times),
        d_ev=mons[:, 0],
        d_off=mons[:, 1],
        f=mons[:, 2],
        accepted_steps=accepted,
        rejected_steps=rejected,
        final_state=unvech(y),
        singular_flag_count=getattr(field, "singular_count", 0) - singular0,
        truncated=truncated,
        states=states,
    )

"""Linear Kalman filter with per-step observation feedback, likelihood, smoother.

The filter follows the classic measurement/time-update recursions for

    x_t = F x_{t-1} + B u_{t-1} + G w_t,   w_t ~ N(0, Q)
    y_t = H_t x_t + eps_t,                 eps_t ~ N(0, R_t)

with a scalar observation whose row H_t and variance R_t may depend on the
data history and on the filter's own previous residual and predicted state
(the feedback contract used by the conditional-variance models). A model
without a seed residual starts by updating the prior directly; a feedback
model propagates the prior through one time update driven by the seeded
residual before its first measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Sequence

import numpy as np

from ._util import atomic_write_text
from .ingest import ReturnSeries

__all__ = [
    "FilterNumericalError",
    "SystemMatrices",
    "ObservationStep",
    "FilterOutput",
    "SmoothedOutput",
    "TimeInvariantModel",
    "run_filter",
    "log_likelihood",
    "rts_smooth",
    "write_states_csv",
]

LOG_2PI = math.log(2.0 * math.pi)


class FilterNumericalError(ArithmeticError):
    """Non-finite state or nonpositive innovation variance at `step`."""

    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True)
class SystemMatrices:
    """Transition F (n,n), optional control map B (n,d), noise loading G (n,q), Q (q,q)."""

    F: np.ndarray
    B: np.ndarray | None
    G: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        F = np.atleast_2d(np.asarray(self.F, dtype=float))
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        B = None if self.B is None else np.atleast_2d(np.asarray(self.B, dtype=float))
        n = F.shape[0]
        if F.shape != (n, n):
            raise ValueError("F must be square")
        if G.shape[0] != n or Q.shape != (G.shape[1], G.shape[1]):
            raise ValueError("G/Q dimensions inconsistent with F")
        if B is not None and B.shape[0] != n:
            raise ValueError("B row count must match state dimension")
        if not np.allclose(Q, Q.T):
            raise ValueError("Q must be symmetric")
        if np.any(np.linalg.eigvalsh(0.5 * (Q + Q.T)) < -1e-12):
            raise ValueError("Q must be positive semidefinite")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "Q", Q)

    @property
    def state_dim(self) -> int:
        return self.F.shape[0]


@dataclass(frozen=True)
class ObservationStep:
    """Scalar observation row H (n,), variance R > 0, and a flag when R was floored."""

    H: np.ndarray
    R: float
    floored: bool = False


@dataclass
class FilterOutput:
    """Per-step filter quantities plus the prediction-error log-likelihood.

    Arrays are indexed by filtered step j; `start_index` maps j to the data
    index t = start_index + j. `x_next`/`p_next` hold the one-step-ahead
    prediction made at each step (x_{t+1|t}, P_{t+1|t}).
    """

    start_index: int
    e: np.ndarray
    r_e: np.ndarray
    gain: np.ndarray
    x_filt: np.ndarray
    p_filt: np.ndarray
    x_next: np.ndarray
    p_next: np.ndarray
    log_lik: float
    floor_hits: int

    @property
    def n_steps(self) -> int:
        return len(self.e)


@dataclass
class SmoothedOutput:
    """Fixed-interval smoothed states x_{t|T} and covariances P_{t|T}."""

    start_index: int
    x_smooth: np.ndarray
    p_smooth: np.ndarray


@dataclass(frozen=True)
class TimeInvariantModel:
    """Fixed-matrix model: constant H and R, optional known control sequence.

    `controls[t]` is the input u_t applied in the transition from t to t+1.
    """

    system: SystemMatrices
    H: np.ndarray
    R: float
    controls: np.ndarray | None = None
    start_index: int = 0

    def seed_residual(self, y: np.ndarray) -> float | None:
        return None

    def control(self, t: int, y: np.ndarray, prev_residual: float | None) -> np.ndarray | None:
        if self.controls is None or t - 1 >= len(self.controls):
            return None
        return np.asarray(self.controls[t - 1], dtype=float)

    def observe(self, t: int, y: np.ndarray, x_pred: np.ndarray) -> ObservationStep:
        return ObservationStep(H=np.asarray(self.H, dtype=float), R=float(self.R))


def _series_values(data) -> np.ndarray:
    if isinstance(data, ReturnSeries):
        return data.values
    return np.asarray(data, dtype=float)


def _sym(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


def _require_finite(step: int, what: str, *arrays) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise FilterNumericalError(step, f"non-finite {what}")


def run_filter(model, data, init: tuple[np.ndarray, np.ndarray]) -> FilterOutput:
    """Filter `data` through `model` starting from prior mean/covariance `init`.

    The model supplies `system`, `start_index`, `seed_residual(y)`,
    `control(t, y, prev_residual)` and `observe(t, y, x_pred)`. Raises
    FilterNumericalError (with the failing step) on numerical breakdown.
    """
    y = _series_values(data)
    sys = model.system
    F, B, G, Q = sys.F, sys.B, sys.G, sys.Q
    n = sys.state_dim
    GQG = G @ Q @ G.T
    eye = np.eye(n)

    x0 = np.asarray(init[0], dtype=float).reshape(n)
    P0 = np.asarray(init[1], dtype=float)
    if P0.shape != (n, n):
        raise ValueError("P0 shape inconsistent with state dimension")
    if not np.allclose(P0, P0.T):
        raise ValueError("P0 must be symmetric")

    t0 = model.start_index
    steps = range(t0, len(y))
    T = len(steps)
    if T == 0:
        raise ValueError("no observations to filter")

    e = np.empty(T)
    r_e = np.empty(T)
    gain = np.empty((T, n))
    x_filt = np.empty((T, n))
    p_filt = np.empty((T, n, n))
    x_next = np.empty((T, n))
    p_next = np.empty((T, n, n))

    resid_prev = model.seed_residual(y)
    floor_hits = 0
    x_cur, P_cur = x0, _sym(P0)

    for j, t in enumerate(steps):
        if j == 0 and resid_prev is None:
            x_pred, P_pred = x_cur, P_cur
        else:
            u = model.control(t, y, resid_prev)
            x_pred = F @ x_cur
            if u is not None:
                if B is None:
                    raise ValueError("model emitted a control input but B is None")
                x_pred = x_pred + B @ np.asarray(u, dtype=float)
            P_pred = _sym(F @ P_cur @ F.T + GQG)
        _require_finite(t, "predicted state", x_pred, P_pred)

        step = model.observe(t, y, x_pred)
        H = np.asarray(step.H, dtype=float).reshape(n)
        floor_hits += bool(step.floored)

        ej = float(y[t] - H @ x_pred)
        PH = P_pred @ H
        rej = float(H @ PH + step.R)
        if not math.isfinite(ej) or not math.isfinite(rej):
            raise FilterNumericalError(t, "non-finite innovation")
        if rej <= 0.0:
            raise FilterNumericalError(t, f"nonpositive innovation variance {rej}")
        K = PH / rej
        x_cur = x_pred + K * ej
        P_cur = _sym((eye - np.outer(K, H)) @ P_pred)
        _require_finite(t, "filtered state", x_cur, P_cur)

        e[j] = ej
        r_e[j] = rej
        gain[j] = K
        x_filt[j] = x_cur
        p_filt[j] = P_cur
        if j > 0:
            x_next[j - 1] = x_pred
            p_next[j - 1] = P_pred
        resid_prev = ej

    # one-step-ahead prediction beyond the sample completes the per-step record
    u = model.control(len(y), y, resid_prev)
    x_pred = F @ x_cur
    if u is not None and B is not None:
        x_pred = x_pred + B @ np.asarray(u, dtype=float)
    x_next[T - 1] = x_pred
    p_next[T - 1] = _sym(F @ P_cur @ F.T + GQG)

    out = FilterOutput(
        start_index=t0,
        e=e,
        r_e=r_e,
        gain=gain,
        x_filt=x_filt,
        p_filt=p_filt,
        x_next=x_next,
        p_next=p_next,
        log_lik=0.0,
        floor_hits=floor_hits,
    )
    out.log_lik = log_likelihood(out)
    return out


def log_likelihood(fo: FilterOutput) -> float:
    """Gaussian log-likelihood from the prediction-error decomposition.

    The constant is (T/2) ln 2pi with T the number of filtered observations.
    """
    T = fo.n_steps
    return float(-0.5 * T * LOG_2PI - 0.5 * np.sum(np.log(fo.r_e) + fo.e**2 / fo.r_e))


def rts_smooth(fo: FilterOutput, sys: SystemMatrices) -> SmoothedOutput:
    """Fixed-interval smoother over a completed filter run.

    Backward gain C_t = P_{t|t} F' pinv(P_{t+1|t}); the pseudo-inverse keeps
    singular predicted covariances (exactly degenerate priors) well-defined.
    """
    F = sys.F
    T = fo.n_steps
    n = sys.state_dim
    if fo.x_filt.shape[1] != n:
        raise ValueError(
            f"state dimension mismatch: filter ran with {fo.x_filt.shape[1]}, system has {n}"
        )
    x_s = np.empty((T, n))
    p_s = np.empty((T, n, n))
    x_s[T - 1] = fo.x_filt[T - 1]
    p_s[T - 1] = fo.p_filt[T - 1]
    for j in range(T - 2, -1, -1):
        P_next_inv = np.linalg.pinv(fo.p_next[j], hermitian=True)
        C = fo.p_filt[j] @ F.T @ P_next_inv
        x_s[j] = fo.x_filt[j] + C @ (x_s[j + 1] - fo.x_next[j])
        p_s[j] = _sym(fo.p_filt[j] + C @ (p_s[j + 1] - fo.p_next[j]) @ C.T)
    return SmoothedOutput(start_index=fo.start_index, x_smooth=x_s, p_smooth=p_s)


def _csv_cell(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def write_states_csv(
    out: FilterOutput | SmoothedOutput,
    path: str | Path,
    dates: Sequence[date] | None = None,
) -> None:
    """Serialize filtered or smoothed states as `t,end_date,state_0,state_1,p00,p11,e,r_e`.

    `dates` indexes the full data series; rows beyond the available state
    dimension, and e/r_e for smoothed output, are left empty.
    """
    smoothed = isinstance(out, SmoothedOutput)
    x = out.x_smooth if smoothed else out.x_filt
    p = out.p_smooth if smoothed else out.p_filt
    n = x.shape[1]
    lines = ["t,end_date,state_0,state_1,p00,p11,e,r_e"]
    for j in range(x.shape[0]):
        t = out.start_index + j
        d = dates[t].isoformat() if dates is not None else ""
        s1 = _csv_cell(x[j, 1]) if n > 1 else ""
        p11 = _csv_cell(p[j, 1, 1]) if n > 1 else ""
        ecell = "" if smoothed else _csv_cell(out.e[j])
        rcell = "" if smoothed else _csv_cell(out.r_e[j])
        lines.append(
            f"{t},{d},{_csv_cell(x[j, 0])},{s1},{_csv_cell(p[j, 0, 0])},{p11},{ecell},{rcell}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")

"""Forward simulation of the five models at known parameters.

The generative recursions drive the conditional variance with the true
innovations (sigma_{t-1} eps_{t-1}), unlike filtering, which substitutes the
Kalman residual for the unobservable shock. Randomness comes from a Philox
(4x64, counter-based) bit generator through numpy's ziggurat normal sampler,
so output is bit-reproducible for a given seed across platforms; the normal
draws are taken in a fixed order (all observation shocks, then all
coefficient-walk shocks) regardless of model kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._util import atomic_write_text
from .ingest import ReturnSeries, month_ends
from .models import (
    GarchMTheta,
    ModelSpec,
    Theta,
    TvarTheta,
    persistence,
    validate_theta,
)

__all__ = ["SimOutput", "simulate", "write_sim_csv"]


@dataclass(frozen=True)
class SimOutput:
    """Simulated returns with the true coefficient path (and variance path)."""

    returns: ReturnSeries
    true_beta: np.ndarray
    true_h: np.ndarray | None
    seed: int


def simulate(spec: ModelSpec, theta: Theta, length: int, seed: int,
             beta0: float = 0.0) -> SimOutput:
    """Generate `length` observations from `spec` at `theta`, deterministically.

    The returned series has population mean zero but is not flagged
    mean-adjusted; adjust before calibration. `beta0` sets the initial
    first-lag coefficient.
    """
    validate_theta(spec, theta)
    if length < 2:
        raise ValueError("length must be at least 2")
    rng = np.random.Generator(np.random.Philox(key=seed))
    eps = rng.standard_normal(length)
    if spec.kind == "tvar":
        return _simulate_tvar(spec, theta, length, seed, beta0, eps, rng)
    return _simulate_garch(spec, theta, length, seed, beta0, eps, rng)


def _simulate_tvar(spec: ModelSpec, theta: TvarTheta, length: int, seed: int,
                   beta0: float, eps: np.ndarray, rng: np.random.Generator) -> SimOutput:
    n = spec.ar_order
    w = rng.standard_normal((length, n))
    sig_w = np.sqrt(np.asarray(theta.sigma2_w))
    sig_eps = math.sqrt(theta.sigma2_eps)
    beta = np.zeros((length, n))
    beta[0, 0] = beta0
    y = np.empty(length)
    for t in range(length):
        if t > 0:
            beta[t] = beta[t - 1] + sig_w * w[t]
        lag_part = 0.0
        for i in range(1, n + 1):
            if t - i >= 0:
                lag_part += beta[t, i - 1] * y[t - i]
        y[t] = lag_part + sig_eps * eps[t]
    returns = ReturnSeries(dates=month_ends(length), values=y, mean_adjusted=False)
    return SimOutput(returns=returns, true_beta=beta[:, 0].copy(), true_h=None, seed=seed)


def _simulate_garch(spec: ModelSpec, theta, length: int, seed: int,
                    beta0: float, eps: np.ndarray, rng: np.random.Generator) -> SimOutput:
    w = rng.standard_normal(length)
    sig_w = math.sqrt(theta.sigma2_w)
    delta = theta.delta if isinstance(theta, GarchMTheta) else 0.0
    if spec.kind == "tgarch":
        a_pos, a_neg = theta.a1_plus, theta.a1_minus
        extra_pos = 0.0
    elif spec.kind == "agarch":
        a_pos = a_neg = theta.a1
        extra_pos = theta.a1_plus
    else:
        a_pos = a_neg = theta.a1
        extra_pos = 0.0
    b1, omega = theta.b1, theta.omega
    h = np.empty(length)
    beta = np.empty(length)
    y = np.empty(length)
    h[0] = omega / (1.0 - persistence(theta))
    beta[0] = beta0
    shock = math.sqrt(h[0]) * eps[0]
    y[0] = delta * h[0] + shock
    for t in range(1, length):
        if shock > 0.0:
            arch = a_pos * (shock * shock) + extra_pos * (shock * shock)
        elif shock < 0.0:
            arch = a_neg * (shock * shock)
        else:
            arch = 0.0
        h[t] = omega + arch + b1 * h[t - 1]
        beta[t] = beta[t - 1] + sig_w * w[t]
        shock = math.sqrt(h[t]) * eps[t]
        y[t] = beta[t] * y[t - 1] + delta * h[t] + shock
    returns = ReturnSeries(dates=month_ends(length), values=y, mean_adjusted=False)
    return SimOutput(returns=returns, true_beta=beta, true_h=h, seed=seed)


def write_sim_csv(sim: SimOutput, path: str | Path) -> None:
    """Serialize as `t,y,true_beta,true_h` (true_h empty for the homoscedastic kind)."""
    lines = ["t,y,true_beta,true_h"]
    for t in range(len(sim.returns)):
        hcell = "" if sim.true_h is None else repr(float(sim.true_h[t]))
        lines.append(
            f"{t},{float(sim.returns.values[t])!r},{float(sim.true_beta[t])!r},{hcell}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")

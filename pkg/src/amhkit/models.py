"""The five time-varying AR models in residual-feedback state-space form.

Kinds:

* ``tvar``   -- AR(n) with random-walk coefficients and constant noise variance;
  state is the coefficient vector.
* ``garch``  -- AR(1) coefficient plus conditional variance h driven by the
  squared previous filter residual through the control input.
* ``garchm`` -- as ``garch`` with the predicted variance entering the return
  equation with coefficient delta (risk-premium term).
* ``tgarch`` -- threshold variant: separate impacts for positive and negative
  previous residuals.
* ``agarch`` -- asymmetric variant: an extra impact from the positive part of
  the previous residual.

For the conditional-variance kinds the state is [h_t, beta_t], the observation
variance is the filter's own predicted h (floored at H_FLOOR), and the control
input carries the squared previous Kalman residual, so one instance is pure
configuration and all run-to-run feedback lives inside the filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .statespace import ObservationStep, SystemMatrices

__all__ = [
    "KINDS",
    "H_FLOOR",
    "ModelSpec",
    "TvarTheta",
    "GarchTheta",
    "GarchMTheta",
    "TgarchTheta",
    "AgarchTheta",
    "Theta",
    "ModelInstance",
    "validate_theta",
    "persistence",
    "unconditional_variance",
    "param_names",
    "n_params",
    "theta_to_vector",
    "vector_to_theta",
    "theta_to_unconstrained",
    "unconstrained_to_theta",
    "theta_to_json",
    "theta_from_json",
    "default_theta",
    "default_init",
    "build_model",
]

KINDS = ("tvar", "garch", "garchm", "tgarch", "agarch")
GARCH_KINDS = ("garch", "garchm", "tgarch", "agarch")

# predicted h is floored before use as the observation variance
H_FLOOR = 1e-12

# exp() clamp keeping inverse transforms finite for arbitrarily large inputs
_EXP_MAX = 700.0


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    ar_order: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "tvar" and self.ar_order < 1:
            raise ValueError("ar_order must be >= 1")


@dataclass(frozen=True)
class TvarTheta:
    sigma2_w: tuple[float, ...]
    sigma2_eps: float


@dataclass(frozen=True)
class GarchTheta:
    omega: float
    a1: float
    b1: float
    sigma2_w: float


@dataclass(frozen=True)
class GarchMTheta:
    omega: float
    a1: float
    b1: float
    delta: float
    sigma2_w: float


@dataclass(frozen=True)
class TgarchTheta:
    omega: float
    a1_plus: float
    a1_minus: float
    b1: float
    sigma2_w: float


@dataclass(frozen=True)
class AgarchTheta:
    omega: float
    a1: float
    a1_plus: float
    b1: float
    sigma2_w: float


Theta = Union[TvarTheta, GarchTheta, GarchMTheta, TgarchTheta, AgarchTheta]

_THETA_CLASSES = {
    "tvar": TvarTheta,
    "garch": GarchTheta,
    "garchm": GarchMTheta,
    "tgarch": TgarchTheta,
    "agarch": AgarchTheta,
}


def _check(cond: bool, field: str, message: str) -> None:
    if not cond:
        raise ValueError(f"{field}: {message}")


def validate_theta(spec: ModelSpec, theta: Theta) -> None:
    """Check signs and the stationarity constraint, naming the offending field."""
    expected = _THETA_CLASSES[spec.kind]
    if not isinstance(theta, expected):
        raise ValueError(f"theta: expected {expected.__name__} for kind {spec.kind!r}")
    if spec.kind == "tvar":
        _check(len(theta.sigma2_w) == spec.ar_order, "sigma2_w",
               f"expected {spec.ar_order} variances, got {len(theta.sigma2_w)}")
        for i, s in enumerate(theta.sigma2_w):
            _check(s >= 0, f"sigma2_w{i + 1}", f"must be >= 0, got {s}")
        _check(theta.sigma2_eps > 0, "sigma2_eps", f"must be > 0, got {theta.sigma2_eps}")
        return
    _check(theta.omega > 0, "omega", f"must be > 0, got {theta.omega}")
    _check(theta.b1 >= 0, "b1", f"must be >= 0, got {theta.b1}")
    _check(theta.sigma2_w >= 0, "sigma2_w", f"must be >= 0, got {theta.sigma2_w}")
    if spec.kind in ("garch", "garchm"):
        _check(theta.a1 >= 0, "a1", f"must be >= 0, got {theta.a1}")
    elif spec.kind == "tgarch":
        _check(theta.a1_plus >= 0, "a1_plus", f"must be >= 0, got {theta.a1_plus}")
        _check(theta.a1_minus >= 0, "a1_minus", f"must be >= 0, got {theta.a1_minus}")
    else:
        _check(theta.a1 >= 0, "a1", f"must be >= 0, got {theta.a1}")
        _check(theta.a1_plus >= 0, "a1_plus", f"must be >= 0, got {theta.a1_plus}")
    s = persistence(theta)
    _check(s < 1, _PERSISTENCE_LABEL[spec.kind], f"must be < 1, got {s}")


_PERSISTENCE_LABEL = {
    "garch": "a1 + b1",
    "garchm": "a1 + b1",
    "tgarch": "(a1_plus + a1_minus)/2 + b1",
    "agarch": "a1 + a1_plus/2 + b1",
}


def persistence(theta: Theta) -> float:
    """Stationarity sum of the variance recursion (must be < 1)."""
    if isinstance(theta, (GarchTheta, GarchMTheta)):
        return theta.a1 + theta.b1
    if isinstance(theta, TgarchTheta):
        return 0.5 * (theta.a1_plus + theta.a1_minus) + theta.b1
    if isinstance(theta, AgarchTheta):
        return theta.a1 + 0.5 * theta.a1_plus + theta.b1
    raise TypeError("persistence is defined for the conditional-variance kinds only")


def unconditional_variance(theta: Theta) -> float:
    """Long-run variance omega / (1 - persistence)."""
    return theta.omega / (1.0 - persistence(theta))


def param_names(spec: ModelSpec) -> tuple[str, ...]:
    if spec.kind == "tvar":
        return tuple(f"sigma2_w{i + 1}" for i in range(spec.ar_order)) + ("sigma2_eps",)
    return {
        "garch": ("omega", "a1", "b1", "sigma2_w"),
        "garchm": ("omega", "a1", "b1", "delta", "sigma2_w"),
        "tgarch": ("omega", "a1_plus", "a1_minus", "b1", "sigma2_w"),
        "agarch": ("omega", "a1", "a1_plus", "b1", "sigma2_w"),
    }[spec.kind]


def n_params(spec: ModelSpec) -> int:
    return len(param_names(spec))


def theta_to_vector(spec: ModelSpec, theta: Theta) -> np.ndarray:
    """Natural-space parameter vector ordered as `param_names`."""
    if spec.kind == "tvar":
        return np.array([*theta.sigma2_w, theta.sigma2_eps], dtype=float)
    return np.array([getattr(theta, name) for name in param_names(spec)], dtype=float)


def vector_to_theta(spec: ModelSpec, vec) -> Theta:
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (n_params(spec),):
        raise ValueError(f"expected {n_params(spec)} parameters, got shape {vec.shape}")
    if spec.kind == "tvar":
        return TvarTheta(sigma2_w=tuple(vec[:-1]), sigma2_eps=float(vec[-1]))
    kwargs = {name: float(v) for name, v in zip(param_names(spec), vec)}
    return _THETA_CLASSES[spec.kind](**kwargs)


# --- unconstrained reparameterization -------------------------------------
#
# Positive parameters map through log/exp. Each stationarity sum maps through
# a softmax-style logit: with weights w_i summing to s < 1, the coordinates
# are c_i = ln(w_i) - ln(1 - s), inverted stably so arbitrarily large inputs
# still land strictly inside the constraint set. delta passes through as-is.

def _simplex_forward(weights: np.ndarray, fields: tuple[str, ...]) -> np.ndarray:
    s = weights.sum()
    for w, f in zip(weights, fields):
        if w <= 0:
            raise ValueError(f"{f}: must be strictly positive for the unconstrained map")
    if s >= 1:
        raise ValueError(f"{' + '.join(fields)}: must be strictly below 1, got {s}")
    return np.log(weights) - math.log1p(-s)


def _simplex_inverse(c: np.ndarray) -> np.ndarray:
    m = max(0.0, float(np.max(c)))
    expc = np.exp(c - m)
    w = expc / (math.exp(-m) + expc.sum())
    # extreme inputs can round the weight sum up to 1.0; keep it strictly inside
    s = float(w.sum())
    if s >= 1.0 - 1e-12:
        w = w * ((1.0 - 1e-12) / s)
    return w


def _log_forward(x: float, field: str) -> float:
    if x <= 0:
        raise ValueError(f"{field}: must be strictly positive for the unconstrained map")
    return math.log(x)


def _exp_inverse(v: float) -> float:
    return math.exp(min(max(v, -_EXP_MAX), _EXP_MAX))


_SIMPLEX_FIELDS = {
    "garch": ("a1", "b1"),
    "garchm": ("a1", "b1"),
    "tgarch": ("a1_plus/2", "a1_minus/2", "b1"),
    "agarch": ("a1", "a1_plus/2", "b1"),
}


def _simplex_weights(spec: ModelSpec, theta: Theta) -> np.ndarray:
    if spec.kind in ("garch", "garchm"):
        return np.array([theta.a1, theta.b1])
    if spec.kind == "tgarch":
        return np.array([0.5 * theta.a1_plus, 0.5 * theta.a1_minus, theta.b1])
    return np.array([theta.a1, 0.5 * theta.a1_plus, theta.b1])


def theta_to_unconstrained(spec: ModelSpec, theta: Theta) -> np.ndarray:
    """Map an interior theta to R^p (inverse of `unconstrained_to_theta`)."""
    validate_theta(spec, theta)
    if spec.kind == "tvar":
        return np.array(
            [_log_forward(s, f"sigma2_w{i + 1}") for i, s in enumerate(theta.sigma2_w)]
            + [_log_forward(theta.sigma2_eps, "sigma2_eps")]
        )
    c = _simplex_forward(_simplex_weights(spec, theta), _SIMPLEX_FIELDS[spec.kind])
    head = [_log_forward(theta.omega, "omega")]
    tail = [_log_forward(theta.sigma2_w, "sigma2_w")]
    if spec.kind == "garchm":
        return np.array(head + list(c) + [theta.delta] + tail)
    return np.array(head + list(c) + tail)


def unconstrained_to_theta(spec: ModelSpec, v) -> Theta:
    """Map any real vector to a theta satisfying the constraints."""
    v = np.asarray(v, dtype=float)
    p = n_params(spec)
    if v.shape != (p,):
        raise ValueError(f"expected vector of length {p}, got shape {v.shape}")
    if spec.kind == "tvar":
        return TvarTheta(
            sigma2_w=tuple(_exp_inverse(x) for x in v[:-1]),
            sigma2_eps=_exp_inverse(v[-1]),
        )
    omega = _exp_inverse(v[0])
    if spec.kind in ("garch", "garchm"):
        w = _simplex_inverse(v[1:3])
        a1, b1 = float(w[0]), float(w[1])
        if spec.kind == "garch":
            return GarchTheta(omega=omega, a1=a1, b1=b1, sigma2_w=_exp_inverse(v[3]))
        return GarchMTheta(omega=omega, a1=a1, b1=b1, delta=float(v[3]),
                           sigma2_w=_exp_inverse(v[4]))
    w = _simplex_inverse(v[1:4])
    if spec.kind == "tgarch":
        return TgarchTheta(omega=omega, a1_plus=2.0 * float(w[0]),
                           a1_minus=2.0 * float(w[1]), b1=float(w[2]),
                           sigma2_w=_exp_inverse(v[4]))
    return AgarchTheta(omega=omega, a1=float(w[0]), a1_plus=2.0 * float(w[1]),
                       b1=float(w[2]), sigma2_w=_exp_inverse(v[4]))


def theta_to_json(theta: Theta) -> dict:
    """Plain-dict form with the canonical field names."""
    if isinstance(theta, TvarTheta):
        return {"sigma2_w": list(theta.sigma2_w), "sigma2_eps": theta.sigma2_eps}
    out = {"omega": theta.omega}
    if isinstance(theta, (GarchTheta, GarchMTheta, AgarchTheta)):
        out["a1"] = theta.a1
    if isinstance(theta, (TgarchTheta, AgarchTheta)):
        out["a1_plus"] = theta.a1_plus
    if isinstance(theta, TgarchTheta):
        out["a1_minus"] = theta.a1_minus
    out["b1"] = theta.b1
    if isinstance(theta, GarchMTheta):
        out["delta"] = theta.delta
    out["sigma2_w"] = theta.sigma2_w
    return out


def theta_from_json(spec: ModelSpec, payload: dict) -> Theta:
    """Parse and validate a theta dict for `spec`, rejecting missing/extra keys."""
    if spec.kind == "tvar":
        expected = {"sigma2_w", "sigma2_eps"}
    else:
        expected = set(param_names(spec))
    got = set(payload)
    if got != expected:
        missing = expected - got
        extra = got - expected
        parts = []
        if missing:
            parts.append(f"missing {sorted(missing)}")
        if extra:
            parts.append(f"unexpected {sorted(extra)}")
        raise ValueError(f"theta fields for {spec.kind!r}: " + "; ".join(parts))
    if spec.kind == "tvar":
        sw = payload["sigma2_w"]
        if not isinstance(sw, (list, tuple)):
            raise ValueError("sigma2_w: must be a list for tvar")
        theta: Theta = TvarTheta(sigma2_w=tuple(float(x) for x in sw),
                                 sigma2_eps=float(payload["sigma2_eps"]))
    else:
        theta = _THETA_CLASSES[spec.kind](**{k: float(v) for k, v in payload.items()})
    validate_theta(spec, theta)
    return theta


def default_theta(spec: ModelSpec, data) -> Theta:
    """Standard initialization: modest ARCH, strong GARCH memory, tiny walk variance."""
    y = data.values if hasattr(data, "values") else np.asarray(data, dtype=float)
    var_y = float(np.var(y, ddof=1))
    if spec.kind == "tvar":
        return TvarTheta(sigma2_w=(1e-5,) * spec.ar_order, sigma2_eps=var_y)
    omega = 0.1 * var_y
    if spec.kind == "garch":
        return GarchTheta(omega=omega, a1=0.1, b1=0.8, sigma2_w=1e-5)
    if spec.kind == "garchm":
        return GarchMTheta(omega=omega, a1=0.1, b1=0.8, delta=0.0, sigma2_w=1e-5)
    if spec.kind == "tgarch":
        return TgarchTheta(omega=omega, a1_plus=0.1, a1_minus=0.1, b1=0.8, sigma2_w=1e-5)
    return AgarchTheta(omega=omega, a1=0.1, a1_plus=0.1, b1=0.8, sigma2_w=1e-5)


def default_init(spec: ModelSpec, data) -> tuple[np.ndarray, np.ndarray]:
    """Filter prior: coefficients at zero with unit covariance; h at the sample variance.

    h0 = 0 would make the first observation variance degenerate, so the
    variance component starts at the sample variance of the data instead.
    """
    if spec.kind == "tvar":
        n = spec.ar_order
        return np.zeros(n), np.eye(n)
    y = data.values if hasattr(data, "values") else np.asarray(data, dtype=float)
    return np.array([float(np.var(y, ddof=1)), 0.0]), np.eye(2)


@dataclass(frozen=True)
class ModelInstance:
    """Immutable model configuration plus the pure per-step observation rule."""

    spec: ModelSpec
    theta: Theta
    system: SystemMatrices
    start_index: int
    beta_index: int

    def seed_residual(self, y: np.ndarray) -> float | None:
        """Stand-in for the unavailable pre-sample residual (beta-0 prior)."""
        if self.spec.kind == "tvar":
            return None
        return float(y[0])

    def control(self, t: int, y: np.ndarray, prev_residual: float | None) -> np.ndarray | None:
        if self.spec.kind == "tvar":
            return None
        r = prev_residual
        r2 = r * r
        if self.spec.kind == "tgarch":
            return np.array([1.0, r2 if r > 0 else 0.0, r2 if r < 0 else 0.0])
        if self.spec.kind == "agarch":
            rp = r if r > 0 else 0.0
            return np.array([1.0, r2, rp * rp])
        return np.array([1.0, r2])

    def observe(self, t: int, y: np.ndarray, x_pred: np.ndarray) -> ObservationStep:
        if self.spec.kind == "tvar":
            n = self.spec.ar_order
            lags = y[t - n : t][::-1]
            return ObservationStep(H=lags, R=self.theta.sigma2_eps)
        h_pred = float(x_pred[0])
        floored = h_pred < H_FLOOR
        R = H_FLOOR if floored else h_pred
        lead = self.theta.delta if self.spec.kind == "garchm" else 0.0
        return ObservationStep(H=np.array([lead, y[t - 1]]), R=R, floored=floored)


def build_model(spec: ModelSpec, theta: Theta) -> ModelInstance:
    """Realize `spec` at `theta` as system matrices plus the observation rule."""
    validate_theta(spec, theta)
    if spec.kind == "tvar":
        n = spec.ar_order
        system = SystemMatrices(
            F=np.eye(n), B=None, G=np.eye(n), Q=np.diag(theta.sigma2_w)
        )
        return ModelInstance(spec=spec, theta=theta, system=system,
                             start_index=n, beta_index=0)
    F = np.array([[theta.b1, 0.0], [0.0, 1.0]])
    G = np.array([[0.0], [1.0]])
    Q = np.array([[theta.sigma2_w]])
    if spec.kind == "tgarch":
        B = np.array([[theta.omega, theta.a1_plus, theta.a1_minus], [0.0, 0.0, 0.0]])
    elif spec.kind == "agarch":
        B = np.array([[theta.omega, theta.a1, theta.a1_plus], [0.0, 0.0, 0.0]])
    else:
        B = np.array([[theta.omega, theta.a1], [0.0, 0.0]])
    system = SystemMatrices(F=F, B=B, G=G, Q=Q)
    return ModelInstance(spec=spec, theta=theta, system=system,
                         start_index=1, beta_index=1)

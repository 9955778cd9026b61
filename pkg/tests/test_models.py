import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from amhkit.models import (
    AgarchTheta,
    GarchMTheta,
    GarchTheta,
    ModelSpec,
    TgarchTheta,
    TvarTheta,
    build_model,
    default_init,
    default_theta,
    n_params,
    param_names,
    persistence,
    theta_from_json,
    theta_to_json,
    theta_to_unconstrained,
    theta_to_vector,
    unconditional_variance,
    unconstrained_to_theta,
    validate_theta,
)
from amhkit.simulate import simulate
from amhkit.statespace import run_filter

GARCH_THETA = GarchTheta(omega=5e-4, a1=0.25, b1=0.70, sigma2_w=1e-5)

ALL_SPECS = [
    (ModelSpec("tvar"), TvarTheta(sigma2_w=(1e-5,), sigma2_eps=0.004)),
    (ModelSpec("tvar", ar_order=2), TvarTheta(sigma2_w=(1e-5, 2e-5), sigma2_eps=0.004)),
    (ModelSpec("garch"), GARCH_THETA),
    (ModelSpec("garchm"), GarchMTheta(omega=5e-4, a1=0.25, b1=0.70, delta=-0.06, sigma2_w=1e-5)),
    (ModelSpec("tgarch"), TgarchTheta(omega=5e-4, a1_plus=0.2, a1_minus=0.31, b1=0.62, sigma2_w=1e-5)),
    (ModelSpec("agarch"), AgarchTheta(omega=5e-4, a1=0.12, a1_plus=0.2, b1=0.62, sigma2_w=1e-5)),
]


# --- constraints ------------------------------------------------------------

def test_validate_accepts_all_kinds():
    for spec, theta in ALL_SPECS:
        validate_theta(spec, theta)


@pytest.mark.parametrize(
    "spec,theta,field",
    [
        (ModelSpec("garch"), GarchTheta(omega=0.0, a1=0.2, b1=0.5, sigma2_w=1e-5), "omega"),
        (ModelSpec("garch"), GarchTheta(omega=1e-4, a1=-0.1, b1=0.5, sigma2_w=1e-5), "a1"),
        (ModelSpec("garch"), GarchTheta(omega=1e-4, a1=0.6, b1=0.5, sigma2_w=1e-5), "a1 \\+ b1"),
        (ModelSpec("garch"), GarchTheta(omega=1e-4, a1=0.2, b1=0.5, sigma2_w=-1e-5), "sigma2_w"),
        (ModelSpec("tgarch"), TgarchTheta(omega=1e-4, a1_plus=-0.1, a1_minus=0.1, b1=0.5, sigma2_w=0.0), "a1_plus"),
        (ModelSpec("tgarch"), TgarchTheta(omega=1e-4, a1_plus=0.9, a1_minus=0.9, b1=0.2, sigma2_w=0.0), "b1"),
        (ModelSpec("agarch"), AgarchTheta(omega=1e-4, a1=0.5, a1_plus=0.8, b1=0.2, sigma2_w=0.0), "a1_plus/2"),
        (ModelSpec("tvar"), TvarTheta(sigma2_w=(-1e-9,), sigma2_eps=1.0), "sigma2_w1"),
        (ModelSpec("tvar"), TvarTheta(sigma2_w=(1e-9,), sigma2_eps=0.0), "sigma2_eps"),
    ],
)
def test_validate_names_offending_field(spec, theta, field):
    with pytest.raises(ValueError, match=field):
        validate_theta(spec, theta)


def test_boundary_values_allowed():
    validate_theta(ModelSpec("garch"), GarchTheta(omega=1e-4, a1=0.0, b1=0.0, sigma2_w=0.0))
    validate_theta(ModelSpec("tvar"), TvarTheta(sigma2_w=(0.0,), sigma2_eps=1e-9))


def test_persistence_and_unconditional_variance():
    theta = GarchTheta(omega=0.2, a1=0.3, b1=0.5, sigma2_w=0.0)
    assert_allclose(persistence(theta), 0.8)
    assert_allclose(unconditional_variance(theta), 1.0)
    tg = TgarchTheta(omega=0.2, a1_plus=0.4, a1_minus=0.2, b1=0.5, sigma2_w=0.0)
    assert_allclose(persistence(tg), 0.8)
    ag = AgarchTheta(omega=0.2, a1=0.2, a1_plus=0.2, b1=0.5, sigma2_w=0.0)
    assert_allclose(persistence(ag), 0.8)


# --- state-space realization -------------------------------------------------

def test_garch_variance_step():
    # h=1, residual^2=1, (omega,a1,b1)=(0.2,0.3,0.5) -> next predicted h = 1.0
    theta = GarchTheta(omega=0.2, a1=0.3, b1=0.5, sigma2_w=1e-6)
    m = build_model(ModelSpec("garch"), theta)
    x = np.array([1.0, 0.3])
    u = m.control(5, None, 1.0)
    x_next = m.system.F @ x + m.system.B @ u
    assert_allclose(x_next[0], 1.0, atol=1e-15)
    assert_allclose(x_next[1], 0.3)  # beta untouched by the control


def test_garch_degenerate_recursion_settles_at_omega():
    theta = GarchTheta(omega=0.37, a1=0.0, b1=0.0, sigma2_w=1e-6)
    m = build_model(ModelSpec("garch"), theta)
    rng = np.random.default_rng(0)
    y = rng.standard_normal(30)
    fo = run_filter(m, y, default_init(ModelSpec("garch"), y))
    # every one-step-ahead h prediction after the first step equals omega
    assert_allclose(fo.x_next[:, 0], 0.37, atol=1e-12)


def test_model_shapes_and_start():
    for spec, theta in ALL_SPECS:
        m = build_model(spec, theta)
        if spec.kind == "tvar":
            n = spec.ar_order
            assert m.system.state_dim == n
            assert m.start_index == n
            assert m.beta_index == 0
            assert m.system.B is None
        else:
            assert m.system.state_dim == 2
            assert m.start_index == 1
            assert m.beta_index == 1
            assert m.system.F[0, 0] == theta.b1
            assert m.system.Q[0, 0] == theta.sigma2_w


def test_tvar_observation_row_uses_reversed_lags():
    theta = TvarTheta(sigma2_w=(1e-5, 1e-5), sigma2_eps=0.3)
    m = build_model(ModelSpec("tvar", ar_order=2), theta)
    y = np.array([10.0, 20.0, 30.0, 40.0])
    step = m.observe(3, y, np.zeros(2))
    assert_allclose(step.H, [30.0, 20.0])  # y_{t-1}, y_{t-2}
    assert step.R == 0.3


def test_garchm_observation_row_carries_delta():
    theta = GarchMTheta(omega=5e-4, a1=0.2, b1=0.5, delta=-0.06, sigma2_w=1e-5)
    m = build_model(ModelSpec("garchm"), theta)
    y = np.array([0.01, 0.02])
    step = m.observe(1, y, np.array([0.004, 0.0]))
    assert_allclose(step.H, [-0.06, 0.01])
    assert step.R == 0.004


def test_h_floor_reported():
    theta = GarchTheta(omega=1e-3, a1=0.2, b1=0.5, sigma2_w=1e-5)
    m = build_model(ModelSpec("garch"), theta)
    step = m.observe(1, np.array([0.0, 0.0]), np.array([-1.0, 0.0]))
    assert step.floored
    assert step.R == 1e-12


def test_control_indicators():
    m = build_model(ModelSpec("tgarch"),
                    TgarchTheta(omega=1e-4, a1_plus=0.2, a1_minus=0.3, b1=0.4, sigma2_w=0.0))
    assert_allclose(m.control(1, None, 2.0), [1.0, 4.0, 0.0])
    assert_allclose(m.control(1, None, -2.0), [1.0, 0.0, 4.0])
    assert_allclose(m.control(1, None, 0.0), [1.0, 0.0, 0.0])  # both indicators zero at 0
    ma = build_model(ModelSpec("agarch"),
                     AgarchTheta(omega=1e-4, a1=0.2, a1_plus=0.3, b1=0.4, sigma2_w=0.0))
    assert_allclose(ma.control(1, None, -2.0), [1.0, 4.0, 0.0])
    assert_allclose(ma.control(1, None, 2.0), [1.0, 4.0, 4.0])


def test_build_rejects_invalid_theta():
    with pytest.raises(ValueError, match="omega"):
        build_model(ModelSpec("garch"), GarchTheta(omega=-1.0, a1=0.1, b1=0.1, sigma2_w=0.0))


# --- reductions to GARCH(1,1) -------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_reductions_match_garch(seed):
    base = GARCH_THETA
    sim = simulate(ModelSpec("garch"), base, 200, seed=seed)
    y = sim.returns.values
    init = default_init(ModelSpec("garch"), y)
    ll = run_filter(build_model(ModelSpec("garch"), base), y, init).log_lik
    variants = [
        (ModelSpec("tgarch"),
         TgarchTheta(omega=base.omega, a1_plus=base.a1, a1_minus=base.a1, b1=base.b1,
                     sigma2_w=base.sigma2_w)),
        (ModelSpec("garchm"),
         GarchMTheta(omega=base.omega, a1=base.a1, b1=base.b1, delta=0.0,
                     sigma2_w=base.sigma2_w)),
        (ModelSpec("agarch"),
         AgarchTheta(omega=base.omega, a1=base.a1, a1_plus=0.0, b1=base.b1,
                     sigma2_w=base.sigma2_w)),
    ]
    for spec, theta in variants:
        fo = run_filter(build_model(spec, theta), y, init)
        assert abs(fo.log_lik - ll) <= 1e-10
        assert fo.floor_hits == 0


def test_predicted_variance_stays_positive():
    rng = np.random.default_rng(17)
    for spec, theta in ALL_SPECS:
        if spec.kind == "tvar":
            continue
        y = 0.05 * rng.standard_normal(150)
        fo = run_filter(build_model(spec, theta), y, default_init(spec, y))
        assert np.all(fo.x_next[:, 0] > 0)


def test_tvar_constant_coefficient_matches_least_squares():
    # sigma2_w = 0 freezes beta; a diffuse prior recovers the no-intercept OLS slope
    rng = np.random.default_rng(23)
    y = np.empty(400)
    y[0] = 0.1 * rng.standard_normal()
    for t in range(1, 400):
        y[t] = 0.4 * y[t - 1] + 0.1 * rng.standard_normal()
    spec = ModelSpec("tvar")
    theta = TvarTheta(sigma2_w=(0.0,), sigma2_eps=0.01)
    fo = run_filter(build_model(spec, theta), y, (np.zeros(1), 1e8 * np.eye(1)))
    ols = np.sum(y[1:] * y[:-1]) / np.sum(y[:-1] ** 2)
    assert abs(fo.x_filt[-1, 0] - ols) <= 1e-3


# --- parameter bookkeeping ----------------------------------------------------

def test_param_counts():
    assert n_params(ModelSpec("tvar")) == 2
    assert n_params(ModelSpec("tvar", ar_order=2)) == 3
    assert n_params(ModelSpec("garch")) == 4
    assert n_params(ModelSpec("garchm")) == 5
    assert n_params(ModelSpec("tgarch")) == 5
    assert n_params(ModelSpec("agarch")) == 5


def test_param_names_order():
    assert param_names(ModelSpec("garchm")) == ("omega", "a1", "b1", "delta", "sigma2_w")
    assert param_names(ModelSpec("tvar", ar_order=2)) == ("sigma2_w1", "sigma2_w2", "sigma2_eps")


# --- unconstrained transform ---------------------------------------------------

def test_round_trip_reported_estimates():
    # Russia column estimates
    theta = GarchTheta(omega=0.00055, a1=0.25102, b1=0.73666, sigma2_w=0.00001)
    spec = ModelSpec("garch")
    v = theta_to_unconstrained(spec, theta)
    back = unconstrained_to_theta(spec, v)
    assert_allclose(theta_to_vector(spec, back), theta_to_vector(spec, theta),
                    rtol=0, atol=1e-10)


@pytest.mark.parametrize("spec,theta", [st for st in ALL_SPECS if st[0].kind != "tvar"]
                         + [(ModelSpec("tvar"), TvarTheta(sigma2_w=(1e-5,), sigma2_eps=0.004))])
def test_round_trip_all_kinds(spec, theta):
    v = theta_to_unconstrained(spec, theta)
    back = unconstrained_to_theta(spec, v)
    assert_allclose(theta_to_vector(spec, back), theta_to_vector(spec, theta),
                    rtol=1e-10, atol=1e-14)


def test_zero_vector_anchor():
    theta = unconstrained_to_theta(ModelSpec("garch"), np.zeros(4))
    assert_allclose(theta.a1, 1 / 3, atol=1e-15)
    assert_allclose(theta.b1, 1 / 3, atol=1e-15)
    assert_allclose(theta.omega, 1.0)


def test_boundary_rejected_by_forward_map():
    with pytest.raises(ValueError, match="a1"):
        theta_to_unconstrained(ModelSpec("garch"),
                               GarchTheta(omega=1e-4, a1=0.0, b1=0.5, sigma2_w=1e-5))


@given(st.lists(st.floats(min_value=-1e300, max_value=1e300, allow_nan=False),
                min_size=5, max_size=5))
def test_huge_vectors_stay_feasible(vals):
    for kind in ("garchm", "tgarch", "agarch"):
        spec = ModelSpec(kind)
        theta = unconstrained_to_theta(spec, np.array(vals))
        validate_theta(spec, theta)  # no overflow to invalid values
    theta = unconstrained_to_theta(ModelSpec("garch"), np.array(vals[:4]))
    validate_theta(ModelSpec("garch"), theta)


# --- json ----------------------------------------------------------------------

@pytest.mark.parametrize("spec,theta", ALL_SPECS)
def test_theta_json_round_trip(spec, theta):
    back = theta_from_json(spec, theta_to_json(theta))
    assert back == theta


def test_theta_json_field_names():
    payload = theta_to_json(TgarchTheta(omega=1e-4, a1_plus=0.1, a1_minus=0.2, b1=0.3, sigma2_w=0.0))
    assert set(payload) == {"omega", "a1_plus", "a1_minus", "b1", "sigma2_w"}
    payload = theta_to_json(TvarTheta(sigma2_w=(1e-5, 2e-5), sigma2_eps=0.1))
    assert payload == {"sigma2_w": [1e-5, 2e-5], "sigma2_eps": 0.1}


def test_theta_json_rejects_wrong_fields():
    with pytest.raises(ValueError, match="unexpected"):
        theta_from_json(ModelSpec("garch"),
                        {"omega": 1e-4, "a1": 0.1, "b1": 0.2, "sigma2_w": 0.0, "delta": 1.0})
    with pytest.raises(ValueError, match="missing"):
        theta_from_json(ModelSpec("garch"), {"omega": 1e-4})


# --- defaults -------------------------------------------------------------------

def test_default_theta_values():
    rng = np.random.default_rng(1)
    y = 0.05 * rng.standard_normal(200)
    var_y = float(np.var(y, ddof=1))
    th = default_theta(ModelSpec("garch"), y)
    assert_allclose(th.omega, 0.1 * var_y)
    assert (th.a1, th.b1, th.sigma2_w) == (0.1, 0.8, 1e-5)
    tm = default_theta(ModelSpec("garchm"), y)
    assert tm.delta == 0.0
    tv = default_theta(ModelSpec("tvar", ar_order=3), y)
    assert tv.sigma2_w == (1e-5,) * 3
    assert_allclose(tv.sigma2_eps, var_y)
    for kind in ("garch", "garchm", "tgarch", "agarch"):
        validate_theta(ModelSpec(kind), default_theta(ModelSpec(kind), y))


def test_default_init_values():
    rng = np.random.default_rng(2)
    y = rng.standard_normal(50)
    x0, P0 = default_init(ModelSpec("garch"), y)
    assert_allclose(x0, [np.var(y, ddof=1), 0.0])
    assert_allclose(P0, np.eye(2))
    x0, P0 = default_init(ModelSpec("tvar", ar_order=2), y)
    assert_allclose(x0, np.zeros(2))
    assert_allclose(P0, np.eye(2))

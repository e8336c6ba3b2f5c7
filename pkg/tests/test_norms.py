import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import brentq

from varlebesgue.exponents import ExponentField
from varlebesgue.grid import SampledFunction, ball_family, make_grid, sample
from varlebesgue.norms import (
    K_HOLDER,
    NormError,
    Weight,
    a1_constant,
    ap_constant,
    apq_constant,
    constant_modular_profile,
    holder_defect,
    luxemburg_norm,
    modular,
)

from conftest import indicator

GOLDEN = (1 + np.sqrt(5)) / 2


def test_modular_examples():
    g = make_grid(1, [0, 2], 1024)
    assert modular(sample(lambda x: 0 * x, g), 2.0) == 0.0
    assert abs(modular(sample(indicator(0, 1), g), 2.0) - 1.0) <= g.cell_volume
    three = sample(lambda x: 3.0 * ((x >= 0) & (x <= 1)), g)
    p_inf = np.where(g.points[:, 0] <= 1, np.inf, 2.0)
    assert modular(three, p_inf) == 3.0


def test_unit_indicator_norm():
    g = make_grid(1, [0, 2], 1024)
    assert luxemburg_norm(sample(indicator(0, 1), g), 2.0).value == pytest.approx(1.0, abs=1e-6)


def test_two_valued_exponent_matches_root_find():
    g = make_grid(1, [0, 2], 1024)
    p = ExponentField.from_expression("2 if x < 1 else 4")
    res = luxemburg_norm(sample(lambda x: 1 + 0 * x, g), p, tol=1e-12)
    oracle = brentq(lambda lam: lam**-2 + lam**-4 - 1, 1, 2, xtol=1e-15)
    assert oracle == pytest.approx(np.sqrt(GOLDEN), rel=1e-14)
    assert res.value == pytest.approx(oracle, abs=1e-6)
    lo, hi = res.bracket
    assert lo <= res.value <= hi and (hi - lo) / res.value <= 1e-12
    assert res.modular_at_value <= 1.0


@pytest.mark.parametrize("p0", [1.0, 1.5, 2.0, 4.0])
@pytest.mark.parametrize("c", [0.5, 3.0])
def test_scaled_indicator_constant_exponent(p0, c):
    g = make_grid(1, [0, 2], 512)
    f = sample(lambda x: c * ((x >= 0) & (x <= 1)), g)
    exact = (np.sum(np.abs(f.values) ** p0) * g.cell_volume) ** (1 / p0)
    assert luxemburg_norm(f, p0, 1e-12).value == pytest.approx(exact, rel=1e-6)


def test_zero_function_and_bad_tol():
    g = make_grid(1, [0, 1], 8)
    assert luxemburg_norm(sample(lambda x: 0 * x, g), 2.0).value == 0.0
    with pytest.raises(NormError):
        luxemburg_norm(sample(lambda x: 1 + 0 * x, g), 2.0, tol=0)


vals = arrays(np.float64, 48, elements=st.floats(-20, 20))
GRID = make_grid(1, [-1, 2], 48)
P_VAR = ExponentField.from_expression("1.5 + x*x")


@given(vals, st.sampled_from([0.1, 1.0, 7.0]))
def test_homogeneity(u, c):
    f = SampledFunction(GRID, u)
    tol = 1e-10
    a = luxemburg_norm(f * c, P_VAR, tol).value
    b = luxemburg_norm(f, P_VAR, tol).value
    assert a == pytest.approx(c * b, rel=2 * tol, abs=1e-300)


@given(vals, vals)
def test_triangle_inequality(u, v):
    tol = 1e-10
    f, g = SampledFunction(GRID, u), SampledFunction(GRID, v)
    n = lambda h: luxemburg_norm(h, P_VAR, tol).value
    assert n(f + g) <= n(f) + n(g) + 3 * tol * (n(f) + n(g) + 1)


@given(vals)
def test_unit_ball_property(u):
    f = SampledFunction(GRID, u)
    tol = 1e-10
    norm = luxemburg_norm(f, P_VAR, tol).value
    rho = modular(f, P_VAR)
    if norm <= 1 - 10 * tol:
        assert rho <= 1
    if rho <= 1:
        assert norm <= 1 + 10 * tol


@given(vals, st.floats(0.1, 10), st.floats(1.01, 3))
def test_modular_monotone_in_lambda(u, lam, factor):
    f = SampledFunction(GRID, u)
    assert modular(f * (1 / lam), P_VAR) >= modular(f * (1 / (lam * factor)), P_VAR)


def test_holder_defect_examples():
    g = make_grid(1, [0, 2], 512)
    chi = sample(indicator(0, 1), g)
    assert holder_defect(chi, chi, 2.0, 1e-12) == pytest.approx(1.0, abs=1e-6)
    assert holder_defect(sample(lambda x: 0 * x, g), chi, 2.0) == 0.0


@given(arrays(np.float64, 64, elements=st.floats(-5, 5)), arrays(np.float64, 64, elements=st.floats(-5, 5)))
def test_holder_defect_bounded(u, v):
    g = make_grid(1, [0, 2], 64)
    f, h = SampledFunction(g, u), SampledFunction(g, v)
    p = np.where(g.points[:, 0] < 1, 2.0, 3.0)
    d = holder_defect(f, h, p)
    assert 0 <= d <= K_HOLDER
    assert (d == 0) == (np.sum(np.abs(u * v)) == 0)


# --- weights --------------------------------------------------------------------


def family(n):
    g = make_grid(1, [-1, 1], n)
    return g, ball_family(g, 9, 1.0 / n)


def test_weight_must_be_positive():
    g = make_grid(1, [-1, 1], 8)
    with pytest.raises(Exception):
        Weight(sample(lambda x: x, g))


def test_a1_examples():
    g, fam = family(64)
    assert a1_constant(Weight(sample(lambda x: 1 + 0 * x, g)), fam) == 1.0
    consts = []
    for n in (256, 512):
        g, fam = family(n)
        consts.append(a1_constant(Weight(sample(lambda x: np.abs(x) ** -0.5, g)), fam))
    assert consts[1] == pytest.approx(consts[0], rel=0.2)
    # |x|^(1/2) is not A_1: the ratio blows up as cells approach the zero of the weight
    grow = []
    for n in (256, 512, 1024):
        g, fam = family(n)
        grow.append(a1_constant(Weight(sample(lambda x: np.abs(x) ** 0.5, g)), fam))
    assert grow[0] < grow[1] < grow[2]


def test_ap_examples():
    g, fam = family(64)
    assert ap_constant(Weight(sample(lambda x: 3 + 0 * x, g)), 2.0, fam) == pytest.approx(1.0, abs=1e-14)
    stable, grow = [], []
    for n in (256, 512):
        g = make_grid(1, [-1, 1], n)
        cubes = ball_family(g, 9, 1.0 / n, shape="cube")
        stable.append(ap_constant(Weight(sample(lambda x: np.abs(x) ** 0.5, g)), 2.0, cubes))
        grow.append(ap_constant(Weight(sample(lambda x: np.abs(x) ** 2, g)), 2.0, cubes))
    assert stable[1] == pytest.approx(stable[0], rel=0.05)
    assert grow[1] > 1.5 * grow[0]


def test_apq_examples():
    g = make_grid(1, [-1, 1], 128)
    cubes = ball_family(g, 8, 1.0 / 128, shape="cube")
    for p, q in ((1.0, 2.0), (4 / 3, 4.0)):
        assert apq_constant(Weight(sample(lambda x: 1 + 0 * x, g)), p, q, cubes) == pytest.approx(1.0, abs=1e-14)
        assert apq_constant(Weight(sample(lambda x: 5 + 0 * x, g)), p, q, cubes) == pytest.approx(1.0, abs=1e-14)
    vals = []
    for n in (256, 512):
        g = make_grid(1, [-1, 1], n)
        cubes = ball_family(g, 9, 1.0 / n, shape="cube")
        vals.append(apq_constant(Weight(sample(lambda x: np.abs(x) ** 0.125, g)), 4 / 3, 4.0, cubes))
    assert np.isfinite(vals).all() and vals[1] == pytest.approx(vals[0], rel=0.05)


def test_constant_in_lp_on_unbounded_set():
    # p(x) = |x| capped at 64: N_inf with p_inf = inf, so 1 lies in L^p outside [-1, 1]
    p = ExponentField.from_expression("min(max(abs(x), 1), 64)")
    prof = constant_modular_profile(p, 2.0, [2, 4, 8, 16, 32])
    vals = [v for _, v in prof]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    # exact: 2 * int_1^R 2^-x dx; the increments shrink geometrically
    exact = [2 * (2.0**-1 - 2.0**-R) / np.log(2) for R in (2, 4, 8, 16, 32)]
    assert np.allclose(vals, exact, rtol=1e-3)
    steps = np.diff(vals)
    assert np.all(steps[1:] < steps[:-1])

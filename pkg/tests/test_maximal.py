import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from varlebesgue.grid import SampledFunction, ball_family, make_grid, sample
from varlebesgue.maximal import (
    MaximalConfig,
    NoCoveringBall,
    estimate_maximal_opnorm,
    fractional_maximal,
    fractional_maximal_s,
    hl_maximal,
    rubio_de_francia,
    sharp_maximal,
)
from varlebesgue.norms import Weight, a1_constant, luxemburg_norm
from varlebesgue.verify.suite import make_suite

from conftest import indicator


def brute_force(f, family, reduce):
    """Per-cell max over every family ball containing the cell, membership by distance."""
    pts = f.grid.points
    vals = f.values
    out = np.full(len(pts), -np.inf)
    for c in family.centers:
        dist = np.linalg.norm(pts - c, axis=1) if family.shape == "ball" else np.max(np.abs(pts - c), axis=1)
        for r in family.radii:
            inside = dist <= r * (1 + 1e-12)
            val = reduce(vals[inside], inside.sum() * f.grid.cell_volume)
            out[inside] = np.maximum(out[inside], val)
    return out


def at(f, x):
    return f.values[np.argmin(np.abs(f.grid.points[:, 0] - x))]


def test_constant_maps_to_constant(line):
    fam = ball_family(line, 6, 1 / 64)
    assert np.all(hl_maximal(sample(lambda x: 1 + 0 * x, line), fam).values == 1.0)


def test_hl_matches_brute_force():
    g = make_grid(1, [-2, 2], 128)
    fam = ball_family(g, 9, 1 / 32)
    f = sample(indicator(0, 1), g)
    oracle = brute_force(f, fam, lambda v, m: np.mean(np.abs(v)))
    assert np.allclose(hl_maximal(f, fam).values, oracle, rtol=1e-13, atol=0)


def test_hl_examples():
    g = make_grid(1, [-2, 2], 256)
    fam = ball_family(g, 9, 1 / 64)
    Mf = hl_maximal(sample(indicator(0, 1), g), fam)
    # near the right end the best ball meets the domain in about [0, 2]
    assert at(Mf, 2.0) == pytest.approx(0.5, abs=0.02)
    assert at(Mf, 0.5) == 1.0


def test_hl_2d_matches_brute_force(square):
    fam = ball_family(square, 4, 1 / 12, center_stride=2)
    f = sample(lambda x: np.cos(3 * x[:, 0]) * x[:, 1], square)
    oracle = brute_force(f, fam, lambda v, m: np.mean(np.abs(v)))
    assert np.allclose(hl_maximal(f, fam).values, oracle, rtol=1e-12)


def test_fractional_examples():
    g = make_grid(1, [-4, 4], 512)
    fam = ball_family(g, 10, 1 / 64)
    f = sample(indicator(-1, 1), g)
    assert at(fractional_maximal(f, 0.5, fam), 0.0) == pytest.approx(np.sqrt(2), abs=0.02)
    assert at(fractional_maximal_s(f, 0.25, 2.0, fam), 0.0) == pytest.approx(2**0.25, abs=0.02)
    assert np.all(fractional_maximal(f * 0.0, 0.5, fam).values == 0)
    oracle = brute_force(f, fam, lambda v, m: m**0.5 * np.mean(np.abs(v)))
    assert np.allclose(fractional_maximal(f, 0.5, fam).values, oracle, rtol=1e-12)


def test_fractional_s_collapses(line):
    fam = ball_family(line, 6, 1 / 64)
    f = sample(lambda x: np.sin(3 * x), line)
    assert np.array_equal(fractional_maximal_s(f, 0.3, 1.0, fam).values, fractional_maximal(f, 0.3, fam).values)
    const = sample(lambda x: -2.5 + 0 * x, line)
    assert np.allclose(fractional_maximal_s(const, 0.0, 3.0, fam).values, 2.5, rtol=1e-15)


def test_parameter_errors(line):
    fam = ball_family(line, 3, 1 / 64)
    f = sample(lambda x: x, line)
    with pytest.raises(ValueError):
        fractional_maximal(f, 1.0, fam)
    with pytest.raises(ValueError):
        fractional_maximal_s(f, 0.5, 2.0, fam)
    with pytest.raises(ValueError):
        fractional_maximal_s(f, 0.1, 0.5, fam)
    with pytest.raises(ValueError):
        MaximalConfig(fam, flavor="bogus")


def test_uncovered_cells_raise(line):
    fam = ball_family(line, 1, 1 / 128, center_stride=8)
    with pytest.raises(NoCoveringBall):
        hl_maximal(sample(lambda x: x, line), fam)


def test_sharp_examples():
    g = make_grid(1, [-1, 1], 256)
    fam = ball_family(g, 9, 1 / 128)
    assert np.all(sharp_maximal(sample(lambda x: 3 + 0 * x, g), fam).values == 0)
    assert at(sharp_maximal(sample(indicator(0, 1), g), fam), 0.0) == pytest.approx(0.5, abs=0.02)


@pytest.mark.parametrize("center", ["abs_mean", "mean"])
def test_sharp_matches_brute_force(center):
    g = make_grid(1, [-1, 1], 96)
    fam = ball_family(g, 7, 1 / 48)
    f = sample(lambda x: np.sin(5 * x) + (x > 0.3), g)
    if center == "abs_mean":
        osc = lambda v, m: np.mean(np.abs(v - np.mean(np.abs(v))))
    else:
        osc = lambda v, m: np.mean(np.abs(v - np.mean(v)))
    assert np.allclose(sharp_maximal(f, fam, center).values, brute_force(f, fam, osc), rtol=1e-10, atol=1e-14)


SUITE = make_suite("standard")


@pytest.mark.parametrize("dim,n", [(1, 256), (2, 24)])
def test_sharp_at_most_twice_hl(dim, n):
    g = make_grid(dim, [-1, 1], n)
    fam = ball_family(g, 6, 1 / n)
    for case in SUITE:
        f = case.on(g)
        assert np.all(sharp_maximal(f, fam).values <= 2 * hl_maximal(f, fam).values)


def operators(fam):
    return {
        "hl": lambda f: hl_maximal(f, fam),
        "fractional": lambda f: fractional_maximal(f, 0.5, fam),
        "fractional_s": lambda f: fractional_maximal_s(f, 0.25, 2.0, fam),
        "sharp": lambda f: sharp_maximal(f, fam),
    }


@pytest.mark.parametrize("dim,n", [(1, 256), (2, 24)])
def test_homogeneity_over_suite(dim, n):
    g = make_grid(dim, [-1, 1], n)
    fam = ball_family(g, 6, 1 / n)
    for name, op in operators(fam).items():
        for case in SUITE:
            f = case.on(g)
            base = op(f).values
            assert np.array_equal(op(f * 2.0).values, 2.0 * base), name
            assert np.max(np.abs(op(f * (1 / 3)).values - base / 3)) <= 1e-10, name


@pytest.mark.parametrize("dim,n", [(1, 256), (2, 24)])
def test_sublinearity_over_suite(dim, n):
    g = make_grid(dim, [-1, 1], n)
    fam = ball_family(g, 6, 1 / n)
    ops = operators(fam)
    ops.pop("sharp")
    for name, op in ops.items():
        for a in SUITE:
            for b in SUITE[::3]:
                f, h = a.on(g), b.on(g)
                assert np.all(op(f + h).values <= op(f).values + op(h).values + 1e-12), (name, a.id, b.id)


def test_monotone_in_s():
    g = make_grid(1, [-1, 1], 256)
    fam = ball_family(g, 7, 1 / 256)
    for case in SUITE:
        f = case.on(g)
        lo = fractional_maximal_s(f, 0.2, 1.5, fam).values
        hi = fractional_maximal_s(f, 0.2, 4.0, fam).values
        assert np.all(lo <= hi + 1e-10), case.id


@given(arrays(np.float64, 64, elements=st.floats(-10, 10)))
def test_lower_bound_by_smallest_ball(u):
    g = make_grid(1, [0, 1], 64)
    fam = ball_family(g, 4, 1 / 64)
    f = SampledFunction(g, u)
    r = fam.radii[0]
    smallest = fam.averages(np.abs(u), r)
    assert np.all(hl_maximal(f, fam).values >= smallest)


def test_maximal_config_dispatch(line):
    fam = ball_family(line, 5, 1 / 64)
    f = sample(lambda x: np.exp(-x * x), line)
    assert np.array_equal(MaximalConfig(fam).apply(f).values, hl_maximal(f, fam).values)
    cfg = MaximalConfig(fam, "fractional_s", 0.25, 2.0)
    assert np.array_equal(cfg.apply(f).values, fractional_maximal_s(f, 0.25, 2.0, fam).values)
    assert np.array_equal(MaximalConfig(fam, "sharp").apply(f).values, sharp_maximal(f, fam).values)


# --- Rubio de Francia iteration and operator-norm probes ----------------------------


def test_rubio_de_francia_on_constant(line):
    fam = ball_family(line, 6, 1 / 64)
    K = 8
    R = rubio_de_francia(sample(lambda x: 1 + 0 * x, line), 1.0, K, fam)
    assert np.allclose(R.values, 2 * (1 - 2.0 ** -(K + 1)), rtol=1e-14)


def test_rubio_de_francia_errors(line):
    fam = ball_family(line, 3, 1 / 64)
    h = sample(lambda x: x, line)
    with pytest.raises(ValueError):
        rubio_de_francia(h, 0.5, 4, fam)
    with pytest.raises(ValueError):
        rubio_de_francia(h, 2.0, 0, fam)


@pytest.mark.parametrize("h_func", [indicator(0, 1), lambda x: np.maximum(1 - np.abs(x), 0) ** 2])
def test_rubio_de_francia_properties(h_func):
    g = make_grid(1, [-2, 2], 256)
    fam = ball_family(g, 9, 1 / 64)
    h = sample(h_func, g)
    opnorm = estimate_maximal_opnorm(2.0, [h], fam)
    K = 8
    R = rubio_de_francia(h, opnorm, K, fam)
    assert np.all(R.values >= np.abs(h.values))
    nh = luxemburg_norm(h, 2.0, 1e-12).value
    assert luxemburg_norm(R, 2.0, 1e-12).value <= 2 * nh + 2 * (2 * opnorm) ** -K * nh
    assert a1_constant(Weight(R), fam) <= 2 * opnorm * 1.1


def test_opnorm_estimate():
    g = make_grid(1, [-2, 2], 256)
    fam = ball_family(g, 9, 1 / 64)
    chi = sample(indicator(0, 1), g)
    ratio = luxemburg_norm(hl_maximal(chi, fam), 2.0).value / luxemburg_norm(chi, 2.0).value
    assert ratio >= 1
    assert estimate_maximal_opnorm(2.0, [chi], fam) == pytest.approx(2 * ratio, rel=1e-12)
    one = sample(lambda x: 1 + 0 * x, g)
    assert estimate_maximal_opnorm(2.0, [one], fam, safety=1.0) == pytest.approx(1.0, rel=1e-7)
    with pytest.raises(ValueError):
        estimate_maximal_opnorm(2.0, [], fam)
    with pytest.raises(ValueError):
        estimate_maximal_opnorm(2.0, [one * 0.0], fam)

import json
import textwrap

import numpy as np
import pytest

from varlebesgue.exponents import ExponentField
from varlebesgue.grid import make_grid, sample
from varlebesgue.rough import KernelConfig, SphereFunction
from varlebesgue.verify import (
    Case,
    ConfigError,
    FamilyPolicy,
    HypothesisError,
    InequalityReport,
    MaximalOperator,
    audit_hypotheses,
    emit_report,
    image_grid,
    lambda_grid,
    make_suite,
    msharp_ratio_field,
    parse_config,
    render_report,
    run_experiment,
    trend_verdict,
    verify_composition,
    verify_msharp_pointwise,
    verify_strong_bound,
    verify_weak_bound,
    weak_lhs,
)


def cfg(text, **overrides):
    return parse_config(textwrap.dedent(text), overrides or None)


BASE = """
grid: {dim: 1, bounds: [-2, 2], resolution: 128}
n: 1
"""

RIESZ_KERNEL = """
kernel:
  matrices: [[[1]]]
  q_list: [2]
  omegas: [constant]
  p_list: [4]
"""

CLASSICAL_KERNEL = """
kernel:
  matrices: [[[1]], [[-1]]]
  q_list: [2, 2]
  omegas: [constant, constant]
  p_list: [4, 4]
"""


# --- config parsing ---------------------------------------------------------------


@pytest.mark.parametrize(
    "body,line,fragment",
    [
        ("exponent: {constant: 2}\nbogus: 1\n", 5, "unknown field 'bogus'"),
        ("exponent: {constant: 2}\nchecks: [lemma1_strong, nope]\n", 5, "unknown check 'nope'"),
        ("exponent: {constant: 2}\nchecks:\n  - thm1a_weak\n", 6, "needs a kernel section"),
        ("exponent: {constant: 0.5}\n", 4, "constant exponent must be >= 1"),
        ("exponent: {expression: '2 + y'}\n", 4, "exponent.expression"),
        ("exponent: {constant: 2}\nalpha: 3\n", 5, "alpha must lie in [0, n)"),
        ("exponent: {constant: 2}\nsuite: random\n", 5, "unknown suite"),
        ("exponent: {constant: 2}\ncomposition: {matrix: [[1, 0], [0, 1]]}\n", 5, "composition.matrix must be 1x1"),
        ("exponent: {constant: 2}\nchecks: [prop3b]\n", 5, "needs a composition section"),
        ("exponent: {constant: 2}\n  oops: [\n", 5, "YAML syntax"),
    ],
)
def test_config_errors_carry_line_numbers(body, line, fragment):
    with pytest.raises(ConfigError) as err:
        cfg(BASE + body)
    assert err.value.line == line
    assert fragment in str(err.value)
    assert str(err.value).startswith(f"line {line}:")


def test_kernel_config_errors():
    bad = RIESZ_KERNEL.replace("q_list: [2]", "q_list: [2, 2]")
    with pytest.raises(ConfigError, match="kernel.q_list must have 1 entries"):
        cfg(BASE + "alpha: 0.5\nexponent: {constant: 1.5}\n" + bad)
    bad = RIESZ_KERNEL.replace("[[[1]]]", "[[[1, 0]]]")
    with pytest.raises(ConfigError, match="1x1"):
        cfg(BASE + "alpha: 0.5\nexponent: {constant: 1.5}\n" + bad)
    bad = RIESZ_KERNEL.replace("[constant]", "[cos]")
    with pytest.raises(ConfigError, match="dim-2"):
        cfg(BASE + "alpha: 0.5\nexponent: {constant: 1.5}\n" + bad)


def test_config_fields_and_overrides():
    c = cfg(BASE + "alpha: 0.5\nexponent: {constant: 1.5}\n" + RIESZ_KERNEL + "checks: [lemma1_strong]\n")
    assert c.kernel.s == pytest.approx(4 / 3)
    assert [g.resolution[0] for g in c.grids()] == [128, 256]
    c3 = cfg(BASE + "exponent: {constant: 2}\n", refinement_levels=3, waive_hypotheses=True)
    assert [g.resolution[0] for g in c3.grids()] == [128, 256, 512]
    assert c3.waive_hypotheses
    assert c.config_hash() != c3.config_hash()
    again = cfg(BASE + "alpha: 0.5\nexponent: {constant: 1.5}\n" + RIESZ_KERNEL + "checks: [lemma1_strong]\n")
    assert again.config_hash() == c.config_hash()


def test_family_policy_levels():
    g = make_grid(1, [-2, 2], 64)
    fam = FamilyPolicy().build(g)
    assert fam.radii[0] == pytest.approx(0.5 * 4 / 64)
    assert fam.radii[-1] >= 4


# --- runner and audit --------------------------------------------------------------


def test_empty_check_list():
    assert run_experiment(cfg(BASE + "exponent: {constant: 2}\n")) == []


def test_lemma1_at_the_endpoint_is_rejected():
    # p = 2 with alpha = 1/2 in dimension 1 sits at p_+ = n / alpha: no target exponent
    c = cfg(BASE + "alpha: 0.5\nexponent: {constant: 2}\nchecks: [lemma1_strong]\n")
    with pytest.raises(HypothesisError):
        run_experiment(c)


def test_lemma1_strong_inside_the_range():
    c = cfg(BASE + "alpha: 0.5\nexponent: {constant: 1.3333333333333333}\nchecks: [lemma1_strong]\n")
    (rep,) = run_experiment(c)
    assert rep.check == "lemma1_strong" and rep.verdict == "bounded-stable"
    assert np.isfinite(rep.constant) and rep.label == "theorem"
    assert rep.config_hash == c.config_hash()


def test_audit_classical_constant_passes():
    c = cfg(BASE + "exponent: {constant: 2}\n" + CLASSICAL_KERNEL + "checks: [thm2b_strong]\n")
    rep = audit_hypotheses(c)
    assert rep.verdict == "pass", rep.notes
    assert "p(A_2 x) = p(x)" in rep.clauses and "q' in K_0" in rep.clauses


def test_audit_failures():
    c = cfg(BASE + "alpha: 0.5\nexponent: {constant: 2}\n" + RIESZ_KERNEL)
    rep = audit_hypotheses(c)
    assert rep.clauses["p_+ < n/alpha"] == "fail"
    single = RIESZ_KERNEL.replace("q_list: [2]", "q_list: [1]")
    rep = audit_hypotheses(cfg(BASE + "exponent: {constant: 2}\n" + single))
    assert rep.clauses["kernel: m >= 2 when alpha = 0"] == "fail"


def test_failed_audit_blocks_unless_waived():
    text = BASE + "alpha: 0.5\nexponent: {constant: 1.3}\n" + RIESZ_KERNEL.replace("[4]", "[1.5]")
    text += "checks: [conditions_audit, lemma1_strong]\n"
    with pytest.raises(HypothesisError, match="waive"):
        run_experiment(cfg(text))
    reps = run_experiment(cfg(text, waive_hypotheses=True))
    assert reps[0].verdict == "fail"
    assert reps[1].label == "exploratory" and "hypotheses waived" in reps[1].notes


# --- reports --------------------------------------------------------------------


def test_report_invariants():
    cases = [Case("a", 1.0, 2.0, 0.5), Case("b", 3.0, 2.0, 1.5)]
    InequalityReport("x", 1.5, cases, [(64, 1.4), (128, 1.5)], "bounded-stable")
    with pytest.raises(ValueError, match="max"):
        InequalityReport("x", 1.4, cases, [(64, 1.4), (128, 1.5)], "bounded-stable")
    with pytest.raises(ValueError, match="two resolutions"):
        InequalityReport("x", 1.5, cases, [(128, 1.5)], "growing")
    with pytest.raises(ValueError):
        InequalityReport("x", 1.5, cases, [], "maybe")


@pytest.mark.parametrize(
    "trend,verdict",
    [
        ([1.0, 1.1, 1.2], "bounded-stable"),
        ([1.0, 1.5], "growing"),
        ([2.0, 1.0], "inconclusive"),
        ([1.0], "inconclusive"),
        ([1.0, np.inf], "growing"),
        ([0.0, 0.0], "bounded-stable"),
    ],
)
def test_trend_verdict(trend, verdict):
    assert trend_verdict(trend) == verdict


def test_render_empty_and_schema(tmp_path):
    doc = json.loads(render_report([], "json", "abc"))
    assert doc == {"config_hash": "abc", "reports": []}
    rep = InequalityReport("lemma1_strong", 1.5, [Case("a", 3.0, 2.0, 1.5)], [(64, 1.4), (128, 1.5)], "bounded-stable")
    doc = json.loads(render_report([rep], "json", "h"))
    assert {"check", "constant", "cases", "trend", "verdict"} <= set(doc["reports"][0])
    csv_text = render_report([rep], "csv", "h")
    assert csv_text.splitlines()[1] == "h,lemma1_strong,bounded-stable,1.5,a,3.0,2.0,1.5"
    with pytest.raises(ValueError):
        render_report([rep], "xml")
    emit_report([rep], "json", tmp_path / "r.json", "h")
    assert (tmp_path / "r.json").read_text() == render_report([rep], "json", "h")


def test_runs_are_byte_identical():
    text = BASE + "exponent: {constant: 2}\ncomposition: {matrix: [[0.5]]}\nchecks: [lemma1_weak, prop3b]\n"
    outs = []
    for _ in range(2):
        c = cfg(text)
        outs.append(render_report(run_experiment(c), "json", c.config_hash()))
    assert outs[0] == outs[1]


# --- individual verifiers -------------------------------------------------------------


def test_lambda_grid():
    lam = lambda_grid(4.0)
    assert len(lam) == 32 and lam[0] == pytest.approx(4 * 2**-20) and lam[-1] == pytest.approx(8.0)


def test_weak_of_zero_and_chebyshev():
    g = make_grid(1, [-2, 2], 128)
    assert weak_lhs(sample(lambda x: 0 * x, g), 2.0) == 0.0
    op = MaximalOperator(0.0)
    suite = make_suite("standard")
    grids = [g, make_grid(1, [-2, 2], 256)]
    strong = verify_strong_bound(op, 2.0, 2.0, suite, grids)
    weak = verify_weak_bound(op, 2.0, 2.0, suite, grids)
    for s, w in zip(strong.cases, weak.cases):
        assert s.function_id == w.function_id
        assert w.lhs <= s.lhs + 1e-9
    chi = next(c for c in strong.cases if c.function_id == "chi[0,1]")
    assert chi.ratio >= 1


def test_msharp_field_scaling_and_vacuous_case():
    kernel = KernelConfig(1, 0.0, [[[1.0]], [[-1.0]]], [2.0, 2.0], [SphereFunction.constant()] * 2, [4.0, 4.0])
    g = make_grid(1, [-2, 2], 128)
    balls = FamilyPolicy().build(g)
    f = make_suite("bumps")[1].on(g)
    r1, _, _ = msharp_ratio_field(f, kernel, balls)
    r2, _, _ = msharp_ratio_field(f * 2.0, kernel, balls)
    ok = np.isfinite(r1)
    assert np.array_equal(ok, np.isfinite(r2))
    assert np.max(np.abs(r1[ok] - r2[ok])) <= 1e-10
    from varlebesgue.verify.suite import SuiteCase

    zero = SuiteCase("zero", lambda u: np.zeros(len(u)))
    rep = verify_msharp_pointwise([zero], kernel, [g, make_grid(1, [-2, 2], 256)])
    assert rep.verdict == "inconclusive" and "vacuous" in rep.notes


# --- composition ---------------------------------------------------------------------


def ladder(n=256):
    return [make_grid(1, [-2, 2], n), make_grid(1, [-2, 2], 2 * n)]


def test_composition_identity_and_contractions():
    suite = make_suite()
    p3 = ExponentField.constant(3.0)
    rep = verify_composition(p3, [[1.0]], "=", suite, ladder())
    assert rep.verdict == "pass" and all(c.ratio == pytest.approx(1.0, abs=1e-10) for c in rep.cases)
    rep = verify_composition(p3, [[2.0]], "=", suite, ladder())
    assert rep.verdict == "pass"
    assert all(c.ratio == pytest.approx(2 ** (-1 / 3), rel=1e-6) for c in rep.cases)
    rep = verify_composition(p3, [[0.5]], "=", suite, ladder())
    assert rep.verdict == "pass"
    assert rep.constant == pytest.approx(2 ** (1 / 3), rel=1e-6)


def test_composition_requires_compatibility():
    p = ExponentField.from_expression("2 + x * x / 4")
    with pytest.raises(HypothesisError):
        verify_composition(p, [[0.5]], "=", make_suite(), ladder(64))
    rep = verify_composition(p, [[0.5]], "<=", make_suite(), ladder(64))
    with pytest.raises(HypothesisError):
        verify_composition(p, [[2.0]], "<=", make_suite(), ladder(64))
    assert rep.verdict in ("bounded-stable", "growing", "inconclusive") and rep.constant > 0


def test_image_grid_maps_cells_onto_cells():
    g = make_grid(2, [[-1, 1], [-2, 2]], [8, 16])
    A = np.array([[0.0, 2.0], [-0.5, 0.0]])
    img = image_grid(g, A)
    mapped = img.points @ A.T
    assert np.allclose(np.sort(mapped, axis=0), np.sort(g.points, axis=0))

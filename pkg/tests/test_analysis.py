import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from radelliptic.analysis import (Sign, c1_bound_check, c1_modulus_report,
                                  check_viscosity, epsilon_aA, gamma_exponent,
                                  holder_exponent, sign_intervals,
                                  verify_flux_inequalities)
from radelliptic.errors import (InsufficientData, InvalidSpec, NotAZero,
                                NotConverged)
from radelliptic.grid import (DiscreteRadialFunction, Domain, Grading,
                              RadialGrid)
from radelliptic.operators import (OperatorSpec, closed_form_pucci_power,
                                   pucci_power_profile)
from radelliptic.solver import Solution, SourceFunction, solve_dirichlet


def sampled(fn, n=200, grading=Grading.UNIFORM, R=1.0):
    grid = RadialGrid.for_domain(Domain.ball(R), n, grading)
    return DiscreteRadialFunction(grid, fn(grid.nodes))


@pytest.fixture(scope="module")
def pucci_case():
    """Pucci extremal case with a known power-profile solution."""
    op = OperatorSpec.pucci_plus(1.0, 1.0, 2.0, 2)
    _, c = closed_form_pucci_power(op)
    exact = pucci_power_profile(op)
    dom = Domain.ball(1.0, bc_outer=float(exact(1.0)))
    grid = RadialGrid.for_domain(dom, 200, Grading.GRADED_AT_ORIGIN)
    sol = solve_dirichlet(op, dom, SourceFunction.constant(c), grid)
    return op, SourceFunction.constant(c), sol, exact


class TestEpsilon:
    def test_examples(self):
        assert epsilon_aA(2.0, 1.0, 2.0) == pytest.approx(2.0)
        assert epsilon_aA(-2.0, 1.0, 2.0) == pytest.approx(-1.0)
        assert epsilon_aA(0.0, 1.0, 2.0) == 0.0

    def test_vectorized(self):
        out = epsilon_aA(np.array([1.0, -1.0]), 0.5, 2.0)
        assert np.allclose(out, [2.0, -0.5])

    def test_dominates_both_slopes(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=1000) * 10.0
        eps = epsilon_aA(x, 0.7, 2.3)
        assert np.all(eps >= np.maximum(x / 0.7, x / 2.3) - 1e-14)

    def test_duality(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=500)
        assert np.allclose(epsilon_aA(x, 2.3, 0.7),
                           -epsilon_aA(-x, 0.7, 2.3))

    def test_weights_validated(self):
        with pytest.raises(InvalidSpec):
            epsilon_aA(1.0, 0.0, 1.0)
        with pytest.raises(InvalidSpec):
            epsilon_aA(1.0, 1.0, -1.0)


class TestGamma:
    def test_examples(self):
        op = OperatorSpec.pucci_plus(1.0, 1.0, 2.0, 3)
        gamma, gamma1 = gamma_exponent(op)
        assert gamma == pytest.approx(8.0)
        assert gamma1 == pytest.approx(4.0)

    def test_ordered(self):
        op = OperatorSpec.pucci_minus(2.0, 0.5, 3.0, 2)
        gamma, gamma1 = gamma_exponent(op)
        assert gamma >= gamma1


class TestSignIntervals:
    def test_monotone_profile_single_interval(self):
        u = sampled(lambda r: r ** 2, n=100)
        itvs = sign_intervals(u, threshold=1e-3)
        assert len(itvs) == 1
        assert itvs[0].sign is Sign.POSITIVE
        assert itvs[0].hi == pytest.approx(0.99)

    def test_sine_alternates(self):
        u = sampled(lambda r: np.sin(4.0 * np.pi * r), n=400)
        itvs = sign_intervals(u, threshold=0.1)
        signs = [itv.sign for itv in itvs]
        # u' = 4 pi cos(4 pi r) changes sign at r = 1/8, 3/8, 5/8, 7/8
        assert len(itvs) == 5
        assert signs == [Sign.POSITIVE, Sign.NEGATIVE, Sign.POSITIVE,
                         Sign.NEGATIVE, Sign.POSITIVE]

    def test_short_runs_discarded(self):
        grid = RadialGrid.for_domain(Domain.ball(1.0), 10)
        vals = np.zeros(11)
        vals[5] = 0.1  # one spike: two 2-node runs of opposite sign
        u = DiscreteRadialFunction(grid, vals)
        assert sign_intervals(u, threshold=1e-3) == []

    def test_flat_profile_empty(self):
        u = sampled(lambda r: np.ones_like(r))
        assert sign_intervals(u, threshold=1e-6) == []

    def test_threshold_validated(self):
        u = sampled(lambda r: r)
        with pytest.raises(InvalidSpec):
            sign_intervals(u, threshold=0.0)


class TestFluxInequalities:
    def test_pucci_power_passes(self, pucci_case):
        op, f, sol, _ = pucci_case
        report = verify_flux_inequalities(sol, op, f, threshold=0.05)
        assert report.all_passed, [c.as_dict() for c in report.failures()]
        names = {c.name for c in report.checks}
        assert {"eqA", "eqB[loose]", "eqB[tight]"} <= names

    def test_pucci_power_slopes(self, pucci_case):
        # the flux of the power profile grows at slope 9/4 while the
        # integral bound allows slope (1+alpha)|f|/a = 13.5: the margin
        # at well-separated endpoints stays strictly positive
        op, f, sol, exact = pucci_case
        r, s = 0.2, 0.8
        flux = lambda x: np.abs(exact.derivative(x)) * exact.derivative(x)
        actual_slope = (flux(s) - flux(r)) / (s - r)
        bound_slope = (1.0 + op.alpha) * epsilon_aA(6.75, op.a, op.A)
        assert actual_slope == pytest.approx(2.25, rel=1e-12)
        assert bound_slope == pytest.approx(13.5, rel=1e-12)

    def test_decreasing_profile_uses_mirrored_checks(self, pucci_case):
        op, _, sol, _ = pucci_case
        flipped = DiscreteRadialFunction(sol.u.grid, -sol.u.values)
        report = verify_flux_inequalities(flipped, op.dual(),
                                          SourceFunction.constant(-6.75),
                                          threshold=0.05)
        assert report.all_passed, [c.as_dict() for c in report.failures()]
        names = {c.name for c in report.checks}
        assert {"eqC", "eqD[loose]", "eqD[tight]"} <= names

    def test_vacuous_on_flat_profile(self):
        op = OperatorSpec.pucci_plus(0.0, 1.0, 1.0, 2)
        u = sampled(lambda r: np.ones_like(r))
        report = verify_flux_inequalities(u, op, SourceFunction.constant(0.0),
                                          threshold=1e-3)
        assert [c.name for c in report.checks] == ["flux[vacuous]"]
        assert report.all_passed

    def test_eqA_margin_matches_brute_force(self, pucci_case):
        op, f, sol, _ = pucci_case
        report = verify_flux_inequalities(sol, op, f, threshold=0.05)
        got = next(c for c in report.checks if c.name == "eqA").margin

        # independent all-pairs oracle on the same interval
        u = sol.u
        nodes = u.grid.nodes
        itv = sign_intervals(u, 0.05)[0]
        idx = np.arange(itv.i_lo, itv.i_hi + 1)
        hm = nodes[1:-1] - nodes[:-2]
        hp = nodes[2:] - nodes[1:-1]
        q = (hm ** 2 * u.values[2:] + (hp ** 2 - hm ** 2) * u.values[1:-1]
             - hp ** 2 * u.values[:-2]) / (hp * hm * (hp + hm))
        flux = np.zeros_like(nodes)
        flux[1:-1] = np.abs(q) ** op.alpha * q
        cum = np.concatenate([[0.0], cumulative_trapezoid(
            epsilon_aA(f(nodes), op.a, op.A), nodes)])
        worst = np.inf
        for a_pos, i in enumerate(idx):
            for j in idx[a_pos + 1:]:
                m = flux[i] + (1 + op.alpha) * (cum[j] - cum[i]) - flux[j]
                worst = min(worst, m)
        assert got == pytest.approx(worst, rel=1e-12)

    def test_unconverged_solution_rejected(self, pucci_case):
        op, f, sol, _ = pucci_case
        bad = Solution(sol.u, 1.0, 1e-8, 1, converged=False)
        with pytest.raises(NotConverged):
            verify_flux_inequalities(bad, op, f, threshold=0.05)


class TestViscosity:
    def test_pucci_power_passes(self, pucci_case):
        op, f, sol, _ = pucci_case
        report = check_viscosity(sol, op, f)
        assert report.all_passed, [c.as_dict() for c in report.failures()]
        names = [c.name for c in report.checks]
        assert names == ["viscosity[supersolution]", "viscosity[subsolution]"]

    def test_steep_cone_is_strict_subsolution(self):
        # u = 2r has H[u] = 8/r >= 8 > 1 = f everywhere: touching from
        # below must reveal the supersolution failure, while the
        # subsolution side holds with a wide margin
        op = OperatorSpec.pucci_plus(1.0, 1.0, 2.0, 2)
        u = sampled(lambda r: 2.0 * r, n=200)
        report = check_viscosity(u, op, SourceFunction.constant(1.0))
        by_name = {c.name: c for c in report.checks}
        assert not by_name["viscosity[supersolution]"].passed
        assert by_name["viscosity[subsolution]"].passed

    def test_flat_profile_vacuous(self):
        op = OperatorSpec.pucci_plus(1.0, 1.0, 2.0, 2)
        u = sampled(lambda r: np.ones_like(r), n=64)
        report = check_viscosity(u, op, SourceFunction.constant(0.0))
        assert report.all_passed
        assert all(np.isinf(c.margin) for c in report.checks)

    def test_family_sizes_validated(self):
        op = OperatorSpec.pucci_plus(0.0, 1.0, 1.0, 2)
        u = sampled(lambda r: r)
        with pytest.raises(InvalidSpec):
            check_viscosity(u, op, SourceFunction.constant(0.0), slopes=2)
        with pytest.raises(InvalidSpec):
            check_viscosity(u, op, SourceFunction.constant(0.0), curvatures=1)


class TestHolder:
    def test_pucci_power_alpha_one(self, pucci_case):
        _, _, sol, _ = pucci_case
        est = holder_exponent(sol, 0.0, decades=1.5)
        assert est.beta_fit == pytest.approx(0.5, abs=0.025)
        assert est.r_star == 0.0

    def test_smooth_profile_linear_rate(self):
        u = sampled(lambda r: r ** 2, n=2000)
        est = holder_exponent(u, 0.0, decades=1.5)
        assert est.beta_fit == pytest.approx(1.0, abs=0.01)

    def test_interior_zero(self):
        u = sampled(lambda r: (r - 0.5) ** 2, n=2000)
        est = holder_exponent(u, 0.5, decades=1.0)
        assert est.beta_fit == pytest.approx(1.0, abs=0.02)
        assert est.r_star == pytest.approx(0.5)

    def test_not_a_zero(self):
        u = sampled(lambda r: r, n=200)
        with pytest.raises(NotAZero):
            holder_exponent(u, 0.5)

    def test_insufficient_data(self):
        u = sampled(lambda r: r ** 2, n=4)
        with pytest.raises((InsufficientData, NotAZero)):
            holder_exponent(u, 0.0, decades=1.0)

    def test_decades_validated(self, pucci_case):
        _, _, sol, _ = pucci_case
        with pytest.raises(InvalidSpec):
            holder_exponent(sol, 0.0, decades=0.5)


class TestC1Bound:
    def test_pucci_power_right_bound(self, pucci_case):
        op, f, sol, _ = pucci_case
        report = c1_bound_check(sol, op, f, 0.0)
        by_name = {c.name: c for c in report.checks}
        assert by_name["right-bound"].passed
        # no nodes to the left of the origin: the left readings are vacuous
        assert np.isinf(by_name["machin[display]"].margin)
        assert np.isinf(by_name["machin[proof]"].margin)

    def test_steep_zero_with_no_forcing_fails(self):
        # u = cos(pi r) has u'(0) = 0 yet |u'| reaches pi; with f = 0 the
        # growth bound collapses to the tolerance and must fail
        op = OperatorSpec.pucci_plus(0.0, 1.0, 1.0, 2)
        u = sampled(lambda r: np.cos(np.pi * r), n=400)
        report = c1_bound_check(u, op, SourceFunction.constant(0.0), 0.0)
        by_name = {c.name: c for c in report.checks}
        assert not by_name["right-bound"].passed

    def test_not_a_zero(self, pucci_case):
        op, f, sol, _ = pucci_case
        with pytest.raises(NotAZero):
            c1_bound_check(sol, op, f, 0.7)


class TestC1Modulus:
    def test_smooth_profile_passes(self):
        u = sampled(lambda r: r * (1.0 - r), n=300)
        report = c1_modulus_report(u, alpha=0.0)
        assert report.all_passed, [c.as_dict() for c in report.failures()]
        names = {c.name for c in report.checks}
        assert names == {"c1-spread", "interlace[Lg-ld]",
                         "interlace[Ld-lg]", "zero-derivative"}

    def test_pucci_power_passes(self, pucci_case):
        op, _, sol, _ = pucci_case
        report = c1_modulus_report(sol, alpha=op.alpha)
        assert report.all_passed, [c.as_dict() for c in report.failures()]

    def test_kink_fails_interlacing(self):
        u = sampled(lambda r: np.abs(r - 0.5), n=100)
        report = c1_modulus_report(u, alpha=0.0, stride=10)
        by_name = {c.name: c for c in report.checks}
        assert not by_name["interlace[Lg-ld]"].passed
        assert by_name["interlace[Lg-ld]"].margin == pytest.approx(-2.0,
                                                                   abs=1e-8)

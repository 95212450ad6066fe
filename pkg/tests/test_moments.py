"""
Tests for the moment functionals, truncation and the spec grammar.

Two-point values are checked against direct expectations over the two atoms;
the Student law at very large d is checked against the normal moments.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.python.errors import (
    DegenerateMomentsError,
    DegenerateSampleError,
    DomainError,
    InfeasibleTruncationError,
    MomentDivergenceError,
    SpecSyntaxError,
    TruncationContractError,
    UnsupportedSpecError,
)
from src.python.moments import (
    INF,
    DistributionSpec,
    MomentSummary,
    analytic_moments,
    empirical_moments,
    gamma_functionals,
    keep_probability,
    moment_summary,
    parse_distribution_spec,
    truncated_moments,
    two_point_moments,
    zero_mean_truncation_find_a,
)


def _brute_two_point(b):
    """rho3, rho4, rho6 summed directly over the atoms -1/b and b"""
    p = 1.0 / (1.0 + b * b)
    atoms = ((-1.0 / b, 1.0 - p), (b, p))
    rho3 = sum(w * abs(x) ** 3 for x, w in atoms)
    rho4 = math.sqrt(sum(w * (x * x - 1.0) ** 2 for x, w in atoms))
    rho6 = sum(w * abs(x * x - 1.0) ** 3 for x, w in atoms) / rho3
    return rho3, rho4, rho6


class TestMomentSummary:
    """Test suite for the reduced moment quantities"""

    def test_iid_reduction(self):
        m = MomentSummary.from_iid(1.7, 1.5, 3.375, n=100)
        assert m.r3 == pytest.approx(0.17)
        assert m.r4 == pytest.approx(0.15)
        assert m.r6 == pytest.approx(3.375 / (1.7**2 * 10))
        assert m.is_iid and m.n == 100

    def test_with_n(self):
        m = MomentSummary.from_iid(1.7, 1.5, 3.375).with_n(4)
        assert m.n == 4
        assert m.r3 == pytest.approx(0.85)

    def test_with_n_needs_iid(self):
        m = MomentSummary.from_sums(1.0, 1.0, 1.0, 1.0)
        assert not m.is_iid
        with pytest.raises(ValueError):
            m.with_n(3)

    @given(
        st.floats(min_value=0.1, max_value=10),
        st.floats(min_value=1e-3, max_value=1e3),
    )
    @settings(max_examples=50)
    def test_scale_invariance(self, c, tbeta):
        """Rescaling every summand by c leaves r3, r4, r6 unchanged"""
        base = MomentSummary.from_sums(2.0, 3.0, tbeta, tbeta)
        scaled = MomentSummary.from_sums(
            2.0 * c**2, 3.0 * c**3, tbeta * c**4, tbeta * c**6
        )
        assert scaled.r3 == pytest.approx(base.r3, rel=1e-9)
        assert scaled.r4 == pytest.approx(base.r4, rel=1e-9)
        assert scaled.r6 == pytest.approx(base.r6, rel=1e-9)

    def test_degenerate(self):
        with pytest.raises(DegenerateMomentsError):
            MomentSummary.from_sums(0.0, 1.0, 1.0, 1.0)
        with pytest.raises(DegenerateMomentsError):
            MomentSummary.from_sums(1.0, 0.0, 1.0, 1.0)

    def test_rejects_negative_and_nan(self):
        with pytest.raises(DomainError):
            MomentSummary.from_sums(1.0, 1.0, -1.0, 1.0)
        with pytest.raises(DomainError):
            MomentSummary.from_sums(1.0, math.nan, 1.0, 1.0)
        with pytest.raises(DomainError):
            MomentSummary.from_iid(1.0, 0.0, 0.0, n=0)


class TestTwoPoint:
    """Test suite for the centered two-point law"""

    def test_closed_form_at_two(self):
        m = two_point_moments(2.0)
        assert (m.rho3, m.rho4, m.rho6) == pytest.approx((1.7, 1.5, 3.375))

    @pytest.mark.parametrize("b", [1.0, 1.5, 2.0, 10.0, 469.0])
    def test_closed_form_matches_atoms(self, b):
        m = two_point_moments(b)
        rho3, rho4, rho6 = _brute_two_point(b)
        assert m.rho3 == pytest.approx(rho3, rel=1e-12)
        assert m.rho4 == pytest.approx(rho4, rel=1e-9, abs=1e-12)
        assert m.rho6 == pytest.approx(rho6, rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("b", [1.5, 2.0, 10.0])
    def test_window_path_agrees(self, b):
        """The generic truncation path with an empty cut gives the closed form"""
        spec = DistributionSpec.two_point(b)
        m, keep = truncated_moments(spec, INF, INF)
        assert keep == 1.0
        assert m.rho3 == pytest.approx(two_point_moments(b).rho3, rel=1e-9)
        assert m.rho6 == pytest.approx(two_point_moments(b).rho6, rel=1e-9)

    @given(st.floats(min_value=1.0, max_value=1e3))
    def test_lyapunov(self, b):
        """E|X|^3 >= (E X^2)^(3/2) = 1"""
        assert two_point_moments(b).rho3 >= 1.0 - 1e-12

    def test_rademacher(self):
        m = two_point_moments(1.0)
        assert (m.rho3, m.rho4, m.rho6) == (1.0, 0.0, 0.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            two_point_moments(0.5)
        with pytest.raises(DomainError):
            DistributionSpec.two_point(0.9)


class TestEmpiricalMoments:
    """Test suite for plug-in sample moments"""

    def test_symmetric_pair(self):
        m = empirical_moments([-1.0, 1.0])
        assert (m.rho3, m.rho4, m.rho6) == pytest.approx((1.0, 0.0, 0.0))

    def test_matches_two_point(self):
        """{-1, -1, -1, 3} is the two-point law with b = sqrt(3) up to scale"""
        m = empirical_moments([-1.0, -1.0, -1.0, 3.0])
        ref = two_point_moments(math.sqrt(3.0))
        assert m.rho3 == pytest.approx(ref.rho3, rel=1e-12)
        assert m.rho4 == pytest.approx(ref.rho4, rel=1e-12)
        assert m.rho6 == pytest.approx(ref.rho6, rel=1e-12)

    def test_location_and_scale_free(self):
        x = np.array([0.3, -1.2, 2.5, 0.0, 4.1])
        a = empirical_moments(x)
        b = empirical_moments(7.0 + 3.0 * x)
        assert b.rho3 == pytest.approx(a.rho3, rel=1e-12)
        assert b.rho6 == pytest.approx(a.rho6, rel=1e-12)

    def test_singleton(self):
        with pytest.raises(DegenerateSampleError):
            empirical_moments([2.0])

    def test_constant_sample(self):
        with pytest.raises(DegenerateSampleError):
            analytic_moments(DistributionSpec.sample([5.0, 5.0, 5.0]))


class TestContinuousLaws:
    """Test suite for quadrature moments of the Student and Pareto laws"""

    def test_student_sixth_moment_diverges(self):
        with pytest.raises(MomentDivergenceError) as info:
            analytic_moments(DistributionSpec.student(5.0))
        assert info.value.order == 6

    def test_student_smallest_failing_order(self):
        with pytest.raises(MomentDivergenceError) as info:
            analytic_moments(DistributionSpec.student(3.5))
        assert info.value.order == 4

    def test_student_normal_limit(self):
        """rho3 -> 2 sqrt(2/pi) and rho4 -> sqrt 2 as d grows"""
        m = analytic_moments(DistributionSpec.student(1e6))
        assert m.rho3 == pytest.approx(2 * math.sqrt(2 / math.pi), rel=1e-3)
        assert m.rho4 == pytest.approx(math.sqrt(2.0), rel=1e-3)

    def test_pareto_variance(self):
        s = 8.0
        law = DistributionSpec.pareto(s).law()
        second = law.expect(lambda x: x * x, -INF, INF, (0.0,))
        assert second == pytest.approx(s / ((s - 2) * (s - 1) ** 2), rel=1e-8)
        assert law.partial_mean(-INF, INF) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize(
        "spec",
        [
            DistributionSpec.two_point(1.0),
            DistributionSpec.two_point(2.0),
            DistributionSpec.two_point(10.0),
            DistributionSpec.student(8.0),
            DistributionSpec.pareto(8.0),
            DistributionSpec.sample([0.3, -1.2, 2.5, 0.0, 4.1]),
        ],
        ids=lambda spec: spec.describe(),
    )
    def test_unit_variance_after_normalization(self, spec):
        """E (X/sigma)^2 = 1, so rho4^2 = E (X/sigma)^4 - 1"""
        law = spec.law()
        sigma2 = law.variance
        second = law.expect(lambda x: x * x, -INF, INF, (0.0,)) / sigma2
        fourth = law.expect(lambda x: x**4, -INF, INF, (0.0,)) / sigma2**2
        assert second == pytest.approx(1.0, rel=1e-8)
        assert analytic_moments(spec).rho4 ** 2 == pytest.approx(
            fourth - 1.0, rel=1e-6, abs=1e-12
        )
        if spec.kind == "two_point":
            assert sigma2 == pytest.approx(1.0, rel=1e-12)

    def test_pareto_finite(self):
        m = analytic_moments(DistributionSpec.pareto(8.0))
        assert all(math.isfinite(v) for v in (m.rho3, m.rho4, m.rho6))
        assert m.rho3 >= 1.0

    def test_pareto_heavy_right_only(self):
        with pytest.raises(MomentDivergenceError) as info:
            analytic_moments(DistributionSpec.pareto(4.5))
        assert info.value.order == 6

    def test_parameter_domain(self):
        with pytest.raises(DomainError):
            DistributionSpec.student(0.0)
        with pytest.raises(DomainError):
            DistributionSpec.pareto(1.0)


class TestTruncation:
    """Test suite for zero-mean truncation windows"""

    def test_symmetric_cut(self):
        spec = DistributionSpec.student(3.0)
        assert zero_mean_truncation_find_a(spec, 5.0) == 5.0

    def test_pareto_cut(self):
        spec = DistributionSpec.pareto(3.0)
        a = zero_mean_truncation_find_a(spec, 10.0)
        assert 0.0 < a < 0.5
        assert spec.law().partial_mean(-a, 10.0) == pytest.approx(0.0, abs=1e-10)

    def test_pareto_no_cut(self):
        assert zero_mean_truncation_find_a(DistributionSpec.pareto(3.0), INF) == INF

    def test_discrete_asymmetric(self):
        spec = DistributionSpec.two_point(2.0)
        assert zero_mean_truncation_find_a(spec, 3.0) == INF
        with pytest.raises(InfeasibleTruncationError):
            zero_mean_truncation_find_a(spec, 1.0)

    def test_window_keeping_every_atom(self):
        m, keep = truncated_moments(DistributionSpec.two_point(2.0), 1.0, 3.0)
        assert keep == 1.0
        assert m.rho3 == pytest.approx(1.7)

    def test_student_window_is_finite(self):
        """Truncation restores moments the Student law does not have"""
        m, keep = truncated_moments(DistributionSpec.student(3.0), 5.0, 5.0)
        assert all(math.isfinite(v) for v in (m.rho3, m.rho4, m.rho6))
        assert 0.97 < keep < 1.0

    def test_atom_at_zero_raises_rho4(self):
        """Removed mass sits at zero, a unit distance from the mean square"""
        spec = DistributionSpec.student(8.0)
        wide, _ = truncated_moments(spec, 50.0, 50.0)
        narrow, keep = truncated_moments(spec, 1.0, 1.0)
        assert keep < 0.7
        assert narrow.rho4 ** 2 >= 1.0 - keep
        assert wide.rho4 == pytest.approx(analytic_moments(spec).rho4, rel=1e-3)

    def test_contract(self):
        with pytest.raises(TruncationContractError):
            truncated_moments(DistributionSpec.student(3.0), 1.0, 5.0)

    def test_moments_spec_window(self):
        spec = DistributionSpec.from_moments(MomentSummary.from_iid(1.5, 1.0, 1.0))
        assert truncated_moments(spec, INF, INF)[0].rho3 == 1.5
        with pytest.raises(UnsupportedSpecError):
            truncated_moments(spec, 2.0, 2.0)

    def test_summary_follows_window(self):
        spec = DistributionSpec.student(4.0).truncated(3.0, 3.0)
        m, keep = truncated_moments(spec.untruncated(), 3.0, 3.0)
        assert moment_summary(spec) == m
        assert keep_probability(spec) == pytest.approx(keep)
        assert keep_probability(spec.untruncated()) == 1.0

    @given(
        st.sampled_from([DistributionSpec.student(3.0), DistributionSpec.pareto(3.0)]),
        st.floats(0.01, 20.0),
        st.floats(0.01, 20.0),
        st.floats(0.0, 20.0),
        st.floats(0.0, 20.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_keep_probability_nested_windows(self, spec, a, b, da, db):
        inner = keep_probability(spec.truncated(a, b))
        outer = keep_probability(spec.truncated(a + da, b + db))
        assert 0.0 <= inner <= outer <= 1.0

    def test_window_domain(self):
        with pytest.raises(DomainError):
            DistributionSpec.student(4.0).truncated(0.0, 1.0)
        with pytest.raises(DomainError):
            zero_mean_truncation_find_a(DistributionSpec.student(4.0), -1.0)


class TestGammaFunctionals:
    """Test suite for the split second and third moments"""

    def test_rademacher(self):
        g = gamma_functionals(DistributionSpec.two_point(1.0), 9)
        assert g.gamma2 == 0.0
        assert g.gamma3 == pytest.approx(1 / 3)

    def test_threshold_is_closed_for_gamma3(self):
        """The atom -1/2 sits exactly on the threshold 1/2 at n = 1"""
        g = gamma_functionals(DistributionSpec.two_point(2.0), 1)
        assert g.gamma2 == pytest.approx(0.8)
        assert g.gamma3 == pytest.approx(0.1)

    def test_both_atoms_beyond_threshold(self):
        g = gamma_functionals(DistributionSpec.two_point(1.5), 1)
        assert g.gamma2 == pytest.approx(1.0)
        assert g.gamma3 == 0.0

    def test_continuous_split_adds_up(self):
        """gamma2 + E X^2 1{|X| <= h} = 1"""
        spec = DistributionSpec.student(6.0)
        n = 16
        g = gamma_functionals(spec, n)
        law = spec.law()
        sigma2 = 6.0 / 4.0
        h = 0.5 * math.sqrt(sigma2 * n)
        inner = law.expect(lambda x: x * x, -h, h, (0.0,)) / sigma2
        assert g.gamma2 + inner == pytest.approx(1.0, rel=1e-8)

    @pytest.mark.parametrize(
        "spec, n",
        [
            (DistributionSpec.two_point(2.0), 4),
            (DistributionSpec.two_point(3.0), 25),
            (DistributionSpec.student(8.0), 16),
            (DistributionSpec.pareto(8.0), 9),
        ],
    )
    def test_cube_split_adds_up(self, spec, n):
        """gamma3 sqrt(n) + E|X|^3 1{|X| > h} = rho3"""
        g = gamma_functionals(spec, n)
        law = spec.law()
        sigma = math.sqrt(law.variance)
        h = 0.5 * sigma * math.sqrt(n)

        def cube(x):
            return abs(x) ** 3

        beyond = law.expect(cube, -INF, -h, (-sigma,)) + law.expect(
            cube, h, INF, (sigma,)
        )
        total = g.gamma3 * math.sqrt(n) + beyond / sigma**3
        assert total == pytest.approx(analytic_moments(spec).rho3, rel=1e-7)

    def test_cube_split_two_point_by_hand(self):
        # b = 2, n = 4: h = 1 keeps the atom -1/2 and drops the atom 2
        g = gamma_functionals(DistributionSpec.two_point(2.0), 4)
        assert 2.0 * g.gamma3 == pytest.approx(0.1)
        assert 2.0 * g.gamma3 + 0.2 * 8.0 == pytest.approx(1.7)

    def test_domain(self):
        with pytest.raises(DomainError):
            gamma_functionals(DistributionSpec.two_point(1.0), 0)


class TestSpecGrammar:
    """Test suite for the distribution spec strings"""

    def test_laws(self):
        assert parse_distribution_spec("two-point:b=2") == DistributionSpec.two_point(2)
        assert parse_distribution_spec(" student:d=4.5 ").param == 4.5
        assert parse_distribution_spec("pareto:s=3").kind == "pareto"

    def test_moments(self):
        spec = parse_distribution_spec("moments:rho3=1.7,rho4=1.5,rho6=3.375")
        assert spec.summary.rho4 == 1.5
        assert spec.describe() == "moments:rho3=1.7,rho4=1.5,rho6=3.375"

    def test_truncation_suffix(self):
        spec = parse_distribution_spec("student:d=4|trunc:b=3")
        assert spec.window == (3.0, 3.0)
        spec = parse_distribution_spec("pareto:s=3|trunc:a=0.2,b=10")
        assert spec.window == (0.2, 10.0)
        assert spec.describe() == "pareto:s=3|trunc:a=0.2,b=10"

    def test_solved_truncation(self):
        spec = parse_distribution_spec("pareto:s=3|trunc:b=10")
        assert 0.0 < spec.window[0] < 0.5

    def test_sample_file(self, tmp_path):
        path = tmp_path / "draws.txt"
        path.write_text("# three draws\n1\n-1\n3\n")
        spec = parse_distribution_spec(f"sample:{path}")
        assert spec.values == (0.0, -2.0, 2.0)
        assert spec.describe() == "sample:<3 values>"

    def test_missing_sample_file(self, tmp_path):
        with pytest.raises(SpecSyntaxError):
            parse_distribution_spec(f"sample:{tmp_path / 'absent.txt'}")

    @pytest.mark.parametrize(
        "text",
        [
            "gauss:s=1",
            "student",
            "student:d=x",
            "student:d=1,d=2",
            "student:k=3",
            "moments:rho3=1",
            "student:d=3|clip:b=2",
            "student:d=3|trunc:a=1",
        ],
    )
    def test_syntax_errors(self, text):
        with pytest.raises(SpecSyntaxError) as info:
            parse_distribution_spec(text)
        assert "grammar" in str(info.value)

    def test_range_errors_are_not_syntax_errors(self):
        with pytest.raises(DomainError):
            parse_distribution_spec("student:d=0")


class TestDraw:
    """Test suite for inverse-CDF sampling"""

    def test_two_point_atoms(self):
        rng = np.random.Generator(np.random.Philox(7))
        x = DistributionSpec.two_point(2.0).draw(rng, (200, 5))
        assert x.shape == (200, 5)
        assert set(np.unique(x)) <= {-0.5, 2.0}

    def test_truncated_draws(self):
        rng = np.random.Generator(np.random.Philox(7))
        x = DistributionSpec.student(3.0).truncated(1.0, 1.0).draw(rng, (1000, 2))
        assert np.all(np.abs(x) < 1.0)
        assert np.any(x == 0.0)

    def test_moments_spec_cannot_draw(self):
        spec = DistributionSpec.from_moments(MomentSummary.from_iid(1.5, 1.0, 1.0))
        rng = np.random.Generator(np.random.Philox(7))
        with pytest.raises(UnsupportedSpecError):
            spec.draw(rng, (2, 2))

"""Tests for window enumeration, mixing coefficients, and gap certificates."""

import math

import numpy as np
import pytest

from inarlab import (
    IDENTITY_BOUND,
    DeltaBound,
    InarParams,
    binomial_death_chain,
    enumerate_window_pairs,
    fit_decay_rate,
    gap_for_epsilon,
    get_delta_bound,
    iid_chain,
    inar_kernel,
    indicator_chain_spec,
    lag_joint,
    maximal_correlation,
    poisson_death_chain,
    register_delta_bound,
    rho_markov,
    rho_star_window,
    verify_absorbing_split,
    verify_indicator_bound,
    window_joint_pmf,
)
from inarlab.errors import (
    InsufficientDataError,
    InvalidBoundError,
    InvalidParameterError,
    WindowTooWideError,
)

# regression fixtures: exact odd/even-group lambda values of indicator
# chains started at 1 (length 6), frozen from the exact computation
ABSORBING_SPLIT_FIXTURES = {
    0.01: 0.09999999899999999,
    0.05: 0.22360540020749306,
    1.0 / 9.0: 0.333282528069908,
}


class TestEnumerateWindowPairs:
    def test_width_two_single_pair(self):
        pairs = enumerate_window_pairs(2, 1)
        assert len(pairs) == 1
        assert pairs[0].s == (0,) and pairs[0].t == (1,)

    def test_width_three_count(self):
        assert len(enumerate_window_pairs(3, 1)) == 6

    def test_gap_at_least_width_is_empty(self):
        assert enumerate_window_pairs(3, 3) == []
        assert enumerate_window_pairs(4, 6) == []

    def test_interlaced_pairs_are_present(self):
        pairs = enumerate_window_pairs(4, 1)
        assert any(max(p.s) > min(p.t) for p in pairs)

    def test_pairs_are_unordered_and_unique(self):
        pairs = enumerate_window_pairs(4, 1)
        seen = {frozenset((p.s, p.t)) for p in pairs}
        assert len(seen) == len(pairs)
        assert all(min(p.s) < min(p.t) for p in pairs)

    def test_width_cap(self):
        with pytest.raises(WindowTooWideError):
            enumerate_window_pairs(9, 1)


class TestRhoStarWindow:
    def test_iid_chain_is_independent(self):
        chain = iid_chain(1.0)
        for gap in (1, 2):
            scan = rho_star_window(chain, 3, gap, cap=20)
            assert scan.value <= 1e-9

    def test_single_pair_matches_direct_computation(self):
        chain = poisson_death_chain(1.0, 0.5)
        scan = rho_star_window(chain, 2, 1, cap=30)
        joint, _ = lag_joint(chain, 1, 30)
        assert scan.pair_count == 1
        assert abs(scan.value - maximal_correlation(joint)) <= 1e-12

    def test_monotone_in_gap(self):
        chain = poisson_death_chain(2.0, 0.5)
        values = [rho_star_window(chain, 4, gap, cap=20).value for gap in (1, 2, 3)]
        assert values[0] >= values[1] >= values[2]

    def test_nondecreasing_in_width(self):
        chain = poisson_death_chain(2.0, 0.5)
        v3 = rho_star_window(chain, 3, 1, cap=20).value
        v4 = rho_star_window(chain, 4, 1, cap=20).value
        assert v4 >= v3 - 1e-12

    def test_vacuous_scan(self):
        scan = rho_star_window(indicator_chain_spec(0.5, 0.5), 3, 5, cap=1)
        assert scan.vacuous and scan.value == 0.0 and scan.best is None

    def test_dominates_single_pair_value(self):
        chain = binomial_death_chain(3, 0.5, 0.4)
        scan = rho_star_window(chain, 4, 1, cap=3)
        joint, _ = lag_joint(chain, 1, 3)
        assert scan.value >= maximal_correlation(joint) - 1e-12


class TestRhoMarkov:
    def test_iid_is_zero(self):
        assert rho_markov(iid_chain(2.0), 3, 25) <= 1e-10

    def test_inar_truncation_convergence_to_thinning_rate(self):
        # coefficient at gap n converges (in the cap) to a**n; stability
        # across caps 50/100/200 justifies freezing the limit value
        spec = inar_kernel(InarParams(a=0.5, lam=1.0))
        for n in (1, 2, 4):
            values = [rho_markov(spec, n, cap) for cap in (50, 100, 200)]
            assert abs(values[2] - values[1]) <= 1e-10
            assert abs(values[2] - 0.5**n) <= 1e-9

    def test_consistency_with_window_scan(self):
        chain = poisson_death_chain(2.0, 0.6)
        for n in (1, 2):
            pairwise = rho_markov(chain, n, 25)
            scan = rho_star_window(chain, n + 1, n, cap=25)
            assert scan.value >= pairwise - 1e-10
            # the single pair S={0}, T={n} is among the enumerated ones
            one_pair = [
                p for p in enumerate_window_pairs(n + 1, n)
                if p.s == (0,) and p.t == (n,)
            ]
            assert len(one_pair) == 1

    def test_decaying_in_gap(self):
        spec = inar_kernel(InarParams(a=0.6, lam=1.0))
        vals = [rho_markov(spec, n, 60) for n in (1, 2, 3)]
        assert vals[0] > vals[1] > vals[2]


class TestGapCertificate:
    def test_identity_bound_examples(self):
        cert = gap_for_epsilon(0.5, 1.0, IDENTITY_BOUND)
        assert cert.m == 4 and abs(cert.gamma - 1.0 / 9.0) <= 1e-15
        cert = gap_for_epsilon(0.5, 0.3, IDENTITY_BOUND)
        assert cert.m == 7 and abs(cert.gamma - 0.01) <= 1e-15
        cert = gap_for_epsilon(0.9, 0.3, IDENTITY_BOUND)
        assert cert.m == 44

    def test_certificate_invariants(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a = float(rng.uniform(0.05, 0.95))
            eps = float(rng.uniform(0.01, 1.0))
            cert = gap_for_epsilon(a, eps, IDENTITY_BOUND)
            assert cert.gamma <= 1.0 / 9.0 + 1e-15
            assert 3.0 * math.sqrt(cert.gamma) <= cert.delta + 1e-12
            assert a**cert.m <= cert.gamma
            assert cert.m == 1 or a ** (cert.m - 1) > cert.gamma

    def test_monotone_in_epsilon(self):
        eps_grid = np.linspace(0.05, 1.0, 30)
        ms = [gap_for_epsilon(0.5, float(e), IDENTITY_BOUND).m for e in eps_grid]
        assert all(m2 <= m1 for m1, m2 in zip(ms, ms[1:]))

    def test_invalid_bound(self):
        bad = DeltaBound("bad", lambda eps: 0.0)
        with pytest.raises(InvalidBoundError):
            gap_for_epsilon(0.5, 0.5, bad)

    def test_registry(self):
        assert get_delta_bound("identity") is IDENTITY_BOUND
        register_delta_bound(DeltaBound("half", lambda e: e / 2.0))
        assert get_delta_bound("half").evaluator(0.5) == 0.25
        with pytest.raises(InvalidParameterError):
            get_delta_bound("no-such-bound")


class TestVerifyIndicatorBound:
    def test_zero_start_probability(self):
        rep = verify_indicator_bound(0.0, 0.3, 0.5, IDENTITY_BOUND, 6)
        assert rep.passed and rep.value == 0.0

    def test_half_epsilon_window_six(self):
        rep = verify_indicator_bound(0.5, 0.5, 0.5, IDENTITY_BOUND, 6)
        # gap m=6 cannot fit in width 6: vacuous by arithmetic, still valid
        if not rep.vacuous:
            assert rep.passed
        rep = verify_indicator_bound(0.5, 0.3, 0.5, IDENTITY_BOUND, 6)
        assert not rep.vacuous and rep.passed and rep.margin > 0.0

    def test_wider_gaps_never_increase_the_coefficient(self):
        spec = indicator_chain_spec(0.5, 0.3)
        cert = gap_for_epsilon(0.3, 0.5, IDENTITY_BOUND)
        values = [
            rho_star_window(spec, 6, gap, cap=1).value
            for gap in range(cert.m, 6)
        ]
        assert all(v2 <= v1 + 1e-12 for v1, v2 in zip(values, values[1:]))


class TestVerifyAbsorbingSplit:
    def test_all_zero_chain(self):
        law = window_joint_pmf(indicator_chain_spec(0.0, 0.05), [0, 1, 2, 3], cap=1)
        rep = verify_absorbing_split(law, 0.05)
        assert rep.hypothesis_ok and rep.value == 0.0 and rep.passed

    def test_frozen_regression_values(self):
        for eps, frozen in ABSORBING_SPLIT_FIXTURES.items():
            law = window_joint_pmf(
                indicator_chain_spec(1.0, eps), list(range(6)), cap=1
            )
            rep = verify_absorbing_split(law, eps)
            assert rep.hypothesis_ok
            assert rep.passed
            assert rep.value <= 3.0 * math.sqrt(eps)
            assert abs(rep.value - frozen) <= 1e-12

    def test_start_at_one_length_four(self):
        eps = 0.05
        law = window_joint_pmf(indicator_chain_spec(1.0, eps), [0, 1, 2, 3], cap=1)
        rep = verify_absorbing_split(law, eps)
        assert rep.hypothesis_ok and rep.passed and rep.margin > 0.0

    def test_hypothesis_violation_is_a_report_not_an_error(self):
        # survival rate far above epsilon breaks the conditional-zero floor
        law = window_joint_pmf(indicator_chain_spec(1.0, 0.5), [0, 1, 2, 3], cap=1)
        rep = verify_absorbing_split(law, 0.05)
        assert not rep.hypothesis_ok
        assert not rep.passed
        assert "epsilon" in rep.hypothesis_note or "history" in rep.hypothesis_note

    def test_epsilon_above_cap_is_hypothesis_failure(self):
        law = window_joint_pmf(indicator_chain_spec(1.0, 0.05), [0, 1], cap=1)
        rep = verify_absorbing_split(law, 0.2)
        assert not rep.hypothesis_ok

    def test_length_cap(self):
        law = window_joint_pmf(indicator_chain_spec(1.0, 0.05), list(range(7)), cap=1)
        with pytest.raises(WindowTooWideError):
            verify_absorbing_split(law, 0.05)


class TestFitDecayRate:
    def test_exact_geometric_input(self):
        fit = fit_decay_rate([(n, 0.25 * 0.7**n) for n in range(1, 8)])
        assert abs(fit.rate - 0.7) <= 1e-9
        assert fit.r_squared >= 1.0 - 1e-12

    def test_insufficient_points(self):
        with pytest.raises(InsufficientDataError):
            fit_decay_rate([(1, 0.5), (2, 0.25)])

    def test_constant_zero_input(self):
        with pytest.raises(InsufficientDataError):
            fit_decay_rate([(n, 0.0) for n in range(1, 10)])

    def test_floor_filters_noise(self):
        points = [(n, 0.5**n) for n in range(1, 6)] + [(40, 1e-16)]
        fit = fit_decay_rate(points)
        assert abs(fit.rate - 0.5) <= 1e-9

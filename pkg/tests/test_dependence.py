"""Tests for the dependence coefficients, with independent oracles."""

import math

import numpy as np
import pytest

from inarlab import (
    JointPmf,
    TripletPmf,
    joint_from_json,
    joint_to_json,
    lambda_coefficient,
    markov_triplet_residual,
    maximal_correlation,
    tensor_combine,
)
from inarlab.errors import (
    AlphabetTooLargeError,
    ExplosionLimitError,
    InvalidParameterError,
)


def ace_oracle(mass: np.ndarray, restarts: int = 6, iters: int = 400) -> float:
    """Alternating conditional expectations: power iteration on the
    conditional-expectation operator, independent of any SVD routine."""
    rng = np.random.default_rng(1234)
    rm = mass.sum(axis=1)
    cm = mass.sum(axis=0)
    best = 0.0
    for _ in range(restarts):
        g = rng.standard_normal(mass.shape[1])
        f = np.zeros(mass.shape[0])
        for _ in range(iters):
            g = g - cm @ g
            norm = math.sqrt(float((g**2) @ cm))
            if norm < 1e-14:
                break
            g /= norm
            with np.errstate(invalid="ignore", divide="ignore"):
                f = np.where(rm > 0, (mass @ g) / np.where(rm > 0, rm, 1.0), 0.0)
            f = f - rm @ f
            norm = math.sqrt(float((f**2) @ rm))
            if norm < 1e-14:
                break
            f /= norm
            g = np.where(cm > 0, (mass.T @ f) / np.where(cm > 0, cm, 1.0), 0.0)
        corr = float(f @ mass @ g) / max(
            1e-300, math.sqrt(float((f**2) @ rm)) * math.sqrt(float((g**2) @ cm))
        )
        best = max(best, abs(corr))
    return best


def indicator_correlation_sup(mass: np.ndarray) -> float:
    """Sup of |Corr(1_A, 1_B)| over all nontrivial unions of atoms."""
    rm = mass.sum(axis=1)
    cm = mass.sum(axis=0)
    best = 0.0
    n_r, n_c = mass.shape
    for ra in range(1, 2**n_r - 1):
        rows = [i for i in range(n_r) if ra >> i & 1]
        pa = rm[rows].sum()
        if not 0.0 < pa < 1.0:
            continue
        for cb in range(1, 2**n_c - 1):
            cols = [j for j in range(n_c) if cb >> j & 1]
            pb = cm[cols].sum()
            if not 0.0 < pb < 1.0:
                continue
            pab = mass[np.ix_(rows, cols)].sum()
            corr = (pab - pa * pb) / math.sqrt(pa * (1 - pa) * pb * (1 - pb))
            best = max(best, abs(corr))
    return best


def random_joint(rng, max_side=4) -> JointPmf:
    r = int(rng.integers(2, max_side + 1))
    c = int(rng.integers(2, max_side + 1))
    return JointPmf(rng.dirichlet(np.ones(r * c)).reshape(r, c))


class TestMaximalCorrelation:
    def test_product_joint_is_independent(self):
        rng = np.random.default_rng(0)
        j = JointPmf(np.outer(rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(5))))
        assert maximal_correlation(j) <= 1e-10

    def test_two_by_two_equals_indicator_correlation(self):
        j = JointPmf(np.array([[0.4, 0.1], [0.1, 0.4]]))
        assert abs(maximal_correlation(j) - 0.6) <= 1e-12
        # on binary alphabets the indicator grid attains the supremum
        assert abs(indicator_correlation_sup(j.mass) - 0.6) <= 1e-12

    def test_identity_coupling_is_maximal(self):
        j = JointPmf(np.eye(4) / 4.0)
        assert abs(maximal_correlation(j) - 1.0) <= 1e-12

    def test_degenerate_side_yields_zero(self):
        j = JointPmf(np.array([[0.6, 0.4]]))
        assert maximal_correlation(j) == 0.0
        padded = JointPmf(np.array([[0.6, 0.4], [0.0, 0.0]]))
        assert maximal_correlation(padded) == 0.0

    def test_against_alternating_expectation_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            j = random_joint(rng)
            assert abs(maximal_correlation(j) - ace_oracle(j.mass)) <= 1e-7

    def test_indicator_grid_is_a_lower_bound(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            j = random_joint(rng)
            assert indicator_correlation_sup(j.mass) <= maximal_correlation(j) + 1e-10

    def test_label_permutation_and_transpose_invariance(self):
        rng = np.random.default_rng(3)
        j = random_joint(rng)
        rho = maximal_correlation(j)
        perm = rng.permutation(j.mass.shape[0])
        assert abs(maximal_correlation(JointPmf(j.mass[perm])) - rho) <= 1e-12
        assert abs(maximal_correlation(j.transpose()) - rho) <= 1e-12

    def test_range(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            assert 0.0 <= maximal_correlation(random_joint(rng)) <= 1.0


class TestLambdaCoefficient:
    def test_product_joint(self):
        rng = np.random.default_rng(0)
        j = JointPmf(np.outer(rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))))
        assert lambda_coefficient(j) <= 1e-12

    def test_two_by_two_hand_enumeration(self):
        j = JointPmf(np.array([[0.4, 0.1], [0.1, 0.4]]))
        # direct enumeration over the 3x3 nontrivial event pairs
        best = 0.0
        events = [(0,), (1,), (0, 1)]
        for ea in events:
            for eb in events:
                pa = j.mass[list(ea), :].sum()
                pb = j.mass[:, list(eb)].sum()
                pab = j.mass[np.ix_(list(ea), list(eb))].sum()
                best = max(best, abs(pab - pa * pb) / math.sqrt(pa * pb))
        assert abs(best - 0.3) <= 1e-12
        assert abs(lambda_coefficient(j) - 0.3) <= 1e-12

    def test_dominated_by_maximal_correlation(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            j = random_joint(rng)
            assert lambda_coefficient(j) <= maximal_correlation(j) + 1e-10

    def test_alphabet_cap(self):
        j = JointPmf(np.full((13, 2), 1.0 / 26.0))
        with pytest.raises(AlphabetTooLargeError):
            lambda_coefficient(j)
        assert lambda_coefficient(j, max_alphabet=13) >= 0.0


class TestMarkovTripletResidual:
    def test_chain_construction_is_markov(self):
        # mass[a, b, c] = p(a) k1(a,b) k2(b,c): conditionally independent ends
        rng = np.random.default_rng(9)
        p = rng.dirichlet(np.ones(3))
        k1 = rng.dirichlet(np.ones(4), size=3)
        k2 = rng.dirichlet(np.ones(3), size=4)
        mass = np.einsum("a,ab,bc->abc", p, k1, k2)
        assert markov_triplet_residual(TripletPmf(mass)) <= 1e-12

    def test_independent_triplet(self):
        assert markov_triplet_residual(TripletPmf(np.ones((2, 2, 2)) / 8.0)) == 0.0

    def test_forced_equality_control_with_direct_enumeration(self):
        mass = np.zeros((2, 2, 2))
        for b in (0, 1):
            for a in (0, 1):
                mass[a, b, a] = 0.25
        t = TripletPmf(mass)
        # direct conditional-probability enumeration at b=0:
        # P(a=0,c=0|b)=1/2 while P(a=0|b)P(c=0|b)=1/4
        assert abs(markov_triplet_residual(t) - 0.25) <= 1e-15

    def test_zero_probability_conditioning_atoms_ignored(self):
        mass = np.zeros((2, 3, 2))
        mass[:, 0, :] = 0.25
        assert markov_triplet_residual(TripletPmf(mass)) == 0.0


class TestTensorCombine:
    def test_single_block_is_identity_up_to_labels(self):
        j = JointPmf(np.array([[0.2, 0.3], [0.4, 0.1]]))
        combined = tensor_combine([j])
        assert np.allclose(combined.mass, j.mass)
        assert combined.rows == ((0,), (1,))

    def test_product_blocks_give_product_joint(self):
        rng = np.random.default_rng(2)
        blocks = [
            JointPmf(np.outer(rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2))))
            for _ in range(2)
        ]
        combined = tensor_combine(blocks)
        assert maximal_correlation(combined) <= 1e-9

    def test_blockwise_maximum_rule(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            j1, j2 = random_joint(rng), random_joint(rng)
            got = maximal_correlation(tensor_combine([j1, j2]))
            want = max(maximal_correlation(j1), maximal_correlation(j2))
            assert abs(got - want) <= 1e-9

    def test_explosion_limit(self):
        j = JointPmf(np.full((4, 4), 1.0 / 16.0))
        with pytest.raises(ExplosionLimitError):
            tensor_combine([j] * 6, explosion_limit=1000)


class TestJsonRoundTrip:
    def test_round_trip_preserves_everything(self):
        j = JointPmf(
            np.array([[0.25, 0.25], [0.3, 0.2]]), rows=("x", "y"), cols=(0, 1)
        )
        back = joint_from_json(joint_to_json(j))
        assert np.array_equal(back.mass, j.mass)
        assert back.rows == j.rows

    def test_tuple_labels_survive(self):
        j = tensor_combine([JointPmf(np.array([[0.5, 0.0], [0.0, 0.5]]))] * 2)
        back = joint_from_json(joint_to_json(j))
        assert back.rows == j.rows
        assert abs(maximal_correlation(back) - 1.0) <= 1e-12

    def test_malformed_payload(self):
        with pytest.raises(InvalidParameterError):
            joint_from_json('{"rows": [0]}')


class TestValidation:
    def test_mass_must_normalize(self):
        with pytest.raises(InvalidParameterError):
            JointPmf(np.array([[0.5, 0.1], [0.1, 0.1]]))
        with pytest.raises(InvalidParameterError):
            TripletPmf(np.full((2, 2, 2), 0.2))

    def test_label_shape_mismatch(self):
        with pytest.raises(InvalidParameterError):
            JointPmf(np.full((2, 2), 0.25), rows=("only-one",))

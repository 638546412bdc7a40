"""
Tests for the operator Schur algorithm.
"""

import sys
import os
from unittest.mock import patch
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cmvkit.choice_seq import ChoiceSequence, SequenceKind, Tail, random_choice_sequence
from cmvkit.cmv import build_cmv
from cmvkit.errors import DepthExhausted, NotConservative, NotNormalized, ShapeMismatch
from cmvkit.discrete_system import DiscreteSystem
from cmvkit.functions import CaratheodoryFunction, Representation, SchurFunction
from cmvkit.linalg_core import haar_unitary, op_norm, unitarity_residual
from cmvkit.schur import (
    _working_coefficients,
    cara_schur_transform,
    compose_mobius,
    mobius_parameter,
    pure_part,
    schur_iterate,
    schur_parameters,
    schur_parameters_from_realization,
    schur_step,
    schur_to_caratheodory,
)


@pytest.fixture
def scalar_sequence():
    return ChoiceSequence.from_parameters([0.3, -0.2j, 0.5, np.exp(0.4j)], Tail.TERMINATED)


class TestForward:

    def test_constant_step(self):
        gamma, theta_1 = schur_step(SchurFunction.from_constant([[0.5]]))
        assert_allclose(gamma, [[0.5]])
        assert theta_1.representation is Representation.CONSTANT
        assert_allclose(theta_1.value(0.3), [[0.0]])

    def test_scalar_step_matches_classical_recursion(self):
        # theta(l) = (g + l t1(l)) / (1 + conj(g) l t1(l)) with t1 = 0.4
        g, t1 = 0.3 + 0.1j, 0.4
        theta = compose_mobius(g, SchurFunction.from_constant([[t1]]))
        gamma, theta_1 = schur_step(theta, count=20)
        assert_allclose(gamma, [[g]], atol=1e-14)
        assert_allclose(theta_1.taylor_coefficients(10)[0], [[t1]], atol=1e-12)
        assert_allclose(theta_1.taylor_coefficients(10)[5], [[0.0]], atol=1e-12)

    def test_round_trip_scalar(self, scalar_sequence):
        recovered = schur_parameters(SchurFunction.from_cmv(scalar_sequence), 6)
        assert recovered.tail is Tail.TERMINATED
        assert recovered.length == 4
        for a, b in zip(scalar_sequence.params, recovered.params):
            assert_allclose(a, b, atol=1e-8)

    def test_round_trip_blocks(self):
        seq = random_choice_sequence(2, 2, 2, seed=31, kind=SequenceKind.TERMINATE_UNITARY)
        recovered = schur_parameters(SchurFunction.from_cmv(seq), seq.length + 1)
        assert recovered.length == seq.length
        for a, b in zip(seq.params, recovered.params):
            assert op_norm(a - b) < 1e-8

    def test_zero_tail_sequence(self):
        theta = SchurFunction.from_taylor([[[0.5]], [[0.1]]])
        seq = schur_parameters(theta, 4)
        assert seq.tail is Tail.ZERO_TAIL
        assert seq.length == 4

    def test_working_taylor_depth(self, scalar_sequence):
        theta = SchurFunction.from_cmv(scalar_sequence)
        with patch("cmvkit.schur._working_coefficients", wraps=_working_coefficients) as spy:
            schur_parameters(theta, 3)
        assert spy.call_args_list[0].args == (theta, 2 * 3 + 4)

    def test_needs_one_parameter(self):
        with pytest.raises(DepthExhausted):
            schur_parameters(SchurFunction.from_constant([[0.5]]), 0)

    def test_borderline_diagnostics(self):
        diagnostics = []
        schur_parameters(SchurFunction.from_constant([[1.0 - 1e-7]]), 3, diagnostics=diagnostics)
        assert diagnostics

    def test_iterate_of_cmv_is_shifted_function(self, scalar_sequence):
        shifted = ChoiceSequence.from_parameters(scalar_sequence.params[2:], Tail.TERMINATED)
        iterate = schur_iterate(SchurFunction.from_cmv(scalar_sequence), 2)
        expected = SchurFunction.from_cmv(shifted).taylor_coefficients(8)
        for a, b in zip(iterate.taylor_coefficients(8), expected):
            assert_allclose(a, b, atol=1e-9)


class TestBackward:

    def test_compose_inverts_step(self):
        theta = SchurFunction.from_cmv(random_choice_sequence(2, 2, 3, seed=41))
        gamma, theta_1 = schur_step(theta, count=20)
        rebuilt = compose_mobius(gamma, theta_1)
        for a, b in zip(rebuilt.taylor_coefficients(20), theta.taylor_coefficients(20)):
            assert op_norm(a - b) < 1e-10

    def test_compose_cmv_is_exact(self, scalar_sequence):
        shifted = ChoiceSequence.from_parameters(scalar_sequence.params[1:], Tail.TERMINATED)
        composed = compose_mobius(scalar_sequence.params[0], SchurFunction.from_cmv(shifted))
        assert composed.representation is Representation.REALIZATION
        original = SchurFunction.from_cmv(scalar_sequence)
        for lam in (0.0, 0.5, -0.3 + 0.6j):
            assert_allclose(composed.value(lam), original.value(lam), atol=1e-12)

    def test_polynomial_composition(self):
        composed = compose_mobius(0.0, SchurFunction.from_taylor([[[0.5]]]))
        assert composed.exact
        assert_allclose([c[0, 0] for c in composed.coefficients], [0.0, 0.5])

    def test_compose_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            compose_mobius(np.diag([0.5, 0.5]), SchurFunction.from_constant([[0.1]]))

    def test_schwarz_bound(self):
        theta = SchurFunction.from_cmv(random_choice_sequence(2, 2, 3, seed=43))
        for lam in (0.1, 0.5j, -0.7 + 0.2j):
            assert op_norm(mobius_parameter(theta, lam)) <= abs(lam) + 1e-10


class TestRealizationFormula:

    def test_matches_oracle(self):
        rng = np.random.default_rng(51)
        for seed in range(3):
            seq = random_choice_sequence(1, 1, 3, seed=seed, kind=SequenceKind.TERMINATE_UNITARY)
            system = build_cmv(seq).system
            system = system.change_state_basis(haar_unitary(system.state_dim, rng))
            formula = schur_parameters_from_realization(system, seq.length + 1)
            oracle = schur_parameters(SchurFunction.from_system(system), seq.length + 1)
            assert formula.length == oracle.length
            for a, b in zip(formula.params, oracle.params):
                assert op_norm(a - b) < 1e-8

    def test_needs_conservative_system(self):
        system = DiscreteSystem(D=[[0.5]], C=[[0.1]], B=[[0.1]], A=[[0.2]])
        with pytest.raises(NotConservative):
            schur_parameters_from_realization(system, 2)


class TestSplitsAndTransforms:

    def test_pure_part(self):
        pure, unitary_const = pure_part(SchurFunction.from_constant(np.diag([1.0, 0.5])))
        assert_allclose(np.abs(unitary_const), [[1.0]])
        assert_allclose(np.abs(pure.value(0.0)), [[0.5]])

    def test_pure_part_of_taylor_data(self):
        theta = SchurFunction.from_taylor([np.diag([1.0, 0.5]), np.diag([0.0, 0.2])])
        pure, unitary_const = pure_part(theta)
        assert pure.representation is Representation.TAYLOR
        assert_allclose(unitary_const, [[1.0]], atol=1e-12)
        assert_allclose(np.abs([c[0, 0] for c in pure.coefficients]), [0.5, 0.2], atol=1e-12)

    def test_pure_part_of_realization(self, scalar_sequence):
        # Theta = diag(zeta, theta_s) with theta_s realized by a CMV system
        zeta = np.exp(0.3j)
        inner = build_cmv(scalar_sequence).system
        h = inner.state_dim
        system = DiscreteSystem(
            D=np.diag([zeta, inner.D[0, 0]]),
            C=np.vstack([np.zeros((1, h)), inner.C]),
            B=np.hstack([np.zeros((h, 1)), inner.B]),
            A=inner.A,
        )
        pure, unitary_const = pure_part(SchurFunction.from_system(system))
        assert pure.representation is Representation.REALIZATION
        assert_allclose(unitary_const, [[zeta]], atol=1e-12)
        for lam in (0.0, 0.4, -0.3 + 0.5j):
            assert_allclose(pure.value(lam), inner.transfer(lam), atol=1e-12)

    def test_pure_part_with_unitary_value_at_zero(self):
        gamma = haar_unitary(2, np.random.default_rng(71))
        pure, unitary_const = pure_part(SchurFunction.from_constant(gamma))
        assert (pure.output_dim, pure.input_dim) == (0, 0)
        assert unitary_const.shape == (2, 2)
        assert unitarity_residual(unitary_const) < 1e-12

    def test_coincidence_covariance(self, scalar_sequence):
        # v Theta u has parameters v Gamma_n u for unimodular v, u
        v, u = np.exp(1.1j), np.exp(-0.7j)
        system = build_cmv(scalar_sequence).system
        rotated = DiscreteSystem(D=v * system.D * u, C=v * system.C, B=system.B * u, A=system.A)
        params = schur_parameters(SchurFunction.from_system(rotated), 6)
        assert params.tail is Tail.TERMINATED
        assert params.length == scalar_sequence.length
        for gamma, found in zip(scalar_sequence.params, params.params):
            assert_allclose(found, v * gamma * u, atol=1e-8)

    def test_caratheodory_round_trip(self):
        theta = SchurFunction.from_cmv(random_choice_sequence(2, 2, 2, seed=61))
        F = schur_to_caratheodory(theta, count=10)
        assert F.is_normalized()
        back = cara_schur_transform(F)
        for a, b in zip(back.taylor_coefficients(10), theta.taylor_coefficients(10)):
            assert op_norm(a - b) < 1e-10

    def test_point_mass(self):
        zeta = np.exp(0.9j)
        F = CaratheodoryFunction.from_moments([[[zeta ** (-k)]] for k in range(6)])
        theta = cara_schur_transform(F)
        assert_allclose(theta.taylor_coefficients(1)[0], [[zeta]], atol=1e-14)
        assert_allclose(theta.taylor_coefficients(3)[2], [[0.0]], atol=1e-14)

    def test_transform_needs_normalization(self):
        with pytest.raises(NotNormalized):
            cara_schur_transform(CaratheodoryFunction.from_coefficients([[[2.0]], [[0.1]]]))

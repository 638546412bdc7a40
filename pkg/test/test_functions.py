"""
Tests for Schur and Caratheodory function representations.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cmvkit.choice_seq import ChoiceSequence, Tail, random_choice_sequence
from cmvkit.cmv import build_cmv
from cmvkit.discrete_system import DiscreteSystem
from cmvkit.errors import DepthExhausted, NotNormalized, OutsideDisk, ShapeMismatch
from cmvkit.functions import CaratheodoryFunction, Representation, SchurFunction
from cmvkit.linalg_core import adjoint, haar_unitary
from cmvkit.schur import schur_parameters


@pytest.fixture
def cmv_function():
    return SchurFunction.from_cmv(random_choice_sequence(2, 2, 3, seed=21))


class TestSchurFunction:

    def test_constant(self):
        theta = SchurFunction.from_constant([[0.5, 0.1]])
        assert (theta.input_dim, theta.output_dim) == (2, 1)
        assert_allclose(theta.value(0.7j), [[0.5, 0.1]])
        assert_allclose(theta.taylor_coefficients(3)[2], np.zeros((1, 2)))

    def test_realization_matches_taylor_sum(self, cmv_function):
        lam = 0.2 - 0.1j
        coefficients = cmv_function.taylor_coefficients(60)
        series = sum(c * lam ** k for k, c in enumerate(coefficients))
        assert_allclose(cmv_function.value(lam), series, atol=1e-12)

    def test_cmv_function_at_depth_is_the_cmv_transfer(self, cmv_function):
        truncated = SchurFunction.from_cmv(cmv_function.sequence, depth=1)
        system = build_cmv(cmv_function.sequence, 1).system
        assert_allclose(truncated.value(0.4), system.transfer(0.4), atol=1e-14)
        assert truncated.representation is Representation.CMV

    def test_zero_tail_function_is_exact(self):
        # parameters (0, 0.5, 0, 0, ...) give theta(l) = 0.5 l
        theta = SchurFunction.from_cmv(ChoiceSequence.from_parameters([0.0, 0.5, 0.0]))
        assert_allclose(theta.value(0.2), [[0.1]], atol=1e-14)
        assert_allclose(theta.value(-0.6j), [[-0.3j]], atol=1e-14)
        recovered = schur_parameters(theta, 4)
        assert recovered.tail is Tail.ZERO_TAIL
        assert_allclose([p[0, 0] for p in recovered.params], [0.0, 0.5, 0.0, 0.0], atol=1e-10)

    def test_zero_tail_round_trip(self, cmv_function):
        seq = cmv_function.sequence
        recovered = schur_parameters(cmv_function, seq.length + 2)
        assert recovered.tail is Tail.ZERO_TAIL
        for a, b in zip(seq.params, recovered.params):
            assert_allclose(a, b, atol=1e-8)
        for extra in recovered.params[seq.length:]:
            assert_allclose(extra, np.zeros_like(extra), atol=1e-8)

    def test_outside_disk(self, cmv_function):
        with pytest.raises(OutsideDisk):
            cmv_function.value(1.0)
        with pytest.raises(OutsideDisk):
            SchurFunction.from_taylor([[[0.1]]]).value(-1.5)

    def test_inexact_taylor_is_finite(self):
        theta = SchurFunction.from_taylor([[[0.5]], [[0.2]]], exact=False)
        assert theta.available_depth == 2
        with pytest.raises(DepthExhausted):
            theta.taylor_coefficients(3)
        assert theta.tail_bound(0.5) == pytest.approx(0.25 / 0.5)

    def test_exact_taylor_pads_with_zeros(self):
        theta = SchurFunction.from_taylor([[[0.5]], [[0.2]]])
        assert theta.available_depth is None
        assert_allclose(theta.taylor_coefficients(4)[3], [[0.0]])
        assert theta.tail_bound(0.5) == 0.0
        assert_allclose(theta.value(0.5), [[0.6]])

    def test_taylor_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            SchurFunction.from_taylor([[[0.5]], [[0.1, 0.2]]])
        with pytest.raises(DepthExhausted):
            SchurFunction.from_taylor([])

    def test_taylor_has_no_realization(self):
        with pytest.raises(ShapeMismatch):
            SchurFunction.from_taylor([[[0.5]]]).to_realization()

    def test_reflect(self, cmv_function):
        lam = 0.3 + 0.2j
        reflected = cmv_function.reflect()
        assert_allclose(reflected.value(lam), adjoint(cmv_function.value(np.conj(lam))), atol=1e-13)

    def test_system_taylor_coefficients(self):
        system = DiscreteSystem(D=[[0.1]], C=[[0.2]], B=[[0.3]], A=[[0.5]])
        coefficients = SchurFunction.from_system(system).taylor_coefficients(4)
        assert_allclose([c[0, 0] for c in coefficients], [0.1, 0.06, 0.03, 0.015])


class TestCaratheodoryFunction:

    def test_unitary_value_matches_series(self):
        rng = np.random.default_rng(4)
        u = haar_unitary(4, rng)
        F = CaratheodoryFunction.from_unitary(u, np.eye(4, 2))
        lam = 0.25j
        series = sum(c * lam ** k for k, c in enumerate(F.taylor_coefficients(80)))
        assert_allclose(F.value(lam), series, atol=1e-12)
        assert F.is_normalized()

    def test_real_part_is_positive(self):
        u = haar_unitary(3, np.random.default_rng(8))
        F = CaratheodoryFunction.from_unitary(u, np.eye(3, 1))
        for lam in (0.5, -0.3j, 0.6 + 0.1j):
            assert F.value(lam)[0, 0].real >= 0

    def test_moments(self):
        # point mass at zeta: S_k = zeta^(-k)
        zeta = np.exp(0.4j)
        F = CaratheodoryFunction.from_moments([[[zeta ** (-k)]] for k in range(4)])
        assert_allclose(F.taylor_coefficients(4)[2], [[2 * zeta ** (-2)]])
        assert F.available_depth == 4

    def test_not_normalized(self):
        F = CaratheodoryFunction.from_coefficients([[[2.0]]])
        assert not F.is_normalized()
        with pytest.raises(NotNormalized):
            F.require_normalized()

    def test_basis_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            CaratheodoryFunction.from_unitary(np.eye(3), np.eye(2, 1))

"""
Tests for unitary and Naimark dilations and the CMV models of operators.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cmvkit.choice_seq import ChoiceSequence, Tail
from cmvkit.cmv import build_cmv
from cmvkit.discrete_system import DiscreteSystem
from cmvkit.dilations import (
    MatrixMeasure,
    caratheodory_match,
    characteristic_coincidence,
    contraction_model,
    cyclic_model,
    dilation_check,
    minimality_rank,
    moments,
    naimark_dilation,
    uniqueness_bound,
    unitary_dilation,
    verblunsky_from_measure,
)
from cmvkit.errors import (
    BadDims,
    NonSquare,
    NotAContraction,
    NotCyclic,
    NotNormalized,
    NotSimple,
    NotUnitary,
    PowerBudgetExceeded,
)
from cmvkit.linalg_core import haar_unitary, op_norm, random_contraction, unitarity_residual
from cmvkit.systems import structural_tests


class TestUnitaryDilation:

    @pytest.fixture
    def contraction(self):
        return random_contraction(3, 3, np.random.default_rng(17))

    def test_powers_and_minimality(self, contraction):
        cmv = unitary_dilation(contraction, 5)
        assert unitarity_residual(cmv.matrix) < 1e-10
        report = dilation_check(contraction, cmv, 5)
        assert report.passed, report.to_dict()
        assert report.minimal
        assert report.truncation_bound == pytest.approx(uniqueness_bound(0.3, 10))

    def test_power_budget(self, contraction):
        cmv = unitary_dilation(contraction, 2)
        with pytest.raises(PowerBudgetExceeded):
            dilation_check(contraction, cmv, 3)

    def test_unitary_input_is_its_own_dilation(self):
        u = haar_unitary(2, np.random.default_rng(3))
        cmv = unitary_dilation(u, 1)
        assert cmv.size == 2
        report = dilation_check(u, cmv, 10)
        assert report.passed
        assert report.truncation_bound is None

    def test_errors(self):
        with pytest.raises(NonSquare):
            unitary_dilation(np.zeros((2, 3)), 2)
        with pytest.raises(NotAContraction):
            unitary_dilation(np.diag([1.5, 0.1]), 2)
        with pytest.raises(BadDims):
            unitary_dilation(np.diag([0.5, 0.1]), 0)

    def test_minimality_rank_of_identity(self):
        assert minimality_rank(np.eye(3), np.eye(3, 1), 5) == 1

    def test_simple_system_orbit_fills_space(self):
        seq = ChoiceSequence.from_parameters([0.3, -0.2j, 0.5, np.exp(0.4j)], Tail.TERMINATED)
        system = build_cmv(seq).system
        size = system.input_dim + system.state_dim
        assert structural_tests(system).simple
        assert minimality_rank(system.block(), np.eye(size, system.input_dim), size) == size

    def test_unitary_part_lies_outside_orbit(self):
        rho = np.sqrt(0.75)
        system = DiscreteSystem(D=[[0.5]], C=[[rho, 0.0]], B=[[rho], [0.0]], A=np.diag([-0.5, np.exp(0.7j)]))
        assert not structural_tests(system).simple
        assert minimality_rank(system.block(), np.eye(3, 1), 3) == 2


class TestNaimark:

    def test_point_mass(self):
        zeta = np.exp(0.8j)
        measure = MatrixMeasure.from_atoms([(zeta, [[1.0]])])
        cmv, report = naimark_dilation(measure)
        assert cmv.size == 1
        assert_allclose(cmv.matrix, [[np.conj(zeta)]], atol=1e-14)
        assert report.passed

    def test_several_atoms(self):
        angles = [0.3, 1.9, 3.4, 5.0]
        weights = [0.1, 0.4, 0.3, 0.2]
        measure = MatrixMeasure.from_atoms([(np.exp(1j * a), [[w]]) for a, w in zip(angles, weights)])
        cmv, report = naimark_dilation(measure, powers=10)
        assert cmv.size == 4
        assert report.max_power_checked == 10
        assert report.max_residual < 1e-9
        assert report.minimal

    def test_matrix_measure(self):
        w1 = np.array([[0.6, 0.2], [0.2, 0.3]])
        measure = MatrixMeasure.from_atoms([(1j, w1), (-1.0, np.eye(2) - w1)])
        assert measure.support_rank == 4
        cmv, report = naimark_dilation(measure, powers=8)
        assert cmv.size == 4
        assert report.max_residual < 1e-9

    def test_depth_limited_powers_are_clamped(self):
        measure = MatrixMeasure.from_atoms([(np.exp(1j * a), [[0.25]]) for a in (0.1, 1.7, 3.3, 4.9)])
        cmv, report = naimark_dilation(measure, depth=1, powers=6)
        assert report.max_power_checked <= 6
        assert report.passed

    def test_moments(self):
        measure = MatrixMeasure.from_atoms([(1j, [[0.5]]), (-1j, [[0.5]])])
        assert_allclose(moments(measure, 1), [[0.0]], atol=1e-15)
        assert_allclose(moments(measure, 2), [[-1.0]], atol=1e-15)

    def test_invalid_measure(self):
        measure = MatrixMeasure.from_atoms([(1.0, [[0.5]])])
        assert not measure.validate().passed
        with pytest.raises(NotNormalized):
            verblunsky_from_measure(measure, 2)
        off_circle = MatrixMeasure.from_atoms([(0.5, [[1.0]])])
        assert not off_circle.validate().passed


class TestCyclicModel:

    def test_diagonal_unitary(self):
        u = np.diag(np.exp(1j * np.array([0.2, 2.0, 4.0])))
        basis = np.ones((3, 1)) / np.sqrt(3)
        seq, cmv = cyclic_model(u, basis)
        assert seq.tail is Tail.TERMINATED
        assert cmv.size == 3
        assert caratheodory_match(u, basis, cmv, [0.0, 0.4, -0.3j]) < 1e-9

    def test_scalar_unitary(self):
        theta = 1.3
        seq, _ = cyclic_model([[np.exp(1j * theta)]], [[1.0]])
        assert_allclose(seq.params[0], [[np.exp(1j * theta)]], atol=1e-14)

    def test_not_cyclic(self):
        with pytest.raises(NotCyclic):
            cyclic_model(np.diag([1.0, 1.0, -1.0]), np.eye(3, 1))

    def test_not_unitary(self):
        with pytest.raises(NotUnitary):
            cyclic_model(0.5 * np.eye(2), np.eye(2, 1))
        with pytest.raises(NonSquare):
            cyclic_model(np.zeros((2, 3)), np.eye(2, 1))


class TestContractionModel:

    def test_shift_model(self):
        shift = np.eye(3, k=-1, dtype=complex)
        params, model = contraction_model(shift)
        assert params.tail is Tail.TERMINATED
        assert model.matrix.shape == (3, 3)
        assert_allclose(np.linalg.svd(model.matrix, compute_uv=False), [1.0, 1.0, 0.0], atol=1e-10)
        assert op_norm(np.linalg.matrix_power(model.matrix, 3)) < 1e-10

    def test_unitary_part_rejected(self):
        with pytest.raises(NotSimple):
            contraction_model(np.diag([0.5, 1.0]))

    def test_characteristic_coincidence(self):
        seq = ChoiceSequence.from_parameters([0.4, -0.3 + 0.2j, 0.6j, np.exp(2.0j)], Tail.TERMINATED)
        assert characteristic_coincidence(seq) < 1e-8


def test_uniqueness_bound_values():
    assert uniqueness_bound(0.3, 1) == pytest.approx(0.6 * (0.3 / 0.49) ** 2)
    assert uniqueness_bound(0.3, 3) < uniqueness_bound(0.3, 2)

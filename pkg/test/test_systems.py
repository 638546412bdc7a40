"""
Tests for system structure, characteristic functions, the defect-kernel
lattice and the transforms realizing Schur iterates.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cmvkit.choice_seq import ChoiceSequence, Tail, adjoint_sequence
from cmvkit.cmv import build_cmv, truncate
from cmvkit.discrete_system import DiscreteSystem, SystemTag, classify_system, energy_residual, simulate
from cmvkit.errors import NonSquare, NotAContraction, NotSimple, OutsideDisk, ShapeMismatch
from cmvkit.functions import SchurFunction
from cmvkit.linalg_core import adjoint, defect_subspace, unitarity_residual
from cmvkit.schur import schur_parameters
from cmvkit.systems import (
    OmegaDirection,
    characteristic_function,
    defect_kernel_lattice,
    is_completely_nonunitary,
    lattice_coherence,
    omega_transform,
    realization_iterate,
    shift_relation,
    structural_tests,
)


def jordan_shift(size):
    return np.eye(size, k=-1, dtype=complex)


def split_system(theta=0.7):
    """Conservative system with a disconnected unitary state."""
    rho = np.sqrt(0.75)
    return DiscreteSystem(
        D=[[0.5]],
        C=[[rho, 0.0]],
        B=[[rho], [0.0]],
        A=np.diag([-0.5, np.exp(1j * theta)]),
    )


@pytest.fixture
def cmv_system():
    seq = ChoiceSequence.from_parameters([0.3, -0.2j, 0.5, 0.1 + 0.2j, np.exp(0.4j)], Tail.TERMINATED)
    return seq, build_cmv(seq).system


class TestDiscreteSystem:

    def test_shapes_checked(self):
        with pytest.raises(ShapeMismatch):
            DiscreteSystem(D=[[0.5]], C=[[0.1, 0.2]], B=[[0.1]], A=[[0.2]])

    def test_transfer_outside_disk(self, cmv_system):
        _, system = cmv_system
        with pytest.raises(OutsideDisk):
            system.transfer(1.2)

    def test_classification(self, cmv_system):
        _, system = cmv_system
        assert classify_system(system) is SystemTag.CONSERVATIVE
        passive = DiscreteSystem(D=[[0.5]], C=[[0.1]], B=[[0.1]], A=[[0.2]])
        assert classify_system(passive) is SystemTag.PASSIVE
        assert classify_system(DiscreteSystem(D=[[2.0]], C=[[0.0]], B=[[0.0]], A=[[0.0]])) is SystemTag.NONE

    def test_energy_balance(self, cmv_system):
        _, system = cmv_system
        rng = np.random.default_rng(2)
        inputs = rng.standard_normal((8, 1)) + 1j * rng.standard_normal((8, 1))
        h0 = rng.standard_normal(system.state_dim)
        assert energy_residual(system, inputs, h0) < 1e-10

    def test_simulate_impulse_response(self, cmv_system):
        _, system = cmv_system
        inputs = [[1.0]] + [[0.0]] * 5
        outputs, states = simulate(system, inputs)
        expected = system.taylor_coefficients(6)
        assert_allclose(outputs[:, 0], [c[0, 0] for c in expected], atol=1e-14)
        assert states.shape == (7, system.state_dim)

    def test_simulate_rejects_bad_input(self, cmv_system):
        _, system = cmv_system
        with pytest.raises(ShapeMismatch):
            simulate(system, [[1.0, 2.0]])

    def test_dual_reflects_transfer(self, cmv_system):
        _, system = cmv_system
        lam = 0.3 - 0.4j
        assert_allclose(system.dual().transfer(lam), system.transfer(np.conj(lam)).conj().T, atol=1e-13)


class TestStructure:

    def test_cmv_system_is_simple(self, cmv_system):
        _, system = cmv_system
        assert structural_tests(system).simple

    def test_disconnected_unitary_state(self):
        report = structural_tests(split_system())
        assert not report.simple
        assert report.controllable_rank == 1
        assert report.observable_rank == 1

    def test_cnu(self):
        cnu, unitary_part = is_completely_nonunitary(jordan_shift(4))
        assert cnu and unitary_part.dim == 0
        cnu, unitary_part = is_completely_nonunitary(np.diag([0.5, 1.0]))
        assert not cnu
        assert unitary_part.dim == 1
        assert_allclose(np.abs(unitary_part.basis[:, 0]), [0, 1], atol=1e-12)

    def test_cnu_errors(self):
        with pytest.raises(NonSquare):
            is_completely_nonunitary(np.zeros((2, 3)))
        with pytest.raises(NotAContraction):
            is_completely_nonunitary(np.diag([2.0, 0.1]))


class TestCharacteristicFunction:

    def test_scalar(self):
        phi = characteristic_function([[0.5]])
        for lam in (0.0, 0.4, -0.2j):
            expected = -0.5 + lam * 0.75 / (1 - 0.5 * lam)
            assert_allclose(phi.value(lam), [[expected]], atol=1e-14)

    def test_unitary_has_trivial_function(self):
        phi = characteristic_function(np.diag([1.0, -1.0]))
        assert (phi.input_dim, phi.output_dim) == (0, 0)

    def test_shift(self):
        # the nilpotent shift of size N has Phi(lambda) = lambda^N up to unimodular constants
        phi = characteristic_function(jordan_shift(3))
        value = phi.value(0.5)
        assert value.shape == (1, 1)
        assert abs(value[0, 0]) == pytest.approx(0.125, abs=1e-12)


class TestLattice:

    def test_shift_dimensions(self):
        shift = jordan_shift(5)
        assert [defect_kernel_lattice(shift, n, 0).dim for n in range(6)] == [5, 4, 3, 2, 1, 0]
        assert defect_kernel_lattice(shift, 1, 2).dim == 2

    def test_coherence(self):
        shift = jordan_shift(5)
        for n, m, k, l in [(1, 0, 1, 0), (1, 1, 1, 0), (0, 2, 1, 1), (2, 1, 0, 1)]:
            assert lattice_coherence(shift, n, m, k, l) < 1e-10

    def test_shift_relation(self):
        shift = jordan_shift(5)
        for n, m in [(1, 0), (2, 1), (3, 0)]:
            assert shift_relation(shift, n, m) < 1e-10

    def test_indices_non_negative(self):
        with pytest.raises(ValueError):
            defect_kernel_lattice(jordan_shift(3), -1, 0)

    def test_compressions_of_shift_drop_leading_parameters(self):
        # the characteristic function of S_5 has parameters (0, 0, 0, 0, 0, unimodular)
        shift = jordan_shift(5)
        for n, m in [(2, 0), (1, 1), (0, 2), (3, 0)]:
            node = defect_kernel_lattice(shift, n, m)
            params = schur_parameters(characteristic_function(node.compression), 8)
            assert params.tail is Tail.TERMINATED
            assert_allclose(np.abs([p[0, 0] for p in params.params]), [0.0] * (5 - n - m) + [1.0], atol=1e-8)

    def test_compressions_realize_schur_iterates(self):
        seq = ChoiceSequence.from_parameters([0.3, -0.2j, 0.5, np.exp(0.4j)], Tail.TERMINATED)
        model = truncate(build_cmv(adjoint_sequence(seq))).matrix
        expected = np.abs([p[0, 0] for p in seq.params])
        for n in (1, 2):
            for m in range(n + 1):
                node = defect_kernel_lattice(model, n - m, m)
                params = schur_parameters(characteristic_function(node.compression), 6)
                assert params.tail is Tail.TERMINATED
                assert_allclose(np.abs([p[0, 0] for p in params.params]), expected[n:], atol=1e-8)


class TestOmegaTransforms:

    @pytest.mark.parametrize("direction", list(OmegaDirection))
    def test_realizes_first_iterate(self, cmv_system, direction):
        seq, system = cmv_system
        shifted = SchurFunction.from_cmv(ChoiceSequence.from_parameters(seq.params[1:], Tail.TERMINATED))
        iterate = omega_transform(system, direction)
        assert classify_system(iterate) is SystemTag.CONSERVATIVE
        for lam in (0.0, 0.3, -0.2 + 0.5j):
            assert_allclose(iterate.transfer(lam), shifted.value(lam), atol=1e-10)

    @pytest.mark.parametrize("direction", list(OmegaDirection))
    def test_iterate_block_is_unitary(self, cmv_system, direction):
        # three directions of A are isometric up to rounding
        _, system = cmv_system
        assert defect_subspace(adjoint(system.A)).dim == 1
        iterate = omega_transform(system, direction)
        assert unitarity_residual(iterate.block()) < 1e-10

    def test_iterating_twice(self, cmv_system):
        seq, system = cmv_system
        shifted = SchurFunction.from_cmv(ChoiceSequence.from_parameters(seq.params[2:], Tail.TERMINATED))
        iterate = realization_iterate(system, 2)
        assert_allclose(iterate.transfer(0.4j), shifted.value(0.4j), atol=1e-10)

    def test_needs_simple_system(self):
        with pytest.raises(NotSimple):
            omega_transform(split_system())

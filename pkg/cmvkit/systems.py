"""
Structure of conservative systems: controllability/observability tests,
completely non-unitary parts, characteristic functions, the defect-kernel
lattice of a contraction and the transforms that realize Schur iterates.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from config import Config
from .discrete_system import DiscreteSystem, SystemTag, classify_system
from .errors import NonSquare, NotAContraction, NotConservative, NotSimple
from .functions import SchurFunction
from .linalg_core import (
    Subspace,
    adjoint,
    as_cmatrix,
    defect,
    defect_frame,
    defect_kernel,
    defect_subspace,
    joint_defect_kernel,
    numerical_rank,
    op_norm,
    orthogonal_complement,
    restricted_inverse,
    same_subspace,
    span_basis,
)

logger = logging.getLogger(__name__)


@dataclass
class StructureReport:
    controllable: bool
    observable: bool
    simple: bool
    minimal: bool
    controllable_rank: int
    observable_rank: int
    simple_rank: int
    state_dim: int

    def to_dict(self):
        return {
            "controllable": self.controllable,
            "observable": self.observable,
            "simple": self.simple,
            "minimal": self.minimal,
            "controllable_rank": self.controllable_rank,
            "observable_rank": self.observable_rank,
            "simple_rank": self.simple_rank,
            "state_dim": self.state_dim,
        }


def _krylov(operator: np.ndarray, start: np.ndarray, steps: int) -> np.ndarray:
    """[S, T S, ..., T^(steps-1) S]"""
    blocks = []
    current = start
    for _ in range(steps):
        blocks.append(current)
        current = operator @ current
    if not blocks:
        return np.zeros((operator.shape[0], 0), dtype=complex)
    return np.hstack(blocks)


def structural_tests(system: DiscreteSystem, tol: Optional[float] = None) -> StructureReport:
    """
    Krylov-rank tests up to A^(h-1).

    Controllable: span A^k B is the state space. Observable: span A*^k C*
    is. Simple: the two spans together are. Minimal: both.
    """
    tol = Config.RANK_TOL if tol is None else tol
    h = system.state_dim
    reachable = _krylov(system.A, system.B, h)
    observed = _krylov(adjoint(system.A), adjoint(system.C), h)
    c_rank = numerical_rank(reachable, tol) if h else 0
    o_rank = numerical_rank(observed, tol) if h else 0
    s_rank = numerical_rank(np.hstack([reachable, observed]), tol) if h else 0
    return StructureReport(
        controllable=c_rank == h,
        observable=o_rank == h,
        simple=s_rank == h,
        minimal=c_rank == h and o_rank == h,
        controllable_rank=c_rank,
        observable_rank=o_rank,
        simple_rank=s_rank,
        state_dim=h,
    )


def is_completely_nonunitary(matrix, tol: Optional[float] = None) -> Tuple[bool, Subspace]:
    """
    Test whether a contraction has no unitary part.

    The cnu part is spanned by A*^n D_A and A^m D_{A*} for n, m < h; its
    orthogonal complement, returned as the second element, is the
    largest subspace reducing A to a unitary.

    Raises:
        NotAContraction: if ||A|| > 1 + Config.CONTRACTION_TOL
        NonSquare: if A is not square
    """
    tol = Config.RANK_TOL if tol is None else tol
    matrix = as_cmatrix(matrix)
    h = matrix.shape[0]
    if matrix.shape != (h, h):
        raise NonSquare(f"Expected a square operator, got {matrix.shape}")
    if op_norm(matrix) > 1.0 + Config.CONTRACTION_TOL:
        raise NotAContraction(f"||A|| = {op_norm(matrix):.12g} exceeds 1")

    spanning = np.hstack([
        _krylov(adjoint(matrix), defect_subspace(matrix, tol).basis, h),
        _krylov(matrix, defect_subspace(adjoint(matrix), tol).basis, h),
    ])
    cnu_basis = span_basis(spanning, tol)
    unitary_part = Subspace(h, orthogonal_complement(cnu_basis))
    return unitary_part.dim == 0, unitary_part


def characteristic_function(matrix, tol: Optional[float] = None) -> SchurFunction:
    """
    Characteristic function of a contraction T, from the defect space of T
    to that of T*, as the transfer function of the conservative system
    (-Q* T P, Q* D_{T*}, D_T P, T*).
    """
    tol = Config.RANK_TOL if tol is None else tol
    matrix = as_cmatrix(matrix)
    if matrix.shape[0] != matrix.shape[1]:
        raise NonSquare(f"Expected a square operator, got {matrix.shape}")
    dom = defect_subspace(matrix, tol).basis
    codom = defect_subspace(adjoint(matrix), tol).basis
    system = DiscreteSystem(
        D=-(adjoint(codom) @ matrix @ dom),
        C=adjoint(codom) @ defect(adjoint(matrix)),
        B=defect(matrix) @ dom,
        A=adjoint(matrix),
    )
    return SchurFunction.from_system(system)


@dataclass(frozen=True, eq=False)
class LatticeNode:
    """H_{n,m} = ker D_{A^n} meet ker D_{A*^m} with the compression of A to it."""
    n: int
    m: int
    subspace: Subspace
    compression: np.ndarray

    @property
    def dim(self) -> int:
        return self.subspace.dim


def defect_kernel_lattice(matrix, n: int, m: int, tol: Optional[float] = None) -> LatticeNode:
    matrix = as_cmatrix(matrix)
    h = matrix.shape[0]
    if matrix.shape != (h, h):
        raise NonSquare(f"Expected a square operator, got {matrix.shape}")
    if n < 0 or m < 0:
        raise ValueError(f"Lattice indices must be non-negative, got ({n}, {m})")
    subspace = joint_defect_kernel(
        [np.linalg.matrix_power(matrix, n), np.linalg.matrix_power(adjoint(matrix), m)], h, tol
    )
    compression = adjoint(subspace.basis) @ matrix @ subspace.basis
    return LatticeNode(n=n, m=m, subspace=subspace, compression=compression)


def lattice_coherence(matrix, n: int, m: int, k: int, l: int, tol: Optional[float] = None) -> float:
    """Distance between (A_{n,m})_{k,l} and A_{n+k,m+l} up to the identifying unitary."""
    outer = defect_kernel_lattice(matrix, n, m, tol)
    inner = defect_kernel_lattice(outer.compression, k, l, tol)
    target = defect_kernel_lattice(matrix, n + k, m + l, tol)
    embedded = outer.subspace.basis @ inner.subspace.basis
    if embedded.shape[1] != target.dim:
        return float("inf")
    overlap = adjoint(target.subspace.basis) @ embedded
    return max(
        same_subspace(embedded, target.subspace.basis),
        op_norm(overlap @ inner.compression @ adjoint(overlap) - target.compression),
    )


def shift_relation(matrix, n: int, m: int, tol: Optional[float] = None) -> float:
    """Distance between A H_{n,m} and H_{n-1,m+1} (n >= 1)."""
    if n < 1:
        raise ValueError("shift_relation needs n >= 1")
    matrix = as_cmatrix(matrix)
    source = defect_kernel_lattice(matrix, n, m, tol)
    target = defect_kernel_lattice(matrix, n - 1, m + 1, tol)
    image = span_basis(matrix @ source.subspace.basis, tol) if source.dim else source.subspace.basis
    return same_subspace(image, target.subspace.basis)


class OmegaDirection(str, Enum):
    ZERO_ONE = "01"
    ONE_ZERO = "10"


def omega_transform(system: DiscreteSystem, direction=OmegaDirection.ZERO_ONE, tol: Optional[float] = None) -> DiscreteSystem:
    """
    Simple conservative realization of the first Schur iterate Theta_1.

    ZERO_ONE uses the state space ker D_{A*}, ONE_ZERO uses ker D_A.

    Raises:
        NotConservative: if the system is not conservative
        NotSimple: if the system has a unitary part
    """
    tol = Config.TERMINATION_TOL if tol is None else tol
    direction = OmegaDirection(direction)
    if classify_system(system) is not SystemTag.CONSERVATIVE:
        raise NotConservative("Omega transforms need a conservative system")
    if not structural_tests(system).simple:
        raise NotSimple("Omega transforms need a simple system")

    A, B, C = system.A, system.B, system.C
    frame = defect_frame(system.D, tol)
    gamma_1 = frame.left @ C @ B @ frame.right
    kernel = defect_kernel(A).basis
    co_kernel = defect_kernel(adjoint(A)).basis
    co_range = defect_subspace(adjoint(A)).basis
    co_defect_inverse = co_range @ restricted_inverse(defect(adjoint(A)), co_range)

    if direction is OmegaDirection.ZERO_ONE:
        result = DiscreteSystem(
            D=gamma_1,
            C=frame.left @ C @ co_kernel,
            B=adjoint(co_kernel) @ A @ kernel @ adjoint(kernel) @ co_defect_inverse @ B @ frame.right,
            A=adjoint(co_kernel) @ A @ co_kernel,
        )
    else:
        result = DiscreteSystem(
            D=gamma_1,
            C=frame.left @ C @ A @ kernel,
            B=adjoint(kernel) @ co_defect_inverse @ B @ frame.right,
            A=adjoint(kernel) @ A @ kernel,
        )
    logger.debug(f"Omega {direction.value}: state dimension {system.state_dim} -> {result.state_dim}")
    return result


def realization_iterate(system: DiscreteSystem, n: int, tol: Optional[float] = None) -> DiscreteSystem:
    """Realization of Theta_n by alternating the 01 and 10 transforms."""
    current = system
    for step in range(n):
        direction = OmegaDirection.ZERO_ONE if step % 2 == 0 else OmegaDirection.ONE_ZERO
        current = omega_transform(current, direction, tol)
    return current

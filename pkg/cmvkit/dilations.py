"""
Unitary and Naimark dilations built from CMV matrices, the cyclic model of
a unitary operator and the CMV model of a completely non-unitary contraction.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from .choice_seq import ChoiceSequence, Tail, adjoint_sequence
from .cmv import BlockCMV, TruncatedCMV, build_cmv, truncate
from .discrete_system import DiscreteSystem
from .errors import (
    BadDims,
    NonSquare,
    NotAContraction,
    NotCyclic,
    NotNormalized,
    NotSimple,
    NotUnitary,
    PowerBudgetExceeded,
    ShapeMismatch,
)
from .functions import CaratheodoryFunction, SchurFunction
from .linalg_core import (
    ContractionTag,
    TERMINAL_TAGS,
    Subspace,
    adjoint,
    as_cmatrix,
    classify_contraction,
    numerical_rank,
    op_norm,
    orthogonal_complement,
    unitarity_residual,
)
from .reports import ValidationReport
from .schur import cara_schur_transform, schur_parameters
from .systems import characteristic_function, is_completely_nonunitary

logger = logging.getLogger(__name__)

# |lambda| at which depth-limited results quote the uniqueness bound
BOUND_RADIUS = 0.3


def uniqueness_bound(radius: float, n: int) -> float:
    """Bound on |Theta(lambda) - Theta'(lambda)| when Gamma_0..Gamma_n agree."""
    return 2 * radius * (radius / (1 - radius) ** 2) ** (n + 1)


@dataclass(frozen=True, eq=False)
class MatrixMeasure:
    """Finitely supported measure sum_j w_j delta_{zeta_j} with PSD weights."""
    dim: int
    atoms: Tuple[Tuple[complex, np.ndarray], ...]

    @classmethod
    def from_atoms(cls, atoms: Sequence[Tuple[complex, object]]) -> "MatrixMeasure":
        converted = tuple((complex(zeta), as_cmatrix(weight)) for zeta, weight in atoms)
        if not converted:
            raise ShapeMismatch("A measure needs at least one atom")
        dim = converted[0][1].shape[0]
        return cls(dim=dim, atoms=converted)

    def validate(self, tol: Optional[float] = None) -> ValidationReport:
        tol = Config.RANK_TOL if tol is None else tol
        report = ValidationReport()
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for index, (zeta, weight) in enumerate(self.atoms):
            if abs(abs(zeta) - 1.0) > tol:
                report.add_error(f"atom {index}: |zeta| = {abs(zeta):.12g} is not 1")
            if weight.shape != (self.dim, self.dim):
                report.add_error(f"atom {index}: weight has shape {weight.shape}")
                continue
            if op_norm(weight - adjoint(weight)) > tol:
                report.add_error(f"atom {index}: weight is not Hermitian")
            elif np.min(np.linalg.eigvalsh((weight + adjoint(weight)) / 2)) < -tol:
                report.add_error(f"atom {index}: weight is not positive semidefinite")
            total += weight
        report.record("normalization", op_norm(total - np.eye(self.dim)), tol)
        return report

    def require_valid(self, tol: Optional[float] = None) -> None:
        report = self.validate(tol)
        if not report.passed:
            raise NotNormalized("; ".join(report.errors))

    @property
    def support_rank(self) -> int:
        """Dimension of the minimal Naimark space: sum of the weight ranks."""
        return sum(numerical_rank(weight) for _, weight in self.atoms)


def moments(measure: MatrixMeasure, n: int) -> np.ndarray:
    """S_n = sum_j zeta_j^(-n) w_j"""
    total = np.zeros((measure.dim, measure.dim), dtype=complex)
    for zeta, weight in measure.atoms:
        total += zeta ** (-n) * weight
    return total


@dataclass
class DilationReport:
    max_power_checked: int
    residuals: Dict[int, float]
    minimality_rank: int
    space_dim: int
    threshold: float
    truncation_bound: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def minimal(self) -> bool:
        return self.minimality_rank == self.space_dim

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.threshold

    def to_dict(self):
        return {
            "passed": self.passed,
            "max_power_checked": self.max_power_checked,
            "max_residual": self.max_residual,
            "residuals": {str(k): v for k, v in sorted(self.residuals.items())},
            "minimality_rank": self.minimality_rank,
            "space_dim": self.space_dim,
            "minimal": self.minimal,
            "threshold": self.threshold,
            "truncation_bound": self.truncation_bound,
            "notes": list(self.notes),
        }


def minimality_rank(unitary: np.ndarray, basis: np.ndarray, n_span: int, tol: Optional[float] = None) -> int:
    """rank of span{U^n M : |n| <= n_span}"""
    forward = basis
    backward = basis
    blocks = [basis]
    inverse = adjoint(unitary)
    for _ in range(n_span):
        forward = unitary @ forward
        backward = inverse @ backward
        blocks.extend([forward, backward])
    return numerical_rank(np.hstack(blocks), tol)


def _power_budget(cmv: BlockCMV) -> Optional[int]:
    """Largest power a finite CMV certifies; None when every power is exact."""
    if cmv.seq.tail is Tail.TERMINATED and not cmv.closed:
        return None
    return cmv.depth


def unitary_dilation(matrix, depth: int) -> BlockCMV:
    """
    CMV unitary dilation of a square contraction T from the sequence (T, 0, 0, ...).

    Raises:
        NonSquare: if T is not square
        NotAContraction: if ||T|| > 1
    """
    matrix = as_cmatrix(matrix)
    if matrix.shape[0] != matrix.shape[1]:
        raise NonSquare(f"Unitary dilations need a square contraction, got {matrix.shape}")
    if depth < 1:
        raise BadDims(f"Dilation depth must be at least 1, got {depth}")
    tag = classify_contraction(matrix, Config.TERMINATION_TOL)
    if tag is ContractionTag.NOT_CONTRACTION:
        raise NotAContraction(f"||T|| = {op_norm(matrix):.12g} exceeds 1")
    if tag in TERMINAL_TAGS:
        seq = ChoiceSequence.from_parameters([matrix], Tail.TERMINATED, tol=Config.TERMINATION_TOL)
    else:
        seq = ChoiceSequence.from_parameters([matrix], Tail.ZERO_TAIL)
    return build_cmv(seq, depth)


def dilation_check(matrix, cmv: BlockCMV, n_max: int, tol: Optional[float] = None) -> DilationReport:
    """
    Residuals |T^n - P_H U^n restricted to H| for 1 <= n <= n_max, plus the
    rank of span{U^n H}.

    Raises:
        PowerBudgetExceeded: if n_max exceeds the powers the CMV certifies
    """
    threshold = Config.RESIDUAL_TOL if tol is None else tol
    matrix = as_cmatrix(matrix)
    budget = _power_budget(cmv)
    if budget is not None and n_max > budget:
        raise PowerBudgetExceeded(f"Powers up to {cmv.depth} are certified at depth {cmv.depth}, {n_max} requested")

    h = matrix.shape[0]
    residuals = {}
    target = np.eye(h, dtype=complex)
    power = np.eye(cmv.size, dtype=complex)
    for n in range(1, n_max + 1):
        target = target @ matrix
        power = power @ cmv.matrix
        residuals[n] = op_norm(target - power[:h, :h])

    basis = np.eye(cmv.size, h, dtype=complex)
    rank = minimality_rank(cmv.matrix, basis, cmv.size)
    bound = uniqueness_bound(BOUND_RADIUS, 2 * cmv.depth) if budget is not None else None
    return DilationReport(
        max_power_checked=n_max,
        residuals=residuals,
        minimality_rank=rank,
        space_dim=cmv.size,
        threshold=threshold,
        truncation_bound=bound,
    )


def verblunsky_from_measure(measure: MatrixMeasure, N: int, tol: Optional[float] = None) -> ChoiceSequence:
    """Parameters of E = cara_schur_transform(F_mu).reflect() for the moment function F_mu."""
    measure.require_valid()
    count = 2 * N + 7
    F = CaratheodoryFunction.from_moments([moments(measure, k) for k in range(count)])
    E = cara_schur_transform(F).reflect()
    return schur_parameters(E, N, tol=tol)


def naimark_dilation(
    measure: MatrixMeasure, depth: Optional[int] = None, powers: Optional[int] = None
) -> Tuple[BlockCMV, DilationReport]:
    """
    CMV unitary U with S_n = P_M U^n on M, checked for |n| <= powers.

    Finitely supported measures give terminated sequences and exact
    dilations; otherwise the result is certified up to the depth.
    """
    N = measure.support_rank + 1 if depth is None else 2 * depth + 1
    seq = verblunsky_from_measure(measure, N)
    cmv = build_cmv(seq, depth)
    budget = _power_budget(cmv)

    n_max = powers if powers is not None else (budget if budget is not None else max(10, cmv.size))
    notes = []
    if budget is not None and n_max > budget:
        notes.append(f"powers clamped from {n_max} to {budget}")
        logger.warning(f"Naimark check clamped to |n| <= {budget}")
        n_max = budget

    m = measure.dim
    u = cmv.matrix
    inverse = adjoint(u)
    residuals = {0: op_norm(np.eye(m) - moments(measure, 0))}
    forward = np.eye(cmv.size, dtype=complex)
    backward = np.eye(cmv.size, dtype=complex)
    for n in range(1, n_max + 1):
        forward = forward @ u
        backward = backward @ inverse
        residuals[n] = op_norm(forward[:m, :m] - moments(measure, n))
        residuals[-n] = op_norm(backward[:m, :m] - moments(measure, -n))

    report = DilationReport(
        max_power_checked=n_max,
        residuals=residuals,
        minimality_rank=minimality_rank(u, np.eye(cmv.size, m, dtype=complex), cmv.size),
        space_dim=cmv.size,
        threshold=10 * Config.RESIDUAL_TOL,
        truncation_bound=uniqueness_bound(BOUND_RADIUS, 2 * cmv.depth) if budget is not None else None,
        notes=notes,
    )
    logger.info(f"Naimark dilation of size {cmv.size}, max residual {report.max_residual:.2e}")
    return cmv, report


def _subspace_basis(m_basis) -> np.ndarray:
    if isinstance(m_basis, Subspace):
        return Subspace.from_spanning(m_basis.basis).basis
    return Subspace.from_spanning(m_basis).basis


def _check_unitary(unitary: np.ndarray) -> None:
    if unitary.shape[0] != unitary.shape[1]:
        raise NonSquare(f"Expected a square operator, got {unitary.shape}")
    residual = unitarity_residual(unitary)
    if residual > Config.RANK_TOL:
        raise NotUnitary(f"Unitarity residual {residual:.2e} exceeds {Config.RANK_TOL:.1e}")


def cyclic_model(unitary, m_basis, depth: Optional[int] = None) -> Tuple[ChoiceSequence, BlockCMV]:
    """
    CMV model of a unitary U with a cyclic subspace M.

    U is split along M into the conservative system eta; its transfer
    function is the Schur function of F_M, whose parameters give the CMV.

    Raises:
        NotUnitary: if U is not unitary
        NotCyclic: if span{U^n M} is not the whole space
    """
    unitary = as_cmatrix(unitary)
    _check_unitary(unitary)
    basis = _subspace_basis(m_basis)
    size = unitary.shape[0]
    if basis.shape[0] != size:
        raise ShapeMismatch(f"Subspace lives in C^{basis.shape[0]}, operator acts on C^{size}")
    rank = minimality_rank(unitary, basis, size)
    if rank < size:
        raise NotCyclic(f"span of U^n M has dimension {rank} < {size}")

    rest = orthogonal_complement(basis)
    eta = DiscreteSystem(
        D=adjoint(basis) @ unitary @ basis,
        C=adjoint(basis) @ unitary @ rest,
        B=adjoint(rest) @ unitary @ basis,
        A=adjoint(rest) @ unitary @ rest,
    )
    N = size + 1 if depth is None else 2 * depth + 1
    seq = schur_parameters(SchurFunction.from_system(eta), N)
    cmv = build_cmv(seq, depth)
    return seq, cmv


def caratheodory_match(unitary, m_basis, cmv: BlockCMV, points: Sequence[complex]) -> float:
    """Largest |F_M(lambda) - F_model(lambda)| over the sample points."""
    basis = _subspace_basis(m_basis)
    original = CaratheodoryFunction.from_unitary(unitary, basis)
    k = basis.shape[1]
    model = CaratheodoryFunction.from_unitary(cmv.matrix, np.eye(cmv.size, k, dtype=complex))
    return max((op_norm(original.value(lam) - model.value(lam)) for lam in points), default=0.0)


def contraction_model(matrix, depth: Optional[int] = None) -> Tuple[ChoiceSequence, TruncatedCMV]:
    """
    T0 built from the adjoint parameters of the characteristic function of a
    cnu contraction T; T is unitarily equivalent to the result.

    Raises:
        NotSimple: if T has a unitary part
    """
    matrix = as_cmatrix(matrix)
    cnu, unitary_part = is_completely_nonunitary(matrix)
    if not cnu:
        raise NotSimple(f"Contraction has a unitary part of dimension {unitary_part.dim}")
    params = schur_parameters(characteristic_function(matrix), matrix.shape[0] + 1)
    model = truncate(build_cmv(adjoint_sequence(params), depth))
    return params, model


def characteristic_coincidence(seq: ChoiceSequence, depth: Optional[int] = None) -> float:
    """
    Largest gap between the singular values of Gamma_k and of the parameters
    of the characteristic function of T0 built from the adjoint sequence.
    """
    model = truncate(build_cmv(adjoint_sequence(seq), depth))
    recovered = schur_parameters(characteristic_function(model.matrix), seq.length + 1)
    worst = 0.0
    for k in range(max(seq.length, recovered.length)):
        expected = np.linalg.svd(seq.parameter(k), compute_uv=False) if seq.parameter(k).size else np.zeros(0)
        found = np.linalg.svd(recovered.parameter(k), compute_uv=False) if recovered.parameter(k).size else np.zeros(0)
        if expected.shape != found.shape:
            return float("inf")
        if expected.size:
            worst = max(worst, float(np.max(np.abs(expected - found))))
    return worst

"""
Dense complex-matrix kernel for cmvkit.

Defect operators D_T = (I - T*T)^(1/2), defect subspaces with canonical
orthonormal bases, pseudo-inverses, contraction classification and the
residual norms every other module reports.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Tuple

import numpy as np
import scipy.linalg as sla
from scipy.stats import unitary_group

from config import Config
from .errors import NotAContraction, NonSquare, ShapeMismatch, SolveFailure

logger = logging.getLogger(__name__)


class ContractionTag(str, Enum):
    """Classification of a matrix relative to the unit ball"""
    NOT_CONTRACTION = "not_contraction"
    GENERIC = "generic"
    ISOMETRIC = "isometric"
    CO_ISOMETRIC = "co_isometric"
    UNITARY = "unitary"
    PURE = "pure"


TERMINAL_TAGS = frozenset({ContractionTag.ISOMETRIC, ContractionTag.CO_ISOMETRIC, ContractionTag.UNITARY})


def as_cmatrix(value) -> np.ndarray:
    """
    Coerce a value to a finite complex 2-D array.

    Scalars become 1x1 matrices. Anything else that is not 2-D, or that
    carries NaN/Inf entries, raises ShapeMismatch.
    """
    matrix = np.array(value, dtype=complex)
    if matrix.ndim == 0:
        matrix = matrix.reshape(1, 1)
    if matrix.ndim != 2:
        raise ShapeMismatch(f"Expected a 2-D matrix, got an array with {matrix.ndim} dimensions")
    if not np.all(np.isfinite(matrix)):
        raise ShapeMismatch("Matrix has non-finite entries")
    return matrix


def adjoint(matrix: np.ndarray) -> np.ndarray:
    return matrix.conj().T


def op_norm(matrix: np.ndarray) -> float:
    """Operator (spectral) norm; 0 for empty matrices."""
    if matrix.size == 0:
        return 0.0
    return float(sla.svdvals(matrix)[0])


def _canonical_phase(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column becomes real positive
    if vectors.size == 0:
        return vectors
    rows = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[rows, np.arange(vectors.shape[1])]
    return vectors * (pivots.conj() / np.abs(pivots))


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of C^ambient_dim given by an orthonormal basis (columns)."""
    ambient_dim: int
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ adjoint(self.basis)

    def orthonormality_residual(self) -> float:
        return op_norm(adjoint(self.basis) @ self.basis - np.eye(self.dim))

    @classmethod
    def full(cls, dim: int) -> "Subspace":
        return cls(dim, np.eye(dim, dtype=complex))

    @classmethod
    def zero(cls, dim: int) -> "Subspace":
        return cls(dim, np.zeros((dim, 0), dtype=complex))

    @classmethod
    def from_spanning(cls, vectors, tol: Optional[float] = None) -> "Subspace":
        """Orthonormalize the column span of ``vectors``."""
        vectors = as_cmatrix(vectors)
        return cls(vectors.shape[0], span_basis(vectors, tol))


def _gram_spectrum(matrix: np.ndarray, slack: float) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of I - T*T after the contraction check."""
    norm = op_norm(matrix)
    if norm > 1.0 + slack:
        raise NotAContraction(f"Operator norm {norm:.12g} exceeds 1 + {slack:.1e}")
    cols = matrix.shape[1]
    if cols == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    gram = np.eye(cols) - adjoint(matrix) @ matrix
    gram = (gram + adjoint(gram)) / 2
    return sla.eigh(gram)


def defect(matrix, tol: Optional[float] = None) -> np.ndarray:
    """
    Defect operator D_T = (I - T*T)^(1/2).

    Args:
        matrix: contraction T
        tol: contraction slack; defaults to Config.CONTRACTION_TOL

    Returns:
        Hermitian positive semidefinite matrix acting on the domain of T
    """
    slack = Config.CONTRACTION_TOL if tol is None else tol
    matrix = as_cmatrix(matrix)
    values, vectors = _gram_spectrum(matrix, slack)
    if values.size:
        # I - T*T is formed from terms of norm <= 1, so eigenvalues at rounding level are zero
        floor = 10 * values.size * np.finfo(float).eps
        values = np.where(values > floor, values, 0.0)
    root = (vectors * np.sqrt(values)) @ adjoint(vectors)
    return (root + adjoint(root)) / 2


def defect_subspace(matrix, tol: Optional[float] = None, contraction_tol: Optional[float] = None) -> Subspace:
    """
    Orthonormal basis of the defect subspace ran D_T.

    Eigenvalues of I - T*T above ``tol`` span the subspace, so a zero
    dimensional result coincides with T being isometric at the same
    tolerance. Columns are ordered by decreasing defect and carry the
    canonical phase.
    """
    tol = Config.RANK_TOL if tol is None else tol
    slack = max(Config.CONTRACTION_TOL, tol) if contraction_tol is None else contraction_tol
    matrix = as_cmatrix(matrix)
    values, vectors = _gram_spectrum(matrix, slack)
    order = np.argsort(values)[::-1]
    keep = [index for index in order if values[index] > tol]
    return Subspace(matrix.shape[1], _canonical_phase(vectors[:, keep]))


def joint_defect_kernel(operators: Iterable[np.ndarray], dim: int, tol: Optional[float] = None) -> Subspace:
    """Intersection of ker D_T over the given operators (all acting on C^dim)."""
    tol = Config.RANK_TOL if tol is None else tol
    slack = max(Config.CONTRACTION_TOL, tol)
    total = np.zeros((dim, dim), dtype=complex)
    for operator in operators:
        operator = as_cmatrix(operator)
        norm = op_norm(operator)
        if norm > 1.0 + slack:
            raise NotAContraction(f"Operator norm {norm:.12g} exceeds 1 + {slack:.1e}")
        total += np.eye(dim) - adjoint(operator) @ operator
    if dim == 0:
        return Subspace.zero(0)
    values, vectors = sla.eigh((total + adjoint(total)) / 2)
    keep = [index for index in np.argsort(values) if values[index] <= tol]
    return Subspace(dim, _canonical_phase(vectors[:, keep]))


def defect_kernel(matrix, tol: Optional[float] = None) -> Subspace:
    """ker D_T: the subspace on which T acts isometrically."""
    matrix = as_cmatrix(matrix)
    return joint_defect_kernel([matrix], matrix.shape[1], tol)


def borderline_defects(matrix, tol: float, margin: float = 100.0) -> List[float]:
    """Eigenvalues of I - T*T and I - TT* lying within ``margin`` of ``tol``."""
    matrix = as_cmatrix(matrix)
    found = []
    for operator in (matrix, adjoint(matrix)):
        if operator.shape[1] == 0:
            continue
        gram = np.eye(operator.shape[1]) - adjoint(operator) @ operator
        values = sla.eigvalsh((gram + adjoint(gram)) / 2)
        found.extend(float(v) for v in values if tol / margin <= abs(v) <= tol * margin)
    return found


def pinv(matrix, tol: Optional[float] = None) -> np.ndarray:
    """Moore-Penrose pseudo-inverse; singular values <= tol * sigma_max count as zero."""
    tol = Config.RANK_TOL if tol is None else tol
    matrix = as_cmatrix(matrix)
    if matrix.size == 0:
        return np.zeros((matrix.shape[1], matrix.shape[0]), dtype=complex)
    return sla.pinv(matrix, atol=0.0, rtol=tol)


def restricted_inverse(operator: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """
    Pseudo-inverse of a Hermitian operator in the coordinates of ``basis``.

    Returns (B* D B)^(-1) B*, so that ``result @ operator @ basis`` is the
    identity on the coordinate space. ``basis`` must span ran D.
    """
    rank = basis.shape[1]
    if rank == 0:
        return np.zeros((0, operator.shape[0]), dtype=complex)
    compressed = adjoint(basis) @ operator @ basis
    try:
        return sla.solve(compressed, adjoint(basis), assume_a="her")
    except sla.LinAlgError as e:
        raise SolveFailure(f"Defect operator is singular on its own range: {str(e)}") from e


def classify_contraction(matrix, tol: Optional[float] = None) -> ContractionTag:
    tol = Config.RANK_TOL if tol is None else tol
    matrix = as_cmatrix(matrix)
    norm = op_norm(matrix)
    if norm > 1.0 + tol:
        return ContractionTag.NOT_CONTRACTION

    rows, cols = matrix.shape
    isometric = op_norm(adjoint(matrix) @ matrix - np.eye(cols)) <= tol
    co_isometric = op_norm(matrix @ adjoint(matrix) - np.eye(rows)) <= tol
    if isometric and co_isometric:
        return ContractionTag.UNITARY
    if isometric:
        return ContractionTag.ISOMETRIC
    if co_isometric:
        return ContractionTag.CO_ISOMETRIC
    if norm < 1.0 - tol:
        return ContractionTag.PURE
    return ContractionTag.GENERIC


def nearest_isometry(matrix) -> np.ndarray:
    """Polar factor W V* of T = W S V*; snaps a (co-)isometry to machine precision."""
    matrix = as_cmatrix(matrix)
    if matrix.size == 0:
        return matrix.copy()
    left, _, right = sla.svd(matrix, full_matrices=False)
    return left @ right


def unitarity_residual(matrix) -> float:
    matrix = as_cmatrix(matrix)
    rows, cols = matrix.shape
    if rows != cols:
        raise NonSquare(f"Unitarity needs a square matrix, got {rows}x{cols}")
    identity = np.eye(rows)
    return max(op_norm(adjoint(matrix) @ matrix - identity), op_norm(matrix @ adjoint(matrix) - identity))


def numerical_rank(matrix, tol: Optional[float] = None) -> int:
    """Rank relative to the largest singular value; 0 when that value is below tol."""
    tol = Config.RANK_TOL if tol is None else tol
    matrix = as_cmatrix(matrix)
    if matrix.size == 0:
        return 0
    values = sla.svdvals(matrix)
    if values[0] <= tol:
        return 0
    return int(np.sum(values > tol * values[0]))


def span_basis(matrix, tol: Optional[float] = None) -> np.ndarray:
    """Orthonormal basis of the column span (same rank rule as numerical_rank)."""
    tol = Config.RANK_TOL if tol is None else tol
    matrix = as_cmatrix(matrix)
    if matrix.size == 0:
        return np.zeros((matrix.shape[0], 0), dtype=complex)
    left, values, _ = sla.svd(matrix, full_matrices=False)
    if values[0] <= tol:
        return np.zeros((matrix.shape[0], 0), dtype=complex)
    rank = int(np.sum(values > tol * values[0]))
    return _canonical_phase(left[:, :rank])


def orthogonal_complement(basis: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of an orthonormal column set."""
    ambient = basis.shape[0]
    if basis.shape[1] == 0:
        return np.eye(ambient, dtype=complex)
    if basis.shape[1] >= ambient:
        return np.zeros((ambient, 0), dtype=complex)
    return _canonical_phase(sla.null_space(adjoint(basis)))


def same_subspace(first: np.ndarray, second: np.ndarray) -> float:
    """Distance between the orthogonal projectors of two orthonormal bases."""
    if first.shape[1] != second.shape[1]:
        return float("inf")
    return op_norm(first @ adjoint(first) - second @ adjoint(second))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 0:
        return np.zeros((0, 0), dtype=complex)
    if dim == 1:
        return np.exp(2j * np.pi * rng.uniform()).reshape(1, 1)
    return unitary_group.rvs(dim, random_state=rng)


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_contraction(rows: int, cols: int, rng: np.random.Generator, max_norm: float = 0.95) -> np.ndarray:
    """Ginibre draw rescaled to an operator norm in [0.2, 1] * max_norm."""
    draw = ginibre(rows, cols, rng)
    norm = op_norm(draw)
    if norm == 0.0:
        return draw
    return draw * (max_norm * rng.uniform(0.2, 1.0) / norm)


@dataclass(frozen=True, eq=False)
class DefectFrame:
    """
    Coordinates attached to a contraction Gamma.

    P, Q are bases of the defect spaces of Gamma and Gamma*; ``left`` and
    ``right`` invert D_{Gamma*} and D_Gamma on those spaces, ``gamma_star``
    is P* Gamma* Q.
    """
    gamma: np.ndarray
    dom_basis: np.ndarray
    codom_basis: np.ndarray
    defect: np.ndarray
    co_defect: np.ndarray
    left: np.ndarray
    right: np.ndarray
    gamma_star: np.ndarray

    @property
    def p(self) -> int:
        return self.dom_basis.shape[1]

    @property
    def q(self) -> int:
        return self.codom_basis.shape[1]

    @property
    def out_map(self) -> np.ndarray:
        # D_{Gamma*} Q : coordinates of the co-defect space -> output space
        return self.co_defect @ self.codom_basis

    @property
    def in_map(self) -> np.ndarray:
        # P* D_Gamma : input space -> coordinates of the defect space
        return adjoint(self.dom_basis) @ self.defect


def defect_frame(gamma, tol: Optional[float] = None) -> DefectFrame:
    tol = Config.RANK_TOL if tol is None else tol
    gamma = as_cmatrix(gamma)
    slack = max(Config.CONTRACTION_TOL, tol)
    dom = defect_subspace(gamma, tol).basis
    codom = defect_subspace(adjoint(gamma), tol).basis
    defect_op = defect(gamma, slack)
    co_defect_op = defect(adjoint(gamma), slack)
    return DefectFrame(
        gamma=gamma,
        dom_basis=dom,
        codom_basis=codom,
        defect=defect_op,
        co_defect=co_defect_op,
        left=restricted_inverse(co_defect_op, codom),
        right=adjoint(restricted_inverse(defect_op, dom)),
        gamma_star=adjoint(dom) @ adjoint(gamma) @ codom,
    )


def defect_preimage(matrix, h, g, tol: Optional[float] = None) -> Tuple[np.ndarray, float, float]:
    """
    Given T h = D_{T*} g, recover phi with h = D_T phi and g = T phi.

    Returns phi with the two residuals |D_T phi - h| and |T phi - g|.
    """
    matrix = as_cmatrix(matrix)
    h = np.asarray(h, dtype=complex).reshape(-1)
    g = np.asarray(g, dtype=complex).reshape(-1)
    defect_op = defect(matrix)
    basis = defect_subspace(matrix, tol).basis
    phi = basis @ (restricted_inverse(defect_op, basis) @ h)
    return phi, float(np.linalg.norm(defect_op @ phi - h)), float(np.linalg.norm(matrix @ phi - g))

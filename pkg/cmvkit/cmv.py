"""
Block operator CMV matrices.

A choice sequence is turned into elementary rotations J_k, which are
assembled into the block-diagonal factors

    L0 = J0 + J2 + ...          M0 = I_M + J1 + J3 + ...
    M0~ = I_N + J1 + J3 + ...   V0 = J1 + J3 + ...

(direct sums), giving U0 = L0 M0 and U0~ = M0~ L0 together with their
truncations T0, T0~.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import block_diag

from config import Config
from .choice_seq import ChoiceSequence, Tail, adjoint_sequence, validate
from .discrete_system import DiscreteSystem
from .errors import InvalidSequence, NotAContraction, SemiInfiniteSequence, TagMismatch
from .linalg_core import (
    ContractionTag,
    Subspace,
    adjoint,
    as_cmatrix,
    classify_contraction,
    defect,
    defect_subspace,
    op_norm,
    unitarity_residual,
)
from .reports import ValidationReport

logger = logging.getLogger(__name__)


class CMVVariant(str, Enum):
    U0 = "u0"
    U0_TILDE = "u0_tilde"


class TruncationVariant(str, Enum):
    T0 = "t0"
    T0_TILDE = "t0_tilde"


_ROTATION_FORMS = {
    ContractionTag.GENERIC: "full",
    ContractionTag.PURE: "full",
    ContractionTag.ISOMETRIC: "row",
    ContractionTag.CO_ISOMETRIC: "column",
    ContractionTag.UNITARY: "bare",
}


def _coordinate_rotation(gamma: np.ndarray, dom_basis: np.ndarray, codom_basis: np.ndarray) -> np.ndarray:
    """[[G, D_{G*} Q], [P* D_G, -P* G* Q]]"""
    top = np.hstack([gamma, defect(adjoint(gamma)) @ codom_basis])
    bottom = np.hstack([adjoint(dom_basis) @ defect(gamma), -(adjoint(dom_basis) @ adjoint(gamma) @ codom_basis)])
    return np.vstack([top, bottom])


def elementary_rotation(
    gamma,
    tag=None,
    dom_basis: Optional[Subspace] = None,
    codom_basis: Optional[Subspace] = None,
    tol: Optional[float] = None,
) -> np.ndarray:
    """
    Unitary colligation J_Gamma of a contraction.

    With explicit defect bases the coordinate form is returned. Without
    them the shape follows the classification: full 2x2 block form for
    generic and pure Gamma, a row for isometric, a column for co-isometric
    and Gamma itself for unitary Gamma.

    Raises:
        NotAContraction: if ||Gamma|| > 1 + tol
        TagMismatch: if ``tag`` disagrees with the computed classification
    """
    tol = Config.RANK_TOL if tol is None else tol
    gamma = as_cmatrix(gamma)
    computed = classify_contraction(gamma, tol)
    if computed is ContractionTag.NOT_CONTRACTION:
        raise NotAContraction(f"||Gamma|| = {op_norm(gamma):.12g} exceeds 1")
    if tag is not None:
        tag = ContractionTag(tag)
        if tag is ContractionTag.NOT_CONTRACTION or _ROTATION_FORMS[tag] != _ROTATION_FORMS[computed]:
            raise TagMismatch(f"Parameter was tagged {tag.value} but classifies as {computed.value}")

    if dom_basis is not None or codom_basis is not None:
        dom = dom_basis if dom_basis is not None else defect_subspace(gamma, tol)
        codom = codom_basis if codom_basis is not None else defect_subspace(adjoint(gamma), tol)
        return _coordinate_rotation(gamma, dom.basis, codom.basis)

    if _ROTATION_FORMS[computed] == "full":
        return np.block([[gamma, defect(adjoint(gamma))], [defect(gamma), -adjoint(gamma)]])
    # degenerate forms drop the zero-dimensional defect coordinates
    return _coordinate_rotation(gamma, defect_subspace(gamma, tol).basis, defect_subspace(adjoint(gamma), tol).basis)


@dataclass(frozen=True, eq=False)
class CMVFactors:
    L0: np.ndarray
    M0: np.ndarray
    M0_tilde: np.ndarray
    V0: np.ndarray
    depth: int
    params_used: Tuple[np.ndarray, ...]
    bases_used: Tuple[Tuple[Subspace, Subspace], ...]
    closed: bool
    input_dim: int
    output_dim: int

    def slot_sizes(self, variant: CMVVariant) -> List[int]:
        """Dimensions of the defect slots following the leading M (or N) block."""
        sizes = []
        for index, (dom, codom) in enumerate(self.bases_used):
            if variant is CMVVariant.U0:
                sizes.append(dom.dim if index % 2 == 0 else codom.dim)
            else:
                sizes.append(codom.dim if index % 2 == 0 else dom.dim)
        return sizes

    def block_layout(self, variant: CMVVariant) -> List[Tuple[int, int]]:
        """(offset, size) of the leading block followed by the slot pairs."""
        leading = self.input_dim if variant is CMVVariant.U0 else self.output_dim
        layout = [(0, leading)]
        offset = leading
        sizes = self.slot_sizes(variant)
        for start in range(0, len(sizes), 2):
            size = sum(sizes[start:start + 2])
            layout.append((offset, size))
            offset += size
        return layout


def _finite_parameters(seq: ChoiceSequence, depth: Optional[int]):
    """
    Parameters of the finite sequence realised at ``depth``.

    Returns (params, bases, depth, closed) where bases[k] holds the defect
    bases of params[k] and ``closed`` marks an appended identity parameter.
    """
    if seq.input_dim != seq.output_dim:
        raise SemiInfiniteSequence(
            f"A finite unitary CMV needs equal input and output dimensions, got {seq.input_dim} and {seq.output_dim}"
        )
    report = validate(seq)
    if not report.passed:
        raise InvalidSequence("; ".join(report.errors))
    if depth is not None and depth < 0:
        raise InvalidSequence(f"Depth must be non-negative, got {depth}")

    last = seq.length - 1
    if seq.tail is Tail.TERMINATED and (depth is None or last <= 2 * depth + 1):
        if seq.dom_bases[-1].dim or seq.codom_bases[-1].dim:
            raise SemiInfiniteSequence("Terminated sequence does not end with a unitary parameter")
        params = list(seq.params)
        bases = [seq.basis_pair(k + 1) for k in range(seq.length)]
        return params, bases, last // 2, False

    if depth is None:
        depth = seq.length // 2
    if seq.tail is Tail.TERMINATED or last > 2 * depth:
        logger.info(f"Sequence of length {seq.length} cut to depth {depth}")

    params = [seq.parameter(k) for k in range(2 * depth + 1)]
    bases = [seq.basis_pair(k + 1) for k in range(2 * depth + 1)]
    dom, codom = bases[-1]
    if dom.dim != codom.dim:
        raise SemiInfiniteSequence(
            f"Defect spaces after Gamma_{2 * depth} have dimensions {dom.dim} and {codom.dim}; no unitary closure"
        )
    # closing parameter: identity between the two equal-dimensional defect spaces
    params.append(np.eye(dom.dim, dtype=complex))
    bases.append((Subspace.zero(dom.dim), Subspace.zero(codom.dim)))
    return params, bases, depth, True


def build_factors(seq: ChoiceSequence, depth: Optional[int] = None) -> CMVFactors:
    """
    Assemble L0, M0, M0~ and V0 from a square choice sequence.

    Raises:
        SemiInfiniteSequence: when no finite unitary CMV exists
        InvalidSequence: when ``seq`` does not validate
    """
    params, bases, depth, closed = _finite_parameters(seq, depth)
    rotations = [
        _coordinate_rotation(gamma, dom.basis, codom.basis) for gamma, (dom, codom) in zip(params, bases)
    ]
    even, odd = rotations[0::2], rotations[1::2]
    L0 = block_diag(*even)
    V0 = block_diag(*odd) if odd else np.zeros((0, 0), dtype=complex)
    M0 = block_diag(np.eye(seq.input_dim, dtype=complex), V0)
    M0_tilde = block_diag(np.eye(seq.output_dim, dtype=complex), V0)
    if L0.shape[1] != M0.shape[0]:
        raise InvalidSequence(f"Factor sizes do not chain: L0 is {L0.shape}, M0 is {M0.shape}")

    logger.debug(f"CMV factors at depth {depth}: {len(params)} rotations, size {L0.shape[0]}, closed={closed}")
    return CMVFactors(
        L0=L0,
        M0=M0,
        M0_tilde=M0_tilde,
        V0=V0,
        depth=depth,
        params_used=tuple(params),
        bases_used=tuple(bases),
        closed=closed,
        input_dim=seq.input_dim,
        output_dim=seq.output_dim,
    )


@dataclass(frozen=True, eq=False)
class BlockCMV:
    matrix: np.ndarray
    variant: CMVVariant
    block_layout: Tuple[Tuple[int, int], ...]
    factors: Tuple[np.ndarray, np.ndarray]
    factor_set: CMVFactors
    seq: ChoiceSequence

    @property
    def depth(self) -> int:
        return self.factor_set.depth

    @property
    def closed(self) -> bool:
        return self.factor_set.closed

    @property
    def input_dim(self) -> int:
        return self.seq.input_dim

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def split(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(D, C, B, A): first block, rest of first row, rest of first column, truncation."""
        m, n = self.seq.input_dim, self.seq.output_dim
        u = self.matrix
        return u[:n, :m], u[:n, m:], u[n:, :m], u[n:, m:]

    @cached_property
    def system(self) -> DiscreteSystem:
        D, C, B, A = self.split()
        return DiscreteSystem(D=D, C=C, B=B, A=A)


@dataclass(frozen=True, eq=False)
class TruncatedCMV:
    matrix: np.ndarray
    variant: TruncationVariant
    factors: Tuple[np.ndarray, np.ndarray]
    seq: ChoiceSequence


def build_cmv(seq: ChoiceSequence, depth: Optional[int] = None, variant=CMVVariant.U0) -> BlockCMV:
    """U0 = L0 M0 or U0~ = M0~ L0 for a square choice sequence."""
    variant = CMVVariant(variant)
    factor_set = build_factors(seq, depth)
    if variant is CMVVariant.U0:
        factors = (factor_set.L0, factor_set.M0)
    else:
        factors = (factor_set.M0_tilde, factor_set.L0)
    matrix = factors[0] @ factors[1]

    residual = unitarity_residual(matrix)
    if residual > Config.RESIDUAL_TOL:
        logger.warning(f"CMV unitarity residual {residual:.2e} above {Config.RESIDUAL_TOL:.1e}")
    return BlockCMV(
        matrix=matrix,
        variant=variant,
        block_layout=tuple(factor_set.block_layout(variant)),
        factors=factors,
        factor_set=factor_set,
        seq=seq,
    )


def truncate(cmv: BlockCMV) -> TruncatedCMV:
    """T0 = (L0 with the first block row/column removed) V0, or V0 times it for U0~."""
    f = cmv.factor_set
    corner = f.L0[f.output_dim:, f.input_dim:]
    if cmv.variant is CMVVariant.U0:
        factors = (corner, f.V0)
        variant = TruncationVariant.T0
    else:
        factors = (f.V0, corner)
        variant = TruncationVariant.T0_TILDE
    matrix = factors[0] @ factors[1]

    norm = op_norm(matrix)
    if norm > 1.0 + 1e-12:
        logger.warning(f"Truncated CMV has norm {norm:.15g}")
    return TruncatedCMV(matrix=matrix, variant=variant, factors=factors, seq=cmv.seq)


def intertwiner_check(seq: ChoiceSequence, depth: Optional[int] = None, tol: Optional[float] = None) -> ValidationReport:
    """Residuals of V0 T0 = T0~ V0, M0~ U0 = U0~ M0 and the two adjoint laws."""
    tol = Config.RESIDUAL_TOL if tol is None else tol
    report = ValidationReport()
    u0 = build_cmv(seq, depth, CMVVariant.U0)
    u0_tilde = build_cmv(seq, depth, CMVVariant.U0_TILDE)
    t0, t0_tilde = truncate(u0), truncate(u0_tilde)
    f = u0.factor_set

    report.record("truncation_intertwiner", op_norm(f.V0 @ t0.matrix - t0_tilde.matrix @ f.V0), tol)
    report.record("cmv_intertwiner", op_norm(f.M0_tilde @ u0.matrix - u0_tilde.matrix @ f.M0), tol)

    dual = build_cmv(adjoint_sequence(seq), depth, CMVVariant.U0_TILDE)
    report.record("adjoint_cmv", op_norm(adjoint(u0.matrix) - dual.matrix), 1e-12)
    report.record("adjoint_truncation", op_norm(adjoint(t0.matrix) - truncate(dual).matrix), 1e-12)
    return report


def block_bandwidth_residual(cmv: BlockCMV) -> float:
    """Largest entry in blocks whose layout indices differ by two or more."""
    layout = cmv.block_layout
    worst = 0.0
    for row, (row_offset, row_size) in enumerate(layout):
        for col, (col_offset, col_size) in enumerate(layout):
            if abs(row - col) < 2 or row_size == 0 or col_size == 0:
                continue
            block = cmv.matrix[row_offset:row_offset + row_size, col_offset:col_offset + col_size]
            worst = max(worst, float(np.max(np.abs(block))))
    return worst

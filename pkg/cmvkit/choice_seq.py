"""
Choice sequences: operator Schur parameters with explicit defect-space bases.

Gamma_0 maps C^m -> C^n; Gamma_k (k >= 1) maps the defect space of
Gamma_{k-1} to the defect space of Gamma_{k-1}^*, written in the orthonormal
coordinates stored in ``dom_bases`` / ``codom_bases``.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from config import Config
from .errors import BadDims, InvalidSequence, NotAContraction
from .linalg_core import (
    TERMINAL_TAGS,
    Subspace,
    adjoint,
    as_cmatrix,
    classify_contraction,
    defect_subspace,
    haar_unitary,
    op_norm,
    random_contraction,
)
from .reports import ValidationReport

logger = logging.getLogger(__name__)


class Tail(str, Enum):
    ZERO_TAIL = "zero_tail"
    TERMINATED = "terminated"


class SequenceKind(str, Enum):
    PURE = "pure"
    TERMINATE_ISOMETRIC = "terminate_isometric"
    TERMINATE_COISOMETRIC = "terminate_coisometric"
    TERMINATE_UNITARY = "terminate_unitary"


def _basis_tol(tol: float, tail: Tail, index: int, count: int) -> float:
    # the last parameter of a terminated sequence is judged at the termination tolerance
    if tail is Tail.TERMINATED and index == count - 1:
        return max(tol, Config.TERMINATION_TOL)
    return tol


@dataclass(frozen=True, eq=False)
class ChoiceSequence:
    """
    Finite list of Schur parameters plus the defect bases linking them.

    ``dom_bases[k]`` / ``codom_bases[k]`` for k >= 1 are the bases of the
    defect spaces of Gamma_{k-1} and Gamma_{k-1}^*; index 0 is the full
    input/output space. Both tuples have one entry more than ``params``.
    """
    input_dim: int
    output_dim: int
    params: Tuple[np.ndarray, ...]
    dom_bases: Tuple[Subspace, ...]
    codom_bases: Tuple[Subspace, ...]
    tail: Tail = Tail.ZERO_TAIL
    tol: float = 1e-9

    @classmethod
    def from_parameters(
        cls,
        params: Sequence,
        tail=Tail.ZERO_TAIL,
        tol: Optional[float] = None,
        strict: bool = True,
    ) -> "ChoiceSequence":
        """
        Build a sequence and its canonical defect bases.

        With ``strict`` the result is validated and InvalidSequence raised
        on any finding; otherwise the bases are computed as far as the
        parameters allow and ``validate`` reports the problems.
        """
        tol = Config.RANK_TOL if tol is None else tol
        tail = Tail(tail)
        matrices = tuple(as_cmatrix(p) for p in params)
        if not matrices:
            raise InvalidSequence("A choice sequence needs at least Gamma_0")

        rows, cols = matrices[0].shape
        dom = [Subspace.full(cols)]
        codom = [Subspace.full(rows)]
        for index, gamma in enumerate(matrices):
            level = _basis_tol(tol, tail, index, len(matrices))
            try:
                dom.append(defect_subspace(gamma, level))
                codom.append(defect_subspace(adjoint(gamma), level))
            except NotAContraction as e:
                if strict:
                    raise InvalidSequence(f"Gamma_{index} is not a contraction: {str(e)}") from e
                dom.append(defect_subspace(gamma, level, contraction_tol=np.inf))
                codom.append(defect_subspace(adjoint(gamma), level, contraction_tol=np.inf))

        seq = cls(
            input_dim=cols,
            output_dim=rows,
            params=matrices,
            dom_bases=tuple(dom),
            codom_bases=tuple(codom),
            tail=tail,
            tol=tol,
        )
        if strict:
            report = validate(seq)
            if not report.passed:
                raise InvalidSequence("; ".join(report.errors))
        return seq

    @property
    def length(self) -> int:
        return len(self.params)

    @property
    def is_scalar(self) -> bool:
        return all(p.shape in ((1, 1), (0, 0), (1, 0), (0, 1)) for p in self.params)

    def parameter(self, k: int) -> np.ndarray:
        """Gamma_k, with zero blocks of the stabilized shape past the stored ones."""
        if k < 0:
            raise IndexError(f"Parameter index must be non-negative, got {k}")
        if k < len(self.params):
            return self.params[k]
        return np.zeros((self.codom_bases[-1].dim, self.dom_bases[-1].dim), dtype=complex)

    def basis_pair(self, k: int) -> Tuple[Subspace, Subspace]:
        """(P_k, Q_k): bases of the domain/codomain coordinate spaces of Gamma_k."""
        if k < 0:
            raise IndexError(f"Basis index must be non-negative, got {k}")
        if k < len(self.dom_bases):
            return self.dom_bases[k], self.codom_bases[k]
        # zero blocks past the end: their defect spaces are everything
        return Subspace.full(self.dom_bases[-1].dim), Subspace.full(self.codom_bases[-1].dim)


def validate(seq: ChoiceSequence, tol: Optional[float] = None) -> ValidationReport:
    """
    Check shapes, contractivity, bases and termination of a sequence.

    Args:
        seq: sequence to check
        tol: contraction slack; defaults to max(Config.CONTRACTION_TOL, seq.tol)

    Returns:
        ValidationReport listing every violation (empty iff valid)
    """
    slack = max(Config.CONTRACTION_TOL, seq.tol) if tol is None else tol
    report = ValidationReport()

    if not seq.params:
        report.add_error("sequence has no parameters")
        return report
    if len(seq.dom_bases) != len(seq.params) + 1 or len(seq.codom_bases) != len(seq.params) + 1:
        report.add_error("basis lists must have one entry more than the parameter list")
        return report
    if seq.params[0].shape != (seq.output_dim, seq.input_dim):
        report.add_error(
            f"Gamma_0 has shape {seq.params[0].shape}, expected {(seq.output_dim, seq.input_dim)}"
        )

    for index, gamma in enumerate(seq.params):
        dom, codom = seq.dom_bases[index], seq.codom_bases[index]
        expected = (codom.dim, dom.dim)
        if gamma.shape != expected:
            report.add_error(f"Gamma_{index} has shape {gamma.shape}, expected {expected}")
            continue

        norm = op_norm(gamma)
        if norm > 1.0 + slack:
            report.add_error(f"Gamma_{index} has norm {norm:.12g} > 1")
            continue

        for label, basis, operator in (
            ("defect", seq.dom_bases[index + 1], gamma),
            ("co-defect", seq.codom_bases[index + 1], adjoint(gamma)),
        ):
            if basis.ambient_dim != operator.shape[1]:
                report.add_error(f"{label} basis after Gamma_{index} lives in the wrong space")
                continue
            if basis.orthonormality_residual() > 1e-8:
                report.add_error(f"{label} basis after Gamma_{index} is not orthonormal")
            level = _basis_tol(seq.tol, seq.tail, index, len(seq.params))
            expected_dim = defect_subspace(operator, level, contraction_tol=np.inf).dim
            if basis.dim != expected_dim:
                report.add_error(
                    f"{label} basis after Gamma_{index} has dimension {basis.dim}, expected {expected_dim}"
                )
            elif basis.dim:
                gram = np.eye(operator.shape[1]) - adjoint(operator) @ operator
                leak = op_norm(gram - basis.projector() @ gram)
                if leak > 10 * level:
                    report.add_error(f"{label} basis after Gamma_{index} misses the defect range ({leak:.2e})")

    if seq.tail is Tail.TERMINATED and report.passed:
        tag = classify_contraction(seq.params[-1], max(Config.TERMINATION_TOL, seq.tol))
        if tag not in TERMINAL_TAGS:
            report.add_error(f"terminated sequence ends with a {tag.value} parameter")
    return report


def adjoint_sequence(seq: ChoiceSequence) -> ChoiceSequence:
    """The sequence (Gamma_k^*): dims and basis lists swap places."""
    report = validate(seq)
    if not report.passed:
        raise InvalidSequence("; ".join(report.errors))
    return ChoiceSequence(
        input_dim=seq.output_dim,
        output_dim=seq.input_dim,
        params=tuple(adjoint(p) for p in seq.params),
        dom_bases=seq.codom_bases,
        codom_bases=seq.dom_bases,
        tail=seq.tail,
        tol=seq.tol,
    )


def _check_terminal_shape(rows: int, cols: int, kind: SequenceKind) -> None:
    if kind is SequenceKind.TERMINATE_UNITARY and rows != cols:
        raise BadDims(f"No unitary {rows}x{cols} block exists")
    if kind is SequenceKind.TERMINATE_ISOMETRIC and rows < cols:
        raise BadDims(f"No isometric {rows}x{cols} block exists")
    if kind is SequenceKind.TERMINATE_COISOMETRIC and cols < rows:
        raise BadDims(f"No co-isometric {rows}x{cols} block exists")


def _terminal_block(rows: int, cols: int, kind: SequenceKind, rng: np.random.Generator) -> np.ndarray:
    _check_terminal_shape(rows, cols, kind)
    if kind is SequenceKind.TERMINATE_UNITARY:
        return haar_unitary(rows, rng)
    if kind is SequenceKind.TERMINATE_ISOMETRIC:
        return haar_unitary(rows, rng)[:, :cols]
    return haar_unitary(cols, rng)[:rows, :]


def random_choice_sequence(m: int, n: int, depth: int, seed: Optional[int] = None, kind=SequenceKind.PURE) -> ChoiceSequence:
    """
    Deterministic random sequence for tests and the verify suite.

    ``depth`` pure blocks (operator norm <= 0.95) are followed, for the
    terminating kinds, by one isometric, co-isometric or unitary block.
    When m or n is zero the only block is the empty n x m matrix, which is
    already isometric or co-isometric, so the sequence is that block alone.
    """
    kind = SequenceKind(kind)
    if m < 0 or n < 0 or depth < 0:
        raise BadDims(f"Dimensions and depth must be non-negative, got m={m}, n={n}, depth={depth}")
    if kind is SequenceKind.PURE and depth == 0:
        raise BadDims("A pure sequence needs depth >= 1")
    if m == 0 or n == 0:
        _check_terminal_shape(n, m, kind)
        logger.debug(f"Random {kind.value} sequence: m={m}, n={n}, single empty parameter")
        return ChoiceSequence.from_parameters([np.zeros((n, m), dtype=complex)], Tail.TERMINATED)

    rng = np.random.default_rng(seed)
    # pure blocks have full-rank defects, so every block is n x m
    params = [random_contraction(n, m, rng) for _ in range(depth)]
    if kind is SequenceKind.PURE:
        tail = Tail.ZERO_TAIL
    else:
        params.append(_terminal_block(n, m, kind, rng))
        tail = Tail.TERMINATED

    logger.debug(f"Random {kind.value} sequence: m={m}, n={n}, {len(params)} parameters, seed={seed}")
    return ChoiceSequence.from_parameters(params, tail)


def rebase_sequence(seq: ChoiceSequence, seed: Optional[int] = None) -> ChoiceSequence:
    """
    Express the same abstract sequence in randomly rotated defect coordinates.

    Gamma'_k = V_k^* Gamma_k W_k and P'_{k+1} = W_k^* P_{k+1} W_{k+1}
    (likewise Q'), with W_0 = V_0 = I.
    """
    rng = np.random.default_rng(seed)
    dom_rotation = np.eye(seq.input_dim, dtype=complex)
    codom_rotation = np.eye(seq.output_dim, dtype=complex)
    params = []
    dom = [seq.dom_bases[0]]
    codom = [seq.codom_bases[0]]
    for index, gamma in enumerate(seq.params):
        params.append(adjoint(codom_rotation) @ gamma @ dom_rotation)
        next_dom, next_codom = seq.dom_bases[index + 1], seq.codom_bases[index + 1]
        new_dom_rotation = haar_unitary(next_dom.dim, rng)
        new_codom_rotation = haar_unitary(next_codom.dim, rng)
        dom.append(Subspace(next_dom.ambient_dim, adjoint(dom_rotation) @ next_dom.basis @ new_dom_rotation))
        codom.append(
            Subspace(next_codom.ambient_dim, adjoint(codom_rotation) @ next_codom.basis @ new_codom_rotation)
        )
        dom_rotation, codom_rotation = new_dom_rotation, new_codom_rotation

    return ChoiceSequence(
        input_dim=seq.input_dim,
        output_dim=seq.output_dim,
        params=tuple(params),
        dom_bases=tuple(dom),
        codom_bases=tuple(codom),
        tail=seq.tail,
        tol=seq.tol,
    )

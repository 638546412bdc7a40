"""
Schur-class and Caratheodory-class functions on the unit disk.

A SchurFunction is held in one of four representations: a constant
contraction, a transfer function of a system, the transfer function of the
CMV system built from a choice sequence, or a list of Taylor coefficients.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from config import Config
from .choice_seq import ChoiceSequence, Tail
from .cmv import build_cmv
from .discrete_system import DiscreteSystem
from .errors import DepthExhausted, NotNormalized, OutsideDisk, ShapeMismatch, SolveFailure
from .linalg_core import DefectFrame, adjoint, as_cmatrix, defect_frame, op_norm

logger = logging.getLogger(__name__)

# Taylor terms generated when a function has no natural truncation depth
DEFAULT_TAYLOR_TERMS = 32


class Representation(str, Enum):
    CONSTANT = "constant"
    REALIZATION = "realization"
    CMV = "cmv"
    TAYLOR = "taylor"


def _check_disk(lam: complex) -> None:
    if abs(lam) >= 1:
        raise OutsideDisk(f"|lambda| = {abs(lam):.6g} is not inside the unit disk")


def compose_system(frame: DefectFrame, system: DiscreteSystem) -> DiscreteSystem:
    """
    Realization of Gamma + D_{G*} Q Z (I + g* Z)^(-1) P* D_G for Z = lambda Theta_1.

    The block operator equals (J_Gamma + I)(I + U_tau1), so a conservative
    tau1 gives a conservative result.
    """
    p, h = frame.p, system.state_dim
    c_inner = np.hstack([system.D, system.C])
    b_inner = np.vstack([np.eye(p, dtype=complex), np.zeros((h, p), dtype=complex)])
    a_inner = np.block([
        [np.zeros((p, p), dtype=complex), np.zeros((p, h), dtype=complex)],
        [system.B, system.A],
    ])
    return DiscreteSystem(
        D=frame.gamma,
        C=frame.out_map @ c_inner,
        B=b_inner @ frame.in_map,
        A=a_inner - b_inner @ frame.gamma_star @ c_inner,
    )


def _zero_tail_realization(sequence: ChoiceSequence) -> DiscreteSystem:
    """
    Passive realization of the function whose parameters vanish after the stored ones.

    The last stored parameter is the constant iterate; the earlier ones are
    composed onto it from the back.
    """
    last = sequence.params[-1]
    system = DiscreteSystem(
        D=last,
        C=np.zeros((last.shape[0], 0), dtype=complex),
        B=np.zeros((0, last.shape[1]), dtype=complex),
        A=np.zeros((0, 0), dtype=complex),
    )
    for gamma in reversed(sequence.params[:-1]):
        system = compose_system(defect_frame(gamma, sequence.tol), system)
    logger.debug(f"Zero-tail realization of {sequence.length} parameters: state dimension {system.state_dim}")
    return system


@dataclass(frozen=True, eq=False)
class SchurFunction:
    representation: Representation
    input_dim: int
    output_dim: int
    constant: Optional[np.ndarray] = None
    system: Optional[DiscreteSystem] = None
    sequence: Optional[ChoiceSequence] = None
    depth: Optional[int] = None
    coefficients: Tuple[np.ndarray, ...] = ()
    exact: bool = True

    @classmethod
    def from_constant(cls, gamma) -> "SchurFunction":
        gamma = as_cmatrix(gamma)
        return cls(Representation.CONSTANT, gamma.shape[1], gamma.shape[0], constant=gamma)

    @classmethod
    def from_system(cls, system: DiscreteSystem) -> "SchurFunction":
        return cls(Representation.REALIZATION, system.input_dim, system.output_dim, system=system)

    @classmethod
    def from_cmv(cls, sequence: ChoiceSequence, depth: Optional[int] = None) -> "SchurFunction":
        """
        Function with Schur parameters ``sequence``.

        Without a depth a zero-tail sequence is realized exactly; otherwise
        the function is the transfer function of the CMV system of
        build_cmv(sequence, depth).
        """
        return cls(Representation.CMV, sequence.input_dim, sequence.output_dim, sequence=sequence, depth=depth)

    @classmethod
    def from_taylor(cls, coefficients: Sequence, exact: bool = True) -> "SchurFunction":
        """
        Function given by its Taylor coefficients c_0, c_1, ...

        ``exact`` marks a polynomial; otherwise only the stored
        coefficients are known and asking for more raises DepthExhausted.
        """
        matrices = tuple(as_cmatrix(c) for c in coefficients)
        if not matrices:
            raise DepthExhausted("A Taylor representation needs at least one coefficient")
        shape = matrices[0].shape
        for index, c in enumerate(matrices):
            if c.shape != shape:
                raise ShapeMismatch(f"Coefficient {index} has shape {c.shape}, expected {shape}")
        return cls(Representation.TAYLOR, shape[1], shape[0], coefficients=matrices, exact=exact)

    @property
    def available_depth(self) -> Optional[int]:
        """Number of known coefficients, or None when any number can be produced."""
        if self.representation is Representation.TAYLOR and not self.exact:
            return len(self.coefficients)
        return None

    @cached_property
    def realization(self) -> Optional[DiscreteSystem]:
        if self.representation is Representation.REALIZATION:
            return self.system
        if self.representation is Representation.CONSTANT:
            return DiscreteSystem(
                D=self.constant,
                C=np.zeros((self.output_dim, 0), dtype=complex),
                B=np.zeros((0, self.input_dim), dtype=complex),
                A=np.zeros((0, 0), dtype=complex),
            )
        if self.representation is Representation.CMV:
            if self.depth is None and self.sequence.tail is Tail.ZERO_TAIL:
                return _zero_tail_realization(self.sequence)
            return build_cmv(self.sequence, self.depth).system
        return None

    def to_realization(self) -> DiscreteSystem:
        if self.realization is None:
            raise ShapeMismatch("Taylor representations carry no realization")
        return self.realization

    def value(self, lam: complex) -> np.ndarray:
        _check_disk(lam)
        if self.representation is Representation.CONSTANT:
            return self.constant.copy()
        if self.representation is Representation.TAYLOR:
            total = np.zeros((self.output_dim, self.input_dim), dtype=complex)
            for c in reversed(self.coefficients):
                total = total * lam + c
            return total
        return self.realization.transfer(lam)

    def taylor_coefficients(self, count: int) -> List[np.ndarray]:
        if self.representation is Representation.TAYLOR:
            if count <= len(self.coefficients):
                return [c.copy() for c in self.coefficients[:count]]
            if not self.exact:
                raise DepthExhausted(
                    f"{count} coefficients requested, only {len(self.coefficients)} are known"
                )
            padding = [np.zeros((self.output_dim, self.input_dim), dtype=complex)] * (count - len(self.coefficients))
            return [c.copy() for c in self.coefficients] + padding
        return self.realization.taylor_coefficients(count)

    def tail_bound(self, lam: complex) -> float:
        """Bound on the neglected tail of a truncated Taylor form at lambda."""
        _check_disk(lam)
        if self.available_depth is None:
            return 0.0
        r = abs(lam)
        return r ** len(self.coefficients) / (1.0 - r)

    def reflect(self) -> "SchurFunction":
        """Theta~(lambda) = Theta(conj(lambda))^*"""
        if self.representation is Representation.CONSTANT:
            return SchurFunction.from_constant(adjoint(self.constant))
        if self.representation is Representation.TAYLOR:
            return SchurFunction.from_taylor([adjoint(c) for c in self.coefficients], exact=self.exact)
        return SchurFunction.from_system(self.realization.dual())


@dataclass(frozen=True, eq=False)
class CaratheodoryFunction:
    """
    Function F with F(0) = I and Re F >= 0 on the disk.

    Either a list of Taylor coefficients F_0, F_1, ... or the pair
    (U, basis) defining F_M(lambda) = P_M (U + lambda)(U - lambda)^(-1) on M.
    """
    dim: int
    coefficients: Tuple[np.ndarray, ...] = ()
    unitary: Optional[np.ndarray] = None
    basis: Optional[np.ndarray] = None

    @classmethod
    def from_coefficients(cls, coefficients: Sequence) -> "CaratheodoryFunction":
        matrices = tuple(as_cmatrix(c) for c in coefficients)
        if not matrices:
            raise DepthExhausted("A Caratheodory function needs at least F_0")
        return cls(dim=matrices[0].shape[0], coefficients=matrices)

    @classmethod
    def from_moments(cls, moments: Sequence) -> "CaratheodoryFunction":
        """F = S_0 + 2 sum_{k>=1} S_k lambda^k"""
        matrices = [as_cmatrix(s) for s in moments]
        if not matrices:
            raise DepthExhausted("At least S_0 is required")
        return cls.from_coefficients([matrices[0]] + [2 * s for s in matrices[1:]])

    @classmethod
    def from_unitary(cls, unitary, basis) -> "CaratheodoryFunction":
        unitary = as_cmatrix(unitary)
        basis = as_cmatrix(basis)
        if basis.shape[0] != unitary.shape[0]:
            raise ShapeMismatch(f"Basis has {basis.shape[0]} rows, operator is {unitary.shape}")
        return cls(dim=basis.shape[1], unitary=unitary, basis=basis)

    @property
    def available_depth(self) -> Optional[int]:
        return None if self.unitary is not None else len(self.coefficients)

    def taylor_coefficients(self, count: int) -> List[np.ndarray]:
        if self.unitary is None:
            if count > len(self.coefficients):
                raise DepthExhausted(f"{count} coefficients requested, only {len(self.coefficients)} are known")
            return [c.copy() for c in self.coefficients[:count]]

        # (U + lambda)(U - lambda)^(-1) = I + 2 sum_k lambda^k U^(-k)
        coefficients = []
        inverse = adjoint(self.unitary)
        column = self.basis
        for index in range(count):
            if index == 0:
                coefficients.append(adjoint(self.basis) @ self.basis)
            else:
                column = inverse @ column
                coefficients.append(2 * (adjoint(self.basis) @ column))
        return coefficients

    def value(self, lam: complex) -> np.ndarray:
        _check_disk(lam)
        if self.unitary is not None:
            size = self.unitary.shape[0]
            try:
                resolvent = sla.solve(self.unitary - lam * np.eye(size), self.basis)
            except sla.LinAlgError as e:
                raise SolveFailure(f"U - lambda is singular at lambda={lam}: {str(e)}") from e
            return adjoint(self.basis) @ (self.unitary + lam * np.eye(size)) @ resolvent
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for c in reversed(self.coefficients):
            total = total * lam + c
        return total

    def is_normalized(self, tol: Optional[float] = None) -> bool:
        tol = Config.RANK_TOL if tol is None else tol
        return op_norm(self.taylor_coefficients(1)[0] - np.eye(self.dim)) <= tol

    def require_normalized(self, tol: Optional[float] = None) -> None:
        if not self.is_normalized(tol):
            raise NotNormalized(f"F(0) differs from the identity by {op_norm(self.taylor_coefficients(1)[0] - np.eye(self.dim)):.3e}")

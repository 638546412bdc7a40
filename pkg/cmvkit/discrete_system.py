"""
Discrete-time linear systems tau = (D, C, B, A).

    sigma_k   = C h_k + D xi_k
    h_{k+1}   = A h_k + B xi_k

with transfer function Theta(lambda) = D + lambda C (I - lambda A)^(-1) B.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from config import Config
from .errors import OutsideDisk, ShapeMismatch, SolveFailure
from .linalg_core import adjoint, as_cmatrix, op_norm

logger = logging.getLogger(__name__)


class SystemTag(str, Enum):
    PASSIVE = "passive"
    ISOMETRIC = "isometric"
    CO_ISOMETRIC = "co_isometric"
    CONSERVATIVE = "conservative"
    NONE = "none"


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    D: np.ndarray
    C: np.ndarray
    B: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        for name in ("D", "C", "B", "A"):
            object.__setattr__(self, name, as_cmatrix(getattr(self, name)))
        n, m = self.D.shape
        h = self.A.shape[0]
        if self.A.shape != (h, h):
            raise ShapeMismatch(f"State operator must be square, got {self.A.shape}")
        if self.C.shape != (n, h) or self.B.shape != (h, m):
            raise ShapeMismatch(
                f"Inconsistent system blocks: D {self.D.shape}, C {self.C.shape}, "
                f"B {self.B.shape}, A {self.A.shape}"
            )

    @property
    def input_dim(self) -> int:
        return self.D.shape[1]

    @property
    def output_dim(self) -> int:
        return self.D.shape[0]

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    def block(self) -> np.ndarray:
        """U_tau = [[D, C], [B, A]]"""
        return np.block([[self.D, self.C], [self.B, self.A]])

    @classmethod
    def from_block(cls, matrix, m: int, n: int) -> "DiscreteSystem":
        """Split a block operator with an m-dim input and n-dim output corner."""
        matrix = as_cmatrix(matrix)
        if n > matrix.shape[0] or m > matrix.shape[1] or matrix.shape[0] - n != matrix.shape[1] - m:
            raise ShapeMismatch(f"Cannot split a {matrix.shape} matrix with corner {n}x{m}")
        return cls(D=matrix[:n, :m], C=matrix[:n, m:], B=matrix[n:, :m], A=matrix[n:, m:])

    @cached_property
    def class_tag(self) -> "SystemTag":
        return classify_system(self)

    def transfer(self, lam: complex) -> np.ndarray:
        if abs(lam) >= 1:
            raise OutsideDisk(f"|lambda| = {abs(lam):.6g} is not inside the unit disk")
        if self.state_dim == 0:
            return self.D.copy()
        try:
            resolvent = sla.solve(np.eye(self.state_dim) - lam * self.A, self.B)
        except sla.LinAlgError as e:
            raise SolveFailure(f"I - lambda A is singular at lambda={lam}: {str(e)}") from e
        return self.D + lam * (self.C @ resolvent)

    def taylor_coefficients(self, count: int) -> List[np.ndarray]:
        """D, CB, CAB, CA^2B, ... (``count`` terms)."""
        coefficients = []
        if count <= 0:
            return coefficients
        coefficients.append(self.D.copy())
        column = self.B
        for _ in range(1, count):
            coefficients.append(self.C @ column)
            column = self.A @ column
        return coefficients

    def dual(self) -> "DiscreteSystem":
        """System (D*, B*, C*, A*) whose transfer function is Theta(conj(lambda))^*."""
        return DiscreteSystem(D=adjoint(self.D), C=adjoint(self.B), B=adjoint(self.C), A=adjoint(self.A))

    def change_state_basis(self, unitary: np.ndarray) -> "DiscreteSystem":
        """Unitarily similar system (D, C W, W* B, W* A W)."""
        w = as_cmatrix(unitary)
        return DiscreteSystem(D=self.D, C=self.C @ w, B=adjoint(w) @ self.B, A=adjoint(w) @ self.A @ w)


def _as_vectors(values: Sequence, dim: int, label: str) -> List[np.ndarray]:
    vectors = []
    for index, value in enumerate(values):
        vector = np.asarray(value, dtype=complex).reshape(-1)
        if vector.shape[0] != dim:
            raise ShapeMismatch(f"{label} {index} has length {vector.shape[0]}, expected {dim}")
        vectors.append(vector)
    return vectors


def simulate(
    system: DiscreteSystem, inputs: Sequence, h0: Optional[Sequence] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Run the state recursion.

    Returns:
        (outputs, states): outputs has one row per input, states one row per
        time step including the initial state
    """
    xs = _as_vectors(inputs, system.input_dim, "input")
    if h0 is None:
        state = np.zeros(system.state_dim, dtype=complex)
    else:
        state = _as_vectors([h0], system.state_dim, "initial state")[0]

    outputs = np.zeros((len(xs), system.output_dim), dtype=complex)
    states = np.zeros((len(xs) + 1, system.state_dim), dtype=complex)
    states[0] = state
    for step, x in enumerate(xs):
        outputs[step] = system.C @ state + system.D @ x
        state = system.A @ state + system.B @ x
        states[step + 1] = state
    return outputs, states


def energy_residual(system: DiscreteSystem, inputs: Sequence, h0: Optional[Sequence] = None) -> float:
    """Largest per-step violation of |sigma|^2 + |h'|^2 = |xi|^2 + |h|^2."""
    outputs, states = simulate(system, inputs, h0)
    xs = _as_vectors(inputs, system.input_dim, "input")
    worst = 0.0
    for step, x in enumerate(xs):
        out_energy = np.vdot(outputs[step], outputs[step]).real + np.vdot(states[step + 1], states[step + 1]).real
        in_energy = np.vdot(x, x).real + np.vdot(states[step], states[step]).real
        worst = max(worst, abs(out_energy - in_energy))
    return worst


def classify_system(system: DiscreteSystem, tol: Optional[float] = None) -> SystemTag:
    tol = Config.RANK_TOL if tol is None else tol
    block = system.block()
    if op_norm(block) > 1.0 + tol:
        return SystemTag.NONE
    rows, cols = block.shape
    isometric = op_norm(adjoint(block) @ block - np.eye(cols)) <= tol
    co_isometric = op_norm(block @ adjoint(block) - np.eye(rows)) <= tol
    if isometric and co_isometric:
        return SystemTag.CONSERVATIVE
    if isometric:
        return SystemTag.ISOMETRIC
    if co_isometric:
        return SystemTag.CO_ISOMETRIC
    return SystemTag.PASSIVE

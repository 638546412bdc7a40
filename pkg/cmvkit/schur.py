"""
Operator Schur algorithm.

Forward: a Schur function is peeled into its parameters Gamma_0, Gamma_1, ...
through the Mobius step Theta -> (Theta(0), Theta_1). Backward: a parameter
and the next iterate are composed back into Theta. Both directions work on
Taylor coefficients; realizations are composed exactly at system level and
the realization formula extracts parameters straight from (D, C, B, A).
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from config import Config
from .choice_seq import ChoiceSequence, Tail
from .discrete_system import DiscreteSystem, SystemTag, classify_system
from .errors import DepthExhausted, NotConservative, NotSimple, ShapeMismatch, SolveFailure
from .functions import DEFAULT_TAYLOR_TERMS, CaratheodoryFunction, Representation, SchurFunction, compose_system
from .linalg_core import (
    TERMINAL_TAGS,
    adjoint,
    as_cmatrix,
    borderline_defects,
    classify_contraction,
    defect_frame,
    defect_kernel,
    nearest_isometry,
    op_norm,
    orthogonal_complement,
)
from .systems import structural_tests

logger = logging.getLogger(__name__)


def _working_coefficients(theta: SchurFunction, count: Optional[int]) -> List[np.ndarray]:
    """Coefficients used by a step: all known ones, or ``count`` of them."""
    available = theta.available_depth
    if count is None:
        count = available if available is not None else DEFAULT_TAYLOR_TERMS
    elif available is not None:
        count = min(count, available)
    return theta.taylor_coefficients(count)


def _snap_terminal(gamma: np.ndarray, tol: float) -> Tuple[np.ndarray, bool]:
    if classify_contraction(gamma, tol) in TERMINAL_TAGS:
        return nearest_isometry(gamma), True
    return gamma, False


def schur_step(theta: SchurFunction, count: Optional[int] = None, tol: Optional[float] = None) -> Tuple[np.ndarray, SchurFunction]:
    """
    One Schur step: Theta -> (Gamma_0, Theta_1).

    Theta(lambda) = Gamma_0 + D_{G*} Q Z (I + g* Z)^(-1) P* D_G with
    Z = lambda Theta_1(lambda). Theta_1 acts between the defect coordinate
    spaces of Gamma_0 and is returned as a truncated Taylor form.

    Args:
        theta: Schur function
        count: Taylor coefficients of theta to use (default: all known, or 32)
        tol: rank tolerance for the defect spaces; defaults to Config.TERMINATION_TOL

    Raises:
        DepthExhausted: if fewer than two coefficients are available
    """
    tol = Config.TERMINATION_TOL if tol is None else tol
    coefficients = _working_coefficients(theta, count)
    if len(coefficients) < 2 and theta.representation is not Representation.CONSTANT:
        raise DepthExhausted("A Schur step needs at least two Taylor coefficients")

    gamma, _ = _snap_terminal(coefficients[0], tol)
    frame = defect_frame(gamma, tol)
    if theta.representation is Representation.CONSTANT or frame.p == 0 or frame.q == 0:
        return gamma, SchurFunction.from_constant(np.zeros((frame.q, frame.p), dtype=complex))

    ys = [None] + [frame.left @ c @ frame.right for c in coefficients[1:]]
    zs = [None]
    for k in range(1, len(coefficients)):
        acc = ys[k].copy()
        for j in range(1, k):
            acc += ys[j] @ frame.gamma_star @ zs[k - j]
        zs.append(acc)
    return gamma, SchurFunction.from_taylor(zs[1:], exact=False)


def schur_iterate(theta: SchurFunction, n: int, count: Optional[int] = None, tol: Optional[float] = None) -> SchurFunction:
    """The n-th Schur iterate Theta_n as a Taylor form."""
    current = theta
    if count is not None:
        current = SchurFunction.from_taylor(_working_coefficients(theta, count), exact=False)
    for _ in range(n):
        _, current = schur_step(current, tol=tol)
    return current


def schur_parameters(
    theta: SchurFunction,
    N: int,
    tol: Optional[float] = None,
    diagnostics: Optional[List[str]] = None,
) -> ChoiceSequence:
    """
    Schur parameters Gamma_0 ... Gamma_{N-1} of Theta.

    Works on 2N + 4 Taylor coefficients (fewer if Theta only knows fewer).
    The sequence is terminated at the first parameter whose defect space
    or co-defect space vanishes at the termination tolerance; otherwise it
    is a zero-tail sequence of N parameters.

    Args:
        theta: Schur function
        N: number of parameters wanted (>= 1)
        tol: termination tolerance; defaults to Config.TERMINATION_TOL
        diagnostics: if given, borderline defect eigenvalues are appended here
    """
    tol = Config.TERMINATION_TOL if tol is None else tol
    if N < 1:
        raise DepthExhausted(f"At least one parameter must be requested, got N={N}")

    coefficients = _working_coefficients(theta, 2 * N + 4)
    current = SchurFunction.from_taylor(coefficients, exact=False)
    params = []
    tail = Tail.ZERO_TAIL
    for index in range(N):
        gamma = current.taylor_coefficients(1)[0]
        _note_borderline(gamma, tol, index, diagnostics)
        gamma, terminal = _snap_terminal(gamma, tol)
        params.append(gamma)
        if terminal:
            tail = Tail.TERMINATED
            break
        if index == N - 1:
            break
        if current.available_depth is not None and current.available_depth < 2:
            logger.warning(f"Taylor data exhausted after {len(params)} parameters")
            break
        _, current = schur_step(current, tol=tol)

    logger.info(f"Extracted {len(params)} Schur parameters ({tail.value})")
    return ChoiceSequence.from_parameters(params, tail, tol=tol)


def _note_borderline(gamma: np.ndarray, tol: float, index: int, diagnostics: Optional[List[str]]) -> None:
    values = borderline_defects(gamma, tol)
    if not values:
        return
    message = f"Gamma_{index}: defect eigenvalues {values} lie within a factor 100 of the tolerance {tol:.1e}"
    logger.warning(message)
    if diagnostics is not None:
        diagnostics.append(message)


def schur_parameters_from_realization(system: DiscreteSystem, N: int, tol: Optional[float] = None) -> ChoiceSequence:
    """
    Parameters read directly off a simple conservative realization.

    Gamma_n = R_n C A^(n-1) Pi_(n-1) B L_n^*, where L_n and R_n accumulate
    the inverted defect operators of the previous parameters and Pi_k
    projects onto ker D_(A^k).

    Raises:
        NotConservative: if U_tau is not unitary
        NotSimple: if the system has a unitary part
    """
    tol = Config.TERMINATION_TOL if tol is None else tol
    if N < 1:
        raise DepthExhausted(f"At least one parameter must be requested, got N={N}")
    if classify_system(system) is not SystemTag.CONSERVATIVE:
        raise NotConservative("The realization formula needs a conservative system")
    if not structural_tests(system).simple:
        raise NotSimple("The realization formula needs a simple system")

    gamma = system.D
    left = np.eye(system.input_dim, dtype=complex)
    right = np.eye(system.output_dim, dtype=complex)
    power = np.eye(system.state_dim, dtype=complex)
    params = []
    tail = Tail.ZERO_TAIL
    for index in range(N):
        gamma, terminal = _snap_terminal(gamma, tol)
        params.append(gamma)
        if terminal:
            tail = Tail.TERMINATED
            break
        if index == N - 1:
            break

        frame = defect_frame(gamma, tol)
        left = adjoint(frame.right) @ left
        right = frame.left @ right
        projector = defect_kernel(power).projector()
        gamma = right @ system.C @ power @ projector @ system.B @ adjoint(left)
        power = system.A @ power

    return ChoiceSequence.from_parameters(params, tail, tol=tol)


def compose_mobius(gamma, theta_next: SchurFunction, count: Optional[int] = None, tol: Optional[float] = None) -> SchurFunction:
    """
    Inverse of schur_step: rebuild Theta from Gamma_0 and Theta_1.

    Constant, realization and CMV inputs are composed at system level and
    stay exact. Taylor inputs give a Taylor form; it is a polynomial only
    when the input is one and P* Gamma* Q vanishes.

    Raises:
        ShapeMismatch: if Theta_1 does not map between the defect spaces of Gamma
    """
    tol = Config.TERMINATION_TOL if tol is None else tol
    gamma = as_cmatrix(gamma)
    frame = defect_frame(gamma, tol)
    if (theta_next.output_dim, theta_next.input_dim) != (frame.q, frame.p):
        raise ShapeMismatch(
            f"Next iterate is {theta_next.output_dim}x{theta_next.input_dim}, defect spaces are {frame.q}x{frame.p}"
        )

    if theta_next.representation is not Representation.TAYLOR:
        return SchurFunction.from_system(compose_system(frame, theta_next.to_realization()))

    known = len(theta_next.coefficients)
    polynomial = theta_next.exact and op_norm(frame.gamma_star) <= tol
    if count is None:
        count = known + 1 if (polynomial or not theta_next.exact) else max(known + 1, DEFAULT_TAYLOR_TERMS)
    zs = [None] + theta_next.taylor_coefficients(count - 1)
    ys = [None]
    for k in range(1, count):
        acc = zs[k].copy()
        for j in range(1, k):
            acc -= ys[j] @ frame.gamma_star @ zs[k - j]
        ys.append(acc)
    coefficients = [gamma] + [frame.out_map @ y @ frame.in_map for y in ys[1:]]
    return SchurFunction.from_taylor(coefficients, exact=polynomial)


def mobius_parameter(theta: SchurFunction, lam: complex, tol: Optional[float] = None) -> np.ndarray:
    """Z(lambda) = lambda Theta_1(lambda), computed from values of Theta; |Z| <= |lambda|."""
    tol = Config.TERMINATION_TOL if tol is None else tol
    gamma, _ = _snap_terminal(theta.value(0.0), tol)
    frame = defect_frame(gamma, tol)
    y = frame.left @ (theta.value(lam) - gamma) @ frame.right
    if frame.p == 0 or frame.q == 0:
        return np.zeros((frame.q, frame.p), dtype=complex)
    try:
        return np.linalg.solve(np.eye(frame.q) - y @ frame.gamma_star, y)
    except np.linalg.LinAlgError as e:
        raise SolveFailure(f"Mobius inversion is singular at lambda={lam}: {str(e)}") from e


def pure_part(theta: SchurFunction, tol: Optional[float] = None) -> Tuple[SchurFunction, np.ndarray]:
    """
    Split Theta into its pure part and a unitary constant.

    The unitary constant is Theta(0) restricted to ker D_{Theta(0)}; the
    pure part is Theta compressed to the orthogonal complements.
    """
    tol = Config.TERMINATION_TOL if tol is None else tol
    gamma = theta.value(0.0)
    kernel = defect_kernel(gamma, tol).basis
    co_kernel = defect_kernel(adjoint(gamma), tol).basis
    unitary_const = adjoint(co_kernel) @ gamma @ kernel
    rest, co_rest = orthogonal_complement(kernel), orthogonal_complement(co_kernel)

    if theta.representation is Representation.CONSTANT:
        pure = SchurFunction.from_constant(adjoint(co_rest) @ theta.constant @ rest)
    elif theta.representation is Representation.TAYLOR:
        pure = SchurFunction.from_taylor(
            [adjoint(co_rest) @ c @ rest for c in theta.coefficients], exact=theta.exact
        )
    else:
        system = theta.to_realization()
        pure = SchurFunction.from_system(
            DiscreteSystem(D=adjoint(co_rest) @ system.D @ rest, C=adjoint(co_rest) @ system.C, B=system.B @ rest, A=system.A)
        )
    return pure, unitary_const


def cara_schur_transform(F: CaratheodoryFunction, count: Optional[int] = None, tol: Optional[float] = None) -> SchurFunction:
    """
    Schur function Theta with Theta(conj(lambda))^* = (1/lambda)(F - I)(F + I)^(-1).

    With G = F - I the coefficients E_k of E = (G/lambda)(2I + G)^(-1) solve
    2 E_k + sum_{j<k} E_j G_{k-j} = G_{k+1}; Theta has coefficients E_k^*.

    Raises:
        NotNormalized: if F(0) is not the identity
    """
    F.require_normalized(tol)
    if count is None:
        count = F.available_depth if F.available_depth is not None else DEFAULT_TAYLOR_TERMS + 1
    f = F.taylor_coefficients(count)
    if len(f) < 2:
        raise DepthExhausted("The transform needs F_0 and F_1")

    es = []
    for k in range(len(f) - 1):
        acc = f[k + 1].copy()
        for j in range(k):
            acc -= es[j] @ f[k - j]
        es.append(acc / 2)
    return SchurFunction.from_taylor([adjoint(e) for e in es], exact=False)


def schur_to_caratheodory(theta: SchurFunction, count: Optional[int] = None) -> CaratheodoryFunction:
    """F = -I + 2 (I - lambda Theta~)^(-1), the inverse of cara_schur_transform."""
    if theta.input_dim != theta.output_dim:
        raise ShapeMismatch(f"Need a square Schur function, got {theta.output_dim}x{theta.input_dim}")
    es = [adjoint(c) for c in _working_coefficients(theta, count)]
    dim = theta.input_dim
    ws = [np.eye(dim, dtype=complex)]
    for k in range(1, len(es) + 1):
        acc = np.zeros((dim, dim), dtype=complex)
        for j in range(k):
            acc += ws[j] @ es[k - 1 - j]
        ws.append(acc)
    return CaratheodoryFunction.from_coefficients([np.eye(dim, dtype=complex)] + [2 * w for w in ws[1:]])

"""
Property-based verification suite.

A registry of named invariant checks runs over generated cases; every case
is one task on a thread pool and the per-invariant worst residual is
reported against its threshold.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from config import Config
from .choice_seq import ChoiceSequence, SequenceKind, Tail, adjoint_sequence, random_choice_sequence, rebase_sequence
from .cmv import CMVVariant, block_bandwidth_residual, build_cmv, intertwiner_check, truncate
from .dilations import (
    MatrixMeasure,
    characteristic_coincidence,
    dilation_check,
    naimark_dilation,
    uniqueness_bound,
    unitary_dilation,
)
from .discrete_system import energy_residual
from .functions import SchurFunction
from .linalg_core import (
    adjoint,
    defect,
    defect_subspace,
    haar_unitary,
    op_norm,
    random_contraction,
    unitarity_residual,
)
from .reports import ValidationReport
from .schur import mobius_parameter, schur_parameters, schur_parameters_from_realization
from .systems import defect_kernel_lattice, lattice_coherence

logger = logging.getLogger(__name__)

CheckFunction = Callable[[np.random.Generator], float]


def _seed(rng: np.random.Generator) -> int:
    return int(rng.integers(2**31))


def _square_sequence(rng: np.random.Generator, max_dim: int = 3, max_depth: int = 6) -> ChoiceSequence:
    dim = int(rng.integers(1, max_dim + 1))
    depth = int(rng.integers(1, max_depth + 1))
    kind = SequenceKind.PURE if rng.uniform() < 0.5 else SequenceKind.TERMINATE_UNITARY
    return random_choice_sequence(dim, dim, depth, seed=_seed(rng), kind=kind)


def _terminated_sequence(rng: np.random.Generator, max_dim: int = 2, max_depth: int = 3) -> ChoiceSequence:
    dim = int(rng.integers(1, max_dim + 1))
    depth = int(rng.integers(0, max_depth + 1))
    return random_choice_sequence(dim, dim, depth, seed=_seed(rng), kind=SequenceKind.TERMINATE_UNITARY)


def check_cmv_unitarity(rng):
    seq = _square_sequence(rng)
    return max(unitarity_residual(build_cmv(seq, variant=v).matrix) for v in CMVVariant)


def check_adjoint_laws(rng):
    report = intertwiner_check(_square_sequence(rng))
    return max(report.residuals["adjoint_cmv"], report.residuals["adjoint_truncation"])


def check_intertwiners(rng):
    report = intertwiner_check(_square_sequence(rng))
    return max(report.residuals["truncation_intertwiner"], report.residuals["cmv_intertwiner"])


def check_bandwidth(rng):
    seq = _square_sequence(rng)
    return max(block_bandwidth_residual(build_cmv(seq, variant=v)) for v in CMVVariant)


def check_truncation_norm(rng):
    return max(0.0, op_norm(truncate(build_cmv(_square_sequence(rng))).matrix) - 1.0)


def check_truncation_defects(rng):
    dim = int(rng.integers(1, 4))
    seq = random_choice_sequence(dim, dim, int(rng.integers(1, 5)), seed=_seed(rng))
    t0 = truncate(build_cmv(seq)).matrix
    gamma = seq.params[0]
    mismatch = abs(defect_subspace(adjoint(t0)).dim - defect_subspace(gamma).dim)
    mismatch += abs(defect_subspace(t0).dim - defect_subspace(adjoint(gamma)).dim)
    return float(mismatch)


def check_adjoint_involution(rng):
    seq = _square_sequence(rng)
    twice = adjoint_sequence(adjoint_sequence(seq))
    return max(float(np.max(np.abs(a - b), initial=0.0)) for a, b in zip(seq.params, twice.params))


def check_defect_intertwining(rng):
    rows, cols = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    t = random_contraction(rows, cols, rng, max_norm=1.0)
    return op_norm(t @ defect(t) - defect(adjoint(t)) @ t)


def check_schur_round_trip(rng):
    seq = _terminated_sequence(rng)
    recovered = schur_parameters(SchurFunction.from_cmv(seq), seq.length + 1)
    if recovered.tail is not Tail.TERMINATED or recovered.length != seq.length:
        return float("inf")
    return max(op_norm(a - b) for a, b in zip(seq.params, recovered.params))


def check_realization_oracle(rng):
    dim = int(rng.integers(1, 3))
    depth = int(rng.integers(1, 6 if dim == 1 else 3))
    seq = random_choice_sequence(dim, dim, depth, seed=_seed(rng), kind=SequenceKind.TERMINATE_UNITARY)
    system = build_cmv(seq).system
    system = system.change_state_basis(haar_unitary(system.state_dim, rng))
    N = seq.length + 1
    formula = schur_parameters_from_realization(system, N)
    oracle = schur_parameters(SchurFunction.from_system(system), N)
    if formula.length != oracle.length:
        return float("inf")
    return max(op_norm(a - b) for a, b in zip(formula.params, oracle.params))


def check_uniqueness_bound(rng):
    n = int(rng.integers(1, 4))
    first = random_choice_sequence(1, 1, n + 3, seed=_seed(rng))
    other = random_choice_sequence(1, 1, n + 3, seed=_seed(rng))
    second = ChoiceSequence.from_parameters(list(first.params[: n + 1]) + list(other.params[n + 1:]))
    theta, theta_hat = SchurFunction.from_cmv(first), SchurFunction.from_cmv(second)
    bound = uniqueness_bound(0.3, n)
    worst = 0.0
    for angle in np.linspace(0, 2 * np.pi, 16, endpoint=False):
        lam = 0.3 * np.exp(1j * angle)
        worst = max(worst, op_norm(theta.value(lam) - theta_hat.value(lam)) - bound)
    return max(worst, 0.0)


def check_schwarz_bound(rng):
    theta = SchurFunction.from_cmv(_square_sequence(rng, max_depth=4))
    lam = 0.9 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
    return max(0.0, op_norm(mobius_parameter(theta, lam)) - abs(lam))


def check_energy_balance(rng):
    system = build_cmv(_square_sequence(rng, max_depth=4)).system
    inputs = [random_contraction(system.input_dim, 1, rng).reshape(-1) for _ in range(10)]
    h0 = random_contraction(system.state_dim, 1, rng).reshape(-1)
    return energy_residual(system, inputs, h0)


def check_unitary_dilation(rng):
    dim = int(rng.integers(1, 5))
    t = random_contraction(dim, dim, rng)
    return dilation_check(t, unitary_dilation(t, 5), 5).max_residual


def check_dilation_minimality(rng):
    dim = int(rng.integers(1, 5))
    t = random_contraction(dim, dim, rng)
    report = dilation_check(t, unitary_dilation(t, 5), 5)
    return float(report.space_dim - report.minimality_rank)


def random_scalar_measure(rng: np.random.Generator, max_atoms: int = 5) -> MatrixMeasure:
    """Scalar measure with well separated atoms and weights bounded away from 0."""
    k = int(rng.integers(1, max_atoms + 1))
    offset = rng.uniform(0, 2 * np.pi)
    angles = offset + 2 * np.pi * (np.arange(k) + 0.4 * rng.uniform(size=k)) / k
    weights = rng.uniform(0.2, 1.0, size=k)
    weights /= weights.sum()
    return MatrixMeasure.from_atoms([(np.exp(1j * a), [[w]]) for a, w in zip(angles, weights)])


def check_naimark_moments(rng):
    _, report = naimark_dilation(random_scalar_measure(rng), powers=10)
    if report.max_power_checked < 10:
        return float("inf")
    return report.max_residual


def check_lattice_coherence(rng):
    size = int(rng.integers(2, 7))
    shift = np.eye(size, k=-1, dtype=complex)
    worst = 0.0
    for n in range(size + 1):
        if defect_kernel_lattice(shift, n, 0).dim != size - n:
            return float("inf")
    for n in range(3):
        for m in range(3):
            for k in range(2):
                for l in range(2):
                    if n + m + k + l <= size:
                        worst = max(worst, lattice_coherence(shift, n, m, k, l))
    return worst


def check_charfn_coincidence(rng):
    depth = int(rng.integers(1, 4))
    seq = random_choice_sequence(1, 1, depth, seed=_seed(rng), kind=SequenceKind.TERMINATE_UNITARY)
    return characteristic_coincidence(seq)


def check_basis_independence(rng):
    seq = _terminated_sequence(rng)
    rebased = rebase_sequence(seq, seed=_seed(rng))
    first, second = build_cmv(seq), build_cmv(rebased)
    values_gap = 0.0
    for lam in (0.0, 0.3, -0.5j, 0.2 + 0.4j):
        values_gap = max(values_gap, op_norm(first.system.transfer(lam) - second.system.transfer(lam)))
    s_first = np.linalg.svd(truncate(first).matrix, compute_uv=False)
    s_second = np.linalg.svd(truncate(second).matrix, compute_uv=False)
    if s_first.shape != s_second.shape:
        return float("inf")
    return max(values_gap, float(np.max(np.abs(s_first - s_second), initial=0.0)))


@dataclass
class InvariantSummary:
    name: str
    threshold: float
    max_residual: float = 0.0
    failures: int = 0
    errors: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0 and not self.errors

    def to_dict(self):
        return {
            "max_residual": self.max_residual,
            "threshold": self.threshold,
            "failures": self.failures,
            "passed": self.passed,
            "errors": list(self.errors),
        }


@dataclass
class SuiteReport:
    seed: int
    cases: int
    invariants: Dict[str, InvariantSummary]

    @property
    def passed(self) -> bool:
        return all(summary.passed for summary in self.invariants.values())

    def to_dict(self):
        return {
            "passed": self.passed,
            "seed": self.seed,
            "cases": self.cases,
            "invariants": {name: summary.to_dict() for name, summary in self.invariants.items()},
        }


class InvariantSuite:
    """Registry of named checks with their thresholds"""

    def __init__(self):
        self.checks: Dict[str, Tuple[CheckFunction, float]] = {}

    def register_check(self, name: str, check: CheckFunction, threshold: float) -> None:
        self.checks[name] = (check, threshold)

    def _run_case(self, seed: int, case: int) -> Dict[str, Tuple[float, Optional[str]]]:
        results = {}
        for index, (name, (check, _)) in enumerate(self.checks.items()):
            rng = np.random.default_rng([seed, case, index])
            try:
                results[name] = (float(check(rng)), None)
            except Exception as e:
                logger.error(f"Check {name} failed on case {case}: {str(e)}")
                results[name] = (float("inf"), f"case {case}: {type(e).__name__}: {str(e)}")
        return results

    def run(self, seed: int = 0, cases: int = 50, workers: Optional[int] = None) -> SuiteReport:
        """
        Run every check on ``cases`` generated cases.

        Each case is one task; results are deterministic for a given seed
        regardless of the worker count.
        """
        workers = Config.MAX_WORKERS if workers is None else workers
        summaries = {name: InvariantSummary(name, threshold) for name, (_, threshold) in self.checks.items()}
        logger.info(f"Running {len(self.checks)} invariants on {cases} cases with {workers} workers")

        with ThreadPoolExecutor(max_workers=workers) as executor:
            future_to_case = {executor.submit(self._run_case, seed, case): case for case in range(cases)}
            outcomes = {}
            for future in as_completed(future_to_case):
                outcomes[future_to_case[future]] = future.result()

        for case in range(cases):
            for name, (residual, error) in outcomes[case].items():
                summary = summaries[name]
                if error is not None:
                    summary.errors.append(error)
                    continue
                summary.max_residual = max(summary.max_residual, residual)
                if not residual <= summary.threshold:
                    summary.failures += 1
        return SuiteReport(seed=seed, cases=cases, invariants=summaries)


def default_suite() -> InvariantSuite:
    suite = InvariantSuite()
    suite.register_check("cmv_unitarity", check_cmv_unitarity, 1e-10)
    suite.register_check("adjoint_laws", check_adjoint_laws, 1e-12)
    suite.register_check("intertwiners", check_intertwiners, 1e-10)
    suite.register_check("block_bandwidth", check_bandwidth, 1e-14)
    suite.register_check("truncation_norm", check_truncation_norm, 1e-12)
    suite.register_check("truncation_defects", check_truncation_defects, 0.0)
    suite.register_check("adjoint_involution", check_adjoint_involution, 0.0)
    suite.register_check("defect_intertwining", check_defect_intertwining, 1e-10)
    suite.register_check("schur_round_trip", check_schur_round_trip, 1e-8)
    suite.register_check("realization_oracle", check_realization_oracle, 1e-8)
    suite.register_check("uniqueness_bound", check_uniqueness_bound, 0.0)
    suite.register_check("schwarz_bound", check_schwarz_bound, 1e-10)
    suite.register_check("energy_balance", check_energy_balance, 1e-10)
    suite.register_check("unitary_dilation", check_unitary_dilation, 1e-10)
    suite.register_check("dilation_minimality", check_dilation_minimality, 0.0)
    suite.register_check("naimark_moments", check_naimark_moments, 1e-9)
    suite.register_check("lattice_coherence", check_lattice_coherence, 1e-10)
    suite.register_check("charfn_coincidence", check_charfn_coincidence, 1e-8)
    suite.register_check("basis_independence", check_basis_independence, 1e-9)
    return suite


def check_sequence(seq: ChoiceSequence, depth: Optional[int] = None) -> ValidationReport:
    """The CMV invariants evaluated on one given sequence."""
    report = intertwiner_check(seq, depth)
    for variant in CMVVariant:
        cmv = build_cmv(seq, depth, variant)
        report.record(f"unitarity_{variant.value}", unitarity_residual(cmv.matrix), Config.RESIDUAL_TOL)
        report.record(f"bandwidth_{variant.value}", block_bandwidth_residual(cmv), 1e-14)
    return report

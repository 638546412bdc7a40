"""
Command-line surface of cmvkit.

Every subcommand reads JSON documents, runs one library operation, writes
the resulting artifact to ``-o`` and prints a JSON report on stdout.
"""

import argparse
import json
import logging
import sys
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from config import Config
from .choice_seq import validate
from .cmv import CMVVariant, build_cmv, intertwiner_check, truncate
from .dilations import caratheodory_match, dilation_check, naimark_dilation, cyclic_model, unitary_dilation
from .errors import CMVKitError, ShapeMismatch
from .functions import DEFAULT_TAYLOR_TERMS, SchurFunction
from .linalg_core import unitarity_residual
from .schur import schur_iterate, schur_parameters, schur_parameters_from_realization
from .serialization import (
    CMVModel,
    MatrixModel,
    MeasureModel,
    SequenceModel,
    SystemModel,
    TaylorModel,
    TruncatedModel,
    dump_document,
    load_document,
    read_subspace,
    write_document,
)
from .systems import characteristic_function
from .verify import check_sequence, default_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# Sample points for the Caratheodory comparison of cyclic-model
_MATCH_POINTS = (0.0, 0.3, -0.4j, 0.5 + 0.2j)


class JobConfig(BaseModel):
    """Validated settings of one CLI invocation."""
    command: str
    rank_tol: Optional[float] = Field(default=None, gt=0)
    residual_tol: Optional[float] = Field(default=None, gt=0)
    contraction_tol: Optional[float] = Field(default=None, gt=0)
    depth: Optional[int] = Field(default=None, ge=0)
    seed: Optional[int] = None
    input_paths: List[str] = Field(default_factory=list)
    output_path: Optional[str] = None


# A handler returns (artifact or None, report dict, passed)
Outcome = Tuple[Optional[BaseModel], Dict, bool]


def _matrix_report(matrix: np.ndarray) -> Dict:
    return MatrixModel.from_array(matrix).model_dump(mode="json")


def _load_function(args) -> SchurFunction:
    """Schur function from whichever of --taylor / --system / --seq was given."""
    if getattr(args, "taylor", None):
        return load_document(args.taylor, TaylorModel).to_function()
    if getattr(args, "system", None):
        return SchurFunction.from_system(load_document(args.system, SystemModel).to_system())
    if getattr(args, "seq", None):
        return SchurFunction.from_cmv(load_document(args.seq, SequenceModel).to_sequence(), args.depth)
    raise ShapeMismatch("No input function given")


def cmd_build_cmv(args) -> Outcome:
    seq = load_document(args.seq, SequenceModel).to_sequence()
    cmv = build_cmv(seq, args.depth, args.variant)
    report = intertwiner_check(seq, args.depth)
    report.record("unitarity", unitarity_residual(cmv.matrix), Config.RESIDUAL_TOL)
    result = {"size": cmv.size, "depth": cmv.depth, "closed": cmv.closed, **report.to_dict()}
    return CMVModel.from_cmv(cmv), result, report.passed


def cmd_truncate(args) -> Outcome:
    seq = load_document(args.seq, SequenceModel).to_sequence()
    variant = CMVVariant.U0 if args.variant == "t0" else CMVVariant.U0_TILDE
    truncated = truncate(build_cmv(seq, args.depth, variant))
    norm = float(np.linalg.norm(truncated.matrix, 2)) if truncated.matrix.size else 0.0
    passed = norm <= 1.0 + Config.CONTRACTION_TOL
    return TruncatedModel.from_truncated(truncated), {"passed": passed, "norm": norm}, passed


def cmd_schur_params(args) -> Outcome:
    diagnostics: List[str] = []
    if args.method == "realization":
        if not args.system:
            raise ShapeMismatch("--method realization needs --system")
        system = load_document(args.system, SystemModel).to_system()
        seq = schur_parameters_from_realization(system, args.N)
    else:
        seq = schur_parameters(_load_function(args), args.N, diagnostics=diagnostics)
    report = validate(seq)
    result = {
        "count": seq.length,
        "tail": seq.tail.value,
        "diagnostics": diagnostics,
        **report.to_dict(),
    }
    return SequenceModel.from_sequence(seq), result, report.passed


def cmd_schur_iterate(args) -> Outcome:
    theta = _load_function(args)
    iterate = schur_iterate(theta, args.n)
    available = iterate.available_depth
    terms = args.terms if available is None else min(args.terms, available)
    artifact = TaylorModel.from_function(iterate, terms)
    return artifact, {"passed": True, "exact": artifact.exact, "terms": len(artifact.coefficients)}, True


def cmd_transfer(args) -> Outcome:
    theta = _load_function(args)
    values = [{"point": [lam.real, lam.imag], "value": _matrix_report(theta.value(lam))} for lam in args.points]
    return None, {"passed": True, "values": values}, True


def cmd_charfn(args) -> Outcome:
    matrix = load_document(args.matrix, MatrixModel).to_array()
    theta = characteristic_function(matrix)
    seq = schur_parameters(theta, args.N)
    result = {
        "passed": True,
        "input_dim": theta.input_dim,
        "output_dim": theta.output_dim,
        "count": seq.length,
        "tail": seq.tail.value,
        "realization": SystemModel.from_system(theta.to_realization()).model_dump(mode="json"),
    }
    return SequenceModel.from_sequence(seq), result, True


def cmd_dilate(args) -> Outcome:
    matrix = load_document(args.matrix, MatrixModel).to_array()
    cmv = unitary_dilation(matrix, args.depth)
    report = dilation_check(matrix, cmv, args.powers if args.powers is not None else args.depth)
    return CMVModel.from_cmv(cmv), report.to_dict(), report.passed


def cmd_naimark(args) -> Outcome:
    measure = load_document(args.measure, MeasureModel).to_measure()
    measure.require_valid()
    cmv, report = naimark_dilation(measure, args.depth, args.powers)
    return CMVModel.from_cmv(cmv), report.to_dict(), report.passed


def cmd_cyclic_model(args) -> Outcome:
    unitary = load_document(args.matrix, MatrixModel).to_array()
    subspace = read_subspace(load_document(args.subspace, MatrixModel))
    seq, cmv = cyclic_model(unitary, subspace, args.depth)
    gap = caratheodory_match(unitary, subspace, cmv, _MATCH_POINTS)
    passed = gap <= 10 * Config.RESIDUAL_TOL
    result = {"passed": passed, "caratheodory_gap": gap, "size": cmv.size, "tail": seq.tail.value}
    return SequenceModel.from_sequence(seq), result, passed


def cmd_verify(args) -> Outcome:
    suite_report = default_suite().run(seed=args.seed, cases=args.cases, workers=args.workers)
    result = suite_report.to_dict()
    passed = suite_report.passed
    if args.seq:
        seq = load_document(args.seq, SequenceModel).to_sequence()
        sequence_report = validate(seq)
        if sequence_report.passed:
            sequence_report.merge(check_sequence(seq, args.depth))
        result["sequence"] = sequence_report.to_dict()
        passed = passed and sequence_report.passed
    result["passed"] = passed
    return None, result, passed


COMMANDS: Dict[str, Callable] = {
    "build-cmv": cmd_build_cmv,
    "truncate": cmd_truncate,
    "schur-params": cmd_schur_params,
    "schur-iterate": cmd_schur_iterate,
    "transfer": cmd_transfer,
    "charfn": cmd_charfn,
    "dilate": cmd_dilate,
    "naimark": cmd_naimark,
    "cyclic-model": cmd_cyclic_model,
    "verify": cmd_verify,
}


def _add_function_inputs(parser: argparse.ArgumentParser, with_seq: bool = False) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--taylor", help="Taylor coefficient document")
    group.add_argument("--system", help="system document (D, C, B, A)")
    if with_seq:
        group.add_argument("--seq", help="choice sequence document; uses the CMV transfer function")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmvkit", description="Block CMV matrices, Schur parameters and dilations")
    parser.add_argument("--rank-tol", type=float, help="rank tolerance (CMVKIT_TOL)")
    parser.add_argument("--residual-tol", type=float, help="residual pass threshold")
    parser.add_argument("--contraction-tol", type=float, help="contraction slack")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-cmv", help="assemble U0 or U0~")
    p.add_argument("--seq", required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--variant", choices=[v.value for v in CMVVariant], default="u0")

    p = sub.add_parser("truncate", help="assemble T0 or T0~")
    p.add_argument("--seq", required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--variant", choices=["t0", "t0_tilde"], default="t0")

    p = sub.add_parser("schur-params", help="Schur parameters of a function")
    _add_function_inputs(p)
    p.add_argument("-N", type=int, required=True)
    p.add_argument("--method", choices=["oracle", "realization"], default="oracle")

    p = sub.add_parser("schur-iterate", help="n-th Schur iterate as Taylor data")
    _add_function_inputs(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--terms", type=int, default=DEFAULT_TAYLOR_TERMS)

    p = sub.add_parser("transfer", help="evaluate a Schur function")
    _add_function_inputs(p, with_seq=True)
    p.add_argument("--depth", type=int)
    p.add_argument(
        "--points", type=complex, nargs="+", required=True,
        help="points of the open disk, e.g. 0.3 0.1+0.2j '(-0.5j)'",
    )

    p = sub.add_parser("charfn", help="characteristic function of a contraction")
    p.add_argument("--matrix", required=True)
    p.add_argument("-N", type=int, required=True)

    p = sub.add_parser("dilate", help="CMV unitary dilation of a contraction")
    p.add_argument("--matrix", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--powers", type=int)

    p = sub.add_parser("naimark", help="CMV Naimark dilation of a matrix measure")
    p.add_argument("--measure", required=True)
    p.add_argument("--depth", type=int)
    p.add_argument("--powers", type=int)

    p = sub.add_parser("cyclic-model", help="CMV model of a unitary with a cyclic subspace")
    p.add_argument("--matrix", required=True)
    p.add_argument("--subspace", required=True)
    p.add_argument("--depth", type=int)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--workers", type=int)
    p.add_argument("--seq", help="also check this choice sequence")
    p.add_argument("--depth", type=int)

    for subparser in sub.choices.values():
        subparser.add_argument("-o", "--output", help="artifact path")
    return parser


def _job_config(args) -> JobConfig:
    inputs = [
        getattr(args, name) for name in ("seq", "taylor", "system", "matrix", "measure", "subspace")
        if getattr(args, name, None)
    ]
    return JobConfig(
        command=args.command,
        rank_tol=args.rank_tol,
        residual_tol=args.residual_tol,
        contraction_tol=args.contraction_tol,
        depth=getattr(args, "depth", None),
        seed=getattr(args, "seed", None),
        input_paths=inputs,
        output_path=args.output,
    )


def run_command(argv: List[str]) -> int:
    """Parse ``argv``, run the subcommand and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        job = _job_config(args)
    except ValidationError as e:
        print(f"Invalid settings: {e}", file=sys.stderr)
        return EXIT_USAGE

    snapshot = {
        "RANK_TOL": Config.RANK_TOL,
        "RESIDUAL_TOL": Config.RESIDUAL_TOL,
        "CONTRACTION_TOL": Config.CONTRACTION_TOL,
        "LOG_LEVEL": Config.LOG_LEVEL,
    }
    try:
        Config.override(
            RANK_TOL=job.rank_tol,
            RESIDUAL_TOL=job.residual_tol,
            CONTRACTION_TOL=job.contraction_tol,
            LOG_LEVEL=args.log_level,
        )
        if args.log_level:
            logging.getLogger().setLevel(args.log_level)

        logger.info(f"Running {job.command} on {job.input_paths}")
        artifact, report, passed = COMMANDS[job.command](args)

        output = {"command": job.command, "report": report}
        if artifact is not None:
            if job.output_path:
                write_document(job.output_path, artifact)
                output["output"] = job.output_path
            else:
                output["result"] = artifact.model_dump(mode="json")
        print(dump_document(output))
        return EXIT_OK if passed else EXIT_FAILED

    except (OSError, ValidationError, json.JSONDecodeError) as e:
        logger.error(f"Cannot use input of {job.command}: {str(e)}")
        print(f"Input error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CMVKitError as e:
        logger.error(f"{job.command} failed: {type(e).__name__}: {str(e)}")
        print(dump_document({"command": job.command, "error": type(e).__name__, "message": str(e)}))
        return EXIT_FAILED
    finally:
        for key, value in snapshot.items():
            setattr(Config, key, value)

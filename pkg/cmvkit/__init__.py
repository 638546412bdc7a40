"""
cmvkit: block operator CMV matrices, the operator Schur algorithm and
unitary / Naimark dilations.
"""

from .errors import (
    CMVKitError,
    NotAContraction,
    NonSquare,
    TagMismatch,
    InvalidSequence,
    SemiInfiniteSequence,
    BadDims,
    OutsideDisk,
    SolveFailure,
    DepthExhausted,
    ShapeMismatch,
    NotNormalized,
    NotConservative,
    NotSimple,
    PowerBudgetExceeded,
    NotUnitary,
    NotCyclic,
)
from .linalg_core import (
    ContractionTag,
    DefectFrame,
    Subspace,
    classify_contraction,
    defect,
    defect_frame,
    defect_preimage,
    defect_subspace,
    pinv,
    random_contraction,
    unitarity_residual,
)
from .reports import ValidationReport
from .choice_seq import (
    ChoiceSequence,
    SequenceKind,
    Tail,
    adjoint_sequence,
    random_choice_sequence,
    rebase_sequence,
    validate,
)
from .discrete_system import DiscreteSystem, SystemTag, classify_system, energy_residual, simulate
from .cmv import (
    BlockCMV,
    CMVVariant,
    TruncatedCMV,
    TruncationVariant,
    block_bandwidth_residual,
    build_cmv,
    elementary_rotation,
    intertwiner_check,
    truncate,
)
from .functions import CaratheodoryFunction, SchurFunction
from .systems import (
    characteristic_function,
    defect_kernel_lattice,
    is_completely_nonunitary,
    lattice_coherence,
    omega_transform,
    realization_iterate,
    structural_tests,
)
from .schur import (
    cara_schur_transform,
    compose_mobius,
    mobius_parameter,
    pure_part,
    schur_iterate,
    schur_parameters,
    schur_parameters_from_realization,
    schur_step,
    schur_to_caratheodory,
)
from .dilations import (
    DilationReport,
    MatrixMeasure,
    characteristic_coincidence,
    contraction_model,
    cyclic_model,
    dilation_check,
    naimark_dilation,
    uniqueness_bound,
    unitary_dilation,
    verblunsky_from_measure,
)
from .verify import InvariantSuite, default_suite
from .cli import run_command

__all__ = [
    "CMVKitError",
    "NotAContraction",
    "NonSquare",
    "TagMismatch",
    "InvalidSequence",
    "SemiInfiniteSequence",
    "BadDims",
    "OutsideDisk",
    "SolveFailure",
    "DepthExhausted",
    "ShapeMismatch",
    "NotNormalized",
    "NotConservative",
    "NotSimple",
    "PowerBudgetExceeded",
    "NotUnitary",
    "NotCyclic",
    "ContractionTag",
    "DefectFrame",
    "Subspace",
    "classify_contraction",
    "defect",
    "defect_frame",
    "defect_preimage",
    "defect_subspace",
    "pinv",
    "random_contraction",
    "unitarity_residual",
    "ValidationReport",
    "ChoiceSequence",
    "SequenceKind",
    "Tail",
    "adjoint_sequence",
    "random_choice_sequence",
    "rebase_sequence",
    "validate",
    "DiscreteSystem",
    "SystemTag",
    "classify_system",
    "energy_residual",
    "simulate",
    "BlockCMV",
    "CMVVariant",
    "TruncatedCMV",
    "TruncationVariant",
    "block_bandwidth_residual",
    "build_cmv",
    "elementary_rotation",
    "intertwiner_check",
    "truncate",
    "CaratheodoryFunction",
    "SchurFunction",
    "characteristic_function",
    "defect_kernel_lattice",
    "is_completely_nonunitary",
    "lattice_coherence",
    "omega_transform",
    "realization_iterate",
    "structural_tests",
    "cara_schur_transform",
    "compose_mobius",
    "mobius_parameter",
    "pure_part",
    "schur_iterate",
    "schur_parameters",
    "schur_parameters_from_realization",
    "schur_step",
    "schur_to_caratheodory",
    "DilationReport",
    "MatrixMeasure",
    "characteristic_coincidence",
    "contraction_model",
    "cyclic_model",
    "dilation_check",
    "naimark_dilation",
    "uniqueness_bound",
    "unitary_dilation",
    "verblunsky_from_measure",
    "InvariantSuite",
    "default_suite",
    "run_command",
]

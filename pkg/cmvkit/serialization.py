"""
JSON document schemas (pydantic) and their conversion to library objects.
"""

import json
import logging
import math
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Type, TypeVar

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .choice_seq import ChoiceSequence
from .cmv import BlockCMV, TruncatedCMV
from .dilations import MatrixMeasure
from .discrete_system import DiscreteSystem
from .functions import SchurFunction
from .linalg_core import Subspace, as_cmatrix

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


class MatrixModel(BaseModel):
    """Row-major complex matrix: data holds [re, im] pairs."""
    rows: int = Field(ge=0)
    cols: int = Field(ge=0)
    data: List[Tuple[float, float]]

    @model_validator(mode="after")
    def check_entries(self) -> "MatrixModel":
        if len(self.data) != self.rows * self.cols:
            raise ValueError(f"expected {self.rows * self.cols} entries, got {len(self.data)}")
        for re, im in self.data:
            if not (math.isfinite(re) and math.isfinite(im)):
                raise ValueError("matrix entries must be finite")
        return self

    def to_array(self) -> np.ndarray:
        values = np.array([complex(re, im) for re, im in self.data], dtype=complex)
        return values.reshape(self.rows, self.cols)

    @classmethod
    def from_array(cls, matrix) -> "MatrixModel":
        matrix = as_cmatrix(matrix)
        return cls(
            rows=matrix.shape[0],
            cols=matrix.shape[1],
            data=[(float(z.real), float(z.imag)) for z in matrix.ravel()],
        )


class SequenceModel(BaseModel):
    input_dim: int = Field(ge=0)
    output_dim: int = Field(ge=0)
    tail: Literal["zero_tail", "terminated"] = "zero_tail"
    parameters: List[MatrixModel] = Field(min_length=1)

    @model_validator(mode="after")
    def check_leading_shape(self) -> "SequenceModel":
        first = self.parameters[0]
        if (first.rows, first.cols) != (self.output_dim, self.input_dim):
            raise ValueError(
                f"Gamma_0 is {first.rows}x{first.cols}, header says {self.output_dim}x{self.input_dim}"
            )
        return self

    def to_sequence(self, tol: Optional[float] = None) -> ChoiceSequence:
        """Bases are recomputed; problems are left for validate() to report."""
        return ChoiceSequence.from_parameters(
            [p.to_array() for p in self.parameters], self.tail, tol=tol, strict=False
        )

    @classmethod
    def from_sequence(cls, seq: ChoiceSequence) -> "SequenceModel":
        return cls(
            input_dim=seq.input_dim,
            output_dim=seq.output_dim,
            tail=seq.tail.value,
            parameters=[MatrixModel.from_array(p) for p in seq.params],
        )


class SystemModel(BaseModel):
    D: MatrixModel
    C: MatrixModel
    B: MatrixModel
    A: MatrixModel

    def to_system(self) -> DiscreteSystem:
        return DiscreteSystem(D=self.D.to_array(), C=self.C.to_array(), B=self.B.to_array(), A=self.A.to_array())

    @classmethod
    def from_system(cls, system: DiscreteSystem) -> "SystemModel":
        return cls(
            D=MatrixModel.from_array(system.D),
            C=MatrixModel.from_array(system.C),
            B=MatrixModel.from_array(system.B),
            A=MatrixModel.from_array(system.A),
        )


class AtomModel(BaseModel):
    zeta: Tuple[float, float]
    weight: MatrixModel


class MeasureModel(BaseModel):
    dim: int = Field(ge=1)
    atoms: List[AtomModel] = Field(min_length=1)

    def to_measure(self) -> MatrixMeasure:
        return MatrixMeasure.from_atoms([(complex(*atom.zeta), atom.weight.to_array()) for atom in self.atoms])

    @classmethod
    def from_measure(cls, measure: MatrixMeasure) -> "MeasureModel":
        return cls(
            dim=measure.dim,
            atoms=[
                AtomModel(zeta=(zeta.real, zeta.imag), weight=MatrixModel.from_array(weight))
                for zeta, weight in measure.atoms
            ],
        )


class TaylorModel(BaseModel):
    input_dim: int = Field(ge=0)
    output_dim: int = Field(ge=0)
    coefficients: List[MatrixModel] = Field(min_length=1)
    exact: bool = True

    def to_function(self) -> SchurFunction:
        return SchurFunction.from_taylor([c.to_array() for c in self.coefficients], exact=self.exact)

    @classmethod
    def from_function(cls, theta: SchurFunction, count: Optional[int] = None) -> "TaylorModel":
        available = theta.available_depth
        if count is None:
            count = available if available is not None else len(theta.coefficients) or 1
        coefficients = theta.taylor_coefficients(count)
        return cls(
            input_dim=theta.input_dim,
            output_dim=theta.output_dim,
            coefficients=[MatrixModel.from_array(c) for c in coefficients],
            exact=theta.exact and available is None,
        )


class CMVModel(BaseModel):
    variant: str
    depth: int
    closed: bool
    block_layout: List[Tuple[int, int]]
    matrix: MatrixModel

    @classmethod
    def from_cmv(cls, cmv: BlockCMV) -> "CMVModel":
        return cls(
            variant=cmv.variant.value,
            depth=cmv.depth,
            closed=cmv.closed,
            block_layout=[tuple(block) for block in cmv.block_layout],
            matrix=MatrixModel.from_array(cmv.matrix),
        )


class TruncatedModel(BaseModel):
    variant: str
    matrix: MatrixModel

    @classmethod
    def from_truncated(cls, truncated: TruncatedCMV) -> "TruncatedModel":
        return cls(variant=truncated.variant.value, matrix=MatrixModel.from_array(truncated.matrix))


def read_subspace(model: MatrixModel) -> Subspace:
    """Columns of the stored matrix span the subspace; orthonormalized on load."""
    return Subspace.from_spanning(model.to_array())


def load_document(path, model: Type[ModelT]) -> ModelT:
    """
    Read and validate a JSON document.

    Raises:
        OSError: if the file cannot be read
        pydantic.ValidationError: if the content does not match ``model``
    """
    text = Path(path).read_text()
    logger.debug(f"Loading {model.__name__} from {path}")
    return model.model_validate_json(text)


def _finite_json(value):
    """Replace NaN and infinite floats by None so the output stays strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _finite_json(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_json(item) for item in value]
    return value


def dump_document(document) -> str:
    """
    JSON text of a model (or plain dict); floats use the shortest round-trip repr.

    Non-finite residuals in failing reports are written as null.
    """
    if isinstance(document, BaseModel):
        document = document.model_dump(mode="json")
    return json.dumps(_finite_json(document), indent=2, allow_nan=False)


def write_document(path, document) -> None:
    Path(path).write_text(dump_document(document))
    logger.info(f"Wrote {path}")

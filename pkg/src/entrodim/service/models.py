"""Pydantic request/response models for the service and CLI wire format."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class SystemModel(BaseModel):
    alphabet: int
    transitions: list[list[int]]
    sided: Literal["one", "two"] = "one"


class CylinderModel(BaseModel):
    word: list[int]
    anchor: int = 0


class CylinderSetModel(BaseModel):
    cylinders: list[CylinderModel]


class GaugeSegmentModel(BaseModel):
    start: int
    gauge: "GaugeModel"


class GaugeModel(BaseModel):
    type: Literal["exp", "table", "piecewise"]
    s: Optional[float] = None
    values: Optional[list[float]] = None
    tail_rate: Optional[float] = None
    segments: Optional[list[GaugeSegmentModel]] = None


GaugeSegmentModel.model_rebuild()


class BallModel(BaseModel):
    word: list[int]
    order: int


class BallFamilyModel(BaseModel):
    balls: list[BallModel]
    epsilon: float = 0.5


class ScheduleRow(BaseModel):
    N: int
    D: int
    s_star: float
    delta: Optional[float] = None


class EntropyRequest(BaseModel):
    system: SystemModel
    zset: Optional[CylinderSetModel] = None
    kind: Literal["bowen", "packing"] = "bowen"
    depth: Optional[int] = None
    schedule: Optional[list[tuple[int, int]]] = None
    tol: float = 1e-4


class EntropyResponse(BaseModel):
    estimate: float
    uncertainty: float
    kind: str
    table: list[ScheduleRow]
    config: dict
    version: str


class CoverRequest(BaseModel):
    system: SystemModel
    zset: CylinderSetModel
    gauge: GaugeModel
    n_min: int = Field(ge=1)
    depth: int = Field(ge=1)
    witness: bool = True


class CoverResponse(BaseModel):
    value: float
    N: int
    depth: int
    epsilon: float
    witness: Optional[BallFamilyModel]
    config: dict
    version: str


class PackRequest(BaseModel):
    system: SystemModel
    zset: CylinderSetModel
    s: float
    n_min: int = Field(ge=1)
    depth: int = Field(ge=1)
    witness: bool = True
    parts: Optional[int] = None     # set to compute the partition outer value


class PackResponse(BaseModel):
    value: float
    N: int
    depth: int
    epsilon: float
    outer_value: Optional[float] = None
    witness: Optional[BallFamilyModel]
    config: dict
    version: str


class VitaliRequest(BaseModel):
    family: BallFamilyModel


class VitaliResponse(BaseModel):
    selected: BallFamilyModel
    triples_cover: bool
    config: dict
    version: str


class FrostmanRequest(BaseModel):
    system: SystemModel
    kset: CylinderSetModel
    gauge: GaugeModel
    n_min: int = Field(ge=1)
    depth: int = Field(ge=1)


class AtomWeight(BaseModel):
    word: list[int]
    weight: float


class SandwichModel(BaseModel):
    lower: float
    W: float
    upper: float
    holds: bool


class FrostmanResponse(BaseModel):
    c: float
    depth: int
    atoms: list[AtomWeight]
    sandwich: SandwichModel
    constraints_ok: bool
    config: dict
    version: str


class GaugeOpRequest(BaseModel):
    op: Literal["dominates", "cutpoints", "stitch", "search"]
    gauges: list[GaugeModel]
    horizon: int = 200
    tol: float = 1e-3
    cuts: Optional[list[int]] = None
    # search extras
    system: Optional[SystemModel] = None
    kset: Optional[CylinderSetModel] = None
    n_min: int = 2
    depth: int = 8
    threshold: float = 0.01


class LogisticRequest(BaseModel):
    op: Literal["entropy", "scan", "interval", "laps", "fe_proxy"]
    a: Optional[float] = None
    grid: Optional[list[float]] = None
    n_max: int = 14
    slack: float = 0.02
    sub: Optional[tuple[float, float]] = None
    n: int = 14
    epsilon: float = 1.0 / 256.0


class PlateauSpecModel(BaseModel):
    u: list[float]
    v: list[float]
    e_samples: list[float]
    audit_orders: list[int] = [1]


class SkewRequest(BaseModel):
    spec: Optional[PlateauSpecModel] = None     # None: default truncation
    slices: list[int] = [2, 3, 4]
    lowers: bool = True
    retarget: bool = True
    n_max: int = 14
    n: int = 14
    epsilon: float = 1.0 / 256.0


class DimRequest(BaseModel):
    op: Literal["hausdorff", "doubling", "sqrt"]
    zset: Optional[CylinderSetModel] = None      # binary words
    system: Optional[SystemModel] = None         # for sqrt
    depth: int = 16
    schedule: Optional[list[int]] = None
    tol: float = 1e-4


class MeasureModel(BaseModel):
    kind: Literal["bernoulli", "parry", "matrix"]
    probs: Optional[list[float]] = None
    system: Optional[SystemModel] = None
    matrix: Optional[list[list[float]]] = None
    stationary: Optional[list[float]] = None


class LocalentRequest(BaseModel):
    op: Literal["measure_entropy", "local", "variational", "restrict",
                "dimension", "slices"]
    measure: Optional[MeasureModel] = None
    candidates: Optional[list[MeasureModel]] = None
    system: Optional[SystemModel] = None
    zset: Optional[CylinderSetModel] = None
    yset: Optional[CylinderSetModel] = None
    parts: Optional[list[CylinderSetModel]] = None
    word: Optional[list[int]] = None
    window: tuple[int, int] = (1000, 2000)
    samples: int = 500
    seed: int = 0
    depth: int = 16
    mixture_terms: int = 4
    quantiles: tuple[float, float] = (0.05, 0.95)


class AuditRequest(BaseModel):
    suite: Literal["vitali", "sandwich", "duality", "order", "all"] = "all"
    count: int = 50
    seed: int = 0
    depth: int = 8


class AuditResponse(BaseModel):
    passed: bool
    suites: dict
    config: dict
    version: str


class OpResponse(BaseModel):
    """Envelope for the heterogeneous report-style operations."""

    result: dict
    config: dict
    version: str

"""Data models and state definitions for the spline-weights predictor."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, TypedDict

import numpy as np

from errors import DimensionError, NumericalError

PACKAGE_VERSION = "1.0.0"

# Admissible cost exponents, in scan order.
Q_VALUES: Tuple[float, ...] = (1.0, 2.0, math.inf)


def q_label(q: float) -> str:
    """Report label of a cost exponent: "1", "2" or "inf"."""
    if math.isinf(q):
        return "inf"
    return str(int(q))


def parse_q(value: Any) -> float:
    text = str(value).strip().lower()
    if text in ("inf", "+inf", "infinity", "∞"):
        return math.inf
    q = float(text)
    if q not in (1.0, 2.0):
        raise ValueError(f"q must be one of 1, 2, inf (got {value!r})")
    return q


def _frozen(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


# --- Series and splines --- #

@dataclass(frozen=True, eq=False)
class SeriesData:
    """Observed series s(0..n); index 0 is calendar year `start_year`."""
    values: np.ndarray
    start_year: int = 0

    def __post_init__(self):
        arr = _frozen(self.values)
        if arr.ndim != 1 or arr.size < 2:
            raise DimensionError(f"series needs at least 2 values (got shape {arr.shape})")
        if not np.all(np.isfinite(arr)):
            raise NumericalError("series values must be finite")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "start_year", int(self.start_year))

    @property
    def n(self) -> int:
        return self.values.size - 1

    def prefix(self, l: int) -> np.ndarray:
        """s(0..l), the only data a level-l predictor may see."""
        return self.values[: l + 1]

    def year(self, index: int) -> int:
        return self.start_year + index


@dataclass(frozen=True, eq=False)
class PiecewiseCubic:
    """Natural cubic spline on knots 0..l.

    p, q, u hold the value and first two derivatives at each knot; v holds the
    third derivative on each interval [i, i+1).
    """
    p: np.ndarray
    q: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in ("p", "q", "u", "v"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        l = self.p.size - 1
        if l < 1 or self.q.size != l + 1 or self.u.size != l + 1 or self.v.size != l:
            raise DimensionError("inconsistent spline coefficient lengths")

    @property
    def level(self) -> int:
        return self.p.size - 1


# --- Parametrizations --- #

class FamilyId(str, Enum):
    """The six parametrization families; values are the CLI tags."""
    M = "M"
    M_T = "Mt"
    M_INV = "Minv"
    M_INV_T = "Minvt"
    S = "S"
    S_INV = "Sinv"

    @classmethod
    def from_tag(cls, tag: str) -> "FamilyId":
        text = str(tag).strip()
        for member in cls:
            if text in (member.value, member.name):
                return member
        raise ValueError(f"unknown family tag {tag!r}")


ALL_FAMILIES: Tuple[FamilyId, ...] = tuple(FamilyId)


@dataclass(frozen=True, eq=False)
class EnergyMatrixPair:
    level: int
    M: np.ndarray
    S: np.ndarray


@dataclass(frozen=True, eq=False)
class ParamFamily:
    """Θ^(1)..Θ^(n) of one family, with the inverses B^(l) built alongside."""
    id: FamilyId
    matrices: Tuple[np.ndarray, ...]
    bases: Tuple[np.ndarray, ...]

    @property
    def n(self) -> int:
        return len(self.matrices)

    def matrix(self, l: int) -> np.ndarray:
        if not 1 <= l <= self.n:
            raise DimensionError(f"family {self.id.value} has levels 1..{self.n}, not {l}")
        return self.matrices[l - 1]

    def basis(self, l: int) -> np.ndarray:
        if not 1 <= l <= self.n:
            raise DimensionError(f"family {self.id.value} has levels 1..{self.n}, not {l}")
        return self.bases[l - 1]


@dataclass(frozen=True, eq=False)
class ParamMatrix:
    """An analyzed Θ^(l): basis B^(l), trend products θ_j·1 and the index set I(l).

    `normalized_rows[k]` is θ_j/(θ_j·1) for j = index_set[k].
    """
    level: int
    theta: np.ndarray
    basis: np.ndarray
    trend_products: np.ndarray
    index_set: Tuple[int, ...]
    normalized_rows: np.ndarray
    row_norms: np.ndarray
    threshold: np.ndarray
    near_threshold: Tuple[int, ...] = ()
    family: Optional[str] = None

    @property
    def card(self) -> int:
        return len(self.index_set)

    def position(self, j: int) -> int:
        return self.index_set.index(j)


@dataclass(frozen=True)
class RowSource:
    """Provenance of a weight row: family, contributing rows j and criterion label."""
    family: Optional[str]
    rows: Tuple[int, ...]
    criterion: str


@dataclass(frozen=True, eq=False)
class WeightRow:
    """Conservative row at level l (entries sum to 1, signs unrestricted)."""
    level: int
    weights: np.ndarray
    source: RowSource

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.weights.size != self.level + 1:
            raise DimensionError(
                f"weight row at level {self.level} needs {self.level + 1} entries, got {self.weights.size}"
            )

    def apply(self, s: np.ndarray) -> float:
        """Weighted mean m₁ = Σ w_i s_i."""
        s = np.asarray(s, dtype=float)
        if s.shape != self.weights.shape:
            raise DimensionError(f"weights have {self.weights.size} entries, data has {s.size}")
        return float(self.weights @ s)

    @property
    def total(self) -> float:
        return float(self.weights.sum())


# --- Criteria --- #

class CriterionKind(str, Enum):
    U = "U"
    MEAN = "MEAN"
    TAIL1 = "TAIL1"
    TAIL2 = "TAIL2"
    MAXCOR = "MAXCOR"
    NEAR_U = "NEAR_U"
    VAR = "VAR"
    FD = "FD"


_USES_U = {CriterionKind.U, CriterionKind.TAIL1, CriterionKind.TAIL2, CriterionKind.VAR, CriterionKind.FD}


@dataclass(frozen=True)
class CriterionId:
    kind: CriterionKind
    u: Optional[int] = None
    v: Optional[int] = None
    q1: Optional[float] = None

    def __post_init__(self):
        kind = CriterionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if (self.u is not None) != (kind in _USES_U):
            raise ValueError(f"criterion {kind.value}: u given={self.u is not None}, required={kind in _USES_U}")
        if (self.v is not None) != (kind is CriterionKind.FD):
            raise ValueError(f"criterion {kind.value}: v is only used by FD")
        if (self.q1 is not None) != (kind is CriterionKind.NEAR_U):
            raise ValueError(f"criterion {kind.value}: q1 is only used by NEAR_U")
        if self.u is not None and self.u < 0:
            raise ValueError("u must be >= 0")
        if self.v is not None and self.v < 0:
            raise ValueError("v must be >= 0")
        if self.q1 is not None:
            object.__setattr__(self, "q1", parse_q(self.q1))

    @property
    def label(self) -> str:
        names = {
            CriterionKind.U: "S_u",
            CriterionKind.MEAN: "S_mean",
            CriterionKind.TAIL1: "S_u_tail1",
            CriterionKind.TAIL2: "S_u_tail2",
            CriterionKind.MAXCOR: "S_maxcor",
            CriterionKind.NEAR_U: "S_q_nearU",
            CriterionKind.VAR: "S_u_var",
            CriterionKind.FD: "S_uv_fd",
        }
        params = self.hyperparameters()
        if not params:
            return names[self.kind]
        inner = ",".join(f"{k}={v}" for k, v in params.items())
        return f"{names[self.kind]}({inner})"

    def hyperparameters(self) -> Dict[str, Any]:
        params: Dict[str, Any] = {}
        if self.u is not None:
            params["u"] = self.u
        if self.v is not None:
            params["v"] = self.v
        if self.q1 is not None:
            params["q1"] = q_label(self.q1)
        return params

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "label": self.label,
            "u": self.u,
            "v": self.v,
            "q1": q_label(self.q1) if self.q1 is not None else None,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CriterionId":
        q1 = data.get("q1")
        return cls(
            kind=CriterionKind(data["kind"]),
            u=data.get("u"),
            v=data.get("v"),
            q1=parse_q(q1) if q1 is not None else None,
        )


@dataclass(frozen=True)
class WeightedStats:
    mean: float
    variance: float


# --- Tournament --- #

@dataclass(frozen=True, eq=False)
class PredictorTrace:
    """Predictions of s(l+1) from levels L..n-1 of one (family, criterion)."""
    levels: np.ndarray
    predictions: np.ndarray
    criterion: CriterionId
    family: Optional[FamilyId] = None

    def __post_init__(self):
        object.__setattr__(self, "levels", np.array(self.levels, dtype=int))
        object.__setattr__(self, "predictions", _frozen(self.predictions))
        if self.levels.shape != self.predictions.shape:
            raise DimensionError("trace levels and predictions differ in length")


@dataclass(frozen=True)
class CostReport:
    q: float
    lag: int
    value: float


@dataclass(frozen=True, eq=False)
class ScoredCandidate:
    trace: PredictorTrace
    cost: CostReport

    @property
    def criterion(self) -> CriterionId:
        return self.trace.criterion


class StageRecord(TypedDict):
    stage: int
    challenger: str
    challenger_cost: float
    winner: str
    winner_cost: float


class CascadeState(TypedDict):
    """Graph state threaded through the S₁..S₇ stage nodes."""
    family: str
    q: float
    lag: int
    incumbent: Optional[ScoredCandidate]
    challenger: Optional[ScoredCandidate]
    stage: int
    stage_history: List[StageRecord]
    stage_winners: List[ScoredCandidate]


@dataclass(frozen=True, eq=False)
class TournamentResult:
    """Winner for one q: family, criterion, cost and the resulting predictions."""
    q: float
    lag: int
    family: FamilyId
    winner: ScoredCandidate
    criterion_cost: float
    stages: Tuple[StageRecord, ...]
    family_costs: Dict[str, float]
    backtest_prediction: float
    true_value: float
    forecast: float
    final_weights: WeightRow

    @property
    def criterion(self) -> CriterionId:
        return self.winner.criterion

    @property
    def cost(self) -> CostReport:
        return self.winner.cost


# --- Run configuration --- #

class RunConfig(TypedDict, total=False):
    input: str
    preset: Optional[str]
    lag: int
    q: List[float]
    families: List[str]
    tol_rel: float
    format: str
    workers: int
    verbose: bool
    full_precision: bool
    output: Optional[str]
    output_dir: str
    emit_weights: Optional[str]
    emit_basis: Optional[int]
    emit_spline: Optional[str]
    spline_resolution: int
    svg: bool


def make_initial_cascade_state(family: FamilyId, q: float, lag: int) -> CascadeState:
    return CascadeState(
        family=family.value,
        q=q,
        lag=lag,
        incumbent=None,
        challenger=None,
        stage=0,
        stage_history=[],
        stage_winners=[],
    )


# Stage number -> challenger kind, in cascade order.
CASCADE_CHALLENGERS: Tuple[CriterionKind, ...] = (
    CriterionKind.U,
    CriterionKind.TAIL1,
    CriterionKind.TAIL2,
    CriterionKind.MAXCOR,
    CriterionKind.NEAR_U,
    CriterionKind.VAR,
    CriterionKind.FD,
)

RUN_DEFAULTS: RunConfig = RunConfig(
    lag=4,
    q=list(Q_VALUES),
    families=[f.value for f in ALL_FAMILIES],
    tol_rel=1e-10,
    format="json",
    workers=1,
    verbose=False,
    full_precision=False,
    output=None,
    output_dir=".",
    emit_weights=None,
    emit_basis=None,
    emit_spline=None,
    spline_resolution=10,
    svg=False,
)

"""Revealed comparative advantage, development stages, transition indicator
matrices, and relatedness densities."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .freq_model import ProximityMatrix
from .presence import ContributionMatrix, TimeWindow


class Stage(enum.Enum):
    INACTIVE = "0"
    NASCENT = "N"
    INTERMEDIATE = "I"
    DEVELOPED = "D"


ACTIVE_STAGES = frozenset({Stage.NASCENT, Stage.INTERMEDIATE, Stage.DEVELOPED})


class TransitionKind(enum.Enum):
    ZERO_TO_ACTIVE = "0A"
    NASCENT_TO_DEVELOPED = "ND"
    INTERMEDIATE_TO_DEVELOPED = "ID"


@dataclass
class RcaMatrix:
    values: np.ndarray  # entity x field, dense
    entity_ids: list[str]
    field_ids: list[str]
    window: TimeWindow

    @property
    def entity_index(self):
        return {e: i for i, e in enumerate(self.entity_ids)}


@dataclass
class IndicatorMatrix:
    values: np.ndarray  # entity x field, binary
    entity_ids: list[str]
    field_ids: list[str]
    kind: TransitionKind


@dataclass
class DensityMatrix:
    values: np.ndarray  # entity x field, in [0, 1]
    entity_ids: list[str]
    field_ids: list[str]


def rca(x: ContributionMatrix) -> RcaMatrix:
    """Balassa index: the entity's share of its own output in f over the
    global share of f. Zero-mass entities yield all-zero rows."""
    dense = np.asarray(x.values.todense(), dtype=np.float64)
    total = dense.sum()
    if total <= 0:
        raise ConfigError("total corpus mass is zero")
    row_sums = dense.sum(axis=1, keepdims=True)
    field_share = dense.sum(axis=0) / total  # global share per field
    out = np.zeros_like(dense)
    nz_rows = row_sums[:, 0] > 0
    nz_fields = field_share > 0
    out[np.ix_(nz_rows, nz_fields)] = (
        dense[np.ix_(nz_rows, nz_fields)] / row_sums[nz_rows]
    ) / field_share[nz_fields]
    return RcaMatrix(
        values=out,
        entity_ids=list(x.entity_ids),
        field_ids=list(x.field_ids),
        window=x.window,
    )


def classify_stage(rca_value: float) -> Stage:
    if rca_value < 0:
        raise ValueError(f"RCA must be non-negative, got {rca_value}")
    if rca_value == 0:
        return Stage.INACTIVE
    if rca_value < 0.5:
        return Stage.NASCENT
    if rca_value < 1.0:
        return Stage.INTERMEDIATE
    return Stage.DEVELOPED


def stage_matrix(r: RcaMatrix) -> np.ndarray:
    """Entity x field array of single-letter stage codes."""
    v = r.values
    out = np.full(v.shape, Stage.INACTIVE.value, dtype="U1")
    out[(v > 0) & (v < 0.5)] = Stage.NASCENT.value
    out[(v >= 0.5) & (v < 1.0)] = Stage.INTERMEDIATE.value
    out[v >= 1.0] = Stage.DEVELOPED.value
    return out


def indicator(r: RcaMatrix, kind: TransitionKind) -> IndicatorMatrix:
    """U_sf = 1[RCA > 0] for 0->A, 1[RCA > 1] for transitions to Developed."""
    if kind is TransitionKind.ZERO_TO_ACTIVE:
        u = (r.values > 0).astype(np.int8)
    else:
        u = (r.values > 1).astype(np.int8)
    return IndicatorMatrix(
        values=u, entity_ids=list(r.entity_ids), field_ids=list(r.field_ids), kind=kind
    )


def density(u: IndicatorMatrix, phi: ProximityMatrix) -> DensityMatrix:
    """omega_sf = sum_f' U_sf' phi_ff' / sum_f' phi_ff'.

    The sum over f' includes f' = f, per the definition; rows of phi with
    zero total weight (isolated fields) yield omega = 0.
    """
    if u.field_ids != phi.field_ids:
        raise ConfigError("indicator and proximity matrices use different field sets")
    row_sums = phi.values.sum(axis=1)  # per target field f
    numer = u.values.astype(np.float64) @ phi.values.T
    omega = np.zeros_like(numer)
    nz = row_sums > 0
    omega[:, nz] = numer[:, nz] / row_sums[nz]
    return DensityMatrix(
        values=omega, entity_ids=list(u.entity_ids), field_ids=list(u.field_ids)
    )

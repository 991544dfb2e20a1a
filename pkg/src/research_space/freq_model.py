"""Frequentist proximity: co-presence counts normalized into conditional
co-publication probabilities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .presence import PresenceMatrix, TimeWindow


@dataclass
class CoPresenceMatrix:
    """M_ff' = number of entities present in both f and f' (symmetric,
    M_ff = number of entities present in f)."""

    values: np.ndarray  # field x field, integer
    field_ids: list[str]


@dataclass
class ProximityMatrix:
    """Field x field relatedness weights in [0, 1].

    Frequentist weights are column-conditional probabilities and generally
    asymmetric; embedding weights are symmetric clipped cosines.
    """

    values: np.ndarray
    field_ids: list[str]
    model_tag: str  # "frequentist" | "embedding"
    window: TimeWindow

    @property
    def is_symmetric(self) -> bool:
        return self.model_tag == "embedding"


def copresence(p: PresenceMatrix) -> CoPresenceMatrix:
    pb = p.values.astype(np.int64)
    m = (pb.T @ pb).toarray()
    return CoPresenceMatrix(values=m, field_ids=list(p.field_ids))


def proximity_freq(m: CoPresenceMatrix, p: PresenceMatrix) -> ProximityMatrix:
    """phi_ff' = M_ff' / (number of entities present in f'); columns with no
    present entity are 0 by convention."""
    counts = np.asarray(p.values.sum(axis=0)).ravel().astype(np.float64)
    phi = np.zeros_like(m.values, dtype=np.float64)
    nonzero = counts > 0
    phi[:, nonzero] = m.values[:, nonzero] / counts[nonzero]
    return ProximityMatrix(
        values=phi,
        field_ids=list(m.field_ids),
        model_tag="frequentist",
        window=p.window,
    )

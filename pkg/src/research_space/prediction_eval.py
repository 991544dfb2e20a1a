"""Transition detection, density-based candidate ranking, per-entity AUROC,
and evaluation summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigError
from .specialization import (
    DensityMatrix,
    IndicatorMatrix,
    RcaMatrix,
    Stage,
    TransitionKind,
    classify_stage,
)


@dataclass(frozen=True)
class TransitionEvent:
    entity_id: str
    field_id: str
    kind: TransitionKind


@dataclass
class RankedPrediction:
    """Candidate fields ranked by density, descending; ties broken by
    ascending field_id."""

    entity_id: str
    items: list[tuple[str, float]]


@dataclass(frozen=True)
class AurocResult:
    entity_id: str
    auroc: float
    n_pos: int
    n_neg: int


@dataclass
class EvalSummary:
    mean: float
    median: float
    q1: float
    q3: float
    n: int
    p_value: float | None = None


def _source_stage(kind: TransitionKind) -> Stage:
    return (
        Stage.NASCENT
        if kind is TransitionKind.NASCENT_TO_DEVELOPED
        else Stage.INTERMEDIATE
    )


def detect_transitions(r_before: RcaMatrix, r_after: RcaMatrix,
                       kind: TransitionKind) -> list[TransitionEvent]:
    """Realized transitions between the RCA window and the test window.

    Entities absent from one matrix are treated as all-zero rows in it.
    """
    if r_before.field_ids != r_after.field_ids:
        raise ConfigError("RCA matrices use different field sets")
    before_idx = r_before.entity_index
    after_idx = r_after.entity_index
    entities = list(r_before.entity_ids)
    entities += [e for e in r_after.entity_ids if e not in before_idx]
    n_fields = len(r_before.field_ids)
    zeros = np.zeros(n_fields)
    events = []
    for eid in entities:
        before = r_before.values[before_idx[eid]] if eid in before_idx else zeros
        after = r_after.values[after_idx[eid]] if eid in after_idx else zeros
        if kind is TransitionKind.ZERO_TO_ACTIVE:
            mask = (before == 0) & (after > 0)
        else:
            src = _source_stage(kind)
            if src is Stage.NASCENT:
                in_src = (before > 0) & (before < 0.5)
            else:
                in_src = (before >= 0.5) & (before < 1.0)
            mask = in_src & (after >= 1.0)
        for fi in np.flatnonzero(mask):
            events.append(TransitionEvent(eid, r_before.field_ids[fi], kind))
    return events


def _candidate_mask(before_row, kind: TransitionKind, full_u_zero: bool):
    if full_u_zero:
        if kind is TransitionKind.ZERO_TO_ACTIVE:
            return before_row == 0
        return before_row <= 1.0  # U = 1[RCA > 1] for ->Developed
    if kind is TransitionKind.ZERO_TO_ACTIVE:
        return before_row == 0
    if kind is TransitionKind.NASCENT_TO_DEVELOPED:
        return (before_row > 0) & (before_row < 0.5)
    return (before_row >= 0.5) & (before_row < 1.0)


def rank_candidates(omega: DensityMatrix, u: IndicatorMatrix, r_before: RcaMatrix,
                    kind: TransitionKind,
                    full_u_zero: bool = False) -> list[RankedPrediction]:
    """Per-entity ranking of candidate fields by density.

    By default candidates for ->Developed transitions are restricted to the
    source stage; full_u_zero ranks the whole U = 0 set instead.
    """
    if omega.entity_ids != r_before.entity_ids or omega.field_ids != r_before.field_ids:
        raise ConfigError("density and RCA matrices are not aligned")
    out = []
    for i, eid in enumerate(omega.entity_ids):
        mask = _candidate_mask(r_before.values[i], kind, full_u_zero)
        items = [
            (omega.field_ids[fi], float(omega.values[i, fi]))
            for fi in np.flatnonzero(mask)
        ]
        items.sort(key=lambda kv: (-kv[1], kv[0]))
        out.append(RankedPrediction(entity_id=eid, items=items))
    return out


def auroc(ranked: RankedPrediction, positives: set[str]) -> AurocResult | None:
    """Mann-Whitney AUROC from the candidate scores; ties count 0.5 per pair.

    Returns None when there is no positive or no negative candidate.
    """
    if not positives <= {f for f, _ in ranked.items}:
        raise ConfigError("positives are not a subset of the candidate set")
    scores = np.array([s for _, s in ranked.items])
    is_pos = np.array([f in positives for f, _ in ranked.items])
    n_pos = int(is_pos.sum())
    n_neg = len(scores) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)  # midranks
    u_stat = ranks[is_pos].sum() - n_pos * (n_pos + 1) / 2.0
    return AurocResult(
        entity_id=ranked.entity_id,
        auroc=float(u_stat / (n_pos * n_neg)),
        n_pos=n_pos,
        n_neg=n_neg,
    )


def evaluate_transition(omega, u, r_before, r_after, kind,
                        full_u_zero=False) -> tuple[list[AurocResult], int]:
    """Per-entity AUROC for one transition kind.

    Entities without both a positive and a negative candidate are excluded;
    the second return value counts them.
    """
    events = detect_transitions(r_before, r_after, kind)
    positives: dict[str, set[str]] = {}
    for ev in events:
        positives.setdefault(ev.entity_id, set()).add(ev.field_id)
    results = []
    excluded = 0
    for ranked in rank_candidates(omega, u, r_before, kind, full_u_zero):
        pos = positives.get(ranked.entity_id, set())
        res = auroc(ranked, pos) if pos else None
        if res is None:
            excluded += 1
        else:
            results.append(res)
    return results, excluded


def summarize(results: list[AurocResult],
              p_value: float | None = None) -> EvalSummary:
    if not results:
        raise ConfigError("cannot summarize an empty result list")
    vals = np.array([r.auroc for r in results])
    q1, med, q3 = np.quantile(vals, [0.25, 0.5, 0.75])  # linear interpolation
    return EvalSummary(
        mean=float(vals.mean()),
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        n=len(vals),
        p_value=p_value,
    )


def compare_models(a: list[AurocResult], b: list[AurocResult],
                   n_permutations: int = 10000, seed: int = 0) -> float:
    """Two-sided seeded permutation test on the difference of mean AUROC."""
    if n_permutations < 100:
        raise ConfigError("n_permutations must be >= 100")
    if not a or not b:
        raise ConfigError("both result lists must be non-empty")
    xa = np.array([r.auroc for r in a])
    xb = np.array([r.auroc for r in b])
    observed = abs(xa.mean() - xb.mean())
    pooled = np.concatenate([xa, xb])
    rng = np.random.default_rng(seed)
    n_a = len(xa)
    count = 0
    for _ in range(n_permutations):
        perm = rng.permutation(pooled)
        if abs(perm[:n_a].mean() - perm[n_a:].mean()) >= observed:
            count += 1
    return (count + 1) / (n_permutations + 1)


def cv_sliding(covariate, values, window_size):
    """Coefficient of variation over sliding windows of the covariate order.

    Returns (points, n_skipped) where points are (covariate midpoint, CV)
    and windows with zero mean are skipped.
    """
    covariate = np.asarray(covariate, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if window_size > n:
        raise ConfigError("window_size exceeds sample size")
    order = np.argsort(covariate, kind="stable")
    cov = covariate[order]
    val = values[order]
    points = []
    skipped = 0
    for i in range(n - window_size + 1):
        w = val[i:i + window_size]
        mean = w.mean()
        if mean == 0:
            skipped += 1
            continue
        sd = w.std(ddof=1) if window_size > 1 else 0.0
        mid = (cov[i] + cov[i + window_size - 1]) / 2.0
        points.append((float(mid), float(sd / mean)))
    return points, skipped


def ccdf(values):
    """Complementary CDF P(X >= x) at each distinct observed value."""
    vals = np.sort(np.asarray(values, dtype=np.float64))
    n = len(vals)
    if n == 0:
        return []
    uniq, first_idx = np.unique(vals, return_index=True)
    return [(float(x), float((n - i) / n)) for x, i in zip(uniq, first_idx)]

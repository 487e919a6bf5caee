"""Questionnaire scoring, exercise imputation, and panel construction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .panel import Panel

#: Canonical questionnaire column layout (header contract of the input CSV).
CESD_COLUMNS = tuple(f"cesd_{i}" for i in range(1, 9))
LONELINESS_COLUMNS = tuple(f"lone_{i}" for i in range(1, 4))
ANXIETY_COLUMNS = tuple(f"anx_{i}" for i in range(1, 6))
EXERCISE_COLUMN = "exercise"

#: Reverse-coded depression items ("you were happy", "you enjoyed life").
#: Identified by column name so input files may reorder columns freely.
REVERSED_CESD_COLUMNS = frozenset({"cesd_4", "cesd_6"})

#: Variable order of scored questionnaire panels.
QUESTIONNAIRE_VARIABLES = ("depression", "loneliness", "anxiety", "exercise")

#: Scores strictly above this cutoff are flagged depressed.
DEPRESSED_CUTOFF = 3


def _check_items(name: str, items: Sequence[int], count: int, allowed: tuple[int, ...]) -> tuple[int, ...]:
    items = tuple(items)
    if len(items) != count:
        raise ValidationError(
            "bad-item", f"{name} expects {count} items, got {len(items)}"
        )
    out = []
    for i, v in enumerate(items):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise ValidationError("bad-item", f"{name} item {i + 1} is not an integer: {v!r}")
        if int(v) not in allowed:
            raise ValidationError(
                "bad-item",
                f"{name} item {i + 1} out of range {sorted(allowed)}: {int(v)}",
            )
        out.append(int(v))
    return tuple(out)


def score_cesd(items: Sequence[int]) -> tuple[int, bool]:
    """Sum the eight binary depression items, reverse-coding items 4 and 6.

    Returns (score in [0, 8], depressed flag). The flag is True when the
    score exceeds ``DEPRESSED_CUTOFF``.
    """
    items = _check_items("cesd", items, count=8, allowed=(0, 1))
    score = 0
    for column, value in zip(CESD_COLUMNS, items):
        score += (1 - value) if column in REVERSED_CESD_COLUMNS else value
    return score, score > DEPRESSED_CUTOFF


def score_loneliness(items: Sequence[int]) -> int:
    """Sum of the three loneliness items, each scored 1-3."""
    items = _check_items("loneliness", items, count=3, allowed=(1, 2, 3))
    return sum(items)


def score_anxiety(items: Sequence[int]) -> float:
    """Mean of the five anxiety items, each scored 1-4."""
    items = _check_items("anxiety", items, count=5, allowed=(1, 2, 3, 4))
    return sum(items) / 5.0


def impute_exercise(series: Sequence[float | None]) -> np.ndarray:
    """Fill missing entries from the nearest observed neighbours.

    Interior gaps take the mean of the nearest observed value on each side;
    leading/trailing gaps copy the single nearest observed value. Observed
    entries pass through unchanged.
    """
    raw = [None if v is None or (isinstance(v, float) and math.isnan(v)) else float(v) for v in series]
    observed = [i for i, v in enumerate(raw) if v is not None]
    if not observed:
        raise ValidationError("all-missing", "exercise series has no observed values")
    out = np.empty(len(raw), dtype=float)
    for i, v in enumerate(raw):
        if v is not None:
            out[i] = v
            continue
        prev = max((j for j in observed if j < i), default=None)
        nxt = min((j for j in observed if j > i), default=None)
        if prev is not None and nxt is not None:
            out[i] = (raw[prev] + raw[nxt]) / 2.0
        elif prev is not None:
            out[i] = raw[prev]
        else:
            out[i] = raw[nxt]
    return out


@dataclass(frozen=True)
class QuestionnaireRecord:
    """One subject's raw item responses at one timepoint.

    An item group is None when any of its items was left blank; the derived
    variable is then missing at this timepoint.
    """

    subject_id: str
    timepoint: int
    cesd_items: tuple[int, ...] | None
    loneliness_items: tuple[int, ...] | None
    anxiety_items: tuple[int, ...] | None
    exercise: int | None


@dataclass(frozen=True)
class ScoredRecord:
    """Derived questionnaire variables for one subject-timepoint."""

    subject_id: str
    timepoint: int
    depression: float | None
    loneliness: float | None
    anxiety: float | None
    exercise: float | None
    depressed: bool | None = None


def score_record(record: QuestionnaireRecord) -> ScoredRecord:
    depression = depressed = None
    if record.cesd_items is not None:
        score, flag = score_cesd(record.cesd_items)
        depression, depressed = float(score), flag
    loneliness = float(score_loneliness(record.loneliness_items)) if record.loneliness_items is not None else None
    anxiety = score_anxiety(record.anxiety_items) if record.anxiety_items is not None else None
    exercise = None
    if record.exercise is not None:
        if not 0 <= record.exercise <= 6:
            raise ValidationError("bad-item", f"exercise item out of range [0, 6]: {record.exercise}")
        exercise = float(record.exercise)
    return ScoredRecord(
        subject_id=record.subject_id,
        timepoint=record.timepoint,
        depression=depression,
        loneliness=loneliness,
        anxiety=anxiety,
        exercise=exercise,
        depressed=depressed,
    )


def build_panel(
    records: Iterable[ScoredRecord],
    complete_case: bool = True,
    exclude_baseline: bool = True,
    baseline_timepoint: int = 0,
    max_timepoint: int | None = 12,
    impute: bool = True,
) -> Panel:
    """Assemble scored records into a subject x timepoint x variable panel.

    Baseline rows (``timepoint == baseline_timepoint``) are dropped when
    ``exclude_baseline`` is set. Exercise gaps are imputed per subject before
    complete-case filtering, which then drops any subject still missing a
    value at a retained timepoint.
    """
    records = list(records)
    if exclude_baseline:
        records = [r for r in records if r.timepoint != baseline_timepoint]
    if not records:
        raise ValidationError("empty-input", "no questionnaire records to build a panel from")
    for r in records:
        if r.timepoint < 0:
            raise ValidationError("bad-timepoint", f"negative timepoint {r.timepoint} for {r.subject_id}")
        if max_timepoint is not None and r.timepoint > max_timepoint:
            raise ValidationError(
                "bad-timepoint",
                f"timepoint {r.timepoint} for {r.subject_id} exceeds maximum {max_timepoint}",
            )

    seen: set[tuple[str, int]] = set()
    for r in records:
        key = (r.subject_id, r.timepoint)
        if key in seen:
            raise ValidationError("duplicate-row", f"duplicate record for subject {r.subject_id} timepoint {r.timepoint}")
        seen.add(key)

    entity_ids = sorted({r.subject_id for r in records})
    timepoints = sorted({r.timepoint for r in records})
    e_index = {e: i for i, e in enumerate(entity_ids)}
    t_index = {t: i for i, t in enumerate(timepoints)}

    shape = (len(entity_ids), len(timepoints), len(QUESTIONNAIRE_VARIABLES))
    values = np.full(shape, np.nan)
    missing = np.ones(shape, dtype=bool)
    for r in records:
        ei, ti = e_index[r.subject_id], t_index[r.timepoint]
        for vi, name in enumerate(QUESTIONNAIRE_VARIABLES):
            v = getattr(r, name)
            if v is not None:
                values[ei, ti, vi] = v
                missing[ei, ti, vi] = False

    if impute:
        ex = QUESTIONNAIRE_VARIABLES.index("exercise")
        for ei in range(len(entity_ids)):
            col = values[ei, :, ex]
            if missing[ei, :, ex].all() or not missing[ei, :, ex].any():
                continue
            series = [None if m else v for v, m in zip(col, missing[ei, :, ex])]
            values[ei, :, ex] = impute_exercise(series)
            missing[ei, :, ex] = False

    if complete_case:
        keep = [ei for ei in range(len(entity_ids)) if not missing[ei].any()]
        if not keep:
            raise ValidationError("empty-panel", "no subjects with complete data after filtering")
        entity_ids = [entity_ids[i] for i in keep]
        values = values[keep]
        missing = missing[keep]

    return Panel(
        entity_ids=entity_ids,
        timepoints=timepoints,
        variables=list(QUESTIONNAIRE_VARIABLES),
        values=values,
        missing=missing,
    )


def build_scan_panel(
    scans: Sequence[tuple[str, np.ndarray]],
    variables: Sequence[str],
) -> Panel:
    """Stack per-scan (entity_id, timepoint x ROI array) blocks into one panel.

    All scans must share the variable set and length; timepoints are the TR
    indices 0..T-1.
    """
    if not scans:
        raise ValidationError("empty-input", "no scans to build a panel from")
    ids = [e for e, _ in scans]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate-row", "duplicate scan entity ids")
    arrays = [np.asarray(a, dtype=float) for _, a in scans]
    t = arrays[0].shape[0]
    for eid, a in zip(ids, arrays):
        if a.ndim != 2 or a.shape[1] != len(variables):
            raise ValidationError(
                "inconsistent-variables",
                f"scan {eid} has shape {a.shape}, expected T x {len(variables)}",
            )
        if a.shape[0] != t:
            raise ValidationError(
                "length-mismatch",
                f"scan {eid} has {a.shape[0]} timepoints, expected {t}",
            )
    return Panel(
        entity_ids=list(ids),
        timepoints=list(range(t)),
        variables=list(variables),
        values=np.stack(arrays),
    )

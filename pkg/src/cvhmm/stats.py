"""Effect sizes and transition-frequency contingency comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .align import ConditionCurve
from .errors import ValidationError
from .states import DecodedSequence

#: Standardized residuals at or beyond this magnitude are flagged significant.
RESIDUAL_THRESHOLD = 2.0


def cohens_d(group_a: np.ndarray, group_b: np.ndarray) -> float:
    """Cohen's d with pooled sample standard deviation.

    d = (mean_a - mean_b) / s_pooled with s_pooled built from the unbiased
    group variances. Raises instead of returning infinity when the pooled
    standard deviation collapses to zero.
    """
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValidationError(
            "group-size", f"cohens_d needs >= 2 values per group, got {a.size} and {b.size}"
        )
    var_a = float(a.var(ddof=1))
    var_b = float(b.var(ddof=1))
    pooled = math.sqrt(((a.size - 1) * var_a + (b.size - 1) * var_b) / (a.size + b.size - 2))
    if pooled <= 0.0:
        raise ValidationError("zero-pooled-sd", "pooled standard deviation is zero")
    return float((a.mean() - b.mean()) / pooled)


def condition_effect_size(curve: ConditionCurve | np.ndarray, design: np.ndarray | None = None) -> float:
    """Cohen's d between curve values at faces vs shapes timepoints.

    Accepts a ConditionCurve, or a raw value array plus its design labels
    (used for unbinned ROI signal curves).
    """
    if isinstance(curve, ConditionCurve):
        values, labels = curve.values, curve.design
    else:
        if design is None:
            raise ValidationError("missing-design", "raw curves need explicit design labels")
        values = np.asarray(curve, dtype=float)
        labels = np.asarray(design, dtype=int)
    if values.shape != labels.shape:
        raise ValidationError("length-mismatch", "curve and design lengths differ")
    faces = values[labels == 1]
    shapes = values[labels == 0]
    if faces.size == 0 or shapes.size == 0:
        raise ValidationError("single-condition", "design must contain both conditions")
    return cohens_d(faces, shapes)


@dataclass
class EffectSizeReport:
    """One Cohen's d for one decoding method on one cohort stratum."""

    method: str
    stratum: str
    d: float
    n_faces: int
    n_shapes: int


def transition_table(sequences: list[DecodedSequence], k: int) -> np.ndarray:
    """Row-major flattened K x K transition counts over all sequences."""
    counts = np.zeros((k, k), dtype=np.int64)
    for seq in sequences:
        states = seq.states
        if states.size and (states.min() < 0 or states.max() >= k):
            raise ValidationError("state-range", f"sequence {seq.entity_id} has states outside [0, {k})")
        for a, b in zip(states[:-1], states[1:]):
            counts[a, b] += 1
    return counts.reshape(-1)


@dataclass
class GroupComparison:
    """Chi-squared independence comparison of two transition-count tables.

    Columns empty in both groups are dropped before expected counts; their
    residuals are reported as 0. ``significant`` flags cells whose Pearson
    residual magnitude reaches ``RESIDUAL_THRESHOLD``.
    """

    groups: tuple[str, str]
    observed: np.ndarray
    chi2: float
    dof: int
    residuals: np.ndarray
    cramers_v: float
    significant: np.ndarray
    retained: np.ndarray
    warnings: list[str] = field(default_factory=list)


def compare_groups(
    table_a: np.ndarray,
    table_b: np.ndarray,
    groups: tuple[str, str] = ("a", "b"),
) -> GroupComparison:
    """Test association between group membership and transition type.

    Builds the 2 x C contingency table, computes the chi-squared statistic,
    Pearson residuals (observed - expected)/sqrt(expected), and Cramér's V
    = sqrt(chi2 / (n * (min(rows, cols) - 1))).
    """
    a = np.asarray(table_a, dtype=np.int64)
    b = np.asarray(table_b, dtype=np.int64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError("shape-mismatch", f"tables must be equal-length vectors, got {a.shape} and {b.shape}")
    if (a < 0).any() or (b < 0).any():
        raise ValidationError("bad-count", "transition counts must be nonnegative")
    observed = np.stack([a, b]).astype(float)
    n = observed.sum()
    if a.sum() == 0 or b.sum() == 0:
        raise ValidationError("empty-table", "each group needs at least one transition")

    retained = observed.sum(axis=0) > 0
    kept = observed[:, retained]
    warnings: list[str] = []
    residuals = np.zeros_like(observed)
    significant = np.zeros(observed.shape, dtype=bool)

    c = int(retained.sum())
    if c < 2:
        chi2, dof, v = 0.0, 0, 0.0
        warnings.append("fewer than 2 occupied transition types; association undefined")
    else:
        row_tot = kept.sum(axis=1, keepdims=True)
        col_tot = kept.sum(axis=0, keepdims=True)
        expected = row_tot @ col_tot / n
        if (expected < 5).any():
            warnings.append(
                f"{int((expected < 5).sum())} expected counts below 5; chi-squared may be unstable"
            )
        res = (kept - expected) / np.sqrt(expected)
        chi2 = float((res**2).sum())
        dof = (2 - 1) * (c - 1)
        v = math.sqrt(chi2 / (n * (min(2, c) - 1)))
        residuals[:, retained] = res
        significant = np.abs(residuals) >= RESIDUAL_THRESHOLD

    return GroupComparison(
        groups=groups,
        observed=observed,
        chi2=chi2,
        dof=dof,
        residuals=residuals,
        cramers_v=v,
        significant=significant,
        retained=retained,
        warnings=warnings,
    )


def enhancement_report(viterbi_cmp: GroupComparison, kmeans_cmp: GroupComparison) -> dict:
    """Compare association strength between decoding methods.

    ``enhanced`` is True only when the Viterbi V strictly exceeds k-means.
    """
    return {
        "v_viterbi": viterbi_cmp.cramers_v,
        "v_kmeans": kmeans_cmp.cramers_v,
        "enhanced": bool(viterbi_cmp.cramers_v > kmeans_cmp.cramers_v),
    }


def comparison_to_dict(cmp: GroupComparison, grouping: str) -> dict:
    """JSON-ready report; residual grids reshape to K x K when C = K**2."""
    c = cmp.observed.shape[1]
    k = math.isqrt(c)
    shape = (k, k) if k * k == c else (1, c)

    def grid(row: np.ndarray) -> list:
        return np.asarray(row).reshape(shape).tolist()

    return {
        "grouping": grouping,
        "groups": list(cmp.groups),
        "chi2": cmp.chi2,
        "dof": cmp.dof,
        "cramers_v": cmp.cramers_v,
        "observed": {g: grid(cmp.observed[i]) for i, g in enumerate(cmp.groups)},
        "residuals": {g: grid(cmp.residuals[i]) for i, g in enumerate(cmp.groups)},
        "significant_cells": [
            {"group": cmp.groups[i], "cell": [int(r), int(col)] if k * k == c else int(j), "residual": float(cmp.residuals[i, j])}
            for i in range(2)
            for j in np.flatnonzero(cmp.significant[i])
            for r, col in [divmod(int(j), k) if k * k == c else (0, int(j))]
        ],
        "warnings": list(cmp.warnings),
    }

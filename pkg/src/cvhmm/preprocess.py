"""Variable standardization and change-vector derivation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .panel import Panel

#: Relative floor below which a standard deviation is treated as zero.
_SD_FLOOR = 1e-12

ZSCORE_SCOPES = ("pooled", "per-entity")


@dataclass
class ChangeSeries:
    """Per-entity sequences of change vectors between adjacent timepoints.

    ``vectors[e, t]`` is the D-dimensional difference x_{t+1} - x_t for
    entity e; ``source_timepoints[t]`` is the (t_from, t_to) pair it spans.
    """

    entity_ids: list[str]
    variables: list[str]
    vectors: np.ndarray
    source_timepoints: list[tuple[int, int]]

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        expected = (len(self.entity_ids), len(self.source_timepoints), len(self.variables))
        if self.vectors.shape != expected:
            raise ValidationError(
                "shape-mismatch",
                f"change-series shape {self.vectors.shape} != {expected}",
            )

    @property
    def n_entities(self) -> int:
        return len(self.entity_ids)

    @property
    def n_steps(self) -> int:
        return len(self.source_timepoints)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def stacked(self) -> np.ndarray:
        """All change vectors as one (entities * steps) x D matrix."""
        return self.vectors.reshape(-1, self.n_variables)


def _sd_or_raise(sd: float, mean: float, what: str) -> float:
    if sd <= _SD_FLOOR * max(1.0, abs(mean)):
        raise ValidationError("zero-variance", f"zero variance in {what}")
    return sd


def zscore_panel(panel: Panel, scope: str = "pooled") -> Panel:
    """Standardize each variable to mean 0, population SD 1 within its scope.

    ``pooled`` standardizes across all entities and timepoints; ``per-entity``
    within each entity separately. Missing cells are ignored when computing
    statistics and stay missing.
    """
    if scope not in ZSCORE_SCOPES:
        raise ValidationError("bad-scope", f"zscore scope must be one of {ZSCORE_SCOPES}, got {scope!r}")
    values = panel.values.copy()
    observed = ~panel.missing
    if scope == "pooled":
        for vi, name in enumerate(panel.variables):
            col = values[:, :, vi][observed[:, :, vi]]
            if col.size == 0:
                raise ValidationError("zero-variance", f"variable {name} has no observed values")
            mean = float(col.mean())
            sd = _sd_or_raise(float(col.std()), mean, f"variable {name}")
            values[:, :, vi] = np.where(observed[:, :, vi], (values[:, :, vi] - mean) / sd, np.nan)
    else:
        for ei, eid in enumerate(panel.entity_ids):
            for vi, name in enumerate(panel.variables):
                col = values[ei, :, vi][observed[ei, :, vi]]
                if col.size == 0:
                    raise ValidationError(
                        "zero-variance", f"variable {name} has no observed values for entity {eid}"
                    )
                mean = float(col.mean())
                sd = _sd_or_raise(float(col.std()), mean, f"variable {name} for entity {eid}")
                values[ei, :, vi] = np.where(
                    observed[ei, :, vi], (values[ei, :, vi] - mean) / sd, np.nan
                )
    return Panel(
        entity_ids=list(panel.entity_ids),
        timepoints=list(panel.timepoints),
        variables=list(panel.variables),
        values=values,
        missing=panel.missing.copy(),
    )


def change_vectors(panel: Panel) -> ChangeSeries:
    """Differences between adjacent timepoints, per entity.

    A panel with T timepoints yields T-1 change vectors per entity.
    """
    panel.require_dense("change_vectors")
    if panel.n_timepoints < 2:
        raise ValidationError(
            "too-short", f"change vectors need at least 2 timepoints, panel has {panel.n_timepoints}"
        )
    vectors = np.diff(panel.values, axis=1)
    spans = list(zip(panel.timepoints[:-1], panel.timepoints[1:]))
    return ChangeSeries(
        entity_ids=list(panel.entity_ids),
        variables=list(panel.variables),
        vectors=vectors,
        source_timepoints=spans,
    )

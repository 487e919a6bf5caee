"""Shared data containers: observation panels, task designs, group labels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass
class Panel:
    """Dense entity x timepoint x variable observation grid.

    ``missing`` marks cells with no observation; ``values`` at missing cells
    are stored as NaN and must not be read.
    """

    entity_ids: list[str]
    timepoints: list[int]
    variables: list[str]
    values: np.ndarray
    missing: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.missing is None:
            self.missing = np.zeros(self.values.shape, dtype=bool)
        else:
            self.missing = np.asarray(self.missing, dtype=bool)
        expected = (len(self.entity_ids), len(self.timepoints), len(self.variables))
        if self.values.shape != expected:
            raise ValidationError(
                "shape-mismatch",
                f"panel values shape {self.values.shape} != "
                f"entities x timepoints x variables {expected}",
            )
        if self.missing.shape != self.values.shape:
            raise ValidationError(
                "shape-mismatch",
                f"missing-mask shape {self.missing.shape} != values shape {self.values.shape}",
            )
        tp = list(self.timepoints)
        if any(b <= a for a, b in zip(tp, tp[1:])):
            raise ValidationError("timepoints-order", f"timepoints not strictly increasing: {tp}")
        if len(set(self.entity_ids)) != len(self.entity_ids):
            raise ValidationError("duplicate-entity", "duplicate entity ids in panel")

    @property
    def n_entities(self) -> int:
        return len(self.entity_ids)

    @property
    def n_timepoints(self) -> int:
        return len(self.timepoints)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def is_dense(self) -> bool:
        return not self.missing.any()

    def require_dense(self, context: str) -> None:
        if not self.is_dense():
            n = int(self.missing.sum())
            raise ValidationError(
                "missing-values", f"{context} requires a dense panel; {n} cells are missing"
            )

    def subset(self, entity_ids: list[str]) -> "Panel":
        """Panel restricted to the given entities, in the given order."""
        index = {e: i for i, e in enumerate(self.entity_ids)}
        unknown = [e for e in entity_ids if e not in index]
        if unknown:
            raise ValidationError("unknown-entity", f"entities not in panel: {unknown}")
        rows = [index[e] for e in entity_ids]
        return Panel(
            entity_ids=list(entity_ids),
            timepoints=list(self.timepoints),
            variables=list(self.variables),
            values=self.values[rows].copy(),
            missing=self.missing[rows].copy(),
        )


@dataclass
class DesignLabels:
    """Per-timepoint task condition codes: 1 = faces, 0 = shapes."""

    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int)
        if self.labels.ndim != 1:
            raise ValidationError("design-shape", "design labels must be a 1-D sequence")
        bad = set(np.unique(self.labels)) - {0, 1}
        if bad:
            raise ValidationError("design-values", f"design labels must be 0/1, found {sorted(bad)}")

    def __len__(self) -> int:
        return int(self.labels.shape[0])


@dataclass
class GroupAssignment:
    """Entity -> group code mapping for two-group comparisons."""

    groups: dict[str, str] = field(default_factory=dict)

    def codes(self) -> list[str]:
        return sorted(set(self.groups.values()))

    def members(self, code: str) -> list[str]:
        return [e for e, g in self.groups.items() if g == code]

    def pair(self) -> tuple[str, str]:
        """The two group codes, sorted; errors unless exactly two exist."""
        codes = self.codes()
        if len(codes) != 2:
            raise ValidationError(
                "group-count", f"group comparison needs exactly 2 group codes, found {codes}"
            )
        return codes[0], codes[1]

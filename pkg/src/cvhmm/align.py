"""Label-switching resolution by majority vote against the task design."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .panel import DesignLabels, Panel
from .states import DecodedSequence

ALIGNMENTS = ("t_from", "t_to")


@dataclass
class StateConditionMap:
    """Per-state condition code (1 = faces, 0 = shapes) with vote tallies."""

    condition: np.ndarray
    faces_counts: np.ndarray
    shapes_counts: np.ndarray

    @property
    def k(self) -> int:
        return int(self.condition.shape[0])


@dataclass
class ConditionCurve:
    """Per-timepoint mean of binarized sequences, with the design overlay."""

    values: np.ndarray
    design: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.design = np.asarray(self.design, dtype=int)
        if self.values.shape != self.design.shape:
            raise ValidationError(
                "length-mismatch",
                f"curve length {self.values.shape} != design length {self.design.shape}",
            )
        if self.values.size and (self.values.min() < 0.0 or self.values.max() > 1.0):
            raise ValidationError("curve-range", "condition-curve values must lie in [0, 1]")


def align_design(
    design: DesignLabels | np.ndarray,
    length: int,
    alignment: str = "t_from",
    lag: int = 0,
) -> np.ndarray:
    """Design labels matched to a change-vector sequence of the given length.

    A change spanning t -> t+1 takes the label of its source timepoint under
    ``t_from`` (default) or of its destination under ``t_to``. ``lag`` shifts
    labels later in time by that many steps (edge values are held).
    """
    labels = design.labels if isinstance(design, DesignLabels) else np.asarray(design, dtype=int)
    if alignment not in ALIGNMENTS:
        raise ValidationError("bad-alignment", f"alignment must be one of {ALIGNMENTS}, got {alignment!r}")
    if lag:
        idx = np.clip(np.arange(labels.shape[0]) - lag, 0, labels.shape[0] - 1)
        labels = labels[idx]
    if length == labels.shape[0] - 1:
        labels = labels[:-1] if alignment == "t_from" else labels[1:]
    elif length != labels.shape[0]:
        raise ValidationError(
            "length-mismatch",
            f"cannot align design of length {labels.shape[0]} to sequences of length {length}",
        )
    return labels


def majority_vote(
    sequences: list[DecodedSequence],
    design: DesignLabels | np.ndarray,
    k: int,
) -> StateConditionMap:
    """Map each state to the condition it co-occurs with most often.

    The design must already be aligned to the sequence length. A state is
    faces (1) only when its faces tally strictly exceeds its shapes tally;
    ties, including never-seen states, are shapes (0).
    """
    labels = design.labels if isinstance(design, DesignLabels) else np.asarray(design, dtype=int)
    faces = np.zeros(k, dtype=np.int64)
    shapes = np.zeros(k, dtype=np.int64)
    if not sequences:
        raise ValidationError("empty-input", "no sequences for majority vote")
    for seq in sequences:
        if len(seq) != labels.shape[0]:
            raise ValidationError(
                "length-mismatch",
                f"sequence {seq.entity_id} length {len(seq)} != design length {labels.shape[0]}",
            )
        if seq.states.size and (seq.states.min() < 0 or seq.states.max() >= k):
            raise ValidationError("state-range", f"sequence {seq.entity_id} has states outside [0, {k})")
        np.add.at(faces, seq.states[labels == 1], 1)
        np.add.at(shapes, seq.states[labels == 0], 1)
    condition = (faces > shapes).astype(int)
    return StateConditionMap(condition=condition, faces_counts=faces, shapes_counts=shapes)


def binarize(sequence: DecodedSequence, cmap: StateConditionMap) -> np.ndarray:
    """Element-wise condition lookup for one decoded sequence."""
    states = sequence.states
    if states.size and (states.min() < 0 or states.max() >= cmap.k):
        raise ValidationError(
            "state-range", f"sequence {sequence.entity_id} has states outside the condition map"
        )
    return cmap.condition[states]


def mean_curve(binarized: list[np.ndarray], design: DesignLabels | np.ndarray) -> ConditionCurve:
    """Per-timepoint mean of binarized series across scans."""
    if not binarized:
        raise ValidationError("empty-input", "no binarized series to average")
    length = binarized[0].shape[0]
    for b in binarized:
        if b.shape[0] != length:
            raise ValidationError("length-mismatch", "binarized series have unequal lengths")
    labels = design.labels if isinstance(design, DesignLabels) else np.asarray(design, dtype=int)
    if labels.shape[0] != length:
        raise ValidationError(
            "length-mismatch", f"design length {labels.shape[0]} != series length {length}"
        )
    values = np.stack(binarized).mean(axis=0)
    return ConditionCurve(values=values, design=labels)


def raw_mean_curve(panel: Panel, roi_names: list[str]) -> np.ndarray:
    """Mean over entities of the average of the chosen channels, per timepoint.

    The classic use averages a bilateral ROI pair; any nonempty subset of the
    panel's variables works.
    """
    if not roi_names:
        raise ValidationError("empty-input", "no ROI names given")
    try:
        idx = [panel.variables.index(name) for name in roi_names]
    except ValueError:
        missing = [n for n in roi_names if n not in panel.variables]
        raise ValidationError("unknown-variable", f"ROIs not in panel: {missing}") from None
    panel.require_dense("raw_mean_curve")
    return panel.values[:, :, idx].mean(axis=2).mean(axis=0)

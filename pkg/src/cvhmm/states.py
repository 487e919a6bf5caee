"""Change-state induction by k-means and empirical transition estimation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .preprocess import ChangeSeries


@dataclass
class ChangeStateSet:
    """K change-states: centroids in change-vector space plus fit diagnostics."""

    centroids: np.ndarray
    member_counts: np.ndarray
    variables: list[str]
    inertia: float
    inertia_history: list[float]
    seed: int
    n_iter: int

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def n_variables(self) -> int:
        return int(self.centroids.shape[1])

    def salient_factors(self) -> list[tuple[str, int]]:
        """Per state, the (variable, sign) of the dominant centroid component."""
        out = []
        for row in self.centroids:
            dim = int(np.argmax(np.abs(row)))
            out.append((self.variables[dim], int(np.sign(row[dim]))))
        return out

    def salient_labels(self) -> list[str]:
        """Readable state names such as "increased depression"."""
        words = {1: "increased", -1: "decreased", 0: "stable"}
        return [f"{words[sign]} {var}" for var, sign in self.salient_factors()]


@dataclass
class DecodedSequence:
    """One entity's hidden-state index sequence and how it was obtained."""

    entity_id: str
    states: np.ndarray
    provenance: str

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=int)
        if self.states.ndim != 1:
            raise ValidationError("shape-mismatch", "decoded states must be a 1-D sequence")

    def __len__(self) -> int:
        return int(self.states.shape[0])


@dataclass
class TransitionEstimate:
    """Adjacent-pair transition counts with smoothed row-stochastic probabilities."""

    counts: np.ndarray
    probabilities: np.ndarray
    initial: np.ndarray

    @property
    def k(self) -> int:
        return int(self.counts.shape[0])


def _as_points(series: ChangeSeries | np.ndarray) -> tuple[np.ndarray, list[str]]:
    if isinstance(series, ChangeSeries):
        return series.stacked(), list(series.variables)
    points = np.asarray(series, dtype=float)
    if points.ndim != 2:
        raise ValidationError("shape-mismatch", f"expected N x D points, got shape {points.shape}")
    return points, [f"d{i + 1}" for i in range(points.shape[1])]


def nearest_centroid(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid per point; ties go to the lowest index."""
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def _plusplus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = points[first]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            raise ValidationError(
                "too-few-points", f"fewer than {k} distinct points available for k-means"
            )
        pick = int(rng.choice(n, p=d2 / total))
        centroids[j] = points[pick]
        d2 = np.minimum(d2, ((points - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _repair_empty(points: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Move each empty cluster's centroid onto the point farthest from its own."""
    k = centroids.shape[0]
    counts = np.bincount(labels, minlength=k)
    d2 = ((points - centroids[labels]) ** 2).sum(axis=1)
    for j in np.flatnonzero(counts == 0):
        donors = np.flatnonzero(counts[labels] > 1)
        far = donors[int(np.argmax(d2[donors]))]
        centroids[j] = points[far]
        counts[labels[far]] -= 1
        labels[far] = j
        counts[j] += 1
        d2[far] = 0.0
    return centroids


def fit_kmeans(
    series: ChangeSeries | np.ndarray,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
) -> ChangeStateSet:
    """Lloyd's algorithm with k-means++ seeding, deterministic given the seed.

    Converges when assignments stop changing or ``max_iter`` is reached.
    Empty clusters are repaired by reseeding them on the point currently
    farthest from its centroid, which keeps every state nonempty and the
    recorded inertia sequence non-increasing.
    """
    points, variables = _as_points(series)
    n = points.shape[0]
    if n == 0:
        raise ValidationError("empty-input", "no change vectors to cluster")
    if k < 1:
        raise ValidationError("bad-k", f"k must be >= 1, got {k}")
    if n < k:
        raise ValidationError("too-few-points", f"{n} vectors cannot support {k} states")
    if np.unique(points, axis=0).shape[0] < k:
        raise ValidationError("too-few-points", f"fewer than {k} distinct points for k-means")

    rng = np.random.default_rng(seed)
    centroids = points.mean(axis=0, keepdims=True) if k == 1 else _plusplus_init(points, k, rng)

    labels = np.full(n, -1, dtype=int)
    history: list[float] = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        new_labels = nearest_centroid(points, centroids)
        inertia = float(((points - centroids[new_labels]) ** 2).sum())
        if history and inertia > history[-1] + 1e-9:
            raise AssertionError(f"k-means inertia increased: {history[-1]} -> {inertia}")
        history.append(inertia)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = points[labels == j]
            if members.shape[0] > 0:
                centroids[j] = members.mean(axis=0)
        centroids = _repair_empty(points, centroids, labels)

    counts = np.bincount(labels, minlength=k)
    return ChangeStateSet(
        centroids=centroids,
        member_counts=counts,
        variables=variables,
        inertia=history[-1],
        inertia_history=history,
        seed=seed,
        n_iter=n_iter,
    )


def assign_states(series: ChangeSeries, states: ChangeStateSet) -> list[DecodedSequence]:
    """Classify each change vector to its nearest change-state."""
    if series.n_variables != states.n_variables:
        raise ValidationError(
            "dim-mismatch",
            f"series has {series.n_variables} variables, states have {states.n_variables}",
        )
    out = []
    for ei, eid in enumerate(series.entity_ids):
        labels = nearest_centroid(series.vectors[ei], states.centroids)
        out.append(DecodedSequence(entity_id=eid, states=labels, provenance="kmeans"))
    return out


def estimate_transitions(
    sequences: list[DecodedSequence],
    k: int,
    smoothing: float = 0.0,
) -> TransitionEstimate:
    """Tally adjacent-pair transitions within each entity and row-normalize.

    ``smoothing`` is added to every count (and to initial-state counts)
    before normalization. A state never observed as a source gets a uniform
    row when smoothing is zero, keeping rows stochastic.
    """
    if not sequences:
        raise ValidationError("empty-input", "no sequences to estimate transitions from")
    if smoothing < 0:
        raise ValidationError("bad-smoothing", f"smoothing must be >= 0, got {smoothing}")
    counts = np.zeros((k, k), dtype=np.int64)
    first = np.zeros(k, dtype=np.int64)
    for seq in sequences:
        states = seq.states
        if states.size == 0:
            continue
        if states.min() < 0 or states.max() >= k:
            raise ValidationError(
                "state-range", f"sequence {seq.entity_id} has states outside [0, {k})"
            )
        first[states[0]] += 1
        np.add.at(counts, (states[:-1], states[1:]), 1)

    probabilities = counts.astype(float) + smoothing
    row_sums = probabilities.sum(axis=1)
    for i in range(k):
        if row_sums[i] > 0:
            probabilities[i] /= row_sums[i]
        else:
            probabilities[i] = 1.0 / k
    init = first.astype(float) + smoothing
    total = init.sum()
    initial = init / total if total > 0 else np.full(k, 1.0 / k)
    return TransitionEstimate(counts=counts, probabilities=probabilities, initial=initial)


def estimate_emissions(
    series: ChangeSeries,
    assignments: list[DecodedSequence],
    states: ChangeStateSet,
    var_floor: float = 1e-6,
) -> np.ndarray:
    """Per-state, per-dimension variance of member vectors around the centroid.

    Variances are floored at ``var_floor``; singleton clusters therefore get
    the floor in every dimension.
    """
    if var_floor <= 0:
        raise ValidationError("bad-var-floor", f"var_floor must be > 0, got {var_floor}")
    k, d = states.centroids.shape
    sq_sums = np.zeros((k, d))
    counts = np.zeros(k, dtype=np.int64)
    by_id = {s.entity_id: s for s in assignments}
    for ei, eid in enumerate(series.entity_ids):
        seq = by_id.get(eid)
        if seq is None:
            raise ValidationError("unknown-entity", f"no assignment for entity {eid}")
        vecs = series.vectors[ei]
        if len(seq) != vecs.shape[0]:
            raise ValidationError(
                "length-mismatch",
                f"assignment length {len(seq)} != change count {vecs.shape[0]} for {eid}",
            )
        dev = vecs - states.centroids[seq.states]
        np.add.at(sq_sums, seq.states, dev**2)
        counts += np.bincount(seq.states, minlength=k)
    if (counts == 0).any():
        empty = np.flatnonzero(counts == 0).tolist()
        raise ValidationError("empty-state", f"states with no members: {empty}")
    variances = sq_sums / counts[:, None]
    return np.maximum(variances, var_floor)

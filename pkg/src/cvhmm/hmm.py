"""Gaussian change-vector HMM: log-space Viterbi decoding and sampling."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .states import ChangeStateSet, DecodedSequence, TransitionEstimate

_LOG_2PI = float(np.log(2.0 * np.pi))

#: Tolerance on stochastic-vector sums.
_ROW_SUM_TOL = 1e-12


@dataclass
class ChangeStateModel:
    """Hidden Markov model whose states emit Gaussian change vectors.

    ``means`` are the change-state centroids; ``variances`` the diagonal
    emission covariances. ``transition`` rows and ``initial`` must be strictly
    positive and sum to 1, so decoding can stay in log space.
    """

    means: np.ndarray
    variances: np.ndarray
    transition: np.ndarray
    initial: np.ndarray
    variables: list[str]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=float)
        self.variances = np.asarray(self.variances, dtype=float)
        self.transition = np.asarray(self.transition, dtype=float)
        self.initial = np.asarray(self.initial, dtype=float)
        k, d = self.means.shape
        if self.variances.shape != (k, d):
            raise ValidationError("shape-mismatch", f"variances shape {self.variances.shape} != ({k}, {d})")
        if self.transition.shape != (k, k):
            raise ValidationError("shape-mismatch", f"transition shape {self.transition.shape} != ({k}, {k})")
        if self.initial.shape != (k,):
            raise ValidationError("shape-mismatch", f"initial shape {self.initial.shape} != ({k},)")
        if len(self.variables) != d:
            raise ValidationError("shape-mismatch", f"{len(self.variables)} variable names for {d} dimensions")
        if (self.variances <= 0).any():
            raise ValidationError("bad-variance", "emission variances must be strictly positive")
        if (self.transition <= 0).any() or (self.initial <= 0).any():
            raise ValidationError(
                "bad-probability", "transition and initial entries must be > 0 (apply smoothing)"
            )
        row_err = np.abs(self.transition.sum(axis=1) - 1.0).max()
        init_err = abs(self.initial.sum() - 1.0)
        if row_err > _ROW_SUM_TOL or init_err > _ROW_SUM_TOL:
            raise ValidationError(
                "not-stochastic",
                f"transition rows / initial must sum to 1 (errors {row_err:.2e}, {init_err:.2e})",
            )

    @property
    def k(self) -> int:
        return int(self.means.shape[0])

    @property
    def n_variables(self) -> int:
        return int(self.means.shape[1])


@dataclass
class ViterbiResult:
    """Most likely state path and its log joint probability."""

    states: np.ndarray
    log_joint: float

    def as_sequence(self, entity_id: str) -> DecodedSequence:
        return DecodedSequence(entity_id=entity_id, states=self.states, provenance="viterbi")


def from_estimates(
    states: ChangeStateSet,
    transitions: TransitionEstimate,
    variances: np.ndarray,
    metadata: dict | None = None,
) -> ChangeStateModel:
    """Assemble the model from k-means states and empirical estimates."""
    meta = {"source": "kmeans-init", "seed": states.seed, "inertia": states.inertia}
    if metadata:
        meta.update(metadata)
    return ChangeStateModel(
        means=states.centroids.copy(),
        variances=np.asarray(variances, dtype=float).copy(),
        transition=transitions.probabilities.copy(),
        initial=transitions.initial.copy(),
        variables=list(states.variables),
        metadata=meta,
    )


def _check_observations(model: ChangeStateModel, observations: np.ndarray) -> np.ndarray:
    obs = np.atleast_2d(np.asarray(observations, dtype=float))
    if obs.shape[0] == 0:
        raise ValidationError("empty-input", "empty observation sequence")
    if obs.shape[1] != model.n_variables:
        raise ValidationError(
            "dim-mismatch",
            f"observations have {obs.shape[1]} dimensions, model expects {model.n_variables}",
        )
    return obs


def log_emission(model: ChangeStateModel, state: int, observation: np.ndarray) -> float:
    """Diagonal-Gaussian log density of one observation under one state."""
    obs = np.asarray(observation, dtype=float)
    mu = model.means[state]
    var = model.variances[state]
    return float((-0.5 * (_LOG_2PI + np.log(var)) - (obs - mu) ** 2 / (2.0 * var)).sum())


def log_emission_matrix(model: ChangeStateModel, observations: np.ndarray) -> np.ndarray:
    """Log emission densities for every (timepoint, state) pair, shape (T, K)."""
    obs = _check_observations(model, observations)
    diff = obs[:, None, :] - model.means[None, :, :]
    var = model.variances[None, :, :]
    return (-0.5 * (_LOG_2PI + np.log(var)) - diff**2 / (2.0 * var)).sum(axis=2)


def viterbi(model: ChangeStateModel, observations: np.ndarray) -> ViterbiResult:
    """Decode the maximum-joint-probability state path in log space.

    Every argmax tie is broken toward the lowest state index, both in the
    recursion and in the final state choice.
    """
    obs = _check_observations(model, observations)
    t_len = obs.shape[0]
    log_b = log_emission_matrix(model, obs)
    log_a = np.log(model.transition)
    delta = np.log(model.initial) + log_b[0]
    backptr = np.zeros((t_len, model.k), dtype=int)
    for t in range(1, t_len):
        scores = delta[:, None] + log_a
        backptr[t] = np.argmax(scores, axis=0)
        delta = scores[backptr[t], np.arange(model.k)] + log_b[t]
    last = int(np.argmax(delta))
    path = np.empty(t_len, dtype=int)
    path[-1] = last
    for t in range(t_len - 1, 0, -1):
        path[t - 1] = backptr[t, path[t]]
    return ViterbiResult(states=path, log_joint=float(delta[last]))


def path_log_joint(model: ChangeStateModel, states: np.ndarray, observations: np.ndarray) -> float:
    """Log joint probability of a given state path and observation sequence."""
    obs = _check_observations(model, observations)
    states = np.asarray(states, dtype=int)
    if states.shape[0] != obs.shape[0]:
        raise ValidationError(
            "length-mismatch", f"path length {states.shape[0]} != observations {obs.shape[0]}"
        )
    log_b = log_emission_matrix(model, obs)
    total = float(np.log(model.initial[states[0]])) + float(log_b[0, states[0]])
    if states.shape[0] > 1:
        total += float(np.log(model.transition[states[:-1], states[1:]]).sum())
        total += float(log_b[np.arange(1, states.shape[0]), states[1:]].sum())
    return total


def sample(model: ChangeStateModel, t_len: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Draw a state path and matching change-vector observations.

    Deterministic given the seed: states come from the initial distribution
    and transition rows, observations from each state's diagonal Gaussian.
    """
    if t_len < 1:
        raise ValidationError("bad-length", f"sample length must be >= 1, got {t_len}")
    rng = np.random.default_rng(seed)
    states = np.empty(t_len, dtype=int)
    states[0] = rng.choice(model.k, p=model.initial)
    for t in range(1, t_len):
        states[t] = rng.choice(model.k, p=model.transition[states[t - 1]])
    noise = rng.standard_normal((t_len, model.n_variables))
    observations = model.means[states] + np.sqrt(model.variances[states]) * noise
    return states, observations


def integrate_changes(start: np.ndarray, changes: np.ndarray) -> np.ndarray:
    """Cumulatively apply change vectors to a start point.

    T changes produce a series of T+1 signal values beginning at ``start``.
    """
    start = np.atleast_1d(np.asarray(start, dtype=float))
    changes = np.asarray(changes, dtype=float)
    if changes.size == 0:
        return start[None, :].copy()
    if changes.ndim == 1:
        # A flat sequence is T scalar changes when start is scalar, else one D-vector.
        changes = changes[:, None] if start.shape[0] == 1 else changes[None, :]
    if changes.shape[1] != start.shape[0]:
        raise ValidationError(
            "dim-mismatch", f"changes have {changes.shape[1]} dimensions, start has {start.shape[0]}"
        )
    series = np.empty((changes.shape[0] + 1, start.shape[0]))
    series[0] = start
    np.cumsum(changes, axis=0, out=series[1:])
    series[1:] += start
    return series


def model_to_dict(model: ChangeStateModel, salient_factors: list[tuple[str, int]] | None = None) -> dict:
    """JSON-ready representation of the model."""
    if salient_factors is None:
        dims = np.argmax(np.abs(model.means), axis=1)
        salient_factors = [
            (model.variables[int(d)], int(np.sign(model.means[i, int(d)])))
            for i, d in enumerate(dims)
        ]
    return {
        "K": model.k,
        "centroids": model.means.tolist(),
        "variances": model.variances.tolist(),
        "transition": model.transition.tolist(),
        "initial": model.initial.tolist(),
        "salient_factors": [{"variable": v, "sign": s} for v, s in salient_factors],
        "seed": model.metadata.get("seed"),
        "inertia": model.metadata.get("inertia"),
        "metadata": {k: v for k, v in model.metadata.items() if k not in ("seed", "inertia")},
        "variables": list(model.variables),
    }


def model_from_dict(payload: dict) -> ChangeStateModel:
    meta = dict(payload.get("metadata", {}))
    if payload.get("seed") is not None:
        meta["seed"] = payload["seed"]
    if payload.get("inertia") is not None:
        meta["inertia"] = payload["inertia"]
    return ChangeStateModel(
        means=np.asarray(payload["centroids"], dtype=float),
        variances=np.asarray(payload["variances"], dtype=float),
        transition=np.asarray(payload["transition"], dtype=float),
        initial=np.asarray(payload["initial"], dtype=float),
        variables=list(payload["variables"]),
        metadata=meta,
    )


def save_model(model: ChangeStateModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), sort_keys=True, indent=2) + "\n")


def load_model(path: str | Path) -> ChangeStateModel:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError("bad-model-file", f"cannot read model JSON {path}: {exc}") from exc
    return model_from_dict(payload)

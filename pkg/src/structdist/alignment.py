"""Alignment distributions: monotone grid alignments, CTC, 1-to-1 matching.

A monotone alignment is a lattice path from cell (0, 0) to (n, m) built
from three moves, each scored on arrival: diag (match), down (delete),
right (insert).  Entries of the move tensor that would step outside the
grid must be -inf.

CTC is the classic blank-augmented alignment: the distribution is over
per-frame label paths that collapse (merge adjacent repeats, then drop
blanks) to a fixed target.  Blank is vocabulary index 0.

Exact partition/marginals/sampling for 1-to-1 matchings is intractable;
only the maximum assignment is provided.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InvalidProblem, VacuousDistribution
from .numerics import NEG_INF, as_log_tensor, lse, sample_log_categorical

DIAG, DOWN, RIGHT = 0, 1, 2
_MOVE_SRC = {DIAG: (-1, -1), DOWN: (-1, 0), RIGHT: (0, -1)}


@dataclass(frozen=True)
class MonotoneAlignmentCRF:
    move_potentials: np.ndarray  # [n+1, m+1, 3], moves {diag, down, right} into (i, j)

    family = "monotone_alignment"

    def __post_init__(self):
        object.__setattr__(
            self, "move_potentials", as_log_tensor(self.move_potentials, "move_potentials")
        )
        p = self.move_potentials
        if p.ndim != 3 or p.shape[2] != 3 or p.shape[0] < 2 or p.shape[1] < 2:
            raise InvalidProblem(
                f"move_potentials must have shape [n+1, m+1, 3] with n, m >= 1, got {p.shape}"
            )
        if not np.isneginf(p[0, :, DIAG]).all() or not np.isneginf(p[0, :, DOWN]).all():
            raise InvalidProblem("moves into row 0 from outside the grid must be -inf")
        if not np.isneginf(p[:, 0, DIAG]).all() or not np.isneginf(p[:, 0, RIGHT]).all():
            raise InvalidProblem("moves into column 0 from outside the grid must be -inf")

    @property
    def n(self) -> int:
        return self.move_potentials.shape[0] - 1

    @property
    def m(self) -> int:
        return self.move_potentials.shape[1] - 1

    def potentials(self) -> dict[str, np.ndarray]:
        return {"move_potentials": self.move_potentials}


def _nw_forward(a: MonotoneAlignmentCRF) -> np.ndarray:
    theta = a.move_potentials
    n, m = a.n, a.m
    alpha = np.full((n + 1, m + 1), NEG_INF)
    alpha[0, 0] = 0.0
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            terms = [
                alpha[i + di, j + dj] + theta[i, j, k]
                for k, (di, dj) in _MOVE_SRC.items()
                if i + di >= 0 and j + dj >= 0
            ]
            alpha[i, j] = lse(terms)
    return alpha


def nw_log_partition(a: MonotoneAlignmentCRF) -> float:
    return float(_nw_forward(a)[a.n, a.m])


def _nw_backward(a: MonotoneAlignmentCRF) -> np.ndarray:
    theta = a.move_potentials
    n, m = a.n, a.m
    beta = np.full((n + 1, m + 1), NEG_INF)
    beta[n, m] = 0.0
    for i in range(n, -1, -1):
        for j in range(m, -1, -1):
            if i == n and j == m:
                continue
            terms = []
            if i + 1 <= n and j + 1 <= m:
                terms.append(theta[i + 1, j + 1, DIAG] + beta[i + 1, j + 1])
            if i + 1 <= n:
                terms.append(theta[i + 1, j, DOWN] + beta[i + 1, j])
            if j + 1 <= m:
                terms.append(theta[i, j + 1, RIGHT] + beta[i, j + 1])
            beta[i, j] = lse(terms)
    return beta


def nw_marginals(a: MonotoneAlignmentCRF) -> dict[str, np.ndarray]:
    alpha = _nw_forward(a)
    beta = _nw_backward(a)
    log_z = alpha[a.n, a.m]
    if log_z == NEG_INF:
        raise VacuousDistribution("no alignment path has finite score")
    theta = a.move_potentials
    marg = np.zeros_like(theta)
    for i in range(a.n + 1):
        for j in range(a.m + 1):
            for k, (di, dj) in _MOVE_SRC.items():
                si, sj = i + di, j + dj
                if si >= 0 and sj >= 0:
                    marg[i, j, k] = np.exp(alpha[si, sj] + theta[i, j, k] + beta[i, j] - log_z)
    return {"move_potentials": marg}


def _nw_walk(a: MonotoneAlignmentCRF, alpha: np.ndarray, pick) -> dict[str, np.ndarray]:
    """Walk back from (n, m) choosing each incoming move with `pick(logits)`."""
    theta = a.move_potentials
    mask = np.zeros_like(theta)
    i, j = a.n, a.m
    while (i, j) != (0, 0):
        moves = [
            (k, i + di, j + dj)
            for k, (di, dj) in _MOVE_SRC.items()
            if i + di >= 0 and j + dj >= 0
        ]
        logits = np.array([alpha[si, sj] + theta[i, j, k] for k, si, sj in moves])
        choice = moves[pick(logits)]
        mask[i, j, choice[0]] = 1.0
        i, j = choice[1], choice[2]
    return {"move_potentials": mask}


def nw_argmax(a: MonotoneAlignmentCRF) -> dict[str, np.ndarray]:
    alpha = _nw_max_forward(a)
    if alpha[a.n, a.m] == NEG_INF:
        raise VacuousDistribution("no alignment path has finite score")
    return _nw_walk(a, alpha, lambda logits: int(np.argmax(logits)))


def nw_sample(a: MonotoneAlignmentCRF, rng: np.random.Generator) -> dict[str, np.ndarray]:
    alpha = _nw_forward(a)
    if alpha[a.n, a.m] == NEG_INF:
        raise VacuousDistribution("no alignment path has finite score")
    return _nw_walk(a, alpha, lambda logits: sample_log_categorical(rng, logits))


def _nw_max_forward(a: MonotoneAlignmentCRF) -> np.ndarray:
    theta = a.move_potentials
    n, m = a.n, a.m
    alpha = np.full((n + 1, m + 1), NEG_INF)
    alpha[0, 0] = 0.0
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            best = NEG_INF
            for k, (di, dj) in _MOVE_SRC.items():
                if i + di >= 0 and j + dj >= 0:
                    best = max(best, alpha[i + di, j + dj] + theta[i, j, k])
            alpha[i, j] = best
    return alpha


def validate_path_indicator(a: MonotoneAlignmentCRF, indicator: dict[str, np.ndarray]):
    mask = indicator["move_potentials"]
    if mask.shape != a.move_potentials.shape:
        raise InvalidProblem("indicator shape does not match move potentials")
    marked = int(np.count_nonzero(mask))
    i, j = a.n, a.m
    steps = 0
    while (i, j) != (0, 0):
        hot = np.argwhere(mask[i, j] > 0)
        if len(hot) != 1:
            raise InvalidProblem(f"path indicator must mark exactly one move into ({i}, {j})")
        k = int(hot[0][0])
        di, dj = _MOVE_SRC[k]
        i, j = i + di, j + dj
        if i < 0 or j < 0:
            raise InvalidProblem("path indicator steps outside the grid")
        steps += 1
    if steps != marked:
        raise InvalidProblem("path indicator marks moves off the path")


# ---------------------------------------------------------------------------
# CTC
# ---------------------------------------------------------------------------

BLANK = 0


@dataclass(frozen=True)
class CTCDist:
    frame_potentials: np.ndarray  # [T, V] per-frame log-potentials, blank at index 0
    target: tuple[int, ...]  # label sequence, entries in 1..V-1

    family = "ctc"

    def __post_init__(self):
        object.__setattr__(
            self, "frame_potentials", as_log_tensor(self.frame_potentials, "frame_potentials")
        )
        object.__setattr__(self, "target", tuple(int(t) for t in self.target))
        p = self.frame_potentials
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise InvalidProblem(f"frame_potentials must have shape [T, V], got {p.shape}")
        for t in self.target:
            if not (1 <= t < p.shape[1]):
                raise InvalidProblem(
                    f"target labels must lie in 1..{p.shape[1] - 1}, got {t}"
                )

    @property
    def num_frames(self) -> int:
        return self.frame_potentials.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.frame_potentials.shape[1]

    def potentials(self) -> dict[str, np.ndarray]:
        return {"frame_potentials": self.frame_potentials}


def _expanded_labels(target) -> list[int]:
    """Blank-interleaved state labels: [blank, z1, blank, z2, ..., blank]."""
    out = [BLANK]
    for z in target:
        out.extend((z, BLANK))
    return out


def _ctc_predecessors(labels: list[int], s: int) -> list[int]:
    preds = [s]
    if s >= 1:
        preds.append(s - 1)
    if s >= 2 and labels[s] != BLANK and labels[s] != labels[s - 2]:
        preds.append(s - 2)
    return preds


def _ctc_forward(c: CTCDist) -> tuple[np.ndarray, list[int]]:
    labels = _expanded_labels(c.target)
    theta = c.frame_potentials
    n_states = len(labels)
    alpha = np.full((c.num_frames, n_states), NEG_INF)
    alpha[0, 0] = theta[0, labels[0]]
    if n_states > 1:
        alpha[0, 1] = theta[0, labels[1]]
    for t in range(1, c.num_frames):
        for s in range(n_states):
            acc = lse([alpha[t - 1, p] for p in _ctc_predecessors(labels, s)])
            alpha[t, s] = acc + theta[t, labels[s]]
    return alpha, labels


def _ctc_final_states(n_states: int) -> list[int]:
    return [n_states - 1] if n_states == 1 else [n_states - 1, n_states - 2]


def ctc_log_partition(c: CTCDist) -> float:
    alpha, labels = _ctc_forward(c)
    return lse([alpha[-1, s] for s in _ctc_final_states(len(labels))])


def _ctc_backward(c: CTCDist, labels: list[int]) -> np.ndarray:
    theta = c.frame_potentials
    n_states = len(labels)
    succ: list[list[int]] = [[] for _ in range(n_states)]
    for s in range(n_states):
        for p in _ctc_predecessors(labels, s):
            succ[p].append(s)
    beta = np.full((c.num_frames, n_states), NEG_INF)
    for s in _ctc_final_states(n_states):
        beta[-1, s] = 0.0
    for t in range(c.num_frames - 2, -1, -1):
        for s in range(n_states):
            beta[t, s] = lse(
                [theta[t + 1, labels[s2]] + beta[t + 1, s2] for s2 in succ[s]]
            )
    return beta


def ctc_marginals(c: CTCDist) -> dict[str, np.ndarray]:
    """Per-frame vocabulary marginals [T, V]."""
    alpha, labels = _ctc_forward(c)
    log_z = lse([alpha[-1, s] for s in _ctc_final_states(len(labels))])
    if log_z == NEG_INF:
        raise VacuousDistribution("no frame path collapses to the target")
    beta = _ctc_backward(c, labels)
    marg = np.zeros_like(c.frame_potentials)
    post = np.exp(alpha + beta - log_z)
    for s, lab in enumerate(labels):
        marg[:, lab] += post[:, s]
    return {"frame_potentials": marg}


def _ctc_walk(c: CTCDist, lattice: np.ndarray, labels: list[int], pick) -> dict[str, np.ndarray]:
    finals = _ctc_final_states(len(labels))
    logits = np.array([lattice[-1, s] for s in finals])
    s = finals[pick(logits)]
    states = [s]
    for t in range(c.num_frames - 1, 0, -1):
        preds = _ctc_predecessors(labels, s)
        logits = np.array([lattice[t - 1, p] for p in preds])
        s = preds[pick(logits)]
        states.append(s)
    states.reverse()
    mask = np.zeros_like(c.frame_potentials)
    for t, s in enumerate(states):
        mask[t, labels[s]] = 1.0
    return {"frame_potentials": mask}


def ctc_argmax(c: CTCDist) -> dict[str, np.ndarray]:
    """Best frame path over the expanded lattice (not the best labeling)."""
    labels = _expanded_labels(c.target)
    theta = c.frame_potentials
    n_states = len(labels)
    alpha = np.full((c.num_frames, n_states), NEG_INF)
    alpha[0, 0] = theta[0, labels[0]]
    if n_states > 1:
        alpha[0, 1] = theta[0, labels[1]]
    for t in range(1, c.num_frames):
        for s in range(n_states):
            best = max(alpha[t - 1, p] for p in _ctc_predecessors(labels, s))
            alpha[t, s] = best + theta[t, labels[s]]
    if lse([alpha[-1, s] for s in _ctc_final_states(n_states)]) == NEG_INF:
        raise VacuousDistribution("no frame path collapses to the target")
    return _ctc_walk(c, alpha, labels, lambda logits: int(np.argmax(logits)))


def ctc_sample(c: CTCDist, rng: np.random.Generator) -> dict[str, np.ndarray]:
    alpha, labels = _ctc_forward(c)
    if lse([alpha[-1, s] for s in _ctc_final_states(len(labels))]) == NEG_INF:
        raise VacuousDistribution("no frame path collapses to the target")
    return _ctc_walk(c, alpha, labels, lambda logits: sample_log_categorical(rng, logits))


def collapse(path, blank: int = BLANK) -> tuple[int, ...]:
    """Merge adjacent repeats, then drop blanks."""
    out = []
    prev = None
    for x in path:
        if x != prev:
            out.append(x)
        prev = x
    return tuple(x for x in out if x != blank)


def validate_ctc_indicator(c: CTCDist, indicator: dict[str, np.ndarray]):
    mask = indicator["frame_potentials"]
    if mask.shape != c.frame_potentials.shape:
        raise InvalidProblem("indicator shape does not match frame potentials")
    if not np.array_equal(np.count_nonzero(mask, axis=1), np.ones(c.num_frames, dtype=int)):
        raise InvalidProblem("CTC indicator must mark exactly one label per frame")
    path = [int(np.argmax(row)) for row in mask]
    if collapse(path) != c.target:
        raise InvalidProblem("CTC indicator path does not collapse to the target")


# ---------------------------------------------------------------------------
# One-to-one matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OneToOneMatching:
    scores: np.ndarray  # [n, n] log-potentials for bijective assignments

    family = "one_to_one"

    def __post_init__(self):
        object.__setattr__(self, "scores", as_log_tensor(self.scores, "scores"))
        if self.scores.ndim != 2 or self.scores.shape[0] != self.scores.shape[1]:
            raise InvalidProblem(f"scores must be square, got {self.scores.shape}")

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    def potentials(self) -> dict[str, np.ndarray]:
        return {"scores": self.scores}


def _penalized(scores: np.ndarray) -> np.ndarray:
    finite = scores[np.isfinite(scores)]
    if finite.size == 0:
        raise VacuousDistribution("all assignments are forbidden")
    lo, hi = float(finite.min()), float(finite.max())
    penalty = lo - (scores.shape[0] * (hi - lo) + 1.0)
    return np.where(np.isneginf(scores), penalty, scores)


def _assignment_value(scores: np.ndarray, rows, cols) -> float:
    sub = scores[np.ix_(rows, cols)]
    r, c = linear_sum_assignment(_penalized(sub), maximize=True)
    return float(sub[r, c].sum())


def assignment_argmax(match: OneToOneMatching) -> dict[str, np.ndarray]:
    """Maximum-score permutation; ties break to the smallest column index
    at the first differing row."""
    scores = match.scores
    n = match.n
    work = _penalized(scores)
    rows, cols = linear_sum_assignment(work, maximize=True)
    if np.isneginf(scores[rows, cols]).any():
        raise VacuousDistribution("no permutation has finite score")
    best = float(work[rows, cols].sum())

    assignment = np.full(n, -1, dtype=int)
    free = list(range(n))
    prefix = 0.0
    for i in range(n):
        for c in sorted(free):
            rest_rows = list(range(i + 1, n))
            rest_cols = [x for x in free if x != c]
            tail = (
                _assignment_value(work, rest_rows, rest_cols) if rest_rows else 0.0
            )
            if prefix + work[i, c] + tail >= best - 1e-9:
                assignment[i] = c
                prefix += work[i, c]
                free.remove(c)
                break
        if assignment[i] < 0:  # numerical safety net
            assignment[i] = free.pop(0)
    if np.isneginf(scores[np.arange(n), assignment]).any():
        raise VacuousDistribution("no permutation has finite score")
    mask = np.zeros_like(scores)
    mask[np.arange(n), assignment] = 1.0
    return {"scores": mask}


def validate_assignment_indicator(match: OneToOneMatching, indicator: dict[str, np.ndarray]):
    mask = indicator["scores"]
    if mask.shape != match.scores.shape:
        raise InvalidProblem("indicator shape does not match scores")
    if not (
        np.array_equal(mask.sum(axis=0), np.ones(match.n))
        and np.array_equal(mask.sum(axis=1), np.ones(match.n))
    ):
        raise InvalidProblem("indicator must be a permutation matrix")

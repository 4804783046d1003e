"""Linear-chain and semi-Markov sequence CRFs.

Conventions: a linear chain over n positions and m tags has one initial
factor (over the first tag) plus n-1 transition factors, so the all-zero
chain normalizes to m**n paths.  The transition tensor is indexed
(step, previous tag, next tag) and may differ per step.

A semi-Markov segmentation is a tiling of [0, n) by labeled segments of
width at most s.  Segment potentials are indexed
(segment start, width-1, previous label, label); the first segment reads
its previous-label axis at index 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidProblem, VacuousDistribution
from .numerics import (
    LOG,
    NEG_INF,
    as_log_tensor,
    logsumexp,
    lse,
    sample_log_categorical,
    semiring_contract,
)


@dataclass(frozen=True)
class LinearChainCRF:
    init: np.ndarray  # [m] log-potentials over the first tag
    transitions: np.ndarray  # [n-1, m, m], (step, previous tag, next tag)

    family = "linear_chain"

    def __post_init__(self):
        object.__setattr__(self, "init", as_log_tensor(self.init, "init"))
        object.__setattr__(
            self, "transitions", as_log_tensor(self.transitions, "transitions")
        )
        if self.init.ndim != 1 or self.init.shape[0] < 1:
            raise InvalidProblem(f"init must be a non-empty vector, got {self.init.shape}")
        m = self.init.shape[0]
        if self.transitions.ndim != 3 or self.transitions.shape[1:] != (m, m):
            raise InvalidProblem(
                f"transitions must have shape [n-1, {m}, {m}], got {self.transitions.shape}"
            )

    @property
    def n(self) -> int:
        return self.transitions.shape[0] + 1

    @property
    def m(self) -> int:
        return self.init.shape[0]

    def potentials(self) -> dict[str, np.ndarray]:
        return {"init": self.init, "transitions": self.transitions}


def _forward(chain: LinearChainCRF) -> np.ndarray:
    """Alpha lattice [n, m]: alpha[t, b] = log-weight of prefixes ending in tag b."""
    alpha = np.empty((chain.n, chain.m))
    alpha[0] = chain.init
    for t in range(chain.n - 1):
        alpha[t + 1] = semiring_contract("a,ab->b", [alpha[t], chain.transitions[t]], LOG)
    return alpha


def _backward(chain: LinearChainCRF) -> np.ndarray:
    beta = np.zeros((chain.n, chain.m))
    for t in range(chain.n - 2, -1, -1):
        beta[t] = semiring_contract("ab,b->a", [chain.transitions[t], beta[t + 1]], LOG)
    return beta


def forward_log_partition(chain: LinearChainCRF) -> float:
    return lse(_forward(chain)[-1])


def chain_marginals(chain: LinearChainCRF) -> dict[str, np.ndarray]:
    """Gradient of the log-partition with respect to each log-potential."""
    alpha = _forward(chain)
    beta = _backward(chain)
    log_z = lse(alpha[-1])
    if log_z == NEG_INF:
        raise VacuousDistribution("no tag sequence has finite score")
    p_init = np.exp(chain.init + beta[0] - log_z)
    p_trans = np.exp(
        alpha[:-1, :, None] + chain.transitions + beta[1:, None, :] - log_z
    )
    return {"init": p_init, "transitions": p_trans}


def chain_argmax(chain: LinearChainCRF) -> dict[str, np.ndarray]:
    """Viterbi path as an indicator; ties resolve to the lowest tag index."""
    n, m = chain.n, chain.m
    score = np.empty((n, m))
    back = np.zeros((n, m), dtype=int)
    score[0] = chain.init
    for t in range(n - 1):
        cand = score[t][:, None] + chain.transitions[t]
        back[t + 1] = np.argmax(cand, axis=0)
        score[t + 1] = np.max(cand, axis=0)
    if np.max(score[-1]) == NEG_INF:
        raise VacuousDistribution("no tag sequence has finite score")
    tags = np.zeros(n, dtype=int)
    tags[-1] = int(np.argmax(score[-1]))
    for t in range(n - 2, -1, -1):
        tags[t] = back[t + 1][tags[t + 1]]
    return _tags_to_indicator(chain, tags)


def chain_sample(chain: LinearChainCRF, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Forward filtering, backward sampling."""
    alpha = _forward(chain)
    if lse(alpha[-1]) == NEG_INF:
        raise VacuousDistribution("no tag sequence has finite score")
    n = chain.n
    tags = np.zeros(n, dtype=int)
    tags[-1] = sample_log_categorical(rng, alpha[-1])
    for t in range(n - 2, -1, -1):
        tags[t] = sample_log_categorical(
            rng, alpha[t] + chain.transitions[t][:, tags[t + 1]]
        )
    return _tags_to_indicator(chain, tags)


def _tags_to_indicator(chain: LinearChainCRF, tags) -> dict[str, np.ndarray]:
    init = np.zeros(chain.m)
    init[tags[0]] = 1.0
    trans = np.zeros_like(chain.transitions)
    for t in range(chain.n - 1):
        trans[t, tags[t], tags[t + 1]] = 1.0
    return {"init": init, "transitions": trans}


def indicator_to_tags(chain: LinearChainCRF, indicator: dict[str, np.ndarray]) -> np.ndarray:
    """Validate a chain indicator and return its tag sequence."""
    init = indicator["init"]
    trans = indicator["transitions"]
    if init.shape != chain.init.shape or trans.shape != chain.transitions.shape:
        raise InvalidProblem("indicator shape does not match chain potentials")
    if np.count_nonzero(init) != 1:
        raise InvalidProblem("chain indicator must mark exactly one initial tag")
    tags = [int(np.argmax(init))]
    for t in range(chain.n - 1):
        hot = np.argwhere(trans[t] > 0)
        if len(hot) != 1:
            raise InvalidProblem(f"chain indicator must mark one transition at step {t}")
        a, b = map(int, hot[0])
        if a != tags[-1]:
            raise InvalidProblem(f"chain indicator is disconnected at step {t}")
        tags.append(b)
    return np.asarray(tags, dtype=int)


def pad_chain(chain: LinearChainCRF, total_len: int) -> LinearChainCRF:
    """Extend to `total_len` positions with inference-neutral padding.

    Padded steps carry the log-space identity transition (0 on the
    diagonal, -inf elsewhere): each path extends uniquely by repeating its
    final tag, so the log-partition is unchanged.
    """
    if total_len < chain.n:
        raise InvalidProblem("padded length must not shrink the chain")
    extra = total_len - chain.n
    if extra == 0:
        return chain
    pad = np.full((extra, chain.m, chain.m), NEG_INF)
    for i in range(chain.m):
        pad[:, i, i] = 0.0
    return LinearChainCRF(chain.init, np.concatenate([chain.transitions, pad], axis=0))


def from_hmm(transition, emission, init, observations) -> LinearChainCRF:
    """Fold HMM parameters and an observation sequence into a chain CRF.

    The resulting log-partition equals the HMM log-likelihood of the
    observations.  Rows of `transition`/`emission` and `init` must be
    probability vectors (sum to 1 within 1e-9).
    """
    transition = np.asarray(transition, dtype=np.float64)
    emission = np.asarray(emission, dtype=np.float64)
    init = np.asarray(init, dtype=np.float64)
    obs = np.asarray(observations, dtype=int)
    m, v = emission.shape
    if transition.shape != (m, m):
        raise InvalidProblem("transition matrix shape does not match emission rows")
    for name, mat in (("transition", transition), ("emission", emission)):
        if np.any(np.abs(mat.sum(axis=1) - 1.0) > 1e-9):
            raise InvalidProblem(f"{name} rows must sum to 1")
    if abs(init.sum() - 1.0) > 1e-9:
        raise InvalidProblem("init must sum to 1")
    if obs.ndim != 1 or len(obs) < 1:
        raise InvalidProblem("observations must be a non-empty vector")
    if obs.min() < 0 or obs.max() >= v:
        raise InvalidProblem("observation ids must be < vocabulary size")
    with np.errstate(divide="ignore"):
        log_t = np.log(transition)
        log_e = np.log(emission)
        log_i = np.log(init)
    n = len(obs)
    chain_init = log_i + log_e[:, obs[0]]
    trans = np.empty((n - 1, m, m))
    for t in range(1, n):
        trans[t - 1] = log_t + log_e[:, obs[t]][None, :]
    return LinearChainCRF(chain_init, trans)


@dataclass(frozen=True)
class SemiMarkovCRF:
    segment_potentials: np.ndarray  # [n, s, m, m], (start, width-1, prev label, label)

    family = "semi_markov"

    def __post_init__(self):
        object.__setattr__(
            self,
            "segment_potentials",
            as_log_tensor(self.segment_potentials, "segment_potentials"),
        )
        p = self.segment_potentials
        if p.ndim != 4 or p.shape[2] != p.shape[3]:
            raise InvalidProblem(
                f"segment_potentials must have shape [n, s, m, m], got {p.shape}"
            )
        if not (1 <= p.shape[1] <= p.shape[0]):
            raise InvalidProblem("max segment width s must satisfy 1 <= s <= n")

    @property
    def n(self) -> int:
        return self.segment_potentials.shape[0]

    @property
    def s(self) -> int:
        return self.segment_potentials.shape[1]

    @property
    def m(self) -> int:
        return self.segment_potentials.shape[2]

    def potentials(self) -> dict[str, np.ndarray]:
        return {"segment_potentials": self.segment_potentials}


def _sm_forward(smc: SemiMarkovCRF) -> np.ndarray:
    """alpha[t, l] = log-weight of segmentations of [0, t) ending in label l.

    alpha[0] is the virtual start state: label 0 with weight one, so the
    first segment reads its previous-label axis at index 0.
    """
    theta = smc.segment_potentials
    alpha = np.full((smc.n + 1, smc.m), NEG_INF)
    alpha[0, 0] = 0.0
    for t in range(1, smc.n + 1):
        terms = []
        for w in range(1, min(smc.s, t) + 1):
            # segment [t-w, t) labeled l, previous label p
            terms.append(alpha[t - w][:, None] + theta[t - w, w - 1])
        alpha[t] = logsumexp(np.stack(terms).reshape(-1, smc.m), axis=0)
    return alpha


def semi_markov_log_partition(smc: SemiMarkovCRF) -> float:
    return lse(_sm_forward(smc)[-1])


def _sm_backward(smc: SemiMarkovCRF) -> np.ndarray:
    theta = smc.segment_potentials
    beta = np.full((smc.n + 1, smc.m), NEG_INF)
    beta[smc.n] = 0.0
    for t in range(smc.n - 1, -1, -1):
        terms = []
        for w in range(1, min(smc.s, smc.n - t) + 1):
            terms.append(theta[t, w - 1] + beta[t + w][None, :])
        stacked = np.stack(terms)  # [w, prev, label]
        beta[t] = logsumexp(logsumexp(stacked, axis=2), axis=0)
    return beta


def semi_markov_marginals(smc: SemiMarkovCRF) -> dict[str, np.ndarray]:
    alpha = _sm_forward(smc)
    beta = _sm_backward(smc)
    log_z = lse(alpha[-1])
    if log_z == NEG_INF:
        raise VacuousDistribution("no labeled segmentation has finite score")
    theta = smc.segment_potentials
    marg = np.zeros_like(theta)
    for t in range(smc.n):
        for w in range(1, min(smc.s, smc.n - t) + 1):
            marg[t, w - 1] = np.exp(
                alpha[t][:, None] + theta[t, w - 1] + beta[t + w][None, :] - log_z
            )
    return {"segment_potentials": marg}


def semi_markov_argmax(smc: SemiMarkovCRF) -> dict[str, np.ndarray]:
    theta = smc.segment_potentials
    score = np.full((smc.n + 1, smc.m), NEG_INF)
    score[0, 0] = 0.0
    back: dict[tuple[int, int], tuple[int, int]] = {}
    for t in range(1, smc.n + 1):
        for l in range(smc.m):
            best = NEG_INF
            arg = None
            for w in range(1, min(smc.s, t) + 1):
                cand = score[t - w] + theta[t - w, w - 1, :, l]
                p = int(np.argmax(cand))
                if cand[p] > best:
                    best = cand[p]
                    arg = (w, p)
            score[t, l] = best
            if arg is not None:
                back[(t, l)] = arg
    if np.max(score[-1]) == NEG_INF:
        raise VacuousDistribution("no labeled segmentation has finite score")
    segments = []
    t, l = smc.n, int(np.argmax(score[-1]))
    while t > 0:
        w, p = back[(t, l)]
        segments.append((t - w, w, p, l))
        t, l = t - w, p
    return _segments_to_indicator(smc, segments[::-1])


def semi_markov_sample(smc: SemiMarkovCRF, rng: np.random.Generator) -> dict[str, np.ndarray]:
    alpha = _sm_forward(smc)
    if lse(alpha[-1]) == NEG_INF:
        raise VacuousDistribution("no labeled segmentation has finite score")
    theta = smc.segment_potentials
    segments = []
    t = smc.n
    l = sample_log_categorical(rng, alpha[-1])
    while t > 0:
        widths = list(range(1, min(smc.s, t) + 1))
        logits = np.stack([alpha[t - w] + theta[t - w, w - 1, :, l] for w in widths])
        flat = sample_log_categorical(rng, logits)
        w = widths[flat // smc.m]
        p = flat % smc.m
        segments.append((t - w, w, p, l))
        t, l = t - w, p
    return _segments_to_indicator(smc, segments[::-1])


def _segments_to_indicator(smc: SemiMarkovCRF, segments) -> dict[str, np.ndarray]:
    mask = np.zeros_like(smc.segment_potentials)
    for start, width, prev, label in segments:
        mask[start, width - 1, prev, label] = 1.0
    return {"segment_potentials": mask}


def indicator_to_segments(smc: SemiMarkovCRF, indicator: dict[str, np.ndarray]):
    """Validate a segmentation indicator; returns [(start, width, prev, label)]."""
    mask = indicator["segment_potentials"]
    if mask.shape != smc.segment_potentials.shape:
        raise InvalidProblem("indicator shape does not match segment potentials")
    hot = sorted(map(tuple, np.argwhere(mask > 0)))
    segments = [(int(t), int(w) + 1, int(p), int(l)) for t, w, p, l in hot]
    pos, prev_label = 0, 0
    for start, width, prev, label in segments:
        if start != pos or prev != prev_label:
            raise InvalidProblem("segments do not tile the sequence consistently")
        pos += width
        prev_label = label
    if pos != smc.n:
        raise InvalidProblem("segments do not cover the full sequence")
    return segments

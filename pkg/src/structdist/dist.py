"""The uniform distribution contract: eight structure families behind one
set of inference operations.

log_partition, marginals, argmax, sample and log_prob dispatch to the
family algorithm.  Entropy, cross-entropy and KL divergence are derived
from marginals and log-partitions alone:

    H(p, q) = logZ_q - sum_e p(e) * theta_q(e)
    H(p)    = H(p, p)
    KL(p||q) = H(p, q) - H(p)

with the convention that a part of marginal 0 contributes exactly 0 even
when theta_q(e) is -inf.  When p puts mass on a part that q forbids the
cross-entropy is +inf.
"""

from __future__ import annotations

from typing import Union

import numpy as np

from . import alignment, chain, constituency, spanning
from .alignment import CTCDist, MonotoneAlignmentCRF, OneToOneMatching
from .chain import LinearChainCRF, SemiMarkovCRF
from .constituency import PCFG, TreeCRF
from .errors import (
    InvalidProblem,
    ONE_TO_ONE_REASON,
    UnsupportedInference,
)
from .numerics import NEG_INF, masked_dot
from .spanning import SpanningTreeCRF

StructuredDistribution = Union[
    LinearChainCRF,
    SemiMarkovCRF,
    MonotoneAlignmentCRF,
    CTCDist,
    OneToOneMatching,
    TreeCRF,
    PCFG,
    SpanningTreeCRF,
]

FAMILIES = {
    "linear_chain": LinearChainCRF,
    "semi_markov": SemiMarkovCRF,
    "monotone_alignment": MonotoneAlignmentCRF,
    "ctc": CTCDist,
    "one_to_one": OneToOneMatching,
    "tree_crf": TreeCRF,
    "pcfg": PCFG,
    "spanning_tree": SpanningTreeCRF,
}


def _reject_one_to_one(dist):
    if isinstance(dist, OneToOneMatching):
        raise UnsupportedInference(ONE_TO_ONE_REASON)


# ---------------------------------------------------------------------------
# log-partition
# ---------------------------------------------------------------------------


def log_partition_info(dist) -> tuple[float, str]:
    _reject_one_to_one(dist)
    if isinstance(dist, LinearChainCRF):
        return chain.forward_log_partition(dist), "forward"
    if isinstance(dist, SemiMarkovCRF):
        return chain.semi_markov_log_partition(dist), "semi-markov-forward"
    if isinstance(dist, MonotoneAlignmentCRF):
        return alignment.nw_log_partition(dist), "needleman-wunsch"
    if isinstance(dist, CTCDist):
        return alignment.ctc_log_partition(dist), "ctc-forward"
    if isinstance(dist, TreeCRF):
        return constituency.cky_log_partition(dist), "cky-inside"
    if isinstance(dist, PCFG):
        return constituency.pcfg_inside(dist), "pcfg-inside"
    if isinstance(dist, SpanningTreeCRF):
        return spanning.span_log_partition(dist)
    raise InvalidProblem(f"unknown distribution type {type(dist).__name__}")


def log_partition(dist) -> float:
    return log_partition_info(dist)[0]


# ---------------------------------------------------------------------------
# marginals: public view and the full gradient of logZ
# ---------------------------------------------------------------------------


def potential_marginals(dist) -> dict[str, np.ndarray]:
    """Gradient of log_partition w.r.t. every log-potential tensor.

    For most families this coincides with `marginals`; for PCFGs the rule
    entries are expected anchored counts and may exceed 1.
    """
    _reject_one_to_one(dist)
    if isinstance(dist, LinearChainCRF):
        return chain.chain_marginals(dist)
    if isinstance(dist, SemiMarkovCRF):
        return chain.semi_markov_marginals(dist)
    if isinstance(dist, MonotoneAlignmentCRF):
        return alignment.nw_marginals(dist)
    if isinstance(dist, CTCDist):
        return alignment.ctc_marginals(dist)
    if isinstance(dist, TreeCRF):
        return constituency.tree_marginals(dist)
    if isinstance(dist, PCFG):
        return constituency.pcfg_gradients(dist)[1]
    if isinstance(dist, SpanningTreeCRF):
        return {"adjacency": spanning.span_marginals(dist)[0]}
    raise InvalidProblem(f"unknown distribution type {type(dist).__name__}")


def marginals_info(dist) -> tuple[dict[str, np.ndarray], str]:
    _reject_one_to_one(dist)
    if isinstance(dist, SpanningTreeCRF):
        marg, algo = spanning.span_marginals(dist)
        return {"adjacency": marg}, algo
    if isinstance(dist, PCFG):
        # constituent marginals: the gradient w.r.t. the span mask
        return {"sticky": constituency.pcfg_gradients(dist)[1]["sticky"]}, "pcfg-inside"
    marg = potential_marginals(dist)
    return marg, log_partition_info(dist)[1]


def marginals(dist) -> dict[str, np.ndarray]:
    return marginals_info(dist)[0]


# ---------------------------------------------------------------------------
# argmax
# ---------------------------------------------------------------------------


def argmax_info(dist) -> tuple[dict[str, np.ndarray], float, str]:
    """(indicator, score of the best structure, algorithm)."""
    if isinstance(dist, LinearChainCRF):
        ind, algo = chain.chain_argmax(dist), "viterbi"
    elif isinstance(dist, SemiMarkovCRF):
        ind, algo = chain.semi_markov_argmax(dist), "semi-markov-viterbi"
    elif isinstance(dist, MonotoneAlignmentCRF):
        ind, algo = alignment.nw_argmax(dist), "max-plus-needleman-wunsch"
    elif isinstance(dist, CTCDist):
        ind, algo = alignment.ctc_argmax(dist), "max-plus-ctc"
    elif isinstance(dist, OneToOneMatching):
        ind, algo = alignment.assignment_argmax(dist), "jonker-volgenant"
    elif isinstance(dist, TreeCRF):
        ind, algo = constituency.tree_argmax(dist), "max-plus-cky"
    elif isinstance(dist, PCFG):
        ind, algo = constituency.pcfg_argmax(dist), "max-plus-pcfg"
        return ind, _pcfg_best_derivation_score(dist), algo
    elif isinstance(dist, SpanningTreeCRF):
        ind, algo = spanning.span_argmax(dist)
    else:
        raise InvalidProblem(f"unknown distribution type {type(dist).__name__}")
    score = structure_score(dist, ind)
    return ind, score, algo


def _pcfg_best_derivation_score(dist: PCFG) -> float:
    return constituency.pcfg_max_score(dist)


def argmax(dist) -> dict[str, np.ndarray]:
    return argmax_info(dist)[0]


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_info(
    dist, seed: int, num: int = 1, algorithm: str | None = None
) -> tuple[list[dict[str, np.ndarray]], str]:
    """Draw `num` exact samples from one seeded generator stream."""
    _reject_one_to_one(dist)
    if num < 1:
        raise InvalidProblem("num must be >= 1")
    if algorithm is not None and not isinstance(dist, SpanningTreeCRF):
        raise InvalidProblem("sampler overrides apply to spanning trees only")
    rng = np.random.default_rng(int(seed))
    out = []
    algo = ""
    for _ in range(num):
        if isinstance(dist, LinearChainCRF):
            ind, algo = chain.chain_sample(dist, rng), "forward-filtering-backward-sampling"
        elif isinstance(dist, SemiMarkovCRF):
            ind, algo = (
                chain.semi_markov_sample(dist, rng),
                "forward-filtering-backward-sampling",
            )
        elif isinstance(dist, MonotoneAlignmentCRF):
            ind, algo = alignment.nw_sample(dist, rng), "forward-filtering-backward-sampling"
        elif isinstance(dist, CTCDist):
            ind, algo = alignment.ctc_sample(dist, rng), "forward-filtering-backward-sampling"
        elif isinstance(dist, TreeCRF):
            ind, algo = constituency.tree_sample(dist, rng), "cky-sampling"
        elif isinstance(dist, PCFG):
            ind, algo = constituency.pcfg_sample(dist, rng), "pcfg-sampling"
        elif isinstance(dist, SpanningTreeCRF):
            ind, algo = spanning.span_sample(dist, rng, algorithm)
        else:
            raise InvalidProblem(f"unknown distribution type {type(dist).__name__}")
        out.append(ind)
    return out, algo


def sample(dist, seed: int, algorithm: str | None = None) -> dict[str, np.ndarray]:
    return sample_info(dist, seed, 1, algorithm)[0][0]


# ---------------------------------------------------------------------------
# log-prob of a given structure
# ---------------------------------------------------------------------------


def validate_indicator(dist, indicator: dict[str, np.ndarray]):
    ind = {k: np.asarray(v, dtype=np.float64) for k, v in indicator.items()}
    for key, mask in ind.items():
        bad = ~((mask == 0.0) | (mask == 1.0))
        if bad.any():
            raise InvalidProblem(f"indicator {key!r} entries must be 0 or 1")
    if isinstance(dist, LinearChainCRF):
        chain.indicator_to_tags(dist, ind)
    elif isinstance(dist, SemiMarkovCRF):
        chain.indicator_to_segments(dist, ind)
    elif isinstance(dist, MonotoneAlignmentCRF):
        alignment.validate_path_indicator(dist, ind)
    elif isinstance(dist, CTCDist):
        alignment.validate_ctc_indicator(dist, ind)
    elif isinstance(dist, OneToOneMatching):
        alignment.validate_assignment_indicator(dist, ind)
    elif isinstance(dist, TreeCRF):
        constituency.validate_tree_indicator(dist, ind)
    elif isinstance(dist, PCFG):
        constituency.validate_pcfg_indicator(dist, ind)
    elif isinstance(dist, SpanningTreeCRF):
        spanning.validate_tree_indicator(dist, ind)
    else:
        raise InvalidProblem(f"unknown distribution type {type(dist).__name__}")
    return ind


def structure_score(dist, indicator: dict[str, np.ndarray]) -> float:
    """Total log-potential of the parts marked by the indicator."""
    total = 0.0
    pots = dist.potentials()
    for key, mask in indicator.items():
        part = masked_dot(mask, pots[key])
        if part == NEG_INF:
            return NEG_INF
        total += part
    return total


def log_prob_info(dist, indicator: dict[str, np.ndarray]) -> tuple[float, str]:
    _reject_one_to_one(dist)
    ind = validate_indicator(dist, indicator)
    if isinstance(dist, PCFG):
        spans = [(int(i), int(j)) for i, j in np.argwhere(ind["sticky"] > 0)]
        masked = constituency.pcfg_masked_inside(dist, spans)
        if masked == NEG_INF:
            return NEG_INF, "pcfg-masked-inside"
        return masked - constituency.pcfg_inside(dist), "pcfg-masked-inside"
    score = structure_score(dist, ind)
    if score == NEG_INF:
        return NEG_INF, log_partition_info(dist)[1]
    log_z, algo = log_partition_info(dist)
    return score - log_z, algo


def log_prob(dist, indicator) -> float:
    return log_prob_info(dist, indicator)[0]


# ---------------------------------------------------------------------------
# entropy / cross-entropy / KL
# ---------------------------------------------------------------------------


def _same_factorization(p, q):
    if type(p) is not type(q):
        raise InvalidProblem("cross-entropy requires distributions of the same family")
    p_pots, q_pots = p.potentials(), q.potentials()
    for key in p_pots:
        if p_pots[key].shape != q_pots[key].shape:
            raise InvalidProblem(f"config mismatch: {key} shapes differ")
    if isinstance(p, CTCDist) and p.target != q.target:
        raise InvalidProblem("config mismatch: CTC targets differ")
    if isinstance(p, SpanningTreeCRF):
        if (p.directed, p.projective, p.single_root_edge) != (
            q.directed,
            q.projective,
            q.single_root_edge,
        ):
            raise InvalidProblem("config mismatch: spanning-tree flags differ")


def _expected_score_under(marg: dict[str, np.ndarray], q_pots: dict[str, np.ndarray]) -> float:
    total = 0.0
    for key, m in marg.items():
        part = masked_dot(m, q_pots[key])
        if part == NEG_INF:
            return NEG_INF
        total += part
    return total


def cross_entropy_info(p, q) -> tuple[float, str]:
    _reject_one_to_one(p)
    _reject_one_to_one(q)
    _same_factorization(p, q)
    marg_p = potential_marginals(p)
    log_zq, algo = log_partition_info(q)
    expected = _expected_score_under(marg_p, q.potentials())
    if expected == NEG_INF:
        return float("inf"), algo  # supp(p) not contained in supp(q)
    return log_zq - expected, algo


def cross_entropy(p, q) -> float:
    return cross_entropy_info(p, q)[0]


def entropy_info(dist) -> tuple[float, str]:
    return cross_entropy_info(dist, dist)


def entropy(dist) -> float:
    return entropy_info(dist)[0]


def kl_divergence_info(p, q) -> tuple[float, str]:
    h_pq, algo = cross_entropy_info(p, q)
    h_p, _ = entropy_info(p)
    return h_pq - h_p, algo


def kl_divergence(p, q) -> float:
    return kl_divergence_info(p, q)[0]


# ---------------------------------------------------------------------------
# batching
# ---------------------------------------------------------------------------


def batch_map(op, dists, *args, **kwargs) -> list:
    """Apply one inference operation across a batch of instances.

    Instances may have different sizes; padded positions must already be
    inference-neutral (see e.g. chain.pad_chain for the chain convention).
    """
    return [op(d, *args, **kwargs) for d in dists]

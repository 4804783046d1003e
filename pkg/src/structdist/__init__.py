"""Exact probabilistic inference for structured distributions.

Families: linear-chain and semi-Markov CRFs, monotone alignments, CTC,
one-to-one matchings (argmax only), span-factored tree CRFs, PCFGs, and
eight spanning-tree variants.  Each family supports log-partition,
marginals, argmax, seeded exact sampling, log-probability, entropy,
cross-entropy and KL divergence, all verified against brute-force
enumeration oracles.
"""

from .alignment import (
    CTCDist,
    MonotoneAlignmentCRF,
    OneToOneMatching,
    assignment_argmax,
    ctc_log_partition,
    nw_log_partition,
)
from .chain import (
    LinearChainCRF,
    SemiMarkovCRF,
    forward_log_partition,
    from_hmm,
    semi_markov_log_partition,
)
from .constituency import (
    PCFG,
    TreeCRF,
    cky_log_partition,
    pcfg_inside,
    pcfg_masked_inside,
)
from .dist import (
    FAMILIES,
    StructuredDistribution,
    argmax,
    argmax_info,
    batch_map,
    cross_entropy,
    entropy,
    kl_divergence,
    log_partition,
    log_partition_info,
    log_prob,
    marginals,
    marginals_info,
    sample,
    sample_info,
    structure_score,
    validate_indicator,
)
from .errors import (
    InvalidProblem,
    SamplerStepLimit,
    StructDistError,
    UnsupportedInference,
    VacuousDistribution,
)
from .numerics import (
    LOG,
    MAX_PLUS,
    Semiring,
    logsumexp,
    semiring_contract,
    signed_log_det,
)
from .spanning import (
    SpanningTreeCRF,
    cle_argmax,
    colbourn_sample,
    colbourn_sample_arcs,
    eisner_log_partition,
    kuhlmann_argmax,
    mtt_log_partition,
    undirected_to_directed,
    wilson_sample,
    wilson_sample_arcs,
)

__version__ = "0.1.0"

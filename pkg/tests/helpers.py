"""Shared builders and statistics helpers for the test suite."""

import numpy as np
from scipy.stats import chi2_contingency, chisquare

import structdist as sd
from structdist import oracle

NEG_INF = float("-inf")


def rand_chain(seed, n=4, m=2):
    rng = np.random.default_rng(seed)
    return sd.LinearChainCRF(rng.normal(size=m), rng.normal(size=(n - 1, m, m)))


def rand_semi_markov(seed, n=4, s=2, m=2):
    rng = np.random.default_rng(seed)
    return sd.SemiMarkovCRF(rng.normal(size=(n, s, m, m)))


def rand_alignment(seed, n=3, m=3):
    rng = np.random.default_rng(seed)
    moves = rng.normal(size=(n + 1, m + 1, 3))
    moves[0, :, 0] = NEG_INF
    moves[0, :, 1] = NEG_INF
    moves[:, 0, 0] = NEG_INF
    moves[:, 0, 2] = NEG_INF
    return sd.MonotoneAlignmentCRF(moves)


def zero_alignment(n, m):
    moves = np.zeros((n + 1, m + 1, 3))
    moves[0, :, 0] = NEG_INF
    moves[0, :, 1] = NEG_INF
    moves[:, 0, 0] = NEG_INF
    moves[:, 0, 2] = NEG_INF
    return sd.MonotoneAlignmentCRF(moves)


def rand_ctc(seed, num_frames=4, vocab=3, target_len=2):
    rng = np.random.default_rng(seed)
    target = tuple(int(x) for x in rng.integers(1, vocab, size=target_len))
    return sd.CTCDist(rng.normal(size=(num_frames, vocab)), target)


def rand_tree(seed, n=4, m=2):
    rng = np.random.default_rng(seed)
    return sd.TreeCRF(rng.normal(size=(n, n, m)))


def rand_pcfg(seed, n=3, nt=2, pt=2):
    rng = np.random.default_rng(seed)
    root = rng.normal(size=nt)
    root = root - sd.logsumexp(root, axis=0)
    rules = rng.normal(size=(nt, nt + pt, nt + pt))
    rules = rules - sd.logsumexp(rules.reshape(nt, -1), axis=1)[:, None, None]
    return sd.PCFG(root, rules, rng.normal(size=(n, pt)))


def rand_matching(seed, n=4):
    rng = np.random.default_rng(seed)
    return sd.OneToOneMatching(rng.normal(size=(n, n)))


def rand_spanning(seed, n=4, directed=True, projective=False, single_root_edge=False):
    rng = np.random.default_rng(seed)
    adj = rng.normal(size=(n + 1, n + 1))
    adj[:, 0] = NEG_INF
    np.fill_diagonal(adj, NEG_INF)
    if not directed:
        upper = np.triu(adj[1:, 1:], 1)
        block = upper + upper.T
        np.fill_diagonal(block, NEG_INF)
        adj[1:, 1:] = block
    return sd.SpanningTreeCRF(
        adj, directed=directed, projective=projective, single_root_edge=single_root_edge
    )


def zero_spanning(n, directed=True, projective=False, single_root_edge=False):
    adj = np.zeros((n + 1, n + 1))
    adj[:, 0] = NEG_INF
    np.fill_diagonal(adj, NEG_INF)
    return sd.SpanningTreeCRF(
        adj, directed=directed, projective=projective, single_root_edge=single_root_edge
    )


def indicator_key(indicator):
    """Canonical hashable form of an indicator dict."""
    return tuple(
        (name, tuple(np.flatnonzero(np.asarray(mask).ravel() > 0).tolist()))
        for name, mask in sorted(indicator.items())
    )


def structure_chi_square(dist, samples, ef=None) -> float:
    """Goodness-of-fit p-value of sampled structures against oracle
    probabilities; bins with expected count < 5 are pooled."""
    ef = ef or oracle.enumerate_structures(dist)
    probs = oracle.oracle_probabilities(ef, dist.potentials())
    expected = {indicator_key(ind): p for ind, p in zip(ef.indicators, probs)}
    counts = {}
    for s in samples:
        key = indicator_key(s)
        assert key in expected, "sampler produced a structure outside the support"
        counts[key] = counts.get(key, 0) + 1
    keys = list(expected)
    obs = np.array([counts.get(k, 0) for k in keys], dtype=float)
    exp = np.array([expected[k] for k in keys]) * len(samples)
    big = exp >= 5
    if (~big).any():
        obs = np.append(obs[big], obs[~big].sum())
        exp = np.append(exp[big], exp[~big].sum())
    exp = exp * obs.sum() / exp.sum()
    return float(chisquare(obs, exp).pvalue)


def two_sample_chi_square(samples_a, samples_b) -> float:
    counts_a, counts_b = {}, {}
    for s in samples_a:
        k = indicator_key(s)
        counts_a[k] = counts_a.get(k, 0) + 1
    for s in samples_b:
        k = indicator_key(s)
        counts_b[k] = counts_b.get(k, 0) + 1
    keys = sorted(set(counts_a) | set(counts_b))
    table = np.array(
        [[counts_a.get(k, 0) for k in keys], [counts_b.get(k, 0) for k in keys]], dtype=float
    )
    pooled = table.sum(axis=0)
    keep = pooled >= 10
    if (~keep).any():
        table = np.hstack([table[:, keep], table[:, ~keep].sum(axis=1, keepdims=True)])
    return float(chi2_contingency(table).pvalue)


def finite_difference_marginals(dist, rebuild, tensors, step=1e-4):
    """Central finite differences of log_partition at every finite entry."""
    grads = {}
    for key, arr in tensors.items():
        work = arr.copy()
        grad = np.zeros_like(work)
        flat = work.ravel()
        flat_grad = grad.ravel()
        for idx in range(flat.size):
            if not np.isfinite(flat[idx]):
                continue
            orig = flat[idx]
            flat[idx] = orig + step
            up = sd.log_partition(rebuild({**tensors, key: work}))
            flat[idx] = orig - step
            down = sd.log_partition(rebuild({**tensors, key: work}))
            flat[idx] = orig
            flat_grad[idx] = (up - down) / (2 * step)
        grads[key] = grad
    return grads

"""Brute-force ground truth: exhaustive enumeration and exact reference
inference for desk-scale instances.

Every family is enumerated into a list of scoring masks keyed like the
family's potential tensors; a structure's score is the masked inner
product with the potentials.  PCFG structures additionally carry anchored
rule counts (which may exceed 1) so that expectations of rule usage are
exact.  Log-sums over the enumeration are compensated via math.fsum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import singledispatch

import numpy as np

from .alignment import (
    _MOVE_SRC,
    CTCDist,
    MonotoneAlignmentCRF,
    OneToOneMatching,
    collapse,
)
from .chain import LinearChainCRF, SemiMarkovCRF
from .constituency import PCFG, TreeCRF
from .errors import InvalidProblem
from .numerics import NEG_INF, masked_dot
from .spanning import SpanningTreeCRF, is_projective

MAX_STRUCTURES = 10**6


@dataclass
class EnumeratedFamily:
    dist: object
    structures: list[dict[str, np.ndarray]]  # scoring masks per potential tensor
    indicators: list[dict[str, np.ndarray]]  # public indicator form

    def __post_init__(self):
        if len(self.structures) != len(self.indicators):
            raise InvalidProblem("structures and indicators must align")

    def __len__(self) -> int:
        return len(self.structures)


def _check_bound(count: int, family: str):
    if count > MAX_STRUCTURES:
        raise InvalidProblem(
            f"{family} enumeration of {count} structures exceeds the {MAX_STRUCTURES} bound"
        )


def _catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


def expected_count(dist) -> int | None:
    """Closed-form structure count where one is known, else None."""
    if isinstance(dist, LinearChainCRF):
        return dist.m**dist.n
    if isinstance(dist, TreeCRF):
        return _catalan(dist.n - 1) * dist.m ** (2 * dist.n - 1)
    if isinstance(dist, OneToOneMatching):
        return math.factorial(dist.n)
    if isinstance(dist, SemiMarkovCRF):
        total = 0
        for k in range(1, dist.n + 1):
            total += _compositions_count(dist.n, dist.s, k) * dist.m**k
        return total
    if isinstance(dist, SpanningTreeCRF) and not dist.projective:
        if not dist.single_root_edge:
            return (dist.n + 1) ** (dist.n - 1)  # all vertices, fixed root
    return None


def _compositions_count(n: int, s: int, k: int) -> int:
    """Number of compositions of n into exactly k parts, each at most s."""
    if k == 0:
        return 1 if n == 0 else 0
    total = 0
    for first in range(1, min(s, n) + 1):
        total += _compositions_count(n - first, s, k - 1)
    return total


@singledispatch
def enumerate_structures(dist) -> EnumeratedFamily:
    raise InvalidProblem(f"no enumeration for family {type(dist).__name__}")


@enumerate_structures.register
def _(dist: LinearChainCRF) -> EnumeratedFamily:
    _check_bound(dist.m**dist.n, dist.family)
    structures = []
    for tags in itertools.product(range(dist.m), repeat=dist.n):
        init = np.zeros(dist.m)
        init[tags[0]] = 1.0
        trans = np.zeros_like(dist.transitions)
        for t in range(dist.n - 1):
            trans[t, tags[t], tags[t + 1]] = 1.0
        structures.append({"init": init, "transitions": trans})
    return EnumeratedFamily(dist, structures, structures)


@enumerate_structures.register
def _(dist: SemiMarkovCRF) -> EnumeratedFamily:
    def compositions(n, s):
        if n == 0:
            yield ()
            return
        for first in range(1, min(s, n) + 1):
            for rest in compositions(n - first, s):
                yield (first,) + rest

    structures = []
    for comp in compositions(dist.n, dist.s):
        for labels in itertools.product(range(dist.m), repeat=len(comp)):
            mask = np.zeros_like(dist.segment_potentials)
            pos, prev = 0, 0
            for width, label in zip(comp, labels):
                mask[pos, width - 1, prev, label] = 1.0
                pos += width
                prev = label
            structures.append({"segment_potentials": mask})
            _check_bound(len(structures), dist.family)
    return EnumeratedFamily(dist, structures, structures)


@enumerate_structures.register
def _(dist: MonotoneAlignmentCRF) -> EnumeratedFamily:
    structures = []

    def walk(i, j, mask):
        if (i, j) == (dist.n, dist.m):
            structures.append({"move_potentials": mask.copy()})
            _check_bound(len(structures), dist.family)
            return
        for k, (di, dj) in _MOVE_SRC.items():
            # moving out of (i, j) via move k lands on (i - di, j - dj)
            ni, nj = i - di, j - dj
            if ni <= dist.n and nj <= dist.m:
                mask[ni, nj, k] = 1.0
                walk(ni, nj, mask)
                mask[ni, nj, k] = 0.0

    walk(0, 0, np.zeros_like(dist.move_potentials))
    return EnumeratedFamily(dist, structures, structures)


@enumerate_structures.register
def _(dist: CTCDist) -> EnumeratedFamily:
    _check_bound(dist.vocab_size**dist.num_frames, dist.family)
    structures = []
    for path in itertools.product(range(dist.vocab_size), repeat=dist.num_frames):
        if collapse(path) != dist.target:
            continue
        mask = np.zeros_like(dist.frame_potentials)
        for t, v in enumerate(path):
            mask[t, v] = 1.0
        structures.append({"frame_potentials": mask})
    return EnumeratedFamily(dist, structures, structures)


@enumerate_structures.register
def _(dist: OneToOneMatching) -> EnumeratedFamily:
    _check_bound(math.factorial(dist.n), dist.family)
    structures = []
    for perm in itertools.permutations(range(dist.n)):
        mask = np.zeros_like(dist.scores)
        mask[np.arange(dist.n), perm] = 1.0
        structures.append({"scores": mask})
    return EnumeratedFamily(dist, structures, structures)


def _bracketings(i: int, j: int):
    """All binary bracketings of the leaf range [i, j] as span sets."""
    if i == j:
        yield frozenset({(i, i)})
        return
    for k in range(i, j):
        for left in _bracketings(i, k):
            for right in _bracketings(k + 1, j):
                yield left | right | {(i, j)}


@enumerate_structures.register
def _(dist: TreeCRF) -> EnumeratedFamily:
    _check_bound(expected_count(dist), dist.family)
    structures = []
    for spans in _bracketings(0, dist.n - 1):
        ordered = sorted(spans)
        for labels in itertools.product(range(dist.m), repeat=len(ordered)):
            mask = np.zeros_like(dist.span_potentials)
            for (i, j), lab in zip(ordered, labels):
                mask[i, j, lab] = 1.0
            structures.append({"span_potentials": mask})
    return EnumeratedFamily(dist, structures, structures)


@enumerate_structures.register
def _(dist: PCFG) -> EnumeratedFamily:
    """Structures are full derivations; scoring masks carry anchored rule
    counts, the public indicator is the derivation's span mask."""
    nt = dist.num_nt

    def derive(i, j):
        # yields (symbol, span set, rule count tensor, emission mask)
        if i == j:
            for p in range(dist.num_pt):
                emis = np.zeros_like(dist.emissions)
                emis[i, p] = 1.0
                yield nt + p, {(i, i)}, np.zeros_like(dist.binary_rules), emis
            return
        for k in range(i, j):
            for b, ls, lr, le in derive(i, k):
                for c, rs, rr, re in derive(k + 1, j):
                    for a in range(nt):
                        rules = lr + rr
                        rules[a, b, c] += 1.0
                        yield a, ls | rs | {(i, j)}, rules, le + re

    structures, indicators = [], []
    for a, spans, rules, emis in derive(0, dist.n - 1):
        if a >= nt:
            continue  # the start symbol must be a nonterminal
        root = np.zeros_like(dist.root)
        root[a] = 1.0
        sticky = np.zeros((dist.n, dist.n))
        for i, j in spans:
            sticky[i, j] = 1.0
        structures.append(
            {"root": root, "binary_rules": rules, "emissions": emis, "sticky": sticky}
        )
        indicators.append({"sticky": sticky})
        _check_bound(len(structures), dist.family)
    return EnumeratedFamily(dist, structures, indicators)


@enumerate_structures.register
def _(dist: SpanningTreeCRF) -> EnumeratedFamily:
    """Filtered enumeration of head assignments under one validity predicate
    per flag triple.  Undirected trees are represented in their
    root-oriented form, matching the reduction."""
    n = dist.n
    _check_bound((n + 1) ** (n - 1), dist.family)
    if (n + 1) ** n > 20_000_000:
        raise InvalidProblem(f"spanning enumeration candidate space too large for n={n}")
    heads = np.indices((n + 1,) * n, dtype=np.int16).reshape(n, -1).T  # [K, n]
    deps = np.arange(1, n + 1, dtype=np.int16)
    heads = heads[np.all(heads != deps[None, :], axis=1)]
    # reachability from the root = acyclic + connected (follow parents n hops)
    parent = np.concatenate(
        [np.zeros((len(heads), 1), dtype=heads.dtype), heads], axis=1
    )
    rows = np.arange(len(heads))
    keep = np.ones(len(heads), dtype=bool)
    for start in range(1, n + 1):
        node = np.full(len(heads), start, dtype=np.int64)
        for _ in range(n):
            node = parent[rows, node].astype(np.int64)
        keep &= node == 0
    heads = heads[keep]
    if dist.single_root_edge:
        heads = heads[(heads == 0).sum(axis=1) == 1]
    structures = []
    for row in heads:
        arcs = [(int(row[d - 1]), int(d)) for d in deps]
        if dist.projective and not is_projective(arcs):
            continue
        mask = np.zeros_like(dist.adjacency)
        for h, d in arcs:
            mask[h, d] = 1.0
        structures.append({"adjacency": mask})
    return EnumeratedFamily(dist, structures, structures)


# ---------------------------------------------------------------------------
# Exact reference inference over an enumeration
# ---------------------------------------------------------------------------


def structure_score(masks: dict[str, np.ndarray], potentials: dict[str, np.ndarray]) -> float:
    total = 0.0
    for key, mask in masks.items():
        part = masked_dot(mask, potentials[key])
        if part == NEG_INF:
            return NEG_INF
        total += part
    return total


def oracle_scores(ef: EnumeratedFamily, potentials: dict[str, np.ndarray]) -> np.ndarray:
    return np.array([structure_score(s, potentials) for s in ef.structures])


def _compensated_lse(scores: np.ndarray) -> float:
    m = float(np.max(scores)) if scores.size else NEG_INF
    if m == NEG_INF:
        return NEG_INF
    return m + math.log(math.fsum(math.exp(s - m) for s in scores))


def oracle_log_partition(ef: EnumeratedFamily, potentials) -> float:
    return _compensated_lse(oracle_scores(ef, potentials))


def oracle_probabilities(ef: EnumeratedFamily, potentials) -> np.ndarray:
    scores = oracle_scores(ef, potentials)
    log_z = _compensated_lse(scores)
    if log_z == NEG_INF:
        raise InvalidProblem("vacuous distribution: oracle probabilities undefined")
    return np.exp(scores - log_z)


def oracle_marginals(ef: EnumeratedFamily, potentials) -> dict[str, np.ndarray]:
    probs = oracle_probabilities(ef, potentials)
    out = {k: np.zeros_like(v, dtype=np.float64) for k, v in ef.structures[0].items()}
    for p, masks in zip(probs, ef.structures):
        for k, mask in masks.items():
            out[k] += p * mask
    return out


def oracle_entropy(ef: EnumeratedFamily, potentials) -> float:
    scores = oracle_scores(ef, potentials)
    log_z = _compensated_lse(scores)
    acc = math.fsum(
        math.exp(s - log_z) * (log_z - s) for s in scores if s > NEG_INF
    )
    return float(acc)


def oracle_cross_entropy(ef: EnumeratedFamily, p_potentials, q_potentials) -> float:
    p_scores = oracle_scores(ef, p_potentials)
    q_scores = oracle_scores(ef, q_potentials)
    log_zp = _compensated_lse(p_scores)
    log_zq = _compensated_lse(q_scores)
    terms = []
    for sp, sq in zip(p_scores, q_scores):
        if sp == NEG_INF:
            continue  # zero-probability structures contribute nothing
        if sq == NEG_INF:
            return float("inf")
        terms.append(math.exp(sp - log_zp) * (log_zq - sq))
    return float(math.fsum(terms))


def oracle_argmax(ef: EnumeratedFamily, potentials) -> tuple[float, dict[str, np.ndarray]]:
    scores = oracle_scores(ef, potentials)
    idx = int(np.argmax(scores))
    return float(scores[idx]), ef.indicators[idx]


def oracle_log_prob(ef: EnumeratedFamily, potentials, indicator: dict[str, np.ndarray]) -> float:
    """Log-probability of the structures whose public indicator matches."""
    scores = oracle_scores(ef, potentials)
    log_z = _compensated_lse(scores)
    sel = [
        s
        for s, ind in zip(scores, ef.indicators)
        if all(np.array_equal(ind[k], indicator[k]) for k in ind)
    ]
    if not sel:
        raise InvalidProblem("indicator does not match any enumerated structure")
    return _compensated_lse(np.array(sel)) - log_z

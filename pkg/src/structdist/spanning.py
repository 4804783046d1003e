"""Spanning-tree distributions over a weighted adjacency matrix.

Layout: node 0 is an artificial root; entry (h, d) of the [n+1, n+1]
adjacency scores the edge head -> dependent.  The diagonal and column 0
(edges into the root) are -inf.  Three booleans select among eight
structure classes:

- directed / undirected: undirected trees live on a symmetric non-root
  block, with row 0 supplying per-node root-attachment scores; they are
  reduced to the rooted directed case by orienting every tree away from
  the root, which preserves scores one-to-one.
- projective / non-projective: projective trees have no crossing edges
  when drawn above the ordered nodes.
- single_root_edge: exactly one edge may leave the root.

Algorithm choices per class: the matrix-tree determinant for
non-projective partition functions and marginals (with a per-column max
shift folded back into the log-determinant), a span-based chart for
projective ones, tabulated arc-hybrid decoding for projective argmax,
greedy edge picking with cycle contraction for non-projective argmax, and
loop-erased random walks or sequential edge conditioning for
non-projective sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidProblem,
    SamplerStepLimit,
    VacuousDistribution,
)
from .numerics import NEG_INF, as_log_tensor, logsumexp, lse, sample_log_categorical

WILSON_STEP_CAP = 10**7


@dataclass(frozen=True)
class SpanningTreeCRF:
    adjacency: np.ndarray  # [n+1, n+1] log-potentials, entry (head, dependent)
    directed: bool = True
    projective: bool = False
    single_root_edge: bool = False

    family = "spanning_tree"

    def __post_init__(self):
        object.__setattr__(self, "adjacency", as_log_tensor(self.adjacency, "adjacency"))
        a = self.adjacency
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise InvalidProblem(f"adjacency must be square with >= 2 nodes, got {a.shape}")
        if not np.isneginf(np.diag(a)).all():
            raise InvalidProblem("adjacency diagonal must be -inf")
        if not np.isneginf(a[:, 0]).all():
            raise InvalidProblem("edges into the root (column 0) must be -inf")
        if not self.directed:
            block = a[1:, 1:]
            if not np.array_equal(block, block.T):
                raise InvalidProblem("asymmetric input in undirected mode")

    @property
    def n(self) -> int:
        """Number of non-root nodes."""
        return self.adjacency.shape[0] - 1

    def potentials(self) -> dict[str, np.ndarray]:
        return {"adjacency": self.adjacency}


def undirected_to_directed(d: SpanningTreeCRF) -> SpanningTreeCRF:
    """Score-preserving reduction: orient every undirected tree away from
    the root.  The adjacency already stores each undirected weight at both
    orientations, so the tensor is reused as-is."""
    if d.directed:
        raise InvalidProblem("undirected_to_directed requires an undirected instance")
    return SpanningTreeCRF(
        d.adjacency, directed=True, projective=d.projective,
        single_root_edge=d.single_root_edge,
    )


# ---------------------------------------------------------------------------
# Matrix-tree partition and marginals (directed, non-projective)
# ---------------------------------------------------------------------------


def _shifted_exp_weights(adj: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Per-column max-shifted exp weights A[h, d-1] for dependents d = 1..n.

    Returns (A, shifts) or None when some node has no finite incoming edge.
    """
    n = adj.shape[0] - 1
    incoming = adj[:, 1:].copy()  # [n+1, n]
    for d in range(1, n + 1):
        incoming[d, d - 1] = NEG_INF  # self loop
    shifts = np.max(incoming, axis=0)
    if np.isneginf(shifts).any():
        return None
    weights = np.exp(incoming - shifts[None, :])
    return weights, shifts


def _build_laplacian(weights: np.ndarray, single_root: bool) -> np.ndarray:
    """Laplacian minor over non-root nodes from shifted exp weights.

    Multi-root: in-degree Laplacian including root edges on the diagonal.
    Single-root: the in-degree Laplacian restricted to non-root heads, with
    its first row replaced by the root-edge weights.
    """
    n = weights.shape[1]
    nonroot = weights[1:, :]  # [n, n] heads 1..n
    if single_root:
        lap = np.diag(nonroot.sum(axis=0)) - nonroot
        lap[0, :] = weights[0, :]
    else:
        lap = np.diag(weights.sum(axis=0)) - nonroot
    return lap


def mtt_log_partition(d: SpanningTreeCRF) -> float:
    """Log-partition of directed non-projective trees via the matrix-tree
    determinant; -inf when no tree has finite score."""
    from .numerics import signed_log_det

    prep = _shifted_exp_weights(d.adjacency)
    if prep is None:
        return NEG_INF
    weights, shifts = prep
    lap = _build_laplacian(weights, d.single_root_edge)
    sign, log_abs = signed_log_det(lap)
    if sign <= 0:
        return NEG_INF
    return log_abs + float(shifts.sum())


def mtt_marginals(d: SpanningTreeCRF) -> np.ndarray:
    """Edge marginals [n+1, n+1] from the inverse Laplacian."""
    prep = _shifted_exp_weights(d.adjacency)
    if prep is None:
        raise VacuousDistribution("no spanning tree has finite score")
    weights, _ = prep
    lap = _build_laplacian(weights, d.single_root_edge)
    try:
        inv = np.linalg.inv(lap)
    except np.linalg.LinAlgError as exc:
        raise VacuousDistribution("singular Laplacian: no spanning tree mass") from exc
    n = d.n
    marg = np.zeros((n + 1, n + 1))
    if d.single_root_edge:
        for dep in range(1, n + 1):
            dd = dep - 1
            marg[0, dep] = weights[0, dd] * inv[dd, 0]
            for h in range(1, n + 1):
                if h == dep:
                    continue
                hh = h - 1
                val = 0.0
                if dd != 0:
                    val += inv[dd, dd]
                if hh != 0:
                    val -= inv[dd, hh]
                marg[h, dep] = weights[h, dd] * val
    else:
        for dep in range(1, n + 1):
            dd = dep - 1
            marg[0, dep] = weights[0, dd] * inv[dd, dd]
            for h in range(1, n + 1):
                if h == dep:
                    continue
                hh = h - 1
                marg[h, dep] = weights[h, dd] * (inv[dd, dd] - inv[dd, hh])
    return np.clip(marg, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Eisner chart (directed, projective): partition, marginals, sampling, max
# ---------------------------------------------------------------------------


def _eisner_charts(theta: np.ndarray, reduce_fn):
    """Complete/incomplete span charts over positions 0..n (0 = root).

    cr[i, j]: complete span headed at i covering i..j; cl[i, j]: complete
    span headed at j; ir/il: incomplete spans carrying the arc i -> j or
    j -> i respectively.
    """
    size = theta.shape[0]
    cr = np.full((size, size), NEG_INF)
    cl = np.full((size, size), NEG_INF)
    ir = np.full((size, size), NEG_INF)
    il = np.full((size, size), NEG_INF)
    for i in range(size):
        cr[i, i] = 0.0
        cl[i, i] = 0.0
    for w in range(1, size):
        for i in range(0, size - w):
            j = i + w
            span = cr[i, i:j] + cl[i + 1 : j + 1, j]
            fold = reduce_fn(span, 0)
            ir[i, j] = theta[i, j] + fold
            il[i, j] = theta[j, i] + fold
            cr[i, j] = reduce_fn(ir[i, i + 1 : j + 1] + cr[i + 1 : j + 1, j], 0)
            cl[i, j] = reduce_fn(cl[i, i:j] + il[i:j, j], 0)
    return cr, cl, ir, il


def _eisner_root_terms(theta, cl, cr):
    n = theta.shape[0] - 1
    return np.array([theta[0, c] + cl[1, c] + cr[c, n] for c in range(1, n + 1)])


def eisner_log_partition(d: SpanningTreeCRF) -> float:
    theta = d.adjacency
    cr, cl, ir, il = _eisner_charts(theta, logsumexp)
    n = d.n
    if d.single_root_edge:
        return lse(_eisner_root_terms(theta, cl, cr))
    return float(cr[0, n])


def eisner_marginals(d: SpanningTreeCRF) -> np.ndarray:
    """Arc marginals by reverse-propagating chart adjoints."""
    theta = d.adjacency
    n = d.n
    size = n + 1
    cr, cl, ir, il = _eisner_charts(theta, logsumexp)
    bcr = np.zeros((size, size))
    bcl = np.zeros((size, size))
    bir = np.zeros((size, size))
    bil = np.zeros((size, size))
    marg = np.zeros((size, size))
    if d.single_root_edge:
        terms = _eisner_root_terms(theta, cl, cr)
        log_z = lse(terms)
        if log_z == NEG_INF:
            raise VacuousDistribution("no projective tree has finite score")
        for c in range(1, n + 1):
            p = float(np.exp(terms[c - 1] - log_z)) if terms[c - 1] > NEG_INF else 0.0
            marg[0, c] += p
            bcl[1, c] += p
            bcr[c, n] += p
    else:
        if cr[0, n] == NEG_INF:
            raise VacuousDistribution("no projective tree has finite score")
        bcr[0, n] = 1.0
    for w in range(size - 1, 0, -1):
        for i in range(0, size - w):
            j = i + w
            # adjoint of cl[i, j]
            b = bcl[i, j]
            if b > 0.0 and cl[i, j] > NEG_INF:
                wts = b * np.exp(cl[i, i:j] + il[i:j, j] - cl[i, j])
                bcl[i, i:j] += wts
                bil[i:j, j] += wts
            # adjoint of cr[i, j]
            b = bcr[i, j]
            if b > 0.0 and cr[i, j] > NEG_INF:
                wts = b * np.exp(ir[i, i + 1 : j + 1] + cr[i + 1 : j + 1, j] - cr[i, j])
                bir[i, i + 1 : j + 1] += wts
                bcr[i + 1 : j + 1, j] += wts
            # adjoint of il[i, j]: emits the arc j -> i
            b = bil[i, j]
            if b > 0.0 and il[i, j] > NEG_INF:
                marg[j, i] += b
                fold = il[i, j] - theta[j, i]
                wts = b * np.exp(cr[i, i:j] + cl[i + 1 : j + 1, j] - fold)
                bcr[i, i:j] += wts
                bcl[i + 1 : j + 1, j] += wts
            # adjoint of ir[i, j]: emits the arc i -> j
            b = bir[i, j]
            if b > 0.0 and ir[i, j] > NEG_INF:
                marg[i, j] += b
                fold = ir[i, j] - theta[i, j]
                wts = b * np.exp(cr[i, i:j] + cl[i + 1 : j + 1, j] - fold)
                bcr[i, i:j] += wts
                bcl[i + 1 : j + 1, j] += wts
    return np.clip(marg, 0.0, 1.0)


def _eisner_decode(theta: np.ndarray, single_root: bool, pick) -> list[tuple[int, int]]:
    """Shared top-down reconstruction for max-plus decoding and sampling."""
    is_max = pick is None
    reduce_fn = (lambda x, ax: np.max(x, axis=ax)) if is_max else logsumexp
    cr, cl, ir, il = _eisner_charts(theta, reduce_fn)
    choose = (lambda logits: int(np.argmax(logits))) if is_max else pick
    n = theta.shape[0] - 1
    arcs: list[tuple[int, int]] = []
    stack: list[tuple[str, int, int]] = []
    if single_root:
        terms = _eisner_root_terms(theta, cl, cr)
        if (np.max(terms) if is_max else lse(terms)) == NEG_INF:
            raise VacuousDistribution("no projective tree has finite score")
        c = 1 + choose(terms)
        arcs.append((0, c))
        stack += [("cl", 1, c), ("cr", c, n)]
    else:
        if cr[0, n] == NEG_INF:
            raise VacuousDistribution("no projective tree has finite score")
        stack.append(("cr", 0, n))
    while stack:
        kind, i, j = stack.pop()
        if i == j:
            continue
        if kind == "cr":
            k = i + 1 + choose(ir[i, i + 1 : j + 1] + cr[i + 1 : j + 1, j])
            stack += [("ir", i, k), ("cr", k, j)]
        elif kind == "cl":
            k = i + choose(cl[i, i:j] + il[i:j, j])
            stack += [("cl", i, k), ("il", k, j)]
        else:
            if kind == "ir":
                arcs.append((i, j))
            else:
                arcs.append((j, i))
            k = i + choose(cr[i, i:j] + cl[i + 1 : j + 1, j])
            stack += [("cr", i, k), ("cl", k + 1, j)]
    return arcs


def eisner_max_arcs(d: SpanningTreeCRF) -> list[tuple[int, int]]:
    """Max-plus chart decoding; the reference projective argmax."""
    return _eisner_decode(d.adjacency, d.single_root_edge, None)


def eisner_sample_arcs(d: SpanningTreeCRF, rng: np.random.Generator) -> list[tuple[int, int]]:
    return _eisner_decode(
        d.adjacency, d.single_root_edge, lambda logits: sample_log_categorical(rng, logits)
    )


# ---------------------------------------------------------------------------
# Arc-hybrid tabulation (projective argmax only)
# ---------------------------------------------------------------------------


def _reweight_root(adj: np.ndarray) -> np.ndarray:
    """Subtract a constant from all root edges so that any tree using a
    single root edge beats any tree using more; the constant exceeds the
    largest achievable score gap."""
    finite = adj[np.isfinite(adj)]
    if finite.size == 0:
        raise VacuousDistribution("no edge has finite score")
    n = adj.shape[0] - 1
    c = n * (float(finite.max()) - float(finite.min())) + 1.0
    out = adj.copy()
    out[0, 1:] = out[0, 1:] - c
    return out


def kuhlmann_argmax(d: SpanningTreeCRF) -> list[tuple[int, int]]:
    """Maximum projective tree via the tabulated arc-hybrid system.

    The tabulation admits spurious derivations, so it is exposed for
    argmax only.  Item [i, j] covers a computation whose stack top is i
    and whose buffer front is j; combining [i, k] with [k, j] attaches k
    either to i (arc i -> k) or to j (arc j -> k).  Position n+1 is a
    virtual end marker that may head nothing.
    """
    theta = d.adjacency
    if d.single_root_edge:
        theta = _reweight_root(theta)
    n = theta.shape[0] - 1
    size = n + 2  # positions 0..n plus the end marker
    scores = np.full((size, size), NEG_INF)
    scores[: n + 1, 1 : n + 1] = theta[:, 1:]
    table = np.full((size, size), NEG_INF)
    back: dict[tuple[int, int], tuple[int, int]] = {}
    for i in range(size - 1):
        table[i, i + 1] = 0.0
    for w in range(2, size):
        for i in range(0, size - w):
            j = i + w
            best, arg = NEG_INF, None
            for k in range(i + 1, j):
                base = table[i, k] + table[k, j]
                if base == NEG_INF:
                    continue
                for head, val in ((i, scores[i, k]), (j, scores[j, k])):
                    cand = base + val
                    if cand > best:
                        best, arg = cand, (k, head)
            table[i, j] = best
            if arg is not None:
                back[(i, j)] = arg
    if table[0, size - 1] == NEG_INF:
        raise VacuousDistribution("no projective tree has finite score")
    arcs: list[tuple[int, int]] = []
    stack = [(0, size - 1)]
    while stack:
        i, j = stack.pop()
        if j == i + 1:
            continue
        k, head = back[(i, j)]
        arcs.append((head, k))
        stack += [(i, k), (k, j)]
    tree = _arcs_to_parent(arcs, n)
    if d.single_root_edge and int(np.sum(tree == 0)) != 1:
        raise VacuousDistribution("no projective tree satisfies the single-root constraint")
    return arcs


# ---------------------------------------------------------------------------
# Greedy + cycle contraction (non-projective argmax)
# ---------------------------------------------------------------------------


def _find_cycle(parent: dict[int, int]) -> list[int] | None:
    """First cycle (lowest starting node) in a parent map; root 0 ends walks."""
    resolved: set[int] = {0}
    for start in sorted(parent):
        if start in resolved:
            continue
        path: list[int] = []
        in_path: dict[int, int] = {}
        node = start
        while node not in resolved and node not in in_path:
            in_path[node] = len(path)
            path.append(node)
            node = parent[node]
        if node in in_path:
            return path[in_path[node] :]
        resolved.update(path)
    return None


def _max_arborescence(weights: np.ndarray) -> dict[int, int]:
    """Parent map (dep -> head) of the maximum arborescence rooted at 0.

    Greedy best-incoming-edge selection; on a cycle, contract it into one
    supernode with entering edges re-scored by the in-cycle edge they
    replace, solve recursively, then expand.
    """
    size = weights.shape[0]
    best_head: dict[int, int] = {}
    for dep in range(1, size):
        col = weights[:, dep].copy()
        col[dep] = NEG_INF
        h = int(np.argmax(col))
        if col[h] == NEG_INF:
            raise VacuousDistribution("no arborescence has finite score")
        best_head[dep] = h
    cycle = _find_cycle(best_head)
    if cycle is None:
        return best_head

    cycle_set = set(cycle)
    keep = [v for v in range(size) if v not in cycle_set]  # includes the root
    new_id = {v: idx for idx, v in enumerate(keep)}
    c_star = len(keep)
    new_w = np.full((c_star + 1, c_star + 1), NEG_INF)
    enter_via: dict[int, int] = {}  # external head (new id) -> cycle node entered
    leave_via: dict[int, int] = {}  # external dep (new id) -> cycle node leaving
    for u in keep:
        nu = new_id[u]
        for v in keep:
            if u != v:
                new_w[nu, new_id[v]] = weights[u, v]
        best, arg = NEG_INF, None
        for v in cycle:
            if weights[u, v] == NEG_INF:
                continue
            adjusted = weights[u, v] - weights[best_head[v], v]
            if adjusted > best:
                best, arg = adjusted, v
        if arg is not None:
            new_w[nu, c_star] = best
            enter_via[nu] = arg
        if u == 0:
            continue  # no edges into the root
        best, arg = NEG_INF, None
        for v in cycle:
            if weights[v, u] > best:
                best, arg = weights[v, u], v
        if arg is not None:
            new_w[c_star, nu] = best
            leave_via[nu] = arg

    sub = _max_arborescence(new_w)
    parent: dict[int, int] = {}
    entry_node = None
    for new_dep, new_head in sub.items():
        if new_dep == c_star:
            entry_node = enter_via[new_head]
            parent[entry_node] = keep[new_head]
        elif new_head == c_star:
            parent[keep[new_dep]] = leave_via[new_dep]
        else:
            parent[keep[new_dep]] = keep[new_head]
    for v in cycle:
        if v != entry_node:
            parent[v] = best_head[v]
    return parent


def cle_argmax(d: SpanningTreeCRF) -> list[tuple[int, int]]:
    """Maximum non-projective arborescence via greedy edges plus cycle
    contraction; the single-root constraint is enforced by reweighting."""
    adj = d.adjacency
    if d.single_root_edge:
        adj = _reweight_root(adj)
    parent_map = _max_arborescence(adj)
    arcs = sorted((h, dep) for dep, h in parent_map.items())
    parent = _arcs_to_parent(arcs, d.n)
    if d.single_root_edge and int(np.sum(parent == 0)) != 1:
        raise VacuousDistribution("no arborescence satisfies the single-root constraint")
    return arcs


# ---------------------------------------------------------------------------
# Sampling (directed, non-projective): Wilson and Colbourn
# ---------------------------------------------------------------------------


def _condition_on_root_child(d: SpanningTreeCRF, rng) -> tuple[np.ndarray, int]:
    """Sample the root's single child from its exact marginal, then forbid
    every other root edge."""
    marg = mtt_marginals(d)
    child = 1 + sample_log_categorical(
        rng, np.log(np.maximum(marg[0, 1:], 1e-300))
    )
    adj = d.adjacency.copy()
    keep = adj[0, child]
    adj[0, :] = NEG_INF
    adj[0, child] = keep
    return adj, child


def wilson_sample_arcs(d: SpanningTreeCRF, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Exact sample via loop-erased random walks toward the current tree."""
    n = d.n
    parent = np.full(n + 1, -1, dtype=int)
    in_tree = np.zeros(n + 1, dtype=bool)
    in_tree[0] = True
    adj = d.adjacency
    if d.single_root_edge:
        adj, child = _condition_on_root_child(d, rng)
        parent[child] = 0
        in_tree[child] = True
    cols = [adj[:, dep] for dep in range(n + 1)]
    steps = 0
    for start in range(1, n + 1):
        u = start
        while not in_tree[u]:
            steps += 1
            if steps > WILSON_STEP_CAP:
                raise SamplerStepLimit(
                    "loop-erased walk exceeded its step cap; weights are near-degenerate"
                )
            parent[u] = sample_log_categorical(rng, cols[u])
            u = parent[u]
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = parent[u]
    return sorted((int(parent[dep]), dep) for dep in range(1, n + 1))


def wilson_sample(d: SpanningTreeCRF, seed: int) -> dict[str, np.ndarray]:
    """Seeded loop-erased-walk sample as an indicator."""
    rng = np.random.default_rng(int(seed))
    return arcs_to_indicator(wilson_sample_arcs(d, rng), d.n)


def colbourn_sample(d: SpanningTreeCRF, seed: int) -> dict[str, np.ndarray]:
    """Seeded sequential-conditioning sample as an indicator."""
    rng = np.random.default_rng(int(seed))
    return arcs_to_indicator(colbourn_sample_arcs(d, rng)[0], d.n)


def colbourn_sample_arcs(
    d: SpanningTreeCRF, rng: np.random.Generator
) -> tuple[list[tuple[int, int]], bool]:
    """Exact sample by conditioning one dependent at a time on matrix-tree
    marginals.  Falls back to the loop-erased walk on the partially
    conditioned weights when the conditioned Laplacian degenerates.
    Returns (arcs, fell_back)."""
    n = d.n
    parent = np.full(n + 1, -1, dtype=int)
    adj = d.adjacency.copy()
    if d.single_root_edge:
        adj, child = _condition_on_root_child(d, rng)
        parent[child] = 0
    remaining = [dep for dep in range(1, n + 1) if parent[dep] < 0]
    for dep in remaining:
        cond = SpanningTreeCRF(adj, directed=True, projective=False, single_root_edge=False)
        try:
            marg = mtt_marginals(cond)
            col = marg[:, dep]
            if not np.isfinite(col).all() or abs(col.sum() - 1.0) > 1e-6:
                raise VacuousDistribution("conditioned marginals degenerated")
        except (VacuousDistribution, np.linalg.LinAlgError):
            tail = wilson_sample_arcs(cond, rng)
            for h, dd in tail:
                if parent[dd] < 0:
                    parent[dd] = h
            return sorted((int(parent[x]), x) for x in range(1, n + 1)), True
        h = sample_log_categorical(rng, np.log(np.maximum(col, 1e-300)))
        parent[dep] = h
        keep = adj[h, dep]
        adj[:, dep] = NEG_INF
        adj[h, dep] = keep
    return sorted((int(parent[x]), x) for x in range(1, n + 1)), False


# ---------------------------------------------------------------------------
# Indicator plumbing and flag-aware dispatch
# ---------------------------------------------------------------------------


def _arcs_to_parent(arcs, n: int) -> np.ndarray:
    parent = np.full(n + 1, -1, dtype=int)
    for h, dep in arcs:
        if parent[dep] != -1:
            raise InvalidProblem(f"node {dep} has two heads")
        parent[dep] = h
    if np.any(parent[1:] < 0):
        raise InvalidProblem("not every node received a head")
    return parent


def arcs_to_indicator(arcs, n: int) -> dict[str, np.ndarray]:
    mask = np.zeros((n + 1, n + 1))
    for h, dep in arcs:
        mask[h, dep] = 1.0
    return {"adjacency": mask}


def indicator_to_arcs(mask: np.ndarray) -> list[tuple[int, int]]:
    return sorted((int(h), int(d)) for h, d in np.argwhere(mask > 0))


def _edges_cross(a: tuple[int, int], b: tuple[int, int]) -> bool:
    (a1, a2), (b1, b2) = sorted(a), sorted(b)
    return (a1 < b1 < a2 < b2) or (b1 < a1 < b2 < a2)


def is_projective(arcs) -> bool:
    arcs = list(arcs)
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            if _edges_cross(arcs[i], arcs[j]):
                return False
    return True


def validate_tree_indicator(d: SpanningTreeCRF, indicator: dict[str, np.ndarray]):
    mask = indicator["adjacency"]
    if mask.shape != d.adjacency.shape:
        raise InvalidProblem("indicator shape does not match adjacency")
    arcs = indicator_to_arcs(mask)
    parent = _arcs_to_parent(arcs, d.n)  # raises on multiple heads / missing
    # reachability from the root
    for start in range(1, d.n + 1):
        node, hops = start, 0
        while node != 0:
            node = parent[node]
            hops += 1
            if hops > d.n:
                raise InvalidProblem("indicator edges contain a cycle")
    if d.single_root_edge and int(np.sum(parent == 0)) != 1:
        raise InvalidProblem("indicator must use exactly one root edge")
    if d.projective and not is_projective(arcs):
        raise InvalidProblem("indicator has crossing edges but the tree is projective")


def _algo_prefix(d: SpanningTreeCRF) -> str:
    return "" if d.directed else "undirected-reduction+"


def span_log_partition(d: SpanningTreeCRF) -> tuple[float, str]:
    prefix = _algo_prefix(d)
    work = d if d.directed else undirected_to_directed(d)
    if work.projective:
        name = "eisner-single-root" if work.single_root_edge else "eisner"
        return eisner_log_partition(work), prefix + name
    name = "mtt-single-root" if work.single_root_edge else "mtt-multi-root"
    return mtt_log_partition(work), prefix + name


def span_marginals(d: SpanningTreeCRF) -> tuple[np.ndarray, str]:
    prefix = _algo_prefix(d)
    work = d if d.directed else undirected_to_directed(d)
    if work.projective:
        name = "eisner-single-root" if work.single_root_edge else "eisner"
        return eisner_marginals(work), prefix + name
    if mtt_log_partition(work) == NEG_INF:
        raise VacuousDistribution("no spanning tree has finite score")
    name = "mtt-single-root" if work.single_root_edge else "mtt-multi-root"
    return mtt_marginals(work), prefix + name


def span_argmax(d: SpanningTreeCRF) -> tuple[dict[str, np.ndarray], str]:
    prefix = _algo_prefix(d)
    work = d if d.directed else undirected_to_directed(d)
    if work.projective:
        arcs = kuhlmann_argmax(work)
        name = "kuhlmann-arc-hybrid"
    else:
        arcs = cle_argmax(work)
        name = "chu-liu-edmonds"
    if work.single_root_edge:
        name = "reweighting+" + name
    return arcs_to_indicator(arcs, d.n), prefix + name


def span_sample(
    d: SpanningTreeCRF, rng: np.random.Generator, algorithm: str | None = None
) -> tuple[dict[str, np.ndarray], str]:
    prefix = _algo_prefix(d)
    work = d if d.directed else undirected_to_directed(d)
    if work.projective:
        if algorithm not in (None, "eisner"):
            raise InvalidProblem(f"sampler {algorithm!r} does not apply to projective trees")
        arcs = eisner_sample_arcs(work, rng)
        return arcs_to_indicator(arcs, d.n), prefix + "eisner-sampling"
    if span_log_partition(work)[0] == NEG_INF:
        raise VacuousDistribution("no spanning tree has finite score")
    if algorithm in (None, "wilson"):
        arcs = wilson_sample_arcs(work, rng)
        return arcs_to_indicator(arcs, d.n), prefix + "wilson"
    if algorithm == "colbourn":
        arcs, fell_back = colbourn_sample_arcs(work, rng)
        name = "colbourn+wilson-fallback" if fell_back else "colbourn"
        return arcs_to_indicator(arcs, d.n), prefix + name
    raise InvalidProblem(f"unknown spanning-tree sampler {algorithm!r}")

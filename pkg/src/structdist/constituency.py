"""Constituency-tree distributions: span-factored Tree-CRFs and PCFGs.

Tree-CRF: every node of a binary tree over n leaves, including width-1
leaf spans, carries exactly one of m labels, so the all-zero potentials
normalize to Catalan(n-1) * m**(2n-1) trees.

PCFG: Chomsky normal form with disjoint nonterminal / preterminal index
ranges inside a single child axis.  The chart carries an additive span
mask ("sticky" log-potentials in {0, -inf}); running inside with the mask
set to 0 on the spans of one bracketing and -inf elsewhere yields the
log-probability of that bracketing, and the gradient of the inside value
with respect to the mask yields constituent marginals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidProblem, VacuousDistribution
from .numerics import NEG_INF, as_log_tensor, logsumexp, lse, sample_log_categorical


@dataclass(frozen=True)
class TreeCRF:
    span_potentials: np.ndarray  # [n, n, m] for labeled spans (i, j, label), i <= j

    family = "tree_crf"

    def __post_init__(self):
        object.__setattr__(
            self, "span_potentials", as_log_tensor(self.span_potentials, "span_potentials")
        )
        p = self.span_potentials
        if p.ndim != 3 or p.shape[0] != p.shape[1] or p.shape[0] < 1 or p.shape[2] < 1:
            raise InvalidProblem(f"span_potentials must have shape [n, n, m], got {p.shape}")

    @property
    def n(self) -> int:
        return self.span_potentials.shape[0]

    @property
    def m(self) -> int:
        return self.span_potentials.shape[2]

    def potentials(self) -> dict[str, np.ndarray]:
        return {"span_potentials": self.span_potentials}


def _tree_charts(t: TreeCRF, reduce_fn) -> tuple[np.ndarray, np.ndarray]:
    """Per-span label fold S and inside chart I under the given reduction."""
    n = t.n
    label_fold = reduce_fn(t.span_potentials, 2)  # [n, n]
    inside = np.full((n, n), NEG_INF)
    for i in range(n):
        inside[i, i] = label_fold[i, i]
    for w in range(2, n + 1):
        for i in range(0, n - w + 1):
            j = i + w - 1
            parts = inside[i, i:j] + inside[i + 1 : j + 1, j]
            inside[i, j] = label_fold[i, j] + reduce_fn(parts, 0)
    return label_fold, inside


def cky_log_partition(t: TreeCRF) -> float:
    _, inside = _tree_charts(t, logsumexp)
    return float(inside[0, t.n - 1])


def cky_max_score(t: TreeCRF) -> float:
    _, inside = _tree_charts(t, lambda x, ax: np.max(x, axis=ax) if x.shape[ax] else NEG_INF)
    return float(inside[0, t.n - 1])


def tree_marginals(t: TreeCRF) -> dict[str, np.ndarray]:
    """Labeled-span marginals [n, n, m] via an inside-outside pass."""
    n = t.n
    label_fold, inside = _tree_charts(t, logsumexp)
    log_z = inside[0, n - 1]
    if log_z == NEG_INF:
        raise VacuousDistribution("no labeled tree has finite score")
    outside = np.full((n, n), NEG_INF)
    outside[0, n - 1] = 0.0
    for w in range(n - 1, 0, -1):
        for i in range(0, n - w + 1):
            j = i + w - 1
            terms = []
            for parent_j in range(j + 1, n):  # right sibling (j+1, parent_j)
                terms.append(
                    outside[i, parent_j] + label_fold[i, parent_j] + inside[j + 1, parent_j]
                )
            for parent_i in range(0, i):  # left sibling (parent_i, i-1)
                terms.append(
                    outside[parent_i, j] + label_fold[parent_i, j] + inside[parent_i, i - 1]
                )
            if terms:
                outside[i, j] = lse(terms)
    # inside value with the span's own label factor removed
    children = inside - label_fold
    marg = np.zeros_like(t.span_potentials)
    for i in range(n):
        for j in range(i, n):
            if inside[i, j] == NEG_INF or outside[i, j] == NEG_INF:
                continue
            marg[i, j] = np.exp(
                outside[i, j] + children[i, j] + t.span_potentials[i, j] - log_z
            )
    return {"span_potentials": marg}


def _tree_walk(t: TreeCRF, inside: np.ndarray, pick) -> dict[str, np.ndarray]:
    mask = np.zeros_like(t.span_potentials)
    stack = [(0, t.n - 1)]
    while stack:
        i, j = stack.pop()
        label = pick(t.span_potentials[i, j])
        mask[i, j, label] = 1.0
        if i == j:
            continue
        parts = inside[i, i:j] + inside[i + 1 : j + 1, j]
        k = i + pick(parts)
        stack.append((i, k))
        stack.append((k + 1, j))
    return {"span_potentials": mask}


def tree_argmax(t: TreeCRF) -> dict[str, np.ndarray]:
    _, inside = _tree_charts(t, lambda x, ax: np.max(x, axis=ax) if x.shape[ax] else NEG_INF)
    if inside[0, t.n - 1] == NEG_INF:
        raise VacuousDistribution("no labeled tree has finite score")
    return _tree_walk(t, inside, lambda logits: int(np.argmax(logits)))


def tree_sample(t: TreeCRF, rng: np.random.Generator) -> dict[str, np.ndarray]:
    _, inside = _tree_charts(t, logsumexp)
    if inside[0, t.n - 1] == NEG_INF:
        raise VacuousDistribution("no labeled tree has finite score")
    return _tree_walk(t, inside, lambda logits: sample_log_categorical(rng, logits))


def spans_of_indicator(mask: np.ndarray) -> set[tuple[int, int]]:
    return {(int(i), int(j)) for i, j in np.argwhere(mask > 0)}


def is_binary_bracketing(spans: set[tuple[int, int]], n: int) -> bool:
    """True iff `spans` is exactly the node-span set of one binary tree."""
    if len(spans) != 2 * n - 1:
        return False
    if (0, n - 1) not in spans:
        return False
    if any((i, i) not in spans for i in range(n)):
        return False

    def check(i: int, j: int) -> bool:
        if i == j:
            return True
        for k in range(i, j):
            if (i, k) in spans and (k + 1, j) in spans and check(i, k) and check(k + 1, j):
                return True
        return False

    return check(0, n - 1)


def validate_tree_indicator(t: TreeCRF, indicator: dict[str, np.ndarray]):
    mask = indicator["span_potentials"]
    if mask.shape != t.span_potentials.shape:
        raise InvalidProblem("indicator shape does not match span potentials")
    per_span = mask.sum(axis=2)
    if np.any((per_span != 0) & (per_span != 1)):
        raise InvalidProblem("each marked span must carry exactly one label")
    spans = {(int(i), int(j)) for i, j in np.argwhere(per_span > 0)}
    if not is_binary_bracketing(spans, t.n):
        raise InvalidProblem("marked spans do not form a binary bracketing")


# ---------------------------------------------------------------------------
# PCFG
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PCFG:
    root: np.ndarray  # [NT] log-probabilities over the start symbol
    binary_rules: np.ndarray  # [NT, NT+PT, NT+PT] log-probs, parent -> left right
    emissions: np.ndarray  # [n, PT] token-conditioned preterminal log-potentials
    sticky: np.ndarray | None = None  # optional [n, n] span mask in {0, -inf}

    family = "pcfg"

    def __post_init__(self):
        object.__setattr__(self, "root", as_log_tensor(self.root, "root"))
        object.__setattr__(
            self, "binary_rules", as_log_tensor(self.binary_rules, "binary_rules")
        )
        object.__setattr__(self, "emissions", as_log_tensor(self.emissions, "emissions"))
        nt = self.root.shape[0] if self.root.ndim == 1 else 0
        pt = self.emissions.shape[1] if self.emissions.ndim == 2 else 0
        if nt < 1 or pt < 1:
            raise InvalidProblem("PCFG needs at least one nonterminal and one preterminal")
        s = nt + pt
        if self.binary_rules.shape != (nt, s, s):
            raise InvalidProblem(
                f"binary_rules must have shape [{nt}, {s}, {s}], got {self.binary_rules.shape}"
            )
        if abs(np.exp(self.root).sum() - 1.0) > 1e-6:
            raise InvalidProblem("exp(root) must sum to 1")
        rule_mass = np.exp(self.binary_rules).reshape(nt, -1).sum(axis=1)
        if np.any(np.abs(rule_mass - 1.0) > 1e-6):
            raise InvalidProblem("exp(binary_rules[parent]) must sum to 1 for each parent")
        if self.sticky is None:
            object.__setattr__(self, "sticky", np.zeros((self.n, self.n)))
        else:
            object.__setattr__(self, "sticky", as_log_tensor(self.sticky, "sticky"))
            if self.sticky.shape != (self.n, self.n):
                raise InvalidProblem(
                    f"sticky must have shape [{self.n}, {self.n}], got {self.sticky.shape}"
                )
            bad = ~(np.isneginf(self.sticky) | (self.sticky == 0.0))
            if bad.any():
                raise InvalidProblem("sticky entries must be 0 or -inf")

    @property
    def n(self) -> int:
        return self.emissions.shape[0]

    @property
    def num_nt(self) -> int:
        return self.root.shape[0]

    @property
    def num_pt(self) -> int:
        return self.emissions.shape[1]

    def potentials(self) -> dict[str, np.ndarray]:
        return {
            "root": self.root,
            "binary_rules": self.binary_rules,
            "emissions": self.emissions,
            "sticky": self.sticky,
        }


def _pcfg_inside(g: PCFG, span_mask: np.ndarray, reduce_fn) -> np.ndarray:
    """Chart [n, n, NT+PT]; width-1 cells hold preterminals, wider cells NTs.

    `span_mask` is added on top of the grammar's own sticky mask.
    """
    n, nt, s = g.n, g.num_nt, g.num_nt + g.num_pt
    add = g.sticky + span_mask
    chart = np.full((n, n, s), NEG_INF)
    for i in range(n):
        chart[i, i, nt:] = g.emissions[i] + add[i, i]
    for w in range(2, n + 1):
        for i in range(0, n - w + 1):
            j = i + w - 1
            left = chart[i, i:j]  # [w-1, S]
            right = chart[i + 1 : j + 1, j]  # [w-1, S]
            pair = reduce_fn(left[:, :, None] + right[:, None, :], 0)  # [S, S]
            inner = reduce_fn(
                reduce_fn(g.binary_rules + pair[None, :, :], 2), 1
            )  # [NT]
            chart[i, j, :nt] = inner + add[i, j]
    return chart


def pcfg_inside(g: PCFG) -> float:
    """Log-partition: total log-weight of all derivations of the sentence."""
    chart = _pcfg_inside(g, np.zeros((g.n, g.n)), logsumexp)
    return lse(g.root + chart[0, g.n - 1, : g.num_nt])


def pcfg_max_score(g: PCFG) -> float:
    chart = _pcfg_inside(g, np.zeros((g.n, g.n)), lambda x, ax: np.max(x, axis=ax))
    return float(np.max(g.root + chart[0, g.n - 1, : g.num_nt]))


def pcfg_masked_inside(g: PCFG, spans: Iterable[tuple[int, int]]) -> float:
    """Log-probability mass of one bracketing, marginalizing over labels."""
    span_set = {(int(i), int(j)) for i, j in spans}
    if not is_binary_bracketing(span_set, g.n):
        raise InvalidProblem("spans do not form a binary bracketing")
    mask = np.full((g.n, g.n), NEG_INF)
    for i, j in span_set:
        mask[i, j] = 0.0
    chart = _pcfg_inside(g, mask, logsumexp)
    return lse(g.root + chart[0, g.n - 1, : g.num_nt])


def pcfg_gradients(g: PCFG) -> tuple[float, dict[str, np.ndarray]]:
    """Inside value plus its gradient w.r.t. every log-potential tensor.

    The sticky gradient is the span (constituent) marginal; the rule
    gradient is the expected anchored count per rule, which may exceed 1.
    """
    n, nt, s = g.n, g.num_nt, g.num_nt + g.num_pt
    chart = _pcfg_inside(g, np.zeros((g.n, g.n)), logsumexp)
    log_z = lse(g.root + chart[0, n - 1, :nt])
    if log_z == NEG_INF:
        raise VacuousDistribution("the grammar derives no tree for this sentence")
    outside = np.full((n, n, s), NEG_INF)
    outside[0, n - 1, :nt] = g.root
    g_rules = np.zeros_like(g.binary_rules)
    for w in range(n, 1, -1):
        for i in range(0, n - w + 1):
            j = i + w - 1
            out_span = outside[i, j, :nt] + g.sticky[i, j]  # [NT]
            if np.all(np.isneginf(out_span)):
                continue
            for k in range(i, j):
                left = chart[i, k]  # [S]
                right = chart[k + 1, j]  # [S]
                out_rule = out_span[:, None, None] + g.binary_rules  # [NT, S, S]
                joint = out_rule + left[None, :, None] + right[None, None, :]
                g_rules += np.exp(joint - log_z)
                to_left = out_rule + right[None, None, :]  # excludes the left inside
                outside[i, k] = np.logaddexp(
                    outside[i, k], logsumexp(logsumexp(to_left, axis=2), axis=0)
                )
                to_right = out_rule + left[None, :, None]
                outside[k + 1, j] = np.logaddexp(
                    outside[k + 1, j], logsumexp(logsumexp(to_right, axis=1), axis=0)
                )
    g_root = np.exp(g.root + chart[0, n - 1, :nt] - log_z)
    diag_outside = np.stack([outside[i, i, nt:] for i in range(n)])  # [n, PT]
    diag_sticky = np.array([g.sticky[i, i] for i in range(n)])
    g_emis = np.exp(diag_outside + diag_sticky[:, None] + g.emissions - log_z)
    span_marg = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            total = lse(outside[i, j] + chart[i, j])
            span_marg[i, j] = np.exp(total - log_z) if total > NEG_INF else 0.0
    return log_z, {
        "root": g_root,
        "binary_rules": g_rules,
        "emissions": g_emis,
        "sticky": span_marg,
    }


def _pcfg_walk(g: PCFG, chart: np.ndarray, pick) -> np.ndarray:
    """Top-down derivation walk; returns the [n, n] span mask of its nodes."""
    n, nt = g.n, g.num_nt
    mask = np.zeros((n, n))
    sym = pick(g.root + chart[0, n - 1, :nt])
    stack = [(0, n - 1, sym)]
    while stack:
        i, j, a = stack.pop()
        mask[i, j] = 1.0
        if i == j:
            continue
        width = j - i
        left = chart[i, i:j]  # [width, S]
        right = chart[i + 1 : j + 1, j]  # [width, S]
        joint = g.binary_rules[a][None, :, :] + left[:, :, None] + right[:, None, :]
        flat = pick(joint.ravel())
        k_off, b, c = np.unravel_index(flat, joint.shape)
        k = i + int(k_off)
        stack.append((i, k, int(b)))
        stack.append((k + 1, j, int(c)))
    return mask


def pcfg_argmax(g: PCFG) -> dict[str, np.ndarray]:
    """Span mask of the highest-weight derivation."""
    chart = _pcfg_inside(g, np.zeros((g.n, g.n)), lambda x, ax: np.max(x, axis=ax))
    if np.max(g.root + chart[0, g.n - 1, : g.num_nt]) == NEG_INF:
        raise VacuousDistribution("the grammar derives no tree for this sentence")
    return {"sticky": _pcfg_walk(g, chart, lambda logits: int(np.argmax(logits)))}


def pcfg_sample(g: PCFG, rng: np.random.Generator) -> dict[str, np.ndarray]:
    chart = _pcfg_inside(g, np.zeros((g.n, g.n)), logsumexp)
    if lse(g.root + chart[0, g.n - 1, : g.num_nt]) == NEG_INF:
        raise VacuousDistribution("the grammar derives no tree for this sentence")
    return {"sticky": _pcfg_walk(g, chart, lambda logits: sample_log_categorical(rng, logits))}


def validate_pcfg_indicator(g: PCFG, indicator: dict[str, np.ndarray]):
    mask = indicator["sticky"]
    if mask.shape != (g.n, g.n):
        raise InvalidProblem("indicator span mask must have shape [n, n]")
    if not is_binary_bracketing(spans_of_indicator(mask), g.n):
        raise InvalidProblem("marked spans do not form a binary bracketing")

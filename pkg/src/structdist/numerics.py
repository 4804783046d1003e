"""Log-space numerical primitives and the semiring abstraction.

Every dynamic program in this package is written against a semiring:
the log semiring (logsumexp, +) for partition functions and marginals,
and the max-plus semiring (max, +) for Viterbi-style decoding.  -inf is
the canonical encoding for a forbidden part throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidProblem

NEG_INF = float("-inf")


def as_log_tensor(values, name: str = "tensor") -> np.ndarray:
    """Coerce to a float64 array of log-potentials; -inf allowed, NaN rejected."""
    arr = np.asarray(values, dtype=np.float64)
    if np.isnan(arr).any():
        raise InvalidProblem(f"{name} contains NaN entries")
    if np.isposinf(arr).any():
        raise InvalidProblem(f"{name} contains +inf entries")
    return arr


def logsumexp(values, axis: int) -> np.ndarray:
    """log sum exp along one axis, max-shifted so finite inputs never overflow.

    An all-(-inf) slice reduces to -inf rather than NaN.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.shape[axis] == 0:
        shape = list(x.shape)
        del shape[axis]
        return np.full(shape, NEG_INF)
    m = np.max(x, axis=axis, keepdims=True)
    shift = np.where(np.isneginf(m), 0.0, m)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - shift), axis=axis)) + np.squeeze(shift, axis=axis)
    return np.where(np.isneginf(np.squeeze(m, axis=axis)), NEG_INF, out)


def lse(values) -> float:
    """Scalar logsumexp over a flat collection."""
    return float(logsumexp(np.ravel(np.asarray(values, dtype=np.float64)), axis=0))


def _max_reduce(values, axis: int) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    if x.shape[axis] == 0:
        shape = list(x.shape)
        del shape[axis]
        return np.full(shape, NEG_INF)
    return np.max(x, axis=axis)


@dataclass(frozen=True)
class Semiring:
    """A commutative-plus semiring (zero, one, plus, times) with axis reduction."""

    name: str
    zero: float
    one: float
    plus: Callable[[np.ndarray, np.ndarray], np.ndarray]
    times: Callable[[np.ndarray, np.ndarray], np.ndarray]
    reduce: Callable[[np.ndarray, int], np.ndarray]


LOG = Semiring("log", NEG_INF, 0.0, np.logaddexp, np.add, logsumexp)
MAX_PLUS = Semiring("max-plus", NEG_INF, 0.0, np.maximum, np.add, _max_reduce)


def semiring_contract(spec: str, operands, semiring: Semiring) -> np.ndarray:
    """Einsum-style contraction with scalar +/x replaced by the semiring ops.

    `spec` uses the conventional named-axis notation, e.g. "ij,jk->ik".
    Labels must be unique within each operand.
    """
    if "->" not in spec:
        raise InvalidProblem(f"contraction spec {spec!r} must contain '->'")
    lhs, out_labels = spec.split("->")
    parts = lhs.split(",")
    arrays = [np.asarray(op, dtype=np.float64) for op in operands]
    if len(parts) != len(arrays):
        raise InvalidProblem(
            f"contraction spec names {len(parts)} operands, got {len(arrays)}"
        )
    extents: dict[str, int] = {}
    order: list[str] = []
    for labels, arr in zip(parts, arrays):
        if len(labels) != arr.ndim:
            raise InvalidProblem(
                f"operand with shape {arr.shape} does not match labels {labels!r}"
            )
        if len(set(labels)) != len(labels):
            raise InvalidProblem(f"repeated label within one operand: {labels!r}")
        for lab, ext in zip(labels, arr.shape):
            if extents.setdefault(lab, ext) != ext:
                raise InvalidProblem(
                    f"axis {lab!r} has inconsistent extents {extents[lab]} vs {ext}"
                )
            if lab not in order:
                order.append(lab)
    for lab in out_labels:
        if lab not in extents:
            raise InvalidProblem(f"output label {lab!r} never appears in inputs")
    full = list(out_labels) + [lab for lab in order if lab not in out_labels]

    acc = None
    for labels, arr in zip(parts, arrays):
        perm = sorted(range(len(labels)), key=lambda a: full.index(labels[a]))
        aligned = np.transpose(arr, perm)
        shape = [extents[lab] if lab in labels else 1 for lab in full]
        aligned = aligned.reshape(shape)
        acc = aligned if acc is None else semiring.times(acc, aligned)
    acc = np.broadcast_to(acc, [extents[lab] for lab in full]).copy()
    for ax in range(len(full) - 1, len(out_labels) - 1, -1):
        acc = semiring.reduce(acc, axis=ax)
    return acc


def signed_log_det(matrix) -> tuple[int, float]:
    """Determinant as (sign, log|det|) via partial-pivoted elimination.

    Returns (0, -inf) when a pivot falls below 1e-12 times the magnitude of
    its (original) row.  Row swaps flip the tracked sign.
    """
    m = np.array(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidProblem(f"signed_log_det requires a square matrix, got {m.shape}")
    if not np.isfinite(m).all():
        raise InvalidProblem("signed_log_det requires finite entries")
    n = m.shape[0]
    if n == 0:
        return 1, 0.0
    row_mag = np.max(np.abs(m), axis=1)
    sign = 1
    log_abs = 0.0
    for k in range(n):
        r = k + int(np.argmax(np.abs(m[k:, k])))
        pivot = m[r, k]
        if abs(pivot) <= 1e-12 * max(row_mag[r], 1e-300):
            return 0, NEG_INF
        if r != k:
            m[[k, r], :] = m[[r, k], :]
            row_mag[[k, r]] = row_mag[[r, k]]
            sign = -sign
        if pivot < 0.0:
            sign = -sign
        log_abs += math.log(abs(pivot))
        if k + 1 < n:
            m[k + 1 :, k:] -= np.outer(m[k + 1 :, k] / pivot, m[k, k:])
    return sign, log_abs


def sample_log_categorical(rng: np.random.Generator, log_weights) -> int:
    """Draw an index proportionally to exp(log_weights) via the Gumbel-max trick."""
    w = np.ravel(np.asarray(log_weights, dtype=np.float64))
    if not (w > NEG_INF).any():
        raise InvalidProblem("cannot sample: all categorical weights are -inf")
    g = rng.gumbel(size=w.shape)
    return int(np.argmax(np.where(w > NEG_INF, w + g, NEG_INF)))


def masked_dot(mask, theta) -> float:
    """Sum of mask*theta with the convention that mask==0 contributes exactly 0.

    A positive mask entry on a -inf potential makes the result -inf.
    """
    m = np.asarray(mask, dtype=np.float64)
    t = np.asarray(theta, dtype=np.float64)
    sel = m > 0
    if np.any(sel & np.isneginf(t)):
        return NEG_INF
    if not sel.any():
        return 0.0
    return float(np.sum(m[sel] * t[sel]))

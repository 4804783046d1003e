"""Timing harness: runs each suite single-threaded over a size grid and
reports medians as CSV rows (suite, n, algorithm, median_ms, iterations).
Timings are reported, never asserted."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import constituency, spanning
from .chain import LinearChainCRF, forward_log_partition
from .constituency import TreeCRF
from .errors import InvalidProblem
from .spanning import SpanningTreeCRF

SUITES = ("nonprojective-argmax", "projective-argmax", "chain", "treecrf")
CSV_HEADER = "suite,n,algorithm,median_ms,iterations"


@dataclass(frozen=True)
class BenchRow:
    suite: str
    n: int
    algorithm: str
    median_ms: float
    iterations: int

    def as_csv(self) -> str:
        return f"{self.suite},{self.n},{self.algorithm},{self.median_ms:.6f},{self.iterations}"


def _median_ms(fn, iterations: int) -> float:
    times = []
    for _ in range(iterations):
        start = time.perf_counter()
        fn()
        times.append((time.perf_counter() - start) * 1000.0)
    return statistics.median(times)


def _random_adjacency(rng, n: int) -> np.ndarray:
    adj = rng.normal(size=(n + 1, n + 1))
    adj[:, 0] = -np.inf
    np.fill_diagonal(adj, -np.inf)
    return adj


def run_suite(suite: str, sizes, iterations: int = 5) -> list[BenchRow]:
    if suite not in SUITES:
        raise InvalidProblem(f"unknown bench suite {suite!r}")
    rows = []
    for n in sizes:
        rng = np.random.default_rng(n)
        if suite == "nonprojective-argmax":
            adj = _random_adjacency(rng, n)
            multi = SpanningTreeCRF(adj, directed=True, projective=False)
            single = SpanningTreeCRF(
                adj, directed=True, projective=False, single_root_edge=True
            )
            rows.append(
                BenchRow(
                    suite, n, "chu-liu-edmonds",
                    _median_ms(lambda: spanning.cle_argmax(multi), iterations), iterations,
                )
            )
            rows.append(
                BenchRow(
                    suite, n, "reweighting+chu-liu-edmonds",
                    _median_ms(lambda: spanning.cle_argmax(single), iterations), iterations,
                )
            )
        elif suite == "projective-argmax":
            adj = _random_adjacency(rng, n)
            proj = SpanningTreeCRF(adj, directed=True, projective=True)
            rows.append(
                BenchRow(
                    suite, n, "eisner-max-plus",
                    _median_ms(lambda: spanning.eisner_max_arcs(proj), iterations), iterations,
                )
            )
            rows.append(
                BenchRow(
                    suite, n, "kuhlmann-arc-hybrid",
                    _median_ms(lambda: spanning.kuhlmann_argmax(proj), iterations), iterations,
                )
            )
        elif suite == "chain":
            m = 8
            crf = LinearChainCRF(rng.normal(size=m), rng.normal(size=(n - 1, m, m)))
            rows.append(
                BenchRow(
                    suite, n, "forward",
                    _median_ms(lambda: forward_log_partition(crf), iterations), iterations,
                )
            )
        else:  # treecrf
            m = 4
            tree = TreeCRF(rng.normal(size=(n, n, m)))
            rows.append(
                BenchRow(
                    suite, n, "cky-inside",
                    _median_ms(lambda: constituency.cky_log_partition(tree), iterations),
                    iterations,
                )
            )
    return rows


def rows_to_csv(rows) -> str:
    return "\n".join([CSV_HEADER] + [r.as_csv() for r in rows]) + "\n"

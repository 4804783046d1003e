"""Self-describing problem documents: one JSON file holds the family name,
the family config, the named potential tensors as nested arrays, and an
optional structure indicator.  -inf is encoded as the string "-inf"; +inf
results (possible for cross-entropy) are encoded as "inf"."""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .alignment import CTCDist, MonotoneAlignmentCRF, OneToOneMatching
from .chain import LinearChainCRF, SemiMarkovCRF
from .constituency import PCFG, TreeCRF
from .dist import FAMILIES, StructuredDistribution
from .errors import InvalidProblem
from .spanning import SpanningTreeCRF

NEG_INF = float("-inf")


def decode_nested(value) -> Any:
    """Nested lists of numbers with "-inf" markers -> python floats."""
    if isinstance(value, list):
        return [decode_nested(v) for v in value]
    if isinstance(value, str):
        if value == "-inf":
            return NEG_INF
        raise InvalidProblem(f"unexpected string {value!r} in numeric data")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidProblem(f"unexpected value {value!r} in numeric data")
    return float(value)


def encode_nested(value) -> Any:
    """Numbers / numpy arrays -> JSON-safe nested lists with inf markers."""
    if isinstance(value, np.ndarray):
        return encode_nested(value.tolist())
    if isinstance(value, (list, tuple)):
        return [encode_nested(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        value = float(value)
    if isinstance(value, float):
        if value == NEG_INF:
            return "-inf"
        if value == float("inf"):
            return "inf"
    return value


def _tensor(doc: dict, name: str) -> np.ndarray:
    pots = doc.get("potentials")
    if not isinstance(pots, dict) or name not in pots:
        raise InvalidProblem(f"missing potential tensor {name!r}")
    return np.asarray(decode_nested(pots[name]), dtype=np.float64)


def _int_field(config: dict, name: str) -> int:
    if name not in config:
        raise InvalidProblem(f"missing config field {name!r}")
    value = config[name]
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidProblem(f"config field {name!r} must be an integer")
    return value


def _bool_field(config: dict, name: str) -> bool:
    if name not in config or not isinstance(config[name], bool):
        raise InvalidProblem(f"missing boolean config field {name!r}")
    return config[name]


def _check(cond: bool, message: str):
    if not cond:
        raise InvalidProblem(message)


def problem_to_distribution(doc: dict) -> StructuredDistribution:
    if not isinstance(doc, dict):
        raise InvalidProblem("problem document must be a JSON object")
    family = doc.get("family")
    if family not in FAMILIES:
        raise InvalidProblem(f"unknown family {family!r}")
    config = doc.get("config")
    if not isinstance(config, dict):
        raise InvalidProblem("missing config object")

    if family == "linear_chain":
        n, m = _int_field(config, "n"), _int_field(config, "m")
        dist = LinearChainCRF(_tensor(doc, "init"), _tensor(doc, "transitions"))
        _check((dist.n, dist.m) == (n, m), "potential shapes do not match config sizes")
    elif family == "semi_markov":
        n, s, m = _int_field(config, "n"), _int_field(config, "s"), _int_field(config, "m")
        dist = SemiMarkovCRF(_tensor(doc, "segment_potentials"))
        _check((dist.n, dist.s, dist.m) == (n, s, m), "potential shapes do not match config sizes")
    elif family == "monotone_alignment":
        n, m = _int_field(config, "n"), _int_field(config, "m")
        dist = MonotoneAlignmentCRF(_tensor(doc, "move_potentials"))
        _check((dist.n, dist.m) == (n, m), "potential shapes do not match config sizes")
    elif family == "ctc":
        t = _int_field(config, "num_frames")
        v = _int_field(config, "vocab_size")
        target = config.get("target")
        _check(isinstance(target, list), "ctc config needs a target label list")
        dist = CTCDist(_tensor(doc, "frame_potentials"), tuple(int(x) for x in target))
        _check(
            (dist.num_frames, dist.vocab_size) == (t, v),
            "potential shapes do not match config sizes",
        )
    elif family == "one_to_one":
        n = _int_field(config, "n")
        dist = OneToOneMatching(_tensor(doc, "scores"))
        _check(dist.n == n, "potential shapes do not match config sizes")
    elif family == "tree_crf":
        n, m = _int_field(config, "n"), _int_field(config, "m")
        dist = TreeCRF(_tensor(doc, "span_potentials"))
        _check((dist.n, dist.m) == (n, m), "potential shapes do not match config sizes")
    elif family == "pcfg":
        n = _int_field(config, "n")
        nt, pt = _int_field(config, "nonterminals"), _int_field(config, "preterminals")
        sticky = None
        if isinstance(doc.get("potentials"), dict) and "sticky" in doc["potentials"]:
            sticky = _tensor(doc, "sticky")
        dist = PCFG(
            _tensor(doc, "root"),
            _tensor(doc, "binary_rules"),
            _tensor(doc, "emissions"),
            sticky,
        )
        _check(
            (dist.n, dist.num_nt, dist.num_pt) == (n, nt, pt),
            "potential shapes do not match config sizes",
        )
    else:  # spanning_tree
        n = _int_field(config, "n")
        dist = SpanningTreeCRF(
            _tensor(doc, "adjacency"),
            directed=_bool_field(config, "directed"),
            projective=_bool_field(config, "projective"),
            single_root_edge=_bool_field(config, "single_root_edge"),
        )
        _check(dist.n == n, "potential shapes do not match config sizes")
    return dist


def problem_config(dist: StructuredDistribution) -> dict:
    if isinstance(dist, LinearChainCRF):
        return {"n": dist.n, "m": dist.m}
    if isinstance(dist, SemiMarkovCRF):
        return {"n": dist.n, "s": dist.s, "m": dist.m}
    if isinstance(dist, MonotoneAlignmentCRF):
        return {"n": dist.n, "m": dist.m}
    if isinstance(dist, CTCDist):
        return {
            "num_frames": dist.num_frames,
            "vocab_size": dist.vocab_size,
            "target": list(dist.target),
        }
    if isinstance(dist, OneToOneMatching):
        return {"n": dist.n}
    if isinstance(dist, TreeCRF):
        return {"n": dist.n, "m": dist.m}
    if isinstance(dist, PCFG):
        return {"n": dist.n, "nonterminals": dist.num_nt, "preterminals": dist.num_pt}
    if isinstance(dist, SpanningTreeCRF):
        return {
            "n": dist.n,
            "directed": dist.directed,
            "projective": dist.projective,
            "single_root_edge": dist.single_root_edge,
        }
    raise InvalidProblem(f"unknown distribution type {type(dist).__name__}")


def distribution_to_problem(dist: StructuredDistribution, indicator=None) -> dict:
    doc = {
        "family": dist.family,
        "config": problem_config(dist),
        "potentials": {k: encode_nested(v) for k, v in dist.potentials().items()},
    }
    if indicator is not None:
        doc["indicator"] = {k: encode_nested(v) for k, v in indicator.items()}
    return doc


def document_indicator(doc: dict) -> dict[str, np.ndarray] | None:
    ind = doc.get("indicator")
    if ind is None:
        return None
    if not isinstance(ind, dict):
        raise InvalidProblem("indicator must be an object of named masks")
    return {k: np.asarray(decode_nested(v), dtype=np.float64) for k, v in ind.items()}


def load_problem(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidProblem(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidProblem(f"cannot parse {path}: {exc}") from exc


def dump_problem(doc: dict, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

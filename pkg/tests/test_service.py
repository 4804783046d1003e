import warnings

import numpy as np
import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

import structdist as sd
from structdist.problemfile import distribution_to_problem
from structdist.service import app

from helpers import rand_chain, rand_matching, rand_spanning

client = TestClient(app)


def test_healthz():
    assert client.get("/healthz").json() == {"status": "ok"}


def test_log_partition_endpoint_matches_library():
    dist = rand_chain(0, n=4, m=3)
    r = client.post("/logZ", json=distribution_to_problem(dist))
    assert r.status_code == 200
    body = r.json()
    assert body["command"] == "logZ"
    assert body["algorithm"] == "forward"
    assert body["result"]["log_partition"] == sd.log_partition(dist)


def test_marginals_endpoint():
    dist = rand_chain(1, n=3, m=2)
    r = client.post("/marginals", json=distribution_to_problem(dist))
    assert r.status_code == 200
    marg = np.asarray(r.json()["result"]["marginals"]["transitions"])
    assert np.allclose(marg, sd.marginals(dist)["transitions"])


def test_argmax_endpoint_reports_score_and_provenance():
    dist = rand_spanning(2, n=4, projective=True, single_root_edge=True)
    r = client.post("/argmax", json=distribution_to_problem(dist))
    body = r.json()
    assert body["algorithm"] == "reweighting+kuhlmann-arc-hybrid"
    _, score, _ = sd.argmax_info(dist)
    assert body["result"]["score"] == score


def test_sample_endpoint_is_deterministic():
    dist = rand_spanning(3, n=4)
    doc = distribution_to_problem(dist)
    r1 = client.post("/sample", json={"problem": doc, "seed": 5, "num": 3})
    r2 = client.post("/sample", json={"problem": doc, "seed": 5, "num": 3})
    assert r1.status_code == 200
    assert r1.text == r2.text
    assert len(r1.json()["result"]["samples"]) == 3


def test_entropy_and_pair_endpoints():
    p = rand_chain(4, n=3, m=2)
    q = rand_chain(5, n=3, m=2)
    doc_p, doc_q = distribution_to_problem(p), distribution_to_problem(q)
    h = client.post("/entropy", json=doc_p).json()["result"]["entropy"]
    assert h == pytest.approx(sd.entropy(p))
    ce = client.post("/crossentropy", json={"p": doc_p, "q": doc_q}).json()
    assert ce["result"]["cross_entropy"] == pytest.approx(sd.cross_entropy(p, q))
    kl = client.post("/kl", json={"p": doc_p, "q": doc_p}).json()
    assert abs(kl["result"]["kl_divergence"]) < 1e-9


def test_logprob_endpoint_requires_indicator():
    dist = rand_chain(6, n=3, m=2)
    doc = distribution_to_problem(dist)
    r = client.post("/logprob", json=doc)
    assert r.status_code == 400
    assert r.json()["detail"]["kind"] == "malformed"
    ind = sd.argmax(dist)
    doc = distribution_to_problem(dist, indicator=ind)
    r = client.post("/logprob", json=doc)
    assert r.status_code == 200
    assert r.json()["result"]["log_prob"] == pytest.approx(sd.log_prob(dist, ind))


def test_unsupported_family_operation_is_409():
    match = rand_matching(7, n=3)
    r = client.post("/logZ", json=distribution_to_problem(match))
    assert r.status_code == 409
    detail = r.json()["detail"]
    assert detail["kind"] == "unsupported"
    assert detail["reason"] == "partition intractable for one-to-one matching"


def test_malformed_document_is_400():
    r = client.post(
        "/logZ",
        json={"family": "linear_chain", "config": {"n": 2, "m": 2}, "potentials": {}},
    )
    assert r.status_code == 400
    assert r.json()["detail"]["kind"] == "malformed"


def test_neg_inf_round_trips_through_service():
    vacuous = sd.CTCDist(np.zeros((1, 3)), (1, 2))  # too few frames
    r = client.post("/logZ", json=distribution_to_problem(vacuous))
    assert r.json()["result"]["log_partition"] == "-inf"


def test_bench_endpoint_emits_csv():
    r = client.post("/bench", json={"suite": "chain", "sizes": [8], "iterations": 2})
    assert r.status_code == 200
    lines = r.text.strip().splitlines()
    assert lines[0] == "suite,n,algorithm,median_ms,iterations"
    assert lines[1].startswith("chain,8,forward,")


def test_bench_unknown_suite_is_400():
    r = client.post("/bench", json={"suite": "nope", "sizes": [8]})
    assert r.status_code == 400

"""HTTP inference service.

Every operation the library supports is exposed as one POST endpoint
taking a problem document (family, config, potential tensors, optional
indicator).  Errors map to structured bodies: malformed input -> 400 with
kind "malformed", an operation a family cannot support exactly -> 409
with kind "unsupported"."""

from __future__ import annotations

from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from . import bench as bench_mod
from . import dist as ops
from .errors import (
    InvalidProblem,
    SamplerStepLimit,
    StructDistError,
    UnsupportedInference,
    VacuousDistribution,
)
from .problemfile import (
    document_indicator,
    encode_nested,
    problem_config,
    problem_to_distribution,
)


class ProblemDocument(BaseModel):
    family: str
    config: dict[str, Any]
    potentials: dict[str, Any]
    indicator: Optional[dict[str, Any]] = None


class SampleRequest(BaseModel):
    problem: ProblemDocument
    seed: int = Field(ge=0, lt=2**64)
    num: int = Field(default=1, ge=1)
    algorithm: Optional[str] = None


class PairRequest(BaseModel):
    p: ProblemDocument
    q: ProblemDocument


class BenchRequest(BaseModel):
    suite: str
    sizes: list[int]
    iterations: int = Field(default=5, ge=1)


class InferenceResponse(BaseModel):
    command: str
    family: str
    config: dict[str, Any]
    algorithm: str
    result: dict[str, Any]


app = FastAPI(title="structdist", version="0.1.0")


def _parse(doc: ProblemDocument):
    try:
        return problem_to_distribution(doc.model_dump())
    except InvalidProblem as exc:
        raise HTTPException(
            status_code=400, detail={"kind": "malformed", "reason": str(exc)}
        ) from exc


def _run(command: str, dist, fn) -> InferenceResponse:
    try:
        result, algorithm = fn()
    except UnsupportedInference as exc:
        raise HTTPException(
            status_code=409, detail={"kind": "unsupported", "reason": str(exc)}
        ) from exc
    except (InvalidProblem, VacuousDistribution, SamplerStepLimit) as exc:
        raise HTTPException(
            status_code=400, detail={"kind": "malformed", "reason": str(exc)}
        ) from exc
    return InferenceResponse(
        command=command,
        family=dist.family,
        config=problem_config(dist),
        algorithm=algorithm,
        result=result,
    )


@app.get("/healthz")
def healthz():
    return {"status": "ok"}


@app.post("/logZ", response_model=InferenceResponse)
def log_partition(doc: ProblemDocument):
    dist = _parse(doc)

    def fn():
        value, algo = ops.log_partition_info(dist)
        return {"log_partition": encode_nested(value)}, algo

    return _run("logZ", dist, fn)


@app.post("/marginals", response_model=InferenceResponse)
def marginals(doc: ProblemDocument):
    dist = _parse(doc)

    def fn():
        marg, algo = ops.marginals_info(dist)
        return {"marginals": {k: encode_nested(v) for k, v in marg.items()}}, algo

    return _run("marginals", dist, fn)


@app.post("/argmax", response_model=InferenceResponse)
def argmax(doc: ProblemDocument):
    dist = _parse(doc)

    def fn():
        ind, score, algo = ops.argmax_info(dist)
        return {
            "indicator": {k: encode_nested(v) for k, v in ind.items()},
            "score": encode_nested(score),
        }, algo

    return _run("argmax", dist, fn)


@app.post("/sample", response_model=InferenceResponse)
def sample(req: SampleRequest):
    dist = _parse(req.problem)

    def fn():
        inds, algo = ops.sample_info(dist, req.seed, req.num, req.algorithm)
        return {
            "seed": req.seed,
            "num": req.num,
            "samples": [{k: encode_nested(v) for k, v in ind.items()} for ind in inds],
        }, algo

    return _run("sample", dist, fn)


@app.post("/entropy", response_model=InferenceResponse)
def entropy(doc: ProblemDocument):
    dist = _parse(doc)

    def fn():
        value, algo = ops.entropy_info(dist)
        return {"entropy": encode_nested(value)}, algo

    return _run("entropy", dist, fn)


@app.post("/logprob", response_model=InferenceResponse)
def log_prob(doc: ProblemDocument):
    dist = _parse(doc)
    try:
        indicator = document_indicator(doc.model_dump())
    except InvalidProblem as exc:
        raise HTTPException(
            status_code=400, detail={"kind": "malformed", "reason": str(exc)}
        ) from exc
    if indicator is None:
        raise HTTPException(
            status_code=400,
            detail={"kind": "malformed", "reason": "logprob requires an indicator"},
        )

    def fn():
        value, algo = ops.log_prob_info(dist, indicator)
        return {"log_prob": encode_nested(value)}, algo

    return _run("logprob", dist, fn)


def _pair_endpoint(command: str, req: PairRequest, pair_fn):
    p = _parse(req.p)
    q = _parse(req.q)

    def fn():
        value, algo = pair_fn(p, q)
        key = "cross_entropy" if command == "crossentropy" else "kl_divergence"
        return {key: encode_nested(value)}, algo

    return _run(command, p, fn)


@app.post("/crossentropy", response_model=InferenceResponse)
def cross_entropy(req: PairRequest):
    return _pair_endpoint("crossentropy", req, ops.cross_entropy_info)


@app.post("/kl", response_model=InferenceResponse)
def kl_divergence(req: PairRequest):
    return _pair_endpoint("kl", req, ops.kl_divergence_info)


@app.post("/bench", response_class=PlainTextResponse)
def bench(req: BenchRequest):
    try:
        rows = bench_mod.run_suite(req.suite, req.sizes, req.iterations)
    except InvalidProblem as exc:
        raise HTTPException(
            status_code=400, detail={"kind": "malformed", "reason": str(exc)}
        ) from exc
    except StructDistError as exc:
        raise HTTPException(
            status_code=400, detail={"kind": "malformed", "reason": str(exc)}
        ) from exc
    return PlainTextResponse(bench_mod.rows_to_csv(rows), media_type="text/csv")

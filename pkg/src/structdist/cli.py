"""Command-line front end.

The CLI is a thin client of the HTTP service: each command is turned into
a request and dispatched either in-process against the FastAPI app
(default) or to a running server given via --server.  Results print as a
canonical JSON document on stdout (CSV for bench); diagnostics go to
stderr.  Exit codes: 0 success, 2 malformed input, 3 operation
unsupported for the family.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import InvalidProblem
from .problemfile import load_problem

EXIT_OK = 0
EXIT_MALFORMED = 2
EXIT_UNSUPPORTED = 3

PROBLEM_COMMANDS = ("logZ", "marginals", "argmax", "sample", "entropy", "logprob")
PAIR_COMMANDS = ("crossentropy", "kl")


def _make_client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finish(response, out_path: str | None) -> int:
    if response.status_code == 200:
        content_type = response.headers.get("content-type", "")
        if content_type.startswith("text/csv"):
            _emit(response.text, out_path)
        else:
            doc = response.json()
            _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", out_path)
        return EXIT_OK
    try:
        detail = response.json().get("detail", {})
    except ValueError:
        detail = {}
    if not isinstance(detail, dict):  # pydantic validation errors arrive as a list
        detail = {"kind": "malformed", "reason": json.dumps(detail)}
    kind = detail.get("kind", "malformed")
    reason = detail.get("reason", f"request failed with status {response.status_code}")
    print(f"error: {reason}", file=sys.stderr)
    return EXIT_UNSUPPORTED if kind == "unsupported" else EXIT_MALFORMED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structdist",
        description="Exact inference over structured distributions from problem files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--server", help="base URL of a running service; default is in-process")
        p.add_argument("--out", help="write the output document to this path instead of stdout")

    for name in PROBLEM_COMMANDS:
        p = sub.add_parser(name, help=f"run {name} on one problem file")
        p.add_argument("input", help="problem file (JSON)")
        if name == "sample":
            p.add_argument("--seed", type=int, required=True, help="64-bit unsigned seed")
            p.add_argument("--num", type=int, default=1, help="number of samples")
            p.add_argument(
                "--algorithm",
                choices=("wilson", "colbourn", "eisner"),
                help="spanning-tree sampler override",
            )
        add_common(p)

    for name in PAIR_COMMANDS:
        p = sub.add_parser(name, help=f"run {name} on two problem files")
        p.add_argument("input_p", help="problem file for p")
        p.add_argument("input_q", help="problem file for q")
        add_common(p)

    p = sub.add_parser("bench", help="emit timing CSV for one suite")
    p.add_argument(
        "suite", choices=("nonprojective-argmax", "projective-argmax", "chain", "treecrf")
    )
    p.add_argument("--n", default="16,32", help="comma-separated size list")
    p.add_argument("--iterations", type=int, default=5)
    add_common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    client = _make_client(args.server)
    try:
        if args.command == "bench":
            try:
                sizes = [int(x) for x in str(args.n).split(",") if x.strip()]
            except ValueError:
                print(f"error: cannot parse size list {args.n!r}", file=sys.stderr)
                return EXIT_MALFORMED
            response = client.post(
                "/bench",
                json={"suite": args.suite, "sizes": sizes, "iterations": args.iterations},
            )
            return _finish(response, args.out)

        if args.command in PAIR_COMMANDS:
            try:
                doc_p = load_problem(args.input_p)
                doc_q = load_problem(args.input_q)
            except InvalidProblem as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_MALFORMED
            response = client.post(f"/{args.command}", json={"p": doc_p, "q": doc_q})
            return _finish(response, args.out)

        try:
            doc = load_problem(args.input)
        except InvalidProblem as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_MALFORMED
        if args.command == "sample":
            payload = {
                "problem": doc,
                "seed": args.seed,
                "num": args.num,
                "algorithm": args.algorithm,
            }
            response = client.post("/sample", json=payload)
        else:
            response = client.post(f"/{args.command}", json=doc)
        return _finish(response, args.out)
    finally:
        client.close()


if __name__ == "__main__":
    sys.exit(main())

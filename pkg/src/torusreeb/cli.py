"""Command-line client for the analysis service.

The CLI is a thin HTTP client: it assembles a request from its arguments,
posts it to the service (an in-process ASGI transport by default, or a
remote instance via --server), and writes the response artifacts into the
output directory.  Exit codes: 1 input/parse errors, 2 degenerate fields,
3 topology violations (e.g. tree Reeb graph for pi1), 4 failed verification
checks.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

from .errors import EXIT_INGESTION, EXIT_VERIFICATION

SCHEMA_INDENT = 2


def _post_inprocess(endpoint: str, payload: dict) -> httpx.Response:
    """Drive the ASGI app directly; no server process needed for batch use."""
    import asyncio

    from .service.app import app

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://torusreeb.local",
                                     timeout=None) as client:
            return await client.post(endpoint, json=payload)

    return asyncio.run(go())


def _field_spec(args) -> dict:
    spec: dict = {"resolution": args.resolution}
    if getattr(args, "tol", None) is not None:
        spec["label_tol"] = args.tol
    if args.expr is not None:
        spec["expr"] = args.expr
        return spec
    path = Path(args.input)
    if not path.exists():
        print(f"error: input file not found: {path}", file=sys.stderr)
        raise SystemExit(EXIT_INGESTION)
    spec["file_text"] = path.read_text()
    return spec


def _post(args, endpoint: str, payload: dict) -> dict:
    if args.server:
        with httpx.Client(base_url=args.server, timeout=600.0) as client:
            resp = client.post(endpoint, json=payload)
    else:
        resp = _post_inprocess(endpoint, payload)
    if resp.status_code == 200:
        return resp.json()
    try:
        body = resp.json()
    except ValueError:
        print(f"error: service returned HTTP {resp.status_code}", file=sys.stderr)
        raise SystemExit(EXIT_INGESTION) from None
    message = body.get("message") or body.get("detail") or str(body)
    code = body.get("exit_code", EXIT_INGESTION)
    print(f"error: {body.get('error', 'request failed')}: {message}", file=sys.stderr)
    raise SystemExit(int(code))


def _write(out_dir: Path, name: str, payload) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    if isinstance(payload, (dict, list)):
        path.write_text(json.dumps(payload, sort_keys=True, indent=SCHEMA_INDENT) + "\n")
    else:
        path.write_text(payload)
    print(f"wrote {path}")
    return path


def cmd_analyze(args) -> int:
    data = _post(args, "/analyze", {"field": _field_spec(args)})
    out = Path(args.out)
    _write(out, "critical_points.json", data["critical_points"])
    _write(out, "reeb.json", data["reeb"])
    _write(out, "reeb.svg", data["svg"])
    betti = data["reeb"]["betti1"]
    print(f"betti1={betti} cycle={'yes' if data['has_cycle'] else 'no'} "
          f"critical_points={len(data['critical_points'])}")
    return 0


def cmd_decompose(args) -> int:
    payload = {"field": _field_spec(args), "level": args.level,
               "chosen_curve": args.chosen_curve}
    data = _post(args, "/decompose", payload)
    _write(Path(args.out), "decomposition.json", data)
    print(f"m={data['m']} cyclic_index={data['cyclic_index']} word={data['word']}")
    return 0


def cmd_pi1(args) -> int:
    payload: dict = {"field": _field_spec(args), "level": args.level}
    if args.base_presentation is not None:
        path = Path(args.base_presentation)
        if not path.exists():
            print(f"error: presentation file not found: {path}", file=sys.stderr)
            return EXIT_INGESTION
        payload["base_presentation"] = path.read_text()
    elif args.assume_abelian_rank is not None:
        payload["assume_abelian_rank"] = args.assume_abelian_rank
    data = _post(args, "/pi1", payload)
    out = Path(args.out)
    _write(out, "pi1.json", data)
    _write(out, "presentation.txt", data["presentation_text"])
    print(f"cyclic_index={data['cyclic_index']} "
          f"generators={len(data['generators'])} relators={len(data['relators'])}")
    return 0


def cmd_verify(args) -> int:
    payload = {"n": args.n, "resolution": args.resolution, "seed": args.seed,
               "frames": args.frames, "corrupt_slide": args.corrupt_slide}
    if args.eps is not None:
        payload["eps"] = args.eps
    data = _post(args, "/verify", payload)
    _write(Path(args.out), "verify.json", data)
    for check in data["checks"]:
        mark = "PASS" if check["passed"] else "FAIL"
        detail = f" ({check['detail']})" if check["detail"] else ""
        print(f"[{mark}] {check['name']}{detail}")
    if not data["all_passed"]:
        print("verification failed", file=sys.stderr)
        return EXIT_VERIFICATION
    print("all checks passed")
    return 0


def cmd_quotient(args) -> int:
    payload: dict = {"field": _field_spec(args)}
    if args.n is not None:
        payload["n"] = args.n
    data = _post(args, "/quotient", payload)
    out = Path(args.out)
    field_file = data.pop("quotient_field_file")
    _write(out, "quotient.json", data)
    _write(out, "quotient_field.txt", field_file)
    print(f"n={data['n']} commutation_error={data['commutation_error']:.2e} "
          f"quotient_cyclic_index={data['quotient']['cyclic_index']}")
    return 0


def cmd_render(args) -> int:
    data = _post(args, "/render", {"field": _field_spec(args)})
    _write(Path(args.out), "reeb.svg", data["svg"])
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_field_args(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--expr", help="field expression in x, y")
    src.add_argument("--input", help="field file (expr: ... or grid: N)")
    p.add_argument("-N", "--resolution", type=int, default=256,
                   help="grid resolution (power of two >= 64)")
    p.add_argument("--tol", type=float, default=None,
                   help="relative block-label tolerance override")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--server", default=None,
                   help="remote service URL (default: run in-process)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusreeb",
        description="Kronrod-Reeb graphs and orbit fundamental groups on the 2-torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="critical points, Reeb graph, SVG")
    _add_field_args(p)
    _add_common(p)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("decompose", help="cut along non-separating level curves")
    _add_field_args(p)
    _add_common(p)
    p.add_argument("--level", type=float, default=None,
                   help="regular cut level (default: a cycle-edge midlevel)")
    p.add_argument("--chosen-curve", type=int, default=0)
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("pi1", help="assemble the orbit fundamental group")
    _add_field_args(p)
    _add_common(p)
    p.add_argument("--level", type=float, default=None)
    p.add_argument("--base-presentation", default=None,
                   help="file with the base presentation (gens:/rels: format)")
    p.add_argument("--assume-abelian-rank", type=int, default=None,
                   help="use Z^r as the base group (experimentation shortcut)")
    p.set_defaults(fn=cmd_pi1)

    p = sub.add_parser("verify", help="run the model-diffeomorphism check suite")
    p.add_argument("-n", type=int, required=True, help="cyclic index of the fixture")
    p.add_argument("-N", "--resolution", type=int, default=256)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=16)
    p.add_argument("--corrupt-slide", action="store_true",
                   help="negative control: break a slide's support")
    _add_common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("quotient", help="build and verify the Z_n quotient")
    _add_field_args(p)
    _add_common(p)
    p.add_argument("-n", type=int, default=None,
                   help="cyclic index (default: computed from the field)")
    p.set_defaults(fn=cmd_quotient)

    p = sub.add_parser("render", help="emit the Reeb graph SVG only")
    _add_field_args(p)
    _add_common(p)
    p.set_defaults(fn=cmd_render)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0


if __name__ == "__main__":
    sys.exit(main())

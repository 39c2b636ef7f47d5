"""Command-line client for the simulation service.

By default requests are served in-process through an ASGI transport, so the
CLI works without a running server; ``--server URL`` points it at a remote
instance instead.  ``serve`` runs the service under uvicorn.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import httpx

from .machine import MachineFormatError, load_machine, spec_to_jsonable
from .reports import ReportRow, export_report

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2

LANGUAGE_ALPHABETS = {
    "suffix": ["a", "b"],
    "modlen": ["a"],
    "exactlen": ["a"],
    "palindrome": ["a", "b"],
    "balanced": ["a", "b"],
}


class CliError(Exception):
    pass


def _client(args) -> httpx.Client:
    if args.server:
        return httpx.Client(base_url=args.server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service import create_app

    return TestClient(create_app(), raise_server_exceptions=False)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except Exception:
            detail = response.text
        raise CliError(f"{path} failed ({response.status_code}): {detail}")
    return response.json()


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_from_response(data: dict) -> list[ReportRow]:
    rows = []
    for item in data["rows"]:
        rows.append(ReportRow(
            machine=item["machine"],
            word=item["word"],
            p_acc=item["p_acc"],
            p_rej=item["p_rej"],
            p_reset_total=item["p_reset_total"],
            P_acc=item["P_acc"],
            P_rej=item["P_rej"],
            expected_steps=math.inf if item["expected_steps"] is None else item["expected_steps"],
            lemma4_bound=math.inf if item["lemma4_bound"] is None else item["lemma4_bound"],
            verdict=item["verdict"],
        ))
    return rows


def _load_machine_payload(path: str) -> dict:
    try:
        return spec_to_jsonable(load_machine(path))
    except FileNotFoundError:
        raise CliError(f"spec file not found: {path}")
    except MachineFormatError as exc:
        raise CliError(str(exc))


def _word_list(args, alphabet) -> list[str]:
    if args.words is not None:
        return [w for w in args.words.split(",")]
    from .closure import words_up_to

    return list(words_up_to(alphabet, args.max_len))


def cmd_zoo_build(args, client) -> int:
    payload = {"family": args.family, "eps": args.eps, "variant": args.variant}
    if args.m is not None:
        payload["m"] = args.m
    data = _post(client, "/zoo/build", payload)
    text = json.dumps(data["machine"], indent=1) + "\n"
    _emit(text, args.out)
    if args.out:
        print(f"{data['machine_id']}: {data['states']} states -> {args.out}")
    return EXIT_OK


def cmd_eval(args, client) -> int:
    machine = _load_machine_payload(args.spec)
    payload = {
        "machine": machine,
        "words": _word_list(args, machine["alphabet"]),
        "machine_id": args.machine_id or args.spec,
    }
    if args.language:
        payload["language"] = {
            "family": args.language,
            "m": args.m,
            "alphabet": machine["alphabet"],
        }
        if args.eps is None:
            raise CliError("--language needs --eps for the verdict column")
        payload["eps"] = args.eps
    data = _post(client, "/eval", payload)
    _emit(export_report(_rows_from_response(data), args.format), args.out)
    return EXIT_OK


def cmd_sweep(args, client) -> int:
    payload = {
        "family": args.family,
        "m_values": [int(v) for v in args.m.split(",")] if args.m else [],
        "eps_values": [float(v) for v in args.eps.split(",")],
        "max_len": args.max_len,
        "variant": args.variant,
    }
    data = _post(client, "/sweep", payload)
    _emit(export_report(_rows_from_response(data), args.format), args.out)
    return EXIT_OK


def cmd_sample(args, client) -> int:
    payload = {
        "machine": _load_machine_payload(args.spec),
        "word": args.word,
        "n": args.n,
        "seed": args.seed,
        "max_rounds": args.max_rounds,
    }
    if args.step_cap is not None:
        payload["step_cap"] = args.step_cap
    data = _post(client, "/sample", payload)
    keys = ("n", "accepted", "rejected", "censored", "acceptance",
            "stderr_acc", "mean_steps", "mean_rounds")
    if args.format == "json":
        parts = [f'"{k}": {format(data[k], ".17g") if isinstance(data[k], float) else data[k]}'
                 for k in keys]
        text = "{" + ", ".join(parts) + "}\n"
    else:
        text = ",".join(keys) + "\n" + ",".join(
            format(data[k], ".17g") if isinstance(data[k], float) else str(data[k])
            for k in keys) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_verify(args, client) -> int:
    payload: dict = {}
    if args.family:
        if args.eps is None:
            raise CliError("verify --family needs --eps")
        payload = {"family": args.family, "m": args.m, "eps": args.eps}
    elif args.checks:
        payload = {"checks": args.checks.split(",")}
    data = _post(client, "/verify", payload)
    for result in data["results"]:
        line = f"[{'PASS' if result['passed'] else 'FAIL'}] {result['name']}"
        if result["detail"]:
            line += f" -- {result['detail']}"
        print(line)
    return EXIT_OK if data["passed"] else EXIT_VERIFY_FAILED


def cmd_serve(args, _client) -> int:
    import uvicorn

    uvicorn.run("restartfa.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="restartfa",
        description="simulate quantum/probabilistic automata with restart and reset moves",
    )
    parser.add_argument("--server", default=None,
                        help="URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    zoo = sub.add_parser("zoo", help="machine builders")
    zoo_sub = zoo.add_subparsers(dest="zoo_command", required=True)
    build = zoo_sub.add_parser("build", help="build a machine and write its spec file")
    build.add_argument("--family", required=True,
                       choices=["am", "am-pfa", "bm", "cm", "pal", "leq", "leq-pfa"])
    build.add_argument("--m", type=int, default=None)
    build.add_argument("--eps", type=float, required=True)
    build.add_argument("--variant", choices=["base", "wrapped"], default="wrapped")
    build.add_argument("--out", default=None, help="spec file path (default: stdout)")
    build.set_defaults(func=cmd_zoo_build)

    ev = sub.add_parser("eval", help="evaluate words on a machine spec file")
    ev.add_argument("--spec", required=True)
    ev.add_argument("--words", default=None, help="comma-separated words ('' for empty)")
    ev.add_argument("--max-len", type=int, default=4,
                    help="evaluate all words up to this length when --words is absent")
    ev.add_argument("--language", default=None, choices=sorted(LANGUAGE_ALPHABETS),
                    help="membership oracle for the verdict column")
    ev.add_argument("--m", type=int, default=None)
    ev.add_argument("--eps", type=float, default=None)
    ev.add_argument("--machine-id", default=None)
    ev.add_argument("--format", choices=["csv", "json"], default="csv")
    ev.add_argument("--out", default=None)
    ev.set_defaults(func=cmd_eval)

    sw = sub.add_parser("sweep", help="evaluate a family over a parameter grid")
    sw.add_argument("--family", required=True,
                    choices=["am", "am-pfa", "bm", "cm", "pal", "leq", "leq-pfa"])
    sw.add_argument("--m", default=None, help="comma-separated m values")
    sw.add_argument("--eps", required=True, help="comma-separated error bounds")
    sw.add_argument("--max-len", type=int, default=6)
    sw.add_argument("--variant", choices=["base", "wrapped"], default="wrapped")
    sw.add_argument("--format", choices=["csv", "json"], default="csv")
    sw.add_argument("--out", default=None)
    sw.set_defaults(func=cmd_sweep)

    sa = sub.add_parser("sample", help="Monte Carlo trajectory sampling")
    sa.add_argument("--spec", required=True)
    sa.add_argument("--word", required=True)
    sa.add_argument("--n", type=int, required=True)
    sa.add_argument("--seed", type=int, default=0)
    sa.add_argument("--max-rounds", type=int, default=1_000_000)
    sa.add_argument("--step-cap", type=int, default=None)
    sa.add_argument("--format", choices=["csv", "json"], default="csv")
    sa.add_argument("--out", default=None)
    sa.set_defaults(func=cmd_sample)

    ve = sub.add_parser("verify", help="run the acceptance battery (exit 0 iff all pass)")
    ve.add_argument("--checks", default=None,
                    help="comma-separated check ids (e.g. 1,2,3a); default: all")
    ve.add_argument("--family", default=None,
                    choices=["am", "am-pfa", "bm", "cm", "pal", "leq", "leq-pfa"],
                    help="validate one built machine instead of the full battery")
    ve.add_argument("--m", type=int, default=None)
    ve.add_argument("--eps", type=float, default=None)
    ve.set_defaults(func=cmd_verify)

    se = sub.add_parser("serve", help="run the HTTP service")
    se.add_argument("--host", default="127.0.0.1")
    se.add_argument("--port", type=int, default=8000)
    se.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return cmd_serve(args, None)
        with _client(args) as client:
            return args.func(args, client)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Every command builds a request model from an optional config file and the
command-line flags (flags win), runs it locally or against a running service
(``--server URL``) and writes CSV or JSON.

Exit codes: 0 success, 2 invalid input or domain error, 3 blow-up or
non-convergence, 4 I/O failure (config, output file, server).
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
import typing
from pathlib import Path

from pydantic import BaseModel, ValidationError

from .errors import BlowUpError, ConvergenceError, FracRiccatiError
from .handlers import HANDLERS
from .schemas import (ConvergenceResponse, PriceResponse, RadiusResponse, SkewResponse, SolveResponse,
                      TripletResponse)

EXIT_OK, EXIT_DOMAIN, EXIT_BLOWUP, EXIT_IO = 0, 2, 3, 4

RESPONSES = {
    "solve": SolveResponse,
    "radius": RadiusResponse,
    "triplet": TripletResponse,
    "price": PriceResponse,
    "skew": SkewResponse,
    "convergence": ConvergenceResponse,
}

# extra spellings accepted on the command line and in config files
ALIASES = {"lambda": "lam", "T": "t", "maturity": "t", "method_rr": "scheme"}

DESCRIPTIONS = {
    "solve": "triplet (psi, I_1 psi, I_{1-alpha} psi)(t) of one Riccati equation",
    "radius": "radius estimates tau_*, R^(n), R-hat and the upper bound",
    "triplet": "rough Heston triplet and characteristic function at one frequency",
    "price": "hybrid vs Adams European call book",
    "skew": "ATM skew term structure",
    "convergence": "first-order error constant and plain / RR2 / RR3 errors",
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _is_list(annotation) -> bool:
    origin = typing.get_origin(annotation)
    if origin is typing.Union:
        return any(_is_list(a) for a in typing.get_args(annotation) if a is not type(None))
    return origin is list


def _is_bool(annotation) -> bool:
    return annotation is bool


def _add_model_flags(sub: argparse.ArgumentParser, model: type[BaseModel]):
    reverse = {v: k for k, v in ALIASES.items() if k in ("lambda", "T")}
    for name, info in model.model_fields.items():
        flags = [f"--{name.replace('_', '-')}"]
        if name in reverse:
            flags.append(f"--{reverse[name]}")
        default = info.get_default(call_default_factory=True)
        shown = "required" if info.is_required() else f"default {default}"
        if _is_bool(info.annotation):
            sub.add_argument(*flags, dest=name, action=argparse.BooleanOptionalAction, default=None,
                             help=shown)
        elif _is_list(info.annotation):
            sub.add_argument(*flags, dest=name, default=None, metavar="A,B,...",
                             help=f"comma-separated list ({shown})")
        else:
            sub.add_argument(*flags, dest=name, default=None, help=shown)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI (one section per command) or JSON config file")
    common.add_argument("--output", "-o", type=Path, help="write to this file instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--server", help="base URL of a running service; run remotely instead of locally")

    parser = argparse.ArgumentParser(prog="frac-riccati", description="Fractional Riccati solvers and rough "
                                                                      "Heston pricing.")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, (model, _) in HANDLERS.items():
        sub = subs.add_parser(name, parents=[common], help=DESCRIPTIONS[name], description=DESCRIPTIONS[name])
        _add_model_flags(sub, model)
    serve = subs.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _normalize(key: str) -> str:
    key = key.strip().replace("-", "_")
    return ALIASES.get(key, key)


def load_config(path: Path, command: str) -> dict:
    """Parameters for one command from an INI or JSON file."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror or exc}", EXIT_IO) from exc
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError(f"malformed JSON config {path}: {exc}", EXIT_IO) from exc
        if not isinstance(data, dict):
            raise CliError(f"JSON config {path} must hold an object", EXIT_IO)
        section = data.get(command, {}) if any(k in HANDLERS for k in data) else data
        return {_normalize(k): v for k, v in section.items()}
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise CliError(f"malformed config {path}: {exc}", EXIT_IO) from exc
    items = dict(cp.defaults())
    if cp.has_section(command):
        items.update({k: v for k, v in cp.items(command)})
    return {_normalize(k): v for k, v in items.items()}


def _coerce_lists(model: type[BaseModel], values: dict) -> dict:
    out = dict(values)
    for name, info in model.model_fields.items():
        v = out.get(name)
        if isinstance(v, str) and _is_list(info.annotation):
            out[name] = [x.strip() for x in v.split(",") if x.strip()]
    return out


def build_request(command: str, args: argparse.Namespace) -> BaseModel:
    model, _ = HANDLERS[command]
    values = load_config(args.config, command) if args.config else {}
    unknown = set(values) - set(model.model_fields)
    if unknown:
        raise CliError(f"unknown {command} keys in config: {', '.join(sorted(unknown))}", EXIT_DOMAIN)
    for name in model.model_fields:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    try:
        return model.model_validate(_coerce_lists(model, values))
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(x) for x in first["loc"]) or command
        raise CliError(f"invalid {where}: {first['msg']}", EXIT_DOMAIN) from exc


def run_local(command: str, req: BaseModel) -> BaseModel:
    _, handler = HANDLERS[command]
    try:
        return handler(req)
    except (BlowUpError, ConvergenceError) as exc:
        raise CliError(str(exc), EXIT_BLOWUP) from exc
    except FracRiccatiError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from exc


def run_remote(command: str, req: BaseModel, server: str) -> BaseModel:
    import httpx

    url = server.rstrip("/") + "/" + command
    try:
        resp = httpx.post(url, json=req.model_dump(mode="json"), timeout=None)
    except httpx.HTTPError as exc:
        raise CliError(f"cannot reach {url}: {exc}", EXIT_IO) from exc
    if resp.status_code == 200:
        return RESPONSES[command].model_validate(resp.json())
    try:
        body = resp.json()
        detail = body.get("detail", body) if isinstance(body, dict) else body
    except ValueError:
        detail = resp.text
    if resp.status_code in (400, 422):
        raise CliError(str(detail), EXIT_DOMAIN)
    if resp.status_code == 409:
        raise CliError(str(detail), EXIT_BLOWUP)
    raise CliError(f"server answered {resp.status_code}: {detail}", EXIT_IO)


def fmt(x) -> str:
    """CSV cell: 10 significant digits, '+inf', empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return f"{x:.10g}"
    if isinstance(x, complex):
        if x.imag == 0:
            return fmt(x.real)
        return f"{x.real:.10g}{x.imag:+.10g}j"
    return str(x)


def table(command: str, resp: BaseModel) -> tuple[list[str], list[list]]:
    if command == "solve":
        cols = ["method", "steps", "psi", "i1_psi", "i1ma_psi"]
        return cols, [[getattr(resp, c) for c in cols]]
    if command == "triplet":
        cols = ["solver", "lam", "mu", "nu", "psi", "i1_psi", "i1ma_psi", "cf"]
        return cols, [[getattr(resp, c) for c in cols]]
    if command == "radius":
        cols = ["u1", "alpha", "tau_star", "n", "radius_n", "radius_hat", "upper_bound", "sandwich"]
    elif command == "price":
        cols = ["maturity_days", "strike_pct", "method", "steps", "price", "implied_vol", "cpu_ms", "flags"]
    elif command == "skew":
        cols = ["maturity_days", "alpha", "skew"]
    else:
        cols = ["n", "cbar1", "err_plain", "err_rr2", "err_rr3"]
    return cols, [[getattr(r, c) for c in cols] for r in resp.rows]


def render(command: str, resp: BaseModel, form: str) -> str:
    if form == "json":
        return json.dumps(resp.model_dump(mode="json"), indent=2) + "\n"
    cols, rows = table(command, resp)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return _serve(args)
    try:
        req = build_request(args.command, args)
        resp = run_remote(args.command, req, args.server) if args.server else run_local(args.command, req)
        text = render(args.command, resp, args.format)
        if args.output:
            try:
                args.output.write_text(text)
            except OSError as exc:
                raise CliError(f"cannot write {args.output}: {exc.strerror or exc}", EXIT_IO) from exc
        else:
            sys.stdout.write(text)
    except CliError as exc:
        print(f"frac-riccati: error: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Every subcommand prints JSON (or CSV where tabular) to stdout or to
``--output``.  Exit codes: 0 all checks pass, 1 a check failed, 2 invalid
input, 3 undecidable at the maximum precision.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Optional

import flint

from . import __version__
from .ball import MAX_PRECISION, Verdict, env_precision, precision, to_decimal
from .cantor import (build_tree, dim_lower_bound, initial_germ, key_spacing_check,
                     ratio_report, tree_failures, tree_records)
from .dynamics import trace_eval
from .errors import InvalidInput, Undecidable
from .germs import constants_table, convergence_report
from .roots import sigma_sample

SCHEMA_VERSION = 1

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_UNDECIDABLE = 0, 1, 2, 3

COMMANDS = ("trace", "germ", "converge", "cantor", "constants", "sigma", "ratio-check")


@dataclass
class RunConfig:
    command: str
    lam: str = "1"
    precision_bits: int = 256
    order: int = 64
    K_sim: int = 5
    depth: int = 3
    grid: int = 1024
    output_format: str = "json"
    output_path: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise InvalidInput(f"unknown command {self.command!r}")
        if not 64 <= self.precision_bits <= MAX_PRECISION:
            raise InvalidInput(f"precision must lie in [64, {MAX_PRECISION}]")
        if not 5 <= self.K_sim <= 12:
            raise InvalidInput("K_sim must lie in [5, 12]")
        if self.depth < 0:
            raise InvalidInput("depth must be >= 0")
        if self.order < 3:
            raise InvalidInput("order must be >= 3")
        if self.grid < 2:
            raise InvalidInput("grid must be >= 2")
        if self.output_format not in ("json", "csv"):
            raise InvalidInput("format must be json or csv")
        _decimal(self.lam)
        return self


def _decimal(text: str) -> str:
    """Validate a finite decimal literal and return it unchanged."""
    try:
        d = Decimal(text)
    except (InvalidOperation, TypeError):
        raise InvalidInput(f"not a decimal number: {text!r}") from None
    if not d.is_finite():
        raise InvalidInput(f"not a finite number: {text!r}")
    return text


def _verdict_code(v: Verdict) -> int:
    return {Verdict.VERIFIED: EXIT_OK, Verdict.REFUTED: EXIT_FAIL,
            Verdict.UNDECIDABLE: EXIT_UNDECIDABLE}[v]


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _envelope(cfg: RunConfig, payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "tool_version": __version__,
            "command": cfg.command, "config": _config_dict(cfg), **payload}


def _config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d.pop("output_path")
    d.pop("command")
    return d


def cmd_trace(cfg: RunConfig) -> tuple[str, int]:
    n = cfg.extra["n"]
    if n < 1:
        raise InvalidInput("n must be >= 1")
    xs = [_decimal(x) for x in cfg.extra["x"]]
    rows = []
    with precision(cfg.precision_bits):
        for x in xs:
            v = trace_eval(n, cfg.lam, x)
            dec = to_decimal(v)
            rows.append({"x": x, "value": dec["mid"], "radius": dec["rad"]})
    if cfg.output_format == "csv":
        return _csv(["x", "value", "radius"], [list(r.values()) for r in rows]), EXIT_OK
    return _json(_envelope(cfg, {"n": n, "rows": rows})), EXIT_OK


def cmd_germ(cfg: RunConfig) -> tuple[str, int]:
    cert = initial_germ(cfg.lam, cfg.order, cfg.precision_bits)
    verdict = Verdict.all([cert.verdict, *cert.checks.values()])
    return _json(_envelope(cfg, {"verdict": verdict.value, "certificate": cert.to_dict()})), \
        _verdict_code(verdict)


def cmd_converge(cfg: RunConfig) -> tuple[str, int]:
    cert = initial_germ(cfg.lam, cfg.order, cfg.precision_bits)
    if not cert.verified:
        return _json(_envelope(cfg, {"verdict": cert.verdict.value,
                                     "reason": "initial germ not verified"})), \
            _verdict_code(cert.verdict)
    ks = range(cfg.extra["k_min"], cfg.extra["k_max"] + 1)
    rep = convergence_report(cert, cfg.extra["m"], ks, grid=cfg.grid)
    code = EXIT_OK if rep.ok else EXIT_FAIL
    rows = [[r.k, f"{r.sup_delta:.12e}", f"{r.bound:.12e}", "pass" if r.ok else "fail"]
            for r in rep.rows]
    if cfg.output_format == "csv":
        return _csv(["k", "sup_delta", "bound", "pass"], rows), code
    return _json(_envelope(cfg, {
        "m": rep.m, "points": rep.points,
        "rows": [dict(zip(("k", "sup_delta", "bound", "pass"), r)) for r in rows],
        "decay_ratio": f"{rep.decay_ratio:.12e}", "fitted_ratio": f"{rep.fitted_ratio:.12e}",
        "note": rep.note,
    })), code


def cmd_cantor(cfg: RunConfig) -> tuple[str, int]:
    tree = build_tree(cfg.lam, cfg.K_sim, cfg.depth, bits=cfg.precision_bits)
    fails = tree_failures(tree)
    report = None
    if tree.children:
        report = ratio_report(tree, cfg.K_sim).to_dict()
    payload = {
        "nodes": tree_records(tree),
        "report": report,
        "failures": [{"word": w, "reason": r} for w, r in fails],
    }
    return _json(_envelope(cfg, payload)), EXIT_FAIL if fails else EXIT_OK


def cmd_constants(cfg: RunConfig) -> tuple[str, int]:
    with precision(cfg.precision_bits):
        table = constants_table()
        rows = []
        for name, value, check in table.rows():
            if isinstance(value, int):
                rows.append([name, str(value), "0", check])
            else:
                dec = to_decimal(value)
                rows.append([name, dec["mid"], dec["rad"], check])
    rows.append(["dim_lower_bound", f"{dim_lower_bound(table.K):.15e}", "0", "ln2/(K ln2.1)"])
    ok = (table.n_alpha_check is Verdict.VERIFIED
          and all(r >= 0 for r in table.residuals.values()))
    code = EXIT_OK if ok else EXIT_FAIL
    if cfg.output_format == "csv":
        return _csv(["name", "value", "radius", "check"], rows), code
    return _json(_envelope(cfg, {"rows": [dict(zip(("name", "value", "radius", "check"), r))
                                          for r in rows]})), code


def cmd_sigma(cfg: RunConfig) -> tuple[str, int]:
    lo, hi = _decimal(cfg.extra["lo"]), _decimal(cfg.extra["hi"])
    with precision(cfg.precision_bits):
        res = sigma_sample(cfg.extra["n_max"], cfg.lam, lo, hi)
        zeros = [[n, *to_decimal(z).values()] for n, z in res.zeros]
        unresolved = [[n, *to_decimal(z).values()] for n, z in res.unresolved]
    if cfg.output_format == "csv":
        rows = [z + ["zero"] for z in zeros] + [u + ["unresolved"] for u in unresolved]
        return _csv(["n", "mid", "radius", "status"], rows), EXIT_OK
    return _json(_envelope(cfg, {
        "zeros": [dict(zip(("n", "mid", "radius"), z)) for z in zeros],
        "unresolved": [dict(zip(("n", "mid", "radius"), u)) for u in unresolved],
    })), EXIT_OK


def cmd_ratio_check(cfg: RunConfig) -> tuple[str, int]:
    cert = initial_germ(cfg.lam, cfg.order, cfg.precision_bits)
    if not cert.verified:
        return _json(_envelope(cfg, {"verdict": cert.verdict.value,
                                     "reason": "initial germ not verified"})), \
            _verdict_code(cert.verdict)
    rep = key_spacing_check(cert, cfg.K_sim)

    def side(s):
        return {
            "outer": to_decimal(s.outer) if s.outer is not None else None,
            "inner": to_decimal(s.inner) if s.inner is not None else None,
            "ratio": to_decimal(s.ratio) if s.ratio is not None else None,
            "verdict": s.verdict.value,
            "failure": s.failure,
        }

    payload = {
        "verdict": rep.verdict.value,
        "threshold": f"{rep.threshold:.12e}",
        "right": side(rep.right),
        "left": side(rep.left),
        "handoff": None if rep.handoff is None else {
            "delta": f"{rep.handoff_delta:.12e}", "beta": 2,
            "verdict": rep.handoff.verdict.value,
            "measured_max_prev": rep.handoff.measured[0],
            "measured_max_curr": rep.handoff.measured[1],
        },
        "note": "ratios at K_sim are observations, not the rigorous bound",
    }
    return _json(_envelope(cfg, payload)), _verdict_code(rep.verdict)


HANDLERS = {
    "trace": cmd_trace, "germ": cmd_germ, "converge": cmd_converge,
    "cantor": cmd_cantor, "constants": cmd_constants, "sigma": cmd_sigma,
    "ratio-check": cmd_ratio_check,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", default="1", help="coupling (decimal)")
    common.add_argument("--precision", type=int, default=None,
                        help="working precision in bits (env THUEMORSE_PRECISION)")
    common.add_argument("--order", type=int, default=64)
    common.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
    common.add_argument("--output", dest="output_path", default=None)

    p = _Parser(prog="thuemorse", description="Certified trace-map computations.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("trace", parents=[common], help="evaluate h_n")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--x", action="append", required=True, help="point (repeatable)")

    sub.add_parser("germ", parents=[common], help="certify the initial germ")

    s = sub.add_parser("converge", parents=[common], help="renormalized convergence table")
    s.add_argument("--m", type=int, default=0)
    s.add_argument("--k-min", type=int, default=5)
    s.add_argument("--k-max", type=int, default=20)
    s.add_argument("--grid", type=int, default=1024, help="grid points per unit length")

    s = sub.add_parser("cantor", parents=[common], help="nested-interval tree")
    s.add_argument("--K", dest="K_sim", type=int, default=5)
    s.add_argument("--depth", type=int, default=3)

    sub.add_parser("constants", parents=[common], help="absolute constants and K")

    s = sub.add_parser("sigma", parents=[common], help="certified zeros of h_1..h_n")
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--lo", default="-3")
    s.add_argument("--hi", default="3")

    s = sub.add_parser("ratio-check", parents=[common], help="spacing next to the initial germ")
    s.add_argument("--K", dest="K_sim", type=int, default=5)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    base = {"command", "lam", "precision", "order", "output_format", "output_path",
            "K_sim", "depth", "grid"}
    extra = {k: v for k, v in vars(ns).items() if k not in base}
    bits = ns.precision if ns.precision is not None else env_precision()
    cfg = RunConfig(ns.command, ns.lam, bits, ns.order,
                    getattr(ns, "K_sim", 5), getattr(ns, "depth", 3),
                    getattr(ns, "grid", 1024), ns.output_format, ns.output_path, extra)
    return cfg.validate()


def _apply_threads() -> None:
    raw = os.environ.get("THUEMORSE_THREADS")
    if raw:
        n = int(raw)
        if n < 1:
            raise InvalidInput("THUEMORSE_THREADS must be >= 1")
        flint.ctx.threads = n


def run(argv: Optional[list[str]] = None) -> tuple[str, int]:
    """Parse ``argv`` and run; returns ``(output text, exit code)``."""
    ns = build_parser().parse_args(argv)
    try:
        _apply_threads()
        cfg = config_from_args(ns)
        text, code = HANDLERS[cfg.command](cfg)
    except (InvalidInput, ValueError) as exc:
        return f"error: {exc}\n", EXIT_INVALID
    except Undecidable as exc:
        return f"undecidable: {exc}\n", EXIT_UNDECIDABLE
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        return "", code
    return text, code


def main(argv: Optional[list[str]] = None) -> int:
    text, code = run(argv)
    stream = sys.stderr if code in (EXIT_INVALID, EXIT_UNDECIDABLE) and text.startswith(
        ("error:", "undecidable:")) else sys.stdout
    stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``heatchar --config run.json [--command ...]``.

Exit codes: 0 success, 1 verification failure, 2 configuration or input
error, 3 resource or fit error.  Errors are printed to stderr as one JSON
object ``{"error": <class name>, "message": ...}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import coefficients, config, gbf, spectral, verify
from .errors import (ArgumentError, ConfigError, FitError, ModelError, ResourceError,
                     ValidationError)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


# --------------------------------------------------------------------------
# canonical output
# --------------------------------------------------------------------------

def _float(x: float) -> str:
    if math.isfinite(x):
        return "%.12e" % x
    return json.dumps("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def canonical_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and every float as ``%.12e``.

    Parsing the output and emitting it again reproduces it byte for byte.
    """
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, np.generic):
        return canonical_json(obj.item(), indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {canonical_json(obj[k], indent, _level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        if not seq:
            return "[]"
        return "[\n" + ",\n".join(inner + canonical_json(x, indent, _level + 1)
                                   for x in seq) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(x) -> str:
    if isinstance(x, bool) or x is None:
        return str(x)
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def format_table(rows: list[dict], columns: Sequence[str]) -> str:
    """Fixed-width text table; floats at 12 significant digits."""
    cells = [[_cell(r.get(c, "")) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def format_csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow(["%.12e" % r[c] if isinstance(r.get(c), float) else r.get(c, "")
                         for c in columns])
    return buf.getvalue().rstrip("\n")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_coeff(cfg: config.RunConfig) -> tuple[dict, int]:
    rows = []
    for germ in config.build_germs(cfg.germ, cfg.curvature_tol):
        for res in coefficients.heat_coefficients(germ):
            row = {"p": germ.p, "variant": res.variant, "b0": res.b0, "b1": res.b1}
            row.update(res.breakdown)
            rows.append(row)
    return {"command": "coeff", "rows": rows}, EXIT_OK


def cmd_oracle(cfg: config.RunConfig) -> tuple[dict, int]:
    model = config.build_model(cfg.model)
    f = cfg.fit
    fit = spectral.extract_coefficients(model, f.K, f.t0, f.q, f.samples, f.eps)
    samples = [{"t": s.t, "F": s.F, "cutoff": s.cutoff, "tail_bound": s.tail_bound}
               for s in fit.samples]
    report = {"command": "oracle", "model": model.name, "n_N": fit.n_N,
              "coefficients": list(fit.coefficients), "residual": fit.residual,
              "condition": fit.condition, "grid": fit.grid, "samples": samples}
    return report, EXIT_OK


def cmd_verify(cfg: config.RunConfig, only: Sequence[str] | None = None) -> tuple[dict, int]:
    names = list(only) if only else cfg.verify.get("only")
    try:
        checks = verify.run_suites(names)
    except ArgumentError as exc:
        raise ConfigError(str(exc)) from exc
    rows = [c.as_dict() for c in checks]
    failed = [c.name for c in checks if not c.passed]
    report = {"command": "verify", "checks": rows, "failed": failed,
              "passed": not failed}
    return report, EXIT_VERIFY if failed else EXIT_OK


def _gbf_table(spec: dict) -> gbf.HodgeTraceTable:
    if spec["name"] == "sphere_hodge":
        return gbf.sphere_hodge_table(config.angle_from(spec))
    if spec["name"] == "torus_isometry":
        if "R" not in spec:
            raise ConfigError("model 'torus_isometry' needs 'R'")
        return gbf.torus_hodge_table(len(spec["R"]), spec["R"], spec.get("v"))
    raise ConfigError(f"gbf needs a Hodge table model (sphere_hodge or torus_isometry), "
                      f"got {spec['name']!r}")


def cmd_gbf(cfg: config.RunConfig) -> tuple[dict, int]:
    table = _gbf_table(cfg.model)
    opts = cfg.gbf
    ps = opts.get("p", list(range(table.p_max + 1)))
    pairs = [tuple(float(x) for x in ab) for ab in opts.get("pairs", [[1.0, 2.0]])]
    ls = opts.get("l", [0, 1])
    f = cfg.fit
    identity, special = [], []
    for p in ps:
        coeffs = gbf.coefficients_from_fits(table, p, pairs, f.K, f.t0, f.q, f.samples)
        for a, b in pairs:
            identity += [dict(gbf.gbf_identity_check(coeffs, p, a, b, l).as_dict(),
                              case="identity") for l in ls]
            special += [r.as_dict() for r in gbf.gbf_special_cases(coeffs, p, a, b)]
    return {"command": "gbf", "table": table.name, "identity": identity,
            "special_cases": special}, EXIT_OK


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

_COLUMNS = {
    "coeff": ["p", "variant", "b0", "b1", "detB_abs", "wedge_trace", "curvature_bracket",
              "correction", "u1_hat"],
    "verify": ["suite", "name", "gap", "tol", "passed", "seconds"],
    "gbf": ["case", "p", "a", "b", "l", "lhs", "rhs", "gap", "provenance"],
    "samples": ["t", "F", "cutoff", "tail_bound"],
}


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return canonical_json(report)
    cmd = report["command"]
    to_text = format_table if fmt == "table" else format_csv
    if cmd == "coeff":
        return to_text(report["rows"], _COLUMNS["coeff"])
    if cmd == "verify":
        out = to_text(report["checks"], _COLUMNS["verify"])
        if fmt == "table":
            out += "\n" + ("all checks passed" if report["passed"]
                           else "FAILED: " + ", ".join(report["failed"]))
        return out
    if cmd == "gbf":
        rows = report["identity"] + report["special_cases"]
        return to_text(rows, _COLUMNS["gbf"])
    # oracle
    if fmt == "csv":
        return to_text(report["samples"], _COLUMNS["samples"])
    head = [{"k": k, "c_k": c} for k, c in enumerate(report["coefficients"])]
    summary = (f"model {report['model']}  n_N={report['n_N']}  "
               f"residual={report['residual']:.12g}  condition={report['condition']:.12g}")
    return summary + "\n" + format_table(head, ["k", "c_k"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heatchar",
                                 description="Equivariant heat-trace coefficients and checks.")
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--command", choices=config.COMMANDS, help="overrides the config command")
    ap.add_argument("--output", choices=config.OUTPUTS, help="report format")
    ap.add_argument("--tol", type=float, help="curvature symmetry tolerance")
    ap.add_argument("--only", action="append", choices=verify.SUITES,
                    help="verify: run only this suite (repeatable)")
    return ap


def _error(exc: Exception, code: int, err) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True),
          file=err)
    return code


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    try:
        text = None
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        cfg = config.load(text, args.command, args.output, args.tol)
        if cfg.command == "coeff":
            report, code = cmd_coeff(cfg)
        elif cfg.command == "oracle":
            report, code = cmd_oracle(cfg)
        elif cfg.command == "verify":
            report, code = cmd_verify(cfg, args.only)
        else:
            report, code = cmd_gbf(cfg)
    except (ConfigError, ValidationError, ArgumentError, ModelError) as exc:
        return _error(exc, EXIT_CONFIG, err)
    except (ResourceError, FitError) as exc:
        return _error(exc, EXIT_RESOURCE, err)
    print(render(report, cfg.output), file=out)
    return code


if __name__ == "__main__":
    sys.exit(main())

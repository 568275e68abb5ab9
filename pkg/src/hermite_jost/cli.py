"""Command-line front end.

Configuration is a flat ``key=value`` text (one per line, ``#`` comments)::

    c=power:0.1:0.5
    b=zero
    lambda=-4:4:201
    n_max=4000
    out=density,limit-formula

Exit status: 0 success, 2 configuration error, 3 perturbation not
admissible, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import jost, oracle, verify
from .errors import AdmissibilityError, ConfigError, HermiteJostError
from .jacobi import PerturbationSpec, build_operator, check_conditions, parse_family, read_perturbation_file

EXIT_OK, EXIT_CONFIG, EXIT_ADMISSIBILITY, EXIT_NUMERICAL = 0, 2, 3, 4
OUTPUTS = ("density", "jost", "limit-formula", "oracle-compare", "asymptotics-check")
KEYS = ("c", "b", "c_tail", "b_tail", "file", "lambda", "n_max", "tol", "out", "format",
        "seed", "oracle_n")
COLUMNS = ("lambda", "re_F", "im_F", "re_F1", "im_F1", "im_m", "rho", "rho_limit",
           "rho_oracle_cdf_dev", "terms_used")


@dataclass(frozen=True)
class RunConfig:
    spec: PerturbationSpec
    lambda_min: float = -4.0
    lambda_max: float = 4.0
    points: int = 33
    n_max: int = 4000
    tol: float = 1e-10
    outputs: frozenset = frozenset({"density"})
    format: str = "csv"
    seed: int = verify.DEFAULT_SEED
    oracle_n: int = 2000
    entries: dict = field(default_factory=dict, compare=False)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.lambda_min, self.lambda_max, self.points)


def _split_lines(text: str) -> dict:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", field=key, line=lineno)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", field=key, line=lineno)
        entries[key] = value
    return entries


def _field(name, conv, value):
    try:
        return conv(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{name}: {exc}", field=name) from None


def _family(entries, which, tables):
    token = entries.get(which, "zero")
    tail = None
    if f"{which}_tail" in entries:
        tail = _field(f"{which}_tail", parse_family, entries[f"{which}_tail"])
    kind = token.split(":")[0].strip().lower()
    if kind in ("table", "file"):
        if tables is None:
            raise ConfigError(f"{which}=table requires file=<path>", field=which)
        col = tables[0] if which == "c" else tables[1]
        return parse_family("table", table=col, tail=tail, source=entries["file"])
    return _field(which, parse_family, token)


def parse_config(text: str) -> RunConfig:
    """Parse and validate ``key=value`` configuration text.

    Raises
    ------
    ConfigError
        Naming the offending line or field.
    """
    entries = _split_lines(text)
    tables = None
    if "file" in entries:
        tables = read_perturbation_file(entries["file"])
    c = _family(entries, "c", tables)
    b = _family(entries, "b", tables)
    spec = PerturbationSpec(c, b, f"c={entries.get('c', 'zero')} b={entries.get('b', 'zero')}")

    kw = {}
    if "lambda" in entries:
        parts = entries["lambda"].split(":")
        if len(parts) != 3:
            raise ConfigError("lambda must be min:max:points", field="lambda")
        lo = _field("lambda", float, parts[0])
        hi = _field("lambda", float, parts[1])
        pts = _field("lambda", int, parts[2])
        if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
            raise ConfigError("lambda_min must be < lambda_max", field="lambda")
        if pts < 2:
            raise ConfigError("points must be >= 2", field="lambda")
        if max(abs(lo), abs(hi)) > 8.0:
            raise ConfigError("|lambda| must be <= 8", field="lambda")
        kw.update(lambda_min=lo, lambda_max=hi, points=pts)
    if "n_max" in entries:
        kw["n_max"] = _field("n_max", int, entries["n_max"])
        if kw["n_max"] < 100:
            raise ConfigError("n_max must be >= 100", field="n_max")
    if "tol" in entries:
        kw["tol"] = _field("tol", float, entries["tol"])
        if not 1e-12 <= kw["tol"] <= 1e-4:
            raise ConfigError("tol must lie in [1e-12, 1e-4]", field="tol")
    if "out" in entries:
        outs = frozenset(s.strip() for s in entries["out"].split(",") if s.strip())
        bad = sorted(outs - set(OUTPUTS))
        if bad or not outs:
            raise ConfigError(f"unknown output(s) {bad}; choose from {OUTPUTS}", field="out")
        kw["outputs"] = outs
    if "format" in entries:
        if entries["format"] not in ("csv", "json"):
            raise ConfigError("format must be csv or json", field="format")
        kw["format"] = entries["format"]
    if "seed" in entries:
        kw["seed"] = _field("seed", int, entries["seed"])
    if "oracle_n" in entries:
        kw["oracle_n"] = _field("oracle_n", int, entries["oracle_n"])
        if not 1 <= kw["oracle_n"] <= 20000:
            raise ConfigError("oracle_n must lie in [1, 20000]", field="oracle_n")
    return RunConfig(spec=spec, entries=entries, **kw)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_rows(rows, columns, fmt: str, stream) -> None:
    """Emit rows in grid order; CSV uses 17 significant digits and LF endings."""
    if fmt == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
    else:
        payload = [{c: r.get(c) for c in columns} for r in rows]
        json.dump(payload, stream, indent=1, allow_nan=False)
        stream.write("\n")


def read_csv_rows(text: str) -> list[dict]:
    """Parse CSV emitted by :func:`write_rows` back to numbers."""
    out = []
    for r in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in r.items():
            if v == "":
                row[k] = None
            elif k == "terms_used":
                row[k] = int(v)
            else:
                row[k] = float(v)
        out.append(row)
    return out


def density_rows(config: RunConfig) -> list[dict]:
    """Per-lambda rows for the density, Jost, limit-formula and oracle outputs."""
    horizon = max(config.n_max + 2, jost.DEFAULT_HORIZON + 2)
    op = build_operator(config.spec, horizon)
    meas = dens = None
    if "oracle-compare" in config.outputs:
        meas = oracle.truncated_measure(op, config.oracle_n)
        dens = jost.density_function(op, tol=max(config.tol, 1e-8))
    n_grid = jost.default_limit_grid(config.n_max)
    rows = []
    for lam in config.grid:
        lam = float(lam)
        try:
            s = jost.spectral_sample(op, lam, config.tol)
            row = {
                "lambda": lam, "re_F": s.F.real, "im_F": s.F.imag, "re_F1": s.F1.real,
                "im_F1": s.F1.imag, "im_m": s.m_boundary.imag, "rho": s.rho,
                "terms_used": s.series_terms_used,
            }
            if "limit-formula" in config.outputs:
                row["rho_limit"] = jost.density_via_limit(op, lam, n_grid).value
            if meas is not None:
                row["rho_oracle_cdf_dev"] = oracle.cdf_compare(meas, dens, [lam], convention="midpoint")
        except HermiteJostError as exc:
            exc.args = (f"lambda={lam!r}: {exc}",)
            raise
        rows.append(row)
    return rows


def asymptotics_rows() -> list[dict]:
    """Error-decay table of the large-order asymptotics of w derivatives."""
    rows = []
    for mu in (0.0, 0.1, -0.1, 0.25, -0.25):
        e = verify.pr_errors(mu)
        s = verify.loglog_slope(verify.PR_NS, e)
        rows += [{"form": "scaled", "param": f"mu={mu:g}", "n": n, "rel_error": float(x), "slope": s}
                 for n, x in zip(verify.PR_NS, e)]
    for z in (0.0, 1.0, 1j):
        e = verify.fixed_z_errors(z)
        s = verify.loglog_slope(verify.PR_NS, e)
        rows += [{"form": "fixed-z", "param": f"z={z}", "n": n, "rel_error": float(x), "slope": s}
                 for n, x in zip(verify.PR_NS, e)]
    return rows


ASYMPTOTIC_COLUMNS = ("form", "param", "n", "rel_error", "slope")


def run_pipeline(config: RunConfig, stream=None, err=None) -> int:
    """Run the requested outputs and write them to ``stream``; return the exit status."""
    stream = sys.stdout if stream is None else stream
    err = sys.stderr if err is None else err
    report = check_conditions(config.spec, 4096)
    if not report.passes:
        print(f"error: perturbation rejected: {report.diagnostic}", file=err)
        return EXIT_ADMISSIBILITY
    try:
        if config.outputs - {"asymptotics-check"}:
            write_rows(density_rows(config), COLUMNS, config.format, stream)
        if "asymptotics-check" in config.outputs:
            write_rows(asymptotics_rows(), ASYMPTOTIC_COLUMNS, config.format, stream)
    except AdmissibilityError as exc:
        print(f"error: perturbation rejected: {exc}", file=err)
        return EXIT_ADMISSIBILITY
    except (HermiteJostError, ArithmeticError) as exc:
        print(f"error: numerical failure: {exc}", file=err)
        return EXIT_NUMERICAL
    return EXIT_OK


def _config_text(args, forced_out=None) -> str:
    lines = []
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    overrides = {
        "c": args.c, "b": args.b, "c_tail": args.c_tail, "b_tail": args.b_tail,
        "file": args.file, "lambda": args.lam, "n_max": args.n_max, "tol": args.tol,
        "out": forced_out or args.out, "format": args.format, "seed": args.seed,
        "oracle_n": args.oracle_n,
    }
    keep = []
    for line in lines:
        key = line.split("=", 1)[0].strip().replace("-", "_")
        if overrides.get(key) is None:
            keep.append(line)
    keep += [f"{k}={v}" for k, v in overrides.items() if v is not None]
    return "\n".join(keep)


def _add_config_flags(p):
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--c", help="family for c_n, e.g. power:0.1:0.5")
    p.add_argument("--b", help="family for b_n")
    p.add_argument("--c-tail", dest="c_tail", help="tail rule for a tabulated c")
    p.add_argument("--b-tail", dest="b_tail", help="tail rule for a tabulated b")
    p.add_argument("--file", help="perturbation table with lines 'n c_n b_n'")
    p.add_argument("--lambda", dest="lam", help="grid min:max:points")
    p.add_argument("--n-max", dest="n_max", help="top index of the limit formula")
    p.add_argument("--tol", help="Jost series tolerance")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed")
    p.add_argument("--oracle-n", dest="oracle_n", help="size of the truncated matrix")
    p.add_argument("-o", "--output", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hermite-jost", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("density", help="Jost functions and density on a lambda grid")
    _add_config_flags(p)
    p.add_argument("--out", help="comma-separated outputs")
    p = sub.add_parser("oracle-compare", help="density vs truncated-matrix CDF")
    _add_config_flags(p)
    p.set_defaults(out=None)
    p = sub.add_parser("asymptotics-check", help="error-decay table of the w asymptotics")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output")
    p = sub.add_parser("verify", help="run the numerical acceptance checks")
    p.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK

    if args.command == "verify":
        results = verify.run_all(args.seed, stream=sys.stdout)
        failed = [r.name for r in results if not r.passed]
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
        return EXIT_NUMERICAL if failed else EXIT_OK

    out = open(args.output, "w", encoding="utf-8", newline="") if args.output else sys.stdout
    try:
        if args.command == "asymptotics-check":
            write_rows(asymptotics_rows(), ASYMPTOTIC_COLUMNS, args.format, out)
            return EXIT_OK
        forced = "density,oracle-compare" if args.command == "oracle-compare" else None
        try:
            config = parse_config(_config_text(args, forced))
        except (ConfigError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return run_pipeline(config, out)
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())

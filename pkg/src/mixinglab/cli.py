"""
Batch front end: ``mixinglab <command> --config <path> [--out <path>]``.

Configs are INI files read with :mod:`configparser`.  Each command reads
the section of the same name; keys in ``[DEFAULT]`` are shared.  See
``configs/`` for one example per command and README.md for the key list.

Exit status is 0 on success, 1 when ``verify`` finds a failing property
and 2 for a malformed config.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from . import bounds, slnreduce, torus, verify
from .repdata import (
    ARCHIMEDEAN,
    Q_EXPONENT,
    DiagonalElement,
    adjoint_sl2,
    divergence_check,
    q_exponent,
    ratio_factor,
    standard_sl2,
)
from .specproj import TrigPolynomial

SCHEMA_VERSION = 1
COMMANDS = ("verify", "correlate", "bound", "reduce", "decay", "calibrate")
BOUND_KINDS = (
    "theorem_3_3",
    "theorem_4_1",
    "theorem_4_2",
    "corollary_standard",
    "corollary_adjoint",
)
_REQUIRED = object()


class ConfigError(ValueError):
    """Malformed config; the message names the offending key."""


@dataclass
class Section:
    """A config section with typed, error-reporting accessors."""

    name: str
    items: dict
    base: Path

    def raw(self, key, default=_REQUIRED):
        if key in self.items:
            return self.items[key].strip()
        if default is _REQUIRED:
            raise ConfigError(f"[{self.name}] missing required key {key!r}")
        return default

    def get(self, key, conv, default=_REQUIRED):
        value = self.raw(key, default)
        if value is default and default is not _REQUIRED:
            return default
        try:
            return conv(value)
        except (ValueError, TypeError, ZeroDivisionError, KeyError, OSError) as exc:
            raise ConfigError(f"[{self.name}] bad value for {key!r}: {value!r} ({exc})") from None


# ---------------------------------------------------------------------------
# Value parsers
# ---------------------------------------------------------------------------


def parse_number(text: str):
    """Rational when possible (``3``, ``1/3``, ``0.25``), else float."""
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def parse_list(text: str, conv=parse_number) -> list:
    return [conv(x) for x in text.replace(",", " ").split()]


def parse_ints(text: str) -> list:
    return parse_list(text, int)


def parse_range(text: str) -> list:
    """``1..10`` or an explicit list ``1, 3, 5``."""
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return parse_ints(text)


def parse_matrix(text: str) -> tuple:
    """Rows separated by ``;``: ``2 1; 1 1``."""
    rows = tuple(tuple(parse_ints(r)) for r in text.split(";"))
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ValueError("matrix must be square")
    return rows


def parse_tuples(text: str) -> list:
    return [tuple(parse_ints(t)) for t in text.split(";") if t.strip()]


def parse_bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def parse_coefficient(text: str):
    try:
        return Fraction(text)
    except ValueError:
        return complex(text.replace(" ", ""))


def parse_function(text: str, base: Path) -> TrigPolynomial:
    """Preset name, ``@file.json``, or inline ``m1 m2 m3 : c; ...``."""
    text = text.strip()
    if text.startswith("@"):
        path = base / text[1:]
        return TrigPolynomial.from_dict(json.loads(path.read_text()))
    if ":" in text:
        coeffs = {}
        for term in text.split(";"):
            if not term.strip():
                continue
            freq, c = term.split(":")
            coeffs[tuple(parse_ints(freq))] = parse_coefficient(c)
        return TrigPolynomial(3, coeffs)
    return torus.preset(text)


def parse_functions(section: Section) -> tuple:
    items = [x.strip() for x in section.raw("functions").split(",") if x.strip()]
    if len(items) < 2:
        raise ConfigError(f"[{section.name}] 'functions' needs at least two entries")
    fs = tuple(section.get("functions", lambda _: parse_function(x, section.base)) for x in items)
    for f in fs:
        if f.dim != 3:
            raise ConfigError(f"[{section.name}] 'functions' must live on the 3-torus")
    return items, fs


def parse_rep(name: str):
    if name == "standard":
        return standard_sl2()
    if name == "adjoint":
        return adjoint_sl2()
    raise ValueError("expected 'standard' or 'adjoint'")


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _echo(section: Section) -> dict:
    return dict(sorted(section.items.items()))


# ---------------------------------------------------------------------------
# Shared model setup
# ---------------------------------------------------------------------------


@dataclass
class Model:
    names: list
    fs: tuple
    base: torus.AffineLatticeElement
    rep: object
    q: Fraction
    config: torus.SweepConfig


def load_model(section: Section) -> Model:
    names, fs = parse_functions(section)
    matrix = section.get("matrix", parse_matrix)
    v = tuple(section.get("translation", parse_ints, [0, 0]))
    try:
        base = torus.AffineLatticeElement(matrix, v)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] bad value for 'matrix': {exc}") from None
    rep = section.get("rep", parse_rep, standard_sl2())
    override = section.get("q", lambda t: None if t == "auto" else Fraction(t), None)
    try:
        q = q_exponent(rep, override)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] bad value for 'q': {exc}") from None
    d0 = section.get("d0", int, None)
    dk = section.get("dk", int, None)
    config = torus.SweepConfig(
        s=section.get("s", parse_number, None),
        C=1.0,
        C_prime=section.get("C_prime", parse_number, 1),
        d=None if d0 is None or dk is None else (d0, dk),
        mc_samples=section.get("mc_samples", int, 0),
        seed=section.get("seed", int, torus.DEFAULT_SEED),
        shards=section.get("shards", int, 8),
        lambda_start=section.get("lambda_start", int, 0),
        workers=section.get("workers", int, 1),
    )
    if (d0 is None) != (dk is None):
        raise ConfigError(f"[{section.name}] set both 'd0' and 'dk' or neither")
    return Model(names, fs, base, rep, q, config)


def _constant(section: Section):
    """``C`` as a number, or ``"auto"`` for calibration."""
    text = section.raw("C", "1")
    if text == "auto":
        return "auto"
    return section.get("C", lambda t: float(parse_number(t)), 1.0)


def _power_tuples(section: Section, k: int) -> list:
    if "power_tuples" in section.items:
        tuples = section.get("power_tuples", parse_tuples)
    else:
        ns = section.get("powers", parse_range)
        tuples = [tuple(n * (i + 1) for i in range(k)) for n in ns]
    for t in tuples:
        if len(t) != k:
            raise ConfigError(f"[{section.name}] power tuple {t} does not have {k} entries")
    return tuples


def _sweep(section: Section, model: Model, tuples: list) -> list:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return torus.decay_sweep(
            model.fs, model.base, tuples, model.rep, model.q, model.config, model.names
        )


def _with_constant(reports: list, C: float) -> list:
    out = []
    for r in reports:
        unit = r.unit_bound
        out.append(replace(r, C_used=C, rhs_bound=None if unit is None else C * unit))
    return out


def _select(reports: list, ns: list) -> list:
    wanted = set(ns)
    return [r for r in reports if r.powers[0] in wanted]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_verify(section: Section, out):
    seed = section.get("seed", int, 0)
    results = verify.run_all(seed)
    lines = [r.summary() for r in results]
    failed = [r for r in results if not r.passed]
    text = "\n".join(lines) + "\n"
    if failed:
        dump = {"schema_version": SCHEMA_VERSION, "seed": seed,
                "failures": {r.name: r.failures for r in failed}}
        text += dump_json(dump)
    _emit(text, out)
    return 1 if failed else 0


def cmd_correlate(section: Section, out):
    model = load_model(section)
    powers = tuple(section.get("powers", parse_ints))
    if len(powers) != len(model.fs) - 1:
        raise ConfigError(f"[{section.name}] 'powers' needs {len(model.fs) - 1} entries")
    C = _constant(section)
    if C == "auto":
        raise ConfigError(f"[{section.name}] 'C' = auto is only valid for decay and calibrate")
    config = replace(model.config, C=C)
    try:
        report = torus.correlation_report(
            model.fs, model.base, powers, model.rep, model.q, config, model.names
        )
    except torus.InvariantSupportError as exc:
        raise ConfigError(f"[{section.name}] bad value for 'functions': {exc}") from None
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "correlate",
        "seed": config.seed,
        "mc_samples": config.mc_samples,
        "report": report.to_dict(),
        "config": _echo(section),
    }
    _emit(dump_json(payload), out)
    return 0


def _bound_inputs(section: Section) -> bounds.BoundInputs:
    try:
        return bounds.BoundInputs(
            s=section.get("s", parse_number, 1),
            q=section.get("q", Fraction, Fraction(1)),
            d0=section.get("d0", int, 1),
            dk=section.get("dk", int, 1),
            C=section.get("C", parse_number, 1),
            C_prime=section.get("C_prime", parse_number, None),
            A=section.get("A", float, None),
            sup_norms=section.get("sup_norms", lambda t: parse_list(t, float), ()),
            pm_norms=section.get("pm_norms", lambda t: parse_list(t, float), ()),
            sobolev_norms=section.get("sobolev_norms", lambda t: parse_list(t, float), ()),
        )
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {exc}") from None


def _factors(section: Section, variant: str):
    """``(lam, rho)`` from explicit keys or from ``a_values``."""
    if "lam" in section.items or "rho" in section.items:
        return section.get("lam", parse_number), section.get("rho", parse_number), None
    a_values = section.get("a_values", parse_list)
    rep = standard_sl2() if variant == bounds.STANDARD else adjoint_sl2()
    try:
        elements = [DiagonalElement.sl2(a) for a in a_values]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"[{section.name}] bad value for 'a_values': {exc}") from None
    f = ratio_factor(rep, elements)
    return f.lam, f.rho, (rep, elements)


def cmd_bound(section: Section, out):
    kind = section.raw("kind")
    if kind not in BOUND_KINDS:
        raise ConfigError(f"[{section.name}] bad value for 'kind': {kind!r}; expected one of {BOUND_KINDS}")
    inputs = _bound_inputs(section)
    applicable = True
    try:
        if kind.startswith("corollary"):
            variant = kind.split("_")[1]
            a_values = section.get("a_values", parse_list)
            if inputs.C_prime is not None:
                applicable = bounds.sl2_ratios_exceed(a_values, inputs.C_prime)
            value = bounds.corollary_sl2(variant, a_values, inputs)
        else:
            variant = section.get("rep", lambda t: parse_rep(t) and t, bounds.STANDARD)
            lam, rho, acting = _factors(section, variant)
            if acting is not None and inputs.C_prime is not None:
                applicable, _ = divergence_check(acting[0], acting[1], inputs.C_prime)
            fn = {
                "theorem_3_3": bounds.rhs_theorem_3_3,
                "theorem_4_1": bounds.rhs_theorem_4_1,
                "theorem_4_2": bounds.rhs_theorem_4_2,
            }[kind]
            value = fn(inputs, lam, rho)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {exc}") from None
    if not applicable:
        print("warning: divergence hypothesis fails; bound not applicable", file=sys.stderr)
        _emit("NA\n", out)
        return 0
    _emit(format(value, ".12g") + "\n", out)
    return 0


def cmd_reduce(section: Section, out):
    mode = section.raw("mode", ARCHIMEDEAN)
    if mode not in (ARCHIMEDEAN, Q_EXPONENT):
        raise ConfigError(f"[{section.name}] bad value for 'mode': {mode!r}")
    conv = int if mode == Q_EXPONENT else parse_number
    entries = section.get("entries", lambda t: parse_list(t, conv))
    try:
        a = DiagonalElement(tuple(entries), mode)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] bad value for 'entries': {exc}") from None
    j = section.get("j", int)
    l = section.get("l", int)
    try:
        split = slnreduce.split_diagonal(a, j, l)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] bad value for 'j'/'l': {exc}") from None
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "reduce",
        "split": split.to_dict(),
        "error": slnreduce.split_error(split),
        "centralizes": slnreduce.centralizes(split, [slnreduce.WEYL_GENERATOR]),
        "config": _echo(section),
    }
    _emit(dump_json(payload), out)
    return 0


def _calibrated(section: Section, model: Model, reports: list):
    """Apply ``C`` (fixed or calibrated) to a sweep; returns reports and calibration."""
    C = _constant(section)
    if C != "auto":
        return _with_constant(reports, C), None
    ns = sorted({r.powers[0] for r in reports})
    fit = _select(reports, section.get("calibrate_on", parse_range, ns))
    try:
        cal = bounds.calibrate_constant(fit, reports)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] cannot calibrate: {exc}") from None
    return _with_constant(reports, cal.C_cal), cal


def cmd_decay(section: Section, out):
    model = load_model(section)
    tuples = _power_tuples(section, len(model.fs) - 1)
    reports, cal = _calibrated(section, model, _sweep(section, model, tuples))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(torus.CSV_COLUMNS)
    for r in reports:
        writer.writerow(torus.csv_row(r))
    _emit(buf.getvalue(), out)
    if out is not None:
        meta = {
            "schema_version": SCHEMA_VERSION,
            "command": "decay",
            "seed": model.config.seed,
            "functions": model.names,
            "base": model.base.to_dict(),
            "rep": model.rep.name,
            "q": model.q,
            "C": reports[0].C_used if reports else None,
            "C_calibrated": cal is not None,
            "s": reports[0].s if reports else None,
            "d0": reports[0].d0 if reports else None,
            "dk": reports[0].dk if reports else None,
            "C_prime": model.config.C_prime,
            "lambda_start": model.config.lambda_start,
            "cartan": "singular-value proxy",
            "rows": [r.to_dict() for r in reports],
            "config": _echo(section),
        }
        Path(str(out) + ".meta.json").write_text(dump_json(meta))
    return 0


def cmd_calibrate(section: Section, out):
    model = load_model(section)
    k = len(model.fs) - 1
    fit_ns = section.get("calibrate_on", parse_range)
    held_ns = section.get("held_out", parse_range)
    if set(fit_ns) & set(held_ns):
        raise ConfigError(f"[{section.name}] 'held_out' overlaps 'calibrate_on'")
    tuples = [tuple(n * (i + 1) for i in range(k)) for n in sorted(set(fit_ns) | set(held_ns))]
    reports = _sweep(section, model, tuples)
    try:
        cal = bounds.calibrate_constant(_select(reports, fit_ns), _select(reports, held_ns))
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] cannot calibrate: {exc}") from None
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "calibrate",
        "seed": model.config.seed,
        "q": model.q,
        "C_cal": cal.C_cal,
        "checked": cal.checked,
        "valid": cal.valid,
        "violations": [list(r.powers) for r in cal.violations],
        "calibrate_on": fit_ns,
        "held_out": held_ns,
        "config": _echo(section),
    }
    _emit(dump_json(payload), out)
    return 0


HANDLERS = {
    "verify": cmd_verify,
    "correlate": cmd_correlate,
    "bound": cmd_bound,
    "reduce": cmd_reduce,
    "decay": cmd_decay,
    "calibrate": cmd_calibrate,
}


def load_section(path, command: str) -> Section:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    path = Path(path)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if parser.has_section(command):
        items = dict(parser.items(command))
    elif command == "verify":
        items = dict(parser.defaults())
    else:
        raise ConfigError(f"config {path} has no [{command}] section")
    return Section(command, items, path.parent)


def run(command: str, config_path, out=None) -> int:
    section = load_section(config_path, command)
    return HANDLERS[command](section, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mixinglab", description="Multiple-mixing verification laboratory.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="INI config file")
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    args = parser.parse_args(argv)
    try:
        return run(args.command, args.config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

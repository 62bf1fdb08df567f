"""``susyspin`` command-line front end.

Every command writes plot-ready columns as CSV (default) or JSON. CSV
output starts with a ``#`` metadata line recording the command, package
version and the full flag string, followed by a header row.

Exit codes: 0 success, 1 numerical failure, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import shlex
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .analytic import (
    breaking_threshold, decay_rate, dispersion, zero_mode_spinor, zero_mode_residual,
    zero_mode_wavevector,
)
from .qmcore import (
    FieldConfig, ModelError, ModelSpec, Sector, TanhW, ZeroW, validate_model,
)
from .solver import SolverError, SpectrumResult, bound_spectrum, ring_spectra, ring_spectrum
from .susylab import NumericSettings, breaking_threshold_scan, classify

COMMANDS = ("bands", "classify", "ring", "bound", "sweep", "zeromode")

_PARAMS = {
    "bands": {"k", "b0", "q_min", "q_max", "q_steps"},
    "classify": {"k", "b0", "w", "alpha", "numeric", "n", "periods", "length", "levels"},
    "ring": {"k", "b0", "periods", "n", "levels", "sector", "dump_states"},
    "bound": {"k", "b0", "w", "alpha", "length", "n", "levels", "sector", "dump_states"},
    "sweep": {"param", "start", "stop", "steps", "k", "b0", "w", "alpha"},
    "zeromode": {"k", "b0", "sector"},
}


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    output_path: Optional[str] = None
    format: str = "csv"
    flag_string: str = ""

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        unknown = set(self.parameters) - _PARAMS[self.command]
        if unknown:
            raise UsageError(f"unknown parameter(s) for {self.command}: {', '.join(sorted(unknown))}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")


# -- formatting ----------------------------------------------------------------

def fmt(x) -> str:
    """Shortest representation capped at 12 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0:
            return "0"
        return format(x, ".12g")
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(fmt(x))
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return x


def dumps_json(obj) -> str:
    return json.dumps(_json_value(obj), indent=2) + "\n"


@dataclass
class Table:
    columns: list
    rows: list
    extra: dict = field(default_factory=dict)
    footer: list = field(default_factory=list)


def render(table: Table, config: RunConfig) -> str:
    if config.format == "json":
        doc = {"command": config.command, "version": __version__, "flags": config.flag_string,
               "columns": table.columns, "rows": table.rows}
        doc.update(table.extra)
        return dumps_json(doc)
    buf = io.StringIO()
    buf.write(f"# susyspin {config.command} version={__version__} flags={config.flag_string}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([fmt(v) for v in row])
    for line in table.footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


# -- commands ------------------------------------------------------------------

def _field(p) -> FieldConfig:
    return FieldConfig(float(p["b0"]), float(p["k"]))


def _superpotential(p):
    kind = p.get("w") or "zero"
    if kind == "zero":
        return ZeroW()
    if kind == "tanh":
        if p.get("alpha") is None:
            raise UsageError("--w tanh requires --alpha")
        return TanhW(float(p["alpha"]))
    raise UsageError(f"unknown superpotential {kind!r}")


def _spec(p, sector=Sector.MINUS) -> ModelSpec:
    spec = ModelSpec(_field(p), _superpotential(p), sector)
    validate_model(spec).raise_if_invalid()
    return spec


def cmd_bands(p) -> Table:
    spec = _spec(p)
    steps = int(p["q_steps"])
    if steps < 1:
        raise UsageError("--q-steps must be at least 1")
    q = np.linspace(float(p["q_min"]), float(p["q_max"]), steps)
    e1, e2 = dispersion(q, spec.field)
    return Table(["q", "E1", "E2"], [[a, b, c] for a, b, c in zip(q, e1, e2)])


def _report_rows(p, spec):
    numeric = None
    if p.get("numeric"):
        periods = float(p.get("periods") or 2)
        if periods != round(periods) or periods < 1:
            raise ModelError("--periods must be a positive integer (ring length L = 4*pi*m/k)")
        numeric = NumericSettings(n=int(p.get("n") or 2048), periods=int(periods),
                                  length=float(p.get("length") or 40.0),
                                  levels=int(p.get("levels") or 20))
    report = classify(spec, numeric)
    f = spec.field
    rows = [["phase", report.phase.value], ["method", report.method.value]]
    extra = {}
    if isinstance(spec.w, ZeroW):
        q0 = zero_mode_wavevector(f)
        rows.append(["q0", "none" if q0 is None else f"±{fmt(q0)}"])
        extra["q0"] = None if q0 is None else [-q0, q0]
        w0 = 0.0
    else:
        w0 = max(0.0, min(spec.w.asymptotes[1], -spec.w.asymptotes[0]))
    lam = decay_rate(f)
    rows.append(["lambda", str(lam)])
    threshold = breaking_threshold(f.k, w0)
    rows += [
        ["b0_threshold", fmt(threshold)],
        ["ground_energy_minus", fmt(report.ground_energy_minus)],
        ["ground_energy_plus", fmt(report.ground_energy_plus)],
        ["zero_modes_minus", fmt(report.zero_modes_minus)],
        ["zero_modes_plus", fmt(report.zero_modes_plus)],
        ["pairing_max_gap", fmt(report.pairing_max_gap)],
        ["details", "; ".join(report.details)],
    ]
    extra.update({
        "phase": report.phase.value, "method": report.method.value,
        "lambda": {"re": lam.value.real, "im": lam.value.imag},
        "b0_threshold": threshold,
        "ground_energy_minus": report.ground_energy_minus,
        "ground_energy_plus": report.ground_energy_plus,
        "zero_modes_minus": report.zero_modes_minus, "zero_modes_plus": report.zero_modes_plus,
        "pairing_max_gap": report.pairing_max_gap, "details": list(report.details),
    })
    return rows, extra


def cmd_classify(p) -> Table:
    rows, extra = _report_rows(p, _spec(p))
    return Table(["key", "value"], rows, extra)


def _sectors(p):
    choice = (p.get("sector") or "both").lower()
    if choice == "both":
        return (Sector.MINUS, Sector.PLUS)
    return (Sector.parse(choice),)


def _spectrum_table(results, p, grid_note) -> Table:
    levels = int(p["levels"])
    col = {s: results.get(s) for s in Sector}
    rows = []
    for i in range(levels):
        row = [i]
        for s in (Sector.MINUS, Sector.PLUS):
            r = col[s]
            row.append(None if r is None or i >= len(r.eigenvalues) else float(r.eigenvalues[i]))
        rows.append(row)
    if p.get("dump_states"):
        _dump_states(results, p["dump_states"])
    return Table(["index", "E_minus", "E_plus"], rows, {"grid": grid_note})


def _dump_states(results, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sector", "level", "z", "re_up", "im_up", "re_down", "im_down"])
        for s in (Sector.MINUS, Sector.PLUS):
            r = results.get(s)
            if r is None:
                continue
            for i in range(len(r.eigenvalues)):
                psi = r.state(i)
                for z, u, d in zip(r.grid.points, psi.up, psi.down):
                    writer.writerow([s.value, i, fmt(z), fmt(u.real), fmt(u.imag),
                                     fmt(d.real), fmt(d.imag)])


def cmd_ring(p) -> Table:
    spec = _spec({**p, "w": "zero"})
    periods = float(p["periods"])
    n, levels = int(p["n"]), int(p["levels"])
    want = bool(p.get("dump_states"))
    sectors = _sectors(p)
    if len(sectors) == 2:
        minus, plus = ring_spectra(spec, periods, n, levels, want)
        results = {Sector.MINUS: minus, Sector.PLUS: plus}
    else:
        s = sectors[0]
        results = {s: ring_spectrum(spec.with_sector(s), periods, n, levels, want)}
    any_res = next(iter(results.values()))
    return _spectrum_table(results, p, {"boundary": "ring", "n": n, "length": any_res.grid.length})


def cmd_bound(p) -> Table:
    spec = _spec(p)
    length, n, levels = float(p["length"]), int(p["n"]), int(p["levels"])
    want = bool(p.get("dump_states"))
    results = {s: bound_spectrum(spec.with_sector(s), length, n, levels, want)
               for s in _sectors(p)}
    return _spectrum_table(results, p, {"boundary": "box", "n": n, "length": length})


def cmd_sweep(p) -> Table:
    if (p.get("param") or "b0") != "b0":
        raise UsageError("only --param b0 is supported")
    start, stop, steps = float(p["start"]), float(p["stop"]), int(p["steps"])
    if not start < stop or steps < 3:
        raise UsageError("sweep range is empty: need --from < --to and --steps >= 3")
    k = float(p["k"])
    spec = _spec({**p, "b0": p.get("b0") or 0.0})
    scan = breaking_threshold_scan(k, (start, stop, steps), spec.w)
    rows = [[b0, phase.value, e_min, scan.threshold] for b0, phase, e_min in scan.rows]
    footer = [f"summary threshold={fmt(scan.threshold)} bisected={fmt(scan.bisected)}"]
    return Table(["b0", "phase", "E1_min", "analytic_threshold"], rows,
                 {"threshold": scan.threshold, "bisected": scan.bisected}, footer)


def cmd_zeromode(p) -> Table:
    spec = _spec(p, Sector.parse(p.get("sector") or "minus"))
    q0 = zero_mode_wavevector(spec.field)
    if q0 is None:
        return Table(["key", "value"], [["q0", "none: SUSY broken"]],
                     {"q0": None, "status": "none: SUSY broken"})
    chi = zero_mode_spinor(q0, spec.field, spec.sector)
    resid = zero_mode_residual(chi, q0, spec.field, spec.sector)
    ratio = chi[1] / chi[0] if abs(chi[0]) > 0 else complex("nan")
    values = {"q0": q0, "chi_up_re": chi[0].real, "chi_up_im": chi[0].imag,
              "chi_down_re": chi[1].real, "chi_down_im": chi[1].imag,
              "ratio_re": ratio.real, "ratio_im": ratio.imag, "residual": resid}
    return Table(["key", "value"], [[k, v] for k, v in values.items()], values)


HANDLERS = {"bands": cmd_bands, "classify": cmd_classify, "ring": cmd_ring,
            "bound": cmd_bound, "sweep": cmd_sweep, "zeromode": cmd_zeromode}


def run(config: RunConfig) -> str:
    """Execute ``config`` and return the rendered output."""
    return render(HANDLERS[config.command](dict(config.parameters)), config)


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", metavar="PATH", help="write to PATH instead of stdout")

    parser = argparse.ArgumentParser(
        prog="susyspin",
        description="Spin-1/2 supersymmetric quantum mechanics in a rotating magnetic field.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def model(p, w=False):
        p.add_argument("--k", type=float, required=True, help="field pitch")
        p.add_argument("--b0", type=float, required=True, help="field strength")
        if w:
            p.add_argument("--w", choices=("zero", "tanh"), default="zero")
            p.add_argument("--alpha", type=float)

    p = sub.add_parser("bands", parents=[common], help="two-band dispersion E1(q), E2(q)")
    model(p)
    p.add_argument("--q-min", type=float, required=True)
    p.add_argument("--q-max", type=float, required=True)
    p.add_argument("--q-steps", type=int, required=True)

    p = sub.add_parser("classify", parents=[common], help="SUSY phase and zero-mode data")
    model(p, w=True)
    p.add_argument("--numeric", action="store_true", help="cross-check by diagonalization")
    p.add_argument("--n", type=int)
    p.add_argument("--periods", type=float)
    p.add_argument("--length", type=float)
    p.add_argument("--levels", type=int)

    p = sub.add_parser("ring", parents=[common], help="factorized ring spectrum, W = 0")
    model(p)
    p.add_argument("--periods", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--sector", choices=("plus", "minus", "both"), default="both")
    p.add_argument("--dump-states", metavar="PATH")

    p = sub.add_parser("bound", parents=[common], help="bound states in a Dirichlet box")
    model(p, w=True)
    p.add_argument("--length", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--sector", choices=("plus", "minus", "both"), default="both")
    p.add_argument("--dump-states", metavar="PATH")

    p = sub.add_parser("sweep", parents=[common], help="phase scan over b0")
    p.add_argument("--param", choices=("b0",), default="b0")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--w", choices=("zero", "tanh"), default="zero")
    p.add_argument("--alpha", type=float)

    p = sub.add_parser("zeromode", parents=[common], help="zero-mode wavevector and spinor")
    model(p)
    p.add_argument("--sector", choices=("plus", "minus"), required=True)
    return parser


def config_from_args(args: argparse.Namespace, argv) -> RunConfig:
    params = {k: v for k, v in vars(args).items()
              if k not in ("command", "format", "out") and v is not None}
    params = {k: v for k, v in params.items() if not (k == "numeric" and v is False)}
    return RunConfig(args.command, params, args.out, args.format, shlex.join(argv))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = config_from_args(args, argv)
        text = run(config)
    except (UsageError, ModelError, ValueError) as exc:
        print(f"susyspin: error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"susyspin: numerical failure: {exc}", file=sys.stderr)
        return 1
    if config.output_path:
        with open(config.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``annulus-rmt <command> [options]``.

Every command produces an :class:`OutputRecord` written as CSV (with a
``#`` comment header carrying version, seed and the effective config), as
JSON ({schema_version, command, config, payload, wall_time_ms}) or, for
``figure``, as SVG.  Option values come from built-in defaults, then an
optional ``--config`` file of ``key = value`` lines, then explicit flags.

Exit status: 0 success, 1 verification failure, 2 usage error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__
from .ensemble import lift_to_sphere, params_from_dims, sample_eigenvalues
from .errors import NumericalError
from .kernel import KernelEvaluator, density_limit, density_rho1, kernel_matrix, rho_k
from .params import MatrixDims, ModelParams
from .plasma import free_energy_asymptotic, log_partition_barnes, log_partition_exact
from .stats import CATALOG, FluctuationReport, monte_carlo_fluctuations, polynomial_statistic
from .verify import DEFAULT_SEED, REPORT_SCHEMA, run_suite

SCHEMA_VERSION = "1"

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    options: dict[str, Any]
    format: str = "csv"
    out: str | None = None

    @property
    def seed(self) -> int | None:
        return self.options.get("seed")


@dataclass
class OutputRecord:
    command: str
    config: dict[str, Any]
    columns: list[str]
    rows: list[list[Any]]
    column_docs: dict[str, str] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)
    wall_time_ms: int = 0
    schema_version: str = SCHEMA_VERSION
    svg: str | None = None
    report: dict | None = None

    def payload(self) -> dict:
        return {
            "columns": self.columns,
            "schema": {c: self.column_docs.get(c, "") for c in self.columns},
            "rows": [[_cell(v) for v in row] for row in self.rows],
            "summary": _jsonable(self.summary),
        }

    def to_json(self) -> str:
        doc = {
            "schema_version": self.schema_version,
            "command": self.command,
            "config": self.config,
            "payload": self.payload(),
            "wall_time_ms": self.wall_time_ms,
        }
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# annulus-rmt {__version__}\n")
        buf.write(f"# schema_version: {self.schema_version}\n")
        buf.write(f"# command: {self.command}\n")
        if "seed" in self.config:
            buf.write(f"# seed: {self.config['seed']}\n")
        buf.write(f"# config: {json.dumps(self.config, sort_keys=True)}\n")
        for c in self.columns:
            if c in self.column_docs:
                buf.write(f"# column {c}: {self.column_docs[c]}\n")
        if self.summary:
            buf.write(f"# summary: {json.dumps(_jsonable(self.summary), sort_keys=True)}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_csv_cell(v) for v in row) + "\n")
        return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def _csv_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _cell(obj)


# ---------------------------------------------------------------- options


@dataclass(frozen=True)
class Option:
    name: str
    type: Callable
    default: Any = None
    help: str = ""


_MATRIX = [
    Option("M", int, 10, "matrix size (number of eigenvalues)"),
    Option("N_cols", int, 20, "columns of the Gaussian X (>= M)"),
    Option("n", int, 20, "rows of the Gaussian a (>= M)"),
]
_PLASMA = [
    Option("N", int, 10, "number of particles"),
    Option("Q", float, 1.0, "north cap charge ratio"),
    Option("q", float, 1.0, "south cap charge ratio"),
]
_SEED = Option("seed", int, None, "RNG seed (unsigned 64-bit)")
_WORKERS = Option("workers", int, 1, "threads for Monte Carlo replicas")

OPTIONS: dict[str, list[Option]] = {
    "sample": _MATRIX + [Option("replicas", int, 1000, "independent matrices"), _SEED, _WORKERS],
    "density": _PLASMA + [
        Option("r_min", float, 0.0, "first grid radius"),
        Option("r_max", float, 3.0, "last grid radius"),
        Option("points", int, 61, "grid size"),
    ],
    "kernel": _PLASMA + [
        Option("z", str, "0.8,1.1j", "comma-separated complex points, e.g. 0.5+0.2j,1.1"),
        Option("gauge", str, "sum", "sum or J"),
    ],
    "free-energy": [
        Option("N_list", str, "10,20,40,80,160", "comma-separated particle numbers"),
        Option("Q", float, 1.0, "north cap charge ratio"),
        Option("q", float, 1.0, "south cap charge ratio"),
        Option("R", float, 0.5, "sphere radius"),
    ],
    "fluct": _MATRIX + [
        Option("stat", str, "s_over_1_plus_s", f"catalog statistic: {', '.join(CATALOG)}"),
        Option("poly", str, None, "polynomial coefficients c0,c1,... in s (overrides --stat)"),
        Option("replicas", int, 2000, "independent matrices"),
        _SEED,
        _WORKERS,
    ],
    "figure": _MATRIX + [Option("replicas", int, 1000, "independent matrices"), _SEED],
    "verify": [
        Option("only", str, "", "comma-separated criterion numbers or groups"),
        Option("tol", str, "", "comma-separated KEY=VALUE tolerance overrides"),
        Option("seed", int, DEFAULT_SEED, "seed for the stochastic criteria"),
    ],
}
STOCHASTIC = {"sample", "fluct", "figure"}
FORMATS = {cmd: ("csv", "json", "svg") if cmd == "figure" else ("csv", "json") for cmd in OPTIONS}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="annulus-rmt", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"annulus-rmt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in OPTIONS.items():
        p = sub.add_parser(cmd, allow_abbrev=False)
        for o in opts:
            p.add_argument(_flag(o.name), dest=o.name, type=o.type, default=argparse.SUPPRESS,
                           help=f"{o.help} (default {o.default})")
        p.add_argument("--config", default=None, help="file of key = value lines")
        p.add_argument("--format", choices=FORMATS[cmd], default="csv")
        p.add_argument("--out", default=None, help="output path (default stdout)")
    return parser


def _read_config(path: str, cmd: str) -> dict[str, Any]:
    known = {o.name: o for o in OPTIONS[cmd]}
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise UsageError(f"{path}:{lineno}: unknown option {key!r} for {cmd}")
            try:
                values[key] = known[key].type(val)
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: {exc}") from exc
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cmd = args.command
    options = {o.name: o.default for o in OPTIONS[cmd]}
    if args.config:
        options.update(_read_config(args.config, cmd))
    options.update({o.name: getattr(args, o.name) for o in OPTIONS[cmd] if hasattr(args, o.name)})
    if cmd in STOCHASTIC and options.get("seed") is None:
        raise UsageError(f"{cmd} needs --seed")
    return RunConfig(cmd, options, args.format, args.out)


# ---------------------------------------------------------------- commands


def _dims(o) -> MatrixDims:
    return MatrixDims(o["M"], o["N_cols"], o["n"])


def _plasma(o) -> ModelParams:
    return ModelParams(o["N"], o["Q"], o["q"])


def cmd_sample(cfg: RunConfig) -> OutputRecord:
    o = cfg.options
    samples = sample_eigenvalues(_dims(o), o["replicas"], o["seed"], workers=o["workers"])
    rows = [[s.replica_id, float(z.real), float(z.imag)] for s in samples for z in s.points]
    return OutputRecord(
        "sample", o, ["replica", "re", "im"], rows,
        {"replica": "replica id (RNG stream)", "re": "Re of the eigenvalue (2R = 1 plane)", "im": "Im of the eigenvalue"},
    )


def cmd_density(cfg: RunConfig) -> OutputRecord:
    o = cfg.options
    p = _plasma(o)
    if o["points"] < 1 or o["r_min"] < 0 or o["r_max"] < o["r_min"]:
        raise UsageError("need points >= 1 and 0 <= r_min <= r_max")
    ev = KernelEvaluator(p)
    rows = []
    for r in np.linspace(o["r_min"], o["r_max"], o["points"]):
        r = float(r)
        limit = math.nan if r in (p.r_Q, p.r_q) else density_limit(r, p)
        rows.append([r, density_rho1(r, ev), limit])
    return OutputRecord(
        "density", o, ["r", "rho1_exact", "rho_b_limit"], rows,
        {"r": "planar radius", "rho1_exact": "finite-N one-point density",
         "rho_b_limit": "large-N density (nan exactly at an edge)"},
        summary={"r_Q": p.r_Q, "r_q": p.r_q},
    )


def _parse_points(text: str) -> list[complex]:
    try:
        return [complex(s.strip().replace(" ", "")) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad complex point list {text!r}") from exc


def cmd_kernel(cfg: RunConfig) -> OutputRecord:
    o = cfg.options
    if o["gauge"] not in ("sum", "J"):
        raise UsageError("gauge must be sum or J")
    pts = _parse_points(o["z"])
    if not pts:
        raise UsageError("no points given")
    ev = KernelEvaluator(_plasma(o))
    K = kernel_matrix(pts, ev, gauge=o["gauge"])
    rows = [[i, j, float(K[i, j].real), float(K[i, j].imag)] for i in range(len(pts)) for j in range(len(pts))]
    return OutputRecord(
        "kernel", o, ["i", "j", "K_re", "K_im"], rows,
        {"i": "row point index", "j": "column point index", "K_re": "Re K(z_i, z_j)", "K_im": "Im K(z_i, z_j)"},
        summary={"rho_k": rho_k(pts, ev, gauge=o["gauge"])},
    )


def cmd_free_energy(cfg: RunConfig) -> OutputRecord:
    o = cfg.options
    try:
        Ns = [int(s) for s in o["N_list"].split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad N list {o['N_list']!r}") from exc
    rows = []
    for N in Ns:
        p = ModelParams(N, o["Q"], o["q"], o["R"])
        exact, barnes = log_partition_exact(p), log_partition_barnes(p)
        asym = free_energy_asymptotic(p) if p.Q > 0 and p.q > 0 else math.nan
        rows.append([N, exact, barnes, asym, exact - asym])
    return OutputRecord(
        "free-energy", o, ["N", "logZ_exact", "logZ_barnes", "asymptotic", "residual"], rows,
        {"logZ_exact": "log partition function (gamma products)", "logZ_barnes": "same via Barnes G",
         "asymptotic": "large-N form (nan unless Q, q > 0)", "residual": "logZ_exact - asymptotic"},
    )


def _statistic(o):
    if o.get("poly"):
        try:
            return polynomial_statistic([float(c) for c in o["poly"].split(",")])
        except ValueError as exc:
            raise UsageError(f"bad polynomial {o['poly']!r}") from exc
    if o["stat"] not in CATALOG:
        raise UsageError(f"unknown statistic {o['stat']!r}; choose from {sorted(CATALOG)}")
    return CATALOG[o["stat"]]


def cmd_fluct(cfg: RunConfig) -> OutputRecord:
    o = cfg.options
    rep: FluctuationReport = monte_carlo_fluctuations(_statistic(o), _dims(o), o["replicas"], o["seed"], workers=o["workers"])
    fields = ["mean_exact", "mean_limit_per_particle", "variance_exact", "variance_limit", "mc_mean",
              "mc_mean_stderr", "mc_variance", "mc_variance_stderr", "normality_p"]
    return OutputRecord(
        "fluct", o, fields, [[getattr(rep, f) for f in fields]],
        {"variance_limit": "int s alpha'(s)^2 ds over the limiting support",
         "normality_p": "Anderson-Darling p-value of A (nan if A is constant)"},
    )


def _circle(height: float, n: int = 181) -> np.ndarray:
    t = np.linspace(0, 2 * math.pi, n)
    rad = math.sqrt(max(0.0, 1 - height * height))
    return np.column_stack([rad * np.cos(t), rad * np.sin(t), np.full(n, height)])


def cmd_figure(cfg: RunConfig) -> OutputRecord:
    o = cfg.options
    d = _dims(o)
    p = params_from_dims(d)
    samples = sample_eigenvalues(d, o["replicas"], o["seed"])
    h_inner = (1 - p.r_Q**2) / (1 + p.r_Q**2)
    h_outer = (1 - p.r_q**2) / (1 + p.r_q**2) if math.isfinite(p.r_q) else -1.0
    rows, heights = [], []
    for s in samples:
        _, _, xyz = lift_to_sphere(s)
        heights.append(xyz[:, 2])
        rows += [["point", s.replica_id, *map(float, v)] for v in xyz]
    for kind, h in (("inner_circle", h_inner), ("outer_circle", h_outer)):
        rows += [[kind, -1, *map(float, v)] for v in _circle(h)]
    z = np.concatenate(heights)
    between = float(np.mean((z <= h_inner) & (z >= h_outer)))
    rec = OutputRecord(
        "figure", o, ["kind", "replica", "x", "y", "z"], rows,
        {"kind": "point, inner_circle or outer_circle", "replica": "replica id (-1 for circles)",
         "x": "unit sphere x", "y": "unit sphere y", "z": "unit sphere z (north pole = origin of the plane)"},
        summary={"inner_circle_z": h_inner, "outer_circle_z": h_outer, "fraction_between_circles": between},
    )
    if cfg.format == "svg":
        rec.svg = render_svg(rows)
    return rec


def render_svg(rows, size: int = 480, tilt_deg: float = 20.0) -> str:
    """Orthographic view of the sphere, tilted towards the viewer."""
    c, s = math.cos(math.radians(tilt_deg)), math.sin(math.radians(tilt_deg))
    half = size / 2
    scale = 0.45 * size

    def project(x, y, z):
        # rotate about the x axis, look along -y
        y2, z2 = c * y - s * z, s * y + c * z
        return half + scale * x, half - scale * z2, y2

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>',
           f'<circle cx="{half}" cy="{half}" r="{scale:.2f}" fill="none" stroke="#999" stroke-width="1"/>']
    for kind, color in (("inner_circle", "#c00"), ("outer_circle", "#06c")):
        pts = [project(*r[2:]) for r in rows if r[0] == kind]
        path = " ".join(f"{u:.2f},{v:.2f}" for u, v, _ in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    for r in rows:
        if r[0] != "point":
            continue
        u, v, depth = project(*r[2:])
        opacity = "0.55" if depth <= 0 else "0.15"
        out.append(f'<circle cx="{u:.2f}" cy="{v:.2f}" r="0.9" fill="black" fill-opacity="{opacity}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _parse_tolerances(text: str) -> dict[str, float]:
    tol = {}
    for item in filter(None, (t.strip() for t in text.split(","))):
        if "=" not in item:
            raise UsageError(f"tolerance override {item!r} is not KEY=VALUE")
        k, v = item.split("=", 1)
        try:
            tol[k.strip()] = float(v)
        except ValueError as exc:
            raise UsageError(f"bad tolerance value in {item!r}") from exc
    return tol


def cmd_verify(cfg: RunConfig) -> OutputRecord:
    o = cfg.options
    subset = [s for s in o["only"].split(",") if s.strip()]
    try:
        reports = run_suite(subset, seed=o["seed"], overrides=_parse_tolerances(o["tol"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = []
    for r in reports:
        for ch in r.checks:
            rows.append([r.number, ch.key, ch.measured, ch.tolerance, ch.kind, ch.informational, ch.overridden, ch.passed])
    passed = all(r.passed for r in reports)
    rec = OutputRecord(
        "verify", o,
        ["criterion", "check", "measured", "tolerance", "kind", "informational", "overridden", "passed"], rows,
        {"kind": "max: pass if measured <= tolerance; min: pass if measured >= tolerance",
         "informational": "true for reference lines that do not affect the result"},
        summary={"passed": passed, "criteria": {str(r.number): r.passed for r in reports}},
    )
    rec.report = {"passed": passed, "criteria": [r.to_dict() for r in reports], "schema": REPORT_SCHEMA}
    return rec


COMMANDS: dict[str, Callable[[RunConfig], OutputRecord]] = {
    "sample": cmd_sample,
    "density": cmd_density,
    "kernel": cmd_kernel,
    "free-energy": cmd_free_energy,
    "fluct": cmd_fluct,
    "figure": cmd_figure,
    "verify": cmd_verify,
}


def _render(rec: OutputRecord, fmt: str) -> str:
    if fmt == "svg":
        return rec.svg
    if fmt == "json":
        if rec.command == "verify":
            doc = json.loads(rec.to_json())
            doc["payload"]["report"] = _jsonable(rec.report)
            return json.dumps(doc, indent=1) + "\n"
        return rec.to_json()
    return rec.to_csv()


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    t0 = time.perf_counter()
    try:
        cfg = resolve_config(args)
        rec = COMMANDS[cfg.command](cfg)
    except NumericalError as exc:
        print(f"annulus-rmt: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"annulus-rmt: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rec.wall_time_ms = int(round(1000 * (time.perf_counter() - t0)))
    text = _render(rec, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if rec.command == "verify":
        for r in rec.report["criteria"]:
            status = "PASS" if r["passed"] else "FAIL"
            print(f"[{status}] criterion {r['number']:2d} {r['title']}", file=sys.stderr)
        return EXIT_OK if rec.summary["passed"] else EXIT_VERIFY_FAILED
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

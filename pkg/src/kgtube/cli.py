"""Command-line front end.

Every command accepts ``--config FILE`` with ``key = value`` lines (keys are
flag names with dashes or underscores); explicit flags override the file.
Exit status: 0 success, 2 configuration error, 3 non-convergence or
tolerance violation.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .contour import TraceError, TraceSettings, trace_descent
from .dispersion import (
    DomainError,
    SpacetimePoint,
    WaveguideParams,
    dispersion_residual,
    sample_diagram,
    saddle_points,
)
from .fdtd import FdtdConfig, convergence_study, errors_decrease, reference_field, simulate
from .field import FieldMethod, FieldSettings, evaluate
from .output import figure, to_csv, to_json, to_svg

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

DEFAULT_TOLERANCES = {
    FieldMethod.EXACT: 0.0,
    FieldMethod.TUBE_LOOP: 1e-10,
    FieldMethod.SADDLE_HEIGHT_LOOP: 1e-9,
    FieldMethod.SPECTRAL_LINE: 1e-4,
    FieldMethod.STEEPEST_DESCENT: 1e-5,
    FieldMethod.FAR_ASYMPTOTIC: 1e-2,
    FieldMethod.NEAR_ASYMPTOTIC: 1e-2,
}


class ConfigError(Exception):
    pass


def float_list(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def name_list(text: str) -> list[str]:
    return [v.strip() for v in str(text).split(",") if v.strip()]


def probe_list(text: str) -> list[tuple[float, float]]:
    out = []
    for item in name_list(text):
        t, _, x = item.partition(":")
        out.append((float(t), float(x)))
    return out


@dataclass(frozen=True)
class Option:
    name: str
    type: Callable
    default: Any
    help: str


COMMON = [
    Option("c", float, 1.0, "limiting wave speed"),
    Option("omega_co", float, 1.0, "cut-off angular frequency"),
    Option("format", str, "csv", "output format: csv, json or svg"),
    Option("out", str, None, "output path (stdout when omitted)"),
    Option("workers", int, 4, "worker threads for grid evaluation"),
]

GRID = [
    Option("t", float_list, None, "explicit comma-separated times"),
    Option("t_min", float, 1.0, "first time of the grid"),
    Option("t_max", float, 10.0, "last time of the grid"),
    Option("nt", int, 10, "number of times"),
    Option("x", float_list, None, "explicit comma-separated positions"),
    Option("x_min", float, 0.0, "first position"),
    Option("x_max", float, 0.0, "last position"),
    Option("nx", int, 1, "number of positions"),
    Option("cone_frac", float, None, "positions span [0, cone_frac*c*t] for each t"),
    Option("n_nodes", int, 512, "tube-loop quadrature nodes"),
    Option("epsilon", float, None, "spectral-line offset (default 0.1*omega_co)"),
    Option("depth", float, 30.0, "descent-path truncation depth in e-folds"),
]

COMMANDS: dict[str, list[Option]] = {
    "field": GRID + [Option("methods", name_list, ["Exact"], "methods, or 'all'")],
    "compare": [
        o if o.name not in {"t_min", "t_max", "nt", "nx", "cone_frac"} else
        Option(o.name, o.type, {"t_min": 0.2, "t_max": 40.0, "nt": 20, "nx": 20,
                                "cone_frac": 0.95}[o.name], o.help)
        for o in GRID
    ] + [
        Option("methods", name_list, ["TubeLoop"], "methods compared against Exact"),
        Option("tol", str, None, "tolerance: a number or Method=value pairs"),
    ],
    "dispersion": [
        Option("omega_max", float, None, "largest |omega| sampled (default 3*omega_co)"),
        Option("n", int, 201, "number of samples"),
    ],
    "trace": [
        Option("V", float, None, "observation speed x/t (absolute)"),
        Option("v_frac", float, 0.5, "observation speed as a fraction of c"),
        Option("depth", float, 30.0, "truncation depth in e-folds"),
        Option("length_scale", float, 1.0, "x multiplying Im h in the depth test"),
    ],
    "fdtd": [
        Option("dx", float, 8e-3, "coarsest grid spacing"),
        Option("cfl", float, 0.9, "Courant number"),
        Option("levels", int, 3, "refinement levels"),
        Option("t_end", float, None, "final time (default: latest probe)"),
        Option("source_width", float, None, "impulse width (default 2*sqrt(dx*c/omega_co))"),
        Option("probes", probe_list, [(20.0, 5.0), (10.0, 0.0), (8.0, 3.0), (12.0, 2.0)],
               "probes as t:x pairs"),
    ],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgtube", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, options in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key = value configuration file")
        for opt in COMMON + options:
            flag = "--" + opt.name.replace("_", "-")
            kwargs = {"dest": opt.name, "default": None, "help": opt.help}
            if opt.name == "format":
                kwargs["choices"] = ["csv", "json", "svg"]
            p.add_argument(flag, type=opt.type, **kwargs)
    return parser


def read_config_file(path: str, options: list[Option]) -> dict:
    known = {o.name: o for o in options}
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lstrip("-").replace("-", "_")
        if not sep or key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown or malformed entry {raw!r}")
        try:
            values[key] = known[key].type(value.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return values


def resolve(args: argparse.Namespace) -> dict:
    options = COMMON + COMMANDS[args.command]
    cfg = {o.name: o.default for o in options}
    if args.config:
        cfg.update(read_config_file(args.config, options))
    for o in options:
        value = getattr(args, o.name)
        if value is not None:
            cfg[o.name] = value
    if cfg["format"] not in ("csv", "json", "svg"):
        raise ConfigError(f"unknown format {cfg['format']!r}")
    if not (cfg["c"] > 0 and math.isfinite(cfg["c"])):
        raise ConfigError("c must be positive")
    if args.command != "fdtd" and not cfg["omega_co"] > 0:
        raise ConfigError("omega_co must be positive")
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    return cfg


# ------------------------------------------------------------------- grids


def grid_points(cfg: dict) -> list[SpacetimePoint]:
    if cfg["t"] is not None:
        times = list(cfg["t"])
    else:
        if cfg["t_min"] > cfg["t_max"]:
            raise ConfigError("t_min must not exceed t_max")
        if cfg["nt"] < 1:
            raise ConfigError("nt must be >= 1")
        times = np.linspace(cfg["t_min"], cfg["t_max"], cfg["nt"]).tolist()
    if not times or any(not (t > 0 and math.isfinite(t)) for t in times):
        raise ConfigError("times must be positive and finite")
    points = []
    for t in times:
        if cfg["x"] is not None:
            xs = list(cfg["x"])
        elif cfg["cone_frac"] is not None:
            if not 0 <= cfg["cone_frac"]:
                raise ConfigError("cone_frac must be >= 0")
            n = max(cfg["nx"], 1)
            xs = (cfg["cone_frac"] * cfg["c"] * t * np.arange(n) / max(n - 1, 1)).tolist()
        else:
            if cfg["x_min"] > cfg["x_max"] or cfg["nx"] < 1:
                raise ConfigError("need x_min <= x_max and nx >= 1")
            xs = np.linspace(cfg["x_min"], cfg["x_max"], cfg["nx"]).tolist()
        if any(not math.isfinite(x) for x in xs):
            raise ConfigError("positions must be finite")
        points.extend(SpacetimePoint(t, x) for x in xs)
    return points


def parse_methods(names: list[str]) -> list[FieldMethod]:
    if not names:
        raise ConfigError("method list is empty")
    if any(n.lower() == "all" for n in names):
        return list(FieldMethod)
    try:
        chosen = {FieldMethod.parse(n) for n in names}
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    return [m for m in FieldMethod if m in chosen]


def field_settings(cfg: dict) -> FieldSettings:
    if cfg["n_nodes"] < 4 or cfg["n_nodes"] % 2:
        raise ConfigError("n_nodes must be an even number >= 4")
    if cfg["epsilon"] is not None and not cfg["epsilon"] > 0:
        raise ConfigError("epsilon must be positive")
    return FieldSettings(n_nodes=cfg["n_nodes"], epsilon=cfg["epsilon"],
                         trace=TraceSettings(depth=cfg["depth"]))


def _evaluate_row(task):
    p, params, method, settings = task
    row = {"t": p.t, "x": p.x, "method": method.value}
    try:
        s = evaluate(p, params, method, settings)
    except DomainError as exc:
        row.update(value_re=math.nan, value_im=math.nan, error_estimate=math.nan,
                   status="not_applicable", validity_note=str(exc))
        return row
    except (TraceError, ArithmeticError) as exc:
        row.update(value_re=math.nan, value_im=math.nan, error_estimate=math.nan,
                   status="nonconverged", validity_note=str(exc))
        return row
    row.update(value_re=s.value.real, value_im=s.value.imag, error_estimate=s.error_estimate,
               status="ok" if s.converged else "nonconverged",
               validity_note=s.validity_note or "")
    return row


def evaluate_grid(points, params, methods, settings, workers):
    tasks = [(p, params, m, settings) for p in points for m in methods]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_row, tasks))


FIELD_COLUMNS = ["t", "x", "method", "value_re", "value_im", "error_estimate", "status",
                 "validity_note"]


# ----------------------------------------------------------------- commands


def cmd_field(cfg: dict):
    params = WaveguideParams(cfg["c"], cfg["omega_co"])
    methods = parse_methods(cfg["methods"])
    points = grid_points(cfg)
    settings = field_settings(cfg)
    rows = evaluate_grid(points, params, methods, settings, cfg["workers"])
    status = EXIT_NUMERIC if any(r["status"] == "nonconverged" for r in rows) else EXIT_OK

    def svg():
        fig, (ax,) = figure()
        for m in methods:
            for x in sorted({r["x"] for r in rows}):
                sel = [r for r in rows if r["method"] == m.value and r["x"] == x
                       and r["status"] != "not_applicable"]
                if sel:
                    ax.plot([r["t"] for r in sel], [r["value_re"] for r in sel], marker=".",
                            label=f"{m.value}, x={x:.4g}")
        ax.set_xlabel("t")
        ax.set_ylabel("u(t, x)")
        ax.legend(fontsize="small")
        return to_svg(fig)

    return rows, FIELD_COLUMNS, None, svg, status


def parse_tolerances(text: str | None, methods) -> dict:
    tol = {m: DEFAULT_TOLERANCES[m] for m in methods}
    if text is None:
        return tol
    try:
        if "=" not in text:
            return {m: float(text) for m in methods}
        for item in name_list(text):
            name, _, value = item.partition("=")
            tol[FieldMethod.parse(name)] = float(value)
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"bad tolerance specification {text!r}: {exc}") from exc
    return tol


COMPARE_COLUMNS = ["method", "points", "skipped", "nonconverged", "max_abs_dev", "mean_abs_dev",
                   "tolerance", "status"]


def cmd_compare(cfg: dict):
    params = WaveguideParams(cfg["c"], cfg["omega_co"])
    methods = [m for m in parse_methods(cfg["methods"]) if m is not FieldMethod.EXACT]
    if not methods:
        raise ConfigError("method list is empty")
    tol = parse_tolerances(cfg["tol"], methods)
    points = grid_points(cfg)
    settings = field_settings(cfg)
    exact = evaluate_grid(points, params, [FieldMethod.EXACT], settings, cfg["workers"])
    reference = {(r["t"], r["x"]): r["value_re"] for r in exact}
    rows = evaluate_grid(points, params, methods, settings, cfg["workers"])
    out = []
    status = EXIT_OK
    for m in methods:
        sel = [r for r in rows if r["method"] == m.value]
        ok_rows = [r for r in sel if r["status"] == "ok"]
        devs = [abs(complex(r["value_re"], r["value_im"]) - reference[(r["t"], r["x"])])
                for r in ok_rows]
        bad = sum(r["status"] == "nonconverged" for r in sel)
        max_dev = max(devs) if devs else math.nan
        passed = bool(devs) and max_dev <= tol[m] and bad == 0
        if not passed:
            status = EXIT_NUMERIC
        out.append({"method": m.value, "points": len(devs),
                    "skipped": sum(r["status"] == "not_applicable" for r in sel),
                    "nonconverged": bad, "max_abs_dev": max_dev,
                    "mean_abs_dev": float(np.mean(devs)) if devs else math.nan,
                    "tolerance": tol[m], "status": "pass" if passed else "violation"})

    def svg():
        fig, (ax,) = figure()
        ax.bar([r["method"] for r in out],
               [r["max_abs_dev"] if math.isfinite(r["max_abs_dev"]) else 0.0 for r in out])
        ax.plot([r["method"] for r in out], [r["tolerance"] for r in out], "rx",
                label="tolerance")
        ax.set_ylabel("max |u - u_exact|")
        ax.legend()
        return to_svg(fig)

    return out, COMPARE_COLUMNS, None, svg, status


DISPERSION_COLUMNS = ["branch", "omega", "k_re", "k_im", "W", "K", "residual"]


def cmd_dispersion(cfg: dict):
    params = WaveguideParams(cfg["c"], cfg["omega_co"])
    omega_max = cfg["omega_max"] if cfg["omega_max"] is not None else 3.0 * params.omega_co
    if not omega_max > 0 or cfg["n"] < 2:
        raise ConfigError("need omega_max > 0 and n >= 2")
    samples = sample_diagram(params, omega_max, cfg["n"])
    rows = [{"branch": s.branch, "omega": s.omega, "k_re": s.k.real, "k_im": s.k.imag,
             "W": s.W, "K": s.K,
             "residual": abs(dispersion_residual(s.omega, s.k, params))} for s in samples]

    def svg():
        fig, (ax1, ax2) = figure(2)
        for branch, style in (("propagating", "-"), ("evanescent", "--")):
            for side in (-1, 1):
                sel = [s for s in samples if s.branch == branch and side * s.omega >= 0]
                if branch == "propagating":
                    ys = [s.k.real for s in sel]
                    ax1.plot([s.omega for s in sel], ys, "b" + style)
                    ax1.plot([s.omega for s in sel], [-y for y in ys], "b" + style)
                else:
                    ys = [s.k.imag for s in sel]
                    ax1.plot([s.omega for s in sel], ys, "r" + style)
                    ax1.plot([s.omega for s in sel], [-y for y in ys], "r" + style)
        ax1.plot([-params.omega_co, params.omega_co], [0, 0], "ko", label="cut-off")
        ax1.set_xlabel("omega")
        ax1.set_ylabel("k (solid: real, dashed: imaginary)")
        ax1.legend()
        pos = [s for s in samples if s.omega >= 0]
        ax2.plot([s.W for s in pos], [s.K for s in pos], "k-")
        ax2.axhline(0.0, color="0.6", lw=0.5)
        ax2.set_xlabel("W = omega^2")
        ax2.set_ylabel("K = k^2")
        return to_svg(fig)

    return rows, DISPERSION_COLUMNS, None, svg, EXIT_OK


TRACE_COLUMNS = ["branch_sign", "index", "s", "omega_re", "omega_im", "k_re", "k_im", "sheet",
                 "re_h_residual", "im_h"]


def cmd_trace(cfg: dict):
    params = WaveguideParams(cfg["c"], cfg["omega_co"])
    V = cfg["V"] if cfg["V"] is not None else cfg["v_frac"] * params.c
    if not 0 < V < params.c:
        raise ConfigError(f"trace needs 0 < V < c, got V={V}")
    if not (cfg["depth"] > 0 and cfg["length_scale"] > 0):
        raise ConfigError("depth and length_scale must be positive")
    settings = TraceSettings(depth=cfg["depth"], length_scale=cfg["length_scale"])
    saddle = saddle_points(V, params)
    traces = []
    try:
        for sign in (1, -1):
            traces.append(trace_descent(saddle, sign, params, settings))
    except TraceError as exc:
        print(f"kgtube: trace failed: {exc}", file=sys.stderr)
        return [], TRACE_COLUMNS, None, None, EXIT_NUMERIC
    from .dispersion import wavenumber_continued

    rows = []
    for tr in traces:
        nodes, lift = tr.nodes.nodes, tr.nodes.lift
        first = wavenumber_continued(nodes, params)
        sheet = np.where(np.abs(lift - first) <= np.abs(lift + first), 1, -1)
        h = lift - nodes / V
        for i in range(nodes.size):
            rows.append({"branch_sign": tr.branch_sign, "index": i - tr.saddle_index,
                         "s": float(tr.nodes.arclength[i] - tr.nodes.arclength[tr.saddle_index]),
                         "omega_re": nodes[i].real, "omega_im": nodes[i].imag,
                         "k_re": lift[i].real, "k_im": lift[i].imag, "sheet": int(sheet[i]),
                         "re_h_residual": float(h[i].real - tr.phase_const),
                         "im_h": float(h[i].imag)})
    residual = max(tr.phase_residual for tr in traces)
    scale = max(1.0, abs(traces[0].phase_const))
    summary = {"V": V, "omega_star": saddle.omega_star.real, "saddles": [
        saddle.omega_star.real, -saddle.omega_star.real], "max_phase_residual": residual}
    status = EXIT_OK if residual <= 1e-8 * scale else EXIT_NUMERIC

    def svg():
        fig, (ax,) = figure(width=6.5, height=5.5)
        a = params.omega_co
        ax.plot([-a, a], [0, 0], color="0.5", lw=3, label="cut [-omega_co, omega_co]")
        for tr, color in zip(traces, ("C0", "C1")):
            sel = [r for r in rows if r["branch_sign"] == tr.branch_sign]
            for sh, style in ((1, "-"), (-1, ":")):
                xs = [r["omega_re"] if r["sheet"] == sh else math.nan for r in sel]
                ys = [r["omega_im"] if r["sheet"] == sh else math.nan for r in sel]
                ax.plot(xs, ys, color=color, ls=style,
                        label=f"path through {'+' if tr.branch_sign > 0 else '-'}omega*"
                        f" ({'sheet 1' if sh > 0 else 'sheet 2'})")
        ax.plot([saddle.omega_star.real, -saddle.omega_star.real], [0, 0], "k*", ms=12,
                label="saddle points")
        ax.set_xlabel("Re omega")
        ax.set_ylabel("Im omega")
        ax.legend(fontsize="small")
        ax.autoscale()
        return to_svg(fig)

    return rows, TRACE_COLUMNS, summary, svg, status


FDTD_COLUMNS = ["kind", "level", "dx", "error", "order", "t", "x", "simulated", "exact",
                "abs_error"]


def cmd_fdtd(cfg: dict):
    probes = cfg["probes"]
    if not probes:
        raise ConfigError("no probes given")
    if cfg["levels"] < 3:
        raise ConfigError("levels must be >= 3")
    t_end = cfg["t_end"] if cfg["t_end"] is not None else max(t for t, _ in probes)
    try:
        base = FdtdConfig(c=cfg["c"], omega_co=cfg["omega_co"], dx=cfg["dx"], cfl=cfg["cfl"],
                          t_end=t_end, source_width=cfg["source_width"])
        points = [SpacetimePoint(t, x) for t, x in probes]
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    if any(p.t > t_end for p in points):
        raise ConfigError("probe time beyond t_end")
    cfg["t_end"] = t_end
    study = convergence_study(base, points, cfg["levels"])
    rows = [{"kind": "level", "level": r["level"], "dx": r["dx"], "error": r["error"],
             "order": r["order"]} for r in study]
    final = study[-1]["result"]
    for p, v in final.probes:
        ref = reference_field(p, base.c, base.omega_co)
        rows.append({"kind": "probe", "level": len(study) - 1, "dx": study[-1]["dx"],
                     "t": p.t, "x": p.x, "simulated": float(v), "exact": ref,
                     "abs_error": abs(v - ref)})
    errors = [r["error"] for r in study]
    monotone = errors_decrease(errors, base.c)
    summary = {"monotone": monotone, "errors": errors}

    def svg():
        cfg_f = FdtdConfig(c=base.c, omega_co=base.omega_co, dx=study[-1]["dx"], cfl=base.cfl,
                           t_end=t_end, source_width=base.source_width)
        snap = simulate(cfg_f, [], snapshot_times=[t_end]).snapshots[-1]
        u = snap[1]
        half = u.size // 2
        xs = (np.arange(u.size) - half) * cfg_f.dx
        keep = np.abs(xs) <= base.c * t_end * 1.05
        fig, (ax,) = figure(width=7.0)
        ax.plot(xs[keep], u[keep], label=f"leapfrog, dx={cfg_f.dx:.3g}")
        grid = np.linspace(-base.c * t_end * 1.05, base.c * t_end * 1.05, 801)
        ax.plot(grid, [reference_field(SpacetimePoint(snap[0], x), base.c, base.omega_co)
                       for x in grid], "k--", lw=0.8, label="exact")
        ax.set_xlabel("x")
        ax.set_ylabel(f"u(t={snap[0]:.4g}, x)")
        ax.legend()
        return to_svg(fig)

    return rows, FDTD_COLUMNS, summary, svg, EXIT_OK if monotone else EXIT_NUMERIC


HANDLERS = {"field": cmd_field, "compare": cmd_compare, "dispersion": cmd_dispersion,
            "trace": cmd_trace, "fdtd": cmd_fdtd}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = resolve(args)
        rows, columns, summary, svg, status = HANDLERS[args.command](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"kgtube {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if svg is None and cfg["format"] == "svg":
        return status
    if cfg["format"] == "csv":
        text = to_csv(columns, rows)
    elif cfg["format"] == "json":
        # output path and thread count do not affect results
        resolved = {k: (list(v) if isinstance(v, (list, tuple)) else v) for k, v in cfg.items()
                    if k not in ("out", "workers")}
        text = to_json(args.command, resolved, rows, summary)
    else:
        text = svg()
    _emit(text, cfg["out"])
    if status == EXIT_NUMERIC:
        print(f"kgtube {args.command}: numerical check failed (see output)", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())

"""``simulate`` command-line front end.

    simulate <command> --config PATH --out DIR [--grid-points N] [--oracle-K K] [--plot]

Every CSV starts with a ``# config_sha256=...`` line.  Exit status is 0 on
success, 1 when a verification command finds a failing check, and 2 on any
error (an ``error.json`` record is written to the output directory).
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .bae import bae_report
from .config import RunConfig, config_hash, parse_config, serialize_config
from .errors import SimulationError
from .floquet import convergence_residual, oracle_output_spectrum, solve_sidebands
from .linfield import (
    bogolyubov_bath_correlators, combine, original_correlators,
    symmetrized_spectrum, to_original_basis,
)
from .model import ProbeParams, bogolyubov
from .perturb import first_order_cavity, solve_orders, zeroth_order
from .spectra import (
    Method, QuadratureSelector, default_window, duan_quantity, field_spectrum,
    homodyne_field, output_spectrum, quadrature_spectrum, shifted_quadrature_field,
    sweep_duan,
)

COMMANDS = ("spectrum", "output-spectrum", "duan", "sweep", "verify-bae", "oracle-compare")

FIRST_ORDER_EPS = (1e-2, 1e-3, 1e-4)
OUTPUT_EPS = (1e-2, 3e-3, 1e-3)
ORACLE_GRID_POINTS = 41


def thread_count() -> int:
    raw = os.environ.get("SIM_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise SimulationError(f"SIM_THREADS: expected an integer, got {raw!r}") from None
    if n < 0:
        raise SimulationError("SIM_THREADS: must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


class Writer:
    """Collects output files and their hashes for the manifest."""

    def __init__(self, out: Path, cfg: RunConfig):
        self.out = out
        self.hash = config_hash(cfg)
        self.files: dict[str, str] = {}
        out.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header: str, rows) -> Path:
        lines = [f"# config_sha256={self.hash}", header]
        lines += [",".join(fmt(v) for v in row) for row in rows]
        data = ("\n".join(lines) + "\n").encode()
        path = self.out / name
        path.write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()
        return path

    def manifest(self, command: str, cfg: RunConfig, results: dict) -> None:
        doc = {"command": command, "config_sha256": self.hash,
               "config": serialize_config(cfg).splitlines(),
               "files": dict(sorted(self.files.items())), "results": results}
        data = json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
        (self.out / "manifest.json").write_text(data)


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    raise TypeError(type(v))


def _grid(cfg: RunConfig) -> np.ndarray:
    W = cfg.window or default_window(cfg.params)
    return np.linspace(-W, W, cfg.grid_points)


def _slope(eps, res) -> float:
    return float(np.polyfit(np.log(eps), np.log(res), 1)[0])


# --------------------------------------------------------------------------
# commands

def cmd_spectrum(cfg, w: Writer, plot: bool):
    grid = _grid(cfg)
    sels = list(QuadratureSelector)
    with ThreadPoolExecutor(max_workers=min(thread_count(), len(sels))) as ex:
        curves = list(ex.map(lambda s: quadrature_spectrum(s, cfg.params, grid), sels))
    for sel, c in zip(sels, curves):
        w.csv(f"spectrum_{sel.short}.csv", "omega,value", zip(c.grid, c.values))
    if plot:
        from .plotting import plot_curves
        plot_curves(w.out / "spectrum.png", {s.short: (c.grid, c.values)
                                            for s, c in zip(sels, curves)},
                    "omega / kappa", "S(omega)", logy=True)
    return 0, {"selectors": [s.short for s in sels]}


def cmd_output_spectrum(cfg, w: Writer, plot: bool):
    cfg = cfg.with_readout_row()
    grid = _grid(cfg)
    c = output_spectrum(cfg.theta, cfg.params, cfg.probe, grid)
    w.csv("output_spectrum.csv", "omega,value", zip(c.grid, c.values))
    w.csv("output_background.csv", "omega,value", zip(c.grid, c.parts["background"]))
    if plot:
        from .plotting import plot_curves
        plot_curves(w.out / "output_spectrum.png",
                    {"S_out - background": (c.grid, c.parts["mechanical"])},
                    "omega / kappa", "S_out - S_bg")
    return 0, {"theta": cfg.theta}


def _duan_row(ratio, r):
    return (ratio, r.varXSigma, r.varYDelta, r.duan_sum, r.violated)


DUAN_HEADER = "ratio,varXSigma,varYDelta,duan_sum,violated"


def cmd_duan(cfg, w: Writer, plot: bool):
    p = cfg.params
    r = duan_quantity(p, cfg.probe, Method(cfg.method), cfg.window or None)
    w.csv("duan.csv", DUAN_HEADER, [_duan_row(p.G_plus / p.G_minus, r)])
    return 0, {"duan_sum": r.duan_sum, "violated": r.violated, "method": r.method.value}


def cmd_sweep(cfg, w: Writer, plot: bool):
    ratios = cfg.ratios()
    res = sweep_duan(cfg.params, cfg.probe, ratios, Method(cfg.method), thread_count())
    w.csv("sweep.csv", DUAN_HEADER, [_duan_row(r, d) for r, d in res])
    if plot:
        from .plotting import plot_sweep
        plot_sweep(w.out / "sweep.png", ratios, [d.duan_sum for _, d in res])
    return 0, {"points": len(res)}


def basis_change_residuals(params, probe=None) -> dict[str, float]:
    """Max relative gap between Bogolyubov-basis and original-basis spectra.

    Uses the order-0 shifted quadratures and cavity field.  Returns the gap for
    the derived moment table and for the variant with an extra ``+1``.
    """
    grid = np.linspace(-0.05, 0.05, 11)
    fields = [shifted_quadrature_field(s, 0, params)(grid) for s in QuadratureSelector]
    fields.append(zeroth_order(params).a(grid))
    orig = original_correlators(params)
    out = {}
    for name, extra in (("derived", False), ("plus_one_variant", True)):
        tab = bogolyubov_bath_correlators(params, extra_one=extra)
        worst = 0.0
        for f in fields:
            ref = symmetrized_spectrum(to_original_basis(f, params), None, orig)
            got = symmetrized_spectrum(f, None, tab)
            worst = max(worst, float(np.max(np.abs(got - ref) / np.abs(ref))))
        out[name] = worst
    return out


def cmd_verify_bae(cfg, w: Writer, plot: bool):
    cfg = cfg.with_readout_row()
    rep = bae_report(cfg.params, cfg.probe)
    rows = [(c.name, c.order, c.residual, c.passed) for c in rep.checks]
    bc = basis_change_residuals(cfg.params)
    rows.append(("basis_change", 0, bc["derived"], bc["derived"] < 1e-10))
    # the "+1" variant is expected to disagree with the original basis
    rows.append(("basis_change_plus_one_rejected", 0, bc["plus_one_variant"],
                 bc["plus_one_variant"] > 1e-10))
    w.csv("verification.csv", "check,order,residual,pass", rows)
    ok = all(r[3] for r in rows)
    return (0 if ok else 1), {
        "passed": ok, "subspace": list(rep.subspace) if rep.subspace else None,
        "phase_difference": rep.phase_difference, "eq_factor_max": rep.eq_factor_max,
        "order1_protected_residual": rep.order1_residual,
        "bogolyubov_moment_form": "derived" if bc["derived"] < 1e-10 else "undetermined",
        "basis_change": bc,
    }


def _field_gap(f, g) -> np.ndarray:
    keys = set(f.terms) | set(g.terms)
    acc = np.zeros(f.omega.shape)
    for k in keys:
        acc = acc + np.abs(f.terms.get(k, 0) - g.terms.get(k, 0)) ** 2
    return np.sqrt(acc)


def oracle_checks(cfg: RunConfig) -> tuple[list, dict]:
    p, K = cfg.params, cfg.oracle_K
    calG = bogolyubov(p).calG
    W = cfg.window or default_window(p)
    grid = np.linspace(-W, W, ORACLE_GRID_POINTS)
    rows, info = [], {}

    sol0 = solve_sidebands(p, None, grid, K, check_convergence=False)
    a0 = to_original_basis(zeroth_order(p).a(grid), p)
    r0 = float(np.max(_field_gap(sol0.a, a0)) / np.max(a0.norm()))
    rows.append(("zeroth_order_match", 0, r0, r0 < 1e-9))

    base = cfg.probe
    res = []
    for e in FIRST_ORDER_EPS:
        pr = base.replace(G_p=e * calG, G_q=e * calG * _ratio_q(base), lam=1.0)
        orc = solve_sidebands(p, pr, grid, K, check_convergence=False).a
        a1 = to_original_basis(first_order_cavity(p, pr)(grid), p)
        res.append(float(np.max(_field_gap(orc, a0 + a1))))
    s1 = _slope(FIRST_ORDER_EPS, res)
    info["first_order_residuals"] = dict(zip(map(str, FIRST_ORDER_EPS), res))
    rows.append(("first_order_slope", 1, abs(s1 - 2.0), abs(s1 - 2.0) <= 0.1))

    conv = convergence_residual(p, base, grid, K)
    rows.append(("truncation_convergence", 0, conv, conv < 1e-10))

    consts = {}
    for tag, phases, theta in (("bae", (0.0, 0.0), 0.0), ("nonbae", (0.0, math.pi / 2), 0.0)):
        gaps = []
        for e in OUTPUT_EPS:
            pr = base.replace(G_p=e * calG, G_q=e * calG * _ratio_q(base),
                              phi_p=phases[0], phi_q=phases[1], lam=1.0)
            orc = oracle_output_spectrum(p, pr, theta, grid, K, check_convergence=False).values
            sols = solve_orders(p, pr, 2, exact=True)
            a = combine((1, sols[0].a), (1, sols[1].a), (1, sols[2].a))
            pert = field_spectrum(homodyne_field(a, theta, p), grid, p)
            gaps.append(float(np.max(np.abs(orc - pert))))
        s = _slope(OUTPUT_EPS, gaps)
        consts[tag] = gaps[0] / OUTPUT_EPS[0] ** 4
        info[f"output_gaps_{tag}"] = dict(zip(map(str, OUTPUT_EPS), gaps))
        rows.append((f"output_quartic_slope_{tag}", 2, abs(s - 4.0), abs(s - 4.0) <= 0.2))
    ratio = consts["bae"] / consts["nonbae"]
    rows.append(("output_bae_below_nonbae", 2, ratio, ratio < 1.0))
    return rows, info


def _ratio_q(probe: ProbeParams) -> float:
    return probe.G_q / probe.G_p if probe.G_p > 0 else 1.0


def cmd_oracle_compare(cfg, w: Writer, plot: bool):
    rows, info = oracle_checks(cfg)
    w.csv("oracle.csv", "check,order,residual,pass", rows)
    ok = all(r[3] for r in rows)
    info.update(passed=ok, K=cfg.oracle_K,
                frame="b1 detuned by +delta, b2 by -delta, cavity by -delta")
    return (0 if ok else 1), info


HANDLERS = {
    "spectrum": cmd_spectrum, "output-spectrum": cmd_output_spectrum, "duan": cmd_duan,
    "sweep": cmd_sweep, "verify-bae": cmd_verify_bae, "oracle-compare": cmd_oracle_compare,
}


def run(command: str, cfg: RunConfig, out: Path, plot: bool = False) -> int:
    """Execute one command; returns the process exit status."""
    if command not in HANDLERS:
        raise SimulationError(f"unknown command {command!r}")
    w = Writer(Path(out), cfg)
    status, results = HANDLERS[command](cfg, w, plot)
    w.manifest(command, cfg, results)
    return status


def _error_record(out: Path, command: str, exc: Exception) -> None:
    code = getattr(exc, "code", "internal_error")
    out.mkdir(parents=True, exist_ok=True)
    doc = {"command": command, "error": code, "type": type(exc).__name__, "message": str(exc)}
    (out / "error.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="simulate", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="key=value config file (default: all defaults)")
    ap.add_argument("--out", type=Path, required=True, help="output directory")
    ap.add_argument("--grid-points", type=int, help="override grid_points")
    ap.add_argument("--oracle-K", type=int, help="override oracle_K")
    ap.add_argument("--plot", action="store_true", help="also write PNG figures (matplotlib)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text)
        over = {}
        if args.grid_points is not None:
            over["grid_points"] = args.grid_points
        if args.oracle_K is not None:
            over["oracle_K"] = args.oracle_K
        if over:
            from .config import _validate
            cfg = dataclasses.replace(cfg, **over)
            _validate(cfg)
        return run(args.command, cfg, args.out, args.plot)
    except (SimulationError, OSError, RuntimeError, ValueError) as exc:
        _error_record(args.out, args.command, exc)
        print(f"simulate: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

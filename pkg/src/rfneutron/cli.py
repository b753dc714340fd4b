"""Command-line front end: ``rfneutron {scan,slopes,timeresolved,validate-jc}``.

Exit codes: 0 success, 1 a reported check failed, 2 configuration error,
3 physics or precondition error.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys

import numpy as np

from . import analysis as an
from . import beamline as bl
from . import config as cf
from . import elements as el
from . import experiments as ex
from . import jcfield as jc
from .errors import SimulationError
from .qstate import SpinLabel

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_PHYSICS = 0, 1, 2, 3
SLOPE_TOL = 1e-6
NOISY_SIGMAS = 3.0


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.16e}"
    return str(x)


def constants_from(cfg) -> el.PhysicalConstants:
    overrides = {k: v for k, v in cfg["constants"].items() if v is not None}
    return dataclasses.replace(el.DEFAULT_CONSTANTS, **overrides)


def spec_from(cfg) -> bl.BeamlineSpec:
    b = cfg["beamline"]
    consts = constants_from(cfg)
    ctx = el.BeamContext(b["wavelength_m"], consts=consts)
    omega = 2.0 * math.pi * b["frequency_hz"]
    f1, f2 = bl.default_flippers(
        omega, b["phi_omega"], b["phi_half"], b["coil_length_m"], ctx, consts
    )
    f1 = _override(f1, b, "flipper1")
    f2 = _override(f2, b, "flipper2")
    accel = b["zero_field_phase"] if b["compensate"] else b["accelerator_rotation"]
    return bl.BeamlineSpec(
        initial_spin=SpinLabel(b["initial_spin"]),
        flipper1=f1,
        flipper1_on=b["flipper1_on"],
        flipper2=f2,
        flipper2_on=b["flipper2_on"],
        chi=b["chi"],
        accelerator_rotation=accel,
        zero_field_phase=b["zero_field_phase"],
        visibility=b["visibility"],
        analyzer_keep=SpinLabel(b["analyzer_keep"]),
        turner_on=b["turner_on"],
        context=ctx,
        consts=consts,
    )


def _override(flipper, b, name):
    changes = {}
    for field in ("b0", "b1"):
        value = b[f"{name}_{field}_t"]
        if value is not None:
            changes[field] = value
    return dataclasses.replace(flipper, **changes) if changes else flipper


def noise_from(cfg):
    n = cfg["noise"]
    if not n["enabled"]:
        return None
    return ex.Noise.seeded(n["counts_per_point"], n["seed"])


class Table:
    def __init__(self, command, cfg, columns):
        self.command = command
        self.cfg = cfg
        self.columns = columns
        self.rows = []
        self.footer = []

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError("row width does not match the column header")
        self.rows.append(values)

    def note(self, key, value):
        self.footer.append((key, value))

    def render(self) -> str:
        lines = [f"# rfneutron {self.command}"]
        lines += [f"# config.{k} = {v}" for k, v in cf.flatten(self.cfg)]
        lines.append(",".join(self.columns))
        lines += [",".join(fmt(v) for v in row) for row in self.rows]
        lines += [f"# {k} = {fmt(v)}" for k, v in self.footer]
        return "\n".join(lines) + "\n"


def write_atomic(path, text):
    partial = f"{path}.partial"
    with open(partial, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(partial, path)


def read_table(path):
    """Parse a table written by this CLI: ``(columns, rows, footer dict)``."""
    columns, rows, footer = None, [], {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                if columns is not None and " = " in line:
                    k, v = line[1:].strip().split(" = ", 1)
                    footer[k] = v
                continue
            if columns is None:
                columns = line.split(",")
            else:
                rows.append(line.split(","))
    return columns, rows, footer


# the O fringe runs as cos(chi + phi_omega - 2*phi_half + ...)
FRINGE_COORDINATE = {
    "chi": (1.0, "chi"),
    "phi_omega": (1.0, "phi_omega"),
    "phi_half": (-2.0, "-2*phi_half"),
}


def cmd_scan(cfg, figure=None):
    spec = spec_from(cfg)
    s = cfg["scan"]
    values = cf.grid(s["start"], s["stop"], s["step"])
    res = bl.scan(bl.ScanSpec(s["parameter"], tuple(values), spec))
    o, h = res.o_intensity, res.h_intensity
    noise = noise_from(cfg)
    if noise is not None:
        o, h = noise.sample(o), noise.sample(h)
    table = Table("scan", cfg, [s["parameter"] + "_rad", "o_intensity", "h_intensity"])
    for row in zip(res.values, o, h):
        table.add(*row)
    factor, coordinate = FRINGE_COORDINATE[s["parameter"]]
    fit = an.fit_fringe(an.FringeScan(factor * res.values, o))
    table.note("fit.coordinate", coordinate)
    table.note("fit.offset", fit.offset)
    table.note("fit.visibility", fit.visibility)
    table.note("fit.phase", fit.phase)
    table.note("fit.phase_identifiable", fit.phase_identifiable)
    table.note("fit.residual_rms", fit.residual_rms)
    table.note("h.max_deviation", float(np.max(np.abs(h - np.mean(h)))))
    table.note("derived.geometric_phase", an.geometric_phase(spec.phi_omega, spec.phi_half))
    if figure:
        from .plotting import fringe_figure

        fringe_figure(figure, factor * res.values, o, h, fit, xlabel=f"{coordinate} (rad)")
    return table, EXIT_OK


def cmd_slopes(cfg, figure=None):
    spec = spec_from(cfg)
    s = cfg["slopes"]
    settings = cf.grid(s["start"], s["stop"], s["step"], include_stop=True)
    noise = noise_from(cfg)
    records = ex.phase_slopes(spec, settings, ex.chi_grid(s["chi_points"]), noise)
    table = Table("slopes", cfg, ["spin", "parameter", "setting_rad", "delta_phi_rad"])
    status = EXIT_OK
    for rec in records:
        for x, p in zip(rec.settings, rec.phases):
            table.add(rec.spin.value, rec.parameter, x, p)
    for rec in records:
        tag = f"slope.{rec.spin.value}.{rec.parameter}"
        dev = rec.fit.slope - rec.expected
        tol = NOISY_SIGMAS * rec.fit.stderr if noise is not None else SLOPE_TOL
        ok = abs(dev) <= tol
        status = status if ok else EXIT_CHECK_FAILED
        table.note(f"{tag}.slope", rec.fit.slope)
        table.note(f"{tag}.intercept", rec.fit.intercept)
        table.note(f"{tag}.stderr", rec.fit.stderr)
        table.note(f"{tag}.expected", rec.expected)
        table.note(f"{tag}.tolerance", tol)
        table.note(f"{tag}.pass", ok)
    if figure:
        from .plotting import slopes_figure

        slopes_figure(figure, records)
    return table, status


def oscillating_reference(chi, phi, omega, t):
    """Closed-form region-4 polarization; the residual column is measured against it."""
    arg = chi - omega * t - phi
    return np.array([math.cos(arg), math.sin(arg), 0.0])


def cmd_timeresolved(cfg, figure=None):
    spec = spec_from(cfg)
    n = cfg["timeresolved"]["points"]
    period = 2.0 * math.pi / spec.omega_ref
    times = np.arange(n) * (period / n)
    series = bl.time_resolved(spec, times)
    table = Table("timeresolved", cfg, ["t_s", "px", "py", "pz", "residual"])
    pol = np.array([p.as_array() for _, p in series])
    worst = 0.0
    for (t, p), vec in zip(series, pol):
        ref = oscillating_reference(spec.chi, spec.phi_omega, spec.omega_ref, t)
        r = float(np.max(np.abs(vec - ref)))
        worst = max(worst, r)
        table.add(t, *vec, r)
    avg = pol.mean(axis=0)
    table.note("residual.max", worst)
    table.note("period_average.px", avg[0])
    table.note("period_average.py", avg[1])
    table.note("period_average.pz", avg[2])
    if figure:
        from .plotting import polarization_figure

        polarization_figure(figure, times, pol)
    return table, EXIT_OK


def cmd_validate_jc(cfg, figure=None):
    j = cfg["jc"]
    consts = constants_from(cfg)
    basis = None
    if j["n_min"] is not None or j["n_max"] is not None:
        lo, hi, center = jc.coherent_window(math.sqrt(j["n_mean"]))
        lo = j["n_min"] if j["n_min"] is not None else lo
        hi = j["n_max"] if j["n_max"] is not None else hi
        basis = jc.FockBasisSpec(lo, hi, center_omega=center)
    grid = np.linspace(0.0, math.pi / 2, j["phase_grid_points"])
    checks = jc.validate_correspondence(
        j["n_mean"], j["pulse_area"], j["phase_shift"], grid, consts, basis
    )
    table = Table("validate-jc", cfg, ["check", "value", "expected", "tolerance", "pass"])
    for c in checks:
        table.add(c.name, c.value, c.expected, c.tolerance, c.passed)
    ok = all(c.passed for c in checks)
    table.note("all_passed", ok)
    if figure:
        from .plotting import rabi_figure

        areas = np.linspace(0.0, 2 * math.pi, 25)
        quantum = [jc.flip_run(j["n_mean"], 0.0, a, consts=consts, basis=basis)[2].flip_probability
                   for a in areas]
        rabi_figure(figure, areas, quantum, np.sin(areas / 2) ** 2)
    return table, EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {
    "scan": cmd_scan,
    "slopes": cmd_slopes,
    "timeresolved": cmd_timeresolved,
    "validate-jc": cmd_validate_jc,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rfneutron",
        description="Two-flipper polarized neutron interferometer simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML configuration file (defaults apply if omitted)")
        p.add_argument("--out", help="output CSV path (default: <command>.csv)")
        p.add_argument("--seed", type=int, help="seed for the counting-noise generator")
        p.add_argument("--noise", action="store_true", help="enable Poisson counting noise")
        p.add_argument("--figure", help="also render a PNG figure to this path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = cf.load(args.config) if args.config else cf.defaults()
        if args.seed is not None:
            if args.seed < 0:
                raise cf.ConfigError("--seed must be non-negative")
            cfg["noise"]["seed"] = args.seed
        if args.noise:
            cfg["noise"]["enabled"] = True
        out = args.out or cfg["output"]["path"] or f"{args.command}.csv"
        figure = args.figure or cfg["output"]["figure"]
        table, status = COMMANDS[args.command](cfg, figure)
    except cf.ConfigError as exc:
        print(f"rfneutron: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"rfneutron: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except ValueError as exc:
        print(f"rfneutron: invalid configuration value: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_atomic(out, table.render())
    return status


if __name__ == "__main__":
    sys.exit(main())

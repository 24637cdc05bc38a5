"""Command-line front end: worked examples as machine-readable reports.

Each subcommand runs a bundle of checks, writes a report file (JSON by
default, CSV on request), and drops plot-ready CSV data plus a rendered PNG
next to it when the result is naturally a picture (integral curves, orbits,
sweeps).  Reports follow one schema:

    { "command": ..., "params": ..., "checks": [
        { "name": ..., "residual": ..., "tolerance": ..., "pass": ... } ] }

Configuration precedence is flags > config file (plain key=value lines) >
defaults.  Exit codes: 0 all checks passed, 1 a check failed, 2 usage error.
Every command is deterministic under a fixed seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import dynamics, geometry as geo, lagrangian as lg, linstruct as ls
from . import quantize as qz
from .numcore import DomainError, Tolerance, mat_exp, rk4_step
from .quantize import Poly2, StarConfig

FIGURE_DPI = 130

CATALOG_NAMES = (
    "standard",
    "ho_K",
    "magnetic",
    "tanh",
    "exp",
    "cube",
    "sphere",
)


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict
    out_dir: Path
    fmt: str


class UsageError(Exception):
    pass


def check(name: str, residual: float, tolerance: float) -> dict:
    return {
        "name": name,
        "residual": float(residual),
        "tolerance": float(tolerance),
        "pass": bool(residual <= tolerance),
    }


# ---------------------------------------------------------------------------
# configuration plumbing


def _load_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"bad config line (expected key=value): {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merge_params(args: argparse.Namespace, casts: dict[str, Callable]) -> dict:
    """flags > config file > defaults, with None as the unset sentinel."""
    merged = {key: default for key, (default, _) in casts.items()}
    if getattr(args, "config", None):
        for key, raw in _load_config_file(args.config).items():
            if key not in casts:
                raise UsageError(f"unknown config key '{key}'")
            merged[key] = casts[key][1](raw)
    for key in casts:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _report_payload(config: RunConfig, checks: list[dict]) -> dict:
    params = {}
    for key, value in sorted(config.params.items()):
        if isinstance(value, (np.floating, np.integer)):
            value = value.item()
        params[key] = value
    return {"command": config.command, "params": params, "checks": checks}


def _write_report(config: RunConfig, checks: list[dict]) -> Path:
    stem = config.command.replace("-", "_") + "_report"
    if config.fmt == "json":
        path = config.out_dir / f"{stem}.json"
        payload = _report_payload(config, checks)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        path = config.out_dir / f"{stem}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["name", "residual", "tolerance", "pass"])
            for c in checks:
                writer.writerow([c["name"], repr(c["residual"]), repr(c["tolerance"]), c["pass"]])
    return path


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _finish(config: RunConfig, checks: list[dict], files: list[Path]) -> int:
    report_path = _write_report(config, checks)
    for c in checks:
        status = "PASS" if c["pass"] else "FAIL"
        print(f"{status} {c['name']}: residual={c['residual']:.3e} tol={c['tolerance']:.1e}")
    for path in [report_path, *files]:
        print(f"wrote {path}")
    return 0 if all(c["pass"] for c in checks) else 1


# ---------------------------------------------------------------------------
# structure-check


def _make_structure(params: dict) -> ls.LinearStructure:
    name = params["name"]
    if name == "standard":
        return ls.catalog_make("standard", n=params["n"])
    if name == "ho_K":
        return ls.catalog_make("ho_K", lam=params["lam"])
    if name == "magnetic":
        return ls.catalog_make("magnetic", b=params["b"])
    if name == "tanh":
        return ls.catalog_make("tanh", n=params["n"])
    if name in ("exp", "cube", "sphere"):
        return ls.catalog_make(name)
    raise UsageError(f"unknown structure '{name}'; choose from {', '.join(CATALOG_NAMES)}")


def cmd_structure_check(config: RunConfig) -> int:
    params = config.params
    structure = _make_structure(params)
    report = ls.ls_axiom_report(
        structure,
        n_samples=params["samples"],
        tol=Tolerance(absolute=params["tol"]),
        seed=params["seed"],
    )
    checks = list(report["checks"])
    if params["name"] == "cube":
        # the generator must refuse at the origin, where the chart inverse
        # is a homeomorphism but not differentiable
        try:
            ls.ls_liouville(structure, np.zeros(structure.dim))
        except DomainError:
            refusal = check("liouville_refusal", 0.0, 0.0)
        else:
            refusal = check("liouville_refusal", 1.0, 0.0)
        refusal["note"] = "dilation generator not differentiable at the origin"
        checks.append(refusal)
    return _finish(config, checks, [])


# ---------------------------------------------------------------------------
# liouville


CLOSED_FORMS: dict[str, Callable] = {
    "tanh": lambda x: (1.0 - x * x) * np.arctanh(x),
    "exp": lambda x: x * np.log(x),
    "cube": lambda x: 3.0 * x,
    "sphere": lambda x: np.array([-math.sin(x[0]), 0.0]),
}


def _liouville_targets(params: dict) -> list[ls.LinearStructure]:
    if params["name"] != "all":
        return [_make_structure(params)]
    return [
        ls.catalog_make("standard", n=2),
        ls.catalog_make("ho_K", lam=params["lam"]),
        ls.catalog_make("magnetic", b=params["b"]),
        ls.catalog_make("tanh", n=1),
        ls.catalog_make("exp"),
        ls.catalog_make("cube"),
        ls.catalog_make("sphere"),
    ]


def cmd_liouville(config: RunConfig) -> int:
    params = config.params
    rng = np.random.default_rng(params["seed"])
    checks = []
    for structure in _liouville_targets(params):
        label = structure.name
        pts = structure.sample(params["samples"], rng)
        delta0 = geo.VectorField(structure.dim, lambda w: np.asarray(w, dtype=float))
        pushed = geo.pushforward(structure.phi, delta0)
        eps = 1e-5
        push_res = 0.0
        flow_res = 0.0
        closed_res = 0.0
        base = params["name"] if params["name"] != "all" else label.split("(")[0]
        closed = CLOSED_FORMS.get(base)
        for k in range(pts.shape[1]):
            x = pts[:, k]
            lio = ls.ls_liouville(structure, x)
            push_res = max(push_res, float(np.max(np.abs(lio - pushed(x)))))
            fd = (ls.ls_flow(structure, x, eps) - ls.ls_flow(structure, x, -eps)) / (2 * eps)
            flow_res = max(flow_res, float(np.max(np.abs(lio - fd))))
            if closed is not None:
                want = closed(x) if base == "sphere" else closed(np.asarray(x))
                closed_res = max(closed_res, float(np.max(np.abs(lio - want))))
        checks.append(check(f"{label}_pushforward", push_res, 1e-9))
        checks.append(check(f"{label}_flow_oracle", flow_res, 1e-6))
        if closed is not None:
            checks.append(check(f"{label}_closed_form", closed_res, 1e-10))
    return _finish(config, checks, [])


# ---------------------------------------------------------------------------
# darboux


def cmd_darboux(config: RunConfig) -> int:
    params = config.params
    name = params["lagrangian"]
    kwargs = {"b": params["b"]} if name == "magnetic-symmetric" else {}
    try:
        lag = lg.lagrangian_catalog(name, **kwargs)
    except ValueError as err:
        raise UsageError(str(err)) from err
    report = lg.darboux_check(
        lag,
        n_samples=params["points"],
        tol=Tolerance(absolute=params["tol"]),
        seed=params["seed"],
    )
    return _finish(config, list(report["checks"]), [])


# ---------------------------------------------------------------------------
# magnetic-demo


def cmd_magnetic_demo(config: RunConfig) -> int:
    params = config.params
    b = params["b"]
    if b == 0.0:
        raise UsageError("the magnetic demo needs b != 0")
    state = np.asarray([float(v) for v in params["state"].split(",")], dtype=float)
    if state.shape != (4,):
        raise UsageError("state must be four comma-separated numbers Q1,Q2,U1,U2")

    flow = dynamics.flow_generator(b)
    sym = dynamics.generator_symplectic_check(flow)
    checks = list(sym["checks"])

    period = 2.0 * math.pi / abs(b)
    t_check = np.linspace(0.0, 20.0 / abs(b), 41)
    exp_res = max(
        float(np.max(np.abs(dynamics.propagator_matrix(b, t) - mat_exp(t * flow.G))))
        for t in t_check
    )
    checks.append(check("propagator_vs_exponential", exp_res, 1e-10))

    t_grid = np.linspace(0.0, params["periods"] * period, params["steps"] + 1)
    rows = dynamics.trajectory_rows(b, state, t_grid, method="exact")
    chi_drift = float(
        max(np.max(np.abs(rows[:, 5] - rows[0, 5])), np.max(np.abs(rows[:, 6] - rows[0, 6])))
    )
    checks.append(check("chi_drift_exact", chi_drift, 1e-10))
    checks.append(
        check("energy_drift_exact", float(np.max(np.abs(rows[:, 7] - rows[0, 7]))), 1e-10)
    )

    t_rk4 = np.linspace(0.0, period, 10_001)
    rows_rk4 = dynamics.trajectory_rows(b, state, t_rk4, method="rk4")
    chi_drift_rk4 = float(
        max(
            np.max(np.abs(rows_rk4[:, 5] - rows_rk4[0, 5])),
            np.max(np.abs(rows_rk4[:, 6] - rows_rk4[0, 6])),
        )
    )
    checks.append(check("chi_drift_rk4", chi_drift_rk4, 1e-7))

    orbit = dynamics.larmor_orbit(b, state, t_grid)
    gyro_dist = np.linalg.norm(orbit["radial"], axis=1)
    checks.append(
        check("larmor_radius", float(np.max(np.abs(gyro_dist - orbit["radius"]))), 1e-9)
    )

    quick = lg.darboux_check(
        lg.lagrangian_catalog("magnetic-symmetric", b=b),
        n_samples=20,
        tol=Tolerance(absolute=1e-8),
        seed=params["seed"],
    )
    worst = max(c["residual"] for c in quick["checks"] if c["name"] != "hessian_condition")
    checks.append(check("darboux_residual", float(worst), 1e-8))

    csv_path = config.out_dir / "magnetic_trajectory.csv"
    _write_csv(csv_path, dynamics.TRAJECTORY_COLUMNS, [list(map(float, r)) for r in rows])

    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.plot(rows[:, 1], rows[:, 2], lw=1.2, label="trajectory")
    cx, cy = orbit["center"]
    theta = np.linspace(0.0, 2.0 * math.pi, 200)
    ax.plot(cx + orbit["radius"] * np.cos(theta), cy + orbit["radius"] * np.sin(theta),
            ls="--", lw=0.8, label="gyration circle")
    ax.plot([cx], [cy], marker="+", ms=10, ls="none", label="center")
    ax.set_xlabel("Q1")
    ax.set_ylabel("Q2")
    ax.set_aspect("equal")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    png_path = config.out_dir / "magnetic_orbit.png"
    fig.savefig(png_path, dpi=FIGURE_DPI)
    plt.close(fig)

    return _finish(config, checks, [csv_path, png_path])


# ---------------------------------------------------------------------------
# figure1


def _unit_speed(field: geo.VectorField) -> Callable:
    def unit(x):
        v = np.asarray(field(x), dtype=float)
        return v / float(np.linalg.norm(v))

    return unit


def _integrate_curve(unit_field: Callable, seed: np.ndarray, arc: float, steps: int) -> np.ndarray:
    """States at signed arc lengths -arc..arc, seed in the middle."""
    ds = arc / steps
    forward = [np.asarray(seed, dtype=float)]
    for _ in range(steps):
        forward.append(rk4_step(unit_field, forward[-1], ds))
    backward = [np.asarray(seed, dtype=float)]
    neg = lambda x: -unit_field(x)
    for _ in range(steps):
        backward.append(rk4_step(neg, backward[-1], ds))
    states = np.vstack([np.array(backward[::-1]), np.array(forward[1:])])
    return states


def cmd_figure1(config: RunConfig) -> int:
    params = config.params
    lam = params["lam"]
    if lam < 0.0:
        raise UsageError("lambda must be >= 0")
    dq_field, dp_field = ls.ho_basis_fields(lam)
    seeds = np.linspace(-1.5, 1.5, params["seeds"])
    arc, steps = params["arc"], params["steps"]
    ds = arc / steps

    rows = []
    curves = []
    for family, field in (("Q", dq_field), ("P", dp_field)):
        unit = _unit_speed(field)
        for idx, c in enumerate(seeds):
            seed = np.array([0.0, c]) if family == "Q" else np.array([c, 0.0])
            states = _integrate_curve(unit, seed, arc, steps)
            t_vals = np.linspace(-arc, arc, 2 * steps + 1)
            curve_id = f"{family}{idx}"
            curves.append((curve_id, family, c, states))
            for t, x in zip(t_vals, states):
                rows.append([curve_id, float(t), float(x[0]), float(x[1])])

    # FD direction versus the normalized field at interval midpoints
    field_res = 0.0
    curvature_all = 0.0
    curvature_axis = 0.0
    for curve_id, family, c, states in curves:
        unit = _unit_speed(dq_field if family == "Q" else dp_field)
        fd = (states[1:] - states[:-1]) / ds
        mids = 0.5 * (states[1:] + states[:-1])
        for k in range(fd.shape[0]):
            field_res = max(field_res, float(np.max(np.abs(fd[k] - unit(mids[k])))))
        second = np.abs(states[2:] - 2.0 * states[1:-1] + states[:-2]) / ds**2
        bend = float(np.max(second)) if second.size else 0.0
        curvature_all = max(curvature_all, bend)
        if c == 0.0:
            curvature_axis = max(curvature_axis, bend)

    checks = [check("field_equation_residual", field_res, 1e-3)]
    checks.append(check("axis_curvature_residual", curvature_axis, 1e-6))
    if lam == 0.0:
        checks.append(check("curvature_residual", curvature_all, 1e-6))

    csv_path = config.out_dir / "figure1_curves.csv"
    _write_csv(csv_path, ("curve_id", "t", "q", "p"), rows)

    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    for curve_id, family, c, states in curves:
        color = "tab:blue" if family == "Q" else "tab:red"
        ax.plot(states[:, 0], states[:, 1], color=color, lw=0.9)
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_title(f"imported coordinate curves, lambda={lam}")
    ax.set_aspect("equal")
    fig.tight_layout()
    png_path = config.out_dir / "figure1_curves.png"
    fig.savefig(png_path, dpi=FIGURE_DPI)
    plt.close(fig)

    return _finish(config, checks, [csv_path, png_path])


# ---------------------------------------------------------------------------
# quantize-demo


def cmd_quantize_demo(config: RunConfig) -> int:
    params = config.params
    n, hbar, lam, b = params["n"], params["hbar"], params["lam"], params["b"]
    checks = []

    grid = qz.centered_grid(n, 16.0)
    p0 = grid.momentum_quantum(hbar)
    phase_report = qz.weyl_commutation_check(
        (grid.spacing, 0.0), (0.0, p0), grid, hbar=hbar
    )
    checks.append(phase_report["checks"][0])

    psi = qz.gaussian_state(grid, center=0.0, sigma=grid.box_length / 8.0, hbar=hbar)
    moved = qz.weyl_apply(3 * grid.spacing, 2 * p0, psi, hbar)
    checks.append(check("weyl_unitarity", abs(moved.norm() - psi.norm()), 1e-12))

    residuals = {}
    for n_grid in (32, 64, 128):
        rep = qz.hamiltonian_comm_check(b, qz.centered_grid(n_grid, 12.0, d=2), hbar=hbar)
        residuals[n_grid] = {c["name"]: c["residual"] for c in rep["checks"]}
    slope_res = 0.0
    for name in residuals[32]:
        slope = math.log2(residuals[32][name] / residuals[128][name]) / 2.0
        slope_res = max(slope_res, abs(slope - 2.0))
    checks.append(check("comm_convergence_order", slope_res, 0.25))

    sigmas = (0.5, 1.0, 1.5, 2.0)
    ratio_rows = []
    ratios = []
    for sigma in sigmas:
        prof = lambda q, s=sigma: math.exp(-q * q / (2.0 * s * s))
        n_mu = qz.measure_norm(prof, lam, "mu")
        n_mup = qz.measure_norm(prof, lam, "mu_prime")
        ratios.append(n_mu / n_mup)
        ratio_rows.append([float(sigma), n_mu, n_mup, n_mu / n_mup])
    if lam == 0.0:
        checks.append(check("norm_ratio_unitary", max(abs(r - 1.0) for r in ratios), 1e-10))
    else:
        spread = (ratios[-1] - ratios[0]) / ratios[0]
        checks.append(check("norm_ratio_spread", max(0.0, 0.10 - spread), 0.0))

    star = qz.star_product(Poly2.q(), Poly2.p(), StarConfig(hbar=hbar, order=3))
    star_res = abs(star.coeff(1, 1) - 1.0) + abs(star.coeff(0, 0) - 0.5j * hbar)
    checks.append(check("star_canonical_exact", star_res, 0.0))

    bracket = qz.moyal_bracket(
        Poly2({(3, 0): 1.0}), Poly2({(0, 3): 1.0}), StarConfig(hbar=hbar, order=3)
    )
    bracket_res = abs(bracket.coeff(2, 2) - 9.0) + abs(bracket.coeff(0, 0) + 1.5 * hbar**2)
    checks.append(check("bracket_cubic_exact", bracket_res, 1e-13))

    x_probe = (0.8, 0.5)
    hbars = np.logspace(-3, -1, 5)
    devs = []
    flat = qz.poisson_bracket_value(lambda v: v[0] ** 3, lambda v: v[1] ** 3, x_probe)
    for hval in hbars:
        out = qz.moyal_bracket(
            Poly2({(3, 0): 1.0}), Poly2({(0, 3): 1.0}), StarConfig(hbar=hval, order=3)
        )
        devs.append(abs(out(x_probe) - flat))
    slope = float(np.polyfit(np.log(hbars), np.log(devs), 1)[0])
    checks.append(check("moyal_slope", abs(slope - 2.0), 0.05))

    csv_path = config.out_dir / "quantize_norm_ratios.csv"
    _write_csv(csv_path, ("sigma", "norm_mu", "norm_mu_prime", "ratio"), ratio_rows)

    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.plot(sigmas, ratios, marker="o")
    ax.axhline(1.0, color="gray", lw=0.6, ls=":")
    ax.set_xlabel("Gaussian width sigma")
    ax.set_ylabel("norm ratio mu / mu'")
    ax.set_title(f"measure nonequivalence, lambda={lam}")
    fig.tight_layout()
    png_path = config.out_dir / "quantize_norm_ratios.png"
    fig.savefig(png_path, dpi=FIGURE_DPI)
    plt.close(fig)

    return _finish(config, checks, [csv_path, png_path])


# ---------------------------------------------------------------------------
# moyal-sweep


def cmd_moyal_sweep(config: RunConfig) -> int:
    params = config.params
    if params["hbar_min"] <= 0 or params["hbar_max"] <= params["hbar_min"]:
        raise UsageError("need 0 < hbar-min < hbar-max")
    hbars = np.logspace(
        math.log10(params["hbar_min"]), math.log10(params["hbar_max"]), params["points"]
    )
    f = Poly2({(3, 0): 1.0})
    g = Poly2({(0, 3): 1.0})
    x = np.array([0.8, 0.5])
    chart = ls.catalog_make("ho_K", lam=params["lam"]).phi

    flat_ref = qz.poisson_bracket_value(f, g, x)
    w = np.asarray(chart.inverse(x), dtype=float)
    _, jac = geo.jacobian_at(chart.forward, w, 2)
    chart_ref = float(np.linalg.det(jac)) * flat_ref

    rows = []
    flat_devs = []
    chart_devs = []
    for hval in hbars:
        cfg = StarConfig(hbar=float(hval), order=3)
        flat_dev = abs(qz.moyal_bracket(f, g, cfg)(x) - flat_ref)
        chart_dev = abs(qz.moyal_bracket(f, g, cfg, chart=chart)(x) - chart_ref)
        flat_devs.append(flat_dev)
        chart_devs.append(chart_dev)
        rows.append([float(hval), flat_dev, chart_dev])

    flat_slope = float(np.polyfit(np.log(hbars), np.log(flat_devs), 1)[0])
    chart_slope = float(np.polyfit(np.log(hbars), np.log(chart_devs), 1)[0])
    checks = [
        check("flat_slope_residual", abs(flat_slope - 2.0), 0.05),
        check("chart_slope_residual", abs(chart_slope - 2.0), 0.05),
    ]

    csv_path = config.out_dir / "moyal_sweep.csv"
    _write_csv(csv_path, ("hbar", "flat_deviation", "chart_deviation"), rows)

    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.loglog(hbars, flat_devs, marker="o", label=f"flat (slope {flat_slope:.3f})")
    ax.loglog(hbars, chart_devs, marker="s", label=f"imported (slope {chart_slope:.3f})")
    ax.set_xlabel("hbar")
    ax.set_ylabel("|bracket - classical limit|")
    ax.legend()
    fig.tight_layout()
    png_path = config.out_dir / "moyal_sweep.png"
    fig.savefig(png_path, dpi=FIGURE_DPI)
    plt.close(fig)

    return _finish(config, checks, [csv_path, png_path])


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    sub.add_argument("--config", help="key=value config file")


COMMANDS: dict[str, tuple[Callable, dict]] = {}


def _register(name: str, runner: Callable, casts: dict) -> None:
    COMMANDS[name] = (runner, casts)


_register(
    "structure-check",
    cmd_structure_check,
    {
        "name": (None, str),
        "samples": (1000, int),
        "seed": (0, int),
        "lam": (0.1, float),
        "b": (1.0, float),
        "n": (2, int),
        "tol": (1e-8, float),
    },
)
_register(
    "liouville",
    cmd_liouville,
    {
        "name": ("all", str),
        "samples": (100, int),
        "seed": (0, int),
        "lam": (0.1, float),
        "b": (1.0, float),
        "n": (2, int),
    },
)
_register(
    "darboux",
    cmd_darboux,
    {
        "lagrangian": ("magnetic-symmetric", str),
        "points": (100, int),
        "seed": (0, int),
        "b": (1.0, float),
        "tol": (1e-8, float),
    },
)
_register(
    "magnetic-demo",
    cmd_magnetic_demo,
    {
        "b": (1.0, float),
        "periods": (2.0, float),
        "steps": (400, int),
        "seed": (0, int),
        "state": ("1,0,0,1", str),
    },
)
_register(
    "figure1",
    cmd_figure1,
    {
        "lam": (0.1, float),
        "seeds": (9, int),
        "arc": (2.0, float),
        "steps": (160, int),
    },
)
_register(
    "quantize-demo",
    cmd_quantize_demo,
    {
        "n": (64, int),
        "hbar": (1.0, float),
        "lam": (0.1, float),
        "b": (1.0, float),
        "seed": (0, int),
    },
)
_register(
    "moyal-sweep",
    cmd_moyal_sweep,
    {
        "hbar_min": (1e-3, float),
        "hbar_max": (1e-1, float),
        "points": (9, int),
        "lam": (0.1, float),
    },
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linchart",
        description="chart-imported linear structures: reports and curve data",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name, (_, casts) in COMMANDS.items():
        sub = subs.add_parser(name)
        _add_common(sub)
        for key, (default, cast) in casts.items():
            flag = "--" + key.replace("_", "-")
            if key == "lam":
                sub.add_argument("--lambda", dest="lam", type=cast, default=None)
            elif cast is str and key == "lagrangian":
                sub.add_argument(
                    flag,
                    choices=("standard", "magnetic-symmetric", "magnetic-general"),
                    default=None,
                )
            else:
                sub.add_argument(flag, dest=key, type=cast, default=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    runner, casts = COMMANDS[args.command]
    try:
        params = _merge_params(args, casts)
        if args.command == "structure-check" and params["name"] is None:
            raise UsageError("structure-check needs --name")
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        config = RunConfig(
            command=args.command, params=params, out_dir=out_dir, fmt=args.format
        )
        return runner(config)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

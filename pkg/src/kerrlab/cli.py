"""Command-line front end: config ingestion, subcommand dispatch, reports.

Contract:
  * one subcommand per invocation; JSON config file via --config, individual
    flags override file values, unknown config keys are rejected;
  * exit 0 when every checked invariant passes, 1 when a numeric invariant
    is violated (the report lists which residual, its value and tolerance),
    2 for input errors (bad flags, bad config, out-of-domain parameters);
  * all artifacts are written atomically (temp file + rename); CSV uses '.'
    decimals, '\\n' line endings and a mandatory header row; JSON reports
    embed the fully resolved config and the code version, never timestamps,
    so identical configs produce byte-identical reports.

The --threads flag (fallback: env var BHL_THREADS, default 1) caps internal
parallelism; it is recorded in every report because it is part of the
determinism contract.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import (CalibrationError, ChartMismatchError, DomainError,
                     GuardBandError, StabilityError)

# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def _write_atomic(path, text):
    path = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), prefix=".kerrlab-tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _finite(x):
    """Make a value JSON-serializable, mapping non-finite floats to strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, complex):
        return {"re": _finite(x.real), "im": _finite(x.imag)}
    if isinstance(x, (np.floating, np.integer)):
        return _finite(x.item())
    if isinstance(x, np.ndarray):
        return [_finite(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    return x


def _bool(text):
    if isinstance(text, bool):
        return text
    if str(text).lower() in ("1", "true", "yes"):
        return True
    if str(text).lower() in ("0", "false", "no"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


# Each subcommand: ordered {key: (caster, default, help)}.  None defaults are
# filled by the handler; tolerances must be positive.
SCHEMAS = {
    "kerr-check": {
        "m": (float, 1.0, "black-hole mass"),
        "a": (float, 0.5, "specific angular momentum"),
        "n_points": (int, 50, "number of random exterior sample points"),
        "seed": (int, 1, "RNG seed"),
        "tol": (float, 1e-8, "residual tolerance"),
        "fd_step": (float, 1e-3, "finite-difference step for the FD variants"),
        "order_min": (float, 1.9, "minimum FD convergence order"),
    },
    "geodesic": {
        "m": (float, 1.0, "black-hole mass"),
        "a": (float, 0.5, "specific angular momentum"),
        "r0": (float, 8.0, "initial Boyer-Lindquist radius"),
        "theta0": (float, math.pi / 2, "initial polar angle"),
        "phi0": (float, 0.0, "initial azimuth"),
        "ur0": (float, 0.0, "initial u^r"),
        "utheta0": (float, 0.02, "initial u^theta"),
        "uphi0": (float, 0.03, "initial u^phi"),
        "causal": (str, "timelike", "timelike or null"),
        "t_max": (float, 200.0, "coordinate-time horizon"),
        "tol": (float, 1e-13, "integrator tolerance"),
        "n_samples": (int, 200, "number of output samples"),
        "drift_tol": (float, 1e-9, "max relative drift of conserved quantities"),
        "csv": (str, None, "optional trajectory CSV path"),
    },
    "wave-evolve": {
        "m": (float, 1.0, "black-hole mass"),
        "a": (float, 0.5, "specific angular momentum"),
        "m_phi": (int, 0, "azimuthal mode number"),
        "n_r": (int, 260, "radial grid points"),
        "n_theta": (int, 32, "polar grid points"),
        "rstar_min": (float, -25.0, "tortoise-coordinate lower edge"),
        "rstar_max": (float, 40.0, "tortoise-coordinate upper edge"),
        "family": (str, "gaussian-static", "initial-data family"),
        "center": (float, 0.0, "pulse center in r*"),
        "width": (float, 3.0, "pulse width in r*"),
        "t_end": (float, 20.0, "final time"),
        "cfl": (float, 0.5, "CFL fraction"),
        "report_dt": (float, None, "report cadence (default t_end / 8)"),
        "csv": (str, None, "optional energy-series CSV path"),
    },
    "morawetz": {
        "m": (float, 1.0, "black-hole mass"),
        "a": (float, 0.1, "specific angular momentum"),
        "m_phi": (int, 0, "azimuthal mode number"),
        "n_r": (int, 200, "coarse radial grid points (fine run doubles this)"),
        "n_theta": (int, 16, "coarse polar grid points (fine run doubles this)"),
        "rstar_min": (float, -40.0, "tortoise-coordinate lower edge"),
        "rstar_max": (float, 80.0, "tortoise-coordinate upper edge"),
        "family": (str, "gaussian-static", "initial-data family"),
        "center": (float, 10.0, "pulse center in r*"),
        "width": (float, 4.0, "pulse width in r*"),
        "t_end": (float, 30.0, "final time"),
        "cfl": (float, 0.5, "CFL fraction"),
        "report_dt": (float, None, "report cadence (default t_end / 8)"),
        "stability_tol": (float, 0.10, "allowed ratio drift between grids"),
        "csv": (str, None, "optional coarse-run energy-series CSV path"),
    },
    "maxwell-currents": {
        "m": (float, 1.0, "black-hole mass"),
        "a": (float, 0.5, "specific angular momentum"),
        "field": (str, "uniform", "test field: coulomb or uniform"),
        "strength": (float, 1.0, "field charge / amplitude"),
        "n_points": (int, 5, "number of random exterior sample points"),
        "seed": (int, 2, "RNG seed"),
        "step": (float, 1e-3, "finite-difference step"),
        "tol": (float, 1e-5, "divergence-residual tolerance"),
        "order_min": (float, 1.5, "minimum convergence order under step halving"),
    },
    "green": {
        "T": (float, 1.5, "time extent"),
        "n_x": (int, 256, "spatial points on the circle"),
        "cfl": (float, 0.85, "CFL number (must stay below 0.9)"),
        "potential": (float, 0.0, "amplitude of a smooth confining potential"),
        "tol": (float, 1e-8, "residual tolerance for the operator clauses"),
    },
    "goursat": {
        "extent": (float, 1.0, "null-rectangle edge length"),
        "n": (int, 64, "null cells per edge (order check doubles this)"),
        "data": (str, "trig", "test data: linear (exact) or trig"),
        "tol": (float, 1e-12, "exactness tolerance for the linear data"),
        "order_min": (float, 1.8, "minimum observed order (trig data)"),
        "order_max": (float, 2.2, "maximum observed order (trig data)"),
    },
    "dirac": {
        "T": (float, 1.0, "time extent"),
        "n_x": (int, 64, "spatial points (order check doubles this)"),
        "cfl": (float, 0.8, "CFL number"),
        "twist_a0": (float, 0.3, "constant part of the connection a(t)"),
        "twist_a1": (float, 0.2, "oscillating part of the connection a(t)"),
        "order_min": (float, 1.8, "minimum squaring-vs-direct order"),
        "order_max": (float, 2.2, "maximum squaring-vs-direct order"),
    },
    "index": {
        "T": (float, 10.0, "cylinder time extent"),
        "kmax": (int, None, "mode cutoff (default: automatic from endpoints)"),
        "profile": (str, "ramp:0.3:1.3",
                    "'ramp:a0:a1' or a JSON file with sampled {t: [...], a: [...]}"),
        "collar": (_bool, True, "require a constant collar at both ends"),
    },
}

TOLERANCE_KEYS = ("tol", "drift_tol", "stability_tol", "order_min", "order_max",
                  "fd_step", "step")


def parse_config(argv):
    """Resolve (subcommand, config dict) from argv plus an optional JSON file.

    Flags override file values; unknown config-file keys are rejected.
    """
    parser = argparse.ArgumentParser(
        prog="kerrlab",
        description="Kerr hidden-symmetry and hyperbolic-theory numerics",
    )
    parser.add_argument("--version", action="version", version=f"kerrlab {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)
    for name, schema in SCHEMAS.items():
        sp = subs.add_parser(name)
        sp.add_argument("--config", type=str, default=None,
                        help="JSON config file (flags override its values)")
        sp.add_argument("--out", type=str, default=None,
                        help="JSON report path (default: stdout)")
        sp.add_argument("--threads", type=int, default=None,
                        help="parallelism cap (fallback: BHL_THREADS, then 1)")
        for key, (caster, _default, help_text) in schema.items():
            sp.add_argument(f"--{key.replace('_', '-')}", dest=key, type=caster,
                            default=None, help=help_text)

    ns = parser.parse_args(argv)
    schema = SCHEMAS[ns.subcommand]
    cfg = {key: default for key, (_c, default, _h) in schema.items()}

    if ns.config is not None:
        try:
            with open(ns.config, "r") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise DomainError(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            raise DomainError(f"config file is not valid JSON: {exc}")
        if not isinstance(file_cfg, dict):
            raise DomainError("config file must contain a JSON object")
        allowed = set(schema) | {"out", "threads"}
        unknown = sorted(set(file_cfg) - allowed)
        if unknown:
            raise DomainError(f"unknown config keys: {', '.join(unknown)}")
        for key, value in file_cfg.items():
            if key in schema and value is not None:
                cfg[key] = schema[key][0](value)
            elif key in ("out", "threads"):
                cfg[key] = value

    for key in schema:
        flag_value = getattr(ns, key)
        if flag_value is not None:
            cfg[key] = flag_value

    out = ns.out if ns.out is not None else cfg.get("out")
    threads = ns.threads if ns.threads is not None else cfg.get("threads")
    if threads is None:
        threads = int(os.environ.get("BHL_THREADS", "1"))
    if threads < 1:
        raise DomainError("thread count must be at least 1")
    cfg["out"] = out
    cfg["threads"] = int(threads)

    for key in TOLERANCE_KEYS:
        if key in cfg and cfg[key] is not None and cfg[key] <= 0:
            raise DomainError(f"{key} must be positive")
    return ns.subcommand, cfg


# ---------------------------------------------------------------------------
# subcommand handlers: each returns (results dict, failures list, csv or None)
# ---------------------------------------------------------------------------


def _order(coarse, fine):
    if fine <= 0.0:
        return float("inf")
    return math.log2(coarse / fine)


def _run_kerr_check(cfg):
    from .kerr import (KerrParams, conformal_ky_residual, killing_tensor_residual,
                       killing_tensor_residual_fd, killing_yano_residual,
                       killing_yano_residual_fd, random_exterior_points,
                       tetrad_reconstruction_residual, xi_oneform, kerr_metric)

    params = KerrParams(m=cfg["m"], a=cfg["a"])
    rng = np.random.default_rng(cfg["seed"])
    points = random_exterior_points(params, cfg["n_points"], rng)
    res = {"ky": [], "conformal_ky": [], "killing_tensor": [], "tetrad": [], "xi": []}
    for p in points:
        res["ky"].append(killing_yano_residual(params, p))
        res["conformal_ky"].append(conformal_ky_residual(params, p))
        res["killing_tensor"].append(killing_tensor_residual(params, p))
        res["tetrad"].append(tetrad_reconstruction_residual(params, p))
        ginv = kerr_metric(params, p).g_inv.components
        xi_up = ginv @ xi_oneform(params, p).components
        res["xi"].append(float(np.max(np.abs(xi_up - np.array([1, 0, 0, 0])))))

    h = cfg["fd_step"]
    orders = {"ky_fd": [], "killing_tensor_fd": []}
    for p in points[:3]:
        orders["ky_fd"].append(_order(killing_yano_residual_fd(params, p, 2 * h),
                                      killing_yano_residual_fd(params, p, h)))
        orders["killing_tensor_fd"].append(
            _order(killing_tensor_residual_fd(params, p, 2 * h),
                   killing_tensor_residual_fd(params, p, h)))

    failures = []
    maxima = {k: float(np.max(v)) for k, v in res.items()}
    for name, value in maxima.items():
        if value > cfg["tol"]:
            failures.append({"check": f"{name}_residual", "value": value,
                             "tolerance": cfg["tol"]})
    for name, vals in orders.items():
        worst = float(np.min(vals))
        if worst < cfg["order_min"]:
            failures.append({"check": f"{name}_order", "value": worst,
                             "tolerance": cfg["order_min"]})
    results = {"max_residuals": maxima, "observed_orders": orders,
               "n_points": len(points)}
    return results, failures, None


def _run_geodesic(cfg):
    from .geodesics import (conserved_drift, conserved_quantities,
                            integrate_geodesic, normalize_velocity)
    from .kerr import BLPoint, KerrParams, _eval, _forms

    params = KerrParams(m=cfg["m"], a=cfg["a"])
    if cfg["causal"] not in ("timelike", "null"):
        raise DomainError("causal must be 'timelike' or 'null'")
    p0 = BLPoint(0.0, cfg["r0"], cfg["theta0"], cfg["phi0"], params)
    s0 = normalize_velocity(params, p0, (cfg["ur0"], cfg["utheta0"], cfg["uphi0"]),
                            causal_type=cfg["causal"])
    traj = integrate_geodesic(params, s0, cfg["t_max"], tol=cfg["tol"],
                              n_samples=cfg["n_samples"])

    # per-sample conserved quantities from the closed forms directly (the
    # integrator's O(tol) norm drift must show up in the CSV, not abort it)
    g_f, K_f = _forms()["g"], _forms()["K"]
    rows = []
    for i in range(len(traj.tau)):
        x, u = traj.x[i], traj.u[i]
        g = np.array(g_f(params.m, params.a, x[1], x[2]), dtype=float)
        K = np.array(K_f(params.m, params.a, x[1], x[2]), dtype=float)
        gu = g @ u
        rows.append((float(traj.tau[i]), *map(float, x), *map(float, u),
                     float(-gu[0]), float(gu[3]), float(u @ K @ u),
                     float(u @ gu)))
    header = ["tau", "t", "r", "theta", "phi", "ut", "ur", "utheta", "uphi",
              "e", "lz", "k", "norm"]

    drifts = conserved_drift(params, traj, cfg["causal"])
    names = ("e", "lz", "k", "norm")
    failures = []
    for name, d in zip(names, drifts):
        if d > cfg["drift_tol"]:
            failures.append({"check": f"{name}_drift", "value": float(d),
                             "tolerance": cfg["drift_tol"]})
    results = {"drifts": dict(zip(names, map(float, drifts))),
               "plunged": traj.plunged,
               "initial_conserved": conserved_quantities(params, s0).__dict__,
               "samples": len(rows)}
    return results, failures, (header, rows)


def _wave_setup(cfg, n_r, n_theta):
    from .kerr import KerrParams
    from .waves import ModeField2p1, WaveGrid, initial_data

    params = KerrParams(m=cfg["m"], a=cfg["a"])
    grid = WaveGrid(params=params, m_phi=cfg["m_phi"], n_r=n_r, n_theta=n_theta,
                    rstar_min=cfg["rstar_min"], rstar_max=cfg["rstar_max"])
    psi, psi_t = initial_data(grid, family=cfg["family"], center=cfg["center"],
                              width=cfg["width"])
    return grid, ModeField2p1(grid=grid, psi=psi, psi_t=psi_t)


def _wave_dt(grid, cfg):
    dt = cfg["cfl"] * 2.0 / math.sqrt(grid.max_wave_speed_sq())
    n_steps = max(int(math.ceil(cfg["t_end"] / dt)), 5)
    return cfg["t_end"] / n_steps


def _energy_rows(reports, dt):
    rows = []
    for rep in reports:
        rows.append((int(round(rep.time / dt)), rep.time, rep.e_model3,
                     rep.bulk_increment, rep.bulk_cumulative, rep.ratio))
    return ["step", "time", "e_model3", "bulk_increment", "bulk_cumulative",
            "ratio"], rows


def _run_wave_evolve(cfg):
    from .waves import evolve

    grid, field = _wave_setup(cfg, cfg["n_r"], cfg["n_theta"])
    dt = _wave_dt(grid, cfg)
    final, reports = evolve(field, t_end=cfg["t_end"], cfl=cfg["cfl"],
                            report_dt=cfg["report_dt"])
    header, rows = _energy_rows(reports, dt)
    results = {
        "dt": dt,
        "final_time": final.time,
        "e_model3_initial": reports[0].e_model3,
        "e_model3_final": reports[-1].e_model3,
        "bulk_cumulative_final": reports[-1].bulk_cumulative,
        "ratio_final": reports[-1].ratio,
        "series": [list(r) for r in rows],
    }
    return results, [], (header, rows)


def _run_morawetz(cfg):
    from .waves import evolve

    ratios = {}
    series = None
    for label, factor in (("coarse", 1), ("fine", 2)):
        run_cfg = dict(cfg)
        grid, field = _wave_setup(run_cfg, cfg["n_r"] * factor,
                                  cfg["n_theta"] * factor)
        dt = _wave_dt(grid, run_cfg)
        _, reports = evolve(field, t_end=cfg["t_end"], cfl=cfg["cfl"],
                            report_dt=cfg["report_dt"])
        ratios[label] = reports[-1].ratio
        if label == "coarse":
            series = _energy_rows(reports, dt)

    # data-scaling invariance: the ratio is a quotient of quadratic
    # functionals, so rescaling the data must leave it unchanged exactly
    scaled_cfg = dict(cfg)
    grid, field = _wave_setup(scaled_cfg, cfg["n_r"], cfg["n_theta"])
    from .waves import ModeField2p1
    field3 = ModeField2p1(grid=grid, psi=3.0 * field.psi, psi_t=3.0 * field.psi_t)
    _, reports3 = evolve(field3, t_end=cfg["t_end"], cfl=cfg["cfl"],
                         report_dt=cfg["report_dt"])
    scale_dev = abs(reports3[-1].ratio - ratios["coarse"]) / max(ratios["coarse"], 1e-300)

    drift = abs(ratios["fine"] - ratios["coarse"]) / max(abs(ratios["coarse"]), 1e-300)
    failures = []
    if drift > cfg["stability_tol"]:
        failures.append({"check": "ratio_grid_drift", "value": drift,
                         "tolerance": cfg["stability_tol"]})
    if scale_dev > 1e-12:
        failures.append({"check": "ratio_scaling_invariance", "value": scale_dev,
                         "tolerance": 1e-12})
    results = {"ratio_coarse": ratios["coarse"], "ratio_fine": ratios["fine"],
               "ratio_grid_drift": drift, "ratio_scaling_deviation": scale_dev}
    return results, failures, series


def _run_maxwell_currents(cfg):
    from .kerr import KerrParams, principal_tetrad, random_exterior_points
    from .maxwell import (V_tensor, coulomb_field, dominant_energy_value,
                          maxwell_divergence_residual, np_scalars, uniform_field)

    params = KerrParams(m=cfg["m"], a=cfg["a"])
    if cfg["field"] == "coulomb":
        from .maxwell import _coulomb_F as F_raw
        make = lambda p: coulomb_field(params, cfg["strength"], p)
    elif cfg["field"] == "uniform":
        from .maxwell import _uniform_F as F_raw
        make = lambda p: uniform_field(params, cfg["strength"], p)
    else:
        raise DomainError("field must be 'coulomb' or 'uniform'")
    from .tensors import DOWN, TensorValue
    F_field = lambda coords: TensorValue(
        (DOWN, DOWN), cfg["strength"] * F_raw(params, coords).components)

    rng = np.random.default_rng(cfg["seed"])
    points = random_exterior_points(params, cfg["n_points"], rng)
    step = cfg["step"]
    per_point, failures = [], []
    for i, p in enumerate(points):
        sample = make(p)
        tetrad = principal_tetrad(params, p)
        phi0, phi1, phi2, upsilon = np_scalars(sample, tetrad)
        rep = V_tensor(params, F_field, p, step=step)
        rep2 = V_tensor(params, F_field, p, step=2 * step)
        order = _order(rep2.div_V_residual, rep.div_V_residual)
        maxwell_res = maxwell_divergence_residual(params, F_field, p, step=step)
        # future unit timelike vector along d_t for the leading-part check
        from .kerr import _eval
        g = _eval("g", params, p).real
        v = np.array([1.0, 0.0, 0.0, 0.0]) / math.sqrt(-g[0, 0])
        energy = dominant_energy_value(params, rep.eta, p, v, v)
        per_point.append({
            "point": list(map(float, p.coords)),
            "maxwell_residual": maxwell_res,
            "np_scalars": {"phi0": phi0, "phi1": phi1, "phi2": phi2,
                           "upsilon": upsilon},
            "Z_max": float(np.max(np.abs(rep.Z.components))),
            "eta": rep.eta.components,
            "div_V_residual": rep.div_V_residual,
            "div_V_order": order,
            "leading_energy_density": energy,
        })
        if rep.div_V_residual > cfg["tol"]:
            failures.append({"check": f"div_V_residual[{i}]",
                             "value": rep.div_V_residual, "tolerance": cfg["tol"]})
        if order < cfg["order_min"]:
            failures.append({"check": f"div_V_order[{i}]", "value": order,
                             "tolerance": cfg["order_min"]})
        if energy < -1e-12:
            failures.append({"check": f"leading_energy_density[{i}]",
                             "value": energy, "tolerance": -1e-12})
    results = {
        "per_point": per_point,
        "max_div_V_residual": float(max(pp["div_V_residual"] for pp in per_point)),
        "observed_orders": {"div_V": [pp["div_V_order"] for pp in per_point]},
    }
    return results, failures, None


def _space_bump(x, center, radius):
    """C^infinity bump on the circle, supported in |x - center| < radius."""
    d = np.angle(np.exp(1j * (x - center)))
    s = np.clip(np.abs(d) / radius, 0.0, 1.0)
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def _run_green(cfg):
    from .hyperbolic1d import Grid1p1, green_clause_residuals, sample

    h_x = 2.0 * math.pi / cfg["n_x"]
    n_t = int(math.ceil(cfg["T"] / (cfg["cfl"] * h_x)))
    grid = Grid1p1(T=cfg["T"], n_x=cfg["n_x"], n_t=n_t)

    def source(t, x):
        t_c, t_r = 0.5 * cfg["T"], 0.18 * cfg["T"]
        s = np.clip(np.abs(t - t_c) / t_r, 0.0, 1.0)
        env = np.where(s < 1.0, np.exp(1.0 - 1.0 / (1.0 - np.minimum(s, 0.999999) ** 2)), 0.0)
        return env * _space_bump(x, math.pi, 0.5)

    f = sample(grid, source)
    residuals = green_clause_residuals(grid, f)
    potential = cfg["potential"]
    if potential != 0.0:
        pot = lambda x: potential * (1.0 + np.cos(x))
        residuals_v = green_clause_residuals(grid, f, potential=pot)
    else:
        residuals_v = None

    failures = []
    for name, value in residuals.items():
        if name.startswith("support_"):
            if value > 0.0:
                failures.append({"check": name, "value": value, "tolerance": 0.0})
        elif value > cfg["tol"]:
            failures.append({"check": name, "value": value, "tolerance": cfg["tol"]})
    results = {"clause_residuals": residuals, "n_t": n_t,
               "clause_residuals_with_potential": residuals_v}
    return results, failures, None


def _run_goursat(cfg):
    from .hyperbolic1d import goursat_solve

    failures = []
    if cfg["data"] == "linear":
        field = goursat_solve(lambda u: u, lambda v: v, cfg["extent"], cfg["n"])
        exact = field.uu[:, None] + field.vv[None, :]
        err = float(np.max(np.abs(field.phi - exact)))
        if err > cfg["tol"]:
            failures.append({"check": "linear_exactness", "value": err,
                             "tolerance": cfg["tol"]})
        results = {"max_error": err, "observed_orders": {}}
    elif cfg["data"] == "trig":
        # phi = sin(u) sin(v): d_u d_v phi = cos(u) cos(v), so the wave
        # source is f = 4 cos(t - x) cos(t + x); vanishing null-ray data
        f = lambda t, x: 4.0 * math.cos(t - x) * math.cos(t + x)
        errs = []
        for n in (cfg["n"], 2 * cfg["n"]):
            field = goursat_solve(lambda u: 0.0, lambda v: 0.0, cfg["extent"], n, f=f)
            exact = np.sin(field.uu[:, None]) * np.sin(field.vv[None, :])
            errs.append(float(np.max(np.abs(field.phi - exact))))
        order = _order(errs[0], errs[1])
        if not (cfg["order_min"] <= order <= cfg["order_max"]):
            failures.append({"check": "goursat_order", "value": order,
                             "tolerance": [cfg["order_min"], cfg["order_max"]]})
        results = {"errors": errs, "observed_orders": {"goursat": order}}
    else:
        raise DomainError("data must be 'linear' or 'trig'")
    return results, failures, None


def _run_dirac(cfg):
    from .hyperbolic1d import DiracData1p1, Grid1p1, dirac_solve_by_squaring, dirac_solve_direct

    a0, a1 = cfg["twist_a0"], cfg["twist_a1"]
    twist = (lambda t: a0 + a1 * math.sin(t)) if (a0 or a1) else None
    errs = []
    for n_x in (cfg["n_x"], 2 * cfg["n_x"]):
        h_x = 2.0 * math.pi / n_x
        n_t = int(math.ceil(cfg["T"] / (cfg["cfl"] * h_x)))
        grid = Grid1p1(T=cfg["T"], n_x=n_x, n_t=n_t)
        u0 = np.array([np.sin(grid.x), np.cos(2.0 * grid.x)], dtype=complex)
        source = lambda t, x: np.array([np.cos(x + t), 0.2 * np.sin(2 * x - t)])
        data = DiracData1p1(u0=u0, f=source, connection=twist)
        u_sq = dirac_solve_by_squaring(data, grid)
        u_dir = dirac_solve_direct(data, grid)
        errs.append(float(np.max(np.abs(u_sq - u_dir))))
    order = _order(errs[0], errs[1])
    failures = []
    if not (cfg["order_min"] <= order <= cfg["order_max"]):
        failures.append({"check": "dirac_squaring_order", "value": order,
                         "tolerance": [cfg["order_min"], cfg["order_max"]]})
    results = {"errors": errs, "observed_orders": {"dirac_squaring": order}}
    return results, failures, None


def _load_profile(cfg):
    from .index2d import ConnectionProfile, ramp_profile

    spec = cfg["profile"]
    T = cfg["T"]
    if spec.startswith("ramp:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise DomainError("ramp profile must be 'ramp:a0:a1'")
        try:
            a0, a1 = float(parts[1]), float(parts[2])
        except ValueError:
            raise DomainError("ramp endpoints must be numbers")
        return ramp_profile(a0, a1, T)
    try:
        with open(spec, "r") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read profile file: {exc}")
    except json.JSONDecodeError as exc:
        raise DomainError(f"profile file is not valid JSON: {exc}")
    if not isinstance(data, dict) or "t" not in data or "a" not in data:
        raise DomainError("profile file must contain 't' and 'a' arrays")
    ts = np.asarray(data["t"], dtype=float)
    avals = np.asarray(data["a"], dtype=float)
    if ts.shape != avals.shape or ts.ndim != 1 or ts.size < 2:
        raise DomainError("profile arrays must be equal-length 1D with >= 2 samples")
    if not np.all(np.diff(ts) > 0):
        raise DomainError("profile times must be strictly increasing")
    return ConnectionProfile(a=lambda t: float(np.interp(t, ts, avals)), T=T,
                             collar=cfg["collar"])


def _run_index(cfg):
    from .index2d import charge_report

    profile = _load_profile(cfg)
    failures = []
    try:
        report = charge_report(profile, k_max=cfg["kmax"])
    except ValueError as exc:
        # IndexReport construction rejects any violated index-theorem
        # invariant; surface it as a numeric failure, not an input error
        return {"report": None}, [{"check": "index_theorem", "value": str(exc),
                                   "tolerance": 0}], None
    return {"report": report.as_dict()}, failures, None


HANDLERS = {
    "kerr-check": _run_kerr_check,
    "geodesic": _run_geodesic,
    "wave-evolve": _run_wave_evolve,
    "morawetz": _run_morawetz,
    "maxwell-currents": _run_maxwell_currents,
    "green": _run_green,
    "goursat": _run_goursat,
    "dirac": _run_dirac,
    "index": _run_index,
}


def run(subcommand, cfg):
    """Execute a resolved config; returns the process exit code."""
    results, failures, csv_payload = HANDLERS[subcommand](cfg)
    report = {
        "version": __version__,
        "subcommand": subcommand,
        "config": {k: v for k, v in cfg.items()},
        "results": _finite(results),
        "failures": _finite(failures),
        "passed": not failures,
    }
    text = _json_text(report)
    if cfg.get("out"):
        _write_atomic(cfg["out"], text)
    else:
        sys.stdout.write(text)
    if csv_payload is not None and cfg.get("csv"):
        header, rows = csv_payload
        _write_atomic(cfg["csv"], _csv_text(header, rows))
    return 0 if not failures else 1


def main(argv=None):
    try:
        subcommand, cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return run(subcommand, cfg)
    except (DomainError, ChartMismatchError, GuardBandError) as exc:
        print(f"kerrlab: input error: {exc}", file=sys.stderr)
        return 2
    except (StabilityError, CalibrationError) as exc:
        print(f"kerrlab: invariant violation: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: constants | profile | asymptotics | spectrum | scan | reduced
| evolve.  Every subcommand honors ``--config FILE`` ("key = value" lines,
``#`` comments); explicitly passed flags override file values.  The effective
configuration is echoed under "config" in every JSON output.  CSV-emitting
subcommands render a companion PNG figure next to the CSV unless --no-plot
is given.

Exit codes: 0 ok, 2 usage/parameter error, 3 numerical failure,
4 outside the method's validity range.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import asymptotics as asym
from . import evolution as ev
from . import reports
from . import spectral as sv
from .errors import (InvalidParameter, NumericalFailure, OutOfValidityRange,
                     VortexLabError)
from .operators import RadialGrid, default_radial_grid
from .profile_solver import profile_to_json, solve
from .soliton1d import balance_constants

_CONVERTERS = {
    "p": float, "omega": float, "m": int, "j": int, "k": int,
    "delta": float, "n": int, "r_max": float, "tol": float,
    "T": float, "dt": float, "seed": int, "workers": int,
    "m_list": str, "j_range": str, "init": str, "init_file": str,
    "out": str, "cache_dir": str, "no_plot": lambda s: s.lower() in ("1", "true", "yes"),
}

_DEFAULTS = {
    "k": 6, "tol": 1e-10, "T": 20.0, "dt": 0.05, "seed": 0,
    "init": "random", "no_plot": False, "workers": None,
}


def _load_config(path: str) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParameter(f"{path}:{lineno}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def _effective(args: argparse.Namespace, keys: list[str]) -> dict:
    """Merge built-in defaults, config-file values, and explicit flags."""
    cfg_file = {}
    if getattr(args, "config", None):
        cfg_file = _load_config(args.config)
    eff = {}
    for key in keys:
        val = getattr(args, key, None)
        if val is None and key in cfg_file:
            try:
                val = _CONVERTERS[key](cfg_file[key])
            except ValueError as exc:
                raise InvalidParameter(f"config value for {key!r}: {exc}") from exc
        if val is None:
            val = _DEFAULTS.get(key)
        eff[key] = val
    return eff


def _require(eff: dict, keys: list[str]) -> None:
    missing = [k for k in keys if eff.get(k) is None]
    if missing:
        raise InvalidParameter("missing required option(s): "
                               + ", ".join("--" + k.replace("_", "-") for k in missing))


def _config_echo(eff: dict) -> dict:
    return {k: v for k, v in eff.items() if v is not None or k in _DEFAULTS}


def _parse_int_list(text: str) -> list[int]:
    """Comma list '8,16,32' or range 'a:b' / 'a:b:step' (inclusive)."""
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) == 2:
                lo, hi, step = parts[0], parts[1], 1
            elif len(parts) == 3:
                lo, hi, step = parts
            else:
                raise InvalidParameter(f"bad range {text!r}")
            if step <= 0 or hi < lo:
                raise InvalidParameter(f"bad range {text!r}")
            return list(range(lo, hi + 1, step))
        return [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise InvalidParameter(f"bad integer list {text!r}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        reports.write_text(out, text)
    else:
        sys.stdout.write(text)


def _make_grid(params, m: int, guard_index: int, n, r_max) -> RadialGrid:
    if n is None and r_max is None:
        return default_radial_grid(params, m, guard_index=guard_index)
    if n is not None and r_max is not None:
        return RadialGrid(r_max=r_max, n=n)
    if n is not None:
        target = params.rbar(m) + 40.0 / math.sqrt(params.omega)
        return RadialGrid(r_max=target, n=n)
    ref = default_radial_grid(params, m, guard_index=guard_index)
    n_new = math.ceil(r_max / ref.h) - 1
    return RadialGrid(r_max=(n_new + 1) * ref.h, n=n_new)


# --- subcommands ---------------------------------------------------------------

def _cmd_constants(args) -> int:
    eff = _effective(args, ["p", "omega", "out"])
    _require(eff, ["p", "omega"])
    pm = balance_constants(eff["p"], eff["omega"])
    doc = {
        "schema": "vortexlab-constants-v1",
        "p": pm.p, "omega": pm.omega, "c": pm.c, "alpha0": pm.alpha0,
        "A": pm.A, "lambda0": pm.lambda0, "gamma": pm.gamma,
        "beta_exp": pm.beta_exp,
        "config": _config_echo(eff),
    }
    _emit(reports.dumps17(doc) + "\n", eff["out"])
    return 0


def _solve_profile(eff, guard_extra: int = 0):
    pm = balance_constants(eff["p"], eff["omega"])
    grid = _make_grid(pm, eff["m"], eff["m"] + guard_extra,
                      eff.get("n"), eff.get("r_max"))
    return solve(eff["p"], eff["omega"], eff["m"], grid, tol=eff["tol"],
                 cache_dir=eff.get("cache_dir"))


def _cmd_profile(args) -> int:
    keys = ["p", "omega", "m", "n", "r_max", "tol", "out", "cache_dir"]
    eff = _effective(args, keys)
    _require(eff, ["p", "omega", "m"])
    prof = _solve_profile(eff)
    if eff["out"]:
        reports.write_text(eff["out"], profile_to_json(prof))
    doc = {
        "schema": "vortexlab-profile-summary-v1",
        "p": prof.p, "omega": prof.omega, "m": prof.m,
        "grid": {"r_max": prof.grid.r_max, "n": prof.grid.n},
        "converged": prof.converged,
        "residual_norm": prof.residual_norm,
        "peak_radius": prof.peak_radius,
        "peak_value": prof.peak_value,
        "out": eff["out"],
        "config": _config_echo(eff),
    }
    sys.stdout.write(reports.dumps17(doc) + "\n")
    return 0


def _cmd_asymptotics(args) -> int:
    keys = ["p", "omega", "m_list", "tol", "out", "no_plot", "workers", "cache_dir"]
    eff = _effective(args, keys)
    _require(eff, ["p", "omega", "m_list"])
    ms = _parse_int_list(eff["m_list"])
    if not ms:
        raise InvalidParameter("empty m list")
    table = asym.errors_table(eff["p"], eff["omega"], ms, tol=eff["tol"],
                              cache_dir=eff.get("cache_dir"), workers=eff["workers"])
    csv = reports.csv_text(["m", "h2_err", "linf_err", "peak_offset"],
                           [(r.m, r.h2_err, r.linf_err, r.peak_offset) for r in table])
    fit = asym.rate_fit_from_table(table) if len(ms) >= 3 else None
    doc = {
        "schema": "vortexlab-asymptotics-v1",
        "p": eff["p"], "omega": eff["omega"], "m_list": ms,
        "rate_h2": None if fit is None else fit.rate_h2,
        "rate_linf": None if fit is None else fit.rate_linf,
        "r2_h2": None if fit is None else fit.r2_h2,
        "r2_linf": None if fit is None else fit.r2_linf,
        "out": eff["out"],
        "config": _config_echo(eff),
    }
    if eff["out"]:
        reports.write_text(eff["out"], csv)
        if not eff["no_plot"]:
            reports.rate_figure(reports.figure_path(eff["out"]),
                                [r.m for r in table],
                                [r.h2_err for r in table],
                                [r.linf_err for r in table],
                                None if fit is None else fit.rate_h2,
                                None if fit is None else fit.rate_linf)
        sys.stdout.write(reports.dumps17(doc) + "\n")
    else:
        sys.stdout.write(csv)
        sys.stderr.write(reports.dumps17(doc) + "\n")
    return 0


def _spectrum_doc(rep, config: dict) -> dict:
    return {
        "schema": "vortexlab-spectrum-v1",
        "m": rep.m, "j": rep.j, "delta": rep.delta,
        "max_re": rep.max_re,
        "predicted": rep.predicted,
        "bracket_lo": None if rep.bracket is None else rep.bracket[0],
        "bracket_hi": None if rep.bracket is None else rep.bracket[1],
        "in_bracket": rep.in_bracket,
        "eigenvalues": [
            {"re": float(lam.real), "im": float(lam.imag), "residual": float(res)}
            for lam, res in zip(rep.eigenvalues, rep.residuals)
        ],
        "config": config,
    }


def _cmd_spectrum(args) -> int:
    keys = ["p", "omega", "m", "j", "k", "n", "r_max", "tol", "out", "cache_dir"]
    eff = _effective(args, keys)
    _require(eff, ["p", "omega", "m", "j"])
    if abs(eff["j"]) >= eff["m"]:
        raise InvalidParameter(f"need |j| < m, got j={eff['j']}, m={eff['m']}")
    prof = _solve_profile(eff, guard_extra=abs(eff["j"]))
    rep = sv.sector_spectrum(prof, eff["j"], k_wanted=eff["k"])
    _emit(reports.dumps17(_spectrum_doc(rep, _config_echo(eff))) + "\n", eff["out"])
    return 0


def _cmd_scan(args) -> int:
    keys = ["p", "omega", "m", "j_range", "k", "n", "r_max", "tol", "out",
            "no_plot", "workers", "cache_dir"]
    eff = _effective(args, keys)
    _require(eff, ["p", "omega", "m", "j_range"])
    js = _parse_int_list(eff["j_range"])
    if not js:
        raise InvalidParameter("empty scan range")
    if max(abs(j) for j in js) >= eff["m"]:
        raise InvalidParameter("scan indices must satisfy |j| < m")
    prof = _solve_profile(eff, guard_extra=max(abs(j) for j in js))
    scan = sv.unstable_scan(prof, js, k_wanted=eff["k"], workers=eff["workers"])
    rows = [(eff["m"], r.j, r.delta, r.max_re, r.predicted,
             None if r.bracket is None else r.bracket[0],
             None if r.bracket is None else r.bracket[1],
             r.in_bracket) for r in scan.rows]
    csv = reports.csv_text(
        ["m", "j", "delta", "max_re", "predicted", "bracket_lo", "bracket_hi",
         "in_bracket"], rows)
    doc = {
        "schema": "vortexlab-scan-v1",
        "p": eff["p"], "omega": eff["omega"], "m": eff["m"],
        "j_star": scan.j_star,
        "flagged_max_re": next((r.max_re for r in scan.rows if r.flagged), None),
        "out": eff["out"],
        "config": _config_echo(eff),
    }
    if eff["out"]:
        reports.write_text(eff["out"], csv)
        if not eff["no_plot"]:
            reports.scan_figure(reports.figure_path(eff["out"]), scan.rows)
        sys.stdout.write(reports.dumps17(doc) + "\n")
    else:
        sys.stdout.write(csv)
        sys.stderr.write(reports.dumps17(doc) + "\n")
    return 0


def _cmd_reduced(args) -> int:
    keys = ["p", "omega", "delta", "out"]
    eff = _effective(args, keys)
    _require(eff, ["p", "omega", "delta"])
    pm = balance_constants(eff["p"], eff["omega"])
    model = sv.reduced_matrix(pm, eff["delta"])
    lams = sv.reduced_eigenvalues(model)
    dense = np.linalg.eigvals(model.matrix)
    dense = dense[sv.sort_by_growth(dense)]
    pred = sv.predicted_growth(pm, eff["delta"]) if eff["delta"] <= sv.DELTA_CEILING else None
    doc = {
        "schema": "vortexlab-reduced-v1",
        "p": eff["p"], "omega": eff["omega"], "delta": eff["delta"],
        "b1": model.b1, "b2": model.b2, "b3": model.b3, "b4": model.b4,
        "theta1": model.theta1, "theta2": model.theta2,
        "eigenvalues": [{"re": float(z.real), "im": float(z.imag)} for z in lams],
        "eigenvalues_dense": [{"re": float(z.real), "im": float(z.imag)} for z in dense],
        "max_re": float(lams.real.max()),
        "predicted": None if pred is None else pred.value,
        "config": _config_echo(eff),
    }
    _emit(reports.dumps17(doc) + "\n", eff["out"])
    return 0


def _load_state(path: str, n: int) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("schema") != "vortexlab-state-v1":
        raise InvalidParameter(f"unexpected state schema {obj.get('schema')!r}")
    w1 = np.asarray(obj["w1_re"], dtype=float) + 1j * np.asarray(obj["w1_im"], dtype=float)
    w2 = np.asarray(obj["w2_re"], dtype=float) + 1j * np.asarray(obj["w2_im"], dtype=float)
    if w1.shape != (n,) or w2.shape != (n,):
        raise InvalidParameter(f"state length does not match grid size {n}")
    return np.concatenate([w1, w2])


def _cmd_evolve(args) -> int:
    keys = ["p", "omega", "m", "j", "T", "dt", "init", "init_file", "seed",
            "n", "r_max", "tol", "out", "no_plot", "cache_dir"]
    eff = _effective(args, keys)
    _require(eff, ["p", "omega", "m", "j"])
    if eff["dt"] <= 0.0 or eff["T"] <= 0.0:
        raise InvalidParameter(f"need dt > 0 and T > 0, got dt={eff['dt']}, T={eff['T']}")
    if eff["init"] not in ("random", "eigenvector", "file"):
        raise InvalidParameter(f"unknown init mode {eff['init']!r}")
    prof = _solve_profile(eff, guard_extra=abs(eff["j"]))
    w0 = None
    if eff["init"] == "eigenvector":
        w0 = sv.dominant_eigenvector(prof, eff["j"])
    elif eff["init"] == "file":
        if not eff["init_file"]:
            raise InvalidParameter("--init file requires --init-file PATH")
        w0 = _load_state(eff["init_file"], prof.grid.n)
    traj = ev.evolve_linearized(prof, eff["j"], w0=w0, T=eff["T"], dt=eff["dt"],
                                seed=eff["seed"])
    fit = ev.fit_growth(traj, burn_in_fraction=0.3)
    csv = reports.csv_text(["t", "norm"], zip(traj.t, traj.norm))
    doc = {
        "schema": "vortexlab-evolve-v1",
        "p": eff["p"], "omega": eff["omega"], "m": eff["m"], "j": eff["j"],
        "rate": fit.rate, "r2": fit.r2,
        "out": eff["out"],
        "config": _config_echo(eff),
    }
    if eff["out"]:
        reports.write_text(eff["out"], csv)
        if not eff["no_plot"]:
            reports.trajectory_figure(reports.figure_path(eff["out"]), traj,
                                      fit.rate, 0.3)
        sys.stdout.write(reports.dumps17(doc) + "\n")
    else:
        sys.stdout.write(csv)
        sys.stderr.write(reports.dumps17(doc) + "\n")
    return 0


# --- parser --------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vortexlab",
        description="Spinning vortex solitons of the 2D focusing NLS: ring "
                    "profiles, asymptotics, and sector spectral stability.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, flags):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="key = value config file")
        for flag, conv, help_text in flags:
            dest = flag.replace("-", "_")
            if conv is bool:
                sp.add_argument(f"--{flag}", dest=dest, action="store_const",
                                const=True, default=None, help=help_text)
            else:
                sp.add_argument(f"--{flag}", dest=dest, type=conv, default=None,
                                help=help_text)
        sp.set_defaults(func=func)
        return sp

    common_grid = [
        ("n", int, "interior radial nodes (default: from resolution guard)"),
        ("r-max", float, "radial truncation (default: ring + 40/sqrt(omega))"),
        ("tol", float, "Newton residual tolerance (default 1e-10)"),
        ("cache-dir", str, "profile cache directory (default $VORTEXLAB_CACHE "
                           "or ./vortexlab-cache)"),
    ]
    pw = [("p", float, "nonlinearity exponent (> 1)"),
          ("omega", float, "frequency (> 0)")]

    add("constants", _cmd_constants, "print the balance constants as JSON",
        pw + [("out", str, "write JSON here instead of stdout")])
    add("profile", _cmd_profile, "solve a ring profile and write its JSON",
        pw + [("m", int, "spin index (>= 2)")] + common_grid
        + [("out", str, "write profile JSON here")])
    add("asymptotics", _cmd_asymptotics,
        "profile-vs-soliton error norms and convergence rates over m",
        pw + [("m-list", str, "spins, e.g. 8,16,32,64"),
              ("tol", float, "Newton residual tolerance"),
              ("workers", int, "parallel profile solves"),
              ("cache-dir", str, "profile cache directory"),
              ("out", str, "write CSV here (figure rendered alongside)"),
              ("no-plot", bool, "skip the companion figure")])
    add("spectrum", _cmd_spectrum, "sector eigenvalues of largest real part",
        pw + [("m", int, "spin index"), ("j", int, "perturbation index, |j| < m"),
              ("k", int, "eigenvalues to report (default 6)")] + common_grid
        + [("out", str, "write spectrum JSON here")])
    add("scan", _cmd_scan, "growth-rate scan over perturbation indices",
        pw + [("m", int, "spin index"),
              ("j-range", str, "indices, e.g. 1:12 or 1,2,4"),
              ("k", int, "eigenvalues per sector (default 6)"),
              ("workers", int, "parallel sector solves")] + common_grid
        + [("out", str, "write CSV here (figure rendered alongside)"),
           ("no-plot", bool, "skip the companion figure")])
    add("reduced", _cmd_reduced, "reduced 4x4 model and its eigenvalues",
        pw + [("delta", float, "scaled index j/m"),
              ("out", str, "write JSON here")])
    add("evolve", _cmd_evolve, "linearized sector evolution and growth fit",
        pw + [("m", int, "spin index"), ("j", int, "perturbation index"),
              ("T", float, "final time (default 20)"),
              ("dt", float, "time step (default 0.05)"),
              ("init", str, "initial condition: random | eigenvector | file"),
              ("init-file", str, "state JSON for --init file"),
              ("seed", int, "RNG seed for --init random (default 0)")]
        + common_grid
        + [("out", str, "write trajectory CSV here (figure alongside)"),
           ("no-plot", bool, "skip the companion figure")])
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidParameter as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OutOfValidityRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except VortexLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

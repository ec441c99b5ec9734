"""Batch command-line front-end emitting plot-ready data files.

Subcommands: manifold | chi-scan | simulate | wigner | moments |
oracle-check | bec-map. Each takes a JSON config file (--config), dotted
--set key=value overrides, and a few dedicated flags; the fully resolved
config is embedded in every output header, so a result file is sufficient to
rerun itself. Identical config + seed gives byte-identical output; headers
carry timestamps only behind --timestamps.

Exit codes: 0 success, 1 bad input, 2 failed numerical safeguard.
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import sys

import numpy as np

from . import __version__
from .bec_analogue import map_to_protocol, params_from_dict
from .errors import NumericalCheckError, ValidationError
from .fileio import (
    load_chi_grid,
    read_json,
    save_chi_grid,
    save_wigner_grid,
    write_json,
    write_table,
)
from .fock_oracle import run_default_suite
from .gaussian_field import GaussianFieldState, ModeSet, char_analytic, state_from_dict
from .pulse_protocol import reachable_manifold, schedule_from_dict, schedule_to_dict
from .ramsey_readout import records_table, run_readout_scan
from .tomography import (
    chi_grid_from_state,
    grid_axis,
    hermitian_fill,
    moments_fd,
    sampled_chi_grid,
    wigner_transform,
)

_TWO_PI = 2.0 * math.pi

_VACUUM_STATE = {
    "spatial_dim": 1,
    "box_side": _TWO_PI,
    "mass": 1.0,
    "modes": [{"j": [0], "kind": "vacuum", "params": {}}],
}

_BASE_SCHEDULE = {
    "lambda": 0.01,
    "tau": 1.0,
    "N": 1,
    "smearing": {"kind": "delta"},
    "switching": {"kind": "constant", "value": 1.0},
}

_BASE_MODE = {"k": 1.0, "omega": 1.0, "L": _TWO_PI, "n": 1}

_DEFAULTS: dict[str, dict] = {
    "manifold": {
        "schedule": _BASE_SCHEDULE,
        "mode": _BASE_MODE,
        "N_list": [1, 4, 5, 6, 7, 8, 9, 10],
        "tau": {"min": 0.02, "max": _TWO_PI, "points": 315},
        "seed": 0,
        "threads": 1,
        "timestamps": False,
    },
    "chi-scan": {
        "state": _VACUUM_STATE,
        "grid": {"extent": 6.0, "points": 129},
        "manifold": None,
        "theta": math.pi / 2,
        "shots": 0,
        "half": False,
        "seed": 0,
        "threads": 1,
        "timestamps": False,
    },
    "simulate": {
        "state": _VACUUM_STATE,
        "points": [[0.2, 0.0]],
        "theta": math.pi / 2,
        "shots": 10_000,
        "seed": 0,
        "threads": 1,
        "timestamps": False,
    },
    "wigner": {
        "state": _VACUUM_STATE,
        "chi_file": None,
        "grid": {"extent": 6.0, "points": 129},
        "alpha": None,
        "boundary_tol": 1e-6,
        "theta": math.pi / 2,
        "shots": 0,
        "seed": 0,
        "threads": 1,
        "timestamps": False,
    },
    "moments": {
        "state": _VACUUM_STATE,
        "chi_file": None,
        "orders": [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]],
        "mode": 0,
        "h": None,
        "richardson": True,
        "grid": {"extent": 6.0, "points": 129},
        "theta": math.pi / 2,
        "shots": 0,
        "seed": 0,
        "threads": 1,
        "timestamps": False,
    },
    "oracle-check": {
        "n_draws": 20,
        "D": 40,
        "seed": 0,
        "threads": 1,
        "timestamps": False,
    },
    "bec-map": {
        "bec": {
            "rho0": 1.0,
            "g_g": 0.0,
            "g_e": 0.02,
            "g_rho0": 1.0,
            "m_B": 1.0,
            "omega0": 1.0,
        },
        "modes": {"spatial_dim": 1, "box_side": _TWO_PI, "indices": [[1], [2], [3]]},
        "schedule": _BASE_SCHEDULE,
        "seed": 0,
        "threads": 1,
        "timestamps": False,
    },
}


# --------------------------------------------------------------------------
# config plumbing

def _deep_update(dst: dict, src: dict) -> dict:
    for key, value in src.items():
        if isinstance(value, dict) and isinstance(dst.get(key), dict):
            _deep_update(dst[key], value)
        else:
            dst[key] = value
    return dst


def _apply_set(config: dict, assignments) -> None:
    for item in assignments or []:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ValidationError(f"--set needs key=value, got {item!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]
        node[parts[-1]] = value


def _resolve_config(args) -> dict:
    config = copy.deepcopy(_DEFAULTS[args.command])
    if args.config:
        doc = read_json(args.config)
        if not isinstance(doc, dict):
            raise ValidationError(f"{args.config} must hold a JSON object")
        _deep_update(config, doc)
    _apply_set(config, args.set)
    for flag in ("seed", "threads", "shots", "theta", "out"):
        value = getattr(args, flag, None)
        if value is not None:
            config[flag] = value
    if args.timestamps:
        config["timestamps"] = True
    if "out" not in config and args.command != "oracle-check":
        raise ValidationError("an output path is required (--out or config key 'out')")
    return config


def _inline_or_file(value, loader, what):
    if isinstance(value, dict):
        return loader(value)
    if isinstance(value, str):
        doc = read_json(value)
        if not isinstance(doc, dict):
            raise ValidationError(f"{what} file {value} must hold a JSON object")
        return loader(doc)
    raise ValidationError(f"{what} must be an inline object or a file path")


def _state(config) -> GaussianFieldState:
    return _inline_or_file(config["state"], state_from_dict, "state")


def _mode_args(doc) -> tuple:
    try:
        return float(doc["k"]), float(doc["omega"]), float(doc["L"]), int(doc["n"])
    except KeyError as exc:
        raise ValidationError(f"mode spec missing field {exc}") from exc


def _tau_grid(doc) -> np.ndarray:
    try:
        lo, hi, points = float(doc["min"]), float(doc["max"]), int(doc["points"])
    except KeyError as exc:
        raise ValidationError(f"tau grid missing field {exc}") from exc
    if not (0 < lo < hi and points >= 2):
        raise ValidationError("tau grid needs 0 < min < max and >= 2 points")
    return np.linspace(lo, hi, points)


def _grid_axes(spec, n_modes: int):
    try:
        extent, points = float(spec["extent"]), int(spec["points"])
    except (KeyError, TypeError) as exc:
        raise ValidationError("grid spec needs 'extent' and 'points'") from exc
    return tuple(grid_axis(extent, points) for _ in range(2 * n_modes))


def _meta(command: str, config: dict) -> dict:
    return {"command": command, "config": config}


def _curves(config):
    sched = schedule_from_dict(config["schedule"])
    k, omega, L, n = _mode_args(config["mode"])
    taus = _tau_grid(config["tau"])
    N_list = [int(N) for N in config["N_list"]]
    return reachable_manifold(sched, N_list, taus, k, omega, L, n)


# --------------------------------------------------------------------------
# subcommands

def cmd_manifold(config: dict) -> None:
    rows = []
    for curve in _curves(config):
        for tau, xi in zip(curve.taus, curve.xis):
            rows.append([curve.N, float(tau), xi.real, xi.imag])
    write_table(
        config["out"],
        ["N", "tau", "re_xi", "im_xi"],
        rows,
        meta=_meta("manifold", config),
        timestamps=config["timestamps"],
    )
    print(f"wrote {len(rows)} manifold points to {config['out']}")


def _chi_scan_manifold(config: dict, state: GaussianFieldState) -> None:
    if state.n_modes != 1:
        raise ValidationError("manifold scans address a single mode")
    shots = int(config["shots"])
    columns = ["N", "tau", "re_xi", "im_xi", "re_chi", "im_chi"]
    if shots > 0:
        columns.append("stderr")
    rows = []
    for curve in _curves(config["manifold"]):
        if shots > 0:
            records = run_readout_scan(
                state,
                list(curve.xis),
                theta=float(config["theta"]),
                shots=shots,
                seed=int(config["seed"]) + curve.N,
                threads=int(config["threads"]),
            )
            chis = [r.chi_est for r in records]
            errs = [
                math.sqrt(r.stderr_sx**2 + r.stderr_sy**2) / abs(math.sin(r.theta))
                for r in records
            ]
        else:
            chis = [char_analytic(state, [xi]) for xi in curve.xis]
            errs = [0.0] * len(chis)
        for tau, xi, chi, err in zip(curve.taus, curve.xis, chis, errs):
            row = [curve.N, float(tau), xi.real, xi.imag, chi.real, chi.imag]
            if shots > 0:
                row.append(err)
            rows.append(row)
    write_table(
        config["out"], columns, rows, meta=_meta("chi-scan", config),
        timestamps=config["timestamps"],
    )
    print(f"wrote {len(rows)} chi values to {config['out']}")


def cmd_chi_scan(config: dict) -> None:
    state = _state(config)
    if config.get("manifold"):
        _chi_scan_manifold(config, state)
        return
    axes = _grid_axes(config["grid"], state.n_modes)
    if int(config["shots"]) > 0:
        grid = sampled_chi_grid(
            state,
            axes,
            theta=float(config["theta"]),
            shots=int(config["shots"]),
            seed=int(config["seed"]),
            threads=int(config["threads"]),
            half=bool(config["half"]),
        )
    else:
        grid = chi_grid_from_state(state, axes)
    save_chi_grid(grid, config["out"], meta=_meta("chi-scan", config),
                  timestamps=config["timestamps"])
    print(f"wrote a {grid.values.shape} chi grid to {config['out']}")


def cmd_simulate(config: dict) -> None:
    state = _state(config)
    points = []
    for entry in config["points"]:
        flat = np.asarray(entry, dtype=float).reshape(-1)
        if flat.size != 2 * state.n_modes:
            raise ValidationError(
                f"each point needs {2 * state.n_modes} reals (re, im per mode)"
            )
        points.append(flat[0::2] + 1j * flat[1::2])
    records = run_readout_scan(
        state,
        points,
        theta=float(config["theta"]),
        shots=int(config["shots"]),
        seed=int(config["seed"]),
        threads=int(config["threads"]),
    )
    columns, rows = records_table(records)
    write_table(config["out"], columns, rows, meta=_meta("simulate", config),
                timestamps=config["timestamps"])
    print(f"wrote {len(rows)} readout records to {config['out']}")


def _chi_grid_for(config: dict):
    if config.get("chi_file"):
        return load_chi_grid(config["chi_file"])
    state = _state(config)
    axes = _grid_axes(config["grid"], state.n_modes)
    if int(config["shots"]) > 0:
        return sampled_chi_grid(
            state, axes,
            theta=float(config["theta"]),
            shots=int(config["shots"]),
            seed=int(config["seed"]),
            threads=int(config["threads"]),
        )
    return chi_grid_from_state(state, axes)


def cmd_wigner(config: dict) -> None:
    grid = _chi_grid_for(config)
    if grid.provenance != "exact" or np.any(np.isnan(grid.values)):
        grid = hermitian_fill(grid)
    alpha_axes = (
        _grid_axes(config["alpha"], grid.n_modes) if config.get("alpha") else None
    )
    wgrid = wigner_transform(grid, alpha_axes, boundary_tol=float(config["boundary_tol"]))
    save_wigner_grid(wgrid, config["out"], meta=_meta("wigner", config),
                     timestamps=config["timestamps"])
    print(
        f"wrote a {wgrid.values.shape} Wigner grid to {config['out']} "
        f"(integral target {wgrid.normalization:.6g})"
    )


def cmd_moments(config: dict) -> None:
    mode = int(config["mode"])
    h = config["h"]
    if config.get("chi_file") or int(config["shots"]) > 0:
        source = _chi_grid_for(config)
        if np.any(np.isnan(source.values)):
            source = hermitian_fill(source)
        src_mode = mode
    else:
        state = _state(config)
        if not 0 <= mode < state.n_modes:
            raise ValidationError(f"state has no mode {mode}")

        def source(z: complex) -> complex:
            xi = np.zeros(state.n_modes, dtype=complex)
            xi[mode] = z
            return char_analytic(state, xi)

        src_mode = 0
        if h is None:
            h = 0.01
    rows = []
    for entry in config["orders"]:
        p, q = int(entry[0]), int(entry[1])
        value, error = moments_fd(
            source, src_mode, p, q,
            h=None if h is None else float(h),
            richardson=bool(config["richardson"]),
            with_error=True,
        )
        rows.append([p, q, value.real, value.imag, float("nan") if error is None else error])
    write_table(
        config["out"],
        ["p", "q", "re_moment", "im_moment", "error"],
        rows,
        meta=_meta("moments", config),
        timestamps=config["timestamps"],
    )
    print(f"wrote {len(rows)} moments to {config['out']}")


def cmd_oracle_check(config: dict) -> int:
    reports = run_default_suite(
        n_draws=int(config["n_draws"]), D=int(config["D"]), seed=int(config["seed"])
    )
    all_passed = all(r["passed"] for r in reports)
    for r in reports:
        status = "ok  " if r["passed"] else "FAIL"
        print(
            f"{status} {r['check']:<26} defect {r['defect']:.3e} "
            f"(tol {r['tolerance']:.1e}) D={r['D']}"
        )
    if config.get("out"):
        write_json(
            config["out"],
            {"config": config, "reports": reports, "all_passed": all_passed},
        )
        print(f"wrote {len(reports)} oracle reports to {config['out']}")
    if not all_passed:
        print("oracle suite FAILED", file=sys.stderr)
        return 2
    return 0


def cmd_bec_map(config: dict) -> None:
    params = _inline_or_file(config["bec"], params_from_dict, "bec parameters")
    mdoc = config["modes"]
    try:
        modes = ModeSet(
            spatial_dim=int(mdoc["spatial_dim"]),
            box_side=float(mdoc["box_side"]),
            mass=0.0,
            mode_indices=tuple(tuple(int(c) for c in j) for j in mdoc["indices"]),
        )
    except KeyError as exc:
        raise ValidationError(f"modes spec missing field {exc}") from exc
    template = schedule_from_dict(config["schedule"])
    mapped = map_to_protocol(params, modes, template)
    xis = mapped.displacements()
    per_mode = []
    for m, j in enumerate(modes.mode_indices):
        per_mode.append(
            {
                "j": list(j),
                "kmag": float(np.linalg.norm(modes.wavevectors[m])),
                "omega": float(mapped.omegas[m]),
                "weight": float(mapped.weights[m]),
                "re_xi": float(xis[m].real),
                "im_xi": float(xis[m].imag),
            }
        )
    write_json(
        config["out"],
        {
            "config": config,
            "lambda_eff": mapped.lambda_eff,
            "no_signal": mapped.no_signal,
            "schedule": None if mapped.no_signal else schedule_to_dict(mapped.schedule),
            "per_mode": per_mode,
        },
    )
    flag = " (no signal: g_e = g_g)" if mapped.no_signal else ""
    print(f"wrote the mapped protocol for {len(per_mode)} modes to {config['out']}{flag}")


# --------------------------------------------------------------------------
# argument parsing

_COMMANDS = {
    "manifold": (cmd_manifold, "tabulate reachable displacement curves xi(tau, N)"),
    "chi-scan": (cmd_chi_scan, "evaluate chi on a grid or along the manifold"),
    "simulate": (cmd_simulate, "finite-shot qubit readout records at chosen points"),
    "wigner": (cmd_wigner, "Fourier-transform a chi grid to the quasiprobability"),
    "moments": (cmd_moments, "finite-difference symmetric-ordered moments"),
    "oracle-check": (cmd_oracle_check, "run the truncated-Fock verification suite"),
    "bec-map": (cmd_bec_map, "map condensate-impurity parameters onto the protocol"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chitomo",
        description="characteristic-function readout protocol: simulation and validation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (func, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON config file merged over the defaults")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="dotted config override, value parsed as JSON (repeatable)",
        )
        p.add_argument("--out", help="output file path")
        p.add_argument("--seed", type=int, help="RNG seed recorded in the output")
        p.add_argument("--threads", type=int, help="worker threads for sampled grids")
        p.add_argument("--shots", type=int, help="measurements per point (0 = exact)")
        p.add_argument("--theta", type=float, help="preparation angle")
        p.add_argument(
            "--timestamps",
            action="store_true",
            help="stamp output headers with the generation time",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
        result = args.func(config)
        return int(result) if result is not None else 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalCheckError as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: bad JSON in input file: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: config ingestion, subcommands, deterministic
output artifacts.

One structured JSON config describes the group, the twist, the command and
its parameters; outputs embed the config hash, package version, backend and
all truncation metadata.  Complex numbers serialize as [re, im]; matrices
row-major.  Exit codes: 0 success, 2 usage/config error, 3 numerical
non-saturation under --strict, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .backend import BACKEND
from .eisenstein import (
    EisensteinParams,
    eisenstein_direct,
    fourier_evaluate,
    fourier_expansion,
    growth_check,
    incomplete_eisenstein,
    scattering_matrix,
)
from .group import GroupData, builtin_group, enumerate_ball, group_from_config, word_evaluate
from .hyperbolic import GroupElement, PointH, moebius_apply
from .kernels import (
    automorphic_kernel,
    build_grid,
    bump_kernel,
    hs_norm_estimate,
    kernel_spectrum_probe,
    power_kernel,
    resolvent_apply,
)
from .representation import (
    Representation,
    check_unitary_at_cusps,
    fit_growth_exponent,
    representation_from_config,
    trivial_representation,
)
from .special import k_bessel, resolvent_green, whittaker_profile

COMMANDS = ("group-info", "eval", "scattering", "norms", "kernel", "special")

DEFAULTS = {"L": 8, "c_max": 50.0, "k_max": 10, "quad_rel_tol": 1e-9}


class ConfigError(Exception):
    pass


class NotSaturated(Exception):
    pass


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _cplx(v):
    _require(isinstance(v, (list, tuple)) and len(v) == 2,
             f"complex values are [re, im] pairs, got {v!r}")
    return complex(float(v[0]), float(v[1]))


def _ser(obj):
    """JSON-ready form: complex -> [re, im], arrays -> nested lists."""
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_ser(row) for row in obj.tolist()] if obj.ndim else _ser(obj.item())
    if isinstance(obj, dict):
        return {str(k): _ser(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_ser(v) for v in obj]
    return obj


def _config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    _require(isinstance(cfg, dict), "config must be a JSON object")
    _require("group" in cfg, "config needs a 'group' block")
    _require("command" in cfg, "config needs a 'command' block")
    cmd = cfg["command"]
    _require(isinstance(cmd, dict) and "name" in cmd, "command block needs a 'name'")
    _require(cmd["name"] in COMMANDS,
             f"unknown command {cmd['name']!r}; choose from {COMMANDS}")
    return cfg


def build_objects(cfg: dict):
    try:
        group = group_from_config(cfg["group"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"group block: {exc}")
    rep_cfg = cfg.get("representation", {"trivial": 1})
    try:
        if "trivial" in rep_cfg:
            rep = trivial_representation(group, int(rep_cfg["trivial"]))
        else:
            rep = representation_from_config(group, rep_cfg)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"representation block: {exc}")
    return group, rep


# ----------------------------------------------------------------------
# command implementations
# ----------------------------------------------------------------------

def cmd_group_info(group, rep, cmd, seed):
    Ls = cmd.get("ball_lengths", [1, 2, 3, 4])
    cusp_rows = []
    for k, c in enumerate(group.cusps):
        conj = c.sigma_inv * c.stabilizer_generator * c.sigma
        defect = max(abs(conj.a - 1), abs(conj.b - 1), abs(conj.c), abs(conj.d - 1))
        cusp_rows.append({
            "index": k,
            "representative": "inf" if c.representative.infinite else c.representative.value,
            "sigma": list(c.sigma.entries()),
            "stabilizer_word": list(c.stabilizer_word.letters),
            "normalization_defect": defect,
        })
    ok, rpt = check_unitary_at_cusps(group, rep)
    if not ok:
        raise ConfigError(f"twist is not unitary at the cusps: {rpt}")
    return {
        "name": group.name,
        "generators": [list(g.entries()) for g in group.generators],
        "n_cusps": len(group.cusps),
        "cusps": cusp_rows,
        "parabolic_classes": [list(c) for c in group.parabolic_classes],
        "ball_sizes": {str(L): len(enumerate_ball(group, L)) for L in Ls},
        "unitary_at_cusps": ok,
        "unitarity_defects": rpt,
    }


def _params_from(cmd, group) -> EisensteinParams:
    return EisensteinParams(
        cusp_from=int(cmd.get("cusp_from", 0)),
        s=_cplx(cmd.get("s", [2.5, 0.0])),
        L=int(cmd.get("L", DEFAULTS["L"])),
        c_max=float(cmd.get("c_max", DEFAULTS["c_max"])),
        k_max=int(cmd.get("k_max", DEFAULTS["k_max"])),
        mu_max=cmd.get("mu_max"),
    )


def cmd_eval(group, rep, cmd, seed):
    params = _params_from(cmd, group)
    mode = cmd.get("mode", "direct")
    points = cmd.get("points", [[0.0, 1.5]])
    out = {"mode": mode, "s": params.s, "cusp_from": params.cusp_from,
           "L": params.L, "c_max": params.c_max, "k_max": params.k_max,
           "mu_max": params.mu_max, "values": []}
    saturated = True
    if mode == "direct":
        for (x, y) in points:
            _require(y > 0, f"point ({x}, {y}) is not in the upper half-plane")
            val, rpt = eisenstein_direct(group, rep, params, PointH(x, y))
            out["values"].append({"z": [x, y], "matrix": val,
                                  "error_estimate": rpt["error_estimate"],
                                  "shells": rpt["shells"]})
    elif mode == "fourier":
        cusp_to = int(cmd.get("cusp_to", params.cusp_from))
        expansion = fourier_expansion(group, rep, params, cusp_to)
        saturated = expansion.saturated
        out["cusp_to"] = cusp_to
        out["expansion_saturated"] = expansion.saturated
        for (x, y) in points:
            _require(y > 0, f"point ({x}, {y}) is not in the upper half-plane")
            val, rpt = fourier_evaluate(group, rep, params, cusp_to,
                                        PointH(x, y), expansion)
            out["values"].append({"z": [x, y], "matrix": val,
                                  "tails": {k: rpt[k] for k in
                                            ("tail_constant", "tail_mode", "freq_tail")}})
    elif mode == "incomplete":
        support = cmd.get("support", [1.0, 4.0])
        psi = _bump_psi(float(support[0]), float(support[1]))
        for (x, y) in points:
            _require(y > 0, f"point ({x}, {y}) is not in the upper half-plane")
            val, rpt = incomplete_eisenstein(group, rep, params.cusp_from,
                                             (support[0], support[1]), psi,
                                             PointH(x, y), params.L)
            saturated = saturated and rpt["saturated"]
            out["values"].append({"z": [x, y], "matrix": val, **rpt})
    else:
        raise ConfigError(f"unknown eval mode {mode!r}")
    if not saturated:
        out["saturated"] = False
    return out


def _bump_psi(A, B):
    mid, half = 0.5 * (A + B), 0.5 * (B - A)

    def psi(t):
        u = (t - mid) / half
        return math.exp(1.0 - 1.0 / (1.0 - u * u)) if abs(u) < 1.0 else 0.0

    return psi


def cmd_scattering(group, rep, cmd, seed):
    s = _cplx(cmd.get("s", [2.5, 0.0]))
    L = int(cmd.get("L", DEFAULTS["L"]))
    c_max = float(cmd.get("c_max", DEFAULTS["c_max"]))
    phi, reports = scattering_matrix(group, rep, s, c_max, L)
    sat = all(r.get("saturated", True) for r in reports.values())
    return {"s": s, "L": L, "c_max": c_max, "matrix": phi,
            "block_tails": {f"{a},{b}": r.get("tail", 0.0)
                            for (a, b), r in reports.items()},
            "saturated": sat}


def cmd_norms(group, rep, cmd, seed):
    from .group import tranche_bound_check

    L = int(cmd.get("L", 6))
    tranche_L = int(cmd.get("tranche_L", 5))
    fit = fit_growth_exponent(group, rep, L, tranche_L=tranche_L)
    ratio, table, violations = tranche_bound_check(group, tranche_L, seed=seed)
    return {
        "sigma0": fit.sigma0, "constant": fit.constant, "slope": fit.slope,
        "max_word_length_used": fit.max_word_length_used,
        "proof_sigma0": fit.proof_sigma0, "gen_norm_max": fit.gen_norm_max,
        "tranche_sup_ratio": ratio,
        "tranche_table": [{"length": r[0], "count": r[1], "max_ratio": r[2]}
                          for r in table],
        "decrease_violations": {k: len(v) for k, v in violations.items()},
        "note": "ball fit may underestimate the true abscissa on longer words",
    }


def _kernel_from(cmd):
    kcfg = cmd.get("kernel", {"kind": "power", "sigma": 2.0})
    if kcfg["kind"] == "power":
        return power_kernel(float(kcfg.get("sigma", 2.0)))
    if kcfg["kind"] == "bump":
        return bump_kernel(float(kcfg.get("u_max", 4.0)))
    raise ConfigError(f"unknown kernel kind {kcfg['kind']!r}")


def cmd_kernel(group, rep, cmd, seed):
    check = cmd.get("check", "spectrum")
    k = _kernel_from(cmd)
    L = int(cmd.get("L", DEFAULTS["L"]))
    Y = float(cmd.get("Y", 2.5))
    Y_max = float(cmd.get("Y_max", 12.0))
    level = int(cmd.get("level", 1))
    grid = build_grid(group, Y=Y, Y_max=Y_max, level=level)
    meta = {"check": check, "kernel": cmd.get("kernel"), "L": L,
            "grid": {"nodes": len(grid.nodes), "Y": Y, "Y_max": Y_max,
                     "level": level, "total_weight": grid.total_weight}}
    if check == "hs":
        refined = build_grid(group, Y=Y, Y_max=Y_max, level=level + 1)
        val, rpt = hs_norm_estimate(group, rep, k, grid, L, refined=refined)
        return {**meta, "hs_estimate": val, "refinement": rpt}
    if check == "spectrum":
        vals = kernel_spectrum_probe(group, rep, k, grid, L)
        top = int(cmd.get("top", 20))
        return {**meta, "eigenvalues": vals[:top]}
    raise ConfigError(f"unknown kernel check {check!r}")


def cmd_special(group, rep, cmd, seed):
    which = cmd.get("table", "bessel")
    s_grid = [_cplx(s) for s in cmd.get("s_grid", [[2.5, 0.0]])]
    y_grid = [float(y) for y in cmd.get("y_grid", [0.5, 1.0, 2.0])]
    rows = []
    for s in s_grid:
        for y in y_grid:
            if which == "bessel":
                v = k_bessel(s, y)
            elif which == "whittaker":
                v = whittaker_profile(s, 1.0, y)
            elif which == "green":
                v = resolvent_green(s, y)
            else:
                raise ConfigError(f"unknown special table {which!r}")
            rows.append((s.real, s.imag, y, v.real, v.imag))
    return {"table": which, "columns": ["s_re", "s_im", "y", "val_re", "val_im"],
            "rows": rows}


HANDLERS = {
    "group-info": cmd_group_info,
    "eval": cmd_eval,
    "scattering": cmd_scattering,
    "norms": cmd_norms,
    "kernel": cmd_kernel,
    "special": cmd_special,
}


# ----------------------------------------------------------------------
# output and entry point
# ----------------------------------------------------------------------

def _write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}")


def _render(result: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_ser(result), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        cols = result.get("columns")
        rows = result.get("rows")
        if cols is None or rows is None:
            raise ConfigError("csv format is only available for table outputs")
        writer.writerow(cols)
        writer.writerows(rows)
        return buf.getvalue()
    raise ConfigError(f"unknown output format {fmt!r}")


def run_config(cfg: dict, override_cmd: str | None = None, strict: bool = False,
               out_path: str | None = None) -> tuple[int, str]:
    cmd = dict(cfg["command"])
    if override_cmd is not None and override_cmd != cmd["name"]:
        raise ConfigError(
            f"config command is {cmd['name']!r} but the CLI asked for "
            f"{override_cmd!r}")
    seed = int(cfg.get("seed", 1234))
    group, rep = build_objects(cfg)
    result = HANDLERS[cmd["name"]](group, rep, cmd, seed)
    envelope = {
        "command": cmd["name"],
        "config_hash": _config_hash(cfg),
        "version": __version__,
        "backend": BACKEND,
        "seed": seed,
        "result": result,
    }
    output = cfg.get("output", {})
    fmt = output.get("format", "json")
    body = _render(result if fmt == "csv" else envelope, fmt)
    path = out_path or output.get("path")
    if path:
        _write_atomic(path, body)
    if strict and result.get("saturated") is False:
        raise NotSaturated("result is not saturated at the configured truncations")
    return 0, body


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="eistwist",
        description="Twisted Eisenstein series and automorphic kernels")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand")
    for name in ("run",) + COMMANDS:
        p = sub.add_parser(name, help=f"{name} from a config file")
        p.add_argument("-c", "--config", required=True)
        p.add_argument("-o", "--out", default=None)
        p.add_argument("--strict", action="store_true")
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        override = None if args.subcommand == "run" else args.subcommand
        code, body = run_config(cfg, override_cmd=override, strict=args.strict,
                                out_path=args.out)
        if not args.out and not cfg.get("output", {}).get("path"):
            sys.stdout.write(body)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NotSaturated as exc:
        print(f"not saturated: {exc}", file=sys.stderr)
        return 3
    except IOError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

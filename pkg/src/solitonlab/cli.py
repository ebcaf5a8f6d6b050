"""Command-line front end.

Subcommands: profile, mode, fgr (gamma0 | scan | general), simulate,
validate.  Configuration is plain key=value pairs, read from an optional
--config file and overridden by positional key=value arguments; nothing
is ever read from the environment.  Every run prints one JSON record to
stdout with the inputs echoed next to the outputs; --out writes the
delimited table at 17 significant digits with a rendered figure beside
it.

Exit codes: 0 success, 1 computation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import fgr
from . import nls_sim
from . import nonlinearity as nl
from . import validation
from .errors import DomainError, SolitonLabError, UnsupportedOrderError
from .profile import Grid, solve_profile
from .spectral import (compute_potentials, fd_mode_oracle,
                       solve_internal_mode, transformed_potentials)

_FMT = "%.17g"


# ---------------------------------------------------------------------------
# key=value configuration


def _parse_kv_line(line, source):
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    if "=" not in body:
        raise DomainError("%s: expected key=value, got %r" % (source, line))
    key, val = body.split("=", 1)
    return key.strip(), val.strip()


def load_config(path=None, overrides=()):
    """Key=value file plus override pairs; later entries win."""
    cfg = {}
    if path is not None:
        with open(path) as fh:
            for line in fh:
                kv = _parse_kv_line(line, path)
                if kv:
                    cfg[kv[0]] = kv[1]
    for item in overrides:
        kv = _parse_kv_line(item, "argument")
        if kv is None:
            raise DomainError("empty override %r" % item)
        cfg[kv[0]] = kv[1]
    return cfg


def _take(cfg, key, default=None, cast=float):
    if key not in cfg:
        return default
    raw = cfg.pop(key)
    if cast is float:
        return float(raw)
    if cast is int:
        return int(raw)
    return raw


def _reject_unknown(cfg):
    if cfg:
        raise DomainError("unknown config key%s: %s" % (
            "s" if len(cfg) > 1 else "", ", ".join(sorted(cfg))))


def model_from_config(cfg):
    """`g = power` with g.a/g.sigma, `g = poly` with g.pairs, or `g = zero`."""
    kind = _take(cfg, "g", "power", cast=str)
    if kind == "power":
        a = _take(cfg, "g.a", 1.0)
        sigma = _take(cfg, "g.sigma", 2.0)
        if a == 0.0:
            return nl.NonlinearityModel.zero()
        return nl.NonlinearityModel.power(a, sigma)
    if kind == "poly":
        raw = _take(cfg, "g.pairs", None, cast=str)
        if raw is None:
            raise DomainError("g = poly needs g.pairs = a:sigma, a:sigma, ...")
        pairs = []
        for chunk in raw.split(","):
            piece = chunk.strip()
            if not piece:
                continue
            if ":" not in piece:
                raise DomainError("bad g.pairs entry %r" % piece)
            a_s, s_s = piece.split(":", 1)
            pairs.append((float(a_s), float(s_s)))
        return nl.NonlinearityModel.polynomial(pairs)
    if kind == "zero":
        return nl.NonlinearityModel.zero()
    raise DomainError("unknown model kind %r" % kind)


def grid_from_config(cfg):
    half = _take(cfg, "half_length", 40.0)
    points = _take(cfg, "points", 4096, cast=int)
    return Grid(half, points)


def _model_desc(model):
    return {"kind": model.kind, "terms": [list(t) for t in model.terms]}


# ---------------------------------------------------------------------------
# output helpers


def _echo(record, cfg_used):
    record["inputs"] = {k: cfg_used[k] for k in sorted(cfg_used)}
    return record


def _emit(record, stream=None):
    (stream or sys.stdout).write(
        json.dumps(record, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError("not serializable: %r" % (obj,))


def write_csv(path, header, columns):
    cols = [np.asarray(c) for c in columns]
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(len(cols[0])):
            fh.write(",".join(_FMT % c[i] for c in cols) + "\n")


def _fig_path(out):
    stem = out.rsplit(".", 1)[0] if "." in out.split("/")[-1] else out
    return stem + ".png"


def _render(out, draw):
    """Figure next to the table; Agg backend, nothing interactive."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig = draw(plt)
    fig.savefig(_fig_path(out), dpi=150)
    plt.close(fig)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_profile(args):
    cfg = load_config(args.config, args.set)
    model = model_from_config(cfg)
    omega = _take(cfg, "omega", 1e-2)
    grid = grid_from_config(cfg)
    _reject_unknown(cfg)

    prof = solve_profile(model, omega, grid)
    record = _echo({
        "subcommand": "profile",
        "peak": prof.q0,
        "boundary_value": prof.Q[-1],
        "first_integral_residual": prof.fi_residual,
    }, {"omega": omega, "half_length": grid.half_length, "points": grid.n,
        "model": _model_desc(model)})
    if args.out:
        write_csv(args.out, "y,Q,Qp,Qpp", [grid.y, prof.Q, prof.Qp, prof.Qpp])
        record["out"] = args.out

        def draw(plt):
            fig, ax = plt.subplots(figsize=(7, 4))
            ax.plot(grid.y, prof.Q, label="Q")
            ax.plot(grid.y, prof.Qp, label="Q'")
            ax.plot(grid.y, prof.Qpp, label="Q''")
            ax.set_xlabel("y")
            ax.set_title("soliton profile, omega=%g" % omega)
            ax.legend(frameon=False)
            fig.tight_layout()
            return fig

        _render(args.out, draw)
        record["figure"] = _fig_path(args.out)
    _emit(record)
    return 0


def _cmd_mode(args):
    cfg = load_config(args.config, args.set)
    model = model_from_config(cfg)
    omega = _take(cfg, "omega", 1e-2)
    grid = grid_from_config(cfg)
    with_oracle = _take(cfg, "oracle", 1, cast=int)
    _reject_unknown(cfg)

    mode = solve_internal_mode(model, omega, grid)
    pots = compute_potentials(model, mode.profile)
    tp = transformed_potentials(mode, pots)
    oracle_lambda = None
    if with_oracle:
        oracle_lambda, _, _ = fd_mode_oracle(model, omega, grid)
    record = _echo({
        "subcommand": "mode",
        "omega": omega,
        "alpha": mode.alpha,
        "lambda": mode.lam,
        "I_omega": pots.I_omega,
        "eps_omega": pots.eps_omega,
        "rho_omega": pots.rho_omega,
        "residual_Lplus": mode.residual_Lplus,
        "residual_Lminus": mode.residual_Lminus,
        "int_Y0": tp.int_Y0,
        "oracle_lambda": oracle_lambda,
    }, {"omega": omega, "half_length": grid.half_length, "points": grid.n,
        "model": _model_desc(model), "oracle": with_oracle})
    if args.out:
        yh = grid.y_half
        write_csv(args.out, "y,W1,W2,V1,V2,K0,K1,K2,Y0,Y1",
                  [yh, mode.W1, mode.W2, mode.V1, mode.V2,
                   tp.K0, tp.K1, tp.K2, tp.Y0, tp.Y1])
        record["out"] = args.out

        def draw(plt):
            fig, axes = plt.subplots(1, 2, figsize=(10, 4))
            axes[0].plot(yh, mode.V1, label="V1")
            axes[0].plot(yh, mode.V2, label="V2")
            axes[0].set_xlabel("y")
            axes[0].set_title("internal mode, lambda=%.6f" % mode.lam)
            axes[0].legend(frameon=False)
            axes[1].plot(yh, tp.Y0, label="Y0")
            axes[1].plot(yh, tp.K0, label="K0")
            axes[1].set_xlabel("y")
            axes[1].set_xlim(0.0, min(10.0 / max(mode.alpha, 1e-6),
                                      grid.half_length))
            axes[1].set_title("transformed weights")
            axes[1].legend(frameon=False)
            fig.tight_layout()
            return fig

        _render(args.out, draw)
        record["figure"] = _fig_path(args.out)
    _emit(record)
    return 0


def _cmd_fgr_gamma0(args):
    cfg = load_config(args.config, args.set)
    grid = grid_from_config(cfg)
    _reject_unknown(cfg)
    res = fgr.gamma0(args.sigma, grid)
    record = _echo({
        "subcommand": "fgr gamma0",
        "sigma": res.sigma,
        "gamma0": res.gamma0,
        "err": res.err,
        "positive": res.positive,
    }, {"sigma": args.sigma, "half_length": grid.half_length,
        "points": grid.n})
    _emit(record)
    return 0


def _cmd_fgr_scan(args):
    cfg = load_config(args.config, args.set)
    grid = grid_from_config(cfg) if ("half_length" in cfg or "points" in cfg) \
        else Grid(40.0, 1024)
    _reject_unknown(cfg)
    rows = fgr.gamma0_scan(args.sigma_from, args.sigma_to, args.points,
                           grid, jobs=args.jobs)
    rows = sorted(rows, key=lambda r: r.sigma)
    record = _echo({
        "subcommand": "fgr scan",
        "count": len(rows),
        "min_gamma0": min(r.gamma0 for r in rows),
        "max_gamma0": max(r.gamma0 for r in rows),
        "all_positive": bool(all(r.positive for r in rows)),
    }, {"from": args.sigma_from, "to": args.sigma_to,
        "points": args.points, "half_length": grid.half_length,
        "grid_points": grid.n, "jobs": args.jobs or 1})
    if args.out:
        write_csv(args.out, "sigma,gamma0,err",
                  [[r.sigma for r in rows], [r.gamma0 for r in rows],
                   [r.err for r in rows]])
        record["out"] = args.out

        def draw(plt):
            fig, ax = plt.subplots(figsize=(7, 4))
            ax.plot([r.sigma for r in rows], [r.gamma0 for r in rows])
            ax.axhline(0.0, lw=0.6, color="0.5")
            ax.set_xlabel("sigma")
            ax.set_ylabel("Gamma0")
            ax.set_title("leading resonance constant")
            fig.tight_layout()
            return fig

        _render(args.out, draw)
        record["figure"] = _fig_path(args.out)
    _emit(record)
    return 0


def _cmd_fgr_general(args):
    cfg = load_config(args.config, args.set)
    model = model_from_config(cfg)
    grid = grid_from_config(cfg)
    _reject_unknown(cfg)
    omega = args.omega
    mode = solve_internal_mode(model, omega, grid)
    pair = fgr.solve_g_pair(model, omega, mode)
    gam = fgr.gamma_general(model, omega, mode, pair)
    record = _echo({
        "subcommand": "fgr general",
        "omega": omega,
        "lambda": mode.lam,
        "gamma": gam,
        "positive": bool(gam > 0.0),
        "pair_residuals": pair.orthogonality_residuals(),
    }, {"omega": omega, "half_length": grid.half_length, "points": grid.n,
        "model": _model_desc(model)})
    if model.kind == "power":
        record["gamma_rescaled"] = gam / omega ** (model.terms[0][1] - 1.0)
    _emit(record)
    return 0


def _cmd_simulate(args):
    cfg = load_config(args.config, args.set)
    run_cfg = {}
    for key in nls_sim._CONFIG_DEFAULTS:
        if key == "perturbation":
            val = _take(cfg, key, None, cast=str)
        elif key in ("points",):
            val = _take(cfg, key, None, cast=int)
        else:
            val = _take(cfg, key, None)
        if val is not None:
            run_cfg[key] = val
    _reject_unknown(cfg)

    res = nls_sim.run_experiment(run_cfg)
    record = _echo({"subcommand": "simulate", "rows": len(res.rows)},
                   {k: run_cfg.get(k, nls_sim._CONFIG_DEFAULTS[k])
                    for k in nls_sim._CONFIG_DEFAULTS})
    record["summary"] = res.summary
    if args.out:
        heads = ("t", "mass_drift", "energy_drift", "momentum", "gamma",
                 "omega", "b1", "b2", "abs_b", "rho_v_norm", "nu_v_norm")
        write_csv(args.out, ",".join(heads),
                  [[getattr(r, h) for r in res.rows] for h in heads])
        record["out"] = args.out

        def draw(plt):
            t = [r.t for r in res.rows]
            fig, axes = plt.subplots(2, 2, figsize=(10, 7))
            axes[0, 0].plot(t, [r.abs_b for r in res.rows])
            axes[0, 0].set_title("|b|(t)")
            axes[0, 1].plot(t, [r.omega for r in res.rows])
            axes[0, 1].set_title("omega(t)")
            axes[1, 0].plot(t, [r.mass_drift for r in res.rows],
                            label="mass")
            axes[1, 0].plot(t, [r.energy_drift for r in res.rows],
                            label="energy")
            axes[1, 0].set_title("relative drifts")
            axes[1, 0].legend(frameon=False)
            axes[1, 1].plot([r.b1 for r in res.rows],
                            [r.b2 for r in res.rows], lw=0.4)
            axes[1, 1].set_title("b plane")
            axes[1, 1].set_aspect("equal", adjustable="datalim")
            for ax in axes.flat:
                ax.set_xlabel("t" if ax is not axes[1, 1] else "b1")
            fig.tight_layout()
            return fig

        _render(args.out, draw)
        record["figure"] = _fig_path(args.out)
    _emit(record)
    return 0 if not res.summary["terminated_early"] else 1


def _cmd_validate(args):
    cfg = load_config(args.config, args.set)
    points = _take(cfg, "points", 4096, cast=int)
    _reject_unknown(cfg)

    def progress(idx):
        sys.stderr.write("criterion %d...\n" % idx)
        sys.stderr.flush()

    results = validation.run_criteria(args.level, jobs=args.jobs,
                                      points=points, progress=progress)
    for r in results:
        sys.stderr.write("[%s] %2d %s: measured %.6g, %s\n" % (
            "PASS" if r.passed else "FAIL", r.index, r.name, r.measured,
            r.detail))
    failed = [r for r in results if not r.passed]
    record = _echo({
        "subcommand": "validate",
        "criteria": [{
            "index": r.index, "name": r.name, "passed": r.passed,
            "measured": r.measured, "bound": r.bound, "detail": r.detail,
        } for r in results],
        "passed": len(results) - len(failed),
        "failed": [r.index for r in failed],
    }, {"level": args.level, "points": points, "jobs": args.jobs or 1})
    _emit(record)
    if failed:
        sys.stderr.write("failing criteria: %s\n"
                         % ", ".join(str(r.index) for r in failed))
        return 1
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def build_parser():
    top = argparse.ArgumentParser(
        prog="solitonlab",
        description="numerical laboratory for a perturbed cubic "
                    "Schrodinger equation")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--out", help="write the delimited table here "
                                     "(a .png figure lands beside it)")
        p.add_argument("set", nargs="*", metavar="key=value",
                       help="overrides applied after the config file")

    p = sub.add_parser("profile", help="solve and tabulate a soliton profile")
    common(p)
    p.set_defaults(fn=_cmd_profile)

    p = sub.add_parser("mode", help="internal mode and transformed weights")
    common(p)
    p.set_defaults(fn=_cmd_mode)

    pf = sub.add_parser("fgr", help="resonance coupling constants")
    fsub = pf.add_subparsers(dest="fgr_command", required=True)

    p = fsub.add_parser("gamma0", help="leading constant at one power")
    p.add_argument("--sigma", type=float, required=True)
    common(p)
    p.set_defaults(fn=_cmd_fgr_gamma0)

    p = fsub.add_parser("scan", help="sweep the leading constant")
    p.add_argument("--from", dest="sigma_from", type=float, required=True)
    p.add_argument("--to", dest="sigma_to", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--jobs", type=int, default=None)
    common(p)
    p.set_defaults(fn=_cmd_fgr_scan)

    p = fsub.add_parser("general", help="coupling constant at finite omega")
    p.add_argument("--omega", type=float, required=True)
    common(p)
    p.set_defaults(fn=_cmd_fgr_general)

    p = sub.add_parser("simulate", help="split-step run with mode tracking")
    common(p)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("validate", help="run the acceptance criteria")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--jobs", type=int, default=None)
    common(p)
    p.set_defaults(fn=_cmd_validate)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (SolitonLabError, DomainError, UnsupportedOrderError, OSError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())

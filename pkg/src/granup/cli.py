"""Command-line front end: ``granup simulate | surface | calibrate | check``.

Exit codes: 0 success, 1 failed self-check, 2 bad input (arguments, config or
data file), 3 integration failure, 4 fit failure.
"""
import argparse
import contextlib
import logging
import math
import os
import sys

from granup import tensor
from granup.calibration import (
    M_from_friction,
    beta_from_friction,
    fit_cohesion,
    fit_cooper_eaton,
    friction_angle_from_shear,
    read_series,
)
from granup.checks import run_checks
from granup.config import load_config
from granup.errors import CalibrationError, ConfigError, FitError
from granup.hardening import hardening_state
from granup.integrator import PathError, initial_state, run_path
from granup.yield_surface import SurfaceState, sample_sections

log = logging.getLogger("granup")

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_INTEGRATION, EXIT_FIT = 0, 1, 2, 3, 4

TRAJECTORY_COLUMNS = (
    "step,inc,eps11,eps22,eps33,sig11,sig22,sig33,p,q,theta,pc,c,d,mu,Kt,F,tr_eps_p".split(",")
)


def fmt(x):
    return format(float(x), ".9g")


def trajectory_row(step, inc, state):
    inv = tensor.invariants(state.sigma)
    f = state.F if isinstance(state.F, float) else math.inf
    values = [
        *state.eps[:3],
        *state.sigma[:3],
        inv.p,
        inv.q,
        inv.theta,
        state.p_c,
        state.c,
        state.d,
        state.mu,
        state.K_t,
        f,
        tensor.trace(state.eps_p),
    ]
    return [str(step), str(inc)] + [fmt(v) for v in values]


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _write(fh, cells):
    fh.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_simulate(args):
    cfg = load_config(args.config)
    label = cfg.sweep.parameter if cfg.sweep else None
    with _output(args.out) as fh:
        _write(fh, ([label] if label else []) + list(TRAJECTORY_COLUMNS))
        for value, params in cfg.materials():
            prefix = [fmt(value)] if label else []
            try:
                rows = run_path(initial_state(params), cfg.program, params, cfg.controls)
                failure = None
            except PathError as exc:
                rows, failure = exc.trajectory, exc
            for r in rows[1:]:
                _write(fh, prefix + trajectory_row(r.step, r.inc, r.state))
            if failure is not None:
                who = f" ({label} = {fmt(value)})" if label else ""
                fh.write(f"# error{who}: {failure}\n")
                fh.flush()
                log.error("integration failed%s: %s", who, failure)
                if cfg.sweep is None or cfg.sweep.on_failure == "stop":
                    return EXIT_INTEGRATION
    return EXIT_OK


def cmd_surface(args):
    cfg = load_config(args.config)
    params = cfg.material
    shape = params.shape
    with _output(args.out) as fh:
        _write(fh, ["pc_MPa", "c_MPa", "d", "p_MPa", "q_MPa"])
        for p_c in args.pc:
            c, d, _ = hardening_state(p_c, params)
            meridian, _ = sample_sections(SurfaceState(p_c, c), shape, args.samples)
            for p, q in meridian:
                _write(fh, [fmt(p_c), fmt(c), fmt(d), fmt(p), fmt(q)])
    if args.deviatoric:
        with _output(args.deviatoric) as fh:
            _write(fh, ["pc_MPa", "theta_rad", "radius_MPa"])
            for p_c in args.pc:
                c, _, _ = hardening_state(p_c, params)
                _, dev = sample_sections(SurfaceState(p_c, c), shape, args.samples)
                for w, r in dev:
                    _write(fh, [fmt(p_c), fmt(w), fmt(r)])
    return EXIT_OK


def _report(out, pairs):
    with _output(out) as fh:
        for key, value in pairs:
            fh.write(f"{key} = {fmt(value) if isinstance(value, float) else value}\n")


def cmd_calibrate(args):
    kind = args.kind
    if kind == "cooper-eaton":
        res = fit_cooper_eaton(read_series(args.data))
        _report(args.out, [*res.values.items(), ("residual_norm", res.residual_norm)])
    elif kind == "cohesion":
        res = fit_cohesion(read_series(args.data))
        _report(
            args.out,
            [
                *res.values.items(),
                ("residual_norm", res.residual_norm),
                ("degenerate", str(res.degenerate).lower()),
                ("bowden_tabor_k", res.extras["bowden_tabor_k"]),
                ("bowden_tabor_residual_norm", res.extras["bowden_tabor_residual"]),
            ],
        )
    elif kind == "friction":
        phi = friction_angle_from_shear(read_series(args.data, ordered=False))
        _report(args.out, [("phi_deg", math.degrees(phi)), ("phi_rad", phi)])
    elif kind == "beta":
        _report(args.out, [("beta", beta_from_friction(math.radians(args.phi), args.gamma))])
    elif kind == "M":
        phi = math.radians(args.phi)
        beta = args.beta if args.beta is not None else beta_from_friction(phi, args.gamma)
        _report(args.out, [("beta", float(beta)), ("M", M_from_friction(phi, args.m, args.alpha, args.gamma, beta))])
    return EXIT_OK


def cmd_check(args):
    cfg = load_config(args.config)
    results = run_checks(cfg.material, cfg.controls)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_CHECK if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _samples(text):
    n = int(text)
    if n < 8:
        raise argparse.ArgumentTypeError("at least 8 samples per section are required")
    return n


def build_parser():
    ap = argparse.ArgumentParser(prog="granup", description="Granular powder compaction material-point driver.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a load program and write the trajectory CSV")
    p.add_argument("--config", required=True, help="config file or bundled config name")
    p.add_argument("--out", default="-", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("surface", help="sample yield-surface sections at given forming pressures")
    p.add_argument("--config", required=True)
    p.add_argument("--pc", type=float, nargs="+", required=True, help="forming pressures in MPa")
    p.add_argument("--out", default="-", help="meridian CSV (default stdout)")
    p.add_argument("--deviatoric", help="also write deviatoric sections to this CSV")
    p.add_argument("--samples", type=_samples, default=64, help="points per section (>= 8)")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("calibrate", help="identify parameters from data or friction angle")
    csub = p.add_subparsers(dest="kind", required=True)
    for name, what in (
        ("cooper-eaton", "p_c vs plastic volumetric strain"),
        ("cohesion", "p_c vs cohesion"),
        ("friction", "normal load vs peak shear force"),
    ):
        c = csub.add_parser(name, help=f"fit from a CSV of {what}")
        c.add_argument("data", help="CSV with a 'x_unit,y_unit' header")
        c.add_argument("--out", default="-")
        c.set_defaults(func=cmd_calibrate)
    for name in ("beta", "M"):
        c = csub.add_parser(name, help=f"{name} from the friction angle")
        c.add_argument("--phi", type=float, required=True, help="friction angle in degrees")
        c.add_argument("--gamma", type=float, default=0.9)
        c.add_argument("--out", default="-")
        if name == "M":
            c.add_argument("--m", type=float, default=2.0)
            c.add_argument("--alpha", type=float, default=0.1)
            c.add_argument("--beta", type=float, default=None, help="default: computed from --phi and --gamma")
        c.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("check", help="run the invariant self-check suite")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_check)
    return ap


def _setup_logging():
    level = os.environ.get("GRANUP_LOG", "error").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")
    if level not in levels:
        log.warning("GRANUP_LOG=%r not recognised; using 'error'", level)


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CalibrationError) as exc:
        print(f"granup: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FitError as exc:
        print(f"granup: fit failed: {exc}", file=sys.stderr)
        if exc.best:
            print(f"granup: best so far: {exc.best}", file=sys.stderr)
        return EXIT_FIT
    except OSError as exc:
        print(f"granup: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

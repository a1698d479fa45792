"""Command-line client of the service layer.

Subcommands: bound, preimages, theta, render, report, serve.  Every
run resolves a RunConfig (config file, then flag overrides on top),
writes a manifest next to its outputs, and exits 0 on Consistent or
NumericsUnavailable verdicts, 1 on configuration errors, 2 on an
Inconsistent verdict, 3 on numeric pipeline failures.
"""

from __future__ import annotations

import argparse
import os
import sys

from .bounds import BoundReport, Verdict
from .config import ConfigParseError, RunConfig, load_config, merge_flags
from .errors import ConfigError, HypdimError
from .pipeline import (
    bound_rows_csv,
    boxcount_csv,
    manifest_dict,
    preimages_csv,
    run_render,
    to_json,
)
from .preimages import Preimage
from .render import write_p4, write_p6
from .service import handlers

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INCONSISTENT = 2
EXIT_PIPELINE = 3

_FLAG_KEYS = (
    "family", "lam", "m", "d", "omega1", "omega2",
    "radius", "max_branches", "distortion", "threads", "seed", "out",
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="TOML config file or an emitted manifest JSON; flags override it")
    p.add_argument("--family", choices=["tan", "weierstrass", "elliptic_poly", "exp_elliptic"])
    p.add_argument("--lam", help="complex prefactor, i notation (default 1)")
    p.add_argument("--m", type=int, help="tangent power (default 1)")
    p.add_argument("--d", type=int, help="exp_elliptic compounding degree (default 1)")
    p.add_argument("--omega1", help="lattice generator (default 1)")
    p.add_argument("--omega2", help="lattice generator (default i)")
    p.add_argument("--poly", help="elliptic_poly coefficients, lowest first, comma-separated")
    p.add_argument("--radius", type=float, help="preimage search radius (default per family)")
    p.add_argument("--max-branches", type=int, dest="max_branches")
    p.add_argument("--distortion", choices=["off", "koebe"])
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int, help="rng seed for perturbation retries (default 42)")
    p.add_argument("--out", help="output directory (default out)")


def _add_render_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--center", help="frame center, i notation (default 0)")
    p.add_argument("--width", type=float, help="frame width (default 4)")
    p.add_argument("--pixels", type=int, help="pixels per side (default 512)")
    p.add_argument("--max-iter", type=int, dest="max_iter", help="iteration cap (default 64)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypdim",
        description="Hyperbolic-dimension lower bounds for meromorphic Julia sets.",
        epilog="Precedence: built-in defaults < config file < command-line flags.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="closed-form bound table and numeric verdict")
    _add_common(p)
    p.add_argument("--table-only", action="store_true", dest="table_only",
                   help="print the theory table only, no numerics")

    p = sub.add_parser("preimages", help="enumerate certified b-points in a disk")
    _add_common(p)

    p = sub.add_parser("theta", help="estimate the Poincare critical exponent")
    _add_common(p)

    p = sub.add_parser("render", help="escape/capture render and box-count signal")
    _add_common(p)
    _add_render_flags(p)

    p = sub.add_parser("report", help="single JSON bundle of all stages")
    _add_common(p)
    _add_render_flags(p)
    p.add_argument("--render", action="store_true",
                   help="include a render stage in the bundle")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def resolve_config(args: argparse.Namespace, want_render: bool = False) -> RunConfig:
    base = load_config(args.config) if args.config else RunConfig()
    flags = {k: getattr(args, k, None) for k in _FLAG_KEYS}
    if getattr(args, "poly", None):
        flags["poly"] = [c.strip() for c in args.poly.split(",")]
    for flag, key in (("center", "render_center"), ("width", "render_width"),
                      ("max_iter", "render_max_iter")):
        value = getattr(args, flag, None)
        if value is not None:
            flags[key] = value
    pixels = getattr(args, "pixels", None)
    if pixels is not None:
        flags["render_pixels_x"] = pixels
        flags["render_pixels_y"] = pixels
    if want_render:
        flags["render"] = True
    return merge_flags(base, **flags)


def _prepare_out(rc: RunConfig) -> str:
    out = rc.output.directory
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        fh.write(to_json(manifest_dict(rc)))
    return out


def _print_bound_table(rows) -> None:
    head = f"{'family_label':<22} {'rho':>6} {'alpha1':>7} {'q':>3} " \
           f"{'theoretical':>12} {'theta_hat':>10} {'bowen_root':>11} verdict"
    print(head)
    for r in rows:
        th = f"{r.theta_hat:.4f}" if r.theta_hat is not None else "-"
        bw = f"{r.bowen_root:.4f}" if r.bowen_root is not None else "-"
        print(f"{r.family_label:<22} {r.rho:>6g} {r.alpha1:>7g} {r.q:>3} "
              f"{r.theoretical:>12.6f} {th:>10} {bw:>11} {r.verdict}")


def cmd_bound(args: argparse.Namespace) -> int:
    rc = resolve_config(args)
    resp = handlers.bound(rc, table_only=args.table_only)
    _print_bound_table(resp.rows)
    out = _prepare_out(rc)
    reports = [
        BoundReport(
            family_label=r.family_label, rho=r.rho, alpha1=r.alpha1, q=r.q,
            theoretical=r.theoretical, theta_hat=r.theta_hat, bowen_root=r.bowen_root,
            verdict=Verdict(r.verdict), note=r.note,
        )
        for r in resp.rows
    ]
    if "csv" in rc.output.formats:
        with open(os.path.join(out, "bounds.csv"), "w") as fh:
            fh.write(bound_rows_csv(reports))
    if "json" in rc.output.formats:
        with open(os.path.join(out, "bounds.json"), "w") as fh:
            fh.write(to_json({"rows": [r.model_dump() for r in resp.rows]}))
    if resp.verdict == Verdict.INCONSISTENT.value:
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_preimages(args: argparse.Namespace) -> int:
    rc = resolve_config(args)
    resp = handlers.preimages(rc)
    out = _prepare_out(rc)
    pts = [
        Preimage(
            point=complex(r.re, r.im), target=complex(resp.pole_re, resp.pole_im),
            residual=r.residual, modulus=r.modulus,
        )
        for r in resp.rows
    ]
    path = os.path.join(out, "preimages.csv")
    with open(path, "w") as fh:
        fh.write(preimages_csv(pts))
    if "json" in rc.output.formats:
        with open(os.path.join(out, "preimages.json"), "w") as fh:
            fh.write(to_json(resp.model_dump()))
    print(f"{resp.count} preimages of {resp.family_label} within radius "
          f"{resp.radius:g} -> {path}")
    return EXIT_OK


def cmd_theta(args: argparse.Namespace) -> int:
    rc = resolve_config(args)
    resp = handlers.theta(rc)
    out = _prepare_out(rc)
    payload = to_json(resp.model_dump())
    print(payload, end="")
    with open(os.path.join(out, "theta.json"), "w") as fh:
        fh.write(payload)
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    rc = resolve_config(args, want_render=True)
    rr = run_render(rc)
    resp = handlers.render_frame(rc, run=rr)
    out = _prepare_out(rc)
    write_p6(os.path.join(out, "render.ppm"), rr.result)
    write_p4(os.path.join(out, "mask.pbm"), rr.mask)
    if "csv" in rc.output.formats and rr.box_sizes:
        with open(os.path.join(out, "boxcount.csv"), "w") as fh:
            fh.write(boxcount_csv(rr.box_sizes, rr.box_counts))
    if "json" in rc.output.formats:
        with open(os.path.join(out, "render.json"), "w") as fh:
            fh.write(to_json(resp.model_dump(exclude={"p6_base64"})))
    dim = f"{resp.box_dimension:.4f}" if resp.box_dimension is not None else "n/a"
    print(f"render {resp.pixels_x}x{resp.pixels_y} of {resp.family_label}: "
          f"undecided {resp.undecided_fraction:.3f}, box dimension {dim} "
          f"({resp.signal_mask} mask) -> {out}/render.ppm")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    rc = resolve_config(args, want_render=bool(getattr(args, "render", False)))
    resp = handlers.report(rc)
    out = _prepare_out(rc)
    payload = to_json(resp.report)
    print(payload, end="")
    with open(os.path.join(out, "report.json"), "w") as fh:
        fh.write(payload)
    verdict = resp.report["bound"]["verdict"]
    if verdict == Verdict.INCONSISTENT.value:
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "bound": cmd_bound,
    "preimages": cmd_preimages,
    "theta": cmd_theta,
    "render": cmd_render,
    "report": cmd_report,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypdimError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())

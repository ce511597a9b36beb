"""Command line driver.

Subcommands map onto pipeline stage sets:

* ``check``        hypothesis checks only,
* ``synth``        the full pipeline (synthesis, gains, simulation, kernel),
* ``gamma-search`` force a minimal-level search (ignores a fixed level),
* ``simulate``     synthesis, gains and time-domain runs,
* ``kernel``       synthesis, gains and kernel diagnostics.

Exit status: 0 when every certificate passed, 2 when the requested level is
infeasible, 1 on errors (bad config, solver failure).
"""

from __future__ import annotations

import argparse
import sys as _sys

from . import pipeline as pl
from .outputs import emit_outputs

_STAGES = {
    "check": pl.STAGE_CHECK,
    "synth": pl.STAGE_ALL,
    "gamma-search": pl.STAGE_SYNTH,
    "simulate": pl.STAGE_SIMULATE,
    "kernel": pl.STAGE_KERNEL,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardyctrl",
        description="Robust feedback synthesis for diffusion with inverse-square potentials")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("synth", "gamma-search", "simulate", "kernel", "check"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML scenario configuration")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--seed", type=int, default=None, help="base noise seed override")
        p.add_argument("--gamma", type=float, default=None, help="fixed attenuation level override")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"gamma": args.gamma, "seed": args.seed, "out_dir": args.out}
    try:
        cfg = pl.parse_config(args.config, overrides)
    except pl.ConfigError as exc:
        print(exc, file=_sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot read config: {exc}", file=_sys.stderr)
        return 1

    if args.command == "gamma-search":
        cfg.gamma = None

    try:
        report, artifacts = pl.run_pipeline(cfg, stages=_STAGES[args.command])
    except Exception as exc:  # solver/stage failure is an error exit
        print(f"pipeline failed: {exc}", file=_sys.stderr)
        return 1

    emit_outputs(report, artifacts, cfg.out_dir)

    for name, cert in sorted(report.certificates.items()):
        flag = "PASS" if cert["pass"] else "FAIL"
        print(f"[{flag}] {name}: value={cert['value']:.6g} tol={cert['tol']:.6g}")
    for failure in report.failures:
        print(f"[STAGE-FAIL] {failure['stage']}: {failure['error']}")

    if "synthesis" in report.stages_run and not report.feasible:
        return 2
    if report.failures or not report.all_certificates_pass:
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

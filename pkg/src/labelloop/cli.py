"""Command-line entry points: scripted runs, ablations, the standalone
sparse-precision solver, and the HTTP service."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import glasso as glasso_mod
from . import harness
from .core import DataFormatError
from .harness import ConfigError, SessionConfig


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", default="synth:text", help="path to .jsonl/.csv, or synth:text / synth:tab")
    p.add_argument("--budget", type=int, default=300)
    p.add_argument("--eval-every", type=int, default=10)
    p.add_argument("--sampler", choices=["passive", "us", "adp"], default="adp")
    p.add_argument("--alpha", type=float, default=None, help="entropy weight; default 0.5 text, 0.99 tabular")
    p.add_argument("--noise", type=float, default=0.0, help="label-noise rate of the simulated user")
    p.add_argument("--seeds", type=int, default=5, help="number of seeds (0..N-1)")
    p.add_argument("--acc-threshold", type=float, default=0.6)
    p.add_argument("--l2", type=float, default=1e-3)
    p.add_argument("--glasso-lambda", type=float, default=0.1)
    p.add_argument("--edge-tol", type=float, default=1e-4)
    p.add_argument("--min-rows", type=int, default=8)
    p.add_argument("--max-vocab", type=int, default=1000)
    p.add_argument("--synth-n", type=int, default=2000)
    p.add_argument("--synth-flip", type=float, default=0.05)
    p.add_argument("--synth-sep", type=float, default=2.0)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output CSV path")


def _config_from_args(args: argparse.Namespace) -> SessionConfig:
    return SessionConfig(
        dataset=args.dataset,
        budget=args.budget,
        eval_every=args.eval_every,
        sampler=args.sampler,
        alpha=args.alpha,
        acc_threshold=args.acc_threshold,
        noise_rate=args.noise,
        seeds=tuple(range(args.seeds)),
        l2=args.l2,
        glasso_lambda=args.glasso_lambda,
        edge_tol=args.edge_tol,
        min_rows=args.min_rows,
        max_vocab=args.max_vocab,
        synth_n=args.synth_n,
        synth_flip=args.synth_flip,
        synth_sep=args.synth_sep,
        data_seed=args.data_seed,
    )


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args).with_mode(args.mode)
    curves = harness.run_sessions(config)
    csv_text = harness.curves_to_csv(curves)
    out = args.out or "results.csv"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    for curve in curves:
        print(f"seed {curve.seed}: avg test accuracy {harness.average_accuracy(curve):.4f}")
    mean = float(np.mean([harness.average_accuracy(c) for c in curves]))
    print(f"mean over {len(curves)} seeds: {mean:.4f}")
    print(f"wrote {out}")
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    results = harness.run_ablation(config)
    csv_text = harness.ablation_to_csv(results)
    out = args.out or "ablation.csv"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    for mode, curves in results.items():
        accs = [harness.average_accuracy(c) for c in curves]
        print(f"{mode}: mean avg accuracy {float(np.mean(accs)):.4f}")
    print(f"wrote {out}")
    return 0


def _cmd_glasso(args: argparse.Namespace) -> int:
    try:
        S = np.loadtxt(args.input, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"could not read matrix from {args.input}: {exc}") from None
    try:
        result = glasso_mod.graphical_lasso(S, args.lam, tol=args.tol, max_iter=args.max_iter)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    lines = [",".join(repr(float(v)) for v in row) for row in result.theta]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out} (converged={result.converged}, sweeps={result.n_sweeps})")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labelloop")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="scripted session(s) with the simulated user")
    _add_run_args(p_run)
    p_run.add_argument(
        "--mode",
        choices=list(harness.MODES),
        default="activedp",
        help="flag combination, or 'al' for the uncertainty-sampling baseline",
    )
    p_run.set_defaults(func=_cmd_run)

    p_abl = sub.add_parser("ablate", help="run all four flag combinations")
    _add_run_args(p_abl)
    p_abl.set_defaults(func=_cmd_ablate)

    p_gl = sub.add_parser("glasso", help="sparse precision matrix of a CSV covariance")
    p_gl.add_argument("--input", required=True)
    p_gl.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p_gl.add_argument("--tol", type=float, default=1e-5)
    p_gl.add_argument("--max-iter", type=int, default=200)
    p_gl.add_argument("--out", default=None)
    p_gl.set_defaults(func=_cmd_glasso)

    p_srv = sub.add_parser("serve", help="start the HTTP session API")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

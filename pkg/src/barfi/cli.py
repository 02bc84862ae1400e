"""Command-line entry point: ``barfi run|sweep|check-props|ridge-demo``."""
import argparse
import logging
import os
import sys

import numpy as np

from . import ridge, tabular
from .config import load_config
from .errors import ConfigError
from .harness import run, sweep, write_outputs


def parse_seed_range(text):
    """``"3"`` or ``"0..4"`` (inclusive) to a list of seeds."""
    try:
        if ".." in text:
            lo, hi = (int(p) for p in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}; use a..b") from None
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}")
    return list(range(lo, hi + 1))


def cmd_run(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    result = run(cfg)
    out = write_outputs(result, args.out)
    print(f"{cfg.method} on {cfg.env}: {len(result.rows)} episodes, "
          f"final-100 return {result.final_mean(100):.2f}; wrote {out}")
    return 0


def cmd_sweep(args):
    cfg = load_config(args.config)
    for seed, path in sweep(cfg, args.seeds, args.out, args.workers):
        print(f"seed {seed}: {path}")
    return 0


def cmd_check_props(args):
    reports = tabular.check_all(seed=args.seed, cases=args.cases)
    rng = np.random.default_rng(args.seed)
    mdp = tabular.TabularMDP(np.ones((2, 2, 2)) / 2, [[1.0, 0.5], [0.2, 0.8]], [0.5, 0.5], 1)
    theta = rng.normal(size=4)
    potential = 2.5 * np.max(np.abs(mdp.r_p), axis=1) + 1.0
    gap = tabular.one_step_variance_gap(mdp, theta, potential)
    for rep in reports:
        print(rep.line())
    print(f"{'PASS' if gap > 0 else 'FAIL'} prop1-variance: Var(shaped) - Var(primary) = {gap:.6g}")
    return 0 if all(r.passed for r in reports) and gap > 0 else 1


def cmd_ridge_demo(args):
    problem = ridge.random_problem(np.random.default_rng(args.seed), dim=args.dim, lam=args.lam)
    closed = ridge.implicit_lambda_grad(problem)
    neumann = ridge.neumann_lambda_grad(problem)
    fd = ridge.finite_difference_lambda_grad(problem)
    print(f"closed form      {closed:.10g}")
    print(f"neumann implicit {neumann:.10g}")
    print(f"finite diff      {fd:.10g}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="barfi", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="train one seed and write metrics.csv and manifest.json")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", required=True)
    r.set_defaults(fn=cmd_run)

    s = sub.add_parser("sweep", help="independent runs over a seed range, one process each")
    s.add_argument("--config", required=True)
    s.add_argument("--seeds", required=True, type=parse_seed_range)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int)
    s.set_defaults(fn=cmd_sweep)

    c = sub.add_parser("check-props", help="exact checks of the shaping and reward-construction results")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--cases", type=int, default=20)
    c.set_defaults(fn=cmd_check_props)

    d = sub.add_parser("ridge-demo", help="compare implicit, Neumann and finite-difference ridge gradients")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--dim", type=int, default=5)
    d.add_argument("--lam", type=float, default=1.0)
    d.set_defaults(fn=cmd_ridge_demo)
    return p


def main(argv=None):
    level = os.environ.get("BARFI_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

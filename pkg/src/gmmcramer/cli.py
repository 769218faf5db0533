"""``gmmcramer`` command line: data generation, fitting, distances, RL demo."""

import argparse
import logging
import sys

import numpy as np

from . import datasets, distq, gmm1d, gmm_nd, oracle
from .files import PointsFileError, load_model, load_points, save_history, save_model, save_points
from .fit import FitConfig, fit_gmm_to_points
from .gmm1d import Gmm1


def _fmt(x):
    return repr(float(x))


def cmd_gen_data(args):
    if args.n < 1:
        print("error: --n must be >= 1", file=sys.stderr)
        return 1
    if args.shape == "paper2d":
        pts = datasets.paper2d(args.n, args.seed)
    else:
        ref = datasets.reference_gmm(args.dim, args.k, args.seed)
        rng = np.random.default_rng([args.seed, 1])
        pts = datasets.sample_gmm_nd(ref, args.n, rng)
        model_path = args.out_model or args.out + ".model.json"
        save_model(ref, model_path)
        print(f"model={model_path}")
    save_points(pts, args.out)
    print(f"points={args.out}")
    print(f"rows={pts.shape[0]}")
    print(f"columns={pts.shape[1]}")
    return 0


def cmd_fit(args):
    try:
        pts = load_points(args.data, header=args.header)
    except (PointsFileError, OSError) as exc:
        print(f"error: {args.data}: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = FitConfig(steps=args.steps, loss_kind=args.loss, nll_steps=args.nll_steps,
                        t_slices=args.slices,
                        direction_mode="equidistant2d" if args.equidistant else "uniform",
                        lr_p=args.lr_p, lr_mu=args.lr_mu, lr_s=args.lr_s, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.equidistant and pts.shape[1] != 2:
        print("error: --equidistant needs 2-D data", file=sys.stderr)
        return 1
    report = fit_gmm_to_points(pts, args.components, cfg)
    save_model(report.model, args.out_model)
    if args.out_history:
        save_history(report.loss_history, args.out_history)
    print(f"dim={pts.shape[1]}")
    print(f"initial_loss={_fmt(report.initial_loss)}")
    if report.sc2_final_loss is not None:
        print(f"sc2_final_loss={_fmt(report.sc2_final_loss)}")
    print(f"final_loss={_fmt(report.final_loss)}")
    print(f"nonfinite_events={report.nonfinite_events}")
    print(f"penalty_activations={report.penalty_activations}")
    return 2 if report.nonfinite_events else 0


def cmd_dist(args):
    try:
        a, b = load_model(args.model_a), load_model(args.model_b)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    dim_a = 1 if isinstance(a, Gmm1) else a.dim
    dim_b = 1 if isinstance(b, Gmm1) else b.dim
    if dim_a != dim_b:
        print(f"error: dimension mismatch ({dim_a} vs {dim_b})", file=sys.stderr)
        return 1
    if dim_a == 1:
        val = gmm1d.c2_squared(a, b)
        print(f"c2_squared={_fmt(val)}")
        if args.oracle == "quadrature":
            ref = oracle.c2_squared_quadrature(a, b)
            print("oracle=quadrature")
            print(f"oracle_value={_fmt(ref)}")
            print(f"discrepancy={_fmt(abs(val - ref))}")
        elif args.oracle == "energy":
            ref, se = oracle.energy_mc(a, b, args.samples, args.seed)
            print("oracle=energy")
            print(f"oracle_value={_fmt(ref)}")
            print(f"oracle_stderr={_fmt(se)}")
            print(f"discrepancy={_fmt(abs(val - ref))}")
        return 0
    if args.equidistant and dim_a == 2:
        dirs = gmm_nd.directions_equidistant_2d(args.slices)
    else:
        dirs = gmm_nd.sample_directions_uniform(dim_a, args.slices, args.seed)
    raw = gmm_nd.sliced_c2_squared(a, b, dirs, normalized=False)
    print(f"slices={dirs.t}")
    print(f"sliced_raw={_fmt(raw)}")
    print(f"sliced_normalized={_fmt(raw * dirs.weight)}")
    if args.oracle:
        print("oracle=unavailable (one-dimensional only)")
    return 0


def cmd_rl_demo(args):
    mdp = distq.chain_mdp(args.gamma)
    cfg = distq.DemoConfig(episodes=args.episodes)
    tq, hist = distq.train_demo(mdp, cfg, seed=args.seed)
    gaps = distq.evaluate(tq, mdp)
    for (s, a), v in sorted(gaps.items()):
        print(f"c2_squared[{s},{a}]={_fmt(v)}")
    print(f"max_c2_squared={_fmt(max(gaps.values()))}")
    print(f"updates={hist.updates}")
    if args.out_history:
        save_history(hist.losses, args.out_history, header=("update", "loss"))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="gmmcramer", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic point cloud")
    g.add_argument("--shape", choices=("paper2d", "gaussians"), required=True)
    g.add_argument("--n", type=int, default=850)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--dim", type=int, default=2, help="gaussians only")
    g.add_argument("--k", type=int, default=3, help="gaussians only: components")
    g.add_argument("--out-model", help="gaussians only; default OUT.model.json")
    g.set_defaults(func=cmd_gen_data)

    f = sub.add_parser("fit", help="fit a mixture to a point cloud")
    f.add_argument("--data", required=True)
    f.add_argument("--header", action="store_true", help="skip the first CSV line")
    f.add_argument("--components", type=int, default=10)
    f.add_argument("--loss", choices=("sc2", "nll", "sc2+nll"), default="sc2")
    f.add_argument("--steps", type=int, default=1200)
    f.add_argument("--nll-steps", type=int, default=200)
    f.add_argument("--slices", type=int, default=7)
    f.add_argument("--equidistant", action="store_true",
                   help="fixed evenly spaced directions (2-D only)")
    f.add_argument("--lr-p", type=float, default=5e-6)
    f.add_argument("--lr-mu", type=float, default=2e-2)
    f.add_argument("--lr-s", type=float, default=3e-3)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out-model", required=True)
    f.add_argument("--out-history")
    f.set_defaults(func=cmd_fit)

    d = sub.add_parser("dist", help="distance between two model files")
    d.add_argument("--model-a", required=True)
    d.add_argument("--model-b", required=True)
    d.add_argument("--oracle", choices=("quadrature", "energy"))
    d.add_argument("--slices", type=int, default=64)
    d.add_argument("--equidistant", action="store_true")
    d.add_argument("--samples", type=int, default=10 ** 6, help="energy oracle sample pairs")
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_dist)

    r = sub.add_parser("rl-demo", help="tabular distributional Q-learning on a chain")
    r.add_argument("--episodes", type=int, default=distq.DemoConfig.episodes)
    r.add_argument("--gamma", type=float, default=0.9)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out-history")
    r.set_defaults(func=cmd_rl_demo)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

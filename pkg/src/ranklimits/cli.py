"""Command-line entry point: ``ranklimits <subcommand> [flags]``.

Exit codes: 0 success, 1 runtime error, 2 usage error.  A ``--config FILE``
of ``key = value`` lines supplies defaults; explicit flags override it.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, connectivity, experiments
from .estimators import MAP_MAX_N, map_rank, moment_estimate, rank_by_scores
from .model import LinkFunction, Permutation, apply_permutation, disagreement, read_matrix
from .sampler import PERMUTATION, DesignParams, counts, derive_seed, dump_observations, ensemble, sample_batch, stream

DEFAULT_SEED = 20211
log = logging.getLogger("ranklimits")


# ---------------------------------------------------------------------------
# typed flag parsers (raise ArgumentTypeError -> exit 2 naming the flag)


def _num(kind, lo=None, hi=None, lo_open=False, hi_open=False):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value {text!r}")
        if isinstance(v, float) and not math.isfinite(v):
            raise argparse.ArgumentTypeError(f"{text!r} is not finite")
        if lo is not None and (v < lo or (lo_open and v == lo)):
            raise argparse.ArgumentTypeError(f"{text} is out of range")
        if hi is not None and (v > hi or (hi_open and v == hi)):
            raise argparse.ArgumentTypeError(f"{text} is out of range")
        return v
    return parse


pos_int = _num(int, 1)
nonneg_int = _num(int, 0)
n_int = _num(int, 2)
prob = _num(float, 0.0, 1.0, lo_open=True)
pos_float = _num(float, 0.0, lo_open=True)
real = _num(float)
seed_int = _num(int, 0, 2**64 - 1)
k0_float = _num(float, 4.0)


def scale_grid(text: str) -> tuple[float, ...]:
    """``start:stop:count`` -> count evenly spaced values including both ends."""
    try:
        a, b, k = text.split(":")
        a, b, k = float(a), float(b), int(k)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}")
    if k < 1:
        raise argparse.ArgumentTypeError("count must be >= 1")
    if k == 1:
        if a != b:
            raise argparse.ArgumentTypeError("count 1 requires start == stop")
        return (a,)
    if not 0 < a < b:
        raise argparse.ArgumentTypeError("need 0 < start < stop")
    return tuple(float(x) for x in np.linspace(a, b, k))


def scale_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad scale list {text!r}")
    if not vals or any(v <= 0 for v in vals) or any(b <= a for a, b in zip(vals, vals[1:])):
        raise argparse.ArgumentTypeError("scale list must be positive and strictly increasing")
    return vals


def estimator_list(text: str) -> tuple[str, ...]:
    vals = tuple(x.strip() for x in text.split(",") if x.strip())
    if not vals or any(v not in experiments.ESTIMATORS for v in vals):
        raise argparse.ArgumentTypeError(f"estimators must be from {','.join(experiments.ESTIMATORS)}")
    return vals


def float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}")


# ---------------------------------------------------------------------------
# parser


def _common(sp, *, n=True, m=True, p=True, seed=True, out=True, threads=True):
    if n:
        sp.add_argument("--n", type=n_int, required=True)
    if m:
        sp.add_argument("--m", type=pos_int, required=True)
    if p:
        sp.add_argument("--p", type=prob, required=True)
    if seed:
        sp.add_argument("--seed", type=seed_int, default=DEFAULT_SEED)
    if out:
        sp.add_argument("--out", default="-", help="output file, '-' for stdout")
    if threads:
        sp.add_argument("--threads", type=nonneg_int, default=0,
                        help="worker threads, 0 = auto ($RANKLIMITS_THREADS or CPU count)")


def _link_args(sp):
    sp.add_argument("--link", choices=("logistic", "linear"), default="logistic")
    sp.add_argument("--link-params", type=float_list, default=None,
                    help="logistic: scale; linear: slope,floor,ceiling")
    sp.add_argument("--matrix-file", default=None, help="ordered probability matrix (plain text)")
    sp.add_argument("--mask-mode", choices=("per-round", "fixed"), default="per-round")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ranklimits", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--config", default=None, help="file of 'key = value' defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("thresholds", help="closed-form thresholds", allow_abbrev=False)
    _common(sp, seed=False, threads=False)
    sp.add_argument("--k0", type=k0_float, default=4.0)
    sp.add_argument("--csv", action="store_true", help="emit a CSV row instead of the table")

    sp = sub.add_parser("simulate", help="one seeded trial, one CSV row per estimator", allow_abbrev=False)
    _common(sp, threads=False)
    sp.add_argument("--scale", type=pos_float, default=1.0)
    sp.add_argument("--estimators", type=estimator_list, default=("moment",))
    sp.add_argument("--trial", type=nonneg_int, default=0)
    sp.add_argument("--dump-observations", default=None)
    _link_args(sp)

    sp = sub.add_parser("phase", help="exact-recovery phase sweep", allow_abbrev=False)
    _common(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--scales", type=scale_grid)
    g.add_argument("--scale-list", type=scale_list)
    sp.add_argument("--trials", type=pos_int, default=400)
    sp.add_argument("--estimators", type=estimator_list, default=("moment",))
    sp.add_argument("--fixed-pi", action="store_true")
    sp.add_argument("--p-unknown", action="store_true", help="moment estimator without knowledge of p")
    _link_args(sp)

    sp = sub.add_parser("connectivity", help="ensembled Erdos-Renyi connectivity", allow_abbrev=False)
    _common(sp, p=False)
    sp.add_argument("--c", type=real, required=True)
    sp.add_argument("--trials", type=pos_int, default=1000)

    sp = sub.add_parser("failure-event", help="Monte Carlo swap-failure probability vs bounds", allow_abbrev=False)
    _common(sp)
    sp.add_argument("--scale", type=pos_float, default=1.0)
    sp.add_argument("--i1", type=nonneg_int, default=0)
    sp.add_argument("--i2", type=nonneg_int, default=1)
    sp.add_argument("--t", type=pos_float, default=0.25)
    sp.add_argument("--trials", type=pos_int, default=100000)
    _link_args(sp)

    sp = sub.add_parser("census", help="adjacent-pair failure census", allow_abbrev=False)
    _common(sp)
    sp.add_argument("--scale", type=pos_float, default=1.0)
    sp.add_argument("--trials", type=pos_int, default=2000)
    _link_args(sp)
    return parser


def read_config(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("_", "-")] = v
    return out


def _config_argv(cfg: dict) -> list[str]:
    argv = []
    for k, v in cfg.items():
        if v.lower() in ("true", "yes", "on"):
            argv.append(f"--{k}")
        elif v.lower() in ("false", "no", "off"):
            continue
        else:
            argv += [f"--{k}", v]
    return argv


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            cfg = read_config(known.config)
        except (OSError, ValueError) as exc:
            parser.error(f"argument --config: {exc}")
        # file options go right after the subcommand so explicit flags (later) win
        cmd_pos = next((i for i, a in enumerate(argv) if a in _subcommands(parser)), None)
        if cmd_pos is not None:
            argv = argv[:cmd_pos + 1] + _config_argv(cfg) + argv[cmd_pos + 1:]
    args = parser.parse_args(argv)
    _cross_validate(parser, args)
    return args


def _subcommands(parser) -> set[str]:
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return set(a.choices)
    return set()


def _cross_validate(parser, args) -> None:
    if args.command == "connectivity":
        p = connectivity.connectivity_p(args.n, args.m, args.c)
        if not 0 < p <= 1:
            parser.error(f"argument --c: derived p = {p:.6g} is outside (0, 1]")
    if getattr(args, "estimators", None) and "map" in args.estimators and args.n > MAP_MAX_N:
        parser.error(f"argument --estimators: map needs --n <= {MAP_MAX_N}")
    if args.command == "failure-event":
        for flag in ("i1", "i2"):
            if getattr(args, flag) >= args.n:
                parser.error(f"argument --{flag}: must be < n")
        if args.i1 == args.i2:
            parser.error("argument --i2: must differ from --i1")
    if getattr(args, "link_params", None) is not None:
        want = 1 if args.link == "logistic" else 3
        if len(args.link_params) != want:
            parser.error(f"argument --link-params: {args.link} takes {want} value(s)")


# ---------------------------------------------------------------------------
# dispatch


def _link(args) -> LinkFunction:
    if args.link == "logistic":
        return LinkFunction.logistic(*(args.link_params or (1.0,)))
    return LinkFunction.linear(*(args.link_params or (1.0, 0.05, 0.95)))


def _truth(args):
    if args.matrix_file:
        M = read_matrix(args.matrix_file)
        if M.n != args.n:
            raise ValueError(f"matrix file has n = {M.n}, but --n {args.n}")
        return M
    return experiments.truth_matrix(args.n, _link(args), args.scale)


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_thresholds(args) -> None:
    th = bounds.thresholds(args.n, args.m, args.p, args.k0)
    vals = [("imposs_sq", th.impossibility_sq), ("achiev_sq", th.achievability_sq),
            ("imposs_bar", th.impossibility_bar), ("achiev_bar", th.achievability_bar),
            ("moment_bar", th.moment_bar), ("shah_bar", th.shah_lower_bar)]
    if args.csv:
        header = "n,m,p,k0," + ",".join(k for k, _ in vals)
        row = ",".join(experiments._fmt(v) for v in (args.n, args.m, args.p, args.k0, *(v for _, v in vals)))
        _write(header + "\n" + row + "\n", args.out)
    else:
        lines = [f"thresholds at n={args.n} m={args.m} p={args.p:g} k0={args.k0:g}"]
        lines += [f"  {k:<12s} {v:.10g}" for k, v in vals]
        _write("\n".join(lines) + "\n", args.out)


def _cmd_simulate(args) -> None:
    M = _truth(args)
    seed = derive_seed(args.seed, 0, args.trial)
    pi_star = Permutation.random(args.n, stream(seed, PERMUTATION))
    batch = sample_batch(apply_permutation(M, pi_star), DesignParams(args.p, args.m, args.mask_mode, seed))
    if args.dump_observations:
        dump_observations(batch, args.dump_observations)
    rows = []
    for est in args.estimators:
        if est == "moment":
            res = rank_by_scores(moment_estimate(ensemble(batch), args.p))
        else:
            res = map_rank(counts(batch), M)
        d = disagreement(res.pi_hat, pi_star)
        rows.append((args.trial, est, args.n, args.m, args.p, args.scale, d == 0.0, d, res.tie_count))
    header = ("trial", "estimator", "n", "m", "p", "scale", "exact", "disagreement", "tie_count")
    text = ",".join(header) + "\n" + "".join(",".join(experiments._fmt(v) for v in r) + "\n" for r in rows)
    _write(text, args.out)


def _cmd_phase(args) -> None:
    grid = args.scales or args.scale_list
    cfg = experiments.SweepConfig(
        n=args.n, m=args.m, p=args.p, scale_grid=grid, trials_per_point=args.trials,
        estimators=args.estimators, master_seed=args.seed, link=_link(args),
        mask_mode=args.mask_mode, fixed_pi=args.fixed_pi, p_known=not args.p_unknown)
    points = experiments.phase_sweep(cfg, threads=args.threads)
    _write(experiments.format_csv(points), args.out)


def _cmd_connectivity(args) -> None:
    r = connectivity.connectivity_experiment(args.n, args.m, args.c, args.trials, args.seed, args.threads)
    header = "n,m,c,p,trials,empirical,analytic,std_err"
    row = ",".join(experiments._fmt(v) for v in (r.n, r.m, r.c, r.p, r.trials, r.empirical, r.analytic, r.std_err))
    _write(header + "\n" + row + "\n", args.out)


def _cmd_failure_event(args) -> None:
    M = _truth(args)
    r = experiments.failure_event_mc(M, args.p, args.m, args.i1, args.i2, args.trials,
                                     args.seed, args.threads, args.t)
    _write(experiments.format_csv([r]), args.out)


def _cmd_census(args) -> None:
    M = _truth(args)
    r = experiments.adjacent_failure_census(M, args.p, args.m, args.trials, args.seed,
                                            args.threads, args.mask_mode)
    header = ("n", "m", "p", "scale", "trials", "mean_Xn", "prob_Xn_positive")
    row = (r.n, r.m, r.p, args.scale, r.trials, r.mean_Xn, r.prob_Xn_positive)
    _write(",".join(header) + "\n" + ",".join(experiments._fmt(v) for v in row) + "\n", args.out)


COMMANDS = {
    "thresholds": _cmd_thresholds,
    "simulate": _cmd_simulate,
    "phase": _cmd_phase,
    "connectivity": _cmd_connectivity,
    "failure-event": _cmd_failure_event,
    "census": _cmd_census,
}


def run(args: argparse.Namespace) -> int:
    echo = {k: v for k, v in vars(args).items() if k not in ("verbose",)}
    log.info("config %s", json.dumps(echo, sort_keys=True, default=list))
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"ranklimits: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())

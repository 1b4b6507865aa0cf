"""Swap-failure probability for one adjacent pair over a grid of rounds m, with PZ and Chernoff values."""

import argparse
from dataclasses import dataclass

from ranklimits.experiments import emit_csv, failure_event_mc, truth_matrix
from ranklimits.model import LinkFunction


@dataclass
class FailureRun:
    n: int = 10
    p: float = 0.5
    scale: float = 1.0
    pair: int = 4
    rounds: str = "1,2,5,10,20,50"
    t: float = 0.25
    trials: int = 100_000
    seed: int = 6
    threads: int = 0
    out: str = "-"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(FailureRun()).items():
        ap.add_argument(f"--{name}", type=type(default), default=default)
    run = FailureRun(**vars(ap.parse_args()))
    M = truth_matrix(run.n, LinkFunction.logistic(), run.scale)
    results = [failure_event_mc(M, run.p, int(m), run.pair, run.pair + 1, run.trials, run.seed, run.threads, run.t)
               for m in run.rounds.split(",")]
    emit_csv(results, run.out)


if __name__ == "__main__":
    main()

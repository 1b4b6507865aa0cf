"""Connectivity probability of the ensembled comparison graph against its double-exponential limit."""

import argparse
import csv
import sys
from dataclasses import dataclass

from ranklimits.connectivity import connectivity_experiment
from ranklimits.experiments import _fmt


@dataclass
class ConnectivityRun:
    n: int = 400
    m: int = 2
    c_min: float = -1.0
    c_max: float = 3.0
    points: int = 9
    trials: int = 3000
    seed: int = 11
    threads: int = 0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(ConnectivityRun()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", dest=name, type=type(default), default=default)
    run = ConnectivityRun(**vars(ap.parse_args()))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "m", "c", "p", "trials", "empirical", "analytic", "std_err"])
    step = (run.c_max - run.c_min) / max(run.points - 1, 1)
    for k in range(run.points):
        r = connectivity_experiment(run.n, run.m, run.c_min + k * step, run.trials, run.seed, run.threads)
        w.writerow([_fmt(v) for v in (r.n, r.m, r.c, r.p, r.trials, r.empirical, r.analytic, r.std_err)])


if __name__ == "__main__":
    main()

"""Independent reference implementations used as test oracles."""

import itertools
import math


def brute_force_map(wins, M):
    """All maximizers of the observation log-likelihood, by direct enumeration.

    ``perm[r]`` is the label placed at rank r; each candidate's likelihood is a
    plain double loop over ordered label pairs.
    """
    n = len(M)
    scored = []
    for perm in itertools.permutations(range(n)):
        rank = [0] * n
        for r, u in enumerate(perm):
            rank[u] = r
        ll = 0.0
        for u in range(n):
            for v in range(n):
                if u != v and wins[u][v]:
                    ll += wins[u][v] * math.log(M[rank[u]][rank[v]])
        scored.append((perm, ll))
    best = max(ll for _, ll in scored)
    tol = 1e-9 * max(1.0, abs(best))
    return {perm for perm, ll in scored if ll >= best - tol}


def logistic(x):
    return 1.0 / (1.0 + math.exp(-x))

"""One-sided Jacobi sweep kernels.

The sweep loop is the only hand-written hot loop in the package: everything
else is BLAS/LAPACK-bound.  Two interchangeable implementations are provided:

* ``_sweeps_numba`` -- cyclic pair ordering, explicit inner loops compiled
  with ``numba.njit``;
* ``_sweeps_numpy`` -- pure-numpy fallback using the round-robin tournament
  ordering, which rotates each round's disjoint pairs in one vectorized
  step.

Both orderings visit every pair once per sweep and share the relative
pairwise stopping criterion, so they converge to the same factorization up
to column signs.  The active backend is chosen at call time: setting the
environment variable ``SKETCHSVD_NO_NUMBA=1`` (or failing to import numba)
selects the numpy path.  ``benchmarks/bench_jacobi.py`` compares the two.

Both kernels operate in place on ``G`` (rows are the columns of the matrix
being decomposed) and ``W`` (accumulated rotations, rows), and return
``(sweeps_used, converged, worst_ratio)`` where ``worst_ratio`` is the largest
normalized off-diagonal Gram entry seen in the final sweep.
"""

import math
import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


def use_numba():
    """True when the compiled backend is available and not disabled."""
    return _HAVE_NUMBA and not os.environ.get("SKETCHSVD_NO_NUMBA")


def backend_name():
    return "numba" if use_numba() else "numpy"


def _round_robin_pairs(q):
    """Tournament schedule: q-1 (or q) rounds of disjoint index pairs
    covering every unordered pair exactly once per sweep."""
    players = list(range(q))
    if q % 2 == 1:
        players.append(-1)  # bye
    half = len(players) // 2
    rounds = []
    for _ in range(len(players) - 1):
        left = players[:half]
        right = players[half:][::-1]
        pairs = [
            (min(a, b), max(a, b))
            for a, b in zip(left, right)
            if a != -1 and b != -1
        ]
        rounds.append(
            (np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))
        )
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _sweeps_numpy(G, W, tol, max_sweeps):
    # Vectorized variant: within each tournament round the pairs are
    # disjoint, so all their rotations commute and apply in one shot.
    q = G.shape[0]
    sweeps = 0
    worst = 0.0
    if q < 2:
        return 1, True, 0.0
    rounds = _round_robin_pairs(q)
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        worst = 0.0
        rotated = False
        nrm = np.einsum("ij,ij->i", G, G)
        for ii, jj in rounds:
            a = nrm[ii]
            b = nrm[jj]
            c = np.einsum("ij,ij->i", G[ii], G[jj])
            live = (a > 0.0) & (b > 0.0)
            ratio = np.zeros_like(c)
            np.divide(np.abs(c), np.sqrt(a * b), out=ratio, where=live)
            if ratio.size:
                worst = max(worst, float(ratio.max()))
            act = live & (ratio > tol)
            if not act.any():
                continue
            rotated = True
            ia, ja, ca = ii[act], jj[act], c[act]
            zeta = (b[act] - a[act]) / (2.0 * ca)
            t = np.copysign(1.0, zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            cs = 1.0 / np.sqrt(1.0 + t * t)
            sn = cs * t
            Gi, Gj = G[ia], G[ja]
            G[ia] = cs[:, None] * Gi - sn[:, None] * Gj
            G[ja] = sn[:, None] * Gi + cs[:, None] * Gj
            Wi, Wj = W[ia], W[ja]
            W[ia] = cs[:, None] * Wi - sn[:, None] * Wj
            W[ja] = sn[:, None] * Wi + cs[:, None] * Wj
            nrm[ia] = np.einsum("ij,ij->i", G[ia], G[ia])
            nrm[ja] = np.einsum("ij,ij->i", G[ja], G[ja])
        if not rotated:
            return sweeps, True, worst
    return sweeps, False, worst


def _sweeps_loops(G, W, tol, max_sweeps):  # pragma: no cover - exercised via numba
    q, p = G.shape
    qw = W.shape[1]
    sweeps = 0
    worst = 0.0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        worst = 0.0
        rotated = False
        for i in range(q - 1):
            for j in range(i + 1, q):
                a = 0.0
                b = 0.0
                c = 0.0
                for k in range(p):
                    gi = G[i, k]
                    gj = G[j, k]
                    a += gi * gi
                    b += gj * gj
                    c += gi * gj
                if a == 0.0 or b == 0.0:
                    continue
                ratio = abs(c) / math.sqrt(a * b)
                if ratio > worst:
                    worst = ratio
                if ratio <= tol:
                    continue
                rotated = True
                zeta = (b - a) / (2.0 * c)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                cs = 1.0 / math.sqrt(1.0 + t * t)
                sn = cs * t
                for k in range(p):
                    gi = G[i, k]
                    gj = G[j, k]
                    G[i, k] = cs * gi - sn * gj
                    G[j, k] = sn * gi + cs * gj
                for k in range(qw):
                    wi = W[i, k]
                    wj = W[j, k]
                    W[i, k] = cs * wi - sn * wj
                    W[j, k] = sn * wi + cs * wj
        if not rotated:
            return sweeps, True, worst
    return sweeps, False, worst


if _HAVE_NUMBA:
    _sweeps_numba = njit(cache=True)(_sweeps_loops)


def run_sweeps(G, W, tol, max_sweeps):
    """Dispatch to the compiled kernel or the numpy fallback."""
    if use_numba():
        return _sweeps_numba(G, W, tol, max_sweeps)
    return _sweeps_numpy(G, W, tol, max_sweeps)

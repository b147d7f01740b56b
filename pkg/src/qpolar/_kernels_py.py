"""Numpy implementations of the numerical hot paths.

Drop-in fallback for the compiled module qpolar._kernels; both expose the
same six functions with identical signatures.  All entropies and mutual
informations are returned in nats, the callers divide by ln(q).
"""

import numpy as np

# numpy's pairwise summation already gives compensated-summation accuracy
# on the long reductions below; the compiled backend uses explicit Kahan.


def entropy_nats(mass):
    """Row-wise Shannon entropy in nats of an (n, q) array of pmfs."""
    mass = np.asarray(mass, dtype=np.float64)
    pos = mass > 0.0
    logs = np.zeros_like(mass)
    np.log(mass, out=logs, where=pos)
    return -(mass * logs).sum(axis=1)


def capacity_nats(table):
    """Uniform-input mutual information in nats of a (q, m) channel table."""
    table = np.asarray(table, dtype=np.float64)
    q = table.shape[0]
    marg = table.mean(axis=0)
    pos = table > 0.0
    ratio = np.divide(table, marg[None, :], out=np.ones_like(table), where=pos)
    logs = np.zeros_like(table)
    np.log(ratio, out=logs, where=pos)
    return float((table * logs).sum() / q)


def split_tables(table_a, table_b, want_plus=True):
    """Single-step transform tables for one channel pair.

    table_a feeds the first use (the one hidden behind the modular sum),
    table_b the second.  Returns (minus, plus) where
      minus[u1, y1*m + y2]            = (1/q) sum_u2 A[u1-u2, y1] B[u2, y2]
      plus[u2, (y1*m + y2)*q + u1]    = (1/q) A[u1-u2, y1] B[u2, y2]
    with index arithmetic mod q.  plus is None when want_plus is false.
    """
    A = np.ascontiguousarray(table_a, dtype=np.float64)
    B = np.ascontiguousarray(table_b, dtype=np.float64)
    q, m = A.shape
    u = np.arange(q)
    shifted = A[(u[:, None] - u[None, :]) % q]          # [u1, u2, y1]
    minus = np.einsum("abi,bj->aij", shifted, B) / q
    minus = np.ascontiguousarray(minus.reshape(q, m * m))
    if not want_plus:
        return minus, None
    plus = np.einsum("abi,bj->bija", shifted, B) / q    # [u2, y1, y2, u1]
    plus = np.ascontiguousarray(plus.reshape(q, m * m * q))
    return minus, plus


def min_shift_l1(mass):
    """Row-wise min over d != 0 of ||p - p shifted by d||_1, (n, q) input."""
    mass = np.asarray(mass, dtype=np.float64)
    q = mass.shape[1]
    best = np.full(mass.shape[0], np.inf)
    for d in range(1, q):
        dist = np.abs(mass - np.roll(mass, d, axis=1)).sum(axis=1)
        np.minimum(best, dist, out=best)
    return best


def convolve_pairs(p_rows, r_rows):
    """Row-wise cyclic convolution of two (n, q) arrays."""
    P = np.asarray(p_rows, dtype=np.float64)
    R = np.asarray(r_rows, dtype=np.float64)
    out = np.zeros_like(P)
    for i in range(P.shape[1]):
        out += P[:, i : i + 1] * np.roll(R, i, axis=1)
    return out


def mixture_convolution_entropy_nats(w1, posts1, w2, posts2):
    """Expected entropy in nats of the convolution of two posterior draws.

    Computes sum_{a,b} w1[a] w2[b] H(posts1[a] * posts2[b]) where * is the
    cyclic convolution, chunking the pair enumeration to bound memory.
    """
    w1 = np.asarray(w1, dtype=np.float64)
    w2 = np.asarray(w2, dtype=np.float64)
    P1 = np.asarray(posts1, dtype=np.float64)
    P2 = np.asarray(posts2, dtype=np.float64)
    q = P1.shape[1]
    idx = (np.arange(q)[None, :] - np.arange(q)[:, None]) % q
    circ2 = P2[:, idx]                                  # [b, i, m]
    n1, n2 = P1.shape[0], P2.shape[0]
    chunk = max(1, 4_000_000 // max(1, n2 * q))
    total = 0.0
    for lo in range(0, n1, chunk):
        hi = min(n1, lo + chunk)
        conv = np.einsum("ai,bim->abm", P1[lo:hi], circ2)
        pos = conv > 0.0
        logs = np.zeros_like(conv)
        np.log(conv, out=logs, where=pos)
        ent = -(conv * logs).sum(axis=2)
        total += float(w1[lo:hi] @ ent @ w2)
    return total

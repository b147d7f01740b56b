"""Output-alphabet canonicalization.

Outputs whose likelihood columns are proportional induce the same input
posterior and can be merged without touching any information quantity;
zero-mass outputs carry nothing and are dropped.  Canonicalizing after
every transform step is what keeps the recursion tractable, since the raw
output alphabet squares (and more) at each level.

Merging is exact only: no lossy quantization of nearby-but-distinct
posteriors ever happens here.
"""

from __future__ import annotations

import numpy as np

from .channels import Channel
from .dists import RENORM_FLOOR

# posteriors matching within this relative tolerance are the same output
MERGE_RTOL = 1e-9
MERGE_ATOL = 1e-12
# bucket key resolution used to avoid quadratic pairwise comparison
KEY_DECIMALS = 12
# tolerance for the multiset comparison in equivalent()
EQUIV_TOL = 1e-9


def _merge_groups(table: np.ndarray):
    """Group output columns whose posteriors match; returns index lists.

    Columns are bucketed by a rounded posterior key and then verified in
    plain Python against each bucket representative, which is much
    cheaper than numpy dispatch at these sizes (q <= a few dozen).
    """
    colsums = table.sum(axis=0)
    keep = np.flatnonzero(colsums > 0.0)
    posts = (table[:, keep] / colsums[keep]).T
    keys = np.round(posts, KEY_DECIMALS)
    post_rows = posts.tolist()
    key_rows = [tuple(k) for k in keys.tolist()]

    buckets: dict = {}
    groups: list = []   # each entry: [rep_posterior, list of column indices]
    for pos, y in enumerate(keep):
        post = post_rows[pos]
        reps = buckets.setdefault(key_rows[pos], [])
        for rep in reps:
            rep_post = rep[0]
            if all(
                abs(a - b) <= MERGE_ATOL + MERGE_RTOL * abs(b)
                for a, b in zip(post, rep_post)
            ):
                rep[1].append(int(y))
                break
        else:
            rep = [post, [int(y)]]
            reps.append(rep)
            groups.append(rep)
    return groups


def canonicalize(channel: Channel) -> Channel:
    """Minimal equivalent channel: merged outputs, deterministic order.

    Output columns carrying the same posterior are summed, zero-mass
    outputs dropped, and the survivors ordered by (posterior vector
    lexicographic, then marginal) and relabeled 0..m'-1.  Idempotent at
    the bit level: rows already within RENORM_FLOOR of stochastic are
    left untouched, so a second pass reproduces the table exactly.
    """
    table = channel.table
    merged = []
    for _, members in _merge_groups(table):
        if len(members) == 1:
            merged.append(table[:, members[0]].copy())
        else:
            merged.append(table[:, members].sum(axis=1))
    # sort keys recomputed from the merged columns so a second pass sees
    # exactly the same values
    def sort_key(col):
        total = col.sum()
        return (tuple(col / total), float(total))

    merged.sort(key=sort_key)
    columns = np.column_stack(merged)
    sums = columns.sum(axis=1)
    fix = np.abs(sums - 1.0) > RENORM_FLOOR
    if fix.any():
        columns[fix] /= sums[fix, None]
    return Channel(channel.alphabet, range(columns.shape[1]), columns)


def equivalent(first: Channel, second: Channel) -> bool:
    """Whether two channels have the same canonical output mixture.

    True iff after canonicalization the multisets of (marginal, posterior)
    pairs agree componentwise within EQUIV_TOL.  Labels are ignored.
    """
    if first.alphabet.q != second.alphabet.q:
        raise ValueError(
            f"alphabet mismatch: q={first.alphabet.q} vs q={second.alphabet.q}"
        )
    a = canonicalize(first)
    b = canonicalize(second)
    if a.num_outputs != b.num_outputs:
        return False
    cols_a, cols_b = a.table, b.table
    marg_a = cols_a.sum(axis=0) / a.q
    marg_b = cols_b.sum(axis=0) / b.q
    if np.abs(marg_a - marg_b).max() > EQUIV_TOL:
        return False
    post_a = cols_a / cols_a.sum(axis=0, keepdims=True)
    post_b = cols_b / cols_b.sum(axis=0, keepdims=True)
    return bool(np.abs(post_a - post_b).max() <= EQUIV_TOL)

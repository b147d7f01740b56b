"""Finite q-ary-input discrete memoryless channels.

A channel is a q-by-m conditional probability table together with an
ordered list of opaque output labels.  Capacity here always means the
mutual information developed under uniformly distributed inputs, in
base-q units, so it lives in [0, 1] regardless of alphabet size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _backend as kernels
from .dists import (
    Alphabet,
    Dist,
    RENORM_FLOOR,
    RENORM_LIMIT,
    SUM_TOLERANCE,
    _clamp_unit,
)


class Channel:
    """Immutable q-ary-input DMC with labeled outputs.

    table[x, y] is the probability of output labels[y] given input x.
    Labels are opaque values; the transform step uses tuples so synthesized
    outputs stay self-describing.
    """

    __slots__ = ("alphabet", "labels", "table")

    def __init__(self, alphabet: Alphabet, labels, table):
        table = np.array(table, dtype=np.float64)
        labels = tuple(labels)
        if table.ndim != 2 or table.shape[0] != alphabet.q:
            raise ValueError(
                f"table must be ({alphabet.q}, m), got shape {table.shape}"
            )
        if len(labels) != table.shape[1]:
            raise ValueError(
                f"{len(labels)} labels for {table.shape[1]} output columns"
            )
        if len(set(labels)) != len(labels):
            raise ValueError("output labels must be distinct")
        if not np.all(np.isfinite(table)):
            raise ValueError("table contains non-finite entries")
        if table.min(initial=0.0) < -SUM_TOLERANCE:
            raise ValueError("table contains negative entries")
        np.clip(table, 0.0, None, out=table)
        sums = table.sum(axis=1)
        for x, total in enumerate(sums):
            if abs(total - 1.0) >= RENORM_LIMIT:
                raise ValueError(
                    f"row {x} is not stochastic: sums to {float(total)!r}"
                )
        fix = np.abs(sums - 1.0) > RENORM_FLOOR
        if fix.any():
            table[fix] /= sums[fix, None]
        table.flags.writeable = False
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "table", table)

    def __setattr__(self, name, value):
        raise AttributeError("Channel is immutable")

    @property
    def q(self) -> int:
        return self.alphabet.q

    @property
    def num_outputs(self) -> int:
        return self.table.shape[1]

    def __repr__(self):
        return f"Channel(q={self.q}, outputs={self.num_outputs})"


@dataclass(frozen=True)
class PosteriorView:
    """A channel seen as a mixture of input posteriors, one per output.

    entries[k] = (weight, posterior) where weight is the output's marginal
    under uniform input and posterior is the conditional input law.
    Outputs with zero marginal are omitted.
    """

    entries: tuple

    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.entries])

    def posterior_matrix(self) -> np.ndarray:
        return np.array([p.mass for _, p in self.entries])


def make_channel(q: int, labels, table) -> Channel:
    """Validated channel from raw parts; rows are normalized if close."""
    return Channel(Alphabet(q), labels, table)


def capacity(channel: Channel) -> float:
    """Uniform-input mutual information in base-q units, clamped to [0, 1]."""
    raw = kernels.capacity_nats(channel.table) / math.log(channel.q)
    return _clamp_unit(raw, "capacity")


def posteriors(channel: Channel) -> PosteriorView:
    """Posterior decomposition of a channel under uniform input.

    The average posterior entropy equals 1 - capacity(channel), which is
    the identity the transform module leans on.
    """
    q = channel.q
    colsums = channel.table.sum(axis=0)
    entries = []
    for y in range(channel.num_outputs):
        if colsums[y] <= 0.0:
            continue
        weight = float(colsums[y] / q)
        post = Dist(channel.alphabet, channel.table[:, y] / colsums[y])
        entries.append((weight, post))
    view = PosteriorView(tuple(entries))
    total = float(view.weights().sum())
    if abs(total - 1.0) > 1e-9:
        raise ArithmeticError(f"posterior weights sum to {total!r}")
    mixture = view.weights() @ view.posterior_matrix()
    if np.abs(mixture - 1.0 / q).max() > 1e-9:
        raise ArithmeticError("posterior mixture does not recover the uniform prior")
    return view


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

ERASE = "ERASE"


def noiseless(q: int) -> Channel:
    """Identity channel: output equals input."""
    return make_channel(q, range(q), np.eye(q))


def useless(q: int, m: int = 2) -> Channel:
    """Channel whose output is independent of the input (all rows equal)."""
    if m < 1:
        raise ValueError(f"need at least one output, got m={m}")
    return make_channel(q, range(m), np.full((q, m), 1.0 / m))


def erasure_channel(q: int, e: float) -> Channel:
    """Symmetric erasure channel: the input survives with probability 1 - e.

    Outputs are the q input symbols plus the ERASE marker.
    """
    if not 0.0 <= e <= 1.0:
        raise ValueError(f"erasure probability must be in [0, 1], got {e}")
    table = np.hstack([np.eye(q) * (1.0 - e), np.full((q, 1), e)])
    return make_channel(q, list(range(q)) + [ERASE], table)


def subgroup_channel(q: int, d: int) -> Channel:
    """Channel revealing the input modulo d, for d a proper divisor of q.

    Requires composite q.  This channel is a fixed point of the plain
    transform: adding two inputs preserves exactly the mod-d information,
    so the minus branch makes no polarization progress.
    """
    alphabet = Alphabet(q)
    if alphabet.is_prime:
        raise ValueError(f"subgroup channel needs composite q, got q={q}")
    if d <= 1 or d >= q or q % d != 0:
        raise ValueError(f"d={d} is not a proper nontrivial divisor of q={q}")
    table = np.zeros((q, d))
    for x in range(q):
        table[x, x % d] = 1.0
    return Channel(alphabet, range(d), table)


def random_channel(q: int, m: int, seed: int) -> Channel:
    """Channel with rows drawn independently uniform on the m-simplex."""
    if m < 1:
        raise ValueError(f"need at least one output, got m={m}")
    rng = np.random.default_rng(seed)
    return make_channel(q, range(m), rng.dirichlet(np.ones(m), size=q))


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def store_channel(channel: Channel, path) -> None:
    """Write a channel as JSON: fields q, labels (strings), rows."""
    doc = {
        "q": channel.q,
        "labels": [str(label) for label in channel.labels],
        "rows": [[float(v) for v in row] for row in channel.table],
    }
    if len(set(doc["labels"])) != len(doc["labels"]):
        raise ValueError("labels collide after string conversion")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_channel(path) -> Channel:
    """Read a channel written by store_channel (or by hand)."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"channel file {path} is not valid JSON: {exc}") from exc
    for key in ("q", "labels", "rows"):
        if key not in doc:
            raise ValueError(f"channel file {path} is missing field {key!r}")
    q = doc["q"]
    if not isinstance(q, int):
        raise ValueError(f"channel file {path}: q must be an integer")
    rows = doc["rows"]
    if not isinstance(rows, list) or len(rows) != q:
        raise ValueError(f"channel file {path}: expected {q} rows")
    return make_channel(q, [str(l) for l in doc["labels"]], rows)

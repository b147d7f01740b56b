"""The single-step channel transform.

Two independent uses of a channel W are combined through the invertible
map (x1, x2) -> (u1, u2) = (x1 + x2 mod q, x2).  The first synthesized
channel sees only the pair of outputs (worse than W), the second also
sees u1 (better than W):

    minus(y1, y2 | u1)     = (1/q) sum_u2 W(y1 | u1 - u2) W(y2 | u2)
    plus(y1, y2, u1 | u2)  = (1/q) W(y1 | u1 - u2) W(y2 | u2)

Their capacities straddle I(W) and sum to exactly 2 I(W).

The permuted variant relabels the second use's input by a bijection pi
before the modular addition, i.e. it splits the pair (W, W o pi^{-1}).
For prime q this changes nothing essential, but for composite q the plain
transform has fixed points (see subgroup_channel) and a well-chosen pi
restores a strict capacity gap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _backend as kernels
from .channels import Channel, capacity, posteriors
from .dists import Alphabet

# tolerance for the exact chain-rule identity, float drift only
CHAIN_RULE_TOL = 1e-9


@dataclass(frozen=True)
class Permutation:
    """A bijection on {0, ..., q-1}, stored as the image vector."""

    alphabet: Alphabet
    mapping: tuple

    def __post_init__(self):
        mapping = tuple(int(v) for v in self.mapping)
        if sorted(mapping) != list(range(self.alphabet.q)):
            raise ValueError(
                f"mapping {mapping} is not a bijection on 0..{self.alphabet.q - 1}"
            )
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Permutation":
        return cls(alphabet, tuple(range(alphabet.q)))

    @classmethod
    def from_string(cls, text: str, alphabet: Alphabet) -> "Permutation":
        """Parse comma-separated images, e.g. "0,2,1,3"."""
        try:
            values = tuple(int(tok) for tok in text.replace(" ", "").split(","))
        except ValueError as exc:
            raise ValueError(f"cannot parse permutation {text!r}") from exc
        return cls(alphabet, values)

    def inverse_vector(self) -> np.ndarray:
        inv = np.empty(self.alphabet.q, dtype=np.intp)
        for x, v in enumerate(self.mapping):
            inv[v] = x
        return inv

    def is_identity(self) -> bool:
        return self.mapping == tuple(range(self.alphabet.q))

    def __str__(self):
        return "[" + ",".join(str(v) for v in self.mapping) + "]"


class SplitPair(NamedTuple):
    minus: Channel
    plus: Channel


class Gap(NamedTuple):
    minus: float  # I(W) - I(minus)
    plus: float   # I(plus) - I(W)


def _pair_labels(labels, q):
    minus_labels = tuple(itertools.product(labels, labels))
    plus_labels = tuple(itertools.product(labels, labels, range(q)))
    return minus_labels, plus_labels


def _split_with_second_table(channel: Channel, second_table: np.ndarray) -> SplitPair:
    minus_table, plus_table = kernels.split_tables(channel.table, second_table)
    minus_labels, plus_labels = _pair_labels(channel.labels, channel.q)
    return SplitPair(
        Channel(channel.alphabet, minus_labels, minus_table),
        Channel(channel.alphabet, plus_labels, plus_table),
    )


def split(channel: Channel) -> SplitPair:
    """One transform step applied to two copies of the channel."""
    return _split_with_second_table(channel, channel.table)


def split_permuted(channel: Channel, pi: Permutation) -> SplitPair:
    """Transform step with the second use's input relabeled by pi.

    With the identity permutation this is table-identical to split().
    The chain rule holds for every pi because the input map stays
    invertible and keeps (u1, u2) independent uniform.
    """
    if pi.alphabet != channel.alphabet:
        raise ValueError(
            f"alphabet mismatch: channel q={channel.q}, permutation q={pi.alphabet.q}"
        )
    second = channel.table[pi.inverse_vector()]
    return _split_with_second_table(channel, second)


def gap(channel: Channel) -> Gap:
    """Capacity gaps opened by one transform step.

    Both gaps are computed independently; the chain rule forces them to
    agree, and a disagreement beyond float drift means a broken table.
    """
    pair = split(channel)
    base = capacity(channel)
    minus_gap = base - capacity(pair.minus)
    plus_gap = capacity(pair.plus) - base
    if abs(minus_gap - plus_gap) > CHAIN_RULE_TOL:
        raise ArithmeticError(
            f"chain rule violated: minus gap {minus_gap!r} vs plus gap {plus_gap!r}"
        )
    return Gap(minus_gap, plus_gap)


def entropy_gain(first: Channel, second: Channel) -> float:
    """Conditional-entropy increase of the modular input sum.

    Computed from the posterior decompositions: the expected entropy of
    the convolution of one posterior from each channel, minus the larger
    of the two average posterior entropies.  When both arguments are the
    same channel W this equals gap(W).minus by construction, through an
    entirely different computation path (no transform tables are built).

    Nonnegative for every pair; requires a prime alphabet, matching the
    regime where the strict lower bound is guaranteed.
    """
    if first.alphabet != second.alphabet:
        raise ValueError(
            f"alphabet mismatch: q={first.q} vs q={second.q}"
        )
    if not first.alphabet.is_prime:
        raise ValueError(f"entropy gain check needs prime q, got q={first.q}")
    ln_q = math.log(first.q)
    view1 = posteriors(first)
    view2 = posteriors(second)
    w1, p1 = view1.weights(), view1.posterior_matrix()
    w2, p2 = view2.weights(), view2.posterior_matrix()
    h1 = float(w1 @ kernels.entropy_nats(p1)) / ln_q
    h2 = float(w2 @ kernels.entropy_nats(p2)) / ln_q
    h_sum = kernels.mixture_convolution_entropy_nats(w1, p1, w2, p2) / ln_q
    return h_sum - max(h1, h2)


@dataclass(frozen=True)
class EntropyGainSweep:
    """Min entropy gain over random channel pairs at one alphabet size."""

    q: int
    pairs: int
    violations: int    # pairs with gain < -1e-12
    min_gain: float
    seed: int


def sweep_entropy_gain(q: int, pairs: int, seed: int, m_choices=(2, 3, 4, 5, 6, 7, 8)) -> EntropyGainSweep:
    """Entropy gain over random channel pairs; the gain must never go negative."""
    alphabet = Alphabet(q)
    if not alphabet.is_prime:
        raise ValueError(f"entropy gain sweep needs prime q, got q={q}")
    rng = np.random.default_rng(seed)
    min_gain = math.inf
    violations = 0
    for _ in range(pairs):
        tables = []
        for _ in range(2):
            m = int(rng.choice(m_choices))
            tables.append(rng.dirichlet(np.ones(m), size=q))
        g = entropy_gain(
            Channel(alphabet, range(tables[0].shape[1]), tables[0]),
            Channel(alphabet, range(tables[1].shape[1]), tables[1]),
        )
        if g < -1e-12:
            violations += 1
        min_gain = min(min_gain, g)
    return EntropyGainSweep(q=q, pairs=pairs, violations=violations,
                            min_gain=min_gain, seed=seed)

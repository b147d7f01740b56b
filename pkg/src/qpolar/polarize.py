"""Recursive polarization experiments.

Applying the transform n times to a root channel synthesizes 2^n channels
indexed by sign sequences in {-,+}^n.  Their capacities form a bounded
martingale under fair sign draws: the mean at every depth equals the root
capacity exactly, and the mass accumulates at the endpoints 0 and 1 as n
grows, with the fraction near 1 approaching the root capacity.

This module builds full trees, samples individual construction paths,
estimates the empirical strict-gap curve over random channels, and runs
the permutation search that restores a gap on composite alphabets.

Erasure channels are closed under the transform (the erasure probability
evolves as e -> 1-(1-e)^2 on the minus branch and e -> e^2 on the plus
branch), so trees rooted at an erasure-structured channel can optionally
be advanced by that scalar recursion instead of table construction; depth
16 is then instant where the generic pipeline would grind.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _backend as kernels
from .channels import Channel, capacity, erasure_channel, posteriors
from .dists import Alphabet
from .reduction import canonicalize, equivalent
from .transform import Permutation, split

MINUS, PLUS = 0, 1
_SIGN_CHARS = "-+"

DEFAULT_MAX_OUTPUTS = 20000


@dataclass(frozen=True)
class SignSequence:
    """A branch address in the construction tree; empty means the root.

    Sign 0 (minus) at position 0 is applied to the root first; printed
    form is a string like "-+-".
    """

    signs: tuple = ()

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if any(s not in (MINUS, PLUS) for s in signs):
            raise ValueError(f"signs must be 0 (minus) or 1 (plus), got {self.signs}")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def from_string(cls, text: str) -> "SignSequence":
        try:
            return cls(tuple(_SIGN_CHARS.index(c) for c in text))
        except ValueError as exc:
            raise ValueError(f"cannot parse sign sequence {text!r}") from exc

    def child(self, sign: int) -> "SignSequence":
        return SignSequence(self.signs + (sign,))

    def __len__(self):
        return len(self.signs)

    def __str__(self):
        return "".join(_SIGN_CHARS[s] for s in self.signs)


def _sequence_from_index(depth: int, index: int) -> SignSequence:
    return SignSequence(tuple((index >> (depth - 1 - k)) & 1 for k in range(depth)))


class OutputBudgetError(RuntimeError):
    """Raised when the construction would exceed the output-alphabet cap."""

    def __init__(self, sequence: SignSequence, outputs: int, budget: int):
        self.sequence = sequence
        self.outputs = outputs
        self.budget = budget
        super().__init__(
            f"output budget exceeded at sign sequence '{sequence}': "
            f"{outputs} outputs > budget {budget}"
        )


@dataclass(frozen=True)
class PolarizationReport:
    """Everything measured while building one construction tree."""

    depth: int
    delta: float
    root_capacity: float
    mean_capacity: float
    fraction_high: float                     # share of leaves with I > 1 - delta
    fraction_low: float                      # share of leaves with I < delta
    leaf_capacities: dict                    # SignSequence -> capacity
    depth_mean_capacity: tuple               # length depth + 1
    depth_mean_abs_increment: tuple          # length depth
    depth_fraction_high: tuple
    depth_fraction_low: tuple
    used_reduce: bool
    used_erasure_fast_path: bool
    max_outputs: int


@dataclass(frozen=True)
class PathTrace:
    """One sampled construction path: signs drawn and capacities seen."""

    seed: int
    index: int
    signs: SignSequence
    capacities: tuple


@dataclass(frozen=True)
class PathSummary:
    depth: int
    paths: int
    seed: int
    root_capacity: float
    depth_mean_capacity: tuple
    depth_mean_abs_increment: tuple
    used_reduce: bool
    used_erasure_fast_path: bool


# ---------------------------------------------------------------------------
# erasure fast path
# ---------------------------------------------------------------------------

def erasure_rate(channel: Channel, tol: float = 1e-9) -> float | None:
    """The erasure probability if the channel is erasure-structured.

    A channel qualifies when every output posterior is either a unit mass
    (input revealed) or uniform (input erased), the revealing outputs
    cover all symbols with equal weight, and the whole thing matches a
    reference erasure channel under equivalent().  Returns None otherwise.
    """
    q = channel.q
    view = posteriors(channel)
    symbol_weight = np.zeros(q)
    erased = 0.0
    for weight, post in view.entries:
        mass = post.mass
        if mass.max() >= 1.0 - tol:
            symbol_weight[int(mass.argmax())] += weight
        elif np.abs(mass - 1.0 / q).max() <= tol:
            erased += weight
        else:
            return None
    expected = (1.0 - erased) / q
    if np.abs(symbol_weight - expected).max() > tol:
        return None
    e = min(1.0, max(0.0, float(erased)))
    if not equivalent(channel, erasure_channel(q, e)):
        return None
    return e


def _erasure_step(e: float, sign: int) -> float:
    return e * e if sign == PLUS else 1.0 - (1.0 - e) * (1.0 - e)


def _resolve_fast_path(channel: Channel, requested) -> float | None:
    if requested is False:
        return None
    rate = erasure_rate(channel)
    if requested is True and rate is None:
        raise ValueError(
            "erasure fast path requested but the channel is not erasure-structured"
        )
    return rate


# ---------------------------------------------------------------------------
# full-tree construction
# ---------------------------------------------------------------------------

def _stats_from_levels(levels, delta):
    means = tuple(float(np.mean(caps)) for caps in levels)
    incs = []
    for k in range(1, len(levels)):
        parents = np.repeat(levels[k - 1], 2)
        incs.append(float(np.mean(np.abs(levels[k] - parents))))
    high = tuple(float(np.mean(caps > 1.0 - delta)) for caps in levels)
    low = tuple(float(np.mean(caps < delta)) for caps in levels)
    return means, tuple(incs), high, low


def _child_channel(channel: Channel, sign: int) -> Channel:
    """Materialize one transform child, building only the needed table."""
    minus_t, plus_t = kernels.split_tables(
        channel.table, channel.table, want_plus=(sign == PLUS)
    )
    if sign == MINUS:
        labels = tuple(itertools.product(channel.labels, channel.labels))
        table = minus_t
    else:
        labels = tuple(
            itertools.product(channel.labels, channel.labels, range(channel.q))
        )
        table = plus_t
    return Channel(channel.alphabet, labels, table)


def _check_projections(channel: Channel, at: SignSequence, max_outputs: int,
                       signs=(MINUS, PLUS)):
    """Budget check on the tables a split would materialize."""
    m = channel.num_outputs
    for sign in signs:
        projected = m * m if sign == MINUS else m * m * channel.q
        if projected > max_outputs:
            raise OutputBudgetError(at.child(sign), projected, max_outputs)


def _tree_walk(channel, cap, index, depth_now, remaining, levels,
               use_reduce, max_outputs):
    levels[depth_now][index] = cap
    if remaining == 0:
        return
    at = _sequence_from_index(depth_now, index)
    _check_projections(channel, at, max_outputs)
    pair = split(channel)
    for sign, raw in ((MINUS, pair.minus), (PLUS, pair.plus)):
        child = canonicalize(raw) if use_reduce else raw
        _tree_walk(child, capacity(child), index * 2 + sign, depth_now + 1,
                   remaining - 1, levels, use_reduce, max_outputs)


def build_tree(channel: Channel, depth: int, use_reduce: bool = True,
               max_outputs: int = DEFAULT_MAX_OUTPUTS, delta: float = 0.01,
               erasure_fast_path=None, workers: int = 1) -> PolarizationReport:
    """Construct all 2^depth synthesized channels and report their capacities.

    erasure_fast_path: None picks the scalar recursion automatically when
    the root is erasure-structured, True insists on it (error if the root
    does not qualify), False forces the generic table pipeline.

    Raises OutputBudgetError as soon as any table the walk would
    materialize exceeds max_outputs columns, naming the offending branch.
    """
    if depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth}")
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must be in (0, 1/2), got {delta}")
    if workers < 1:
        raise ValueError(f"workers must be positive, got {workers}")
    if channel.num_outputs > max_outputs:
        raise OutputBudgetError(SignSequence(), channel.num_outputs, max_outputs)

    rate = _resolve_fast_path(channel, erasure_fast_path)
    root_cap = capacity(channel)

    if rate is not None:
        es = np.array([rate])
        levels = [1.0 - es]
        for _ in range(depth):
            nxt = np.empty(es.size * 2)
            nxt[0::2] = 1.0 - (1.0 - es) * (1.0 - es)
            nxt[1::2] = es * es
            es = nxt
            levels.append(1.0 - es)
    else:
        levels = [np.empty(1 << k) for k in range(depth + 1)]
        if workers == 1 or depth < 2:
            _tree_walk(channel, root_cap, 0, 0, depth, levels,
                       use_reduce, max_outputs)
        else:
            front = min(depth, 3)
            frontier = []   # (index, channel, capacity) at depth `front`

            def expand(chan, cap, index, depth_now):
                levels[depth_now][index] = cap
                if depth_now == front:
                    frontier.append((index, chan, cap))
                    return
                at = _sequence_from_index(depth_now, index)
                _check_projections(chan, at, max_outputs)
                pair = split(chan)
                for sign, raw in ((MINUS, pair.minus), (PLUS, pair.plus)):
                    child = canonicalize(raw) if use_reduce else raw
                    expand(child, capacity(child), index * 2 + sign, depth_now + 1)

            expand(channel, root_cap, 0, 0)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(_tree_walk, chan, cap, index, front,
                                depth - front, levels, use_reduce, max_outputs)
                    for index, chan, cap in frontier
                ]
                for future in futures:   # sign order, so aborts are deterministic
                    future.result()

    means, incs, high, low = _stats_from_levels(levels, delta)
    leaf_caps = {
        _sequence_from_index(depth, j): float(levels[depth][j])
        for j in range(1 << depth)
    }
    return PolarizationReport(
        depth=depth,
        delta=delta,
        root_capacity=root_cap,
        mean_capacity=means[-1],
        fraction_high=high[-1],
        fraction_low=low[-1],
        leaf_capacities=leaf_caps,
        depth_mean_capacity=means,
        depth_mean_abs_increment=incs,
        depth_fraction_high=high,
        depth_fraction_low=low,
        used_reduce=use_reduce,
        used_erasure_fast_path=rate is not None,
        max_outputs=max_outputs,
    )


def polarization_fractions(report: PolarizationReport, delta: float):
    """Leaf fractions with capacity above 1 - delta and below delta."""
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must be in (0, 1/2), got {delta}")
    caps = np.fromiter(report.leaf_capacities.values(), dtype=np.float64)
    return float(np.mean(caps > 1.0 - delta)), float(np.mean(caps < delta))


# ---------------------------------------------------------------------------
# path sampling
# ---------------------------------------------------------------------------

def _walk_path(channel, root_cap, signs, rate, use_reduce, max_outputs):
    caps = [root_cap if rate is None else 1.0 - rate]
    if rate is not None:
        e = rate
        for sign in signs:
            e = _erasure_step(e, int(sign))
            caps.append(1.0 - e)
        return caps
    cur = channel
    for k, sign in enumerate(signs):
        at = SignSequence(tuple(signs[:k]))
        _check_projections(cur, at, max_outputs, signs=(int(sign),))
        child = _child_channel(cur, int(sign))
        cur = canonicalize(child) if use_reduce else child
        caps.append(capacity(cur))
    return caps


def sample_paths(channel: Channel, depth: int, paths: int, seed: int,
                 use_reduce: bool = True, max_outputs: int = DEFAULT_MAX_OUTPUTS,
                 erasure_fast_path=None, workers: int = 1):
    """Monte-Carlo construction paths with fair, independent sign draws.

    Work is linear in depth per path: only the sampled branch is built.
    Path i draws its signs from a generator seeded with (seed, i), so
    results do not depend on scheduling or worker count.  Returns
    (traces, summary).
    """
    if paths < 1:
        raise ValueError(f"paths must be positive, got {paths}")
    if depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth}")
    if channel.num_outputs > max_outputs:
        raise OutputBudgetError(SignSequence(), channel.num_outputs, max_outputs)

    rate = _resolve_fast_path(channel, erasure_fast_path)
    root_cap = capacity(channel)

    def one(index):
        rng = np.random.default_rng((seed, index))
        signs = tuple(int(s) for s in rng.integers(0, 2, size=depth))
        caps = _walk_path(channel, root_cap, signs, rate, use_reduce, max_outputs)
        return PathTrace(seed=seed, index=index, signs=SignSequence(signs),
                         capacities=tuple(caps))

    if workers == 1:
        traces = [one(i) for i in range(paths)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(one, range(paths)))

    matrix = np.array([t.capacities for t in traces])
    summary = PathSummary(
        depth=depth,
        paths=paths,
        seed=seed,
        root_capacity=root_cap,
        depth_mean_capacity=tuple(float(v) for v in matrix.mean(axis=0)),
        depth_mean_abs_increment=tuple(
            float(v) for v in np.abs(np.diff(matrix, axis=1)).mean(axis=0)
        ),
        used_reduce=use_reduce,
        used_erasure_fast_path=rate is not None,
    )
    return traces, summary


# ---------------------------------------------------------------------------
# empirical strict-gap curve
# ---------------------------------------------------------------------------

class EpsilonPoint(NamedTuple):
    delta: float
    min_gap: float | None    # None when no sampled channel landed in the band
    channels: int


def epsilon_curve(q: int, delta_grid, samples: int, seed: int,
                  m_choices=(2, 3, 4, 5, 6, 7, 8)) -> list:
    """Empirical minimum one-step gap over random channels, per delta band.

    One shared pool of `samples` random channels (output sizes drawn from
    m_choices) is classified against every delta: channels with capacity
    inside (delta, 1 - delta) contribute their gap I(W) - I(minus).  The
    reported minima are empirical observations, not proved bounds.
    """
    alphabet = Alphabet(q)
    if not alphabet.is_prime:
        raise ValueError(f"gap curve needs prime q, got q={q}")
    deltas = [float(d) for d in delta_grid]
    for d in deltas:
        if not 0.0 < d < 0.5:
            raise ValueError(f"delta must be in (0, 1/2), got {d}")
    rng = np.random.default_rng(seed)
    ln_q = math.log(q)
    caps = np.empty(samples)
    gaps = np.empty(samples)
    for i in range(samples):
        m = int(rng.choice(m_choices))
        table = rng.dirichlet(np.ones(m), size=q)
        minus_t, _ = kernels.split_tables(table, table, want_plus=False)
        caps[i] = kernels.capacity_nats(table) / ln_q
        gaps[i] = caps[i] - kernels.capacity_nats(minus_t) / ln_q
    points = []
    for d in deltas:
        mask = (caps > d) & (caps < 1.0 - d)
        n = int(mask.sum())
        points.append(EpsilonPoint(d, float(gaps[mask].min()) if n else None, n))
    return points


# ---------------------------------------------------------------------------
# composite-alphabet permutation search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompositeSearchResult:
    identity_gap: float        # gap of the plain transform, 0 at fixed points
    good: tuple                # permutations with gap >= min_gap, search order
    best: Permutation
    best_gap: float
    searched: int
    exhaustive: bool
    min_gap: float


def composite_search(q: int, channel: Channel, min_gap: float,
                     exhaustive=None, samples: int = 10000,
                     seed: int = 0) -> CompositeSearchResult:
    """Search input permutations for a strict one-step gap at composite q.

    Exhausts all q! permutations for q <= 6 (or when exhaustive=True);
    otherwise scores a deduplicated seeded sample.  The identity
    permutation reproduces the plain transform, whose gap is reported
    separately: it is exactly 0 on subgroup channels, which is the whole
    reason this search exists.
    """
    alphabet = Alphabet(q)
    if alphabet.is_prime:
        raise ValueError(
            f"q={q} is prime; the plain transform already polarizes, use split()"
        )
    if channel.alphabet.q != q:
        raise ValueError(f"channel has q={channel.alphabet.q}, expected {q}")
    base = capacity(channel)
    if not 1e-9 < base < 1.0 - 1e-9:
        raise ValueError(
            f"channel capacity {base!r} is extremal; need I in (0, 1) to polarize"
        )
    if exhaustive is None:
        exhaustive = math.factorial(q) <= 720

    ln_q = math.log(q)
    table = channel.table

    def gap_of(mapping) -> float:
        inv = np.empty(q, dtype=np.intp)
        for x, v in enumerate(mapping):
            inv[v] = x
        minus_t, _ = kernels.split_tables(table, table[inv], want_plus=False)
        return base - kernels.capacity_nats(minus_t) / ln_q

    identity = tuple(range(q))
    identity_gap = gap_of(identity)

    if exhaustive:
        candidates = itertools.permutations(range(q))
        searched = math.factorial(q)
    else:
        rng = np.random.default_rng(seed)
        seen = {identity}
        for _ in range(samples):
            seen.add(tuple(int(v) for v in rng.permutation(q)))
        candidates = sorted(seen)
        searched = len(candidates)

    good = []
    best_mapping, best_gap = identity, identity_gap
    for mapping in candidates:
        g = gap_of(mapping)
        if g > best_gap:
            best_mapping, best_gap = mapping, g
        if g >= min_gap:
            good.append(Permutation(alphabet, mapping))

    return CompositeSearchResult(
        identity_gap=identity_gap,
        good=tuple(good),
        best=Permutation(alphabet, best_mapping),
        best_gap=best_gap,
        searched=searched,
        exhaustive=bool(exhaustive),
        min_gap=float(min_gap),
    )


# ---------------------------------------------------------------------------
# report serialization (the machine-readable experiment format)
# ---------------------------------------------------------------------------

def report_as_dict(report: PolarizationReport) -> dict:
    """All report fields as plain JSON-compatible values."""
    return {
        "depth": report.depth,
        "delta": report.delta,
        "root_capacity": report.root_capacity,
        "mean_capacity": report.mean_capacity,
        "fraction_high": report.fraction_high,
        "fraction_low": report.fraction_low,
        "depth_mean_capacity": list(report.depth_mean_capacity),
        "depth_mean_abs_increment": list(report.depth_mean_abs_increment),
        "depth_fraction_high": list(report.depth_fraction_high),
        "depth_fraction_low": list(report.depth_fraction_low),
        "used_reduce": report.used_reduce,
        "used_erasure_fast_path": report.used_erasure_fast_path,
        "max_outputs": report.max_outputs,
        "leaves": len(report.leaf_capacities),
    }


def leaf_table_rows(report: PolarizationReport):
    """Flat (sign string, capacity) rows, one per leaf, in tree order."""
    for seq, cap in report.leaf_capacities.items():
        yield str(seq), cap


def paths_as_dict(summary: PathSummary) -> dict:
    return {
        "depth": summary.depth,
        "paths": summary.paths,
        "seed": summary.seed,
        "root_capacity": summary.root_capacity,
        "depth_mean_capacity": list(summary.depth_mean_capacity),
        "depth_mean_abs_increment": list(summary.depth_mean_abs_increment),
        "used_reduce": summary.used_reduce,
        "used_erasure_fast_path": summary.used_erasure_fast_path,
    }

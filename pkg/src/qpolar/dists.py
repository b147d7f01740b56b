"""Probability distributions on the cyclic group of order q.

Entropies are measured in base-q symbols so that every value lands in
[0, 1]: the uniform distribution has entropy 1, a unit mass has entropy 0.
Besides the basic operations (shift, cyclic convolution, L1 distance) the
module carries numeric validators for three inequalities that drive the
strict polarization gap:

  * the L1 distance from uniform is at least (1 - H(p)) * ln(q) / q,
  * for prime q the cyclic shifts of a non-uniform p are pairwise
    separated by at least (1 - H(p)) * ln(q) / (2 q^2 (q - 1)),
  * convolving with a spread-out p strictly increases entropy whenever
    there is room to grow.

Each validator returns both sides of its inequality so sweeps can report
slacks, and each has a batched sweep driver used by the CLI.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _backend as kernels

# |sum - 1| at or below this is a valid pmf / channel row
SUM_TOLERANCE = 1e-12
# constructors renormalize below this deviation and reject at or above it
RENORM_LIMIT = 1e-9
# deviations at or below this are left untouched to keep bit patterns stable
RENORM_FLOOR = 1e-14
# entropy/capacity values may stick out of [0, 1] by at most this before
# clamping turns into an error
CLAMP_SLACK = 1e-9
# slack allowed when checking the bound inequalities
BOUND_SLACK = 1e-12


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Alphabet:
    """Input alphabet {0, ..., q-1} with its primality precomputed."""

    q: int
    is_prime: bool = field(init=False)

    def __post_init__(self):
        try:
            q = int(operator.index(self.q))
        except TypeError:
            raise ValueError(f"alphabet size must be an integer, got {self.q!r}")
        if q < 2:
            raise ValueError(f"alphabet size must be at least 2, got {self.q}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "is_prime", _is_prime(q))

    def __repr__(self):
        return f"Alphabet(q={self.q})"


def _clean_pmf(values, size: int, what: str) -> np.ndarray:
    """Validate and normalize one pmf row; shared by Dist and Channel."""
    arr = np.array(values, dtype=np.float64)
    if arr.shape != (size,):
        raise ValueError(f"{what} must have length {size}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite entries")
    if arr.min(initial=0.0) < -SUM_TOLERANCE:
        raise ValueError(f"{what} contains negative entries")
    np.clip(arr, 0.0, None, out=arr)
    total = float(arr.sum())
    dev = abs(total - 1.0)
    if dev >= RENORM_LIMIT:
        raise ValueError(f"{what} sums to {total!r}, not within {RENORM_LIMIT} of 1")
    if dev > RENORM_FLOOR:
        arr /= total
    return arr


class Dist:
    """Immutable pmf over {0, ..., q-1}."""

    __slots__ = ("alphabet", "mass")

    def __init__(self, alphabet: Alphabet, mass):
        arr = _clean_pmf(mass, alphabet.q, "distribution")
        arr.flags.writeable = False
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "mass", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Dist is immutable")

    @property
    def q(self) -> int:
        return self.alphabet.q

    def __repr__(self):
        vals = ", ".join(f"{v:.6g}" for v in self.mass)
        return f"Dist(q={self.q}, [{vals}])"


def uniform(alphabet: Alphabet) -> Dist:
    return Dist(alphabet, np.full(alphabet.q, 1.0 / alphabet.q))


def point_mass(alphabet: Alphabet, i: int) -> Dist:
    if not 0 <= i < alphabet.q:
        raise IndexError(f"symbol {i} out of range for q={alphabet.q}")
    m = np.zeros(alphabet.q)
    m[i] = 1.0
    return Dist(alphabet, m)


def _require_same_alphabet(p: Dist, r: Dist):
    if p.alphabet != r.alphabet:
        raise ValueError(
            f"alphabet mismatch: q={p.alphabet.q} vs q={r.alphabet.q}"
        )


def _clamp_unit(value: float, what: str) -> float:
    if value < -CLAMP_SLACK or value > 1.0 + CLAMP_SLACK:
        raise ArithmeticError(f"{what} = {value!r} is outside [0, 1] beyond slack")
    return min(1.0, max(0.0, value))


def entropy(p: Dist) -> float:
    """Entropy of p in base-q symbols, clamped to [0, 1]."""
    raw = float(kernels.entropy_nats(p.mass[None, :])[0]) / math.log(p.q)
    return _clamp_unit(raw, "entropy")


def cyclic_shift(p: Dist, i: int) -> Dist:
    """The translate of p by i: output(m) = p(m - i mod q)."""
    if not 0 <= i < p.q:
        raise IndexError(f"shift {i} out of range for q={p.q}")
    return Dist(p.alphabet, np.roll(p.mass, i))


def cyclic_convolve(p: Dist, r: Dist) -> Dist:
    """Distribution of the mod-q sum of independent draws from p and r."""
    _require_same_alphabet(p, r)
    out = kernels.convolve_pairs(p.mass[None, :], r.mass[None, :])[0]
    return Dist(p.alphabet, out)


def l1_distance(p: Dist, r: Dist) -> float:
    _require_same_alphabet(p, r)
    return float(np.abs(p.mass - r.mass).sum())


# ---------------------------------------------------------------------------
# bound validators
# ---------------------------------------------------------------------------

class L1UniformBound(NamedTuple):
    distance: float    # ||p - uniform||_1
    bound: float       # (1 - H(p)) ln(q) / q
    holds: bool


class ShiftSeparation(NamedTuple):
    min_distance: float  # min over i != j of ||p_i - p_j||_1
    bound: float         # (1 - H(p)) ln(q) / (2 q^2 (q - 1))
    holds: bool


class ConvolutionGain(NamedTuple):
    gain: float            # H(p * r) - H(r)
    hypotheses_met: bool   # H(p) >= eta and H(r) <= 1 - eta


def check_l1_uniform_bound(p: Dist) -> L1UniformBound:
    """L1 distance from uniform against its entropy-deficit lower bound."""
    q = p.q
    distance = float(np.abs(p.mass - 1.0 / q).sum())
    bound = (1.0 - entropy(p)) * math.log(q) / q
    return L1UniformBound(distance, bound, distance >= bound - BOUND_SLACK)


def check_shift_separation(p: Dist) -> ShiftSeparation:
    """Minimum pairwise L1 distance between cyclic shifts vs its bound.

    Only valid on prime alphabets; the separation can collapse on
    composite ones (a subgroup-uniform pmf equals some of its shifts).
    """
    if not p.alphabet.is_prime:
        raise ValueError(f"shift separation bound needs prime q, got q={p.q}")
    q = p.q
    min_distance = float(kernels.min_shift_l1(p.mass[None, :])[0])
    bound = (1.0 - entropy(p)) * math.log(q) / (2.0 * q * q * (q - 1))
    return ShiftSeparation(min_distance, bound, min_distance >= bound - BOUND_SLACK)


def check_convolution_gain(p: Dist, r: Dist, eta: float) -> ConvolutionGain:
    """Entropy gained by convolving r with p, plus the strictness hypotheses.

    The gain is nonnegative for any pair (mixing never loses entropy); it
    is strictly positive whenever H(p) >= eta and H(r) <= 1 - eta for some
    eta > 0, which is what hypotheses_met reports.
    """
    _require_same_alphabet(p, r)
    if not p.alphabet.is_prime:
        raise ValueError(f"convolution gain check needs prime q, got q={p.q}")
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    h_p = entropy(p)
    h_r = entropy(r)
    gain = entropy(cyclic_convolve(p, r)) - h_r
    return ConvolutionGain(gain, h_p >= eta and h_r <= 1.0 - eta)


# ---------------------------------------------------------------------------
# sweep drivers
# ---------------------------------------------------------------------------

def sample_simplex(alphabet: Alphabet, n: int, seed: int) -> np.ndarray:
    """n pmfs drawn uniformly from the q-simplex (flat Dirichlet), (n, q)."""
    rng = np.random.default_rng(seed)
    return rng.dirichlet(np.ones(alphabet.q), size=n)


def corner_cases(alphabet: Alphabet) -> np.ndarray:
    """Deterministic boundary pmfs: uniform, unit masses, two-point supports."""
    q = alphabet.q
    rows = [np.full(q, 1.0 / q)]
    for i in range(q):
        e = np.zeros(q)
        e[i] = 1.0
        rows.append(e)
    for j in range(1, q):
        for a in (0.5, 0.9):
            two = np.zeros(q)
            two[0] = a
            two[j] = 1.0 - a
            rows.append(two)
    return np.array(rows)


@dataclass(frozen=True)
class BoundSweep:
    """Outcome of checking one inequality over many sampled pmfs."""

    q: int
    checked: int
    violations: int
    min_slack: float          # min of (achieved - bound); negative = violation
    worst_mass: np.ndarray    # pmf achieving min_slack
    seed: int


@dataclass(frozen=True)
class GainSweep:
    """Outcome of the convolution-gain check over sampled pmf pairs."""

    q: int
    eta: float
    checked: int
    violations: int           # pairs with gain < -BOUND_SLACK
    strict_violations: int    # pairs meeting the hypotheses with gain <= 0
    hypothesis_pairs: int
    min_gain: float
    min_hypothesis_gain: float    # +inf when no pair met the hypotheses
    worst_p: np.ndarray
    worst_r: np.ndarray
    seed: int


def _entropy_rows(mass: np.ndarray, q: int) -> np.ndarray:
    return kernels.entropy_nats(mass) / math.log(q)


def sweep_l1_uniform_bound(q: int, samples: int, seed: int) -> BoundSweep:
    alphabet = Alphabet(q)
    mass = np.vstack([corner_cases(alphabet), sample_simplex(alphabet, samples, seed)])
    distance = np.abs(mass - 1.0 / q).sum(axis=1)
    bound = (1.0 - _entropy_rows(mass, q)) * math.log(q) / q
    slack = distance - bound
    worst = int(np.argmin(slack))
    return BoundSweep(
        q=q,
        checked=mass.shape[0],
        violations=int((slack < -BOUND_SLACK).sum()),
        min_slack=float(slack[worst]),
        worst_mass=mass[worst].copy(),
        seed=seed,
    )


def sweep_shift_separation(q: int, samples: int, seed: int) -> BoundSweep:
    alphabet = Alphabet(q)
    if not alphabet.is_prime:
        raise ValueError(f"shift separation bound needs prime q, got q={q}")
    mass = np.vstack([corner_cases(alphabet), sample_simplex(alphabet, samples, seed)])
    min_dist = kernels.min_shift_l1(mass)
    bound = (1.0 - _entropy_rows(mass, q)) * math.log(q) / (2.0 * q * q * (q - 1))
    slack = min_dist - bound
    worst = int(np.argmin(slack))
    return BoundSweep(
        q=q,
        checked=mass.shape[0],
        violations=int((slack < -BOUND_SLACK).sum()),
        min_slack=float(slack[worst]),
        worst_mass=mass[worst].copy(),
        seed=seed,
    )


def sweep_convolution_gain(q: int, samples: int, seed: int, eta: float) -> GainSweep:
    alphabet = Alphabet(q)
    if not alphabet.is_prime:
        raise ValueError(f"convolution gain check needs prime q, got q={q}")
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    p_rows = sample_simplex(alphabet, samples, seed)
    r_rows = sample_simplex(alphabet, samples, seed + 1)
    h_p = _entropy_rows(p_rows, q)
    h_r = _entropy_rows(r_rows, q)
    gain = _entropy_rows(kernels.convolve_pairs(p_rows, r_rows), q) - h_r
    hyp = (h_p >= eta) & (h_r <= 1.0 - eta)
    worst = int(np.argmin(gain))
    if hyp.any():
        min_hyp_gain = float(gain[hyp].min())
        strict_violations = int(((gain <= 0.0) & hyp).sum())
    else:
        min_hyp_gain = math.inf
        strict_violations = 0
    return GainSweep(
        q=q,
        eta=eta,
        checked=samples,
        violations=int((gain < -BOUND_SLACK).sum()),
        strict_violations=strict_violations,
        hypothesis_pairs=int(hyp.sum()),
        min_gain=float(gain[worst]),
        min_hypothesis_gain=min_hyp_gain,
        worst_p=p_rows[worst].copy(),
        worst_r=r_rows[worst].copy(),
        seed=seed,
    )

"""Invariant density of the d-dimensional Brun algorithm and the
recursive polytope-volume formula behind it.

The density at a sorted interior simplex point is a sum over nested
index chains; it equals the volume of an explicit polytope of dual
difference coordinates, which satisfies a pyramid recursion.  Both are
implemented, together with a Monte-Carlo rejection oracle that checks
the recursion independently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .linalg import seeded_rng, vector_is_exact


def _check_sorted_simplex(x):
    d = len(x)
    if not 2 <= d <= 8:
        raise DomainError("supported dimensions are 2..8")
    exact = vector_is_exact(x)
    for c in x:
        if c <= 0:
            raise DomainError(f"coordinate {c!r} not strictly positive")
    for i in range(d - 1):
        if not x[i] < x[i + 1]:
            raise DomainError(f"{x!r} is not strictly sorted ascending")
    s = sum(x)
    if exact:
        if s != 1:
            raise DomainError("exact coordinates must sum to 1")
    elif abs(s - 1.0) > 1e-9:
        raise DomainError("coordinates must sum to 1")
    return exact


def nested_chain_density(x) -> object:
    """The nested-chain density value at a weakly sorted ascending
    simplex point (the continuous extension across sector ties).

    The value is the nested-chain sum divided by (d-1)! times the second
    largest coordinate; exact when the input is rational.
    """
    x = tuple(x)
    exact = vector_is_exact(x)
    d = len(x)
    one = Fraction(1) if exact else 1.0
    total = one * 0
    middle = range(d - 2)
    for perm in itertools.permutations(middle):
        s = x[d - 2]
        prod = one / (1 - s)
        for idx in perm:
            s = s + x[idx]
            prod = prod / (1 - s)
        total = total + prod
    return total / (math.factorial(d - 1) * x[d - 2])


def brun_density_d(x) -> object:
    """Closed-form invariant density of the d-dimensional Brun map at a
    strictly sorted ascending interior simplex point."""
    x = tuple(x)
    _check_sorted_simplex(x)
    return nested_chain_density(x)


@dataclass(frozen=True)
class PolytopeSpec:
    """Defining data of the dual-coordinate polytope P_{I, pivot}.

    ``weights`` is a positive vector summing to 1; ``index_set`` a
    proper subset of its indices containing ``pivot``.  The polytope
    lives in the coordinates (beta_i : i in index_set) cut out by
        beta_i < 0                        for i != pivot,
        sum_j beta_j w_j - beta_i < 1     for all i,
        sum_j beta_j w_j < 1.
    """

    weights: tuple
    index_set: frozenset
    pivot: int

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "index_set", frozenset(self.index_set))
        d = len(self.weights)
        if not self.index_set or not self.index_set <= set(range(d)):
            raise DomainError("index set must be a nonempty subset of the weight indices")
        if self.pivot not in self.index_set:
            raise DomainError("pivot must belong to the index set")
        exact = vector_is_exact(self.weights)
        if any(w <= 0 for w in self.weights):
            raise DomainError("weights must be strictly positive")
        s = sum(self.weights)
        if exact:
            if s != 1:
                raise DomainError("exact weights must sum to 1")
        elif abs(s - 1.0) > 1e-9:
            raise DomainError("weights must sum to 1")
        if len(self.index_set) == d:
            raise DomainError("index set must be a proper subset (otherwise degenerate)")

    @property
    def exact(self) -> bool:
        return vector_is_exact(self.weights)


def polytope_volume_recursive(p: PolytopeSpec) -> Fraction:
    """Exact volume of P_{I, pivot} by the pyramid recursion.

    Each slice with largest non-pivot coordinate k is a pyramid over the
    face beta_k = 0, which is the polytope of the smaller index set, so

        Vol(I) = sum_k Vol(I \\ {k}) / (|I| (1 - sum_{i in I} w_i)).

    Rational weights are required; float cancellation across the nested
    subsets is the whole reason this lives in exact arithmetic.
    """
    if not p.exact:
        raise DomainError("the volume recursion requires exact rational weights")
    w = [Fraction(c) for c in p.weights]
    pivot = p.pivot
    cache = {}

    def vol(index_set: frozenset) -> Fraction:
        got = cache.get(index_set)
        if got is not None:
            return got
        if len(index_set) == 1:
            # single interval -1/(1-w) < beta < 1/w
            v = Fraction(1) / (w[pivot] * (1 - w[pivot]))
        else:
            rest = 1 - sum(w[i] for i in index_set)
            assert rest > 0
            acc = Fraction(0)
            for k in index_set:
                if k != pivot:
                    acc += vol(index_set - {k})
            v = acc / (len(index_set) * rest)
        cache[index_set] = v
        return v

    return vol(p.index_set)


def polytope_volume_oracle(p: PolytopeSpec, n_samples: int = 200_000,
                           seed: int = 0):
    """Monte-Carlo rejection estimate of Vol(P_{I, pivot}).

    Samples uniformly in a box that provably contains the polytope
    (every vertex coordinate lies in [-c, 0] off the pivot and in
    [-c, 1/w_pivot] on it, with c = 1/(1 - sum_I w)).  Returns
    ``(estimate, stderr)``.
    """
    idx = sorted(p.index_set)
    if len(idx) > 6:
        raise DomainError("rejection sampling is limited to |I| <= 6")
    w = np.array([float(p.weights[i]) for i in idx])
    pivot_pos = idx.index(p.pivot)
    c = 1.0 / (1.0 - float(sum(p.weights[i] for i in idx)))
    lo = np.full(len(idx), -c)
    hi = np.zeros(len(idx))
    hi[pivot_pos] = 1.0 / w[pivot_pos]
    box_volume = float(np.prod(hi - lo))
    if box_volume <= 0:
        return 0.0, 0.0

    rng = seeded_rng(seed, stream=0)
    hits = 0
    done = 0
    chunk = 200_000
    while done < n_samples:
        m = min(chunk, n_samples - done)
        beta = rng.uniform(lo, hi, size=(m, len(idx)))
        s = beta @ w
        ok = s < 1.0
        for j in range(len(idx)):
            ok &= (s - beta[:, j]) < 1.0
            if j != pivot_pos:
                ok &= beta[:, j] < 0.0
        hits += int(ok.sum())
        done += m
    p_hat = hits / n_samples
    estimate = box_volume * p_hat
    stderr = box_volume * math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n_samples)
    return estimate, stderr


def density_polytope(x) -> PolytopeSpec:
    """The polytope whose volume equals the density at the sorted point
    x: index set = all but the largest coordinate, pivot = second
    largest."""
    x = tuple(x)
    _check_sorted_simplex(x)
    d = len(x)
    return PolytopeSpec(x, frozenset(range(d - 1)), d - 2)


def random_sorted_rational(d: int, rng, hi: int = 1 << 20):
    """Random strictly sorted exact simplex point."""
    while True:
        ints = sorted(int(v) for v in rng.integers(1, hi, size=d))
        if all(ints[i] < ints[i + 1] for i in range(d - 1)):
            s = sum(ints)
            return tuple(Fraction(k, s) for k in ints)

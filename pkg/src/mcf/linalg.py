"""Small dense linear algebra over exact rationals or 64-bit floats.

Vectors are plain tuples, matrices are tuples of row tuples.  A value is
"exact" when every entry is an ``int`` or ``fractions.Fraction``; mixing
exact and float entries in one vector is rejected.  All dimensions here
are tiny (2 to 8), so matrix inversion is plain Gauss-Jordan over the
rationals with no pivoting concerns.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import DomainError

Vec = tuple
Mat = tuple


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def vector_is_exact(v: Vec) -> bool:
    """True for an all-rational vector, False for all-float; mixed raises."""
    flags = [is_exact(c) for c in v]
    if all(flags):
        return True
    if not any(flags):
        return False
    raise DomainError(f"mixed exact/float coordinates in {v!r}")


def cone_vector(coords, exact: bool | None = None) -> Vec:
    """Validate and return a point of the open positive cone.

    With ``exact=True`` coordinates are converted to ``Fraction``, with
    ``exact=False`` to ``float``; by default the incoming types decide.
    Zero / negative / non-finite coordinates raise ``DomainError``.
    """
    v = tuple(coords)
    if len(v) < 2:
        raise DomainError("cone vectors need dimension >= 2")
    if exact is True:
        v = tuple(Fraction(c) for c in v)
    elif exact is False:
        v = tuple(float(c) for c in v)
    for c in v:
        if isinstance(c, float):
            if not math.isfinite(c):
                raise DomainError(f"non-finite coordinate in {v!r}")
        if c <= 0:
            raise DomainError(f"coordinate {c!r} is not strictly positive")
    vector_is_exact(v)
    return v


def dot(x: Vec, a: Vec):
    """Scalar product ⟨x, a⟩."""
    if len(x) != len(a):
        raise DomainError(f"dimension mismatch: {len(x)} vs {len(a)}")
    return sum(xi * ai for xi, ai in zip(x, a))


def l1_norm(v: Vec):
    return sum(abs(c) for c in v)


def normalize_l1(v: Vec) -> Vec:
    """Scale ``v`` to coordinate sum 1 (exactly when v is rational)."""
    v = cone_vector(v)
    if vector_is_exact(v):
        v = tuple(Fraction(c) for c in v)
    s = sum(v)
    return tuple(c / s for c in v)


def mat_vec(rows: Mat, v: Vec) -> Vec:
    if len(rows[0]) != len(v):
        raise DomainError(f"dimension mismatch: {len(rows[0])} vs {len(v)}")
    return tuple(sum(r[j] * v[j] for j in range(len(v))) for r in rows)


def mat_mul(a: Mat, b: Mat) -> Mat:
    n, k, m = len(a), len(b), len(b[0])
    assert len(a[0]) == k
    return tuple(
        tuple(sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m))
        for i in range(n)
    )


def transpose(rows: Mat) -> Mat:
    return tuple(zip(*rows))


def identity(d: int) -> Mat:
    return tuple(
        tuple(Fraction(1) if i == j else Fraction(0) for j in range(d))
        for i in range(d)
    )


def mat_det(rows: Mat):
    """Determinant by exact Gaussian elimination (rationals) or floats."""
    d = len(rows)
    m = [list(r) for r in rows]
    exact = is_exact(m[0][0])
    det = Fraction(1) if exact else 1.0
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col] != 0), None)
        if piv is None:
            return det * 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = (Fraction(1) if exact else 1.0) / m[col][col]
        for r in range(col + 1, d):
            f = m[r][col] * inv
            if f:
                for c in range(col, d):
                    m[r][c] -= f * m[col][c]
    return det


def mat_inv(rows: Mat) -> Mat:
    """Exact inverse by Gauss-Jordan; raises on singular input."""
    d = len(rows)
    m = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(d)]
         for i, r in enumerate(rows)]
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col] != 0), None)
        if piv is None:
            raise DomainError("matrix is singular")
        m[col], m[piv] = m[piv], m[col]
        f = m[col][col]
        m[col] = [x / f for x in m[col]]
        for r in range(d):
            if r != col and m[r][col]:
                g = m[r][col]
                m[r] = [x - g * y for x, y in zip(m[r], m[col])]
    return tuple(tuple(r[d:]) for r in m)


class SquareMatrix:
    """An invertible rational matrix with cached determinant, inverse and
    float copies of everything the orbit loops need."""

    def __init__(self, rows):
        self.rows = tuple(tuple(Fraction(x) for x in r) for r in rows)
        d = len(self.rows)
        if any(len(r) != d for r in self.rows):
            raise DomainError("matrix is not square")
        self.dim = d

    @cached_property
    def det(self) -> Fraction:
        return mat_det(self.rows)

    @cached_property
    def inverse(self) -> Mat:
        return mat_inv(self.rows)

    @cached_property
    def T(self) -> Mat:
        return transpose(self.rows)

    @cached_property
    def inverse_T(self) -> Mat:
        return transpose(self.inverse)

    # float mirrors, used by the long-orbit paths
    @cached_property
    def rows_f(self) -> Mat:
        return tuple(tuple(float(x) for x in r) for r in self.rows)

    @cached_property
    def inverse_f(self) -> Mat:
        return tuple(tuple(float(x) for x in r) for r in self.inverse)

    @cached_property
    def T_f(self) -> Mat:
        return tuple(tuple(float(x) for x in r) for r in self.T)

    @cached_property
    def inverse_T_f(self) -> Mat:
        return tuple(tuple(float(x) for x in r) for r in self.inverse_T)

    def apply(self, v: Vec) -> Vec:
        rows = self.rows if vector_is_exact(v) else self.rows_f
        return mat_vec(rows, v)

    def apply_inverse(self, v: Vec) -> Vec:
        rows = self.inverse if vector_is_exact(v) else self.inverse_f
        return mat_vec(rows, v)

    def apply_T(self, v: Vec) -> Vec:
        rows = self.T if vector_is_exact(v) else self.T_f
        return mat_vec(rows, v)

    def apply_inverse_T(self, v: Vec) -> Vec:
        rows = self.inverse_T if vector_is_exact(v) else self.inverse_T_f
        return mat_vec(rows, v)

    def __repr__(self):
        return f"SquareMatrix({self.rows!r})"


def apply(m: SquareMatrix, v: Vec) -> Vec:
    """Matrix-vector product; exact when both operands are rational."""
    return m.apply(v)


def scalar_product(x: Vec, a: Vec):
    return dot(x, a)


def seeded_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic, splittable generator.

    Identical ``(seed, stream)`` pairs give identical sequences across
    runs and worker counts; distinct streams are statistically
    independent.  Backed by the counter-based Philox engine.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def primitive_ray(v: Vec) -> Vec:
    """Scale a rational ray to coprime integers (canonical form for
    comparing extreme rays up to positive scaling)."""
    fr = [Fraction(c) for c in v]
    den = math.lcm(*(f.denominator for f in fr))
    ints = [int(f * den) for f in fr]
    g = math.gcd(*ints)
    return tuple(i // g for i in ints)

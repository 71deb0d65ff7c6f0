"""Closed-form invariant densities and their numerical verification.

Every bundled density is checked two independent ways:

* the transfer-operator residual  | delta(x) - sum_i delta(h_i(x)) |Jac h_i(x)| |
  over the valid inverse branches, which is zero exactly when delta is
  invariant, and
* the total mass against the documented constants (pi^2/4, pi^2/12,
  pi^2/24), via the one-variable reductions or 2-d quadrature.

Densities are normalized so that the documented total masses come out;
the transfer residual is scale invariant, so this choice is free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

from . import brun_highdim
from .algorithms import IN, ON, OUT, AlgorithmSpec, inverse_branches
from .errors import BoundaryError, DomainError, UnsupportedError
from .linalg import seeded_rng, vector_is_exact
from .natext import make_float_projective_stepper

PI2 = math.pi ** 2


# ---------------------------------------------------------------------------
# dilogarithm

def dilog(z: float) -> float:
    """Real dilogarithm Li_2(z) for z <= 1.

    Power series on |z| <= 1/2, extended by the reflection, square and
    inversion identities elsewhere; absolute accuracy around 1e-15.
    """
    z = float(z)
    if z > 1.0:
        raise DomainError("real dilog is only evaluated for z <= 1")
    if z == 0.0:
        return 0.0
    if z == 1.0:
        return PI2 / 6
    if z < -1.0:
        return -PI2 / 6 - 0.5 * math.log(-z) ** 2 - dilog(1.0 / z)
    if z > 0.5:
        return PI2 / 6 - math.log(z) * math.log(1.0 - z) - dilog(1.0 - z)
    if z < -0.5:
        return 0.5 * dilog(z * z) - dilog(-z)
    acc = 0.0
    term = 1.0
    for k in range(1, 200):
        term *= z
        delta = term / (k * k)
        acc += delta
        if abs(delta) < 1e-18 * (1.0 + abs(acc)):
            break
    return acc


def dilog_identity_check() -> float:
    """Absolute defect of the closed-form identity tying the sorted
    1-norm Brun mass to pi^2/24:

        -pi^2/24 + log(3)log(2)/2 - Li2(2/3)/2 + (3/2) Li2(1/3) - Li2(-1/3)
    """
    lhs = (-PI2 / 24 + 0.5 * math.log(3.0) * math.log(2.0)
           - 0.5 * dilog(2.0 / 3.0) + 1.5 * dilog(1.0 / 3.0)
           - dilog(-1.0 / 3.0))
    return abs(lhs - PI2 / 24)


# ---------------------------------------------------------------------------
# triangle areas (used in the density derivations)

def triangle_area(a, b, c):
    """Area of the triangle with vertices (a, 0), (0, b), (c, c):
    |ab - bc - ac| / 2.  Exact for rational inputs."""
    return abs(a * b - b * c - a * c) / 2


def triangle_area_vertices(p, q, r):
    """Shoelace area of an arbitrary plane triangle (independent check
    of :func:`triangle_area`)."""
    return abs((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])) / 2


# ---------------------------------------------------------------------------
# density models

@dataclass(frozen=True)
class DensityModel:
    """A closed-form invariant density tied to a registered algorithm.

    ``mass`` is the documented total mass (``math.inf`` when infinite,
    ``None`` when finite but not tracked).  ``regions`` lists iterated
    2-d integration regions (u_lo, u_hi, v_lo(u), v_hi(u), g(u, v))
    with a symmetry ``multiplier``; ``reduced`` is the closed-form 1-d
    reduction of the mass integral when one exists.
    """

    name: str
    algorithm: str
    dim: int
    mass: object
    _evaluate: object
    _domain_side: object
    base_triangle: tuple | None = None
    reduced: tuple | None = None
    regions: tuple = ()
    multiplier: int = 1
    _orbit_start: object = None

    def evaluate(self, x):
        side = self._domain_side(x)
        if side != IN:
            raise DomainError(f"{tuple(x)!r} is not interior to the domain of {self.name}")
        return self._evaluate(x)

    def domain_side(self, x) -> int:
        return self._domain_side(x)

    def orbit_start(self, rng):
        if self._orbit_start is None:
            return tuple(rng.dirichlet([1.0] * self.dim))
        return self._orbit_start(rng)


def density(model: DensityModel, x):
    """Value of the closed-form density at an interior domain point."""
    return model.evaluate(x)


def _simplex_side(x, extra=()):
    s = IN
    for c in x:
        if c < 0:
            return OUT
        if c == 0:
            s = ON
    for val in extra:
        if val < 0:
            return OUT
        if val == 0:
            s = ON
    return s


def _one_like(x):
    return Fraction(1) if vector_is_exact(tuple(x)) else 1.0


def _farey_model() -> DensityModel:
    def ev(x):
        return _one_like(x) / (x[0] * x[1])

    return DensityModel(
        name="farey", algorithm="farey", dim=2, mass=math.inf,
        _evaluate=ev, _domain_side=lambda x: _simplex_side(x),
    )


def _reverse_model() -> DensityModel:
    def ev(x):
        one = _one_like(x)
        return one / ((one - x[0]) * (one - x[1]) * (one - x[2]))

    region = (0.0, 1.0, lambda x: 0.0, lambda x: 1.0 - x,
              lambda x, y: 1.0 / ((x + y) * (1.0 - x) * (1.0 - y)))
    return DensityModel(
        name="reverse", algorithm="reverse", dim=3, mass=PI2 / 4,
        _evaluate=ev, _domain_side=lambda x: _simplex_side(x),
        base_triangle=((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        reduced=(lambda t: 2.0 * math.log(t) / ((t + 1.0) * (t - 1.0)), 0.0, 1.0),
        regions=(region,),
    )


def _cassaigne_model() -> DensityModel:
    def ev(x):
        one = _one_like(x)
        return one / (2 * (one - x[0]) * (one - x[2]))

    region = (0.0, 1.0, lambda x: 0.0, lambda x: 1.0 - x,
              lambda x, y: 1.0 / (2.0 * (1.0 - x) * (x + y)))
    return DensityModel(
        name="cassaigne", algorithm="cassaigne", dim=3, mass=PI2 / 12,
        _evaluate=ev, _domain_side=lambda x: _simplex_side(x),
        base_triangle=((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        reduced=(lambda t: math.log(t) / (2.0 * (t - 1.0)), 0.0, 1.0),
        regions=(region,),
    )


def _brun_sorted_region():
    return (0.0, 1.0 / 3.0,
            lambda x1: x1, lambda x1: (1.0 - x1) / 2.0,
            lambda x1, x2: 1.0 / (2.0 * x2 * (1.0 - x2) * (1.0 - x1 - x2)))


def _brun_model(d: int = 3) -> DensityModel:
    # symmetric in the coordinates; continuous across sector ties, so
    # the sorted evaluation needs no strictness
    def ev(x):
        return brun_highdim.nested_chain_density(tuple(sorted(x)))

    kwargs = {}
    if d == 3:
        kwargs = dict(
            base_triangle=((1, 0, 0), (0, 1, 0), (0, 0, 1)),
            regions=(_brun_sorted_region(),),
            multiplier=6,
            mass=PI2 / 4,
        )
    return DensityModel(
        name="brun" if d == 3 else f"brun d={d}",
        algorithm="brun" if d == 3 else f"brun d={d}",
        dim=d, mass=kwargs.pop("mass", None),
        _evaluate=ev, _domain_side=lambda x: _simplex_side(x),
        **kwargs,
    )


def _brun_sorted_model() -> DensityModel:
    def side(x):
        s = _simplex_side(x)
        if s == OUT:
            return OUT
        for i in range(2):
            if x[i] > x[i + 1]:
                return OUT
            if x[i] == x[i + 1]:
                s = ON
        return s

    def start(rng):
        return tuple(sorted(rng.dirichlet([1.0, 1.0, 1.0])))

    return DensityModel(
        name="brun-sorted", algorithm="brun-sorted", dim=3, mass=PI2 / 24,
        _evaluate=lambda x: brun_highdim.brun_density_d(tuple(x)),
        _domain_side=side,
        base_triangle=((0, 0, 1), (0, Fraction(1, 2), Fraction(1, 2)),
                       (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))),
        regions=(_brun_sorted_region(),),
        _orbit_start=start,
    )


def _brun_sup_model() -> DensityModel:
    """Sorted Brun in sup-norm coordinates: the free coordinates are
    (x1, x2) with 0 < x1 < x2 < 1 and the largest coordinate pinned to 1."""

    def side(x):
        x1, x2 = x
        vals = (x1, x2 - x1, 1 - x2)
        s = IN
        for v in vals:
            if v < 0:
                return OUT
            if v == 0:
                s = ON
        return s

    def ev(x):
        one = _one_like(x)
        return one / (2 * x[1] * (1 + x[0]))

    region = (0.0, 1.0, lambda x2: 0.0, lambda x2: x2,
              lambda x2, x1: 1.0 / (2.0 * x2 * (1.0 + x1)))
    return DensityModel(
        name="brun-sup", algorithm="brun-sorted", dim=2, mass=PI2 / 24,
        _evaluate=ev, _domain_side=side,
        reduced=(lambda t: math.log(1.0 + t) / (2.0 * t), 0.0, 1.0),
        regions=(region,),
    )


_MODEL_FACTORIES = {
    "farey": _farey_model,
    "reverse": _reverse_model,
    "cassaigne": _cassaigne_model,
    "brun": _brun_model,
    "brun-sorted": _brun_sorted_model,
    "brun-sup": _brun_sup_model,
}


def model_names():
    return list(_MODEL_FACTORIES)


def density_model(name: str) -> DensityModel:
    """Look up a density model, e.g. ``"reverse"`` or ``"brun d=4"``."""
    base, _, rest = name.strip().partition(" ")
    if rest:
        if base != "brun" or not rest.startswith("d="):
            raise DomainError(f"unknown density model {name!r}")
        d = int(rest[2:])
        if not 2 <= d <= 8:
            raise DomainError("supported dimensions are 2..8")
        return _brun_model(d)
    factory = _MODEL_FACTORIES.get(base)
    if factory is None:
        raise DomainError(
            f"unknown density model {name!r}; known: {', '.join(model_names())}")
    return factory()


# ---------------------------------------------------------------------------
# transfer operator residual

def transfer_residual(spec: AlgorithmSpec, model: DensityModel, x,
                      boundary_sink: list | None = None):
    """| delta(x) - sum over inverse branches of delta(h_i(x)) |Jac| |.

    The jacobian of the inverse branch h_i(x) = M_i x / |M_i x|_1 on the
    simplex is |det M_i| / |M_i x|_1 ^ d.  Exact for rational inputs.
    Preimages that hit a partition boundary are skipped and reported via
    ``boundary_sink``.
    """
    value = model.evaluate(x)
    pulled = []
    for label, pre, jac in inverse_branches(spec, x, boundary_sink):
        pulled.append(model.evaluate(pre) * jac)
    if not pulled:
        raise DomainError(f"{tuple(x)!r} has no valid inverse branches")
    if vector_is_exact(tuple(x)):
        total = sum(pulled)
    else:
        total = math.fsum(pulled)
    return abs(value - total)


# ---------------------------------------------------------------------------
# total mass

@dataclass(frozen=True)
class MassResult:
    model: str
    method: str
    value: float
    error: float
    infinite: bool = False

    def to_csv(self) -> str:
        val = "infinite" if self.infinite else repr(self.value)
        return ("model,method,value,error\n"
                f"{self.model},{self.method},{val},{self.error!r}\n")


def total_mass(model: DensityModel, method: str = "auto", tol: float = 1e-8,
               n_samples: int = 1_000_000, seed: int = 0) -> MassResult:
    """Total mass of the density over its domain.

    ``method`` is one of ``reduced-1d`` (the closed-form one-variable
    reduction), ``adaptive-2d`` (nested adaptive quadrature over the
    iterated region) or ``monte-carlo``; ``auto`` prefers the reduction.
    Models with infinite mass return an explicit infinite result.
    """
    if model.mass == math.inf:
        return MassResult(model.name, "none", math.inf, 0.0, infinite=True)
    if method == "auto":
        method = "reduced-1d" if model.reduced is not None else "adaptive-2d"
    if method == "reduced-1d":
        if model.reduced is None:
            raise UnsupportedError(f"{model.name} has no 1-d reduced mass integral")
        f, lo, hi = model.reduced
        value, err = integrate.quad(f, lo, hi, epsabs=tol, epsrel=tol, limit=500)
        return MassResult(model.name, method, value * model.multiplier,
                          err * model.multiplier)
    if not model.regions:
        raise UnsupportedError(f"{model.name} has no mass integration region")
    if method == "adaptive-2d":
        total = 0.0
        err_total = 0.0
        for u_lo, u_hi, v_lo, v_hi, g in model.regions:
            def outer(u, v_lo=v_lo, v_hi=v_hi, g=g):
                val, _ = integrate.quad(lambda v: g(u, v), v_lo(u), v_hi(u),
                                        epsabs=tol / 10, epsrel=tol / 10,
                                        limit=200)
                return val

            val, err = integrate.quad(outer, u_lo, u_hi,
                                      epsabs=tol, epsrel=tol, limit=500)
            total += val
            err_total += err
        return MassResult(model.name, method, total * model.multiplier,
                          err_total * model.multiplier)
    if method == "monte-carlo":
        rng = seeded_rng(seed, stream=0)
        total = 0.0
        var = 0.0
        for u_lo, u_hi, v_lo, v_hi, g in model.regions:
            u = rng.uniform(u_lo, u_hi, size=n_samples)
            width_u = u_hi - u_lo
            lo = np.array([v_lo(ui) for ui in u])
            hi = np.array([v_hi(ui) for ui in u])
            v = rng.uniform(0.0, 1.0, size=n_samples) * (hi - lo) + lo
            vals = np.array([g(ui, vi) for ui, vi in zip(u, v)])
            vals *= width_u * (hi - lo)
            total += float(vals.mean())
            var += float(vals.var() / n_samples)
        return MassResult(model.name, method, total * model.multiplier,
                          math.sqrt(var) * model.multiplier)
    raise UnsupportedError(f"unknown mass method {method!r}")


# ---------------------------------------------------------------------------
# empirical histograms

@dataclass(frozen=True)
class HistogramComparison:
    model: str
    algorithm: str
    bins: int
    n_steps: int
    observed: tuple
    expected: tuple
    cell_ids: tuple
    l1: float
    sup: float
    restarts: int = 0
    outside: int = 0

    def to_csv(self) -> str:
        lines = ["cell-id,observed,expected,residual"]
        for cid, o, e in zip(self.cell_ids, self.observed, self.expected):
            lines.append(f"{cid},{o!r},{e!r},{o - e!r}")
        return "\n".join(lines) + "\n"


_TRI_NODES = ((Fraction(2, 3), Fraction(1, 6), Fraction(1, 6)),
              (Fraction(1, 6), Fraction(2, 3), Fraction(1, 6)),
              (Fraction(1, 6), Fraction(1, 6), Fraction(2, 3)))


def _tri_rule(f, tri):
    (ax, ay), (bx, by), (cx, cy) = tri
    area = triangle_area_vertices(tri[0], tri[1], tri[2])
    acc = 0.0
    for wa, wb, wc in _TRI_NODES:
        u = float(wa * ax + wb * bx + wc * cx)
        v = float(wa * ay + wb * by + wc * cy)
        acc += f(u, v)
    return area * acc / 3.0


def _tri_split(tri):
    (ax, ay), (bx, by), (cx, cy) = tri
    mab = ((ax + bx) / 2.0, (ay + by) / 2.0)
    mbc = ((bx + cx) / 2.0, (by + cy) / 2.0)
    mca = ((cx + ax) / 2.0, (cy + ay) / 2.0)
    return (((ax, ay), mab, mca), (mab, (bx, by), mbc),
            (mca, mbc, (cx, cy)), (mab, mbc, mca))


def integrate_triangle(f, tri, rel_tol: float = 1e-5, max_depth: int = 12):
    """Adaptive integral of f(u, v) over a plane triangle, refining
    toward the (integrable) singularities at the domain edges."""
    coarse = _tri_rule(f, tri)
    children = _tri_split(tri)
    fine = math.fsum(_tri_rule(f, c) for c in children)
    if max_depth == 0 or abs(fine - coarse) <= rel_tol * abs(fine) + 1e-15:
        return fine
    return math.fsum(
        integrate_triangle(f, c, rel_tol, max_depth - 1) for c in children)


def _barycentric_map(base_triangle):
    """Map simplex coordinates -> barycentric weights of the base
    triangle, computed in the (x1, x2) coordinate plane."""
    verts = [(float(p[0]), float(p[1])) for p in base_triangle]
    m = np.array([[verts[0][0], verts[1][0], verts[2][0]],
                  [verts[0][1], verts[1][1], verts[2][1]],
                  [1.0, 1.0, 1.0]])
    inv = np.linalg.inv(m)
    rows = tuple(tuple(float(c) for c in r) for r in inv)
    def to_bary(x1, x2):
        return (rows[0][0] * x1 + rows[0][1] * x2 + rows[0][2],
                rows[1][0] * x1 + rows[1][1] * x2 + rows[1][2],
                rows[2][0] * x1 + rows[2][1] * x2 + rows[2][2])
    return verts, to_bary


def _cell_vertices(verts, bins, i, j, down):
    def plane(u, v):
        w = 1.0 - u - v
        return (u * verts[0][0] + v * verts[1][0] + w * verts[2][0],
                u * verts[0][1] + v * verts[1][1] + w * verts[2][1])
    s = 1.0 / bins
    if not down:
        return (plane(i * s, j * s), plane((i + 1) * s, j * s),
                plane(i * s, (j + 1) * s))
    return (plane((i + 1) * s, j * s), plane(i * s, (j + 1) * s),
            plane((i + 1) * s, (j + 1) * s))


def expected_cell_masses(model: DensityModel, bins: int,
                         rel_tol: float = 1e-5):
    """Model mass of every barycentric cell of the base triangle,
    normalized to sum 1.  Returns (cell_ids, masses)."""
    if model.base_triangle is None:
        raise UnsupportedError(f"{model.name} has no histogram base triangle")
    verts, _ = _barycentric_map(model.base_triangle)

    def g(u, v):
        w = 1.0 - u - v
        return float(model.evaluate((u, v, w)))

    ids = []
    masses = []
    for i in range(bins):
        for j in range(bins - i):
            ids.append(f"u{i}-{j}")
            masses.append(integrate_triangle(
                g, _cell_vertices(verts, bins, i, j, False), rel_tol))
            if i + j <= bins - 2:
                ids.append(f"d{i}-{j}")
                masses.append(integrate_triangle(
                    g, _cell_vertices(verts, bins, i, j, True), rel_tol))
    total = math.fsum(masses)
    return tuple(ids), tuple(m / total for m in masses)


def empirical_density(spec: AlgorithmSpec, model: DensityModel, n_steps: int,
                      bins: int = 32, seed: int = 0) -> HistogramComparison:
    """Histogram of a renormalized orbit against the model.

    The base triangle is subdivided into ``bins^2`` equal-area cells;
    the orbit is binned per step and compared with the model integrated
    per cell.  Orbits hitting a partition boundary restart from a fresh
    substream; restarts are reported.
    """
    if model.base_triangle is None:
        raise UnsupportedError(f"{model.name} has no histogram base triangle")
    if spec.name != model.algorithm:
        raise DomainError(
            f"model {model.name} belongs to {model.algorithm}, not {spec.name}")
    cell_ids, expected = expected_cell_masses(model, bins)
    id_index = {cid: k for k, cid in enumerate(cell_ids)}
    counts = np.zeros(len(cell_ids), dtype=np.int64)
    _, to_bary = _barycentric_map(model.base_triangle)
    step = make_float_projective_stepper(spec)

    outside = 0
    restarts = 0
    rng = seeded_rng(seed, stream=0)
    x = model.orbit_start(rng)
    done = 0
    while done < n_steps:
        u, v, _ = to_bary(x[0], x[1])
        su, sv = u * bins, v * bins
        iu, iv = int(su), int(sv)
        down = (su - iu) + (sv - iv) > 1.0
        k = id_index.get(f"{'d' if down else 'u'}{iu}-{iv}")
        if k is None:
            outside += 1
        else:
            counts[k] += 1
        done += 1
        try:
            _, x = step(x)
        except (BoundaryError, DomainError):
            restarts += 1
            rng = seeded_rng(seed, stream=restarts)
            x = model.orbit_start(rng)

    observed = tuple(float(c) / n_steps for c in counts)
    l1 = float(np.abs(np.asarray(observed) - np.asarray(expected)).sum())
    sup = float(np.abs(np.asarray(observed) - np.asarray(expected)).max())
    return HistogramComparison(
        model.name, spec.name, bins, n_steps, observed, expected,
        cell_ids, l1, sup, restarts, outside)

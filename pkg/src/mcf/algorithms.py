"""Additive multidimensional continued fraction algorithms.

Each algorithm is a piecewise linear map F(x) = M(x)^{-1} x on a cone,
where M is constant on each branch cone and has nonnegative rational
entries.  An :class:`AlgorithmSpec` bundles the branches (partition
predicate + matrix), the image cone of every branch, and, when known,
the dual cone that makes the natural extension a bijection.

Bundled algorithms
------------------
farey         subtract the smaller coordinate from the larger (d=2)
farey-sorted  the same map on the sorted cone 0 < x < y
reverse       Arnoux-Rauzy moves on the three outer cones, completed on
              the central cone by x -> (-x+y+z, x-y+z, x+y-z)
cassaigne     the two-branch algorithm (x,y,z) -> (x-z, z, y) / (y, x, z-x)
brun          subtract the second largest coordinate from the largest,
              one branch per coordinate order (any dimension, default 3)
brun-sorted   quotient of brun by coordinate sort (any dimension)
selmer        subtract the smallest coordinate from the largest
poincare      subtract the full staircase: middle from largest,
              smallest from middle
arp           Arnoux-Rauzy branch where one coordinate dominates the sum
              of the others, Poincare branch elsewhere

Selmer, Poincare and the AR-Poincare composition follow the usual
textbook conventions; no invariant dual cone is declared for them (for
arp the domain is precisely what the raster experiments explore).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import BoundaryError, DomainError
from .linalg import SquareMatrix, cone_vector, normalize_l1

IN, ON, OUT = 1, 0, -1


class Cone:
    """An open polyhedral cone {v : c . v > 0 for all forms c}.

    Positivity of the ambient coordinates is implied and not repeated in
    the forms.  ``rays`` optionally lists the extreme rays of the
    closure, used for exact sampling and for extreme-ray audits.
    """

    __slots__ = ("forms", "rays")

    def __init__(self, forms=(), rays=None):
        self.forms = tuple(tuple(f) for f in forms)
        self.rays = None if rays is None else tuple(tuple(r) for r in rays)

    def side(self, v) -> int:
        """+1 strictly inside, -1 strictly outside, 0 on the boundary."""
        tie = False
        for f in self.forms:
            s = sum(c * x for c, x in zip(f, v) if c)
            if s < 0:
                return OUT
            if s == 0:
                tie = True
        return ON if tie else IN

    def contains(self, v) -> bool:
        return self.side(v) == IN

    def contains_closed(self, v) -> bool:
        return all(sum(c * x for c, x in zip(f, v) if c) >= 0 for f in self.forms)

    def sample(self, rng, hi: int = 1 << 20):
        """Exact integer point in the interior, from positive random
        integer weights on the extreme rays."""
        if self.rays is None:
            raise DomainError("cone has no ray description to sample from")
        while True:
            w = rng.integers(1, hi, size=len(self.rays))
            v = tuple(
                int(sum(int(wk) * r[i] for wk, r in zip(w, self.rays)))
                for i in range(len(self.rays[0]))
            )
            if all(c > 0 for c in v) and self.side(v) == IN:
                return v

    def __repr__(self):
        return f"Cone(forms={self.forms!r})"


@dataclass(frozen=True)
class Branch:
    """One branch of an algorithm: its cone, matrix and dual-cone data."""

    label: str
    matrix: SquareMatrix
    cone: Cone
    image: Cone | None = None        # image cone when not the whole domain
    dual_source: Cone | None = None  # a-cone paired with the branch
    dual_target: Cone | None = None  # where M^T sends the dual source


@dataclass(frozen=True)
class AlgorithmSpec:
    """A named MCF algorithm; immutable and shareable across threads."""

    name: str
    dim: int
    branches: tuple
    domain: Cone = field(default_factory=Cone)
    dual_kind: str | None = None      # "product", "markov" or None
    dual_cone: Cone | None = None     # the product dual cone, if any
    dual_pieces: dict = field(default_factory=dict)
    fast_classify: object = None      # float-tuple classifier, index or None
    doc: str = ""

    def branch_index(self, label: str) -> int:
        for i, b in enumerate(self.branches):
            if b.label == label:
                return i
        raise KeyError(f"{self.name} has no branch {label!r}")

    def branch(self, label: str) -> Branch:
        return self.branches[self.branch_index(label)]

    def branch_id(self, branch: Branch) -> str:
        return f"{self.name}/{branch.label}"

    def __repr__(self):
        return f"AlgorithmSpec({self.name!r}, d={self.dim})"


# ---------------------------------------------------------------------------
# classification and stepping

def classify(spec: AlgorithmSpec, x) -> Branch:
    """The unique branch whose cone contains ``x``.

    Raises :class:`BoundaryError` when ``x`` lies on a partition
    boundary (no strict predicate holds) and :class:`DomainError` when
    ``x`` is outside the algorithm's domain cone.
    """
    x = cone_vector(x)
    if len(x) != spec.dim:
        raise DomainError(f"{spec.name} expects dimension {spec.dim}")
    s = spec.domain.side(x)
    if s == OUT:
        raise DomainError(f"{x!r} is outside the domain of {spec.name}")
    if s == ON:
        raise BoundaryError(f"{x!r} is on the domain boundary of {spec.name}")
    for b in spec.branches:
        if b.cone.side(x) == IN:
            return b
    raise BoundaryError(f"{x!r} lies on a partition boundary of {spec.name}")


def step_linear(spec: AlgorithmSpec, x):
    """One unnormalized step: (branch label, M^{-1} x)."""
    b = classify(spec, x)
    y = b.matrix.apply_inverse(x)
    if any(c <= 0 for c in y):
        raise BoundaryError(f"step of {x!r} left the open cone (branch {b.label})")
    return b.label, y


def step_projective(spec: AlgorithmSpec, x):
    """One renormalized step on the unit simplex."""
    label, y = step_linear(spec, x)
    return label, normalize_l1(y)


def inverse_branches(spec: AlgorithmSpec, x, boundary_sink: list | None = None):
    """All branch preimages of a simplex point ``x``.

    For each branch i the candidate is h_i(x) = M_i x / |M_i x|_1; it is
    kept when M_i x lies in the branch cone and, when the branch has a
    declared image cone, x lies in it.  The jacobian of h_i as a map of
    the simplex is |det M_i| / |M_i x|_1^d.  Candidates that hit a cone
    boundary exactly are skipped and reported through ``boundary_sink``.
    """
    x = cone_vector(x)
    d = spec.dim
    out = []
    for b in spec.branches:
        pre = b.matrix.apply(x)
        side = b.cone.side(pre)
        img_side = IN if b.image is None else b.image.side(x)
        if side == OUT or img_side == OUT:
            continue
        if side == ON or img_side == ON:
            if boundary_sink is not None:
                boundary_sink.append(b.label)
            continue
        norm = sum(pre)
        jac = abs(b.matrix.det) / norm ** d
        out.append((b.label, tuple(c / norm for c in pre), jac))
    return out


# ---------------------------------------------------------------------------
# construction helpers

def _e(i: int, d: int, c: int = 1) -> tuple:
    v = [0] * d
    v[i] = c
    return tuple(v)


def _form(d: int, plus=(), minus=()) -> tuple:
    v = [0] * d
    for i in plus:
        v[i] += 1
    for i in minus:
        v[i] -= 1
    return tuple(v)


def _ray_sum(d: int, idx) -> tuple:
    v = [0] * d
    for i in idx:
        v[i] += 1
    return tuple(v)


def _perm_labels(d: int):
    return [
        ("".join(str(i + 1) for i in p), p)
        for p in itertools.permutations(range(d))
    ]


def _sorted_cone(d: int, p) -> Cone:
    """{x_{p[0]} < x_{p[1]} < ... < x_{p[-1]}} with its extreme rays."""
    forms = [_form(d, plus=(p[k + 1],), minus=(p[k],)) for k in range(len(p) - 1)]
    rays = [_ray_sum(d, p[j:]) for j in range(len(p) - 1, -1, -1)]
    return Cone(forms, rays)


def _strict_order(v):
    """Sorted index order of v, or None when two entries tie."""
    order = sorted(range(len(v)), key=v.__getitem__)
    for i in range(len(v) - 1):
        if v[order[i]] == v[order[i + 1]]:
            return None
    return tuple(order)


# ---------------------------------------------------------------------------
# the algorithms

@lru_cache(maxsize=None)
def farey() -> AlgorithmSpec:
    """Unsorted two-dimensional subtractive algorithm."""
    lam = Cone((), rays=((1, 0), (0, 1)))
    piece1 = Cone(((-1, 1),), rays=((0, 1), (1, 1)))   # alpha < beta
    piece2 = Cone(((1, -1),), rays=((1, 0), (1, 1)))   # alpha > beta
    b1 = Branch("1", SquareMatrix(((1, 0), (1, 1))), piece1,
                dual_source=lam, dual_target=piece2)
    b2 = Branch("2", SquareMatrix(((1, 1), (0, 1))), piece2,
                dual_source=lam, dual_target=piece1)

    def fast(v):
        x, y = v
        if x < y:
            return 0
        if y < x:
            return 1
        return None

    return AlgorithmSpec(
        name="farey", dim=2, branches=(b1, b2),
        dual_kind="product", dual_cone=lam,
        dual_pieces={"1": piece1, "2": piece2},
        fast_classify=fast,
        doc="subtract the smaller coordinate from the larger",
    )


@lru_cache(maxsize=None)
def farey_sorted() -> AlgorithmSpec:
    """Farey map restricted to the sorted cone 0 < x < y."""
    domain = Cone(((-1, 1),), rays=((0, 1), (1, 1)))
    cone_a = Cone(((-1, 1), (-2, 1)), rays=((0, 1), (1, 2)))  # y > 2x
    cone_b = Cone(((-1, 1), (2, -1)), rays=((1, 1), (1, 2)))  # x < y < 2x
    ba = Branch("a", SquareMatrix(((1, 0), (1, 1))), cone_a)
    bb = Branch("b", SquareMatrix(((0, 1), (1, 1))), cone_b)

    def fast(v):
        x, y = v
        if not x < y:
            return None
        if y > 2 * x:
            return 0
        if y < 2 * x:
            return 1
        return None

    return AlgorithmSpec(
        name="farey-sorted", dim=2, branches=(ba, bb), domain=domain,
        fast_classify=fast,
        doc="sorted Farey map: subtract and re-sort",
    )


def _triangle_cone(d3_rays=((0, 1, 1), (1, 0, 1), (1, 1, 0))) -> Cone:
    forms = (
        _form(3, plus=(1, 2), minus=(0,)),
        _form(3, plus=(0, 2), minus=(1,)),
        _form(3, plus=(0, 1), minus=(2,)),
    )
    return Cone(forms, rays=d3_rays)


@lru_cache(maxsize=None)
def reverse() -> AlgorithmSpec:
    """Three outer Arnoux-Rauzy branches plus the central completion."""
    half = Fraction(1, 2)
    mats = [
        SquareMatrix(((1, 1, 1), (0, 1, 0), (0, 0, 1))),
        SquareMatrix(((1, 0, 0), (1, 1, 1), (0, 0, 1))),
        SquareMatrix(((1, 0, 0), (0, 1, 0), (1, 1, 1))),
        SquareMatrix(((0, half, half), (half, 0, half), (half, half, 0))),
    ]
    outer = [
        Cone((_form(3, plus=(0,), minus=(1, 2)),),
             rays=((1, 0, 0), (1, 1, 0), (1, 0, 1))),
        Cone((_form(3, plus=(1,), minus=(0, 2)),),
             rays=((0, 1, 0), (1, 1, 0), (0, 1, 1))),
        Cone((_form(3, plus=(2,), minus=(0, 1)),),
             rays=((0, 0, 1), (1, 0, 1), (0, 1, 1))),
    ]
    central = _triangle_cone()
    dual = _triangle_cone()
    # pieces of the dual cone: one coordinate below (or all above) a
    # quarter of the coordinate sum
    piece_forms = [
        (-3, 1, 1),  # beta + gamma > 3 alpha
        (1, -3, 1),
        (1, 1, -3),
    ]
    piece_rays = {
        "1": ((1, 2, 1), (1, 1, 2), (0, 1, 1)),
        "2": ((2, 1, 1), (1, 1, 2), (1, 0, 1)),
        "3": ((2, 1, 1), (1, 2, 1), (1, 1, 0)),
        "4": ((2, 1, 1), (1, 2, 1), (1, 1, 2)),
    }
    pieces = {}
    for i in range(3):
        pieces[str(i + 1)] = Cone(dual.forms + (piece_forms[i],),
                                  rays=piece_rays[str(i + 1)])
    pieces["4"] = Cone(
        dual.forms + tuple(tuple(-c for c in f) for f in piece_forms),
        rays=piece_rays["4"],
    )
    branches = tuple(
        Branch(str(i + 1), mats[i], (outer + [central])[i],
               dual_source=dual, dual_target=pieces[str(i + 1)])
        for i in range(4)
    )

    def fast(v):
        x, y, z = v
        if x > y + z:
            return 0
        if y > x + z:
            return 1
        if z > x + y:
            return 2
        if x < y + z and y < x + z and z < x + y:
            return 3
        return None

    return AlgorithmSpec(
        name="reverse", dim=3, branches=branches,
        dual_kind="product", dual_cone=dual, dual_pieces=pieces,
        fast_classify=fast,
        doc="Arnoux-Rauzy moves completed on the central cone",
    )


@lru_cache(maxsize=None)
def cassaigne() -> AlgorithmSpec:
    """Two-branch algorithm mixing a subtraction with a swap."""
    c_a = SquareMatrix(((1, 1, 0), (0, 0, 1), (0, 1, 0)))
    c_b = SquareMatrix(((0, 1, 0), (1, 0, 0), (0, 1, 1)))
    cone_a = Cone((_form(3, plus=(0,), minus=(2,)),),
                  rays=((1, 0, 0), (0, 1, 0), (1, 0, 1)))
    cone_b = Cone((_form(3, plus=(2,), minus=(0,)),),
                  rays=((0, 0, 1), (0, 1, 0), (1, 0, 1)))
    # dual cone: max(alpha, gamma) < beta < alpha + gamma
    dual = Cone(
        ((-1, 1, 0), (0, 1, -1), (1, -1, 1)),
        rays=((1, 1, 0), (1, 1, 1), (0, 1, 1)),
    )
    piece_a = Cone(dual.forms + ((-1, 0, 1),),
                   rays=((1, 1, 1), (1, 2, 1), (0, 1, 1)))
    piece_b = Cone(dual.forms + ((1, 0, -1),),
                   rays=((1, 1, 0), (1, 2, 1), (1, 1, 1)))
    branches = (
        Branch("a", c_a, cone_a, dual_source=dual, dual_target=piece_a),
        Branch("b", c_b, cone_b, dual_source=dual, dual_target=piece_b),
    )

    def fast(v):
        x, _, z = v
        if x > z:
            return 0
        if z > x:
            return 1
        return None

    return AlgorithmSpec(
        name="cassaigne", dim=3, branches=branches,
        dual_kind="product", dual_cone=dual,
        dual_pieces={"a": piece_a, "b": piece_b},
        fast_classify=fast,
        doc="two-branch subtract-and-swap algorithm",
    )


def _brun_matrix(d: int, p) -> SquareMatrix:
    rows = [list(_e(i, d)) for i in range(d)]
    rows[p[-1]][p[-2]] = 1
    return SquareMatrix(rows)


def _theta_cone(d: int, p) -> Cone:
    """Image cone of the brun branch p: first d-1 coordinates sorted."""
    forms = [_form(d, plus=(p[k + 1],), minus=(p[k],)) for k in range(d - 2)]
    rays = [_e(p[-1], d)] + [_ray_sum(d, p[j:d - 1]) for j in range(d - 2, -1, -1)]
    return Cone(forms, rays)


def _theta_star_cone(d: int, p) -> Cone:
    """{a : a_{p[i]} < a_{p[-1]} for i < d-2}."""
    forms = [_form(d, plus=(p[-1],), minus=(p[i],)) for i in range(d - 2)]
    rays = [_e(p[-2], d)]
    small = [p[i] for i in range(d - 2)]
    for r in range(len(small) + 1):
        for s in itertools.combinations(small, r):
            rays.append(_ray_sum(d, s + (p[-1],)))
    return Cone(forms, rays)


def _lambda_star_cone(d: int, p) -> Cone:
    """{a : a_{p[i]} < a_{p[-1]} < a_{p[-2]} for i < d-2}."""
    forms = [_form(d, plus=(p[-1],), minus=(p[i],)) for i in range(d - 2)]
    forms.append(_form(d, plus=(p[-2],), minus=(p[-1],)))
    rays = [_e(p[-2], d)]
    small = [p[i] for i in range(d - 2)]
    for r in range(len(small) + 1):
        for s in itertools.combinations(small, r):
            rays.append(_ray_sum(d, s + (p[-2], p[-1])))
    return Cone(forms, rays)


def brun(d: int = 3) -> AlgorithmSpec:
    """Subtract the second largest coordinate from the largest, one
    branch per strict coordinate order (symmetric version)."""
    return _brun(int(d))


@lru_cache(maxsize=None)
def _brun(d: int) -> AlgorithmSpec:
    if d < 2:
        raise DomainError("brun needs dimension >= 2")
    labels = _perm_labels(d)
    branches = []
    pieces = {}
    index = {}
    for label, p in labels:
        pieces[label] = _lambda_star_cone(d, p)
        branches.append(Branch(
            label, _brun_matrix(d, p), _sorted_cone(d, p),
            image=_theta_cone(d, p),
            dual_source=_theta_star_cone(d, p),
            dual_target=pieces[label],
        ))
        index[p] = len(branches) - 1

    def fast(v):
        order = _strict_order(v)
        return None if order is None else index[order]

    return AlgorithmSpec(
        name="brun" if d == 3 else f"brun d={d}",
        dim=d, branches=tuple(branches),
        dual_kind="markov", dual_pieces=pieces,
        fast_classify=fast,
        doc="subtract the second largest coordinate from the largest",
    )


def brun_sorted(d: int = 3) -> AlgorithmSpec:
    """Brun on the sorted cone: subtract, then re-insert in order.

    Branch k re-inserts the new value x_d - x_{d-1} as the k-th smallest
    coordinate.
    """
    return _brun_sorted(int(d))


@lru_cache(maxsize=None)
def _brun_sorted(d: int) -> AlgorithmSpec:
    if d < 2:
        raise DomainError("brun-sorted needs dimension >= 2")
    ident = tuple(range(d))
    domain = _sorted_cone(d, ident)
    branches = []
    for k in range(d):
        rows = []
        for j in range(d - 1):
            rows.append(_e(j, d) if j < k else _e(j + 1, d))
        last = list(_e(d - 1, d))
        last[k if k <= d - 2 else d - 2] = 1
        rows.append(tuple(last))
        forms = list(domain.forms)
        # t = x_{d-1} - x_{d-2} compared against x_{k-1} and x_k
        if k > 0:
            forms.append(_form(d, plus=(d - 1,), minus=(d - 2, k - 1)))
        if k <= d - 2:
            forms.append(_form(d, plus=(k, d - 2), minus=(d - 1,)))
        branches.append(Branch(str(k), SquareMatrix(rows), Cone(forms)))

    def fast(v):
        for i in range(d - 1):
            if not v[i] < v[i + 1]:
                return None
        t = v[d - 1] - v[d - 2]
        k = 0
        for i in range(d - 1):
            if v[i] < t:
                k += 1
            elif v[i] == t:
                return None
        return k

    return AlgorithmSpec(
        name="brun-sorted" if d == 3 else f"brun-sorted d={d}",
        dim=d, branches=tuple(branches), domain=domain,
        fast_classify=fast,
        doc="sorted quotient of the brun algorithm",
    )


@lru_cache(maxsize=None)
def selmer() -> AlgorithmSpec:
    """Subtract the smallest coordinate from the largest (d=3)."""
    d = 3
    branches = []
    index = {}
    for label, p in _perm_labels(d):
        rows = [list(_e(i, d)) for i in range(d)]
        rows[p[-1]][p[0]] = 1
        image = Cone((
            _form(d, plus=(p[1],), minus=(p[0],)),
            _form(d, plus=(p[0], p[2]), minus=(p[1],)),
        ))
        branches.append(Branch(label, SquareMatrix(rows),
                               _sorted_cone(d, p), image=image))
        index[p] = len(branches) - 1

    def fast(v):
        order = _strict_order(v)
        return None if order is None else index[order]

    return AlgorithmSpec(
        name="selmer", dim=3, branches=tuple(branches),
        fast_classify=fast,
        doc="subtract the smallest coordinate from the largest",
    )


def _poincare_matrix(d: int, p) -> SquareMatrix:
    rows = [[0] * d for _ in range(d)]
    for i in range(d):
        for j in range(i + 1):
            rows[p[i]][p[j]] = 1
    return SquareMatrix(rows)


@lru_cache(maxsize=None)
def poincare() -> AlgorithmSpec:
    """Full staircase subtraction on each sorted sector (d=3)."""
    d = 3
    branches = []
    index = {}
    for label, p in _perm_labels(d):
        branches.append(Branch(label, _poincare_matrix(d, p),
                               _sorted_cone(d, p)))
        index[p] = len(branches) - 1

    def fast(v):
        order = _strict_order(v)
        return None if order is None else index[order]

    return AlgorithmSpec(
        name="poincare", dim=3, branches=tuple(branches),
        fast_classify=fast,
        doc="subtract middle from largest and smallest from middle",
    )


@lru_cache(maxsize=None)
def arp() -> AlgorithmSpec:
    """Arnoux-Rauzy branch when one coordinate exceeds the sum of the
    others, Poincare branch on the central cone."""
    d = 3
    rev = reverse()
    branches = []
    for i in range(3):
        b = rev.branches[i]
        branches.append(Branch("AR" + str(i + 1), b.matrix, b.cone))
    central_forms = _triangle_cone().forms
    index = {}
    for label, p in _perm_labels(d):
        forms = central_forms + _sorted_cone(d, p).forms
        rays = ((1, 1, 1), _ray_sum(d, (p[1], p[2])),
                _ray_sum(d, (p[0], p[1], p[2], p[2])))
        branches.append(Branch("P" + label, _poincare_matrix(d, p),
                               Cone(forms, rays)))
        index[p] = len(branches) - 1

    def fast(v):
        x, y, z = v
        if x > y + z:
            return 0
        if y > x + z:
            return 1
        if z > x + y:
            return 2
        if x < y + z and y < x + z and z < x + y:
            order = _strict_order(v)
            return None if order is None else index[order]
        return None

    return AlgorithmSpec(
        name="arp", dim=3, branches=tuple(branches),
        fast_classify=fast,
        doc="Arnoux-Rauzy branches completed by Poincare branches",
    )


# ---------------------------------------------------------------------------
# registry

_FACTORIES = {
    "farey": (farey, False),
    "farey-sorted": (farey_sorted, False),
    "reverse": (reverse, False),
    "cassaigne": (cassaigne, False),
    "brun": (brun, True),
    "brun-sorted": (brun_sorted, True),
    "selmer": (selmer, False),
    "poincare": (poincare, False),
    "arp": (arp, False),
}


def registry_names():
    """Names accepted by :func:`get_algorithm`; ``brun`` and
    ``brun-sorted`` also accept a ``d=<n>`` suffix."""
    return list(_FACTORIES)


def get_algorithm(name: str) -> AlgorithmSpec:
    """Look up an algorithm by registry name, e.g. ``"brun d=4"``."""
    base, _, rest = name.strip().partition(" ")
    factory, dimensioned = _FACTORIES.get(base, (None, False))
    if factory is None:
        raise DomainError(
            f"unknown algorithm {name!r}; known: {', '.join(registry_names())}")
    if rest:
        if not dimensioned or not rest.startswith("d="):
            raise DomainError(f"bad algorithm name {name!r}")
        try:
            d = int(rest[2:])
        except ValueError:
            raise DomainError(f"bad dimension in {name!r}") from None
        if not 2 <= d <= 8:
            raise DomainError("supported dimensions are 2..8")
        return factory(d)
    return factory()


def fast_classify_index(spec: AlgorithmSpec, x):
    """Branch index for a float point, falling back to the generic
    predicates; raises BoundaryError on ties like :func:`classify`."""
    if spec.fast_classify is not None:
        i = spec.fast_classify(x)
        if i is not None:
            return i
        raise BoundaryError(f"{x!r} lies on a partition boundary of {spec.name}")
    return spec.branch_index(classify(spec, x).label)

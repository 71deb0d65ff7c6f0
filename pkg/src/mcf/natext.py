"""Natural extension of an MCF algorithm and its domain audits.

The natural extension acts on pairs of cone vectors by

    (x, a)  ->  (M(x)^{-1} x,  M(x)^T a)

It preserves the scalar product <x, a> and Lebesgue measure (the two
blocks have reciprocal determinants).  For the algorithms with a known
dual cone the map is a bijection on a product (or union of products)
domain; :func:`bijectivity_audit` verifies those statements on exact
rational samples and on extreme rays.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .algorithms import IN, ON, OUT, AlgorithmSpec, Branch, classify, fast_classify_index
from .errors import BoundaryError, DomainError, UnsupportedError
from .linalg import cone_vector, dot, primitive_ray, seeded_rng, vector_is_exact

AUDIT_SHARDS = 32


@dataclass(frozen=True)
class NatExtState:
    """A pair of cone vectors with the cached scalar product e = <x, a>."""

    x: tuple
    a: tuple
    e: object

    @property
    def exact(self) -> bool:
        return vector_is_exact(self.x)


def natext_state(x, a, exact: bool | None = None) -> NatExtState:
    x = cone_vector(x, exact)
    a = cone_vector(a, exact)
    if len(x) != len(a):
        raise DomainError("x and a must have the same dimension")
    return NatExtState(x, a, dot(x, a))


def natext_step(spec: AlgorithmSpec, s: NatExtState):
    """One step of the skew product; returns (branch label, new state)."""
    b = classify(spec, s.x)
    x = b.matrix.apply_inverse(s.x)
    if any(c <= 0 for c in x):
        raise BoundaryError(f"step left the open cone on branch {b.label}")
    a = b.matrix.apply_T(s.a)
    return b.label, NatExtState(x, a, dot(x, a))


def natext_inverse(spec: AlgorithmSpec, label: str, s: NatExtState) -> NatExtState:
    """Inverse branch of the skew product: (M x, M^{-T} a).

    Raises :class:`DomainError` when ``s`` is not in the image of the
    branch (the recovered dual vector leaves the positive cone).
    """
    b = spec.branch(label)
    x = b.matrix.apply(s.x)
    a = b.matrix.apply_inverse_T(s.a)
    if any(c <= 0 for c in a):
        raise DomainError(
            f"state is not in the image of branch {label}: dual {a!r}")
    return NatExtState(x, a, dot(x, a))


def natext_step_renormalized(spec: AlgorithmSpec, s: NatExtState):
    """Step, then rescale x to unit 1-norm and a to unit scalar product.

    Legitimate by homogeneity of the skew product; keeps 1e9-step float
    orbits away from under/overflow.  Audits use the unnormalized exact
    form instead.
    """
    label, t = natext_step(spec, s)
    tx, ta = t.x, t.a
    if t.exact:
        tx = tuple(Fraction(c) for c in tx)
        ta = tuple(Fraction(c) for c in ta)
    nx = sum(tx)
    x = tuple(c / nx for c in tx)
    e = dot(x, ta)
    a = tuple(c / e for c in ta)
    return label, NatExtState(x, a, dot(x, a))


# ---------------------------------------------------------------------------
# section coordinates

@dataclass(frozen=True)
class SectionPoint:
    """Coordinates adapted to the unit-norm section of the scaling flow.

    ``y`` keeps the first d-1 coordinates of x, ``b`` the first d-1 dual
    differences a_i - a_d, ``e`` the scalar product.  In float mode
    ``tau`` is -log |x|_1; in exact mode it stores the norm itself so
    the round trip stays exact.
    """

    y: tuple
    b: tuple
    tau: object
    e: object
    exact: bool


def to_section(s: NatExtState) -> SectionPoint:
    exact = s.exact
    norm = sum(s.x)
    tau = norm if exact else -math.log(norm)
    ad = s.a[-1]
    b = tuple(ai - ad for ai in s.a[:-1])
    return SectionPoint(s.x[:-1], b, tau, s.e, exact)


def from_section(p: SectionPoint) -> NatExtState:
    if p.exact:
        norm = Fraction(p.tau)
        y, b, e = (tuple(Fraction(c) for c in p.y),
                   tuple(Fraction(c) for c in p.b), Fraction(p.e))
    else:
        norm = math.exp(-p.tau)
        y, b, e = p.y, p.b, p.e
    xd = norm - sum(y)
    if xd <= 0:
        raise DomainError("section point has no positive last coordinate")
    x = y + (xd,)
    ad = (e - sum(bi * yi for bi, yi in zip(b, y))) / norm
    a = tuple(bi + ad for bi in b) + (ad,)
    if any(c <= 0 for c in a):
        raise DomainError("section point has no positive dual vector")
    return NatExtState(x, a, dot(x, a))


# ---------------------------------------------------------------------------
# dual cone membership

@dataclass(frozen=True)
class DualMembership:
    """Result of a dual-cone membership test.

    ``piece`` is the matching piece when it is unique; ``pieces`` lists
    every matching label (in dimension >= 4 the Markov dual pieces
    coincide in groups, being symmetric in their small coordinates).
    """

    inside: bool
    piece: str | None = None
    pieces: tuple = ()
    theta_pieces: tuple = ()


def dual_membership(spec: AlgorithmSpec, a) -> DualMembership:
    """Membership of a dual vector in the algorithm's dual cone.

    For product-domain algorithms: whether a lies in the dual cone and
    in which piece.  For Markov-domain algorithms the pieces cover the
    positive cone; the result also lists the branches whose source dual
    cone contains a.  Exact ties raise :class:`BoundaryError`.
    """
    a = cone_vector(a)
    if spec.dual_kind == "product":
        side = spec.dual_cone.side(a)
        if side == OUT:
            return DualMembership(False)
        if side == ON:
            raise BoundaryError(f"{a!r} is on the dual cone boundary")
        pieces = _matching_pieces(spec, a)
        if len(pieces) != 1:
            raise DomainError(f"dual pieces of {spec.name} are degenerate at {a!r}")
        return DualMembership(True, pieces[0], pieces)
    if spec.dual_kind == "markov":
        pieces = _matching_pieces(spec, a)
        if not pieces:
            raise BoundaryError(f"{a!r} is in no dual piece of {spec.name}")
        thetas = []
        for b in spec.branches:
            side = b.dual_source.side(a)
            if side == ON:
                raise BoundaryError(f"{a!r} is on the boundary of a dual source cone")
            if side == IN:
                thetas.append(b.label)
        piece = pieces[0] if len(pieces) == 1 else None
        return DualMembership(True, piece, pieces, tuple(thetas))
    raise UnsupportedError(f"{spec.name} has no declared dual cone")


def _matching_pieces(spec: AlgorithmSpec, a) -> tuple:
    hits = []
    for label, cone in spec.dual_pieces.items():
        side = cone.side(a)
        if side == ON:
            raise BoundaryError(f"{a!r} is on a dual piece boundary")
        if side == IN:
            hits.append(label)
    return tuple(hits)


def in_domain(spec: AlgorithmSpec, s: NatExtState) -> bool:
    """Whether (x, a) lies in the natural extension domain.

    Product domains require a in the dual cone; Markov domains require a
    in the source dual cone of the branch of x.
    """
    if spec.dual_kind == "product":
        side = spec.dual_cone.side(s.a)
    elif spec.dual_kind == "markov":
        b = classify(spec, s.x)
        side = b.dual_source.side(s.a)
    else:
        raise UnsupportedError(f"{spec.name} has no declared dual cone")
    if side == ON:
        raise BoundaryError(f"{s.a!r} is on the dual domain boundary")
    return side == IN


# ---------------------------------------------------------------------------
# fast float stepping (shared by absorption checks and the experiments)

def make_float_stepper(spec: AlgorithmSpec):
    """Renormalized float natural-extension step on plain tuples.

    Returns ``step(x, a) -> (branch_index, x', a')`` with |x'|_1 = 1 and
    <x', a'> = 1.  Raises :class:`BoundaryError` on exact partition ties
    and :class:`DomainError` on float degeneracies.
    """
    inv = [b.matrix.inverse_f for b in spec.branches]
    tr = [b.matrix.T_f for b in spec.branches]
    d = spec.dim

    if d == 3:
        inv3 = [m[0] + m[1] + m[2] for m in inv]
        tr3 = [m[0] + m[1] + m[2] for m in tr]

        def step(x, a, _fc=spec.fast_classify, _inv=inv3, _tr=tr3):
            i = _fc(x)
            if i is None:
                raise BoundaryError(f"{x!r} lies on a partition boundary")
            m = _inv[i]
            x0, x1, x2 = x
            y0 = m[0] * x0 + m[1] * x1 + m[2] * x2
            y1 = m[3] * x0 + m[4] * x1 + m[5] * x2
            y2 = m[6] * x0 + m[7] * x1 + m[8] * x2
            if y0 <= 0.0 or y1 <= 0.0 or y2 <= 0.0:
                raise BoundaryError("step left the open cone")
            s = y0 + y1 + y2
            y0 /= s; y1 /= s; y2 /= s
            t = _tr[i]
            a0, a1, a2 = a
            b0 = t[0] * a0 + t[1] * a1 + t[2] * a2
            b1 = t[3] * a0 + t[4] * a1 + t[5] * a2
            b2 = t[6] * a0 + t[7] * a1 + t[8] * a2
            e = y0 * b0 + y1 * b1 + y2 * b2
            if not (e > 0.0) or not math.isfinite(e):
                raise DomainError("float natural extension step degenerated")
            return i, (y0, y1, y2), (b0 / e, b1 / e, b2 / e)

        return step

    def step(x, a):
        i = fast_classify_index(spec, x)
        m = inv[i]
        y = tuple(sum(r[j] * x[j] for j in range(d)) for r in m)
        if any(c <= 0.0 for c in y):
            raise BoundaryError("step left the open cone")
        s = sum(y)
        y = tuple(c / s for c in y)
        t = tr[i]
        b = tuple(sum(r[j] * a[j] for j in range(d)) for r in t)
        e = sum(yi * bi for yi, bi in zip(y, b))
        if not (e > 0.0) or not math.isfinite(e):
            raise DomainError("float natural extension step degenerated")
        return i, y, tuple(c / e for c in b)

    return step


def make_float_projective_stepper(spec: AlgorithmSpec):
    """Renormalized float step of the projective map alone:
    ``step(x) -> (branch_index, x')`` with |x'|_1 = 1."""
    inv = [b.matrix.inverse_f for b in spec.branches]
    d = spec.dim

    if d == 3:
        inv3 = [m[0] + m[1] + m[2] for m in inv]

        def step(x, _fc=spec.fast_classify, _inv=inv3):
            i = _fc(x)
            if i is None:
                raise BoundaryError(f"{x!r} lies on a partition boundary")
            m = _inv[i]
            x0, x1, x2 = x
            y0 = m[0] * x0 + m[1] * x1 + m[2] * x2
            y1 = m[3] * x0 + m[4] * x1 + m[5] * x2
            y2 = m[6] * x0 + m[7] * x1 + m[8] * x2
            if y0 <= 0.0 or y1 <= 0.0 or y2 <= 0.0:
                raise BoundaryError("step left the open cone")
            s = y0 + y1 + y2
            return i, (y0 / s, y1 / s, y2 / s)

        return step

    def step(x):
        i = fast_classify_index(spec, x)
        y = tuple(sum(r[j] * x[j] for j in range(d)) for r in inv[i])
        if any(c <= 0.0 for c in y):
            raise BoundaryError("step left the open cone")
        s = sum(y)
        return i, tuple(c / s for c in y)

    return step


def _pair_check(spec: AlgorithmSpec):
    """Float test 'is (x, a) in the domain' given the branch index of x."""
    if spec.dual_kind == "product":
        cone = spec.dual_cone

        def check(i, a):
            return cone.side(a) == IN
    elif spec.dual_kind == "markov":
        sources = [b.dual_source for b in spec.branches]

        def check(i, a):
            return sources[i].side(a) == IN
    else:
        raise UnsupportedError(f"{spec.name} has no declared dual cone")
    return check


def absorption_time(spec: AlgorithmSpec, s0: NatExtState, max_n: int):
    """Least n <= max_n at which the dual orbit enters the domain of the
    natural extension, or None.  Float mode; renormalized stepping."""
    x = tuple(float(c) for c in s0.x)
    a = tuple(float(c) for c in s0.a)
    step = make_float_stepper(spec)
    check = _pair_check(spec)
    fc = spec.fast_classify
    for n in range(max_n + 1):
        i = fc(x)
        if i is None:
            raise BoundaryError(f"orbit hit a partition boundary at step {n}")
        if check(i, a):
            return n
        _, x, a = step(x, a)
    return None


@dataclass(frozen=True)
class AbsorptionSurvey:
    n_starts: int
    absorbed: int
    max_time: int
    escapes: int
    boundary_aborts: int

    @property
    def absorbed_fraction(self) -> float:
        return self.absorbed / self.n_starts


def absorption_survey(spec: AlgorithmSpec, n_starts: int, absorb_within: int,
                      stay_steps: int, seed: int = 0) -> AbsorptionSurvey:
    """Absorption statistics over random float starts.

    Each start is followed until the pair enters the natural extension
    domain (at most ``absorb_within`` steps), then ``stay_steps`` more
    steps, counting any later exit from the domain as an escape.  The
    starts are independent, so they are stepped as one numpy batch;
    per-start results equal the scalar path (same per-stream starts).
    """
    import numpy as np

    if spec.dual_kind is None:
        raise UnsupportedError(f"{spec.name} has no declared dual cone")
    d = spec.dim
    x_arr = np.empty((n_starts, d))
    a_arr = np.empty((n_starts, d))
    for k in range(n_starts):
        rng = seeded_rng(seed, stream=k)
        x_arr[k] = rng.dirichlet([1.0] * d)
        a_arr[k] = rng.dirichlet([1.0] * d)

    branch_forms = [np.array(b.cone.forms, dtype=float) for b in spec.branches]
    inv_t = [np.array(b.matrix.inverse_f, dtype=float).T for b in spec.branches]
    mat = [np.array(b.matrix.rows_f, dtype=float) for b in spec.branches]
    if spec.dual_kind == "product":
        dual_forms = np.array(spec.dual_cone.forms, dtype=float)
        source_forms = None
    else:
        dual_forms = None
        source_forms = [np.array(b.dual_source.forms, dtype=float)
                        for b in spec.branches]

    absorbed_at = np.full(n_starts, -1, dtype=np.int64)
    escaped = np.zeros(n_starts, dtype=bool)
    aborted = np.zeros(n_starts, dtype=bool)
    total = absorb_within + stay_steps
    for step_idx in range(total + 1):
        active = ~aborted
        masks = []
        count = np.zeros(n_starts, dtype=np.int8)
        for forms in branch_forms:
            m = (x_arr @ forms.T > 0.0).all(axis=1)
            masks.append(m)
            count += m
        aborted |= active & (count != 1)  # exact partition tie
        active = ~aborted

        if dual_forms is not None:
            inside = (a_arr @ dual_forms.T > 0.0).all(axis=1)
        else:
            inside = np.zeros(n_starts, dtype=bool)
            for m, forms in zip(masks, source_forms):
                rows = m & active
                if rows.any():
                    inside[rows] = (a_arr[rows] @ forms.T > 0.0).all(axis=1)
        newly = active & (absorbed_at < 0) & inside
        if step_idx <= absorb_within:
            absorbed_at[newly] = step_idx
        escaped |= (active & (absorbed_at >= 0) & (absorbed_at < step_idx)
                    & (step_idx <= absorbed_at + stay_steps) & ~inside)
        if step_idx == total:
            break

        x_next = x_arr.copy()
        a_next = a_arr.copy()
        for m, it, mt in zip(masks, inv_t, mat):
            rows = m & active
            if rows.any():
                x_next[rows] = x_arr[rows] @ it
                a_next[rows] = a_arr[rows] @ mt
        aborted |= active & (x_next.min(axis=1) <= 0.0)
        active = ~aborted
        sums = x_next.sum(axis=1)
        sums[~active] = 1.0
        x_arr = x_next / sums[:, None]
        e = (x_arr * a_next).sum(axis=1)
        bad = active & ~(e > 0.0)
        aborted |= bad
        e[~(e > 0.0)] = 1.0
        a_arr = a_next / e[:, None]

    done = (absorbed_at >= 0) & ~aborted
    max_time = int(absorbed_at[done].max()) if done.any() else 0
    return AbsorptionSurvey(n_starts, int(done.sum()), max_time,
                            int((escaped & ~aborted).sum()),
                            int(aborted.sum()))


# ---------------------------------------------------------------------------
# bijectivity audits

@dataclass(frozen=True)
class AuditRow:
    piece: str
    samples: int
    violations: int
    first_violation: str = ""


@dataclass(frozen=True)
class AuditReport:
    algorithm: str
    rows: tuple
    seed: int

    @property
    def total_violations(self) -> int:
        return sum(r.violations for r in self.rows)

    def to_text(self) -> str:
        lines = [f"bijectivity audit: {self.algorithm} (seed={self.seed})"]
        for r in self.rows:
            line = f"  {r.piece}: samples={r.samples} violations={r.violations}"
            if r.first_violation:
                line += f" first={r.first_violation}"
            lines.append(line)
        lines.append(f"  total violations: {self.total_violations}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = ["piece,samples,violations"]
        lines += [f"{r.piece},{r.samples},{r.violations}" for r in self.rows]
        return "\n".join(lines) + "\n"


def _audit_branch_shard(spec, branch: Branch, rng, count):
    """Exact forward/inverse checks on ``count`` samples of one piece."""
    violations = 0
    first = ""

    def fail(msg):
        nonlocal violations, first
        violations += 1
        if not first:
            first = msg

    image = branch.image if branch.image is not None else spec.domain
    for _ in range(count):
        x = branch.cone.sample(rng)
        a = branch.dual_source.sample(rng)
        s = natext_state(x, a, exact=True)
        try:
            label, t = natext_step(spec, s)
        except BoundaryError:
            fail(f"boundary at sample x={x} a={a}")
            continue
        if label != branch.label:
            fail(f"classified {label} instead of {branch.label}")
            continue
        if t.e != s.e:
            fail(f"scalar product changed: {s.e} -> {t.e}")
        if image.side(t.x) != IN:
            fail(f"image vector {t.x} not inside the image cone")
        if branch.dual_target.side(t.a) != IN:
            fail(f"dual vector {t.a} not inside the target piece")
        try:
            back = natext_inverse(spec, branch.label, t)
        except DomainError as exc:
            fail(f"inverse failed: {exc}")
            continue
        if back.x != s.x or back.a != s.a:
            fail("inverse round trip differs")
        if branch.cone.side(back.x) != IN or branch.dual_source.side(back.a) != IN:
            fail("inverse left the source piece")
    return violations, first


def _ray_image_check(branch: Branch):
    """M^T must send the extreme rays of the source dual cone onto the
    extreme rays of the target piece (as sets, up to positive scaling)."""
    mapped = {primitive_ray(branch.matrix.apply_T(r))
              for r in branch.dual_source.rays}
    expected = {primitive_ray(r) for r in branch.dual_target.rays}
    return mapped == expected, mapped, expected


def product_piece_table(spec: AlgorithmSpec):
    """For Markov domains, the pairs (x-sector pi, dual piece sigma)
    whose product lies in the natural extension domain, computed two
    ways: from the source decomposition (dual piece inside the source
    dual cone of pi) and from the image decomposition (x-sector inside
    the image cone of a branch with the same dual piece)."""
    if spec.dual_kind != "markov":
        raise UnsupportedError("product decomposition only for Markov domains")
    piece_class = {
        b.label: frozenset(primitive_ray(r) for r in b.dual_target.rays)
        for b in spec.branches
    }
    source_pairs = set()
    image_pairs = set()
    for bpi in spec.branches:
        for bsg in spec.branches:
            if all(bpi.dual_source.contains_closed(r) for r in bsg.dual_target.rays):
                source_pairs.add((bpi.label, bsg.label))
            # any branch sharing the dual piece of bsg may carry the pair
            for other in spec.branches:
                if piece_class[other.label] != piece_class[bsg.label]:
                    continue
                if all(other.image.contains_closed(r) for r in bpi.cone.rays):
                    image_pairs.add((bpi.label, bsg.label))
                    break
    return source_pairs, image_pairs


def _audit_decomposition_shard(spec, rng, count):
    """Sampled agreement of the two disjoint-union decompositions of the
    Markov domain: (x, a) lies in some source product exactly when it
    lies in exactly one image product."""
    mismatches = 0
    first = ""
    d = spec.dim
    for _ in range(count):
        while True:
            x = tuple(int(v) for v in rng.integers(1, 1 << 20, size=d))
            a = tuple(int(v) for v in rng.integers(1, 1 << 20, size=d))
            try:
                bx = classify(spec, x)
                sigmas = _matching_pieces(spec, a)
                in_source = bx.dual_source.side(a)
                image_count = 0
                for label in sigmas:
                    side = spec.branch(label).image.side(x)
                    if side == ON:
                        raise BoundaryError("image cone tie")
                    if side == IN:
                        image_count += 1
            except BoundaryError:
                continue
            if in_source != ON:
                break
        if (in_source == IN) != (image_count == 1) or image_count > 1:
            mismatches += 1
            if not first:
                first = f"x={x} a={a}"
    return mismatches, first


def _shard_counts(total: int, shards: int):
    base, extra = divmod(total, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def bijectivity_audit(spec: AlgorithmSpec, n_samples: int = 10000,
                      seed: int = 0, threads: int = 1) -> AuditReport:
    """Verify the natural-extension domain statements of an algorithm.

    Per branch: ``n_samples`` exact rational pairs from the source
    product piece are stepped forward (image and dual-target membership,
    scalar product conservation) and back (exact round trip); the
    extreme rays of the source dual cone are mapped through M^T and
    compared with the declared target rays.  Markov domains additionally
    get the two-way disjoint-union decomposition check, sampled and on
    the closed product table.
    """
    if spec.dual_kind is None:
        raise UnsupportedError(f"{spec.name} has no declared dual cone to audit")
    rows = []
    jobs = []
    for bi, branch in enumerate(spec.branches):
        for shard, count in enumerate(_shard_counts(n_samples, AUDIT_SHARDS)):
            if count:
                jobs.append((bi, shard, count))

    def run(job):
        bi, shard, count = job
        rng = seeded_rng(seed, stream=bi * AUDIT_SHARDS + shard)
        return _audit_branch_shard(spec, spec.branches[bi], rng, count)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    per_branch = {b.label: [0, ""] for b in spec.branches}
    for (bi, _, count), (viol, first) in zip(jobs, results):
        acc = per_branch[spec.branches[bi].label]
        acc[0] += viol
        if viol and not acc[1]:
            acc[1] = first
    for branch in spec.branches:
        viol, first = per_branch[branch.label]
        rows.append(AuditRow(branch.label, n_samples, viol, first))

    for branch in spec.branches:
        ok, mapped, expected = _ray_image_check(branch)
        rows.append(AuditRow(
            f"rays/{branch.label}", len(branch.dual_source.rays),
            0 if ok else 1,
            "" if ok else f"mapped={sorted(mapped)} expected={sorted(expected)}"))

    if spec.dual_kind == "markov":
        source_pairs, image_pairs = product_piece_table(spec)
        ok = source_pairs == image_pairs
        rows.append(AuditRow("decomposition/table",
                             len(source_pairs), 0 if ok else 1,
                             "" if ok else "product tables differ"))
        rng = seeded_rng(seed, stream=len(spec.branches) * AUDIT_SHARDS + 1)
        mismatches, first = _audit_decomposition_shard(spec, rng, n_samples)
        rows.append(AuditRow("decomposition/sampled", n_samples,
                             mismatches, first))

    return AuditReport(spec.name, tuple(rows), seed)

"""Orbit clouds, simplex panels and fractal rasters of dual domains.

The natural-extension orbit (x_n, a_n) is renormalized every step and
both points are drawn in the unit simplex, embedded onto the
equilateral triangle with unit circumradius centered at the origin (the
centroid of the simplex maps to (0, 0)).  For algorithms whose dual
domain is only known experimentally the raster of the a_n cloud is the
object of interest; a pixel-level probe measures its order-3 symmetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algorithms import AlgorithmSpec, classify
from .errors import BoundaryError, DomainError, UnsupportedError
from .linalg import seeded_rng
from .natext import NatExtState, make_float_stepper, natext_state

SQRT3_2 = math.sqrt(3.0) / 2.0

# equilateral embedding vertices (unit circumradius, centroid at origin)
EMBED_VERTICES = ((0.0, 1.0), (-SQRT3_2, -0.5), (SQRT3_2, -0.5))

# deterministic branch palette (colorblind-safe-ish, extended)
PALETTE = (
    (31, 119, 180), (255, 127, 14), (44, 160, 44), (214, 39, 40),
    (148, 103, 189), (140, 86, 75), (227, 119, 194), (127, 127, 127),
    (188, 189, 34), (23, 190, 207), (174, 199, 232), (255, 187, 120),
)
BACKGROUND = (255, 255, 255)


def simplex_embed(p):
    """Barycentric embedding of a 3-d simplex point onto the plane."""
    if len(p) != 3:
        raise UnsupportedError("the plane embedding is defined for dimension 3")
    u = (p[2] - p[1]) * SQRT3_2
    v = p[0] - (p[1] + p[2]) / 2.0
    return float(u), float(v)


@dataclass(frozen=True)
class OrbitSample:
    n: int
    branch: str
    x: tuple
    a: tuple


def _random_start(dim: int, seed: int) -> NatExtState:
    rng = seeded_rng(seed, stream=0)
    x = tuple(rng.dirichlet([1.0] * dim))
    a = tuple(rng.dirichlet([1.0] * dim))
    return natext_state(x, a)


def orbit_cloud(spec: AlgorithmSpec, start: NatExtState | None = None,
                n: int = 1000, seed: int = 0):
    """Renormalized float natural-extension orbit as OrbitSample values.

    Yields samples 0..n (n = 0 gives the start point only), each tagged
    with the branch applied at that point.  A partition boundary hit
    truncates the stream.
    """
    if start is None:
        start = _random_start(spec.dim, seed)
    x = tuple(float(c) for c in start.x)
    a = tuple(float(c) for c in start.a)
    sx, sa = sum(x), sum(a)
    x = tuple(c / sx for c in x)
    a = tuple(c / sa for c in a)
    step = make_float_stepper(spec)
    labels = [b.label for b in spec.branches]
    for k in range(n + 1):
        try:
            i, x_next, a_next = step(x, a)
        except (BoundaryError, DomainError):
            return
        na = sum(a)
        yield OrbitSample(k, labels[i], x, tuple(c / na for c in a))
        x, a = x_next, a_next


class RasterGrid:
    """Fixed-resolution accumulation buffer over a plane window.

    Tracks per pixel the total hit count and the last-writing branch,
    split into a priority class and a background class so that a
    draw-order policy ("these branches are drawn last") is independent
    of streaming order.
    """

    def __init__(self, window, resolution, branch_labels,
                 priority_labels=(), draw_order: str | None = None):
        x0, x1, y0, y1 = (float(w) for w in window)
        if not (x1 > x0 and y1 > y0):
            raise DomainError("window must be a nonempty rectangle")
        w, h = (resolution, resolution) if isinstance(resolution, int) else resolution
        if w < 1 or h < 1:
            raise DomainError("resolution must be at least 1x1")
        self.window = (x0, x1, y0, y1)
        self.width, self.height = int(w), int(h)
        self.branch_labels = tuple(branch_labels)
        self.priority = tuple(lbl in set(priority_labels) for lbl in self.branch_labels)
        self.draw_order = draw_order
        n = self.width * self.height
        self.counts = [0] * n
        self.last_hi = [-1] * n   # last branch of the priority class
        self.last_lo = [-1] * n   # last branch of the background class

    def pixel_index(self, u: float, v: float):
        x0, x1, y0, y1 = self.window
        if not (x0 <= u < x1 and y0 <= v < y1):
            return None
        col = int((u - x0) / (x1 - x0) * self.width)
        row = int((v - y0) / (y1 - y0) * self.height)
        return row * self.width + col

    def add(self, u: float, v: float, branch_index: int):
        k = self.pixel_index(u, v)
        if k is None:
            return False
        self.counts[k] += 1
        if self.priority[branch_index]:
            self.last_hi[k] = branch_index
        else:
            self.last_lo[k] = branch_index
        return True

    # --- derived arrays -------------------------------------------------

    def counts_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64).reshape(self.height, self.width)

    def color_index_array(self) -> np.ndarray:
        """Final branch index per pixel (-1 empty), honoring draw order."""
        hi = np.asarray(self.last_hi, dtype=np.int32).reshape(self.height, self.width)
        lo = np.asarray(self.last_lo, dtype=np.int32).reshape(self.height, self.width)
        return np.where(hi >= 0, hi, lo)

    def occupancy_array(self) -> np.ndarray:
        return self.counts_array() > 0

    def occupancy(self) -> float:
        return float(self.occupancy_array().mean())

    def rgb(self, palette=PALETTE) -> np.ndarray:
        idx = self.color_index_array()
        table = np.array([palette[i % len(palette)]
                          for i in range(len(self.branch_labels))], dtype=np.uint8)
        img = np.empty((self.height, self.width, 3), dtype=np.uint8)
        img[:] = np.array(BACKGROUND, dtype=np.uint8)
        mask = idx >= 0
        img[mask] = table[idx[mask]]
        return img[::-1]  # row 0 at the top of the image

    def ppm_bytes(self, palette=PALETTE) -> bytes:
        img = self.rgb(palette)
        header = f"P6\n{self.width} {self.height}\n255\n".encode()
        return header + img.tobytes()

    def write_ppm(self, path, palette=PALETTE):
        data = self.ppm_bytes(palette)
        with open(path, "wb") as fh:
            fh.write(data)
        return data


def _priority_labels(spec: AlgorithmSpec, draw_order: str | None):
    if draw_order is None:
        return ()
    if draw_order == "poincare-last":
        return tuple(b.label for b in spec.branches if b.label.startswith("P"))
    if draw_order == "ar-last":
        return tuple(b.label for b in spec.branches if b.label.startswith("AR"))
    raise DomainError(f"unknown draw order {draw_order!r}")


PANEL_WINDOW = (-1.05, 1.05, -1.05, 1.05)


def render_panels(spec: AlgorithmSpec, samples, resolution: int = 512,
                  window=PANEL_WINDOW, draw_order: str | None = None):
    """Four rasters of an orbit: x_n, a_n, x_{n+1}, a_{n+1}, all colored
    by the branch applied at step n."""
    if spec.dim != 3:
        raise UnsupportedError("panels are drawn for 3-d algorithms")
    labels = [b.label for b in spec.branches]
    index = {lbl: i for i, lbl in enumerate(labels)}
    priority = _priority_labels(spec, draw_order)
    grids = {key: RasterGrid(window, resolution, labels, priority, draw_order)
             for key in ("x", "a", "x_next", "a_next")}
    prev = None
    for sample in samples:
        i = index[sample.branch]
        grids["x"].add(*simplex_embed(sample.x), i)
        grids["a"].add(*simplex_embed(sample.a), i)
        if prev is not None:
            j = index[prev.branch]
            grids["x_next"].add(*simplex_embed(sample.x), j)
            grids["a_next"].add(*simplex_embed(sample.a), j)
        prev = sample
    return grids


def render_fractal(spec: AlgorithmSpec, n: int,
                   window=(-0.6, 0.6, -0.6, 0.6), resolution: int = 1024,
                   draw_order: str | None = "poincare-last", seed: int = 1,
                   start: NatExtState | None = None,
                   projection: str = "embed",
                   restart_on_boundary: bool = False) -> RasterGrid:
    """Raster of the dual orbit cloud a_n over a plane window.

    ``projection`` is "embed" (equilateral embedding of the normalized
    dual vector, the default) or "beta" (difference coordinates
    (a1 - a3, a2 - a3) of the normalized dual vector).  Output bytes are
    a pure function of the arguments; an orbit hitting a partition
    boundary truncates the run unless ``restart_on_boundary`` is set.
    """
    if spec.dim != 3:
        raise UnsupportedError("fractal rasters are drawn for 3-d algorithms")
    if projection not in ("embed", "beta"):
        raise DomainError(f"unknown projection {projection!r}")
    labels = [b.label for b in spec.branches]
    grid = RasterGrid(window, resolution, labels,
                      _priority_labels(spec, draw_order), draw_order)
    if start is None:
        start = _random_start(3, seed)
    x = tuple(float(c) for c in start.x)
    a = tuple(float(c) for c in start.a)
    sx, sa = sum(x), sum(a)
    x = tuple(c / sx for c in x)
    a = tuple(c / sa for c in a)
    step = make_float_stepper(spec)
    embed = projection == "embed"

    x0, x1, y0, y1 = grid.window
    su = grid.width / (x1 - x0)
    sv = grid.height / (y1 - y0)
    width, height = grid.width, grid.height
    counts, last_hi, last_lo = grid.counts, grid.last_hi, grid.last_lo
    priority = grid.priority
    restarts = 0
    done = 0
    while done < n:
        try:
            i, x, a = step(x, a)
        except (BoundaryError, DomainError):
            if not restart_on_boundary:
                break
            restarts += 1
            st = _random_start(3, seed + restarts)
            x = tuple(float(c) for c in st.x)
            a = tuple(float(c) for c in st.a)
            continue
        done += 1
        a0, a1_, a2 = a
        s = a0 + a1_ + a2
        p0, p1, p2 = a0 / s, a1_ / s, a2 / s
        if embed:
            u = (p2 - p1) * SQRT3_2
            v = p0 - (p1 + p2) * 0.5
        else:
            u = p0 - p2
            v = p1 - p2
        if x0 <= u < x1 and y0 <= v < y1:
            k = int((v - y0) * sv) * width + int((u - x0) * su)
            counts[k] += 1
            if priority[i]:
                last_hi[k] = i
            else:
                last_lo[k] = i
    return grid


# ---------------------------------------------------------------------------
# symmetry probe

@dataclass(frozen=True)
class SymmetryReport:
    jaccard: float
    strict_jaccard: float
    tolerance: int
    occupancy: float
    color_agreement: float | None = None

    def to_text(self) -> str:
        lines = [f"occupancy: {self.occupancy!r}",
                 f"jaccard(120 degree rotation, tolerance={self.tolerance}px): "
                 f"{self.jaccard!r}",
                 f"strict pixel jaccard: {self.strict_jaccard!r}"]
        if self.color_agreement is not None:
            lines.append(f"color agreement under the coordinate 3-cycle: "
                         f"{self.color_agreement!r}")
        return "\n".join(lines) + "\n"


def _rotated_pullback_indices(grid_shape, window, angle):
    """For every pixel center, the flat index of the pixel its rotation
    by ``-angle`` around the origin falls into, or -1 outside."""
    h, w = grid_shape
    x0, x1, y0, y1 = window
    us = x0 + (np.arange(w) + 0.5) * (x1 - x0) / w
    vs = y0 + (np.arange(h) + 0.5) * (y1 - y0) / h
    uu, vv = np.meshgrid(us, vs)
    c, s = math.cos(angle), math.sin(angle)
    ru = c * uu + s * vv
    rv = -s * uu + c * vv
    col = np.floor((ru - x0) / (x1 - x0) * w).astype(np.int64)
    row = np.floor((rv - y0) / (y1 - y0) * h).astype(np.int64)
    inside = (col >= 0) & (col < w) & (row >= 0) & (row < h)
    flat = np.where(inside, row * w + col, -1)
    return flat, inside


def coordinate_cycle_permutation(spec: AlgorithmSpec):
    """Branch index permutation induced by cycling the simplex
    coordinates (p1, p2, p3) -> (p3, p1, p2), which realizes the 120
    degree rotation of the embedding."""
    perm = []
    for b in spec.branches:
        if b.cone.rays is not None:
            probe = tuple(sum(r[i] for r in b.cone.rays) for i in range(3))
        else:
            raise UnsupportedError(f"branch {b.label} has no rays to probe")
        cycled = (probe[2], probe[0], probe[1])
        perm.append(spec.branch_index(classify(spec, cycled).label))
    return tuple(perm)


def symmetry_probe(grid: RasterGrid, spec: AlgorithmSpec | None = None,
                   tolerance: int = 1) -> SymmetryReport:
    """Similarity of the occupied pixel set with its rotation by 120
    degrees about the origin.

    The rotated set is built by pulling back pixel centers through the
    inverse rotation; a raster exactly invariant under that discrete
    rotation map scores exactly 1.

    ``strict_jaccard`` is the plain Jaccard index of the two pixel sets.
    For rasters built from finitely many orbit points it measures
    per-pixel sampling flicker as much as symmetry (two renders of the
    same set from different seeds already disagree), and the
    nearest-neighbor rotation aliases by up to one pixel.  The headline
    score therefore counts pixels whose rotated counterpart lies within
    ``tolerance`` pixels, symmetrized over both directions; with
    ``tolerance=0`` it coincides with the strict Jaccard index.
    With ``spec`` given, also reports how often the last-writer branch
    matches under the coordinate 3-cycle.
    """
    if grid.width != grid.height:
        raise UnsupportedError("the symmetry probe needs a square raster")
    x0, x1, y0, y1 = grid.window
    if abs((x0 + x1)) > 1e-12 or abs((y0 + y1)) > 1e-12:
        raise UnsupportedError("the symmetry probe needs a window centered at 0")
    occ = grid.occupancy_array()
    flat, inside = _rotated_pullback_indices(occ.shape, grid.window,
                                             2.0 * math.pi / 3.0)
    occ_flat = occ.reshape(-1)
    rotated = np.zeros_like(occ)
    rotated[inside] = occ_flat[flat[inside]]
    inter = int(np.logical_and(occ, rotated).sum())
    union = int(np.logical_or(occ, rotated).sum())
    strict = 1.0 if union == 0 else inter / union
    if tolerance == 0:
        score = strict
    else:
        from scipy import ndimage
        structure = np.ones((3, 3), dtype=bool)
        occ_d = ndimage.binary_dilation(occ, structure, iterations=tolerance)
        rot_d = ndimage.binary_dilation(rotated, structure, iterations=tolerance)
        total = int(occ.sum()) + int(rotated.sum())
        if total == 0:
            score = 1.0
        else:
            score = (int(np.logical_and(occ, rot_d).sum())
                     + int(np.logical_and(rotated, occ_d).sum())) / total

    color_agreement = None
    if spec is not None and inter:
        perm = np.asarray(coordinate_cycle_permutation(spec), dtype=np.int32)
        colors = grid.color_index_array()
        col_flat = colors.reshape(-1)
        pulled = np.full_like(colors, -1)
        pulled[inside] = col_flat[flat[inside]]
        both = np.logical_and(occ, rotated) & (pulled >= 0) & (colors >= 0)
        match = perm[pulled[both]] == colors[both]
        color_agreement = float(match.mean()) if match.size else None
    return SymmetryReport(float(score), float(strict), int(tolerance),
                          float(occ.mean()), color_agreement)


def read_ppm(path) -> tuple:
    """Read a binary P6 file back into (rgb array, width, height)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P6"):
        raise DomainError("not a binary P6 file")
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1
    w, h, maxval = fields
    if maxval != 255:
        raise DomainError("only 8-bit P6 files are supported")
    img = np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=pos)
    return img.reshape(h, w, 3), w, h


def occupancy_grid_from_rgb(img: np.ndarray, window) -> RasterGrid:
    """Rebuild a minimal RasterGrid (occupancy only) from an image whose
    background pixels are white."""
    h, w, _ = img.shape
    grid = RasterGrid(window, (w, h), ("0",))
    occupied = np.any(img != 255, axis=2)[::-1]  # back to row 0 = bottom
    grid.counts = [int(v) for v in occupied.reshape(-1)]
    return grid

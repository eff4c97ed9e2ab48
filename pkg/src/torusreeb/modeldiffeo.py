"""Model diffeomorphisms of the grid torus.

GridDiffeo stores a raw per-node displacement field (dx, dy); the map sends
p to p + d(p) mod 1, with the displacement interpolated bilinearly after
snapping cell corners to the integer branch nearest the base corner ("local
unwrapping") so that full twists, whose displacement winds once around the
meridian, remain smooth as maps.

On a flat-collar fixture (y-independent in strips around n vertical collar
circles) the meridian flow preserves the function on the strips, which makes
the model twists tau_i and slides s_i exactly function-preserving.  The
twist-coordinate map q reads, for each cylinder between consecutive collar
circles, the relative meridian winding of a diffeomorphism fixed near the
circles; slides realize q(s_i) = e_{i-1} - e_i and the nonzero q(s_i) are a
basis of the zero-sum lattice.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    NonBijective,
    NotDiffeo,
    NotFixedOnCurves,
    NotInDelta,
    TopologyError,
    UnsupportedField,
)
from .field import GridField

__all__ = [
    "bump_alpha",
    "bump_beta",
    "GridDiffeo",
    "Isotopy",
    "FlatCollarField",
    "make_flat_collar_fixture",
    "special_twist",
    "special_slide",
    "cylinder_twist",
    "lam_rotation",
    "flow_shift",
    "rotation_isotopy",
    "homology_action",
    "twist_coordinates",
    "decompose_in_slides",
    "f_invariance_error",
    "save_diffeo_file",
    "load_diffeo_file",
]


def _wrap_half(v):
    """Reduce to the representative in [-1/2, 1/2)."""
    return (np.asarray(v) + 0.5) % 1.0 - 0.5


# ---------------------------------------------------------------------------
# Smooth bumps
# ---------------------------------------------------------------------------

def _rho(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    with np.errstate(divide="ignore", over="ignore"):
        out[pos] = np.exp(-1.0 / u[pos])
    return out


def smoothstep(u):
    """C-infinity step: exactly 0 for u <= 0, exactly 1 for u >= 1."""
    u = np.asarray(u, dtype=float)
    a = _rho(u)
    b = _rho(1.0 - u)
    return a / (a + b)


def _check_bump_domain(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise DomainError("bump argument outside [-1, 1]")
    return t


def bump_alpha(t):
    """Monotone ramp: 0 on [-1, -1/2], 1 on [1/2, 1], smooth in between."""
    t = _check_bump_domain(t)
    return smoothstep(t + 0.5)


def bump_beta(t):
    """Plateau bump: 0 on [-1, -2/3] and [2/3, 1], 1 on [-1/3, 1/3]."""
    t = _check_bump_domain(t)
    return smoothstep(3.0 * t + 2.0) * smoothstep(2.0 - 3.0 * t)


# ---------------------------------------------------------------------------
# Grid diffeomorphisms
# ---------------------------------------------------------------------------

class GridDiffeo:
    """A self-map of the grid torus given by per-node displacements."""

    def __init__(self, dx: np.ndarray, dy: np.ndarray):
        dx = np.asarray(dx, dtype=float)
        dy = np.asarray(dy, dtype=float)
        if dx.shape != dy.shape or dx.ndim != 2 or dx.shape[0] != dx.shape[1]:
            raise ValueError("displacement fields must be square and congruent")
        self.n = dx.shape[0]
        self.dx = dx
        self.dy = dy

    @classmethod
    def identity(cls, n: int) -> "GridDiffeo":
        z = np.zeros((n, n))
        return cls(z, z.copy())

    # -- displacement interpolation with local branch unwrapping -------------

    def _interp_disp(self, x, y):
        n = self.n
        fx = np.asarray(x, dtype=float) * n
        fy = np.asarray(y, dtype=float) * n
        i = np.floor(fx).astype(np.int64)
        j = np.floor(fy).astype(np.int64)
        u = fx - i
        v = fy - j
        i %= n
        j %= n
        i1 = (i + 1) % n
        j1 = (j + 1) % n
        out = []
        for arr in (self.dx, self.dy):
            a00 = arr[i, j]
            a10 = a00 + _wrap_half(arr[i1, j] - a00)
            a01 = a00 + _wrap_half(arr[i, j1] - a00)
            a11 = a00 + _wrap_half(arr[i1, j1] - a00)
            out.append(a00 * (1 - u) * (1 - v) + a10 * u * (1 - v)
                       + a01 * (1 - u) * v + a11 * u * v)
        return out[0], out[1]

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map an (M, 2) array of torus points; result wrapped into [0,1)."""
        pts = np.asarray(points, dtype=float)
        dx, dy = self._interp_disp(pts[..., 0], pts[..., 1])
        out = np.empty_like(pts)
        out[..., 0] = (pts[..., 0] + dx) % 1.0
        out[..., 1] = (pts[..., 1] + dy) % 1.0
        return out

    def node_points(self) -> np.ndarray:
        c = np.arange(self.n) / self.n
        xs, ys = np.meshgrid(c, c, indexing="ij")
        return np.stack([xs, ys], axis=-1)

    def compose(self, other: "GridDiffeo") -> "GridDiffeo":
        """self after other: (self . other)(p) = self(other(p))."""
        if self.n != other.n:
            raise ValueError("resolution mismatch")
        nodes = other.node_points()
        target_x = (nodes[..., 0] + other.dx) % 1.0
        target_y = (nodes[..., 1] + other.dy) % 1.0
        sx, sy = self._interp_disp(target_x, target_y)
        return GridDiffeo(other.dx + sx, other.dy + sy)

    # -- verification ----------------------------------------------------------

    def _grad(self, arr: np.ndarray, axis: int) -> np.ndarray:
        fwd = _wrap_half(np.roll(arr, -1, axis=axis) - arr)
        bwd = _wrap_half(arr - np.roll(arr, 1, axis=axis))
        return (fwd + bwd) / 2.0 * self.n

    def jacobian_det_nodes(self) -> np.ndarray:
        a = 1.0 + self._grad(self.dx, 0)
        b = self._grad(self.dx, 1)
        c = self._grad(self.dy, 0)
        d = 1.0 + self._grad(self.dy, 1)
        return a * d - b * c

    def jacobian_min(self) -> float:
        return float(self.jacobian_det_nodes().min())

    def is_bijective(self) -> bool:
        return self.jacobian_min() > 0.0

    def max_displacement_mod1(self) -> float:
        return float(max(np.abs(_wrap_half(self.dx)).max(),
                         np.abs(_wrap_half(self.dy)).max()))

    def distance_to(self, other: "GridDiffeo") -> float:
        """Max torus distance between node images of the two maps."""
        ddx = _wrap_half(self.dx - other.dx)
        ddy = _wrap_half(self.dy - other.dy)
        return float(np.maximum(np.abs(ddx), np.abs(ddy)).max())


# ---------------------------------------------------------------------------
# Isotopies
# ---------------------------------------------------------------------------

DEFAULT_FRAMES = 64


@dataclass
class Isotopy:
    """A time-indexed family of grid diffeomorphisms, frames[0] = identity.

    Consecutive frames must move every node less than half a period so point
    trajectories unwrap uniquely.
    """

    frames: list

    def __post_init__(self):
        if not self.frames:
            raise ValueError("isotopy needs at least one frame")
        ident = GridDiffeo.identity(self.frames[0].n)
        if self.frames[0].distance_to(ident) > 1e-9:
            raise ValueError("isotopy must start at the identity")
        for a, b in zip(self.frames, self.frames[1:]):
            step = max(np.abs(_wrap_half(b.dx - a.dx)).max(),
                       np.abs(_wrap_half(b.dy - a.dy)).max())
            if step >= 0.5:
                raise ValueError("consecutive isotopy frames jump half a period")

    @property
    def n(self) -> int:
        return self.frames[0].n

    @property
    def terminal(self) -> GridDiffeo:
        return self.frames[-1]

    def concat(self, other: "Isotopy") -> "Isotopy":
        """Path product: run self, then terminal(self) . other_t frame by
        frame, so the family stays continuous through the junction."""
        h1 = self.terminal
        tail = [h1.compose(fr) for fr in other.frames[1:]]
        return Isotopy(self.frames + tail)


def rotation_isotopy(n: int, axis: str, amount: float = 1.0,
                     frames: int = DEFAULT_FRAMES) -> Isotopy:
    """The rigid rotation family t -> shift by t*amount along 'L' (x) or 'M' (y)."""
    if axis not in ("L", "M"):
        raise ValueError("axis must be 'L' or 'M'")
    out = []
    zeros = np.zeros((n, n))
    for k in range(frames + 1):
        shift = np.full((n, n), amount * k / frames)
        out.append(GridDiffeo(shift, zeros) if axis == "L" else GridDiffeo(zeros, shift))
    return Isotopy(out)


def flow_shift(field_flow: str, alpha, n: int,
               frames: int = DEFAULT_FRAMES) -> Isotopy:
    """Shift along the 'L' or 'M' coordinate flow by a per-point amount.

    ``alpha`` is a callable alpha(x, y) (vectorized) or an (n, n) node array.
    Emits the full straight-line isotopy t*alpha with a positive-Jacobian
    check per frame; NotDiffeo signals a profile too steep for the grid.
    """
    if field_flow not in ("L", "M"):
        raise ValueError("flow must be 'L' or 'M'")
    if callable(alpha):
        c = np.arange(n) / n
        xs, ys = np.meshgrid(c, c, indexing="ij")
        a = np.asarray(alpha(xs, ys), dtype=float)
        a = np.broadcast_to(a, (n, n)).copy()
    else:
        a = np.asarray(alpha, dtype=float)
        if a.shape != (n, n):
            raise ValueError(f"alpha array must be ({n}, {n})")
    zeros = np.zeros((n, n))
    out = []
    for k in range(frames + 1):
        d = a * (k / frames)
        g = GridDiffeo(d, zeros.copy()) if field_flow == "L" else GridDiffeo(zeros.copy(), d)
        if g.jacobian_min() <= 0.0:
            raise NotDiffeo(
                f"frame {k}/{frames} of the flow shift has nonpositive Jacobian"
            )
        out.append(g)
    return Isotopy(out)


# ---------------------------------------------------------------------------
# Flat-collar fixtures
# ---------------------------------------------------------------------------

AMPLITUDE = 0.04
FLAT_HALF_WIDTH_FACTOR = 1.4   # collar flat zone: |x - x_i| <= 1.4*eps
OUTER_PLATEAU = 0.235          # modulation reaches 1 by 0.235/n (criticals at 0.25/n)


class FlatCollarField:
    """cos(2*pi*n*x) + a*B(x)*cos(2*pi*y) with B vanishing flat on collars.

    Collar circles sit at x_i = (i + 1/4)/n, where the first term has full
    slope; B is 1/n-periodic, exactly zero for |x - x_i| <= 1.4*eps and
    exactly one from 0.235/n outward, so the field is y-independent on the
    collar strips and invariant under x -> x + 1/n.
    """

    def __init__(self, n: int, eps: float):
        if n < 1:
            raise ValueError("n must be >= 1")
        if not 0 < eps < 1 / (8 * n):
            raise ValueError(f"eps must lie in (0, 1/{8 * n})")
        self.n = n
        self.eps = eps
        self.amp = AMPLITUDE
        self.r0 = FLAT_HALF_WIDTH_FACTOR * eps
        self.r1 = OUTER_PLATEAU / n
        if self.r0 >= self.r1:
            raise ValueError("collar flat zone must end before the outer plateau")
        self.centers = [(i + 0.25) / n for i in range(n)]
        self._morse_margin_check()

    def modulation(self, x):
        x = np.asarray(x, dtype=float)
        d = (x - self.centers[0]) % (1.0 / self.n)
        dd = np.minimum(d, 1.0 / self.n - d)
        return smoothstep((dd - self.r0) / (self.r1 - self.r0))

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (np.cos(2 * np.pi * self.n * x)
                + self.amp * self.modulation(x) * np.cos(2 * np.pi * y))

    def _morse_margin_check(self):
        # the rows y = 0, 1/2 must carry exactly 2n critical circles each:
        # sign changes of phi' +/- a*B' only at x = k/(2n)
        m = 8192
        xs = (np.arange(m) + 0.5) / m  # off the symmetry points
        b = self.modulation(xs)
        bprime = (np.roll(b, -1) - np.roll(b, 1)) * m / 2.0
        phiprime = -2 * np.pi * self.n * np.sin(2 * np.pi * self.n * xs)
        for sign in (+1.0, -1.0):
            g = phiprime + sign * self.amp * bprime
            s = np.sign(g)
            s = s[s != 0]
            changes = int(np.sum(s != np.roll(s, -1)))  # circular, wrap included
            if changes != 2 * self.n:
                raise ValueError(
                    "flat-collar construction lost Morse-ness: "
                    f"{changes} gradient sign changes, expected {2 * self.n}"
                )


def make_flat_collar_fixture(n: int, eps: float) -> FlatCollarField:
    """A Morse field with one Reeb cycle, cyclic index n, and n collar strips
    on which the field is y-independent (so meridian shifts preserve it)."""
    return FlatCollarField(n, eps)


def _collar_geometry(field: GridField) -> FlatCollarField:
    src = field.source
    if not isinstance(src, FlatCollarField):
        raise UnsupportedField(
            "this operation needs a grid sampled from a flat-collar fixture"
        )
    return src


def _check_collar_flat(field: GridField, center: float, half_width: float):
    """The sampled columns in the strip must be exactly y-independent."""
    n = field.n
    xs = np.arange(n) / n
    in_strip = np.abs(_wrap_half(xs - center)) <= half_width
    cols = field.values[in_strip, :]
    if cols.size == 0:
        raise UnsupportedField("collar strip contains no grid columns")
    variation = np.abs(cols - cols[:, :1]).max()
    if variation > 1e-9 * field.vrange:
        raise UnsupportedField(
            f"field is not y-independent on the collar strip (variation {variation:.2e})"
        )


def _strip_profile(field: GridField, center: float, eps: float, bump) -> np.ndarray:
    n = field.n
    xs = np.arange(n) / n
    s = _wrap_half(xs - center) / (2.0 * eps)
    prof = np.zeros(n)
    inside = np.abs(s) <= 1.0
    prof[inside] = bump(s[inside])
    # the branch-snapping interpolation needs the profile resolved: adjacent
    # nodes must not jump by a half period or more (modulo the full twist)
    step = np.abs(_wrap_half(np.diff(np.append(prof, prof[0])))).max()
    if step >= 0.45:
        raise NotDiffeo(
            f"displacement profile jumps {step:.2f} between adjacent nodes; "
            "grid too coarse for this eps"
        )
    return prof


def special_twist(i: int, fixture_field: GridField) -> GridDiffeo:
    """Full Dehn twist along the i-th collar circle: meridian displacement
    ramping 0 -> 1 across the collar strip."""
    geo = _collar_geometry(fixture_field)
    center = geo.centers[i % geo.n]
    _check_collar_flat(fixture_field, center, 4.0 * geo.eps / 3.0)
    prof = _strip_profile(fixture_field, center, geo.eps, bump_alpha)
    n = fixture_field.n
    dy = np.tile(prof[:, None], (1, n))
    return GridDiffeo(np.zeros((n, n)), dy)


def special_slide(i: int, fixture_field: GridField) -> GridDiffeo:
    """Slide along the i-th collar circle: identity on the circle itself
    (full-period displacement there) and near the strip edges."""
    geo = _collar_geometry(fixture_field)
    center = geo.centers[i % geo.n]
    _check_collar_flat(fixture_field, center, 4.0 * geo.eps / 3.0)
    prof = _strip_profile(fixture_field, center, geo.eps, bump_beta)
    n = fixture_field.n
    dy = np.tile(prof[:, None], (1, n))
    return GridDiffeo(np.zeros((n, n)), dy)


def cylinder_twist(i: int, fixture_field: GridField) -> GridDiffeo:
    """Dehn twist supported in the open cylinder between collar circles i and
    i+1 (reference twist for the twist-coordinate lattice)."""
    geo = _collar_geometry(fixture_field)
    n = fixture_field.n
    x_l = geo.centers[i % geo.n]
    width = 1.0 / geo.n
    xs = np.arange(n) / n
    s = ((xs - x_l) % 1.0) / width  # position across the cylinder in [0, 1)
    prof = smoothstep((s - 0.3) / 0.4)
    dy = np.tile(prof[:, None], (1, n))
    return GridDiffeo(np.zeros((n, n)), dy)


def lam_rotation(fixture_field: GridField) -> GridDiffeo:
    """lambda = rotation by 1/n along the parallels; permutes the collars."""
    geo = _collar_geometry(fixture_field)
    n = fixture_field.n
    return GridDiffeo(np.full((n, n), 1.0 / geo.n), np.zeros((n, n)))


# ---------------------------------------------------------------------------
# Homology action and twist coordinates
# ---------------------------------------------------------------------------

def _loop_winding(h: GridDiffeo, pts: np.ndarray) -> tuple[int, int]:
    img = h.apply(pts)
    closed = np.vstack([img, img[:1]])
    inc = _wrap_half(np.diff(closed, axis=0))
    total = inc.sum(axis=0)
    p, q = round(float(total[0])), round(float(total[1]))
    if max(abs(total[0] - p), abs(total[1] - q)) > 0.05:
        raise NonBijective("image loop winding is not an integer vector")
    return p, q


def homology_action(h: GridDiffeo) -> np.ndarray:
    """2x2 integer matrix of the action on H_1: columns are the winding
    vectors of the images of the x- and y-generator loops."""
    if not h.is_bijective():
        raise NonBijective("map has nonpositive Jacobian at a node")
    m = 4 * h.n
    ts = np.arange(m) / m
    x_loop = np.stack([ts, np.full(m, 0.1234)], axis=-1)
    y_loop = np.stack([np.full(m, 0.3617), ts], axis=-1)
    c1 = _loop_winding(h, x_loop)
    c2 = _loop_winding(h, y_loop)
    mat = np.array([[c1[0], c2[0]], [c1[1], c2[1]]], dtype=int)
    if abs(int(round(np.linalg.det(mat)))) != 1:
        raise NonBijective(f"homology action {mat.tolist()} is not unimodular")
    return mat


FIXED_TOL = 1e-6


def _unwrapped_change(h: GridDiffeo, x_from: float, x_to: float, y0: float) -> float:
    """Accumulated meridian-displacement change along the x-path between two
    collar centers (x_to reached moving in +x, wrapping if needed)."""
    span = (x_to - x_from) % 1.0
    if span == 0.0:
        span = 1.0
    steps = max(int(np.ceil(span * 4 * h.n)), 8)
    xs = (x_from + span * np.arange(steps + 1) / steps) % 1.0
    ys = np.full_like(xs, y0)
    _, dy = h._interp_disp(xs, ys)
    return float(_wrap_half(np.diff(dy)).sum())


def twist_coordinates(h: GridDiffeo, fixture_field: GridField,
                      n: int | None = None) -> tuple[int, ...]:
    """Integer twist vector (a_0, ..., a_{n-1}): a_i is the relative meridian
    winding of h across the cylinder between collar circles i and i+1.

    Requires h to be fixed near every collar circle and isotopic to the
    identity (trivial homology action)."""
    geo = _collar_geometry(fixture_field)
    if n is not None and n != geo.n:
        raise ValueError(f"fixture has {geo.n} collars, asked for {n}")
    n = geo.n
    m = 2 * fixture_field.n
    ts = np.arange(m) / m
    for c in geo.centers:
        pts = np.stack([np.full(m, c), ts], axis=-1)
        img = h.apply(pts)
        dev = np.abs(_wrap_half(img - pts)).max()
        if dev > FIXED_TOL:
            raise NotFixedOnCurves(
                f"map moves collar circle at x = {c:.4f} by {dev:.2e}"
            )
    if not np.array_equal(homology_action(h), np.eye(2, dtype=int)):
        raise TopologyError("map is not isotopic to the identity")
    y0 = 0.1234
    out = []
    for i in range(n):
        x_from = geo.centers[i]
        x_to = geo.centers[(i + 1) % n]
        total = _unwrapped_change(h, x_from, x_to, y0)
        a = round(total)
        if abs(total - a) > 0.05:
            raise TopologyError(f"non-integer winding {total} across cylinder {i}")
        out.append(a)
    return tuple(out)


def decompose_in_slides(a) -> tuple[int, ...]:
    """Unique (b_1, ..., b_{n-1}) with sum_i b_i q(s_i) = a for a in the
    zero-sum lattice; forward substitution over the triangular slide basis."""
    a = [int(v) for v in a]
    if sum(a) != 0:
        raise NotInDelta(f"twist vector {a} does not sum to zero")
    out = []
    acc = 0
    for v in a[:-1]:
        acc += v
        out.append(acc)
    return tuple(out)


# ---------------------------------------------------------------------------
# Function invariance
# ---------------------------------------------------------------------------

def f_invariance_error(field: GridField, h: GridDiffeo) -> float:
    """max over grid nodes of |f(h(p)) - f(p)|, through the source expression
    when the field has one (interpolation noise would mask exact
    invariances)."""
    nodes = h.node_points().reshape(-1, 2)
    img = h.apply(nodes)
    vals = np.asarray(field.exact_at(img[:, 0], img[:, 1]))
    base = field.values.reshape(-1)
    return float(np.abs(vals - base).max())


# ---------------------------------------------------------------------------
# Diffeo file format: header '<II' (N, frames), then per frame dx and dy as
# little-endian float64 row-major (N, N) arrays
# ---------------------------------------------------------------------------

def save_diffeo_file(path, frames) -> None:
    if isinstance(frames, GridDiffeo):
        frames = [frames]
    elif isinstance(frames, Isotopy):
        frames = frames.frames
    n = frames[0].n
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", n, len(frames)))
        for g in frames:
            fh.write(g.dx.astype("<f8").tobytes(order="C"))
            fh.write(g.dy.astype("<f8").tobytes(order="C"))


def load_diffeo_file(path) -> list[GridDiffeo]:
    with open(path, "rb") as fh:
        n, count = struct.unpack("<II", fh.read(8))
        out = []
        for _ in range(count):
            dx = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n)
            dy = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n)
            out.append(GridDiffeo(dx.copy(), dy.copy()))
    return out

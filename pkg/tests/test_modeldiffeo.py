import numpy as np
import pytest

from torusreeb.errors import (
    DomainError,
    NotDiffeo,
    NotFixedOnCurves,
    NotInDelta,
    TopologyError,
    UnsupportedField,
)
from torusreeb.field import parse_field_expr, sample_grid
from torusreeb.modeldiffeo import (
    GridDiffeo,
    bump_alpha,
    bump_beta,
    cylinder_twist,
    decompose_in_slides,
    f_invariance_error,
    flow_shift,
    homology_action,
    lam_rotation,
    load_diffeo_file,
    make_flat_collar_fixture,
    save_diffeo_file,
    special_slide,
    special_twist,
    twist_coordinates,
)
from torusreeb.morse import find_critical_points
from torusreeb.reeb import build_reeb_graph, find_cycle
from torusreeb.decomp import decompose


def collar_field(n, res=256, eps=None):
    # default eps near the allowed maximum 1/(8n): widest strips, best resolved
    fx = make_flat_collar_fixture(n, eps if eps is not None else 0.9 / (8 * n))
    return sample_grid(fx, res)


# -- bumps -------------------------------------------------------------------

def test_alpha_plateaus():
    assert bump_alpha(-1.0) == 0.0
    assert bump_alpha(-0.5) == 0.0
    assert bump_alpha(0.5) == 1.0
    assert bump_alpha(1.0) == 1.0
    assert 0.0 < bump_alpha(0.0) < 1.0


def test_beta_plateaus():
    assert bump_beta(0.0) == 1.0
    assert bump_beta(1 / 3) == 1.0
    assert bump_beta(0.9) == 0.0
    assert bump_beta(-0.7) == 0.0
    assert 0.0 < bump_beta(0.5) < 1.0


def test_bump_monotone_ramp():
    ts = np.linspace(-0.5, 0.5, 101)
    vals = bump_alpha(ts)
    assert np.all(np.diff(vals) >= 0)


def test_bump_domain_error():
    with pytest.raises(DomainError):
        bump_alpha(1.5)
    with pytest.raises(DomainError):
        bump_beta(-2.0)


# -- fixtures -----------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_fixture_critical_count(n):
    pts = find_critical_points(collar_field(n))
    assert len(pts) == 4 * n


def test_fixture_collar_columns_flat():
    f = collar_field(2)
    fx = f.source
    for c in fx.centers:
        i = int(round(c * f.n)) % f.n
        col = f.values[i, :]
        assert np.abs(col - col[0]).max() == 0.0


def test_fixture_shift_invariance():
    f = collar_field(3)
    xs = np.linspace(0, 1, 977, endpoint=False)
    ys = np.linspace(0, 1, 977, endpoint=False)
    d = np.abs(f.source.evaluate(xs + 1 / 3, ys) - f.source.evaluate(xs, ys)).max()
    assert d <= 1e-12


def test_fixture_has_cycle_and_index():
    f = collar_field(2)
    g = build_reeb_graph(f)
    assert g.betti1 == 1
    w = decompose(f, g, find_cycle(g), 0.0)
    assert w.cyclic_index == 2


def test_fixture_eps_bounds():
    with pytest.raises(ValueError):
        make_flat_collar_fixture(2, 1 / 8)  # needs eps < 1/(8n)
    with pytest.raises(ValueError):
        make_flat_collar_fixture(0, 0.01)


# -- slides and twists ------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_slide_invariance(n):
    f = collar_field(n)
    for i in range(n):
        s = special_slide(i, f)
        assert f_invariance_error(f, s) <= 1e-9


def test_twist_invariance():
    f = collar_field(2)
    for i in range(2):
        assert f_invariance_error(f, special_twist(i, f)) <= 1e-9


def test_slide_fixed_on_circle_and_disjoint_supports():
    f = collar_field(3)
    fx = f.source
    n = f.n
    supports = []
    for i in range(3):
        s = special_slide(i, f)
        moved = np.abs((s.dy % 1.0 + 0.5) % 1.0 - 0.5) > 1e-12
        supports.append(set(np.nonzero(moved.any(axis=1))[0].tolist()))
        # identity on the collar circle itself
        ts = np.arange(64) / 64
        pts = np.stack([np.full(64, fx.centers[i]), ts], axis=-1)
        img = s.apply(pts)
        assert np.abs((img - pts + 0.5) % 1.0 - 0.5).max() <= 1e-12
    assert not (supports[0] & supports[1])
    assert not (supports[0] & supports[2])
    assert not (supports[1] & supports[2])


def test_unsupported_field_rejected():
    plain = sample_grid(parse_field_expr("cos(2*pi*x)+0.5*cos(2*pi*y)"), 128)
    with pytest.raises(UnsupportedField):
        special_slide(0, plain)


def test_lambda_rotation_properties():
    for n in (2, 3):
        f = collar_field(n)
        lam = lam_rotation(f)
        assert f_invariance_error(f, lam) <= 1e-9
        power = lam
        for _ in range(n - 1):
            power = power.compose(lam)
        assert power.max_displacement_mod1() <= 1e-12


# -- homology action ------------------------------------------------------------

def test_homology_of_lambda_is_identity():
    f = collar_field(3)
    assert np.array_equal(homology_action(lam_rotation(f)), np.eye(2, dtype=int))


def test_homology_of_twist_unipotent():
    f = collar_field(2)
    m = homology_action(special_twist(0, f))
    assert m[0, 0] == 1 and m[1, 1] == 1 and m[0, 1] == 0 and abs(m[1, 0]) == 1


def test_homology_functorial_on_composition():
    f = collar_field(2)
    a = special_twist(0, f)
    b = special_twist(1, f)
    ab = a.compose(b)
    assert np.array_equal(homology_action(ab),
                          homology_action(a) @ homology_action(b))


# -- twist coordinates ------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_slide_twist_coordinates(n):
    f = collar_field(n)
    for i in range(n):
        q = twist_coordinates(special_slide(i, f), f)
        expected = [0] * n
        expected[(i - 1) % n] += 1
        expected[i] -= 1
        assert list(q) == expected


def test_slide_product_telescopes():
    n = 3
    f = collar_field(n)
    prod = special_slide(0, f)
    for i in range(1, n):
        prod = prod.compose(special_slide(i, f))
    assert twist_coordinates(prod, f) == (0,) * n


def test_identity_twist_coordinates():
    f = collar_field(2)
    assert twist_coordinates(GridDiffeo.identity(f.n), f) == (0, 0)


def test_cylinder_twist_rejected_not_isotopic_to_id():
    # a single Dehn twist is fixed near the collars but acts nontrivially on
    # homology, so the twist-coordinate map must refuse it
    f = collar_field(3)
    t = cylinder_twist(1, f)
    m = homology_action(t)
    assert m[0, 0] == 1 and m[1, 1] == 1 and abs(m[1, 0]) == 1
    with pytest.raises(TopologyError):
        twist_coordinates(t, f)


def test_opposite_twist_pair_coordinates():
    # twist up in cylinder 1, down in cylinder 2: isotopic to id, q = e_1 - e_2
    f = collar_field(3)
    fx = f.source

    def alpha(x, y):
        out = np.zeros_like(x)
        for sign, i in ((1.0, 1), (-1.0, 2)):
            s = ((x - fx.centers[i]) % 1.0) * fx.n  # position across cylinder i
            out = out + sign * np.asarray(
                np.interp(s, [0.0, 0.3, 0.7, 1.0], [0.0, 0.0, 1.0, 1.0])
            )
        return out

    h = flow_shift("M", alpha, f.n, frames=8).terminal
    assert twist_coordinates(h, f) == (0, 1, -1)


def test_special_twist_not_fixed_on_curves():
    f = collar_field(2)
    with pytest.raises(NotFixedOnCurves):
        twist_coordinates(special_twist(0, f), f)


def test_decompose_in_slides():
    assert decompose_in_slides((0, 1, -1)) == (0, 1)
    assert decompose_in_slides((1, 0, 0, -1)) == (1, 1, 1)
    assert decompose_in_slides((0, 0)) == (0,)
    with pytest.raises(NotInDelta):
        decompose_in_slides((1, 0, 0))


def test_decompose_round_trip():
    rng = np.random.default_rng(42)
    n = 4
    for _ in range(300):
        b = rng.integers(-7, 8, size=n - 1)
        a = np.zeros(n, dtype=int)
        for i in range(1, n):
            a[i - 1] += b[i - 1]
            a[i] -= b[i - 1]
        assert decompose_in_slides(tuple(a)) == tuple(b)


# -- flow shifts ---------------------------------------------------------------

def test_constant_flow_shift_is_rigid_rotation():
    iso = flow_shift("L", lambda x, y: np.full_like(x, 0.25), 64, frames=8)
    h = iso.terminal
    pts = np.array([[0.1, 0.2], [0.7, 0.9]])
    img = h.apply(pts)
    assert np.allclose(img[:, 0], (pts[:, 0] + 0.25) % 1.0, atol=1e-12)
    assert np.allclose(img[:, 1], pts[:, 1], atol=1e-12)


def test_sigma_flow_equals_slide_product():
    n = 2
    f = collar_field(n)
    fx = f.source

    def sigma(x, y):
        out = np.zeros_like(x)
        for c in fx.centers:
            s = ((x - c + 0.5) % 1.0 - 0.5) / (2 * fx.eps)
            inside = np.abs(s) <= 1.0
            out = out + np.where(inside, bump_beta(np.clip(s, -1, 1)), 0.0)
        return out

    iso = flow_shift("M", sigma, f.n, frames=16)
    prod = special_slide(0, f).compose(special_slide(1, f))
    assert iso.terminal.distance_to(prod) <= 1e-9


def test_sigma_plus_one_same_map():
    n = 64
    a = flow_shift("M", lambda x, y: 0.3 * np.sin(2 * np.pi * x) ** 2, n, frames=4).terminal
    b = flow_shift("M", lambda x, y: 0.3 * np.sin(2 * np.pi * x) ** 2 + 1.0, n, frames=8).terminal
    assert a.distance_to(b) <= 1e-12


def test_too_steep_flow_rejected():
    # meridian shift whose amount varies in y folds the circle over itself
    with pytest.raises(NotDiffeo):
        flow_shift("M", lambda x, y: 2.0 * np.sin(2 * np.pi * y), 64, frames=4)


def test_flow_frames_positive_jacobian():
    f = collar_field(2)
    iso = flow_shift("M", lambda x, y: bump_beta(
        np.clip(((x - f.source.centers[0] + 0.5) % 1.0 - 0.5) / (2 * f.source.eps), -1, 1)
    ), f.n, frames=8)
    for fr in iso.frames:
        assert fr.jacobian_min() > 0


# -- file format -----------------------------------------------------------------

def test_diffeo_file_roundtrip(tmp_path):
    f = collar_field(2, res=64, eps=1 / 40)
    s = special_slide(0, f)
    path = tmp_path / "slide.bin"
    save_diffeo_file(path, s)
    frames = load_diffeo_file(path)
    assert len(frames) == 1
    assert frames[0].distance_to(s) == 0.0
    raw = path.read_bytes()
    assert len(raw) == 8 + 2 * 8 * 64 * 64

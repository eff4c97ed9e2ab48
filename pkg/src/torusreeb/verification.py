"""End-to-end verification suite over the flat-collar fixtures.

Builds the model diffeomorphisms on a fixture of the requested cyclic index
and checks every numerically testable property of the twist/slide lattice,
the two epimorphisms and the quotient covering.  Returns a list of named
pass/fail checks; the negative control deliberately shifts a slide's support
off the flat collar so its function invariance must fail.
"""

from __future__ import annotations

import numpy as np

from .covering import build_quotient
from .decomp import decompose, orbit_curves
from .epi import eval_isotopy, krot
from .errors import TorusReebError
from .field import GridField, sample_grid
from .intlinalg import det_int, smith_diagonal
from .modeldiffeo import (
    GridDiffeo,
    bump_beta,
    decompose_in_slides,
    f_invariance_error,
    flow_shift,
    homology_action,
    lam_rotation,
    make_flat_collar_fixture,
    rotation_isotopy,
    special_slide,
    special_twist,
    twist_coordinates,
)
from .morse import find_critical_points
from .reeb import build_reeb_graph, find_cycle

__all__ = ["run_verification"]

INVARIANCE_TOL = 1e-9
IDENTITY_TOL = 1e-12


class _Checks:
    def __init__(self):
        self.items: list[dict] = []

    def add(self, name: str, passed: bool, detail: str = ""):
        self.items.append({"name": name, "passed": bool(passed), "detail": detail})

    def run(self, name: str, fn):
        try:
            passed, detail = fn()
        except TorusReebError as exc:
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        self.add(name, passed, detail)


def _corrupted_slide(field: GridField) -> GridDiffeo:
    """A slide whose support is shifted off the flat collar; breaks f o h = f."""
    fx = field.source
    n = field.n
    xs = np.arange(n) / n
    center = (fx.centers[0] + 3.2 * fx.eps) % 1.0
    s = ((xs - center + 0.5) % 1.0 - 0.5) / (2.0 * fx.eps)
    prof = np.where(np.abs(s) <= 1.0, bump_beta(np.clip(s, -1.0, 1.0)), 0.0)
    return GridDiffeo(np.zeros((n, n)), np.tile(prof[:, None], (1, n)))


def run_verification(n: int, resolution: int = 256, eps: float | None = None,
                     seed: int = 0, frames: int = 16,
                     corrupt_slide: bool = False) -> dict:
    if eps is None:
        eps = 0.9 / (8 * n)
    fixture = make_flat_collar_fixture(n, eps)
    field = sample_grid(fixture, resolution)
    rng = np.random.default_rng(seed)
    checks = _Checks()

    # pipeline on the fixture
    crit = find_critical_points(field)
    graph = build_reeb_graph(field)
    cycle = find_cycle(graph)
    checks.add("fixture_critical_count", len(crit) == 4 * n,
               f"{len(crit)} critical points, expected {4 * n}")
    checks.add("fixture_betti1", graph.betti1 == 1, f"betti1 = {graph.betti1}")
    word = decompose(field, graph, cycle, 0.0)
    checks.add("fixture_cyclic_index", word.cyclic_index == n,
               f"cyclic index {word.cyclic_index}, expected {n}")
    curves = [word.curves[j] for j in orbit_curves(word, 0)]

    slides = [special_slide(i, field) for i in range(n)]
    twists = [special_twist(i, field) for i in range(n)]
    lam = lam_rotation(field)

    # function invariance of the models
    worst = 0.0
    for h in slides + twists + [lam]:
        worst = max(worst, f_invariance_error(field, h))
    checks.add("model_f_invariance", worst <= INVARIANCE_TOL,
               f"max |f o h - f| = {worst:.2e}")

    if corrupt_slide:
        bad = _corrupted_slide(field)
        err = f_invariance_error(field, bad)
        checks.add("corrupted_slide_f_invariance", err <= INVARIANCE_TOL,
                   f"max |f o h - f| = {err:.2e} (support shifted off the collar)")

    # lambda^n = id
    power = lam
    for _ in range(n - 1):
        power = power.compose(lam)
    disp = power.max_displacement_mod1()
    checks.add("lambda_power_identity", disp <= IDENTITY_TOL,
               f"max displacement of lambda^{n} = {disp:.2e}")

    # positive Jacobians
    jmin = min(h.jacobian_min() for h in slides + twists + [lam])
    checks.add("positive_jacobians", jmin > 0.0, f"min Jacobian det = {jmin:.4f}")

    # homology actions
    ok_l = np.array_equal(homology_action(lam), np.eye(2, dtype=int))
    checks.add("lambda_homology_trivial", ok_l, "")
    mt = homology_action(twists[0])
    checks.add("twist_homology_unipotent",
               mt[0, 0] == 1 and mt[1, 1] == 1 and mt[0, 1] == 0 and abs(mt[1, 0]) == 1,
               f"matrix {mt.tolist()}")
    a, b = twists[0], slides[0].compose(twists[0])
    checks.add("homology_functorial",
               np.array_equal(homology_action(a.compose(b)),
                              homology_action(a) @ homology_action(b)), "")

    # twist coordinates of slides
    def q_expected(i):
        v = [0] * n
        v[(i - 1) % n] += 1
        v[i] -= 1
        return tuple(v)

    qs = [twist_coordinates(s, field) for s in slides]
    checks.add("slide_twist_coordinates",
               all(qs[i] == q_expected(i) for i in range(n)),
               f"q(s_i) = {qs}")

    prod = slides[0]
    for s in slides[1:]:
        prod = prod.compose(s)
    checks.add("slide_product_telescopes",
               twist_coordinates(prod, field) == (0,) * n, "")
    checks.add("identity_twist_coordinates",
               twist_coordinates(GridDiffeo.identity(field.n), field) == (0,) * n, "")

    # slide basis of the zero-sum lattice
    if n == 1:
        checks.add("slide_basis", True, "pi0G trivial for n = 1; check vacuous")
    else:
        rows = []
        for i in range(1, n):
            rows.append([qs[i][j] for j in range(n - 1)])
        d = det_int(rows)
        diag = smith_diagonal(rows)
        checks.add("slide_basis", abs(d) == 1 and diag == [1] * (n - 1),
                   f"det = {d}, smith = {diag}")

    # twist-vector round trip
    trips = 0
    for _ in range(1000):
        bvec = rng.integers(-9, 10, size=max(n - 1, 0))
        avec = np.zeros(n, dtype=int)
        for i in range(1, n):
            avec[i - 1] += bvec[i - 1]
            avec[i] -= bvec[i - 1]
        if decompose_in_slides(tuple(avec)) == tuple(bvec):
            trips += 1
    checks.add("slide_decomposition_round_trip", trips == 1000, f"{trips}/1000")

    # epimorphisms
    gamma = rotation_isotopy(field.n, "L", amount=1.0 / n, frames=frames)
    full_l = rotation_isotopy(field.n, "L", amount=1.0, frames=max(frames, 4 * n))
    full_m = rotation_isotopy(field.n, "M", amount=1.0, frames=frames)
    def eval_check(iso, expected):
        got = eval_isotopy(iso, curves)
        return got == expected, f"eval = {got}, expected {expected}"

    checks.run("eval_L_equals_n", lambda: eval_check(full_l, n))
    checks.run("eval_M_equals_0", lambda: eval_check(full_m, 0))
    checks.run("eval_gamma_equals_1", lambda: eval_check(gamma, 1))
    checks.run("krot_gamma_terminal", lambda: (
        krot(gamma.terminal, curves) == 1 % n, ""))

    def slide_isotopy(i):
        fx = field.source
        xs = np.arange(field.n) / field.n
        s = ((xs - fx.centers[i] + 0.5) % 1.0 - 0.5) / (2.0 * fx.eps)
        prof = np.where(np.abs(s) <= 1.0, bump_beta(np.clip(s, -1.0, 1.0)), 0.0)
        return flow_shift("M", np.tile(prof[:, None], (1, field.n)), field.n,
                          frames=frames)

    checks.run("slide_isotopy_in_ker_eval", lambda: (
        eval_isotopy(slide_isotopy(0), curves) == 0, ""))

    def random_isotopy():
        segs = []
        for _ in range(int(rng.integers(1, 4))):
            kind = int(rng.integers(0, 3))
            if kind == 0:
                segs.append(gamma)
            elif kind == 1:
                segs.append(full_m)
            else:
                segs.append(slide_isotopy(int(rng.integers(0, n))))
        iso = segs[0]
        for s in segs[1:]:
            iso = iso.concat(s)
        return iso

    agree = 0
    trials = 20
    for _ in range(trials):
        iso = random_isotopy()
        if krot(iso.terminal, curves) == eval_isotopy(iso, curves) % n:
            agree += 1
    checks.add("krot_boundary_agrees_with_eval_mod_n", agree == trials,
               f"{agree}/{trials} random composed isotopies")

    # quotient covering
    quot = build_quotient(field, n)
    checks.add("quotient_commutation", quot.commutation_error <= INVARIANCE_TOL,
               f"error {quot.commutation_error:.2e}")
    checks.add("quotient_betti1", quot.quotient_betti1 == 1, "")
    checks.add("quotient_cyclic_index_one", quot.quotient_cyclic_index == 1, "")
    checks.add("quotient_critical_division",
               quot.quotient_critical_count * n == len(crit),
               f"{len(crit)} = {n} * {quot.quotient_critical_count}")

    all_passed = all(c["passed"] for c in checks.items)
    return {
        "schema": 1,
        "n": n,
        "resolution": resolution,
        "eps": eps,
        "seed": seed,
        "all_passed": all_passed,
        "checks": checks.items,
    }

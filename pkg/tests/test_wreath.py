import itertools
import random

import pytest

from torusreeb.errors import MixedContext, WrongContext
from torusreeb.wreath import (
    CyclicGroup,
    FreeAbelian,
    IntegersAdd,
    PermutationGroup,
    WreathContext,
    canonical_inclusion,
    canonical_projection,
    degenerate_iso_n1,
    shift_action,
    wr_inv,
    wr_mul,
)

Z = IntegersAdd()


def ctx(n, group=Z):
    return WreathContext(n, group)


# -- shift action ---------------------------------------------------------------

def test_shift_hand_example():
    assert shift_action((1, 2), 1) == (2, 1)


def test_shift_identity_and_full_period():
    alpha = (3, 1, 4)
    assert shift_action(alpha, 0) == alpha
    assert shift_action(alpha, 3) == alpha


# -- multiplication ---------------------------------------------------------------

def test_mul_hand_example():
    c = ctx(2)
    a = c.element((1, 2), 1)
    b = c.element((3, 4), 0)
    assert wr_mul(a, b).equals(c.element((5, 5), 1))


def test_unit_laws():
    c = ctx(3)
    a = c.element((1, -2, 7), 2)
    assert wr_mul(a, c.identity()).equals(a)
    assert wr_mul(c.identity(), a).equals(a)


def test_pure_translation_powers():
    c = ctx(2)
    t = c.element((0, 0), 1)
    p = c.identity()
    for _ in range(2):
        p = wr_mul(p, t)
    assert p.equals(c.element((0, 0), 2))


def test_inverse_hand_example():
    c = ctx(2)
    a = c.element((1, 2), 1)
    inv = wr_inv(a)
    assert inv.equals(c.element((-2, -1), -1))
    assert wr_mul(a, inv).equals(c.identity())
    assert wr_mul(inv, a).equals(c.identity())


def test_identity_and_translation_inverses():
    c = ctx(3)
    assert wr_inv(c.identity()).equals(c.identity())
    t = c.element((0, 0, 0), 5)
    assert wr_inv(t).equals(c.element((0, 0, 0), -5))


# -- exhaustive group axioms -------------------------------------------------------

def window_elements(group, n, kmax):
    for alpha in itertools.product(group.elements(), repeat=n):
        for k in range(-kmax, kmax + 1):
            yield alpha, k


@pytest.mark.parametrize("group", [CyclicGroup(2), PermutationGroup(3)])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_group_axioms_exhaustive_window(group, n):
    c = WreathContext(n, group)
    elems = [c.element(a, k) for a, k in window_elements(group, n, 1)]
    rng = random.Random(n * 100 + group.__hash__() % 97)
    # associativity over a random sample of triples (full set is cubic)
    for _ in range(400):
        a, b, d = (rng.choice(elems) for _ in range(3))
        assert wr_mul(wr_mul(a, b), d).equals(wr_mul(a, wr_mul(b, d)))
    for a in elems:
        assert wr_mul(a, wr_inv(a)).equals(c.identity())
        assert wr_mul(wr_inv(a), a).equals(c.identity())
        assert wr_mul(a, c.identity()).equals(a)


# -- exact sequence -----------------------------------------------------------------

def test_inclusion_projection_basics():
    c = ctx(3)
    z = canonical_inclusion(c, (5, -1, 2))
    assert z.k == 0
    assert canonical_projection(z) == 0


def test_projection_is_homomorphism():
    c = ctx(2)
    rng = random.Random(7)
    for _ in range(200):
        a = c.element((rng.randint(-5, 5), rng.randint(-5, 5)), rng.randint(-3, 3))
        b = c.element((rng.randint(-5, 5), rng.randint(-5, 5)), rng.randint(-3, 3))
        assert canonical_projection(wr_mul(a, b)) == (
            canonical_projection(a) + canonical_projection(b)
        )


def test_kernel_of_projection_is_image_of_inclusion():
    g3 = CyclicGroup(3)
    c = WreathContext(2, g3)
    rng = random.Random(11)
    for _ in range(1000):
        a = c.element((rng.randrange(3), rng.randrange(3)), rng.randint(-4, 4))
        in_kernel = canonical_projection(a) == 0
        is_included = a.equals(canonical_inclusion(c, a.alpha)) if a.k == 0 else False
        assert in_kernel == is_included


def test_conjugation_by_translation_is_shift():
    for group in (CyclicGroup(4), PermutationGroup(3)):
        c = WreathContext(3, group)
        t = c.element((group.identity(),) * 3, 1)
        for alpha in itertools.islice(
            itertools.product(group.elements(), repeat=3), 40
        ):
            z = canonical_inclusion(c, alpha)
            conj = wr_mul(wr_mul(t, z), wr_inv(t))
            assert conj.equals(canonical_inclusion(c, shift_action(alpha, 1)))


# -- degenerate n = 1 -----------------------------------------------------------------

def test_degenerate_iso_exhaustive_z3_window():
    g3 = CyclicGroup(3)
    c = WreathContext(1, g3)
    elems = [c.element((g,), k) for g in g3.elements() for k in range(-2, 3)]
    for a in elems:
        assert degenerate_iso_n1(a) == (a.alpha[0], a.k)
    for a in elems:
        for b in elems:
            ga, ka = degenerate_iso_n1(a)
            gb, kb = degenerate_iso_n1(b)
            prod = degenerate_iso_n1(wr_mul(a, b))
            assert prod == (g3.mul(ga, gb), ka + kb)
    # bijectivity onto the window image
    assert len({degenerate_iso_n1(a) for a in elems}) == len(elems)


def test_degenerate_iso_rejects_n2():
    c = ctx(2)
    with pytest.raises(WrongContext):
        degenerate_iso_n1(c.identity())


def test_mixed_context_rejected():
    a = ctx(2).identity()
    b = ctx(3).identity()
    with pytest.raises(MixedContext):
        wr_mul(a, b)
    with pytest.raises(MixedContext):
        wr_mul(ctx(2, CyclicGroup(2)).identity(), ctx(2, CyclicGroup(3)).identity())


def test_serialization():
    c = WreathContext(2, FreeAbelian(2))
    a = c.element(((1, 0), (0, -3)), 4)
    assert a.to_json() == {"n": 2, "k": 4, "alpha": [[1, 0], [0, -3]]}

"""Exact arithmetic in the wreath product G wr_n Z = Maps(Z_n, G) x| Z.

Elements are pairs (alpha, k) with alpha a total map Z_n -> G (stored as a
dense length-n tuple) and k an integer; Z acts by index shift,
alpha^k(i) = alpha(i + k mod n), and multiplication is
(alpha, k)(beta, l) = (alpha * beta^k, k + l).  The base group G is an
abstract interface so the same arithmetic serves integer vectors,
permutations and presentation quotients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

from .errors import MixedContext, WrongContext

__all__ = [
    "GroupOps",
    "IntegersAdd",
    "CyclicGroup",
    "PermutationGroup",
    "FreeAbelian",
    "WreathContext",
    "WreathElement",
    "shift_action",
    "wr_mul",
    "wr_inv",
    "canonical_inclusion",
    "canonical_projection",
    "degenerate_iso_n1",
]


class GroupOps:
    """Abstract group interface: identity, multiply, inverse, equality."""

    def identity(self):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def eq(self, a, b) -> bool:
        return a == b

    def elements(self):
        """Finite carrier when available (used by exhaustive axiom checks)."""
        raise NotImplementedError

    def encode(self, a):
        return a


class IntegersAdd(GroupOps):
    """The integers under addition."""

    def identity(self):
        return 0

    def mul(self, a, b):
        return a + b

    def inv(self, a):
        return -a

    def __eq__(self, other):
        return isinstance(other, IntegersAdd)

    def __hash__(self):
        return hash("IntegersAdd")

    def __repr__(self):
        return "Z"


class CyclicGroup(GroupOps):
    def __init__(self, order: int):
        if order < 1:
            raise ValueError("order must be positive")
        self.order = order

    def identity(self):
        return 0

    def mul(self, a, b):
        return (a + b) % self.order

    def inv(self, a):
        return (-a) % self.order

    def elements(self):
        return list(range(self.order))

    def __eq__(self, other):
        return isinstance(other, CyclicGroup) and other.order == self.order

    def __hash__(self):
        return hash(("CyclicGroup", self.order))

    def __repr__(self):
        return f"Z{self.order}"


class PermutationGroup(GroupOps):
    """Symmetric group on {0..degree-1}; elements are one-line tuples."""

    def __init__(self, degree: int):
        self.degree = degree

    def identity(self):
        return tuple(range(self.degree))

    def mul(self, a, b):
        # (a*b)(i) = a(b(i)): apply b first
        return tuple(a[b[i]] for i in range(self.degree))

    def inv(self, a):
        out = [0] * self.degree
        for i, ai in enumerate(a):
            out[ai] = i
        return tuple(out)

    def elements(self):
        from itertools import permutations

        return [tuple(p) for p in permutations(range(self.degree))]

    def encode(self, a):
        return list(a)

    def __eq__(self, other):
        return isinstance(other, PermutationGroup) and other.degree == self.degree

    def __hash__(self):
        return hash(("PermutationGroup", self.degree))

    def __repr__(self):
        return f"S{self.degree}"


class FreeAbelian(GroupOps):
    """Z^r under componentwise addition; elements are integer tuples."""

    def __init__(self, rank: int):
        self.rank = rank

    def identity(self):
        return (0,) * self.rank

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def encode(self, a):
        return list(a)

    def __eq__(self, other):
        return isinstance(other, FreeAbelian) and other.rank == self.rank

    def __hash__(self):
        return hash(("FreeAbelian", self.rank))

    def __repr__(self):
        return f"Z^{self.rank}"


# ---------------------------------------------------------------------------
# Wreath elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WreathContext:
    n: int
    group: GroupOps

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("wreath index n must be >= 1")

    def element(self, alpha: Sequence[Any], k: int) -> "WreathElement":
        alpha = tuple(alpha)
        if len(alpha) != self.n:
            raise MixedContext(f"alpha must have length {self.n}, got {len(alpha)}")
        return WreathElement(self, alpha, int(k))

    def identity(self) -> "WreathElement":
        e = self.group.identity()
        return WreathElement(self, (e,) * self.n, 0)


@dataclass(frozen=True)
class WreathElement:
    context: WreathContext
    alpha: tuple
    k: int

    def __mul__(self, other: "WreathElement") -> "WreathElement":
        return wr_mul(self, other)

    def inverse(self) -> "WreathElement":
        return wr_inv(self)

    def equals(self, other: "WreathElement") -> bool:
        if self.context != other.context:
            raise MixedContext("elements from different wreath contexts")
        g = self.context.group
        return self.k == other.k and all(
            g.eq(a, b) for a, b in zip(self.alpha, other.alpha)
        )

    def to_json(self) -> dict:
        g = self.context.group
        return {"n": self.context.n, "k": self.k,
                "alpha": [g.encode(a) for a in self.alpha]}


def shift_action(alpha: Sequence[Any], k: int) -> tuple:
    """The Z-action on Maps(Z_n, G): result(i) = alpha((i + k) mod n)."""
    alpha = tuple(alpha)
    n = len(alpha)
    return tuple(alpha[(i + k) % n] for i in range(n))


def _require_same_context(a: WreathElement, b: WreathElement):
    if a.context != b.context:
        raise MixedContext(
            f"cannot combine elements over {a.context} and {b.context}"
        )


def wr_mul(a: WreathElement, b: WreathElement) -> WreathElement:
    """(alpha, k)(beta, l) = (alpha * beta^k, k + l), pointwise in G."""
    _require_same_context(a, b)
    g = a.context.group
    shifted = shift_action(b.alpha, a.k)
    alpha = tuple(g.mul(x, y) for x, y in zip(a.alpha, shifted))
    return WreathElement(a.context, alpha, a.k + b.k)


def wr_inv(a: WreathElement) -> WreathElement:
    """((alpha^{-1})^{-k}, -k): the two-sided inverse of (alpha, k)."""
    g = a.context.group
    inv_alpha = tuple(g.inv(x) for x in a.alpha)
    return WreathElement(a.context, shift_action(inv_alpha, -a.k), -a.k)


def canonical_inclusion(context: WreathContext, alpha: Sequence[Any]) -> WreathElement:
    """zeta(alpha) = (alpha, 0), the injective end of the exact sequence."""
    return context.element(alpha, 0)


def canonical_projection(a: WreathElement) -> int:
    """p(alpha, k) = k; ker p = image of the canonical inclusion."""
    return a.k


def degenerate_iso_n1(a: WreathElement):
    """The isomorphism G wr_1 Z ~ G x Z: ((g,), k) -> (g, k)."""
    if a.context.n != 1:
        raise WrongContext(f"isomorphism only exists for n = 1, got n = {a.context.n}")
    return a.alpha[0], a.k

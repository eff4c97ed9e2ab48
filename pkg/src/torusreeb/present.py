"""Finitely presented groups and the orbit fundamental group assembly.

Given a presentation P of the fundamental group of the restricted orbit on
the base cylinder (an input here, not something this package computes) and
the cyclic index n, the assembled group is P x Z for n = 1 and the wreath
product presentation of P wr_n Z for n >= 2: one copy of P's generators per
index in Z_n, commutators between distinct copies, and the translation
generator t conjugating copies by an index shift.

The shift direction is fixed by hand from the wreath multiplication: with
t = (e, 1) and g_i the copy-i embedding (delta_i^g, 0),

    t g_i t^{-1} = ((delta_i^g)^1, 0) = (delta_{i-1}^g, 0) = g_{i-1 mod n},

since the shifted map (delta_i^g)^1(j) = delta_i^g(j+1) hits g exactly at
j = i - 1.  Normal forms (and with them a word problem) exist for abelian
base groups, computed as wreath elements over Z^r reduced modulo the
relation lattice.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field

from .errors import InvalidIndex, NotAbelian
from .intlinalg import hermite_rows, reduce_mod_lattice
from .wreath import GroupOps, WreathContext, WreathElement, wr_mul

__all__ = [
    "Presentation",
    "Pi1Assembly",
    "Word",
    "parse_word",
    "format_word",
    "free_reduce",
    "abelian_presentation",
    "free_abelian_presentation",
    "wreath_presentation",
    "direct_product_with_z",
    "assemble_pi1",
    "normal_form",
    "center_check",
    "presentation_from_text",
    "presentation_to_text",
]

Letter = tuple[str, int]
Word = tuple[Letter, ...]


def free_reduce(letters) -> Word:
    out: list[Letter] = []
    for name, exp in letters:
        exp = int(exp)
        if exp == 0:
            continue
        if out and out[-1][0] == name:
            merged = out[-1][1] + exp
            out.pop()
            if merged:
                out.append((name, merged))
        else:
            out.append((name, exp))
    return tuple(out)


_LETTER_RE = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*?)(?:\^(-?\d+))?$")


def parse_word(text: str, generators=None) -> Word:
    """Parse a word like ``a_0 t a_0^-1 b^2`` into reduced letters."""
    letters: list[Letter] = []
    for token in text.split():
        m = _LETTER_RE.match(token)
        if not m:
            raise ValueError(f"malformed word token {token!r}")
        name = m.group(1)
        exp = int(m.group(2)) if m.group(2) else 1
        if generators is not None and name not in generators:
            raise ValueError(f"unknown generator {name!r}")
        letters.append((name, exp))
    return free_reduce(letters)


def format_word(word: Word) -> str:
    if not word:
        return "1"
    return " ".join(n if e == 1 else f"{n}^{e}" for n, e in word)


def _inverse_word(word: Word) -> Word:
    return tuple((n, -e) for n, e in reversed(word))


def _commutator(a: str, b: str) -> Word:
    return ((a, 1), (b, 1), (a, -1), (b, -1))


@dataclass(frozen=True)
class Presentation:
    """Generators and freely reduced relator words, with an optional abelian
    structure (relation matrix rows in the generator basis)."""

    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    abelian: bool = False
    relation_matrix: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("duplicate generator names")
        for w in self.relators:
            for name, _ in w:
                if name not in self.generators:
                    raise ValueError(f"relator uses unknown generator {name!r}")
        if self.abelian:
            for row in self.relation_matrix:
                if len(row) != len(self.generators):
                    raise ValueError("relation matrix width must match generators")

    @property
    def rank(self) -> int:
        return len(self.generators)


def abelian_presentation(names, matrix=()) -> Presentation:
    """Abelian group Z^r / (row lattice): commutators plus one relator per row."""
    names = tuple(names)
    rels: list[Word] = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            rels.append(_commutator(names[i], names[j]))
    mat = tuple(tuple(int(v) for v in row) for row in matrix)
    for row in mat:
        rels.append(free_reduce((names[k], row[k]) for k in range(len(names))))
    return Presentation(names, tuple(rels), abelian=True, relation_matrix=mat)


def free_abelian_presentation(rank: int, prefix: str = "a") -> Presentation:
    names = tuple(f"{prefix}{i}" for i in range(rank)) if rank > 1 else (prefix,)
    return abelian_presentation(names)


# ---------------------------------------------------------------------------
# Wreath / direct-product presentations
# ---------------------------------------------------------------------------

def _copy_name(gen: str, i: int) -> str:
    return f"{gen}_{i}"


def _fresh_translation_name(taken) -> str:
    name = "t"
    while name in taken:
        name += "_"
    return name


def wreath_presentation(p: Presentation, n: int) -> Presentation:
    """Presentation of P wr_n Z.

    Generators: one copy g_i of each generator of P per i in Z_n, plus the
    translation t.  Relators: every P-relator rewritten in each copy,
    commutators between distinct copies, and t g_i t^{-1} = g_{i-1 mod n}.
    For n = 1 the copy subscripts are dropped, giving <gens(P), t | rels(P),
    [g, t]> = P x Z.
    """
    if n < 1:
        raise InvalidIndex(f"wreath index must be >= 1, got {n}")
    if n == 1:
        return direct_product_with_z(p)
    names = [_copy_name(g, i) for i in range(n) for g in p.generators]
    t = _fresh_translation_name(names)
    rels: list[Word] = []
    for i in range(n):
        for w in p.relators:
            rels.append(tuple((_copy_name(g, i), e) for g, e in w))
    for i in range(n):
        for j in range(i + 1, n):
            for g in p.generators:
                for h in p.generators:
                    rels.append(_commutator(_copy_name(g, i), _copy_name(h, j)))
    for i in range(n):
        for g in p.generators:
            rels.append(free_reduce([
                (t, 1), (_copy_name(g, i), 1), (t, -1),
                (_copy_name(g, (i - 1) % n), -1),
            ]))
    return Presentation(tuple(names) + (t,), tuple(rels))


def direct_product_with_z(p: Presentation) -> Presentation:
    t = _fresh_translation_name(p.generators)
    rels = list(p.relators) + [_commutator(g, t) for g in p.generators]
    return Presentation(p.generators + (t,), tuple(rels))


# ---------------------------------------------------------------------------
# Assembly of the orbit fundamental group
# ---------------------------------------------------------------------------

@dataclass
class Pi1Assembly:
    base: Presentation
    n: int
    presentation: Presentation
    t_name: str
    copy_of: dict = dc_field(default_factory=dict)  # gen name -> (base gen, copy idx)

    def eval_map(self) -> dict[str, int]:
        return {g: (1 if g == self.t_name else 0)
                for g in self.presentation.generators}

    def krot_map(self) -> dict[str, int]:
        return {g: v % self.n for g, v in self.eval_map().items()}

    def eval_word(self, word) -> int:
        word = self._as_word(word)
        table = self.eval_map()
        return sum(table[name] * exp for name, exp in word)

    def krot_word(self, word) -> int:
        return self.eval_word(word) % self.n

    def _as_word(self, word) -> Word:
        if isinstance(word, str):
            return parse_word(word, set(self.presentation.generators))
        return free_reduce(word)


def assemble_pi1(p: Presentation, n: int) -> Pi1Assembly:
    """Assembled presentation of the orbit fundamental group.

    n = 1 gives the direct product P x Z; n >= 2 the wreath presentation of
    P wr_n Z.  eval sends t to 1 and every copy generator to 0; krot is
    eval mod n.
    """
    if n < 1:
        raise InvalidIndex(f"cyclic index must be >= 1, got {n}")
    pres = wreath_presentation(p, n)
    t = pres.generators[-1]
    copy_of: dict[str, tuple[str, int]] = {}
    if n == 1:
        for g in p.generators:
            copy_of[g] = (g, 0)
    else:
        for i in range(n):
            for g in p.generators:
                copy_of[_copy_name(g, i)] = (g, i)
    return Pi1Assembly(base=p, n=n, presentation=pres, t_name=t, copy_of=copy_of)


# ---------------------------------------------------------------------------
# Normal forms for abelian base groups
# ---------------------------------------------------------------------------

class AbelianQuotient(GroupOps):
    """Z^r modulo a relation lattice, with canonical HNF representatives."""

    def __init__(self, rank: int, relation_rows=()):
        self.rank = rank
        self.basis = hermite_rows([list(r) for r in relation_rows])

    def reduce(self, vec) -> tuple[int, ...]:
        return reduce_mod_lattice(list(vec), self.basis)

    def identity(self):
        return (0,) * self.rank

    def mul(self, a, b):
        return self.reduce(x + y for x, y in zip(a, b))

    def inv(self, a):
        return self.reduce(-x for x in a)

    def encode(self, a):
        return list(a)

    def __eq__(self, other):
        return (isinstance(other, AbelianQuotient) and other.rank == self.rank
                and other.basis == self.basis)

    def __hash__(self):
        return hash(("AbelianQuotient", self.rank, tuple(map(tuple, self.basis))))

    def __repr__(self):
        return f"Z^{self.rank}/{self.basis!r}" if self.basis else f"Z^{self.rank}"


def _assembly_context(assembly: Pi1Assembly) -> WreathContext:
    if not assembly.base.abelian:
        raise NotAbelian("normal forms require an abelian base presentation")
    group = AbelianQuotient(assembly.base.rank, assembly.base.relation_matrix)
    return WreathContext(assembly.n, group)


def normal_form(assembly: Pi1Assembly, word) -> WreathElement:
    """Rewrite a word in the assembled presentation into (alpha, k).

    Two words are equal in the group iff their normal forms coincide; the map
    is a homomorphism onto the wreath arithmetic.  Appending a copy letter
    g_i^e to a partial product (alpha, k) lands in slot (i - k) mod n, which
    is exactly the conjugation relator acted out.
    """
    ctx = _assembly_context(assembly)
    group: AbelianQuotient = ctx.group
    base_index = {g: idx for idx, g in enumerate(assembly.base.generators)}
    word = assembly._as_word(word)
    alpha = [list(group.identity()) for _ in range(assembly.n)]
    k = 0
    for name, exp in word:
        if name == assembly.t_name:
            k += exp
            continue
        if name not in assembly.copy_of:
            raise ValueError(f"unknown generator {name!r}")
        g, i = assembly.copy_of[name]
        slot = (i - k) % assembly.n
        alpha[slot][base_index[g]] += exp
    return ctx.element(tuple(group.reduce(a) for a in alpha), k)


def center_check(assembly: Pi1Assembly, word) -> bool:
    """True iff the word commutes with every generator (by normal forms).

    For an abelian base this holds exactly when alpha is a constant map and
    the translation part vanishes mod n: conjugation by t demands shift
    invariance, and conjugation by a copy generator demands that the shift by
    k fixes every slot.
    """
    nf = normal_form(assembly, word)
    for g in assembly.presentation.generators:
        gen_nf = normal_form(assembly, ((g, 1),))
        if not wr_mul(nf, gen_nf).equals(wr_mul(gen_nf, nf)):
            return False
    return True


# ---------------------------------------------------------------------------
# Text / JSON formats
# ---------------------------------------------------------------------------

def presentation_to_text(p: Presentation) -> str:
    gens = ", ".join(p.generators)
    rels = ", ".join(format_word(w) for w in p.relators)
    return f"gens: {gens}\nrels: {rels}\n"


def presentation_from_text(text: str) -> Presentation:
    gens: tuple[str, ...] = ()
    rels: list[Word] = []
    saw_gens = False
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("gens:"):
            gens = tuple(tok.strip() for tok in line[len("gens:"):].split(",") if tok.strip())
            saw_gens = True
        elif line.startswith("rels:"):
            body = line[len("rels:"):].strip()
            if body:
                rels = [parse_word(chunk.strip()) for chunk in body.split(",") if chunk.strip()]
        else:
            raise ValueError(f"unrecognized presentation line: {line!r}")
    if not saw_gens:
        raise ValueError("presentation text must contain a 'gens:' line")
    return Presentation(gens, tuple(rels))


def presentation_to_json(p: Presentation) -> dict:
    return {
        "gens": list(p.generators),
        "rels": [[[n, e] for n, e in w] for w in p.relators],
        "abelian": p.abelian,
        "relation_matrix": [list(r) for r in p.relation_matrix],
    }


def presentation_from_json(d: dict) -> Presentation:
    return Presentation(
        tuple(d["gens"]),
        tuple(free_reduce((n, e) for n, e in w) for w in d.get("rels", [])),
        abelian=bool(d.get("abelian", False)),
        relation_matrix=tuple(tuple(int(v) for v in r)
                              for r in d.get("relation_matrix", [])),
    )

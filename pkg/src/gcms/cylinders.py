"""Generalized-cylinder subbasis and its normalized set algebra.

The subbasis of the configuration-space topology consists of cylinders
``C_g`` and their complements, where ``g`` is either a positive admissible
word ``alpha`` or a word ``alpha j^{-1}`` with a single inverse letter
(longer inverse tails reduce to their last letter).

Every subbasis element, and every finite intersection of them, normalizes
to the disjoint form

    finite set of boundary points  |_|  cylinders  |_|  cylinder families,

where a family is a prefix together with a symbol set for the following
letter.  ``decompose`` produces the normal form of one element,
``meet``/``intersect`` close the normal forms under finite intersection,
and ``member`` decides membership of a configuration, which is the oracle
every identity is verified against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from . import symbolsets as ss
from .configs import BoundedConfig, Configuration, GroupWord
from .matrices import Symbol, TransitionMatrix
from .words import (Word, forced_extension, format_word, is_admissible, is_prefix,
                    word as parse_word)


# --------------------------------------------------------------------------
# subbasis elements
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Cyl:
    matrix: TransitionMatrix
    alpha: Word

    def __post_init__(self) -> None:
        _check_word(self.matrix, self.alpha)

    def complement(self) -> "CylC":
        return CylC(self.matrix, self.alpha)

    def __repr__(self) -> str:
        return f"C[{format_word(self.alpha)}]"


@dataclass(frozen=True)
class CylC:
    matrix: TransitionMatrix
    alpha: Word

    def __post_init__(self) -> None:
        _check_word(self.matrix, self.alpha)

    def complement(self) -> Cyl:
        return Cyl(self.matrix, self.alpha)

    def __repr__(self) -> str:
        return f"!C[{format_word(self.alpha)}]"


@dataclass(frozen=True)
class InvCyl:
    """Cylinder on ``alpha j^{-1}``; only a single inverse letter is stored."""

    matrix: TransitionMatrix
    alpha: Word
    j: Symbol

    def __post_init__(self) -> None:
        _check_word(self.matrix, self.alpha)
        if self.j < 1:
            raise ValueError("symbols are positive integers")

    def complement(self) -> "InvCylC":
        return InvCylC(self.matrix, self.alpha, self.j)

    def __repr__(self) -> str:
        return f"C[{format_word(self.alpha)};inv={self.j}]"


@dataclass(frozen=True)
class InvCylC:
    matrix: TransitionMatrix
    alpha: Word
    j: Symbol

    def __post_init__(self) -> None:
        _check_word(self.matrix, self.alpha)
        if self.j < 1:
            raise ValueError("symbols are positive integers")

    def complement(self) -> InvCyl:
        return InvCyl(self.matrix, self.alpha, self.j)

    def __repr__(self) -> str:
        return f"!C[{format_word(self.alpha)};inv={self.j}]"


SubbasisElem = Union[Cyl, CylC, InvCyl, InvCylC]


def _check_word(A: TransitionMatrix, w: Word) -> None:
    if any(s < 1 for s in w):
        raise ValueError("symbols are positive integers")
    if not is_admissible(A, w):
        raise ValueError(f"word {format_word(w)} is not admissible")


def from_group_word(A: TransitionMatrix, g: GroupWord, complement: bool = False) -> SubbasisElem:
    """Subbasis element for a cylinder on an arbitrary alpha*beta^{-1} word.

    Inverse tails reduce to their last letter: C on ``alpha gamma^{-1}``
    equals C on ``alpha gamma[-1]^{-1}``.
    """
    if not g.neg:
        return CylC(A, g.pos) if complement else Cyl(A, g.pos)
    j = g.neg[-1]
    return InvCylC(A, g.pos, j) if complement else InvCyl(A, g.pos, j)


def raw_member(c: Configuration, e: SubbasisElem) -> bool:
    """Membership straight from the configuration evaluation (the oracle)."""
    if isinstance(e, (Cyl, CylC)):
        value = c.eval(GroupWord(e.alpha, ()))
        return value == 1 if isinstance(e, Cyl) else value == 0
    if e.alpha and e.alpha[-1] == e.j:
        g = GroupWord(e.alpha[:-1], ())
    else:
        g = GroupWord(e.alpha, (e.j,))
    value = c.eval(g)
    return value == 1 if isinstance(e, InvCyl) else value == 0


# --------------------------------------------------------------------------
# normal form
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CylFamily:
    """Disjoint union of the cylinders ``C_{prefix k}`` for k in ``symbols``.

    ``symbols`` is effective: it is already intersected with the row of the
    prefix's last letter, so only admissible continuations are denoted.
    """

    prefix: Word
    symbols: ss.SymbolSet

    def __repr__(self) -> str:
        return f"Fam[{format_word(self.prefix)}; {ss.describe(self.symbols)}]"


@dataclass(frozen=True)
class SetExpr:
    matrix: TransitionMatrix
    whole_space: bool
    points: tuple[BoundedConfig, ...]
    atoms: tuple[Word, ...]
    families: tuple[CylFamily, ...]

    @property
    def is_empty(self) -> bool:
        return not (self.whole_space or self.points or self.atoms or self.families)

    def parts(self) -> list:
        out: list = list(self.points)
        out.extend(("atom", a) for a in self.atoms)
        out.extend(self.families)
        return out

    def __repr__(self) -> str:
        if self.whole_space:
            return "SetExpr[X]"
        if self.is_empty:
            return "SetExpr[empty]"
        bits = []
        bits.extend(repr(p) for p in self.points)
        bits.extend(f"C[{format_word(a)}]" for a in self.atoms)
        bits.extend(repr(f) for f in self.families)
        return "SetExpr[" + " U ".join(bits) + "]"


def _point_key(p: BoundedConfig) -> tuple:
    return (p.stem, p.root.id)


def normalize(A: TransitionMatrix, points: Iterable[BoundedConfig] = (),
              atoms: Iterable[Word] = (), families: Iterable[CylFamily] = (),
              whole_space: bool = False) -> SetExpr:
    """Canonical SetExpr: forced-extended atoms, effective finite-free families.

    Families whose effective symbol set is finite are expanded into atoms;
    families over the same prefix with complementary row predicates merge
    into a plain exclusion set.  Duplicate parts indicate a broken disjoint
    decomposition and raise.
    """
    if whole_space:
        return SetExpr(A, True, (), (), ())
    out_atoms: list[Word] = []
    out_fams: dict[tuple, CylFamily] = {}

    def add_family(prefix: Word, symbols: ss.SymbolSet) -> None:
        if prefix:
            symbols = ss.intersect(A, symbols, ss.row_one(A, prefix[-1]))
        if ss.is_definitely_empty(A, symbols):
            return
        if isinstance(symbols, ss.FiniteSet):
            for k in sorted(symbols.symbols):
                out_atoms.append(forced_extension(A, prefix + (k,)))
            return
        key = (prefix, ss.sort_key(symbols))
        if key in out_fams:
            raise RuntimeError(f"duplicate family on prefix {format_word(prefix)}")
        out_fams[key] = CylFamily(prefix, symbols)

    for f in families:
        add_family(f.prefix, f.symbols)
    for a in atoms:
        out_atoms.append(forced_extension(A, a))

    # merge complementary sieves on a shared prefix: (one_row=j) U (zero_rows={j})
    merged = True
    while merged:
        merged = False
        fams = list(out_fams.values())
        for i in range(len(fams)):
            for j_ in range(i + 1, len(fams)):
                f, g = fams[i], fams[j_]
                if f.prefix != g.prefix:
                    continue
                sf, sg = f.symbols, g.symbols
                if not (isinstance(sf, ss.Sieve) and isinstance(sg, ss.Sieve)):
                    continue
                if sf.excluded != sg.excluded:
                    continue
                pair = None
                if sf.one_row is not None and not sf.zero_rows and \
                        sg.one_row is None and sg.zero_rows == frozenset({sf.one_row}):
                    pair = (f, g)
                elif sg.one_row is not None and not sg.zero_rows and \
                        sf.one_row is None and sf.zero_rows == frozenset({sg.one_row}):
                    pair = (g, f)
                if pair is not None:
                    del out_fams[(f.prefix, ss.sort_key(sf))]
                    del out_fams[(g.prefix, ss.sort_key(sg))]
                    add_family(f.prefix, ss.all_except(sf.excluded))
                    merged = True
                    break
            if merged:
                break

    out_points = sorted(points, key=_point_key)
    for p, q in zip(out_points, out_points[1:]):
        if p == q:
            raise RuntimeError(f"duplicate point {p!r} in decomposition")
    out_atoms.sort()
    for a, b in zip(out_atoms, out_atoms[1:]):
        if a == b:
            raise RuntimeError(f"duplicate cylinder {format_word(a)} in decomposition")
    fams_sorted = tuple(sorted(out_fams.values(), key=lambda f: (f.prefix, ss.sort_key(f.symbols))))
    # fold the canonical whole-space decomposition (all empty-stem points
    # plus every first-letter cylinder) back into the whole-space flag
    if (not out_atoms and len(fams_sorted) == 1
            and fams_sorted[0].prefix == ()
            and fams_sorted[0].symbols == ss.ALL
            and {(p.stem, p.root.id) for p in out_points}
            == {((), col.id) for col in A.accumulation_catalog}):
        return SetExpr(A, True, (), (), ())
    return SetExpr(A, False, tuple(out_points), tuple(out_atoms), fams_sorted)


def empty_expr(A: TransitionMatrix) -> SetExpr:
    return SetExpr(A, False, (), (), ())


def whole_space_expr(A: TransitionMatrix) -> SetExpr:
    return SetExpr(A, True, (), (), ())


# --------------------------------------------------------------------------
# boundary point sets (resolved through the accumulation catalog)
# --------------------------------------------------------------------------

def _valid_roots(A: TransitionMatrix, stem: Word):
    for col in A.accumulation_catalog:
        if not stem or stem[-1] in col.allowed_terminal_symbols:
            yield col


def configs_with_stem(A: TransitionMatrix, stem: Word) -> list[BoundedConfig]:
    if not is_admissible(A, stem):
        return []
    return [BoundedConfig(A, stem, col) for col in _valid_roots(A, stem)]


def prefix_points(A: TransitionMatrix, alpha: Word, include_alpha: bool = False) -> list[BoundedConfig]:
    """Boundary configurations whose stem is a (proper) prefix of ``alpha``."""
    out: list[BoundedConfig] = []
    top = len(alpha) + 1 if include_alpha else len(alpha)
    for m in range(top):
        out.extend(configs_with_stem(A, alpha[:m]))
    return out


def stem_points(A: TransitionMatrix, alpha: Word, need: frozenset[Symbol] = frozenset(),
                avoid: frozenset[Symbol] = frozenset()) -> list[BoundedConfig]:
    """Configurations with stem exactly ``alpha`` whose root contains ``need``
    and avoids ``avoid``."""
    return [c for c in configs_with_stem(A, alpha)
            if need <= c.root.support and not (avoid & c.root.support)]


# --------------------------------------------------------------------------
# decomposition of a subbasis element
# --------------------------------------------------------------------------

def decompose(e: SubbasisElem) -> SetExpr:
    """Normal form of one subbasis element.

    Inverse cylinders split into the stem-exactly boundary part plus the
    family of admissible continuations; complements split along every
    prefix position.
    """
    A = e.matrix
    if isinstance(e, Cyl):
        if not e.alpha:
            return whole_space_expr(A)
        return normalize(A, atoms=[e.alpha])
    if isinstance(e, CylC):
        if not e.alpha:
            return empty_expr(A)
        fams = [CylFamily(e.alpha[:m], ss.all_except({e.alpha[m]}))
                for m in range(len(e.alpha))]
        return normalize(A, points=prefix_points(A, e.alpha), families=fams)
    if isinstance(e, InvCyl):
        if e.alpha and e.alpha[-1] == e.j:
            return decompose(Cyl(A, e.alpha[:-1]))
        return normalize(A,
                         points=stem_points(A, e.alpha, need=frozenset({e.j})),
                         families=[CylFamily(e.alpha, ss.row_one(A, e.j))])
    if isinstance(e, InvCylC):
        if e.alpha and e.alpha[-1] == e.j:
            return decompose(CylC(A, e.alpha[:-1]))
        points = stem_points(A, e.alpha, avoid=frozenset({e.j})) + prefix_points(A, e.alpha)
        fams = [CylFamily(e.alpha[:m], ss.all_except({e.alpha[m]}))
                for m in range(len(e.alpha))]
        fams.append(CylFamily(e.alpha, ss.row_zero(A, e.j)))
        return normalize(A, points=points, families=fams)
    raise TypeError(f"not a subbasis element: {e!r}")


# --------------------------------------------------------------------------
# intersection of normal forms
# --------------------------------------------------------------------------

def _meet_point_atom(p: BoundedConfig, a: Word) -> bool:
    return p.has_prefix(a)

def _meet_point_family(p: BoundedConfig, f: CylFamily, A: TransitionMatrix) -> bool:
    n = len(f.prefix)
    return (len(p.stem) > n and p.stem[:n] == f.prefix
            and ss.contains(A, f.symbols, p.stem[n]))


def _meet_atoms(a: Word, b: Word) -> Word | None:
    if is_prefix(a, b):
        return b
    if is_prefix(b, a):
        return a
    return None


def _meet_atom_family(A: TransitionMatrix, a: Word, f: CylFamily):
    """Intersection of C_a with a family; returns ("family", f), ("atom", a) or None."""
    if is_prefix(a, f.prefix):
        return ("family", f)
    if is_prefix(f.prefix, a) and len(a) > len(f.prefix):
        if ss.contains(A, f.symbols, a[len(f.prefix)]):
            return ("atom", a)
        return None
    return None


def _meet_families(A: TransitionMatrix, f: CylFamily, g: CylFamily):
    if f.prefix == g.prefix:
        return ("merge", CylFamily(f.prefix, ss.intersect(A, f.symbols, g.symbols)))
    if is_prefix(f.prefix, g.prefix):
        outer, inner = f, g
    elif is_prefix(g.prefix, f.prefix):
        outer, inner = g, f
    else:
        return None
    k = inner.prefix[len(outer.prefix)]
    if ss.contains(A, outer.symbols, k):
        return ("family", inner)
    return None


def meet(s: SetExpr, t: SetExpr) -> SetExpr:
    """Intersection of two normal forms, again in normal form.

    Every part-against-part case is decidable; a pair this function cannot
    resolve would mean the normal form is not closed, which is an internal
    error.
    """
    if s.matrix != t.matrix:
        raise ValueError("set expressions over different matrices")
    A = s.matrix
    if s.whole_space:
        return t
    if t.whole_space:
        return s
    points: list[BoundedConfig] = []
    atoms: list[Word] = []
    families: list[CylFamily] = []

    # points survive iff they belong to the other expression
    for p in s.points:
        if member(p, t):
            points.append(p)
    for q in t.points:
        if q not in s.points and member(q, s):
            points.append(q)

    for a in s.atoms:
        for b in t.atoms:
            w = _meet_atoms(a, b)
            if w is not None:
                atoms.append(w)
        for g in t.families:
            hit = _meet_atom_family(A, a, g)
            if hit is not None:
                (atoms if hit[0] == "atom" else families).append(hit[1])
    for b in t.atoms:
        for f in s.families:
            hit = _meet_atom_family(A, b, f)
            if hit is not None:
                (atoms if hit[0] == "atom" else families).append(hit[1])
    for f in s.families:
        for g in t.families:
            hit = _meet_families(A, f, g)
            if hit is not None:
                families.append(hit[1])
    return normalize(A, points=points, atoms=atoms, families=families)


def intersect(a: SubbasisElem, b: SubbasisElem) -> SetExpr:
    """Normalized intersection of two subbasis elements."""
    if a.matrix != b.matrix:
        raise ValueError("subbasis elements over different matrices")
    return meet(decompose(a), decompose(b))


def intersect_many(elems: Sequence[SubbasisElem]) -> SetExpr:
    """Left fold of pairwise intersection; the result is again normal."""
    if not elems:
        raise ValueError("need at least one subbasis element")
    acc = decompose(elems[0])
    for e in elems[1:]:
        if e.matrix != elems[0].matrix:
            raise ValueError("subbasis elements over different matrices")
        acc = meet(acc, decompose(e))
    return acc


# --------------------------------------------------------------------------
# membership / verification
# --------------------------------------------------------------------------

def member(c: Configuration, s: SetExpr) -> bool:
    return membership_count(c, s) > 0


def membership_count(c: Configuration, s: SetExpr) -> int:
    """Number of parts of ``s`` containing ``c`` (must be 0 or 1 when disjoint)."""
    if s.whole_space:
        return 1
    A = s.matrix
    n = 0
    if isinstance(c, BoundedConfig):
        n += sum(1 for p in s.points if p == c)
    n += sum(1 for a in s.atoms if c.has_prefix(a))
    for f in s.families:
        k = len(f.prefix)
        if not c.has_prefix(f.prefix):
            continue
        nxt = c.symbol_at(k)
        if nxt is not None and ss.contains(A, f.symbols, nxt):
            n += 1
    return n


@dataclass
class IdentityReport:
    ok: bool
    checked: int
    counterexample: Configuration | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_identity(lhs: tuple[SubbasisElem, SubbasisElem] | SubbasisElem,
                    rhs: SetExpr, sample: Iterable[Configuration]) -> IdentityReport:
    """Check rhs against raw membership of lhs on every sampled configuration.

    Also checks the parts of rhs are pairwise disjoint on the sample
    (membership multiplicity <= 1).  Returns the first counterexample.
    """
    elems = lhs if isinstance(lhs, tuple) else (lhs,)
    checked = 0
    for c in sample:
        checked += 1
        want = all(raw_member(c, e) for e in elems)
        count = membership_count(c, rhs)
        if count > 1:
            return IdentityReport(False, checked, c, f"config covered {count} times")
        if (count == 1) != want:
            return IdentityReport(False, checked, c,
                                  f"membership mismatch: raw={want}, normalized={count == 1}")
    return IdentityReport(True, checked)


# --------------------------------------------------------------------------
# CLI expression grammar
# --------------------------------------------------------------------------

def parse_elem(A: TransitionMatrix, text: str) -> SubbasisElem:
    """Parse ``C[3.2.1]``, ``!C[3.2.1]``, ``C[2.1;inv=3]``, ``!C[2.1;inv=3]``."""
    text = text.strip()
    complement = text.startswith("!")
    body = text[1:] if complement else text
    if not (body.startswith("C[") and body.endswith("]")):
        raise ValueError(f"cannot parse cylinder expression {text!r}")
    inner = body[2:-1]
    inv: Symbol | None = None
    if ";" in inner:
        word_part, _, inv_part = inner.partition(";")
        key, _, value = inv_part.partition("=")
        if key.strip() != "inv":
            raise ValueError(f"unknown modifier in {text!r}")
        inv = int(value)
    else:
        word_part = inner
    alpha = () if word_part.strip() in ("", "e") else parse_word(word_part)
    if inv is None:
        return CylC(A, alpha) if complement else Cyl(A, alpha)
    return InvCylC(A, alpha, inv) if complement else InvCyl(A, alpha, inv)


def parse_expression(A: TransitionMatrix, text: str) -> list[SubbasisElem]:
    """Parse an ``&``-separated chain of subbasis elements."""
    return [parse_elem(A, chunk) for chunk in text.split("&")]

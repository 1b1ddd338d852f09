"""Rule-defined countable transition matrices.

A transition matrix is a 0/1 matrix over the alphabet {1, 2, 3, ...}.
The built-in families (renewal, pair renewal, prime renewal, alternating
renewal) are infinite matrices defined by closed-form rules and are never
materialized; explicit finite matrices store their rows.

Besides entry queries, a matrix knows

* the finite support of each column (``predecessors``), which makes
  backward word enumeration exact on every built-in kind,
* its catalog of column accumulation points, which classifies the
  boundary configurations the shift space acquires beyond the
  sequence space,
* a normal form for each row as a symbol set (finite, cofinite, or an
  irregular row kept symbolic), used by the cylinder algebra.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

Symbol = int


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_power_base(j: int) -> int | None:
    """Return p if j = p**k for a prime p and k >= 1, else None."""
    if j < 2:
        return None
    for p in range(2, j + 1):
        if p * p > j:
            break
        if j % p == 0:
            m = j
            while m % p == 0:
                m //= p
            return p if m == 1 and _is_prime(p) else None
    return j if _is_prime(j) else None


@dataclass(frozen=True)
class AccumulationColumn:
    """One accumulation point of the column sequence of a matrix.

    ``support`` holds the positions carrying a 1; ``allowed_terminal_symbols``
    are the symbols a finite stem may end in for a boundary configuration
    rooted at this column (the empty stem is always allowed).
    """

    id: int
    support: frozenset[Symbol]
    allowed_terminal_symbols: frozenset[Symbol]

    def __post_init__(self) -> None:
        if not self.support:
            raise ValueError("accumulation column must have non-empty support")


class TransitionMatrix:
    """Queryable 0/1 transition matrix over the alphabet of positive integers.

    Use the module-level constructors (:func:`renewal`, :func:`pair_renewal`,
    :func:`prime_renewal`, :func:`alternating_renewal`, :func:`full_shift`,
    :func:`explicit`) rather than instantiating directly.
    """

    def __init__(self, kind: str, *, rows: tuple[tuple[int, ...], ...] | None = None,
                 prime_bound: int = 7):
        self.kind = kind
        self._rows = rows
        self.prime_bound = prime_bound
        if kind in ("full_shift", "explicit"):
            assert rows is not None
            self.size: int | None = len(rows)
            self._validate_explicit()
        else:
            self.size = None
        self._catalog = self._build_catalog()

    # -- construction helpers -------------------------------------------------

    def _validate_explicit(self) -> None:
        rows = self._rows
        assert rows is not None
        n = len(rows)
        for r in rows:
            if len(r) != n:
                raise ValueError("explicit matrix must be square")
            if any(v not in (0, 1) for v in r):
                raise ValueError("entries must be 0 or 1")
        for i, r in enumerate(rows):
            if not any(r):
                raise ValueError(f"row {i + 1} is all zero")
        for j in range(n):
            if not any(rows[i][j] for i in range(n)):
                raise ValueError(f"column {j + 1} is all zero")

    def _build_catalog(self) -> tuple[AccumulationColumn, ...]:
        if self.kind == "renewal":
            return (AccumulationColumn(1, frozenset({1}), frozenset({1})),)
        if self.kind == "pair_renewal":
            return (
                AccumulationColumn(1, frozenset({1, 2}), frozenset({1, 2})),
                AccumulationColumn(2, frozenset({1}), frozenset({1})),
            )
        if self.kind == "prime_renewal":
            cols = [AccumulationColumn(1, frozenset({1}), frozenset({1}))]
            for p in range(2, self.prime_bound + 1):
                if _is_prime(p):
                    cols.append(AccumulationColumn(p, frozenset({1, p}), frozenset({1, p})))
            return tuple(cols)
        if self.kind == "alternating_renewal":
            return (
                AccumulationColumn(1, frozenset({1}), frozenset({1})),
                AccumulationColumn(2, frozenset({2}), frozenset({2})),
            )
        return ()

    # -- basic queries --------------------------------------------------------

    def entry(self, i: Symbol, j: Symbol) -> int:
        """Matrix entry A(i, j), exact for all i, j on built-in kinds."""
        if i < 1 or j < 1:
            raise ValueError("symbols are positive integers")
        k = self.kind
        if k == "renewal":
            return 1 if (i == 1 or i == j + 1) else 0
        if k == "pair_renewal":
            return 1 if (i == 1 or i == j + 1 or (i == 2 and j % 2 == 0)) else 0
        if k == "prime_renewal":
            if i == 1 or i == j + 1:
                return 1
            return 1 if (_is_prime(i) and _prime_power_base(j) == i) else 0
        if k == "alternating_renewal":
            if i == j + 1:
                return 1
            if i == 1 and j % 2 == 0:
                return 1
            if i == 2 and j % 2 == 1:
                return 1
            return 0
        rows = self._rows
        assert rows is not None
        if i > len(rows) or j > len(rows):
            raise IndexError(f"index ({i},{j}) out of range for size {len(rows)}")
        return rows[i - 1][j - 1]

    def emitters(self, i: Symbol, bound: Symbol) -> set[Symbol]:
        """Truncated row support { j <= bound : A(i,j) = 1 }."""
        if bound < 1:
            raise ValueError("bound must be >= 1")
        return {j for j in range(1, bound + 1) if self.entry(i, j) == 1}

    def is_infinite_emitter(self, i: Symbol) -> bool:
        """Whether row i has infinitely many ones."""
        k = self.kind
        if k == "renewal":
            return i == 1
        if k == "pair_renewal":
            return i in (1, 2)
        if k == "prime_renewal":
            return i == 1 or _is_prime(i)
        if k == "alternating_renewal":
            return i in (1, 2)
        return False

    def predecessors(self, j: Symbol) -> tuple[Symbol, ...]:
        """Column support { i : A(i,j) = 1 }, finite for every supported kind."""
        if j < 1:
            raise ValueError("symbols are positive integers")
        k = self.kind
        if k == "renewal":
            return (1, j + 1)
        if k == "pair_renewal":
            base = {1, j + 1}
            if j % 2 == 0:
                base.add(2)
            return tuple(sorted(base))
        if k == "prime_renewal":
            base = {1, j + 1}
            p = _prime_power_base(j)
            if p is not None:
                base.add(p)
            return tuple(sorted(base))
        if k == "alternating_renewal":
            base = {j + 1}
            base.add(1 if j % 2 == 0 else 2)
            return tuple(sorted(base))
        rows = self._rows
        assert rows is not None
        if j > len(rows):
            raise IndexError(f"column {j} out of range")
        return tuple(i + 1 for i in range(len(rows)) if rows[i][j - 1] == 1)

    # -- row structure for the cylinder algebra -------------------------------

    def row_structure(self, i: Symbol) -> tuple[str, frozenset[Symbol]]:
        """Normal form of row i as a symbol set.

        Returns ``("finite", S)`` when the row support is the finite set S,
        ``("cofinite", S)`` when the support is everything except S, and
        ``("irregular", frozenset())`` when both the support and its
        complement are infinite (the row stays symbolic).
        """
        k = self.kind
        if k == "renewal":
            return ("cofinite", frozenset()) if i == 1 else ("finite", frozenset({i - 1}))
        if k == "pair_renewal":
            if i == 1:
                return ("cofinite", frozenset())
            if i == 2:
                return ("irregular", frozenset())
            return ("finite", frozenset({i - 1}))
        if k == "prime_renewal":
            if i == 1:
                return ("cofinite", frozenset())
            if _is_prime(i):
                return ("irregular", frozenset())
            return ("finite", frozenset({i - 1}))
        if k == "alternating_renewal":
            if i in (1, 2):
                return ("irregular", frozenset())
            return ("finite", frozenset({i - 1}))
        rows = self._rows
        assert rows is not None
        return ("finite", frozenset(j + 1 for j in range(len(rows)) if rows[i - 1][j] == 1))

    def irregular_rows_intersection(self, i: Symbol, j: Symbol) -> frozenset[Symbol]:
        """Support of row i intersected with row j, both irregular, i != j.

        Finite for every built-in kind; this is what keeps the cylinder
        predicate algebra closed.
        """
        if i == j:
            raise ValueError("rows must differ")
        k = self.kind
        if k == "pair_renewal":
            raise ValueError("pair renewal has a single irregular row")
        if k == "alternating_renewal":
            # evens vs odds
            return frozenset()
        if k == "prime_renewal":
            out = set()
            # candidates are the finite pieces {i-1} and {j-1}
            for cand in (i - 1, j - 1):
                if cand >= 1 and self.entry(i, cand) and self.entry(j, cand):
                    out.add(cand)
            return frozenset(out)
        raise ValueError(f"kind {self.kind} has no irregular rows")

    # -- catalog ---------------------------------------------------------------

    @property
    def accumulation_catalog(self) -> tuple[AccumulationColumn, ...]:
        return self._catalog

    def column_by_id(self, col_id: int) -> AccumulationColumn:
        for c in self._catalog:
            if c.id == col_id:
                return c
        raise KeyError(f"no accumulation column with id {col_id} for kind {self.kind}")

    # -- identity / serialization ----------------------------------------------

    def _key(self) -> tuple:
        return (self.kind, self._rows, self.prime_bound if self.kind == "prime_renewal" else None)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TransitionMatrix) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        if self.kind == "prime_renewal":
            return f"TransitionMatrix(kind={self.kind!r}, prime_bound={self.prime_bound})"
        if self.size is not None:
            return f"TransitionMatrix(kind={self.kind!r}, size={self.size})"
        return f"TransitionMatrix(kind={self.kind!r})"

    def to_dict(self) -> dict:
        if self.kind == "prime_renewal":
            return {"kind": "prime_renewal", "prime_bound": self.prime_bound}
        if self.kind == "full_shift":
            return {"kind": "full_shift", "size": self.size}
        if self.kind == "explicit":
            assert self._rows is not None
            return {"kind": "explicit", "size": self.size, "rows": [list(r) for r in self._rows]}
        return {"kind": self.kind}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def renewal() -> TransitionMatrix:
    """A(1,n) = A(n+1,n) = 1: full first row plus descent by one."""
    return TransitionMatrix("renewal")


def pair_renewal() -> TransitionMatrix:
    """A(1,n) = A(2,2n) = A(n+1,n) = 1."""
    return TransitionMatrix("pair_renewal")


def prime_renewal(prime_bound: int = 7) -> TransitionMatrix:
    """A(1,n) = A(n+1,n) = A(p, p^n) = 1 for primes p.

    The accumulation-column catalog is countably infinite; only columns for
    primes up to ``prime_bound`` are materialized.
    """
    if prime_bound < 2:
        raise ValueError("prime_bound must be >= 2")
    return TransitionMatrix("prime_renewal", prime_bound=prime_bound)


def alternating_renewal() -> TransitionMatrix:
    """A(1,2n) = A(2,2n-1) = A(n+1,n) = 1."""
    return TransitionMatrix("alternating_renewal")


def full_shift(size: int) -> TransitionMatrix:
    """Finite full shift: all transitions allowed on {1..size}."""
    if size < 1:
        raise ValueError("size must be >= 1")
    rows = tuple(tuple(1 for _ in range(size)) for _ in range(size))
    return TransitionMatrix("full_shift", rows=rows)


def explicit(rows: Sequence[Sequence[int]]) -> TransitionMatrix:
    """Finite matrix with the given dense 0/1 rows (no accumulation columns)."""
    return TransitionMatrix("explicit", rows=tuple(tuple(r) for r in rows))


def from_dict(d: dict) -> TransitionMatrix:
    kind = d["kind"]
    if kind == "renewal":
        return renewal()
    if kind == "pair_renewal":
        return pair_renewal()
    if kind == "prime_renewal":
        return prime_renewal(d.get("prime_bound", 7))
    if kind == "alternating_renewal":
        return alternating_renewal()
    if kind == "full_shift":
        return full_shift(d["size"])
    if kind == "explicit":
        return explicit(d["rows"])
    raise ValueError(f"unknown matrix kind {kind!r}")


def from_json(text: str) -> TransitionMatrix:
    return from_dict(json.loads(text))


@lru_cache(maxsize=None)
def by_kind(kind: str, prime_bound: int = 7) -> TransitionMatrix:
    """Shared instance of a built-in kind, for CLI and tests."""
    if kind == "prime_renewal":
        return prime_renewal(prime_bound)
    return from_dict({"kind": kind})

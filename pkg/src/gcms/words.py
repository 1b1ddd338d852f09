"""Word combinatorics over a transition matrix.

Words are tuples of positive integers; the empty word is ``()``.
Enumeration runs backward along the (finite) column supports, so on the
built-in matrix kinds it is exact: the ``symbol_bound`` argument only
filters the result, and each result records whether the filter removed
anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from .matrices import Symbol, TransitionMatrix

Word = tuple[Symbol, ...]

EMPTY: Word = ()


def word(text: str) -> Word:
    """Parse a dot-separated word literal, e.g. ``"3.2.1"``; "" is empty."""
    text = text.strip()
    if not text:
        return ()
    return tuple(int(part) for part in text.split("."))


def format_word(w: Word) -> str:
    return ".".join(str(s) for s in w) if w else "e"


def is_admissible(A: TransitionMatrix, w: Word) -> bool:
    """True iff every consecutive transition is allowed; length <= 1 is admissible."""
    return all(A.entry(w[i], w[i + 1]) == 1 for i in range(len(w) - 1))


def is_prefix(p: Word, w: Word) -> bool:
    return len(p) <= len(w) and w[: len(p)] == p


def forced_extension(A: TransitionMatrix, w: Word) -> Word:
    """Extend ``w`` while its last symbol has a single allowed successor.

    Cylinders on ``w`` and on its forced extension contain exactly the same
    configurations, so the extension is the canonical representative.
    """
    if not w:
        return w
    out = list(w)
    while True:
        shape, support = A.row_structure(out[-1])
        if shape == "finite" and len(support) == 1:
            (nxt,) = support
            out.append(nxt)
        else:
            break
        if len(out) > len(w) + 10_000:  # pragma: no cover - guards malformed matrices
            raise RuntimeError("runaway forced extension")
    return tuple(out)


@dataclass
class Enumeration:
    """Enumeration output plus its completeness certificate."""

    words: list[Word]
    complete: bool
    dropped: int = 0

    def __iter__(self) -> Iterator[Word]:
        return iter(self.words)

    def __len__(self) -> int:
        return len(self.words)


def backward_words(A: TransitionMatrix, n: int, seeds: Iterable[Symbol],
                    keep: Callable[[Symbol], bool] | None = None) -> Iterator[Word]:
    """All admissible words of length n whose last symbol is in ``seeds``.

    Walks column supports right to left; ``keep`` prunes intermediate and
    first symbols (not the seed position).
    """
    if n == 0:
        yield ()
        return
    stack: list[tuple[Word, int]] = [((s,), 1) for s in sorted(seeds, reverse=True)]
    while stack:
        suffix, length = stack.pop()
        if length == n:
            yield suffix
            continue
        for p in sorted(A.predecessors(suffix[0]), reverse=True):
            if keep is not None and not keep(p):
                continue
            stack.append(((p,) + suffix, length + 1))


def enumerate_words(A: TransitionMatrix, n: int, last_in: Iterable[Symbol],
                    symbol_bound: Symbol) -> Enumeration:
    """Admissible words of length n over symbols <= symbol_bound ending in ``last_in``.

    Output is in lexicographic order and duplicate-free.  The enumeration
    itself is exact; words containing symbols above the bound are dropped
    and counted, clearing the ``complete`` flag.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    seeds = sorted(set(last_in))
    if n == 0:
        return Enumeration([()], True)
    kept: list[Word] = []
    dropped = 0
    total_seeds = [s for s in seeds if s <= symbol_bound]
    dropped += len(seeds) - len(total_seeds)
    for w in backward_words(A, n, total_seeds):
        if all(s <= symbol_bound for s in w):
            kept.append(w)
        else:
            dropped += 1
    kept.sort()
    return Enumeration(kept, dropped == 0, dropped)


def enumerate_words_with_suffix(A: TransitionMatrix, n: int, suffix: Word) -> Enumeration:
    """Admissible words of length n whose last ``len(suffix)`` symbols equal ``suffix``."""
    if n < len(suffix):
        return Enumeration([], True)
    if not is_admissible(A, suffix):
        return Enumeration([], True)
    if n == len(suffix):
        return Enumeration([suffix], True)
    out: list[Word] = []
    for head in backward_words(A, n - len(suffix), A.predecessors(suffix[0])):
        out.append(head + suffix)
    out.sort()
    return Enumeration(out, True)


def iter_cycles(A: TransitionMatrix, n: int, through: Symbol,
                first_return: bool = False) -> Iterator[Word]:
    """Admissible cycles w of length n with w[0] = through and A(w[-1], w[0]) = 1.

    With ``first_return`` the symbol ``through`` may not reappear inside the
    cycle.  Exact (no truncation) on every supported kind.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        if A.entry(through, through) == 1:
            yield (through,)
        return
    seeds = [s for s in A.predecessors(through) if not (first_return and s == through)]
    for tail in backward_words(A, n - 1, seeds,
                                keep=(lambda s: s != through) if first_return else None):
        if A.entry(through, tail[0]) == 1:
            yield (through,) + tail


def enumerate_cycles(A: TransitionMatrix, n: int, through: Symbol,
                     symbol_bound: Symbol) -> Enumeration:
    """Cycles of length n through ``through``, filtered to symbols <= symbol_bound.

    For the renewal matrix with ``through=1`` any bound >= n keeps everything:
    a return to 1 from symbol s takes exactly s steps.
    """
    kept: list[Word] = []
    dropped = 0
    for w in iter_cycles(A, n, through):
        if all(s <= symbol_bound for s in w):
            kept.append(w)
        else:
            dropped += 1
    kept.sort()
    return Enumeration(kept, dropped == 0, dropped)


@dataclass
class TransitivityReport:
    verdict: str  # "confirmed" | "inconclusive"
    failing_pair: tuple[Symbol, Symbol] | None = None
    note: str = ""


def check_transitive(A: TransitionMatrix, bound: Symbol, path_len: int = 0) -> TransitivityReport:
    """Search connecting words i -> j for all pairs i, j <= bound.

    Built-in kinds are transitive by construction and short-circuit to
    "confirmed".  For finite matrices a BFS over paths of length up to
    ``path_len`` (default: matrix size + bound) either confirms or reports
    the first unconnected pair as inconclusive.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    if A.kind in ("renewal", "pair_renewal", "prime_renewal", "alternating_renewal"):
        return TransitivityReport("confirmed", note="rule-defined family, transitive by construction")
    size = A.size or bound
    limit = path_len if path_len >= 1 else size + bound
    top = min(bound, size)
    for i in range(1, top + 1):
        # reachable sets by BFS, up to `limit` edges beyond the first step
        reach: set[Symbol] = set()
        frontier = {j for j in range(1, size + 1) if A.entry(i, j) == 1}
        steps = 0
        while frontier and steps <= limit:
            reach |= frontier
            frontier = {k for j in frontier for k in range(1, size + 1)
                        if A.entry(j, k) == 1} - reach
            steps += 1
        for j in range(1, top + 1):
            if j not in reach:
                return TransitivityReport("inconclusive", failing_pair=(i, j),
                                          note=f"no path {i} -> {j} within {limit} steps")
    return TransitivityReport("confirmed")

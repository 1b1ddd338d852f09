"""Brute-force oracles and verification suites.

The cylinder algebra is verified against raw membership: a configuration
belongs to a cylinder iff its evaluation at the defining group word is 1.
The oracle enumerates every boundary configuration up to a stem length
plus a batch of eventually periodic points, precomputes raw membership of
every subbasis element as a boolean vector, and then checks each pairwise
intersection both for pointwise agreement and for disjointness of the
normalized parts (membership multiplicity at most one).

The counting, conformality, and pressure suites used by the command line
and the acceptance tests live here as plain functions returning report
dictionaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from . import measures as ms
from . import symbolsets as sset
from . import thermo as th
from .configs import (BoundedConfig, Configuration, UnboundedConfig, count_preimages_closed_form,
                      empty_stem_config, preimages, IntegerInterval)
from .cylinders import (Cyl, CylC, InvCyl, InvCylC, SetExpr, SubbasisElem, decompose,
                        meet, raw_member)
from .matrices import Symbol, TransitionMatrix
from .words import Word, enumerate_words, iter_cycles


# --------------------------------------------------------------------------
# configuration universes
# --------------------------------------------------------------------------

@dataclass
class ConfigUniverse:
    matrix: TransitionMatrix
    configs: list[Configuration]
    depth: int
    sym_at: np.ndarray        # (n, depth) symbols, 0-padded
    length: np.ndarray        # stem length; depth+1 marks unbounded
    root_id: np.ndarray       # 0 for unbounded
    index_of_point: dict[tuple[Word, int], int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.configs)


def all_bounded_configs(A: TransitionMatrix, stem_len: int, sym_bound: Symbol) -> list[BoundedConfig]:
    """Every boundary configuration with stem length and symbols bounded."""
    out: list[BoundedConfig] = []
    for col in A.accumulation_catalog:
        out.append(BoundedConfig(A, (), col))
        for n in range(1, stem_len + 1):
            for w in enumerate_words(A, n, col.allowed_terminal_symbols, sym_bound).words:
                out.append(BoundedConfig(A, w, col))
    return out


def periodic_points(A: TransitionMatrix, count: int, max_period: int = 5,
                    max_symbol: Symbol = 6) -> list[UnboundedConfig]:
    """A deterministic batch of eventually periodic sequence points."""
    out: list[UnboundedConfig] = []
    seen: set[tuple[Word, Word]] = set()

    def push(pre: Word, per: Word) -> None:
        try:
            cfg = UnboundedConfig(A, pre, per)
        except ValueError:
            return
        key = (cfg.preperiod, cfg.period)
        if key not in seen:
            seen.add(key)
            out.append(cfg)

    for n in range(1, max_period + 1):
        for through in range(1, 4):
            for cyc in iter_cycles(A, n, through):
                if any(s > max_symbol for s in cyc):
                    continue
                push((), cyc)
                for p in A.predecessors(cyc[0]):
                    if p <= max_symbol:
                        push((p,), cyc)
                if len(out) >= 3 * count:
                    break
    return out[:count]


def build_universe(A: TransitionMatrix, stem_len: int, sym_bound: Symbol,
                   n_periodic: int, depth: int | None = None) -> ConfigUniverse:
    configs: list[Configuration] = list(all_bounded_configs(A, stem_len, sym_bound))
    configs.extend(periodic_points(A, n_periodic))
    depth = depth if depth is not None else stem_len + 6
    n = len(configs)
    sym_at = np.zeros((n, depth), dtype=np.int64)
    length = np.zeros(n, dtype=np.int64)
    root_id = np.zeros(n, dtype=np.int64)
    index_of_point: dict[tuple[Word, int], int] = {}
    for i, c in enumerate(configs):
        if isinstance(c, BoundedConfig):
            length[i] = len(c.stem)
            root_id[i] = c.root.id
            for k, s in enumerate(c.stem[:depth]):
                sym_at[i, k] = s
            index_of_point[(c.stem, c.root.id)] = i
        else:
            length[i] = depth + 1
            for k in range(depth):
                sym_at[i, k] = c.symbol_at(k)
    return ConfigUniverse(A, configs, depth, sym_at, length, root_id, index_of_point)


def _prefix_vec(u: ConfigUniverse, w: Word) -> np.ndarray:
    if not w:
        return np.ones(len(u), dtype=bool)
    if len(w) > u.depth:
        raise ValueError("universe depth too small for this prefix")
    v = np.ones(len(u), dtype=bool)
    for k, s in enumerate(w):
        v &= u.sym_at[:, k] == s
    return v


def setexpr_count_vec(u: ConfigUniverse, s: SetExpr) -> np.ndarray:
    """Membership multiplicity of every universe configuration in ``s``."""
    n = len(u)
    if s.whole_space:
        return np.ones(n, dtype=np.int64)
    counts = np.zeros(n, dtype=np.int64)
    for p in s.points:
        idx = u.index_of_point.get((p.stem, p.root.id))
        if idx is not None:
            counts[idx] += 1
    for a in s.atoms:
        counts += _prefix_vec(u, a)
    A = u.matrix
    for f in s.families:
        base = _prefix_vec(u, f.prefix)
        pos = len(f.prefix)
        nxt = u.sym_at[:, pos]
        vals = np.unique(nxt[base])
        allowed = np.array([v for v in vals if v >= 1 and sset.contains(A, f.symbols, int(v))])
        if allowed.size:
            counts += base & np.isin(nxt, allowed)
    return counts


# --------------------------------------------------------------------------
# the cylinder intersection oracle
# --------------------------------------------------------------------------

@dataclass
class OracleReport:
    matrix_kind: str
    n_elems: int
    n_pairs: int
    n_configs: int
    mismatches: list[str]
    seconds: float

    @property
    def ok(self) -> bool:
        return not self.mismatches


def subbasis_elements(A: TransitionMatrix, word_len: int, sym_bound: Symbol,
                      inv_bound: Symbol) -> list[SubbasisElem]:
    """All four element shapes over admissible words up to the bounds,
    including the empty word."""
    words: list[Word] = [()]
    for n in range(1, word_len + 1):
        for last in range(1, sym_bound + 1):
            words.extend(enumerate_words(A, n, {last}, sym_bound).words)
    elems: list[SubbasisElem] = []
    for w in words:
        elems.append(Cyl(A, w))
        elems.append(CylC(A, w))
        for j in range(1, inv_bound + 1):
            elems.append(InvCyl(A, w, j))
            elems.append(InvCylC(A, w, j))
    return elems


def cylinder_oracle(A: TransitionMatrix, word_len: int = 3, sym_bound: Symbol = 4,
                    inv_bound: Symbol = 4, stem_len: int = 5, universe_syms: Symbol = 6,
                    n_periodic: int = 50, max_report: int = 5) -> OracleReport:
    """Exhaustively verify pairwise intersections against raw membership."""
    import time
    t0 = time.time()
    u = build_universe(A, stem_len, universe_syms, n_periodic)
    elems = subbasis_elements(A, word_len, sym_bound, inv_bound)
    raw = np.zeros((len(elems), len(u)), dtype=bool)
    for i, e in enumerate(elems):
        raw[i] = [raw_member(c, e) for c in u.configs]
    decomposed = [decompose(e) for e in elems]
    # sanity: each element alone matches its normal form
    mismatches: list[str] = []
    for i, e in enumerate(elems):
        counts = setexpr_count_vec(u, decomposed[i])
        if (counts > 1).any() or ((counts == 1) != raw[i]).any():
            mismatches.append(f"decompose({e!r}) disagrees with raw membership")
            if len(mismatches) >= max_report:
                break
    n_pairs = 0
    if not mismatches:
        for i, j in combinations_with_replacement(range(len(elems)), 2):
            n_pairs += 1
            expr = meet(decomposed[i], decomposed[j])
            counts = setexpr_count_vec(u, expr)
            expected = raw[i] & raw[j]
            if (counts > 1).any():
                k = int(np.argmax(counts > 1))
                mismatches.append(
                    f"{elems[i]!r} & {elems[j]!r}: config {u.configs[k]!r} covered "
                    f"{int(counts[k])} times")
            elif ((counts == 1) != expected).any():
                k = int(np.argmax((counts == 1) != expected))
                mismatches.append(
                    f"{elems[i]!r} & {elems[j]!r}: config {u.configs[k]!r} "
                    f"raw={bool(expected[k])} normalized={bool(counts[k] == 1)}")
            if len(mismatches) >= max_report:
                break
    return OracleReport(A.kind, len(elems), n_pairs, len(u), mismatches,
                        time.time() - t0)


def whole_space_cover_check(A: TransitionMatrix, stem_len: int = 4,
                            sym_bound: Symbol = 5, n_periodic: int = 25) -> bool:
    """Every configuration is covered exactly once by the empty-stem points
    plus the single-letter cylinders."""
    from .cylinders import CylFamily, normalize
    u = build_universe(A, stem_len, sym_bound, n_periodic)
    points = [empty_stem_config(A, col.id) for col in A.accumulation_catalog]
    expr = normalize(A, points=points,
                     families=[CylFamily((), sset.all_except(set()))])
    counts = setexpr_count_vec(u, expr)
    return bool((counts == 1).all())


# --------------------------------------------------------------------------
# counting suite
# --------------------------------------------------------------------------

@dataclass
class CountRow:
    n: int
    enumerated: int
    closed_form: str
    match: bool


def counting_suite(A: TransitionMatrix, family_id: int, n_max: int) -> list[CountRow]:
    """Enumerated generation sizes against the closed forms or bounds."""
    base = empty_stem_config(A, family_id)
    rows: list[CountRow] = []
    for n in range(1, n_max + 1):
        got = len(preimages(base, n))
        want = count_preimages_closed_form(A, family_id, n)
        if isinstance(want, IntegerInterval):
            rows.append(CountRow(n, got, f"[{want.lower}, {want.upper}]", got in want))
        else:
            rows.append(CountRow(n, got, str(want), got == want))
    return rows


# --------------------------------------------------------------------------
# conformality suite
# --------------------------------------------------------------------------

def cylinder_words_up_to(A: TransitionMatrix, max_len: int, sym_bound: Symbol) -> list[Word]:
    out: list[Word] = []
    for n in range(1, max_len + 1):
        for last in range(1, sym_bound + 1):
            out.extend(enumerate_words(A, n, {last}, sym_bound).words)
    return sorted(set(out))


def conformality_suite(A: TransitionMatrix, beta: float, max_len: int = 6,
                       sym_bound: Symbol = 7) -> dict[str, float]:
    """Worst conformality residual per measure available on this matrix."""
    cyls = cylinder_words_up_to(A, max_len, sym_bound)
    out: dict[str, float] = {}
    if A.kind == "renewal":
        nu = ms.sarig_measure_renewal(A)
        out["sarig_renewal_const"] = ms.verify_conformality(
            nu, cyls, weight=th.Constant(-1.0), beta=beta,
            lam=2.0 * math.exp(-beta)).max_residual
        if beta > math.log(2.0):
            out["y_family"] = ms.verify_conformality(
                ms.y_measure(A, 1, th.Constant(1.0), beta), cyls).max_residual
        out["log_eigenmeasure"] = ms.verify_conformality(
            ms.log_eigenmeasure(beta if beta > 1.0 else 1.3, A), cyls).max_residual
    elif A.kind == "pair_renewal":
        out["pair_critical"] = ms.verify_conformality(
            ms.pair_renewal_critical_measure(A), cyls).max_residual
        if beta > math.log(1.0 + math.sqrt(2.0)):
            for fam in (1, 2):
                mu = ms.y_measure(A, fam, th.Constant(1.0), beta)
                out[f"y_family_{fam}"] = ms.verify_conformality(mu, cyls).max_residual
    else:
        raise ms.MeasureError(f"no measure constructions for kind {A.kind}")
    return out


# --------------------------------------------------------------------------
# pressure suite
# --------------------------------------------------------------------------

def pressure_identity_rows(A: TransitionMatrix, beta: float, n_max: int = 20
                           ) -> list[tuple[int, float, float]]:
    """(n, (1/n) log Z_n for the constant potential -1, closed form)."""
    rows = []
    for n in range(1, n_max + 1):
        z = th.z_n(A, th.Constant(-1.0), beta, 1, n)
        lhs = math.log(z.value) / n
        rhs = math.log(2.0) - beta - math.log(2.0) / n
        rows.append((n, lhs, rhs))
    return rows


def first_return_rows(A: TransitionMatrix, beta: float, n_max: int = 14
                      ) -> list[tuple[int, float, float]]:
    """(n, Z*_n for the log-ratio potential, (n+1)^-beta)."""
    return [(n, th.z_n_star(A, th.LogRatio(), beta, 1, n).value, (n + 1.0) ** (-beta))
            for n in range(1, n_max + 1)]


def pressure_suite(A: TransitionMatrix, beta: float = 0.7) -> dict[str, float]:
    if A.kind != "renewal":
        raise ValueError("the pressure identities are specific to the renewal matrix")
    worst_id = max(abs(l - r) for _, l, r in pressure_identity_rows(A, beta))
    worst_star = max(abs(l - r) / r for _, l, r in first_return_rows(A, 2.0))
    th.superadditivity_check(A, th.Constant(1.0), beta, 1, 16)
    numerator = th.z_n_transfer(A, th.LogRatio(), 1.0, 1, 8, 10)
    direct = th.z_n(A, th.LogRatio(), 1.0, 1, 8).value
    return {
        "pressure_identity_max_residual": worst_id,
        "first_return_max_rel_residual": worst_star,
        "transfer_cross_check": abs(numerator - direct) / direct,
    }

"""Potentials, partition functions, pressures, and the discriminant.

Potentials depend on the first coordinate only, so all higher variations
vanish and the super-additivity of partition functions holds without a
correction constant.  Partition functions are computed by exact backward
enumeration of cycles (column supports are finite on every built-in
matrix); series with infinite tails carry explicit certificates, either a
geometric ratio bound or an Euler-Maclaurin remainder bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .configs import BoundedConfig, Configuration
from .matrices import Symbol, TransitionMatrix
from .words import Word, backward_words, enumerate_words, enumerate_words_with_suffix, iter_cycles


# --------------------------------------------------------------------------
# potentials
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    """F(x) = c."""

    c: float = 1.0

    def value(self, s: Symbol) -> float:
        return self.c

    @property
    def sup(self) -> float:
        return self.c

    @property
    def inf(self) -> float:
        return self.c

    def __repr__(self) -> str:
        return f"Constant({self.c})"


@dataclass(frozen=True)
class LogRatio:
    """F(x) = log(x0) - log(x0 + 1); increasing in x0 with supremum 0."""

    def value(self, s: Symbol) -> float:
        return math.log(s) - math.log(s + 1)

    @property
    def sup(self) -> float:
        return 0.0  # limit value, not attained

    @property
    def inf(self) -> float:
        return math.log(1.0) - math.log(2.0)

    def __repr__(self) -> str:
        return "LogRatio()"


@dataclass(frozen=True)
class GDiff:
    """F(x) = g(x0) - g(x0 + 1) for a user-supplied g.

    ``sup_value`` must be declared when known (for increasing concave g it
    is the limit of the differences); it feeds the pressure upper bound.
    """

    g: Callable[[Symbol], float]
    name: str = "g"
    sup_value: float | None = None

    def value(self, s: Symbol) -> float:
        return self.g(s) - self.g(s + 1)

    @property
    def sup(self) -> float:
        if self.sup_value is None:
            raise ValueError("sup of a GDiff potential must be declared")
        return self.sup_value

    def __repr__(self) -> str:
        return f"GDiff({self.name})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GDiff) and self.name == other.name

    def __hash__(self) -> int:
        return hash(("GDiff", self.name))


Potential = Constant | LogRatio | GDiff

LOG_POTENTIAL = GDiff(math.log, "log", sup_value=0.0)


def birkhoff_sum(F: Potential, beta: float, w: Word) -> float:
    """beta times the sum of F over the letters of ``w``."""
    if not w:
        raise ValueError("Birkhoff sum of the empty word")
    return beta * math.fsum(F.value(s) for s in w)


# --------------------------------------------------------------------------
# partition functions
# --------------------------------------------------------------------------

@dataclass
class ZValue:
    value: float
    n_terms: int
    exact: bool

    def __float__(self) -> float:
        return self.value


def _cycle_sum(A: TransitionMatrix, F: Potential, beta: float, base: Symbol, n: int,
               symbol_bound: Symbol | None, first_return: bool) -> ZValue:
    terms: list[float] = []
    dropped = 0
    for w in iter_cycles(A, n, base, first_return=first_return):
        if symbol_bound is not None and any(s > symbol_bound for s in w):
            dropped += 1
            continue
        terms.append(math.exp(birkhoff_sum(F, beta, w)))
    return ZValue(math.fsum(terms), len(terms), dropped == 0)


def z_n(A: TransitionMatrix, F: Potential, beta: float, base: Symbol, n: int,
        symbol_bound: Symbol | None = None) -> ZValue:
    """Partition function over length-n cycles through ``base``.

    Exact whenever ``symbol_bound`` is omitted (backward enumeration over
    column supports is complete); a bound only filters terms out and then
    clears the ``exact`` flag.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return _cycle_sum(A, F, beta, base, n, symbol_bound, first_return=False)


def z_n_star(A: TransitionMatrix, F: Potential, beta: float, base: Symbol, n: int,
             symbol_bound: Symbol | None = None) -> ZValue:
    """Partition function restricted to cycles whose first return is exactly n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _cycle_sum(A, F, beta, base, n, symbol_bound, first_return=True)


def z_n_transfer(A: TransitionMatrix, F: Potential, beta: float, base: Symbol, n: int,
                 symbol_bound: Symbol) -> float:
    """Independent evaluation of z_n via weighted transfer-matrix powers."""
    B = symbol_bound
    W = np.zeros((B, B))
    weights = [math.exp(beta * F.value(i)) for i in range(1, B + 1)]
    for i in range(1, B + 1):
        for j in range(1, B + 1):
            if A.entry(i, j) == 1:
                W[i - 1, j - 1] = weights[i - 1]
    return float(np.linalg.matrix_power(W, n)[base - 1, base - 1])


def pointwise_z(A: TransitionMatrix, F: Potential, beta: float, x: Configuration,
                n: int, symbol_bound: Symbol | None = None) -> ZValue:
    """Weighted count of the n-step shift preimages of the point ``x``.

    A preimage prepends a length-n admissible head to ``x``; for a
    boundary point with empty stem the head itself must end in one of the
    root's terminal letters.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(x, BoundedConfig) and not x.stem:
        # heads become the whole stem, so they must end in a terminal letter
        seeds: tuple[Symbol, ...] = tuple(sorted(x.root.allowed_terminal_symbols))
    elif isinstance(x, BoundedConfig):
        seeds = A.predecessors(x.stem[0])
    else:
        seeds = A.predecessors(x.symbol_at(0))
    terms: list[float] = []
    dropped = 0
    for head in backward_words(A, n, seeds):
        if symbol_bound is not None and any(s > symbol_bound for s in head):
            dropped += 1
            continue
        terms.append(math.exp(birkhoff_sum(F, beta, head)))
    return ZValue(math.fsum(terms), len(terms), dropped == 0)


def superadditivity_check(A: TransitionMatrix, F: Potential, beta: float, base: Symbol,
                          n_max: int) -> list[tuple[int, int, float, float]]:
    """Verify Z_n * Z_m <= Z_{n+m} for all n + m <= n_max.

    Returns the checked quadruples (n, m, product, bound); raises on the
    first counterexample.  First-coordinate potentials have vanishing
    variations, so the inequality carries no slack constant.
    """
    zs = {n: z_n(A, F, beta, base, n).value for n in range(1, n_max + 1)}
    rows = []
    for n in range(1, n_max):
        for m in range(1, n_max - n + 1):
            lhs, rhs = zs[n] * zs[m], zs[n + m]
            if lhs > rhs * (1 + 1e-12):
                raise AssertionError(f"superadditivity fails at n={n}, m={m}: {lhs} > {rhs}")
            rows.append((n, m, lhs, rhs))
    return rows


# --------------------------------------------------------------------------
# Gurevich pressure
# --------------------------------------------------------------------------

@dataclass
class PressureEstimate:
    beta: float
    values: list[tuple[int, float]]        # (n, (1/n) log Z_n)
    extrapolated: float
    certificate: str                       # "exact" | "limit"


def gurevich_pressure(A: TransitionMatrix, F: Potential, beta: float, base: Symbol = 1,
                      n_max: int = 10) -> PressureEstimate:
    """Finite-n pressure data plus an extrapolation.

    The certificate is "exact" when a closed form pins the limit: the
    renewal matrix with a constant potential gives log 2 + beta*c, and with
    the log-ratio potential the root of the normalization series.
    """
    if n_max < 4:
        raise ValueError("n_max must be >= 4")
    logs: list[float] = []
    values: list[tuple[int, float]] = []
    for n in range(1, n_max + 1):
        z = z_n(A, F, beta, base, n)
        if z.value <= 0.0:
            logs.append(-math.inf)
            values.append((n, -math.inf))
            continue
        logs.append(math.log(z.value))
        values.append((n, logs[-1] / n))
    if A.kind == "renewal" and base == 1 and isinstance(F, Constant):
        return PressureEstimate(beta, values, math.log(2.0) + beta * F.c, "exact")
    if A.kind == "renewal" and base == 1 and isinstance(F, LogRatio):
        return PressureEstimate(beta, values, pressure_log_potential(beta), "exact")
    finite = [v for v in logs if math.isfinite(v)]
    extrap = finite[-1] - finite[-2] if len(finite) >= 2 else values[-1][1]
    return PressureEstimate(beta, values, extrap, "limit")


# --------------------------------------------------------------------------
# zeta and power-sum tails (Euler-Maclaurin with a remainder certificate)
# --------------------------------------------------------------------------

class DomainError(ValueError):
    pass


_BERNOULLI = [1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6]
_FACT = [math.factorial(2 * (k + 1)) for k in range(len(_BERNOULLI))]


def _em_tail(beta: float, N: int, terms: int = 6) -> tuple[float, float]:
    """(sum over n >= N of n^-beta, remainder bound), anchored at N.

    For real exponents the remainder after the k-th Bernoulli correction is
    bounded by the magnitude of the first omitted correction.
    """
    tail = N ** (1.0 - beta) / (beta - 1.0) + 0.5 * N ** (-beta)
    rising = beta
    corr = 0.0
    for k in range(terms):
        corr += _BERNOULLI[k] / _FACT[k] * rising * N ** (-beta - 2 * k - 1)
        rising *= (beta + 2 * k + 1) * (beta + 2 * k + 2)
    bound = abs(_BERNOULLI[terms] / _FACT[terms]) * rising * N ** (-beta - 2 * terms - 1)
    return tail + corr, bound


def power_sum_tail(beta: float, start: int, tol: float = 1e-14) -> float:
    """sum over n >= start of n^-beta, remainder certified below ``tol``."""
    if beta <= 1.0 + 1e-9:
        raise DomainError("power sums require beta > 1")
    N = max(start, 16)
    while True:
        tail, bound = _em_tail(beta, N)
        if bound <= tol:
            break
        N *= 2
        if N > 1 << 26:  # pragma: no cover - certificate failed to tighten
            raise RuntimeError("power-sum tail certificate did not reach tolerance")
    head = math.fsum(n ** (-beta) for n in range(start, N))
    return head + tail


def zeta(beta: float, tol: float = 1e-13) -> float:
    """Riemann zeta on (1, inf), absolute error below ``tol``."""
    if beta <= 1.0 + 1e-9:
        raise DomainError("zeta(beta) requires beta > 1")
    return power_sum_tail(beta, 1, tol)


def critical_beta_log(tol: float = 1e-13) -> float:
    """The inverse temperature where zeta equals 2 (about 1.72865)."""
    lo, hi = 1.1, 3.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if zeta(mid) > 2.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


# --------------------------------------------------------------------------
# discriminant and recurrence classification for the log-ratio potential
# --------------------------------------------------------------------------

@dataclass
class DiscriminantResult:
    beta: float
    divergent: bool
    series_value: float
    closed_form: float
    radius_estimate: float

    @property
    def delta(self) -> float:
        return math.inf if self.divergent else self.series_value


def _extrapolate_at_zero(hs: Sequence[float], values: Sequence[float]) -> float:
    """Neville polynomial extrapolation of values(h) to h = 0."""
    tab = list(values)
    m = len(tab)
    for level in range(1, m):
        nxt = []
        for i in range(m - level):
            nxt.append((hs[i] * tab[i + 1] - hs[i + level] * tab[i])
                       / (hs[i] - hs[i + level]))
        tab = nxt
    return tab[0]


def discriminant_log(beta: float, head: int = 14) -> DiscriminantResult:
    """Discriminant of the renewal log-ratio potential, two ways.

    The head of the first-return series comes from enumerated cycles; the
    convergence radius is extrapolated from their successive ratios (the
    exact limit is 1 and the extrapolation certifies it); the tail follows
    the verified head pattern and is summed under the Euler-Maclaurin
    certificate.  The closed form is log(zeta(beta) - 1).  For beta <= 1
    the series diverges and the discriminant is +infinity.
    """
    from .matrices import by_kind
    A = by_kind("renewal")
    F = LogRatio()
    if beta <= 1.0:
        return DiscriminantResult(beta, True, math.inf, math.inf, 1.0)
    zs = [z_n_star(A, F, beta, 1, k).value for k in range(1, head + 1)]
    for k, z in enumerate(zs, start=1):
        expected = (k + 1.0) ** (-beta)
        if abs(z - expected) > 1e-9 * expected:  # pragma: no cover
            raise RuntimeError("first-return head does not match the power pattern")
    ks = list(range(5, head))
    hs = [1.0 / k for k in ks]
    log_ratios = [math.log(zs[k - 1] / zs[k]) for k in ks]
    radius = math.exp(_extrapolate_at_zero(hs, log_ratios))
    # the verified head pattern already pins the radius at exactly 1; the
    # extrapolation is a numeric confirmation with a ~1e-7 noise floor
    if abs(radius - 1.0) > 1e-6:  # pragma: no cover
        raise RuntimeError(f"radius extrapolation {radius} is not 1")
    head_sum = math.fsum(zs)  # radius 1, so the head weights are exactly 1
    tail = power_sum_tail(beta, head + 2)
    return DiscriminantResult(beta, False, math.log(head_sum + tail),
                              math.log(zeta(beta) - 1.0), radius)


@dataclass
class RecurrenceVerdict:
    kind: str   # "positive_recurrent" | "null_recurrent_or_boundary" | "transient"
    delta: float


def classify_recurrence_log(beta: float, tol: float = 1e-8) -> RecurrenceVerdict:
    """Sign of the discriminant classifies the renewal log-ratio potential."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if beta <= 1.0:
        return RecurrenceVerdict("positive_recurrent", math.inf)
    d = discriminant_log(beta).closed_form
    if d > tol:
        return RecurrenceVerdict("positive_recurrent", d)
    if d < -tol:
        return RecurrenceVerdict("transient", d)
    return RecurrenceVerdict("null_recurrent_or_boundary", d)


# --------------------------------------------------------------------------
# pressure of the log-ratio potential
# --------------------------------------------------------------------------

def normalization_series(beta: float, lam: float, tol: float = 1e-15) -> float:
    """Phi(lam) = sum over n >= 1 of lam^-n (n+1)^-beta, for lam > 1.

    Truncated where the geometric tail bound drops below ``tol``; summed in
    numpy chunks because lam near 1 needs millions of terms.
    """
    if lam <= 1.0:
        raise ValueError("the geometric certificate needs lam > 1")
    log_lam = math.log(lam)
    n_needed = int(math.ceil((math.log(1.0 / tol)
                              - math.log1p(-1.0 / lam)) / log_lam)) + 2
    if n_needed > 1 << 28:  # pragma: no cover - outside supported range
        raise RuntimeError("normalization series needs too many terms at this lam")
    total = 0.0
    chunk = 1 << 20
    n0 = 1
    while n0 <= n_needed:
        n1 = min(n_needed, n0 + chunk - 1)
        ns = np.arange(n0, n1 + 1, dtype=np.float64)
        total += float(np.sum(np.exp(-ns * log_lam) * (ns + 1.0) ** (-beta)))
        n0 = n1 + 1
    return total


_BETA_C_CACHE: dict[str, float] = {}


def beta_c_log() -> float:
    """Cached critical inverse temperature of the log-ratio potential."""
    if "v" not in _BETA_C_CACHE:
        _BETA_C_CACHE["v"] = critical_beta_log()
    return _BETA_C_CACHE["v"]


def pressure_log_potential(beta: float, residual_tol: float = 1e-11,
                           p_tol: float = 0.0) -> float:
    """Gurevich pressure of the renewal log-ratio potential.

    Zero at and above the critical inverse temperature; below it, the log
    of the root of the normalization series, found by bisection (the
    series is strictly decreasing in lam, and the root sits inside
    (1, 2] by the pressure upper bound log 2 + beta * sup F = log 2).

    A positive ``p_tol`` allows an early exit once the bracket certifies
    the pressure to that absolute accuracy; very close to the critical
    temperature this avoids series evaluations with 1e8 terms.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if beta >= beta_c_log():
        return 0.0
    lo, hi = 1.0 + 1e-12, 2.0
    for _ in range(300):
        if p_tol > 0.0 and math.log(hi / lo) <= p_tol:
            break
        mid = 0.5 * (lo + hi)
        val = normalization_series(beta, mid)
        if abs(val - 1.0) <= 0.1 * residual_tol:
            return math.log(mid)
        if val > 1.0:
            lo = mid
        else:
            hi = mid
        if math.log(hi / lo) <= 1e-13:
            break
    return math.log(0.5 * (lo + hi))


# --------------------------------------------------------------------------
# pointwise-pressure apparatus: the two-piece partition of word sets
# --------------------------------------------------------------------------

@dataclass
class JnTnReport:
    n: int
    x_stem: Word
    j_image: list[Word]
    t_image: list[Word]
    target: list[Word]
    ok: bool
    max_transport_residual: float


def _t_map(alpha: Word, x_stem: Word) -> Word:
    a0, x0 = alpha[0], x_stem[0]
    descent = tuple(range(x0 + a0, x0, -1))
    return alpha[a0:] + descent + x_stem


def jn_tn(A: TransitionMatrix, x: BoundedConfig, n: int,
          potential: GDiff | None = None) -> JnTnReport:
    """Partition of the length n+|stem| words ending in the stem of ``x``.

    One piece glues a length-n word ending in 1 directly onto the stem;
    the other reroutes it through the descent above the stem's first
    letter.  Checks injectivity, disjointness, and exact cover.  For
    difference potentials the Birkhoff transport identity of rerouted
    words is evaluated and the worst residual reported.
    """
    if A.kind != "renewal":
        raise ValueError("the word-set partition is specific to the renewal matrix")
    if not x.stem:
        raise ValueError("x must have a non-empty stem")
    if n < 1:
        raise ValueError("n must be >= 1")
    w_n_1 = enumerate_words(A, n, {1}, symbol_bound=10 ** 9).words
    j_image = sorted(alpha + x.stem for alpha in w_n_1)
    t_image = sorted(_t_map(alpha, x.stem) for alpha in w_n_1)
    target = enumerate_words_with_suffix(A, n + len(x.stem), x.stem).words
    ok = (len(set(j_image)) == len(j_image)
          and len(set(t_image)) == len(t_image)
          and not set(j_image) & set(t_image)
          and sorted(j_image + t_image) == sorted(target))
    max_resid = 0.0
    if potential is not None:
        g = potential.g
        x0 = x.stem[0]
        for alpha in w_n_1:
            t_alpha = _t_map(alpha, x.stem)
            lhs = math.fsum(potential.value(s) for s in t_alpha[:n])
            rhs = (math.fsum(potential.value(s) for s in alpha)
                   + g(x0 + 1) - g(x0 + alpha[0] + 1) + g(alpha[0] + 1) - g(1))
            max_resid = max(max_resid, abs(lhs - rhs))
    return JnTnReport(n, x.stem, j_image, t_image, target, ok, max_resid)

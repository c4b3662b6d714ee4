"""Frobenius powers and roots, the nu and mu invariants, Fedder-type checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import kernels
from .config import DEFAULT_BUDGET, Budget
from .errors import BudgetExceeded, InputError, PreconditionError
from .groebner import IdealHandle, _minimal_monomials, echelon, minimize_generators
from .poly import Poly, _check_q, _product, format_monomial, grevlex_key, p_power_exponent, power_reduced


@dataclass(frozen=True)
class BracketPower:
    base: IdealHandle
    q: int

    def ideal(self) -> IdealHandle:
        return bracket_power(self.base, self.q)


@dataclass(frozen=True)
class NuWitness:
    q: int
    r: int
    surviving_monomial: tuple | None

    def monomial_text(self, names) -> str | None:
        if self.surviving_monomial is None:
            return None
        return format_monomial(self.surviving_monomial, names, explicit=True)


@dataclass(frozen=True)
class FedderResult:
    result: str  # "PURE" or "UNKNOWN"
    n: int | None
    witness: tuple | None
    mu: tuple = field(default=())
    note: str = ""

    @property
    def pure(self) -> bool:
        return self.result == "PURE"


@dataclass(frozen=True)
class CIReport:
    is_fpure_ci: bool
    emb_bound: int
    witness: tuple | None


def _as_ideal(a) -> IdealHandle:
    if isinstance(a, Poly):
        return IdealHandle([a], a.ring)
    return a


def bracket_power(ideal: IdealHandle, q: int) -> IdealHandle:
    """Ideal generated by the q-th powers of the generators."""
    p_power_exponent(q, ideal.ring.p)
    return ideal.with_generators([g.frobenius(q) for g in ideal.generators])


def in_bracket_m(f: Poly, q: int) -> bool:
    """Membership of ``f`` in ``(x_1^q, ..., x_n^q)``."""
    return all(max(m, default=0) >= q for m in f._terms)


# ---------------------------------------------------------------------------
# Frobenius roots


def root_generators(f: Poly, q: int) -> list[Poly]:
    """Generators of the q-th root of ``(f)``: one per exponent residue class."""
    if f.is_zero():
        return []
    exps, coefs = f.arrays()
    ids, quot, coefs = kernels.root_terms(exps, coefs, q)
    groups: dict = {}
    for gid, row, c in zip(ids.tolist(), quot.tolist(), coefs.tolist()):
        groups.setdefault(gid, {})[tuple(row)] = c
    return [Poly(f.ring, groups[k], normalized=True) for k in sorted(groups)]


def frobenius_root(ideal: IdealHandle, q: int) -> IdealHandle:
    """Smallest ideal ``J`` with ``ideal`` contained in ``J^[q]``."""
    p_power_exponent(q, ideal.ring.p)
    gens = []
    for g in ideal.generators:
        gens.extend(root_generators(g, q))
    return ideal.with_generators(minimize_generators(gens, ideal.key, ideal.ring.p))


# ---------------------------------------------------------------------------
# survival frontier: the largest r with F * a^r not inside m^[Q]


def _below(m, Q) -> bool:
    return max(m, default=0) < Q


def _monomial_frontier(start: Poly, gens: list, Q: int, need: int | None, budget: Budget):
    """Frontier over monomials, valid when ``a`` is a monomial ideal.

    No cancellation can occur between a monomial and distinct terms of F, so
    survival is decided on exponent vectors; only minimal elements matter.
    """
    level = _minimal_monomials(m for m in start._terms if _below(m, Q))
    if not level:
        return -1, None
    gmon = [next(iter(g._terms)) for g in gens]
    r = 0
    witness = level[0] if need == 0 else None
    while True:
        nxt = []
        for m in level:
            for g in gmon:
                s = tuple(a + b for a, b in zip(m, g))
                if _below(s, Q):
                    nxt.append(s)
        if not nxt:
            return r, (witness if need is not None else level[0])
        level = _minimal_monomials(nxt)
        if len(level) > budget.frontier_cap:
            raise BudgetExceeded(f"survival frontier exceeded {budget.frontier_cap} elements")
        r += 1
        if need == r:
            witness = level[0]


def _principal_frontier(start: Poly, g: Poly, Q: int, need: int | None):
    def alive(r):
        return _product(start, power_reduced(g, r, Q), Q)

    if alive(0).is_zero():
        return -1, None
    lo, hi = 0, 1
    while not alive(hi).is_zero():
        lo, hi = hi, hi * 2
        if hi > 2 * start.ring.nvars * Q:
            raise PreconditionError("generator does not vanish at the origin")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if alive(mid).is_zero():
            hi = mid
        else:
            lo = mid
    r = lo if need is None else need
    if r > lo:
        return lo, None
    witness = min(alive(r)._terms, key=grevlex_key)
    return lo, witness


def _span_frontier(start: Poly, gens: list, Q: int, need: int | None, budget: Budget):
    ring = start.ring
    p = ring.p
    level = [start.truncate(Q)]
    if level[0].is_zero():
        return -1, None
    r = 0
    witness = None
    if need == 0:
        witness = next(iter(level[0]._terms))
    while True:
        prods = []
        for v in level:
            for g in gens:
                h = _product(v, g, Q)
                if not h.is_zero():
                    prods.append(h._terms)
        rows = echelon(prods, grevlex_key, p)
        if not rows:
            top = next(iter(level[0]._terms))
            return r, (witness if need is not None else top)
        if sum(len(t) for t in rows) > budget.frontier_cap:
            raise BudgetExceeded(f"survival frontier exceeded {budget.frontier_cap} terms")
        level = [Poly(ring, t, normalized=True) for t in rows]
        r += 1
        if need == r:
            witness = next(iter(rows[0]))


@lru_cache(maxsize=512)
def _frontier(start: Poly, gens: tuple, Q: int, need: int | None, budget: Budget):
    if not gens:
        raise PreconditionError("the ideal must be nonzero")
    if any(g.is_unit() for g in gens):
        raise PreconditionError("the ideal must be proper")
    if all(g.is_monomial() for g in gens):
        return _monomial_frontier(start, list(gens), Q, need, budget)
    if len(gens) == 1:
        return _principal_frontier(start, gens[0], Q, need)
    return _span_frontier(start, list(gens), Q, need, budget)


def _proper_gens(a: IdealHandle) -> tuple:
    return tuple(minimize_generators(list(a.generators), a.key, a.ring.p))


def nu_invariant(f, q: int, budget: Budget = DEFAULT_BUDGET) -> NuWitness:
    """Largest ``r`` with ``f^r`` (or ``a^r``) outside ``m^[q]``, with a witness."""
    ideal = _as_ideal(f)
    if ideal.is_zero():
        raise PreconditionError("nu is undefined for the zero ideal")
    if any(g.is_unit() for g in ideal.generators):
        raise PreconditionError("nu is undefined for a unit")
    _check_q(ideal.generators[0], q, budget)
    r, w = _frontier(ideal.ring.one(), _proper_gens(ideal), q, None, budget)
    return NuWitness(q, r, w)


def _pair_start(f: Poly, e: int, n: int, budget: Budget):
    if f.is_zero() or f.is_unit():
        raise PreconditionError("f must be a nonzero element of the maximal ideal")
    if e < 1 or n < 1:
        raise InputError("e and n must be positive")
    q = f.ring.p**e
    Q = q**n
    _check_q(f, Q, budget)
    N = (Q - 1) // (q - 1)
    return power_reduced(f, N, Q), Q


def mu_invariant(f: Poly, e: int, a: IdealHandle, n: int, budget: Budget = DEFAULT_BUDGET) -> int:
    """Largest r with ``f^((Q-1)/(q-1)) * a^r`` outside ``m^[Q]``, ``Q = q^n``; -1 if none."""
    F, Q = _pair_start(f, e, n, budget)
    if F.is_zero():
        return -1
    return _frontier(F, _proper_gens(a), Q, None, budget)[0]


def fedder_pair_check(
    f: Poly, e: int, a: IdealHandle, t, n_max: int, budget: Budget = DEFAULT_BUDGET
) -> FedderResult:
    """Least ``n <= n_max`` with ``ceil(t (q^n - 1)) <= mu_n``, else UNKNOWN."""
    t = Fraction(t)
    if t < 0:
        raise InputError("t must be nonnegative")
    mus = []
    for n in range(1, n_max + 1):
        F, Q = _pair_start(f, e, n, budget)
        need = math.ceil(t * (Q - 1))
        if F.is_zero():
            mus.append(-1)
            continue
        mu, w = _frontier(F, _proper_gens(a), Q, need, budget)
        mus.append(mu)
        if need <= mu:
            return FedderResult("PURE", n, w, tuple(mus))
    note = (
        f"no level n <= {n_max} satisfies the criterion; the criterion is existential in n, "
        "so this does not refute purity"
    )
    return FedderResult("UNKNOWN", None, None, tuple(mus), note)


def ci_check(factors: list, p: int | None = None) -> CIReport:
    """Purity test ``(f_1...f_c)^(p-1)`` outside ``m^[p]`` and the bound ``2(n - c)``."""
    if not factors:
        raise InputError("empty factor list")
    ring = factors[0].ring
    if p is not None and p != ring.p:
        raise InputError("characteristic mismatch")
    for g in factors:
        if g.is_zero() or any(sum(m) < 2 for m in g._terms):
            raise PreconditionError(f"factor {g} is not in the square of the maximal ideal")
    prod = ring.one()
    for g in factors:
        prod = prod * g
    h = power_reduced(prod, ring.p - 1, ring.p)
    witness = None if h.is_zero() else min(h._terms, key=grevlex_key)
    return CIReport(not h.is_zero(), 2 * (ring.nvars - len(factors)), witness)

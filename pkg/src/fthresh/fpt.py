"""F-pure thresholds: certified bounds, exact values where provable, pairs.

Bounds for an ideal ``a`` with ``l`` generators at ``q = p^n``:

* lower ``nu/(q-1)``: the purity criterion holds at that exponent;
* upper ``(nu + l)/q``: ``a^(nu+1)`` lies in ``m^[q]`` and pigeonhole over
  ``l`` generators propagates this to every deeper level.

An exact value is certified when the bounds meet, when the test ideal is
already nontrivial at the lower bound, when no rational with an allowed
denominator fits between the bounds, or by locating the first jump of the
test ideal inside the bracket.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .config import DEFAULT_BUDGET, Budget
from .errors import BudgetExceeded, InputError, PairNotFPure, PreconditionError, UnstableError
from .frobenius import _frontier, _pair_start, _proper_gens, fedder_pair_check, nu_invariant
from .groebner import IdealHandle, ideal_power, minimize_generators
from .poly import Poly, grevlex_key
from .testideal import DivisorSpec, MixedExponent, candidates, jumping_numbers, test_ideal


@dataclass(frozen=True)
class FptBounds:
    lower: Fraction
    upper: Fraction
    exact: Fraction | None = None
    certificate: str | None = None
    lower_witness: dict = field(default_factory=dict)
    upper_witness: dict = field(default_factory=dict)
    levels: tuple = ()
    raw_lower: Fraction | None = None
    raw_upper: Fraction | None = None
    flags: tuple = ()

    def contains(self, t) -> bool:
        return self.lower <= Fraction(t) <= self.upper

    def decide_at_most(self, t):
        """``True`` if ``t <= fpt`` is certified, ``False`` if ``t > fpt`` is, else ``None``."""
        t = Fraction(t)
        if t <= self.lower:
            return True
        if t > self.upper:
            return False
        return None


def _as_ideal(f) -> IdealHandle:
    if isinstance(f, Poly):
        if f.is_zero() or f.is_unit():
            raise PreconditionError("f must be a nonzero element of the maximal ideal")
        return IdealHandle([f], f.ring)
    if f.is_zero() or any(g.is_unit() for g in f.generators):
        raise PreconditionError("the ideal must be nonzero and proper")
    return f


def _tau_at(ideal: IdealHandle, t: Fraction, budget: Budget):
    """Rigorous information about the test ideal at ``t``.

    Returns ``"nontrivial"``, ``"trivial"`` or ``None``.  Principal and
    monomial ideals are computed exactly.  For other ideals the root chain
    only ascends to the test ideal, so only reaching ``(1)`` is conclusive.
    """
    res = test_ideal(MixedExponent([(ideal, t)]), budget=budget)
    if res.ideal.is_unit() and res.stable:
        return "trivial"
    if res.method in ("fixed-point", "monomial"):
        return "nontrivial"
    return None


def _certify(ideal, lower, upper, p, bound, budget, div=None):
    """Try the exactness routes in order; returns ``(value, route)`` or ``(None, None)``.

    A route that runs out of budget simply does not certify.
    """
    try:
        return _certify_routes(ideal, lower, upper, p, bound, budget, div)
    except BudgetExceeded:
        return None, None


def _certify_routes(ideal, lower, upper, p, bound, budget, div):
    if lower == upper:
        return lower, "bounds-meet"
    principal = len(ideal.generators) == 1
    above_lower = False
    if div is None and lower > 0:
        state = _tau_at(ideal, lower, budget)
        if state == "nontrivial":
            return lower, "purity+test-ideal"
        # A trivial test ideal at the lower bound puts the threshold strictly above it.
        above_lower = state == "trivial"
    q = div.q if div is not None else p
    if not above_lower and not candidates(lower, upper, q, bound):
        return lower, "denominator-gap"
    if div is None and not principal:
        return None, None
    report = jumping_numbers(div, ideal, lower, upper, bound, budget=budget)
    if report.flag != "STABLE" or not report.jumps:
        return None, None
    first = report.jumps[0]
    if report.unresolved and report.unresolved[0][0] < first.t:
        return None, None
    if div is not None and first.t != lower:
        return None, None
    if lower <= first.t <= upper:
        return first.t, "test-ideal-jump"
    return None, None


def fpt_bounds(f, n_max: int | None = None, denom_bound: int | None = None, budget: Budget = DEFAULT_BUDGET) -> FptBounds:
    """Certified bracket (and exact value where possible) for ``fpt(A; a)``."""
    ideal = _as_ideal(f)
    n_max = budget.n_max if n_max is None else n_max
    bound = budget.denom_bound if denom_bound is None else denom_bound
    if n_max < 1:
        raise InputError("n_max must be positive")
    ring = ideal.ring
    p = ring.p
    l = len(_proper_gens(ideal))
    levels = []
    lower, upper = Fraction(0), Fraction(ring.nvars)
    lw, uw = {}, {}
    for n in range(1, n_max + 1):
        q = p**n
        w = nu_invariant(ideal, q, budget)
        lo, up = Fraction(w.r, q - 1), Fraction(w.r + l, q)
        levels.append({"n": n, "q": q, "nu": w.r, "lower": lo, "upper": up, "witness": w.surviving_monomial})
        if lo > lower or not lw:
            lower, lw = lo, {"q": q, "nu": w.r, "witness": w.surviving_monomial}
        if up < upper:
            upper, uw = up, {"q": q, "nu": w.r}
    lower = min(lower, upper)
    raw = (lower, upper)
    exact, route = _certify(ideal, lower, upper, p, bound, budget)
    if exact is not None:
        return FptBounds(exact, exact, exact, route, lw, uw, tuple(levels), raw[0], raw[1])
    return FptBounds(lower, upper, None, None, lw, uw, tuple(levels), raw[0], raw[1])


def fpt_pair_bounds(
    div: DivisorSpec,
    a: IdealHandle,
    n_max: int | None = None,
    denom_bound: int | None = None,
    budget: Budget = DEFAULT_BUDGET,
) -> FptBounds:
    """Bracket for ``fpt(A, div(f)/(p^e - 1); a)`` from the mu invariants."""
    n_max = budget.n_max if n_max is None else n_max
    bound = budget.denom_bound if denom_bound is None else denom_bound
    if div.multiplier != Fraction(1, div.q - 1):
        raise InputError("the divisor must be div(f)/(p^e - 1)")
    a = _as_ideal(a)
    f, e = div.f, div.e
    check = fedder_pair_check(f, e, a, 0, n_max, budget)
    if not check.pure:
        raise PairNotFPure(f"the pair is not verifiably sharply F-pure up to n = {n_max}")
    ring = f.ring
    gens = _proper_gens(a)
    l = len(gens)
    levels = []
    lower, upper = Fraction(0), Fraction(ring.nvars)
    lw, uw = {}, {"bound": "dimension", "value": ring.nvars}
    for n in range(1, n_max + 1):
        F, Q = _pair_start(f, e, n, budget)
        if F.is_zero():
            levels.append({"n": n, "Q": Q, "mu": -1})
            continue
        mu, wit = _frontier(F, gens, Q, None, budget)
        lo = Fraction(mu, Q - 1)
        up = Fraction(mu + l, Q)
        levels.append({"n": n, "Q": Q, "mu": mu, "lower": lo, "upper": up, "witness": wit})
        if lo > lower or not lw:
            lower, lw = lo, {"n": n, "Q": Q, "mu": mu, "witness": wit}
        if up < upper:
            upper, uw = up, {"n": n, "Q": Q, "mu": mu}
    upper = max(upper, lower)
    raw = (lower, upper)
    exact, route = _certify(a, lower, upper, ring.p, bound, budget, div=div)
    if exact is not None:
        return FptBounds(exact, exact, exact, route, lw, uw, tuple(levels), raw[0], raw[1])
    return FptBounds(lower, upper, None, None, lw, uw, tuple(levels), raw[0], raw[1])


def reduce_pair_to_ideal(f: Poly, e: int, a: IdealHandle, t) -> tuple:
    """``(b, threshold)`` with ``b = f^v a^(u(p^e - 1))`` and ``threshold = 1/(v(p^e - 1))``.

    For ``t = u/v`` in lowest terms: ``t <= fpt(div(f)/(p^e-1); a)`` iff
    ``threshold <= fpt(b)``.
    """
    t = Fraction(t)
    if t <= 0:
        raise InputError("t must be positive")
    u, v = t.numerator, t.denominator
    q = f.ring.p**e
    power_a = ideal_power(a, u * (q - 1))
    fv = f**v
    gens = minimize_generators([fv * g for g in power_a.generators], grevlex_key, f.ring.p)
    return IdealHandle(gens, f.ring), Fraction(1, v * (q - 1))


def strongly_fregular(mix, budget: Budget = DEFAULT_BUDGET) -> bool:
    """True iff the test ideal of ``mix`` is the unit ideal."""
    res = test_ideal(mix if isinstance(mix, MixedExponent) else MixedExponent(mix), budget=budget)
    if not res.stable:
        raise UnstableError("test ideal chain did not stabilize")
    return res.ideal.is_unit()


def fpt_via_first_jump(f, denom_bound: int | None = None, budget: Budget = DEFAULT_BUDGET) -> Fraction:
    """First jumping number of ``t -> tau(f^t)``, an independent route to the threshold."""
    ideal = _as_ideal(f)
    hi = Fraction(min(len(_proper_gens(ideal)), ideal.ring.nvars))
    report = jumping_numbers(None, ideal, 0, hi, denom_bound, budget=budget)
    if report.flag != "STABLE":
        raise UnstableError("test ideal evaluations did not stabilize")
    if not report.jumps:
        raise PreconditionError("UNRESOLVED: no jump found in the search window")
    first = report.jumps[0]
    if report.unresolved and report.unresolved[0][0] < first.t:
        raise PreconditionError("UNRESOLVED: the first change lies between representable candidates")
    return first.t


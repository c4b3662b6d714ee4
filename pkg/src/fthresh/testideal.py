"""Test ideals on the regular chart, the left-limit variant, jumps, orbits.

Principal factors are handled exactly: an exponent ``c`` is written as
``c p^e0 = n + b/(q-1)`` and the test ideal is a Frobenius root of the
fixed point of ``K -> root_q(g K)``.  When a non-principal ideal is present
the ascending root chain is followed until two consecutive levels agree,
which is evidence only and is flagged as such.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction

import numpy as np

from . import kernels
from .config import DEFAULT_BUDGET, Budget
from .errors import BudgetExceeded, InputError, PreconditionError
from .frobenius import root_generators
from .groebner import IdealHandle, _minimal_monomials, ideal_power, minimize_generators
from .poly import Poly, PolyRing, grevlex_key, power

STABLE = "STABLE"
UNSTABLE = "UNSTABLE"


def truncation(q: int, l: int) -> Fraction:
    """``(q^l - 1) / (q^l (q - 1))``: the l-th base-q truncation of ``1/(q-1)``."""
    if l < 0 or q < 2:
        raise InputError("need l >= 0 and q >= 2")
    return Fraction(q**l - 1, q**l * (q - 1))


@dataclass(frozen=True)
class DivisorSpec:
    """The divisor ``multiplier * div(f)``."""

    f: Poly
    e: int = 1
    multiplier: Fraction = Fraction(1)

    def __post_init__(self):
        if self.f.is_zero() or self.f.is_unit():
            raise PreconditionError("the divisor equation must be a nonzero non-unit")
        if self.e < 1:
            raise InputError("e must be positive")
        object.__setattr__(self, "multiplier", Fraction(self.multiplier))
        if self.multiplier < 0:
            raise InputError("the multiplier must be nonnegative")

    @classmethod
    def standard(cls, f: Poly, e: int = 1) -> "DivisorSpec":
        """``div(f)/(p^e - 1)``."""
        return cls(f, e, Fraction(1, f.ring.p**e - 1))

    @property
    def q(self) -> int:
        return self.f.ring.p**self.e

    def scaled(self, k) -> "DivisorSpec":
        return DivisorSpec(self.f, self.e, self.multiplier * k)


@dataclass(frozen=True)
class MixedExponent:
    """A formal product of principal factors and at most one ideal, each with an exponent."""

    pairs: tuple

    def __init__(self, pairs):
        clean = []
        ideals = 0
        for base, t in pairs:
            t = Fraction(t)
            if t < 0:
                raise InputError("exponents must be nonnegative")
            if isinstance(base, IdealHandle) and len(base.generators) == 1:
                base = base.generators[0]
            if isinstance(base, IdealHandle):
                ideals += 1
            clean.append((base, t))
        if ideals > 1:
            raise InputError("at most one non-principal ideal is supported")
        object.__setattr__(self, "pairs", tuple(clean))

    @property
    def ring(self) -> PolyRing:
        base = self.pairs[0][0]
        return base.ring

    def principal(self) -> list:
        return [(b, t) for b, t in self.pairs if isinstance(b, Poly) and t]

    def ideal_part(self):
        for b, t in self.pairs:
            if isinstance(b, IdealHandle):
                return b, t
        return None


@dataclass(frozen=True)
class TestIdealResult:
    __test__ = False  # not a pytest class

    ideal: IdealHandle
    level: int
    flag: str
    method: str

    @property
    def stable(self) -> bool:
        return self.flag == STABLE


def _p_adic_split(c: Fraction, p: int):
    """Return ``(e0, s)`` with ``c p^e0`` having denominator dividing ``p^s - 1``."""
    d = c.denominator
    e0 = 0
    while d % p == 0:
        d //= p
        e0 += 1
    s = 1 if d == 1 else _mult_order(p, d)
    return e0, s


def _mult_order(p: int, d: int) -> int:
    k, x = 1, p % d
    while x != 1:
        x = x * p % d
        k += 1
    return k


def _root_with_powers(gens: list, factors: list, e: int, ring: PolyRing) -> list:
    """Generators of ``root_{p^e}(I * prod f_i^{n_i})`` for ``I`` spanned by ``gens``.

    The powers are consumed one base-p digit per root step, so degrees stay
    bounded by roughly ``p`` times the input degrees.
    """
    p = ring.p
    factors = [(f, n) for f, n in factors if n]
    for _ in range(e):
        mult = ring.one()
        nxt = []
        for f, n in factors:
            if n % p:
                mult = mult * power(f, n % p)
        for g in gens:
            nxt.extend(root_generators(g * mult, p))
        gens = minimize_generators(nxt, grevlex_key, p)
        factors = [(f, n // p) for f, n in factors if n // p]
        if not gens:
            return []
    mult = ring.one()
    for f, n in factors:
        mult = mult * power(f, n)
    return [g * mult for g in gens]


def _handle(gens, ring) -> IdealHandle:
    return IdealHandle(gens, ring)


def _principal_test_ideal(factors: list, ring: PolyRing, budget: Budget) -> TestIdealResult:
    p = ring.p
    if not factors:
        return TestIdealResult(IdealHandle.unit(ring), 0, STABLE, "trivial")
    e0, s = 0, 1
    for _, c in factors:
        a, b = _p_adic_split(c, p)
        e0 = max(e0, a)
        s = s * b // math.gcd(s, b)
    q = p**s
    # The p-power part of the denominators is consumed digit by digit, so only the period is capped.
    if q > budget.exponent_cap:
        raise BudgetExceeded("exponent denominators exceed the exponent cap")
    ints, fracs = [], []
    for f, c in factors:
        k = c * p**e0 * (q - 1)
        assert k.denominator == 1
        n, b = divmod(k.numerator, q - 1)
        ints.append((f, n))
        fracs.append((f, b))
    K = [ring.one()]
    for f, b in fracs:
        if b:
            K[0] = K[0] * f
    k = 0
    if any(b for _, b in fracs):
        cur = _handle(K, ring)
        while True:
            k += 1
            if k > budget.sweep_levels * 64:
                raise BudgetExceeded("fixed-point iteration did not converge within budget")
            nxt = _handle(_root_with_powers(list(cur.generators), fracs, s, ring), ring)
            if nxt.equals(cur):
                break
            cur = nxt
        K = list(cur.generators)
    gens = _root_with_powers(K, ints, e0, ring)
    return TestIdealResult(_handle(gens, ring), e0 + s * k, STABLE, "fixed-point")


def _staircase(fits, bounds: list) -> list:
    # Minimal elements of an upward closed set inside the box prod [0, bounds_j].
    n = len(bounds)
    found = []
    def rec(prefix):
        j = len(prefix)
        if j == n - 1:
            top = list(prefix) + [bounds[-1]]
            if not fits(top):
                return
            lo, hi = 0, bounds[-1]
            while lo < hi:
                mid = (lo + hi) // 2
                if fits(list(prefix) + [mid]):
                    hi = mid
                else:
                    lo = mid + 1
            found.append(tuple(prefix) + (lo,))
            return
        for v in range(bounds[j] + 1):
            rec(prefix + [v])
    rec([])
    return _minimal_monomials(found)


def _nullspace_vector(rows: list, n: int):
    # The unique (up to scale) nonzero v with rows @ v = 0, or None.
    m = [list(map(Fraction, r)) for r in rows]
    pivots = []
    for col in range(n):
        piv = next((i for i in range(len(pivots), len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        i0 = len(pivots)
        m[i0], m[piv] = m[piv], m[i0]
        m[i0] = [x / m[i0][col] for x in m[i0]]
        for i in range(len(m)):
            if i != i0 and m[i][col] != 0:
                m[i] = [x - m[i][col] * y for x, y in zip(m[i], m[i0])]
        pivots.append(col)
    free = [c for c in range(n) if c not in pivots]
    if len(free) != 1:
        return None
    v = [Fraction(0)] * n
    v[free[0]] = Fraction(1)
    for i, col in enumerate(pivots):
        v[col] = -m[i][free[0]]
    return v


def _newton_facets(points: list) -> list:
    """Facets ``(v, h)`` of ``conv(points) + R^n_{>=0}``: primitive ``v >= 0``, ``h = min <v, g>``."""
    n = len(points[0])
    dirs = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    items = [(g, False) for g in points] + [(d, True) for d in dirs]
    found = set()
    for combo in itertools.combinations(items, n):
        pts = [g for g, is_dir in combo if not is_dir]
        if not pts:
            continue
        rows = [[a - b for a, b in zip(g, pts[0])] for g in pts[1:]] + [list(d) for d, is_dir in combo if is_dir]
        v = _nullspace_vector(rows, n) if rows else [Fraction(1)]
        if v is None:
            continue
        if all(x <= 0 for x in v):
            v = [-x for x in v]
        if any(x < 0 for x in v):
            continue
        den = math.lcm(*(x.denominator for x in v))
        iv = [int(x * den) for x in v]
        g = math.gcd(*iv)
        iv = tuple(x // g for x in iv)
        h = min(sum(a * b for a, b in zip(iv, pt)) for pt in points)
        if sum(a * b for a, b in zip(iv, pts[0])) == h:
            found.add((iv, h))
    return sorted(found)


def _monomial_test_ideal(ideal: IdealHandle, t: Fraction, factors, ring: PolyRing) -> list:
    # x^w is in the test ideal iff w + 1 lies in the interior of
    # t * Newt(a) + sum c_i * exp(f_i).
    points = [next(iter(g.terms)) for g in ideal.generators]
    n = ring.nvars
    shift = [Fraction(0)] * n
    for f, c in factors:
        for j, x in enumerate(next(iter(f.terms))):
            shift[j] += c * x
    facets = _newton_facets(points)

    def fits(w):
        return all(
            sum(vj * (wj + 1 - sj) for vj, wj, sj in zip(v, w, shift)) > t * h for v, h in facets
        )

    # Lowering a coordinate beyond the largest vertex coordinate stays inside,
    # so minimal generators live in this box.
    top = [math.floor(t * max(g[j] for g in points) + shift[j]) for j in range(n)]
    roots = _staircase(fits, top)
    return [Poly(ring, {m: 1}, normalized=True) for m in sorted(roots, key=grevlex_key, reverse=True)]


def _chain_test_ideal(mix: MixedExponent, e_max: int, budget: Budget) -> TestIdealResult:
    ring = mix.ring
    p = ring.p
    ideal, t = mix.ideal_part()
    factors = mix.principal()
    e_start = 1
    for _, c in list(factors) + [(None, t)]:
        e_start = max(e_start, _p_adic_split(c, p)[0])
    if ideal.is_monomial() and all(f.is_monomial() for f, _ in factors):
        gens = _monomial_test_ideal(ideal, t, factors, ring)
        return TestIdealResult(_handle(gens, ring), 0, STABLE, "monomial")
    prev = None
    level = e_start
    for e in range(e_start, e_start + e_max):
        Q = p**e
        if Q > budget.exponent_cap:
            raise BudgetExceeded(f"p^{e} exceeds the exponent cap")
        r = math.ceil(t * Q)
        if r * max(g.degree() for g in ideal.generators) > budget.max_degree:
            raise BudgetExceeded(f"a^{r} exceeds the degree budget {budget.max_degree}")
        powers = [(f, math.ceil(c * Q)) for f, c in factors]
        base = list(ideal_power(ideal, r).generators)
        cur = _handle(_root_with_powers(base, powers, e, ring), ring)
        if cur.is_unit():
            # The chain ascends to the test ideal, so reaching (1) is final.
            return TestIdealResult(cur, e, STABLE, "root-chain")
        if prev is not None and cur.equals(prev):
            return TestIdealResult(prev, e - 1, STABLE, "root-chain")
        prev, level = cur, e
    return TestIdealResult(prev, level, UNSTABLE, "root-chain")


def test_ideal(mix, e_max: int | None = None, budget: Budget = DEFAULT_BUDGET) -> TestIdealResult:
    """Test ideal of a mixed exponent.

    Principal factors only: exact, always STABLE.  With an ideal factor: the
    root chain ``root_{p^e}(prod f^ceil(c p^e) * a^ceil(t p^e))`` until two
    consecutive levels agree (STABLE) or ``e_max`` is reached (UNSTABLE).
    """
    if not isinstance(mix, MixedExponent):
        mix = MixedExponent(mix)
    e_max = budget.e_max if e_max is None else e_max
    if e_max < 1:
        raise InputError("e_max must be positive")
    ring = mix.ring
    for b, _ in mix.pairs:
        if (isinstance(b, Poly) and b.is_zero()) or (isinstance(b, IdealHandle) and b.is_zero()):
            return TestIdealResult(IdealHandle([], ring), 0, STABLE, "zero")
    part = mix.ideal_part()
    if part is None or part[1] == 0 or part[0].is_unit():
        return _principal_test_ideal(mix.principal(), ring, budget)
    return _chain_test_ideal(mix, e_max, budget)


test_ideal.__test__ = False  # keep pytest from collecting it on import


# ---------------------------------------------------------------------------
# left-limit variant


@dataclass(frozen=True)
class NtauResult:
    ideal: IdealHandle
    flag: str
    level: int | None
    epsilon: Fraction | None
    history: tuple = field(default=())

    @property
    def stable(self) -> bool:
        return self.flag == STABLE


def _mix_for(div: DivisorSpec | None, scale: Fraction, a, t: Fraction) -> list:
    pairs = []
    if div is not None and div.multiplier and scale:
        pairs.append((div.f, div.multiplier * scale))
    if a is not None and t:
        pairs.append((a, t))
    return pairs


def _eval(pairs, ring, budget) -> TestIdealResult:
    if not pairs:
        return TestIdealResult(IdealHandle.unit(ring), 0, STABLE, "trivial")
    return test_ideal(MixedExponent(pairs), budget=budget)


def sweep_start(q: int, denom_bound: int, multiplier=1) -> int:
    """First level whose perturbation ``multiplier/q^l`` sits well below the probe resolution.

    Neighbouring candidates with denominators up to ``denom_bound`` are at
    least ``1/denom_bound^2`` apart and probes stay ``1/8`` of a gap away
    from both ends, so the sweep starts once ``q^l > 8 * multiplier * denom_bound^2``.
    """
    need = 8 * max(1, math.ceil(Fraction(multiplier))) * denom_bound**2
    l = 1
    while q**l <= need:
        l += 1
    return l


def ntau(
    div: DivisorSpec | None,
    a,
    t,
    sweep: int | None = None,
    budget: Budget = DEFAULT_BUDGET,
    denom_bound: int | None = None,
) -> NtauResult:
    """Left-limit test ideal ``tau((1 - eps) div, a^t)`` for small ``eps``.

    ``eps`` runs through ``1/q^l`` starting at :func:`sweep_start`; the
    value is declared once ``sweep`` consecutive levels agree.  With no
    divisor no sweep is needed.
    """
    t = Fraction(t)
    if t < 0:
        raise InputError("t must be nonnegative")
    sweep = budget.sweep if sweep is None else sweep
    if sweep < 1:
        raise InputError("sweep must be positive")
    ring = div.f.ring if div is not None else a.ring
    if div is None or div.multiplier == 0:
        res = _eval(_mix_for(None, Fraction(0), a, t), ring, budget)
        flag = res.flag
        return NtauResult(res.ideal, flag, 0, Fraction(0))
    q = div.q
    history = []
    run_start, run_len = None, 0
    prev = None
    bound = budget.denom_bound if denom_bound is None else denom_bound
    first = sweep_start(q, bound, div.multiplier)
    for l in range(first, first + budget.sweep_levels):
        eps = Fraction(1, q**l)
        res = _eval(_mix_for(div, 1 - eps, a, t), ring, budget)
        if res.flag != STABLE:
            history.append((l, res.ideal))
            prev, run_len = None, 0
            continue
        history.append((l, res.ideal))
        if prev is not None and res.ideal.equals(prev):
            run_len += 1
        else:
            run_start, run_len = l, 1
        prev = res.ideal
        if run_len >= sweep:
            return NtauResult(res.ideal, STABLE, run_start, Fraction(1, q**run_start), tuple(history))
    last = history[-1][1]
    return NtauResult(last, UNSTABLE, None, None, tuple(history))


# ---------------------------------------------------------------------------
# jumping numbers


@dataclass(frozen=True)
class Jump:
    t: Fraction
    before: IdealHandle
    after: IdealHandle
    side: str  # "left": ideal changes at t; "right": changes just after t


@dataclass(frozen=True)
class JumpReport:
    interval: tuple
    jumps: tuple
    unresolved: tuple
    complete: bool
    flag: str = STABLE

    @property
    def values(self) -> list:
        return [j.t for j in self.jumps]


def allowed_denominators(q: int, bound: int) -> list:
    """All ``q^a (q^b - 1)`` (``a >= 0``, ``b >= 1``) up to ``bound``."""
    out = set()
    b = 1
    while q**b - 1 <= bound:
        d = q**b - 1
        while d <= bound:
            out.add(d)
            d *= q
        b += 1
    return sorted(out)


def candidates(lo: Fraction, hi: Fraction, q: int, bound: int) -> list:
    """Sorted rationals in ``(lo, hi]`` with an allowed denominator."""
    out = set()
    for d in allowed_denominators(q, bound):
        k = math.floor(lo * d) + 1
        while Fraction(k, d) <= hi:
            out.add(Fraction(k, d))
            k += 1
    return sorted(out)


class _Evaluator:
    def __init__(self, div, a, sweep, budget, bound):
        self.div, self.a, self.sweep, self.budget, self.bound = div, a, sweep, budget, bound
        self.cache: dict = {}
        self.unstable = False

    def __call__(self, t: Fraction) -> IdealHandle:
        if t not in self.cache:
            res = ntau(self.div, self.a, t, self.sweep, self.budget, self.bound)
            if not res.stable:
                self.unstable = True
            self.cache[t] = res.ideal
        return self.cache[t]


def _same(i: IdealHandle, j: IdealHandle) -> bool:
    return i.equals(j)


def _qadic_inside(lo: Fraction, hi: Fraction, q: int, from_top: bool = False) -> Fraction:
    # A rational j/q^k in (lo, hi) with the least k; the largest such j if from_top.
    k = 0
    while True:
        if from_top:
            x = Fraction(math.ceil(hi * q**k) - 1, q**k)
            if x > lo:
                return x
        else:
            x = Fraction(math.floor(lo * q**k) + 1, q**k)
            if x < hi:
                return x
        k += 1


def _probes(prev: Fraction, star: Fraction, q: int) -> tuple:
    # One probe in each outer half of (prev, star), at least 1/8 of the gap from
    # either end and as close to its own end as the coarsest q-adic grid allows.
    g = star - prev
    return (
        _qadic_inside(prev + g / 8, prev + g * 3 / 8, q),
        _qadic_inside(star - g * 3 / 8, star - g / 8, q, from_top=True),
    )


def jumping_numbers(
    div: DivisorSpec | None,
    a,
    lo,
    hi,
    denom_bound: int | None = None,
    sweep: int | None = None,
    budget: Budget = DEFAULT_BUDGET,
) -> JumpReport:
    """Points of ``[lo, hi]`` where the left-limit test ideal changes.

    The search runs over rationals whose denominators have the form
    ``q^a (q^b - 1)`` up to ``denom_bound``.  Each detected change between
    neighbouring candidates is classified by probing a finer rational in
    between; if neither side explains it the interval is UNRESOLVED.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if not (0 <= lo < hi):
        raise InputError("need 0 <= lo < hi")
    bound = budget.denom_bound if denom_bound is None else denom_bound
    if bound < 1:
        raise InputError("denom_bound must be positive")
    if isinstance(a, Poly):
        a = IdealHandle([a], a.ring)
    q = div.q if div is not None else a.ring.p
    ev = _Evaluator(div, a, sweep, budget, bound)
    cands = candidates(lo, hi, q, bound)
    if not cands or cands[-1] != hi:
        cands.append(hi)
    jumps, unresolved = [], []

    def record(t, before, after, side):
        if jumps and jumps[-1].t == t:
            # changes both at t and just after it
            jumps[-1] = Jump(t, jumps[-1].before, after, "both")
        else:
            jumps.append(Jump(t, before, after, side))

    cur = lo
    if lo > 0:
        below = max(c for c in [Fraction(0)] + candidates(Fraction(-1), lo, q, bound) if c < lo)
        if not _same(ev(_probes(below, lo, q)[1]), ev(lo)):
            jumps.append(Jump(lo, ev(_probes(below, lo, q)[1]), ev(lo), "left"))
    while True:
        rest = [c for c in cands if c > cur]
        if not rest:
            break
        base = ev(cur)
        if _same(ev(rest[-1]), base):
            break
        lo_i, hi_i = 0, len(rest) - 1
        while lo_i < hi_i:
            mid = (lo_i + hi_i) // 2
            if _same(ev(rest[mid]), base):
                lo_i = mid + 1
            else:
                hi_i = mid
        star = rest[lo_i]
        prev = rest[lo_i - 1] if lo_i > 0 else cur
        near_prev, near_star = _probes(prev, star, q)
        if _same(ev(near_prev), ev(prev)) and _same(ev(near_star), ev(prev)):
            record(star, ev(prev), ev(star), "left")
        elif _same(ev(near_prev), ev(star)) and _same(ev(near_star), ev(star)):
            # a change right after 0 is not a jump by convention
            if prev > 0:
                record(prev, ev(prev), ev(star), "right")
        else:
            unresolved.append((prev, star))
        cur = star
    # a change just after hi still makes hi a jump
    above = next(iter(candidates(hi, hi + 1, q, bound)), hi + 1)
    near_hi, _ = _probes(hi, above, q)
    if not _same(ev(near_hi), ev(hi)):
        record(hi, ev(hi), ev(near_hi), "right")
    flag = UNSTABLE if ev.unstable else STABLE
    return JumpReport((lo, hi), tuple(jumps), tuple(unresolved), not unresolved, flag)


# ---------------------------------------------------------------------------
# orbit discreteness


@dataclass(frozen=True)
class OrbitReport:
    t: Fraction
    q: int
    l: int
    preperiod: int
    period: int
    cycle_start: Fraction

    @cached_property
    def cycle(self) -> tuple:
        """All ``period`` cycle elements, starting at ``cycle_start``."""
        den = self.cycle_start.denominator
        return _cycle(self.cycle_start.numerator, den, self.q, self.l, self.period)


def _orbit_step(x: int, den: int, q: int, top: int) -> int:
    y = q * x
    if y > top:
        y -= -(-(y - top) // den) * den
    return y


def _orbit_python(num: int, den: int, q: int, l: int, budget: int):
    # Brent's cycle detection on numerators over the fixed denominator.
    top = l * den
    power = lam = 1
    tort, hare = num, _orbit_step(num, den, q, top)
    steps = 1
    while tort != hare:
        if power == lam:
            tort, power, lam = hare, power * 2, 0
        hare = _orbit_step(hare, den, q, top)
        lam += 1
        steps += 1
        if steps > budget:
            raise BudgetExceeded("orbit step budget exhausted")
    tort = hare = num
    for _ in range(lam):
        hare = _orbit_step(hare, den, q, top)
    mu = 0
    while tort != hare:
        tort = _orbit_step(tort, den, q, top)
        hare = _orbit_step(hare, den, q, top)
        mu += 1
        if mu > budget:
            raise BudgetExceeded("orbit step budget exhausted")
    return mu, lam, tort


def _cycle(start: int, den: int, q: int, l: int, period: int) -> tuple:
    out, x = [], start
    for _ in range(period):
        out.append(Fraction(x, den))
        x = _orbit_step(x, den, q, l * den)
    return tuple(out)


def orbit_discreteness(t, q: int, l: int, step_budget: int | None = None, budget: Budget = DEFAULT_BUDGET) -> OrbitReport:
    """Eventual cycle of ``x -> qx``, then ``x -> x - 1`` while ``x > l``."""
    return orbit_batch_reports([t], q, l, step_budget, budget)[0]


def orbit_batch_reports(ts, q: int, l: int, step_budget: int | None = None, budget: Budget = DEFAULT_BUDGET) -> list:
    """Vectorized :func:`orbit_discreteness` over many starting points."""
    if q < 2 or l < 1:
        raise InputError("need q >= 2 and l >= 1")
    ts = [Fraction(t) for t in ts]
    if any(t <= 0 for t in ts):
        raise InputError("t must be positive")
    step_budget = budget.step_budget if step_budget is None else step_budget
    # Points above l leave (0, l] for good after one step; start from there.
    starts, shift = [], []
    for t in ts:
        if t > l:
            x = _orbit_step(t.numerator, t.denominator, q, l * t.denominator)
            starts.append(Fraction(x, t.denominator))
            shift.append(1)
        else:
            starts.append(t)
            shift.append(0)
    rows: list = [None] * len(ts)
    fast = [i for i, t in enumerate(starts) if q * l * t.denominator < kernels.KEY_LIMIT]
    if fast:
        num = np.array([starts[i].numerator for i in fast], dtype=np.int64)
        den = np.array([starts[i].denominator for i in fast], dtype=np.int64)
        for i, row in zip(fast, kernels.orbit_batch(num, den, q, l, step_budget).tolist()):
            if row[0] < 0:
                raise BudgetExceeded("orbit step budget exhausted")
            rows[i] = row
    reports = []
    for i, t in enumerate(starts):
        mu, lam, start = rows[i] if rows[i] is not None else _orbit_python(t.numerator, t.denominator, q, l, step_budget)
        reports.append(OrbitReport(ts[i], q, l, mu + shift[i], lam, Fraction(start, t.denominator)))
    return reports

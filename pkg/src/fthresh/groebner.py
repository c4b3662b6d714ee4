"""Ideals of F_p[x_1..x_n] with canonical reduced Groebner bases.

Buchberger's algorithm with the Gebauer-Moeller criteria.  Every ideal
handle caches its reduced basis in a write-once cell, so equality and
containment tests are cheap after the first call.
"""

from __future__ import annotations

import heapq
import threading

import numpy as np

from .config import DEFAULT_BUDGET, Budget
from .errors import BudgetExceeded, InputError
from .poly import Poly, PolyRing, format_poly, order_key


def _divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _lead(terms: dict, key):
    return max(terms, key=key)


def _monic(terms: dict, lm, p: int) -> dict:
    inv = pow(terms[lm], -1, p)
    if inv == 1:
        return terms
    return {m: (c * inv) % p for m, c in terms.items()}


def normal_form(terms: dict, basis, key, p: int) -> dict:
    """Full remainder of ``terms`` on division by ``basis``.

    ``basis`` is a sequence of ``(lead_monomial, monic_terms)`` pairs.
    """
    f = dict(terms)
    rem = {}
    heap = [tuple(-k for k in key(m)) + (m,) for m in f]
    heapq.heapify(heap)
    while heap:
        m = heapq.heappop(heap)[-1]
        c = f.get(m)
        if not c:
            continue
        for lm, g in basis:
            if _divides(lm, m):
                break
        else:
            rem[m] = c
            del f[m]
            continue
        shift = _sub(m, lm)
        del f[m]
        for gm, gc in g.items():
            if gm == lm:
                continue
            nm = tuple(a + b for a, b in zip(shift, gm))
            old = f.get(nm)
            v = ((old or 0) - c * gc) % p
            if v:
                if old is None:
                    heapq.heappush(heap, tuple(-k for k in key(nm)) + (nm,))
                f[nm] = v
            elif old is not None:
                del f[nm]
    return rem


def echelon(polys, key, p: int) -> list[dict]:
    """F_p-linear row reduction; returns a basis of the span (monic rows)."""
    pivots: dict = {}
    for terms in polys:
        v = dict(terms)
        while v:
            lm = _lead(v, key)
            row = pivots.get(lm)
            if row is None:
                pivots[lm] = _monic(v, lm, p)
                break
            c = v[lm]
            for m, rc in row.items():
                nv = (v.get(m, 0) - c * rc) % p
                if nv:
                    v[m] = nv
                else:
                    v.pop(m, None)
    return list(pivots.values())


def _minimal_monomials(monos) -> list:
    """Minimal elements under divisibility, sorted lexicographically."""
    monos = sorted(set(monos))
    if not monos:
        return []
    if len(monos[0]) <= 2:
        # Lex order: a later monomial is divisible by an earlier one iff its last exponent is not smaller.
        keep, best = [], None
        for m in monos:
            last = m[-1] if m else 0
            if best is None or last < best:
                keep.append(m)
                best = last
        return keep
    arr = np.array(monos, dtype=np.int64)
    order = np.argsort(arr.sum(axis=1), kind="stable")
    kept = np.zeros((0, arr.shape[1]), dtype=np.int64)
    for i in order:
        row = arr[i]
        if kept.shape[0] and np.any(np.all(kept <= row, axis=1)):
            continue
        kept = np.vstack([kept, row])
    return sorted(tuple(int(v) for v in r) for r in kept)


def _monomial_power(monos: list, r: int) -> list:
    result = [(0,) * len(monos[0])]
    base = _minimal_monomials(monos)
    while r:
        if r & 1:
            result = _minimal_monomials(tuple(a + b for a, b in zip(m, g)) for m in result for g in base)
        r >>= 1
        if r:
            base = _minimal_monomials(tuple(a + b for a, b in zip(m, g)) for m in base for g in base)
    return result


def _update(G, B, ih, lms):
    mh = lms[ih]
    C = set(G)
    D = set()
    while C:
        ig = C.pop()
        mg = lms[ig]
        lcm_hg = _lcm(mh, mg)
        disjoint = all(a == 0 or b == 0 for a, b in zip(mh, mg))

        def lcm_divides(ip):
            return _divides(_lcm(mh, lms[ip]), lcm_hg)

        if disjoint or (not any(lcm_divides(ipx) for ipx in C) and not any(lcm_divides(pr[1]) for pr in D)):
            D.add((ih, ig))
    E = set()
    for ih_, ig in D:
        mg = lms[ig]
        if not all(a == 0 or b == 0 for a, b in zip(mh, mg)):
            E.add((ih_, ig))
    B_new = set()
    for ig1, ig2 in B:
        mg1, mg2 = lms[ig1], lms[ig2]
        lcm12 = _lcm(mg1, mg2)
        if not _divides(mh, lcm12) or _lcm(mg1, mh) == lcm12 or _lcm(mg2, mh) == lcm12:
            B_new.add((ig1, ig2))
    B_new |= E
    G_new = {ig for ig in G if not _divides(mh, lms[ig])}
    G_new.add(ih)
    return G_new, B_new


def buchberger(polys, nvars: int, p: int, order: str = "grevlex", budget: Budget = DEFAULT_BUDGET) -> list[dict]:
    """Reduced Groebner basis of the ideal spanned by ``polys`` (term dicts).

    Returns monic term dicts sorted by decreasing leading monomial.  Raises
    :class:`BudgetExceeded` when the pair or degree budget runs out.
    """
    key = order_key(order)
    polys = [t for t in polys if t]
    if not polys:
        return []
    one = (0,) * nvars
    if any(one in t and len(t) == 1 for t in polys):
        return [{one: 1}]
    if all(len(t) == 1 for t in polys):
        return [{m: 1} for m in sorted(_minimal_monomials(next(iter(t)) for t in polys), key=key, reverse=True)]

    rows = echelon(polys, key, p)
    rows.sort(key=lambda t: key(_lead(t, key)))
    fs: list[dict] = []
    lms: list = []
    G: set = set()
    B: set = set()
    for t in rows:
        h = normal_form(t, [(lms[i], fs[i]) for i in G], key, p)
        if not h:
            continue
        lm = _lead(h, key)
        if lm == one:
            return [{one: 1}]
        fs.append(_monic(h, lm, p))
        lms.append(lm)
        G, B = _update(G, B, len(fs) - 1, lms)

    processed = 0
    while B:
        pair = min(B, key=lambda ij: (key(_lcm(lms[ij[0]], lms[ij[1]])), ij))
        B.discard(pair)
        processed += 1
        if processed > budget.max_pairs:
            raise BudgetExceeded(f"Groebner pair budget {budget.max_pairs} exhausted")
        i, j = pair
        lcm = _lcm(lms[i], lms[j])
        s = {}
        for idx, sign in ((i, 1), (j, -1)):
            shift = _sub(lcm, lms[idx])
            for m, c in fs[idx].items():
                nm = tuple(a + b for a, b in zip(shift, m))
                v = (s.get(nm, 0) + sign * c) % p
                if v:
                    s[nm] = v
                else:
                    s.pop(nm, None)
        if not s:
            continue
        h = normal_form(s, [(lms[k], fs[k]) for k in G], key, p)
        if not h:
            continue
        lm = _lead(h, key)
        if lm == one:
            return [{one: 1}]
        if sum(lm) > budget.max_degree:
            raise BudgetExceeded(f"Groebner degree budget {budget.max_degree} exhausted")
        fs.append(_monic(h, lm, p))
        lms.append(lm)
        G, B = _update(G, B, len(fs) - 1, lms)

    idx = sorted(G, key=lambda k: key(lms[k]), reverse=True)
    out = []
    for k in idx:
        others = [(lms[o], fs[o]) for o in idx if o != k]
        tail = {m: c for m, c in fs[k].items() if m != lms[k]}
        red = normal_form(tail, others, key, p)
        red[lms[k]] = 1
        out.append(red)
    return out


class IdealHandle:
    """A finitely generated ideal with a lazily computed reduced basis."""

    __slots__ = ("ring", "generators", "order", "budget", "_gb", "_lock")

    def __init__(self, generators, ring: PolyRing | None = None, order: str = "grevlex", budget: Budget | None = None):
        gens = [g for g in generators]
        if ring is None:
            if not gens:
                raise InputError("the ring must be given for an ideal without generators")
            ring = gens[0].ring
        for g in gens:
            if g.ring != ring:
                raise InputError("generators live in different rings")
        order_key(order)
        self.ring = ring
        self.generators = tuple(g for g in gens if not g.is_zero())
        self.order = order
        self.budget = budget or DEFAULT_BUDGET
        self._gb = None
        self._lock = threading.Lock()

    @classmethod
    def parse(cls, text: str, ring: PolyRing, order: str = "grevlex") -> "IdealHandle":
        from .poly import parse_poly_list

        return cls(parse_poly_list(text, ring), ring, order)

    @classmethod
    def unit(cls, ring: PolyRing, order: str = "grevlex") -> "IdealHandle":
        return cls([ring.one()], ring, order)

    @classmethod
    def maximal(cls, ring: PolyRing, order: str = "grevlex") -> "IdealHandle":
        return cls(ring.gens(), ring, order)

    @property
    def key(self):
        return order_key(self.order)

    def reduced_basis(self) -> list[Poly]:
        if self._gb is None:
            with self._lock:
                if self._gb is None:
                    rows = buchberger(
                        [g._terms for g in self.generators], self.ring.nvars, self.ring.p, self.order, self.budget
                    )
                    self._gb = tuple(Poly(self.ring, r, normalized=True) for r in rows)
        return list(self._gb)

    def _basis_pairs(self):
        key = self.key
        return [(_lead(g._terms, key), g._terms) for g in self.reduced_basis()]

    def reduce(self, f: Poly) -> Poly:
        return Poly(self.ring, normal_form(f._terms, self._basis_pairs(), self.key, self.ring.p), normalized=True)

    def contains(self, f: Poly) -> bool:
        if f.ring != self.ring:
            raise InputError("polynomial and ideal live in different rings")
        return self.reduce(f).is_zero()

    def contains_ideal(self, other: "IdealHandle") -> bool:
        return all(self.contains(g) for g in other.generators)

    def equals(self, other: "IdealHandle") -> bool:
        if self.ring != other.ring:
            return False
        if self.order == other.order:
            return self.reduced_basis() == other.reduced_basis()
        return self.contains_ideal(other) and other.contains_ideal(self)

    def is_zero(self) -> bool:
        return not self.generators

    def is_unit(self) -> bool:
        gb = self.reduced_basis()
        return len(gb) == 1 and gb[0].is_constant()

    def is_monomial(self) -> bool:
        return all(g.is_monomial() for g in self.generators)

    def is_principal_handle(self) -> bool:
        return len(self.generators) <= 1

    def with_generators(self, gens) -> "IdealHandle":
        return IdealHandle(gens, self.ring, self.order, self.budget)

    def __mul__(self, other):
        if isinstance(other, Poly):
            return self.with_generators([g * other for g in self.generators])
        if isinstance(other, IdealHandle):
            return ideal_product(self, other)
        return NotImplemented

    def __add__(self, other: "IdealHandle") -> "IdealHandle":
        return self.with_generators(list(self.generators) + list(other.generators))

    def __str__(self):
        return "(" + ", ".join(format_poly(g) for g in self.generators) + ")"

    def basis_strings(self) -> list[str]:
        return [format_poly(g) for g in self.reduced_basis()]

    def __repr__(self):
        return f"IdealHandle{self}"


def reduced_basis(ideal: IdealHandle) -> list[Poly]:
    return ideal.reduced_basis()


def contains(ideal: IdealHandle, f: Poly) -> bool:
    return ideal.contains(f)


def ideal_equal(a: IdealHandle, b: IdealHandle) -> bool:
    return a.equals(b)


def minimize_generators(gens: list[Poly], key, p: int) -> list[Poly]:
    """Drop zero and linearly dependent generators (same ideal)."""
    if not gens:
        return []
    ring = gens[0].ring
    if all(g.is_monomial() for g in gens if not g.is_zero()):
        monos = _minimal_monomials(next(iter(g._terms)) for g in gens if not g.is_zero())
        return [Poly(ring, {m: 1}, normalized=True) for m in sorted(monos, key=key, reverse=True)]
    rows = echelon([g._terms for g in gens if not g.is_zero()], key, p)
    return [Poly(ring, r, normalized=True) for r in rows]


def ideal_product(a: IdealHandle, b: IdealHandle) -> IdealHandle:
    key = a.key
    gens = [f * g for f in a.generators for g in b.generators]
    return a.with_generators(minimize_generators(gens, key, a.ring.p))


def ideal_power(ideal: IdealHandle, r: int) -> IdealHandle:
    """Ideal generated by all r-fold products of the generators; ``I^0 = (1)``."""
    if r < 0:
        raise InputError("ideal power must be nonnegative")
    if r == 0:
        return ideal.with_generators([ideal.ring.one()])
    key = ideal.key
    base = minimize_generators(list(ideal.generators), key, ideal.ring.p)
    if not base:
        return ideal.with_generators([])
    if ideal.is_monomial():
        cur = _monomial_power([next(iter(g._terms)) for g in base], r)
        return ideal.with_generators([Poly(ideal.ring, {m: 1}, normalized=True) for m in sorted(cur, key=key, reverse=True)])
    cur = list(base)
    for _ in range(r - 1):
        cur = minimize_generators([f * g for f in cur for g in base], key, ideal.ring.p)
    return ideal.with_generators(cur)

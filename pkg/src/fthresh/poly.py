"""Sparse polynomials over F_p, the text parser, and truncated products.

A :class:`Poly` is an immutable map from exponent tuples to residues in
``1..p-1``.  Truncated arithmetic works in ``A/(x_1^q, ..., x_n^q)``: any
monomial with some exponent ``>= q`` is dropped, which is exactly reduction
modulo the Frobenius power ``m^[q]`` of the maximal ideal at the origin.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from . import kernels
from .config import DEFAULT_BUDGET
from .errors import BudgetExceeded, InputError, ParseError, PreconditionError

# Below this many term pairs a dict loop beats the kernel call overhead.
_SMALL_PRODUCT = 64


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def p_power_exponent(q: int, p: int) -> int:
    """Return ``k >= 1`` with ``q == p**k``; raise if there is none."""
    k, r = 0, q
    while r > 1 and r % p == 0:
        r //= p
        k += 1
    if r != 1 or k < 1:
        raise PreconditionError(f"{q} is not a positive power of {p}")
    return k


@dataclass(frozen=True)
class PrimeChar:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not is_prime(self.p):
            raise InputError(f"characteristic must be prime, got {self.p!r}")
        if self.p >= 1 << 31:
            raise InputError("characteristic must be below 2^31")

    def __int__(self):
        return self.p


@dataclass(frozen=True)
class PolyRing:
    """``F_p[x_1..x_n]``; variables print as x, y, z when ``n <= 3``."""

    p: int
    nvars: int

    def __post_init__(self):
        p = self.p.p if isinstance(self.p, PrimeChar) else self.p
        PrimeChar(p)
        object.__setattr__(self, "p", p)
        if not 1 <= self.nvars <= 99:
            raise InputError(f"variable count must lie in 1..99, got {self.nvars}")

    @property
    def var_names(self) -> tuple[str, ...]:
        if self.nvars <= 3:
            return ("x", "y", "z")[: self.nvars]
        return tuple(f"x{i}" for i in range(1, self.nvars + 1))

    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return Poly(self, {(0,) * self.nvars: 1})

    def const(self, c: int) -> "Poly":
        return Poly(self, {(0,) * self.nvars: c})

    def gen(self, i: int) -> "Poly":
        e = [0] * self.nvars
        e[i] = 1
        return Poly(self, {tuple(e): 1})

    def gens(self) -> list["Poly"]:
        return [self.gen(i) for i in range(self.nvars)]

    def monomial(self, exps, c: int = 1) -> "Poly":
        return Poly(self, {tuple(int(e) for e in exps): c})

    def parse(self, text: str) -> "Poly":
        return parse_poly(text, self.nvars, self.p)


class Poly:
    __slots__ = ("ring", "_terms", "_arrays", "_hash")

    def __init__(self, ring: PolyRing, terms=None, *, normalized: bool = False):
        self.ring = ring
        if normalized:
            self._terms = terms
        else:
            p = ring.p
            clean = {}
            for mono, c in (terms or {}).items():
                c %= p
                if c:
                    mono = tuple(int(e) for e in mono)
                    if len(mono) != ring.nvars or min(mono, default=0) < 0:
                        raise InputError(f"bad exponent vector {mono} for {ring.nvars} variables")
                    clean[mono] = c
            self._terms = clean
        self._arrays = None
        self._hash = None

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_arrays(cls, ring: PolyRing, exps: np.ndarray, coefs: np.ndarray) -> "Poly":
        terms = {tuple(row): int(c) for row, c in zip(exps.tolist(), coefs.tolist())}
        out = cls(ring, terms, normalized=True)
        out._arrays = (exps, coefs)
        return out

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self._arrays is None:
            n = self.ring.nvars
            if self._terms:
                exps = np.array(list(self._terms), dtype=np.int64).reshape(-1, n)
                coefs = np.fromiter(self._terms.values(), dtype=np.int64, count=len(self._terms))
            else:
                exps = np.zeros((0, n), dtype=np.int64)
                coefs = np.zeros(0, dtype=np.int64)
            self._arrays = (exps, coefs)
        return self._arrays

    # -- inspection -------------------------------------------------------------

    @property
    def terms(self):
        return MappingProxyType(self._terms)

    @property
    def p(self) -> int:
        return self.ring.p

    @property
    def nvars(self) -> int:
        return self.ring.nvars

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self) -> int:
        return self._terms.get((0,) * self.ring.nvars, 0)

    def is_constant(self) -> bool:
        return all(not any(m) for m in self._terms)

    def is_unit(self) -> bool:
        """Units of the local ring at the origin: nonzero constant term."""
        return self.constant_term() != 0

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def degree(self) -> int:
        return max((sum(m) for m in self._terms), default=-1)

    def max_exponents(self) -> tuple[int, ...]:
        if not self._terms:
            return (0,) * self.ring.nvars
        return tuple(max(col) for col in zip(*self._terms))

    def lead(self, key) -> tuple[tuple[int, ...], int]:
        mono = max(self._terms, key=key)
        return mono, self._terms[mono]

    def monic(self, key) -> "Poly":
        if not self._terms:
            return self
        _, c = self.lead(key)
        return self.scale(pow(c, -1, self.ring.p))

    # -- arithmetic -------------------------------------------------------------

    def _check(self, other: "Poly"):
        if self.ring != other.ring:
            if self.ring.p != other.ring.p:
                raise InputError("characteristic mismatch")
            raise InputError("variable-count mismatch")

    def _coerce(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return other
        if isinstance(other, int):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.ring.p
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = (out.get(m, 0) + c) % p
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Poly(self.ring, out, normalized=True)

    __radd__ = __add__

    def __neg__(self):
        p = self.ring.p
        return Poly(self.ring, {m: p - c for m, c in self._terms.items()}, normalized=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: int) -> "Poly":
        c %= self.ring.p
        if c == 0:
            return self.ring.zero()
        if c == 1:
            return self
        p = self.ring.p
        return Poly(self.ring, {m: (v * c) % p for m, v in self._terms.items()}, normalized=True)

    def mul_term(self, mono, c: int = 1) -> "Poly":
        p = self.ring.p
        c %= p
        if not c:
            return self.ring.zero()
        out = {}
        for m, v in self._terms.items():
            out[tuple(a + b for a, b in zip(m, mono))] = (v * c) % p
        return Poly(self.ring, out, normalized=True)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _product(self, other, None)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, r: int):
        return power(self, r)

    def frobenius(self, q: int) -> "Poly":
        """``f**q`` for ``q`` a power of p: coefficients are fixed by Frobenius."""
        return Poly(self.ring, {tuple(e * q for e in m): c for m, c in self._terms.items()}, normalized=True)

    def truncate(self, q: int) -> "Poly":
        """Drop every monomial having an exponent ``>= q``."""
        return Poly(self.ring, {m: c for m, c in self._terms.items() if max(m, default=0) < q}, normalized=True)

    # -- comparison / printing -------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            return self == self.ring.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ring == other.ring and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._terms.items())))
        return self._hash

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r}, p={self.ring.p}, nvars={self.ring.nvars})"


# ---------------------------------------------------------------------------
# monomial orders


# Keys are flat int tuples so that negating them yields a max-heap order.


def grevlex_key(m):
    return (sum(m),) + tuple(-e for e in reversed(m))


def grlex_key(m):
    return (sum(m),) + tuple(m)


def lex_key(m):
    return m


ORDERS = {"grevlex": grevlex_key, "grlex": grlex_key, "lex": lex_key}


def order_key(order: str):
    try:
        return ORDERS[order]
    except KeyError:
        raise InputError(f"unknown monomial order {order!r}") from None


# ---------------------------------------------------------------------------
# printing


def format_monomial(mono, names, explicit: bool = False) -> str:
    parts = []
    for name, e in zip(names, mono):
        if e == 0:
            continue
        parts.append(f"{name}^{e}" if (e != 1 or explicit) else name)
    return "*".join(parts) if parts else "1"


def format_poly(f: Poly) -> str:
    if f.is_zero():
        return "0"
    names = f.ring.var_names
    out = []
    for mono in sorted(f._terms, key=grevlex_key, reverse=True):
        c = f._terms[mono]
        body = format_monomial(mono, names)
        if body == "1":
            out.append(str(c))
        elif c == 1:
            out.append(body)
        else:
            out.append(f"{c}*{body}")
    return " + ".join(out)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9]*)|(\S))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1)), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*^(),":
                raise ParseError(f"unexpected character {ch!r}", text, m.start(3))
            tokens.append(("op", ch, m.start(3)))
        else:
            break
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


def variable_index(name: str, nvars: int) -> int | None:
    """Index of a variable name, or None.  x/y/z alias x1/x2/x3."""
    if name in ("x", "y", "z"):
        idx = "xyz".index(name)
    else:
        m = re.fullmatch(r"x([1-9][0-9]?)", name)
        if not m:
            return None
        idx = int(m.group(1)) - 1
    return idx if idx < nvars else None


class _Parser:
    def __init__(self, text: str, ring: PolyRing, slot: str | None = None, slot_value: int | None = None):
        self.text = text
        self.ring = ring
        self.slot = slot
        self.slot_value = slot_value
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.take()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {want!r}, found {got}", self.text, tok[2])
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def parse(self):
        if self.peek()[0] == "end":
            self.error("empty polynomial")
        out = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected token {self.peek()[1]!r}")
        return out

    def expr(self):
        acc = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            acc = acc * self.unary()
        return acc

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            inner = self.unary()
            return -inner if tok[1] == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] == "name" and self.slot is not None and tok[1] == self.slot:
                return base**self.slot_value
            if tok[0] != "int":
                self.error("exponent must be a nonnegative integer", tok)
            return base ** tok[1]
        return base

    def atom(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "int":
            return self.ring.const(val)
        if kind == "name":
            if self.slot is not None and val == self.slot:
                raise ParseError(f"slot {val!r} may only appear as an exponent", self.text, pos)
            idx = variable_index(val, self.ring.nvars)
            if idx is None:
                raise ParseError(f"unknown variable {val!r}", self.text, pos)
            return self.ring.gen(idx)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect("op", ")")
            return inner
        got = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {got}", self.text, pos)


def parse_poly(text: str, nvars: int, char) -> Poly:
    """Parse ``text`` into a canonical polynomial of ``F_p[x_1..x_nvars]``.

    Grammar: integers, variables ``x y z`` or ``x1..x99``, ``+ - * ^`` and
    parentheses.  Coefficients are reduced mod p.
    """
    ring = char if isinstance(char, PolyRing) else PolyRing(char, nvars)
    return _Parser(text, ring).parse()


def parse_template(text: str, ring: PolyRing, slot: str, value: int) -> Poly:
    """Parse ``text`` with every exponent ``^slot`` replaced by ``value``."""
    if value < 0:
        raise InputError("slot values must be nonnegative")
    if variable_index(slot, ring.nvars) is not None:
        raise InputError(f"slot name {slot!r} clashes with a variable")
    return _Parser(text, ring, slot, value).parse()


def split_top_level(text: str, sep: str = ",") -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [s.strip() for s in parts]


def parse_poly_list(text: str, ring: PolyRing) -> list[Poly]:
    """Comma separated generator list, e.g. ``"x, y^2 - x"``."""
    pieces = split_top_level(text)
    if any(not s for s in pieces):
        raise ParseError("empty generator in list", text, 0)
    return [parse_poly(s, ring.nvars, ring) for s in pieces]


# ---------------------------------------------------------------------------
# products


def _product(f: Poly, g: Poly, cap: int | None) -> Poly:
    ring = f.ring
    if f.is_zero() or g.is_zero():
        return ring.zero()
    if len(f) * len(g) <= _SMALL_PRODUCT:
        p = ring.p
        out: dict = {}
        for ma, ca in f._terms.items():
            if cap is not None and max(ma) >= cap:
                continue
            for mb, cb in g._terms.items():
                m = tuple(a + b for a, b in zip(ma, mb))
                if cap is not None and max(m) >= cap:
                    continue
                out[m] = (out.get(m, 0) + ca * cb) % p
        return Poly(ring, {m: c for m, c in out.items() if c}, normalized=True)
    ea, ca = f.arrays()
    eb, cb = g.arrays()
    exps, coefs = kernels.mul_terms(ea, ca, eb, cb, ring.p, cap)
    return Poly.from_arrays(ring, exps, coefs)


def _check_q(f: Poly, q: int, budget=DEFAULT_BUDGET):
    p_power_exponent(q, f.ring.p)
    if q > budget.exponent_cap:
        raise BudgetExceeded(f"q = {q} exceeds the exponent cap {budget.exponent_cap}")


def mul_reduced(f: Poly, g: Poly, q: int) -> Poly:
    """``f*g`` in ``A/(x_1^q, ..., x_n^q)``."""
    f._check(g)
    _check_q(f, q)
    return _product(f, g, q)


def _digit_power(f: Poly, r: int, cap: int | None) -> Poly:
    # Square-and-multiply, reducing at every step.
    result = f.ring.one() if cap is None else f.ring.one().truncate(cap)
    base = f if cap is None else f.truncate(cap)
    while r:
        if r & 1:
            result = _product(result, base, cap)
            if result.is_zero():
                return result
        r >>= 1
        if r:
            base = _product(base, base, cap)
    return result


def _power(f: Poly, r: int, cap: int | None) -> Poly:
    if r < 0:
        raise PreconditionError("exponent must be nonnegative")
    p = f.ring.p
    result = f.ring.one() if cap is None else f.ring.one().truncate(cap)
    scale = 1
    while r:
        r, d = divmod(r, p)
        if d:
            piece = _digit_power(f, d, None if cap is None else -(-cap // scale))
            piece = piece.frobenius(scale)
            if cap is not None:
                piece = piece.truncate(cap)
            result = _product(result, piece, cap)
            if result.is_zero():
                return result
        scale *= p
    return result


def power(f: Poly, r: int) -> Poly:
    """Exact ``f**r``: base-p digits, Frobenius on exponents, then products."""
    return _power(f, r, None)


def power_reduced(f: Poly, r: int, q: int) -> Poly:
    """``f**r`` in ``A/(x_1^q, ..., x_n^q)``; ``power_reduced(f, 0, q) == 1``."""
    if r < 0:
        raise PreconditionError("exponent must be nonnegative")
    _check_q(f, q)
    return _power(f, r, q)


def in_box(f: Poly, q: int) -> bool:
    """True iff every monomial of ``f`` has some exponent ``>= q``."""
    return all(max(m, default=0) >= q for m in f._terms)

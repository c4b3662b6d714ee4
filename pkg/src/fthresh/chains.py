"""Threshold sequences over one-parameter families and their tails.

A family is a polynomial (or generator list) template whose exponents may
be the slot name ``m``.  Each member is evaluated independently; the report
orders neighbours only when their certified intervals allow it.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .config import DEFAULT_BUDGET, Budget
from .errors import FthreshError, InputError
from .fpt import FptBounds, fpt_bounds, fpt_pair_bounds
from .groebner import IdealHandle
from .poly import PolyRing, parse_template, split_top_level
from .testideal import DivisorSpec

SLOT = "m"


@dataclass(frozen=True)
class FamilySpec:
    """Members ``m_lo..m_hi`` of a template family.

    ``mode`` is ``"ideal"`` (threshold of the ideal generated by
    ``template``) or ``"pair"`` (divisor ``div(template)/(p^e - 1)`` against
    the ideal ``ideal_template``).
    """

    p: int
    nvars: int
    template: str
    m_lo: int
    m_hi: int
    mode: str = "ideal"
    ideal_template: str | None = None
    e: int = 1

    def __post_init__(self):
        if self.m_lo > self.m_hi:
            raise InputError("empty parameter range")
        if self.mode not in ("ideal", "pair"):
            raise InputError(f"unknown family mode {self.mode!r}")
        if self.mode == "pair" and not self.ideal_template:
            raise InputError("pair families need an ideal template")

    @property
    def ring(self) -> PolyRing:
        return PolyRing(self.p, self.nvars)

    def generators(self, text: str, m: int) -> list:
        return [parse_template(s, self.ring, SLOT, m) for s in split_top_level(text)]

    def instantiate(self, m: int):
        gens = self.generators(self.template, m)
        if self.mode == "ideal":
            return IdealHandle(gens, self.ring), None
        if len(gens) != 1:
            raise InputError("a pair template must be a single polynomial")
        return IdealHandle(self.generators(self.ideal_template, m), self.ring), DivisorSpec.standard(gens[0], self.e)

    def to_dict(self) -> dict:
        d = {"p": self.p, "nvars": self.nvars, "template": self.template, "m_lo": self.m_lo, "m_hi": self.m_hi, "mode": self.mode}
        if self.mode == "pair":
            d["ideal_template"] = self.ideal_template
            d["e"] = self.e
        return d


@dataclass(frozen=True)
class ChainEntry:
    m: int
    bounds: FptBounds | None
    error: str | None = None
    error_code: str | None = None

    @property
    def certified(self) -> bool:
        return self.bounds is not None and self.bounds.exact is not None


@dataclass(frozen=True)
class LimitEstimate:
    value: Fraction | None
    method: str
    note: str
    bracket: tuple | None = None
    residual: Fraction | None = None


@dataclass(frozen=True)
class ChainReport:
    family: FamilySpec
    entries: tuple
    relations: tuple
    ascending_runs: tuple
    nonincreasing: bool
    strictly_descending: bool
    limit: LimitEstimate | None
    extrapolation: LimitEstimate | None = None
    config: dict = field(default_factory=dict)

    @property
    def values(self) -> list:
        return [(e.m, e.bounds) for e in self.entries]

    @property
    def limit_estimate(self) -> Fraction | None:
        return None if self.limit is None else self.limit.value

    def to_dict(self) -> dict:
        return chain_report_dict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
        w.writerow(["m", "lower", "upper", "exact", "certificate", "relation_to_next", "error"])
        for i, e in enumerate(self.entries):
            b = e.bounds
            rel = self.relations[i] if i < len(self.relations) else ""
            w.writerow(
                [
                    e.m,
                    "" if b is None else str(b.lower),
                    "" if b is None else str(b.upper),
                    "" if b is None or b.exact is None else str(b.exact),
                    "" if b is None else (b.certificate or ""),
                    rel,
                    e.error or "",
                ]
            )
        return buf.getvalue()


def _evaluate(args):
    fam, m, n_max, budget = args
    try:
        ideal, div = fam.instantiate(m)
        if div is None:
            return ChainEntry(m, fpt_bounds(ideal, n_max, budget=budget))
        return ChainEntry(m, fpt_pair_bounds(div, ideal, n_max, budget=budget))
    except FthreshError as exc:
        return ChainEntry(m, None, str(exc), getattr(exc, "code", type(exc).__name__))


def compare(a: FptBounds | None, b: FptBounds | None) -> str:
    """Order of two thresholds from their certified intervals: ``<``, ``>``, ``=`` or ``?``."""
    if a is None or b is None:
        return "?"
    if a.exact is not None and b.exact is not None and a.exact == b.exact:
        return "="
    if a.upper < b.lower:
        return "<"
    if a.lower > b.upper:
        return ">"
    return "?"


def ascending_runs(relations) -> list:
    """Maximal index intervals ``(i, j)`` joined by certified ``<`` relations."""
    runs, start = [], None
    for i, rel in enumerate(relations):
        if rel == "<":
            start = i if start is None else start
        else:
            if start is not None:
                runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(relations)))
    return runs


def scan_family(
    fam: FamilySpec, n_max: int | None = None, budget: Budget = DEFAULT_BUDGET, workers: int = 1
) -> ChainReport:
    """Threshold bounds for every member, neighbour relations, runs, limit probes."""
    n_max = budget.n_max if n_max is None else n_max
    jobs = [(fam, m, n_max, budget) for m in range(fam.m_lo, fam.m_hi + 1)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_evaluate, jobs))
    else:
        entries = [_evaluate(j) for j in jobs]
    entries.sort(key=lambda e: e.m)
    rels = tuple(compare(a.bounds, b.bounds) for a, b in zip(entries, entries[1:]))
    nonincreasing = bool(rels) and all(r in (">", "=") for r in rels)
    strictly = bool(rels) and all(r == ">" for r in rels)
    extrap = None
    if sum(e.certified for e in entries) >= 3:
        extrap = estimate_limit_values([(e.m, e.bounds.exact) for e in entries if e.certified])
    limit = slot_limit(fam, n_max, budget) if fam.mode == "ideal" else None
    if limit is None or limit.value is None:
        limit = extrap
    config = {"n_max": n_max, "denom_bound": budget.denom_bound, "workers_independent": True}
    return ChainReport(fam, tuple(entries), rels, tuple(ascending_runs(rels)), nonincreasing, strictly, limit, extrap, config)


# ---------------------------------------------------------------------------
# limits


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with least denominator in ``[lo, hi]`` (Stern-Brocot descent)."""
    if lo > hi:
        lo, hi = hi, lo
    fl = lo.numerator // lo.denominator
    if Fraction(fl) == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    inner = _simplest_between(1 / (hi - fl), 1 / (lo - fl))
    return fl + 1 / inner


def estimate_limit_values(points, k: int = 3) -> LimitEstimate:
    """Fit ``v = L + c/m`` exactly over the last ``k`` points and snap ``L``.

    The fit is least squares in exact rationals; ``L`` is replaced by the
    simplest rational within the largest residual of the fit.
    """
    pts = [(Fraction(m), Fraction(v)) for m, v in points]
    if len(pts) < 3:
        raise InputError("at least three certified values are needed")
    tail = pts[-k:]
    xs = [1 / m for m, _ in tail]
    ys = [v for _, v in tail]
    n = len(tail)
    mx, my = sum(xs) / n, sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise InputError("the parameter values must be distinct")
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
    intercept = my - slope * mx
    resid = max(abs(y - (intercept + slope * x)) for x, y in zip(xs, ys))
    value = intercept if resid == 0 else _simplest_between(intercept - resid, intercept + resid)
    note = (
        f"affine fit in 1/m over the last {n} certified values; numerical evidence only, "
        "a finite sequence does not determine its limit"
    )
    return LimitEstimate(value, "last-k-extrapolation", note, None, resid)


def slot_limit(fam: FamilySpec, n_max: int | None = None, budget: Budget = DEFAULT_BUDGET) -> LimitEstimate | None:
    """Threshold of the template with every slot-dependent term removed.

    Slot terms have degree at least ``m``, so for each fixed ``q`` the nu
    invariants of a member agree with those of the truncated template once
    ``m`` is large.  The member thresholds therefore converge to the
    truncated template's threshold, which is bracketed here.
    """
    if fam.mode != "ideal":
        return None
    ring = fam.ring
    probe = []
    for text in split_top_level(fam.template):
        fixed = parse_template(text, ring, SLOT, 0)
        base = max(fixed.degree(), 0) + 1
        a = parse_template(text, ring, SLOT, base)
        b = parse_template(text, ring, SLOT, base + 1)
        common = {mono: c for mono, c in a.terms.items() if b.terms.get(mono) == c}
        probe.append(type(a)(ring, common))
    gens = [g for g in probe if not g.is_zero()]
    if not gens:
        return LimitEstimate(Fraction(0), "slot-limit", "every term depends on the slot; members tend to zero")
    if any(g.is_unit() for g in gens):
        return None
    bounds = fpt_bounds(IdealHandle(gens, ring), n_max, budget=budget)
    text = ", ".join(str(g) for g in gens)
    note = f"limit of the family equals the threshold of ({text}) with slot terms removed"
    return LimitEstimate(bounds.exact, "slot-limit", note, (bounds.lower, bounds.upper))


def estimate_limit(report: ChainReport, method: str = "last-k-extrapolation", k: int = 3) -> LimitEstimate:
    """Tail estimate for a chain report.

    ``last-k-extrapolation`` uses the certified values only; ``slot-limit``
    evaluates the template with slot terms removed.
    """
    if method == "last-k-extrapolation":
        pts = [(e.m, e.bounds.exact) for e in report.entries if e.certified]
        return estimate_limit_values(pts, k)
    if method == "slot-limit":
        est = slot_limit(report.family, report.config.get("n_max"))
        if est is None:
            raise InputError("slot-limit needs an ideal-mode family with a proper limit")
        return est
    raise InputError(f"unknown limit method {method!r}")


# ---------------------------------------------------------------------------
# serialization


def _frac(x):
    return None if x is None else str(x)


def bounds_dict(b: FptBounds, names) -> dict:
    from .poly import format_monomial

    def wit(d):
        out = {}
        for k, v in d.items():
            if k == "witness":
                out[k] = None if v is None else format_monomial(v, names, explicit=True)
            elif isinstance(v, Fraction):
                out[k] = str(v)
            else:
                out[k] = v
        return out

    return {
        "lower": str(b.lower),
        "upper": str(b.upper),
        "exact": _frac(b.exact),
        "certificate": b.certificate,
        "raw_lower": _frac(b.raw_lower),
        "raw_upper": _frac(b.raw_upper),
        "lower_witness": wit(b.lower_witness),
        "upper_witness": wit(b.upper_witness),
        "levels": [wit(lv) for lv in b.levels],
    }


def _limit_dict(est: LimitEstimate | None):
    if est is None:
        return None
    return {
        "value": _frac(est.value),
        "method": est.method,
        "note": est.note,
        "bracket": None if est.bracket is None else [str(x) for x in est.bracket],
        "residual": _frac(est.residual),
    }


def chain_report_dict(r: ChainReport) -> dict:
    names = r.family.ring.var_names
    values = []
    for e in r.entries:
        item = {"m": e.m, "error": e.error, "error_code": e.error_code}
        item["bounds"] = None if e.bounds is None else bounds_dict(e.bounds, names)
        values.append(item)
    return {
        "family": r.family.to_dict(),
        "values": values,
        "relations": list(r.relations),
        "ascending_runs": [list(x) for x in r.ascending_runs],
        "nonincreasing": r.nonincreasing,
        "strictly_descending": r.strictly_descending,
        "limit_estimate": _frac(r.limit_estimate),
        "limit": _limit_dict(r.limit),
        "extrapolation": _limit_dict(r.extrapolation),
        "scan_config": r.config,
    }

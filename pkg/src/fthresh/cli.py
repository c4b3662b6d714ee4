"""``fthresh`` command line: subcommands, JSON job files, JSON/CSV reports.

Every invocation is turned into a job document, validated against the
shipped schema, executed, and reported with the job echoed under
``inputs``.  Exit codes: 0 success (including UNKNOWN answers), 2 malformed
input, 3 unmet precondition, 4 exhausted budget.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import jsonschema

from . import __version__
from .chains import FamilySpec, bounds_dict, chain_report_dict, scan_family
from .config import Budget
from .errors import FthreshError, InputError
from .fpt import fpt_bounds, fpt_pair_bounds, reduce_pair_to_ideal
from .frobenius import ci_check, fedder_pair_check, nu_invariant
from .groebner import IdealHandle
from .poly import PolyRing, format_monomial, split_top_level
from .testideal import DivisorSpec, MixedExponent, jumping_numbers, ntau, orbit_discreteness, test_ideal

SCHEMA_VERSION = "1"
COMMANDS = ("nu", "fpt", "fpt-pair", "fedder", "tau", "ntau", "jumps", "orbit", "reduce", "ci-check", "chain")
BUDGET_FLAGS = {"nmax": "n_max", "emax": "e_max", "denom_bound": "denom_bound", "sweep": "sweep"}


@lru_cache(maxsize=1)
def load_schema() -> dict:
    text = resources.files("fthresh").joinpath("schemas/fthresh-v1.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _validator(name: str):
    schema = load_schema()
    return jsonschema.Draft202012Validator({"$ref": f"#/$defs/{name}", "$defs": schema["$defs"]})


def validate(doc, name: str = "job") -> None:
    """Raise :class:`InputError` unless ``doc`` matches the named schema definition."""
    errors = sorted(_validator(name).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(x) for x in err.absolute_path) or "<root>"
        raise InputError(f"schema violation at {where}: {err.message}")


# ---------------------------------------------------------------------------
# formatting helpers


def _q(x):
    return None if x is None else str(Fraction(x))


def _ideal_out(ideal: IdealHandle) -> list:
    return ideal.basis_strings()


def _mono(m, ring):
    return None if m is None else format_monomial(m, ring.var_names, explicit=True)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad rational {text!r}") from None


# ---------------------------------------------------------------------------
# command handlers: (job, ring, budget) -> (fields, flags)


def _ring(job) -> PolyRing:
    return PolyRing(job["p"], job["nvars"])


def _ideal(ops, ring, key="ideal") -> IdealHandle:
    return IdealHandle([ring.parse(g) for g in ops[key]], ring, ops.get("order", "grevlex"))


def _target(ops, ring):
    if "ideal" in ops:
        return _ideal(ops, ring)
    if "f" in ops:
        return ring.parse(ops["f"])
    raise InputError("operands need 'f' or 'ideal'")


def _bounds_fields(b, ring):
    fields = bounds_dict(b, ring.var_names)
    return fields, ["EXACT" if b.exact is not None else "BOUNDS"]


def _cmd_nu(ops, ring, budget):
    w = nu_invariant(_target(ops, ring), ops["q"], budget)
    return {"nu": w.r, "q": w.q, "witness": _mono(w.surviving_monomial, ring)}, []


def _cmd_fpt(ops, ring, budget):
    return _bounds_fields(fpt_bounds(_target(ops, ring), budget=budget), ring)


def _divisor(ops, ring, default_standard=True):
    if "f" not in ops:
        return None
    f = ring.parse(ops["f"])
    e = ops.get("e", 1)
    if "multiplier" in ops:
        return DivisorSpec(f, e, _rational(ops["multiplier"]))
    return DivisorSpec.standard(f, e) if default_standard else DivisorSpec(f, e, Fraction(1))


def _cmd_fpt_pair(ops, ring, budget):
    div = _divisor(ops, ring)
    return _bounds_fields(fpt_pair_bounds(div, _ideal(ops, ring), budget=budget), ring)


def _cmd_fedder(ops, ring, budget):
    res = fedder_pair_check(ring.parse(ops["f"]), ops.get("e", 1), _ideal(ops, ring), _rational(ops["t"]), budget.n_max, budget)
    fields = {"result": res.result, "n": res.n, "witness": _mono(res.witness, ring), "mu": list(res.mu), "note": res.note}
    return fields, [res.result]


def _cmd_tau(ops, ring, budget):
    pairs = []
    if "f" in ops:
        pairs.append((ring.parse(ops["f"]), _rational(ops.get("s", "1"))))
    if "ideal" in ops:
        pairs.append((_ideal(ops, ring), _rational(ops.get("t", "1"))))
    if not pairs:
        raise InputError("tau needs 'f' or 'ideal'")
    res = test_ideal(MixedExponent(pairs), budget.e_max, budget)
    return {"ideal": _ideal_out(res.ideal), "level": res.level, "method": res.method}, [res.flag]


def _cmd_ntau(ops, ring, budget):
    div = _divisor(ops, ring, default_standard=False)
    a = _ideal(ops, ring) if "ideal" in ops else None
    if div is None and a is None:
        raise InputError("ntau needs 'f' or 'ideal'")
    res = ntau(div, a, _rational(ops.get("t", "0")), budget.sweep, budget)
    fields = {
        "ideal": _ideal_out(res.ideal),
        "level": res.level,
        "epsilon": _q(res.epsilon),
        "history": [{"level": l, "ideal": _ideal_out(i)} for l, i in res.history],
    }
    return fields, [res.flag]


def _cmd_jumps(ops, ring, budget):
    div = _divisor(ops, ring, default_standard=False)
    a = _ideal(ops, ring)
    rep = jumping_numbers(div, a, _rational(ops["lo"]), _rational(ops["hi"]), budget.denom_bound, budget.sweep, budget)
    fields = {
        "interval": [str(rep.interval[0]), str(rep.interval[1])],
        "jumps": [
            {"t": str(j.t), "side": j.side, "before": _ideal_out(j.before), "after": _ideal_out(j.after)} for j in rep.jumps
        ],
        "unresolved": [[str(a), str(b)] for a, b in rep.unresolved],
        "complete": rep.complete,
    }
    flags = [rep.flag] + ([] if rep.complete else ["UNRESOLVED"])
    return fields, flags


def _cmd_orbit(ops, ring, budget):
    rep = orbit_discreteness(_rational(ops["t"]), ops["q"], ops["l"], budget.step_budget, budget)
    return {"preperiod": rep.preperiod, "period": rep.period, "cycle": [str(x) for x in rep.cycle]}, []


def _cmd_reduce(ops, ring, budget):
    b, thr = reduce_pair_to_ideal(ring.parse(ops["f"]), ops.get("e", 1), _ideal(ops, ring), _rational(ops["t"]))
    return {"b": _ideal_out(b), "b_generators": [str(g) for g in b.generators], "threshold": str(thr)}, []


def _cmd_ci_check(ops, ring, budget):
    rep = ci_check([ring.parse(g) for g in ops["factors"]])
    return {"is_fpure_ci": rep.is_fpure_ci, "emb_bound": rep.emb_bound, "witness": _mono(rep.witness, ring)}, []


def _cmd_chain(ops, ring, budget):
    fam = FamilySpec(
        ring.p,
        ring.nvars,
        ops["template"],
        ops["m_lo"],
        ops["m_hi"],
        ops.get("mode", "ideal"),
        ops.get("ideal_template"),
        ops.get("e", 1),
    )
    rep = scan_family(fam, budget=budget, workers=ops.get("workers", 1))
    fields = chain_report_dict(rep)
    flags = ["EXACT" if all(e.certified for e in rep.entries) else "BOUNDS"]
    return fields, flags, rep


HANDLERS = {
    "nu": _cmd_nu,
    "fpt": _cmd_fpt,
    "fpt-pair": _cmd_fpt_pair,
    "fedder": _cmd_fedder,
    "tau": _cmd_tau,
    "ntau": _cmd_ntau,
    "jumps": _cmd_jumps,
    "orbit": _cmd_orbit,
    "reduce": _cmd_reduce,
    "ci-check": _cmd_ci_check,
    "chain": _cmd_chain,
}


def _budget(job, env=None) -> Budget:
    return Budget.from_env(env, **job.get("budgets", {}))


def execute(job: dict, env=None):
    """Validate and run one job; returns ``(report, chain_report_or_None)``."""
    validate(job, "job")
    budget = _budget(job, env)
    ops = job["operands"]
    ring = _ring(job) if job["command"] != "orbit" else None
    out = HANDLERS[job["command"]](ops, ring, budget)
    fields, flags = out[0], out[1]
    chain = out[2] if len(out) > 2 else None
    report = {
        "command": job["command"],
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "inputs": job,
        "config": budget.to_dict(),
        "flags": sorted(set(flags)),
    }
    for k, v in fields.items():
        if k in report:
            raise AssertionError(f"result field {k!r} collides with a report field")
        report[k] = v
    return report, chain


def run(job: dict, env=None) -> dict:
    """Execute a job document and return the report document."""
    return execute(job, env)[0]


def error_document(exc: FthreshError) -> dict:
    return {"error": {"code": exc.code, "message": str(exc), "exit_code": exc.exit_code}}


# ---------------------------------------------------------------------------
# output


def _flatten(doc, prefix="", out=None) -> dict:
    out = {} if out is None else out
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            _flatten(v, key + ".", out)
        elif isinstance(v, list):
            out[key] = json.dumps(v, sort_keys=True, separators=(",", ":"))
        else:
            out[key] = "" if v is None else v
    return out


def to_csv(report: dict, chain=None) -> str:
    if chain is not None:
        return chain.to_csv()
    flat = _flatten({k: v for k, v in report.items() if k not in ("inputs", "config")})
    flat["inputs"] = json.dumps(report["inputs"], sort_keys=True, separators=(",", ":"))
    buf = io.StringIO()
    w = csv.writer(buf, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
    keys = sorted(flat)
    w.writerow(keys)
    w.writerow([flat[k] if not isinstance(flat[k], bool) else str(flat[k]).lower() for k in keys])
    return buf.getvalue()


def to_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sp, ring=True):
    if ring:
        sp.add_argument("--p", type=int, required=True, help="characteristic")
        sp.add_argument("--vars", type=int, required=True, dest="nvars", help="number of variables")
    sp.add_argument("--nmax", type=int, help="deepest Frobenius level n")
    sp.add_argument("--emax", type=int, help="deepest root-chain level e")
    sp.add_argument("--denom-bound", type=int, dest="denom_bound", help="largest candidate denominator")
    sp.add_argument("--sweep", type=int, help="agreeing levels required by the epsilon sweep")
    sp.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fthresh", description="F-pure thresholds and test ideals over F_p.")
    ap.add_argument("--version", action="version", version=f"fthresh {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("nu", help="largest r with f^r outside m^[q]")
    _add_common(sp)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--ideal")
    sp.add_argument("poly", nargs="?")

    sp = sub.add_parser("fpt", help="F-pure threshold of a polynomial or ideal")
    _add_common(sp)
    sp.add_argument("--ideal")
    sp.add_argument("poly", nargs="?")

    pair_help = {
        "fpt-pair": "threshold of a pair (div(f)/(p^e-1), a)",
        "fedder": "purity of (div(f)/(p^e-1), a^t) level by level",
        "reduce": "rewrite a pair threshold question as an ideal one",
    }
    for name, text in pair_help.items():
        sp = sub.add_parser(name, help=text)
        _add_common(sp)
        sp.add_argument("--e", type=int, default=1)
        sp.add_argument("--f", required=True)
        sp.add_argument("--ideal", required=True)
        if name != "fpt-pair":
            sp.add_argument("--t", required=True)

    sp = sub.add_parser("tau", help="test ideal of f^s a^t")
    _add_common(sp)
    sp.add_argument("--f")
    sp.add_argument("--s")
    sp.add_argument("--ideal")
    sp.add_argument("--t")

    for name, text in (("ntau", "test ideal with the divisor scaled by (1 - eps)"), ("jumps", "jumping numbers in [lo, hi]")):
        sp = sub.add_parser(name, help=text)
        _add_common(sp)
        sp.add_argument("--f")
        sp.add_argument("--e", type=int, default=1)
        sp.add_argument("--multiplier")
        sp.add_argument("--ideal", required=name == "jumps")
        if name == "ntau":
            sp.add_argument("--t", default="0")
        else:
            sp.add_argument("--lo", required=True)
            sp.add_argument("--hi", required=True)

    sp = sub.add_parser("orbit", help="eventual cycle of x -> qx mod shifts")
    _add_common(sp, ring=False)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--l", type=int, required=True)
    sp.add_argument("t")

    sp = sub.add_parser("ci-check", help="purity test for a complete intersection")
    _add_common(sp)
    sp.add_argument("factors", nargs="+")

    sp = sub.add_parser("chain", help="scan a one-parameter family")
    _add_common(sp)
    sp.add_argument("--template", required=True)
    sp.add_argument("--m-lo", type=int, required=True, dest="m_lo")
    sp.add_argument("--m-hi", type=int, required=True, dest="m_hi")
    sp.add_argument("--mode", choices=("ideal", "pair"), default="ideal")
    sp.add_argument("--ideal-template", dest="ideal_template")
    sp.add_argument("--e", type=int, default=1)
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("run", help="execute a JSON job file")
    sp.add_argument("jobfile")
    sp.add_argument("--csv", action="store_true")
    return ap


def job_from_args(args) -> dict:
    ops: dict = {}
    cmd = args.command
    for name in ("f", "t", "s", "multiplier", "lo", "hi", "template", "ideal_template", "mode", "q", "l", "m_lo", "m_hi"):
        v = getattr(args, name, None)
        if v is not None:
            ops[name] = v
    if getattr(args, "ideal", None):
        ops["ideal"] = split_top_level(args.ideal)
    if getattr(args, "poly", None):
        ops["f"] = args.poly
    if cmd == "ci-check":
        ops["factors"] = list(args.factors)
    if cmd in ("fpt-pair", "fedder", "reduce", "ntau", "jumps", "chain"):
        ops["e"] = args.e
    if cmd == "chain":
        ops["workers"] = args.workers
        if args.mode != "pair":
            ops.pop("e")
    job = {"schema_version": SCHEMA_VERSION, "command": cmd, "operands": ops}
    if cmd != "orbit":
        job["p"] = args.p
        job["nvars"] = args.nvars
    budgets = {}
    for flag, field in BUDGET_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            budgets[field] = v
    if budgets:
        job["budgets"] = budgets
    return job


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            try:
                with open(args.jobfile, encoding="utf-8") as fh:
                    doc = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise InputError(f"cannot read job file: {exc}") from None
            validate(doc, "jobfile")
            jobs = doc["jobs"] if "jobs" in doc else [doc]
            reports, code = [], 0
            for job in jobs:
                try:
                    reports.append(run(job))
                except FthreshError as exc:
                    reports.append(error_document(exc))
                    code = code or exc.exit_code
            if args.csv:
                for rep in reports:
                    stdout.write(to_csv(rep) if "error" not in rep else to_json(rep))
            else:
                stdout.write(to_json(reports[0] if "jobs" not in doc else {"reports": reports}))
            return code
        report, chain = execute(job_from_args(args))
        stdout.write(to_csv(report, chain) if args.csv else to_json(report))
        return 0
    except FthreshError as exc:
        stdout.write(to_json(error_document(exc)))
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

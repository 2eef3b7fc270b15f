"""Command-line entry point: ``chainforge <command> ...``.

Every run prints a short summary and writes a JSON report (``--out``).
Exit status: 0 when every verdict matches its expectation, 1 on a mismatch,
2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path
from typing import Any, Optional

from . import __version__
from . import chains as ch
from . import free_product as fp
from . import ideals as idl
from . import matrix_constructions as mc
from .errors import ChainforgeError, ChainValidationError

SCHEMA_VERSION = 1
HORIZON_CAP = 12
EXAMPLES = ("ex2.1", "ex2.2", "ex2.4", "ex3.4", "ex4.5", "exKL", "ex6.3")


class UsageError(Exception):
    pass


class Expectations:
    """Collects (check, expected, actual) triples."""

    def __init__(self):
        self.items: list[dict] = []

    def check(self, name: str, expected: Any, actual: Any) -> None:
        self.items.append({"check": name, "expected": expected, "actual": actual, "ok": expected == actual})

    @property
    def ok(self) -> bool:
        return all(i["ok"] for i in self.items)


def _seed() -> int:
    raw = os.environ.get("CHAINFORGE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CHAINFORGE_SEED must be an integer, got {raw!r}") from None


def _load_json(path: str) -> tuple[Any, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return data, hashlib.sha256(text.encode()).hexdigest()


def _status_expectation(spec: dict, kind: str) -> Optional[str]:
    exp = spec.get("expect")
    if isinstance(exp, dict):
        return exp.get(kind)
    if isinstance(exp, str):
        group = {"prime": ("prime", "not_prime"), "semiprime": ("semiprime", "not_semiprime")}[kind]
        return exp if exp in group else None
    return None


# -- examples ---------------------------------------------------------------------

def _example_monomial(name: str, horizon: int, exp: Expectations) -> dict:
    if name == "ex2.2":
        fam = ch.build_chain("ex2_2", i_max=min(horizon, 3), n_max=horizon)
    else:
        fam = ch.build_chain(name.replace(".", "_"), horizon=horizon)
    val = ch.validate_chain(fam)
    rep = ch.index_report(fam)
    flags = ch.almost_prime_flags(fam, report=rep)
    exp.check("validation", True, val.ok)
    exp.check("stages_prime", True, all(s["prime"] == "prime" for s in rep.stages))
    if name == "ex2.1":
        exp.check("limit_equals_RxR_squared", "equal", fam.checks["limit_equals_RxR_squared"])
        exp.check("limit_semiprime", ["not_semiprime", "x"],
                  [rep.limits[0]["semiprime"], rep.limits[0]["semiprime_witness"]])
        exp.check("index_lower_bound", 1, rep.index_lower_bound)
    elif name == "ex2.2":
        i_max = fam.params["i_max"]
        for i, lim in enumerate(rep.limits, start=1):
            exp.check(f"L{i}_equals_stated_sum", "equal", fam.checks[f"L{i}_equals_stated_sum"])
            exp.check(f"L{i}_semiprime", ["not_semiprime", "x" + "z" * i + "x"],
                      [lim["semiprime"], lim["semiprime_witness"]])
        exp.check("index_lower_bound", i_max, rep.index_lower_bound)
    else:
        for key in ("union_vs_ReyR.ReR", "union_vs_ReR.RyeR", "ReyR.ReR_vs_ReR.RyeR"):
            exp.check(key, "equal", fam.checks[key])
        exp.check("limit_semiprime", ["not_semiprime", "ey"],
                  [rep.limits[0]["semiprime"], rep.limits[0]["semiprime_witness"]])
        exp.check("index_lower_bound", 1, rep.index_lower_bound)
    return {"validation": val.to_json(), "report": rep.to_json(), "almost_prime": [f.to_json() for f in flags]}


def _example(args, exp: Expectations) -> dict:
    name, horizon = args.name, args.horizon
    if name in ("ex2.1", "ex2.2", "ex2.4"):
        return _example_monomial(name, horizon if horizon is not None else (3 if name == "ex2.2" else 6), exp)
    if name == "ex3.4":
        h = horizon if horizon is not None else 6
        rep = fp.union_report(h, samples=10, seed=_seed(), probes=2)
        exp.check("absorption_exact", True, rep["absorption_exact"])
        exp.check("x_outside_every_P_m", True, rep["x_outside_every_P_m"])
        exp.check("x_r_x_in_union", True, rep["x_r_x_in_union"])
        exp.check("stages_probed_prime", True, all(s["status"] == "probed_prime" for s in rep["stages"]))
        exp.check("almost_prime", True, rep["almost_prime"])
        return {"union_report": rep}
    if name == "ex4.5":
        stages, union = mc.ex4_5_chain(horizon if horizon is not None else 5)
        rep = mc.grid_union_report(stages, union)
        exp.check("stages_prime", True, all(rep["stages_prime"]))
        exp.check("union_prime", False, rep["union_is_prime"])
        exp.check("union_witness", {"a": "1*e11", "b": "1*e22"}, rep["witness"])
        exp.check("almost_prime", True, rep["almost_prime"])
        return {"union_report": rep}
    if name == "exKL":
        rep = mc.kl_chain_report(horizon if horizon is not None else 6, seed=_seed())
        exp.check("union_contains_a", False, rep["union_contains_a"])
        exp.check("aRa_eventually_zero", True, rep["aRa_eventually_zero"])
        exp.check("union_is_semiprime", False, rep["union_is_semiprime"])
        return {"kl_report": rep}
    n = args.n if args.n is not None else 3
    rep = mc.rn_chain_report(n, horizon=horizon if horizon is not None else 3)
    exp.check("index", n - 1, rep["index"])
    exp.check("bound_holds", True, rep["bound_holds"])
    exp.check("all_stages_prime", True, rep["all_stages_prime"])
    exp.check("recursion_consistent", True, rep["recursion_consistent"])
    return {"rn_report": rep}


# -- file-driven commands ------------------------------------------------------------

def _ideal_check(args, exp: Expectations, inputs: dict) -> dict:
    spec, digest = _load_json(args.spec)
    inputs[args.spec] = digest
    if not isinstance(spec, dict):
        raise UsageError(f"{args.spec}: top level must be an object")
    ideal = idl.ideal_from_spec(spec)
    wanted = [k for k in ("prime", "semiprime", "closure") if getattr(args, k)] or ["prime", "semiprime"]
    out: dict = {"ideal": spec.get("name"), "generators": sorted(ideal.generators or [])}
    if "prime" in wanted:
        v = idl.is_prime(ideal)
        out["prime"] = v.to_json()
        want = _status_expectation(spec, "prime")
        if want is not None:
            exp.check("prime", want, v.status.value)
    if "semiprime" in wanted:
        v = idl.is_semiprime(ideal)
        out["semiprime"] = v.to_json()
        want = _status_expectation(spec, "semiprime")
        if want is not None:
            exp.check("semiprime", want, v.status.value)
    if "closure" in wanted:
        closure = idl.semiprime_closure(ideal)
        out["closure"] = {"states": closure.lang.n_states,
                          "equals_input": idl.equal(closure, ideal),
                          "automaton": closure.lang.to_edges()}
    return out


def _chain_report(args, exp: Expectations, inputs: dict) -> dict:
    spec, digest = _load_json(args.spec)
    inputs[args.spec] = digest
    fam = ch.chain_spec_from_json(spec)
    val = ch.validate_chain(fam, word_len=args.word_len)
    exp.check("validation", True, val.ok)
    rep = ch.index_report(fam, seed=_seed())
    out = {"validation": val.to_json(), "report": rep.to_json()}
    try:
        out["almost_prime"] = [f.to_json() for f in ch.almost_prime_flags(fam, report=rep)]
    except ChainValidationError as exc:
        out["almost_prime"] = {"error": str(exc), "stage": exc.index}
    expect = spec.get("expect") or {}
    if "index_lower_bound" in expect:
        exp.check("index_lower_bound", expect["index_lower_bound"], rep.index_lower_bound)
    return out


def _grid_check(args, exp: Expectations, inputs: dict) -> dict:
    spec, digest = _load_json(args.spec)
    inputs[args.spec] = digest
    g = mc.grid_from_json(spec)
    oracle = mc.grid_condition_star_oracle(g, args.oracle_degree, args.oracle_vars)
    out = {
        "grid": str(g),
        "semiprime": mc.grid_is_semiprime(g),
        "prime": mc.grid_is_prime(g),
        "prime_shape": mc.grid_prime_shape(g),
        "condition_star": oracle.to_json(),
        "minimal_primes": [str(p) for p in mc.grid_minimal_primes(g)],
    }
    if not out["prime"]:
        w = mc.grid_witness(g)
        out["witness"] = w.to_json() if w is not None else None
    exp.check("oracle_consistent", True, oracle.consistent)
    for key in ("prime", "semiprime"):
        want = (spec.get("expect") or {}).get(key)
        if want is not None:
            exp.check(key, want, out[key])
    return out


def _freeproduct(args, exp: Expectations) -> dict:
    if args.action == "witness":
        if not args.v:
            raise UsageError("freeproduct witness needs at least one --v")
        vs = [fp.RatFunc(v) for v in args.v]
        b = fp.restricted_witness(vs, args.m, args.side)
        ok = fp.verify_restricted_witness(vs, args.m, b)
        exp.check("verified", True, ok)
        return {"V": [str(v) for v in vs], "m": args.m, "side": args.side, "b": str(b), "verified": ok}
    if args.action == "probe":
        if args.f is None or args.f2 is None:
            raise UsageError("freeproduct probe needs --f and --f2")
        f, f2 = fp.parse_tensor(args.f), fp.parse_tensor(args.f2)
        cert = fp.prime_probe(f, f2, args.m)
        exp.check("verified", True, cert.verified)
        return {"f": str(f), "f2": str(f2), "m": args.m, "certificate": cert.to_json(), "product": str(cert.product)}
    rep = fp.union_report(args.max_m, args.samples, seed=_seed())
    exp.check("absorption_exact", True, rep["absorption_exact"])
    exp.check("x_outside_every_P_m", True, rep["x_outside_every_P_m"])
    return {"union_report": rep}


def _oracle_compare(args, exp: Expectations, inputs: dict) -> dict:
    spec, digest = _load_json(args.spec)
    inputs[args.spec] = digest
    ideal = idl.ideal_from_spec(spec)
    out = {}
    for kind, decide in (("prime", idl.is_prime), ("semiprime", idl.is_semiprime)):
        verdict = decide(ideal)
        brute = idl.brute_force_check(ideal, kind, args.max_u, args.max_w)
        positive = verdict.status.value == kind
        # a bounded search can only refute, never confirm
        agrees = not (positive and isinstance(brute, idl.Witness))
        if not positive:
            w = verdict.witness
            u, u2 = (w if kind == "prime" else (w, w))
            certified = idl.certify_pair(ideal, u, u2)
            exp.check(f"{kind}_witness_certified", True, certified)
        exp.check(f"{kind}_agrees", True, agrees)
        out[kind] = {"automaton": verdict.to_json(), "brute_force": brute.to_json(), "agrees": agrees}
    return out


# -- driver ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chainforge", description="Decision procedures for prime ideal chains.")
    p.add_argument("--out", default="report.json", help="report path (default: ./report.json)")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    sub = p.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("example", help="reproduce a builtin example")
    ex.add_argument("name", choices=EXAMPLES)
    ex.add_argument("--horizon", type=int)
    ex.add_argument("--n", type=int)

    ideal = sub.add_parser("ideal", help="monomial ideal checks")
    ideal_sub = ideal.add_subparsers(dest="action", required=True)
    ic = ideal_sub.add_parser("check")
    ic.add_argument("spec")
    ic.add_argument("--prime", action="store_true")
    ic.add_argument("--semiprime", action="store_true")
    ic.add_argument("--closure", action="store_true")

    chain = sub.add_parser("chain", help="chain reports")
    chain_sub = chain.add_subparsers(dest="action", required=True)
    cr = chain_sub.add_parser("report")
    cr.add_argument("spec")
    cr.add_argument("--word-len", type=int, default=ch.DEFAULT_WORD_LEN)

    grid = sub.add_parser("grid", help="2x2 grid ideal checks")
    grid_sub = grid.add_subparsers(dest="action", required=True)
    gc = grid_sub.add_parser("check")
    gc.add_argument("spec")
    gc.add_argument("--oracle-degree", type=int, default=2)
    gc.add_argument("--oracle-vars", type=int, default=4)

    fpp = sub.add_parser("freeproduct", help="free product membership and certificates")
    fpp.add_argument("action", choices=("probe", "witness", "union"))
    fpp.add_argument("--f")
    fpp.add_argument("--f2")
    fpp.add_argument("--v", action="append")
    fpp.add_argument("--m", type=int, default=1)
    fpp.add_argument("--side", choices=("right", "left"), default="right")
    fpp.add_argument("--max-m", type=int, default=10)
    fpp.add_argument("--samples", type=int, default=10)

    oc = sub.add_parser("oracle", help="automaton vs brute-force comparison")
    oc_sub = oc.add_subparsers(dest="action", required=True)
    cmp_ = oc_sub.add_parser("compare")
    cmp_.add_argument("spec")
    cmp_.add_argument("--max-u", type=int, default=4)
    cmp_.add_argument("--max-w", type=int, default=5)
    return p


def _validate_args(args) -> None:
    h = getattr(args, "horizon", None)
    if h is not None and not 1 <= h <= HORIZON_CAP:
        raise UsageError(f"--horizon must be in 1..{HORIZON_CAP}, got {h}")
    if getattr(args, "n", None) is not None and not 2 <= args.n <= 5:
        raise UsageError(f"--n must be in 2..5, got {args.n}")
    for name in ("m", "max_u", "max_w", "oracle_degree", "oracle_vars", "max_m", "samples", "word_len"):
        v = getattr(args, name, None)
        if v is not None and v < (0 if name == "m" else 1):
            raise UsageError(f"--{name.replace('_', '-')} is out of range: {v}")


def _summary(command: str, exp: Expectations) -> str:
    lines = [f"chainforge {command}: {'ok' if exp.ok else 'MISMATCH'}"]
    for item in exp.items:
        mark = "ok " if item["ok"] else "BAD"
        lines.append(f"  [{mark}] {item['check']}: {item['actual']}")
    return "\n".join(lines)


def run(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    exp = Expectations()
    inputs: dict[str, str] = {}
    start = time.perf_counter()
    try:
        seed = _seed()
        _validate_args(args)
        if args.command == "example":
            body = _example(args, exp)
        elif args.command == "ideal":
            body = _ideal_check(args, exp, inputs)
        elif args.command == "chain":
            body = _chain_report(args, exp, inputs)
        elif args.command == "grid":
            body = _grid_check(args, exp, inputs)
        elif args.command == "freeproduct":
            body = _freeproduct(args, exp)
        else:
            body = _oracle_compare(args, exp, inputs)
    except (UsageError, ChainforgeError, KeyError, TypeError, ValueError) as exc:
        print(f"chainforge: error: {exc}", file=sys.stderr)
        return 2
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": argv,
        "inputs": inputs,
        "seed": seed,
        "result": body,
        "expectations": exp.items,
        "ok": exp.ok,
    }
    if args.timings:
        report["timings"] = {"total_seconds": round(time.perf_counter() - start, 4)}
    text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    try:
        Path(args.out).write_text(text)
    except OSError as exc:
        print(f"chainforge: error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return 2
    print(_summary(args.command, exp))
    return 0 if exp.ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

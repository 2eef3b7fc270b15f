"""Ascending chains of ideals, their limits, and chain-index reports."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Optional

from . import automata as fa
from . import free_product as fp
from . import ideals as idl
from . import matrix_constructions as mc
from .errors import ChainValidationError, ConfigurationError
from .ideals import MonomialIdeal, Status
from .words import Alphabet, RewriteSystem, enumerate_words

BUILTINS = ("ex2_1", "ex2_2", "ex2_4", "ex3_4", "ex4_5", "exKL", "ex6_3")
MONOMIAL_KINDS = ("free", "idempotent_quotient")
DEFAULT_HORIZON = 6
DEFAULT_WORD_LEN = 6
# matrix entries are probed up to this degree in the union check
MATRIX_DEGREE_CAP = 3


@dataclass
class Limit:
    position: int           # number of stages below the limit
    handle: Any
    label: str


@dataclass
class ChainFamily:
    name: str
    index_scheme: str
    ring_kind: str
    stages: list
    labels: list[str]
    limits: list[Limit]
    params: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AlmostPrimeFlag:
    label: str
    is_union_of_prime_chain: bool
    is_prime: bool
    basis: str = "decided"

    @property
    def almost_prime(self) -> bool:
        return self.is_union_of_prime_chain and not self.is_prime

    def to_json(self):
        return {"label": self.label, "union_of_prime_chain": self.is_union_of_prime_chain,
                "prime": self.is_prime, "almost_prime": self.almost_prime, "basis": self.basis}


@dataclass
class ChainReport:
    name: str
    ring_kind: str
    horizon: int
    stages: list[dict]
    limits: list[dict]
    extras: dict = field(default_factory=dict)

    @property
    def index_lower_bound(self) -> int:
        return sum(1 for lim in self.limits if lim["prime"] == Status.NOT_PRIME.value)

    def to_json(self):
        return {"chain": self.name, "ring_kind": self.ring_kind, "horizon": self.horizon,
                "stages": self.stages, "limits": self.limits,
                "index_lower_bound": self.index_lower_bound, "extras": self.extras}


@dataclass
class ValidationReport:
    ok: bool
    horizon: int
    word_len: int
    failure: Optional[dict] = None

    def raise_for_failure(self):
        if not self.ok:
            raise ChainValidationError(self.failure["detail"], self.failure["check"], self.failure["index"])

    def to_json(self):
        return {"ok": self.ok, "horizon": self.horizon, "word_len": self.word_len, "failure": self.failure}


# -- builtin families -------------------------------------------------------------

def _ex2_1(horizon: int) -> ChainFamily:
    ab = Alphabet(("x", "y"))
    stages, labels = [], []
    for n in range(1, horizon + 1):
        gens = ["x" + "y" * k + "x" for k in range(n)]
        stages.append(idl.ideal_from_generators(ab, None, gens, f"P{n}"))
        labels.append(f"P{n}")
    xyx = fa.concatenation(fa.concatenation(fa.from_words(ab, ["x"]), _star(ab, "y")), fa.from_words(ab, ["x"]))
    limit = idl.ideal_from_language(ab, None, xyx, "union")
    rxr = idl.ideal_from_generators(ab, None, ["x"], "RxR")
    checks = {"limit_equals_RxR_squared": idl.compare(limit, idl.product(rxr, rxr)).value}
    return ChainFamily("ex2_1", "omega", "free", stages, labels,
                       [Limit(horizon, limit, "(RxR)^2")], {"horizon": horizon}, checks)


def _star(ab: Alphabet, letter: str) -> fa.Automaton:
    """letter*"""
    return fa.explore(ab, 0, lambda q, a: 0 if a == letter else None, lambda q: True)


def _ex2_2(i_max: int, n_max: int) -> ChainFamily:
    ab = Alphabet(("x", "y", "z"))
    sigma = fa.universal(ab)

    def block(i):
        return "x" + "z" * i + "x"

    def level(i, middle):
        inner = fa.concatenation(fa.concatenation(fa.from_words(ab, [block(i)]), middle),
                                 fa.from_words(ab, [block(i)]))
        lang = fa.concatenation(fa.concatenation(sigma, inner), sigma)
        if i > 0:
            lang = fa.union(lang, fa.from_factor_patterns(ab, [block(j) for j in range(i)]))
        return lang

    stages, labels, limits = [], [], []
    checks = {}
    for i in range(1, i_max + 1):
        for n in range(1, n_max + 1):
            lang = level(i, fa.letter_count_below(ab, "y", n))
            stages.append(idl.ideal_from_language(ab, None, lang, f"I({i},{n})"))
            labels.append(f"I({i},{n})")
        limit = idl.ideal_from_language(ab, None, level(i, sigma), f"L{i}")
        principal = idl.ideal_from_generators(ab, None, [block(i)])
        stated = idl.product(principal, principal)
        for j in range(i):
            stated = idl.sum_(stated, idl.ideal_from_generators(ab, None, [block(j)]))
        checks[f"L{i}_equals_stated_sum"] = idl.compare(limit, stated).value
        checks[f"L{i}_contains_square"] = idl.is_subideal(idl.product(principal, principal), limit)
        checks[f"L{i}_misses_{block(i)}"] = block(i) not in limit
        limits.append(Limit(len(stages), limit, f"L{i}"))
    return ChainFamily("ex2_2", "omega_times", "free", stages, labels, limits,
                       {"i_max": i_max, "n_max": n_max}, checks)


def _ex2_4(horizon: int) -> ChainFamily:
    ab = Alphabet(("e", "y"), frozenset("e"))
    rs = RewriteSystem.idempotent(ab)
    stages, labels = [], []
    for n in range(1, horizon + 1):
        gens = ["e" + "y" * k + "e" for k in range(1, n)]
        st = idl.ideal_from_generators(ab, rs, gens, f"P{n}") if gens else idl.zero_ideal(ab, rs).renamed("P1")
        stages.append(st)
        labels.append(f"P{n}")
    e, y = fa.from_words(ab, ["e"]), _star(ab, "y")
    eyye = fa.concatenation(fa.concatenation(e, fa.concatenation(fa.from_words(ab, ["y"]), y)), e)
    limit = idl.ideal_from_language(ab, rs, eyye, "union")
    rer = idl.ideal_from_generators(ab, rs, ["e"])
    first = idl.product(idl.ideal_from_generators(ab, rs, ["ey"]), rer)
    second = idl.product(rer, idl.ideal_from_generators(ab, rs, ["ye"]))
    checks = {
        "union_vs_ReyR.ReR": idl.compare(limit, first).value,
        "union_vs_ReR.RyeR": idl.compare(limit, second).value,
        "ReyR.ReR_vs_ReR.RyeR": idl.compare(first, second).value,
    }
    return ChainFamily("ex2_4", "omega", "idempotent_quotient", stages, labels,
                       [Limit(horizon, limit, "ReyReR")], {"horizon": horizon}, checks)


def _ex3_4(horizon: int) -> ChainFamily:
    stages = list(range(1, horizon + 1))
    return ChainFamily("ex3_4", "omega", "free_product", stages, [f"P{m}" for m in stages],
                       [Limit(horizon, "(RxR)^2", "(RxR)^2")], {"horizon": horizon})


def _ex4_5(horizon: int) -> ChainFamily:
    stages, union = mc.ex4_5_chain(horizon)
    return ChainFamily("ex4_5", "omega", "matrix_2x2", stages, [f"T{n}" for n in range(1, horizon + 1)],
                       [Limit(horizon, union, "[[M,M],[M,M]]")], {"horizon": horizon})


def _exKL(horizon: int) -> ChainFamily:
    stages = list(range(1, horizon + 1))
    return ChainFamily("exKL", "omega", "kl_ring", stages, [f"I{n}" for n in stages],
                       [Limit(horizon, "union", "U I_n")], {"horizon": horizon})


def _ex6_3(n: int, horizon: int) -> ChainFamily:
    ring = mc.RnRing(n)
    stages, labels, limits = [], [], []
    for k in range(n, 1, -1):
        for i in range(1, horizon + 1):
            stages.append(mc.rn_level_stage(ring, k, i))
            labels.append(f"level{k}.S{i}")
        limits.append(Limit(len(stages), mc.rn_level_union(ring, k), f"level{k}.union"))
    return ChainFamily("ex6_3", "recursive_levels", "matrix_rn", stages, labels, limits,
                       {"n": n, "horizon": horizon, "levels": n - 1})


def _explicit(specs: list, limit_spec: Optional[dict]) -> ChainFamily:
    if not isinstance(specs, list) or not specs:
        raise ConfigurationError("chain spec: 'explicit' must be a nonempty list of ideal specs")
    stages = [idl.ideal_from_spec(s) for s in specs]
    for idx in range(len(stages) - 1):
        if not idl.is_subideal(stages[idx], stages[idx + 1]):
            raise ChainValidationError(f"explicit stage {idx + 1} is not contained in stage {idx + 2}",
                                       "ascending", idx)
    limit = idl.ideal_from_spec(limit_spec) if limit_spec is not None else stages[-1]
    kind = "idempotent_quotient" if stages[0].rewrite is not None and stages[0].rewrite.rules else "free"
    labels = [s.get("name") or f"S{idx + 1}" for idx, s in enumerate(specs)]
    return ChainFamily("explicit", f"finite({len(stages)})", kind, stages, labels,
                       [Limit(len(stages), limit, "limit")], {"length": len(stages)})


def build_chain(spec, **params) -> ChainFamily:
    """Materialize a chain from a builtin name (plus parameters) or a chain spec dict."""
    if isinstance(spec, str):
        spec = {"builtin": spec, "params": params}
    if not isinstance(spec, dict):
        raise ConfigurationError("chain spec must be an object")
    if "explicit" in spec:
        return _explicit(spec["explicit"], spec.get("limit"))
    name = spec.get("builtin")
    if name not in BUILTINS:
        raise ConfigurationError(f"unknown builtin chain {name!r}; expected one of {', '.join(BUILTINS)}")
    p = dict(spec.get("params") or {})
    horizon = int(p.get("horizon", DEFAULT_HORIZON))
    if name == "ex2_2":
        i_max, n_max = int(p.get("i_max", 3)), int(p.get("n_max", 3))
        if not (1 <= i_max <= 4 and 1 <= n_max <= 6):
            raise ConfigurationError("ex2_2 supports i_max <= 4 and n_max <= 6")
        return _ex2_2(i_max, n_max)
    if name == "ex6_3":
        n = int(p.get("n", 3))
        return _ex6_3(n, int(p.get("horizon", 3)))
    if not 1 <= horizon <= 12:
        raise ConfigurationError(f"horizon must be in 1..12, got {horizon}")
    return {"ex2_1": _ex2_1, "ex2_4": _ex2_4, "ex3_4": _ex3_4, "ex4_5": _ex4_5, "exKL": _exKL}[name](horizon)


# -- validation -------------------------------------------------------------------

def _fail(horizon, word_len, check, index, detail) -> ValidationReport:
    return ValidationReport(False, horizon, word_len, {"check": check, "index": index, "detail": detail})


def _strictly_below(kind: str, a, b) -> bool:
    if kind in MONOMIAL_KINDS:
        return idl.compare(a, b) is fa.Relation.PROPER_SUBSET
    if kind == "matrix_2x2":
        return a <= b and not b <= a
    if kind == "matrix_rn":
        return mc._grid_le(a, b) and not mc._grid_le(b, a)
    if kind == "kl_ring":
        # delta_a lies in I_{a+1} but not in I_a
        d = mc.kl_delta(a)
        return b > a and mc.kl_in_In(d, b) and not mc.kl_in_In(d, a)
    if kind == "free_product":
        t = fp.x_k_x(fp.RatFunc.y_power(-b))
        return b > a and fp.p_membership(t, b) and not fp.p_membership(t, a)
    raise ConfigurationError(f"unknown ring kind {kind!r}")


def _below(kind: str, a, b) -> bool:
    if kind in MONOMIAL_KINDS:
        return idl.is_subideal(a, b)
    if kind == "matrix_2x2":
        return a <= b
    if kind == "matrix_rn":
        return mc._grid_le(a, b)
    # the remaining limits are the union of all stages by definition
    return True


def _matrix_entries(kind, g):
    return g.entries() if kind == "matrix_2x2" else g


def _limit_soundness(c: ChainFamily, lim: Limit, stages: list, word_len: int, seed: int = 0) -> Optional[str]:
    """A limit element of size <= word_len contained in no checked stage, or None."""
    kind = c.ring_kind
    if kind in MONOMIAL_KINDS:
        for w in enumerate_words(lim.handle.alphabet, word_len, lim.handle.ambient):
            if w in lim.handle and not any(w in s for s in stages):
                return w
        return None
    if kind in ("matrix_2x2", "matrix_rn"):
        entries = _matrix_entries(kind, lim.handle)
        fams = sorted({f for row in entries for e in row for _, fs in e.patterns for f in fs}
                      | {f for row in entries for e in row for c0, _ in e.patterns for (f, _), _ in c0}
                      or {1})
        vars_ = [(f, t) for f in fams for t in range(1, len(stages) + 1)]
        monos = mc.monomials_up_to(vars_, min(word_len, MATRIX_DEGREE_CAP))
        for a, row in enumerate(entries):
            for b, e in enumerate(row):
                for m in monos:
                    if mc.cvi_contains(e, m) and not any(
                            mc.cvi_contains(_matrix_entries(kind, s)[a][b], m) for s in stages):
                        return f"{mc.mono_str(m)} at ({a + 1},{b + 1})"
        return None
    rng = random.Random(seed)
    if kind == "kl_ring":
        top = stages[-1] if stages else 0
        for _ in range(20):
            e = mc.random_kl(rng, max_prefix=min(top, 4) or 1, fin=False)
            e = mc.KLElement(e.prefix, 0, 0)
            if not any(mc.kl_in_In(e, n) for n in stages):
                return f"sequence with prefix length {len(e.prefix)}"
        return None
    if kind == "free_product":
        for _ in range(10):
            k = fp.random_ratfunc(rng, max_pole=max(stages))
            if not any(fp.p_membership(fp.x_k_x(k), m) for m in stages):
                return f"x*({k})*x"
        return None
    raise ConfigurationError(f"unknown ring kind {kind!r}")


def validate_chain(c: ChainFamily, horizon: Optional[int] = None, word_len: int = DEFAULT_WORD_LEN) -> ValidationReport:
    """Finite checks: (a) strict ascent, (b) stages inside later limits, (c) limits are unions."""
    horizon = len(c.stages) if horizon is None else min(horizon, len(c.stages))
    if horizon < 2:
        raise ConfigurationError("validation needs horizon >= 2")
    kind = c.ring_kind
    stages = c.stages[:horizon]
    boundaries = {lim.position for lim in c.limits}
    for idx in range(horizon - 1):
        if idx + 1 in boundaries and c.index_scheme in ("omega_times", "recursive_levels"):
            lim = next(l for l in c.limits if l.position == idx + 1)
            if not (_below(kind, lim.handle, stages[idx + 1]) and _strictly_below(kind, stages[idx], stages[idx + 1])):
                return _fail(horizon, word_len, "a", idx,
                             f"{c.labels[idx + 1]} does not lie above the limit {lim.label}")
            continue
        if not _strictly_below(kind, stages[idx], stages[idx + 1]):
            return _fail(horizon, word_len, "a", idx, f"{c.labels[idx]} is not properly inside {c.labels[idx + 1]}")
    for lim in c.limits:
        for idx in range(min(lim.position, horizon)):
            if not _below(kind, stages[idx], lim.handle):
                return _fail(horizon, word_len, "b", idx, f"{c.labels[idx]} is not inside {lim.label}")
        if lim.position <= horizon:
            below = stages[:lim.position]
            start = max((l.position for l in c.limits if l.position < lim.position), default=0)
            bad = _limit_soundness(c, lim, below[start:], word_len)
            if bad is not None:
                return _fail(horizon, word_len, "c", lim.position,
                             f"{bad} lies in {lim.label} but in no stage up to {c.labels[lim.position - 1]}")
    return ValidationReport(True, horizon, word_len)


# -- verdicts ---------------------------------------------------------------------

def _monomial_entry(label, ideal: MonomialIdeal, semiprime: bool) -> dict:
    pv = idl.is_prime(ideal)
    out = {"label": label, "prime": pv.status.value, "prime_witness": list(pv.witness) if pv.witness else None}
    if semiprime:
        sv = idl.is_semiprime(ideal)
        out["semiprime"] = sv.status.value
        out["semiprime_witness"] = sv.witness
    return out


def _pstatus(flag: bool) -> str:
    return Status.PRIME.value if flag else Status.NOT_PRIME.value


def _sstatus(flag: bool) -> str:
    return Status.SEMIPRIME.value if flag else Status.NOT_SEMIPRIME.value


def index_report(c: ChainFamily, horizon: Optional[int] = None, seed: int = 0) -> ChainReport:
    """Verdicts for stages and limits; the index lower bound counts non-prime limits."""
    horizon = len(c.stages) if horizon is None else min(horizon, len(c.stages))
    stages = c.stages[:horizon]
    labels = c.labels[:horizon]
    limits = [lim for lim in c.limits if lim.position <= horizon]
    kind = c.ring_kind
    extras: dict = {"checks": dict(c.checks)} if c.checks else {}
    if kind in MONOMIAL_KINDS:
        srep = [_monomial_entry(lab, s, False) for lab, s in zip(labels, stages)]
        lrep = [dict(_monomial_entry(lim.label, lim.handle, True), position=lim.position) for lim in limits]
    elif kind == "matrix_2x2":
        srep = [{"label": lab, "prime": _pstatus(mc.grid_is_prime(s)), "prime_witness": None}
                for lab, s in zip(labels, stages)]
        lrep = []
        for lim in limits:
            rep = mc.grid_union_report(stages[:lim.position], lim.handle)
            lrep.append({"label": lim.label, "position": lim.position,
                         "prime": _pstatus(rep["union_is_prime"]), "prime_witness": rep["witness"],
                         "semiprime": _sstatus(rep["union_is_semiprime"]), "semiprime_witness": None,
                         "minimal_primes": rep["minimal_primes"]})
    elif kind == "matrix_rn":
        srep, lrep = _rn_entries(c, horizon)
    elif kind == "kl_ring":
        rep = mc.kl_chain_report(horizon=len(stages), seed=seed)
        srep = [{"label": lab, "prime": Status.NOT_PRIME.value, "prime_witness": st["prime_witness"],
                 "semiprime": Status.SEMIPRIME.value} for lab, st in zip(labels, rep["stages"])]
        lrep = [{"label": lim.label, "position": lim.position,
                 "prime": Status.NOT_PRIME.value, "prime_witness": ["a", "a"],
                 "semiprime": _sstatus(rep["union_is_semiprime"] is not False), "semiprime_witness": "a"}
                for lim in limits]
        extras["union_contains_a"] = rep["union_contains_a"]
        extras["aRa_eventually_zero"] = rep["aRa_eventually_zero"]
    elif kind == "free_product":
        rep = fp.union_report(max(stages), samples=6, seed=seed, probes=2)
        srep = [{"label": lab, "prime": "probed_prime" if st["status"] == "probed_prime" else Status.NOT_PRIME.value,
                 "prime_witness": None, "certificates": st["verified"]}
                for lab, st in zip(labels, rep["stages"])]
        lrep = [{"label": lim.label, "position": lim.position,
                 "prime": Status.NOT_PRIME.value, "prime_witness": ["x", "x"],
                 "semiprime": Status.NOT_SEMIPRIME.value, "semiprime_witness": "x"} for lim in limits]
        extras.update({k: rep[k] for k in ("absorption_exact", "x_outside_every_P_m", "x_r_x_in_union",
                                           "monotone_on_samples")})
    else:
        raise ConfigurationError(f"unknown ring kind {kind!r}")
    if kind == "matrix_rn":
        extras.update(c.checks)
    return ChainReport(c.name, kind, horizon, srep, lrep, extras)


def _rn_entries(c: ChainFamily, horizon: int):
    n, per_level = c.params["n"], c.params["horizon"]
    rep = mc.rn_chain_report(n, horizon=per_level)
    srep, lrep = [], []
    for lv in rep["levels"]:
        k = lv["level"]
        for st in lv["stages"]:
            srep.append({"label": f"level{k}.S{st['stage']}", "prime": st["status"], "prime_witness": st["witness"]})
        lrep.append({"label": f"level{k}.union", "position": len(srep),
                     "prime": lv["union_status"], "prime_witness": lv["union_witness"],
                     "quotient": lv["quotient"], "quotient_index": lv["quotient_index"]})
    keep = [e for e in lrep if e["position"] <= horizon]
    c.checks.update({"pi_class": n, "bound_holds": rep["index"] < n, "recursion_consistent": rep["recursion_consistent"]})
    return srep[:horizon], keep


def almost_prime_flags(c: ChainFamily, horizon: Optional[int] = None,
                       report: Optional[ChainReport] = None) -> list[AlmostPrimeFlag]:
    report = report or index_report(c, horizon)
    for idx, st in enumerate(report.stages):
        if st["prime"] not in (Status.PRIME.value, "probed_prime"):
            raise ChainValidationError(f"stage {st['label']} is not prime", "stage_prime", idx)
    basis = "probed" if any(st["prime"] == "probed_prime" for st in report.stages) else "decided"
    return [AlmostPrimeFlag(lim["label"], True, lim["prime"] == Status.PRIME.value, basis) for lim in report.limits]


def chain_spec_from_json(data) -> ChainFamily:
    if not isinstance(data, dict):
        raise ConfigurationError("chain spec must be a JSON object")
    if "builtin" not in data and "explicit" not in data:
        raise ConfigurationError("chain spec needs a 'builtin' or an 'explicit' field")
    return build_chain(data)


def tamper_limit(c: ChainFamily, handle, label: str = "tampered") -> ChainFamily:
    """Copy of ``c`` whose last limit is replaced (used to exercise validation)."""
    limits = list(c.limits)
    limits[-1] = Limit(limits[-1].position, handle, label)
    return replace(c, limits=limits)

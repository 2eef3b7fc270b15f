"""One test per acceptance criterion; each records a PASS/FAIL line."""

import json
import os
import random
import subprocess
import sys
import time

import pytest
import sympy

from chainforge import chains as ch
from chainforge import free_product as fp
from chainforge import ideals as idl
from chainforge import matrix_constructions as mc
from chainforge.automata import Relation
from chainforge.ideals import Status, Witness
from chainforge.words import Alphabet, RewriteSystem, contains_factor, enumerate_words, normal_form

from conftest import ACCEPTANCE
from corpus import random_ideal


class Criterion:
    def __init__(self, n):
        self.n = n
        self.failures: list[str] = []
        self.notes: list[str] = []

    def check(self, cond, label):
        if not cond:
            self.failures.append(label)

    def note(self, text):
        self.notes.append(text)

    def finish(self):
        ok = not self.failures
        detail = "; ".join(self.notes) if ok else "failed: " + ", ".join(self.failures[:5])
        ACCEPTANCE[self.n] = (ok, detail)
        print(f"criterion {self.n}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail


def timed(fn, *args):
    t = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t


def test_criterion_1_free_chain():
    c = Criterion(1)
    ab = Alphabet(("x", "y"))
    worst = 0.0
    for n in range(1, 9):
        p = idl.ideal_from_generators(ab, None, ["x" + "y" * k + "x" for k in range(n)])
        v, dt = timed(idl.is_prime, p)
        worst = max(worst, dt)
        c.check(v.status is Status.PRIME, f"P{n} prime")
        c.check(dt < 1.0, f"P{n} decided in {dt:.2f}s")
    fam = ch.build_chain("ex2_1", horizon=8)
    limit = fam.limits[0].handle
    rxr = idl.ideal_from_generators(ab, None, ["x"])
    rel, dt = timed(idl.compare, limit, idl.product(rxr, rxr))
    c.check(rel is Relation.EQUAL, "limit equals (RxR)^2")
    sv, dt2 = timed(idl.is_semiprime, limit)
    c.check(sv.status is Status.NOT_SEMIPRIME and sv.witness == "x", "limit not semiprime with witness x")
    c.check(max(dt, dt2) < 1.0, "limit decisions under 1s")
    c.note(f"P1..P8 prime, slowest {worst * 1000:.0f} ms; limit = (RxR)^2, witness x")
    c.finish()


def test_criterion_2_lex_chain():
    c = Criterion(2)
    fam = ch.build_chain("ex2_2", i_max=3, n_max=3)
    rep = ch.index_report(fam)
    c.check(len(rep.stages) == 9 and all(s["prime"] == "prime" for s in rep.stages), "I(i,n) prime")
    for i, lim in enumerate(rep.limits, start=1):
        c.check(fam.checks[f"L{i}_equals_stated_sum"] == "equal", f"L{i} equals stated sum")
        c.check(lim["semiprime"] == "not_semiprime" and lim["semiprime_witness"] == "x" + "z" * i + "x",
                f"L{i} witness")
    c.check(rep.index_lower_bound == 3, "index lower bound 3")
    c.note("9 stages prime, 3 limits equal the stated sums, witnesses xz^ix, index 3")
    c.finish()


def test_criterion_3_idempotent_chain():
    c = Criterion(3)
    fam = ch.build_chain("ex2_4", horizon=6)
    rep = ch.index_report(fam)
    c.check(all(s["prime"] == "prime" for s in rep.stages) and len(rep.stages) == 6, "P1..P6 prime")
    for key, rel in fam.checks.items():
        c.check(rel == "equal", key)
    lim = rep.limits[0]
    c.check(lim["semiprime"] == "not_semiprime" and lim["semiprime_witness"] == "ey", "witness ey")
    c.note("P1..P6 prime, three union descriptions equal, witness ey")
    c.finish()


def test_criterion_4_grids():
    c = Criterion(4)
    rng = random.Random(int(os.environ.get("CHAINFORGE_SEED", "0")))
    mismatches = 0
    for _ in range(200):
        g = mc.random_grid(rng)
        if not mc.grid_condition_star_oracle(g, 2, 4).consistent:
            mismatches += 1
    c.check(mismatches == 0, f"{mismatches} oracle mismatches")
    stages, union = mc.ex4_5_chain(5)
    rep = mc.grid_union_report(stages, union)
    c.check(rep["stages_prime"] == [True] * 5, "T1..T5 prime")
    c.check(not rep["union_is_prime"], "union not prime")
    c.check(rep["witness"] == {"a": "1*e11", "b": "1*e22"}, "witness (e11, e22)")
    m = mc.CommVarIdeal.of(families=[1])
    bad_chains = 0
    for _ in range(50):
        chain = mc.random_semiprime_chain(rng)
        u = chain[0]
        for g in chain[1:]:
            u = mc.IdealGrid(u.i11 + g.i11, u.i12 + g.i12, u.i21 + g.i21, u.i22 + g.i22, m)
        if not mc.grid_is_semiprime(u):
            bad_chains += 1
    c.check(bad_chains == 0, f"{bad_chains} non-semiprime chain unions")
    c.note("200 grids, 0 mismatches; T1..T5 prime, union witness (e11,e22); 50 semiprime unions")
    c.finish()


def test_criterion_5_kl_ring():
    c = Criterion(5)
    rng = random.Random(5)
    a = mc.kl_witness()
    c.check(not mc.kl_in_union(a), "a outside the union")
    for _ in range(100):
        r = mc.random_kl(rng)
        c.check((a * r * a).tail == (0, 0), "aRa tail")
    c.check(mc.symbolic_tail_identity(), "symbolic identity")
    alpha, beta = sympy.symbols("alpha beta")
    t = mc.tail_mul(mc.tail_mul((0, 1), (alpha, beta)), (0, 1))
    c.check(all(sympy.expand(v) == 0 for v in t), "symbolic product (0,0)")
    for _ in range(100):
        x, y, z = (mc.random_kl(rng) for _ in range(3))
        c.check((x * y) * z == x * (y * z), "associativity")
    c.note("a not in union; 100 aRa tails (0,0); symbolic identity; 100 associative triples")
    c.finish()


def test_criterion_6_rn_family():
    c = Criterion(6)
    for n in (2, 3, 4):
        rep = mc.rn_chain_report(n)
        c.check(rep["index"] == n - 1, f"n={n} index")
        c.check(rep["index"] < n and rep["bound_holds"], f"n={n} bound")
    rep2 = mc.rn_chain_report(2)
    stages, union = mc.ex4_5_chain(3)
    grid_rep = mc.grid_union_report(stages, union)
    lvl = rep2["levels"][0]
    c.check(lvl["union_witness"] == grid_rep["witness"], "n=2 witness matches grid report")
    c.check(lvl["union_block"] == str(union.i11), "n=2 union block is M")
    c.check([s["status"] == "prime" for s in lvl["stages"]] == grid_rep["stages_prime"], "n=2 stages prime")
    c.check((lvl["union_status"] == "not_prime") == (not grid_rep["union_is_prime"]), "n=2 union status")
    c.note("index n-1 < n for n = 2, 3, 4; n = 2 matches the 2x2 grid report")
    c.finish()


def test_criterion_7_free_product():
    c = Criterion(7)
    rng = random.Random(7)
    failures = 0
    for _ in range(20):
        m = rng.randint(0, 3)
        vs = [fp.random_ratfunc(rng, max_pole=5) for _ in range(rng.randint(1, 4))]
        b = fp.restricted_witness(vs, m)
        ok = all(fp.c0(v * b) == 0 for v in vs) and any(fp.valuation(v * b) < -m for v in vs)
        failures += not ok
    c.check(failures == 0, f"{failures} witness failures")
    probe_fail = 0
    for _ in range(20):
        m = rng.randint(0, 3)
        f = fp.random_homogeneous(rng, rng.randint(1, 3), m)
        g = fp.random_homogeneous(rng, rng.randint(1, 3), m)
        probe_fail += not fp.prime_probe(f, g, m).verified
    c.check(probe_fail == 0, f"{probe_fail} probe failures")
    for _ in range(20):
        k = fp.random_ratfunc(rng, max_pole=8)
        level = max(0, -fp.valuation(fp.decompose(k)[1])) if not fp.decompose(k)[1].is_zero() else 0
        t = fp.x_k_x(k)
        c.check(fp.p_membership(t, level) and (level == 0 or not fp.p_membership(t, level - 1)),
                f"absorption of {k}")
    x = fp.parse_tensor("x")
    c.check(all(not fp.p_membership(x, m) for m in range(11)), "x outside P_m")
    c.note("20 witnesses and 20 probe certificates verified; absorption exact; x outside P_0..P_10")
    c.finish()


def _generator_member(i, w):
    return contains_factor(normal_form(w, i.rewrite), i.generators) is not None


def test_criterion_8_oracle_equivalence():
    c = Criterion(8)
    rng = random.Random(88)
    contradictions = certified = 0
    for _ in range(100):
        i = random_ideal(rng)
        pv, sv = idl.is_prime(i), idl.is_semiprime(i)
        bp = idl.brute_force_check(i, "prime", 5, 6)
        bs = idl.brute_force_check(i, "semiprime", 5, 6)
        if pv.status is Status.PRIME and isinstance(bp, Witness):
            contradictions += 1
        if sv.status is Status.SEMIPRIME and isinstance(bs, Witness):
            contradictions += 1
        words = list(enumerate_words(i.alphabet, 6, i.ambient))
        for verdict, pair in ((pv, pv.witness), (sv, (sv.witness, sv.witness) if sv.witness else None)):
            if pair is None:
                continue
            u, u2 = pair
            # direct recomputation: outside by factor test, every short sandwich inside
            ok = not _generator_member(i, u) and not _generator_member(i, u2)
            ok &= all(_generator_member(i, u + w + u2) for w in words)
            ok &= idl.certify_pair(i, u, u2)
            c.check(ok, f"witness {pair} for {sorted(i.generators)}")
            certified += ok
    c.check(contradictions == 0, f"{contradictions} contradictions")
    c.note(f"100 ideals, 0 contradictions, {certified} witnesses recomputed")
    c.finish()


def _cli(args, out, env):
    return subprocess.run([sys.executable, "-m", "chainforge.cli", "--out", str(out), *args],
                          capture_output=True, env=env, check=False)


def test_criterion_9_determinism(tmp_path):
    c = Criterion(9)
    env = dict(os.environ, CHAINFORGE_SEED="42")
    commands = [["example", "ex2.1", "--horizon", "6"], ["example", "ex3.4", "--horizon", "2"],
                ["freeproduct", "union", "--max-m", "3", "--samples", "4"], ["example", "exKL"]]
    for args in commands:
        bodies = []
        for k in range(2):
            out = tmp_path / "report.json"
            proc = _cli(args, out, env)
            c.check(proc.returncode == 0, f"{args} exit {proc.returncode}")
            bodies.append(out.read_bytes())
        c.check(bodies[0] == bodies[1], f"{args} byte-identical")
        c.check(json.loads(bodies[0])["seed"] == 42, "seed recorded")
    c.note(f"{len(commands)} commands byte-identical across runs with CHAINFORGE_SEED=42")
    c.finish()

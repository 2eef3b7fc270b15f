"""The free product F[x] * K with K = Q(y) valued by the order at y = 0.

K splits as Q + K0 where K0 holds the functions whose Laurent expansion at 0
has no constant term.  W_m = {k : v(k) >= -m}.  Modulo the ideal L' generated
by x^2, every element is a sum of simple tensors b0 x b1 x ... x bn whose
inner slots lie in K0, and P_m = R x W_m x R is recognised slot by slot:
inner slots are reduced to their principal part below -m, the end slots are
compared by exact linear algebra.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Optional, Sequence, Union

import sympy
from sympy.polys.domains import QQ
from sympy.polys.fields import field as frac_field

from .errors import ConfigurationError, SearchBudgetExceeded

_K, _Y = frac_field("y", QQ)
INF = math.inf


def _frac(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


class RatFunc:
    """Exact element of Q(y)."""

    __slots__ = ("_f",)

    def __init__(self, value=0):
        if isinstance(value, RatFunc):
            self._f = value._f
        elif isinstance(value, (int, Fraction)):
            value = Fraction(value)
            self._f = _K(QQ(value.numerator, value.denominator))
        elif isinstance(value, str):
            self._f = _parse_ratfunc(value)
        else:
            self._f = _K(value)

    @classmethod
    def y_power(cls, k: int) -> "RatFunc":
        r = cls()
        r._f = _Y ** k
        return r

    @classmethod
    def from_coeffs(cls, coeffs: dict[int, Fraction]) -> "RatFunc":
        """Laurent polynomial sum(c * y^k)."""
        f = _K(0)
        for k, c in coeffs.items():
            if c:
                f += _K(QQ(c.numerator, c.denominator)) * _Y ** k
        r = cls()
        r._f = f
        return r

    def _wrap(self, f) -> "RatFunc":
        r = RatFunc()
        r._f = f
        return r

    def __add__(self, o):
        return self._wrap(self._f + RatFunc(o)._f)

    __radd__ = __add__

    def __sub__(self, o):
        return self._wrap(self._f - RatFunc(o)._f)

    def __rsub__(self, o):
        return self._wrap(RatFunc(o)._f - self._f)

    def __mul__(self, o):
        return self._wrap(self._f * RatFunc(o)._f)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = RatFunc(o)
        if o.is_zero():
            raise ZeroDivisionError("division by zero in Q(y)")
        return self._wrap(self._f / o._f)

    def __neg__(self):
        return self._wrap(-self._f)

    def __eq__(self, o):
        try:
            return self._f == RatFunc(o)._f
        except Exception:
            return NotImplemented

    def __hash__(self):
        return hash(str(self))

    def is_zero(self) -> bool:
        return self._f == 0

    def numerator(self) -> list[Fraction]:
        """Coefficients, constant term first, of the numerator over a monic denominator."""
        num, den = self._monic()
        return num

    def denominator(self) -> list[Fraction]:
        return self._monic()[1]

    def _monic(self):
        num = [_frac(c) for c in reversed(self._f.numer.to_dense())]
        den = [_frac(c) for c in reversed(self._f.denom.to_dense())]
        lead = den[-1]
        return [c / lead for c in num], [c / lead for c in den]

    def __str__(self):
        return str(self._f.as_expr())

    def __repr__(self):
        return f"RatFunc({self})"

    def to_json(self):
        return str(self)


def _parse_ratfunc(text: str):
    text = text.replace("^", "**")
    y = sympy.Symbol("y")
    try:
        expr = sympy.sympify(text, locals={"y": y})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigurationError(f"cannot parse rational function {text!r}") from exc
    if expr.free_symbols - {y}:
        raise ConfigurationError(f"rational function {text!r} uses symbols other than y")
    return _K.from_expr(expr)


def _order(coeffs: list[Fraction]) -> int:
    for k, c in enumerate(coeffs):
        if c:
            return k
    raise ValueError("zero polynomial")


def valuation(f: RatFunc) -> Union[int, float]:
    """Order of vanishing at y = 0; +inf for 0."""
    if f.is_zero():
        return INF
    num, den = f._monic()
    return _order(num) - _order(den)


def laurent(f: RatFunc, upto: int) -> dict[int, Fraction]:
    """Laurent coefficients at 0 for exponents v(f) .. upto."""
    if f.is_zero():
        return {}
    num, den = f._monic()
    vn, vd = _order(num), _order(den)
    g, h = num[vn:], den[vd:]
    v = vn - vd
    count = upto - v + 1
    series: list[Fraction] = []
    for k in range(max(count, 0)):
        acc = g[k] if k < len(g) else Fraction(0)
        for j in range(1, min(k, len(h) - 1) + 1):
            acc -= h[j] * series[k - j]
        series.append(acc / h[0])
    return {v + k: c for k, c in enumerate(series)}


def laurent_coeff(f: RatFunc, k: int) -> Fraction:
    return laurent(f, k).get(k, Fraction(0))


def c0(f: RatFunc) -> Fraction:
    return laurent_coeff(f, 0)


def in_Wm(f: RatFunc, m: int) -> bool:
    if m < 0:
        raise ValueError("m must be >= 0")
    return valuation(f) >= -m


def decompose(f: RatFunc) -> tuple[Fraction, RatFunc]:
    """Split f = c + f0 with c in Q and f0 in K0."""
    c = c0(f)
    return c, f - c


def principal_part(f: RatFunc, m: int) -> tuple[Fraction, ...]:
    """Coefficients of y^k for k < -m, lowest first; the image of f in K0/W0."""
    v = valuation(f)
    if v >= -m:
        return ()
    coeffs = laurent(f, -m - 1)
    return tuple(coeffs.get(k, Fraction(0)) for k in range(int(v), -m))


# -- restricted subspaces -------------------------------------------------------------

def _solve(rows: list[list[Fraction]], rhs: list[Fraction]) -> Optional[list[Fraction]]:
    """One solution of rows * z = rhs (free variables set to 0), or None."""
    n = len(rows[0]) if rows else 0
    aug = [row[:] + [b] for row, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(aug)) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][col] != 0:
                fct = aug[i][col]
                aug[i] = [a - fct * b for a, b in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
    for i in range(r, len(aug)):
        if aug[i][n] != 0:
            return None
    z = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        z[col] = aug[i][n]
    return z


def witness_window(vs: Sequence[RatFunc], m: int) -> tuple[int, int]:
    """First and last half-width N of the Laurent window scanned for b."""
    v_min = min(valuation(v) for v in vs if not v.is_zero())
    start = max(1, m + 1 + int(v_min))
    return start, start + len(vs) + 8


def restricted_witness(vs: Sequence[RatFunc], m: int, side: str = "right") -> RatFunc:
    """b with v*b in K0 for every v in vs and v*b outside W_m for some v.

    b is searched in span{y^-N, ..., y^N} with leading term y^-N, so v(b) = -N
    is as small as the window allows.  K is commutative, so ``side`` only
    records which product the caller forms.
    """
    if side not in ("right", "left"):
        raise ValueError("side must be 'right' or 'left'")
    vs = [RatFunc(v) for v in vs]
    if not vs or all(v.is_zero() for v in vs):
        raise ConfigurationError("V must contain a nonzero element")
    vs = [v for v in vs if not v.is_zero()]
    n_start, n_max = witness_window(vs, m)
    for n in range(n_start, n_max + 1):
        exps = list(range(-n + 1, n + 1))
        coeff = [laurent(v, n) for v in vs]
        # c0(v * y^k) is the coefficient of y^-k in v
        rows = [[cv.get(-k, Fraction(0)) for k in exps] for cv in coeff]
        rhs = [-cv.get(n, Fraction(0)) for cv in coeff]
        z = _solve(rows, rhs)
        if z is None:
            continue
        b = RatFunc.from_coeffs({-n: Fraction(1), **{k: c for k, c in zip(exps, z)}})
        if verify_restricted_witness(vs, m, b):
            return b
    raise SearchBudgetExceeded(f"no witness with N <= {n_max} for m = {m}")


def verify_restricted_witness(vs: Sequence[RatFunc], m: int, b: RatFunc) -> bool:
    prods = [RatFunc(v) * b for v in vs]
    return all(c0(p) == 0 for p in prods) and any(not in_Wm(p, m) for p in prods)


# -- graded tensors -------------------------------------------------------------------

SimpleTensor = tuple[RatFunc, ...]


@dataclass
class TensorElement:
    """Element of R modulo nothing: an L' part kept opaque plus graded L-parts.

    ``graded[n]`` lists simple tensors (b0, ..., bn) standing for
    b0 x b1 x ... x bn with inner slots in K0.
    """

    lprime_part: list[str] = field(default_factory=list)
    graded: dict[int, list[SimpleTensor]] = field(default_factory=dict)

    def degrees(self) -> list[int]:
        return sorted(n for n, ts in self.graded.items() if ts)

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) == 1

    def __add__(self, other: "TensorElement") -> "TensorElement":
        g = {n: list(ts) for n, ts in self.graded.items()}
        for n, ts in other.graded.items():
            g.setdefault(n, []).extend(ts)
        return TensorElement(self.lprime_part + other.lprime_part, g)

    def __str__(self):
        parts = list(self.lprime_part)
        for n in self.degrees():
            for t in self.graded[n]:
                parts.append(" x ".join(f"({b})" for b in t))
        return " + ".join(parts) if parts else "0"

    def to_json(self):
        return {"lprime": list(self.lprime_part),
                "graded": {str(n): [[str(b) for b in t] for t in self.graded[n]] for n in self.degrees()}}


Factor = Union[str, RatFunc]


def normalize_tensor(terms: Iterable[Sequence[Factor]]) -> TensorElement:
    """Normal form of a sum of words in ``"x"`` and coefficients.

    Each inner coefficient is split as c + f0; every expansion choosing some
    constant c contains x c x and is routed to the L' part.
    """
    out = TensorElement()
    for term in terms:
        slots = [RatFunc(1)]
        for fct in term:
            if isinstance(fct, str):
                if fct != "x":
                    raise ConfigurationError(f"unknown generator {fct!r}")
                slots.append(RatFunc(1))
            else:
                slots[-1] = slots[-1] * RatFunc(fct)
        if any(s.is_zero() for s in slots):
            continue
        n = len(slots) - 1
        inner = [decompose(s) for s in slots[1:-1]]
        if any(c != 0 for c, _ in inner):
            out.lprime_part.append(" x ".join(f"({s})" for s in slots))
        if all(not f0.is_zero() for _, f0 in inner):
            tensor = (slots[0],) + tuple(f0 for _, f0 in inner) + ((slots[-1],) if n else ())
            out.graded.setdefault(n, []).append(tensor)
    return out


def _split_top(text: str, seps: str) -> list[tuple[str, str]]:
    """Split at top-level separators, returning (separator, chunk) pairs."""
    out, depth, cur, sep = [], 0, [], "+"
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in seps and text[i:i + 2] != "**" and not (ch == "*" and i and text[i - 1] == "*"):
            prev = "".join(cur).strip()
            # a sign directly after an operator or at the start is unary
            if ch in "+-" and (not prev or prev[-1] in "*/^("):
                cur.append(ch)
            else:
                out.append((sep, prev))
                sep, cur = ch, []
        else:
            cur.append(ch)
        i += 1
    out.append((sep, "".join(cur).strip()))
    return out


def parse_tensor(text: str) -> TensorElement:
    """Parse e.g. ``"x*(1+1/y)*x + 7"``: ``x`` is the free letter, ``*`` concatenates."""
    terms = []
    for sign, chunk in _split_top(text.replace(" ", ""), "+-"):
        if not chunk:
            raise ConfigurationError(f"empty term in {text!r}")
        factors: list[Factor] = [RatFunc(-1)] if sign == "-" else []
        for _, part in _split_top(chunk, "*"):
            if part == "x":
                factors.append("x")
            elif re.fullmatch(r"x\^?\*?\*?(\d+)", part):
                factors.extend(["x"] * int(re.findall(r"\d+", part)[0]))
            else:
                factors.append(RatFunc(part))
        terms.append(factors)
    return normalize_tensor(terms)


def _end_coordinates(values: list[RatFunc]) -> list[dict[int, Fraction]]:
    """Exact coordinates of rational functions over a common denominator."""
    dens = [v.denominator() for v in values]
    common = RatFunc(1)
    for d in dens:
        poly = RatFunc.from_coeffs(dict(enumerate(d)))
        common = _lcm_poly(common, poly)
    out = []
    for v in values:
        w = v * common
        num, den = w._monic()
        if len(den) != 1:
            raise AssertionError("common denominator failed")
        out.append({k: c for k, c in enumerate(num) if c})
    return out


def _lcm_poly(a: RatFunc, b: RatFunc) -> RatFunc:
    g = a._f.numer.gcd(b._f.numer)
    r = RatFunc()
    r._f = _K(a._f.numer * b._f.numer) / _K(g)
    return r


def _component_vanishes(tensors: list[SimpleTensor], n: int, m: Optional[int]) -> bool:
    """Is the sum zero in B (x) (K0/W0)^(n-1) (x) B?  ``m=None`` means exact."""
    if not tensors:
        return True
    if n == 0:
        total = RatFunc(0)
        for (b,) in tensors:
            total = total + b
        return total.is_zero()
    slot_vectors: list[list[dict]] = [[] for _ in tensors]
    for pos in range(n + 1):
        if pos in (0, n) or m is None:
            coords = _end_coordinates([t[pos] for t in tensors])
        else:
            coords = [dict(enumerate(principal_part(t[pos], m))) for t in tensors]
        for idx, c in enumerate(coords):
            slot_vectors[idx].append(c)
    acc: dict[tuple, Fraction] = {}
    for vecs in slot_vectors:
        if any(not v for v in vecs):
            continue
        for combo in iproduct(*(sorted(v.items()) for v in vecs)):
            key = tuple(k for k, _ in combo)
            val = Fraction(1)
            for _, c in combo:
                val *= c
            acc[key] = acc.get(key, Fraction(0)) + val
    return all(v == 0 for v in acc.values())


def p_membership(t: TensorElement, m: int) -> bool:
    """Is t in P_m = R x W_m x R?"""
    if m < 0:
        raise ValueError("m must be >= 0")
    for n in t.degrees():
        if not _component_vanishes(t.graded[n], n, m if n >= 2 else None):
            return False
    return True


def is_zero_mod_lprime(t: TensorElement) -> bool:
    return all(_component_vanishes(t.graded[n], n, None) for n in t.degrees())


# -- primality certificates ----------------------------------------------------------

def _roll(rng: random.Random, span: int = 4) -> Fraction:
    return Fraction(rng.choice([i for i in range(-span, span + 1) if i]), rng.randint(1, 3))


def random_ratfunc(rng: random.Random, max_pole: int = 5, max_deg: int = 2) -> RatFunc:
    """Random nonzero element with a pole of order <= max_pole at 0."""
    num = {k: _roll(rng) for k in range(rng.randint(0, max_deg) + 1) if rng.random() < 0.8}
    if not num:
        num = {0: _roll(rng)}
    f = RatFunc.from_coeffs(num)
    if rng.random() < 0.4:
        f = f / RatFunc.from_coeffs({0: Fraction(1), 1: _roll(rng)})
    return f * RatFunc.y_power(-rng.randint(0, max_pole))


def random_k0(rng: random.Random, m: int, max_pole: int = 5) -> RatFunc:
    """Element of K0 outside W0 (principal part below -m survives)."""
    while True:
        pole = rng.randint(m + 1, max(m + 1, max_pole))
        f = random_ratfunc(rng, 0) * RatFunc.y_power(-pole)
        _, f0 = decompose(f)
        if not in_Wm(f0, m):
            return f0


def random_homogeneous(rng: random.Random, n: int, m: int, terms: int = 2) -> TensorElement:
    """Homogeneous element of L_n outside P_m."""
    while True:
        ts = []
        for _ in range(rng.randint(1, terms)):
            inner = tuple(random_k0(rng, m) for _ in range(max(n - 1, 0)))
            ends = (random_ratfunc(rng),) + ((random_ratfunc(rng),) if n else ())
            ts.append((ends[0],) + inner + ends[1:])
        t = TensorElement([], {n: ts})
        if not p_membership(t, m):
            return t


@dataclass(frozen=True)
class ProbeCertificate:
    b: RatFunc
    b2: RatFunc
    verified: bool
    product: TensorElement

    def to_json(self):
        return {"b": str(self.b), "b2": str(self.b2), "verified": self.verified}


def junction_product(f: TensorElement, b: RatFunc, b2: RatFunc, f2: TensorElement) -> TensorElement:
    """f * b * x * b2 * f2 for homogeneous f, f2 (their L' parts dropped, as they lie in P)."""
    (n,), (n2,) = f.degrees(), f2.degrees()
    terms = []
    for s in f.graded[n]:
        for s2 in f2.graded[n2]:
            left: list[Factor] = []
            for k, slot in enumerate(s):
                left.append(slot if k < len(s) - 1 else slot * b)
                if k < len(s) - 1:
                    left.append("x")
            right: list[Factor] = [b2 * s2[0]]
            for slot in s2[1:]:
                right.extend(["x", slot])
            terms.append(left + ["x"] + right)
    return normalize_tensor(terms)


def prime_probe(f: TensorElement, f2: TensorElement, m: int) -> ProbeCertificate:
    if not (f.is_homogeneous() and f2.is_homogeneous()):
        raise ConfigurationError("prime_probe needs homogeneous elements")
    if p_membership(f, m) or p_membership(f2, m):
        raise ConfigurationError("prime_probe needs elements outside P_m")
    (n,), (n2,) = f.degrees(), f2.degrees()
    ends = [s[-1] for s in f.graded[n]]
    begins = [s[0] for s in f2.graded[n2]]
    b = restricted_witness(ends, m, "right")
    b2 = restricted_witness(begins, m, "left")
    prod = junction_product(f, b, b2, f2)
    return ProbeCertificate(b, b2, not p_membership(prod, m), prod)


def x_k_x(k: RatFunc) -> TensorElement:
    return normalize_tensor([["x", k, "x"]])


def absorption_level(k: RatFunc) -> int:
    """Least m with x k x in P_m."""
    _, k0 = decompose(k)
    v = valuation(k0)
    return 0 if v == INF else max(0, -int(v))


def random_tensor(rng: random.Random, max_degree: int = 3, terms: int = 2) -> TensorElement:
    ts = []
    for _ in range(rng.randint(1, terms)):
        factors: list[Factor] = []
        for _ in range(rng.randint(1, max_degree)):
            factors.extend([random_ratfunc(rng), "x"])
        factors.append(random_ratfunc(rng))
        ts.append(factors)
    return normalize_tensor(ts)


def union_report(max_m: int, samples: int, seed: int = 0, probes: int = 2) -> dict:
    """Chain P_1 <= P_2 <= ... and its union (RxR)^2."""
    if max_m < 1:
        raise ValueError("max_m must be >= 1")
    rng = random.Random(seed)
    monotone = True
    for _ in range(samples):
        t = random_tensor(rng)
        member = [p_membership(t, m) for m in range(max_m + 1)]
        monotone &= all(not a or b for a, b in zip(member, member[1:]))
    absorbed = []
    for _ in range(samples):
        k = random_ratfunc(rng, max_pole=min(max_m, 7))
        level = absorption_level(k)
        t = x_k_x(k)
        ok = p_membership(t, level) and (level == 0 or not p_membership(t, level - 1))
        absorbed.append({"k": str(k), "level": level, "exact": ok})
    x = normalize_tensor([["x"]])
    x_outside = [not p_membership(x, m) for m in range(max_m + 1)]
    # x r x lands in some P_m for each sampled r
    sandwich = []
    for _ in range(samples):
        r = random_tensor(rng)
        t = TensorElement(list(r.lprime_part), {})
        sandwich_terms = []
        for n in r.degrees():
            for s in r.graded[n]:
                fs: list[Factor] = ["x"]
                for idx, slot in enumerate(s):
                    fs.append(slot)
                    fs.append("x")
                sandwich_terms.append(fs)
        t = normalize_tensor(sandwich_terms)
        sandwich.append(any(p_membership(t, m) for m in range(max_m + 8)))
    stage_certs = []
    for m in range(1, max_m + 1):
        certs = []
        for _ in range(probes):
            f = random_homogeneous(rng, rng.randint(1, 3), m)
            f2 = random_homogeneous(rng, rng.randint(1, 3), m)
            certs.append(prime_probe(f, f2, m).verified)
        stage_certs.append({"m": m, "status": "probed_prime" if all(certs) else "not_prime",
                            "certificates": len(certs), "verified": sum(certs)})
    return {
        "max_m": max_m,
        "monotone_on_samples": monotone,
        "absorption": absorbed,
        "absorption_exact": all(a["exact"] for a in absorbed),
        "x_outside_every_P_m": all(x_outside),
        "x_r_x_in_union": all(sandwich),
        "stages": stage_certs,
        "union": "(RxR)^2",
        "union_status": "not_prime",
        "union_witness": ["x", "x"],
        "almost_prime": all(s["status"] == "probed_prime" for s in stage_certs) and all(x_outside),
        "radical_quotient": "R/RxR = K",
    }

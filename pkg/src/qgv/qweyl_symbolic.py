"""
Exact algebra of exponential monomials in canonical variables.

Every exponent is a rational combination of the canonical units

    X_i = pi*b*x_i,   P_i = i*b*d/dx_i,   N_j = pi*b*nu_j

for positions x in (u, v, w) and central parameters nu, nu1, nu2.  With
hbar = pi*i*b^2 they satisfy [X_i, P_j] = -hbar*delta_ij and all other
brackets vanish, so [A, B] = hbar*omega(A, B) with the integer-valued form

    omega(A, B) = sum_i (-a_i c'_i + c_i a'_i)

(a = X-coefficients, c = P-coefficients).  Products of monomials only pick
up phases q^r = exp(pi*i*b^2*r), which are carried as exact rationals.

b is a formal symbol here: a phase is exp(pi*i*(c0 + c2*b^2 + cm2*b^-2))
and nothing is ever evaluated numerically.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

__all__ = [
    "POSITIONS",
    "MOMENTA",
    "CENTRAL",
    "BASIS",
    "PhaseScalar",
    "ExpMonomial",
    "MonomialSum",
    "QuadExp",
    "Transposition",
    "omega",
    "mono",
    "mono_mul",
    "mono_inv",
    "qcommute_check",
    "conj_by_quad",
    "conj_by_perm",
    "conj_by_mono",
    "sum_mul",
    "parse_monomial",
    "parse_linear",
    "format_linear",
]

POSITIONS = ("u", "v", "w")
MOMENTA = ("du", "dv", "dw")
CENTRAL = ("nu", "nu1", "nu2")
BASIS = POSITIONS + MOMENTA + CENTRAL
_INDEX = {s: i for i, s in enumerate(BASIS)}
_N = len(BASIS)
_NPOS = len(POSITIONS)
_ZERO = (Fraction(0),) * _N


def _fr(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def _fmt_rat(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


# ---------------------------------------------------------------------------
# phases
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class PhaseScalar:
    """exp(pi*i*(c0 + c2*b^2 + cm2*b^-2)); c0 is kept in [0, 2)."""

    c0: Fraction = Fraction(0)
    c2: Fraction = Fraction(0)
    cm2: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "c0", _fr(self.c0) % 2)
        object.__setattr__(self, "c2", _fr(self.c2))
        object.__setattr__(self, "cm2", _fr(self.cm2))

    @classmethod
    def q(cls, r=1):
        return cls(0, r, 0)

    def __mul__(self, other):
        if not isinstance(other, PhaseScalar):
            return NotImplemented
        return PhaseScalar(self.c0 + other.c0, self.c2 + other.c2, self.cm2 + other.cm2)

    def inv(self):
        return PhaseScalar(-self.c0, -self.c2, -self.cm2)

    def conj(self):
        return self.inv()

    def is_one(self):
        return self.c0 == 0 and self.c2 == 0 and self.cm2 == 0

    def signed(self):
        """(sign, phase with c0 in [0, 1)) so that -1 is absorbed into an integer sign."""
        if self.c0 >= 1:
            return -1, PhaseScalar(self.c0 - 1, self.c2, self.cm2)
        return 1, self

    def evaluate(self, b):
        import cmath
        return cmath.exp(1j * cmath.pi * (float(self.c0) + float(self.c2) * b * b + float(self.cm2) / (b * b)))

    def __str__(self):
        parts = []
        if self.c0:
            parts.append(f"e^{{pi i*{_fmt_rat(self.c0)}}}")
        if self.c2:
            parts.append(f"q^{{{_fmt_rat(self.c2)}}}")
        if self.cm2:
            parts.append(f"qd^{{{_fmt_rat(self.cm2)}}}")
        return " * ".join(parts) if parts else "1"


ONE = PhaseScalar()


# ---------------------------------------------------------------------------
# linear forms
# ---------------------------------------------------------------------------

def omega(l1, l2) -> Fraction:
    """[L1, L2] = hbar * omega(L1, L2)."""
    s = Fraction(0)
    for i in range(_NPOS):
        a, c = l1[i], l1[_NPOS + i]
        a2, c2 = l2[i], l2[_NPOS + i]
        s += -a * c2 + c * a2
    return s


def _lin(d=None, **kw):
    out = list(_ZERO)
    for k, v in {**(d or {}), **kw}.items():
        out[_INDEX[k]] = _fr(v)
    return tuple(out)


def _add(l1, l2):
    return tuple(x + y for x, y in zip(l1, l2))


def _scale(l, c):
    c = _fr(c)
    return tuple(c * x for x in l)


def format_linear(lin) -> str:
    terms = []
    for sym, c in zip(BASIS, lin):
        if c == 0:
            continue
        mag = abs(c)
        body = sym if mag == 1 else f"{_fmt_rat(mag)}*{sym}"
        if not terms:
            terms.append(body if c > 0 else f"-{body}")
        else:
            terms.append(("+ " if c > 0 else "- ") + body)
    return " ".join(terms) if terms else "0"


_TERM = re.compile(r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*?\s*)?([a-z][a-z0-9]*)?\s*")


def parse_linear(text: str):
    """Parse 'w - dw + 1/2*v' (also '-2*nu1 + 3*u', '1*w + -1*dw')."""
    text = text.strip()
    if text in ("", "0"):
        return _ZERO
    out = list(_ZERO)
    # split on top-level +/- while keeping signs
    tokens = re.findall(r"[+-]?\s*[^+-]+", text.replace("+ -", "-").replace("+-", "-"))
    for tok in tokens:
        tok = tok.replace(" ", "")
        m = re.fullmatch(r"([+-]?)(\d+(?:/\d+)?)?\*?([a-z][a-z0-9]*)", tok)
        if not m:
            raise ValueError(f"cannot parse linear term {tok!r} in {text!r}")
        sign, coef, sym = m.groups()
        if sym not in _INDEX:
            raise ValueError(f"unknown symbol {sym!r}")
        c = Fraction(coef) if coef else Fraction(1)
        if sign == "-":
            c = -c
        out[_INDEX[sym]] += c
    return tuple(out)


# ---------------------------------------------------------------------------
# monomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class ExpMonomial:
    """phase * exp(L), L a Weyl-ordered rational linear form in BASIS units."""

    lin: tuple = _ZERO
    phase: PhaseScalar = ONE

    def __mul__(self, other):
        return mono_mul(self, other)

    def inv(self):
        return mono_inv(self)

    def coeff(self, sym):
        return self.lin[_INDEX[sym]]

    def is_scalar(self):
        return all(c == 0 for c in self.lin)

    def is_positive(self):
        """True when the exponent is a real form (phase one), i.e. exp(L) > 0."""
        return self.phase.is_one()

    def __str__(self):
        e = f"exp({format_linear(self.lin)})"
        return e if self.phase.is_one() else f"{self.phase} * {e}"


def mono(text_or_lin=None, phase=ONE, **kw) -> ExpMonomial:
    if isinstance(text_or_lin, str):
        return ExpMonomial(parse_linear(text_or_lin), phase)
    if text_or_lin is None:
        return ExpMonomial(_lin(**kw), phase)
    return ExpMonomial(tuple(_fr(x) for x in text_or_lin), phase)


def mono_mul(a: ExpMonomial, b: ExpMonomial) -> ExpMonomial:
    """e^A e^B = e^{[A,B]/2} e^{A+B}."""
    w = omega(a.lin, b.lin)
    return ExpMonomial(_add(a.lin, b.lin), a.phase * b.phase * PhaseScalar(0, w / 2, 0))


def mono_inv(a: ExpMonomial) -> ExpMonomial:
    return ExpMonomial(_scale(a.lin, -1), a.phase.inv())


def qcommute_check(a: ExpMonomial, b: ExpMonomial) -> PhaseScalar:
    """phi with a*b = phi*(b*a); phi = q^{omega(A, B)}."""
    return PhaseScalar(0, omega(a.lin, b.lin), 0)


def conj_by_mono(l: ExpMonomial, m: ExpMonomial) -> ExpMonomial:
    """l m l^-1 = q^{omega(L, M)} m."""
    return ExpMonomial(m.lin, m.phase * PhaseScalar(0, omega(l.lin, m.lin), 0))


_MONO_RE = re.compile(r"^(?P<pre>.*?)exp\((?P<lin>[^()]*)\)$")
_PHASE_RE = re.compile(r"(e\^\{pi i\*|q\^\{|qd\^\{)([-\d/]+)\}")


def parse_monomial(text: str) -> ExpMonomial:
    """Inverse of ``str(ExpMonomial)``."""
    text = text.strip()
    m = _MONO_RE.match(text)
    if not m:
        raise ValueError(f"not a monomial: {text!r}")
    c0 = c2 = cm2 = Fraction(0)
    pre = m.group("pre").strip().rstrip("*").strip()
    if pre:
        for kind, val in _PHASE_RE.findall(pre):
            if kind.startswith("e"):
                c0 += Fraction(val)
            elif kind.startswith("qd"):
                cm2 += Fraction(val)
            else:
                c2 += Fraction(val)
        leftover = _PHASE_RE.sub("", pre).replace("*", "").strip()
        if leftover:
            raise ValueError(f"unparsed phase text {leftover!r}")
    return ExpMonomial(parse_linear(m.group("lin")), PhaseScalar(c0, c2, cm2))


# ---------------------------------------------------------------------------
# permutations and quadratic exponentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Transposition:
    a: str
    b: str

    def __post_init__(self):
        if {self.a, self.b} not in ({"u", "v"}, {"v", "w"}, {"u", "w"}):
            raise ValueError(f"unsupported transposition ({self.a}{self.b})")
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    def apply_lin(self, lin):
        out = list(lin)
        for x, y in ((self.a, self.b), ("d" + self.a, "d" + self.b)):
            i, j = _INDEX[x], _INDEX[y]
            out[i], out[j] = out[j], out[i]
        return tuple(out)

    def __str__(self):
        return f"({self.a}{self.b})"


def conj_by_perm(p: Transposition, m: ExpMonomial) -> ExpMonomial:
    return ExpMonomial(p.apply_lin(m.lin), m.phase)


def _omega_matrix():
    basis = []
    for i in range(_N):
        e = [Fraction(0)] * _N
        e[i] = Fraction(1)
        basis.append(tuple(e))
    return [[omega(x, y) for y in basis] for x in basis]


def _mat_mul(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class QuadExp:
    """exp((1/hbar) * sum r_ab A_a A_b), Weyl-symmetrized, a <= b in BASIS order.

    ``terms`` is a sorted tuple of ((a, b), r).  Both the pure quadratic and
    the bilinear central-times-position pieces (like 2*pi*i*nu1*u) fit here.
    """

    terms: tuple = ()

    def __post_init__(self):
        acc = {}
        for (a, b), r in self.terms:
            ia, ib = sorted((_INDEX[a] if isinstance(a, str) else a, _INDEX[b] if isinstance(b, str) else b))
            acc[(ia, ib)] = acc.get((ia, ib), Fraction(0)) + _fr(r)
        clean = tuple(sorted((k, v) for k, v in acc.items() if v != 0))
        object.__setattr__(self, "terms", clean)
        if not self._nilpotent():
            raise ValueError("adjoint action of this quadratic exponential is not nilpotent")

    @classmethod
    def from_square(cls, coeff, lin):
        """exp((coeff/hbar) * L^2)."""
        coeff = _fr(coeff)
        terms = []
        nz = [(i, c) for i, c in enumerate(lin) if c != 0]
        for x, (i, ci) in enumerate(nz):
            terms.append(((i, i), coeff * ci * ci))
            for j, cj in nz[x + 1:]:
                terms.append(((i, j), 2 * coeff * ci * cj))
        return cls(tuple(terms))

    @classmethod
    def parse(cls, text: str):
        """'1/2*w*w - u*dw' (bilinear terms) or 'sq(1/4; u - v + w - du + dw)'."""
        text = text.strip()
        m = re.fullmatch(r"sq\(\s*([-\d/]+)\s*;(.*)\)", text)
        if m:
            return cls.from_square(Fraction(m.group(1)), parse_linear(m.group(2)))
        terms = []
        for tok in re.findall(r"[+-]?\s*[^+-]+", text):
            tok = tok.replace(" ", "")
            mm = re.fullmatch(r"([+-]?)(\d+(?:/\d+)?)?\*?([a-z][a-z0-9]*)\*([a-z][a-z0-9]*)", tok)
            if not mm:
                raise ValueError(f"cannot parse quadratic term {tok!r}")
            sign, coef, s1, s2 = mm.groups()
            c = Fraction(coef) if coef else Fraction(1)
            terms.append(((s1, s2), -c if sign == "-" else c))
        return cls(tuple(terms))

    def ad_matrix(self):
        """Column j is ad_X applied to basis vector j."""
        cols = []
        for j in range(_N):
            e = [Fraction(0)] * _N
            e[j] = Fraction(1)
            cols.append(self.ad(tuple(e)))
        return [[cols[j][i] for j in range(_N)] for i in range(_N)]

    def ad(self, lin):
        """[X, L] as a linear form: sum r (omega(A_b, L) A_a + omega(A_a, L) A_b)."""
        out = [Fraction(0)] * _N
        for (ia, ib), r in self.terms:
            ea = [Fraction(0)] * _N
            ea[ia] = Fraction(1)
            eb = [Fraction(0)] * _N
            eb[ib] = Fraction(1)
            wa = omega(tuple(ea), lin)
            wb = omega(tuple(eb), lin)
            out[ia] += r * wb
            out[ib] += r * wa
        return tuple(out)

    def _nilpotent(self):
        m = self.ad_matrix()
        p = m
        for _ in range(_N):
            if all(x == 0 for row in p for x in row):
                return True
            p = _mat_mul(p, m)
        return all(x == 0 for row in p for x in row)

    def conj_lin(self, lin):
        """e^{ad X} L (terminating series)."""
        total = lin
        term = lin
        k = 0
        while True:
            k += 1
            term = _scale(self.ad(term), Fraction(1, k))
            if all(x == 0 for x in term):
                return total
            total = _add(total, term)

    def commutes_with(self, lin):
        return all(x == 0 for x in self.ad(lin))

    def sym_matrix(self):
        """R with X = (1/(2 hbar)) A^T R A."""
        r = [[Fraction(0)] * _N for _ in range(_N)]
        for (a, b), v in self.terms:
            if a == b:
                r[a][a] += 2 * v
            else:
                r[a][b] += v
                r[b][a] += v
        return r

    def commutes_with_quad(self, other: "QuadExp") -> bool:
        """[X, Y] = 0 exactly, central pieces included: R J S = S J R."""
        j = _omega_matrix()
        r, s = self.sym_matrix(), other.sym_matrix()
        return _mat_mul(_mat_mul(r, j), s) == _mat_mul(_mat_mul(s, j), r)

    def inv(self):
        return QuadExp(tuple(((BASIS[a], BASIS[b]), -r) for (a, b), r in self.terms))

    def __mul__(self, other):
        return QuadExp(tuple(((BASIS[a], BASIS[b]), r) for (a, b), r in self.terms + other.terms))

    def is_identity(self):
        return not self.terms

    def __str__(self):
        parts = []
        for (a, b), r in self.terms:
            mag = abs(r)
            body = f"{BASIS[a]}*{BASIS[b]}" if mag == 1 else f"{_fmt_rat(mag)}*{BASIS[a]}*{BASIS[b]}"
            if not parts:
                parts.append(body if r > 0 else f"-{body}")
            else:
                parts.append(("+ " if r > 0 else "- ") + body)
        return " ".join(parts) if parts else "0"


def conj_by_quad(g: QuadExp, m: ExpMonomial) -> ExpMonomial:
    """g m g^-1 = exp(e^{ad X} L) with the phase untouched."""
    return ExpMonomial(g.conj_lin(m.lin), m.phase)


# ---------------------------------------------------------------------------
# sums of monomials with coefficients in Z[phases]
# ---------------------------------------------------------------------------

def _coef_add(c1, c2):
    out = Counter(c1)
    for k, v in c2.items():
        out[k] += v
    return {k: v for k, v in out.items() if v}


@dataclass(frozen=True)
class MonomialSum:
    """Sum over linear forms of (integer combination of phases) * exp(L).

    ``items`` is a canonical tuple (lin, ((phase, int), ...)) sorted by lin.
    """

    items: tuple = ()

    @classmethod
    def from_terms(cls, terms):
        acc = {}
        for t in terms:
            if isinstance(t, tuple):
                n, m = t
            else:
                n, m = 1, t
            sign, ph = m.phase.signed()
            acc[m.lin] = _coef_add(acc.get(m.lin, {}), {ph: sign * n})
        return cls._canon(acc)

    @classmethod
    def _canon(cls, acc):
        items = []
        for lin in sorted(acc):
            coef = acc[lin]
            if coef:
                items.append((lin, tuple(sorted(coef.items()))))
        return cls(tuple(items))

    @classmethod
    def scalar(cls, phases):
        """Sum of signed phases, e.g. [(1, q), (-1, q^-1)]."""
        return cls.from_terms([(n, ExpMonomial(_ZERO, p)) for n, p in phases])

    def terms(self):
        for lin, coef in self.items:
            for ph, n in coef:
                yield n, ExpMonomial(lin, ph)

    def __add__(self, other):
        return MonomialSum.from_terms(list(self.terms()) + list(other.terms()))

    def __neg__(self):
        return MonomialSum.from_terms([(-n, m) for n, m in self.terms()])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return sum_mul(self, other)

    def is_zero(self):
        return not self.items

    def __len__(self):
        return len(self.items)

    def __str__(self):
        if not self.items:
            return "0"
        out = []
        for n, m in self.terms():
            out.append(("" if n == 1 else f"{n} ") + str(m))
        return " + ".join(out)


def sum_mul(a: MonomialSum, b: MonomialSum) -> MonomialSum:
    return MonomialSum.from_terms([(n1 * n2, mono_mul(m1, m2)) for (n1, m1), (n2, m2) in product(a.terms(), b.terms())])

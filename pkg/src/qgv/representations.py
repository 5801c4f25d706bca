"""
Positive principal series representations of U_q(sl2) and U_q(sl3).

Generators are exact MonomialSums in the rescaled normalization
``E = -i(q - q^-1) E_unscaled`` (same for F).  Every monomial is Weyl
ordered, so a printed product like q^{-1/2} e^{pi b nu + pi b u} e^{-ib d_u}
becomes the single exponential exp(nu + u - du) with unit phase.

Relations are checked with exact arithmetic and the (q - q^-1) denominator
cleared; the list of relation instances is frozen in
``data/relations_manifest.txt``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .gb_rewrite import FnSlot, Gb, OpWord, RewriteContext, apply_rule, format_word, words_equal
from .qweyl_symbolic import (
    ExpMonomial,
    MonomialSum,
    PhaseScalar,
    mono,
    mono_inv,
    parse_linear,
    sum_mul,
)

__all__ = [
    "CartanData",
    "RepSpec",
    "GeneratorSet",
    "ConjugatedGenerator",
    "RelationResult",
    "build_sl2_rep",
    "build_sl3_rep",
    "build_rep",
    "swap_indices",
    "check_relation",
    "relation_ids",
    "load_manifest",
    "check_all",
    "conjugated_form",
    "expand_conjugated",
    "derive_conjugated",
    "consistency",
    "divided_power_prefactor",
]


@dataclass(frozen=True)
class CartanData:
    a: tuple

    @classmethod
    def sl2(cls):
        return cls(((2,),))

    @classmethod
    def sl3(cls):
        return cls(((2, -1), (-1, 2)))

    @property
    def rank(self):
        return len(self.a)

    def __post_init__(self):
        n = len(self.a)
        for i in range(n):
            if self.a[i][i] != 2:
                raise ValueError("diagonal of a Cartan matrix must be 2")
            for j in range(n):
                if self.a[i][j] != self.a[j][i]:
                    raise ValueError("only simply-laced (symmetric) data are supported")


@dataclass(frozen=True)
class RepSpec:
    algebra: str
    reduced_word: str | None = None

    def __post_init__(self):
        if self.algebra == "sl2" and self.reduced_word is not None:
            raise ValueError("sl2 has no reduced word")
        if self.algebra == "sl3" and self.reduced_word not in ("s1s2s1", "s2s1s2"):
            raise ValueError("sl3 needs reduced_word s1s2s1 or s2s1s2")
        if self.algebra not in ("sl2", "sl3"):
            raise ValueError(f"unknown algebra {self.algebra!r}")


@dataclass(frozen=True)
class GeneratorSet:
    spec: RepSpec
    cartan: CartanData
    K: tuple   # ExpMonomial per index
    E: tuple   # MonomialSum per index
    F: tuple

    def H(self, i):
        """Linear form of K_i = q^{H_i} in canonical units (H_i = log K_i / (pi i b^2))."""
        return self.K[i].lin

    def term_counts(self):
        return {f"E{i + 1}": len(self.E[i]) for i in range(self.cartan.rank)} | {
            f"F{i + 1}": len(self.F[i]) for i in range(self.cartan.rank)}


def _sum(*texts):
    return MonomialSum.from_terms([mono(t) for t in texts])


def build_sl2_rep() -> GeneratorSet:
    """H = -2i u/b, K = e^{2 pi b u}; nu is the formal central symbol ``nu``."""
    return GeneratorSet(
        RepSpec("sl2"),
        CartanData.sl2(),
        (mono("2*u"),),
        (_sum("nu + u - du", "-nu - u - du"),),
        (_sum("nu - u + du", "-nu + u + du"),),
    )


_S1S2S1 = dict(
    K=("-2*nu1 + 2*u - v + 2*w", "-2*nu2 - u + 2*v - w"),
    E=(("w - dw", "-w - dw"),
       ("v - w - dv", "u - du - dv + dw", "-u - du - dv + dw", "-v + w - dv")),
    F=(("2*nu1 - 2*u + v - w + dw", "2*nu1 - u + du", "-2*nu1 + u + du", "-2*nu1 + 2*u - v + w + dw"),
       ("2*nu2 + u - v + dv", "-2*nu2 - u + v + dv")),
)

_S2S1S2 = dict(
    K=("-2*nu1 - u + 2*v - w", "-2*nu2 + 2*u - v + 2*w"),
    E=(("v - w - dv", "u - du - dv + dw", "-u - du - dv + dw", "-v + w - dv"),
       ("w - dw", "-w - dw")),
    F=(("2*nu1 + u - v + dv", "-2*nu1 - u + v + dv"),
       ("2*nu2 - 2*u + v - w + dw", "2*nu2 - u + du", "-2*nu2 + u + du", "-2*nu2 + 2*u - v + w + dw")),
)


def build_sl3_rep(word: str) -> GeneratorSet:
    data = {"s1s2s1": _S1S2S1, "s2s1s2": _S2S1S2}.get(word)
    if data is None:
        raise ValueError(f"unknown reduced word {word!r}")
    return GeneratorSet(
        RepSpec("sl3", word),
        CartanData.sl3(),
        tuple(mono(k) for k in data["K"]),
        tuple(_sum(*e) for e in data["E"]),
        tuple(_sum(*f) for f in data["F"]),
    )


def build_rep(algebra: str, word: str | None = None) -> GeneratorSet:
    return build_sl2_rep() if algebra == "sl2" else build_sl3_rep(word)


def _swap_nu(m: ExpMonomial) -> ExpMonomial:
    lin = list(m.lin)
    from .qweyl_symbolic import BASIS
    i, j = BASIS.index("nu1"), BASIS.index("nu2")
    lin[i], lin[j] = lin[j], lin[i]
    return ExpMonomial(tuple(lin), m.phase)


def swap_indices(gs: GeneratorSet) -> GeneratorSet:
    """Exchange generator indices 1 <-> 2 together with nu1 <-> nu2."""
    if gs.spec.algebra != "sl3":
        raise ValueError("index swap is defined for sl3 only")
    other = "s2s1s2" if gs.spec.reduced_word == "s1s2s1" else "s1s2s1"
    sw = lambda s: MonomialSum.from_terms([(n, _swap_nu(m)) for n, m in s.terms()])
    return GeneratorSet(
        RepSpec("sl3", other),
        gs.cartan,
        tuple(_swap_nu(k) for k in reversed(gs.K)),
        tuple(sw(e) for e in reversed(gs.E)),
        tuple(sw(f) for f in reversed(gs.F)),
    )


# ---------------------------------------------------------------------------
# relations
# ---------------------------------------------------------------------------

def _m(m: ExpMonomial) -> MonomialSum:
    return MonomialSum.from_terms([m])


def _scalar(*pairs):
    return MonomialSum.scalar([(n, PhaseScalar.q(r)) for n, r in pairs])


_ONE = _scalar((1, 0))
_Q_MINUS_QINV = _scalar((1, 1), (-1, -1))
_Q_PLUS_QINV = _scalar((1, 1), (1, -1))


@dataclass(frozen=True)
class RelationResult:
    relation_id: str
    passed: bool
    residual: MonomialSum

    @property
    def residual_terms(self):
        return len(self.residual)


def _q(r):
    return _scalar((1, r))


def _weight_ok(h_lin, terms, weight):
    """[H, t] = weight * t for every term, with [H, t] read off from omega(log K, t) = weight."""
    from .qweyl_symbolic import omega
    return all(omega(h_lin, m.lin) == weight for _, m in terms)


def check_relation(rep: GeneratorSet, relation_id: str) -> RelationResult:
    """Relation ids: KK(i,j), KE(i,j), KF(i,j), EF(i,j), SerreE(i,j), SerreF(i,j),
    HE(i), HF(i) (grading of all E_j / F_j by H_i), KinvE(i), OrderE(i), OrderF(i).

    Indices are 1-based.  The residual is an exact MonomialSum and must be empty.
    """
    name, _, args = relation_id.partition("(")
    idx = tuple(int(x) - 1 for x in args.rstrip(")").split(",")) if args else ()
    a = rep.cartan.a
    K = [_m(k) for k in rep.K]
    Kinv = [_m(mono_inv(k)) for k in rep.K]
    E, F = rep.E, rep.F
    if name == "KK":
        i, j = idx
        res = sum_mul(K[i], K[j]) - sum_mul(K[j], K[i])
        if i == j:
            res = res + (sum_mul(K[i], Kinv[i]) - _ONE)
    elif name == "KE":
        i, j = idx
        res = sum_mul(K[i], E[j]) - sum_mul(_q(a[i][j]), sum_mul(E[j], K[i]))
    elif name == "KF":
        i, j = idx
        res = sum_mul(K[i], F[j]) - sum_mul(_q(-a[i][j]), sum_mul(F[j], K[i]))
    elif name == "KinvE":
        (i,) = idx
        res = sum_mul(Kinv[i], E[i]) - sum_mul(_q(-a[i][i]), sum_mul(E[i], Kinv[i]))
    elif name == "EF":
        # E F - F E = delta (K - K^-1)/(q - q^-1) with E = -i(q-q^-1)E_unscaled:
        # rescaled commutator = -delta (q - q^-1)(K - K^-1)
        i, j = idx
        comm = sum_mul(E[i], F[j]) - sum_mul(F[j], E[i])
        if i == j:
            comm = comm + sum_mul(_Q_MINUS_QINV, K[i] - Kinv[i])
        res = comm
    elif name in ("SerreE", "SerreF"):
        i, j = idx
        X = E if name == "SerreE" else F
        xi2 = sum_mul(X[i], X[i])
        res = sum_mul(xi2, X[j]) - sum_mul(_Q_PLUS_QINV, sum_mul(sum_mul(X[i], X[j]), X[i])) + sum_mul(X[j], xi2)
    elif name in ("HE", "HF"):
        (i,) = idx
        sign = 1 if name == "HE" else -1
        X = E if name == "HE" else F
        bad = []
        for j in range(rep.cartan.rank):
            if not _weight_ok(rep.H(i), X[j].terms(), sign * a[i][j]):
                bad.extend(m for _, m in X[j].terms())
        res = MonomialSum.from_terms(bad)
    elif name in ("OrderE", "OrderF"):
        # consecutive terms q^2-commute (U_k U_l = q^2 U_l U_k, k < l): precondition of the
        # conjugated forms
        (i,) = idx
        X = E if name == "OrderE" else F
        from .qweyl_symbolic import qcommute_check
        ts = [m for _, m in X[i].terms()]
        ts = _printed_order(rep, name[-1], i) or ts
        bad = [ts[k] for k in range(len(ts)) for l in range(k + 1, len(ts))
               if qcommute_check(ts[k], ts[l]) != PhaseScalar.q(2)]
        res = MonomialSum.from_terms(bad)
    else:
        raise ValueError(f"unknown relation id {relation_id!r}")
    return RelationResult(relation_id, res.is_zero(), res)


def _printed_order(rep, kind, i):
    """Generator terms in the printed order (MonomialSum keeps a canonical order)."""
    if rep.spec.algebra == "sl2":
        src = {"E": ("nu + u - du", "-nu - u - du"), "F": ("nu - u + du", "-nu + u + du")}[kind]
    else:
        data = _S1S2S1 if rep.spec.reduced_word == "s1s2s1" else _S2S1S2
        src = data[kind][i]
    return [mono(t) for t in src]


def relation_ids(algebra: str) -> list[str]:
    return list(load_manifest()[algebra])


def load_manifest() -> dict:
    """{'sl2': [...], 'sl3': [...]} from the frozen manifest."""
    text = (resources.files("qgv") / "data" / "relations_manifest.txt").read_text()
    out: dict = {}
    counts: dict = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        if key == "COUNT":
            alg, n = rest.split()
            counts[alg] = int(n)
        else:
            out.setdefault(key, []).append(rest.strip())
    for alg, n in counts.items():
        if len(out.get(alg, [])) != n:
            raise ValueError(f"manifest for {alg} lists {len(out.get(alg, []))} relations, expected {n}")
    return out


def check_all(rep: GeneratorSet) -> list[RelationResult]:
    return [check_relation(rep, rid) for rid in relation_ids(rep.spec.algebra)]


# ---------------------------------------------------------------------------
# conjugated forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjugatedGenerator:
    """g_b(prefix[0]) ... g_b(prefix[-1]) phi(core) g_b*(prefix[-1]) ... g_b*(prefix[0])."""

    name: str
    prefix: tuple
    core: ExpMonomial

    def word(self) -> OpWord:
        return OpWord(tuple(Gb(p) for p in self.prefix) + (FnSlot(self.core),))


_CONJ = {
    ("sl2", None): {
        "E": (("-2*nu - 2*u",), "nu + u - du"),
        "F": (("-2*nu + 2*u",), "nu - u + du"),
    },
    ("sl3", "s1s2s1"): {
        "E1": (("-2*w",), "w - dw"),
        "E2": (("u - v + w - du + dw", "-u - v + w - du + dw", "-2*v + 2*w"), "v - w - dv"),
        "F1": (("u - v + w + du - dw", "-4*nu1 + 3*u - v + w + du - dw", "-4*nu1 + 4*u - 2*v + 2*w"),
               "2*nu1 - 2*u + v - w + dw"),
        "F2": (("-4*nu2 - 2*u + 2*v",), "2*nu2 + u - v + dv"),
    },
    ("sl3", "s2s1s2"): {
        "E1": (("u - v + w - du + dw", "-u - v + w - du + dw", "-2*v + 2*w"), "v - w - dv"),
        "E2": (("-2*w",), "w - dw"),
        "F1": (("-4*nu1 - 2*u + 2*v",), "2*nu1 + u - v + dv"),
        "F2": (("u - v + w + du - dw", "-4*nu2 + 3*u - v + w + du - dw", "-4*nu2 + 4*u - 2*v + 2*w"),
               "2*nu2 - 2*u + v - w + dw"),
    },
}


def conjugated_form(rep: GeneratorSet, generator_id: str) -> ConjugatedGenerator:
    """Printed conjugated form of an E or F generator (ids E, F for sl2; E1..F2 for sl3)."""
    table = _CONJ[(rep.spec.algebra, rep.spec.reduced_word)]
    if generator_id not in table:
        raise ValueError(f"no conjugated form for {generator_id!r}")
    prefix, core = table[generator_id]
    return ConjugatedGenerator(generator_id, tuple(mono(p) for p in prefix), mono(core))


def _generator_sum(rep: GeneratorSet, generator_id: str) -> MonomialSum:
    kind = generator_id[0]
    i = int(generator_id[1:]) - 1 if len(generator_id) > 1 else 0
    return (rep.E if kind == "E" else rep.F)[i]


def expand_conjugated(cg: ConjugatedGenerator, ctx: RewriteContext | None = None) -> MonomialSum:
    """Undo the conjugation with ExpMerge and ConjToSum; returns the generator as a sum."""
    w = cg.word()
    if len(cg.prefix) > 1:
        w = apply_rule(w, "ExpMerge", 0, ctx)
    w = apply_rule(w, "ConjToSum", 0, ctx)
    return MonomialSum.from_terms(list(w[0].terms))


def derive_conjugated(rep: GeneratorSet, generator_id: str, ctx: RewriteContext | None = None) -> OpWord:
    """Forward direction: SumToConj then ExpSplit starting from the printed term order."""
    kind = generator_id[0]
    i = int(generator_id[1:]) - 1 if len(generator_id) > 1 else 0
    terms = _printed_order(rep, kind, i)
    w = OpWord((FnSlot(tuple(terms)),))
    w = apply_rule(w, "SumToConj", 0, ctx)
    if len(w[0].args) > 1:
        w = apply_rule(w, "ExpSplit", 0, ctx)
    return w


def consistency(rep: GeneratorSet, generator_id: str) -> bool:
    cg = conjugated_form(rep, generator_id)
    fwd = words_equal(derive_conjugated(rep, generator_id), cg.word())
    back = (expand_conjugated(cg) - _generator_sum(rep, generator_id)).is_zero()
    return fwd and back


# ---------------------------------------------------------------------------
# divided powers
# ---------------------------------------------------------------------------

def divided_power_prefactor(mp, s, prec: int | None = None):
    """G_b(-i b s), the factor in A^{(is)} = G_b(-ibs) A^{is}.  s = 0 is the pole at the origin."""
    import mpmath
    from .special_functions import DEFAULT_PREC, gb_eval
    prec = prec or DEFAULT_PREC
    with mpmath.workprec(prec + 16):
        z = mpmath.mpc(0, -1) * mp.b * mpmath.mpf(s)
    return gb_eval(mp, z, prec).value

"""
Term rewriting on words of g_b-dressed operators.

A word is the left half of a sandwich ``W phi(core) W*``: an ordered list of
factors ending in an :class:`FnSlot`.  The right half is implicit (the
hermitian conjugate in reverse order), so every rule is an identity of
conjugations.  Unitary factors (Quad, Perm, unimodular scalars) can be swept
into the slot; a g_b factor whose argument commutes with the core passes
through and cancels against its conjugate.

Rules check their side conditions with exact q-phase arithmetic before
rewriting; a failed condition raises :class:`SideConditionError` with the
offending phase.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable, Sequence, Union

from .qweyl_symbolic import (
    ExpMonomial,
    PhaseScalar,
    QuadExp,
    Transposition,
    conj_by_mono,
    conj_by_perm,
    conj_by_quad,
    mono_inv,
    mono_mul,
    omega,
    parse_monomial,
    qcommute_check,
)

__all__ = [
    "Mono",
    "Gb",
    "GbStar",
    "Quad",
    "Perm",
    "FnSlot",
    "OpWord",
    "RULES",
    "RewriteError",
    "SideConditionError",
    "DerivationScript",
    "ScriptStep",
    "StepReport",
    "ScriptReport",
    "RewriteContext",
    "apply_rule",
    "words_equal",
    "normal_form",
    "parse_word",
    "format_word",
    "parse_script",
    "load_script",
    "list_scripts",
    "replay_script",
    "INVERSION_CONSTANT_EXACT",
]

Q2 = PhaseScalar.q(2)
# exp(pi i (b^2 + b^-2)/12); the numeric measurement selects this value.
INVERSION_CONSTANT_EXACT = PhaseScalar(0, Fraction(1, 12), Fraction(1, 12))


class RewriteError(ValueError):
    pass


class SideConditionError(RewriteError):
    def __init__(self, message, phase=None):
        super().__init__(message if phase is None else f"{message} (phase {phase})")
        self.phase = phase


# ---------------------------------------------------------------------------
# factors
# ---------------------------------------------------------------------------

def _check_positive(args):
    for a in args:
        if not a.phase.is_one():
            raise RewriteError(f"g_b argument must be a positive monomial, got {a}")


@dataclass(frozen=True)
class Mono:
    m: ExpMonomial

    def __str__(self):
        return f"M[{self.m}]"


@dataclass(frozen=True)
class Gb:
    """g_b of a monomial, or of an ordered q^2-commuting sum when len(args) > 1."""

    args: tuple

    def __post_init__(self):
        if isinstance(self.args, ExpMonomial):
            object.__setattr__(self, "args", (self.args,))
        _check_positive(self.args)

    @property
    def arg(self):
        if len(self.args) != 1:
            raise RewriteError("g_b of a sum has no single argument")
        return self.args[0]

    def __str__(self):
        return "g[" + " + ".join(str(a) for a in self.args) + "]"


@dataclass(frozen=True)
class GbStar:
    args: tuple

    def __post_init__(self):
        if isinstance(self.args, ExpMonomial):
            object.__setattr__(self, "args", (self.args,))
        _check_positive(self.args)

    @property
    def arg(self):
        if len(self.args) != 1:
            raise RewriteError("g_b* of a sum has no single argument")
        return self.args[0]

    def __str__(self):
        return "g*[" + " + ".join(str(a) for a in self.args) + "]"


@dataclass(frozen=True)
class Quad:
    g: QuadExp

    def __str__(self):
        return f"Q[{self.g}]"


@dataclass(frozen=True)
class Perm:
    p: Transposition

    def __str__(self):
        return f"P[{self.p.a}{self.p.b}]"


@dataclass(frozen=True)
class FnSlot:
    """phi(core) for a single monomial, or phi(U1 + ... + Un) for a sum."""

    terms: tuple

    def __post_init__(self):
        if isinstance(self.terms, ExpMonomial):
            object.__setattr__(self, "terms", (self.terms,))

    @property
    def core(self):
        if len(self.terms) != 1:
            raise RewriteError("slot holds a sum")
        return self.terms[0]

    def __str__(self):
        return "phi[" + " + ".join(str(a) for a in self.terms) + "]"


OpFactor = Union[Mono, Gb, GbStar, Quad, Perm, FnSlot]


@dataclass(frozen=True)
class OpWord:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        slots = [i for i, f in enumerate(self.factors) if isinstance(f, FnSlot)]
        if slots and slots != [len(self.factors) - 1]:
            raise RewriteError("FnSlot must be the last factor")

    def __len__(self):
        return len(self.factors)

    def __getitem__(self, i):
        return self.factors[i]

    def replace(self, i, j, new):
        return OpWord(self.factors[:i] + tuple(new) + self.factors[j:])

    def __str__(self):
        return format_word(self)


# ---------------------------------------------------------------------------
# conjugation of factors by unitary factors
# ---------------------------------------------------------------------------

def _conj_factor(f, act: Callable[[ExpMonomial], ExpMonomial]):
    if isinstance(f, Gb):
        return Gb(tuple(act(a) for a in f.args))
    if isinstance(f, GbStar):
        return GbStar(tuple(act(a) for a in f.args))
    if isinstance(f, FnSlot):
        return FnSlot(tuple(act(a) for a in f.terms))
    if isinstance(f, Mono):
        return Mono(act(f.m))
    raise RewriteError(f"cannot push through {f}")


def _args_of(f):
    if isinstance(f, (Gb, GbStar)):
        return f.args
    if isinstance(f, FnSlot):
        return f.terms
    if isinstance(f, Mono):
        return (f.m,)
    return None


def _commute(f1, f2) -> bool:
    """Exact commutation test for two factors."""
    if isinstance(f1, Mono) and f1.m.is_scalar() or isinstance(f2, Mono) and f2.m.is_scalar():
        return True
    a1, a2 = _args_of(f1), _args_of(f2)
    if a1 is not None and a2 is not None:
        return all(omega(x.lin, y.lin) == 0 for x in a1 for y in a2)
    if isinstance(f1, Quad) and a2 is not None:
        return all(f1.g.commutes_with(y.lin) for y in a2)
    if isinstance(f2, Quad) and a1 is not None:
        return all(f2.g.commutes_with(x.lin) for x in a1)
    if isinstance(f1, Quad) and isinstance(f2, Quad):
        return f1.g.commutes_with_quad(f2.g)
    return False


def _require(cond, msg, phase=None):
    if not cond:
        raise SideConditionError(msg, phase)


def _require_q2(u, v, what):
    """u v = q^2 v u."""
    ph = qcommute_check(u, v)
    _require(ph == Q2, f"{what}: expected q^2-commutation for {u} and {v}", ph)


def _ordered_q2(args, what):
    for i in range(len(args)):
        for j in range(i + 1, len(args)):
            _require_q2(args[i], args[j], what)


# ---------------------------------------------------------------------------
# rules
# ---------------------------------------------------------------------------

@dataclass
class RewriteContext:
    """Rule parameters.  ``check_side_conditions=False`` exists for negative tests only."""

    inversion_constant: PhaseScalar = INVERSION_CONSTANT_EXACT
    check_side_conditions: bool = True


def _gb_single(f, cls=Gb):
    return isinstance(f, cls) and len(f.args) == 1


def _need(word, pos, n):
    if pos < 0 or pos + n > len(word):
        raise RewriteError(f"position {pos} out of range for a {n}-factor pattern")
    return word.factors[pos:pos + n]


def _pentagon(word, pos, ctx):
    # g(V) g(U) -> g(U) g(q^-1 U V) g(V),  U V = q^2 V U
    f1, f2 = _need(word, pos, 2)
    if not (_gb_single(f1) and _gb_single(f2)):
        raise RewriteError("Pentagon needs two adjacent g_b factors")
    v, u = f1.arg, f2.arg
    if ctx.check_side_conditions:
        _require_q2(u, v, "Pentagon")
    mid = mono_mul(ExpMonomial(phase=PhaseScalar.q(-1)), mono_mul(u, v))
    return word.replace(pos, pos + 2, [Gb(u), Gb(mid), Gb(v)])


def _pentagon_inv(word, pos, ctx):
    # g(U) g(q^-1 U V) g(V) -> g(V) g(U)
    f1, f2, f3 = _need(word, pos, 3)
    if not all(_gb_single(f) for f in (f1, f2, f3)):
        raise RewriteError("PentagonInv needs three adjacent g_b factors")
    u, w, v = f1.arg, f2.arg, f3.arg
    if ctx.check_side_conditions:
        _require_q2(u, v, "PentagonInv")
        expect = mono_mul(ExpMonomial(phase=PhaseScalar.q(-1)), mono_mul(u, v))
        _require(expect == w, f"PentagonInv: middle factor {w} is not q^-1 U V = {expect}")
    return word.replace(pos, pos + 3, [Gb(v), Gb(u)])


def _exp_split(word, pos, ctx):
    (f,) = _need(word, pos, 1)
    if not isinstance(f, (Gb, GbStar)) or len(f.args) < 2:
        raise RewriteError("ExpSplit needs g_b of a sum")
    if ctx.check_side_conditions:
        _ordered_q2(f.args, "ExpSplit")
    if isinstance(f, Gb):
        new = [Gb(a) for a in f.args]
    else:
        new = [GbStar(a) for a in reversed(f.args)]
    return word.replace(pos, pos + 1, new)


def _exp_merge(word, pos, ctx, n=None):
    # greedy: merge the maximal run of single g_b factors that is pairwise q^2-ordered
    fs = list(word.factors[pos:])
    run = []
    for f in fs:
        if not _gb_single(f) or (n is not None and len(run) == n):
            break
        cand = run + [f.arg]
        try:
            _ordered_q2(cand, "ExpMerge")
        except SideConditionError:
            if not ctx.check_side_conditions and len(run) < 2:
                run = cand
                continue
            break
        run = cand
    if len(run) < 2:
        raise SideConditionError("ExpMerge: no q^2-ordered pair of g_b factors at this position")
    return word.replace(pos, pos + len(run), [Gb(tuple(run))])


def _inversion(word, pos, ctx):
    f = _need(word, pos, 1)[0]
    c = ctx.inversion_constant
    if _gb_single(f, GbStar):
        # g*(e^L) = C^-1 exp(-(pi i/(4 pi^2 b^2)) L^2) g(e^-L)
        m = f.arg
        return word.replace(pos, pos + 1, [Mono(ExpMonomial(phase=c.inv())), Quad(QuadExp.from_square(Fraction(1, 4), m.lin)), Gb(mono_inv(m))])
    if _gb_single(f) and pos + 1 < len(word) and _gb_single(word[pos + 1]):
        m, n = f.arg, word[pos + 1].arg
        if ctx.check_side_conditions:
            _require(mono_inv(m) == n, f"Inversion: {n} is not the inverse of {m}")
        return word.replace(pos, pos + 2, [Mono(ExpMonomial(phase=c)), Quad(QuadExp.from_square(Fraction(-1, 4), m.lin))])
    raise RewriteError("Inversion needs g_b* or an adjacent g_b(x) g_b(1/x) pair")


def _inversion_inv(word, pos, ctx):
    f1, f2 = _need(word, pos, 2)
    c = ctx.inversion_constant
    if isinstance(f1, Mono) and f1.m.is_scalar() and isinstance(f2, Quad):
        if pos + 2 < len(word) and _gb_single(word[pos + 2]):
            m = mono_inv(word[pos + 2].arg)
            if f1.m.phase == c.inv() and f2.g == QuadExp.from_square(Fraction(1, 4), m.lin):
                return word.replace(pos, pos + 3, [GbStar(m)])
        raise RewriteError("InversionInv: pattern not recognised")
    raise RewriteError("InversionInv needs a scalar, a square exponential and g_b")


def _swap(word, pos, ctx):
    f1, f2 = _need(word, pos, 2)
    if isinstance(f1, FnSlot) or isinstance(f2, FnSlot):
        raise RewriteError("SwapCommuting cannot move the slot")
    if ctx.check_side_conditions:
        _require(_commute(f1, f2), f"SwapCommuting: {f1} and {f2} do not commute")
    return word.replace(pos, pos + 2, [f2, f1])


def _push_unitary(word, pos, ctx, kind, sweep):
    f = _need(word, pos, 1)[0]
    if not isinstance(f, kind):
        raise RewriteError(f"expected {kind.__name__} at {pos}, found {f}")
    if isinstance(f, Mono):
        if not f.m.is_scalar():
            raise RewriteError("only unimodular scalars can be pushed")
        act = lambda m: conj_by_mono(f.m, m)
    elif isinstance(f, Quad):
        act = lambda m: conj_by_quad(f.g, m)
    else:
        act = lambda m: conj_by_perm(f.p, m)
    i = pos
    while True:
        nxt = word[i + 1]
        if isinstance(nxt, FnSlot):
            # unitary U: U phi(A) U* = phi(U A U*)
            return word.replace(i, i + 2, [_conj_factor(nxt, act)])
        if isinstance(f, Mono) and isinstance(nxt, (Quad, Perm)):
            moved = nxt  # a unimodular scalar commutes with everything
        elif isinstance(nxt, (Quad, Perm)) or (isinstance(nxt, Mono) and not nxt.m.is_scalar()):
            raise RewriteError(f"cannot push {f} past {nxt}")
        else:
            moved = _conj_factor(nxt, act)
        word = word.replace(i, i + 2, [moved, f])
        i += 1
        if not sweep:
            return word


def _pull_unitary(word, pos, ctx):
    # X U -> U (U^-1 X U): inverse of one push step
    f1, f2 = _need(word, pos, 2)
    if isinstance(f2, Quad):
        inv = f2.g.inv()
        act = lambda m: conj_by_quad(inv, m)
    elif isinstance(f2, Perm):
        act = lambda m: conj_by_perm(f2.p, m)
    elif isinstance(f2, Mono) and f2.m.is_scalar():
        act = lambda m: conj_by_mono(mono_inv(f2.m), m)
    else:
        raise RewriteError("Pull needs a unitary factor on the right")
    return word.replace(pos, pos + 2, [f2, _conj_factor(f1, act)])


def _cancel(word, pos, ctx):
    f1, f2 = _need(word, pos, 2)
    ok = (isinstance(f1, GbStar) and isinstance(f2, Gb) or isinstance(f1, Gb) and isinstance(f2, GbStar)) and f1.args == f2.args
    if not ok:
        raise RewriteError(f"CancelPair: {f1} and {f2} are not a conjugate pair")
    return word.replace(pos, pos + 2, [])


def _insert(word, pos, ctx, arg=None, star_first=True):
    if arg is None:
        raise RewriteError("InsertPair needs an argument")
    pair = [GbStar(arg), Gb(arg)] if star_first else [Gb(arg), GbStar(arg)]
    return word.replace(pos, pos, pair)


def _through_slot(word, pos, ctx):
    f, slot = _need(word, pos, 2)
    if not isinstance(slot, FnSlot) or not isinstance(f, (Gb, GbStar)):
        raise RewriteError("PushThroughFnSlot needs g_b immediately before the slot")
    if ctx.check_side_conditions:
        for a in f.args:
            for c in slot.terms:
                w = omega(a.lin, c.lin)
                _require(w == 0, f"PushThroughFnSlot: {a} does not commute with {c}", PhaseScalar.q(2 * w))
    return word.replace(pos, pos + 1, [])


def _sum_to_conj(word, pos, ctx):
    # phi(U1 + ... + Un) = g(q U1^-1 U2 + ... + q U1^-1 Un) phi(U1) (h.c.)
    slot = _need(word, pos, 1)[0]
    if not isinstance(slot, FnSlot) or len(slot.terms) < 2:
        raise RewriteError("SumToConj needs a slot holding a sum")
    us = slot.terms
    if ctx.check_side_conditions:
        _ordered_q2(us, "SumToConj")
    q1 = mono_mul(ExpMonomial(phase=PhaseScalar.q(1)), mono_inv(us[0]))
    ws = tuple(mono_mul(q1, u) for u in us[1:])
    return word.replace(pos, pos + 1, [Gb(ws), FnSlot(us[0])])


def _conj_to_sum(word, pos, ctx):
    # g(W2 + ... + Wn) phi(U1) -> phi(U1 + q^-1 U1 W2 + ... + q^-1 U1 Wn)
    f, slot = _need(word, pos, 2)
    if not isinstance(f, Gb) or not isinstance(slot, FnSlot) or len(slot.terms) != 1:
        raise RewriteError("ConjToSum needs g_b immediately before a single-term slot")
    u1 = slot.core
    qi = ExpMonomial(phase=PhaseScalar.q(-1))
    us = (u1,) + tuple(mono_mul(qi, mono_mul(u1, w)) for w in f.args)
    if ctx.check_side_conditions:
        _ordered_q2(us, "ConjToSum")
    return word.replace(pos, pos + 2, [FnSlot(us)])


RULES = {
    "Pentagon": _pentagon,
    "PentagonInv": _pentagon_inv,
    "ExpSplit": _exp_split,
    "ExpMerge": _exp_merge,
    "Inversion": _inversion,
    "InversionInv": _inversion_inv,
    "SwapCommuting": _swap,
    "PushMono": lambda w, p, c: _push_unitary(w, p, c, Mono, False),
    "PushMono*": lambda w, p, c: _push_unitary(w, p, c, Mono, True),
    "PushQuad": lambda w, p, c: _push_unitary(w, p, c, Quad, False),
    "PushQuad*": lambda w, p, c: _push_unitary(w, p, c, Quad, True),
    "PushPerm": lambda w, p, c: _push_unitary(w, p, c, Perm, False),
    "PushPerm*": lambda w, p, c: _push_unitary(w, p, c, Perm, True),
    "Pull": _pull_unitary,
    "CancelPair": _cancel,
    "PushThroughFnSlot": _through_slot,
    "SumToConj": _sum_to_conj,
    "ConjToSum": _conj_to_sum,
}


def apply_rule(word: OpWord, rule: str, pos: int, ctx: RewriteContext | None = None, **kw) -> OpWord:
    ctx = ctx or RewriteContext()
    if rule == "InsertPair":
        return _insert(word, pos, ctx, **kw)
    try:
        fn = RULES[rule]
    except KeyError:
        raise RewriteError(f"unknown rule {rule!r}") from None
    return fn(word, pos, ctx)


# ---------------------------------------------------------------------------
# equality
# ---------------------------------------------------------------------------

def _factor_key(f):
    return (type(f).__name__, str(f))


def normal_form(word: OpWord) -> tuple:
    """Bubble commuting neighbours into key order; the slot stays last."""
    fs = list(word.factors)
    changed = True
    while changed:
        changed = False
        for i in range(len(fs) - 1):
            a, b = fs[i], fs[i + 1]
            if isinstance(a, FnSlot) or isinstance(b, FnSlot):
                continue
            if _factor_key(b) < _factor_key(a) and _commute(a, b):
                fs[i], fs[i + 1] = b, a
                changed = True
    return tuple(fs)


def words_equal(a: OpWord, b: OpWord) -> bool:
    return normal_form(a) == normal_form(b)


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def format_word(word: OpWord) -> str:
    return " ; ".join(str(f) for f in word.factors)


def _split_top(text, sep):
    out, depth, cur = [], 0, []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if depth == 0 and text.startswith(sep, i):
            out.append("".join(cur))
            cur = []
            i += len(sep)
            continue
        cur.append(ch)
        i += 1
    out.append("".join(cur))
    return [s.strip() for s in out if s.strip()]


def _monos(body: str):
    """Split 'exp(a) + q^{1} * exp(b)' at '+' signs outside parentheses."""
    return _split_top(body, " + ")


def _parse_factor(tok: str):
    m = re.fullmatch(r"(g\*|g|phi|M|Q|P)\[(.*)\]", tok.strip(), re.S)
    if not m:
        raise RewriteError(f"cannot parse factor {tok!r}")
    head, body = m.groups()
    if head in ("g", "g*", "phi"):
        args = tuple(parse_monomial(s) for s in _monos(body))
        return {"g": Gb, "g*": GbStar, "phi": FnSlot}[head](args)
    if head == "M":
        return Mono(parse_monomial(body))
    if head == "Q":
        return Quad(QuadExp.parse(body))
    return Perm(Transposition(body[0], body[1:]))


def parse_word(text: str) -> OpWord:
    return OpWord(tuple(_parse_factor(t) for t in _split_top(text, ";")))


# ---------------------------------------------------------------------------
# scripts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScriptStep:
    rule: str
    pos: int
    expect: OpWord | None = None
    line: int = 0


@dataclass(frozen=True)
class DerivationScript:
    name: str
    start: OpWord
    steps: tuple
    end: OpWord
    note: str = ""


@dataclass(frozen=True)
class StepReport:
    index: int
    rule: str
    pos: int
    status: str
    word: str
    message: str = ""


@dataclass(frozen=True)
class ScriptReport:
    name: str
    passed: bool
    steps: tuple
    checked_intermediates: int
    message: str = ""


def parse_script(text: str, name: str = "") -> DerivationScript:
    """Line format::

        NAME <name>
        NOTE <free text>
        START <word>
        STEP <rule> @ <pos>
        EXPECT <word>        (optional, checked after the preceding step)
        END <word>
    """
    start = end = None
    steps = []
    note = ""
    for k, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "NAME":
            name = rest
        elif key == "NOTE":
            note = (note + " " + rest).strip()
        elif key == "START":
            start = parse_word(rest)
        elif key == "STEP":
            m = re.fullmatch(r"(\S+)\s*@\s*(\d+)", rest)
            if not m:
                raise RewriteError(f"line {k}: bad STEP {rest!r}")
            steps.append(ScriptStep(m.group(1), int(m.group(2)), None, k))
        elif key == "EXPECT":
            if not steps:
                raise RewriteError(f"line {k}: EXPECT before any STEP")
            s = steps[-1]
            steps[-1] = ScriptStep(s.rule, s.pos, parse_word(rest), s.line)
        elif key == "END":
            end = parse_word(rest)
        else:
            raise RewriteError(f"line {k}: unknown directive {key!r}")
    if start is None or end is None:
        raise RewriteError(f"script {name!r} lacks START or END")
    return DerivationScript(name, start, tuple(steps), end, note)


def _script_dir():
    return resources.files("qgv") / "data" / "scripts"


def list_scripts() -> list[str]:
    return sorted(p.name[:-4] for p in _script_dir().iterdir() if p.name.endswith(".txt"))


def load_script(name: str) -> DerivationScript:
    p = _script_dir() / f"{name}.txt"
    if not p.is_file():
        raise RewriteError(f"no script named {name!r}")
    return parse_script(p.read_text(), name)


def replay_script(s: DerivationScript, ctx: RewriteContext | None = None) -> ScriptReport:
    ctx = ctx or RewriteContext()
    word = s.start
    reports = []
    checked = 0
    for i, st in enumerate(s.steps):
        try:
            word = apply_rule(word, st.rule, st.pos, ctx)
        except RewriteError as e:
            reports.append(StepReport(i, st.rule, st.pos, "fail", format_word(word), str(e)))
            return ScriptReport(s.name, False, tuple(reports), checked, f"step {i} ({st.rule} @ {st.pos}): {e}")
        if st.expect is not None:
            checked += 1
            if not words_equal(word, st.expect):
                msg = f"step {i} ({st.rule} @ {st.pos}): got\n  {format_word(word)}\nexpected\n  {format_word(st.expect)}"
                reports.append(StepReport(i, st.rule, st.pos, "fail", format_word(word), msg))
                return ScriptReport(s.name, False, tuple(reports), checked, msg)
        reports.append(StepReport(i, st.rule, st.pos, "pass", format_word(word)))
    if not words_equal(word, s.end):
        msg = f"end mismatch: got\n  {format_word(word)}\nexpected\n  {format_word(s.end)}"
        return ScriptReport(s.name, False, tuple(reports), checked, msg)
    return ScriptReport(s.name, True, tuple(reports), checked + 1)

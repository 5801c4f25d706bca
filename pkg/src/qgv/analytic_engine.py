"""
Numeric side of the operator calculus on L^2(R).

Test functions are small expression trees (:class:`PointwiseFunction`)
evaluated in log form, so that products of many G_b factors neither
overflow nor lose the phase.  Operators of the positive representation
act on these trees symbolically: a power ``core^{is}`` of an exponential
monomial becomes an exponential factor times a complex shift, and the
g_b dressing of a conjugated generator becomes a pair of g_b factors.
Matrix elements are then one-dimensional integrals along the real line.

Parameters of the nodes may be numpy arrays.  They broadcast against the
evaluation point, which is how the tau-integrand of the Kac identity is
evaluated on a whole (u, tau) grid at once.

The module also hosts the scalar identity checks (functional equations,
4-5 identity, Fourier representation, asymptotics, inversion constant)
so that every transcendental claim is reachable from one place.
"""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .contour_quadrature import (
    ContourSpec,
    Detour,
    QuadratureError,
    de_halfline,
    integrate_contour,
    integrate_line,
    residue,
)
from .qweyl_symbolic import BASIS, ExpMonomial, MonomialSum, PhaseScalar
from .reporting import FAIL, PASS, IdentityReport
from .special_functions import (
    DEFAULT_B,
    DEFAULT_PREC,
    GbPoleError,
    ModularParameter,
    gb_asymptotic,
    gb_eval,
    gb_log_eval,
    inversion_constant,
    lattice_classify,
    log_gb_np,
    mp_new,
    smallg_eval,
)

__all__ = [
    "EvalContext",
    "PointwiseFunction",
    "GaussianCore",
    "ExpQuadratic",
    "ExpLinear",
    "GFactor",
    "GbFactor",
    "ComplexShift",
    "ScalarMul",
    "Product",
    "Sum",
    "Conj",
    "gaussian",
    "phi_lambda_tree",
    "eval_testfn",
    "apply_monomial",
    "apply_operator",
    "apply_sum",
    "UGrid",
    "matrix_element",
    "KacCheckSpec",
    "KacResult",
    "kac_evaluate",
    "kac_check",
    "kac_reports",
    "kac_pair_consistency",
    "phi_lambda_eval",
    "EigenCheckSpec",
    "eigen_ratios",
    "eigenfunction_check",
    "TransformSpec",
    "kashaev_transform",
    "isometry_check",
    "hermiticity_check",
    "functional_equation_check",
    "reflection_check",
    "four_five_check",
    "fourier_check",
    "asymptotic_check",
    "inversion_constant_check",
    "identify_phase",
]

_U, _DU, _NU = BASIS.index("u"), BASIS.index("du"), BASIS.index("nu")
_NU1, _NU2 = BASIS.index("nu1"), BASIS.index("nu2")


# ---------------------------------------------------------------------------
# evaluation backends
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalContext:
    """Where trees are evaluated: numpy doubles (prec None) or mpmath at ``prec`` bits."""

    b: float = DEFAULT_B
    prec: int | None = None

    @property
    def Q(self):
        return self.b + 1 / self.b

    @property
    def mp(self) -> ModularParameter:
        return mp_new(self.b)

    @property
    def exact(self):
        return self.prec is not None

    def log_G(self, z):
        if self.prec is None:
            return log_gb_np(self.b, z)
        return gb_log_eval(self.mp, mpmath.mpc(z), self.prec)

    def log_smallg(self, log_x):
        """log g_b(x) given log x; branch follows the G_b continuation."""
        if self.prec is None:
            b = self.b
            lzb = -1j * np.pi * (0.25 + (b * b + 1 / (b * b)) / 12)
            return lzb - log_gb_np(b, self.Q / 2 + np.asarray(log_x) / (2j * np.pi * b))
        mp = self.mp
        with mpmath.workprec(self.prec + 24):
            z = mp.Q / 2 + mpmath.mpc(log_x) / (2j * mpmath.pi * mp.b)
            return mp.log_zeta_bar - gb_log_eval(mp, z, self.prec)

    def exp(self, w):
        return np.exp(w) if self.prec is None else mpmath.exp(w)

    def log(self, w):
        return np.log(w) if self.prec is None else mpmath.log(w)

    def conj(self, w):
        return np.conj(w) if self.prec is None else mpmath.conj(w)

    @property
    def pi(self):
        return np.pi if self.prec is None else mpmath.pi


_NUMPY = EvalContext()


# ---------------------------------------------------------------------------
# expression tree
# ---------------------------------------------------------------------------

class PointwiseFunction:
    """Base class; subclasses implement ``log_eval(z, ctx)``."""

    def log_eval(self, z, ctx: EvalContext):
        raise NotImplementedError

    def __call__(self, z, ctx: EvalContext = _NUMPY):
        return ctx.exp(self.log_eval(z, ctx))

    def __mul__(self, other):
        if isinstance(other, PointwiseFunction):
            return Product((self, other))
        return ScalarMul(complex(other), self)

    __rmul__ = __mul__

    def __add__(self, other):
        return Sum((self, other))

    def shift(self, delta):
        return ComplexShift(delta, self)


@dataclass(frozen=True, eq=False)
class ExpQuadratic(PointwiseFunction):
    """exp(c2 z^2 + c1 z + c0)."""

    c2: object = 0.0
    c1: object = 0.0
    c0: object = 0.0

    def log_eval(self, z, ctx):
        return (self.c2 * z + self.c1) * z + self.c0


@dataclass(frozen=True, eq=False)
class GaussianCore(PointwiseFunction):
    """exp(-pi a (z - center)^2 + slope z), Re a > 0."""

    a: complex = 1.0
    center: complex = 0.0
    slope: complex = 0.0

    def __post_init__(self):
        if complex(self.a).real <= 0:
            raise ValueError("GaussianCore needs Re a > 0")

    def log_eval(self, z, ctx):
        d = z - self.center
        return -ctx.pi * self.a * d * d + self.slope * z


@dataclass(frozen=True, eq=False)
class ExpLinear(PointwiseFunction):
    """exp(slope z + const)."""

    slope: object = 0.0
    const: object = 0.0

    def log_eval(self, z, ctx):
        return self.slope * z + self.const


@dataclass(frozen=True, eq=False)
class GFactor(PointwiseFunction):
    """G_b(k z + c) ** sign."""

    sign: int
    k: object
    c: object

    def log_eval(self, z, ctx):
        return self.sign * ctx.log_G(self.k * z + self.c)


@dataclass(frozen=True, eq=False)
class GbFactor(PointwiseFunction):
    """g_b(exp(pi b (k z + c))) ** sign; sign -1 is g_b* on the positive axis."""

    sign: int
    k: object
    c: object

    def log_eval(self, z, ctx):
        return self.sign * ctx.log_smallg(ctx.pi * ctx.b * (self.k * z + self.c))


@dataclass(frozen=True, eq=False)
class ComplexShift(PointwiseFunction):
    """z -> child(z + delta)."""

    delta: object
    child: PointwiseFunction

    def log_eval(self, z, ctx):
        return self.child.log_eval(z + self.delta, ctx)


@dataclass(frozen=True, eq=False)
class ScalarMul(PointwiseFunction):
    c: complex
    child: PointwiseFunction

    def log_eval(self, z, ctx):
        return ctx.log(self.c) + self.child.log_eval(z, ctx)


@dataclass(frozen=True, eq=False)
class Product(PointwiseFunction):
    factors: tuple

    def log_eval(self, z, ctx):
        acc = 0
        for f in self.factors:
            acc = acc + f.log_eval(z, ctx)
        return acc


@dataclass(frozen=True, eq=False)
class Sum(PointwiseFunction):
    terms: tuple

    def log_eval(self, z, ctx):
        logs = [t.log_eval(z, ctx) for t in self.terms]
        if ctx.exact:
            return mpmath.log(mpmath.fsum(mpmath.exp(v) for v in logs))
        logs = np.broadcast_arrays(*logs)
        m = np.max([np.real(v) for v in logs], axis=0)
        m = np.where(np.isfinite(m), m, 0.0)
        return m + np.log(sum(np.exp(v - m) for v in logs))


@dataclass(frozen=True, eq=False)
class Conj(PointwiseFunction):
    """Analytic conjugate z -> conj(child(conj z)); equals conj(child) on the real line."""

    child: PointwiseFunction

    def log_eval(self, z, ctx):
        return ctx.conj(self.child.log_eval(ctx.conj(z), ctx))


def gaussian(a=1.0, center=0.0, slope=0.0) -> GaussianCore:
    return GaussianCore(complex(a), complex(center), complex(slope))


def phi_lambda_tree(lam, b=DEFAULT_B) -> PointwiseFunction:
    """exp(pi i u^2 + pi Q u) G_b(-i u + i lam) G_b(-i u - i lam)."""
    Q = b + 1 / b
    return Product((ExpQuadratic(1j * np.pi, np.pi * Q, 0.0),
                    GFactor(1, -1j, 1j * lam), GFactor(1, -1j, -1j * lam)))


def eval_testfn(f: PointwiseFunction, z, prec=None, b=DEFAULT_B):
    """Value of ``f`` at ``z``; double precision unless ``prec`` bits are requested.

    A G_b pole met by any factor raises :class:`GbPoleError` (the numpy path
    reports it as a non-finite value).
    """
    ctx = EvalContext(b, prec)
    if ctx.exact:
        with mpmath.workprec(prec + 24):
            return ctx.exp(f.log_eval(mpmath.mpc(z), ctx))
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.exp(f.log_eval(np.asarray(z, dtype=complex), ctx))
    if not np.all(np.isfinite(v)):
        raise GbPoleError(lattice_classify(mp_new(b), complex(np.ravel(z)[0])), z)
    return v if np.ndim(v) else complex(v)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def _central_value(lin, nu):
    """Numeric value of the central part of a linear form (in units of pi b)."""
    if not isinstance(nu, dict):
        nu = {"nu": nu}
    tot = 0.0
    for idx, name in ((_NU, "nu"), (_NU1, "nu1"), (_NU2, "nu2")):
        if lin[idx]:
            tot += float(lin[idx]) * nu[name]
    return tot


def _split_u(m: ExpMonomial):
    lin = m.lin
    extra = [BASIS[i] for i, c in enumerate(lin) if c and i not in (_U, _DU, _NU, _NU1, _NU2)]
    if extra:
        raise ValueError(f"only the single-variable (sl2) block is evaluable numerically; got {extra}")
    return float(lin[_U]), float(lin[_DU])


def apply_monomial(m: ExpMonomial, f: PointwiseFunction, nu=0.0, s=None, b=DEFAULT_B):
    """``m f`` (s None) or ``m^{is} f`` for the Weyl-ordered monomial ``m``.

    With m = exp(alpha X + beta P + gamma N), X = pi b u, P = i b d/du,
    m^{is} f(u) = exp(i pi b s (alpha u + gamma nu) - i pi b^2 s^2 alpha beta / 2) f(u - b s beta).
    ``s`` may be a numpy array.
    """
    alpha, beta = _split_u(m)
    gam = _central_value(m.lin, nu)
    if s is None:
        if not m.phase.is_one():
            f = ScalarMul(m.phase.evaluate(b), f)
        s = -1j
    elif not m.phase.is_one():
        raise ValueError("imaginary powers need a Weyl-ordered monomial with phase 1")
    lin = ExpLinear(1j * np.pi * b * s * alpha,
                    1j * np.pi * b * s * gam - 0.5j * np.pi * b * b * s * s * alpha * beta)
    if beta == 0:
        return Product((lin, f))
    return Product((lin, ComplexShift(-b * s * beta, f)))


def apply_sum(ms: MonomialSum, f, nu=0.0, b=DEFAULT_B):
    """A generator given as a sum of monomials, applied termwise."""
    terms = []
    for n, m in ms.terms():
        t = apply_monomial(m, f, nu, None, b)
        terms.append(t if n == 1 else ScalarMul(complex(n), t))
    return Sum(tuple(terms))


def _prefix_factor(p: ExpMonomial, sign, nu, b):
    alpha, beta = _split_u(p)
    if beta:
        raise ValueError("g_b prefix must be a multiplication operator")
    c = _central_value(p.lin, nu)
    if not p.phase.is_one():
        c += cmath.log(p.phase.evaluate(b)) / (np.pi * b)
    return GbFactor(sign, alpha, c)


def apply_operator(gen, s, f: PointwiseFunction, nu=0.0, b=DEFAULT_B):
    """``gen^{is} f`` for a conjugated generator (or a bare monomial such as K).

    g_b(p_1)...g_b(p_k) core^{is} g_b*(p_k)...g_b*(p_1) f becomes the tree
    prod g_b(p_j)(u) * [phase * shift] * prod g_b*(p_j)(u - b s beta) f.
    """
    if isinstance(gen, ExpMonomial):
        return apply_monomial(gen, f, nu, s, b)
    inner = Product(tuple(_prefix_factor(p, -1, nu, b) for p in gen.prefix) + (f,))
    core = apply_monomial(gen.core, inner, nu, s, b)
    return Product(tuple(_prefix_factor(p, 1, nu, b) for p in gen.prefix) + (core,))


@dataclass(frozen=True)
class UGrid:
    """Trapezoid grid center + (k + 1/2) h, |k| <= half_width / h.

    Matrix elements of Gaussian-class functions are analytic in a strip,
    so the trapezoid rule converges geometrically in 1/h.
    """

    center: float = 0.0
    h: float = 0.1
    half_width: float = 8.0

    def nodes(self):
        n = int(round(self.half_width / self.h))
        return self.center + (np.arange(-n, n) + 0.5) * self.h


def _apply_word(word, g, nu, b):
    h = g
    for item in reversed(list(word)):
        if isinstance(item, PointwiseFunction):
            h = Product((item, h))
        elif callable(item):
            h = item(h)
        else:
            gen, s = item
            h = apply_operator(gen, s, h, nu, b) if s is not None else apply_sum(gen, h, nu, b)
    return h


def matrix_element(f, word, g, nu=0.0, b=DEFAULT_B, grid: UGrid | None = None, method="trapezoid",
                   tol=1e-12):
    """<f, word g> = int conj(f(u)) (word g)(u) du over the real line.

    ``word`` lists factors left to right; each is ``(generator, s)`` for
    ``generator^{is}``, ``(MonomialSum, None)`` for the generator itself, a
    PointwiseFunction (multiplication operator) or a tree-to-tree callable.
    """
    h = _apply_word(word, g, nu, b)
    integrand = Product((Conj(f), h))
    if method == "de":
        return complex(integrate_line(lambda u: integrand(u), 0.0, tol=tol, cutoff=30).value)
    grid = grid or UGrid()
    u = grid.nodes()
    return complex(np.sum(integrand(u)) * grid.h)


# ---------------------------------------------------------------------------
# Kac identity (sl2)
# ---------------------------------------------------------------------------

def _sl2_generators():
    from .representations import build_sl2_rep, conjugated_form

    rep = build_sl2_rep()
    return rep, conjugated_form(rep, "E"), conjugated_form(rep, "F"), rep.K[0]


@dataclass
class KacCheckSpec:
    s: float
    t: float
    nu: float
    f: PointwiseFunction = field(default_factory=lambda: gaussian(1.0, 0.1, 0.2))
    g: PointwiseFunction = field(default_factory=lambda: gaussian(1.0, -0.2, -0.3))
    eps: float = 0.25
    tol: float = 1e-4
    b: float = DEFAULT_B
    h: float = 0.1
    half_width: float = 8.0
    quad_tol: float = 1e-11
    cutoff: float = 30.0

    def __post_init__(self):
        for v in (self.s, self.t, self.s + self.t):
            if v <= 0:
                raise ValueError("s, t must be positive (pole configuration of the tau contour)")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie between the tau = 0 pole and the next one at tau = i")

    def cache_key(self):
        """Hashable identity when both test functions are plain Gaussians."""
        if not (isinstance(self.f, GaussianCore) and isinstance(self.g, GaussianCore)):
            return None
        fg = tuple(complex(x) for x in (self.f.a, self.f.center, self.f.slope,
                                         self.g.a, self.g.center, self.g.slope))
        return (self.s, self.t, self.nu, fg, self.eps, self.b, self.h, self.half_width,
                self.quad_tol, self.cutoff)

    def grid(self):
        # offset so that the moving pole tau0 = s - t + 2u/b stays >= h/b away from 0
        return UGrid(-self.b * (self.s - self.t) / 2, self.h, self.half_width)


@dataclass
class KacResult:
    lhs: complex
    rhs_residue_split: complex
    rhs_detour: complex
    rhs_line_only: complex

    @property
    def ratio(self):
        return self.rhs_residue_split / self.lhs

    @property
    def contour_agreement(self):
        return abs(self.rhs_residue_split / self.rhs_detour - 1)

    def deviation(self, measure=1.0):
        return abs(measure * self.rhs_residue_split - self.lhs) / abs(self.lhs)


_KAC_CACHE: dict = {}


def _kac_parts(spec: KacCheckSpec):
    b = spec.b
    s, t, nu = spec.s, spec.t, spec.nu
    _, E, F, K = _sl2_generators()
    u = spec.grid().nodes()
    hu = spec.grid().h
    fbar = Conj(spec.f)

    lhs_tree = apply_operator(E, s, apply_operator(F, t, spec.g, nu, b), nu, b)
    pre = np.exp(log_gb_np(b, np.array([-1j * b * s, -1j * b * t]))).prod()
    lhs = pre * np.sum(Product((fbar, lhs_tree))(u)) * hu

    ucol = u[:, None]

    def integrand(tau, with_G=True):
        tau = np.asarray(tau, dtype=complex)
        rho, sig = t + tau, s + tau
        h = apply_operator(E, sig, spec.g, nu, b)
        R = Product((GFactor(1, 2j, 1j * b * (s + t + tau)), GFactor(-1, 2j, 1j * b * (s + t + 2 * tau))))
        h = apply_operator(F, rho, apply_operator(K, -tau, Product((R, h)), nu, b), nu, b)
        lt = np.pi * b * (b + 1 / b) * tau + log_gb_np(b, -1j * b * rho) + log_gb_np(b, -1j * b * sig)
        if with_G:
            lt = lt + log_gb_np(b, 1j * b * tau)
        vals = np.exp(lt + Product((fbar, h)).log_eval(ucol, _ctx(b)))
        return vals.sum(axis=0) * hu

    return lhs, integrand


def _ctx(b):
    return _NUMPY if b == DEFAULT_B else EvalContext(b)


def kac_evaluate(spec: KacCheckSpec) -> KacResult:
    """Both sides of the generalized Kac identity, RHS by two contour strategies.

    The contour separates the pole of G_b(i b tau) at tau = 0 (and its
    upward lattice) from the downward lattices at tau = -s, -t.  Strategy A
    integrates the line Im tau = eps and adds 2 pi i times the tau = 0
    residue; strategy B integrates the line with a half-circle detour below 0.
    """
    key = spec.cache_key()
    if key is not None and key in _KAC_CACHE:
        return _KAC_CACHE[key]
    b = spec.b
    lhs, integrand = _kac_parts(spec)
    line = integrate_line(integrand, spec.eps, tol=spec.quad_tol, cutoff=spec.cutoff)
    res_G, _ = residue(lambda z: np.exp(log_gb_np(b, z)), 0.0, 0.2, n=64)
    i0 = integrand(np.array([0.0]), with_G=False)[0]
    rhs_a = line.value + 2j * np.pi * res_G / (1j * b) * i0
    r = min(0.1, spec.h / (2 * b), spec.s / 2, spec.t / 2)
    rhs_b = integrate_contour(integrand, ContourSpec(spec.eps, (Detour(0.0, r, "below"),)),
                              tol=spec.quad_tol, cutoff=spec.cutoff).value
    res = KacResult(complex(lhs), complex(rhs_a), complex(rhs_b), complex(line.value))
    if key is not None:
        _KAC_CACHE[key] = res
    return res


def _kac_details(spec, res, measure):
    return {
        "s": spec.s, "t": spec.t, "nu": spec.nu, "b": spec.b, "eps": spec.eps,
        "lhs": res.lhs, "rhs": res.rhs_residue_split, "rhs_detour": res.rhs_detour,
        "ratio_rhs_over_lhs": res.ratio, "tau_measure": measure,
    }


def kac_check(spec: KacCheckSpec, measure=1.0, result: KacResult | None = None) -> IdentityReport:
    """|LHS - measure*RHS| / |LHS| against ``spec.tol``.

    measure = 1 is the identity with d tau as printed; measure = b is the
    form with b d tau, which is what the numerics support.
    """
    t0 = time.perf_counter()
    res = result or kac_evaluate(spec)
    cid = "kac.literal" if measure == 1.0 else "kac.b_measure"
    rep = IdentityReport.numeric("sl2-kac", f"{cid}[s={spec.s},t={spec.t},nu={spec.nu}]",
                                 res.deviation(measure), spec.tol, **_kac_details(spec, res, measure))
    rep.runtime_ms = (time.perf_counter() - t0) * 1e3
    return rep


def kac_reports(spec: KacCheckSpec, contour_tol=1e-8) -> list:
    res = kac_evaluate(spec)
    tag = f"[s={spec.s},t={spec.t},nu={spec.nu}]"
    return [
        kac_check(spec, 1.0, res),
        kac_check(spec, spec.b, res),
        IdentityReport.numeric("sl2-kac", f"kac.contours{tag}", res.contour_agreement, contour_tol,
                               rhs=res.rhs_residue_split, rhs_detour=res.rhs_detour),
    ]


def kac_pair_consistency(spec: KacCheckSpec, f2, g2, tol=1e-4) -> IdentityReport:
    """The ratio RHS/LHS must not depend on the test pair (operator identity)."""
    r1 = kac_evaluate(spec).ratio
    spec2 = KacCheckSpec(spec.s, spec.t, spec.nu, f2, g2, spec.eps, spec.tol, spec.b, spec.h,
                         spec.half_width, spec.quad_tol, spec.cutoff)
    r2 = kac_evaluate(spec2).ratio
    return IdentityReport.numeric("sl2-kac", f"kac.pairs[s={spec.s},t={spec.t},nu={spec.nu}]",
                                  abs(r1 / r2 - 1), tol, ratio_1=r1, ratio_2=r2)


# ---------------------------------------------------------------------------
# Phi_lambda, eigenfunction property, transform
# ---------------------------------------------------------------------------

def phi_lambda_eval(mp: ModularParameter, lam, u, prec=DEFAULT_PREC):
    """Phi_lambda(u) at ``prec`` bits."""
    with mpmath.workprec(prec + 24):
        u = mpmath.mpc(u)
        lam = mpmath.mpc(lam)
        lg = gb_log_eval(mp, -1j * u + 1j * lam, prec) + gb_log_eval(mp, -1j * u - 1j * lam, prec)
        return mpmath.exp(1j * mpmath.pi * u * u + mpmath.pi * mp.Q * u + lg)


@dataclass
class EigenCheckSpec:
    lam: float
    w: complex
    us: tuple = (-1.0 + 0.4j, -0.4 + 0.4j, 0.4j, 0.5 + 0.4j, 1.1 + 0.4j)
    eps: float = 0.2
    tol: float = 1e-6
    b: float = DEFAULT_B

    def __post_init__(self):
        Q = self.b + 1 / self.b
        w = complex(self.w)
        for u in self.us:
            y = complex(u).imag
            # tau-poles: G_b(-i tau) at Im tau = -n, Phi(u - tau) at Im u + n,
            # the right g_b factor at Im u + Im w - Q/2 - n
            if not (0 < self.eps < y and self.eps > y + w.imag - Q / 2):
                raise ValueError(f"tau line Im = {self.eps} does not separate the poles at u = {u}")


def eigen_ratios(spec: EigenCheckSpec):
    """LHS(u)/RHS(u) at the sample points."""
    b, w, lam = spec.b, complex(spec.w), spec.lam
    phi = phi_lambda_tree(lam, b)
    right = Product((GbFactor(1, 2.0, 2 * w), phi))
    left = GbFactor(1, -2.0, 2 * w)
    Q = b + 1 / b
    ev = np.exp(_NUMPY.log_smallg(2 * np.pi * b * (lam + w)) + _NUMPY.log_smallg(2 * np.pi * b * (w - lam)))
    out = []
    for u in spec.us:
        u = complex(u)

        def kern(tau):
            return np.exp(np.pi * Q * tau + 2j * np.pi * w * tau + log_gb_np(b, -1j * tau)
                          + right.log_eval(u - tau, _NUMPY))

        val = integrate_line(kern, spec.eps, tol=1e-12, cutoff=40, atol=1e-300).value
        lhs = left(u) * val
        rhs = ev * phi(u)
        out.append(complex(lhs / rhs))
    return np.array(out)


def eigenfunction_check(spec: EigenCheckSpec) -> list:
    """u-independence of LHS/RHS and unimodularity of the measured constant."""
    t0 = time.perf_counter()
    r = eigen_ratios(spec)
    c = r[0]
    spread = float(np.max(np.abs(r / c - 1)))
    tag = f"[lam={spec.lam},w={complex(spec.w)}]"
    reps = [
        IdentityReport.numeric("eigen", f"eigen.u_independence{tag}", spread, spec.tol,
                               constant=c, ratios=list(r)),
        IdentityReport.numeric("eigen", f"eigen.unimodular{tag}", abs(abs(c) - 1), spec.tol, constant=c),
    ]
    ms = (time.perf_counter() - t0) * 1e3
    for rep in reps:
        rep.runtime_ms = ms
    return reps


@dataclass
class TransformSpec:
    """dmu(lam) = 4 sinh(pi b lam) sinh(pi lam / b) on (0, lam_max].

    ``measure(lam, scale=2)`` is the doubled-argument density
    4 sinh(2 pi b lam) sinh(2 pi lam / b), under which the transform of the
    Phi_lam used here is measured to be an isometry.
    """

    b: float = DEFAULT_B
    eps: float = 0.2
    lam_max: float = 4.0
    n_lam: int = 801
    cutoff: float = 30.0

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    def measure(self, lam, scale=1):
        b = self.b
        return 4 * np.sinh(scale * np.pi * b * lam) * np.sinh(scale * np.pi * lam / b)


def kashaev_transform(f: PointwiseFunction, spec: TransformSpec, lams):
    """F(lam) = int_{R - i0} f(u) conj(Phi_lam)(u) du on the line Im u = -eps.

    conj(Phi_lam) is continued as the analytic conjugate, whose poles sit
    at +-lam + i n, so the line below the real axis is the R - i0 prescription.
    """
    lc = np.asarray(lams, dtype=float)[:, None]
    phibar = Conj(phi_lambda_tree(lc, spec.b))
    integrand = Product((f, phibar))
    return integrate_line(lambda u: integrand(u), -spec.eps, tol=1e-10, cutoff=spec.cutoff,
                          atol=1e-14).value


def isometry_check(f: PointwiseFunction, spec: TransformSpec | None = None, tol=1e-3) -> list:
    """||f||^2 against int |F|^2 dmu; also positivity of dmu and decay of F.

    ``isometry.norm_ratio`` uses the printed density; the ``.doubled_measure``
    variant uses ``measure(lam, scale=2)``.
    """
    spec = spec or TransformSpec()
    t0 = time.perf_counter()
    lams = np.linspace(1e-6, spec.lam_max, spec.n_lam)
    F = kashaev_transform(f, spec, lams)
    h = lams[1] - lams[0]
    norm = float(integrate_line(lambda u: np.abs(f(u)) ** 2, 0.0, tol=1e-12).value.real)
    reps = []
    for scale, cid in ((1, "isometry.norm_ratio"), (2, "isometry.norm_ratio.doubled_measure")):
        dens = np.abs(F) ** 2 * spec.measure(lams, scale)
        spectral = float(np.sum(dens) * h - 0.5 * h * (dens[0] + dens[-1]))
        ratio = spectral / norm
        reps.append(IdentityReport.numeric("isometry", cid, abs(ratio - 1), tol, norm=norm, spectral=spectral,
                                           ratio=ratio, lam_max=spec.lam_max, n_lam=spec.n_lam))
        if scale == 2:
            tail = float(dens[-1] / np.max(dens))
    reps += [
        IdentityReport.numeric("isometry", "isometry.measure_positive",
                               0.0 if np.all(spec.measure(lams[1:]) > 0) else 1.0, 0.0),
        IdentityReport.numeric("isometry", "isometry.tail", tail, 1e-12, lam_max=spec.lam_max),
    ]
    ms = (time.perf_counter() - t0) * 1e3
    for rep in reps:
        rep.runtime_ms = ms
    return reps


# ---------------------------------------------------------------------------
# hermiticity
# ---------------------------------------------------------------------------

def hermiticity_check(name, f, g, nu=0.4, b=DEFAULT_B, tol=1e-8) -> IdentityReport:
    """<f, X g> = conj <g, X f> for X in {K, E, F} of the sl2 representation."""
    rep, *_ = _sl2_generators()
    op = {"K": MonomialSum.from_terms([rep.K[0]]), "E": rep.E[0], "F": rep.F[0]}[name]
    a = matrix_element(f, [(op, None)], g, nu, b, method="de")
    c = matrix_element(g, [(op, None)], f, nu, b, method="de")
    return IdentityReport.numeric("sl2-kac", f"hermiticity.{name}", abs(a - np.conj(c)) / abs(a), tol,
                                  left=a, right=np.conj(c))


# ---------------------------------------------------------------------------
# scalar identities
# ---------------------------------------------------------------------------

def _random_regular_points(mp, n, seed, re=(-4.0, 6.0), im=(-3.0, 3.0)):
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        z = complex(rng.uniform(*re), rng.uniform(*im))
        ok = all(lattice_classify(mp, w, 1e-3).kind == "regular"
                 for w in (z, z + mp.b, z + 1 / mp.b, mp.Q - z))
        if ok:
            pts.append(z)
    return pts


def functional_equation_check(mp, n=100, seed=20240601, prec=DEFAULT_PREC, tol=1e-20) -> list:
    """G_b(z + b^{+-1}) = (1 - e^{2 pi i b^{+-1} z}) G_b(z) at ``n`` random regular points."""
    worst = {"b": 0.0, "binv": 0.0}
    with mpmath.workprec(prec):
        for z in _random_regular_points(mp, n, seed):
            z = mpmath.mpc(z)
            g = gb_eval(mp, z, prec).value
            for key, step in (("b", mp.b), ("binv", 1 / mp.b)):
                lhs = gb_eval(mp, z + step, prec).value
                rhs = (1 - mpmath.exp(2j * mpmath.pi * step * z)) * g
                worst[key] = max(worst[key], float(abs(lhs / rhs - 1)))
    return [IdentityReport.numeric("scalar", f"functional_equation.{k}", v, tol, points=n, seed=seed)
            for k, v in sorted(worst.items())]


def reflection_check(mp, n=100, seed=20240602, prec=DEFAULT_PREC, tol=1e-20) -> IdentityReport:
    """G_b(z) G_b(Q - z) = e^{pi i z (z - Q)}."""
    worst = 0.0
    with mpmath.workprec(prec):
        for z in _random_regular_points(mp, n, seed):
            z = mpmath.mpc(z)
            lhs = gb_eval(mp, z, prec).value * gb_eval(mp, mp.Q - z, prec).value
            worst = max(worst, float(abs(lhs / mpmath.exp(1j * mpmath.pi * z * (z - mp.Q)) - 1)))
    return IdentityReport.numeric("scalar", "reflection", worst, tol, points=n, seed=seed)


FOUR_FIVE_TRIPLES = ((0.625, 0.625, 0.52), (0.2, 0.5, 0.3), (0.4, 0.15, 0.5), (0.6, 0.35, 0.2),
                     (0.25, 0.25, 0.9))


def four_five_check(mp, triples=FOUR_FIVE_TRIPLES, prec=DEFAULT_PREC, tol=1e-8) -> list:
    """int e^{-2 pi g t} G(a+it)G(b+it)/(G(a+b+g+it)G(Q+it)) dt = G(a)G(b)G(g)/(G(a+g)G(b+g)).

    The line Im t = min(a, b)/2 passes above the pole of 1/G_b(Q + i t) at t = 0.
    """
    b = float(mp.b)
    Q = b + 1 / b
    out = []
    for al, be, ga in triples:
        s = al + be + ga

        def f(t):
            return np.exp(-2 * np.pi * ga * t + log_gb_np(b, al + 1j * t) + log_gb_np(b, be + 1j * t)
                          - log_gb_np(b, s + 1j * t) - log_gb_np(b, Q + 1j * t))

        val = integrate_line(f, min(al, be) / 2, tol=1e-12, cutoff=40).value
        G = lambda z: gb_eval(mp, z, prec).value
        ref = complex(G(al) * G(be) * G(ga) / (G(al + ga) * G(be + ga)))
        out.append(IdentityReport.numeric("scalar", f"four_five[{al},{be},{ga}]", abs(val / ref - 1), tol,
                                          value=val, reference=ref))
    return out


FOURIER_POINTS = (0.3, 0.8, 1.3, 2.5, 4.7)


def fourier_integral(b, x, eps=0.5, theta=math.pi / 4):
    """int x^{i tau / b} e^{pi Q tau} G_b(-i tau) d tau above tau = 0.

    The contour is the line Im tau = eps for Re tau < 0 joined to a ray of
    angle -theta; on the real direction the integrand is a pure chirp.
    """
    Q = b + 1 / b
    lx = math.log(x)
    f = lambda t: np.exp(1j * t * lx / b + np.pi * Q * t + log_gb_np(b, -1j * t))
    left, _, _ = de_halfline(f, 1j * eps, -1.0, tol=1e-13, cutoff=30)
    right, _, _ = de_halfline(f, 1j * eps, cmath.exp(-1j * theta), tol=1e-13, cutoff=12)
    return complex(right - left)


def fourier_check(mp, xs=FOURIER_POINTS, prec=DEFAULT_PREC, tol=1e-8) -> list:
    out = []
    for x in xs:
        v = fourier_integral(float(mp.b), x)
        ref = complex(smallg_eval(mp, x, prec))
        out.append(IdentityReport.numeric("scalar", f"fourier[x={x}]", abs(v / ref - 1), tol,
                                          value=v, reference=ref))
    return out


def asymptotic_check(mp, points=(0.4 + 50j, 0.7 - 50j, -1.3 + 50j, 2.2 - 50j), prec=DEFAULT_PREC,
                     tol=1e-20) -> list:
    out = []
    with mpmath.workprec(prec):
        for z in points:
            zz = mpmath.mpc(z)
            r = float(abs(gb_eval(mp, zz, prec).value / gb_asymptotic(mp, zz) - 1))
            out.append(IdentityReport.numeric("scalar", f"asymptotic[z={z}]", r, tol))
    return out


def identify_phase(value, b, denominators=(1, 2, 3, 4, 6, 8, 12, 24), tol=1e-12):
    """Exact PhaseScalar e^{pi i (c0 + c (b^2 + b^-2))} matching a measured unimodular number.

    Tries small rationals c (simplest first) and reads c0 off the residual
    angle; returns None when nothing fits.
    """
    value = complex(value)
    if abs(abs(value) - 1) > 1e-9:
        return None
    theta = cmath.phase(value) / math.pi
    s = b * b + 1 / (b * b)
    seen = set()
    for d in denominators:
        for k in sorted(range(-2 * d, 2 * d + 1), key=abs):
            c = Fraction(k, d)
            if c in seen:
                continue
            seen.add(c)
            c0 = Fraction(round(((theta - float(c) * s) % 2) * 24), 24)
            ph = PhaseScalar(c0, c, c)
            if abs(ph.evaluate(b) - value) < tol:
                return ph
    return None


INVERSION_POINTS = (0.3, 0.9, 1.7, 2.6, 4.0)


def inversion_constant_check(mp, xs=INVERSION_POINTS, prec=DEFAULT_PREC, tol=1e-10):
    """Measure g_b(x) g_b(1/x) e^{-pi i log^2 x/(4 pi^2 b^2)} and match it to an exact phase.

    Returns (reports, PhaseScalar or None).
    """
    with mpmath.workprec(prec):
        vals = [inversion_constant(mp, x, prec) for x in xs]
        spread = float(max(abs(v / vals[0] - 1) for v in vals))
    c = complex(vals[0])
    ph = identify_phase(c, float(mp.b))
    reps = [
        IdentityReport.numeric("scalar", "inversion_constant.x_independence", spread, tol,
                               constant=c, exact=str(ph) if ph is not None else "unidentified"),
    ]
    return reps, ph

"""
Double-exponential quadrature along lines, rays and pole-indented contours.

Two back ends live here.  The ``*_mp`` routines work in mpmath at an
arbitrary working precision and are used for the high-precision G_b
evaluation.  The array routines work on numpy ``complex128`` and expect a
vectorized integrand ``f(ndarray) -> ndarray``; they carry the heavy
double-precision suites (Fourier kernel, 4-5 identity, Kac identity).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import gmpy2
import mpmath
import numpy as np

__all__ = [
    "QuadratureError",
    "QuadratureResult",
    "Detour",
    "ContourSpec",
    "expsinh_mp",
    "expsinh_gmpy",
    "de_interval",
    "de_halfline",
    "de_line",
    "integrate_line",
    "integrate_contour",
    "residue",
    "residue_split",
]


class QuadratureError(ArithmeticError):
    """Raised when a requested accuracy cannot be reached."""


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    err_estimate: float
    nodes_used: int


@dataclass(frozen=True)
class Detour:
    """Semicircular indentation of the base line around ``center``.

    ``direction='below'`` dips under the point, ``'above'`` passes over it.
    """

    center: complex
    radius: float
    direction: str = "below"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("detour radius must be positive")
        if self.direction not in ("above", "below"):
            raise ValueError(f"unknown detour direction {self.direction!r}")


@dataclass(frozen=True)
class ContourSpec:
    base_shift: float = 0.0
    detours: tuple = field(default_factory=tuple)
    truncation: float | None = None

    def __post_init__(self):
        ds = sorted(self.detours, key=lambda d: complex(d.center).real)
        for d1, d2 in zip(ds, ds[1:]):
            if abs(complex(d2.center) - complex(d1.center)) <= d1.radius + d2.radius:
                raise ValueError("detours overlap")
        object.__setattr__(self, "detours", tuple(ds))


# ---------------------------------------------------------------------------
# mpmath back end
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _expsinh_table(prec, level, tmin, tmax):
    """Nodes and weights of exp-sinh on [0, inf) at step 2**-level.

    Only the nodes new at this level are returned (odd multiples of h),
    except for level 0 which returns all of them.
    """
    with mpmath.workprec(prec):
        h = mpmath.mpf(2) ** (-level)
        halfpi = mpmath.pi / 2
        if level == 0:
            ks = range(int(math.floor(tmin)), int(math.ceil(tmax)) + 1)
        else:
            n = 2 ** level
            ks = range(int(math.floor(tmin * n)) | 1, int(math.ceil(tmax * n)) + 1, 2)
        nodes, weights = [], []
        for k in ks:
            t = k * h
            s = halfpi * mpmath.sinh(t)
            r = mpmath.exp(s)
            w = halfpi * mpmath.cosh(t) * r
            nodes.append(r)
            weights.append(w)
        return tuple(nodes), tuple(weights)


def _expsinh_range(bits):
    # r = exp(pi/2 sinh t): cover r in [2^-bits, ~bits*ln2 + 10]
    bits = bits * math.log(2)
    tmin = -math.asinh(bits / (0.5 * math.pi))
    tmax = math.asinh(math.log(bits + 10) / (0.5 * math.pi))
    return round(tmin, 3), round(tmax, 3)


def expsinh_mp(f, tol, prec, scale=1, max_level=9, tmin=None, tmax=None, range_bits=None):
    """Integrate ``f`` over [0, inf) with the exp-sinh rule.

    ``scale`` stretches the abscissae (r -> r/scale) so that an integrand
    decaying like exp(-scale*r) is seen with unit decay rate.  The node
    range covers r from 2**-range_bits up to where exp(-r) drops below it.  Returns a
    :class:`QuadratureResult` whose ``value`` is an mpc.
    """
    if tmin is None or tmax is None:
        lo, hi = _expsinh_range(range_bits or prec + 20)
        tmin = lo if tmin is None else tmin
        tmax = hi if tmax is None else tmax
    with mpmath.workprec(prec):
        scale = mpmath.mpf(scale)
        inv = 1 / scale
        total = mpmath.mpc(0)
        est_prev = None
        diff_prev = None
        used = 0
        for level in range(max_level + 1):
            nodes, weights = _expsinh_table(prec, level, tmin, tmax)
            acc = mpmath.mpc(0)
            for r, w in zip(nodes, weights):
                acc += w * f(r * inv)
            used += len(nodes)
            total += acc
            est = total * inv * mpmath.mpf(2) ** (-level)
            if est_prev is not None:
                diff = abs(est - est_prev)
                if diff == 0:
                    err = mpmath.mpf(0)
                elif diff_prev is not None and diff_prev > 0 and diff < diff_prev:
                    # quadratic convergence of the DE rule
                    err = diff * diff / diff_prev
                    err = max(err, diff * diff)
                else:
                    err = diff
                if level >= 3 and err <= tol:
                    return QuadratureResult(est, float(err), used)
                diff_prev = diff
            est_prev = est
    raise QuadratureError(f"exp-sinh did not reach tol={float(tol):.3g}")


@lru_cache(maxsize=64)
def _expsinh_table_gmpy(prec, level, tmin, tmax):
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        halfpi = gmpy2.const_pi() / 2
        n = 2 ** level
        if level == 0:
            ks = range(int(math.floor(tmin)), int(math.ceil(tmax)) + 1)
        else:
            ks = range(int(math.floor(tmin * n)) | 1, int(math.ceil(tmax * n)) + 1, 2)
        out = []
        for k in ks:
            t = gmpy2.mpfr(k) / n
            r = gmpy2.exp(halfpi * gmpy2.sinh(t))
            out.append((r, halfpi * gmpy2.cosh(t) * r))
        return tuple(out)


def expsinh_gmpy(f, tol, prec, scale=1, max_level=9, range_bits=None):
    """Same rule as :func:`expsinh_mp` with gmpy2 (MPFR/MPC) arithmetic.

    ``f`` receives an ``mpfr`` abscissa and returns an ``mpc``; the value
    returned in the result is an ``mpc`` at precision ``prec``.
    """
    tmin, tmax = _expsinh_range(range_bits or prec + 20)
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        inv = 1 / gmpy2.mpfr(scale)
        tol = gmpy2.mpfr(tol)
        total = gmpy2.mpc(0)
        est_prev = diff_prev = None
        used = 0
        for level in range(max_level + 1):
            acc = gmpy2.mpc(0)
            table = _expsinh_table_gmpy(prec, level, tmin, tmax)
            for r, w in table:
                acc += w * f(r * inv)
            used += len(table)
            total += acc
            est = total * inv / 2 ** level
            if est_prev is not None:
                diff = abs(est - est_prev)
                if diff == 0:
                    err = diff
                elif diff_prev is not None and 0 < diff < diff_prev:
                    err = max(diff * diff / diff_prev, diff * diff)
                else:
                    err = diff
                if level >= 3 and err <= tol:
                    return QuadratureResult(est, float(err), used)
                diff_prev = diff
            est_prev = est
    raise QuadratureError(f"exp-sinh did not reach tol={float(tol):.3g}")


# ---------------------------------------------------------------------------
# numpy back end
# ---------------------------------------------------------------------------

_TS_RANGE = 3.2  # tanh-sinh: weights below 1e-300 beyond this


@lru_cache(maxsize=32)
def _tanhsinh_nodes(h):
    t = np.arange(-_TS_RANGE, _TS_RANGE + h / 2, h)
    s = 0.5 * np.pi * np.sinh(t)
    x = np.tanh(s)
    w = 0.5 * np.pi * np.cosh(t) / np.cosh(s) ** 2
    keep = (w > 1e-300) & (np.abs(x) < 1.0)
    return x[keep], w[keep]


@lru_cache(maxsize=32)
def _expsinh_nodes(h):
    t = np.arange(-5.5, 3.6 + h / 2, h)
    r = np.exp(0.5 * np.pi * np.sinh(t))
    w = 0.5 * np.pi * np.cosh(t) * r
    return r, w


@lru_cache(maxsize=32)
def _sinhsinh_nodes(h):
    t = np.arange(-3.8, 3.8 + h / 2, h)
    s = 0.5 * np.pi * np.sinh(t)
    return np.sinh(s), 0.5 * np.pi * np.cosh(t) * np.cosh(s)


def _refine(rule, f, tol, h0, levels, atol=0.0):
    prev = None
    used = 0
    h = h0
    for _ in range(levels):
        val, n = rule(f, h)
        used += n
        if prev is not None:
            err = float(np.max(np.abs(val - prev)))
            scale = float(np.max(np.abs(val))) if np.size(val) else 0.0
            if err <= max(tol * scale, atol, 1e-300):
                return val, err, used
        prev = val
        h /= 2
    raise QuadratureError(f"DE refinement did not reach tol={tol:.3g} (last err {err:.3g})")


def de_interval(f, a, b, tol=1e-12, h0=0.25, levels=7):
    """Integrate along the straight segment a -> b (complex endpoints)."""
    a = complex(a)
    b = complex(b)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)

    def rule(f, h):
        x, w = _tanhsinh_nodes(h)
        vals = f(mid + half * x)
        return h * half * np.tensordot(vals, w, axes=([-1], [0])), x.size

    return _refine(_wrap_last(rule), f, tol, h0, levels)


def de_halfline(f, start, direction, tol=1e-12, scale=1.0, h0=0.25, levels=7, cutoff=80.0):
    """Integrate along the ray ``start + r*direction``, r in [0, inf).

    Nodes with r > cutoff are dropped; the caller vouches that the
    integrand is negligible there.
    """
    start = complex(start)
    direction = complex(direction) / abs(complex(direction))

    def rule(f, h):
        r, w = _expsinh_nodes(h)
        r = r / scale
        keep = r <= cutoff
        r, w = r[keep], w[keep]
        vals = f(start + direction * r)
        vals = np.where(np.isfinite(vals), vals, 0.0)
        return h * direction / scale * np.tensordot(vals, w, axes=([-1], [0])), r.size

    return _refine(rule, f, tol, h0, levels)


def de_line(f, shift, tol=1e-12, scale=1.0, center=0.0, h0=0.25, levels=7, cutoff=80.0,
            atol=0.0):
    """Integrate over the horizontal line Im t = shift, |Re t - center| <= cutoff."""
    base = complex(center, shift)

    def rule(f, h):
        x, w = _sinhsinh_nodes(h)
        x = x / scale
        keep = np.abs(x) <= cutoff
        x, w = x[keep], w[keep]
        vals = f(base + x)
        vals = np.where(np.isfinite(vals), vals, 0.0)
        return h / scale * np.tensordot(vals, w, axes=([-1], [0])), x.size

    return _refine(rule, f, tol, h0, levels, atol)


def _wrap_last(rule):
    def wrapped(f, h):
        return rule(f, h)
    return wrapped


def integrate_line(f, shift, tol=1e-10, scale=1.0, center=0.0, cutoff=80.0, atol=0.0):
    """Integral of a vectorized ``f`` over the line Im t = shift.

    The integrand is evaluated on arrays of nodes with the node axis last;
    leading axes (for example a grid of outer variables) are carried
    through, so ``f`` may return shape ``(..., n)``.  ``atol`` is an
    absolute floor for the refinement test, for integrals that vanish.
    """
    val, err, n = de_line(f, shift, tol=tol, scale=scale, center=center, cutoff=cutoff,
                          atol=atol)
    if not np.all(np.isfinite(val)):
        raise QuadratureError("integrand is not decaying along the line")
    return QuadratureResult(val if np.ndim(val) else complex(val), err, n)


def _contour_pieces(spec, half_width):
    """Split a detoured line into (kind, data) pieces from left to right."""
    eps = spec.base_shift
    pieces = []
    left = -math.inf
    for d in spec.detours:
        c = complex(d.center)
        if not (abs(c.imag - eps) > d.radius or d.direction == "below" and c.imag < eps
                or d.direction == "above" and c.imag > eps):
            raise QuadratureError("detour does not straddle the base line")
        x0, x1 = c.real - d.radius, c.real + d.radius
        pieces.append(("line", (left, x0)))
        # vertical drop to the arc, the arc itself, the climb back
        if d.direction == "below":
            pieces.append(("seg", (complex(x0, eps), complex(x0, c.imag))))
            pieces.append(("arc", (c, d.radius, math.pi, 2 * math.pi)))
            pieces.append(("seg", (complex(x1, c.imag), complex(x1, eps))))
        else:
            pieces.append(("seg", (complex(x0, eps), complex(x0, c.imag))))
            pieces.append(("arc", (c, d.radius, math.pi, 0.0)))
            pieces.append(("seg", (complex(x1, c.imag), complex(x1, eps))))
        left = x1
    pieces.append(("line", (left, math.inf)))
    return pieces


def integrate_contour(f, spec, tol=1e-10, scale=1.0, cutoff=80.0):
    """Integrate over the line Im t = spec.base_shift with semicircular detours.

    Each detour leaves the line vertically at Re t = center - radius, follows
    a half circle around ``center`` and climbs back at center + radius.
    """
    eps = spec.base_shift
    total = 0
    err = 0.0
    used = 0
    for kind, data in _contour_pieces(spec, None):
        if kind == "line":
            a, b = data
            if math.isinf(a) and math.isinf(b):
                v, e, n = de_line(f, eps, tol=tol, scale=scale, cutoff=cutoff)
            elif math.isinf(a):
                v, e, n = de_halfline(f, complex(b, eps), -1.0, tol=tol, scale=scale, cutoff=cutoff)
                v = -v
            else:
                v, e, n = de_halfline(f, complex(a, eps), 1.0, tol=tol, scale=scale, cutoff=cutoff)
        elif kind == "seg":
            a, b = data
            if a == b:
                continue
            v, e, n = de_interval(f, a, b, tol=tol)
        else:
            c, rad, th0, th1 = data
            c = complex(c)

            def g(th, c=c, rad=rad):
                z = c + rad * np.exp(1j * th)
                return f(z) * (1j * rad * np.exp(1j * th))

            v, e, n = de_interval(g, th0, th1, tol=tol)
        total = total + v
        err += e
        used += n
    return QuadratureResult(total, err, used)


def residue(f, pole, radius, n=64):
    """Residue of ``f`` at ``pole`` from the trapezoid rule on a circle.

    Exponentially accurate when no other singularity lies within a few
    radii.  Convergence is checked by halving the node count.
    """
    def circ(m):
        th = 2 * np.pi * np.arange(m) / m
        z = np.exp(1j * th) * radius
        vals = f(pole + z)
        return np.tensordot(vals, z, axes=([-1], [0])) / m

    full = circ(n)
    half = circ(n // 2)
    return full, float(np.max(np.abs(full - half)))


def residue_split(f, pole, spec, tol=1e-10, scale=1.0, radius=None, n=64):
    """Integral over the contour realized as line + 2*pi*i*residue.

    ``spec.base_shift`` gives the straight line; each detour in ``spec`` is
    replaced by the residue at its center with the sign fixed by the side on
    which the detour passes.  ``pole`` lists the poles explicitly (or a single
    complex); they must coincide with detour centers.
    """
    line = integrate_line(f, spec.base_shift, tol=tol, scale=scale)
    poles = [pole] if np.isscalar(pole) else list(pole)
    total = line.value
    err = line.err_estimate
    for p in poles:
        p = complex(p)
        det = [d for d in spec.detours if abs(complex(d.center) - p) < 1e-14]
        direction = det[0].direction if det else ("below" if p.imag < spec.base_shift else "above")
        rad = radius if radius is not None else (det[0].radius if det else abs(spec.base_shift - p.imag) / 2)
        res, rerr = residue(f, p, rad, n=n)
        if rerr > max(tol, 1e-300) * max(1.0, float(np.max(np.abs(res)))) * 10:
            raise QuadratureError("residue extraction did not converge (pole not simple?)")
        # line above the pole, contour below: add a counterclockwise loop
        if p.imag < spec.base_shift and direction == "below":
            total = total + 2j * np.pi * res
        elif p.imag > spec.base_shift and direction == "above":
            total = total - 2j * np.pi * res
        err += rerr
    return QuadratureResult(total, err, line.nodes_used + 2 * n)

"""
The non-compact quantum dilogarithm G_b and its unitary companion g_b.

    log G_b(z) = log conj(zeta_b) - I(z - Q/2),
    I(x) = int_{R + i0} exp(x t) / (4 t sinh(b t/2) sinh(t/(2b))) dt,

valid for 0 < Re z < Q and continued to the plane with the shift equation
G_b(z + b) = (1 - exp(2 pi i b z)) G_b(z).

The line integral is deformed onto two rays leaving the imaginary axis at
+i*eps (or -i*eps when Im z < Q/2, in which case the triple pole at t = 0
is crossed and its residue added).  The rays are tilted towards the
direction of steepest decay, which keeps the integrand from oscillating
when |Im z| is large.

Two evaluators share this construction: an mpmath one at arbitrary
precision (``gb_eval``/``gb_log_eval``) and a vectorized numpy one in
double precision (``log_gb_np``) used by the quadrature-heavy suites.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import mpmath
import numpy as np

from .contour_quadrature import QuadratureError, expsinh_gmpy

__all__ = [
    "DEFAULT_B",
    "DEFAULT_PREC",
    "ModularParameter",
    "GbValue",
    "LatticePoint",
    "GbPoleError",
    "GbAccuracyError",
    "AsymptoticRegimeError",
    "mp_new",
    "gb_eval",
    "gb_log_eval",
    "smallg_eval",
    "lattice_classify",
    "gb_asymptotic",
    "inversion_constant",
    "log_gb_np",
    "gb_np",
    "smallg_np",
]

DEFAULT_B = 0.75
DEFAULT_PREC = 192

_GUARD = 24
_MAX_ANGLE = 0.9
_LOCK = threading.RLock()
_CACHE: dict = {}
_CACHE_LIMIT = 200_000


class GbPoleError(ZeroDivisionError):
    """Argument sits on (or too close to) a pole or zero of G_b."""

    def __init__(self, point, z):
        self.point = point
        self.z = z
        super().__init__(f"G_b {point.kind} at z={z} (n1={point.n1}, n2={point.n2})")


class GbAccuracyError(ArithmeticError):
    pass


class AsymptoticRegimeError(ValueError):
    pass


@dataclass(frozen=True)
class ModularParameter:
    """Holds b; the derived constants are recomputed at the current precision."""

    b: mpmath.mpf

    @property
    def binv(self):
        return 1 / self.b

    @property
    def Q(self):
        return self.b + 1 / self.b

    @property
    def q(self):
        return mpmath.expjpi(self.b ** 2)

    @property
    def c(self):
        """b^2 + b^-2."""
        return self.b ** 2 + self.b ** -2

    @property
    def zeta_b(self):
        return mpmath.expjpi(mpmath.mpf(1) / 4 + self.c / 12)

    @property
    def log_zeta_bar(self):
        return -1j * mpmath.pi * (mpmath.mpf(1) / 4 + self.c / 12)

    def dual(self):
        return ModularParameter(1 / self.b)

    def __float__(self):
        return float(self.b)


def mp_new(b) -> ModularParameter:
    with mpmath.workprec(max(mpmath.mp.prec, 320)):
        bb = mpmath.mpf(b)
    if not bb > 0:
        raise ValueError(f"b must be positive, got {b!r}")
    return ModularParameter(bb)


@dataclass(frozen=True)
class GbValue:
    value: complex
    log_value: complex
    precision_bits: int
    err_bound: float


@dataclass(frozen=True)
class LatticePoint:
    kind: str
    n1: int = 0
    n2: int = 0


# ---------------------------------------------------------------------------
# lattice geometry
# ---------------------------------------------------------------------------

def _nearest_lattice(b, w, tol):
    """Nearest n1*b + n2/b (n1, n2 >= 0) to complex w, if within tol."""
    if abs(w.imag) > tol or w.real < -tol:
        return None
    binv = 1.0 / b
    best = None
    for n1 in range(int(w.real / b) + 2):
        rest = w.real - n1 * b
        n2 = round(rest / binv)
        if n2 < 0:
            continue
        d = abs(complex(w.real - n1 * b - n2 * binv, w.imag))
        if d <= tol and (best is None or d < best[0]):
            best = (d, n1, n2)
    return best


def lattice_classify(mp: ModularParameter, z, tol=1e-12) -> LatticePoint:
    if not tol > 0:
        raise ValueError("tol must be positive")
    b = float(mp.b)
    z = complex(z)
    Q = b + 1 / b
    hit = _nearest_lattice(b, -z, tol)
    if hit is not None:
        return LatticePoint("pole", hit[1], hit[2])
    hit = _nearest_lattice(b, z - Q, tol)
    if hit is not None:
        return LatticePoint("zero", hit[1], hit[2])
    return LatticePoint("regular")


# ---------------------------------------------------------------------------
# ray geometry, shared by both back ends
# ---------------------------------------------------------------------------

def _rays(b, xr, xi):
    """Start offset, directions and decay rates of the two rays (floats)."""
    Q = b + 1 / b
    eps = math.pi * min(b, 1 / b)
    upper = xi >= 0
    start = eps if upper else -eps
    phr = min(max(math.atan2(xi, Q / 2 - xr), -_MAX_ANGLE), _MAX_ANGLE)
    psi = min(max(math.atan2(xi, Q / 2 + xr), -_MAX_ANGLE), _MAX_ANGLE)
    kr = (Q / 2 - xr) * math.cos(phr) + xi * math.sin(phr)
    kl = (Q / 2 + xr) * math.cos(psi) + xi * math.sin(psi)
    return upper, start, phr, math.pi - psi, kr, kl


# ---------------------------------------------------------------------------
# mpmath evaluator
# ---------------------------------------------------------------------------

def _to_mpfr(v):
    sign, man, exp, _ = mpmath.mpf(v)._mpf_
    m = gmpy2.mul_2exp(gmpy2.mpfr(man, max(int(man).bit_length(), 2)), exp)
    return -m if sign else m


def _from_mpfr(v):
    man, exp = v.as_mantissa_exp()
    return mpmath.mpf((int(man), int(exp)))


def _strip_integral_mp(mp, x, prec):
    """I(x) for x = z - Q/2 with |Re x| < Q/2, at working precision.

    The ray integrands run in gmpy2 for speed; the result is an mpc.
    """
    b = mp.b
    upper, start, phr, phl, kr, kl = _rays(float(b), float(x.real), float(x.imag))
    tol_bits = prec // 2 + 12
    wp = mpmath.mp.prec
    with gmpy2.context(gmpy2.get_context(), precision=wp):
        gb_ = _to_mpfr(b)
        binv = 1 / gb_
        halfQ = (gb_ + binv) / 2
        pi = gmpy2.const_pi()
        gx = gmpy2.mpc(_to_mpfr(x.real), _to_mpfr(x.imag))
        t0 = gmpy2.mpc(0, pi * min(gb_, binv) * (1 if upper else -1))
        er = gmpy2.mpc(gmpy2.cos(gmpy2.mpfr(phr)), gmpy2.sin(gmpy2.mpfr(phr)))
        el = gmpy2.mpc(gmpy2.cos(gmpy2.mpfr(phl)), gmpy2.sin(gmpy2.mpfr(phl)))
        ar, al = gx - halfQ, gx + halfQ
        exp = gmpy2.exp

        def right(r):
            # Re t > 0: 4 sinh sinh = e^{Qt/2}(1-e^{-bt})(1-e^{-t/b})
            t = t0 + r * er
            return exp(ar * t) / (t * (1 - exp(-gb_ * t)) * (1 - exp(-binv * t)))

        def left(r):
            t = t0 + r * el
            return exp(al * t) / (t * (1 - exp(gb_ * t)) * (1 - exp(binv * t)))

        tol = gmpy2.mpfr(2) ** (-tol_bits)
        try:
            R = expsinh_gmpy(right, tol, wp, scale=kr, range_bits=tol_bits + 16)
            L = expsinh_gmpy(left, tol, wp, scale=kl, range_bits=tol_bits + 16)
        except QuadratureError as exc:
            raise GbAccuracyError(str(exc)) from exc
        val = R.value * er - L.value * el
    val = mpmath.mpc(_from_mpfr(val.real), _from_mpfr(val.imag))
    if not upper:
        # the contour was pushed below the triple pole at t = 0
        val -= 2j * mpmath.pi * (x * x / 2 - mp.c / 24)
    return val, R.err_estimate + L.err_estimate


def _log1m_exp(w):
    return mpmath.log(1 - mpmath.exp(w))


def _key(mp, z, prec):
    digits = int(prec * 0.30103) + 2
    zr = mpmath.nstr(mpmath.mpf(z.real), digits)
    zi = mpmath.nstr(mpmath.mpf(z.imag), digits)
    return (mpmath.nstr(mp.b, 40), zr, zi, prec)


def _gb_log_value(mp, z, prec):
    z = mpmath.mpc(z)
    lp = lattice_classify(mp, complex(z), tol=1e-6 * float(mp.Q))
    if lp.kind != "regular":
        raise GbPoleError(lp, complex(z))
    key = _key(mp, z, prec)
    with _LOCK:
        hit = _CACHE.get(key)
        if hit is not None:
            return hit
        with mpmath.workprec(prec + _GUARD):
            b = mp.b
            Q = mp.Q
            delta = min(b, 1 / b) / 4
            acc = mpmath.mpc(0)
            w = z
            steps = 0
            two_pi_ib = 2j * mpmath.pi * b
            while w.real < delta:
                acc -= _log1m_exp(two_pi_ib * w)
                w += b
                steps += 1
            while w.real > Q - delta:
                w -= b
                acc += _log1m_exp(two_pi_ib * w)
                steps += 1
            integral, err = _strip_integral_mp(mp, w - Q / 2, prec)
            logv = mp.log_zeta_bar - integral + acc
            err = float(err) + (steps + 1) * 2.0 ** (-prec)
            if err > 2.0 ** (-prec / 2):
                raise GbAccuracyError(f"error bound {err:.3g} too large at z={complex(z)}")
            res = GbValue(mpmath.exp(logv), logv, prec, err)
        if len(_CACHE) > _CACHE_LIMIT:
            _CACHE.clear()
        _CACHE[key] = res
    return res


def gb_eval(mp: ModularParameter, z, prec: int = DEFAULT_PREC) -> GbValue:
    """G_b(z) with value, branch-tracked log and an error bound."""
    return _gb_log_value(mp, z, prec)


def gb_log_eval(mp: ModularParameter, z, prec: int = DEFAULT_PREC):
    """log G_b(z): the strip value continued by principal logs of the shift factors."""
    return _gb_log_value(mp, z, prec).log_value


def smallg_eval(mp: ModularParameter, x, prec: int = DEFAULT_PREC, log_x=None):
    """g_b(x) = conj(zeta_b) / G_b(Q/2 + log x / (2 pi i b))."""
    with mpmath.workprec(prec + _GUARD):
        if log_x is None:
            x = mpmath.mpc(x)
            if x == 0:
                raise ValueError("g_b is undefined at x = 0")
            log_x = mpmath.log(x)
        else:
            log_x = mpmath.mpc(log_x)
        z = mp.Q / 2 + log_x / (2j * mpmath.pi * mp.b)
        lg = gb_log_eval(mp, z, prec)
        return mpmath.exp(mp.log_zeta_bar - lg)


def gb_asymptotic(mp: ModularParameter, z, threshold: float = 10.0):
    """Leading behaviour for |Im z| large: conj(zeta_b) above, zeta_b e^{pi i z(z-Q)} below."""
    z = mpmath.mpc(z)
    if abs(z.imag) < threshold:
        raise AsymptoticRegimeError(f"|Im z| = {float(abs(z.imag))} is below the threshold {threshold}")
    if z.imag > 0:
        return mpmath.conj(mp.zeta_b)
    return mp.zeta_b * mpmath.exp(1j * mpmath.pi * z * (z - mp.Q))


def inversion_constant(mp: ModularParameter, x, prec: int = DEFAULT_PREC):
    """g_b(x) g_b(1/x) exp(-pi i log^2 x / (4 pi^2 b^2)) for x > 0."""
    with mpmath.workprec(prec + _GUARD):
        lx = mpmath.log(mpmath.mpf(x))
        prod = smallg_eval(mp, None, prec, log_x=lx) * smallg_eval(mp, None, prec, log_x=-lx)
        return prod * mpmath.exp(-1j * mpmath.pi * lx ** 2 / (4 * mpmath.pi ** 2 * mp.b ** 2))


# ---------------------------------------------------------------------------
# numpy evaluator (double precision, vectorized, log defined mod 2 pi i)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _np_nodes(h):
    t = np.arange(-4.0, 2.0 + h / 2, h)
    r = np.exp(0.5 * np.pi * np.sinh(t))
    w = h * 0.5 * np.pi * np.cosh(t) * r
    return r, w


def _np_log1m_exp(w):
    """log(1 - e^w) mod 2 pi i, stable for large |Re w|."""
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(w)
    pos = w.real > 0
    out[~pos] = np.log(-np.expm1(w[~pos]))
    out[pos] = w[pos] + np.log(np.expm1(-w[pos]))
    return out


def _np_strip_integral(b, x, h):
    Q = b + 1 / b
    eps = np.pi * min(b, 1 / b)
    xr, xi = x.real, x.imag
    upper = xi >= 0
    t0 = np.where(upper, 1j * eps, -1j * eps)
    phr = np.clip(np.arctan2(xi, Q / 2 - xr), -_MAX_ANGLE, _MAX_ANGLE)
    psi = np.clip(np.arctan2(xi, Q / 2 + xr), -_MAX_ANGLE, _MAX_ANGLE)
    kr = (Q / 2 - xr) * np.cos(phr) + xi * np.sin(phr)
    kl = (Q / 2 + xr) * np.cos(psi) + xi * np.sin(psi)
    er = np.exp(1j * phr)
    el = np.exp(1j * (np.pi - psi))
    r, w = _np_nodes(h)

    t = t0[:, None] + (r[None, :] / kr[:, None]) * er[:, None]
    fr = np.exp((x[:, None] - Q / 2) * t) / (t * -np.expm1(-b * t) * -np.expm1(-t / b))
    R = (fr @ w) * er / kr

    t = t0[:, None] + (r[None, :] / kl[:, None]) * el[:, None]
    fl = np.exp((x[:, None] + Q / 2) * t) / (t * -np.expm1(b * t) * -np.expm1(t / b))
    L = (fl @ w) * el / kl

    val = R - L
    c = b * b + 1 / (b * b)
    val = np.where(upper, val, val - 2j * np.pi * (x * x / 2 - c / 24))
    return val


def log_gb_np(b: float, z, h: float = 0.0625, chunk: int = 2048):
    """Vectorized log G_b(z) in double precision (branch not tracked).

    Points on or next to the pole/zero lattice give inf/nan rather than
    raising; callers working on contours keep away from them by design.
    """
    b = float(b)
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    Q = b + 1 / b
    delta = min(b, 1 / b) / 4
    k = np.zeros(z.shape, dtype=int)
    lo = z.real < delta
    k[lo] = np.ceil((delta - z.real[lo]) / b).astype(int)
    hi = z.real > Q - delta
    k[hi] = -np.ceil((z.real[hi] - (Q - delta)) / b).astype(int)
    acc = np.zeros(z.shape, dtype=complex)
    for j in range(int(np.max(np.abs(k), initial=0))):
        m = k > j
        if m.any():
            acc[m] -= _np_log1m_exp(2j * np.pi * b * (z[m] + j * b))
        m = -k > j
        if m.any():
            acc[m] += _np_log1m_exp(2j * np.pi * b * (z[m] - (j + 1) * b))
    w = z + k * b
    out = np.empty(z.shape, dtype=complex)
    lzb = -1j * np.pi * (0.25 + (b * b + 1 / (b * b)) / 12)
    with np.errstate(all="ignore"):
        for i in range(0, z.size, chunk):
            sl = slice(i, i + chunk)
            out[sl] = lzb - _np_strip_integral(b, w[sl] - Q / 2, h) + acc[sl]
    return out.reshape(shape)


def gb_np(b, z, h=0.0625):
    return np.exp(log_gb_np(b, z, h))


def smallg_np(b, log_x, h=0.0625):
    """g_b as a function of log x (vectorized)."""
    b = float(b)
    Q = b + 1 / b
    lzb = -1j * np.pi * (0.25 + (b * b + 1 / (b * b)) / 12)
    z = Q / 2 + np.asarray(log_x, dtype=complex) / (2j * np.pi * b)
    return np.exp(lzb - log_gb_np(b, z, h))

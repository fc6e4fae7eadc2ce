"""Second-order forward-mode differentiation, adaptive quadrature and the
velocity integrals used by the Lagrangian families.

A :class:`HyperDual` carries a value together with the first and second
partial derivatives with respect to two seeded variables ``u`` and ``w``.
Every elementary operation applies the exact chain rule, so the carried
partials have no truncation error.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np

from .errors import (
    NonPositiveLambda,
    QuadratureError,
    SpeedLimitExceeded,
    UnsupportedOperation,
)

Number = Union[float, int]

#: |v| may not exceed this fraction of c (gamma overflows beyond it)
LIGHT_SPEED_GUARD = 1.0 - 1e-12

_SQRT2 = math.sqrt(2.0)
_SQRT_HALF_PI = math.sqrt(0.5 * math.pi)


class HyperDual:
    """Truncated second-order Taylor jet in two variables.

    Components: ``re`` (value), ``e1``/``e2`` (first partials with respect to
    the two seeded variables), ``e12`` (mixed partial), ``e11``/``e22``
    (pure second partials).
    """

    __slots__ = ("re", "e1", "e2", "e12", "e11", "e22")

    def __init__(self, re, e1=0.0, e2=0.0, e12=0.0, e11=0.0, e22=0.0):
        self.re = float(re)
        self.e1 = e1
        self.e2 = e2
        self.e12 = e12
        self.e11 = e11
        self.e22 = e22

    @classmethod
    def first(cls, value: float) -> "HyperDual":
        """Seed ``value`` as the first independent variable."""
        return cls(value, 1.0, 0.0, 0.0, 0.0, 0.0)

    @classmethod
    def second(cls, value: float) -> "HyperDual":
        """Seed ``value`` as the second independent variable."""
        return cls(value, 0.0, 1.0, 0.0, 0.0, 0.0)

    def chain(self, f0: float, f1: float, f2: float) -> "HyperDual":
        """Compose with a scalar function whose value and first two
        derivatives at ``self.re`` are ``f0, f1, f2``."""
        e1, e2 = self.e1, self.e2
        return HyperDual(
            f0,
            f1 * e1,
            f1 * e2,
            f2 * e1 * e2 + f1 * self.e12,
            f2 * e1 * e1 + f1 * self.e11,
            f2 * e2 * e2 + f1 * self.e22,
        )

    def __repr__(self):
        return (
            f"HyperDual(re={self.re!r}, e1={self.e1!r}, e2={self.e2!r}, "
            f"e12={self.e12!r}, e11={self.e11!r}, e22={self.e22!r})"
        )

    # arithmetic -----------------------------------------------------------

    def __neg__(self):
        return HyperDual(-self.re, -self.e1, -self.e2, -self.e12, -self.e11, -self.e22)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(
                self.re + other.re,
                self.e1 + other.e1,
                self.e2 + other.e2,
                self.e12 + other.e12,
                self.e11 + other.e11,
                self.e22 + other.e22,
            )
        if isinstance(other, (int, float)):
            return HyperDual(self.re + other, self.e1, self.e2, self.e12, self.e11, self.e22)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(
                self.re - other.re,
                self.e1 - other.e1,
                self.e2 - other.e2,
                self.e12 - other.e12,
                self.e11 - other.e11,
                self.e22 - other.e22,
            )
        if isinstance(other, (int, float)):
            return HyperDual(self.re - other, self.e1, self.e2, self.e12, self.e11, self.e22)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, float)):
            return HyperDual(other - self.re, -self.e1, -self.e2, -self.e12, -self.e11, -self.e22)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, HyperDual):
            a0, a1, a2 = self.re, self.e1, self.e2
            b0, b1, b2 = other.re, other.e1, other.e2
            return HyperDual(
                a0 * b0,
                a0 * b1 + a1 * b0,
                a0 * b2 + a2 * b0,
                a0 * other.e12 + a1 * b2 + a2 * b1 + self.e12 * b0,
                a0 * other.e11 + 2.0 * a1 * b1 + self.e11 * b0,
                a0 * other.e22 + 2.0 * a2 * b2 + self.e22 * b0,
            )
        if isinstance(other, (int, float)):
            return HyperDual(
                self.re * other,
                self.e1 * other,
                self.e2 * other,
                self.e12 * other,
                self.e11 * other,
                self.e22 * other,
            )
        return NotImplemented

    __rmul__ = __mul__

    def reciprocal(self) -> "HyperDual":
        x = self.re
        if x == 0.0:
            raise UnsupportedOperation("division by zero in HyperDual arithmetic")
        inv = 1.0 / x
        return self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if isinstance(other, HyperDual):
            return self * other.reciprocal()
        if isinstance(other, (int, float)):
            if other == 0:
                raise UnsupportedOperation("division by zero in HyperDual arithmetic")
            return self * (1.0 / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, float)):
            return self.reciprocal() * other
        return NotImplemented

    def __pow__(self, exponent):
        if isinstance(exponent, HyperDual):
            return exp(exponent * log(self))
        if not isinstance(exponent, (int, float)):
            return NotImplemented
        x = self.re
        n = exponent
        if float(n).is_integer():
            n = int(n)
            if n == 0:
                return HyperDual(1.0)
            if n == 1:
                return self
            if n > 0:
                if n == 2:
                    f2 = 2.0
                else:
                    f2 = n * (n - 1) * x ** (n - 2)
                return self.chain(x**n, n * x ** (n - 1), f2)
            return (self ** (-n)).reciprocal()
        if x <= 0.0:
            raise UnsupportedOperation(f"non-integer power {n} of non-positive value {x}")
        return self.chain(x**n, n * x ** (n - 1), n * (n - 1) * x ** (n - 2))

    def __rpow__(self, base):
        if isinstance(base, (int, float)):
            if base <= 0:
                raise UnsupportedOperation("power with non-positive base and HyperDual exponent")
            return exp(self * math.log(base))
        return NotImplemented


Scalar = Union[float, HyperDual]


def real(x: Scalar) -> float:
    """Value part of a float or HyperDual."""
    return x.re if isinstance(x, HyperDual) else float(x)


# elementary functions accepting float or HyperDual ------------------------


def exp(x: Scalar) -> Scalar:
    if isinstance(x, HyperDual):
        e = math.exp(x.re)
        return x.chain(e, e, e)
    return math.exp(x)


def expm1(x: Scalar) -> Scalar:
    if isinstance(x, HyperDual):
        e = math.exp(x.re)
        return x.chain(math.expm1(x.re), e, e)
    return math.expm1(x)


def log(x: Scalar) -> Scalar:
    if isinstance(x, HyperDual):
        if x.re <= 0.0:
            raise UnsupportedOperation(f"log of non-positive value {x.re}")
        inv = 1.0 / x.re
        return x.chain(math.log(x.re), inv, -inv * inv)
    return math.log(x)


def sqrt(x: Scalar) -> Scalar:
    if isinstance(x, HyperDual):
        if x.re <= 0.0:
            if x.re == 0.0 and x.e1 == 0.0 and x.e2 == 0.0 and x.e11 == 0.0 and x.e22 == 0.0 and x.e12 == 0.0:
                return HyperDual(0.0)
            raise UnsupportedOperation(f"sqrt is not differentiable at {x.re}")
        s = math.sqrt(x.re)
        return x.chain(s, 0.5 / s, -0.25 / (s * x.re))
    return math.sqrt(x)


def sin(x: Scalar) -> Scalar:
    if isinstance(x, HyperDual):
        s, c = math.sin(x.re), math.cos(x.re)
        return x.chain(s, c, -s)
    return math.sin(x)


def cos(x: Scalar) -> Scalar:
    if isinstance(x, HyperDual):
        s, c = math.sin(x.re), math.cos(x.re)
        return x.chain(c, -s, -c)
    return math.cos(x)


def erf(x: Scalar) -> Scalar:
    if isinstance(x, HyperDual):
        g = 2.0 / math.sqrt(math.pi) * math.exp(-x.re * x.re)
        return x.chain(math.erf(x.re), g, -2.0 * x.re * g)
    return math.erf(x)


class Partials(NamedTuple):
    value: float
    d_x: float
    d_v: float
    d_vv: float
    d_xv: float


def eval_with_second_derivs(f: Callable[[Scalar, Scalar], Scalar], x: float, v: float) -> Partials:
    """Evaluate ``f(x, v)`` and the partials needed by the Euler-Lagrange
    identity: f, f_x, f_v, f_vv, f_xv."""
    out = f(HyperDual.first(x), HyperDual.second(v))
    if isinstance(out, HyperDual):
        return Partials(out.re, float(out.e1), float(out.e2), float(out.e22), float(out.e12))
    if isinstance(out, (int, float)):
        return Partials(float(out), 0.0, 0.0, 0.0, 0.0)
    raise UnsupportedOperation(f"function returned unsupported type {type(out).__name__}")


# quadrature ---------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_subdivisions: int = 60

    def __post_init__(self):
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _gl15(f, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * (np.asarray(f(mid + half * _GL_NODES)) @ _GL_WEIGHTS)


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              spec: QuadratureSpec = DEFAULT_QUADRATURE):
    """Adaptive 15-point Gauss-Legendre quadrature of ``f`` over [a, b].

    ``f`` must be vectorised: it receives an array of 15 nodes and returns
    either 15 values or an ``(m, 15)`` array for m integrands at once, in
    which case an array of m integrals is returned.  Panels are bisected,
    worst error estimate first, until the summed estimate meets the
    tolerance for every component.
    """
    if a == b:
        zero = _gl15(f, a, b)
        return 0.0 if np.ndim(zero) == 0 else np.asarray(zero)

    def split(lo, hi, coarse):
        mid = 0.5 * (lo + hi)
        left, right = _gl15(f, lo, mid), _gl15(f, mid, hi)
        fine = left + right
        return fine, np.abs(fine - coarse), ((lo, mid, left), (mid, hi, right))

    fine, err, children = split(a, b, _gl15(f, a, b))
    heap = [(-float(np.max(err)), 0, fine, err, children)]
    total, total_err = fine, err
    counter, subdivisions = 1, 1
    while True:
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.all(total_err <= tol):
            return float(total) if np.ndim(total) == 0 else np.asarray(total)
        if subdivisions >= spec.max_subdivisions:
            raise QuadratureError(
                f"no convergence on [{a}, {b}] after {subdivisions} subdivisions "
                f"(error estimate {np.max(total_err):.3e})"
            )
        _, _, p_fine, p_err, p_children = heapq.heappop(heap)
        total = total - p_fine
        total_err = total_err - p_err
        for lo, hi, coarse in p_children:
            c_fine, c_err, c_children = split(lo, hi, coarse)
            total = total + c_fine
            total_err = total_err + c_err
            heapq.heappush(heap, (-float(np.max(c_err)), counter, c_fine, c_err, c_children))
            counter += 1
        subdivisions += 1


# velocity integrals --------------------------------------------------------


def check_lambda(lam: float) -> None:
    if not lam > 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")


def check_speed(v: Scalar, c: float) -> float:
    """Return ``v/c`` after enforcing the light-speed guard."""
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    beta = real(v) / c
    if not abs(beta) <= LIGHT_SPEED_GUARD:
        raise SpeedLimitExceeded(f"|v| = {abs(real(v))} is not below c = {c}")
    return beta


def gamma(v: Scalar, c: float) -> Scalar:
    """Lorentz factor 1/sqrt(1 - v^2/c^2)."""
    check_speed(v, c)
    return 1.0 / sqrt(1.0 - (v * v) / (c * c))


def gauss_velocity_integral(v: Scalar, lam: float) -> Scalar:
    """Integral of exp(-u^2 / 2 lam^2) for u from 0 to v, via erf."""
    check_lambda(lam)
    u = real(v)
    value = lam * _SQRT_HALF_PI * math.erf(u / (_SQRT2 * lam))
    if isinstance(v, HyperDual):
        g = math.exp(-u * u / (2.0 * lam * lam))
        return v.chain(value, g, -u / (lam * lam) * g)
    return value


def rel_velocity_integral(v: Scalar, c: float, lam: float, *, rest_scaled: bool = False,
                          spec: QuadratureSpec = DEFAULT_QUADRATURE) -> Scalar:
    """Integral of gamma_u^3 exp(-gamma_u c^2 / lam^2) for u from 0 to v.

    Computed with the substitution w = gamma_u u (dw = gamma_u^3 du).  With
    ``rest_scaled`` the result is multiplied by exp(c^2 / lam^2), which keeps
    it representable when c >> lam.
    """
    check_lambda(lam)
    check_speed(v, c)
    u = real(v)
    g_u = 1.0 / math.sqrt(1.0 - (u / c) ** 2)
    inv_lam2 = 1.0 / (lam * lam)

    def integrand(w):
        # (c^2/lam^2)(sqrt(1 + w^2/c^2) - 1) without cancellation
        return np.exp(-(w * w * inv_lam2) / (np.sqrt(1.0 + (w / c) ** 2) + 1.0))

    value = integrate(integrand, 0.0, g_u * u, spec)
    rest = 1.0 if rest_scaled else math.exp(-c * c * inv_lam2)
    value *= rest
    if isinstance(v, HyperDual):
        excess = g_u * g_u * (u / c) ** 2 / (g_u + 1.0)  # gamma - 1
        damp = rest * math.exp(-excess * c * c * inv_lam2)
        g = g_u**3 * damp
        dgamma = u * g_u**3 / (c * c)
        g1 = dgamma * (3.0 * g_u**2 - g_u**3 * c * c * inv_lam2) * damp
        return v.chain(value, g, g1)
    return value


def _gamma_power_lift(v: HyperDual, value: float, u: float, c: float, k: int) -> HyperDual:
    g_u = 1.0 / math.sqrt(1.0 - (u / c) ** 2)
    return v.chain(value, g_u**k, k * g_u ** (k + 2) * u / (c * c))


def gamma_power_integral(v: Scalar, c: float, k: int,
                         spec: QuadratureSpec = DEFAULT_QUADRATURE) -> Scalar:
    """Integral of gamma_u^k for u from 0 to v.

    Integrated in rapidity s = artanh(u/c), where the integrand becomes
    c cosh(s)^(k-2) and stays smooth up to the light-speed guard.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    beta = check_speed(v, c)
    value = integrate(lambda s: c * np.cosh(s) ** (k - 2), 0.0, math.atanh(beta), spec)
    if isinstance(v, HyperDual):
        return _gamma_power_lift(v, value, v.re, c, k)
    return value


def gamma_power_integrals(v: Scalar, c: float, ks: Sequence[int],
                          spec: QuadratureSpec = DEFAULT_QUADRATURE) -> list:
    """Several :func:`gamma_power_integral` values sharing one adaptive pass."""
    ks = [int(k) for k in ks]
    if not ks:
        return []
    if min(ks) < 1:
        raise ValueError("every k must be >= 1")
    beta = check_speed(v, c)
    powers = np.asarray(ks, dtype=float)[:, None] - 2.0
    values = integrate(lambda s: c * np.cosh(s)[None, :] ** powers, 0.0, math.atanh(beta), spec)
    values = np.atleast_1d(values)
    if isinstance(v, HyperDual):
        return [_gamma_power_lift(v, float(val), v.re, c, k) for val, k in zip(values, ks)]
    return [float(val) for val in values]

"""Closed-form Lagrangians: additive, multiplicative and hierarchy families,
non-relativistic and relativistic.

All functions take ``(params, pot, x, v)`` and accept HyperDual arguments,
so the Euler-Lagrange partials come out exact.  The multiplicative families
use the normalisation A = 1/lam^2, k1 = 0, k2 = -m lam^2, which makes
``L - m lam^2`` tend to the additive Lagrangian as lam grows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import NonPositiveLambda
from .numerics import (
    Scalar,
    check_lambda,
    check_speed,
    exp,
    expm1,
    gamma,
    gamma_power_integral,
    gamma_power_integrals,
    gauss_velocity_integral,
    rel_velocity_integral,
    sqrt,
)
from .potentials import Potential


class Family(str, Enum):
    ADDITIVE_NR = "add-nr"
    MULTIPLICATIVE_NR = "mult-nr"
    HIERARCHY_NR = "hier-nr"
    ADDITIVE_REL = "add-rel"
    MULTIPLICATIVE_REL = "mult-rel"
    HIERARCHY_REL = "hier-rel"

    @property
    def relativistic(self) -> bool:
        return self.value.endswith("-rel")

    @property
    def hierarchical(self) -> bool:
        return self.value.startswith("hier")

    @property
    def multiplicative(self) -> bool:
        return self.value.startswith("mult")

    @property
    def additive(self) -> bool:
        return self.value.startswith("add")


@dataclass(frozen=True)
class ModelParams:
    """Mass, deformation velocity lam and speed of light c."""

    m: float = 1.0
    lam: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if not self.lam > 0:
            raise NonPositiveLambda(f"lambda must be positive, got {self.lam}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")

    @property
    def energy_scale(self) -> float:
        """m lam^2, the energy unit of the multiplicative forms."""
        return self.m * self.lam * self.lam


def _check_order(j: int) -> int:
    if int(j) != j or j < 1:
        raise ValueError(f"hierarchy order must be an integer >= 1, got {j}")
    return int(j)


# non-relativistic --------------------------------------------------------


def L_additive_nr(params: ModelParams, pot: Potential, x: Scalar, v: Scalar) -> Scalar:
    return 0.5 * params.m * (v * v) - pot.V(x)


def L_mult_nr(params: ModelParams, pot: Potential, x: Scalar, v: Scalar, *,
              excess: bool = False) -> Scalar:
    """Multiplicative Lagrangian ``m lam^2 F(v) exp(-V/m lam^2)``.

    With ``excess=True`` returns ``L - m lam^2`` without cancellation.
    """
    lam = params.lam
    check_lambda(lam)
    lam2 = lam * lam
    scale = params.m * lam2
    a = (v * v) / (2.0 * lam2)
    drift = v * gauss_velocity_integral(v, lam) / lam2
    u = pot.V(x) / scale
    if excess:
        return scale * ((expm1(-a) + drift) * exp(-u) + expm1(-u))
    return scale * (exp(-a) + drift) * exp(-u)


def momentum_mult_nr(params: ModelParams, pot: Potential, x: Scalar, v: Scalar) -> Scalar:
    """Canonical momentum dL/dv of the multiplicative Lagrangian."""
    check_lambda(params.lam)
    return params.m * gauss_velocity_integral(v, params.lam) * exp(-pot.V(x) / params.energy_scale)


def hier_coefficient(j: int, k: int) -> float:
    """Coefficient of T^(j-k) V^k in the j-th hierarchy Lagrangian."""
    odd = 2 * j - 2 * k - 1
    assert odd % 2 != 0, "the denominator is always odd, hence nonzero"
    return math.factorial(j) / (math.factorial(j - k) * math.factorial(k) * odd)


def L_hier_nr(params: ModelParams, pot: Potential, j: int, x: Scalar, v: Scalar) -> Scalar:
    j = _check_order(j)
    T = 0.5 * params.m * (v * v)
    V = pot.V(x)
    total = 0.0
    for k in range(j + 1):
        total = total + hier_coefficient(j, k) * (T ** (j - k)) * (V**k)
    return total


# relativistic ------------------------------------------------------------


def L_additive_rel(params: ModelParams, pot: Potential, x: Scalar, v: Scalar) -> Scalar:
    c = params.c
    check_speed(v, c)
    return -params.m * c * c * sqrt(1.0 - (v * v) / (c * c)) - pot.V(x)


def _gamma_minus_one(v: Scalar, c: float) -> Scalar:
    g = gamma(v, c)
    return g * g * (v * v) / (c * c) / (g + 1.0)


def L_mult_rel(params: ModelParams, pot: Potential, x: Scalar, v: Scalar, *,
               excess: bool = False, rest_scaled: bool = False) -> Scalar:
    """Multiplicative relativistic Lagrangian.

    ``excess=True`` returns ``L - m lam^2``; ``rest_scaled=True`` returns
    ``L * exp(c^2/lam^2)``, which stays finite when c >> lam.
    """
    if excess and rest_scaled:
        raise ValueError("excess and rest_scaled are mutually exclusive")
    lam, c = params.lam, params.c
    check_lambda(lam)
    check_speed(v, c)
    lam2 = lam * lam
    scale = params.m * lam2
    ratio = c * c / lam2
    drift = v * rel_velocity_integral(v, c, lam, rest_scaled=rest_scaled) / lam2
    u = pot.V(x) / scale
    if rest_scaled:
        return scale * (exp(-_gamma_minus_one(v, c) * ratio) + drift) * exp(-u)
    g = gamma(v, c)
    if excess:
        return scale * ((expm1(-g * ratio) + drift) * exp(-u) + expm1(-u))
    return scale * (exp(-g * ratio) + drift) * exp(-u)


def P_j(v: Scalar, c: float, j: int) -> Scalar:
    """gamma^j - (j v / c^2) * integral of gamma_u^(j+2) from 0 to v, with P_0 = 1."""
    if j == 0:
        check_speed(v, c)
        return 1.0
    j = _check_order(j)
    return gamma(v, c) ** j - (j / (c * c)) * v * gamma_power_integral(v, c, j + 2)


def P_functions(v: Scalar, c: float, jmax: int) -> list:
    """[P_0, ..., P_jmax] with a single shared quadrature pass."""
    check_speed(v, c)
    if jmax < 1:
        return [1.0]
    integrals = gamma_power_integrals(v, c, range(3, jmax + 3))
    g = gamma(v, c)
    out = [1.0]
    for j, integral in zip(range(1, jmax + 1), integrals):
        out.append(g**j - (j / (c * c)) * v * integral)
    return out


def P_printed(v: float, c: float, j: int) -> float:
    """Closed forms of P_1..P_4 as printed alongside their definition.

    P_1 and P_3 agree with the defining integral.  The P_2 and P_4 forms do
    not (their logarithm is also undefined for v <= 0); they are kept only so
    the discrepancy can be measured.
    """
    check_speed(v, c)
    b = v / c
    g = 1.0 / math.sqrt(1.0 - b * b)
    if j == 1:
        return 1.0 / g
    if j == 2:
        return 1.0 - b * math.log(b * g * g)
    if j == 3:
        return g * (1.0 - 2.0 * b * b)
    if j == 4:
        return g * g * (1.0 - 1.5 * b * b) - 1.5 * b * math.log(b * g * g)
    raise ValueError("printed closed forms exist only for j = 1..4")


def P2_antiderivative(v: float, c: float) -> float:
    """P_2 from the elementary antiderivative of gamma^4: 1 - (v/c) artanh(v/c)."""
    b = check_speed(v, c)
    return 1.0 - b * math.atanh(b)


def L_hier_rel(params: ModelParams, pot: Potential, j: int, x: Scalar, v: Scalar) -> Scalar:
    j = _check_order(j)
    rest = params.m * params.c * params.c
    Ps = P_functions(v, params.c, j)
    V = pot.V(x)
    total = 0.0
    for k in range(j + 1):
        total = total + math.comb(j, k) * rest ** (j - k) * Ps[j - k] * (V**k)
    return -total


# model wrapper -------------------------------------------------------------


@dataclass(frozen=True)
class LagrangianModel:
    family: Family
    params: ModelParams
    potential: Potential
    j: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family.hierarchical:
            _check_order(self.j if self.j is not None else 0)

    def __call__(self, x: Scalar, v: Scalar) -> Scalar:
        f, p, pot = self.family, self.params, self.potential
        if f is Family.ADDITIVE_NR:
            return L_additive_nr(p, pot, x, v)
        if f is Family.MULTIPLICATIVE_NR:
            return L_mult_nr(p, pot, x, v)
        if f is Family.HIERARCHY_NR:
            return L_hier_nr(p, pot, self.j, x, v)
        if f is Family.ADDITIVE_REL:
            return L_additive_rel(p, pot, x, v)
        if f is Family.MULTIPLICATIVE_REL:
            return L_mult_rel(p, pot, x, v)
        return L_hier_rel(p, pot, self.j, x, v)

    def describe(self) -> str:
        parts = [f"family={self.family.value}", f"m={self.params.m!r}"]
        if self.family.multiplicative:
            parts.append(f"lambda={self.params.lam!r}")
        if self.family.relativistic:
            parts.append(f"c={self.params.c!r}")
        if self.family.hierarchical:
            parts.append(f"j={self.j}")
        parts.append(f"potential={self.potential.describe()}")
        return " ".join(parts)

"""Closed-form Hamiltonians, the numeric Legendre transform and the
harmonic-oscillator Lax-matrix trace check.

Each multiplicative or hierarchy Hamiltonian is a function ``f(H_std)`` of
the standard one (``H_N`` or ``H_c``).  :meth:`HamiltonianModel.time_scale`
returns ``f'(H_std)``, the constant factor by which the canonical flow of
``f(H_std)`` runs faster than the standard flow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .lagrangians import Family, LagrangianModel, ModelParams, _check_order
from .numerics import (
    Scalar,
    check_lambda,
    check_speed,
    eval_with_second_derivs,
    exp,
    expm1,
    real,
    sqrt,
)
from .potentials import Potential


def H_additive_nr(params: ModelParams, pot: Potential, x: Scalar, p: Scalar) -> Scalar:
    return (p * p) / (2.0 * params.m) + pot.V(x)


def H_mult_nr(params: ModelParams, pot: Potential, x: Scalar, p: Scalar, *,
              excess: bool = False) -> Scalar:
    """``-m lam^2 exp(-H_N / m lam^2)``; ``excess=True`` returns ``H + m lam^2``."""
    check_lambda(params.lam)
    scale = params.energy_scale
    h = H_additive_nr(params, pot, x, p) / scale
    if excess:
        return -scale * expm1(-h)
    return -scale * exp(-h)


def H_hier_nr(params: ModelParams, pot: Potential, j: int, x: Scalar, p: Scalar) -> Scalar:
    return H_additive_nr(params, pot, x, p) ** _check_order(j)


def _rel_kinetic_excess(params: ModelParams, p: Scalar) -> Scalar:
    """mc^2 (sqrt(1 + (p/mc)^2) - 1), free of cancellation at small p."""
    mc = params.m * params.c
    q2 = (p * p) / (mc * mc)
    return mc * params.c * q2 / (sqrt(1.0 + q2) + 1.0)


def H_additive_rel(params: ModelParams, pot: Potential, x: Scalar, p: Scalar) -> Scalar:
    mc = params.m * params.c
    return mc * params.c * sqrt(1.0 + (p * p) / (mc * mc)) + pot.V(x)


def H_mult_rel(params: ModelParams, pot: Potential, x: Scalar, p: Scalar, *,
               excess: bool = False, rest_scaled: bool = False) -> Scalar:
    """``-m lam^2 exp(-H_c / m lam^2)``.

    ``excess=True`` returns ``H + m lam^2``; ``rest_scaled=True`` returns
    ``H * exp(c^2/lam^2)``.
    """
    if excess and rest_scaled:
        raise ValueError("excess and rest_scaled are mutually exclusive")
    check_lambda(params.lam)
    scale = params.energy_scale
    if rest_scaled:
        h = (_rel_kinetic_excess(params, p) + pot.V(x)) / scale
        return -scale * exp(-h)
    h = H_additive_rel(params, pot, x, p) / scale
    if excess:
        return -scale * expm1(-h)
    return -scale * exp(-h)


def H_hier_rel(params: ModelParams, pot: Potential, j: int, x: Scalar, p: Scalar) -> Scalar:
    return H_additive_rel(params, pot, x, p) ** _check_order(j)


@dataclass(frozen=True)
class HamiltonianModel:
    family: Family
    params: ModelParams
    potential: Potential
    j: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family.hierarchical:
            _check_order(self.j if self.j is not None else 0)

    def __call__(self, x: Scalar, p: Scalar) -> Scalar:
        f, prm, pot = self.family, self.params, self.potential
        if f is Family.ADDITIVE_NR:
            return H_additive_nr(prm, pot, x, p)
        if f is Family.MULTIPLICATIVE_NR:
            return H_mult_nr(prm, pot, x, p)
        if f is Family.HIERARCHY_NR:
            return H_hier_nr(prm, pot, self.j, x, p)
        if f is Family.ADDITIVE_REL:
            return H_additive_rel(prm, pot, x, p)
        if f is Family.MULTIPLICATIVE_REL:
            return H_mult_rel(prm, pot, x, p)
        return H_hier_rel(prm, pot, self.j, x, p)

    def standard(self, x: Scalar, p: Scalar) -> Scalar:
        """The additive Hamiltonian of the same kinematics (H_N or H_c)."""
        if self.family.relativistic:
            return H_additive_rel(self.params, self.potential, x, p)
        return H_additive_nr(self.params, self.potential, x, p)

    def time_scale(self, x: float, p: float) -> float:
        """d H / d H_std at the given point."""
        h = real(self.standard(x, p))
        if self.family.additive:
            return 1.0
        if self.family.multiplicative:
            return math.exp(-h / self.params.energy_scale)
        return self.j * h ** (self.j - 1)

    def lagrangian(self) -> LagrangianModel:
        return LagrangianModel(self.family, self.params, self.potential, self.j)

    def describe(self) -> str:
        return self.lagrangian().describe()


def kinetic_momentum(params: ModelParams, v: float, relativistic: bool) -> float:
    """m v, or gamma m v in the relativistic case."""
    if relativistic:
        b = check_speed(v, params.c)
        return params.m * v / math.sqrt(1.0 - b * b)
    return params.m * v


def kinetic_velocity(params: ModelParams, p: float, relativistic: bool) -> float:
    """Inverse of :func:`kinetic_momentum`."""
    if relativistic:
        q = p / (params.m * params.c)
        return p / (params.m * math.sqrt(1.0 + q * q))
    return p / params.m


def canonical_momentum(model: LagrangianModel, x: float, v: float) -> float:
    """dL/dv from the HyperDual engine."""
    return eval_with_second_derivs(model, x, v).d_v


def legendre_numeric(model: LagrangianModel, x: float, v: float) -> float:
    """v dL/dv - L with dL/dv from the HyperDual engine."""
    d = eval_with_second_derivs(model, x, v)
    return v * d.d_v - d.value


class LaxCheck(NamedTuple):
    trace: float
    expected: float
    odd_trace: float


def lax_invariant_check(omega: float, x: float, p: float, l: int) -> LaxCheck:
    """Traces of powers of the unit-mass oscillator Lax matrix [[p, wx], [wx, -p]].

    Tr(M^(2l)) should equal 2 (p^2 + w^2 x^2)^l and Tr(M^(2l+1)) should vanish.
    """
    if int(l) != l or l < 1:
        raise ValueError(f"l must be an integer >= 1, got {l}")
    M = np.array([[p, omega * x], [omega * x, -p]], dtype=float)
    even = np.linalg.matrix_power(M, 2 * l)
    odd = even @ M
    expected = 2.0 * (p * p + (omega * x) ** 2) ** l
    return LaxCheck(float(np.trace(even)), float(expected), float(np.trace(odd)))


class HamiltonianDerivatives(NamedTuple):
    H_x: float
    H_p: float
    H_pp: float
    H_px: float
    f1: float  # dH/dH_std


def derivative_function(model: HamiltonianModel):
    """Closure (x, p) -> (H_x, H_p, H_pp, H_px, f') for ``f(H_std)``, built from
    f', f'' and the partials of H_std.

    Used by the integrators, where the HyperDual engine would be too slow.
    """
    prm = model.params
    m, c = prm.m, prm.c
    mc = m * c
    scale = prm.energy_scale
    V, dV = model.potential.V, model.potential.dV
    rel = model.family.relativistic
    mode = "add" if model.family.additive else "mult" if model.family.multiplicative else "hier"
    j = model.j

    def derivs(x, p):
        if rel:
            g = math.sqrt(1.0 + (p / mc) ** 2)
            h = mc * c * g + V(x)
            u = p / (m * g)
            u_p = 1.0 / (m * g * g * g)
        else:
            h = p * p / (2.0 * m) + V(x)
            u = p / m
            u_p = 1.0 / m
        if mode == "add":
            f1, f2 = 1.0, 0.0
        elif mode == "mult":
            f1 = math.exp(-h / scale)
            f2 = -f1 / scale
        else:
            f1 = j * h ** (j - 1)
            f2 = j * (j - 1) * h ** (j - 2) if j >= 2 else 0.0
        force = dV(x)
        return HamiltonianDerivatives(f1 * force, f1 * u, f2 * u * u + f1 * u_p, f2 * force * u, f1)

    return derivs


def analytic_derivatives(model: HamiltonianModel, x: float, p: float) -> HamiltonianDerivatives:
    """Closed-form partials of the model Hamiltonian at one point."""
    return derivative_function(model)(x, p)

"""Equations of motion from Lagrangians (Euler-Lagrange) and Hamiltonians.

The Lagrangian side solves

    L_x - v L_xv - a L_vv = 0

for the acceleration ``a`` with all partials from the HyperDual engine.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DegenerateHessian
from .hamiltonians import HamiltonianModel, derivative_function
from .lagrangians import LagrangianModel, ModelParams
from .numerics import eval_with_second_derivs, gamma
from .potentials import Potential

#: Hessians below this multiple of m are treated as singular
HESSIAN_FLOOR = 1e-10
#: relativistic grids stay this fraction of c inside the light cone
LIGHT_CONE_MARGIN = 1e-6


class ReferenceKind(str, Enum):
    NEWTONIAN = "newtonian"
    RELATIVISTIC = "relativistic"


def hessian_floor(params: ModelParams) -> float:
    return HESSIAN_FLOOR * params.m


def acceleration_from_lagrangian(model: LagrangianModel, x: float, v: float, *,
                                 floor: Optional[float] = None) -> float:
    d = eval_with_second_derivs(model, x, v)
    if floor is None:
        floor = hessian_floor(model.params)
    if not abs(d.d_vv) >= floor:
        raise DegenerateHessian(f"|d2L/dv2| = {abs(d.d_vv):.3e} below floor {floor:.1e} at x={x}, v={v}")
    return (d.d_x - v * d.d_xv) / d.d_vv


def lagrangian_hessian(model: LagrangianModel, x: float, v: float) -> float:
    return eval_with_second_derivs(model, x, v).d_vv


def hierarchy_hessian_nr(params: ModelParams, pot: Potential, j: int, x: float, v: float) -> float:
    """Closed form m j (T + V)^(j-1) of the non-relativistic hierarchy Hessian."""
    h = 0.5 * params.m * v * v + pot.V(x)
    return params.m * j * h ** (j - 1)


def reference_acceleration(kind: ReferenceKind, params: ModelParams, pot: Potential,
                           x: float, v: float) -> float:
    """-V'/m, or -V'/(m gamma^3) in the relativistic case."""
    kind = ReferenceKind(kind)
    force = -pot.dV(x)
    if kind is ReferenceKind.RELATIVISTIC:
        return force / (params.m * gamma(v, params.c) ** 3)
    return force / params.m


def reference_kind_for(model) -> ReferenceKind:
    return ReferenceKind.RELATIVISTIC if model.family.relativistic else ReferenceKind.NEWTONIAN


def hamilton_rhs(model: HamiltonianModel, x: float, p: float) -> Tuple[float, float]:
    """(dH/dp, -dH/dx) from the HyperDual engine."""
    d = eval_with_second_derivs(model, x, p)
    return d.d_v, -d.d_x


def canonical_rhs(model: HamiltonianModel) -> Callable[[float, float], Tuple[float, float]]:
    """Fast closed-form equivalent of :func:`hamilton_rhs` for the integrators."""

    derivs = derivative_function(model)

    def rhs(x, p):
        H_x, H_p, _, _, _ = derivs(x, p)
        return H_p, -H_x

    return rhs


def kinetic_rhs(model: HamiltonianModel, *, floor: float = HESSIAN_FLOOR) -> Callable:
    """Hamilton-side flow with x-dot fixed to the kinetic velocity.

    Takes x-dot = p/m (p/(gamma m) relativistically, gamma = sqrt(1 + (p/mc)^2))
    and determines p-dot from -H_x = m d/dt(gamma H_p), which gives

        p-dot = -(H_x/m + (p/m) H_px) / (gamma H_pp + H_p p / (gamma m^2 c^2))

    (the second denominator term is absent non-relativistically).  For every
    family this reduces to p-dot = -V'(x).  The denominator vanishes on the
    degenerate set of the corresponding Lagrangian, e.g. |p| = m lam for the
    multiplicative Hamiltonian; there (relative to f'(H_std)/m) the flow
    raises DegenerateHessian.
    """
    prm = model.params
    m = prm.m
    rel = model.family.relativistic
    mc2 = m * m * prm.c * prm.c
    derivs = derivative_function(model)

    def rhs(x, p):
        H_x, H_p, H_pp, H_px, f1 = derivs(x, p)
        if rel:
            g = math.sqrt(1.0 + p * p / mc2)
            den = g * H_pp + H_p * p / (g * mc2)
        else:
            g = 1.0
            den = H_pp
        if den == 0.0 or abs(den) < floor * abs(f1) / m:
            raise DegenerateHessian(f"kinetic flow denominator {den:.3e} vanishes at x={x}, p={p}")
        return p / (g * m), -(H_x / m + (p / m) * H_px) / den

    return rhs


@dataclass(frozen=True)
class EomReport:
    grid_size: int
    max_abs_residual: float
    worst_point: Tuple[float, float]
    degenerate_points_skipped: int

    def to_dict(self) -> dict:
        out = asdict(self)
        out["worst_point"] = list(self.worst_point)
        return out


def scan_grid(x_range, v_range, n: int, *, c: Optional[float] = None,
              margin: float = LIGHT_CONE_MARGIN):
    """n x n grid; velocities are clipped to (1 - margin) c when c is given."""
    xs = np.linspace(x_range[0], x_range[1], n)
    vs = np.linspace(v_range[0], v_range[1], n)
    if c is not None:
        limit = (1.0 - margin) * c
        vs = np.clip(vs, -limit, limit)
    return xs, vs


def eom_equivalence_scan(model: LagrangianModel, kind: Optional[ReferenceKind] = None,
                         x_range=(-1.0, 1.0), v_range=(-1.0, 1.0), n: int = 21, *,
                         margin: float = LIGHT_CONE_MARGIN) -> EomReport:
    """Max |extracted - reference| acceleration over an n x n grid.

    Points with a degenerate Hessian are counted and skipped.
    """
    if n < 1:
        raise ValueError("grid size must be >= 1")
    kind = reference_kind_for(model) if kind is None else ReferenceKind(kind)
    c = model.params.c if model.family.relativistic else None
    xs, vs = scan_grid(x_range, v_range, n, c=c, margin=margin)
    worst, worst_point, skipped = 0.0, (float(xs[0]), float(vs[0])), 0
    for x in xs:
        for v in vs:
            x, v = float(x), float(v)
            try:
                a = acceleration_from_lagrangian(model, x, v)
            except DegenerateHessian:
                skipped += 1
                continue
            r = abs(a - reference_acceleration(kind, model.params, model.potential, x, v))
            if r > worst or math.isnan(r):
                worst, worst_point = r, (x, v)
    return EomReport(n * n, worst, worst_point, skipped)

"""Two identical particles on a line in the coordinates X = x1 + x2 and
x = x1 - x2, with a pair potential V(x).

In these coordinates the additive forms are

    L_N = (m/4)(X'^2 + x'^2) - V(x),    H_N = (P^2 + p^2)/4m + V(x)

with P = p1 + p2 and p = p1 - p2.  The brackets are {X, P} = {x, p} = 2, so
Hamilton's equations carry a factor 2: X' = 2 H_P, P' = -2 H_X and likewise
for (x, p).
"""
from __future__ import annotations

import math
from typing import NamedTuple, Tuple

from .dynamics import Method, Trajectory, integrate_system
from .eom import HESSIAN_FLOOR, EomReport, scan_grid
from .errors import DegenerateHessian
from .lagrangians import ModelParams
from .numerics import Scalar, check_lambda, eval_with_second_derivs, exp, expm1, gauss_velocity_integral, real
from .potentials import Potential


class TwoBodyState(NamedTuple):
    t: float
    X: float
    x: float
    VX: float
    vx: float


class TwoBodyPhaseState(NamedTuple):
    t: float
    X: float
    x: float
    P: float
    p: float


def _f(u: Scalar, lam: float, excess: bool = False) -> Scalar:
    """exp(-u^2/2lam^2) + (u/lam^2) * integral of exp(-w^2/2lam^2) from 0 to u."""
    lam2 = lam * lam
    drift = u * gauss_velocity_integral(u, lam) / lam2
    a = (u * u) / (2.0 * lam2)
    return (expm1(-a) if excess else exp(-a)) + drift


def L2_mult(params: ModelParams, pot: Potential, X_dot: Scalar, x_dot: Scalar, x: Scalar, *,
            excess: bool = False) -> Scalar:
    """(m lam^2/2) [f(X') + f(x') g(x)] with g = exp(-2V/m lam^2).

    ``excess=True`` returns ``L - m lam^2`` without cancellation.
    """
    lam = params.lam
    check_lambda(lam)
    half = 0.5 * params.energy_scale
    w = 2.0 * pot.V(x) / params.energy_scale
    if excess:
        fx = _f(x_dot, lam, excess=True)
        return half * (_f(X_dot, lam, excess=True) + fx * exp(-w) + expm1(-w))
    return half * (_f(X_dot, lam) + _f(x_dot, lam) * exp(-w))


def L2_additive(params: ModelParams, pot: Potential, X_dot: Scalar, x_dot: Scalar, x: Scalar) -> Scalar:
    return 0.25 * params.m * (X_dot * X_dot + x_dot * x_dot) - pot.V(x)


def H2_mult(params: ModelParams, pot: Potential, P: Scalar, p: Scalar, x: Scalar, *,
            printed_b: bool = False, excess: bool = False) -> Scalar:
    """-(m lam^2/2) [k(P) + k(p) b(x)] with k(q) = exp(-q^2/2m^2lam^2).

    b(x) = exp(-2V/m lam^2), the Legendre transform of :func:`L2_mult`.
    ``printed_b=True`` uses exp(-V/m lam^2) instead; that variant does not
    reduce to the additive Hamiltonian as lam grows (it gives V/2).
    ``excess=True`` returns ``H + m lam^2``.
    """
    check_lambda(params.lam)
    s = params.energy_scale
    denom = 2.0 * params.m * s
    w = (1.0 if printed_b else 2.0) * pot.V(x) / s
    kP = (P * P) / denom
    kp = (p * p) / denom
    if excess:
        return -0.5 * s * (expm1(-kP) + expm1(-(kp + w)))
    return -0.5 * s * (exp(-kP) + exp(-(kp + w)))


def H2_additive(params: ModelParams, pot: Potential, P: Scalar, p: Scalar, x: Scalar) -> Scalar:
    return (P * P + p * p) / (4.0 * params.m) + pot.V(x)


def reference_relative_acceleration(params: ModelParams, pot: Potential, x: float) -> float:
    """x'' = -(2/m) V'(x)."""
    return -2.0 * pot.dV(x) / params.m


def _sector_accelerations(params: ModelParams, pot: Potential, X_dot: float, x_dot: float,
                          x: float, floor: float) -> Tuple[float, float]:
    """Euler-Lagrange accelerations of each sector of L2_mult.

    The velocity Hessian is diagonal (L2 is a sum of an X'-term and an
    (x', x)-term), so each sector is solved on its own.  X does not appear
    in L2, so its partials come out as exact zeros.
    """
    dX = eval_with_second_derivs(lambda X, V: L2_mult(params, pot, V, x_dot, x), 0.0, X_dot)
    dx = eval_with_second_derivs(lambda y, v: L2_mult(params, pot, X_dot, v, y), x, x_dot)
    out = []
    for d, vel in ((dX, X_dot), (dx, x_dot)):
        if not abs(d.d_vv) >= floor:
            raise DegenerateHessian(f"two-body Hessian {d.d_vv:.3e} below floor at x={x}")
        out.append((d.d_x - vel * d.d_xv) / d.d_vv)
    return out[0], out[1]


def twobody_accelerations(params: ModelParams, pot: Potential, X_dot: float, x_dot: float,
                          x: float) -> Tuple[float, float]:
    return _sector_accelerations(params, pot, X_dot, x_dot, x, HESSIAN_FLOOR * params.m)


def twobody_eom_check(params: ModelParams, pot: Potential, x_range=(0.5, 1.5),
                      v_range=(-1.0, 1.0), n: int = 21) -> Tuple[EomReport, EomReport]:
    """Reports for the X-sector (reference X'' = 0) and the x-sector
    (reference -(2/m) V'(x)) over an n x n grid of (x, u), with X' = x' = u."""
    xs, us = scan_grid(x_range, v_range, n)
    worst = [0.0, 0.0]
    where = [(float(xs[0]), float(us[0]))] * 2
    skipped = 0
    for x in xs:
        for u in us:
            x, u = float(x), float(u)
            try:
                aX, ax = twobody_accelerations(params, pot, u, u, x)
            except DegenerateHessian:
                skipped += 1
                continue
            for n_sector, r in enumerate((abs(aX), abs(ax - reference_relative_acceleration(params, pot, x)))):
                if r > worst[n_sector] or math.isnan(r):
                    worst[n_sector], where[n_sector] = r, (x, u)
    return (EomReport(n * n, worst[0], where[0], skipped),
            EomReport(n * n, worst[1], where[1], skipped))


# integration -------------------------------------------------------------------

TWOBODY_COLUMNS = ("X", "x", "VX", "vx", "H_model")


def integrate_twobody_lagrangian(params: ModelParams, pot: Potential, X0: float, x0: float,
                                 VX0: float, vx0: float, dt: float, n_steps: int,
                                 method: Method = Method.RK4, *, stride: int = 1) -> Trajectory:
    """Integrate both sectors of L2_mult; H_model is the Legendre energy."""

    def f(X, x, VX, vx):
        aX, ax = twobody_accelerations(params, pot, VX, vx, x)
        return VX, vx, aX, ax

    def energy(X, x, VX, vx):
        d = eval_with_second_derivs(lambda a, b: L2_mult(params, pot, a, b, x), VX, vx)
        return (VX * d.d_x + vx * d.d_v - d.value,)

    traj = integrate_system(f, ("X", "x", "VX", "vx"), (X0, x0, VX0, vx0), dt, n_steps, method,
                            stride=stride, extra=energy, extra_names=("H_model",),
                            model=f"twobody-lagrangian lambda={params.lam!r} m={params.m!r} "
                                  f"potential={pot.describe()}")
    return traj


def _H2_derivs(params: ModelParams, pot: Potential, printed_b: bool):
    """Closed-form partials of the two sectors of H2_mult.

    Each sector is -(s/2) exp(-h/(s/2)) with s = m lam^2 and
    h = q^2/4m (+ V, or V/2 for the printed b).
    """
    s = params.energy_scale
    half = 0.5 * s
    m = params.m
    wv = 0.5 if printed_b else 1.0

    def sector(q, Vq, dVq):
        h = q * q / (4.0 * m) + wv * Vq
        f1 = math.exp(-h / half)
        f2 = -f1 / half
        h_q, h_qq = q / (2.0 * m), 1.0 / (2.0 * m)
        h_x = wv * dVq
        return f1 * h_x, f1 * h_q, f2 * h_q * h_q + f1 * h_qq, f2 * h_x * h_q

    return sector


def integrate_twobody_hamiltonian(params: ModelParams, pot: Potential, X0: float, x0: float,
                                  P0: float, p0: float, dt: float, n_steps: int,
                                  method: Method = Method.RK4, *, flow: str = "canonical",
                                  printed_b: bool = False, stride: int = 1) -> Trajectory:
    """Integrate H2_mult.

    ``flow="canonical"``: X' = 2 H_P, x' = 2 H_p, P' = 0, p' = -2 H_x.
    ``flow="kinetic"``: X' = P/m, x' = p/m and the momentum rates from
    -2 H_q = m d/dt(2 H_p) per sector; this reproduces p' = -2 V'(x).
    """
    sector = _H2_derivs(params, pot, printed_b)
    m = params.m
    if flow not in ("canonical", "kinetic"):
        raise ValueError(f"unknown flow {flow!r}")

    def f(X, x, P, p):
        HP = sector(P, 0.0, 0.0)[1]
        Hx, Hp, Hpp, Hpx = sector(p, pot.V(x), pot.dV(x))
        if flow == "canonical":
            return 2.0 * HP, 2.0 * Hp, 0.0, -2.0 * Hx
        if Hpp == 0.0:
            raise DegenerateHessian("kinetic two-body flow is singular here")
        return P / m, p / m, 0.0, -(Hx / m + (p / m) * Hpx) / Hpp

    def extras(X, x, P, p):
        dX, dx, _, _ = f(X, x, P, p)
        return dX, dx, real(H2_mult(params, pot, P, p, x, printed_b=printed_b))

    return integrate_system(f, ("X", "x", "P", "p"), (X0, x0, P0, p0), dt, n_steps, method,
                            stride=stride, extra=extras, extra_names=("VX", "vx", "H_model"),
                            conserved_name="H_model",
                            model=f"twobody-hamiltonian lambda={params.lam!r} m={params.m!r} "
                                  f"potential={pot.describe()} flow={flow} printed_b={printed_b}")


def integrate_relative_reference(params: ModelParams, pot: Potential, x0: float, v0: float,
                                 dt: float, n_steps: int, method: Method = Method.RK4, *,
                                 stride: int = 1) -> Trajectory:
    """Direct integration of x'' = -(2/m) V'(x)."""

    def f(x, v):
        return v, reference_relative_acceleration(params, pot, x)

    return integrate_system(f, ("x", "v"), (x0, v0), dt, n_steps, method, stride=stride,
                            extra=lambda x, v: (0.25 * params.m * v * v + pot.V(x),),
                            extra_names=("H_rel",), model="twobody-relative-reference")

"""Hierarchy members as exact polynomials in (T, V), their V-derivative
recurrences, and partial sums of the series that generate the
multiplicative Lagrangians and Hamiltonians.

The series

    sum_j (1/j!) (-1/m lam^2)^(j-1) L_j

starts at j = 0 with the constant term m lam^2 (L_0 = -1); the Hamiltonian
series starts with -m lam^2.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import HierarchyOrderOverflow
from .hamiltonians import H_additive_nr, H_additive_rel, H_mult_nr, H_mult_rel
from .lagrangians import L_mult_nr, L_mult_rel, ModelParams, P_functions
from .potentials import Potential

#: largest order with exact coefficient tables
MAX_ORDER = 20


def _check_table_order(j: int, lo: int = 1) -> int:
    if int(j) != j or j < lo:
        raise ValueError(f"hierarchy order must be an integer >= {lo}, got {j}")
    if j > MAX_ORDER:
        raise HierarchyOrderOverflow(f"order {j} exceeds the exact-table bound {MAX_ORDER}")
    return int(j)


def hier_coefficients_nr(j: int) -> List[Fraction]:
    """Exact c_{j,k} = j! / ((j-k)! k! (2j-2k-1)), k = 0..j, coefficient of T^(j-k) V^k.

    j = 0 gives [-1], the constant L_0 that makes the series start at m lam^2.
    """
    j = _check_table_order(j, lo=0)
    return [
        Fraction(math.factorial(j), math.factorial(j - k) * math.factorial(k) * (2 * j - 2 * k - 1))
        for k in range(j + 1)
    ]


def hier_coefficients_rel(j: int) -> List[int]:
    """Coefficient of (mc^2)^(j-k) P_{j-k} V^k in L_{j,c}: -C(j, k)."""
    j = _check_table_order(j, lo=0)
    return [-math.comb(j, k) for k in range(j + 1)]


def hierarchy_table(j: int) -> List[Tuple[int, int, int, int]]:
    """Rows (j, k, numerator, denominator) of the exact coefficient table."""
    return [(j, k, c.numerator, c.denominator) for k, c in enumerate(hier_coefficients_nr(j))]


def evaluate_nr(coeffs: Sequence, T: float, V: float) -> float:
    """sum_k coeffs[k] T^(deg-k) V^k in floating point."""
    deg = len(coeffs) - 1
    return sum(float(c) * T ** (deg - k) * V**k for k, c in enumerate(coeffs))


def _abs_terms(coeffs: Sequence, T: float, V: float) -> float:
    deg = len(coeffs) - 1
    return sum(abs(float(c) * T ** (deg - k) * V**k) for k, c in enumerate(coeffs))


def dV_coefficients(coeffs: Sequence) -> list:
    """Coefficients of d/dV of a homogeneous (T, V) polynomial: the result
    has degree one lower and entry k equal to (k + 1) coeffs[k + 1]."""
    return [(k + 1) * coeffs[k + 1] for k in range(len(coeffs) - 1)]


def _samples(samples, seed: int, lo_hi=((0.0, 3.0), (-2.0, 2.0))):
    if isinstance(samples, int):
        rng = np.random.default_rng(seed)
        (a, b), (c, d) = lo_hi
        return list(zip(rng.uniform(a, b, samples), rng.uniform(c, d, samples)))
    return [(float(s), float(t)) for s, t in samples]


def recurrence_check_nr(j: int, samples: Union[int, Iterable[Tuple[float, float]], None] = None,
                        *, seed: int = 0) -> float:
    """Check L_{j-1} = (1/j) dL_j/dV and L_1 = (1/j!) d^(j-1)L_j/dV^(j-1).

    With ``samples=None`` the comparison is made on the exact rational
    coefficients and the result is exactly 0 when the identities hold.
    Otherwise both sides are evaluated in floating point at the given
    (T, V) points (or that many random ones) and the maximum deviation is
    returned relative to the sum of absolute term values of the right-hand
    side, which is the natural scale of a float polynomial evaluation.
    """
    j = _check_table_order(j)
    if j < 2:
        raise ValueError("the recurrence needs j >= 2")
    top = hier_coefficients_nr(j)
    once = [c / j for c in dV_coefficients(top)]
    iterated = top
    for _ in range(j - 1):
        iterated = dV_coefficients(iterated)
    iterated = [c / math.factorial(j) for c in iterated]
    prev, first = hier_coefficients_nr(j - 1), hier_coefficients_nr(1)
    if samples is None:
        dev = max(abs(a - b) for a, b in zip(once + iterated, prev + first))
        return float(dev)
    # float path: derivative coefficients formed in floating point
    ftop = [float(c) for c in top]
    fonce = [c / j for c in dV_coefficients(ftop)]
    fiter = ftop
    for _ in range(j - 1):
        fiter = dV_coefficients(fiter)
    fiter = [c / math.factorial(j) for c in fiter]
    worst = 0.0
    for T, V in _samples(samples, seed):
        for lhs, rhs in ((fonce, prev), (fiter, first)):
            diff = abs(evaluate_nr(lhs, T, V) - evaluate_nr(rhs, T, V))
            worst = max(worst, diff / max(_abs_terms(rhs, T, V), 1e-300))
    return worst


def hier_rel_V_coefficients(params: ModelParams, v: float, j: int, Ps: Optional[list] = None) -> list:
    """a_k with L_{j,c} = sum_k a_k V^k at velocity v."""
    if Ps is None:
        Ps = P_functions(v, params.c, j)
    rest = params.m * params.c * params.c
    return [b * rest ** (j - k) * float(Ps[j - k]) for k, b in enumerate(hier_coefficients_rel(j))]


def recurrence_check_rel(params: ModelParams, j: int,
                         samples: Union[int, Iterable[Tuple[float, float]]] = 20,
                         *, seed: int = 0) -> float:
    """Max relative deviation of dL_{j,c}/dV from j L_{j-1,c} at (v, V) samples.

    The derivative is taken analytically on the V-coefficients; random
    samples draw |v| <= 0.9 c and V in [-2, 2].
    """
    j = _check_table_order(j)
    if j < 2:
        raise ValueError("the recurrence needs j >= 2")
    c = params.c
    points = _samples(samples, seed, ((-0.9 * c, 0.9 * c), (-2.0, 2.0)))
    worst = 0.0
    for v, V in points:
        Ps = P_functions(v, c, j)
        top = hier_rel_V_coefficients(params, v, j, Ps)
        prev = hier_rel_V_coefficients(params, v, j - 1, Ps)
        lhs = sum(a * V**k for k, a in enumerate(dV_coefficients(top)))
        rhs = j * sum(a * V**k for k, a in enumerate(prev))
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return worst


class SeriesResult(NamedTuple):
    partial_sum: float
    target: float
    residual: float


def _weights(params: ModelParams, J: int) -> List[float]:
    """(1/j!) (-1/m lam^2)^(j-1) for j = 0..J."""
    s = params.energy_scale
    return [(-1.0 / s) ** (j - 1) / math.factorial(j) for j in range(J + 1)]


def _partial_sums(params: ModelParams, members: Sequence[float]) -> List[float]:
    out, acc = [], 0.0
    for w, term in zip(_weights(params, len(members) - 1), members):
        acc += w * term
        out.append(acc)
    return out


def lagrangian_members_nr(params: ModelParams, pot: Potential, x: float, v: float,
                          J: int) -> List[float]:
    """[L_0, ..., L_J] at (x, v) from the exact coefficient tables."""
    J = _check_table_order(J, lo=0)
    T = 0.5 * params.m * v * v
    V = float(pot.V(x))
    return [evaluate_nr(hier_coefficients_nr(j), T, V) for j in range(J + 1)]


def lagrangian_members_rel(params: ModelParams, pot: Potential, x: float, v: float,
                           J: int) -> List[float]:
    """[L_{0,c}, ..., L_{J,c}] with L_{0,c} = -1."""
    J = _check_table_order(J, lo=0)
    Ps = P_functions(v, params.c, max(J, 1))
    V = float(pot.V(x))
    members = [-1.0]
    for j in range(1, J + 1):
        members.append(sum(a * V**k for k, a in enumerate(hier_rel_V_coefficients(params, v, j, Ps))))
    return members


def series_residuals_nr(params: ModelParams, pot: Potential, x: float, v: float,
                        J: int) -> List[SeriesResult]:
    """Partial sums for every truncation order 0..J against L_mult_nr."""
    target = float(L_mult_nr(params, pot, x, v))
    sums = _partial_sums(params, lagrangian_members_nr(params, pot, x, v, J))
    return [SeriesResult(s, target, abs(s - target)) for s in sums]


def series_residuals_rel(params: ModelParams, pot: Potential, x: float, v: float,
                         J: int) -> List[SeriesResult]:
    """Partial sums for every truncation order 0..J against L_mult_rel."""
    target = float(L_mult_rel(params, pot, x, v))
    sums = _partial_sums(params, lagrangian_members_rel(params, pot, x, v, J))
    return [SeriesResult(s, target, abs(s - target)) for s in sums]


def series_reconstruct_nr(params: ModelParams, pot: Potential, x: float, v: float,
                          J: int) -> SeriesResult:
    return series_residuals_nr(params, pot, x, v, J)[-1]


def series_reconstruct_rel(params: ModelParams, pot: Potential, x: float, v: float,
                           J: int) -> SeriesResult:
    return series_residuals_rel(params, pot, x, v, J)[-1]


def hamiltonian_series(params: ModelParams, pot: Potential, x: float, p: float, J: int,
                       relativistic: bool = False) -> SeriesResult:
    """Partial sum through J of the H_std^j series against the closed-form
    multiplicative Hamiltonian (an exponential series, convergent everywhere)."""
    if int(J) != J or J < 0:
        raise ValueError(f"J must be an integer >= 0, got {J}")
    if relativistic:
        h = float(H_additive_rel(params, pot, x, p))
        target = float(H_mult_rel(params, pot, x, p))
    else:
        h = float(H_additive_nr(params, pot, x, p))
        target = float(H_mult_nr(params, pot, x, p))
    # H_0 = 1: with the j = 0 weight -m lam^2 this is the constant term
    members = [1.0] + [h**j for j in range(1, int(J) + 1)]
    total = _partial_sums(params, members)[-1]
    return SeriesResult(total, target, abs(total - target))

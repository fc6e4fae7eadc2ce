"""Trajectory integration in (x, v) from a Lagrangian or in (x, p) from a
Hamiltonian, with the model's energy recorded along the way."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .eom import acceleration_from_lagrangian, canonical_rhs, kinetic_rhs
from .errors import DegenerateEnergy, GridMismatch, MultlagError
from .hamiltonians import (
    HamiltonianModel,
    canonical_momentum,
    kinetic_momentum,
    legendre_numeric,
)
from .lagrangians import LagrangianModel
from .numerics import real

#: hierarchy Hamiltonian runs need |H_std(0)| above this
ENERGY_FLOOR = 1e-8
DRIFT_EPS = 1e-300


class Method(str, Enum):
    RK4 = "rk4"
    RK45 = "rk45"


class Flow(str, Enum):
    CANONICAL = "canonical"
    KINETIC = "kinetic"


@dataclass(frozen=True)
class KinState:
    t: float
    x: float
    v: float


@dataclass(frozen=True)
class PhaseState:
    t: float
    x: float
    p: float


@dataclass(frozen=True)
class Trajectory:
    """Recorded run.  ``columns`` maps column names to equal-length arrays;
    ``state_vars`` names the integrated coordinates after ``t``."""

    model: str
    step: float
    stride: int
    columns: dict
    state_vars: Tuple[str, ...]
    conserved_name: str
    error: Optional[str] = None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def t(self) -> np.ndarray:
        return self.columns["t"]

    @property
    def aborted(self) -> bool:
        return self.error is not None

    @property
    def conserved(self) -> np.ndarray:
        """(t, H) pairs as an (n, 2) array."""
        return np.column_stack([self.t, self.columns[self.conserved_name]])

    @property
    def states(self) -> list:
        if self.state_vars == ("x", "v"):
            return [KinState(*row) for row in zip(self.t, self["x"], self["v"])]
        if self.state_vars == ("x", "p"):
            return [PhaseState(*row) for row in zip(self.t, self["x"], self["p"])]
        raise TypeError(f"no state type for variables {self.state_vars}")

    def __len__(self):
        return len(self.t)


# steppers ------------------------------------------------------------------

# Dormand-Prince 5(4)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_E = (
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

RK45_TOL = 1e-10


def _rk4_step(f, y, h):
    if len(y) == 2:
        x, w = y
        a1, b1 = f(x, w)
        a2, b2 = f(x + 0.5 * h * a1, w + 0.5 * h * b1)
        a3, b3 = f(x + 0.5 * h * a2, w + 0.5 * h * b2)
        a4, b4 = f(x + h * a3, w + h * b3)
        s = h / 6.0
        return (s * (a1 + 2.0 * a2 + 2.0 * a3 + a4), s * (b1 + 2.0 * b2 + 2.0 * b3 + b4))
    k1 = f(*y)
    k2 = f(*[a + 0.5 * h * b for a, b in zip(y, k1)])
    k3 = f(*[a + 0.5 * h * b for a, b in zip(y, k2)])
    k4 = f(*[a + h * b for a, b in zip(y, k3)])
    return [h / 6.0 * (a + 2.0 * b + 2.0 * c + d) for a, b, c, d in zip(k1, k2, k3, k4)]


def _dp_step(f, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        row = _DP_A[i]
        ys = [yi + h * sum(a * k[n] for a, k in zip(row, ks)) for n, yi in enumerate(y)]
        ks.append(f(*ys))
    y5 = [yi + h * sum(b * k[n] for b, k in zip(_DP_B, ks)) for n, yi in enumerate(y)]
    err = [h * sum(e * k[n] for e, k in zip(_DP_E, ks)) for n in range(len(y))]
    return y5, err, ks[6]


class _Integration:
    """Fixed output grid t_i = i dt; RK4 takes one step per output point,
    RK45 adapts internally and lands exactly on each output time."""

    def __init__(self, f, y0, dt, n_steps, method, tol=RK45_TOL):
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt}")
        if int(n_steps) != n_steps or n_steps < 1:
            raise ValueError(f"n_steps must be an integer >= 1, got {n_steps}")
        self.f, self.dt, self.n = f, float(dt), int(n_steps)
        self.method = Method(method)
        self.tol = tol
        self.y = [float(a) for a in y0]
        self.comp = [0.0] * len(self.y)
        self._h = self.dt
        self._k1 = None

    def _add(self, delta):
        # Kahan-compensated accumulation keeps roundoff below the RK4 error at small dt
        for n, d in enumerate(delta):
            d -= self.comp[n]
            s = self.y[n] + d
            self.comp[n] = (s - self.y[n]) - d
            self.y[n] = s

    def advance(self):
        if self.method is Method.RK4:
            self._add(_rk4_step(self.f, self.y, self.dt))
            return
        remaining = self.dt
        while remaining > 0.0:
            h = min(self._h, remaining)
            if self._k1 is None:
                self._k1 = self.f(*self.y)
            y5, err, k7 = _dp_step(self.f, self.y, h, self._k1)
            scale = [self.tol + self.tol * max(abs(a), abs(b)) for a, b in zip(self.y, y5)]
            norm = max(abs(e) / s for e, s in zip(err, scale))
            if norm <= 1.0:
                self._add([b - a for a, b in zip(self.y, y5)])
                self._k1 = k7
                remaining -= h
                if remaining < 1e-14 * self.dt:
                    remaining = 0.0
            factor = 5.0 if norm == 0.0 else min(5.0, max(0.2, 0.9 * norm ** -0.2))
            if norm <= 1.0 and h < self._h:
                continue  # a clipped step says nothing about the natural step size
            self._h = h * factor


def _run(f, y0, dt, n_steps, method, stride, record):
    """Drive the integration, calling ``record(i, y)`` at i = 0, every
    ``stride`` steps and at the end.  Returns an error message on abort."""
    if int(stride) != stride or stride < 1:
        raise ValueError(f"stride must be an integer >= 1, got {stride}")
    integ = _Integration(f, y0, dt, n_steps, method)
    f(*integ.y)  # initial state must be valid: errors here are not caught
    record(0, integ.y)
    for i in range(1, integ.n + 1):
        try:
            integ.advance()
            if any(not math.isfinite(a) for a in integ.y):
                raise FloatingPointError("non-finite state")
            if i % stride == 0 or i == integ.n:
                record(i, integ.y)
        except (MultlagError, ArithmeticError, ValueError) as exc:
            return f"{type(exc).__name__}: {exc}"
    return None


class _Recorder:
    def __init__(self, names):
        self.names = names
        self.rows: List[list] = []

    def add(self, *values):
        self.rows.append([float(v) for v in values])

    def columns(self):
        data = np.array(self.rows, dtype=float).reshape(-1, len(self.names))
        return {name: data[:, n].copy() for n, name in enumerate(self.names)}


COLUMNS = ("t", "x", "v", "p", "H_std", "H_model")


def integrate_lagrangian(model: LagrangianModel, x0: float, v0: float, dt: float,
                         n_steps: int, method: Method = Method.RK4, *,
                         stride: int = 1) -> Trajectory:
    """Integrate x'' = acceleration_from_lagrangian.

    Recorded columns: canonical momentum p = dL/dv, the standard energy at
    the kinetic momentum (H_std) and the Legendre energy v dL/dv - L (H_model).
    """
    ham = HamiltonianModel(model.family, model.params, model.potential, model.j)
    rel = model.family.relativistic
    rec = _Recorder(COLUMNS)

    def f(x, v):
        return v, acceleration_from_lagrangian(model, x, v)

    def record(i, y):
        x, v = y
        p = canonical_momentum(model, x, v)
        h_std = real(ham.standard(x, kinetic_momentum(model.params, v, rel)))
        rec.add(i * dt, x, v, p, h_std, legendre_numeric(model, x, v))

    error = _run(f, (x0, v0), dt, n_steps, method, stride, record)
    return Trajectory(model.describe(), float(dt), int(stride), rec.columns(), ("x", "v"),
                      "H_model", error)


def integrate_hamiltonian(model: HamiltonianModel, x0: float, p0: float, dt: float,
                          n_steps: int, method: Method = Method.RK4, *,
                          flow: Flow = Flow.CANONICAL, stride: int = 1) -> Trajectory:
    """Integrate Hamilton's equations for ``model``.

    ``flow="canonical"`` uses x' = dH/dp, p' = -dH/dx.  For H = f(H_std) this
    is the standard flow with time running f'(H_std(0)) times faster.
    ``flow="kinetic"`` keeps x' at the kinetic velocity and takes p' from
    -H_x = m d/dt(gamma H_p) (see :func:`multlag.eom.kinetic_rhs`).
    """
    flow = Flow(flow)
    if model.family.hierarchical and model.j >= 2:
        h0 = real(model.standard(x0, p0))
        if not abs(h0) > ENERGY_FLOOR:
            raise DegenerateEnergy(
                f"|H_std(0)| = {abs(h0):.3e} <= {ENERGY_FLOOR}: the hierarchy flow stalls"
            )
    f = canonical_rhs(model) if flow is Flow.CANONICAL else kinetic_rhs(model)
    rec = _Recorder(COLUMNS)

    def record(i, y):
        x, p = y
        v = f(x, p)[0]
        rec.add(i * dt, x, v, p, real(model.standard(x, p)), real(model(x, p)))

    error = _run(f, (x0, p0), dt, n_steps, method, stride, record)
    desc = f"{model.describe()} flow={flow.value}"
    return Trajectory(desc, float(dt), int(stride), rec.columns(), ("x", "p"), "H_model", error)


def integrate_system(f: Callable, names: Sequence[str], y0: Sequence[float], dt: float,
                     n_steps: int, method: Method = Method.RK4, *, stride: int = 1,
                     extra: Optional[Callable] = None, extra_names: Sequence[str] = (),
                     conserved_name: Optional[str] = None, model: str = "") -> Trajectory:
    """Generic autonomous system y' = f(*y); ``extra(*y)`` adds recorded columns."""
    names = tuple(names)
    extra_names = tuple(extra_names)
    rec = _Recorder(("t",) + names + extra_names)

    def record(i, y):
        more = extra(*y) if extra is not None else ()
        rec.add(i * dt, *y, *more)

    error = _run(f, y0, dt, n_steps, method, stride, record)
    conserved_name = conserved_name or (extra_names[-1] if extra_names else names[-1])
    return Trajectory(model, float(dt), int(stride), rec.columns(), names, conserved_name, error)


def conserved_drift(traj: Trajectory) -> float:
    """max_t |H(t) - H(0)| / max(|H(0)|, 1e-300)."""
    h = traj[traj.conserved_name]
    if len(h) == 0:
        raise ValueError("trajectory has no conserved samples")
    return float(np.max(np.abs(h - h[0])) / max(abs(h[0]), DRIFT_EPS))


def compare_trajectories(a: Trajectory, b: Trajectory, second: Optional[str] = None
                         ) -> Tuple[float, float]:
    """Sup-norm deviations in x and in the second state variable.

    ``second`` defaults to the shared second state variable, or ``v`` when
    the runs integrate different variables.
    """
    if len(a) != len(b) or not np.array_equal(a.t, b.t):
        raise GridMismatch("trajectories are recorded on different time grids")
    if second is None:
        sa, sb = a.state_vars[1], b.state_vars[1]
        second = sa if sa == sb else "v"
    dx = float(np.max(np.abs(a["x"] - b["x"])))
    dy = float(np.max(np.abs(a[second] - b[second])))
    return dx, dy

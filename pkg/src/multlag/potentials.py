"""One-dimensional potentials V(x) with analytic derivatives.

Every ``V`` accepts a float or a :class:`~multlag.numerics.HyperDual`, so the
Lagrangians built on top of them can be differentiated exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar

from .errors import ConfigError, DomainError
from .numerics import Scalar, real

#: Calogero-Moser positions closer than this to the singularity are rejected
CM_SINGULAR_GUARD = 1e-8


@dataclass(frozen=True)
class Potential:
    kind: ClassVar[str] = "abstract"

    def check_domain(self, x: Scalar) -> None:
        pass

    def V(self, x: Scalar) -> Scalar:
        raise NotImplementedError

    def dV(self, x: Scalar) -> Scalar:
        raise NotImplementedError

    def describe(self) -> str:
        """Spec string in the ``kind:param=val,...`` grammar."""
        params = ",".join(f"{k}={v!r}" for k, v in self._params().items())
        return f"{self.kind}:{params}" if params else self.kind

    def _params(self) -> dict:
        return {}


@dataclass(frozen=True)
class Free(Potential):
    kind: ClassVar[str] = "free"

    def V(self, x):
        return 0.0

    def dV(self, x):
        return 0.0


@dataclass(frozen=True)
class Harmonic(Potential):
    """V = m omega^2 x^2 / 2."""

    m: float = 1.0
    omega: float = 1.0
    kind: ClassVar[str] = "harmonic"

    def V(self, x):
        return 0.5 * self.m * self.omega**2 * (x * x)

    def dV(self, x):
        return self.m * self.omega**2 * x

    def _params(self):
        return {"m": self.m, "omega": self.omega}


@dataclass(frozen=True)
class PairHarmonic(Potential):
    """Pair interaction V = g^2 x^2 in the relative coordinate."""

    g: float = 1.0
    kind: ClassVar[str] = "pair-harmonic"

    def V(self, x):
        return self.g**2 * (x * x)

    def dV(self, x):
        return 2.0 * self.g**2 * x

    def _params(self):
        return {"g": self.g}


@dataclass(frozen=True)
class CalogeroMoser(Potential):
    """Inverse-square pair interaction V = g^2 / x^2, defined for x != 0."""

    g: float = 1.0
    kind: ClassVar[str] = "calogero-moser"

    def check_domain(self, x):
        if abs(real(x)) < CM_SINGULAR_GUARD:
            raise DomainError(f"Calogero-Moser potential is singular at x = {real(x)}")

    def V(self, x):
        self.check_domain(x)
        return self.g**2 / (x * x)

    def dV(self, x):
        self.check_domain(x)
        return -2.0 * self.g**2 / (x * x * x)

    def _params(self):
        return {"g": self.g}


@dataclass(frozen=True)
class Polynomial(Potential):
    """V = sum_i coeffs[i] x^i."""

    coeffs: tuple = field(default=(0.0,))
    kind: ClassVar[str] = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(a) for a in self.coeffs))

    def V(self, x):
        acc = 0.0
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def dV(self, x):
        acc = 0.0
        for i in range(len(self.coeffs) - 1, 0, -1):
            acc = acc * x + i * self.coeffs[i]
        return acc

    def describe(self):
        return "polynomial:coeffs=" + ";".join(repr(a) for a in self.coeffs)


def eval_V(pot: Potential, x: Scalar) -> Scalar:
    return pot.V(x)


def eval_dV(pot: Potential, x: Scalar) -> Scalar:
    return pot.dV(x)


_KINDS = {
    "free": (Free, ()),
    "harmonic": (Harmonic, ("m", "omega")),
    "pair-harmonic": (PairHarmonic, ("g",)),
    "calogero-moser": (CalogeroMoser, ("g",)),
    "cm": (CalogeroMoser, ("g",)),
    "polynomial": (Polynomial, ("coeffs",)),
}


def parse_potential(text: str) -> Potential:
    """Build a potential from ``kind:param=val,param=val``.

    Polynomial coefficients are ``;``-separated, lowest order first:
    ``polynomial:coeffs=0;0;0.5``.
    """
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind not in _KINDS:
        raise ConfigError(f"unknown potential kind {kind!r}; expected one of {sorted(_KINDS)}")
    cls, allowed = _KINDS[kind]
    kwargs = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in allowed:
            raise ConfigError(f"bad parameter {item!r} for potential {kind!r}")
        try:
            if key == "coeffs":
                kwargs[key] = tuple(float(a) for a in val.split(";"))
            else:
                kwargs[key] = float(val)
        except ValueError as exc:
            raise ConfigError(f"non-numeric value in {item!r}") from exc
    return cls(**kwargs)

"""Model definition: growth laws, kinetic parameters and the right-hand side.

The state is ``(X, B, s, P)``: organic matter, living biomass, substrate and
enzyme product, all in g/L.  Time is in hours.

    dX/dt = -K_H X + alpha k_d B
    dB/dt = (mu(s) - k_d) B
    ds/dt = -(mu(s)/Y_Bs + m_s) B + K_H X
    dP/dt = (inv_Y_Ps mu(s) + m_P) B
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, fields
from typing import Callable, ClassVar, NamedTuple, Protocol, runtime_checkable


class DomainError(ValueError):
    """An input lies outside the domain where a quantity is defined."""


@runtime_checkable
class GrowthLaw(Protocol):
    """Specific growth rate mu(s) [1/h] and its derivative in s.

    ``rate`` and ``derivative`` are raw formulas without argument checks so
    they can sit inside the integrator loop; use :func:`growth_rate` and
    :func:`growth_rate_derivative` for checked evaluation.
    """

    kind: ClassVar[str]

    def rate(self, s: float) -> float: ...

    def derivative(self, s: float) -> float: ...

    @property
    def max_rate(self) -> float: ...


@dataclass(frozen=True)
class Monod:
    """Monod law ``mu_max * s / (k_s + s)``.

    Parameters
    ----------
    mu_max : float
        Maximum specific growth rate [1/h].
    k_s : float
        Half-saturation constant [g/L].
    """

    mu_max: float
    k_s: float

    kind: ClassVar[str] = "monod"

    def __post_init__(self):
        for name in ("mu_max", "k_s"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise DomainError(f"Monod {name} must be finite and > 0, got {v!r}")

    def rate(self, s: float) -> float:
        return self.mu_max * s / (self.k_s + s)

    def derivative(self, s: float) -> float:
        d = self.k_s + s
        return self.mu_max * self.k_s / (d * d)

    @property
    def max_rate(self) -> float:
        # supremum, never attained at finite s
        return self.mu_max


def _check_concentration(s: float) -> None:
    if not s >= 0:
        raise DomainError(f"substrate concentration must be >= 0, got {s!r}")


def growth_rate(law: GrowthLaw, s: float) -> float:
    """Specific growth rate [1/h] at substrate concentration ``s`` [g/L]."""
    _check_concentration(s)
    return law.rate(s)


def growth_rate_derivative(law: GrowthLaw, s: float) -> float:
    """d(mu)/ds [L/(g h)] at ``s``."""
    _check_concentration(s)
    return law.derivative(s)


@dataclass(frozen=True)
class ModelParams:
    """Kinetic coefficients.

    ``inv_Y_Ps`` holds the reciprocal yield 1/Y_{P/s} exactly as tabulated
    (0.2 g/g in the reference data); the product equation multiplies it by
    mu(s) directly.
    """

    K_H: float  # hydrolysis constant [1/h]
    alpha: float  # recycled fraction of dead biomass [-]
    k_d: float  # specific mortality rate [1/h]
    Y_Bs: float  # substrate -> biomass yield [g/g]
    inv_Y_Ps: float  # 1/Y_{P/s} [g/g]
    m_s: float  # substrate maintenance [1/h]
    m_P: float  # product maintenance [1/h]
    growth: GrowthLaw

    def __post_init__(self):
        _check_coefficients(self)

    @property
    def Y_Ps(self) -> float:
        return math.inf if self.inv_Y_Ps == 0 else 1.0 / self.inv_Y_Ps

    @property
    def limit_denominator(self) -> float:
        """``1 - Y_Bs (alpha - m_s/k_d)``; must be positive for limit predictions."""
        return 1.0 - self.Y_Bs * (self.alpha - self.m_s / self.k_d)

    def coefficients(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "growth"}


COEFFICIENT_NAMES = ("K_H", "alpha", "k_d", "Y_Bs", "inv_Y_Ps", "m_s", "m_P")


def _check_coefficients(p: ModelParams) -> None:
    for name in COEFFICIENT_NAMES:
        v = getattr(p, name)
        if not isinstance(v, numbers.Real) or not math.isfinite(v) or v < 0:
            raise DomainError(f"{name} must be finite and >= 0, got {v!r}")
    if p.alpha >= 1:
        raise DomainError(f"alpha must be < 1, got {p.alpha!r}")
    if p.k_d <= 0:
        raise DomainError(f"k_d must be > 0, got {p.k_d!r}")
    if p.Y_Bs <= 0:
        raise DomainError(f"Y_Bs must be > 0, got {p.Y_Bs!r}")
    if not isinstance(p.growth, GrowthLaw):
        raise DomainError(f"growth must implement GrowthLaw, got {type(p.growth).__name__}")


class State(NamedTuple):
    """Concentrations [g/L]; also used for their time derivatives [g/(L h)]."""

    X: float
    B: float
    s: float
    P: float

    def check_nonnegative(self) -> None:
        for name, v in zip(self._fields, self):
            if not v >= 0:
                raise DomainError(f"state component {name} must be >= 0, got {v!r}")


RhsFunc = Callable[[float, float, float, float], tuple[float, float, float, float]]


def make_rhs(params: ModelParams) -> RhsFunc:
    """Bind parameters into a fast unchecked ``f(X, B, s, P)`` for integration."""
    K_H = params.K_H
    akd = params.alpha * params.k_d
    k_d = params.k_d
    Y_Bs = params.Y_Bs
    m_s = params.m_s
    inv_Y_Ps = params.inv_Y_Ps
    m_P = params.m_P
    rate = params.growth.rate

    def f(X, B, s, P):
        mu = rate(s)
        return (
            -K_H * X + akd * B,
            (mu - k_d) * B,
            -(mu / Y_Bs + m_s) * B + K_H * X,
            (inv_Y_Ps * mu + m_P) * B,
        )

    return f


def rhs(state: State, params: ModelParams) -> State:
    """Time derivative of ``state``; requires a non-negative state."""
    state = State(*state)
    state.check_nonnegative()
    return State(*make_rhs(params)(*state))


def jacobian(state: State, params: ModelParams) -> list[list[float]]:
    """Analytic Jacobian d(rhs)/d(X, B, s, P) at ``state``."""
    X, B, s, P = state
    mu = params.growth.rate(s)
    dmu = params.growth.derivative(s)
    return [
        [-params.K_H, params.alpha * params.k_d, 0.0, 0.0],
        [0.0, mu - params.k_d, dmu * B, 0.0],
        [params.K_H, -(mu / params.Y_Bs + params.m_s), -dmu * B / params.Y_Bs, 0.0],
        [0.0, params.inv_Y_Ps * mu + params.m_P, params.inv_Y_Ps * dmu * B, 0.0],
    ]


@dataclass(frozen=True)
class HypothesisCheck:
    item: str
    passed: bool
    message: str


def validate_hypotheses(params: ModelParams) -> list[HypothesisCheck]:
    """Check the standing modelling assumptions.

    Violations are reported, not raised: the reference parameter tables
    themselves use yields above 1 and still give a well-posed problem.
    Non-finite or negative coefficients raise :class:`DomainError`.
    """
    _check_coefficients(params)
    p = params
    law = p.growth
    out = []

    def add(item, ok, fail_msg, ok_msg):
        out.append(HypothesisCheck(item, bool(ok), ok_msg if ok else fail_msg))

    add(
        "growth law",
        law.rate(0.0) == 0 and law.rate(1.0) > 0,
        "growth law must satisfy mu(0)=0 and mu(s)>0 for s>0",
        "mu(0)=0 and mu(s)>0",
    )
    add("alpha range", 0 <= p.alpha < 1, f"alpha={p.alpha:g} violates 0<=alpha<1", f"alpha={p.alpha:g}")
    add(
        "k_d below max growth",
        0 < p.k_d < law.max_rate,
        f"k_d={p.k_d:g} violates 0<k_d<max mu={law.max_rate:g}",
        f"k_d={p.k_d:g} < max mu={law.max_rate:g}",
    )
    add("Y_Bs range", 0 < p.Y_Bs < 1, f"Y_Bs={p.Y_Bs:g} violates 0<Y_Bs<1", f"Y_Bs={p.Y_Bs:g}")
    add("Y_Ps range", 0 < p.Y_Ps < 1, f"Y_Ps={p.Y_Ps:g} violates 0<Y_Ps<1", f"Y_Ps={p.Y_Ps:g}")
    add(
        "maintenance",
        p.m_s > 0 and p.m_P > 0,
        f"m_s={p.m_s:g}, m_P={p.m_P:g} violate m_s>0 and m_P>0",
        f"m_s={p.m_s:g}, m_P={p.m_P:g}",
    )
    D = p.limit_denominator
    add(
        "limit denominator",
        D > 0,
        f"1-Y_Bs*(alpha-m_s/k_d)={D:g} is not positive; limit predictions unavailable",
        f"1-Y_Bs*(alpha-m_s/k_d)={D:g}",
    )
    return out


def hypothesis_warnings(report: list[HypothesisCheck]) -> list[str]:
    return [c.message for c in report if not c.passed]

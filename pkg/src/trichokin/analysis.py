"""Asymptotic theory of the model as computable quantities.

Covers the attractor interval of substrate values, the decreasing weighted
sum Z, closed-form limits of P and of the biomass integrals given the
substrate limit s*, linearisations at the equilibria (0, 0, s*, P*), and the
(z, X, B, W) change of variables in which those equilibria become hyperbolic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrator import Trajectory, rk4_path
from .kinetics import DomainError, ModelParams, Monod, State, jacobian


def attractor_interval(params: ModelParams) -> float:
    """Right end ``lambda`` of {s >= 0 : mu(s) <= k_d} = [0, lambda] for Monod growth.

    Returns ``math.inf`` when ``k_d >= mu_max`` (every s qualifies).
    """
    law = params.growth
    if not isinstance(law, Monod):
        raise TypeError(f"closed-form attractor interval needs Monod growth, got {law.kind!r}")
    if params.k_d >= law.mu_max:
        return math.inf
    return params.k_d * law.k_s / (law.mu_max - params.k_d)


def _require_alpha(params: ModelParams) -> None:
    if params.alpha == 0:
        raise DomainError("Z-based bounds undefined for alpha=0")


def _require_nonnegative(X, B, s) -> None:
    for name, v in (("X", X), ("B", B), ("s", s)):
        if np.any(np.asarray(v) < 0):
            raise DomainError(f"state component {name} must be >= 0")


def _x_weight(params: ModelParams) -> float:
    return 1.0 + params.m_s * params.Y_Bs / params.k_d


def lyapunov_Z(state, params: ModelParams):
    """``(1 + m_s Y_Bs/k_d) X + alpha B + alpha Y_Bs s``.

    ``state`` may hold scalars or equal-length arrays (e.g. ``traj.states.T``).
    """
    _require_alpha(params)
    X, B, s = state[0], state[1], state[2]
    _require_nonnegative(X, B, s)
    a = params.alpha
    return _x_weight(params) * X + a * B + a * params.Y_Bs * s


def lyapunov_Z_derivative(state, params: ModelParams):
    """dZ/dt = K_H [(alpha Y_Bs - 1) - m_s Y_Bs/k_d] X; biomass terms cancel."""
    _require_alpha(params)
    X, B, s = state[0], state[1], state[2]
    _require_nonnegative(X, B, s)
    return params.K_H * ((params.alpha * params.Y_Bs - 1.0) - params.m_s * params.Y_Bs / params.k_d) * X


@dataclass(frozen=True)
class LimitPrediction:
    initial: State
    s_star: float
    lambda_: float  # math.inf when the attractor interval is unbounded
    s_star_upper_bound: float | None  # None when alpha == 0
    a: float
    b: float
    p_star: float
    int_B: float  # integral of B over [0, inf) [g h/L]
    int_muB: float  # integral of mu(s) B over [0, inf) [g/L]

    def p_star_for(self, s_star: float) -> float:
        X0, B0, s0, P0 = self.initial
        return P0 + self.a * B0 + self.b * (X0 + s0 - s_star)


def predict_limits(initial: State, params: ModelParams, s_star: float) -> LimitPrediction:
    """Closed-form limit quantities for the trajectory starting at ``initial``.

    ``s_star`` has no closed form; pass the value read off a converged run.
    """
    initial = State(*map(float, initial))
    initial.check_nonnegative()
    if not s_star >= 0:
        raise DomainError(f"s_star must be >= 0, got {s_star!r}")
    D = params.limit_denominator
    if not D > 0:
        raise DomainError(f"closed-form limits inapplicable: 1-Y_Bs*(alpha-m_s/k_d)={D:g} <= 0")
    X0, B0, s0, P0 = initial
    kd, Y, inv, mP = params.k_d, params.Y_Bs, params.inv_Y_Ps, params.m_P
    excess = params.alpha - params.m_s / kd
    # a, b multiplied through by 1/Y_Ps so that inv_Y_Ps = 0 stays finite
    a = (mP + inv * kd * Y * excess) / (kd * D)
    b = Y * (mP + inv * kd) / (kd * D)
    depleted = X0 + s0 - s_star
    bound = None
    if params.alpha > 0:
        bound = (_x_weight(params) * X0 + params.alpha * B0) / (params.alpha * Y) + s0
    try:
        lam = attractor_interval(params)
    except TypeError:
        lam = math.nan
    return LimitPrediction(
        initial=initial,
        s_star=float(s_star),
        lambda_=lam,
        s_star_upper_bound=bound,
        a=a,
        b=b,
        p_star=P0 + a * B0 + b * depleted,
        int_B=(B0 + Y * depleted) / (kd * D),
        int_muB=Y * (B0 * excess + depleted) / D,
    )


def trajectory_integrals(traj: Trajectory, params: ModelParams) -> tuple[float, float]:
    """Trapezoid estimates of the integrals of B and mu(s) B over the recorded horizon."""
    B = traj.B
    mu = params.growth.rate(traj.s)
    return float(np.trapezoid(B, traj.times)), float(np.trapezoid(mu * B, traj.times))


@dataclass(frozen=True)
class EigenReport:
    values: tuple[float, ...]
    jacobian: np.ndarray
    residuals: tuple[float, ...]  # scaled |det(J - r I)| per value

    @property
    def max_residual(self) -> float:
        return max(self.residuals)


def char_poly_residual(J: np.ndarray, r: float) -> float:
    """``|det(J - r I)|`` scaled by ``(||J||_2 + |r|)^n`` so roundoff sits near machine epsilon."""
    J = np.asarray(J, dtype=float)
    n = J.shape[0]
    scale = (np.linalg.norm(J, 2) + abs(r)) ** n
    det = abs(np.linalg.det(J - r * np.eye(n)))
    return float(det / scale) if scale > 0 else float(det)


def _report(values, J) -> EigenReport:
    J = np.asarray(J, dtype=float)
    return EigenReport(
        values=tuple(float(v) for v in values),
        jacobian=J,
        residuals=tuple(char_poly_residual(J, v) for v in values),
    )


def equilibrium_eigenvalues(s_star: float, params: ModelParams, p_star: float = 0.0) -> EigenReport:
    """Eigenvalues ``(-K_H, mu(s*) - k_d, 0, 0)`` at the equilibrium (0, 0, s*, P*)."""
    if not s_star >= 0:
        raise DomainError(f"s_star must be >= 0, got {s_star!r}")
    lam2 = params.growth.rate(s_star) - params.k_d
    J = jacobian(State(0.0, 0.0, s_star, p_star), params)
    return _report((-params.K_H, lam2, 0.0, 0.0), J)


@dataclass(frozen=True)
class TransformContext:
    """Constants of the change of variables around (0, 0, s*, P*).

    z = (X + s - s*)/B + varphi,   W = (P - P*)/B + omega.
    """

    s_star: float
    p_star: float
    mu_star: float
    varphi: float
    gamma: float
    omega: float
    phi: float

    def to_transformed(self, state) -> tuple:
        X, B, s, P = state
        if np.any(np.asarray(B) <= 0):
            raise DomainError("change of variables requires B > 0")
        z = (X + (s - self.s_star)) / B + self.varphi
        W = (P - self.p_star) / B + self.omega
        return z, X, B, W

    def to_original(self, z, X, B, W) -> tuple:
        s = self.s_star - X + (z - self.varphi) * B
        P = self.p_star + (W - self.omega) * B
        return X, B, s, P


def build_transform(s_star: float, p_star: float, params: ModelParams) -> TransformContext:
    if not s_star >= 0:
        raise DomainError(f"s_star must be >= 0, got {s_star!r}")
    if not p_star >= 0:
        raise DomainError(f"p_star must be >= 0, got {p_star!r}")
    m = params.growth.rate(s_star)
    kd, Y, inv = params.k_d, params.Y_Bs, params.inv_Y_Ps
    if not m < kd:
        raise DomainError(
            f"equilibrium not in interior of attractor set: mu(s*)={m:g} >= k_d={kd:g}"
        )
    ms, mP, a = params.m_s, params.m_P, params.alpha
    return TransformContext(
        s_star=float(s_star),
        p_star=float(p_star),
        mu_star=m,
        varphi=(m / Y - (a * kd - ms)) / (m - kd),
        gamma=(kd * (1.0 - a * Y) + Y * ms) / (Y * (kd - m)),
        omega=(-m * inv - mP) / (m - kd),
        phi=(inv * kd + mP) / (kd - m),
    )


ROUNDING_SLACK = 1e-12


def transformed_rhs(z, X, B, W, ctx: TransformContext, params: ModelParams) -> tuple:
    """Right-hand side of the (z, X, B, W) system.

    Only defined for B > 0, X >= 0 and non-negative reconstructed s and P.
    """
    if not B > 0:
        raise DomainError(f"transformed system needs B > 0, got B={B!r}")
    if not X >= 0:
        raise DomainError(f"transformed system needs X >= 0, got X={X!r}")
    s = ctx.s_star - X + (z - ctx.varphi) * B
    # reconstructions cancel large terms; allow rounding-level undershoot
    if not s >= -ROUNDING_SLACK * max(1.0, ctx.s_star, X):
        raise DomainError(f"transformed system needs s*-X+(z-varphi)B >= 0, got {s!r}")
    P = ctx.p_star + (W - ctx.omega) * B
    if not P >= -ROUNDING_SLACK * max(1.0, ctx.p_star):
        raise DomainError(f"transformed system needs P*+(W-omega)B >= 0, got {P!r}")
    s = max(s, 0.0)
    F = params.growth.rate(s)
    growth = F - params.k_d
    shift = F - ctx.mu_star
    return (
        -ctx.gamma * shift - growth * z,
        -params.K_H * X + params.alpha * params.k_d * B,
        growth * B,
        ctx.phi * shift - growth * W,
    )


def transformed_jacobian(ctx: TransformContext, params: ModelParams) -> np.ndarray:
    """Jacobian of the transformed system at its equilibrium (0, 0, 0, 0)."""
    dmu = params.growth.derivative(ctx.s_star)
    g = ctx.mu_star - params.k_d
    return np.array(
        [
            [-g, ctx.gamma * dmu, ctx.gamma * ctx.varphi * dmu, 0.0],
            [0.0, -params.K_H, params.alpha * params.k_d, 0.0],
            [0.0, 0.0, g, 0.0],
            [0.0, -ctx.phi * dmu, -ctx.phi * ctx.varphi * dmu, -g],
        ]
    )


def transformed_eigenvalues(ctx: TransformContext, params: ModelParams) -> EigenReport:
    """``(r1, r1, r2, r3)`` with r1 = k_d - mu(s*), r2 = -K_H, r3 = mu(s*) - k_d."""
    g = ctx.mu_star - params.k_d
    return _report((-g, -g, -params.K_H, g), transformed_jacobian(ctx, params))


def integrate_transformed(
    initial: State, ctx: TransformContext, params: ModelParams, h: float, n_steps: int
) -> np.ndarray:
    """RK4 path of the transformed system from ``initial``, mapped back to (X, B, s, P)."""
    y0 = ctx.to_transformed(tuple(initial))
    path = rk4_path(lambda y: transformed_rhs(*y, ctx, params), y0, h, n_steps)
    X, B, s, P = ctx.to_original(*path.T)
    return np.column_stack([X, B, s, P])

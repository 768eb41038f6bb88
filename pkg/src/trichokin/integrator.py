"""Fixed-step classical RK4 integration with trajectory recording."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .kinetics import ModelParams, State, make_rhs

MAX_SAMPLES = 100_000


class IntegrationError(RuntimeError):
    """The discrete solution left the admissible region (step too large, overflow)."""


@dataclass(frozen=True)
class SimulationConfig:
    initial: State
    h: float = 0.01
    t_end: float = 2000.0
    record_stride: int | None = None  # None: smallest stride keeping <= MAX_SAMPLES
    steady_tol: float = 1e-10
    biomass_floor: float = 1e-9
    clamp_eps: float = 1e-12
    stop_at_steady_state: bool = True

    def __post_init__(self):
        object.__setattr__(self, "initial", State(*map(float, self.initial)))
        for name in ("h", "t_end", "steady_tol", "biomass_floor", "clamp_eps"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride!r}")
        self.initial.check_nonnegative()

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.t_end / self.h - 1e-9))

    @property
    def stride(self) -> int:
        if self.record_stride is not None:
            return self.record_stride
        return max(1, math.ceil(self.n_steps / MAX_SAMPLES))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray  # (n,) hours
    states: np.ndarray  # (n, 4) columns X, B, s, P
    steady_state_reached: bool
    t_final: float

    def __len__(self):
        return len(self.times)

    @property
    def X(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def B(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def s(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def P(self) -> np.ndarray:
        return self.states[:, 3]

    @property
    def final(self) -> State:
        return State(*map(float, self.states[-1]))


_NAMES = State._fields


def integrate(config: SimulationConfig, params: ModelParams) -> Trajectory:
    """Integrate from ``config.initial`` with classical RK4 steps of size ``config.h``.

    Stops at ``t_end`` or, if enabled, as soon as both ``B < biomass_floor`` and
    ``max|rhs| < steady_tol``. Negative components above ``-clamp_eps`` are
    clamped to zero; anything more negative raises :class:`IntegrationError`.
    The final state is always recorded.
    """
    f = make_rhs(params)
    h = config.h
    n = config.n_steps
    stride = config.stride
    eps = config.clamp_eps
    floor = config.biomass_floor
    tol = config.steady_tol
    check_steady = config.stop_at_steady_state

    def steady(X, B, s, P):
        if B >= floor:
            return False
        return max(map(abs, f(X, B, s, P))) < tol

    X, B, s, P = config.initial
    times = [0.0]
    rows = [(X, B, s, P)]
    t = 0.0
    reached = check_steady and steady(X, B, s, P)
    i = 0
    while not reached and i < n:
        i += 1
        dt = h if i < n else config.t_end - (n - 1) * h
        hh = 0.5 * dt
        a = f(X, B, s, P)
        b = f(X + hh * a[0], B + hh * a[1], s + hh * a[2], P + hh * a[3])
        c = f(X + hh * b[0], B + hh * b[1], s + hh * b[2], P + hh * b[3])
        d = f(X + dt * c[0], B + dt * c[1], s + dt * c[2], P + dt * c[3])
        w = dt / 6.0
        X = X + w * (a[0] + 2.0 * b[0] + 2.0 * c[0] + d[0])
        B = B + w * (a[1] + 2.0 * b[1] + 2.0 * c[1] + d[1])
        s = s + w * (a[2] + 2.0 * b[2] + 2.0 * c[2] + d[2])
        P = P + w * (a[3] + 2.0 * b[3] + 2.0 * c[3] + d[3])
        t = config.t_end if i == n else i * h

        if X < 0 or B < 0 or s < 0 or P < 0 or not math.isfinite(X + B + s + P):
            X, B, s, P = _clamp((X, B, s, P), eps, t, params)

        reached = check_steady and steady(X, B, s, P)
        if i % stride == 0 or i == n or reached:
            times.append(t)
            rows.append((X, B, s, P))

    return Trajectory(
        times=np.array(times),
        states=np.array(rows, dtype=float).reshape(-1, 4),
        steady_state_reached=bool(reached),
        t_final=t,
    )


def _clamp(values, eps, t, params):
    out = []
    X, B = values[0], values[1]
    for name, v in zip(_NAMES, values):
        if not math.isfinite(v):
            raise IntegrationError(f"non-finite {name}={v!r} at t={t:g} h; step-size too large")
        if v < 0:
            if v <= -eps:
                if name == "s" and params.K_H * X < params.m_s * B:
                    # ds/dt at s=0 is K_H X - m_s B: the exact flow exits too
                    raise IntegrationError(
                        f"s={v:.3e} went negative at t={t:g} h: substrate exhausted while "
                        f"K_H*X={params.K_H * X:.3g} < m_s*B={params.m_s * B:.3g}, so the model "
                        "itself leaves the non-negative orthant"
                    )
                raise IntegrationError(f"step-size too large: {name}={v:.3e} went negative at t={t:g} h")
            v = 0.0
        out.append(v)
    return tuple(out)


def convergence_order(config: SimulationConfig, params: ModelParams, t_check: float) -> float:
    """Observed order from runs with steps h, h/2, h/4 compared at ``t_check``.

    Returns ``log2(|y_h - y_{h/2}| / |y_{h/2} - y_{h/4}|)`` in the max norm.
    """
    h = config.h
    if not 0 < t_check <= config.t_end:
        raise ValueError(f"t_check={t_check!r} must lie in (0, t_end={config.t_end!r}]")
    r = t_check / (4 * h)
    if abs(r - round(r)) > 1e-9 * max(1.0, r):
        raise ValueError(f"t_check={t_check!r} must be an exact multiple of 4*h={4 * h!r}")
    finals = []
    for k in range(3):
        cfg = replace(
            config,
            h=h / 2**k,
            t_end=t_check,
            stop_at_steady_state=False,
            record_stride=10**12,
        )
        finals.append(np.array(integrate(cfg, params).final))
    d1 = np.max(np.abs(finals[0] - finals[1]))
    d2 = np.max(np.abs(finals[1] - finals[2]))
    with np.errstate(divide="ignore", invalid="ignore"):
        order = np.log2(d1 / d2)
    if not np.isfinite(order) or d2 == 0:
        raise ValueError("solution differences vanish at machine precision; refine t_check or enlarge h")
    return float(order)


def rk4_path(
    f: Callable[[Sequence[float]], Sequence[float]],
    y0: Sequence[float],
    h: float,
    n_steps: int,
) -> np.ndarray:
    """Generic fixed-step RK4 for an autonomous system; returns all ``n_steps + 1`` states."""
    y = np.asarray(y0, dtype=float)
    out = np.empty((n_steps + 1, y.size))
    out[0] = y
    for i in range(1, n_steps + 1):
        k1 = np.asarray(f(y))
        k2 = np.asarray(f(y + 0.5 * h * k1))
        k3 = np.asarray(f(y + 0.5 * h * k2))
        k4 = np.asarray(f(y + h * k3))
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i] = y
    return out

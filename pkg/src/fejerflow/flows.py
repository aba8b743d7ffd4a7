"""Trajectory generation: fixed-step integration of the first- and
second-order systems, the forward-backward variants, and the Hadamard
semigroups built from their exponential formulas.

Integration is classical RK4 with a fixed step plus a Richardson global-error
estimate (the same scheme at half the step); verification tolerances derive
from that estimate, so adaptive stepping is deliberately avoided.  Dense
output is local cubic Hermite interpolation using stored derivatives.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .operators import (
    CocoerciveMap,
    ConvexFunction,
    MonotoneOperator,
    NonexpansiveMap,
    forward_backward_map,
)
from .space import SpaceDescriptor

__all__ = [
    "ParameterCurve",
    "IntegratorMeta",
    "Trajectory",
    "SemigroupPoint",
    "integrate_first_order",
    "integrate_second_order",
    "integrate_forward_backward",
    "gradient_flow_semigroup",
    "stojkovic_semigroup",
]


class IntegrationError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# parameter curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterCurve:
    """Time-dependent scalar parameter with declared bounds.

    Kinds: constant(c); affine(a, b) evaluating a*t + b; piecewise
    (breaks, values) right-continuous step function; table (ts, values)
    linear interpolation.
    """

    kind: str = "constant"
    c: float = 0.0
    a: float = 0.0
    b: float = 0.0
    breaks: tuple = ()
    values: tuple = ()
    lower: Optional[float] = None
    upper: Optional[float] = None

    def __call__(self, t: float) -> float:
        if self.kind == "constant":
            return self.c
        if self.kind == "affine":
            return self.a * t + self.b
        if self.kind == "piecewise":
            idx = int(np.searchsorted(self.breaks, t, side="right"))
            return self.values[min(idx, len(self.values) - 1)]
        if self.kind == "table":
            return float(np.interp(t, self.breaks, self.values))
        raise ValueError(f"unknown curve kind {self.kind!r}")

    @classmethod
    def constant(cls, c: float) -> "ParameterCurve":
        return cls(kind="constant", c=float(c), lower=float(c), upper=float(c))

    @classmethod
    def affine(cls, a: float, b: float, lower=None, upper=None) -> "ParameterCurve":
        return cls(kind="affine", a=float(a), b=float(b), lower=lower, upper=upper)

    @classmethod
    def piecewise(cls, breaks, values, lower=None, upper=None) -> "ParameterCurve":
        lo = min(values) if lower is None else lower
        hi = max(values) if upper is None else upper
        return cls(kind="piecewise", breaks=tuple(breaks), values=tuple(values),
                   lower=lo, upper=hi)

    @classmethod
    def table(cls, ts, values, lower=None, upper=None) -> "ParameterCurve":
        lo = min(values) if lower is None else lower
        hi = max(values) if upper is None else upper
        return cls(kind="table", breaks=tuple(ts), values=tuple(values),
                   lower=lo, upper=hi)

    @classmethod
    def from_spec(cls, spec) -> "ParameterCurve":
        if isinstance(spec, (int, float)):
            return cls.constant(spec)
        kind = spec["kind"]
        if kind == "constant":
            return cls.constant(spec["c"])
        if kind == "affine":
            return cls.affine(spec["a"], spec["b"], spec.get("lower"), spec.get("upper"))
        if kind == "piecewise":
            return cls.piecewise(spec["breaks"], spec["values"],
                                 spec.get("lower"), spec.get("upper"))
        if kind == "table":
            return cls.table(spec["ts"], spec["values"],
                             spec.get("lower"), spec.get("upper"))
        raise ValueError(f"unknown curve kind {kind!r}")

    def validate_bounds(self, ts: np.ndarray) -> None:
        vals = np.array([self(t) for t in ts])
        if self.lower is not None and vals.min() < self.lower - 1e-12:
            raise IntegrationError(
                f"declared lower bound {self.lower} violated: min {vals.min()}"
            )
        if self.upper is not None and vals.max() > self.upper + 1e-12:
            raise IntegrationError(
                f"declared upper bound {self.upper} violated: max {vals.max()}"
            )


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass
class IntegratorMeta:
    method: str
    step: float
    grid_step: float
    est_err: float
    richardson_err: float
    interp_slack: float

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "step": self.step,
            "grid_step": self.grid_step,
            "est_err": self.est_err,
            "richardson_err": self.richardson_err,
            "interp_slack": self.interp_slack,
        }


@dataclass
class Trajectory:
    """A time-sampled curve with dense output and a recorded error estimate."""

    space: SpaceDescriptor
    ts: np.ndarray
    xs: np.ndarray
    dxs: np.ndarray
    meta: IntegratorMeta
    vs: Optional[np.ndarray] = None
    dvs: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (np.diff(self.ts) > 0).all():
            raise IntegrationError("sample times must be strictly increasing")
        if not np.isfinite(self.meta.est_err):
            raise IntegrationError("error estimate must be finite")

    @classmethod
    def from_samples(cls, space: SpaceDescriptor, ts, xs, est_err: float,
                     method: str = "sampled") -> "Trajectory":
        """Trajectory from pointwise samples (e.g. semigroup evaluations);
        derivatives for dense output come from finite differences, so checks
        against it are sampled, not certified."""
        ts = np.asarray(ts, dtype=float)
        xs = np.asarray(xs, dtype=float)
        if xs.ndim == 1:
            xs = xs[:, None]
        dxs = np.gradient(xs, ts, axis=0)
        grid = float(np.diff(ts).max())
        meta = IntegratorMeta(method=method, step=grid, grid_step=grid,
                              est_err=max(est_err, 1e-15), richardson_err=0.0,
                              interp_slack=0.0)
        return cls(space=space, ts=ts, xs=xs, dxs=dxs, meta=meta)

    @property
    def horizon(self) -> float:
        return float(self.ts[-1])

    @property
    def est_err(self) -> float:
        return self.meta.est_err

    def _hermite(self, ys: np.ndarray, dys: np.ndarray, t: float) -> np.ndarray:
        idx = int(np.searchsorted(self.ts, t, side="right")) - 1
        idx = min(max(idx, 0), len(self.ts) - 2)
        t0, t1 = self.ts[idx], self.ts[idx + 1]
        h = t1 - t0
        s = (t - t0) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (h00 * ys[idx] + h10 * h * dys[idx]
                + h01 * ys[idx + 1] + h11 * h * dys[idx + 1])

    def eval(self, t: float) -> np.ndarray:
        """Dense output; interpolation error is folded into est_err."""
        if not 0.0 <= t <= self.horizon + 1e-12:
            raise IntegrationError(f"time {t} outside [0, {self.horizon}]")
        t = min(t, self.horizon)
        exact = np.searchsorted(self.ts, t)
        if exact < len(self.ts) and self.ts[exact] == t:
            return self.xs[exact].copy()
        return self._hermite(self.xs, self.dxs, t)

    def eval_velocity(self, t: float) -> np.ndarray:
        if self.vs is None:
            raise IntegrationError("trajectory carries no velocity")
        if not 0.0 <= t <= self.horizon + 1e-12:
            raise IntegrationError(f"time {t} outside [0, {self.horizon}]")
        t = min(t, self.horizon)
        exact = np.searchsorted(self.ts, t)
        if exact < len(self.ts) and self.ts[exact] == t:
            return self.vs[exact].copy()
        return self._hermite(self.vs, self.dvs, t)

    def lipschitz_estimate(self) -> float:
        """Max observed speed; grid slack for sup-approximations derives
        from it."""
        return float(np.linalg.norm(self.dxs, axis=1).max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        d = self.xs.shape[1]
        cols = ["t"] + [f"x{i}" for i in range(d)]
        if self.vs is not None:
            cols += [f"v{i}" for i in range(d)]
        buf.write(",".join(cols) + "\n")
        for i, t in enumerate(self.ts):
            row = [f"{t:.12g}"] + [f"{v:.12g}" for v in self.xs[i]]
            if self.vs is not None:
                row += [f"{v:.12g}" for v in self.vs[i]]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


# ---------------------------------------------------------------------------
# RK4 with Richardson error estimate
# ---------------------------------------------------------------------------


def _rk4_run(field: Callable[[float, np.ndarray], np.ndarray], y0: np.ndarray,
             horizon: float, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n_steps = int(round(horizon / h))
    if abs(n_steps * h - horizon) > 1e-9 * max(1.0, horizon):
        n_steps = math.ceil(horizon / h)
    ts = np.empty(n_steps + 1)
    ys = np.empty((n_steps + 1, y0.size))
    dys = np.empty_like(ys)
    t, y = 0.0, y0.astype(float).copy()
    for i in range(n_steps):
        ts[i] = t
        ys[i] = y
        k1 = field(t, y)
        dys[i] = k1
        k2 = field(t + h / 2, y + h / 2 * k1)
        k3 = field(t + h / 2, y + h / 2 * k2)
        k4 = field(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state at t={t + h}")
        t = (i + 1) * h
    ts[-1] = t
    ys[-1] = y
    dys[-1] = field(t, y)
    return ts, ys, dys


def _integrate(field, y0: np.ndarray, horizon: float, step: float,
               method: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, IntegratorMeta]:
    if step <= 0:
        raise IntegrationError("step must be positive")
    if horizon <= 0:
        raise IntegrationError("horizon must be positive")
    ts_c, ys_c, _ = _rk4_run(field, y0, horizon, step)
    ts_f, ys_f, dys_f = _rk4_run(field, y0, horizon, step / 2)
    shared = ys_f[::2]
    n = min(len(ys_c), len(shared))
    richardson = float(np.linalg.norm(ys_c[:n] - shared[:n], axis=1).max())
    # Hermite reconstruction of fine midpoints from the coarse subsamples
    # bounds the dense-output slack on the fine grid from above.
    mid = ys_f[1::2]
    interp = np.empty_like(mid)
    h = step
    for i in range(len(mid)):
        y0_, y1_ = shared[i], shared[min(i + 1, len(shared) - 1)]
        d0, d1 = dys_f[2 * i], dys_f[min(2 * i + 2, len(dys_f) - 1)]
        interp[i] = 0.5 * y0_ + 0.5 * y1_ + h / 8 * (d0 - d1)
    interp_slack = float(np.linalg.norm(interp - mid, axis=1).max())
    est = richardson + interp_slack
    meta = IntegratorMeta(method=method, step=step, grid_step=step / 2,
                          est_err=max(est, 1e-15), richardson_err=richardson,
                          interp_slack=interp_slack)
    return ts_f, ys_f, dys_f, meta


def integrate_first_order(T: NonexpansiveMap, lam: ParameterCurve, x0,
                          horizon: float, step: float,
                          space: Optional[SpaceDescriptor] = None) -> Trajectory:
    """Solve x'(t) = lambda(t) (T(x(t)) - x(t)) on [0, horizon]."""
    x0 = np.asarray(x0, dtype=float)
    if space is None:
        space = SpaceDescriptor(dimension=x0.size)
    if lam.lower is not None and lam.lower < -1e-12:
        raise IntegrationError("lambda must map into [0, 1]")
    if lam.upper is not None and lam.upper > 1.0 + 1e-12:
        raise IntegrationError("lambda must map into [0, 1]")

    def field(t, y):
        return lam(t) * (T(y) - y)

    ts, ys, dys, meta = _integrate(field, x0, horizon, step, "rk4/first_order")
    lam.validate_bounds(ts[:: max(1, len(ts) // 256)])
    return Trajectory(space=space, ts=ts, xs=ys, dxs=dys, meta=meta)


def integrate_second_order(B: CocoerciveMap, lam: ParameterCurve,
                           gam: ParameterCurve, u0, v0, horizon: float,
                           step: float, theta: Optional[float] = None,
                           space: Optional[SpaceDescriptor] = None) -> Trajectory:
    """Solve x''(t) + gamma(t) x'(t) + lambda(t) B(x(t)) = 0."""
    u0 = np.asarray(u0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    d = u0.size
    if space is None:
        space = SpaceDescriptor(dimension=d)
    if theta is not None:
        for t in np.linspace(0, horizon, 64):
            if gam(t) ** 2 / lam(t) < (1 + theta) / B.beta - 1e-9:
                raise IntegrationError(
                    f"parameter assumption gamma^2/lambda >= (1+theta)/beta fails at t={t}"
                )

    def field(t, y):
        x, v = y[:d], y[d:]
        return np.concatenate([v, -gam(t) * v - lam(t) * B(x)])

    y0 = np.concatenate([u0, v0])
    ts, ys, dys, meta = _integrate(field, y0, horizon, step, "rk4/second_order")
    return Trajectory(space=space, ts=ts, xs=ys[:, :d], dxs=dys[:, :d],
                      vs=ys[:, d:], dvs=dys[:, d:], meta=meta)


def integrate_forward_backward(order: str, A: MonotoneOperator, B: CocoerciveMap,
                               gamma: float, lam: ParameterCurve, x0,
                               horizon: float, step: float,
                               gam: Optional[ParameterCurve] = None,
                               v0=None, theta: Optional[float] = None,
                               space: Optional[SpaceDescriptor] = None) -> Trajectory:
    """Forward-backward flows: the first-order system driven by
    T = J_{gamma A} o (Id - gamma B), or its second-order variant
    x'' + gamma(t) x' + lambda(t) (x - T x) = 0."""
    if order not in ("first", "second"):
        raise ValueError("order is first|second")
    T = forward_backward_map(A, B, gamma)
    if order == "first":
        delta = min(1.0, B.beta / gamma) + 0.5
        if lam.upper is not None and lam.upper > delta + 1e-12:
            raise IntegrationError(f"lambda must map into [0, {delta}]")
        x0 = np.asarray(x0, dtype=float)
        if space is None:
            space = SpaceDescriptor(dimension=x0.size)

        def field(t, y):
            return lam(t) * (T(y) - y)

        ts, ys, dys, meta = _integrate(field, x0, horizon, step, "rk4/fb_first")
        return Trajectory(space=space, ts=ts, xs=ys, dxs=dys, meta=meta)

    if gam is None or v0 is None:
        raise IntegrationError("second-order forward-backward needs gam and v0")
    delta = (4 * B.beta - gamma) / (2 * B.beta)
    if theta is not None:
        for t in np.linspace(0, horizon, 64):
            if gam(t) ** 2 / lam(t) < 2 * (1 + theta) / delta - 1e-9:
                raise IntegrationError(
                    "parameter assumption gamma^2/lambda >= 2(1+theta)/delta fails"
                )
    residual = CocoerciveMap(fn=lambda x: x - T(x), beta=delta / 2,
                             name="fb_residual")
    return integrate_second_order(residual, lam, gam, x0, v0, horizon, step,
                                  space=space)


# ---------------------------------------------------------------------------
# Hadamard semigroups via exponential formulas
# ---------------------------------------------------------------------------


@dataclass
class SemigroupPoint:
    point: np.ndarray
    achieved_tol: float
    n_used: int
    converged: bool

    def to_json(self) -> dict:
        return {
            "point": [float(v) for v in self.point],
            "achieved_tol": self.achieved_tol,
            "n_used": self.n_used,
            "converged": self.converged,
        }


def gradient_flow_semigroup(phi: ConvexFunction, x, t: float,
                            n_start: int = 8, n_max: int = 2 ** 20,
                            tol: float = 1e-9,
                            space: Optional[SpaceDescriptor] = None) -> SemigroupPoint:
    """S_t(x) = lim_n (J_{t/n})^n (x): iterate the prox, doubling n until the
    Cauchy difference drops below tol.  No rate is assumed for the limit; the
    achieved tolerance is reported."""
    x = np.asarray(x, dtype=float)
    if t < 0:
        raise IntegrationError("semigroup time must be nonnegative")
    if t == 0:
        return SemigroupPoint(point=x.copy(), achieved_tol=0.0, n_used=0, converged=True)
    if space is None:
        space = SpaceDescriptor(dimension=x.size)

    def run(n: int) -> np.ndarray:
        y = x.copy()
        s = t / n
        for _ in range(n):
            y = phi.prox_point(s, y)
        return y

    n = max(1, n_start)
    prev = run(n)
    while n < n_max:
        n *= 2
        cur = run(n)
        diff = space.distance(prev, cur)
        if diff < tol:
            return SemigroupPoint(point=cur, achieved_tol=diff, n_used=n, converged=True)
        prev = cur
    return SemigroupPoint(point=prev, achieved_tol=math.inf, n_used=n, converged=False)


def stojkovic_semigroup(F: NonexpansiveMap, x, t: float,
                        n_start: int = 8, n_max: int = 2 ** 20,
                        tol: float = 1e-9,
                        space: Optional[SpaceDescriptor] = None) -> SemigroupPoint:
    """T_t(x) = lim_n (R_{t/n})^n (x) over the implicit resolvent of F; same
    doubling scheme, with the inner fixed-point tolerance budgeted tol/(2n)."""
    x = np.asarray(x, dtype=float)
    if t < 0:
        raise IntegrationError("semigroup time must be nonnegative")
    if t == 0:
        return SemigroupPoint(point=x.copy(), achieved_tol=0.0, n_used=0, converged=True)
    if space is None:
        space = SpaceDescriptor(dimension=x.size)
    fn = F.fn  # raw closure; the validated resolvent op is too slow for n ~ 2^19

    def run(n: int) -> np.ndarray:
        y = x.copy()
        s = t / n
        scale = 1.0 + s
        inner = tol / (2 * n)
        for _ in range(n):
            w = y
            for _ in range(10_000):
                wn = (y + s * np.asarray(fn(w), dtype=float)) / scale
                if float(np.linalg.norm(wn - w)) <= inner:
                    break
                w = wn
            else:
                raise IntegrationError("resolvent iteration failed to contract")
            y = wn
        return y

    n = max(1, n_start)
    prev = run(n)
    while n < n_max:
        n *= 2
        cur = run(n)
        diff = space.distance(prev, cur)
        if diff < tol:
            return SemigroupPoint(point=cur, achieved_tol=diff, n_used=n, converged=True)
        prev = cur
    return SemigroupPoint(point=prev, achieved_tol=math.inf, n_used=n, converged=False)

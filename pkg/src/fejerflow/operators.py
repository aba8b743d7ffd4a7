"""Operator and function library: nonexpansive maps, cocoercive maps,
maximally monotone operators (via resolvents), convex functions (via prox),
plus sampled property checkers.

Descriptors are immutable after construction; evaluation is pure.  Resolvents
and prox maps are supplied in closed form for the shipped zoo; a generic
numeric prox fallback reports its achieved residual instead of pretending to
be exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .space import SpaceDescriptor

__all__ = [
    "NonexpansiveMap",
    "CocoerciveMap",
    "MonotoneOperator",
    "ConvexFunction",
    "PropertyReport",
    "forward_backward_map",
    "stojkovic_resolvent",
    "check_nonexpansive",
    "check_cocoercive",
    "ball_samples",
    "make_nonexpansive",
    "make_cocoercive",
    "make_monotone",
    "make_convex_function",
]


class OperatorError(ValueError):
    pass


class IterationBudgetError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NonexpansiveMap:
    fn: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    contraction_factor: Optional[float] = None
    fixed_points: tuple = ()
    averagedness: Optional[float] = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    @classmethod
    def identity(cls) -> "NonexpansiveMap":
        return cls(fn=lambda x: x, name="identity", contraction_factor=1.0)

    @classmethod
    def scalar(cls, c: float) -> "NonexpansiveMap":
        if not 0.0 <= c <= 1.0:
            raise OperatorError("scalar contraction factor must be in [0, 1]")
        return cls(fn=lambda x: c * x, name=f"scalar({c})",
                   contraction_factor=c, fixed_points=((0.0,),) if c < 1 else ())

    @classmethod
    def negation(cls) -> "NonexpansiveMap":
        return cls(fn=lambda x: -x, name="negation",
                   contraction_factor=1.0, fixed_points=((0.0,),))

    @classmethod
    def affine(cls, matrix, offset) -> "NonexpansiveMap":
        matrix = np.asarray(matrix, dtype=float)
        offset = np.asarray(offset, dtype=float)
        norm = float(np.linalg.norm(matrix, 2))
        if norm > 1.0 + 1e-12:
            raise OperatorError(f"matrix spectral norm {norm} > 1 is expansive")
        return cls(fn=lambda x: matrix @ x + offset, name="affine",
                   contraction_factor=min(norm, 1.0))

    @classmethod
    def linear(cls, matrix) -> "NonexpansiveMap":
        return cls.affine(matrix, np.zeros(np.asarray(matrix).shape[0]))

    @classmethod
    def rotation(cls, angle_deg: float) -> "NonexpansiveMap":
        theta = math.radians(angle_deg)
        m = np.array([[math.cos(theta), -math.sin(theta)],
                      [math.sin(theta), math.cos(theta)]])
        return cls(fn=lambda x: m @ x, name=f"rotation({angle_deg})",
                   contraction_factor=1.0, fixed_points=((0.0, 0.0),))

    @classmethod
    def projection_ball(cls, center, radius: float) -> "NonexpansiveMap":
        center = np.asarray(center, dtype=float)
        if radius < 0:
            raise OperatorError("ball radius must be nonnegative")

        def fn(x):
            diff = x - center
            norm = np.linalg.norm(diff)
            if norm <= radius:
                return x
            return center + diff * (radius / norm)

        return cls(fn=fn, name="projection_ball", contraction_factor=1.0)

    @classmethod
    def compose(cls, maps: Sequence["NonexpansiveMap"]) -> "NonexpansiveMap":
        factors = [m.contraction_factor for m in maps]
        factor = None
        if all(f is not None for f in factors):
            factor = float(np.prod(factors))

        def fn(x):
            for m in reversed(maps):
                x = m(x)
            return x

        return cls(fn=fn, name="composition", contraction_factor=factor)


@dataclass(frozen=True)
class CocoerciveMap:
    fn: Callable[[np.ndarray], np.ndarray]
    beta: float
    name: str = "custom"
    zeros: tuple = ()

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    def __post_init__(self):
        if self.beta <= 0:
            raise OperatorError("cocoercivity constant must be positive")

    @classmethod
    def identity(cls) -> "CocoerciveMap":
        return cls(fn=lambda x: x, beta=1.0, name="identity", zeros=((0.0,),))

    @classmethod
    def zero(cls, beta: float = 1.0) -> "CocoerciveMap":
        return cls(fn=lambda x: np.zeros_like(x), beta=beta, name="zero")

    @classmethod
    def scaled_identity(cls, c: float) -> "CocoerciveMap":
        if c <= 0:
            raise OperatorError("scaled identity needs c > 0")
        return cls(fn=lambda x: c * x, beta=1.0 / c, name=f"scaled_identity({c})",
                   zeros=((0.0,),))

    @classmethod
    def linear_spd(cls, matrix) -> "CocoerciveMap":
        matrix = np.asarray(matrix, dtype=float)
        if not np.allclose(matrix, matrix.T):
            raise OperatorError("linear cocoercive map needs a symmetric matrix")
        eigs = np.linalg.eigvalsh(matrix)
        if eigs.min() < -1e-12:
            raise OperatorError("matrix must be positive semidefinite")
        lam_max = float(eigs.max())
        if lam_max == 0.0:
            return cls.zero()
        return cls(fn=lambda x: matrix @ x, beta=1.0 / lam_max, name="linear_spd")


@dataclass(frozen=True)
class MonotoneOperator:
    """Maximally monotone operator given by its resolvent J_{gamma A}."""

    resolvent: Callable[[float, np.ndarray], np.ndarray]
    name: str = "custom"
    zeros: tuple = ()

    def resolve(self, gamma: float, x: np.ndarray) -> np.ndarray:
        if gamma <= 0:
            raise OperatorError("resolvent parameter must be positive")
        return np.asarray(self.resolvent(gamma, np.asarray(x, dtype=float)), dtype=float)

    @classmethod
    def zero(cls) -> "MonotoneOperator":
        return cls(resolvent=lambda gamma, x: x, name="zero")

    @classmethod
    def scaled_identity(cls, c: float) -> "MonotoneOperator":
        if c < 0:
            raise OperatorError("monotone scaled identity needs c >= 0")
        return cls(resolvent=lambda gamma, x: x / (1.0 + gamma * c),
                   name=f"scaled_identity({c})", zeros=((0.0,),))

    @classmethod
    def indicator_point(cls, point) -> "MonotoneOperator":
        """Subdifferential of the indicator of {point}; resolvent == point."""
        point = np.asarray(point, dtype=float)
        return cls(resolvent=lambda gamma, x: point.copy(), name="indicator_point",
                   zeros=(tuple(point),))

    @classmethod
    def linear(cls, matrix) -> "MonotoneOperator":
        matrix = np.asarray(matrix, dtype=float)
        sym = (matrix + matrix.T) / 2
        if np.linalg.eigvalsh(sym).min() < -1e-12:
            raise OperatorError("linear operator must be monotone (PSD symmetric part)")
        eye = np.eye(matrix.shape[0])
        return cls(
            resolvent=lambda gamma, x: np.linalg.solve(eye + gamma * matrix, x),
            name="linear",
        )


@dataclass(frozen=True)
class ConvexFunction:
    value: Callable[[np.ndarray], float]
    prox: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    mu: Optional[float] = None
    minimizers: tuple = ()
    name: str = "custom"
    prox_tol: float = 1e-10

    def __call__(self, x: np.ndarray) -> float:
        return float(self.value(np.asarray(x, dtype=float)))

    def prox_point(self, t: float, x: np.ndarray) -> np.ndarray:
        """argmin_y value(y) + d^2(x, y) / (2 t); closed form when available,
        otherwise a numeric minimization whose residual is bounded by
        ``prox_tol`` in first-order terms."""
        if t <= 0:
            raise OperatorError("prox parameter must be positive")
        x = np.asarray(x, dtype=float)
        if self.prox is not None:
            return np.asarray(self.prox(t, x), dtype=float)
        from scipy.optimize import minimize

        objective = lambda y: self(y) + float(np.dot(y - x, y - x)) / (2.0 * t)
        res = minimize(objective, x, method="L-BFGS-B",
                       options={"gtol": self.prox_tol, "maxiter": 10_000})
        return np.asarray(res.x, dtype=float)

    @classmethod
    def quadratic(cls, scale: float = 1.0, center=None, dimension: int = 1) -> "ConvexFunction":
        """phi(x) = scale/2 * ||x - center||^2; prox_t(x) = (x + t s c)/(1 + t s)."""
        if scale <= 0:
            raise OperatorError("quadratic scale must be positive")
        c = np.zeros(dimension) if center is None else np.asarray(center, dtype=float)
        return cls(
            value=lambda x: 0.5 * scale * float(np.dot(x - c, x - c)),
            prox=lambda t, x: (x + t * scale * c) / (1.0 + t * scale),
            mu=0.0,
            minimizers=(tuple(c),),
            name=f"quadratic({scale})",
        )

    @classmethod
    def l1(cls, scale: float = 1.0, dimension: int = 1) -> "ConvexFunction":
        if scale <= 0:
            raise OperatorError("l1 scale must be positive")
        return cls(
            value=lambda x: scale * float(np.abs(x).sum()),
            prox=lambda t, x: np.sign(x) * np.maximum(np.abs(x) - t * scale, 0.0),
            mu=0.0,
            minimizers=(tuple(np.zeros(dimension)),),
            name=f"l1({scale})",
        )

    @classmethod
    def indicator_ball(cls, center, radius: float) -> "ConvexFunction":
        center = np.asarray(center, dtype=float)
        proj = NonexpansiveMap.projection_ball(center, radius)
        return cls(
            value=lambda x: 0.0 if np.linalg.norm(x - center) <= radius + 1e-12 else math.inf,
            prox=lambda t, x: proj(x),
            mu=0.0,
            minimizers=(tuple(center),),
            name="indicator_ball",
        )

    @classmethod
    def indicator_box(cls, lower, upper) -> "ConvexFunction":
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        return cls(
            value=lambda x: 0.0 if np.all((x >= lower - 1e-12) & (x <= upper + 1e-12)) else math.inf,
            prox=lambda t, x: np.clip(x, lower, upper),
            mu=0.0,
            name="indicator_box",
        )


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def forward_backward_map(A: MonotoneOperator, B: CocoerciveMap, gamma: float) -> NonexpansiveMap:
    """The composed map x -> J_{gamma A}(x - gamma B x).

    Valid for 0 < gamma < 2 beta; the returned map records the averagedness
    constant 1/delta with delta = min(1, beta/gamma) + 1/2.
    """
    if not 0.0 < gamma < 2.0 * B.beta:
        raise OperatorError(f"gamma must lie in (0, {2.0 * B.beta}), got {gamma}")
    delta = min(1.0, B.beta / gamma) + 0.5

    def fn(x):
        return A.resolve(gamma, x - gamma * B(x))

    return NonexpansiveMap(fn=fn, name="forward_backward", averagedness=1.0 / delta)


def stojkovic_resolvent(
    F: NonexpansiveMap,
    t: float,
    x: np.ndarray,
    tol: float = 1e-12,
    space: Optional[SpaceDescriptor] = None,
    max_iter: int = 1_000_000,
) -> np.ndarray:
    """Fixed point of G_{x,t}(y) = 1/(1+t) x (+) t/(1+t) F(y).

    G is a strict contraction with factor t/(1+t); plain iteration stops at
    residual d(y, G(y)) <= tol.
    """
    if t <= 0:
        raise OperatorError("resolvent parameter must be positive")
    x = np.asarray(x, dtype=float)
    if space is None:
        space = SpaceDescriptor(dimension=x.shape[0])
    lam = t / (1.0 + t)
    y = x.copy()
    for _ in range(max_iter):
        g = space.geodesic_point(x, F(y), lam)
        if space.distance(y, g) <= tol:
            return g
        y = g
    raise IterationBudgetError(
        f"resolvent iteration exceeded {max_iter} steps (contraction factor {lam})"
    )


# ---------------------------------------------------------------------------
# sampled property checkers
# ---------------------------------------------------------------------------


@dataclass
class PropertyReport:
    name: str
    n_samples: int
    violations: int
    max_ratio: float
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.violations == 0

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "n_samples": self.n_samples,
            "violations": self.violations,
            "max_ratio": self.max_ratio,
            "tol": self.tol,
            "passed": self.passed,
        }


def ball_samples(space: SpaceDescriptor, n: int, radius: float, center=None,
                 seed: int = 0) -> np.ndarray:
    """Deterministic quasi-random points in a closed ball (Halton sequence)."""
    center = space.zero() if center is None else space.point(center)
    halton = qmc.Halton(d=space.dimension, seed=seed)
    cube = 2.0 * halton.random(n) - 1.0
    norms = np.maximum(np.linalg.norm(cube, axis=1), 1.0)
    return center + radius * cube / norms[:, None]


def check_nonexpansive(map_: NonexpansiveMap, space: SpaceDescriptor,
                       n_samples: int = 64, radius: float = 2.0,
                       seed: int = 0, tol: float = 1e-9) -> PropertyReport:
    """Max over sampled pairs of ||Tx - Ty|| / ||x - y||; pass iff <= 1 + tol."""
    if n_samples < 1:
        raise OperatorError("need at least one sample")
    pts = ball_samples(space, 2 * n_samples, radius, seed=seed)
    xs, ys = pts[:n_samples], pts[n_samples:]
    max_ratio = 0.0
    violations = 0
    for x, y in zip(xs, ys):
        denom = space.distance(x, y)
        if denom < 1e-14:
            continue
        ratio = space.distance(map_(x), map_(y)) / denom
        max_ratio = max(max_ratio, ratio)
        if ratio > 1.0 + tol:
            violations += 1
    return PropertyReport(name=f"nonexpansive[{map_.name}]",
                          n_samples=n_samples, violations=violations,
                          max_ratio=max_ratio, tol=tol)


def check_cocoercive(B: CocoerciveMap, space: SpaceDescriptor,
                     n_samples: int = 64, radius: float = 2.0,
                     seed: int = 0, tol: float = 1e-9) -> PropertyReport:
    """Sampled check of beta ||Bx - By||^2 <= <x - y, Bx - By>."""
    if n_samples < 1:
        raise OperatorError("need at least one sample")
    pts = ball_samples(space, 2 * n_samples, radius, seed=seed)
    xs, ys = pts[:n_samples], pts[n_samples:]
    max_ratio = 0.0
    violations = 0
    for x, y in zip(xs, ys):
        db = B(x) - B(y)
        lhs = B.beta * float(np.dot(db, db))
        rhs = float(np.dot(x - y, db))
        if lhs <= tol and rhs <= tol:
            ratio = 1.0
        elif rhs <= tol:
            ratio = math.inf
        else:
            ratio = lhs / rhs
        max_ratio = max(max_ratio, ratio)
        if ratio > 1.0 + tol:
            violations += 1
    return PropertyReport(name=f"cocoercive[{B.name}]",
                          n_samples=n_samples, violations=violations,
                          max_ratio=max_ratio, tol=tol)


# ---------------------------------------------------------------------------
# config-addressable zoo
# ---------------------------------------------------------------------------


def make_nonexpansive(space: SpaceDescriptor, spec: dict) -> NonexpansiveMap:
    op = spec["op"]
    if op == "identity":
        return NonexpansiveMap.identity()
    if op == "scalar":
        return NonexpansiveMap.scalar(float(spec["c"]))
    if op == "negation":
        return NonexpansiveMap.negation()
    if op == "affine":
        return NonexpansiveMap.affine(spec["matrix"], spec["offset"])
    if op == "linear":
        return NonexpansiveMap.linear(spec["matrix"])
    if op == "rotation":
        return NonexpansiveMap.rotation(float(spec["angle_deg"]))
    if op == "projection_ball":
        return NonexpansiveMap.projection_ball(spec["center"], float(spec["radius"]))
    raise OperatorError(f"unknown nonexpansive op {op!r}")


def make_cocoercive(space: SpaceDescriptor, spec: dict) -> CocoerciveMap:
    op = spec["op"]
    if op == "identity":
        return CocoerciveMap.identity()
    if op == "zero":
        return CocoerciveMap.zero(float(spec.get("beta", 1.0)))
    if op == "scaled_identity":
        return CocoerciveMap.scaled_identity(float(spec["c"]))
    if op == "linear_spd":
        return CocoerciveMap.linear_spd(spec["matrix"])
    raise OperatorError(f"unknown cocoercive op {op!r}")


def make_monotone(space: SpaceDescriptor, spec: dict) -> MonotoneOperator:
    op = spec["op"]
    if op == "zero":
        return MonotoneOperator.zero()
    if op == "scaled_identity":
        return MonotoneOperator.scaled_identity(float(spec["c"]))
    if op == "indicator_point":
        return MonotoneOperator.indicator_point(spec["point"])
    if op == "linear":
        return MonotoneOperator.linear(spec["matrix"])
    raise OperatorError(f"unknown monotone op {op!r}")


def make_convex_function(space: SpaceDescriptor, spec: dict) -> ConvexFunction:
    op = spec["op"]
    if op == "quadratic" or op == "quad_prox":
        return ConvexFunction.quadratic(float(spec.get("scale", 1.0)),
                                        spec.get("center"), space.dimension)
    if op == "l1":
        return ConvexFunction.l1(float(spec.get("scale", 1.0)), space.dimension)
    if op == "indicator_ball":
        return ConvexFunction.indicator_ball(spec["center"], float(spec["radius"]))
    if op == "indicator_box":
        return ConvexFunction.indicator_box(spec["lower"], spec["upper"])
    raise OperatorError(f"unknown convex function op {op!r}")

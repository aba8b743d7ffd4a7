"""Empirical verification harness: checks the Fejer/regularity/metastability
claims and their certificates against simulated trajectories.

Tolerance discipline: every assertion uses tol = max(3 * est_err, grid slack)
where est_err comes from the integrator and the grid slack is certified from
the trajectory's Lipschitz estimate (slack = Lip * grid).  A claim is reported
violated only when the margin exceeds 3x the derived tolerance; beyond-horizon
outcomes are inconclusive, never violations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ._kernels import pairwise_max_distance, prefix_min_violation
from .counterfunctions import Counterfunction
from .exact import ExtendedNatural
from .flows import Trajectory
from .moduli import PerturbationPair, SecondOrderConstants
from .operators import CocoerciveMap, MonotoneOperator, NonexpansiveMap, forward_backward_map

__all__ = [
    "SolutionFunction",
    "VerificationReport",
    "NeedsLongerTrajectory",
    "oscillation",
    "verify_metastability",
    "verify_residual_metastability",
    "check_fejer",
    "check_asymptotic_regularity",
    "check_convergence_rate",
    "extract_approximate_zero",
    "check_b_convergence",
    "check_second_order_bounds",
    "check_mayer_inequality",
    "check_semigroup_fixed_point_bound",
]


class NeedsLongerTrajectory(RuntimeError):
    """The requested window reaches past the trajectory horizon."""


HOLDS = "holds"
HOLDS_TOL = "holds_within_tolerance"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"
INCONCLUSIVE_OVERFLOW = "inconclusive_overflow"


@dataclass
class SolutionFunction:
    """Nonnegative residual whose zero set encodes the solutions, restricted
    to a ball (infinite outside)."""

    kind: str
    residual: Callable[[np.ndarray], float]
    center: Optional[np.ndarray] = None
    radius: Optional[float] = None

    def __call__(self, z) -> float:
        z = np.asarray(z, dtype=float)
        if self.center is not None and self.radius is not None:
            if np.linalg.norm(z - self.center) > self.radius + 1e-9:
                return math.inf
        value = float(self.residual(z))
        if value < 0:
            raise ValueError("solution functions are nonnegative")
        return value

    @classmethod
    def fixed_point_residual(cls, T: NonexpansiveMap, center=None, radius=None):
        return cls(kind="fixed_point_residual",
                   residual=lambda z: float(np.linalg.norm(z - T(z))),
                   center=None if center is None else np.asarray(center, dtype=float),
                   radius=radius)

    @classmethod
    def operator_norm_residual(cls, B: CocoerciveMap, center=None, radius=None):
        return cls(kind="operator_norm_residual",
                   residual=lambda z: float(np.linalg.norm(B(z))),
                   center=None if center is None else np.asarray(center, dtype=float),
                   radius=radius)

    @classmethod
    def objective_gap(cls, phi, mu: float, center=None, radius=None):
        return cls(kind="objective_gap",
                   residual=lambda z: float(phi(z) - mu),
                   center=None if center is None else np.asarray(center, dtype=float),
                   radius=radius)


@dataclass
class VerificationReport:
    claim: str
    status: str
    margin: float = math.nan
    tolerance: float = math.nan
    witness: Optional[int] = None
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status in (HOLDS, HOLDS_TOL, INCONCLUSIVE, INCONCLUSIVE_OVERFLOW)

    def to_json(self) -> dict:
        data = {
            "claim": self.claim,
            "status": self.status,
            "margin": None if math.isnan(self.margin) else self.margin,
            "tolerance": None if math.isnan(self.tolerance) else self.tolerance,
            "witness": self.witness,
        }
        if self.details:
            data["details"] = self.details
        return data


def _status_from_margin(margin: float, tol: float) -> str:
    if margin <= 0:
        return HOLDS
    if margin <= 3 * tol:
        return HOLDS_TOL
    return VIOLATED


def _base_tolerance(traj: Trajectory, slack: float = 0.0) -> float:
    return max(3 * traj.est_err, slack)


# ---------------------------------------------------------------------------
# oscillation and metastability
# ---------------------------------------------------------------------------


def _window_times(traj: Trajectory, start: float, length: float, grid: float) -> np.ndarray:
    stop = start + length
    if stop > traj.horizon + 1e-9:
        raise NeedsLongerTrajectory(
            f"window [{start}, {stop}] exceeds horizon {traj.horizon}"
        )
    count = max(int(math.ceil(length / grid)), 1)
    return np.linspace(start, min(stop, traj.horizon), count + 1)


def _window_points(traj: Trajectory, times: np.ndarray) -> np.ndarray:
    return np.vstack([traj.eval(t) for t in times])


def oscillation(traj: Trajectory, n: int, f: Counterfunction,
                grid: float = 0.01) -> tuple[float, float]:
    """(sup over grid pairs of d(x(s), x(t)) on [n, n+f(n)], certified slack).

    The slack combines the Lipschitz bound for off-grid times with the dense
    output error folded into est_err.
    """
    length = f(n)
    if length == 0:
        return 0.0, 0.0
    times = _window_times(traj, float(n), float(length), grid)
    pts = _window_points(traj, times)
    sup = pairwise_max_distance(pts)
    slack = traj.lipschitz_estimate() * grid
    return sup, slack


def verify_metastability(traj: Trajectory, eps: float, f: Counterfunction,
                         certificate: ExtendedNatural,
                         grid: float = 0.01,
                         claim: str = "metastability",
                         residual: Optional[SolutionFunction] = None,
                         ) -> VerificationReport:
    """Scan n = 0, 1, 2, ... for the least witness with oscillation <= eps on
    [n, n+f(n)]; the certificate (when finite and within horizon reach) must
    dominate the witness.  ``residual`` optionally also requires
    F(x(t)) <= eps on the window (the uniform-continuity variants)."""
    horizon = traj.horizon
    witness = None
    osc_at_witness = None
    last_scanned = -1
    tol = _base_tolerance(traj)
    for n in range(0, int(horizon) + 1):
        if n + f(n) > horizon:
            break
        sup, slack = oscillation(traj, n, f, grid)
        tol = _base_tolerance(traj, slack)
        ok = sup + slack <= eps + tol
        if ok and residual is not None:
            times = _window_times(traj, float(n), float(f(n)), grid) \
                if f(n) > 0 else np.array([float(n)])
            worst = max(residual(traj.eval(t)) for t in times)
            ok = worst <= eps + tol
        last_scanned = n
        if ok:
            witness = n
            osc_at_witness = sup
            break
    details = {
        "certificate": certificate.to_json(),
        "eps": eps,
        "grid": grid,
    }
    if witness is None:
        cert_scannable = (not certificate.is_overflow
                          and last_scanned >= certificate.value)
        if cert_scannable:
            # every n <= certificate fits in the horizon and failed
            return VerificationReport(claim, VIOLATED, margin=math.inf,
                                      tolerance=tol, details=details)
        return VerificationReport(claim, INCONCLUSIVE, tolerance=tol,
                                  details={**details, "reason": "horizon too short"})
    details["oscillation_at_witness"] = osc_at_witness
    if certificate.is_overflow:
        return VerificationReport(claim, INCONCLUSIVE_OVERFLOW, margin=0.0,
                                  tolerance=tol, witness=witness, details=details)
    if witness <= certificate.value:
        details["certificate_slack"] = (certificate.value - witness)
        return VerificationReport(claim, HOLDS, margin=0.0, tolerance=tol,
                                  witness=witness, details=details)
    # an empirical witness exists but only beyond the certificate
    return VerificationReport(claim, VIOLATED, margin=float(witness - certificate.value),
                              tolerance=tol, witness=witness, details=details)


def verify_residual_metastability(traj: Trajectory,
                                  residual: Callable[[float], float],
                                  eps: float, f: Counterfunction,
                                  certificate: ExtendedNatural,
                                  grid: float = 0.01,
                                  claim: str = "residual_metastability",
                                  ) -> VerificationReport:
    """Least n with residual(t) <= eps for all t in [n, n+f(n)] (residual is
    a function of time along the trajectory); the certificate must dominate
    it (same semantics as verify_metastability)."""
    horizon = traj.horizon
    witness = None
    worst_at_witness = None
    last_scanned = -1
    slack = traj.lipschitz_estimate() * grid
    tol = _base_tolerance(traj, slack)
    for n in range(0, int(horizon) + 1):
        if n + f(n) > horizon:
            break
        times = _window_times(traj, float(n), float(f(n)), grid) \
            if f(n) > 0 else np.array([float(n)])
        worst = max(residual(float(t)) for t in times)
        last_scanned = n
        if worst <= eps + tol:
            witness = n
            worst_at_witness = worst
            break
    details = {"certificate": certificate.to_json(), "eps": eps, "grid": grid}
    if witness is None:
        if not certificate.is_overflow and last_scanned >= certificate.value:
            return VerificationReport(claim, VIOLATED, margin=math.inf,
                                      tolerance=tol, details=details)
        return VerificationReport(claim, INCONCLUSIVE, tolerance=tol,
                                  details={**details, "reason": "horizon too short"})
    details["residual_at_witness"] = worst_at_witness
    if certificate.is_overflow:
        return VerificationReport(claim, INCONCLUSIVE_OVERFLOW, margin=0.0,
                                  tolerance=tol, witness=witness, details=details)
    if witness <= certificate.value:
        details["certificate_slack"] = certificate.value - witness
        return VerificationReport(claim, HOLDS, margin=0.0, tolerance=tol,
                                  witness=witness, details=details)
    return VerificationReport(claim, VIOLATED, margin=float(witness - certificate.value),
                              tolerance=tol, witness=witness, details=details)


# ---------------------------------------------------------------------------
# quasi-Fejer monotonicity
# ---------------------------------------------------------------------------


def check_fejer(traj: Trajectory, F: SolutionFunction,
                level_points: Sequence[tuple[np.ndarray, float]],
                pair: PerturbationPair,
                chi: Callable[[float, int, int], float],
                eps_list: Sequence[float] = (0.5, 0.1),
                windows: Sequence[tuple[int, int]] = ((0, 4), (2, 8), (10, 16)),
                error_model: Optional[tuple[Callable, Callable]] = None,
                grid: float = 0.01,
                claim: str = "uniform_fejer") -> VerificationReport:
    """Check H(d(x(t), z)) <= G(d(x(s), z)) + e(s, t) + eps for z in the
    chi(eps, n, m) sublevel set, over sampled windows [n, n+m].

    ``level_points`` are (point, certified residual) pairs; points whose
    residual exceeds the guard are skipped (vacuous).  ``error_model`` is a
    pair (s_part, t_part) of callables on times for separable errors.
    """
    g_fn = lambda a: pair.G.apply(a).to_float()
    h_fn = lambda a: pair.H.apply(a).to_float()
    worst = -math.inf
    checked = 0
    slack = traj.lipschitz_estimate() * grid
    for n, m in windows:
        if n + m > traj.horizon:
            continue
        times = _window_times(traj, float(n), float(m), grid)
        pts = _window_points(traj, times)
        if error_model is None:
            s_err = np.zeros(len(times))
            t_err = np.zeros(len(times))
        else:
            s_part, t_part = error_model
            s_err = np.array([s_part(t) for t in times])
            t_err = np.array([t_part(t) for t in times])
        for eps in eps_list:
            guard = chi(eps, n, m)
            for z, res in level_points:
                if res > guard:
                    continue
                dists = np.linalg.norm(pts - np.asarray(z)[None, :], axis=1)
                h_vals = np.array([h_fn(d) for d in dists])
                g_vals = np.array([g_fn(d) for d in dists])
                viol = prefix_min_violation(h_vals, g_vals, s_err, t_err) - eps
                worst = max(worst, viol)
                checked += 1
    tol = _base_tolerance(traj, slack)
    if checked == 0:
        return VerificationReport(claim, INCONCLUSIVE, tolerance=tol,
                                  details={"reason": "no qualifying level points"})
    status = _status_from_margin(worst - tol, tol)
    return VerificationReport(claim, status, margin=worst, tolerance=tol,
                              details={"pairs_checked": checked})


# ---------------------------------------------------------------------------
# rates
# ---------------------------------------------------------------------------


def _sample_tail(traj: Trajectory, start: float, n_samples: int = 200) -> np.ndarray:
    return np.linspace(start, traj.horizon, n_samples)


def check_asymptotic_regularity(traj: Trajectory, residual: SolutionFunction,
                                rate: Callable[[float], float],
                                eps_list: Sequence[float],
                                claim: str = "asymptotic_regularity",
                                ) -> VerificationReport:
    """Assert residual(x(t)) <= eps for all sampled t >= rate(eps)."""
    tol = _base_tolerance(traj)
    worst = -math.inf
    checked = 0
    skipped = []
    for eps in eps_list:
        t0 = float(rate(eps))
        if t0 > traj.horizon:
            skipped.append(eps)
            continue
        for t in _sample_tail(traj, t0):
            worst = max(worst, residual(traj.eval(t)) - eps)
            checked += 1
    details = {"eps_list": list(eps_list), "skipped_beyond_horizon": skipped}
    if checked == 0:
        return VerificationReport(claim, INCONCLUSIVE, tolerance=tol, details=details)
    status = _status_from_margin(worst - tol, tol)
    return VerificationReport(claim, status, margin=worst, tolerance=tol, details=details)


def check_convergence_rate(traj: Trajectory,
                           target: Union[np.ndarray, Callable[[np.ndarray], float]],
                           rho: Callable[[float], float],
                           eps_list: Sequence[float],
                           claim: str = "convergence_rate") -> VerificationReport:
    """Assert dist(x(t), target) <= eps for all sampled t >= rho(eps)."""
    if callable(target):
        dist = target
    else:
        point = np.asarray(target, dtype=float)
        dist = lambda x: float(np.linalg.norm(x - point))
    tol = _base_tolerance(traj)
    worst = -math.inf
    checked = 0
    skipped = []
    for eps in eps_list:
        t0 = float(rho(eps))
        if t0 > traj.horizon:
            skipped.append(eps)
            continue
        for t in _sample_tail(traj, t0):
            worst = max(worst, dist(traj.eval(t)) - eps)
            checked += 1
    details = {"eps_list": list(eps_list), "skipped_beyond_horizon": skipped}
    if checked == 0:
        return VerificationReport(claim, INCONCLUSIVE, tolerance=tol, details=details)
    status = _status_from_margin(worst - tol, tol)
    return VerificationReport(claim, status, margin=worst, tolerance=tol, details=details)


# ---------------------------------------------------------------------------
# forward-backward extras
# ---------------------------------------------------------------------------


def extract_approximate_zero(x, A: MonotoneOperator, B: CocoerciveMap,
                             gamma: float, beta: float):
    """From any x, produce v = T(x) and w in (A+B)(v) with the certified bound
    ||w|| <= (1/gamma + 1/beta) ||x - T(x)||."""
    x = np.asarray(x, dtype=float)
    T = forward_backward_map(A, B, gamma)
    v = T(x)
    w = (x - v) / gamma + B(v) - B(x)
    bound = (1.0 / gamma + 1.0 / beta) * float(np.linalg.norm(x - v))
    return v, w, bound


def check_b_convergence(traj: Trajectory, B: CocoerciveMap, y,
                        psi: Callable[[float], float],
                        eps_list: Sequence[float],
                        claim: str = "b_convergence") -> VerificationReport:
    """Assert ||B(x(t)) - B(y)|| <= eps for sampled t >= psi(eps)."""
    y = np.asarray(y, dtype=float)
    by = B(y)
    tol = _base_tolerance(traj)
    worst = -math.inf
    checked = 0
    skipped = []
    for eps in eps_list:
        t0 = float(psi(eps))
        if t0 > traj.horizon:
            skipped.append(eps)
            continue
        for t in _sample_tail(traj, t0):
            worst = max(worst, float(np.linalg.norm(B(traj.eval(t)) - by)) - eps)
            checked += 1
    details = {"eps_list": list(eps_list), "skipped_beyond_horizon": skipped}
    if checked == 0:
        return VerificationReport(claim, INCONCLUSIVE, tolerance=tol, details=details)
    status = _status_from_margin(worst - tol, tol)
    return VerificationReport(claim, status, margin=worst, tolerance=tol, details=details)


# ---------------------------------------------------------------------------
# second-order bounds
# ---------------------------------------------------------------------------


def check_second_order_bounds(traj: Trajectory, consts: SecondOrderConstants,
                              z, B: CocoerciveMap,
                              claim: str = "second_order_bounds") -> VerificationReport:
    """Pointwise and quadrature boundedness checks for second-order
    trajectories.  Both L variants are evaluated; the report shows which
    pointwise derivative bound holds empirically."""
    if traj.vs is None:
        raise ValueError("second-order bounds need a trajectory with velocity")
    z = np.asarray(z, dtype=float)
    tol = _base_tolerance(traj)
    dist = np.linalg.norm(traj.xs - z[None, :], axis=1)
    speed = np.linalg.norm(traj.vs, axis=1)
    accel = np.linalg.norm(traj.dvs, axis=1)
    bnorm = np.linalg.norm(np.vstack([B(x) for x in traj.xs]), axis=1)
    K = consts.K.to_float()
    checks = {
        "dist_le_K": float(dist.max()) - K,
        "speed_le_L_mult": float(speed.max()) - consts.L_mult,
        "speed_le_L_div": float(speed.max()) - consts.L_div,
    }
    # quadrature estimates of the L2 norms on [0, horizon]
    l2 = lambda vals: math.sqrt(float(np.trapezoid(vals ** 2, traj.ts)))
    checks["speed_l2_le_a0"] = l2(speed) - consts.a0.to_float()
    checks["accel_l2_le_a1"] = l2(accel) - consts.a1.to_float()
    checks["bnorm_l2_le_a2"] = l2(bnorm) - consts.a2.to_float()
    l_failures = [k for k in ("speed_le_L_mult", "speed_le_L_div") if checks[k] > tol]
    core = {k: v for k, v in checks.items() if k not in l_failures}
    worst = max(core.values())
    status = _status_from_margin(worst - tol, tol)
    details = {"checks": checks, "l_variant_failing": l_failures,
               "l_mult": consts.L_mult, "l_div": consts.L_div}
    if len(l_failures) == 2:
        status = VIOLATED
        worst = max(checks.values())
    return VerificationReport(claim, status, margin=worst, tolerance=tol,
                              details=details)


# ---------------------------------------------------------------------------
# semigroup inequalities
# ---------------------------------------------------------------------------


def check_mayer_inequality(points: Sequence[tuple[float, np.ndarray]],
                           phi, zs: Sequence[np.ndarray], tol: float,
                           claim: str = "mayer_inequality") -> VerificationReport:
    """d^2(S_t x, z) <= d^2(S_s x, z) - 2 (t - s)(phi(S_t x) - phi(z)) for all
    sampled s <= t and reference points z; ``points`` are (t, S_t x) pairs."""
    worst = -math.inf
    pts = sorted(points, key=lambda p: p[0])
    for z in zs:
        z = np.asarray(z, dtype=float)
        phiz = float(phi(z))
        for i, (s, xs_) in enumerate(pts):
            ds2 = float(np.dot(xs_ - z, xs_ - z))
            for t, xt in pts[i:]:
                dt2 = float(np.dot(xt - z, xt - z))
                lhs = dt2 - (ds2 - 2 * (t - s) * (float(phi(xt)) - phiz))
                worst = max(worst, lhs)
    status = _status_from_margin(worst - tol, tol)
    return VerificationReport(claim, status, margin=worst, tolerance=tol)


def check_semigroup_fixed_point_bound(F: NonexpansiveMap,
                                      semigroup: Callable[[np.ndarray, float], np.ndarray],
                                      samples: Sequence[tuple[np.ndarray, float]],
                                      tol: float,
                                      claim: str = "fixed_point_bound",
                                      ) -> VerificationReport:
    """d(x, T_t(x)) <= d(x, F(x)) (e^{2t} - 1)/2 on the given (x, t) samples."""
    worst = -math.inf
    for x, t in samples:
        x = np.asarray(x, dtype=float)
        delta = float(np.linalg.norm(x - F(x)))
        lhs = float(np.linalg.norm(x - semigroup(x, t)))
        bound = delta * (math.exp(2 * t) - 1) / 2
        worst = max(worst, lhs - bound)
    status = _status_from_margin(worst - tol, tol)
    return VerificationReport(claim, status, margin=worst, tolerance=tol)

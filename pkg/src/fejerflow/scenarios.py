"""Builtin scenarios and the simulate -> certify -> verify pipelines.

A scenario is a declarative config (JSON-compatible, schema_version 1); the
registry ships one scenario per case-study family.  Each pipeline validates
operator contracts first, integrates or samples the flow, computes the
requested certificates exactly, and verifies every claim against the
trajectory with tolerances derived from the integrator error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import moduli
from .counterfunctions import Counterfunction
from .exact import ExtendedNatural, R
from .flows import (
    ParameterCurve,
    Trajectory,
    gradient_flow_semigroup,
    integrate_first_order,
    integrate_forward_backward,
    integrate_second_order,
    stojkovic_semigroup,
)
from .moduli import PerturbationPair, second_order_constants
from .operators import (
    CocoerciveMap,
    NonexpansiveMap,
    ball_samples,
    check_cocoercive,
    check_nonexpansive,
    forward_backward_map,
    make_cocoercive,
    make_convex_function,
    make_monotone,
    make_nonexpansive,
    stojkovic_resolvent,
)
from .space import SpaceDescriptor
from .verify import (
    HOLDS,
    HOLDS_TOL,
    VIOLATED,
    SolutionFunction,
    VerificationReport,
    check_asymptotic_regularity,
    check_b_convergence,
    check_convergence_rate,
    check_fejer,
    check_mayer_inequality,
    check_second_order_bounds,
    check_semigroup_fixed_point_bound,
    extract_approximate_zero,
    verify_metastability,
    verify_residual_metastability,
)

SCHEMA_VERSION = 1

__all__ = ["Scenario", "ScenarioOutcome", "builtin_scenarios", "run_scenario",
           "ConfigError", "SCHEMA_VERSION"]


class ConfigError(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    description: str
    config: dict


@dataclass
class ScenarioOutcome:
    name: str
    reports: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    trajectories: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r.status != VIOLATED for r in self.reports)

    def add(self, report: VerificationReport) -> VerificationReport:
        self.reports.append(report)
        return report

    def certify(self, theorem: str, inputs: dict, value, trace: Optional[dict] = None):
        entry = {"theorem": theorem, "inputs": inputs}
        if isinstance(value, ExtendedNatural):
            entry["value"] = value.to_json()
        else:
            entry["value"] = value
        if trace:
            entry["trace"] = {k: (list(v) if isinstance(v, list) else v)
                              for k, v in trace.items()}
        self.certificates.append(entry)
        return entry


def _report_simple(claim: str, margin: float, tol: float,
                   details: Optional[dict] = None) -> VerificationReport:
    if margin <= 0:
        status = HOLDS
    elif margin <= 3 * tol:
        status = HOLDS_TOL
    else:
        status = VIOLATED
    return VerificationReport(claim, status, margin=margin, tolerance=tol,
                              details=details or {})


def _counterfunctions(cfg: dict) -> list[Counterfunction]:
    return [Counterfunction.from_spec(s) for s in cfg.get(
        "counterfunctions",
        [{"kind": "constant", "k": 0}, {"kind": "constant", "k": 1},
         {"kind": "identity_plus", "k": 0}],
    )]


def _perturbed_level_points(y: np.ndarray, residual_fn, radii=(1e-3, 1e-2, 0.05)):
    """Perturb a known solution in coordinate directions; residuals of the
    perturbed points come from the closed-form operator evaluation."""
    pts = []
    d = y.shape[0]
    for r in radii:
        for i in range(d):
            z = y.copy()
            z[i] += r
            pts.append((z, float(residual_fn(z))))
    pts.append((y.copy(), float(residual_fn(y))))
    return pts


def _distance_monotone_report(traj: Trajectory, y: np.ndarray,
                              claim: str = "fejer_distance_monotone") -> VerificationReport:
    dist = np.linalg.norm(traj.xs - y[None, :], axis=1)
    increase = float(np.diff(dist).max()) if len(dist) > 1 else 0.0
    tol = 3 * traj.est_err
    return _report_simple(claim, increase, tol, {"max_increase": increase})


def _derivative_bound_report(traj: Trajectory, T: NonexpansiveMap,
                             claim: str = "derivative_residual_bound") -> VerificationReport:
    stride = max(1, len(traj.ts) // 512)
    worst = -math.inf
    for i in range(0, len(traj.ts), stride):
        x = traj.xs[i]
        worst = max(worst, float(np.linalg.norm(traj.dxs[i])
                                 - np.linalg.norm(T(x) - x)))
    tol = 3 * traj.est_err
    return _report_simple(claim, worst, tol)


# ---------------------------------------------------------------------------
# first-order pipeline
# ---------------------------------------------------------------------------


def _first_order_rates(b: float, lam: ParameterCurve, delta: float = 1.0):
    """(variant-1 rate via divergence modulus, variant-2 rate, tau_lo)."""
    lam_lo = lam.lower
    lam_hi = lam.upper
    cap = delta
    # inf over the declared range of lambda (cap - lambda); attained at an
    # endpoint since the map is concave
    tau_lo = min(lam_lo * (cap - lam_lo), lam_hi * (cap - lam_hi))
    if tau_lo <= 0:
        raise ConfigError("divergence modulus needs lambda (delta - lambda) "
                          "bounded away from zero")
    eta = lambda K: math.ceil(K / tau_lo)
    phi1 = lambda eps: eta(delta * b * b / (eps * eps))
    phi2 = lambda eps: 4 * b ** 4 * delta ** 2 / (lam_lo ** 2 * eps * eps)
    return phi1, phi2, tau_lo


def _run_first_order(cfg: dict, out: ScenarioOutcome) -> None:
    space = SpaceDescriptor.from_json(cfg["space"])
    T = make_nonexpansive(space, cfg["operators"]["T"])
    lam = ParameterCurve.from_spec(cfg["curves"]["lambda"])
    x0 = space.point(cfg["initial"]["x0"])
    y = space.point(cfg["solution"]["point"])
    b = float(cfg["solution"]["b"])
    if space.distance(x0, y) > b + 1e-12:
        raise ConfigError("declared b does not bound ||x0 - y||")

    prop = check_nonexpansive(T, space, n_samples=64, radius=2.0)
    out.add(VerificationReport("operator_nonexpansive",
                               HOLDS if prop.passed else VIOLATED,
                               margin=prop.max_ratio - 1.0, tolerance=prop.tol,
                               details=prop.to_json()))

    traj = integrate_first_order(T, lam, x0, cfg["horizon"], cfg["step"], space=space)
    out.trajectories["trajectory"] = traj

    out.add(_distance_monotone_report(traj, y))
    out.add(_derivative_bound_report(traj, T))

    residual = SolutionFunction.fixed_point_residual(T, center=y, radius=b)
    chi = lambda e, n, m: e / (4 * b * m)
    level_points = _perturbed_level_points(
        y, lambda z: float(np.linalg.norm(z - T(z))))
    out.add(check_fejer(traj, residual, level_points, PerturbationPair.squares(),
                        chi))

    phi1, phi2, tau_lo = _first_order_rates(b, lam)
    eps_reg = cfg.get("eps_regularity", [0.5, 0.1, 0.02])
    out.add(check_asymptotic_regularity(traj, residual, phi1, eps_reg,
                                        claim="asymptotic_regularity_divergence"))
    out.add(check_asymptotic_regularity(traj, residual, phi2, eps_reg,
                                        claim="asymptotic_regularity_witness"))
    inf_rate = lambda eps: b * b / (tau_lo * eps * eps)
    out.add(check_asymptotic_regularity(traj, residual, inf_rate, eps_reg,
                                        claim="asymptotic_regularity_inf_form"))

    long_cfg = cfg.get("long_check")
    if long_cfg:
        long_traj = integrate_first_order(T, lam, x0, long_cfg["horizon"],
                                          long_cfg["step"], space=space)
        out.trajectories["trajectory_long"] = long_traj
        out.add(check_asymptotic_regularity(long_traj, residual, phi1, eps_reg,
                                            claim="asymptotic_regularity_divergence_long"))
        out.add(check_asymptotic_regularity(long_traj, residual, phi2, eps_reg,
                                            claim="asymptotic_regularity_witness_long"))

    meta_cfg = cfg.get("metastability", {})
    eps = float(meta_cfg.get("eps", 1.0))
    lam_lo = lam.lower
    for fc in _counterfunctions(meta_cfg):
        trace: dict = {}
        cert = moduli.delta_first_order(space.dimension, Fraction(cfg["solution"]["b"]),
                                        {"lower_witness": Fraction(lam_lo)},
                                        Fraction(eps) / 4, fc, trace=trace)
        out.certify("delta_first_order",
                    {"d": space.dimension, "b": cfg["solution"]["b"],
                     "lambda_lo": lam_lo, "eps": eps / 4,
                     "f": fc.to_spec()}, cert, trace)
        out.add(verify_metastability(traj, eps, fc, cert, residual=residual,
                                     claim=f"metastability[f={fc.to_spec()}]"))

    reg = cfg.get("regularity")
    if reg:
        k = 1.0 - float(reg["c"])
        c_rate = moduli.fast_linear_rate(tau_lo, k, 2)
        out.certify("fast_linear_rate",
                    {"beta": tau_lo, "k": k, "p": 2}, c_rate)
        d0 = space.distance(x0, y)
        tol = 3 * traj.est_err
        worst = -math.inf
        for t in np.linspace(0.0, min(20.0, traj.horizon), 400):
            bound = c_rate ** math.floor(t) * d0 * (1 + 1e-6)
            worst = max(worst, space.distance(traj.eval(t), y) - bound)
        out.add(_report_simple("exponential_rate", worst, tol,
                               {"c": c_rate}))


# ---------------------------------------------------------------------------
# second-order pipeline
# ---------------------------------------------------------------------------


def _second_order_error_model(consts, traj: Trajectory):
    gam_lo = float(consts.gam_lo)
    lam_lo = float(consts.lam_lo)
    gam_hi = float(consts.gam_hi)
    beta = float(consts.beta)
    K = consts.K.to_float()

    def s_part(t):
        v = float(np.linalg.norm(traj.eval_velocity(t)))
        return 2 * beta / gam_lo * (gam_hi / lam_lo) * v * v + 2 / gam_lo * K * v

    def t_part(t):
        v = float(np.linalg.norm(traj.eval_velocity(t)))
        return 2 / gam_lo * K * v

    return s_part, t_part


def _run_second_order(cfg: dict, out: ScenarioOutcome) -> None:
    space = SpaceDescriptor.from_json(cfg["space"])
    B = make_cocoercive(space, cfg["operators"]["B"])
    if "beta_claim" in cfg:
        B = CocoerciveMap(fn=B.fn, beta=float(cfg["beta_claim"]),
                          name=B.name + "[claimed]", zeros=B.zeros)
    lam = ParameterCurve.from_spec(cfg["curves"]["lambda"])
    gam = ParameterCurve.from_spec(cfg["curves"]["gamma"])
    theta = float(cfg["theta"])
    u0 = space.point(cfg["initial"]["x0"])
    v0 = space.point(cfg["initial"]["v0"])
    z = space.point(cfg["solution"]["point"])

    prop = check_cocoercive(B, space, n_samples=64, radius=2.0)
    out.add(VerificationReport("operator_cocoercive",
                               HOLDS if prop.passed else VIOLATED,
                               margin=prop.max_ratio - 1.0, tolerance=prop.tol,
                               details=prop.to_json()))
    if not prop.passed:
        return

    traj = integrate_second_order(B, lam, gam, u0, v0, cfg["horizon"],
                                  cfg["step"], theta=theta, space=space)
    out.trajectories["trajectory"] = traj

    oracle = cfg.get("oracle")
    if oracle:
        worst = -math.inf
        for t in oracle.get("times", [0.5, 1.0, 2.0, 5.0]):
            value = sum(coef * math.exp(rate * t) for coef, rate in oracle["terms"])
            worst = max(worst, abs(traj.eval(t)[0] - value))
        out.add(_report_simple("closed_form_match", worst - 1e-6, 1e-6,
                               {"max_error": worst}))

    b_n, c_n, d_n = cfg["bounds"]["b"], cfg["bounds"]["c"], cfg["bounds"]["d"]
    consts = second_order_constants(
        b_n, c_n, d_n,
        Fraction(str(lam.lower)), Fraction(str(lam.upper)),
        Fraction(str(gam.lower)), Fraction(str(gam.upper)),
        Fraction(str(theta)), Fraction(str(B.beta)))
    out.certify("second_order_constants",
                {"b": b_n, "c": c_n, "d": d_n}, None,
                trace=consts.describe())
    out.add(check_second_order_bounds(traj, consts, z, B))

    meta_cfg = cfg.get("metastability", {})
    eps = float(meta_cfg.get("eps", 0.2))
    for fc in _counterfunctions(meta_cfg):
        cert = moduli.lambda_capital(consts, Fraction(str(eps)), fc)
        out.certify("lambda_capital", {"eps": eps, "f": fc.to_spec()}, cert)
        residual_t = lambda t: max(
            float(np.linalg.norm(traj.eval_velocity(t))),
            float(np.linalg.norm(B(traj.eval(t)))))
        out.add(verify_residual_metastability(
            traj, residual_t, eps, fc, cert,
            claim=f"lambda_metastability[f={fc.to_spec()}]"))

    residual = SolutionFunction.operator_norm_residual(
        B, center=z, radius=consts.K.to_float())
    K = consts.K.to_float()
    chi = lambda e, n, m: float(consts.gam_lo) * e / (m * float(consts.lam_hi) * 8 * K)
    level_points = _perturbed_level_points(z, lambda p: float(np.linalg.norm(B(p))))
    pair = PerturbationPair.squares(Fraction(consts.gam_hi, consts.gam_lo))
    out.add(check_fejer(traj, residual, level_points, pair, chi,
                        error_model=_second_order_error_model(consts, traj),
                        claim="uniform_quasi_fejer"))

    # the full Delta recursion; small eps overflows by design, so surface it
    cert_cfg = cfg.get("delta", {})
    eps_d = Fraction(str(cert_cfg.get("eps", eps)))
    fc = Counterfunction.from_spec(cert_cfg.get("counterfunction", 0))
    scaled = min(eps_d, Fraction(str(B.beta)) * eps_d / 2)
    trace: dict = {}
    cert = moduli.delta_second_order(consts, space.dimension, scaled, fc, trace=trace)
    out.certify("delta_second_order",
                {"eps": float(eps_d), "scaled_eps": float(scaled),
                 "f": fc.to_spec()}, cert, trace)
    out.add(verify_metastability(traj, float(eps_d), fc, cert,
                                 claim="metastability_second_order"))


# ---------------------------------------------------------------------------
# forward-backward pipelines
# ---------------------------------------------------------------------------


def _run_forward_backward_first(cfg: dict, out: ScenarioOutcome) -> None:
    space = SpaceDescriptor.from_json(cfg["space"])
    A = make_monotone(space, cfg["operators"]["A"])
    B = make_cocoercive(space, cfg["operators"]["B"])
    gamma = float(cfg["gamma"])
    lam = ParameterCurve.from_spec(cfg["curves"]["lambda"])
    x0 = space.point(cfg["initial"]["x0"])
    y = space.point(cfg["solution"]["point"])
    b = float(cfg["solution"]["b"])
    delta = min(1.0, B.beta / gamma) + 0.5

    T = forward_backward_map(A, B, gamma)
    traj = integrate_forward_backward("first", A, B, gamma, lam, x0,
                                      cfg["horizon"], cfg["step"], space=space)
    out.trajectories["trajectory"] = traj

    # structural reduction: the flow is the plain first-order system in T
    plain = integrate_first_order(NonexpansiveMap(fn=T.fn, name="fb"),
                                  lam, x0, cfg["horizon"], cfg["step"], space=space)
    dev = float(np.abs(traj.xs - plain.xs).max())
    out.add(_report_simple("fb_reduces_to_first_order", dev, 1e-14,
                           {"max_deviation": dev}))

    out.add(_distance_monotone_report(traj, y))

    # approximate zeros of A + B from arbitrary points
    pts = ball_samples(space, 100, radius=2.0, seed=7)
    worst = -math.inf
    min_margin = math.inf
    for x in pts:
        v, w, bound = extract_approximate_zero(x, A, B, gamma, B.beta)
        excess = float(np.linalg.norm(w)) - bound
        worst = max(worst, excess)
        min_margin = min(min_margin, -excess)
    out.add(_report_simple("approximate_zero_bound", worst, 1e-12,
                           {"min_margin": min_margin, "n_points": len(pts)}))

    # key inequality behind the B-convergence rate
    worst = -math.inf
    for zpt in pts[:32]:
        lhs = gamma * B.beta * float(np.linalg.norm(B(zpt) - B(y))) ** 2
        rhs = (1 + gamma / B.beta) * float(np.linalg.norm(zpt - y)) \
            * float(np.linalg.norm(T(zpt) - zpt))
        worst = max(worst, lhs - rhs)
    out.add(_report_simple("fb_b_inequality", worst, 1e-9))

    phi1, _, tau_lo = _first_order_rates(b, lam, delta=delta)
    psi = lambda e: phi1(gamma * B.beta * e * e / (3 * b))
    out.add(check_b_convergence(traj, B, y, psi, cfg.get("eps_b", [0.5, 0.1]),
                                claim="b_convergence_psi_rate"))

    residual = SolutionFunction.fixed_point_residual(T, center=y, radius=b)
    meta_cfg = cfg.get("metastability", {})
    eps = float(meta_cfg.get("eps", 0.5))
    eta_div = lambda K: (K / R(Fraction(str(tau_lo)))).ceil()
    for fc in _counterfunctions(meta_cfg)[:1]:
        trace: dict = {}
        cert = moduli.delta_first_order(
            space.dimension, Fraction(str(b)),
            {"divergence_modulus": eta_div,
             "averaged_delta": Fraction(str(delta))},
            Fraction(str(eps)) / 4, fc, trace=trace)
        out.certify("delta_first_order_fb",
                    {"d": space.dimension, "b": b, "delta": delta,
                     "eps": eps / 4, "f": fc.to_spec()}, cert, trace)
        out.add(verify_metastability(traj, eps, fc, cert, residual=residual,
                                     claim="metastability_fb"))


def _run_forward_backward_second(cfg: dict, out: ScenarioOutcome) -> None:
    space = SpaceDescriptor.from_json(cfg["space"])
    A = make_monotone(space, cfg["operators"]["A"])
    B = make_cocoercive(space, cfg["operators"]["B"])
    eta_step = float(cfg["eta"])
    lam = ParameterCurve.from_spec(cfg["curves"]["lambda"])
    gam = ParameterCurve.from_spec(cfg["curves"]["gamma"])
    theta = float(cfg["theta"])
    u0 = space.point(cfg["initial"]["x0"])
    v0 = space.point(cfg["initial"]["v0"])
    y = space.point(cfg["solution"]["point"])
    T = forward_backward_map(A, B, eta_step)

    traj = integrate_forward_backward("second", A, B, eta_step, lam, u0,
                                      cfg["horizon"], cfg["step"], gam=gam,
                                      v0=v0, theta=theta, space=space)
    out.trajectories["trajectory"] = traj

    b_n, c_n = cfg["bounds"]["b"], cfg["bounds"]["c"]
    d_res = cfg["bounds"]["d"]
    consts = second_order_constants(
        b_n, c_n, d_res,
        Fraction(str(lam.lower)), Fraction(str(lam.upper)),
        Fraction(str(gam.lower)), Fraction(str(gam.upper)),
        Fraction(str(theta)), Fraction(str(B.beta)))
    out.certify("second_order_constants_fb",
                {"b": b_n, "c": c_n, "d": d_res}, None, trace=consts.describe())

    K = consts.K
    meta_cfg = cfg.get("metastability", {})
    eps = float(meta_cfg.get("eps", 0.5))
    fc = _counterfunctions(meta_cfg)[0]
    arg = R(Fraction(str(eps))) * R(Fraction(str(eps))) \
        * R(Fraction(str(eta_step))) * R(Fraction(str(B.beta))) / (3 * K)
    cert = moduli.lambda_capital(consts, arg, fc)
    out.certify("sfb_b_rate", {"eps": eps, "f": fc.to_spec()}, cert)
    by = B(y)
    residual_t = lambda t: float(np.linalg.norm(B(traj.eval(t)) - by))
    out.add(verify_residual_metastability(traj, residual_t, eps, fc, cert,
                                          claim="b_convergence_metastability"))

    # strong monotonicity of B = Id gives the Theta bound
    if cfg.get("uniform_monotone_who") == "B":
        phi_fn = lambda e: e * e
        cert2 = moduli.fb_uniform_monotone_rate(
            "second", "B", phi_fn, Fraction(str(eps)),
            consts=consts, eta_step=Fraction(str(eta_step)), f=fc)
        out.certify("theta_uniform_monotone", {"eps": eps, "who": "B"}, cert2)
        dist_t = lambda t: float(np.linalg.norm(traj.eval(t) - y))
        out.add(verify_residual_metastability(traj, dist_t, eps, fc, cert2,
                                              claim="theta_metastability"))

    pts = ball_samples(space, 50, radius=1.0, seed=11)
    worst = -math.inf
    for x in pts:
        v, w, bound = extract_approximate_zero(x, A, B, eta_step, B.beta)
        worst = max(worst, float(np.linalg.norm(w)) - bound)
    out.add(_report_simple("approximate_zero_bound", worst, 1e-12))


# ---------------------------------------------------------------------------
# Hadamard semigroup pipelines
# ---------------------------------------------------------------------------


def _run_gradient_flow(cfg: dict, out: ScenarioOutcome) -> None:
    space = SpaceDescriptor.from_json(cfg["space"])
    phi = make_convex_function(space, cfg["operators"]["phi"])
    x0 = space.point(cfg["initial"]["x0"])
    y = space.point(cfg["solution"]["point"])
    b = float(cfg["solution"]["b"])
    sample_cfg = cfg.get("sampling", {})
    grid = float(sample_cfg.get("grid", 0.25))
    horizon = float(cfg["horizon"])
    point_tol = float(sample_cfg.get("tol", 1e-4))

    ts = np.arange(0.0, horizon + grid / 2, grid)
    samples = []
    achieved = 0.0
    for t in ts:
        res = gradient_flow_semigroup(phi, x0, float(t), tol=point_tol)
        samples.append(res.point)
        if res.converged:
            achieved = max(achieved, res.achieved_tol)
    traj = Trajectory.from_samples(space, ts, np.array(samples),
                                   est_err=max(achieved, point_tol),
                                   method="gradient_flow_semigroup")
    out.trajectories["trajectory"] = traj

    match = cfg.get("match")
    if match:
        t_ref = float(match.get("t", 1.0))
        res = gradient_flow_semigroup(phi, x0, t_ref, tol=float(match.get("tol", 1e-6)),
                                      n_max=int(match.get("n_max", 2 ** 20)))
        expected = math.exp(-t_ref) * x0
        err = float(np.linalg.norm(res.point - expected))
        out.add(_report_simple("exponential_formula_match", err - 1e-6, 1e-6,
                               {"error": err, "n_used": res.n_used}))

    # Mayer inequality on sampled (s, t, z)
    stride = max(1, len(ts) // 12)
    mayer_pts = [(float(ts[i]), traj.xs[i]) for i in range(0, len(ts), stride)]
    zs = [y, y + 0.5, x0, 0.5 * (x0 + y)] if space.dimension == 1 else [y, x0]
    out.add(check_mayer_inequality(mayer_pts, phi, zs,
                                   tol=3 * traj.est_err))

    # objective decay phi(S_t x) - mu <= b^2 / (2 t)
    worst = -math.inf
    for t in cfg.get("objective_times", [1.0, 2.0, 10.0]):
        gap = float(phi(traj.eval(t)) - phi.mu)
        worst = max(worst, gap - b * b / (2 * t))
    out.add(_report_simple("objective_rate", worst, 3 * traj.est_err))

    meta_cfg = cfg.get("metastability", {})
    eps = float(meta_cfg.get("eps", 1.0))
    gamma_tb = moduli.ball_modulus(space.dimension, Fraction(str(b)))
    for fc in _counterfunctions(meta_cfg)[:2]:
        trace: dict = {}
        cert = moduli.delta_gradient_flow(Fraction(str(b)), gamma_tb,
                                          Fraction(str(eps)), fc, trace=trace)
        out.certify("delta_gradient_flow", {"b": b, "eps": eps, "f": fc.to_spec()},
                    cert, trace)
        out.add(verify_metastability(traj, eps, fc, cert, grid=grid,
                                     claim=f"metastability[f={fc.to_spec()}]"))

    # regularity-based convergence: strongly convex objective
    reg = cfg.get("regularity")
    if reg:
        tau = moduli.regularity_modulus(reg["kind"], **{k: v for k, v in reg.items()
                                                        if k != "kind"})
        rho = lambda e: math.ceil(b * b / tau(e).to_float()) + 1
        out.add(check_convergence_rate(traj, y, rho, cfg.get("eps_rho", [0.5, 0.25]),
                                       claim="regularity_convergence_rate"))


def _run_stojkovic(cfg: dict, out: ScenarioOutcome) -> None:
    space = SpaceDescriptor.from_json(cfg["space"])
    F = make_nonexpansive(space, cfg["operators"]["F"])
    x0 = space.point(cfg["initial"]["x0"])
    y = space.point(cfg["solution"]["point"])
    b = float(cfg["solution"]["b"])
    sample_cfg = cfg.get("sampling", {})
    grid = float(sample_cfg.get("grid", 0.25))
    horizon = float(cfg["horizon"])
    point_tol = float(sample_cfg.get("tol", 1e-3))

    ts = np.arange(0.0, horizon + grid / 2, grid)
    samples = []
    achieved = 0.0
    for t in ts:
        res = stojkovic_semigroup(F, x0, float(t), tol=point_tol)
        samples.append(res.point)
        if res.converged:
            achieved = max(achieved, res.achieved_tol)
    traj = Trajectory.from_samples(space, ts, np.array(samples),
                                   est_err=max(achieved, point_tol),
                                   method="stojkovic_semigroup")
    out.trajectories["trajectory"] = traj

    match = cfg.get("match")
    if match:
        t_ref = float(match.get("t", 1.0))
        res = stojkovic_semigroup(F, x0, t_ref, tol=float(match.get("tol", 1e-6)),
                                  n_max=int(match.get("n_max", 2 ** 20)))
        expected = math.exp(-2 * t_ref) * x0
        err = float(np.linalg.norm(res.point - expected))
        out.add(_report_simple("exponential_formula_match", err - 1e-6, 1e-6,
                               {"error": err, "n_used": res.n_used}))

    # resolvent inequality d(z, R_lam z) <= lam d(z, F z) on samples
    worst = -math.inf
    for zval in sample_cfg.get("resolvent_points", [[0.5], [-0.3], [1.0]]):
        z = space.point(zval if isinstance(zval, list) else [zval])
        for lam_t in (0.25, 1.0, 3.0):
            rz = stojkovic_resolvent(F, lam_t, z, tol=1e-12, space=space)
            worst = max(worst,
                        space.distance(z, rz) - lam_t * space.distance(z, F(z)))
    out.add(_report_simple("resolvent_inequality", worst, 1e-9))

    # fixed-point lemma d(x, T_t x) <= d(x, Fx) (e^{2t}-1)/2
    fp_samples = [(space.point(p), float(t))
                  for p, t in cfg.get("fixed_point_samples",
                                      [([0.5], 0.5), ([-0.25], 1.0), ([1.0], 1.5)])]
    semigroup = lambda x, t: stojkovic_semigroup(F, x, t, tol=1e-4).point
    out.add(check_semigroup_fixed_point_bound(F, semigroup, fp_samples,
                                              tol=3e-4))

    gamma_tb = moduli.ball_modulus(space.dimension, Fraction(str(b)))
    meta_cfg = cfg.get("metastability", {})
    eps = float(meta_cfg.get("eps", 1.0))
    for fc in _counterfunctions(meta_cfg)[:1]:
        trace: dict = {}
        cert = moduli.delta_stojkovic(Fraction(str(b)), gamma_tb,
                                      Fraction(str(eps)), fc, trace=trace)
        out.certify("delta_stojkovic", {"b": b, "eps": eps, "f": fc.to_spec()},
                    cert, trace)
        out.add(verify_metastability(traj, eps, fc, cert, grid=grid,
                                     claim=f"metastability[f={fc.to_spec()}]"))

    # the tower overflows quickly: surface the sentinel, not a failure
    ov_cfg = cfg.get("overflow_probe", {"eps": "1/1000",
                                        "counterfunction": {"kind": "identity_plus", "k": 0}})
    fc_ov = Counterfunction.from_spec(ov_cfg["counterfunction"])
    cert_ov = moduli.delta_stojkovic(Fraction(str(b)), gamma_tb,
                                     Fraction(ov_cfg["eps"]), fc_ov)
    out.certify("delta_stojkovic_overflow_probe",
                {"b": b, "eps": ov_cfg["eps"], "f": fc_ov.to_spec()}, cert_ov)
    out.add(verify_metastability(traj, float(Fraction(ov_cfg["eps"])), fc_ov,
                                 cert_ov, grid=grid,
                                 claim="metastability_overflow_probe"))


def _run_property_check(cfg: dict, out: ScenarioOutcome) -> None:
    """Pure operator-contract scenario (used for negative tests)."""
    space = SpaceDescriptor.from_json(cfg["space"])
    if "B" in cfg["operators"]:
        B = make_cocoercive(space, cfg["operators"]["B"])
        if "beta_claim" in cfg:
            B = CocoerciveMap(fn=B.fn, beta=float(cfg["beta_claim"]),
                              name=B.name + "[claimed]", zeros=B.zeros)
        prop = check_cocoercive(B, space, n_samples=64, radius=2.0)
        out.add(VerificationReport("operator_cocoercive",
                                   HOLDS if prop.passed else VIOLATED,
                                   margin=prop.max_ratio - 1.0,
                                   tolerance=prop.tol, details=prop.to_json()))
    if "T" in cfg["operators"]:
        T = make_nonexpansive(space, cfg["operators"]["T"])
        prop = check_nonexpansive(T, space, n_samples=64, radius=2.0)
        out.add(VerificationReport("operator_nonexpansive",
                                   HOLDS if prop.passed else VIOLATED,
                                   margin=prop.max_ratio - 1.0,
                                   tolerance=prop.tol, details=prop.to_json()))


_PIPELINES: dict[str, Callable[[dict, ScenarioOutcome], None]] = {
    "first_order": _run_first_order,
    "second_order": _run_second_order,
    "forward_backward_first": _run_forward_backward_first,
    "forward_backward_second": _run_forward_backward_second,
    "gradient_flow": _run_gradient_flow,
    "stojkovic": _run_stojkovic,
    "property_check": _run_property_check,
}


def run_scenario(config: dict) -> ScenarioOutcome:
    if config.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"config schema_version must be {SCHEMA_VERSION}")
    kind = config.get("kind")
    if kind not in _PIPELINES:
        raise ConfigError(f"unknown scenario kind {kind!r}")
    for key in ("name", "space"):
        if key not in config:
            raise ConfigError(f"config missing required key {key!r}")
    out = ScenarioOutcome(name=config["name"])
    _PIPELINES[kind](config, out)
    return out


# ---------------------------------------------------------------------------
# builtin registry
# ---------------------------------------------------------------------------


def _first_order_config(name: str, dimension: int, x0) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "kind": "first_order",
        "space": {"kind": "euclidean", "dimension": dimension},
        "operators": {"T": {"op": "scalar", "c": 0.5}},
        "curves": {"lambda": {"kind": "constant", "c": 0.5}},
        "initial": {"x0": x0},
        "solution": {"point": [0.0] * dimension, "b": 1},
        "horizon": 40.0,
        "step": 1e-3,
        "eps_regularity": [0.5, 0.1, 0.02],
        "long_check": {"horizon": 40001.0, "step": 0.5},
        "metastability": {
            "eps": 1.0,
            "counterfunctions": [
                {"kind": "constant", "k": 0},
                {"kind": "constant", "k": 1},
                {"kind": "identity_plus", "k": 0},
            ],
        },
        "regularity": {"kind": "quasi_contraction", "c": 0.5},
    }


def builtin_scenarios() -> dict[str, Scenario]:
    registry = {}

    def add(name, description, config):
        registry[name] = Scenario(name=name, description=description, config=config)

    add("first_order_contraction_1d",
        "first-order flow over a 0.5-contraction in R^1: Fejer, regularity "
        "rates, metastability certificates, exponential rate",
        _first_order_config("first_order_contraction_1d", 1, [1.0]))

    add("first_order_contraction_2d",
        "same system in R^2",
        _first_order_config("first_order_contraction_2d", 2, [0.6, 0.8]))

    add("second_order_linear",
        "second-order flow x'' + 3x' + 2x = 0 over B = Id: closed form, "
        "boundedness constants (both L variants), Lambda metastability",
        {
            "schema_version": SCHEMA_VERSION,
            "name": "second_order_linear",
            "kind": "second_order",
            "space": {"kind": "euclidean", "dimension": 1},
            "operators": {"B": {"op": "identity"}},
            "curves": {"lambda": {"kind": "constant", "c": 2.0},
                       "gamma": {"kind": "constant", "c": 3.0}},
            "theta": 3.5,
            "initial": {"x0": [1.0], "v0": [0.0]},
            "solution": {"point": [0.0]},
            "bounds": {"b": 1, "c": 0, "d": 1},
            "horizon": 30.0,
            "step": 1e-3,
            "oracle": {"terms": [[2.0, -1.0], [-1.0, -2.0]],
                       "times": [0.5, 1.0, 2.0, 5.0]},
            "metastability": {"eps": 0.2,
                              "counterfunctions": [{"kind": "constant", "k": 0}]},
            "delta": {"eps": 1.0, "counterfunction": {"kind": "constant", "k": 0}},
        })

    add("forward_backward_first_order",
        "first-order forward-backward with A = 0, B = Id, gamma = 1: "
        "approximate zeros, psi-rate for B(x(t)), metastability",
        {
            "schema_version": SCHEMA_VERSION,
            "name": "forward_backward_first_order",
            "kind": "forward_backward_first",
            "space": {"kind": "euclidean", "dimension": 1},
            "operators": {"A": {"op": "zero"}, "B": {"op": "identity"}},
            "gamma": 1.0,
            "curves": {"lambda": {"kind": "constant", "c": 0.5}},
            "initial": {"x0": [0.1]},
            "solution": {"point": [0.0], "b": 0.1},
            "horizon": 40.0,
            "step": 1e-3,
            "eps_b": [0.5, 0.1],
            "metastability": {"eps": 0.5,
                              "counterfunctions": [{"kind": "constant", "k": 1}]},
        })

    add("forward_backward_second_order",
        "second-order forward-backward with A = 0, B = Id, eta = 1: "
        "B-convergence via Lambda windows, Theta under strong monotonicity",
        {
            "schema_version": SCHEMA_VERSION,
            "name": "forward_backward_second_order",
            "kind": "forward_backward_second",
            "space": {"kind": "euclidean", "dimension": 1},
            "operators": {"A": {"op": "zero"}, "B": {"op": "identity"}},
            "eta": 1.0,
            "curves": {"lambda": {"kind": "constant", "c": 1.0},
                       "gamma": {"kind": "constant", "c": 3.0}},
            "theta": 0.5,
            "initial": {"x0": [0.5], "v0": [0.0]},
            "solution": {"point": [0.0]},
            "bounds": {"b": 1, "c": 0, "d": 1},
            "horizon": 30.0,
            "step": 1e-3,
            "uniform_monotone_who": "B",
            "metastability": {"eps": 0.5,
                              "counterfunctions": [{"kind": "constant", "k": 0}]},
        })

    add("gradient_flow_quadratic",
        "gradient-flow semigroup of phi = ||x||^2/2 via the exponential "
        "formula: Mayer inequality, objective rate, Delta certificate",
        {
            "schema_version": SCHEMA_VERSION,
            "name": "gradient_flow_quadratic",
            "kind": "gradient_flow",
            "space": {"kind": "euclidean", "dimension": 1},
            "operators": {"phi": {"op": "quadratic", "scale": 1.0}},
            "initial": {"x0": [1.0]},
            "solution": {"point": [0.0], "b": 1},
            "horizon": 30.0,
            "sampling": {"grid": 0.25, "tol": 1e-4},
            "match": {"t": 1.0, "tol": 1e-6, "n_max": 1048576},
            "objective_times": [1.0, 2.0, 10.0],
            "metastability": {"eps": 1.0,
                              "counterfunctions": [{"kind": "constant", "k": 0},
                                                   {"kind": "constant", "k": 2}]},
            "regularity": {"kind": "strongly_quasiconvex", "rho": 1},
            "eps_rho": [0.5, 0.25],
        })

    add("stojkovic_negation",
        "semigroup of the nonexpansive map F = -Id via implicit resolvents: "
        "exponential formula, fixed-point lemma, tower certificate + overflow",
        {
            "schema_version": SCHEMA_VERSION,
            "name": "stojkovic_negation",
            "kind": "stojkovic",
            "space": {"kind": "euclidean", "dimension": 1},
            "operators": {"F": {"op": "negation"}},
            "initial": {"x0": [1.0]},
            "solution": {"point": [0.0], "b": 1},
            "horizon": 20.0,
            "sampling": {"grid": 0.25, "tol": 1e-3},
            "match": {"t": 1.0, "tol": 1e-6, "n_max": 1048576},
            "fixed_point_samples": [[[0.5], 0.5], [[-0.25], 1.0], [[1.0], 1.5]],
            "metastability": {"eps": 1.0,
                              "counterfunctions": [{"kind": "constant", "k": 0}]},
            "overflow_probe": {"eps": "1/1000",
                               "counterfunction": {"kind": "identity_plus", "k": 0}},
        })

    add("negative_wrong_beta",
        "deliberately wrong cocoercivity claim (beta = 2 for B = Id): the "
        "sampled checker must report a violation",
        {
            "schema_version": SCHEMA_VERSION,
            "name": "negative_wrong_beta",
            "kind": "property_check",
            "space": {"kind": "euclidean", "dimension": 1},
            "operators": {"B": {"op": "identity"}},
            "beta_claim": 2.0,
        })

    return registry

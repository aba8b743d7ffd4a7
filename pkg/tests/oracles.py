"""Independent straight-line reimplementations of the certificate formulas.

These are deliberately separate code paths from the package: rationals go
through ``fractions`` + ``math.ceil`` directly, and irrational subterms
(square roots, exponentials, fractional powers) go through mpmath interval
arithmetic instead of the package's enclosure machinery.  Agreement between
the two routes is what the formula-fidelity acceptance criterion checks.
"""

from __future__ import annotations

import math
from fractions import Fraction

from mpmath import iv, mp

iv.prec = 256
mp.prec = 256


def iv_ceil(x) -> int:
    """Exact ceiling of an mpmath interval known to determine it."""
    ca = int(mp.ceil(mp.mpf(x.a)))
    cb = int(mp.ceil(mp.mpf(x.b)))
    if ca != cb:
        raise AssertionError(f"interval ceiling undetermined: {x}")
    return ca


def frac_ceil(q: Fraction) -> int:
    return math.ceil(q)


def iterate_tilde_literal(f, count: int, floor_value: int = 0) -> int:
    value = 0
    for _ in range(count):
        value += max(f(value), floor_value)
    return value


# ---------------------------------------------------------------------------
# differential-inequality lemmas
# ---------------------------------------------------------------------------


def aas1(b: Fraction, c: Fraction, Bnorm: Fraction, eps: Fraction, f) -> int:
    omega = frac_ceil(2 * Bnorm / eps) * frac_ceil((c + Bnorm - b) / eps)
    return iterate_tilde_literal(f, omega)


def aas2(c: Fraction, A: Fraction, Bnorm: Fraction, p: Fraction, r, eps: Fraction, f) -> int:
    q = 1 + p if r is None else 1 + p * (1 - Fraction(1) / r)
    if q.denominator == 1:
        qi = int(q)
        two_q = Fraction(2) ** qi
        denom = eps ** qi * (two_q - 1)
        a_pow = A ** (qi - 1)
        first = frac_ceil(2 * two_q * q * a_pow * Bnorm / denom)
        second = frac_ceil(two_q * (c ** qi + q * a_pow * Bnorm) / denom)
    else:
        qv = iv.mpf(q.numerator) / q.denominator
        two_q = iv.mpf(2) ** qv
        denom = (iv.mpf(eps.numerator) / eps.denominator) ** qv * (two_q - 1)
        a_pow = (iv.mpf(A.numerator) / A.denominator) ** (qv - 1)
        bv = iv.mpf(Bnorm.numerator) / Bnorm.denominator
        cv = iv.mpf(c.numerator) / c.denominator
        first = iv_ceil(2 * two_q * qv * a_pow * bv / denom)
        second = iv_ceil(two_q * (cv ** qv + qv * a_pow * bv) / denom)
    varpi = first * second
    if q.denominator == 1:
        floor_value = frac_ceil((3 * A / eps) ** int(p)) if p.denominator == 1 \
            else iv_ceil((3 * iv.mpf(A.numerator) / A.denominator
                          / (iv.mpf(eps.numerator) / eps.denominator))
                         ** (iv.mpf(p.numerator) / p.denominator))
    else:
        floor_value = iv_ceil((3 * iv.mpf(A.numerator) / A.denominator
                               / (iv.mpf(eps.numerator) / eps.denominator))
                              ** (iv.mpf(p.numerator) / p.denominator))
    return iterate_tilde_literal(f, varpi, floor_value)


# ---------------------------------------------------------------------------
# compactness modulus for balls
# ---------------------------------------------------------------------------


def ball_modulus(d: int, b: Fraction, eps: Fraction) -> int:
    inner = frac_ceil(1 / eps)
    base = iv_ceil((2 * (inner + 1) * b.numerator * iv.sqrt(d)) / b.denominator) \
        if b != 0 else 0
    return base ** d


def ball_modulus_at(d: int, b: Fraction, eps_iv) -> int:
    """Ball modulus at an interval-valued epsilon (for gradient-flow P)."""
    inner = iv_ceil(1 / eps_iv)
    if b == 0:
        return 0
    base = iv_ceil(2 * (inner + 1) * iv.sqrt(d) * b.numerator / b.denominator)
    return base ** d


# ---------------------------------------------------------------------------
# regularity-based rates
# ---------------------------------------------------------------------------


def fast_rate(beta: float, k: float, p: float) -> float:
    return (1.0 + beta * k ** p) ** (-1.0 / p)


def rho_regular(a: Fraction, power: int, tau_kind: str, tau_coef: Fraction,
                eta_const, eps: Fraction) -> int:
    """rho for phi(eps) = ceil(a / eps) (shifted by n in the with-rate case),
    h(e) = e^power, g(e) = e^(1/power), and tau linear or quadratic.

    zero error  : rho = phi(tau(g(h(eps)))) + 1
    with rate   : rho = phi(tau(g(h(eps)/2)), eta) + 1
    """
    h_val = eps ** power
    arg = h_val if eta_const is None else h_val / 2
    shift = 0 if eta_const is None else eta_const
    if tau_kind == "quadratic":
        # tau(g(arg)) = coef * g^2 = coef * arg^(2/power) is rational
        tau_val = tau_coef * (arg ** 2 if power == 1 else arg)
        return shift + frac_ceil(a / tau_val) + 1
    if power == 1 or eta_const is None:
        # g(h(eps)) = eps exactly; everything stays rational
        g_val = arg if power == 1 else eps
        return shift + frac_ceil(a / (tau_coef * g_val)) + 1
    # power = 2 with-rate: g = sqrt(eps^2 / 2) is irrational
    g_val = iv.sqrt(iv.mpf(arg.numerator) / arg.denominator)
    tau_val = (iv.mpf(tau_coef.numerator) / tau_coef.denominator) * g_val
    return shift + iv_ceil((iv.mpf(a.numerator) / a.denominator) / tau_val) + 1


# ---------------------------------------------------------------------------
# specialized Delta recursions
# ---------------------------------------------------------------------------


def delta_gradient_flow(b: Fraction, d: int, eps: Fraction, f) -> int:
    eps_iv = (iv.mpf(eps.numerator) / eps.denominator) / iv.sqrt(12)
    P = ball_modulus_at(d, b, eps_iv) + 1
    level = 0
    for _ in range(P):
        level = frac_ceil(24 * b * b * (f(level + 1) + 1) / (eps * eps))
    return level + 1


def delta_first_order(d: int, b: Fraction, lam_lo: Fraction, eps: Fraction, f) -> int:
    if b == 0:
        return 1
    inner = iv_ceil(iv.sqrt(12) * eps.denominator / eps.numerator)
    base = iv_ceil(2 * (inner + 1) * iv.sqrt(d) * b.numerator / b.denominator)
    P = base ** d + 1
    levels = [0]
    eps_hat = None
    for _ in range(1, P + 1):
        assert levels[-1] <= 100_000, "oracle literal loop too large; pick smaller inputs"
        worst = max(f(m + 1) for m in range(0, levels[-1] + 1))
        cand = (eps * eps / 12) / (4 * b * (worst + 1))
        eps_hat = cand if eps_hat is None else min(eps_hat, cand)
        capped = min(eps / 2, eps_hat)
        levels.append(frac_ceil(4 * b ** 4 / (lam_lo * lam_lo * capped * capped)))
    return max(levels) + 1


def delta_stojkovic_phi(b: Fraction, eps_iv) -> int:
    arg = 4 * (iv.mpf(b.numerator) / b.denominator) / eps_iv
    return iv_ceil(arg * iv.exp(arg))


def delta_stojkovic(b: Fraction, d: int, eps: Fraction, f) -> int:
    if b == 0:
        return 0
    P = ball_modulus(d, b, eps / 6) + 1
    delta = iv.mpf((eps / 6).numerator) / (eps / 6).denominator

    def chi_f(n: int):
        m = f(n + 1) + 1
        return 2 * delta / (iv.exp(iv.mpf(2 * m)) - 1)

    eps_hat = chi_f(0)
    value = delta_stojkovic_phi(b, eps_hat)
    for _ in range(2, P + 1):
        eps_hat = chi_f(value)
        value = delta_stojkovic_phi(b, eps_hat)
    return value


# ---------------------------------------------------------------------------
# second-order constants and Lambda
# ---------------------------------------------------------------------------


def second_order_constants_iv(b, c, d, lam_lo, lam_hi, gam_lo, gam_hi, theta, beta):
    to_iv = lambda q: iv.mpf(Fraction(q).numerator) / Fraction(q).denominator
    b, c, d = Fraction(b), Fraction(c), Fraction(d)
    M = b * c + Fraction(gam_hi) * b * b / 2 + Fraction(beta) * Fraction(gam_hi) / Fraction(lam_lo) * c * c
    K = iv.sqrt(to_iv(b * b) + 2 * to_iv(M) / to_iv(gam_lo))
    ratio = to_iv(Fraction(beta) * Fraction(gam_lo) / Fraction(lam_hi))
    L = iv_ceil((K + to_iv(M)) * ratio)
    a0 = iv.sqrt(K * L / to_iv(theta))
    a1 = iv.sqrt(K * L * to_iv(lam_hi) / to_iv(beta))
    a2 = (a1 + to_iv(gam_hi) * a0) / to_iv(lam_lo)
    A = _iv_max(a0, a2) / 2
    Bc = _iv_max(a0 + a1, a2 + a0 / to_iv(Fraction(beta) ** 2)) / 2
    C = Fraction(max(c, d), 2)
    return {"M": M, "K": K, "L": L, "a0": a0, "a1": a1, "a2": a2,
            "A": A, "B": Bc, "C": C}


def _iv_max(x, y):
    lo = max(x.a, y.a)
    hi = max(x.b, y.b)
    return iv.mpf([lo, hi])


def _iv_min(x, y):
    lo = min(x.a, y.a)
    hi = min(x.b, y.b)
    return iv.mpf([lo, hi])


def lambda_capital(consts, eps: Fraction, f) -> int:
    return _lambda_iv(consts, iv.mpf(eps.numerator) / eps.denominator, f)


def _lambda_iv(consts, ev, f) -> int:
    first = iv_ceil(16 * consts["A"] * consts["B"] / (3 * ev * ev))
    if first == 0:
        return 0
    Cv = iv.mpf(consts["C"].numerator) / consts["C"].denominator
    second = iv_ceil(4 * (Cv * Cv + 2 * consts["A"] * consts["B"]) / (3 * ev * ev))
    varpi = first * second
    floor_value = iv_ceil((3 * consts["A"] / ev) ** 2)
    return iterate_tilde_literal(f, varpi, floor_value)


def delta_second_order_f0(b, c, d, lam_lo, lam_hi, gam_lo, gam_hi, theta, beta,
                          dim: int, eps: Fraction) -> int:
    """Literal unroll of the full nested second-order recursion for f == 0,
    where f_{phi, eps_hat}(n) = phi(eps_hat, n) + 1 -. n exactly."""
    consts = second_order_constants_iv(b, c, d, lam_lo, lam_hi, gam_lo,
                                       gam_hi, theta, beta)
    to_iv = lambda q: iv.mpf(Fraction(q).numerator) / Fraction(q).denominator
    ev = to_iv(eps)
    K = consts["K"]
    gam_lo_v, lam_hi_v = to_iv(gam_lo), to_iv(lam_hi)

    def varpi(e) -> int:
        first = iv_ceil(16 * consts["A"] * consts["B"] / (3 * e * e))
        if first == 0:
            return 0
        Cv = to_iv(consts["C"])
        second = iv_ceil(4 * (Cv * Cv + 2 * consts["A"] * consts["B"]) / (3 * e * e))
        return first * second

    def phi(e, n: int) -> int:
        w = varpi(e)
        if w == 0:
            return 0
        return w * max(n, iv_ceil((3 * consts["A"] / e) ** 2))

    inner = iv_ceil(iv.sqrt(12 * to_iv(gam_hi) / to_iv(gam_lo)) / ev)
    base = iv_ceil(2 * (inner + 1) * iv.sqrt(dim) * to_iv(b))
    P = base ** dim + 1
    delta_arg = ev * ev / 12
    eta_arg = _iv_min(delta_arg * to_iv(gam_lo) / (6 * K),
                      iv.sqrt(delta_arg * to_iv(gam_lo) * to_iv(lam_lo)
                              / (6 * to_iv(beta) * to_iv(gam_hi))))
    levels = [0]
    eps_hat = None
    for _ in range(1, P + 1):
        # f == 0 makes the chi minimum independent of the previous level
        cand = to_iv(gam_lo) * ev * ev / 12 / (lam_hi_v * 8 * K)
        eps_hat = cand if eps_hat is None else _iv_min(eps_hat, cand)
        eps_hat = _iv_min(eps_hat, ev / 2)
        f_phi = lambda n, e=eps_hat: max(phi(e, n) + 1 - n, 0)
        upto = _lambda_iv(consts, eta_arg, f_phi)
        levels.append(phi(eps_hat, upto))
    return max(levels) + 1

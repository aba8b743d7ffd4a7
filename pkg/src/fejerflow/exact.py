"""Exact arithmetic backing the certificate calculators.

Two pieces live here:

* :class:`ExtendedNatural` -- the value type of all certificates: an exact
  nonnegative integer, or an explicit ``overflow`` sentinel once a value (or
  the work needed to produce it) exceeds the configured budget.

* :class:`Real` -- an exact real number, stored either as a rational
  (``fractions.Fraction``) or as an adaptive rational enclosure ``[lo, hi]``
  that can be refined to any precision.  Rational inputs flowing through
  ``+ - * /`` stay exact; only genuinely irrational nodes (square roots of
  non-squares, ``exp``, fractional powers) introduce intervals.  Ceilings and
  floors refine the enclosure until the integer is determined, so the
  integer-valued certificate formulas never suffer an off-by-one from
  rounding.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from typing import Callable, Optional, Union

__all__ = [
    "BudgetExceeded",
    "PrecisionExhausted",
    "ExtendedNatural",
    "Real",
    "R",
    "budget_limit",
    "set_budget_bits",
    "get_budget_bits",
    "iteration_budget",
    "set_iteration_budget",
    "guard",
]


class BudgetExceeded(Exception):
    """A certificate value or iteration count crossed the configured budget."""


class PrecisionExhausted(Exception):
    """An enclosure could not be refined enough to determine a ceiling/sign."""


# ---------------------------------------------------------------------------
# budgets
# ---------------------------------------------------------------------------

_DEFAULT_BUDGET_BITS = 256
_DEFAULT_ITERATION_BUDGET = 500_000

_budget_bits = int(os.environ.get("FEJERFLOW_BUDGET_BITS", _DEFAULT_BUDGET_BITS))
_iteration_budget = int(
    os.environ.get("FEJERFLOW_ITERATION_BUDGET", _DEFAULT_ITERATION_BUDGET)
)

# exp() arguments beyond this are astronomically large; every certificate
# formula using them overflows the value budget anyway, so refuse early.
_EXP_ARG_CAP = 100_000


def set_budget_bits(bits: int) -> None:
    global _budget_bits
    if bits < 8:
        raise ValueError("budget must be at least 8 bits")
    _budget_bits = int(bits)


def get_budget_bits() -> int:
    return _budget_bits


def budget_limit() -> int:
    """Largest integer a certificate may reach before collapsing to overflow."""
    return 1 << _budget_bits


def set_iteration_budget(n: int) -> None:
    global _iteration_budget
    if n < 1:
        raise ValueError("iteration budget must be positive")
    _iteration_budget = int(n)


def iteration_budget() -> int:
    return _iteration_budget


def guard(n: int) -> int:
    """Pass ``n`` through, raising :class:`BudgetExceeded` above the budget."""
    if n > budget_limit():
        raise BudgetExceeded(f"value exceeds 2^{_budget_bits}")
    return n


# ---------------------------------------------------------------------------
# ExtendedNatural
# ---------------------------------------------------------------------------


class ExtendedNatural:
    """Exact nonnegative integer with an explicit overflow sentinel.

    Arithmetic is exact; any result above ``budget_limit()`` collapses to
    overflow, and overflow propagates through every operation.
    """

    __slots__ = ("value",)

    def __init__(self, value: Optional[int]):
        if value is not None:
            value = int(value)
            if value < 0:
                raise ValueError("ExtendedNatural must be nonnegative")
            if value > budget_limit():
                value = None
        self.value = value

    @classmethod
    def of(cls, value: int) -> "ExtendedNatural":
        return cls(value)

    @classmethod
    def overflow(cls) -> "ExtendedNatural":
        return cls(None)

    @property
    def is_overflow(self) -> bool:
        return self.value is None

    def _coerce(self, other) -> "ExtendedNatural":
        if isinstance(other, ExtendedNatural):
            return other
        return ExtendedNatural(other)

    def __add__(self, other) -> "ExtendedNatural":
        other = self._coerce(other)
        if self.is_overflow or other.is_overflow:
            return ExtendedNatural.overflow()
        return ExtendedNatural(self.value + other.value)

    __radd__ = __add__

    def __mul__(self, other) -> "ExtendedNatural":
        other = self._coerce(other)
        if self.is_overflow or other.is_overflow:
            return ExtendedNatural.overflow()
        return ExtendedNatural(self.value * other.value)

    __rmul__ = __mul__

    def max(self, other) -> "ExtendedNatural":
        other = self._coerce(other)
        if self.is_overflow or other.is_overflow:
            return ExtendedNatural.overflow()
        return ExtendedNatural(max(self.value, other.value))

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.value == other
        if isinstance(other, ExtendedNatural):
            return self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash(("ExtendedNatural", self.value))

    def __repr__(self) -> str:
        return "ExtendedNatural(overflow)" if self.is_overflow else f"ExtendedNatural({self.value})"

    def to_json(self) -> Union[int, str]:
        return "overflow" if self.is_overflow else self.value


# ---------------------------------------------------------------------------
# integer helpers
# ---------------------------------------------------------------------------


def iroot(n: int, k: int) -> int:
    """Floor of the integer k-th root of n >= 0."""
    if n < 0:
        raise ValueError("iroot of negative number")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _dyadic_floor(q: Fraction, bits: int) -> Fraction:
    scaled = q * (1 << bits)
    return Fraction(math.floor(scaled), 1 << bits)


def _dyadic_ceil(q: Fraction, bits: int) -> Fraction:
    scaled = q * (1 << bits)
    return Fraction(math.ceil(scaled), 1 << bits)


# ---------------------------------------------------------------------------
# directed-rounding kernels for irrational primitives
# ---------------------------------------------------------------------------


def sqrt_bounds(q: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Enclosure of sqrt(q) with width about 2^-bits, q >= 0."""
    if q < 0:
        raise ValueError("sqrt of negative value")
    if q == 0:
        return Fraction(0), Fraction(0)
    num, den = q.numerator, q.denominator
    big = num * den << (2 * bits)
    r = math.isqrt(big)
    scale = den << bits
    if r * r == big:
        exact = Fraction(r, scale)
        return exact, exact
    return Fraction(r, scale), Fraction(r + 1, scale)


def exact_sqrt(q: Fraction) -> Optional[Fraction]:
    """sqrt(q) if q is a perfect rational square, else None."""
    if q < 0:
        return None
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def root_bounds(q: Fraction, k: int, bits: int) -> tuple[Fraction, Fraction]:
    """Enclosure of the k-th root of q >= 0."""
    if q < 0:
        raise ValueError("root of negative value")
    if q == 0:
        return Fraction(0), Fraction(0)
    num, den = q.numerator, q.denominator
    big = num * den ** (k - 1) << (k * bits)
    r = iroot(big, k)
    scale = den << bits
    if r ** k == big:
        exact = Fraction(r, scale)
        return exact, exact
    return Fraction(r, scale), Fraction(r + 1, scale)


def exact_root(q: Fraction, k: int) -> Optional[Fraction]:
    if q < 0:
        return None
    rn, rd = iroot(q.numerator, k), iroot(q.denominator, k)
    if rn ** k == q.numerator and rd ** k == q.denominator:
        return Fraction(rn, rd)
    return None


def exp_bounds(q: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Enclosure of exp(q) via scaled Taylor series with directed rounding."""
    if q == 0:
        return Fraction(1), Fraction(1)
    if q < 0:
        lo, hi = exp_bounds(-q, bits + 4)
        return 1 / hi, 1 / lo
    if q > _EXP_ARG_CAP:
        raise BudgetExceeded("exp argument too large to evaluate")
    s = 0
    y = q
    half = Fraction(1, 2)
    while y > half:
        y /= 2
        s += 1
    m = bits + 2 * s + 16
    # Taylor at y in (0, 1/2]: after adding term_i, tail <= term_i.
    target = Fraction(1, 1 << (m + 2))
    total = Fraction(1)
    term = Fraction(1)
    i = 0
    while True:
        i += 1
        term = term * y / i
        total += term
        if term <= target:
            break
    lo = _dyadic_floor(total, m)
    hi = _dyadic_ceil(total + term, m)
    for _ in range(s):
        lo = _dyadic_floor(lo * lo, m)
        hi = _dyadic_ceil(hi * hi, m)
    return lo, hi


# ---------------------------------------------------------------------------
# Real: exact rational or adaptive enclosure
# ---------------------------------------------------------------------------

_SCHEDULE = (64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384)

RealLike = Union["Real", int, float, Fraction, str]


class Real:
    """Exact real: a rational, or a lazily refinable rational enclosure."""

    __slots__ = ("exact", "_fn", "_cache")

    def __init__(self, exact: Optional[Fraction] = None,
                 fn: Optional[Callable[[int], tuple[Fraction, Fraction]]] = None):
        self.exact = exact
        self._fn = fn
        self._cache: dict[int, tuple[Fraction, Fraction]] = {}

    # -- construction ------------------------------------------------------

    @staticmethod
    def of(x: RealLike) -> "Real":
        if isinstance(x, Real):
            return x
        if isinstance(x, str):
            return Real(exact=Fraction(x))
        if isinstance(x, float):
            if not math.isfinite(x):
                raise ValueError("Real requires a finite value")
            return Real(exact=Fraction(x))
        return Real(exact=Fraction(x))

    # -- enclosure ---------------------------------------------------------

    def bounds(self, bits: int) -> tuple[Fraction, Fraction]:
        if self.exact is not None:
            return self.exact, self.exact
        cached = self._cache.get(bits)
        if cached is None:
            cached = self._fn(bits)
            self._cache[bits] = cached
        return cached

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: RealLike) -> "Real":
        other = Real.of(other)
        if self.exact is not None and other.exact is not None:
            return Real(exact=self.exact + other.exact)

        def fn(bits, a=self, b=other):
            alo, ahi = a.bounds(bits)
            blo, bhi = b.bounds(bits)
            return alo + blo, ahi + bhi

        return Real(fn=fn)

    __radd__ = __add__

    def __neg__(self) -> "Real":
        if self.exact is not None:
            return Real(exact=-self.exact)

        def fn(bits, a=self):
            lo, hi = a.bounds(bits)
            return -hi, -lo

        return Real(fn=fn)

    def __sub__(self, other: RealLike) -> "Real":
        return self + (-Real.of(other))

    def __rsub__(self, other: RealLike) -> "Real":
        return Real.of(other) + (-self)

    def __mul__(self, other: RealLike) -> "Real":
        other = Real.of(other)
        if self.exact is not None and other.exact is not None:
            return Real(exact=self.exact * other.exact)

        def fn(bits, a=self, b=other):
            alo, ahi = a.bounds(bits)
            blo, bhi = b.bounds(bits)
            prods = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
            return min(prods), max(prods)

        return Real(fn=fn)

    __rmul__ = __mul__

    def __truediv__(self, other: RealLike) -> "Real":
        other = Real.of(other)
        if other.exact is not None:
            if other.exact == 0:
                raise ZeroDivisionError("Real division by zero")
            if self.exact is not None:
                return Real(exact=self.exact / other.exact)

        def fn(bits, a=self, b=other):
            blo, bhi = b.bounds(bits)
            attempt = bits
            while blo <= 0 <= bhi:
                attempt *= 2
                if attempt > _SCHEDULE[-1]:
                    raise PrecisionExhausted("divisor sign undetermined")
                blo, bhi = b.bounds(attempt)
            alo, ahi = a.bounds(bits)
            quots = (alo / blo, alo / bhi, ahi / blo, ahi / bhi)
            return min(quots), max(quots)

        return Real(fn=fn)

    def __rtruediv__(self, other: RealLike) -> "Real":
        return Real.of(other) / self

    def sqrt(self) -> "Real":
        if self.exact is not None:
            root = exact_sqrt(self.exact)
            if root is not None:
                return Real(exact=root)

        def fn(bits, a=self):
            lo, hi = a.bounds(bits)
            if hi < 0:
                raise ValueError("sqrt of negative enclosure")
            lo = max(lo, Fraction(0))
            return sqrt_bounds(lo, bits)[0], sqrt_bounds(hi, bits)[1]

        return Real(fn=fn)

    def exp(self) -> "Real":
        if self.exact is not None and self.exact == 0:
            return Real(exact=Fraction(1))

        def fn(bits, a=self):
            lo, hi = a.bounds(bits)
            return exp_bounds(lo, bits)[0], exp_bounds(hi, bits)[1]

        return Real(fn=fn)

    def powq(self, q: Union[int, Fraction]) -> "Real":
        """self ** q for rational q; base must be positive unless q is a
        nonnegative integer."""
        q = Fraction(q)
        if q.denominator == 1:
            return self._int_pow(int(q))
        a, b = q.numerator, q.denominator
        if self.exact is not None:
            base = self.exact ** a
            root = exact_root(base, b)
            if root is not None:
                return Real(exact=root)

        def fn(bits, s=self, a=a, b=b):
            lo, hi = s.bounds(bits)
            attempt = bits
            while lo <= 0:
                attempt *= 2
                if attempt > _SCHEDULE[-1]:
                    raise PrecisionExhausted("base sign undetermined for power")
                lo, hi = s.bounds(attempt)
            plo, phi = lo ** a, hi ** a
            if plo > phi:
                plo, phi = phi, plo
            return root_bounds(plo, b, bits)[0], root_bounds(phi, b, bits)[1]

        return Real(fn=fn)

    def _int_pow(self, k: int) -> "Real":
        if self.exact is not None:
            return Real(exact=self.exact ** k)

        def fn(bits, a=self, k=k):
            lo, hi = a.bounds(bits)
            if k >= 0 and lo >= 0:
                return lo ** k, hi ** k
            cands = (lo ** k, hi ** k)
            lo2, hi2 = min(cands), max(cands)
            if k >= 0 and k % 2 == 0 and lo < 0 < hi:
                lo2 = Fraction(0)
            return lo2, hi2

        return Real(fn=fn)

    # -- lattice -----------------------------------------------------------

    @staticmethod
    def minimum(*xs: RealLike) -> "Real":
        reals = [Real.of(x) for x in xs]
        if all(r.exact is not None for r in reals):
            return Real(exact=min(r.exact for r in reals))

        def fn(bits, rs=reals):
            bs = [r.bounds(bits) for r in rs]
            return min(b[0] for b in bs), min(b[1] for b in bs)

        return Real(fn=fn)

    @staticmethod
    def maximum(*xs: RealLike) -> "Real":
        reals = [Real.of(x) for x in xs]
        if all(r.exact is not None for r in reals):
            return Real(exact=max(r.exact for r in reals))

        def fn(bits, rs=reals):
            bs = [r.bounds(bits) for r in rs]
            return max(b[0] for b in bs), max(b[1] for b in bs)

        return Real(fn=fn)

    # -- integer extraction -------------------------------------------------

    def ceil(self) -> int:
        if self.exact is not None:
            return math.ceil(self.exact)
        for bits in _SCHEDULE:
            lo, hi = self.bounds(bits)
            clo, chi = math.ceil(lo), math.ceil(hi)
            if clo == chi:
                return clo
        raise PrecisionExhausted("ceiling undetermined at maximum precision")

    def ceil_upper(self) -> int:
        """Ceiling of the current upper bound: a valid outward rounding."""
        if self.exact is not None:
            return math.ceil(self.exact)
        try:
            return self.ceil()
        except PrecisionExhausted:
            _, hi = self.bounds(_SCHEDULE[-1])
            return math.ceil(hi)

    def floor(self) -> int:
        if self.exact is not None:
            return math.floor(self.exact)
        for bits in _SCHEDULE:
            lo, hi = self.bounds(bits)
            flo, fhi = math.floor(lo), math.floor(hi)
            if flo == fhi:
                return flo
        raise PrecisionExhausted("floor undetermined at maximum precision")

    def is_positive(self) -> bool:
        if self.exact is not None:
            return self.exact > 0
        for bits in _SCHEDULE:
            lo, hi = self.bounds(bits)
            if lo > 0:
                return True
            if hi <= 0:
                return False
        raise PrecisionExhausted("sign undetermined at maximum precision")

    def lt(self, other: RealLike) -> bool:
        """Strict comparison; refines until the order is determined."""
        other = Real.of(other)
        if self.exact is not None and other.exact is not None:
            return self.exact < other.exact
        for bits in _SCHEDULE:
            slo, shi = self.bounds(bits)
            olo, ohi = other.bounds(bits)
            if shi < olo:
                return True
            if ohi <= slo:
                return False
        raise PrecisionExhausted("comparison undetermined at maximum precision")

    def to_float(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        lo, hi = self.bounds(128)
        return float((lo + hi) / 2)

    def to_fraction_upper(self, bits: int = 128) -> Fraction:
        return self.bounds(bits)[1]

    def __repr__(self) -> str:
        if self.exact is not None:
            return f"Real({self.exact})"
        lo, hi = self.bounds(64)
        return f"Real[{float(lo):.6g}, {float(hi):.6g}]"


def R(x: RealLike) -> Real:
    """Shorthand constructor for :class:`Real`."""
    return Real.of(x)

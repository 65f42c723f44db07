"""Closed-form degree/tolerance bounds for secluded partitions.

Ceilings are computed either exactly in rationals or with interval
arithmetic that is refined until the ceiling is decided, so a reported
degree bound is never smaller than the true one.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction
from typing import Callable, Iterable

import mpmath
from mpmath import iv

from .geometry import parse_scalar

NORMS = ("l1", "l2", "linf")
_MAX_PREC = 4096


def _norm(norm: str) -> str:
    key = norm.lower().replace("ℓ", "l").replace("_", "")
    aliases = {"l1": "l1", "l2": "l2", "linf": "linf", "inf": "linf", "l∞": "linf", "max": "linf"}
    if key not in aliases:
        raise ValueError(f"unsupported norm {norm!r}; choose from {NORMS}")
    return aliases[key]


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x)
    return parse_scalar(x) if isinstance(x, str) else Fraction(x)


def unit_ball_volume_exact(norm: str, d: int) -> tuple[Fraction, int]:
    """Volume of the unit ball as ``(c, m)`` meaning ``c * pi**m`` with ``c`` rational.

    For l2 the half-integer Gamma closed form makes ``c`` rational and ``m = floor(d/2)``.
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    norm = _norm(norm)
    if norm == "linf":
        return Fraction(2**d), 0
    if norm == "l1":
        return Fraction(2**d, math.factorial(d)), 0
    m, odd = divmod(d, 2)
    if not odd:
        return Fraction(1, math.factorial(m)), m
    # Gamma(m + 3/2) = (2m+2)! sqrt(pi) / (4^(m+1) (m+1)!)
    return Fraction(4 ** (m + 1) * math.factorial(m + 1), math.factorial(2 * m + 2)), m


def unit_ball_volume(norm: str, d: int, digits: int = 50):
    """Exact ``Fraction`` when rational, otherwise an ``mpmath.mpf`` to ``digits`` digits."""
    c, m = unit_ball_volume_exact(norm, d)
    if m == 0:
        return c
    with mpmath.workdps(digits + 10):
        value = mpmath.mpf(c.numerator) / c.denominator * mpmath.pi**m
    return value


def _exact_root(x: Fraction, d: int) -> Fraction | None:
    if x < 0:
        return None

    def iroot(n: int) -> int | None:
        r = _int_root(n, d)
        return r if r**d == n else None

    num, den = iroot(x.numerator), iroot(x.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _int_root(n: int, d: int) -> int:
    lo, hi = 0, 1 << (n.bit_length() // d + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**d <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo


@contextmanager
def _ivprec(bits: int):
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


def _ivfrac(x: Fraction):
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def _ceil_power(d: int, eps: Fraction, ratio: Fraction, pi_power: int) -> int:
    """``ceil((1 + eps * (ratio * pi**pi_power) ** (1/d)) ** d)``, never under-reported."""
    if pi_power == 0:
        root = _exact_root(ratio, d)
        if root is not None:
            return math.ceil((1 + eps * root) ** d)
    prec = 80
    while True:
        with _ivprec(prec):
            base = _ivfrac(ratio) * iv.pi**pi_power
            x = (1 + _ivfrac(eps) * base ** (iv.mpf(1) / d)) ** d
            lo, hi = math.ceil(mpmath.mpf(x.a)), math.ceil(mpmath.mpf(x.b))
        if lo == hi or prec >= _MAX_PREC:
            return int(hi)
        prec *= 2


def lower_bound_k_measure(d: int, eps, M, norm: str = "linf") -> int:
    """Members some open ``eps``-ball must meet when every member has measure at most ``M``."""
    eps, M = _as_fraction(eps), _as_fraction(M)
    if eps < 0 or M <= 0:
        raise ValueError("need eps >= 0 and M > 0")
    c, m = unit_ball_volume_exact(norm, d)
    if eps == 0:
        return 1
    return _ceil_power(d, eps, c / M, m)


def lower_bound_k_diameter(d: int, eps, D) -> int:
    """Same guarantee for members of diameter at most ``D`` (any norm)."""
    eps, D = _as_fraction(eps), _as_fraction(D)
    if eps < 0 or D <= 0:
        raise ValueError("need eps >= 0 and D > 0")
    return math.ceil((1 + 2 * eps / D) ** d)


def _round_up_float(x) -> float:
    f = float(x)
    if mpmath.mpf(f) < x:
        f = math.nextafter(f, math.inf)
    return f


def tolerance_upper(d: int, k: int) -> float:
    """Upper bound ``ln(k)/d`` on the tolerance of a degree-``k`` partition, valid for ``k <= 2^d``."""
    if d < 1 or k < 1:
        raise ValueError("need d >= 1 and k >= 1")
    if k > 2**d:
        raise ValueError(f"k={k} exceeds 2^{d}; the ln(k)/d bound is only stated for k <= 2^d")
    if k == 1:
        return 0.0
    with _ivprec(120):
        x = iv.log(iv.mpf(k)) / d
        upper = mpmath.mpf(x.b)
    return _round_up_float(upper)


def construction_params(f: Callable[[int], int] | int, d: int) -> tuple[int, Fraction]:
    """Degree and tolerance of the product of ``ceil(d/f(d))`` layered blocks of dimension ``f(d)``."""
    fd = int(f(d) if callable(f) else f)
    if fd < 1:
        raise ValueError("f(d) must be at least 1")
    return (fd + 1) ** (-(-d // fd)), Fraction(1, 2 * fd)


def nfl_lower(eps0, d: int, k: int) -> float:
    """Smallest accuracy any generic k-pseudodeterministic rounding can keep: ``max(eps0, eps0 d / (4 ln 2k))``."""
    eps0 = _as_fraction(eps0)
    if eps0 <= 0 or k < 1 or d < 1:
        raise ValueError("need eps0 > 0, k >= 1, d >= 1")
    return max(float(eps0), float(eps0) * d / (4 * math.log(2 * k)))


def trivial_k(d: int, eps) -> int:
    """``floor((2 + 2 eps)^d)``: every unit-cube partition is secluded with this degree."""
    eps = _as_fraction(eps)
    return math.floor((2 + 2 * eps) ** d)


def bound_value(d: int, eps, M, norm: str, digits: int = 50):
    """The un-rounded bound ``(1 + eps (v/M)^(1/d))^d``; exact when rational."""
    eps, M = _as_fraction(eps), _as_fraction(M)
    c, m = unit_ball_volume_exact(norm, d)
    if m == 0:
        root = _exact_root(c / M, d)
        if root is not None:
            return (1 + eps * root) ** d
    with mpmath.workdps(digits + 10):
        base = mpmath.mpf(c.numerator) / c.denominator / (mpmath.mpf(M.numerator) / M.denominator)
        base *= mpmath.pi**m
        return (1 + mpmath.mpf(eps.numerator) / eps.denominator * mpmath.root(base, d)) ** d


def stirling_value(d: int, eps, M, norm: str) -> float | None:
    """Stirling-approximate column; documentation only, never used in checks."""
    eps, M = float(_as_fraction(eps)), float(_as_fraction(M))
    norm = _norm(norm)
    if norm == "l1":
        return (1 + eps * 2 * math.e / (M ** (1 / d) * d)) ** d
    if norm == "l2":
        return (1 + eps * math.sqrt(2 * math.pi * math.e) / (M ** (1 / d) * math.sqrt(d))) ** d
    return None


def bounds_table(ds: Iterable[int], eps, M=1, norms: Iterable[str] = NORMS, digits: int = 50) -> list[dict]:
    eps, M = _as_fraction(eps), _as_fraction(M)
    rows = []
    for norm in norms:
        norm = _norm(norm)
        for d in ds:
            value = bound_value(d, eps, M, norm, digits)
            if isinstance(value, Fraction):
                text, exact = f"{value.numerator}/{value.denominator}", True
            else:
                text, exact = mpmath.nstr(value, digits), False
            approx = stirling_value(d, eps, M, norm)
            rows.append(
                {
                    "norm": norm,
                    "d": d,
                    "k": lower_bound_k_measure(d, eps, M, norm),
                    "value": text,
                    "exact": exact,
                    "stirling_approx": None if approx is None else repr(approx),
                }
            )
    return rows

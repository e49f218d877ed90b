"""Deformed algebra: q-logarithm, q-exponential, q-product, q-division.

The deformation replaces ln x by (x^(1-q) - 1)/(1-q) and exp x by
[1 + (1-q) x]^(1/(1-q)); both reduce to the classical functions as q -> 1.
The product built on top of them,

    x (x)_q y = sign(x y) * exp_q(ln_q|x| + ln_q|y|),

is only defined where |x|^(1-q) + |y|^(1-q) - 1 >= 0.  Below that line the
q-exponential cut-off sets the value to zero, and for q > 1 the line itself
is a divergence set.  Product-type operations therefore return an outcome
carrying an explicit region tag instead of raising: multiplicative-cascade
simulation legitimately hits the cut-off and needs to count such events.

Numerical policy: the classical branch is taken when |1 - q| < 1e-12.
Otherwise the expm1/log1p forms are used, which remain accurate uniformly
in q, including the band |1 - q| < 1e-6 where the textbook formulas lose
all precision to cancellation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "Q_CLASSICAL_EPS",
    "DIVERGENCE_RTOL",
    "Region",
    "QProductOutcome",
    "q_log",
    "q_exp",
    "q_product",
    "q_divide",
    "q_product_n",
]

Q_CLASSICAL_EPS = 1e-12  # |1-q| below this routes to ln/exp/ordinary product
DIVERGENCE_RTOL = 1e-12  # relative half-width of the q>1 divergence set


class Region(enum.Enum):
    """Where a product-type outcome landed."""

    REGULAR = "regular"
    CUTOFF_ZERO = "cutoff_zero"
    DIVERGENT = "divergent"


@dataclass(frozen=True)
class QProductOutcome:
    """Value plus region tag; cutoff_zero always carries value 0."""

    value: float
    region: Region

    def __post_init__(self) -> None:
        if self.region is Region.CUTOFF_ZERO and self.value != 0.0:
            raise ValueError("cutoff_zero outcome must carry value 0")


def _check_q(q: float) -> float:
    q = float(q)
    if not math.isfinite(q):
        raise DomainError("the deformation parameter q must be finite")
    return q


def q_log(x, q):
    """Deformed logarithm (x^(1-q) - 1)/(1-q); natural log at q = 1.

    Accepts a scalar or an array of strictly positive values.
    """
    q = _check_q(q)
    arr = np.asarray(x, dtype=float)
    if arr.size == 0:
        return arr
    if np.isnan(arr).any() or (arr <= 0).any():
        raise DomainError("q_log requires x > 0")
    u = 1.0 - q
    if abs(u) < Q_CLASSICAL_EPS:
        out = np.log(arr)
    else:
        with np.errstate(over="ignore"):
            out = np.expm1(u * np.log(arr)) / u
    return float(out) if np.ndim(x) == 0 else out


def q_exp(x, q):
    """Deformed exponential [1 + (1-q) x]^(1/(1-q)); e^x at q = 1.

    Returns 0 whenever 1 + (1-q) x <= 0: the cut-off is a defined value,
    not an error.  Accepts a scalar or an array.
    """
    q = _check_q(q)
    arr = np.asarray(x, dtype=float)
    if arr.size and np.isnan(arr).any():
        raise DomainError("q_exp rejects NaN input")
    u = 1.0 - q
    if abs(u) < Q_CLASSICAL_EPS:
        with np.errstate(over="ignore"):
            out = np.exp(arr)
    else:
        base = u * arr
        out = np.zeros_like(arr)
        live = base > -1.0
        with np.errstate(over="ignore"):
            out[live] = np.exp(np.log1p(base[live]) / u)
    return float(out) if np.ndim(x) == 0 else out


def _abs_pow(v: float, u: float) -> float:
    # |v|^u with the v = 0 edge resolved: 0^positive = 0, 0^negative = +inf
    # (plain Python pow would raise on the latter).
    a = abs(v)
    if a == 0.0:
        return 0.0 if u > 0.0 else math.inf
    try:
        return a**u
    except OverflowError:
        return math.inf


def _pow_inv_u(s: float, u: float) -> float:
    # s^(1/u) for s > 0, overflow-safe
    try:
        return math.exp(math.log(s) / u)
    except OverflowError:
        return math.inf


def _zero_operand(other: float, q: float, u: float) -> QProductOutcome:
    # Closed-form zero rule: x (x)_q 0 = 0 when (q >= 1 and x >= 0) or
    # (q < 1 and 0 <= x <= 1); otherwise (x^(1-q) - 1)^(1/(1-q)).
    # For q > 1 the zero arises as a plain limit, not as a cut-off.
    if q >= 1.0:
        return QProductOutcome(0.0, Region.REGULAR)
    s = _abs_pow(other, u) - 1.0
    if other > 1.0:
        return QProductOutcome(_pow_inv_u(s, u), Region.REGULAR)
    if s > 0.0:
        # negative operand beyond -1: the sign factor of the extended
        # definition annihilates the value, but no cut-off occurred
        return QProductOutcome(0.0, Region.REGULAR)
    return QProductOutcome(0.0, Region.CUTOFF_ZERO)


def _combine(s: float, tsum: float, sign: float, u: float, q: float) -> QProductOutcome:
    # s = sum of |.|^(1-q) terms minus (count - 1); decide the region.
    if math.isinf(tsum):
        # only reachable for q > 1 with a zero operand: plain zero limit;
        # must be tested before the divergence band, |inf| <= inf otherwise
        return QProductOutcome(0.0, Region.REGULAR)
    if q > 1.0 and abs(s) <= DIVERGENCE_RTOL * max(1.0, tsum):
        return QProductOutcome(sign * math.inf, Region.DIVERGENT)
    if s < 0.0 or (s == 0.0 and q < 1.0):
        return QProductOutcome(0.0, Region.CUTOFF_ZERO)
    return QProductOutcome(sign * _pow_inv_u(s, u), Region.REGULAR)


def _check_operand(v) -> float:
    v = float(v)
    if not math.isfinite(v):
        raise DomainError("operands must be finite")
    return v


def q_product(x, y, q) -> QProductOutcome:
    """sign(x y) * exp_q(ln_q|x| + ln_q|y|), with region bookkeeping.

    Zero operands follow the closed-form zero rule rather than raising a
    logarithm domain error.
    """
    q = _check_q(q)
    x = _check_operand(x)
    y = _check_operand(y)
    if abs(1.0 - q) < Q_CLASSICAL_EPS:
        return QProductOutcome(x * y, Region.REGULAR)
    u = 1.0 - q
    if x == 0.0 or y == 0.0:
        return _zero_operand(x if y == 0.0 else y, q, u)
    tx = _abs_pow(x, u)
    ty = _abs_pow(y, u)
    sign = math.copysign(1.0, x) * math.copysign(1.0, y)
    return _combine(tx + ty - 1.0, tx + ty, sign, u, q)


def q_divide(x, y, q) -> QProductOutcome:
    """Inverse of q_product in its second argument: (x (x)_q y) (/)_q y = x
    on the regular region."""
    q = _check_q(q)
    x = _check_operand(x)
    y = _check_operand(y)
    if y == 0.0:
        raise DomainError("q_divide by zero")
    if abs(1.0 - q) < Q_CLASSICAL_EPS:
        return QProductOutcome(x / y, Region.REGULAR)
    u = 1.0 - q
    tx = _abs_pow(x, u)
    ty = _abs_pow(y, u)
    sign = math.copysign(1.0, x) * math.copysign(1.0, y) if x != 0.0 else 0.0
    # exp_q(ln_q|x| - ln_q|y|) has constraint sum t_x - t_y + 1
    return _combine(tx - ty + 1.0, tx + ty, sign, u, q)


def q_product_n(xs, q) -> QProductOutcome:
    """Left fold of q_product over a nonempty sequence.

    On the regular region this equals the closed form
    [sum_i |x_i|^(1-q) - (N-1)]^(1/(1-q)) with sign bookkeeping.  The first
    cut-off or divergence event is absorbing: folding stops there, so a
    later large factor cannot resurrect a member through the zero rule.
    """
    vals = [float(v) for v in xs]
    if not vals:
        raise DomainError("q_product_n needs at least one element")
    q = _check_q(q)
    for v in vals:
        if not math.isfinite(v):
            raise DomainError("operands must be finite")
    acc = QProductOutcome(vals[0], Region.REGULAR)
    for v in vals[1:]:
        if not math.isfinite(acc.value):
            # floating-point overflow of a regular partial value saturates
            return acc
        acc = q_product(acc.value, v, q)
        if acc.region is not Region.REGULAR:
            return acc
    return acc

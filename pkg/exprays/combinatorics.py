"""
External addresses and the potential machinery built on the model function
F(t) = exp(t) - 1.

An external address is an integer sequence s = (s_1, s_2, ...). Two
representations are supported:
  - eventually periodic: a finite preperiod followed by a repeating period
  - generated: s_k = round(scale_y * F^(k-1)(growth_x)), the only way fast
    (unboundedly growing) addresses can be written down
"""

import enum
import functools
import math
from dataclasses import dataclass

from exprays.common import EXP_LIMIT, ExpRaysException

EVENTUALLY_PERIODIC = "EventuallyPeriodic"
GENERATED = "Generated"

# entries are kept inside the signed 64-bit range
MAX_ENTRY = 2**63 - 1

# extra terms scanned after preperiod + period when computing t_star
T_STAR_HORIZON = 64


class AddressError(ExpRaysException):
    pass


class EntryOverflow(ExpRaysException):
    pass


class UndecidedAtHorizon(ExpRaysException):
    pass


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def F(t):
    """ Model function for exponential growth, exp(t) - 1. Saturates to +inf """
    if t > EXP_LIMIT:
        return math.inf
    return math.expm1(t)


def F_inv(y):
    """ Inverse of F, log(1 + y) """
    return math.log1p(y)


def F_iter(t, n):
    """ n-th iterate of F; negative n gives inverse iterates """
    if n >= 0:
        for _ in range(n):
            t = F(t)
            if t == math.inf:
                break
    else:
        for _ in range(-n):
            t = F_inv(t)
    return t


def F_iter_derivative(t, n):
    """ d/dt F^n(t) = prod_{k=1..n} (F^k(t) + 1) = exp(sum_{k=0..n-1} F^k(t)) """
    if n < 0:
        raise ValueError("F_iter_derivative needs n >= 0")
    total = 0.0
    for _ in range(n):
        total += t
        if total > EXP_LIMIT:
            return math.inf
        t = F(t)
    return math.exp(total)


def tail_sums(x, t, max_terms=64):
    """ Return the two series
          sum_{k>=1} 1/(F^k(t)+1)   and   sum_{k>=1} F^k(x)/(F^k(t)+1)
        truncated once F^k(t) saturates (all further terms are zero in floating point)
    """
    sum1, sum2 = 0.0, 0.0
    tk, xk = t, x
    for _ in range(max_terms):
        tk, xk = F(tk), F(xk)
        if tk == math.inf:
            break
        sum1 += 1.0 / (tk + 1.0)
        sum2 += xk / (tk + 1.0)
    return sum1, sum2


@dataclass(frozen=True)
class PotentialBounds:
    t_star: float
    t_min: float
    is_fast: bool


@dataclass(frozen=True)
class ExternalAddress:
    """ Immutable external address. Build with ExternalAddress.periodic() or
        ExternalAddress.generated(), or parse a literal with parse_address()
    """
    kind: str
    preperiod: tuple = ()
    period: tuple = ()
    growth_x: float = 0.0
    scale_y: float = 0.0

    def __post_init__(self):
        if self.kind == EVENTUALLY_PERIODIC:
            if len(self.period) < 1:
                raise AddressError("period must have at least one entry")
            for e in self.preperiod + self.period:
                if type(e) != int:
                    raise AddressError(f"address entries must be integers, got {e!r}")
                if abs(e) > MAX_ENTRY:
                    raise AddressError(f"address entry {e} outside the 64-bit range")
        elif self.kind == GENERATED:
            if not (self.growth_x > 0) or not (self.scale_y > 0):
                raise AddressError("generated addresses need growth_x > 0 and scale_y > 0")
            if math.isinf(self.scale_y):
                raise AddressError("scale_y must be finite")
        else:
            raise AddressError(f"unknown address kind {self.kind}")

    @classmethod
    def periodic(cls, preperiod, period):
        return cls(EVENTUALLY_PERIODIC, tuple(int(x) for x in preperiod), tuple(int(x) for x in period))

    @classmethod
    def generated(cls, growth_x, scale_y):
        return cls(GENERATED, growth_x=float(growth_x), scale_y=float(scale_y))

    @property
    def is_periodic(self):
        return self.kind == EVENTUALLY_PERIODIC

    def entry(self, k):
        return entry(self, k)

    def shift(self, n=1):
        return shift(self, n)

    def __str__(self):
        return format_address(self)


def entry(s, k):
    """ s_k with 1-based indexing """
    if k < 1:
        raise ValueError(f"entries are indexed from 1, got {k}")
    if s.kind == EVENTUALLY_PERIODIC:
        if k <= len(s.preperiod):
            return s.preperiod[k-1]
        return s.period[(k - 1 - len(s.preperiod)) % len(s.period)]

    value = s.scale_y * F_iter(s.growth_x, k-1)
    if not math.isfinite(value) or value > MAX_ENTRY:
        raise EntryOverflow(f"entry {k} of {format_address(s)} overflows the integer range")
    return int(round(value))


def shift(s, n=1):
    """ sigma^n(s): the address with entry(result, k) = entry(s, k+n) """
    if n < 0:
        raise ValueError("shift needs n >= 0")
    if n == 0:
        return s
    if s.kind == GENERATED:
        # F^(k-1)(F^n(x)) runs the same float operations as F^(k-1+n)(x)
        return ExternalAddress(GENERATED, growth_x=F_iter(s.growth_x, n), scale_y=s.scale_y)
    if n <= len(s.preperiod):
        return ExternalAddress(EVENTUALLY_PERIODIC, s.preperiod[n:], s.period)
    m = (n - len(s.preperiod)) % len(s.period)
    return ExternalAddress(EVENTUALLY_PERIODIC, (), s.period[m:] + s.period[:m])


@functools.lru_cache(maxsize=4096)
def potential_bounds(s):
    """ Compute t_star = sup_n F^-(n-1)(|s_n|) and the minimal potential t_min.

        Eventually periodic addresses have bounded entries, so the terms decrease to 0
        and the scan stops once F^-(n)(max|s|) drops below the running maximum.
        Generated addresses are scanned until their entries overflow; the limit of the
        terms is growth_x, which is also their minimal potential.
    """
    if s.kind == EVENTUALLY_PERIODIC:
        entries = s.preperiod + s.period
        biggest = max(abs(e) for e in entries)
        t_star = 0.0
        if biggest > 0:
            n_fixed = len(entries)
            for n in range(1, n_fixed + T_STAR_HORIZON + 1):
                t_star = max(t_star, F_iter(float(abs(entry(s, n))), -(n-1)))
                # every later term is at most F^-n(biggest)
                if n >= n_fixed and F_iter(float(biggest), -n) < t_star:
                    break
        return PotentialBounds(t_star=t_star, t_min=0.0, is_fast=False)

    t_star = s.growth_x
    for n in range(1, T_STAR_HORIZON + 1):
        try:
            e = entry(s, n)
        except EntryOverflow:
            break
        t_star = max(t_star, F_iter(float(abs(e)), -(n-1)))
    return PotentialBounds(t_star=t_star, t_min=s.growth_x, is_fast=True)


def t_s_K(s, K):
    """ Potential above which the ray tail estimates hold for all |kappa| <= K """
    if not K > -3:
        raise ValueError("K must exceed -3")
    return potential_bounds(s).t_star + 2.0*math.log(K + 3.0)


def is_growth_parameter(s, x, horizon=20):
    """ True if |s_{k+1}| <= F^k(x) for k < horizon """
    for k in range(horizon):
        try:
            e = entry(s, k+1)
        except EntryOverflow:
            return False
        if abs(e) > F_iter(x, k):
            return False
    return True


def lex_compare(s1, s2, horizon=None):
    """ Lexicographic comparison of two entry streams.

        Two eventually periodic addresses are decided within the longer preperiod
        plus the lcm of the period lengths. If either address is generated, a
        comparison horizon must be given; agreement up to it raises UndecidedAtHorizon.
    """
    if s1.is_periodic and s2.is_periodic:
        n_check = max(len(s1.preperiod), len(s2.preperiod)) + \
                  math.lcm(len(s1.period), len(s2.period))
    elif horizon is None:
        raise ValueError("comparing generated addresses needs a horizon")
    else:
        n_check = horizon

    for k in range(1, n_check+1):
        a, b = entry(s1, k), entry(s2, k)
        if a < b:
            return Ordering.LESS
        if a > b:
            return Ordering.GREATER

    if s1.is_periodic and s2.is_periodic:
        return Ordering.EQUAL
    raise UndecidedAtHorizon(f"{format_address(s1)} and {format_address(s2)} agree up to entry {n_check}")


address_key = functools.cmp_to_key(lambda a, b: int(lex_compare(a, b)))


def parse_address(text):
    """ Parse an address literal.
          "p1 p2 | q1 q2"     preperiod before the bar, period after (bar mandatory)
          "gen x=1.5 y=2.0"   generated address
    """
    text = text.replace("−", "-").strip()
    if text.startswith("gen"):
        params = {}
        for token in text[3:].split():
            key, sep, value = token.partition("=")
            if sep != "=" or key not in ("x", "y") or key in params:
                raise AddressError(f"bad token '{token}' in generated address '{text}'")
            try:
                params[key] = float(value)
            except ValueError:
                raise AddressError(f"bad number '{value}' in generated address '{text}'")
        if set(params) != {"x", "y"}:
            raise AddressError(f"generated address '{text}' needs both x= and y=")
        return ExternalAddress.generated(params["x"], params["y"])

    if text.count("|") != 1:
        raise AddressError(f"address '{text}' needs exactly one '|' between preperiod and period")
    pre, per = text.split("|")
    try:
        preperiod = [int(x) for x in pre.split()]
        period = [int(x) for x in per.split()]
    except ValueError:
        raise AddressError(f"address '{text}' has non-integer entries")
    if len(period) == 0:
        raise AddressError(f"address '{text}' has an empty period")
    return ExternalAddress.periodic(preperiod, period)


def format_address(s):
    """ Canonical literal for s; parse_address inverts it exactly """
    if s.kind == GENERATED:
        return f"gen x={s.growth_x!r} y={s.scale_y!r}"
    return " ".join(str(e) for e in s.preperiod) + "|" + " ".join(str(e) for e in s.period)

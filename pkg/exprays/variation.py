"""
Winding numbers of closed curves and variation numbers of open curves.

The variation number of a curve gamma around a point a is
    alpha(gamma, a) = (1/2pi) * integral |Im(gamma'(t) / (gamma(t) - a))| dt,
the total unsigned turning of gamma - a. Curves are given as samples with
derivatives; between samples they are evaluated by cubic Hermite
interpolation, or exactly through a sampler callable when one is attached
(dynamic rays). The part of the integral beyond the last sample is bounded
from the admissibility constants of the curve.
"""

import cmath
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from exprays.common import TWO_PI, ExpRaysException
from exprays.combinatorics import F_iter, entry, potential_bounds, shift
from exprays.dynamics import BOUNDARY_EPS, E, MAX_ADDRESS_MODULUS, is_overflow
from exprays.rays import (DEFAULT_H, RayTraceConfig, eval_ray, ray_derivative_t,
                          ray_second_derivative_t, residual_bound, tail_potential,
                          trace_ray)

BASE_EPS = 1e-9
REL_TOL = 1e-6


class VariationError(ExpRaysException):
    pass


class TooCloseToBase(VariationError):
    pass


class Undersampled(VariationError):
    pass


class MissingDerivatives(VariationError):
    pass


class OnHalfLine(VariationError):
    pass


class NotClosed(VariationError):
    pass


@dataclass(frozen=True)
class TailBound:
    """ Admissibility constants valid for t >= start:
          |gamma(t) - (direction*t + offset)| <= C_pos
          |gamma'(t) - direction|             <= C_der / t
          |gamma''(t)|                        <= C_secder / t^2
        direction has modulus 1. of_derivative marks the record as belonging to
        gamma' (the curve whose variation around 0 is wanted).
    """
    C_pos: float
    C_der: float
    C_secder: float
    offset: complex = 0j
    direction: complex = 1+0j
    start: float = -math.inf
    of_derivative: bool = False


class SampledCurve:
    """ Curve gamma sampled at strictly increasing params.

        Parameters:
        - params: increasing sample parameters t_i
        - points: gamma(t_i)
        - derivs: gamma'(t_i), needed for variation numbers
        - second_derivs: gamma''(t_i), needed for derivative_curve
        - tail: optional TailBound for t beyond the last sample
        - sampler: optional exact t -> (gamma(t), gamma'(t))
        - second_sampler: optional exact t -> gamma''(t)
    """

    def __init__(self, params, points, derivs=None, second_derivs=None, tail=None,
                 sampler=None, second_sampler=None):
        self.params = np.asarray(params, dtype=float)
        self.points = np.asarray(points, dtype=complex)
        self.derivs = None if derivs is None else np.asarray(derivs, dtype=complex)
        self.second_derivs = None if second_derivs is None else np.asarray(second_derivs, dtype=complex)
        self.tail = tail
        self.sampler = sampler
        self.second_sampler = second_sampler

        if self.params.ndim != 1 or len(self.params) < 2:
            raise ValueError("a sampled curve needs at least two samples")
        if self.points.shape != self.params.shape:
            raise ValueError("params and points must have the same length")
        if np.any(np.diff(self.params) <= 0):
            raise ValueError("curve params must be strictly increasing")
        for name in ("derivs", "second_derivs"):
            arr = getattr(self, name)
            if arr is None:
                continue
            if arr.shape != self.params.shape:
                raise ValueError(f"{name} must have one entry per sample")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")

    def __len__(self):
        return len(self.params)

    @property
    def has_derivatives(self):
        return self.derivs is not None or self.sampler is not None

    def is_closed(self, tol=BASE_EPS):
        return abs(self.points[0] - self.points[-1]) <= tol

    def _locate(self, t):
        if not self.params[0] <= t <= self.params[-1]:
            raise ValueError(f"t={t} outside the sampled range [{self.params[0]}, {self.params[-1]}]")
        i = int(np.searchsorted(self.params, t, side="right")) - 1
        return min(max(i, 0), len(self.params) - 2)

    def offset_at(self, t, a):
        """ (gamma(t) - a, gamma'(t)).
            The Hermite form is evaluated without cancellation when a is a sample point.
        """
        if self.sampler is not None:
            z, dz = self.sampler(t)
            return z - a, dz
        if self.derivs is None:
            raise MissingDerivatives("curve has neither derivatives nor a sampler")
        i = self._locate(t)
        dt = self.params[i+1] - self.params[i]
        u = (t - self.params[i]) / dt
        p0, p1 = self.points[i] - a, self.points[i+1] - a
        m0, m1 = self.derivs[i], self.derivs[i+1]
        u2, u3 = u*u, u*u*u
        w = (2*u3 - 3*u2 + 1)*p0 + (3*u2 - 2*u3)*p1 + dt*((u3 - 2*u2 + u)*m0 + (u3 - u2)*m1)
        dw = (6*u - 6*u2)*(p1 - p0)/dt + (3*u2 - 4*u + 1)*m0 + (3*u2 - 2*u)*m1
        return complex(w), complex(dw)

    def at(self, t):
        """ (gamma(t), gamma'(t)) """
        return self.offset_at(t, 0j)

    def second_at(self, t):
        """ gamma''(t) from the second sampler, or the second derivative of the Hermite piece """
        if self.second_sampler is not None:
            return complex(self.second_sampler(t))
        if self.derivs is None:
            raise MissingDerivatives("curve has no derivatives")
        i = self._locate(t)
        dt = self.params[i+1] - self.params[i]
        u = (t - self.params[i]) / dt
        dp = self.points[i+1] - self.points[i]
        m0, m1 = self.derivs[i], self.derivs[i+1]
        return complex((6 - 12*u)*dp/dt**2 + ((6*u - 4)*m0 + (6*u - 2)*m1)/dt)


def _adaptive_simpson(f, a, b, rel_tol, abs_tol=1e-14, max_depth=40):
    """ Adaptive Simpson quadrature with Richardson correction """
    fa, fm, fb = f(a), f(0.5*(a+b)), f(b)
    whole = (b - a)/6.0 * (fa + 4.0*fm + fb)

    def recurse(a, b, fa, fm, fb, whole, depth):
        m = 0.5*(a + b)
        lm, rm = 0.5*(a + m), 0.5*(m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a)/6.0 * (fa + 4.0*flm + fm)
        right = (b - m)/6.0 * (fm + 4.0*frm + fb)
        err = (left + right - whole) / 15.0
        if depth >= max_depth or abs(err) <= max(rel_tol*abs(left + right), abs_tol):
            return left + right + err
        return recurse(a, m, fa, flm, fm, left, depth+1) + recurse(m, b, fm, frm, fb, right, depth+1)

    return recurse(a, b, fa, fm, fb, whole, 0)


def winding_number(curve, a, eps=BASE_EPS):
    """ Winding number of a closed sampled curve around a, from the principal
        argument increments between consecutive samples
    """
    if not curve.is_closed():
        raise NotClosed("winding number needs a closed curve (first point = last point)")
    w = curve.points - a
    if np.min(np.abs(w)) <= eps:
        raise TooCloseToBase(f"curve passes within {eps} of {a}")
    increments = np.angle(w[1:] / w[:-1])
    if np.max(np.abs(increments)) > math.pi/2:
        raise Undersampled("an argument increment exceeds pi/2; sample the curve more densely")
    return int(round(np.sum(increments) / TWO_PI))


def tail_remainder(curve, a):
    """ Upper bound for the variation integral (divided by 2 pi) beyond the last sample.
        Returns inf when the last sample is too close to a for the bound to apply.
    """
    tail = curve.tail
    if tail is None:
        raise VariationError("curve has no admissibility record for its tail")
    T = curve.params[-1]
    if T < tail.start:
        raise VariationError(f"tail record holds from t={tail.start}, curve ends at {T}")

    if tail.of_derivative:
        if a != 0:
            raise VariationError("derivative curves are measured around 0 only")
        if T <= tail.C_der:
            return math.inf
        return tail.C_secder / (T - tail.C_der) / TWO_PI

    W = abs(tail.offset - a) + tail.C_pos
    if T <= W:
        return math.inf
    return (W + tail.C_der) / (T - W) / TWO_PI


def variation_number(curve, a, rel_tol=REL_TOL, include_tail=True, eps=BASE_EPS):
    """ alpha(gamma, a) over the sampled range, plus the tail remainder when the
        curve carries a tail record.

        a may be the initial point of the curve; the integrand then has a finite
        limit at the start. Exact samplers cannot evaluate gamma(t) - gamma(t_0)
        without cancellation, so integration starts a small step later and the
        skipped piece is estimated from that limit.
    """
    if not curve.has_derivatives:
        raise MissingDerivatives("variation numbers need gamma' samples or a sampler")
    a = complex(a)
    dists = np.abs(curve.points - a)
    starts_at_base = dists[0] <= eps
    if starts_at_base:
        a = complex(curve.points[0])
    if np.any(dists[1:] <= eps) or (not starts_at_base and dists[0] <= eps):
        raise TooCloseToBase(f"curve passes within {eps} of {a}")

    def integrand(t):
        w, dw = curve.offset_at(t, a)
        if w == 0:
            # limit of Im(gamma'/(gamma - gamma(t0))) as t -> t0
            return abs((curve.second_at(t) / (2.0*dw)).imag)
        return abs((dw / w).imag)

    lo = curve.params[0]
    head = 0.0
    if starts_at_base and curve.sampler is not None:
        delta = 1e-6 * max(1.0, abs(lo))
        if curve.second_sampler is not None:
            dz = curve.sampler(lo)[1]
            head = delta * abs((curve.second_sampler(lo) / (2.0*dz)).imag)
        lo += delta

    total = head
    for t_a, t_b in zip(curve.params[:-1], curve.params[1:]):
        t_a = max(t_a, lo)
        if t_b <= t_a:
            continue
        total += _adaptive_simpson(integrand, t_a, t_b, rel_tol)

    alpha = total / TWO_PI
    if include_tail and curve.tail is not None:
        alpha += tail_remainder(curve, a)
    return alpha


def halfline_variation(lam, a):
    """ Variation number of the half line s -> lam*s, s > 0, around a:
        |arg(a/lam) - pi| / 2pi with arg taken in [0, 2pi)
    """
    lam, a = complex(lam), complex(a)
    if lam == 0:
        raise ValueError("half line direction must be nonzero")
    q = a / lam
    if a == 0 or (q.real > 0 and abs(q.imag) <= 1e-15*abs(q)):
        raise OnHalfLine(f"{a} lies on the half line through {lam}")
    arg = cmath.phase(q) % TWO_PI
    return abs(arg - math.pi) / TWO_PI


def derivative_curve(curve):
    """ The curve gamma', sampled from the first and second derivatives of gamma """
    if curve.sampler is not None:
        if curve.second_sampler is None:
            raise MissingDerivatives("derivative curve needs a second-derivative sampler")
        sampler = lambda t: (curve.sampler(t)[1], curve.second_sampler(t))
        derivs = [curve.second_sampler(t) for t in curve.params]
        points = curve.derivs if curve.derivs is not None else [curve.sampler(t)[1] for t in curve.params]
    else:
        if curve.derivs is None or curve.second_derivs is None:
            raise MissingDerivatives("derivative curve needs first and second derivative samples")
        sampler = None
        points, derivs = curve.derivs, curve.second_derivs
    tail = replace(curve.tail, of_derivative=True) if curve.tail is not None else None
    return SampledCurve(curve.params, points, derivs, tail=tail, sampler=sampler)


def pullback_curve(curve, a, eps=BASE_EPS):
    """ log(gamma - a) with the branch continued along the samples """
    if curve.derivs is None and curve.sampler is None:
        raise MissingDerivatives("pullback needs gamma' samples or a sampler")
    w = curve.points - a
    if np.min(np.abs(w)) <= eps:
        raise TooCloseToBase(f"curve passes within {eps} of {a}")
    derivs = curve.derivs if curve.derivs is not None else np.array([curve.sampler(t)[1] for t in curve.params])
    args = np.unwrap(np.angle(w))
    points = np.log(np.abs(w)) + 1j*args
    new_derivs = derivs / w
    second = None
    if curve.second_derivs is not None:
        second = (curve.second_derivs*w - derivs**2) / w**2

    sampler, second_sampler = None, None
    if curve.sampler is not None:
        def branch(t, z):
            ref = np.interp(t, curve.params, args)
            L = cmath.log(z - a)
            return L + complex(0.0, TWO_PI*round((ref - L.imag)/TWO_PI))

        def sampler(t):
            z, dz = curve.sampler(t)
            return branch(t, z), dz/(z - a)

        if curve.second_sampler is not None:
            def second_sampler(t):
                z, dz = curve.sampler(t)
                return (curve.second_sampler(t)*(z - a) - dz*dz) / (z - a)**2

    return SampledCurve(curve.params, points, new_derivs, second, sampler=sampler,
                        second_sampler=second_sampler)


@dataclass
class VariationCheck:
    alpha: float
    alpha_derivative: float
    holds: bool


def derivative_bound_check(curve, a, rel_tol=REL_TOL, tol=1e-6):
    """ Check alpha(gamma, a) <= alpha(gamma', 0) + 1/2 """
    alpha = variation_number(curve, a, rel_tol)
    alpha_d = variation_number(derivative_curve(curve), 0j, rel_tol)
    return VariationCheck(alpha, alpha_d, alpha <= alpha_d + 0.5 + tol)


def pullback_doubling_check(curve, a, rel_tol=REL_TOL, tol=1e-3):
    """ For the pullback log(gamma - a):
          alpha(log(gamma - a)', 0) <= alpha(gamma', 0) + alpha(gamma, a)
        Returns (alpha of the pulled-back derivative, the right hand side, holds).
    """
    pulled = pullback_curve(curve, a)
    lhs = variation_number(derivative_curve(pulled), 0j, rel_tol, include_tail=False)
    rhs = variation_number(derivative_curve(curve), 0j, rel_tol, include_tail=False) + \
        variation_number(curve, a, rel_tol, include_tail=False)
    return lhs, rhs, lhs <= rhs + tol


def ray_tail_bound(kappa, s, T):
    """ Admissibility record of g_s^kappa for t >= T (T at least the tail potential and >= 4) """
    if T < max(tail_potential(s, abs(kappa)), 4.0):
        raise ValueError(f"T={T} is below the ray tail of {s}")
    return TailBound(C_pos=min(residual_bound(kappa, s, T), 5.0),
                     C_der=T*math.exp(-T/2), C_secder=T*T*math.exp(-T/2),
                     offset=-complex(kappa) + complex(0.0, TWO_PI*entry(s, 1)),
                     direction=1+0j, start=T)


def ray_curve(kappa, s, t0, t_cap, H=DEFAULT_H, with_second=False, max_spatial_step=0.1,
              boundary_eps=BOUNDARY_EPS):
    """ Sampled dynamic ray on [t0, t_cap] with exact samplers attached """
    kappa = complex(kappa)
    cfg = RayTraceConfig(max_spatial_step=max_spatial_step, H=H, with_derivatives=True,
                         boundary_eps=boundary_eps)
    trace = trace_ray(kappa, s, t0, t_cap, cfg)
    samples = trace.samples[::-1]
    params = [smp.t for smp in samples]

    def sampler(t):
        return (eval_ray(kappa, s, t, H, eps=boundary_eps).z,
                ray_derivative_t(kappa, s, t, H, eps=boundary_eps))

    second_sampler = None
    second = None
    if with_second:
        second_sampler = lambda t: ray_second_derivative_t(kappa, s, t, H, eps=boundary_eps)
        second = [second_sampler(t) for t in params]

    tail = None
    if t_cap >= max(tail_potential(s, abs(kappa)), 4.0):
        tail = ray_tail_bound(kappa, s, t_cap)
    return SampledCurve(params, [smp.z for smp in samples], [smp.dz_dt for smp in samples],
                        second, tail=tail, sampler=sampler, second_sampler=second_sampler)


@dataclass
class RayVariation:
    alpha: float
    N: int
    bound: float
    alpha_sampled: float
    remainder: float
    verified_range: tuple

    @property
    def holds(self):
        return self.alpha <= self.bound


def curvature_depth(kappa, s, t0, t_cap, H=DEFAULT_H, samples_per_unit=64, max_n=8,
                    boundary_eps=BOUNDARY_EPS):
    """ Smallest N with |g''/g'| < exp(-t/2) for the ray of sigma^N(s) at all grid
        potentials in [F^N(t0), t_cap]. Above the tail potential the inequality
        holds without sampling, so the grid stops there.

        Returns (N, verified_range).
    """
    kappa = complex(kappa)
    for n in range(max_n + 1):
        Tn = F_iter(t0, n)
        shifted = shift(s, n)
        hi = min(t_cap, tail_potential(shifted, abs(kappa)))
        if Tn >= hi:
            return n, (Tn, math.inf)
        grid = np.linspace(Tn, hi, max(2, int(math.ceil((hi - Tn)*samples_per_unit)) + 1))
        ok = True
        for t in grid:
            d2 = ray_second_derivative_t(kappa, shifted, t, H, eps=boundary_eps)
            ratio = abs(d2 / ray_derivative_t(kappa, shifted, t, H, eps=boundary_eps))
            if not ratio < math.exp(-t/2):
                ok = False
                break
        if ok:
            return n, (Tn, math.inf if hi < t_cap else t_cap)
    raise VariationError(f"no N <= {max_n} satisfies the curvature criterion for {s} at t0={t0}")


def dynamic_ray_variation(kappa, s, t0, t_cap=40.0, H=DEFAULT_H, samples_per_unit=64,
                          rel_tol=REL_TOL, verbose=False, boundary_eps=BOUNDARY_EPS):
    """ Variation number of g_s^kappa restricted to (t0, inf) around z = g_s^kappa(t0),
        compared with the bound 2^N.

        The returned alpha is the sampled integral plus the certified tail remainder
        beyond t_cap; holds reports alpha <= 2^N.
    """
    kappa = complex(kappa)
    if not t0 > potential_bounds(s).t_min:
        raise ValueError(f"t0={t0} is not above the minimal potential of {s}")
    if not t_cap > t0:
        raise ValueError("t_cap must exceed t0")

    N, verified = curvature_depth(kappa, s, t0, t_cap, H, samples_per_unit, boundary_eps=boundary_eps)
    curve = ray_curve(kappa, s, t0, t_cap, H, boundary_eps=boundary_eps)
    z0 = complex(curve.points[0])

    sampled = variation_number(curve, z0, rel_tol, include_tail=False)
    if curve.tail is not None:
        remainder = tail_remainder(curve, z0)
    else:
        remainder = math.inf
        warnings.warn(f"t_cap={t_cap} is below the ray tail of {s}; the variation is not certified")

    result = RayVariation(alpha=sampled + remainder, N=N, bound=2.0**N, alpha_sampled=sampled,
                          remainder=remainder, verified_range=verified)
    if not result.holds:
        warnings.warn(f"variation {result.alpha:.6g} of the ray {s} exceeds 2^{N}")
    if verbose:
        print(f"Ray {s} at kappa={kappa}: alpha={result.alpha:.6g}, N={N}, bound={result.bound:g}")
    return result


def imaginary_part_check(kappa, s, N, n_max=50, max_modulus=MAX_ADDRESS_MODULUS):
    """ For a parameter kappa on the parameter ray of s, compare the singular orbit
        z_1 = 0, z_{k+1} = E_kappa(z_k) with
          |Im z_k| <= 2pi(2^N + 1 + |s_k|) + |Im kappa|   and
          |Im kappa| <= 2pi(2^N + 1 + |s_1|).
        Returns the list of violations as (k, value, bound); k = 0 refers to kappa.
    """
    kappa = complex(kappa)
    violations = []
    kappa_bound = TWO_PI*(2.0**N + 1 + abs(entry(s, 1)))
    if abs(kappa.imag) > kappa_bound:
        violations.append((0, abs(kappa.imag), kappa_bound))

    z = 0j
    for k in range(1, n_max+1):
        if is_overflow(z) or abs(z) > max_modulus:
            break
        bound = TWO_PI*(2.0**N + 1 + abs(entry(s, k))) + abs(kappa.imag)
        if abs(z.imag) > bound:
            violations.append((k, abs(z.imag), bound))
        z = E(kappa, z)
    return violations

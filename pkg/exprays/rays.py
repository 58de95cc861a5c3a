"""
Dynamic rays g_s^kappa(t): evaluation by asymptotically seeded pullback,
derivatives in t and kappa, and adaptive tracing as polylines.

A ray point is computed by mapping the potential forward with F until it is
large (the seed level n), writing down the asymptotic form
F^n(t) - kappa + 2 pi i s_{n+1} there, and pulling back with the inverse
branches L_{kappa,s_n}, ..., L_{kappa,s_1}.
"""

import math
import warnings
from dataclasses import dataclass, field

import pandas as pd
from tqdm import tqdm

from exprays.common import TWO_PI, ExpRaysException
from exprays.combinatorics import (EntryOverflow, F, F_iter, entry, potential_bounds,
                                   shift, t_s_K)
from exprays.dual import DualComplex
from exprays.dynamics import BOUNDARY_EPS, BranchCut, log_branch

DEFAULT_H = 50.0
MAX_DEPTH = 4096


class RayError(ExpRaysException):
    pass


class DepthExceeded(RayError):
    pass


@dataclass
class RaySample:
    t: float
    z: complex
    dz_dt: complex = None
    dz_dkappa: complex = None
    residual: float = None
    depth_used: int = 0


@dataclass
class RayTrace:
    address: object
    kappa: complex
    samples: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_frame(self):
        """ DataFrame with columns t, re, im, residual, depth """
        return pd.DataFrame({
            "t": [smp.t for smp in self.samples],
            "re": [smp.z.real for smp in self.samples],
            "im": [smp.z.imag for smp in self.samples],
            "residual": [smp.residual for smp in self.samples],
            "depth": [smp.depth_used for smp in self.samples],
        }, columns=["t", "re", "im", "residual", "depth"])


@dataclass(frozen=True)
class RayTraceConfig:
    max_spatial_step: float = 0.1
    H: float = DEFAULT_H
    max_depth: int = MAX_DEPTH
    min_dt: float = 1e-12
    with_derivatives: bool = False
    boundary_eps: float = BOUNDARY_EPS

    @classmethod
    def from_settings(cls, settings):
        return cls(max_spatial_step=settings["max_spatial_step"], H=settings["H"],
                   max_depth=settings["max_depth"], boundary_eps=settings["boundary_eps"])


def tail_potential(s, K):
    """ Potential from which on the ray tail estimates hold for |kappa| <= K """
    return t_s_K(s, K)


def residual_bound(kappa, s, t):
    """ 2 e^-t (|kappa| + 2 pi |s_2| + 12), the bound on |g(t) - (t - kappa + 2 pi i s_1)| on tails """
    return 2.0 * math.exp(-t) * (abs(kappa) + TWO_PI*abs(entry(s, 2)) + 12.0)


def seed_depth(s, t, K, H=DEFAULT_H, max_depth=MAX_DEPTH):
    """ Smallest n >= 0 with F^n(t) >= max(t_s_K(shift(s,n), K), H).
        A saturated potential counts as large enough.
    """
    if not 50 <= H <= 300:
        raise ValueError(f"seed threshold H={H} outside [50, 300]")
    if not t > potential_bounds(s).t_min:
        raise ValueError(f"potential {t} is not above the minimal potential of the address")
    T = t
    shifted = s
    for n in range(max_depth + 1):
        if T == math.inf or T >= max(t_s_K(shifted, K), H):
            return n
        T = F(T)
        shifted = shift(shifted, 1)
    raise DepthExceeded(f"seed depth for t={t} exceeds {max_depth}")


def _pullback(kappa, s, t, H, depth, max_depth, dual=False, eps=BOUNDARY_EPS):
    """ Run the seeded pullback chain.

        Returns (potentials, levels, offset) where potentials[k] = F^k(t), levels[k]
        approximates g_{sigma^k s}(F^k(t)) for k = 0..n, and offset is the exact
        seed correction levels[n] - potentials[n] = -kappa + 2 pi i s_{n+1}.
    """
    if depth is None:
        n = seed_depth(s, t, abs(kappa), H, max_depth)
    elif depth < 0:
        raise ValueError("pullback depth must be nonnegative")
    else:
        n = depth

    potentials = [t]
    for _ in range(n):
        potentials.append(F(potentials[-1]))
    # start at the deepest level whose potential is still finite
    while n > 0 and potentials[n] == math.inf:
        n -= 1
    potentials = potentials[:n+1]

    offset = -kappa + complex(0.0, TWO_PI*entry(s, n+1))
    if dual:
        z = potentials[n] - DualComplex.variable(kappa) + complex(0.0, TWO_PI*entry(s, n+1))
    else:
        z = potentials[n] + offset

    levels = [z]
    for k in range(n, 0, -1):
        if dual:
            z = z.log_branch(kappa, entry(s, k), eps)
        else:
            z = log_branch(kappa, entry(s, k), z, eps)
        levels.append(z)
    levels.reverse()
    return potentials, levels, offset


def eval_ray(kappa, s, t, H=DEFAULT_H, depth=None, max_depth=MAX_DEPTH, eps=BOUNDARY_EPS):
    """ Point g_s^kappa(t) of the dynamic ray.

        Parameters:
        - kappa: parameter of E_kappa
        - s: ExternalAddress
        - t: potential, must exceed the minimal potential of s
        - H: seed threshold; the asymptotic form is used once F^n(t) >= H
        - depth: force a pullback depth instead of the seed depth
        - eps: angle to the negative real axis below which a pullback step raises BranchCut
    """
    kappa = complex(kappa)
    _, levels, _ = _pullback(kappa, s, t, H, depth, max_depth, eps=eps)
    z = levels[0]
    residual = abs(z - (t - kappa + complex(0.0, TWO_PI*entry(s, 1))))
    return RaySample(t=t, z=z, residual=residual, depth_used=len(levels)-1)


def eval_ray_dual(kappa, s, t, H=DEFAULT_H, depth=None, max_depth=MAX_DEPTH, eps=BOUNDARY_EPS):
    """ Return (g_s^kappa(t), d/dkappa g_s^kappa(t)) by forward-mode pullback """
    kappa = complex(kappa)
    _, levels, _ = _pullback(kappa, s, t, H, depth, max_depth, dual=True, eps=eps)
    return levels[0].value, levels[0].d_kappa


def approximant(kappa, s, t, n):
    """ g^n(t) = L_{s_1} o ... o L_{s_n}(F^n(t)), seeded with the bare potential """
    kappa = complex(kappa)
    potentials = [t]
    for _ in range(n):
        potentials.append(F(potentials[-1]))
    while n > 0 and potentials[n] == math.inf:
        n -= 1
    z = complex(potentials[n])
    for k in range(n, 0, -1):
        z = log_branch(kappa, entry(s, k), z)
    return z


def ray_derivative_t(kappa, s, t, H=DEFAULT_H, max_depth=MAX_DEPTH, eps=BOUNDARY_EPS):
    """ d/dt g_s^kappa(t) as the product over k >= 1 of (F^k(t)+1) / g_{sigma^k s}(F^k(t)).

        Each factor is evaluated as 1/(1 + (z_k - F^k(t) - 1)/(F^k(t) + 1)) so that
        factors at huge potentials come out as exactly 1. The product runs over the
        pullback levels plus one asymptotic factor beyond the seed; the remaining
        factors differ from 1 by less than e^-H.
    """
    kappa = complex(kappa)
    potentials, levels, offset = _pullback(kappa, s, t, H, None, max_depth, eps=eps)
    n = len(levels) - 1
    prod = complex(1.0)
    for k in range(1, n):
        Tk = potentials[k]
        prod /= 1.0 + (levels[k] - Tk - 1.0) / (Tk + 1.0)
    if n >= 1:
        prod /= 1.0 + (offset - 1.0) / (potentials[n] + 1.0)

    T_next = F(potentials[n])
    if T_next != math.inf:
        try:
            c_next = -kappa + complex(0.0, TWO_PI*entry(s, n+2))
            prod /= 1.0 + (c_next - 1.0) / (T_next + 1.0)
        except EntryOverflow:
            pass
    return prod


def ray_second_derivative_t(kappa, s, t, H=DEFAULT_H, max_depth=MAX_DEPTH, eps=BOUNDARY_EPS):
    """ Central difference of ray_derivative_t, step 1e-5 * max(1, |t|).
        Accurate to O(h^2) down to a cancellation floor of about 1e-8.
    """
    h = 1e-5 * max(1.0, abs(t))
    d_plus = ray_derivative_t(kappa, s, t + h, H, max_depth, eps)
    d_minus = ray_derivative_t(kappa, s, t - h, H, max_depth, eps)
    return (d_plus - d_minus) / (2.0*h)


def orbit_asymptotics_defect(kappa, s, t, n, H=DEFAULT_H):
    """ |z_n - (F^(n-1)(t) - kappa + 2 pi i s_n)| for the orbit z_n = E^(n-1)(g_s(t)).

        z_n is evaluated as g_{sigma^(n-1) s}(F^(n-1)(t)) instead of by forward
        iteration, which multiplies rounding errors by |z_k| at every step.
    """
    if n < 1:
        raise ValueError("orbit index starts at 1")
    kappa = complex(kappa)
    T = F_iter(t, n-1)
    z = eval_ray(kappa, shift(s, n-1), T, H).z
    return abs(z - (T - kappa + complex(0.0, TWO_PI*entry(s, n))))


def trace_ray(kappa, s, t_lo, t_hi, config=None, verbose=False):
    """ Sample the dynamic ray on [t_lo, t_hi] as a polyline.

        Starting at t_hi, potentials are lowered with a step that halves whenever two
        consecutive points are more than config.max_spatial_step apart and doubles
        after every accepted point. Both endpoints are included and t decreases
        strictly along the samples.

        A BranchCut during tracing is re-raised with .t set to the failing potential
        and .partial holding the trace up to that point.
    """
    cfg = config if config is not None else RayTraceConfig()
    kappa = complex(kappa)
    if not t_lo < t_hi:
        raise ValueError("trace_ray needs t_lo < t_hi")
    if not t_lo > potential_bounds(s).t_min:
        raise ValueError(f"t_lo={t_lo} is not above the minimal potential of the address")

    tail = tail_potential(s, abs(kappa))
    trace = RayTrace(address=s, kappa=kappa)
    refinements, unresolved, max_ratio = 0, 0, 0.0

    def sample(t):
        try:
            smp = eval_ray(kappa, s, t, cfg.H, max_depth=cfg.max_depth, eps=cfg.boundary_eps)
            if cfg.with_derivatives:
                smp.dz_dt = ray_derivative_t(kappa, s, t, cfg.H, cfg.max_depth, cfg.boundary_eps)
        except BranchCut as e:
            e.t = t
            e.partial = trace
            raise
        return smp

    def accept(smp):
        nonlocal max_ratio
        trace.samples.append(smp)
        if smp.t >= tail:
            max_ratio = max(max_ratio, smp.residual / residual_bound(kappa, s, smp.t))

    current = sample(t_hi)
    accept(current)
    dt = cfg.max_spatial_step
    with tqdm(total=t_hi-t_lo, disable=not verbose, desc=f"ray {s}") as pbar:
        while current.t > t_lo:
            t_next = max(t_lo, current.t - dt)
            cand = sample(t_next)
            if abs(cand.z - current.z) > cfg.max_spatial_step:
                if dt > cfg.min_dt:
                    dt /= 2
                    refinements += 1
                    continue
                unresolved += 1
            accept(cand)
            pbar.update(current.t - cand.t)
            current = cand
            dt = min(2*dt, t_hi - t_lo)

    trace.diagnostics = {
        "refinements": refinements,
        "unresolved_steps": unresolved,
        "max_bound_ratio": max_ratio,
        "tail_potential": tail,
    }
    if unresolved > 0:
        warnings.warn(f"{unresolved} steps of the trace of {s} exceed the spatial step at the minimum t-step")
    if verbose:
        print(f"Traced {s} with {len(trace.samples)} samples, {refinements} refinements")
    return trace

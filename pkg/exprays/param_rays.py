"""
Parameter rays G_s: the curve of parameters kappa for which the singular value 0
sits on the dynamic ray of address s at potential t, i.e. g_s^kappa(t) = 0.

Roots are found with Newton's method on kappa -> g_s^kappa(t) (the roots are
simple), and rays are followed by predictor-corrector continuation from the
asymptotic tail down to smaller potentials.
"""

import math
import warnings
from dataclasses import dataclass, field

import pandas as pd
from tqdm import tqdm

from exprays.common import TWO_PI, ExpRaysException
from exprays.combinatorics import entry, potential_bounds
from exprays.dynamics import BOUNDARY_EPS, DynamicsError, Truncated, external_address, orbit
from exprays.rays import DEFAULT_H, RayError, eval_ray, eval_ray_dual, seed_depth


class ParamRayError(ExpRaysException):
    pass


class NoConvergence(ParamRayError):
    pass


class SmallDerivative(ParamRayError):
    pass


class DomainError(ParamRayError):
    pass


class PotentialTooSmall(ParamRayError):
    pass


@dataclass(frozen=True)
class NewtonConfig:
    residual_tol: float = 1e-12
    max_iters: int = 50
    min_derivative: float = 1e-8

    def __post_init__(self):
        if not (self.residual_tol > 0 and self.max_iters > 0 and self.min_derivative > 0):
            raise ValueError("NewtonConfig fields must be positive")

    @classmethod
    def from_settings(cls, settings):
        return cls(residual_tol=settings["residual_tol"], max_iters=settings["max_iters"],
                   min_derivative=settings["min_derivative"])


@dataclass(frozen=True)
class ParamTraceConfig:
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    dt0: float = 1.0
    min_dt: float = 1e-9
    max_kappa_step: float = 0.1
    max_halvings: int = 40
    growth: float = 1.25
    H: float = DEFAULT_H
    checkpoints: tuple = ()
    boundary_eps: float = BOUNDARY_EPS

    @classmethod
    def from_settings(cls, settings, checkpoints=()):
        return cls(newton=NewtonConfig.from_settings(settings), dt0=settings["dt0"],
                   min_dt=settings["min_dt"], max_kappa_step=settings["max_kappa_step"],
                   max_halvings=settings["max_halvings"], H=settings["H"],
                   checkpoints=tuple(checkpoints), boundary_eps=settings["boundary_eps"])


@dataclass
class ParamSample:
    t: float
    kappa: complex
    residual: float
    newton_iters: int


@dataclass
class ParamTrace:
    address: object
    samples: list = field(default_factory=list)
    stopped_early: bool = False
    config: ParamTraceConfig = None

    @property
    def bound_checks(self):
        """ Per sample: (|kappa - t - 2 pi i s_1| < 5, |kappa| < 2 pi t) """
        s1 = entry(self.address, 1)
        return [(abs(smp.kappa - smp.t - complex(0.0, TWO_PI*s1)) < 5.0,
                 abs(smp.kappa) < TWO_PI*smp.t) for smp in self.samples]

    def sample_at(self, t):
        """ The sample with potential exactly t, or None """
        for smp in self.samples:
            if smp.t == t:
                return smp
        return None

    def to_frame(self):
        """ DataFrame with columns t, re_kappa, im_kappa, residual, iters """
        return pd.DataFrame({
            "t": [smp.t for smp in self.samples],
            "re_kappa": [smp.kappa.real for smp in self.samples],
            "im_kappa": [smp.kappa.imag for smp in self.samples],
            "residual": [smp.residual for smp in self.samples],
            "iters": [smp.newton_iters for smp in self.samples],
        }, columns=["t", "re_kappa", "im_kappa", "residual", "iters"])


def tail_start(s):
    """ T_s = 20 + 2 t_star, the potential above which parameter ray tails are controlled """
    return 20.0 + 2.0*potential_bounds(s).t_star


def tail_seed(s, t):
    """ Newton starting point t + 2 pi i s_1 on the parameter ray tail.
        The root lies within distance 5 of it.
    """
    if t < tail_start(s):
        raise PotentialTooSmall(f"t={t} is below the tail potential {tail_start(s)} of {s}")
    return complex(t, TWO_PI*entry(s, 1))


def _newton(s, t, kappa0, cfg, H, eps=BOUNDARY_EPS):
    kappa = complex(kappa0)
    for it in range(cfg.max_iters + 1):
        try:
            g, dg = eval_ray_dual(kappa, s, t, H, eps=eps)
        except (DynamicsError, RayError) as e:
            raise DomainError(f"g_s(t) undefined at kappa={kappa!r}: {e}")
        residual = abs(g)
        if residual <= cfg.residual_tol:
            return kappa, it, residual
        if it == cfg.max_iters:
            break
        if abs(dg) < cfg.min_derivative:
            raise SmallDerivative(f"|dg/dkappa|={abs(dg):.3g} at kappa={kappa!r}")
        kappa = kappa - g/dg
    raise NoConvergence(f"Newton did not reach {cfg.residual_tol} in {cfg.max_iters} steps "
                        f"(last residual {residual:.3g})")


def newton_solve(s, t, kappa0, cfg=None, H=DEFAULT_H, eps=BOUNDARY_EPS):
    """ Solve g_s^kappa(t) = 0 for kappa starting at kappa0.
        Returns (kappa, iters) where iters counts Newton updates.
    """
    if cfg is None:
        cfg = NewtonConfig()
    if not t > potential_bounds(s).t_min:
        raise ValueError(f"potential {t} is not above the minimal potential of the address")
    kappa, iters, _ = _newton(s, t, kappa0, cfg, H, eps)
    return kappa, iters


def trace_parameter_ray(s, t_start, t_end, cfg=None, anchor=None, verbose=False):
    """ Follow the parameter ray G_s from t_start down to t_end.

        Parameters:
        - s: ExternalAddress
        - t_start: starting potential; must be >= 20 + 2 t_star unless anchor is given
        - t_end: final potential, above the minimal potential of s
        - cfg: ParamTraceConfig
        - anchor: optional verified (t, kappa) pair to start from instead of the tail seed

        Each step predicts kappa by linear extrapolation of the last two samples and
        corrects with Newton. A step is accepted when Newton converges and kappa moved
        by at most cfg.max_kappa_step; otherwise dt is halved. After three accepted
        steps in a row dt grows by cfg.growth. Tracing failures do not raise: the
        trace is returned with stopped_early set.
    """
    if cfg is None:
        cfg = ParamTraceConfig()
    if not t_end > potential_bounds(s).t_min:
        raise ValueError(f"t_end={t_end} is not above the minimal potential of {s}")
    if anchor is None:
        if not t_start > t_end:
            raise ValueError("trace_parameter_ray needs t_start > t_end")
        kappa, iters, res = _newton(s, t_start, tail_seed(s, t_start), cfg.newton, cfg.H, cfg.boundary_eps)
    else:
        t_start = anchor[0]
        kappa, iters, res = _newton(s, t_start, anchor[1], cfg.newton, cfg.H, cfg.boundary_eps)

    trace = ParamTrace(address=s, config=cfg)
    trace.samples.append(ParamSample(t_start, kappa, res, iters))
    checkpoints = sorted((c for c in cfg.checkpoints if t_end < c < t_start), reverse=True)
    T_s = tail_start(s)

    dt = cfg.dt0
    successes, halvings = 0, 0
    with tqdm(total=t_start-t_end, disable=not verbose, desc=f"parameter ray {s}") as pbar:
        while trace.samples[-1].t > t_end:
            last = trace.samples[-1]
            if len(trace.samples) >= 2:
                prev = trace.samples[-2]
                slope = (last.kappa - prev.kappa) / (last.t - prev.t)
                # keep the predicted kappa step inside the acceptance bound
                if abs(slope) > 0:
                    dt = min(dt, 0.9*cfg.max_kappa_step/abs(slope))
            t_new = max(t_end, last.t - dt)
            while checkpoints and checkpoints[0] >= last.t:
                checkpoints.pop(0)
            if checkpoints and checkpoints[0] > t_new:
                t_new = checkpoints[0]

            if len(trace.samples) >= 2:
                kappa_pred = last.kappa + slope*(t_new - last.t)
            elif t_new >= T_s:
                kappa_pred = tail_seed(s, t_new)
            else:
                kappa_pred = last.kappa + (t_new - last.t)

            try:
                kappa, iters, res = _newton(s, t_new, kappa_pred, cfg.newton, cfg.H, cfg.boundary_eps)
                accepted = abs(kappa - last.kappa) <= cfg.max_kappa_step
            except (NoConvergence, DomainError, SmallDerivative):
                accepted = False

            if not accepted:
                dt /= 2
                halvings += 1
                successes = 0
                if dt < cfg.min_dt or halvings > cfg.max_halvings:
                    trace.stopped_early = True
                    break
                continue

            trace.samples.append(ParamSample(t_new, kappa, res, iters))
            pbar.update(last.t - t_new)
            halvings = 0
            successes += 1
            if successes >= 3:
                dt *= cfg.growth
                successes = 0

    if trace.stopped_early:
        warnings.warn(f"parameter ray {s} stopped early at t={trace.samples[-1].t}")
    if verbose:
        print(f"Traced parameter ray {s}: {len(trace.samples)} samples, "
              f"t in [{trace.samples[-1].t:.6g}, {t_start:.6g}]")
    return trace


@dataclass
class Violation:
    t: float
    check: str
    detail: str


@dataclass
class VerifyReport:
    violations: list = field(default_factory=list)
    info: list = field(default_factory=list)
    n_samples: int = 0

    @property
    def ok(self):
        return len(self.violations) == 0

    def checks_violated(self):
        return sorted(set(v.check for v in self.violations))

    def to_dict(self):
        return {
            "n_samples": self.n_samples,
            "ok": self.ok,
            "violations": [vars(v) for v in self.violations],
            "info": [vars(v) for v in self.info],
        }


def verify_trace(trace, address_entries=8, orbit_steps=200, escape_re=50.0):
    """ Check every sample of a parameter ray trace against the known bounds.

        (a) |kappa - t - 2 pi i s_1| < 5                               for t >= 20 + 2 t_star
        (b) |kappa - t - 2 pi i s_1| <= 2e^-t (2 pi t + 2 pi |s_2| + 12) for the same t
        (c) |kappa| < 2 pi t
        (d) |kappa| <= 2t, informational only, for t >= 30
        (e) the singular orbit escapes
        (f) the external address of 0 starts with the entries of s, as far as the
            forward orbit can resolve them
        (g) |g_s^kappa(t)| stays below the Newton tolerance when re-evaluated at
            twice the pullback depth
    """
    report = VerifyReport(n_samples=len(trace.samples))
    if not trace.samples:
        return report
    s = trace.address
    s1, s2 = entry(s, 1), entry(s, 2)
    T_s = tail_start(s)
    eps = 2.0**-52
    cfg = trace.config if trace.config is not None else ParamTraceConfig()

    for smp in trace.samples:
        t, kappa = smp.t, smp.kappa
        try:
            depth = seed_depth(s, t, abs(kappa), cfg.H)
            deep = eval_ray(kappa, s, t, cfg.H, depth=2*max(depth, 1), eps=cfg.boundary_eps)
            root_tol = cfg.newton.residual_tol + 64*eps*abs(kappa)
            if abs(deep.z) > root_tol:
                report.violations.append(Violation(t, "g", f"|g| = {abs(deep.z):.3g} at doubled depth"))
        except (DynamicsError, RayError) as e:
            report.violations.append(Violation(t, "g", f"re-evaluation failed: {e}"))
        dev = abs(kappa - t - complex(0.0, TWO_PI*s1))
        if t >= T_s:
            if not dev < 5.0:
                report.violations.append(Violation(t, "a", f"|kappa - t - 2 pi i s_1| = {dev:.6g}"))
            bound = 2.0*math.exp(-t)*(TWO_PI*t + TWO_PI*abs(s2) + 12.0)
            slack = smp.residual + 64*eps*(abs(kappa) + t)
            if dev > bound + slack:
                report.violations.append(Violation(t, "b", f"deviation {dev:.3g} above bound {bound:.3g}"))
        if not abs(kappa) < TWO_PI*t:
            report.violations.append(Violation(t, "c", f"|kappa| = {abs(kappa):.6g} >= 2 pi t"))
        if t >= 30 and abs(kappa) > 2*t:
            report.info.append(Violation(t, "d", f"|kappa| = {abs(kappa):.6g} > 2t"))

        rec = orbit(kappa, 0j, orbit_steps, escape_re)
        if not rec.escaped:
            report.violations.append(Violation(t, "e", f"singular orbit not escaping in {orbit_steps} steps"))

        try:
            entries = external_address(kappa, 0j, address_entries, cfg.boundary_eps)
        except Truncated as e:
            entries = e.entries
        except DynamicsError as e:
            report.info.append(Violation(t, "f", f"address undecidable: {e}"))
            continue
        expected = [entry(s, k+1) for k in range(len(entries))]
        if entries != expected:
            report.violations.append(Violation(t, "f", f"singular address {entries} != {expected}"))
    return report

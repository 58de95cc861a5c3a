"""
Invariant suites run by `exprays verify`. Each suite samples cases, checks one
family of properties and returns a SuiteResult listing every violation.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from tqdm import tqdm

from exprays.common import TWO_PI
from exprays.combinatorics import (F, ExternalAddress, address_key, entry, parse_address,
                                   shift, t_s_K)
from exprays.dynamics import BOUNDARY_EPS, DynamicsError, E
from exprays.param_rays import (ParamTraceConfig, newton_solve, tail_seed, trace_parameter_ray,
                                verify_trace)
from exprays.rays import (RayError, eval_ray, eval_ray_dual, ray_derivative_t, ray_second_derivative_t,
                          residual_bound)
from exprays.render import ImageSpec, render_parameter_plane
from exprays.variation import (curvature_depth, derivative_bound_check, dynamic_ray_variation,
                               halfline_variation, imaginary_part_check, ray_curve, SampledCurve,
                               TailBound, VariationError, variation_number)

EPS = 2.0**-52

ORDER_ADDRESSES = ["|0", "1|0", "|1", "|-1", "|1 0", "|2", "-1|0"]
DYNAMIC_ORDER_ADDRESSES = ["|2", "|1", "|1 0", "1|0", "|0", "-1|0", "|-1"]
FAR_T, NEAR_T = 35.0, 3.0
# derivative bounds are checked from this multiple of t_s_K on
DERIVATIVE_TAIL_FACTOR = 2.0


@dataclass
class SuiteResult:
    name: str
    n_checks: int = 0
    skipped: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return len(self.violations) == 0

    def check(self, condition, message):
        self.n_checks += 1
        if not condition:
            self.violations.append(message)


def random_address(rng, max_pre=2, max_period=3, max_entry=3):
    pre = rng.integers(-max_entry, max_entry+1, size=rng.integers(0, max_pre+1))
    per = rng.integers(-max_entry, max_entry+1, size=rng.integers(1, max_period+1))
    return ExternalAddress.periodic([int(x) for x in pre], [int(x) for x in per])


def random_kappa(rng, radius=5.0):
    r = radius*math.sqrt(rng.uniform())
    return cmath.rect(r, rng.uniform(0, TWO_PI))


def random_tail_cases(rng, n, span=20.0, lift=0.0, factor=1.0):
    """ (kappa, s, t) with |kappa| <= 5 and t in (factor*t_s_K + lift, factor*t_s_K + span) """
    cases = []
    for _ in range(n):
        kappa = random_kappa(rng)
        s = random_address(rng)
        t = factor*t_s_K(s, abs(kappa)) + rng.uniform(lift + 1e-3, span)
        cases.append((kappa, s, t))
    return cases


def semiconjugacy_suite(rng, n=200, tol=1e-9):
    """ E_kappa(g_s(t)) = g_{sigma s}(F(t)), compared relative to the modulus of the image """
    res = SuiteResult("semiconjugacy")
    for kappa, s, t in random_tail_cases(rng, n):
        try:
            lhs = E(kappa, eval_ray(kappa, s, t).z)
            rhs = eval_ray(kappa, shift(s, 1), F(t)).z
        except (DynamicsError, RayError):
            res.skipped += 1
            continue
        res.check(abs(lhs - rhs) <= tol*max(1.0, abs(rhs)),
                  f"kappa={kappa:.6g} s={s} t={t:.6g}: |E(g) - g_sigma(F(t))| = {abs(lhs-rhs):.3g}")
    return res


def tail_asymptotics_suite(rng, n=200):
    res = SuiteResult("tail asymptotics")
    for kappa, s, t in random_tail_cases(rng, n):
        try:
            smp = eval_ray(kappa, s, t)
        except (DynamicsError, RayError):
            res.skipped += 1
            continue
        slack = 64*EPS*(t + abs(kappa) + TWO_PI*abs(entry(s, 1)))
        res.check(smp.residual <= residual_bound(kappa, s, t) + slack and smp.residual < 5.0,
                  f"kappa={kappa:.6g} s={s} t={t:.6g}: residual {smp.residual:.3g}")
    return res


def derivative_suite(rng, n=50, rel_tol=1e-6):
    """ Product formula for g' against central differences, and |g' - 1| < exp(-t/2) """
    res = SuiteResult("first derivative")
    for kappa, s, t in random_tail_cases(rng, n, factor=DERIVATIVE_TAIL_FACTOR):
        try:
            d = ray_derivative_t(kappa, s, t)
            h = 1e-5*max(1.0, t)
            fd = (eval_ray(kappa, s, t+h).z - eval_ray(kappa, s, t-h).z) / (2*h)
        except (DynamicsError, RayError):
            res.skipped += 1
            continue
        res.check(abs(d - fd) <= rel_tol*abs(d), f"kappa={kappa:.6g} s={s} t={t:.6g}: g'={d} vs {fd}")
        res.check(abs(d - 1) < math.exp(-t/2) + 64*EPS, f"kappa={kappa:.6g} s={s} t={t:.6g}: |g'-1|={abs(d-1):.3g}")
    return res


def second_derivative_suite(rng, n=50):
    res = SuiteResult("second derivative")
    for kappa, s, t in random_tail_cases(rng, n, factor=DERIVATIVE_TAIL_FACTOR):
        try:
            d1 = ray_derivative_t(kappa, s, t)
            d2 = ray_second_derivative_t(kappa, s, t)
        except (DynamicsError, RayError):
            res.skipped += 1
            continue
        bound = math.exp(-t/2)
        res.check(abs(d2) < bound, f"kappa={kappa:.6g} s={s} t={t:.6g}: |g''|={abs(d2):.3g}")
        res.check(abs(d2/d1) < bound, f"kappa={kappa:.6g} s={s} t={t:.6g}: |g''/g'|={abs(d2/d1):.3g}")
    return res


def depth_convergence_suite(rng, n=50, k_max=10):
    """ Seeding one level deeper moves the ray point by at most 2^-k at depth k.
        Potentials start 5 above the tail threshold, where the seed error is below 1/2.
    """
    res = SuiteResult("pullback depth")
    for kappa, s, t in random_tail_cases(rng, n, lift=5.0):
        try:
            values = [eval_ray(kappa, s, t, depth=k).z for k in range(k_max+1)]
        except (DynamicsError, RayError):
            res.skipped += 1
            continue
        for k in range(1, k_max+1):
            diff = abs(values[k] - values[k-1])
            res.check(diff <= 2.0**-k + 64*EPS*(t + abs(kappa)),
                      f"kappa={kappa:.6g} s={s} t={t:.6g}: depth {k} moved by {diff:.3g}")
    return res


def kappa_derivative_suite(rng, n=50, h=1e-6, rel_tol=1e-6):
    """ Forward-mode d/dkappa of the ray point against central differences in kappa """
    res = SuiteResult("kappa derivative")
    for kappa, s, t in random_tail_cases(rng, n):
        try:
            _, dz = eval_ray_dual(kappa, s, t)
            fd = (eval_ray(kappa + h, s, t).z - eval_ray(kappa - h, s, t).z) / (2*h)
        except (DynamicsError, RayError):
            res.skipped += 1
            continue
        res.check(abs(dz - fd) <= rel_tol*abs(dz), f"kappa={kappa:.6g} s={s} t={t:.6g}: dz/dkappa={dz} vs {fd}")
    return res


def dynamic_order_suite(kappa=-2.0, t=2.0, addresses=None):
    """ Dynamic rays of E_kappa at a common potential are stacked vertically in lexicographic order """
    res = SuiteResult("dynamic ray order")
    texts = DYNAMIC_ORDER_ADDRESSES if addresses is None else addresses
    ordered = sorted((parse_address(x) for x in texts), key=address_key)
    heights = [eval_ray(kappa, s, t).z.imag for s in ordered]
    for (a, ya), (b, yb) in zip(zip(ordered, heights), zip(ordered[1:], heights[1:])):
        res.check(ya < yb, f"{a} < {b} but Im g(t={t}) = {ya:.9g} is not below {yb:.9g} at kappa={kappa}")
    return res


def parameter_tail_suite(t=30.0, max_iters=6):
    """ Newton from the tail seed at t=30 for every address s_1|s_2 with |s_1|, |s_2| <= 3 """
    res = SuiteResult("parameter ray tails")
    for s1 in range(-3, 4):
        for s2 in range(-3, 4):
            s = ExternalAddress.periodic([s1], [s2])
            kappa, iters = newton_solve(s, t, tail_seed(s, t))
            dev = abs(kappa - t - complex(0.0, TWO_PI*s1))
            bound = 2*math.exp(-t)*(TWO_PI*t + TWO_PI*abs(s2) + 12)
            res.check(iters <= max_iters, f"{s}: {iters} Newton steps")
            res.check(dev <= bound + 64*EPS*(abs(kappa) + t), f"{s}: deviation {dev:.3g} above {bound:.3g}")
    return res


def trace_order_rays(t_start=40.0, verbose=False, boundary_eps=BOUNDARY_EPS):
    """ Parameter rays of ORDER_ADDRESSES traced to NEAR_T, landing exactly on FAR_T and NEAR_T """
    cfg = ParamTraceConfig(checkpoints=(FAR_T, NEAR_T), boundary_eps=boundary_eps)
    return {text: trace_parameter_ray(parse_address(text), t_start, NEAR_T, cfg, verbose=verbose)
            for text in ORDER_ADDRESSES}


def order_suite(traces=None, min_gap=0.5):
    """ Parameter rays are disjoint and stacked vertically in lexicographic order.
        Rays with different s_1 are compared at t=35; rays sharing s_1 at t=3.
    """
    res = SuiteResult("parameter ray order")
    if traces is None:
        traces = trace_order_rays()
    for text, trace in traces.items():
        res.check(not trace.stopped_early, f"{text} stopped early at t={trace.samples[-1].t}")

    addresses = sorted((parse_address(x) for x in traces), key=address_key)
    by_text = {str(parse_address(x)): tr for x, tr in traces.items()}
    for i, a in enumerate(addresses):
        for b in addresses[i+1:]:
            same = entry(a, 1) == entry(b, 1)
            t = NEAR_T if same else FAR_T
            sa, sb = by_text[str(a)].sample_at(t), by_text[str(b)].sample_at(t)
            if sa is None or sb is None:
                res.check(False, f"{a} or {b} has no sample at t={t}")
                continue
            gap = abs(sa.kappa - sb.kappa)
            res.check(gap > 0 if same else gap >= min_gap, f"{a} and {b} are {gap:.3g} apart at t={t}")
            res.check(sa.kappa.imag < sb.kappa.imag, f"{a} < {b} but Im kappa is not below at t={t}")
    return res


def full_length_suite(trace=None):
    res = SuiteResult("full-length parameter ray")
    s = parse_address("|0")
    if trace is None:
        trace = trace_parameter_ray(s, 40.0, 1.0)
    res.check(not trace.stopped_early, f"trace stopped early at t={trace.samples[-1].t}")
    report = verify_trace(trace)
    for v in report.violations:
        res.check(False, f"t={v.t:.6g} check {v.check}: {v.detail}")
    for smp in trace.samples:
        res.check(abs(smp.kappa.imag) <= 1e-10, f"t={smp.t:.6g}: Im kappa = {smp.kappa.imag:.3g}")
        res.check(smp.residual <= 1e-12, f"t={smp.t:.6g}: residual {smp.residual:.3g}")
    return res


def variation_suite(rng, n_halfline=20, rays=None):
    res = SuiteResult("variation numbers")
    for _ in range(n_halfline):
        lam = random_kappa(rng, 2.0)
        a = random_kappa(rng, 2.0)
        arg = float(np.angle(a/lam)) % TWO_PI
        expected = abs(arg - math.pi)/TWO_PI
        res.check(abs(halfline_variation(lam, a) - expected) <= 1e-12, f"half line {lam} around {a}")

    lam, a = cmath.rect(1.0, 0.7), complex(-0.3, 1.1)
    params = np.concatenate([[0.0], np.geomspace(1e-3, 1e4, 200)])
    line = SampledCurve(params, lam*params, np.full(len(params), lam),
                        tail=TailBound(C_pos=0.0, C_der=0.0, C_secder=0.0, direction=lam))
    measured = variation_number(line, a)
    res.check(abs(measured - halfline_variation(lam, a)) <= 1e-3,
              f"truncated half line gives {measured:.6g}, closed form {halfline_variation(lam, a):.6g}")

    if rays is None:
        rays = VARIATION_RAYS
    for kappa, text, t0 in rays:
        s = parse_address(text)
        rv = dynamic_ray_variation(kappa, s, t0)
        res.check(rv.holds, f"kappa={kappa} s={text}: alpha={rv.alpha:.6g} > 2^{rv.N}")
        curve = ray_curve(kappa, s, t0, 40.0, with_second=True)
        base = complex(curve.points[0]) - 1 - 0.5j
        chk = derivative_bound_check(curve, base)
        res.check(chk.holds, f"kappa={kappa} s={text}: alpha={chk.alpha:.6g} > alpha'={chk.alpha_derivative:.6g} + 1/2")
    return res


VARIATION_RAYS = [
    (-2.0, "|0", 1.0), (-2.0, "|1", 1.0), (-2.0, "|-1", 2.0), (-2.0, "1|0", 1.5), (-2.0, "|1 0", 2.0),
    (complex(-1.5, 0.5), "|0", 1.0), (complex(-1.5, 0.5), "|1", 1.5), (complex(-2, -1), "|-1", 1.0),
    (complex(-3, 1), "|2", 1.0), (complex(-2.5, -0.5), "-1|0", 2.0),
]


def imaginary_bounds_suite(traces):
    """ Singular orbits at sampled parameters stay within the vertical bounds set by 2^N """
    res = SuiteResult("singular orbit imaginary parts")
    for text, trace in traces.items():
        s = parse_address(text)
        for smp in trace.samples[::max(1, len(trace.samples)//5)]:
            try:
                N, _ = curvature_depth(smp.kappa, s, smp.t, 40.0)
            except (DynamicsError, RayError, VariationError):
                res.skipped += 1
                continue
            bad = imaginary_part_check(smp.kappa, s, N)
            res.check(not bad, f"{text} t={smp.t:.6g} N={N}: (k, |Im|, bound) violations {bad}")
    return res


def render_suite(trace, settings=None):
    """ Rendering is deterministic and the |0 parameter ray runs through escaping parameters """
    res = SuiteResult("rendering")
    spec = ImageSpec(center=complex(-1, 0), width_units=8.0, width_px=400, height_px=400)
    if settings is not None:
        spec = ImageSpec.from_settings(settings)
    first = render_parameter_plane(spec, [trace])
    second = render_parameter_plane(spec, [trace])
    res.check(first.image.tobytes() == second.image.tobytes(), "two renders differ")
    res.check(bool(np.all(first.counts[first.overlay_mask] >= 0)), "parameter ray overlay covers non-escaping pixels")
    return res


def run_all(settings, verbose=False):
    """ Run every suite; returns the list of SuiteResults """
    rng = np.random.default_rng(settings["seed"])
    n = settings["n_random"]
    results = []
    steps = [
        ("semiconjugacy", lambda: semiconjugacy_suite(rng, n)),
        ("tail asymptotics", lambda: tail_asymptotics_suite(rng, n)),
        ("first derivative", lambda: derivative_suite(rng)),
        ("second derivative", lambda: second_derivative_suite(rng)),
        ("kappa derivative", lambda: kappa_derivative_suite(rng)),
        ("dynamic ray order", lambda: dynamic_order_suite()),
        ("pullback depth", lambda: depth_convergence_suite(rng)),
        ("parameter tails", lambda: parameter_tail_suite()),
    ]
    for name, step in tqdm(steps, disable=not verbose, desc="verify"):
        results.append(step())

    cfg = ParamTraceConfig(boundary_eps=settings["boundary_eps"])
    full = trace_parameter_ray(parse_address("|0"), 40.0, 1.0, cfg, verbose=verbose)
    results.append(full_length_suite(full))
    traces = trace_order_rays(verbose=verbose, boundary_eps=settings["boundary_eps"])
    results.append(order_suite(traces))
    results.append(imaginary_bounds_suite(traces))
    results.append(variation_suite(rng))
    results.append(render_suite(full))
    if verbose:
        print(summary_frame(results).to_string(index=False))
    return results


def summary_frame(results):
    return pd.DataFrame({
        "suite": [r.name for r in results],
        "checks": [r.n_checks for r in results],
        "skipped": [r.skipped for r in results],
        "violations": [len(r.violations) for r in results],
    }, columns=["suite", "checks", "skipped", "violations"])

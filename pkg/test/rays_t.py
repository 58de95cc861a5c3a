import math
import unittest

import numpy as np

import exprays.rays as rays
from exprays.common import TWO_PI
from exprays.combinatorics import F, F_iter, Ordering, lex_compare, parse_address, shift, t_s_K
from exprays.config import merge_settings
from exprays.dynamics import BranchCut, E
from exprays.verify import random_tail_cases

class TestRays(unittest.TestCase):

    zero = None
    trace = None

    @classmethod
    def setUpClass(cls):
        cls.zero = parse_address("|0")
        cls.trace = rays.trace_ray(-2, cls.zero, 1.0, 30.0)

    def test_seed_depth(self):
        self.assertEqual(rays.seed_depth(self.zero, 200.0, 10, 50), 0)
        self.assertEqual(rays.seed_depth(self.zero, 1.0, 10, 50), 3)
        n = rays.seed_depth(self.zero, 0.05, 1, 50)
        self.assertGreaterEqual(F_iter(0.05, n), 50)
        self.assertLess(F_iter(0.05, n-1), 50)
        with self.assertRaises(rays.DepthExceeded):
            rays.seed_depth(self.zero, 1e-3, 1, 50, max_depth=10)
        with self.assertRaises(ValueError):
            rays.seed_depth(self.zero, 1.0, 1, 20)
        with self.assertRaises(ValueError):
            rays.seed_depth(self.zero, 0.0, 1, 50)

    def test_eval_ray(self):
        smp = rays.eval_ray(-2, self.zero, 25.0)
        self.assertLess(abs(smp.z - 27), 2*math.exp(-25)*14)
        self.assertAlmostEqual(smp.z.imag, 0.0, places=12)
        self.assertEqual(smp.depth_used, 1)
        self.assertEqual(smp.residual, abs(smp.z - 27))

        # real parameters with an attracting fixed point keep the ray of 0 on the real line
        for kappa in (-2.0, -3.0):
            for t in (0.5, 2.0, 7.0):
                self.assertAlmostEqual(rays.eval_ray(kappa, self.zero, t).z.imag, 0.0, places=12)

        # the ray of address 1 is the ray of 0 moved up by 2 pi i, when kappa moves down by 2 pi i
        a = rays.eval_ray(complex(-2, 0.3), parse_address("|1"), 4.0).z
        b = rays.eval_ray(complex(-2, 0.3 - TWO_PI), self.zero, 4.0).z
        self.assertLess(abs(a - b), 1e-12)

    def test_semiconjugacy(self):
        rng = np.random.default_rng(5)
        for kappa, s, t in random_tail_cases(rng, 40):
            lhs = E(kappa, rays.eval_ray(kappa, s, t).z)
            rhs = rays.eval_ray(kappa, shift(s, 1), F(t)).z
            self.assertLessEqual(abs(lhs - rhs), 1e-9*max(1.0, abs(rhs)))

    def test_tail_bound(self):
        rng = np.random.default_rng(6)
        eps = 2.0**-52
        for kappa, s, t in random_tail_cases(rng, 60):
            smp = rays.eval_ray(kappa, s, t)
            slack = 64*eps*(t + abs(kappa) + TWO_PI*abs(s.entry(1)))
            self.assertLessEqual(smp.residual, rays.residual_bound(kappa, s, t) + slack)
            self.assertLess(smp.residual, 5)

    def test_depth_convergence(self):
        rng = np.random.default_rng(8)
        for kappa, s, t in random_tail_cases(rng, 10, lift=5.0):
            values = [rays.eval_ray(kappa, s, t, depth=k).z for k in range(11)]
            for k in range(1, 11):
                self.assertLessEqual(abs(values[k] - values[k-1]), 2.0**-k + 1e-12)
        # the bare approximants converge to the seeded value
        kappa, t = complex(-1, 0.5), 8.0
        exact = rays.eval_ray(kappa, self.zero, t).z
        for k in range(1, 6):
            self.assertLessEqual(abs(rays.approximant(kappa, self.zero, t, k) - exact), 2.0**-k)

    def test_boundary_eps(self):
        # the second pullback step starts near -13 + 0.5i, at angle ~0.038 from the branch cut
        kappa, t = complex(20, -0.5), 2.08
        z = rays.eval_ray(kappa, self.zero, t).z
        self.assertEqual(rays.eval_ray_dual(kappa, self.zero, t)[0], z)
        for f in (rays.eval_ray, rays.eval_ray_dual, rays.ray_derivative_t):
            with self.assertRaises(BranchCut):
                f(kappa, self.zero, t, eps=0.2)

        cfg = rays.RayTraceConfig.from_settings(merge_settings({"boundary_eps": 0.2}))
        self.assertEqual(cfg.boundary_eps, 0.2)
        with self.assertRaises(BranchCut):
            rays.trace_ray(kappa, self.zero, t, t + 1, cfg)

    def test_kappa_derivative(self):
        kappa, h = complex(-2, 1), 1e-6
        z, dz = rays.eval_ray_dual(kappa, self.zero, 5.0)
        self.assertLess(abs(z - rays.eval_ray(kappa, self.zero, 5.0).z), 1e-14*abs(z))
        fd = (rays.eval_ray(kappa + h, self.zero, 5.0).z - rays.eval_ray(kappa - h, self.zero, 5.0).z) / (2*h)
        self.assertLessEqual(abs(dz - fd), 1e-6*abs(dz))

        _, dz = rays.eval_ray_dual(kappa, self.zero, 30.0)
        self.assertLess(abs(dz + 1), 0.01)

        # integrating d/dkappa along a short segment reproduces the change of the ray point
        k0, k1 = complex(-2, 0.5), complex(-1.9, 0.55)
        nodes = np.linspace(0, 1, 21)
        derivs = np.array([rays.eval_ray_dual(k0 + u*(k1 - k0), self.zero, 3.0)[1] for u in nodes])
        weights = np.ones(21)
        weights[1:-1:2], weights[2:-1:2] = 4, 2
        integral = (k1 - k0) * np.sum(weights*derivs) / 60.0
        delta = rays.eval_ray(k1, self.zero, 3.0).z - rays.eval_ray(k0, self.zero, 3.0).z
        self.assertLess(abs(integral - delta), 1e-8)

    def test_vertical_order(self):
        # rays at a common potential are stacked by lexicographic order of their addresses
        texts = ["|-1", "-1|0", "|0", "1|0", "|1 0", "|1", "|2"]
        addresses = [parse_address(x) for x in texts]
        heights = [rays.eval_ray(-2, s, 2.0).z.imag for s in addresses]
        for i in range(len(texts) - 1):
            self.assertEqual(lex_compare(addresses[i], addresses[i+1]), Ordering.LESS)
            self.assertLess(heights[i], heights[i+1], texts[i:i+2])
        self.assertEqual(heights[3], TWO_PI)
        self.assertAlmostEqual(heights[4], 6.284441, places=5)

    def test_kappa_derivative_grid(self):
        rng = np.random.default_rng(11)
        h = 1e-6
        for kappa, s, t in random_tail_cases(rng, 50):
            z, dz = rays.eval_ray_dual(kappa, s, t)
            fd = (rays.eval_ray(kappa + h, s, t).z - rays.eval_ray(kappa - h, s, t).z) / (2*h)
            self.assertLessEqual(abs(dz - fd), 1e-6*abs(dz), (kappa, str(s), t))

    def test_t_derivative(self):
        kappa = -2+0j
        d = rays.ray_derivative_t(kappa, self.zero, 5.0)
        h = 1e-5
        fd = (rays.eval_ray(kappa, self.zero, 5.0 + h).z - rays.eval_ray(kappa, self.zero, 5.0 - h).z) / (2*h)
        self.assertLessEqual(abs(d - fd), 1e-6*abs(d))

        t = 2*t_s_K(self.zero, 2) + 4
        self.assertLess(abs(rays.ray_derivative_t(kappa, self.zero, t) - 1), math.exp(-t/2))

        # differentiated semiconjugacy: g_s'(t) g_{sigma s}(F(t)) = g_{sigma s}'(F(t)) (F(t) + 1)
        s, kappa, t = parse_address("1|2 0"), complex(-2, 0.3), 3.0
        lhs = rays.ray_derivative_t(kappa, s, t) * rays.eval_ray(kappa, shift(s, 1), F(t)).z
        rhs = rays.ray_derivative_t(kappa, shift(s, 1), F(t)) * (F(t) + 1)
        self.assertLessEqual(abs(lhs - rhs), 1e-8*abs(rhs))

    def test_second_derivative(self):
        t = 8.0
        d2 = rays.ray_second_derivative_t(-2, self.zero, t)
        d1 = rays.ray_derivative_t(-2, self.zero, t)
        self.assertLess(abs(d2), math.exp(-t/2))
        self.assertLess(abs(d2/d1), math.exp(-t/2))
        self.assertAlmostEqual(d2.imag, 0.0, places=7)

        # integrating g'' over [2, 3] gives the change of g'
        ts = np.linspace(2, 3, 41)
        vals = np.array([rays.ray_second_derivative_t(-2, self.zero, x) for x in ts])
        weights = np.ones(41)
        weights[1:-1:2], weights[2:-1:2] = 4, 2
        integral = np.sum(weights*vals) / 120.0
        change = rays.ray_derivative_t(-2, self.zero, 3.0) - rays.ray_derivative_t(-2, self.zero, 2.0)
        self.assertLess(abs(integral - change), 1e-5)

    def test_orbit_asymptotics(self):
        kappa, s, t = complex(-1, 1), parse_address("2|1 -1"), 6.0
        for n in (1, 2):
            T = F_iter(t, n-1)
            bound = rays.residual_bound(kappa, shift(s, n-1), T) + 64*2.0**-52*T
            self.assertLessEqual(rays.orbit_asymptotics_defect(kappa, s, t, n), bound)
        with self.assertRaises(ValueError):
            rays.orbit_asymptotics_defect(kappa, s, t, 0)

    def test_trace(self):
        samples = self.trace.samples
        self.assertEqual(samples[0].t, 30.0)
        self.assertEqual(samples[-1].t, 1.0)
        ts = [smp.t for smp in samples]
        self.assertTrue(all(a > b for a, b in zip(ts[:-1], ts[1:])))
        for a, b in zip(samples[:-1], samples[1:]):
            self.assertLessEqual(abs(a.z - b.z), 0.1)
        for smp in samples:
            self.assertLess(abs(smp.z.imag), 1e-12)
        self.assertEqual(self.trace.diagnostics["unresolved_steps"], 0)
        self.assertLessEqual(self.trace.diagnostics["max_bound_ratio"], 1.0)

        df = self.trace.to_frame()
        self.assertEqual(list(df.columns), ["t", "re", "im", "residual", "depth"])
        self.assertEqual(len(df), len(samples))

    def test_trace_semiconjugacy(self):
        sigma = shift(self.zero, 1)
        for smp in self.trace.samples[::10]:
            image = E(-2, smp.z)
            self.assertLessEqual(abs(image - rays.eval_ray(-2, sigma, F(smp.t)).z), 1e-8*max(1.0, abs(image)))

    def test_trace_preconditions(self):
        with self.assertRaises(ValueError):
            rays.trace_ray(-2, self.zero, 5.0, 1.0)
        with self.assertRaises(ValueError):
            rays.trace_ray(-2, parse_address("gen x=1 y=1"), 0.5, 5.0)

    def test_branch_cut(self):
        # for real kappa > -1 the singular value 0 escapes on the real ray of 0, which is
        # therefore cut off below the potential F^-1(potential of 0)
        with self.assertRaises(BranchCut):
            rays.eval_ray(-0.5, self.zero, 0.1)
        with self.assertRaises(BranchCut) as ctx:
            rays.trace_ray(-0.5, self.zero, 0.1, 3.0)
        err = ctx.exception
        self.assertLess(err.t, 0.5)
        self.assertIsInstance(err.partial, rays.RayTrace)
        self.assertGreater(len(err.partial.samples), 0)
        self.assertTrue(all(smp.t > err.t for smp in err.partial.samples))

if __name__=="__main__":
    unittest.main()

import math
import unittest

import numpy as np

import exprays.variation as var
from exprays.combinatorics import parse_address
from exprays.param_rays import newton_solve

def circle(n, turns=1):
    params = np.linspace(0, turns*2*math.pi, n*turns + 1)
    return var.SampledCurve(params, np.exp(1j*params), 1j*np.exp(1j*params))

def spiral(t_lo=0.0, t_hi=6.0, n=400, scale=1.0):
    """ (1 + t) e^{it}, with params optionally stretched by t -> scale*t + (scale - 1) """
    t = np.linspace(t_lo, t_hi, n)
    e = np.exp(1j*t)
    points = (1 + t)*e
    d1 = e*(1 + 1j*(1 + t))
    d2 = e*(2j - (1 + t))
    u = scale*t + (scale - 1)
    return var.SampledCurve(u, points, d1/scale, d2/scale**2)

class TestVariation(unittest.TestCase):

    def test_curve_validation(self):
        with self.assertRaises(ValueError):
            var.SampledCurve([0.0], [0j])
        with self.assertRaises(ValueError):
            var.SampledCurve([0.0, 0.0, 1.0], [0j, 1j, 2j])
        with self.assertRaises(ValueError):
            var.SampledCurve([0.0, 1.0], [0j, 1j], [1j, complex(math.nan, 0)])
        curve = var.SampledCurve([0.0, 1.0], [0j, 1j])
        self.assertFalse(curve.has_derivatives)
        with self.assertRaises(var.MissingDerivatives):
            var.variation_number(curve, 5+0j)
        with self.assertRaises(ValueError):
            spiral().at(7.0)

    def test_hermite(self):
        curve = spiral(n=200)
        for t in (0.0, 0.37, 2.5, 5.99):
            z, dz = curve.at(t)
            self.assertLess(abs(z - (1 + t)*np.exp(1j*t)), 1e-6)
            self.assertLess(abs(dz - np.exp(1j*t)*(1 + 1j*(1 + t))), 1e-4)

    def test_winding_number(self):
        self.assertEqual(var.winding_number(circle(256), 0j), 1)
        self.assertEqual(var.winding_number(circle(256), 3+0j), 0)
        self.assertEqual(var.winding_number(circle(256, turns=2), 0j), 2)
        with self.assertRaises(var.TooCloseToBase):
            var.winding_number(circle(256), 1+0j)
        with self.assertRaises(var.Undersampled):
            var.winding_number(circle(3), 0j)
        with self.assertRaises(var.NotClosed):
            var.winding_number(spiral(), 0j)

    def test_line(self):
        t = np.linspace(1, 100, 100)
        line = var.SampledCurve(t, t.astype(complex), np.ones(100, dtype=complex))
        self.assertAlmostEqual(var.variation_number(line, -1+0j), 0.0, places=12)
        expected = (math.atan(100) - math.pi/4) / (2*math.pi)
        self.assertAlmostEqual(var.variation_number(line, 1j), expected, places=6)

    def test_variation_dominates_winding(self):
        a = complex(0.3, 0.2)
        curve = spiral()
        alpha = var.variation_number(curve, a)
        ts = np.linspace(0, 6, 4001)
        w = (1 + ts)*np.exp(1j*ts) - a
        winding = (np.unwrap(np.angle(w))[-1] - np.angle(w[0])) / (2*math.pi)
        self.assertGreaterEqual(alpha + 1e-6, abs(winding))

        self.assertAlmostEqual(var.variation_number(circle(256), 0j), 1.0, places=5)
        self.assertAlmostEqual(var.variation_number(circle(256, turns=2), 0j), 2.0, places=5)

    def test_reparametrization(self):
        a = complex(0.3, 0.2)
        self.assertAlmostEqual(var.variation_number(spiral(), a), var.variation_number(spiral(scale=2.0), a),
                               delta=1e-5)

    def test_start_point(self):
        t = np.linspace(0, math.pi, 200)
        arc = var.SampledCurve(t, np.exp(1j*t) - 1, 1j*np.exp(1j*t))
        self.assertAlmostEqual(var.variation_number(arc, 0j), 0.25, places=5)
        with self.assertRaises(var.TooCloseToBase):
            var.variation_number(arc, complex(arc.points[50]))

    def test_halfline(self):
        self.assertAlmostEqual(var.halfline_variation(1, 1j), 0.25, places=15)
        self.assertAlmostEqual(var.halfline_variation(1, -1), 0.0, places=15)
        self.assertAlmostEqual(var.halfline_variation(1j, 1), 0.25, places=15)
        with self.assertRaises(var.OnHalfLine):
            var.halfline_variation(1, 2)
        with self.assertRaises(var.OnHalfLine):
            var.halfline_variation(1j, 0)
        with self.assertRaises(ValueError):
            var.halfline_variation(0, 1)

        lam, a = complex(math.cos(0.7), math.sin(0.7)), complex(-0.3, 1.1)
        params = np.concatenate([[0.0], np.geomspace(1e-3, 1e4, 200)])
        tail = var.TailBound(C_pos=0.0, C_der=0.0, C_secder=0.0, direction=lam)
        line = var.SampledCurve(params, lam*params, np.full(len(params), lam), tail=tail)
        self.assertAlmostEqual(var.variation_number(line, a), var.halfline_variation(lam, a), delta=1e-3)

    def test_tail_remainder(self):
        t = np.linspace(1, 10, 50)
        tail = var.TailBound(C_pos=0.5, C_der=1.0, C_secder=2.0, offset=1+0j)
        curve = var.SampledCurve(t, t + 1 + 0j, np.ones(50, dtype=complex), tail=tail)
        # W = |1 - 3i| + 0.5
        W = math.sqrt(10) + 0.5
        self.assertAlmostEqual(var.tail_remainder(curve, 3j), (W + 1.0) / (10 - W) / (2*math.pi), places=14)
        self.assertEqual(var.tail_remainder(curve, 20j), math.inf)

        dcurve = var.derivative_curve(var.SampledCurve(t, t + 1 + 0j, np.ones(50, dtype=complex),
                                                       np.zeros(50, dtype=complex), tail=tail))
        self.assertTrue(dcurve.tail.of_derivative)
        self.assertAlmostEqual(var.tail_remainder(dcurve, 0j), 2.0 / 9.0 / (2*math.pi), places=14)
        with self.assertRaises(var.VariationError):
            var.tail_remainder(dcurve, 1j)
        with self.assertRaises(var.VariationError):
            var.tail_remainder(spiral(), 0j)

    def test_derivative_bound(self):
        curve = spiral()
        for a in (complex(0.3, 0.2), complex(-4, 1), complex(10, -3)):
            chk = var.derivative_bound_check(curve, a)
            self.assertTrue(chk.holds, (a, chk))
        with self.assertRaises(var.MissingDerivatives):
            var.derivative_curve(circle(64))

    def test_pullback_doubling(self):
        curve = spiral(n=800)
        pulled = var.pullback_curve(curve, complex(0.3, 0.2))
        # the branch of log is continued along the curve
        self.assertTrue(np.all(np.abs(np.diff(pulled.points.imag)) < 0.5))
        lhs, rhs, holds = var.pullback_doubling_check(curve, complex(0.3, 0.2))
        self.assertTrue(holds, (lhs, rhs))
        with self.assertRaises(var.TooCloseToBase):
            var.pullback_curve(curve, complex(curve.points[3]))

    def test_ray_variation(self):
        zero = parse_address("|0")
        rv = var.dynamic_ray_variation(-2, zero, 1.0)
        self.assertLess(rv.alpha_sampled, 1e-9)
        self.assertGreaterEqual(rv.N, 0)
        self.assertGreaterEqual(rv.bound, 1)
        self.assertLess(rv.remainder, 0.05)
        self.assertTrue(rv.holds)

        rv = var.dynamic_ray_variation(complex(-2, 0.5), parse_address("|1"), 1.0)
        self.assertTrue(rv.holds, rv)
        self.assertEqual(rv.bound, 2.0**rv.N)

        with self.assertRaises(ValueError):
            var.dynamic_ray_variation(-2, zero, 0.0)
        with self.assertRaises(ValueError):
            var.dynamic_ray_variation(-2, zero, 5.0, t_cap=4.0)

    def test_ray_curve(self):
        zero = parse_address("|0")
        curve = var.ray_curve(complex(-2, 0.5), zero, 1.0, 20.0, with_second=True)
        self.assertEqual(curve.params[0], 1.0)
        self.assertEqual(curve.params[-1], 20.0)
        self.assertIsNotNone(curve.tail)
        self.assertEqual(curve.tail.start, 20.0)
        base = complex(curve.points[0]) - 1 - 0.5j
        self.assertTrue(var.derivative_bound_check(curve, base).holds)
        with self.assertRaises(ValueError):
            var.ray_tail_bound(-2, zero, 2.0)

    def test_curvature_depth(self):
        N, (lo, hi) = var.curvature_depth(-2, parse_address("|0"), 1.0, 40.0)
        self.assertLessEqual(N, 2)
        self.assertGreaterEqual(lo, 1.0)
        self.assertGreater(hi, lo)

    def test_imaginary_parts(self):
        s = parse_address("|0")
        kappa, _ = newton_solve(s, 10.0, 10+0j)
        self.assertEqual(var.imaginary_part_check(kappa, s, 0), [])
        bad = var.imaginary_part_check(complex(10, 100), s, 0)
        self.assertEqual(bad[0][0], 0)

if __name__=="__main__":
    unittest.main()

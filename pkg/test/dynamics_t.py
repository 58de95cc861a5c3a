import cmath
import math
import unittest

import numpy as np

import exprays.dynamics as dyn
from exprays.common import OVERFLOW, TWO_PI

class TestDynamics(unittest.TestCase):

    def test_E(self):
        self.assertEqual(dyn.E(0j, 0j), 1)
        self.assertAlmostEqual(dyn.E(complex(0, math.pi), 0j), -1, places=15)
        self.assertAlmostEqual(dyn.E(1+0j, 1+0j), math.e**2, places=13)
        self.assertEqual(dyn.E(0j, complex(800, 1)), OVERFLOW)
        self.assertTrue(dyn.is_overflow(dyn.E(0j, OVERFLOW)))

    def test_orbit(self):
        rec = dyn.orbit(0j, 0j, 10, 50)
        self.assertTrue(rec.escaped)
        self.assertEqual(rec.escape_index, 4)
        self.assertAlmostEqual(rec.points[1], 1, places=15)
        self.assertAlmostEqual(rec.points[2], math.e, places=15)
        self.assertAlmostEqual(rec.points[3].real, math.e**math.e, places=12)

        rec = dyn.orbit(-2+0j, 0j, 100, 50)
        self.assertFalse(rec.escaped)
        self.assertIsNone(rec.escape_index)
        self.assertEqual(len(rec.points), 101)
        # attracting fixed point of exp(z - 2)
        self.assertAlmostEqual(rec.points[-1].real, 0.158594339563, places=9)

        rec = dyn.orbit(0j, OVERFLOW, 10, 50)
        self.assertTrue(rec.escaped)
        self.assertEqual(rec.escape_index, 0)

        with self.assertRaises(ValueError):
            dyn.orbit(0j, 0j, 0, 50)
        with self.assertRaises(ValueError):
            dyn.orbit(0j, 0j, 10, 20)

        df = rec.to_frame()
        self.assertEqual(list(df.columns), ["n", "re", "im"])

    def test_escape_monotone(self):
        # real orbits grow monotonically once past the threshold
        rng = np.random.default_rng(7)
        for _ in range(100):
            kappa = complex(rng.uniform(-3, 1), 0)
            z0 = complex(rng.uniform(-2, 2), 0)
            escaped = dyn.orbit(kappa, z0, 60, 50).escaped
            for thr in (60, 75, 100):
                self.assertEqual(dyn.orbit(kappa, z0, 60, thr).escaped, escaped)

    def test_strip_index(self):
        self.assertEqual(dyn.strip_index(0j, 0j), 0)
        self.assertEqual(dyn.strip_index(0j, complex(0, TWO_PI)), 1)
        self.assertEqual(dyn.strip_index(0j, complex(0, -TWO_PI)), -1)
        self.assertEqual(dyn.strip_index(complex(0, 3.0), complex(0, 1.0)), 1)
        with self.assertRaises(dyn.OnBoundary):
            dyn.strip_index(0j, complex(0, math.pi))
        with self.assertRaises(dyn.OnBoundary):
            dyn.strip_index(0j, complex(0, -3*math.pi))

    def test_log_branch(self):
        self.assertEqual(dyn.log_branch(0j, 0, 1+0j), 0)
        self.assertAlmostEqual(dyn.log_branch(0j, 1, 1+0j), complex(0, TWO_PI), places=15)
        self.assertAlmostEqual(dyn.log_branch(1+0j, 0, complex(math.e, 0)), 0, places=15)
        with self.assertRaises(dyn.BranchCut):
            dyn.log_branch(0j, 0, -2+0j)
        with self.assertRaises(dyn.BranchCut):
            dyn.log_branch(0j, 0, 0j)

    def test_left_inverse(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            kappa = complex(*rng.uniform(-5, 5, size=2))
            j = int(rng.integers(-10, 11))
            z = cmath.rect(10**rng.uniform(-6, 100), rng.uniform(-3.1, 3.1))
            w = dyn.log_branch(kappa, j, z)
            self.assertLessEqual(abs(dyn.E(kappa, w) - z), 1e-13*abs(z))
            self.assertEqual(dyn.strip_index(kappa, w), j)

    def test_external_address(self):
        self.assertEqual(dyn.external_address(0j, 1+0j, 3), [0, 0, 0])
        self.assertEqual(dyn.external_address(0j, complex(1, TWO_PI), 1), [1])
        self.assertEqual(dyn.external_address(0j, -1+0j, 1), [0])
        with self.assertRaises(dyn.Truncated) as ctx:
            dyn.external_address(0j, 1+0j, 10)
        self.assertEqual(ctx.exception.entries, [0, 0, 0, 0])
        with self.assertRaises(ValueError):
            dyn.external_address(0j, 1+0j, 0)

    def test_address_translation(self):
        kappa, z = complex(-2, 0.5), complex(0.3, 0.2)
        base = dyn.external_address(kappa, z, 6)
        for k in range(-3, 4):
            shifted = dyn.external_address(kappa + complex(0, TWO_PI*k), z, 6)
            self.assertEqual(shifted, [e + k for e in base])

if __name__=="__main__":
    unittest.main()

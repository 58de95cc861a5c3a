"""
The exponential family E_kappa(z) = exp(z + kappa): orbits, the static
partition into strips R_j, the inverse branches L_{kappa,j} and external
addresses of points.
"""

import cmath
import math
from dataclasses import dataclass, field

import pandas as pd

from exprays.common import EXP_LIMIT, OVERFLOW, TWO_PI, ExpRaysException

BOUNDARY_EPS = 1e-12

# beyond this modulus, forward-iterated imaginary parts no longer resolve strips
MAX_ADDRESS_MODULUS = 1e12


class DynamicsError(ExpRaysException):
    pass


class OnBoundary(DynamicsError):
    pass


class BranchCut(DynamicsError):
    """ Raised when a pullback lands on the negative real axis.
        Tracers fill in the potential t and the partial result computed so far.
    """
    def __init__(self, msg, t=None, partial=None):
        super().__init__(msg)
        self.t = t
        self.partial = partial


class Truncated(DynamicsError):
    """ The orbit left the representable range before the requested number of
        address entries; `entries` holds what was computed
    """
    def __init__(self, msg, entries):
        super().__init__(msg)
        self.entries = entries


def is_overflow(z):
    return not (math.isfinite(z.real) and math.isfinite(z.imag))


def E(kappa, z):
    """ exp(z + kappa), or the overflow sentinel when the real part is too large """
    w = z + kappa
    if is_overflow(z) or w.real > EXP_LIMIT:
        return OVERFLOW
    return cmath.exp(w)


@dataclass
class OrbitRecord:
    points: list = field(default_factory=list)
    escaped: bool = False
    escape_index: int = None

    def to_frame(self):
        """ DataFrame with columns n, re, im """
        return pd.DataFrame({
            "n": list(range(len(self.points))),
            "re": [z.real for z in self.points],
            "im": [z.imag for z in self.points],
        }, columns=["n", "re", "im"])


def orbit(kappa, z0, n_max, escape_re=50.0):
    """ Iterate E_kappa from z0 until n_max steps or until Re(z) > escape_re.

        The escape verdict is one-sided: escaped=True means the real part passed the
        threshold (or overflowed), after which growth is monotone for moderate kappa;
        escaped=False only means escape was not detected within n_max steps.
    """
    if n_max < 1:
        raise ValueError("orbit needs n_max >= 1")
    if escape_re < 50:
        raise ValueError("escape_re must be at least 50")

    rec = OrbitRecord(points=[z0])
    z = z0
    for n in range(n_max + 1):
        if is_overflow(z) or z.real > escape_re:
            rec.escaped = True
            rec.escape_index = n
            break
        if n == n_max:
            break
        z = E(kappa, z)
        rec.points.append(z)
    return rec


def strip_index(kappa, z, eps=BOUNDARY_EPS):
    """ The j with -Im(kappa) - pi + 2 pi j < Im(z) < -Im(kappa) + pi + 2 pi j """
    x = z.imag + kappa.imag
    dist = math.fmod(x - math.pi, TWO_PI)
    if abs(dist) < eps or TWO_PI - abs(dist) < eps:
        raise OnBoundary(f"Im(z)={z.imag!r} lies on a strip boundary for kappa={kappa!r}")
    return math.floor((x + math.pi) / TWO_PI)


def log_branch(kappa, j, z, eps=BOUNDARY_EPS):
    """ L_{kappa,j}(z) = Log(z) - kappa + 2 pi i j, with Log the principal branch.
        The result lies in strip R_j and E(kappa, result) = z.
    """
    if z == 0:
        raise BranchCut(f"log_branch undefined at z=0")
    w = cmath.log(z)
    if z.real < 0 and math.pi - abs(w.imag) <= eps:
        raise BranchCut(f"z={z!r} lies on the negative real axis")
    return w - kappa + complex(0.0, TWO_PI*j)


def external_address(kappa, z, n, eps=BOUNDARY_EPS, max_modulus=MAX_ADDRESS_MODULUS):
    """ First n entries of the external address of z, s_k = strip_index(kappa, E^(k-1)(z)).

        Raises Truncated (with the entries found so far) when the orbit leaves the
        range where strips can still be resolved, and OnBoundary when the orbit meets
        a strip boundary.
    """
    if n < 1:
        raise ValueError("external_address needs n >= 1")
    entries = []
    for k in range(n):
        if is_overflow(z) or abs(z) > max_modulus:
            raise Truncated(f"orbit left the representable range after {k} entries", entries)
        entries.append(strip_index(kappa, z, eps))
        if k < n-1:
            z = E(kappa, z)
    return entries

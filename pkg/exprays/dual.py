"""
Forward-mode carrier for derivatives with respect to the parameter kappa
"""

from exprays.dynamics import BOUNDARY_EPS, log_branch


class DualComplex:
    """ A complex value together with its derivative with respect to kappa """
    __slots__ = ("value", "d_kappa")

    def __init__(self, value, d_kappa=0.0):
        self.value = complex(value)
        self.d_kappa = complex(d_kappa)

    @staticmethod
    def _coerce(x):
        return x if isinstance(x, DualComplex) else DualComplex(x, 0.0)

    @classmethod
    def variable(cls, kappa):
        """ kappa itself, d(kappa)/d(kappa) = 1 """
        return cls(kappa, 1.0)

    def __add__(self, other):
        o = DualComplex._coerce(other)
        return DualComplex(self.value + o.value, self.d_kappa + o.d_kappa)

    __radd__ = __add__

    def __sub__(self, other):
        o = DualComplex._coerce(other)
        return DualComplex(self.value - o.value, self.d_kappa - o.d_kappa)

    def __rsub__(self, other):
        return DualComplex._coerce(other).__sub__(self)

    def __neg__(self):
        return DualComplex(-self.value, -self.d_kappa)

    def __mul__(self, other):
        o = DualComplex._coerce(other)
        return DualComplex(self.value * o.value, self.d_kappa * o.value + self.value * o.d_kappa)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = DualComplex._coerce(other)
        if o.value == 0:
            raise ZeroDivisionError("DualComplex division by zero")
        inv = 1.0 / o.value
        return DualComplex(self.value * inv, (self.d_kappa * o.value - self.value * o.d_kappa) * inv * inv)

    def __rtruediv__(self, other):
        return DualComplex._coerce(other).__truediv__(self)

    def log_branch(self, kappa, j, eps=BOUNDARY_EPS):
        """ Pullback w = Log(z) - kappa + 2 pi i j, where kappa is the variable:
            dw/dkappa = (dz/dkappa)/z - 1
        """
        return DualComplex(log_branch(kappa, j, self.value, eps), self.d_kappa / self.value - 1.0)

    def __repr__(self):
        return f"DualComplex({self.value!r}, {self.d_kappa!r})"

"""
Constants and the base exception shared by every exprays module
"""

import math

TWO_PI = 2.0 * math.pi

# exp() of anything above this overflows a 64-bit float
EXP_LIMIT = 709.78

# value used for iterates and potentials that no longer fit in a float
OVERFLOW = complex(math.inf, 0.0)


class ExpRaysException(Exception):
    """Root of every domain error raised by exprays"""
    pass

"""Exact rational toolkit for robust bilevel linear optimization.

Everything is computed over arbitrary-precision rationals; there is no
floating point anywhere in the solver stack.
"""

__version__ = "0.1.0"

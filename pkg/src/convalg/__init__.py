"""Exact convolution algebroids over combinatorial base spaces.

Three instance families share one algebroid core:

* graph path spaces, whose convolution algebra is a Leavitt path algebra,
* finite discrete groupoids with the usual convolution product,
* the tower Z/p^k with double-coset composition.

Everything is computed in exact arithmetic over a choice of involutive
coefficient ring; only the operator-norm estimates use floats.
"""

__version__ = "0.1.0"

from .scalars import Ring, Scalar, ZZ, QQ, QI, z_localized  # noqa: F401

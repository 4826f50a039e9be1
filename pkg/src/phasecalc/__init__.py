"""Phase-space calculus numerics: order functions, symbol classes, Weyl
quantization, Moyal products, Bargmann transforms and operator bounds."""

__version__ = "0.1.0"

from .grids import GridSpec, GridSymbol  # noqa: F401
from .order_functions import OrderFunction, bracket, constant, product  # noqa: F401
from .phase_space import Lattice, SymplecticSpace  # noqa: F401

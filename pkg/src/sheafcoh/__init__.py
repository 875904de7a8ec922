"""Sheaf cohomology on projective space through exterior-algebra resolutions.

The package implements the correspondence between graded modules over a
symmetric algebra S = Sym(W) and linear free complexes over the Koszul-dual
exterior algebra E = wedge(V), builds doubly infinite exact free complexes
(Tate windows) attached to coherent sheaves, reads all sheaf cohomology off
their generator degrees, and constructs both Beilinson monads.  All
arithmetic is exact, over a prime field.
"""

from .linalg import DEFAULT_PRIME
from .rings import RingSig, Poly

__all__ = ["DEFAULT_PRIME", "RingSig", "Poly"]
__version__ = "0.1.0"

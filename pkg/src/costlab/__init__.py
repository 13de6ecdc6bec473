"""Exact finite-horizon laboratory for cost functions and tests over Cantor space."""

from .clopen import ClopenSet, ProductClopenSet, hat, lies_left
from .dyadic import ONE, ZERO, Dyadic

__all__ = ["ClopenSet", "ProductClopenSet", "Dyadic", "ONE", "ZERO", "hat", "lies_left"]

"""
hyperurn - Balanced affine urns with multiple drawings and hyperrecursive tree profiles
"""

from .errors import HyperurnError
from .urn_core import UrnSpec, UrnState, new_urn

__version__ = "0.1.0"

"""Return-code voting simulator.

Cast-as-intended verification by matching encrypted ballots against
pre-published encrypted code tables with distributed plaintext equivalence
tests, over threshold ElGamal in a safe-prime quadratic-residue group.
"""

__version__ = "0.1.0"

from .group import GroupParams, GroupElement, generate_params, standard_3072
from .rng import Rng

__all__ = [
    "GroupParams",
    "GroupElement",
    "generate_params",
    "standard_3072",
    "Rng",
    "__version__",
]

"""Certification of almost-sure rank loss for row-scaled matrix ensembles.

The core question: given full-column-rank blocks B_1..B_K sharing a row
count n, does the concatenation [D_1 B_1 ... D_K B_K] lose rank by tau for
almost every choice of random diagonal scalings D_i?  The `conditions`
module answers this exactly through equivalent combinatorial conditions;
`randrank` cross-checks by randomized evaluation; `matroid` and `matching`
carry the supporting machinery; `tim` applies the certifier to topological
interference management.
"""

from .conditions import Ensemble, Witness, check_C2, check_C3, check_C4, check_C5, cross_validate, max_tau
from .exactla import ExactMatrix, IndexSet, Rational, intersect_dim, nullspace_basis, rank, sparse_dim
from .randrank import TrialConfig, check_C1, sample_generic_rank

__all__ = [
    "Ensemble",
    "ExactMatrix",
    "IndexSet",
    "Rational",
    "TrialConfig",
    "Witness",
    "check_C1",
    "check_C2",
    "check_C3",
    "check_C4",
    "check_C5",
    "cross_validate",
    "intersect_dim",
    "max_tau",
    "nullspace_basis",
    "rank",
    "sample_generic_rank",
    "sparse_dim",
]

"""Rank-oracle matroids: the scaled-row linear matroid, duals, and unions.

A matroid here is a ground set plus a rank evaluator; duals and unions
compose oracles without enumerating independent sets.  The scaled-linear
construction puts a matroid on a row set X whose independent sets are the
J with dim(S_{J u X^c} & colspan B_{*,Y}) = 0, with rank function
|J| - dim(S_{J u X^c} & colspan B_{*,Y}); it is defined only when the
column span meets the sparse subspace of X^c trivially.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import CapacityError, PreconditionError, ShapeError
from .exactla import ExactMatrix, IndexSet, sparse_dim


@dataclass
class RankOracleMatroid:
    """A matroid given by its ground set and a memoized rank function."""

    ground: tuple[int, ...]
    rank_fn: Callable[[frozenset[int]], int]
    label: str = "custom"
    _memo: dict[frozenset[int], int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.ground = tuple(sorted(set(self.ground)))

    @property
    def ground_set(self) -> frozenset[int]:
        return frozenset(self.ground)

    def rank(self, subset: Iterable[int]) -> int:
        key = frozenset(subset)
        if not key <= self.ground_set:
            raise PreconditionError(f"{sorted(key - self.ground_set)} not in ground set")
        if key not in self._memo:
            self._memo[key] = self.rank_fn(key)
        return self._memo[key]

    def full_rank(self) -> int:
        return self.rank(self.ground)

    def rank_table(self) -> dict[tuple[int, ...], int]:
        """Rank of every subset; exponential, intended for small grounds."""
        out = {}
        for r in range(len(self.ground) + 1):
            for combo in itertools.combinations(self.ground, r):
                out[combo] = self.rank(combo)
        return out


def is_independent(matroid: RankOracleMatroid, subset: Iterable[int]) -> bool:
    """A set is independent exactly when its rank equals its size."""
    key = frozenset(subset)
    return matroid.rank(key) == len(key)


def scaled_linear_matroid(block: ExactMatrix, X: IndexSet, Y: IndexSet) -> RankOracleMatroid:
    """Matroid on ground X induced by the chosen columns of a block.

    Requires dim(S_{X^c} & colspan B_{*,Y}) = 0; when that fails the
    construction is undefined and callers short-circuit instead (the
    quantified conditions hold trivially there).
    """
    if X.universe != block.n_rows:
        raise ShapeError(f"X over [{X.universe}] against {block.n_rows}-row matrix")
    restricted = block.take_cols(Y)
    if sparse_dim(restricted, X.complement()) != 0:
        raise PreconditionError(
            "scaled-linear matroid undefined: column span meets the sparse "
            f"subspace of the complement of X={list(X)} nontrivially"
        )
    n = block.n_rows
    xc = X.complement()

    def rank_fn(subset: frozenset[int]) -> int:
        j_and_xc = IndexSet.of(n, set(subset) | set(xc.members))
        return len(subset) - sparse_dim(restricted, j_and_xc)

    return RankOracleMatroid(tuple(X), rank_fn, label="scaled-linear")


def dual(matroid: RankOracleMatroid) -> RankOracleMatroid:
    """Dual matroid: rank*(J) = |J| - r(E) + r(E \\ J)."""
    ground = matroid.ground_set

    def rank_fn(subset: frozenset[int]) -> int:
        return len(subset) - matroid.full_rank() + matroid.rank(ground - subset)

    return RankOracleMatroid(matroid.ground, rank_fn, label="dual")


def union_rank(matroids: Sequence[RankOracleMatroid], U: Iterable[int]) -> int:
    """Rank of U in the union matroid: min over T of |U \\ T| + sum_i r_i(T).

    Exhaustive over subsets T of U, which is exact and cheap at the ground
    sizes this package targets.
    """
    if not matroids:
        raise PreconditionError("union of no matroids")
    ground = matroids[0].ground_set
    for m in matroids[1:]:
        if m.ground_set != ground:
            raise PreconditionError("union requires a common ground set")
    u = sorted(frozenset(U))
    if not frozenset(u) <= ground:
        raise PreconditionError(f"{sorted(frozenset(u) - ground)} not in ground set")
    best = None
    for r in range(len(u) + 1):
        for t in itertools.combinations(u, r):
            value = (len(u) - len(t)) + sum(m.rank(t) for m in matroids)
            if best is None or value < best:
                best = value
    return best


def union_matroid(matroids: Sequence[RankOracleMatroid]) -> RankOracleMatroid:
    """The union as a rank oracle in its own right."""
    if not matroids:
        raise PreconditionError("union of no matroids")
    ground = matroids[0].ground

    def rank_fn(subset: frozenset[int]) -> int:
        return union_rank(matroids, subset)

    return RankOracleMatroid(ground, rank_fn, label="union")


@dataclass(frozen=True)
class AxiomReport:
    ok: bool
    violations: tuple[str, ...]


def verify_axioms(matroid: RankOracleMatroid) -> AxiomReport:
    """Brute-force check of the rank axioms and exchange behavior.

    Verifies: r(empty) = 0, 0 <= r(J) <= |J|, monotonicity, submodularity,
    the hereditary and exchange properties of the induced independent
    sets, and that r agrees with the enumerated independence rank
    max{|I| : I subset of J, I independent}.
    """
    ground = matroid.ground
    if len(ground) > 8:
        raise CapacityError(f"exhaustive axiom check limited to 8 elements, got {len(ground)}")
    violations: list[str] = []
    subsets = [frozenset(c) for r in range(len(ground) + 1) for c in itertools.combinations(ground, r)]
    ranks = {s: matroid.rank(s) for s in subsets}

    if ranks[frozenset()] != 0:
        violations.append(f"rank(empty) = {ranks[frozenset()]} != 0")
    for s in subsets:
        if not 0 <= ranks[s] <= len(s):
            violations.append(f"rank({sorted(s)}) = {ranks[s]} outside [0, {len(s)}]")
    for s, t in itertools.product(subsets, subsets):
        if s <= t and ranks[s] > ranks[t]:
            violations.append(f"monotonicity fails: r({sorted(s)}) > r({sorted(t)})")
            break
    for s, t in itertools.combinations(subsets, 2):
        if ranks[s | t] + ranks[s & t] > ranks[s] + ranks[t]:
            violations.append(
                f"submodularity fails at {sorted(s)}, {sorted(t)}: "
                f"r(union)+r(inter) = {ranks[s | t]}+{ranks[s & t]} > {ranks[s]}+{ranks[t]}"
            )
            break

    independent = {s for s in subsets if ranks[s] == len(s)}
    for s in independent:
        if not all(frozenset(c) in independent for r in range(len(s)) for c in itertools.combinations(sorted(s), r)):
            violations.append(f"hereditary property fails below {sorted(s)}")
            break
    exchange_ok = True
    for small, big in itertools.product(independent, independent):
        if len(small) < len(big):
            if not any(small | {e} in independent for e in big - small):
                violations.append(f"exchange fails for {sorted(small)} into {sorted(big)}")
                exchange_ok = False
                break
        if not exchange_ok:
            break
    for s in subsets:
        enumerated = max((len(i) for i in independent if i <= s), default=0)
        if ranks[s] != enumerated:
            violations.append(
                f"rank({sorted(s)}) = {ranks[s]} but enumerated independence rank is {enumerated}"
            )
            break
    return AxiomReport(not violations, tuple(violations))


def union_deficiency(ensemble, X: IndexSet, Ys: Sequence[IndexSet]) -> bool:
    """Is the union of the per-block dual matroids rank-deficient on X?

    Builds each block's scaled-linear matroid (raising a construction
    error naming the block when its precondition fails), dualizes, and
    tests union rank < |X|.
    """
    if len(Ys) != ensemble.K:
        raise ShapeError(f"{len(Ys)} column choices for {ensemble.K} blocks")
    duals = []
    for i, (block, y) in enumerate(zip(ensemble.blocks, Ys), start=1):
        try:
            duals.append(dual(scaled_linear_matroid(block, X, y)))
        except PreconditionError as exc:
            raise PreconditionError(f"block {i}: {exc}") from None
    return union_rank(duals, X) < len(X)

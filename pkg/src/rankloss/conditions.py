"""The combinatorial rank-loss certifier.

Four exact conditions, each equivalent to the ensemble matrix losing rank
by tau almost surely:

  C2  for every choice of R columns across the blocks there is a row set
      J whose sparse subspace captures at least |J| + tau column-span
      dimensions in total;
  C3  every oversized square selection has a vanishing product of block
      subdeterminants;
  C4  the sparse-subspace restatement of C3 over ordered partitions;
  C5  the matroid-union form quantified over row sets X.

`cross_validate` runs all four plus the sampled C1 oracle and insists the
verdicts agree.  All searches are exhaustive with canonical (lexicographic)
enumeration so reported witnesses are deterministic.  Cost grows as 2^n
times the number of column choices; comfortable through n around 14 for
C2 and n around 10 for the X-quantified conditions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

from .errors import EquivalenceViolation, PreconditionError, ShapeError
from .exactla import ExactMatrix, IndexSet, det, is_full_column_rank
from .randrank import C1Verdict, TrialConfig, check_C1


@dataclass(frozen=True)
class Ensemble:
    """Full-column-rank blocks B_1..B_K sharing a row count n."""

    blocks: tuple[ExactMatrix, ...]

    def __post_init__(self):
        if not self.blocks:
            raise PreconditionError("ensemble needs at least one block")
        n = self.blocks[0].n_rows
        if n < 1:
            raise PreconditionError("blocks must have at least one row")
        for i, block in enumerate(self.blocks, start=1):
            if block.n_rows != n:
                raise ShapeError(f"block {i} has {block.n_rows} rows, expected {n}")
            if block.n_cols < 1:
                raise PreconditionError(f"block {i} has no columns")
            if not is_full_column_rank(block):
                raise PreconditionError(f"block {i} is not full column rank")

    @classmethod
    def of(cls, *blocks) -> "Ensemble":
        return cls(tuple(b if isinstance(b, ExactMatrix) else ExactMatrix.from_rows(b) for b in blocks))

    @property
    def n(self) -> int:
        return self.blocks[0].n_rows

    @property
    def K(self) -> int:
        return len(self.blocks)

    @property
    def column_counts(self) -> tuple[int, ...]:
        return tuple(b.n_cols for b in self.blocks)

    @property
    def R(self) -> int:
        """Maximum possible rank of the scaled concatenation: min(sum m_i, n)."""
        return min(sum(self.column_counts), self.n)


@dataclass(frozen=True)
class Witness:
    """A concrete (Y, J, X, partition) tuple backing a verdict.

    slack is sum_i dim(S_J & colspan B_{i,*,Y_i}) - |J| - tau for the
    reported J; nonnegative exactly when the tuple certifies a holding
    existential.
    """

    kind: str
    Y: tuple[IndexSet, ...]
    J: IndexSet | None = None
    X: IndexSet | None = None
    partition: tuple[IndexSet, ...] | None = None
    slack: int | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "Y": [list(y) for y in self.Y],
            "J": list(self.J) if self.J is not None else None,
            "X": list(self.X) if self.X is not None else None,
            "partition": [list(p) for p in self.partition] if self.partition is not None else None,
            "slack": self.slack,
        }


@dataclass(frozen=True)
class CheckResult:
    condition: str
    holds: bool
    witnesses: tuple[Witness, ...] = ()

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "holds": self.holds,
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


# ---------------------------------------------------------------------------
# Canonical enumeration
# ---------------------------------------------------------------------------

def lex_subset_masks(universe: int, cap: int | None = None) -> Iterator[int]:
    """Bitmasks of all subsets of [universe] in lexicographic member order.

    With `cap` given, only elements of the mask `cap` participate, so the
    iteration runs over subsets of that set (still in lexicographic order
    of member tuples: (), (1), (1,2), ..., (2), ...).
    """
    elems = [v for v in range(1, universe + 1) if cap is None or cap >> (v - 1) & 1]

    def rec(mask: int, start: int) -> Iterator[int]:
        yield mask
        for idx in range(start, len(elems)):
            yield from rec(mask | 1 << (elems[idx] - 1), idx + 1)

    return rec(0, 0)


def _compositions(bounds: Sequence[int], total: int) -> Iterator[tuple[int, ...]]:
    # Weak compositions of `total` bounded above by `bounds`, lexicographic.
    if total < 0 or total > sum(bounds):
        return
    if len(bounds) == 1:
        if total <= bounds[0]:
            yield (total,)
        return
    for first in range(0, min(bounds[0], total) + 1):
        for rest in _compositions(bounds[1:], total - first):
            yield (first,) + rest


def column_choices(ensemble: Ensemble, total: int) -> Iterator[tuple[IndexSet, ...]]:
    """All tuples (Y_1..Y_K), Y_i a subset of [m_i], with sum |Y_i| = total."""
    ms = ensemble.column_counts
    for sizes in _compositions(ms, total):
        pools = [
            [IndexSet(m, combo) for combo in itertools.combinations(range(1, m + 1), size)]
            for m, size in zip(ms, sizes)
        ]
        yield from itertools.product(*pools)


def _ordered_partitions(members: tuple[int, ...], sizes: Sequence[int]) -> Iterator[tuple[tuple[int, ...], ...]]:
    # Ordered partitions of `members` into parts of the given sizes.
    if not sizes:
        if not members:
            yield ()
        return
    for part in itertools.combinations(members, sizes[0]):
        rest = tuple(v for v in members if v not in part)
        for tail in _ordered_partitions(rest, sizes[1:]):
            yield (part,) + tail


# ---------------------------------------------------------------------------
# Rank tables: rank of a block's chosen columns restricted to a row subset
# ---------------------------------------------------------------------------

def _integer_grid(block: ExactMatrix) -> list[list[int]]:
    from math import lcm

    grid = []
    for row in block.rows:
        scale = lcm(*(v.denominator for v in row)) if row else 1
        grid.append([int(v * scale) for v in row])
    return grid


def _int_rank(rows: list[list[int]], n_cols: int) -> int:
    # Bareiss elimination on an integer grid (mutates its argument).
    n_rows = len(rows)
    r = 0
    prev = 1
    for col in range(n_cols):
        piv = next((i for i in range(r, n_rows) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][col]
        for i in range(r + 1, n_rows):
            f = rows[i][col]
            ri, rr = rows[i], rows[r]
            for j in range(col + 1, n_cols):
                ri[j] = (p * ri[j] - f * rr[j]) // prev
            ri[col] = 0
        prev = p
        r += 1
        if r == n_rows:
            break
    return r


class _RankTable:
    """Memoized rank of one block's chosen columns over arbitrary row subsets."""

    def __init__(self, block: ExactMatrix, cols: IndexSet):
        grid = _integer_grid(block)
        self._cols = [c - 1 for c in cols]
        self._grid = grid
        self._n = block.n_rows
        self._memo: dict[int, int] = {}
        self.full_rank = self.rank_of_rows((1 << self._n) - 1)

    def rank_of_rows(self, rowmask: int) -> int:
        cached = self._memo.get(rowmask)
        if cached is not None:
            return cached
        rows = [[self._grid[i][c] for c in self._cols] for i in range(self._n) if rowmask >> i & 1]
        value = _int_rank(rows, len(self._cols))
        self._memo[rowmask] = value
        return value

    def sparse_dim(self, jmask: int) -> int:
        # dim(S_J & colspan) = rank - rank(rows outside J)
        return self.full_rank - self.rank_of_rows(~jmask & (1 << self._n) - 1)


def _tables(ensemble: Ensemble, ys: tuple[IndexSet, ...]) -> list[_RankTable]:
    return [_RankTable(block, y) for block, y in zip(ensemble.blocks, ys)]


# ---------------------------------------------------------------------------
# C2 and the maximum almost-sure rank loss
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _YProfile:
    ys: tuple[IndexSet, ...]
    max_slack: int
    argmax_mask: int
    # slack level -> (lex-first J mask reaching that level, its actual slack)
    first_at: dict[int, tuple[int, int]] = field(hash=False)


@lru_cache(maxsize=None)
def _c2_profiles(ensemble: Ensemble) -> tuple[_YProfile, ...]:
    n = ensemble.n
    profiles = []
    for ys in column_choices(ensemble, ensemble.R):
        tables = _tables(ensemble, ys)
        best, argmax = -1, 0
        first_at: dict[int, tuple[int, int]] = {}
        for jmask in lex_subset_masks(n):
            slack = sum(t.sparse_dim(jmask) for t in tables) - jmask.bit_count()
            if slack > best:
                for level in range(best + 1, slack + 1):
                    first_at[level] = (jmask, slack)
                best, argmax = slack, jmask
        profiles.append(_YProfile(ys, best, argmax, first_at))
    return tuple(profiles)


def _support_closed_masks(ensemble: Ensemble, ys: tuple[IndexSet, ...]) -> list[int]:
    # Unions of supports of the selected columns, in lexicographic order.
    supports = []
    for block, y in zip(ensemble.blocks, ys):
        for j in y:
            col = block.column(j - 1)
            supports.append(sum(1 << i for i, v in enumerate(col) if v != 0))
    closed = {0}
    for s in supports:
        closed |= {u | s for u in closed}
    n = ensemble.n
    return sorted(closed, key=lambda m: tuple(i + 1 for i in range(n) if m >> i & 1))


def _check_tau(ensemble: Ensemble, tau: int) -> None:
    if not 1 <= tau <= ensemble.R:
        raise PreconditionError(f"tau must be in [1, {ensemble.R}], got {tau}")


def check_C2(ensemble: Ensemble, tau: int, prune: bool = False) -> CheckResult:
    """For every R-column choice, does some J capture |J| + tau sparse dimensions?

    With prune=True, row sets that are unions of selected-column supports
    are tried first; this is only a fast path for the holding direction
    and always falls back to the exhaustive scan, so verdicts are
    unchanged (reported witnesses may differ).
    """
    _check_tau(ensemble, tau)
    n = ensemble.n
    if prune:
        return _check_c2_pruned(ensemble, tau)
    witnesses = []
    for profile in _c2_profiles(ensemble):
        if profile.max_slack < tau:
            return CheckResult("C2", False, (_c2_counterexample(profile, n, tau),))
        jmask, slack = profile.first_at[tau]
        witnesses.append(
            Witness(
                kind="C2-witness",
                Y=profile.ys,
                J=IndexSet.from_mask(n, jmask),
                slack=slack - tau,
            )
        )
    return CheckResult("C2", True, tuple(witnesses))


def _c2_counterexample(profile: _YProfile, n: int, tau: int) -> Witness:
    return Witness(
        kind="C2-counterexample",
        Y=profile.ys,
        J=IndexSet.from_mask(n, profile.argmax_mask),
        slack=profile.max_slack - tau,
    )


def _check_c2_pruned(ensemble: Ensemble, tau: int) -> CheckResult:
    # Fast path: support-closed J candidates first, exhaustive scan on miss.
    n = ensemble.n
    witnesses = []
    missed: list[tuple[IndexSet, ...]] = []
    for ys in column_choices(ensemble, ensemble.R):
        tables = _tables(ensemble, ys)
        for candidate in _support_closed_masks(ensemble, ys):
            slack = sum(t.sparse_dim(candidate) for t in tables) - candidate.bit_count()
            if slack >= tau:
                witnesses.append(
                    Witness(
                        kind="C2-witness",
                        Y=ys,
                        J=IndexSet.from_mask(n, candidate),
                        slack=slack - tau,
                    )
                )
                break
        else:
            missed.append(ys)
    if missed:
        remaining = set(missed)
        for profile in _c2_profiles(ensemble):
            if profile.ys not in remaining:
                continue
            if profile.max_slack < tau:
                return CheckResult("C2", False, (_c2_counterexample(profile, n, tau),))
            jmask, slack = profile.first_at[tau]
            witnesses.append(
                Witness(
                    kind="C2-witness",
                    Y=profile.ys,
                    J=IndexSet.from_mask(n, jmask),
                    slack=slack - tau,
                )
            )
    return CheckResult("C2", True, tuple(witnesses))


def max_tau(ensemble: Ensemble) -> int:
    """Largest tau such that the ensemble almost surely loses rank by tau.

    tau = 0 holds vacuously; the value equals R minus the generic rank of
    the scaled concatenation.
    """
    return min(profile.max_slack for profile in _c2_profiles(ensemble))


# ---------------------------------------------------------------------------
# C3, C4, C5: the quantified-over-X conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Violation:
    order: int  # position in the canonical scan, for first-found reporting
    witness: Witness


def _first_violation(per_size: dict[int, _Violation], min_size_exclusive: int) -> Witness | None:
    hits = [v for size, v in per_size.items() if size > min_size_exclusive]
    if not hits:
        return None
    return min(hits, key=lambda v: v.order).witness


@lru_cache(maxsize=None)
def _c3_scan(ensemble: Ensemble) -> dict[int, _Violation]:
    """First determinant-product violation per |X|, over the full canonical scan."""
    n = ensemble.n
    per_size: dict[int, _Violation] = {}
    order = 0
    for xmask in lex_subset_masks(n):
        size = xmask.bit_count()
        if size == 0 or size in per_size:
            continue
        x = IndexSet.from_mask(n, xmask)
        for ys in column_choices(ensemble, size):
            sizes = tuple(len(y) for y in ys)
            for parts in _ordered_partitions(x.members, sizes):
                order += 1
                if all(
                    det(block.submatrix(IndexSet(n, part), y)) != 0
                    for block, part, y in zip(ensemble.blocks, parts, ys)
                    if len(y) > 0
                ):
                    per_size[size] = _Violation(
                        order,
                        Witness(
                            kind="C3-violation",
                            Y=ys,
                            X=x,
                            partition=tuple(IndexSet(n, p) for p in parts),
                        ),
                    )
                    break
            if size in per_size:
                break
    return per_size


def check_C3(ensemble: Ensemble, tau: int) -> CheckResult:
    """Do all oversized square selections have vanishing subdeterminant products?"""
    _check_tau(ensemble, tau)
    witness = _first_violation(_c3_scan(ensemble), ensemble.R - tau)
    if witness is None:
        return CheckResult("C3", True)
    return CheckResult("C3", False, (witness,))


@lru_cache(maxsize=None)
def _c4_scan(ensemble: Ensemble) -> dict[int, _Violation]:
    n = ensemble.n
    per_size: dict[int, _Violation] = {}
    order = 0
    for xmask in lex_subset_masks(n):
        size = xmask.bit_count()
        if size == 0 or size in per_size:
            continue
        x = IndexSet.from_mask(n, xmask)
        for ys in column_choices(ensemble, size):
            tables = _tables(ensemble, ys)
            sizes = tuple(len(y) for y in ys)
            for parts in _ordered_partitions(x.members, sizes):
                order += 1
                total = sum(
                    t.sparse_dim(~sum(1 << (v - 1) for v in part) & (1 << n) - 1)
                    for t, part in zip(tables, parts)
                )
                if total == 0:
                    per_size[size] = _Violation(
                        order,
                        Witness(
                            kind="C4-violation",
                            Y=ys,
                            X=x,
                            partition=tuple(IndexSet(n, p) for p in parts),
                        ),
                    )
                    break
            if size in per_size:
                break
    return per_size


def check_C4(ensemble: Ensemble, tau: int) -> CheckResult:
    """Sparse-subspace form: every partition leaves some block a sparse dimension."""
    _check_tau(ensemble, tau)
    witness = _first_violation(_c4_scan(ensemble), ensemble.R - tau)
    if witness is None:
        return CheckResult("C4", True)
    return CheckResult("C4", False, (witness,))


@dataclass(frozen=True)
class _C5Scan:
    violations: dict[int, _Violation] = field(hash=False)
    holders: tuple[Witness, ...] = ()


@lru_cache(maxsize=None)
def _c5_scan(ensemble: Ensemble) -> _C5Scan:
    n = ensemble.n
    per_size: dict[int, _Violation] = {}
    holders: list[Witness] = []
    order = 0
    for xmask in lex_subset_masks(n):
        size = xmask.bit_count()
        if size == 0:
            continue
        x = IndexSet.from_mask(n, xmask)
        xc_mask = ~xmask & (1 << n) - 1
        for ys in column_choices(ensemble, size):
            order += 1
            tables = _tables(ensemble, ys)
            found = None
            best, best_mask = None, 0
            for jmask in lex_subset_masks(n, cap=xmask):
                margin = sum(t.sparse_dim(jmask | xc_mask) for t in tables) - jmask.bit_count()
                if best is None or margin > best:
                    best, best_mask = margin, jmask
                if margin > 0:
                    found = jmask
                    break
            if found is not None:
                if size not in per_size:
                    holders.append(
                        Witness(kind="C5-witness", Y=ys, X=x, J=IndexSet.from_mask(n, found))
                    )
            elif size not in per_size:
                per_size[size] = _Violation(
                    order,
                    Witness(
                        kind="C5-counterexample",
                        Y=ys,
                        X=x,
                        J=IndexSet.from_mask(n, best_mask),
                        slack=best,
                    ),
                )
    return _C5Scan(per_size, tuple(holders))


def check_C5(ensemble: Ensemble, tau: int) -> CheckResult:
    """For every X and column choice, some J inside X overshoots |J| sparse dims."""
    _check_tau(ensemble, tau)
    scan = _c5_scan(ensemble)
    witness = _first_violation(scan.violations, ensemble.R - tau)
    if witness is None:
        threshold = ensemble.R - tau
        return CheckResult(
            "C5", True, tuple(w for w in scan.holders if len(w.X) > threshold)
        )
    return CheckResult("C5", False, (witness,))


# ---------------------------------------------------------------------------
# Cross-validation of all five conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceReport:
    tau: int
    c1: C1Verdict
    results: tuple[CheckResult, ...]

    @property
    def verdicts(self) -> dict[str, bool]:
        out = {"C1": self.c1.holds}
        out.update({r.condition: r.holds for r in self.results})
        return out

    @property
    def agreement(self) -> bool:
        return len(set(self.verdicts.values())) == 1

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "verdicts": self.verdicts,
            "agreement": self.agreement,
            "c1": {
                "label": self.c1.label,
                "sampled_ranks": list(self.c1.sampled_ranks),
                "failure_probability_bound": str(self.c1.bound),
            },
            "results": [r.to_dict() for r in self.results],
        }


def cross_validate(ensemble: Ensemble, tau: int, cfg: TrialConfig | None = None) -> EquivalenceReport:
    """Run C1 through C5 at the given tau and assert all verdicts coincide.

    Raises EquivalenceViolation (carrying the full report) if they do not;
    a disagreement would falsify the certified equivalence and is a bug
    signal, never an expected outcome.
    """
    _check_tau(ensemble, tau)
    report = EquivalenceReport(
        tau=tau,
        c1=check_C1(ensemble, tau, cfg),
        results=(
            check_C2(ensemble, tau),
            check_C3(ensemble, tau),
            check_C4(ensemble, tau),
            check_C5(ensemble, tau),
        ),
    )
    if not report.agreement:
        raise EquivalenceViolation(
            f"conditions disagree at tau={tau}: {report.verdicts}", report=report
        )
    return report

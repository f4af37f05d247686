"""Support bipartite graphs, maximum matching, and the Hall-style threshold.

The graph pairs row indices with basis column vectors: a column vertex is
adjacent to every row where it has a nonzero entry.  Matching sizes on
such graphs are the final reformulation of the rank-loss certificate, via
the defect version of Hall's theorem: a bipartite graph G = (A u B, E)
has a matching of size k iff |N(I)| >= |I| - |B| + k for every I in B.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PreconditionError, ShapeError
from .exactla import ExactMatrix, IndexSet, nullspace_basis, rank

_EXHAUSTIVE_LIMIT = 16


@dataclass(frozen=True)
class SupportGraph:
    """Bipartite support graph: rows 1..n_left against tagged column vertices.

    Each right vertex carries (block index, column label, adjacency
    bitmask over rows); bit i-1 set means the vector is nonzero in row i.
    """

    n_left: int
    rights: tuple[tuple[int, int, int], ...]

    @property
    def n_right(self) -> int:
        return len(self.rights)

    def adjacency(self, right_index: int) -> int:
        return self.rights[right_index][2]

    def neighborhood(self, right_subset: Iterable[int]) -> int:
        mask = 0
        for r in right_subset:
            mask |= self.rights[r][2]
        return mask


def build_support_graph(columns: Sequence[tuple[int, Sequence]]) -> SupportGraph:
    """Graph over (block, column-vector) pairs; edges exactly at nonzero entries."""
    if not columns:
        raise PreconditionError("support graph needs at least one column")
    n = len(columns[0][1])
    rights = []
    per_block_count: dict[int, int] = {}
    for block, vec in columns:
        if len(vec) != n:
            raise ShapeError(f"column of length {len(vec)}, expected {n}")
        label = per_block_count.get(block, 0) + 1
        per_block_count[block] = label
        mask = 0
        for i, v in enumerate(vec):
            if Fraction(v) != 0:
                mask |= 1 << i
        rights.append((block, label, mask))
    return SupportGraph(n, tuple(rights))


def ensemble_support_graph(ensemble, Ys: Sequence[IndexSet] | None = None) -> SupportGraph:
    """Support graph of the chosen columns of every block (all columns by default)."""
    cols: list[tuple[int, tuple]] = []
    for i, block in enumerate(ensemble.blocks, start=1):
        chosen = Ys[i - 1] if Ys is not None else IndexSet.full(block.n_cols)
        for j in chosen:
            cols.append((i, block.column(j - 1)))
    return build_support_graph(cols)


def max_matching(graph: SupportGraph) -> int:
    """Maximum matching size via augmenting paths."""
    match_of_row = [-1] * graph.n_left  # row index -> right vertex or -1

    def try_augment(r: int, visited: list[bool]) -> bool:
        adj = graph.adjacency(r)
        for row in range(graph.n_left):
            if adj >> row & 1 and not visited[row]:
                visited[row] = True
                if match_of_row[row] == -1 or try_augment(match_of_row[row], visited):
                    match_of_row[row] = r
                    return True
        return False

    size = 0
    for r in range(graph.n_right):
        if try_augment(r, [False] * graph.n_left):
            size += 1
    return size


def defect(graph: SupportGraph) -> int:
    """max over right subsets I of |I| - |N(I)|.

    Exhaustive subset scan up to 16 right vertices; beyond that the exact
    value comes from matching duality (defect = |right| - max matching).
    """
    m = graph.n_right
    if m > _EXHAUSTIVE_LIMIT:
        return m - max_matching(graph)
    best = 0
    adjs = [adj for _, _, adj in graph.rights]
    for mask in range(1 << m):
        nbhd = 0
        size = 0
        rest = mask
        while rest:
            low = rest & -rest
            nbhd |= adjs[low.bit_length() - 1]
            size += 1
            rest ^= low
        best = max(best, size - nbhd.bit_count())
    return best


def hall_threshold_check(graph: SupportGraph, k: int) -> bool:
    """Is |N(I)| >= |I| - |right| + k for every right subset I?

    Equivalent to the graph having a matching of size k.
    """
    if not 0 <= k <= min(graph.n_left, graph.n_right):
        raise PreconditionError(
            f"k must lie in [0, {min(graph.n_left, graph.n_right)}], got {k}"
        )
    return defect(graph) <= graph.n_right - k


def adapted_basis(block: ExactMatrix, Y: IndexSet, J: IndexSet) -> ExactMatrix:
    """Basis of colspan(B_{*,Y}) whose leading columns span S_J & colspan(B_{*,Y}).

    The inner part comes from the nullspace of the J-complement row
    restriction; the extension picks original columns greedily until the
    full column-span rank is reached.
    """
    restricted = block.take_cols(Y)
    if J.universe != block.n_rows:
        raise ShapeError(f"J over [{J.universe}] against {block.n_rows}-row matrix")
    inner = restricted.matmul(nullspace_basis(restricted.take_rows(J.complement())))
    target = rank(restricted)
    basis = inner
    current = rank(basis)
    for j in range(restricted.n_cols):
        if current == target:
            break
        candidate = basis.hstack(ExactMatrix.from_columns([restricted.column(j)]))
        if rank(candidate) > current:
            basis = candidate
            current += 1
    return basis

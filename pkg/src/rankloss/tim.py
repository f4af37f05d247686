"""Topological interference management built on the rank-loss certifier.

A topology lists, per receiver, the transmitters heard above the noise
floor.  The analyzer characterizes when half symmetric DoF is achievable
(bipartiteness of the reduced conflict graph), evaluates the linear
symmetric DoF formula for exclusive-alignment topologies, synthesizes the
corresponding beamforming schemes, and verifies decodability by sampled
exact rank computations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import CapacityError, InternalInvariantError, PreconditionError, ShapeError
from .exactla import (
    ExactMatrix,
    IndexSet,
    is_full_column_rank,
    rank,
    row_support,
    sparse_dim,
)
from .matching import adapted_basis
from .randrank import TrialConfig, scaled_block, scaled_concatenation

BOTH_SLOTS = 0  # marker for a transmitter active in every slot of a 2-slot scheme


@dataclass(frozen=True)
class Topology:
    """K-user interference pattern: interference[j-1] = transmitters heard at receiver j."""

    interference: tuple[frozenset[int], ...]

    def __post_init__(self):
        k = len(self.interference)
        if k < 1:
            raise PreconditionError("topology needs at least one user")
        for j, members in enumerate(self.interference, start=1):
            for i in members:
                if not 1 <= i <= k:
                    raise PreconditionError(f"receiver {j}: transmitter {i} outside [1, {k}]")
                if i == j:
                    raise PreconditionError(f"receiver {j} lists its own transmitter as interference")

    @classmethod
    def of(cls, *sets: Iterable[int]) -> "Topology":
        return cls(tuple(frozenset(s) for s in sets))

    @property
    def K(self) -> int:
        return len(self.interference)

    def interferers(self, j: int) -> frozenset[int]:
        return self.interference[j - 1]

    def has_interference(self) -> bool:
        return any(self.interference)

    def alignment_receivers(self) -> tuple[int, ...]:
        """Receivers with exactly two interferers (the alignment sets)."""
        return tuple(j for j in range(1, self.K + 1) if len(self.interferers(j)) == 2)


@dataclass(frozen=True)
class ConflictGraph:
    """Directed conflict graph on users; flavor is "regular" or "reduced"."""

    n_vertices: int
    edges: frozenset[tuple[int, int]]
    flavor: str

    def out_neighbors(self, v: int) -> frozenset[int]:
        return frozenset(j for i, j in self.edges if i == v)

    def undirected_adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in range(1, self.n_vertices + 1)}
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj


def regular_conflict_graph(topology: Topology) -> ConflictGraph:
    """Edge i -> j exactly when transmitter i interferes at receiver j."""
    edges = {
        (i, j)
        for j in range(1, topology.K + 1)
        for i in topology.interferers(j)
    }
    return ConflictGraph(topology.K, frozenset(edges), "regular")


def _shares_multi_interferer_receiver(topology: Topology, i: int) -> bool:
    # Transmitter i interferes at some receiver heard by a second interferer.
    return any(
        i in topology.interferers(k) and len(topology.interferers(k)) >= 2
        for k in range(1, topology.K + 1)
    )


def reduced_conflict_graph(topology: Topology) -> ConflictGraph:
    """Regular edges restricted to sources that share an interfered receiver.

    Edge i -> j survives exactly when transmitter i interferes at some
    receiver k that a second, distinct transmitter also interferes at.
    The qualification depends only on i, so each source keeps either all
    or none of its outgoing edges.
    """
    keep = {i for i in range(1, topology.K + 1) if _shares_multi_interferer_receiver(topology, i)}
    edges = {(i, j) for (i, j) in regular_conflict_graph(topology).edges if i in keep}
    return ConflictGraph(topology.K, frozenset(edges), "reduced")


def is_bipartite(graph: ConflictGraph) -> tuple[bool, tuple[tuple[int, ...], tuple[int, ...]] | None]:
    """2-color the underlying undirected graph.

    Returns (True, (part1, part2)) with a canonical partition (BFS in
    ascending vertex order; isolated vertices land in part1), or
    (False, None) when an odd cycle exists.
    """
    adj = graph.undirected_adjacency()
    color: dict[int, int] = {}
    for root in range(1, graph.n_vertices + 1):
        if root in color:
            continue
        color[root] = 0
        queue = [root]
        while queue:
            v = queue.pop(0)
            for w in sorted(adj[v]):
                if w not in color:
                    color[w] = 1 - color[v]
                    queue.append(w)
                elif color[w] == color[v]:
                    return False, None
    part1 = tuple(v for v in range(1, graph.n_vertices + 1) if color[v] == 0)
    part2 = tuple(v for v in range(1, graph.n_vertices + 1) if color[v] == 1)
    return True, (part1, part2)


def chromatic_number(graph: ConflictGraph) -> int:
    """Exact chromatic number of the underlying undirected graph."""
    if graph.n_vertices > 20:
        raise CapacityError(f"exact coloring limited to 20 vertices, got {graph.n_vertices}")
    adj = graph.undirected_adjacency()
    if not any(adj.values()):
        return 1
    vertices = sorted(adj, key=lambda v: len(adj[v]), reverse=True)

    def colorable(k: int) -> bool:
        assignment: dict[int, int] = {}

        def assign(idx: int) -> bool:
            if idx == len(vertices):
                return True
            v = vertices[idx]
            used = {assignment[w] for w in adj[v] if w in assignment}
            seen = max(assignment.values(), default=-1)
            for c in range(min(seen + 1, k - 1) + 1):
                if c not in used:
                    assignment[v] = c
                    if assign(idx + 1):
                        return True
                    del assignment[v]
            return False

        return assign(0)

    for k in itertools.count(2):
        if colorable(k):
            return k


def check_P1_P2(topology: Topology) -> tuple[bool, tuple[tuple, ...]]:
    """Maximum-degree (P1) and exclusive-alignment-set (P2) properties.

    P1: every receiver hears at most two interferers.  P2: whenever one of
    two distinct receivers hears two interferers, their interference sets
    are disjoint.
    """
    violations: list[tuple] = []
    for j in range(1, topology.K + 1):
        if len(topology.interferers(j)) > 2:
            violations.append(("P1", j))
    for j, k in itertools.combinations(range(1, topology.K + 1), 2):
        ij, ik = topology.interferers(j), topology.interferers(k)
        if max(len(ij), len(ik)) == 2 and ij & ik:
            violations.append(("P2", j, k, tuple(sorted(ij & ik))))
    return not violations, tuple(violations)


def half_dof_feasible(topology: Topology) -> bool:
    """Half symmetric DoF is achievable iff the reduced conflict graph is bipartite."""
    return is_bipartite(reduced_conflict_graph(topology))[0]


# ---------------------------------------------------------------------------
# Schemes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scheme:
    """A linear precoding design: per-user n x m_i beamformers over n slots."""

    n: int
    beamformers: tuple[ExactMatrix, ...]

    def __post_init__(self):
        for i, b in enumerate(self.beamformers, start=1):
            if b.n_rows != self.n:
                raise ShapeError(f"user {i}: beamformer has {b.n_rows} rows, expected {self.n}")
            if b.n_cols < 1 or b.n_cols > self.n:
                raise ShapeError(f"user {i}: {b.n_cols} columns outside [1, {self.n}]")
            if not is_full_column_rank(b):
                raise PreconditionError(f"user {i}: beamformer is not full column rank")

    @property
    def K(self) -> int:
        return len(self.beamformers)

    @property
    def symbol_counts(self) -> tuple[int, ...]:
        return tuple(b.n_cols for b in self.beamformers)

    def activation_pattern(self) -> tuple[tuple[int, ...], ...]:
        """Per user, the slots carrying any nonzero beamformer entry."""
        return tuple(tuple(row_support(b)) for b in self.beamformers)


@dataclass(frozen=True)
class SparseAssignment:
    """Per-receiver optional row sets J_r tied to size-2 alignment sets."""

    n: int
    sets: tuple[IndexSet | None, ...]

    def __post_init__(self):
        for j, s in enumerate(self.sets, start=1):
            if s is not None and s.universe != self.n:
                raise ShapeError(f"receiver {j}: J over [{s.universe}], expected [{self.n}]")

    def get(self, receiver: int) -> IndexSet | None:
        return self.sets[receiver - 1]


def _slot_column(n: int, slot: int) -> list[Fraction]:
    if slot == BOTH_SLOTS:
        return [Fraction(1)] * n
    return [Fraction(1) if i + 1 == slot else Fraction(0) for i in range(n)]


def synth_half_dof_scheme(topology: Topology) -> Scheme:
    """Two-slot repetition scheme from the reduced conflict graph bipartition.

    Transmitters constrained by reduced edges take the slot of their part.
    When the reduced graph has no edges at all, every beamformer is dense
    (active in both slots).  Otherwise each transmitter whose outgoing
    interference was entirely dropped from the reduced graph is placed on
    a slot avoiding its dropped-edge partners, and repeats across both
    slots only when no single slot avoids them all.
    """
    reduced = reduced_conflict_graph(topology)
    ok, parts = is_bipartite(reduced)
    if not ok:
        raise PreconditionError("half DoF infeasible: reduced conflict graph is not bipartite")
    if not reduced.edges:
        return Scheme(2, tuple(ExactMatrix.from_columns([_slot_column(2, BOTH_SLOTS)]) for _ in range(topology.K)))

    adj = reduced.undirected_adjacency()
    part2 = set(parts[1])
    slot: dict[int, int] = {}
    for v in range(1, topology.K + 1):
        if adj[v]:
            slot[v] = 2 if v in part2 else 1

    regular = regular_conflict_graph(topology)
    dropped = regular.edges - reduced.edges
    for v in range(1, topology.K + 1):
        if reduced.out_neighbors(v):
            continue  # all outgoing edges kept; the bipartition already separates them
        partners = {r for (s, r) in dropped if s == v} | {s for (s, r) in dropped if r == v}
        taken = {slot[u] for u in sorted(partners) if slot.get(u) in (1, 2)}
        if v in slot:
            if slot[v] in taken:
                slot[v] = BOTH_SLOTS
        else:
            free = {1, 2} - taken
            if not free:
                slot[v] = BOTH_SLOTS
            elif len(free) == 1:
                slot[v] = free.pop()
            else:
                slot[v] = 2
    return Scheme(2, tuple(ExactMatrix.from_columns([_slot_column(2, slot[v])]) for v in range(1, topology.K + 1)))


def ldof_sym(topology: Topology) -> Fraction:
    """Linear symmetric DoF for exclusive-alignment topologies.

    min(1/2, (chi + 1) / (3 chi)) with chi the chromatic number of the
    reduced conflict graph; defined only for interference networks
    satisfying the maximum-degree and exclusive-alignment-set properties.
    """
    if not topology.has_interference():
        raise PreconditionError("formula applies to topologies with at least one interference link")
    ok, violations = check_P1_P2(topology)
    if not ok:
        raise PreconditionError(f"P1/P2 violated: {violations}")
    chi = chromatic_number(reduced_conflict_graph(topology))
    return min(Fraction(1, 2), Fraction(chi + 1, 3 * chi))


def _prime_stream(skip: int = 0) -> Iterator[int]:
    count = 0
    candidate = 2
    while True:
        if all(candidate % p for p in range(2, int(candidate**0.5) + 1)):
            count += 1
            if count > skip:
                yield candidate
        candidate += 1


def _alignment_conflict_edges(topology: Topology) -> tuple[frozenset[int], frozenset[tuple[int, int]]]:
    # Nodes: receivers with two interferers.  Edge r-d when one's transmitter
    # belongs to the other's alignment set; exactly the pairs whose sparse
    # subspaces must not overlap.
    nodes = frozenset(topology.alignment_receivers())
    edges = set()
    for r, d in itertools.combinations(sorted(nodes), 2):
        if r in topology.interferers(d) or d in topology.interferers(r):
            edges.add((r, d))
    return nodes, frozenset(edges)


def _color_alignment_sets(topology: Topology, limit: int) -> dict[int, int]:
    nodes, edges = _alignment_conflict_edges(topology)
    relation = ConflictGraph(topology.K, edges, "alignment-conflict")
    coloring: dict[int, int] = {}
    adj = relation.undirected_adjacency()
    for v in sorted(nodes, key=lambda v: (-len(adj[v]), v)):
        used = {coloring[w] for w in adj[v] if w in coloring}
        c = next(c for c in itertools.count() if c not in used)
        coloring[v] = c
    colors_used = max(coloring.values(), default=-1) + 1
    if colors_used > limit:
        # Greedy overshoot: fall back to the exact coloring of the relation.
        exact = chromatic_number(relation) if edges else (1 if nodes else 0)
        if exact > limit:
            raise InternalInvariantError(
                f"alignment-conflict relation needs {exact} colors, above chi = {limit}"
            )
        coloring = _exact_coloring(relation, nodes, exact)
    return coloring


def _exact_coloring(graph: ConflictGraph, nodes: frozenset[int], k: int) -> dict[int, int]:
    adj = graph.undirected_adjacency()
    order = sorted(nodes, key=lambda v: (-len(adj[v]), v))
    assignment: dict[int, int] = {}

    def assign(idx: int) -> bool:
        if idx == len(order):
            return True
        v = order[idx]
        used = {assignment[w] for w in adj[v] if w in assignment}
        for c in range(k):
            if c not in used:
                assignment[v] = c
                if assign(idx + 1):
                    return True
                del assignment[v]
        return False

    if not assign(0):
        raise InternalInvariantError(f"no {k}-coloring found for the alignment-conflict relation")
    return assignment


def synth_exclusive_scheme(topology: Topology, attempts: int = 8) -> tuple[Scheme, SparseAssignment]:
    """Beamformer synthesis achieving min(1/2, (chi+1)/(3 chi)).

    For chi = 1 (no reduced edges) the two-slot dense scheme already gives
    half DoF.  Otherwise, over n = 3 chi slots with m = chi + 1 symbols per
    user, each color class of the alignment-conflict relation receives a
    disjoint 3-slot window J; both members of an alignment set spend 3
    columns spanning the sparse subspace of their window and the rest on
    dense generic columns, while uninvolved transmitters stay fully
    generic.  Generic entries are distinct small primes, and the exact
    structural postconditions are re-verified before returning.
    """
    ok, violations = check_P1_P2(topology)
    if not ok:
        raise PreconditionError(f"P1/P2 violated: {violations}")
    chi = chromatic_number(reduced_conflict_graph(topology))
    if chi == 1:
        scheme = synth_half_dof_scheme(topology)
        return scheme, SparseAssignment(scheme.n, (None,) * topology.K)

    n, m, tau = 3 * chi, chi + 1, 3
    coloring = _color_alignment_sets(topology, chi)
    windows = {
        r: IndexSet.of(n, range(3 * c + 1, 3 * c + 4)) for r, c in coloring.items()
    }
    member_window: dict[int, IndexSet] = {}
    for r, window in windows.items():
        for i in topology.interferers(r):
            member_window[i] = window

    for attempt in range(attempts):
        primes = _prime_stream(skip=97 * attempt)
        beamformers = []
        for user in range(1, topology.K + 1):
            window = member_window.get(user)
            cols: list[list[Fraction]] = []
            if window is not None:
                for _ in range(tau):
                    col = [Fraction(0)] * n
                    for row in window:
                        col[row - 1] = Fraction(next(primes))
                    cols.append(col)
            generic = m - len(cols)
            for _ in range(generic):
                cols.append([Fraction(next(primes)) for _ in range(n)])
            beamformers.append(ExactMatrix.from_columns(cols, n_rows=n))
        if _exclusive_postconditions(topology, beamformers, windows, tau):
            scheme = Scheme(n, tuple(beamformers))
            sets = tuple(windows.get(r) for r in range(1, topology.K + 1))
            return scheme, SparseAssignment(n, sets)
    raise InternalInvariantError("generic fill failed structural postconditions repeatedly")


def _exclusive_postconditions(
    topology: Topology,
    beamformers: list[ExactMatrix],
    windows: dict[int, IndexSet],
    tau: int,
) -> bool:
    for b in beamformers:
        if not is_full_column_rank(b):
            return False
    for r, window in windows.items():
        own = beamformers[r - 1]
        if sparse_dim(own, window) != 0:
            return False
        for i in topology.interferers(r):
            if sparse_dim(beamformers[i - 1], window) != tau:
                return False
    return True


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecodabilityReport:
    """Per-receiver sampled decodability verdicts.

    A receiver passes a trial when the desired block contributes its full
    symbol count on top of the interference:
    rank([D_jj B_j | interference]) = m_j + rank(interference).
    Passing every trial certifies decodability up to the one-sided
    sampling guarantee; `bound` is the per-receiver failure probability.
    """

    per_receiver: tuple[bool, ...]
    trial_ranks: tuple[tuple[tuple[int, int], ...], ...]
    bound: Fraction

    @property
    def ok(self) -> bool:
        return all(self.per_receiver)


def verify_decodability(topology: Topology, scheme: Scheme, cfg: TrialConfig | None = None) -> DecodabilityReport:
    """Sampled exact check of the projection decodability condition."""
    cfg = cfg or TrialConfig()
    if scheme.K != topology.K:
        raise ShapeError(f"scheme has {scheme.K} users, topology has {topology.K}")
    n = scheme.n
    per_receiver = []
    details = []
    for j in range(1, topology.K + 1):
        desired = scheme.beamformers[j - 1]
        interferers = sorted(topology.interferers(j))
        receiver_ok = True
        ranks = []
        for trial in range(cfg.trials):
            rng = cfg.trial_rng(trial * topology.K + j)
            desired_scaled = scaled_block(desired, [rng.randint(1, cfg.entry_bound) for _ in range(n)])
            interference = None
            for i in interferers:
                block = scaled_block(
                    scheme.beamformers[i - 1],
                    [rng.randint(1, cfg.entry_bound) for _ in range(n)],
                )
                interference = block if interference is None else interference.hstack(block)
            if interference is None:
                combined_rank = rank(desired_scaled)
                interference_rank = 0
            else:
                combined_rank = rank(interference.hstack(desired_scaled))
                interference_rank = rank(interference)
            ranks.append((combined_rank, interference_rank))
            if combined_rank != desired.n_cols + interference_rank:
                receiver_ok = False
        per_receiver.append(receiver_ok)
        details.append(tuple(ranks))
    return DecodabilityReport(
        tuple(per_receiver), tuple(details), Fraction(n, cfg.entry_bound) ** cfg.trials
    )


@dataclass(frozen=True)
class StructureCheck:
    kind: str  # "alignment-intersection" or "support-disjoint"
    users: tuple[int, ...]
    receiver: int | None
    ok: bool


@dataclass(frozen=True)
class StructureReport:
    checks: tuple[StructureCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def violations(self) -> tuple[StructureCheck, ...]:
        return tuple(c for c in self.checks if not c.ok)


def half_dof_structure_check(topology: Topology, scheme: Scheme) -> StructureReport:
    """Finite structural necessities for an exact half-rate scheme.

    With m_i = n/2 throughout, a decodable design must

    (a) collapse each alignment pair: some row set J must capture
        |J| + n/2 sparse dimensions across the pair's spans (equivalently,
        the pair shares a fully occupied half-size sparse window), or the
        interference at the shared receiver cannot fit in n/2 dimensions;
    (b) avoid conflict overlap along every reduced edge (i, k): if some
        slot t exists that both users can avoid while each keeping n/2 of
        its dimensions (sparse dimension >= n/2 inside the complement of
        {t}), the scaled spans intersect almost surely and receiver k
        fails.

    A reported violation shows the scheme cannot satisfy decodability;
    both checks are exact and never flag a decodable design.
    """
    n = scheme.n
    if n % 2 != 0 or any(m != n // 2 for m in scheme.symbol_counts):
        raise PreconditionError("structure check applies to exact half-rate schemes (m_i = n/2)")
    half = n // 2
    checks: list[StructureCheck] = []
    for r in range(1, topology.K + 1):
        members = sorted(topology.interferers(r))
        if len(members) < 2:
            continue
        for i1, i2 in itertools.combinations(members, 2):
            pair = (scheme.beamformers[i1 - 1], scheme.beamformers[i2 - 1])
            collapses = any(
                sum(sparse_dim(b, IndexSet.from_mask(n, jmask)) for b in pair)
                >= jmask.bit_count() + half
                for jmask in range(1 << n)
            )
            checks.append(StructureCheck("alignment-collapse", (i1, i2), r, collapses))
    reduced = reduced_conflict_graph(topology)
    for i, k in sorted(reduced.edges):
        b_i, b_k = scheme.beamformers[i - 1], scheme.beamformers[k - 1]
        overlap = any(
            sparse_dim(b_i, avoid) >= half and sparse_dim(b_k, avoid) >= half
            for avoid in (IndexSet.of(n, set(range(1, n + 1)) - {t}) for t in range(1, n + 1))
        )
        checks.append(StructureCheck("conflict-overlap", (i, k), None, not overlap))
    return StructureReport(tuple(checks))


def minimal_fully_occupied(ensemble, Ys: Sequence[IndexSet], J: IndexSet, x: int, cfg: TrialConfig | None = None) -> bool:
    """Sampled check that the sparse subspace of a minimal J is fully occupied.

    Preconditions (all verified): the column choice has total size
    min(sum m_i, n); J achieves a sparse surplus of at least x; and no
    proper subset of J does.  The check then asks, at each sample point,
    whether S_J lies inside the column span of the scaled concatenation.
    """
    cfg = cfg or TrialConfig()
    if len(Ys) != ensemble.K:
        raise ShapeError(f"{len(Ys)} column choices for {ensemble.K} blocks")
    total_cols = sum(len(y) for y in Ys)
    if total_cols != ensemble.R:
        raise PreconditionError(
            f"column choice totals {total_cols}, must equal min(sum m_i, n) = {ensemble.R}"
        )
    restricted = [b.take_cols(y) for b, y in zip(ensemble.blocks, Ys)]

    def surplus(rows: IndexSet) -> int:
        return sum(sparse_dim(b, rows) for b in restricted) - len(rows)

    if len(J) == 0:
        return True
    if surplus(J) < x:
        raise PreconditionError(f"J does not achieve sparse surplus {x}")
    for smaller in range(len(J)):
        for combo in itertools.combinations(J.members, smaller):
            if surplus(IndexSet(ensemble.n, combo)) >= x:
                raise PreconditionError(f"J is not minimal: {list(combo)} already achieves surplus {x}")

    identity_cols = ExactMatrix.from_columns(
        [[Fraction(1) if i + 1 == j else Fraction(0) for i in range(ensemble.n)] for j in J],
        n_rows=ensemble.n,
    )
    for trial in range(cfg.trials):
        rng = cfg.trial_rng(trial)
        diags = [[rng.randint(1, cfg.entry_bound) for _ in range(ensemble.n)] for _ in range(ensemble.K)]
        bd = scaled_concatenation(ensemble, diags)
        if rank(bd.hstack(identity_cols)) != rank(bd):
            return False
    return True


def normalize_alignment(
    topology: Topology, scheme: Scheme, assignment: SparseAssignment
) -> tuple[Scheme, SparseAssignment]:
    """Rework an aligned design so each alignment window is tight and clean.

    Given per-receiver row sets J_r with the sparse surplus property and
    no own-signal overlap, produces new beamformers and sets J_r' of size
    tau = 3m - n with S_{J_r'} contained in both members' column spans and
    still avoiding the receiver's own span.  Follows the column-swap
    construction: shrink J_r away from the members' own windows, then
    replace each member's intersection basis by coordinate columns.
    """
    ok, violations = check_P1_P2(topology)
    if not ok:
        raise PreconditionError(f"P1/P2 violated: {violations}")
    if scheme.K != topology.K:
        raise ShapeError(f"scheme has {scheme.K} users, topology has {topology.K}")
    ms = set(scheme.symbol_counts)
    if len(ms) != 1:
        raise PreconditionError("normalization applies to symmetric schemes (equal m_i)")
    m = ms.pop()
    n = scheme.n
    tau = 3 * m - n
    if tau < 1:
        raise PreconditionError(f"tau = 3m - n = {tau} must be positive")

    receivers = topology.alignment_receivers()
    input_sets: dict[int, IndexSet] = {}
    for r in receivers:
        j_r = assignment.get(r)
        if j_r is None:
            raise PreconditionError(f"receiver {r} has a size-2 alignment set but no assigned J")
        members = sorted(topology.interferers(r))
        surplus = sum(sparse_dim(scheme.beamformers[i - 1], j_r) for i in members)
        if surplus < len(j_r) + tau:
            raise PreconditionError(
                f"receiver {r}: sparse surplus {surplus - len(j_r)} below tau = {tau}"
            )
        if sparse_dim(scheme.beamformers[r - 1], j_r) != 0:
            raise PreconditionError(f"receiver {r}: own beamformer meets S_J nontrivially")
        input_sets[r] = j_r

    new_beamformers = list(scheme.beamformers)
    new_sets: list[IndexSet | None] = [None] * topology.K
    for r in receivers:
        members = sorted(topology.interferers(r))
        removed: set[int] = set()
        for i in members:
            if i in input_sets:
                removed |= set(input_sets[i].members)
        j_prime = input_sets[r].difference(IndexSet.of(n, removed))
        dims = [sparse_dim(scheme.beamformers[i - 1], j_prime) for i in members]
        if sum(dims) < len(j_prime) + tau:
            raise PreconditionError(
                f"receiver {r}: surplus does not survive removing the members' own windows"
            )
        j_new = IndexSet(n, j_prime.members[:tau])
        spare = [v for v in j_prime.members if v not in j_new.members]
        for i, d in zip(members, dims):
            base = adapted_basis(scheme.beamformers[i - 1], IndexSet.full(m), j_prime)
            kept = [base.column(c) for c in range(d, base.n_cols)]
            fresh_rows = list(j_new.members) + spare[: d - tau]
            fresh = [
                [Fraction(1) if row == target else Fraction(0) for row in range(1, n + 1)]
                for target in fresh_rows
            ]
            new_beamformers[i - 1] = ExactMatrix.from_columns(fresh + kept, n_rows=n)
        new_sets[r - 1] = j_new

    result = Scheme(n, tuple(new_beamformers))
    for r in receivers:
        j_new = new_sets[r - 1]
        for i in sorted(topology.interferers(r)):
            if sparse_dim(result.beamformers[i - 1], j_new) < tau:
                raise InternalInvariantError(f"receiver {r}: member {i} lost its window basis")
        if sparse_dim(result.beamformers[r - 1], j_new) != 0:
            raise InternalInvariantError(f"receiver {r}: own-signal overlap after normalization")
    return result, SparseAssignment(n, tuple(new_sets))

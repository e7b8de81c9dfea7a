"""Hash graphs of allocation runs and the structural facts about them.

Vertices are bins: ``b`` for table 0 and ``n + b`` for table 1.  Every ball
is an edge between its two candidate bins, so the graph is a bipartite
multigraph with exactly ``m`` edges.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .allocator import RunTrace, max_load, max_load_bin


class PreconditionError(ValueError):
    """Operation called outside its domain."""


Edge = tuple[int, int, int]  # (vertex, vertex, edge id / time)


@dataclass(frozen=True, eq=False)
class HashGraph:
    n: int
    u: np.ndarray  # table-0 endpoint, vertex id in [0, n)
    v: np.ndarray  # table-1 endpoint, vertex id in [n, 2n)
    keys: np.ndarray
    times: np.ndarray

    @property
    def num_vertices(self) -> int:
        return 2 * self.n

    @property
    def num_edges(self) -> int:
        return len(self.u)

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[tuple[int, int]]) -> "HashGraph":
        """Graph from ``(left bin, right bin)`` pairs, times in list order."""
        u = np.array([a for a, _ in edges], dtype=np.int64)
        v = np.array([b for _, b in edges], dtype=np.int64) + n
        t = np.arange(len(edges), dtype=np.int64)
        return cls(n, u, v, t.astype(np.uint64), t)

    def edge(self, e: int) -> Edge:
        return int(self.u[e]), int(self.v[e]), int(self.times[e])

    @cached_property
    def labels(self) -> np.ndarray:
        nv = self.num_vertices
        adj = coo_matrix((np.ones(self.num_edges), (self.u, self.v)), shape=(nv, nv))
        _, lab = connected_components(adj, directed=False)
        return lab

    @cached_property
    def component_counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-label vertex and edge counts."""
        lab = self.labels
        k = int(lab.max()) + 1 if lab.size else 0
        nv = np.bincount(lab, minlength=k)
        ne = np.bincount(lab[self.u], minlength=k) if self.num_edges else np.zeros(k, dtype=np.int64)
        return nv, ne

    def component_edges(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels[self.u] == label)

    def component_vertices(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)


@dataclass(frozen=True)
class ComponentSummary:
    label: int
    size: int
    edges: int
    members: tuple[int, ...]

    @property
    def excess(self) -> int:
        return self.edges - self.size


@dataclass
class LoadGraph:
    """Levels ``V_k ⊂ ... ⊂ V_0`` and ``E_{k-1}, ..., E_0`` around a loaded bin.

    ``vertex_levels[l]`` is ``V_l`` for ``l`` in ``0..k``; ``edge_levels[l]`` is
    ``E_l`` for ``l`` in ``0..k-1``.
    """

    center: int
    k: int
    vertex_levels: list[frozenset[int]]
    edge_levels: list[list[Edge]]

    def edges(self, start: int = 0) -> list[Edge]:
        return [e for l in range(start, self.k) for e in self.edge_levels[l]]

    def level_bounds(self) -> list[int]:
        """Per-level arboricity lower bounds ``a_l``."""
        out = []
        for l in range(self.k):
            denom = len(self.vertex_levels[l]) - 1
            if denom < 1:
                raise PreconditionError(f"level {l} has fewer than two vertices")
            num = sum(len(self.edge_levels[i]) for i in range(l, self.k))
            out.append(-(-num // denom))
        return out

    def check(self) -> list[str]:
        """Violated structural invariants, empty when consistent."""
        bad = []
        if self.vertex_levels[self.k] != frozenset([self.center]):
            bad.append("V_k != {center}")
        for l in range(self.k):
            if len(self.edge_levels[l]) != len(self.vertex_levels[l + 1]):
                bad.append(f"|E_{l}| != |V_{l + 1}|")
            ends = frozenset(x for a, b, _ in self.edge_levels[l] for x in (a, b))
            if ends != self.vertex_levels[l]:
                bad.append(f"V_{l} is not the endpoint set of E_{l}")
            if not self.vertex_levels[l + 1] <= self.vertex_levels[l]:
                bad.append(f"V_{l + 1} not contained in V_{l}")
        return bad


@dataclass(frozen=True)
class DoubleCycleWitness:
    edges: tuple[Edge, ...]
    shape: str  # "theta", "figure-eight" or "dumbbell"

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(x for a, b, _ in self.edges for x in (a, b))

    def is_valid(self) -> bool:
        if not self.edges:
            return False
        deg: dict[int, int] = defaultdict(int)
        for a, b, _ in self.edges:
            deg[a] += 1
            deg[b] += 1
        if min(deg.values()) < 2 or len(self.edges) != len(deg) + 1:
            return False
        return _is_connected(self.edges)


def build_graph(trace: RunTrace) -> HashGraph:
    n = trace.n
    return HashGraph(n, trace.bin0.copy(), trace.bin1 + n, trace.keys.copy(), np.arange(trace.m, dtype=np.int64))


def components(graph: HashGraph, include_isolated: bool = True) -> list[ComponentSummary]:
    """Connected components, parallel edges counted in ``edges``."""
    nv, ne = graph.component_counts
    order = np.argsort(graph.labels, kind="stable")
    offsets = np.concatenate([[0], np.cumsum(nv)])
    out = []
    for lab in range(len(nv)):
        if not include_isolated and nv[lab] == 1:
            continue
        members = tuple(int(x) for x in order[offsets[lab]:offsets[lab + 1]])
        out.append(ComponentSummary(lab, int(nv[lab]), int(ne[lab]), members))
    return out


def component_of(graph: HashGraph, vertex: int) -> ComponentSummary:
    lab = int(graph.labels[vertex])
    nv, ne = graph.component_counts
    members = tuple(int(x) for x in graph.component_vertices(lab))
    return ComponentSummary(lab, int(nv[lab]), int(ne[lab]), members)


def extract_load_graph(trace: RunTrace, vertex: int, k: int) -> LoadGraph:
    """Load graph of ``vertex`` built backwards over ``k`` levels."""
    n = trace.n
    side, b = divmod(vertex, n)
    if int(trace.final_loads[side, b]) < k:
        raise PreconditionError(f"vertex {vertex} has load {trace.final_loads[side, b]} < {k}")
    vertex_levels: list[frozenset[int]] = [frozenset()] * (k + 1)
    edge_levels: list[list[Edge]] = [[] for _ in range(k)]
    vertex_levels[k] = frozenset([vertex])
    for l in range(k - 1, -1, -1):
        level = []
        for w in sorted(vertex_levels[l + 1]):
            t = int(trace.bin_history(*divmod(w, n))[l])
            level.append((int(trace.bin0[t]), int(trace.bin1[t]) + n, t))
        edge_levels[l] = level
        vertex_levels[l] = frozenset(x for a, c, _ in level for x in (a, c))
    return LoadGraph(vertex, k, vertex_levels, edge_levels)


def arboricity_lower_bound(lg: LoadGraph) -> int:
    if lg.k < 1:
        raise PreconditionError("load graph needs k >= 1")
    return max(lg.level_bounds())


def brute_force_arboricity(edges: Sequence[tuple[int, int]] | Sequence[Edge]) -> int:
    """Nash-Williams maximum over all vertex subsets; intended for <= 16 vertices."""
    verts = sorted({x for e in edges for x in e[:2]})
    if len(verts) > 16:
        raise PreconditionError(f"{len(verts)} vertices is too many for exhaustive search")
    if not edges:
        return 0
    idx = {x: i for i, x in enumerate(verts)}
    subsets = np.arange(1 << len(verts), dtype=np.int64)
    inside = np.zeros(subsets.shape, dtype=np.int64)
    for e in edges:
        a, b = idx[e[0]], idx[e[1]]
        inside += ((subsets >> a) & 1) & ((subsets >> b) & 1)
    size = np.zeros(subsets.shape, dtype=np.int64)
    for i in range(len(verts)):
        size += (subsets >> i) & 1
    ok = size >= 2
    return int(np.max(-(-inside[ok] // (size[ok] - 1))))


# --- binomial trees -------------------------------------------------------


def binomial_order(child_orders: Iterable[int]) -> int:
    """Largest ``t`` such that a root with these child orders roots a ``B_t``."""
    d = sorted(child_orders, reverse=True)
    t = 0
    while t < len(d) and all(d[i] >= t - i for i in range(t + 1)):
        t += 1
    return t


def _tree_max_order(adj: dict[int, list[int]], root: int) -> int:
    """Maximum over all roots of the binomial order of a tree, by rerooting."""
    parent = {root: -1}
    seq = [root]
    for x in seq:
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                seq.append(y)
    down: dict[int, int] = {}
    for x in reversed(seq):
        down[x] = binomial_order(down[y] for y in adj[x] if y != parent[x])
    up: dict[int, int] = {root: -1}
    best = 0
    for x in seq:
        vals = [(down[y] if y != parent[x] else up[x], y) for y in adj[x]]
        vals = [(d, y) for d, y in vals if d >= 0]
        best = max(best, binomial_order(d for d, _ in vals))
        for i, (_, y) in enumerate(vals):
            if y != parent[x]:
                up[y] = binomial_order(d for j, (d, _) in enumerate(vals) if j != i)
    return best


def rooted_binomial_order(adj: dict[int, list[int]], root: int) -> int:
    """Binomial order of a tree rooted at ``root``."""
    parent = {root: -1}
    seq = [root]
    for x in seq:
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                seq.append(y)
    down: dict[int, int] = {}
    for x in reversed(seq):
        down[x] = binomial_order(down[y] for y in adj[x] if y != parent[x])
    return down[root]


def _adjacency(edges: Iterable[Edge], skip: int | None = None) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = defaultdict(list)
    for a, b, eid in edges:
        if eid == skip:
            continue
        adj[a].append(b)
        adj[b].append(a)
    return adj


def _two_core_edges(edges: Sequence[Edge]) -> list[Edge]:
    """Edges left after repeatedly deleting degree-1 vertices."""
    deg: dict[int, int] = defaultdict(int)
    inc: dict[int, list[int]] = defaultdict(list)
    for i, (a, b, _) in enumerate(edges):
        deg[a] += 1
        deg[b] += 1
        inc[a].append(i)
        inc[b].append(i)
    alive = [True] * len(edges)
    stack = [x for x, d in deg.items() if d == 1]
    while stack:
        x = stack.pop()
        if deg[x] != 1:
            continue
        for i in inc[x]:
            if alive[i]:
                alive[i] = False
                a, b, _ = edges[i]
                y = b if a == x else a
                deg[x] -= 1
                deg[y] -= 1
                if deg[y] == 1:
                    stack.append(y)
                break
    return [e for e, keep in zip(edges, alive) if keep]


def _component_contains_binomial(edges: list[Edge], size: int, k: int) -> bool:
    if size < (1 << k):
        return False
    if len(edges) > size:
        raise PreconditionError("component has more edges than vertices")
    root = edges[0][0] if edges else None
    if root is None:
        return k == 0
    if len(edges) == size - 1:
        return _tree_max_order(_adjacency(edges), root) >= k
    # unicyclic: B_k is a tree, so it embeds iff it embeds in some spanning tree
    for a, b, eid in _two_core_edges(edges):
        if _tree_max_order(_adjacency(edges, skip=eid), root) >= k:
            return True
    return False


def contains_binomial_tree(graph: HashGraph, k: int, first: int | None = None) -> bool:
    """Whether ``B_k`` is a subgraph of a graph without excess components.

    ``first`` optionally names a vertex whose component is searched first.
    """
    if k <= 0:
        return graph.num_vertices > 0
    nv, ne = graph.component_counts
    if np.any(ne > nv):
        raise PreconditionError("graph has a component with more edges than vertices")
    candidates = np.flatnonzero(nv >= (1 << k))
    if first is not None:
        lab = int(graph.labels[first])
        candidates = [lab] + [int(c) for c in candidates if c != lab]
    lab_of_edge = graph.labels[graph.u]
    order = np.argsort(lab_of_edge, kind="stable")
    offsets = np.concatenate([[0], np.cumsum(np.bincount(lab_of_edge, minlength=len(nv)))])
    for lab in candidates:
        idx = order[offsets[lab]:offsets[lab + 1]]
        edges = [graph.edge(int(e))[:2] + (int(e),) for e in idx]
        if _component_contains_binomial(edges, int(nv[lab]), k):
            return True
    return False


def brute_force_contains_binomial(edges: Sequence[tuple[int, int]], k: int) -> bool:
    """Exhaustive injective embedding search of ``B_k``; tiny graphs only."""
    # B_k as parent array: node ids 0..2^k-1, node i's parent is i with its lowest set bit cleared
    size = 1 << k
    parents = [-1] + [i & (i - 1) for i in range(1, size)]
    adj: dict[int, set[int]] = defaultdict(set)
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    verts = sorted(adj) if adj else []
    if k == 0:
        return bool(verts)

    def extend(i: int, image: list[int]) -> bool:
        if i == size:
            return True
        for w in adj[image[parents[i]]]:
            if w not in image:
                image.append(w)
                if extend(i + 1, image):
                    return True
                image.pop()
        return False

    return any(extend(1, [r]) for r in verts)


# --- double cycles --------------------------------------------------------


def _is_connected(edges: Sequence[Edge]) -> bool:
    adj = _adjacency(edges)
    start = next(iter(adj))
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return len(seen) == len(adj)


def classify_double_cycle(edges: Sequence[Edge]) -> str:
    deg: dict[int, int] = defaultdict(int)
    for a, b, _ in edges:
        deg[a] += 1
        deg[b] += 1
    branch = [x for x, d in deg.items() if d > 2]
    if len(branch) == 1:
        return "figure-eight"
    # two degree-3 vertices: walk each branch out of one of them
    start = branch[0]
    inc: dict[int, list[int]] = defaultdict(list)
    for i, (a, b, _) in enumerate(edges):
        inc[a].append(i)
        inc[b].append(i)
    returns = 0
    for first in inc[start]:
        prev_edge, x = first, _other(edges[first], start)
        while deg[x] == 2:
            nxt = next(i for i in inc[x] if i != prev_edge)
            prev_edge, x = nxt, _other(edges[nxt], x)
        returns += x == start
    return "dumbbell" if returns else "theta"


def _other(edge: Edge, x: int) -> int:
    return edge[1] if edge[0] == x else edge[0]


def double_cycle_from_edges(edges: Sequence[Edge], root: int | None = None) -> DoubleCycleWitness | None:
    """Double cycle inside a connected edge set with at least two independent cycles.

    Takes a BFS tree from ``root``, two non-tree edges and the tree paths from
    the root to their endpoints, then prunes to the 2-core.
    """
    if not edges:
        return None
    adj: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for i, (a, b, _) in enumerate(edges):
        adj[a].append((b, i))
        adj[b].append((a, i))
    if root is None:
        root = min(adj)
    parent: dict[int, tuple[int, int]] = {root: (-1, -1)}
    queue = deque([root])
    tree_edges: set[int] = set()
    while queue:
        x = queue.popleft()
        for y, i in adj[x]:
            if y not in parent:
                parent[y] = (x, i)
                tree_edges.add(i)
                queue.append(y)
    extra = [i for i in range(len(edges)) if i not in tree_edges and edges[i][0] in parent]
    if len(extra) < 2:
        return None
    chosen = set(extra[:2])
    for i in extra[:2]:
        for x in edges[i][:2]:
            while parent[x][0] != -1:
                chosen.add(parent[x][1])
                x = parent[x][0]
    core = _two_core_edges([edges[i] for i in sorted(chosen)])
    return DoubleCycleWitness(tuple(core), classify_double_cycle(core))


def find_double_cycle(graph: HashGraph, component: ComponentSummary) -> DoubleCycleWitness | None:
    if component.excess < 1:
        return None
    edges = [graph.edge(int(e)) for e in graph.component_edges(component.label)]
    return double_cycle_from_edges(edges, root=min(component.members))


# --- per-run checks -------------------------------------------------------


def lemma32_holds(a: int, x: int, v0: int, k: int) -> tuple[bool, bool]:
    """``a lg x >= k`` and ``|V_0| >= (1 + 1/a)^k``, both in exact integer arithmetic."""
    return x**a >= 2**k, v0**a * a**k >= (a + 1) ** k


def check_inductive_witness(trace: RunTrace, graph: HashGraph | None = None) -> bool:
    """On a forest run, every bin reaching load ``l`` roots a ``B_l`` at that time."""
    graph = graph or build_graph(trace)
    nv, ne = graph.component_counts
    if np.any(ne >= nv):
        raise PreconditionError("final hash graph is not a forest")
    adj: dict[int, list[int]] = defaultdict(list)
    placed = trace.placed_vertex
    u, v = graph.u.tolist(), graph.v.tolist()
    lb = trace.load_before
    for j in range(trace.m):
        a, b = u[j], v[j]
        adj[a].append(b)
        adj[b].append(a)
        target = int(placed[j])
        load = int(lb[j, 0 if target == a else 1]) + 1
        if load >= 2 and rooted_binomial_order(adj, target) < load:
            return False
    return True


@dataclass
class DichotomyReport:
    max_load: int
    k: int
    bin: int | None = None
    component_size: int = 0
    arboricity_bound: int = 0
    v0: int = 0
    has_excess: bool = False
    binomial_found: bool | None = None
    lemma32: bool = True
    obs41: bool = True
    inductive: bool | None = None
    double_cycle_edges: int | None = None
    double_cycle_target: int | None = None
    double_cycle_flag: bool = False
    profile: list[tuple[int, int, int]] = field(default_factory=list)  # (|V_l|, |E_l|, a_l)
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_structural_dichotomy(
    trace: RunTrace, graph: HashGraph | None = None, inductive: bool = False
) -> DichotomyReport:
    """Check the per-run structural facts at the max-load bin.

    With ``k + 1`` the maximum load: some component has excess or ``B_k`` is a
    subgraph; the load graph satisfies ``a lg x >= k+1``.  Double-cycle
    witness sizes inside the ``(k+1)``-st load graph are recorded only.
    """
    if trace.config.scheme == "one-choice":
        raise PreconditionError("structural checks apply to two-choice runs only")
    graph = graph or build_graph(trace)
    top = max_load(trace)
    rep = DichotomyReport(max_load=top, k=top - 1)
    if top == 0:
        return rep
    side, b = max_load_bin(trace)
    vertex = side * trace.n + b
    rep.bin = vertex
    nv, ne = graph.component_counts
    rep.has_excess = bool(np.any(ne > nv))
    rep.component_size = int(nv[graph.labels[vertex]])

    lg = extract_load_graph(trace, vertex, top)
    bad = lg.check()
    rep.violations += [f"load graph: {msg}" for msg in bad]
    bounds = lg.level_bounds()
    rep.arboricity_bound = max(bounds)
    rep.v0 = len(lg.vertex_levels[0])
    rep.profile = [(len(lg.vertex_levels[l]), len(lg.edge_levels[l]), bounds[l]) for l in range(top)]
    size_ok, growth_ok = lemma32_holds(rep.arboricity_bound, rep.component_size, rep.v0, top)
    rep.lemma32 = size_ok and growth_ok and rep.component_size >= rep.v0 and not bad
    if not rep.lemma32:
        rep.violations.append(
            f"load-graph growth: a={rep.arboricity_bound} x={rep.component_size} |V_0|={rep.v0} k={top}"
        )

    if not rep.has_excess:
        rep.binomial_found = contains_binomial_tree(graph, rep.k, first=vertex)
        rep.obs41 = rep.binomial_found
        if not rep.obs41:
            rep.violations.append(f"dichotomy: no excess component and no B_{rep.k}")

    load_edges = lg.edges()
    if len(load_edges) > len(lg.vertex_levels[0]):
        w = double_cycle_from_edges(load_edges, root=vertex)
        if w is None or not w.is_valid():
            rep.violations.append("load graph has excess but no valid double cycle was extracted")
        else:
            rep.double_cycle_edges = len(w.edges)
            rep.double_cycle_target = 4 * rep.k + 4
            rep.double_cycle_flag = len(w.edges) > 4 * rep.k + 6

    if inductive and not np.any(ne >= nv):
        rep.inductive = check_inductive_witness(trace, graph)
        if not rep.inductive:
            rep.violations.append("inductive binomial witness failed")
    return rep


def log2(x: float) -> float:
    return math.log2(x)

"""Directed graphs, paths, skew products, translation actions, quotients by
free actions, and the factorization of a free action through a skew product.

Conventions: a graph is (E0, E1, r, s); a path e_1 ... e_n requires
r(e_i) = s(e_{i+1}), so paths run source-to-range left to right.  The skew
product of a graph by a group-valued labeling c has

    r(f, t) = (r(f), t)        s(f, t) = (s(f), c(f) t)

and the group acts on it by right translation, t.(v, s) = (v, s t^-1).
"""
from __future__ import annotations

import graphlib
import json
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .groups import FiniteGroup, Labeling, make_labeling


class GraphError(ValueError):
    pass


class GraphHasCycle(GraphError):
    def __init__(self, message, cycle=None):
        super().__init__(message)
        self.cycle = cycle


class NotSkewProduct(GraphError):
    pass


class ActionNotFree(GraphError):
    pass


class EmptyGraph(GraphError):
    pass


@dataclass(frozen=True)
class Edge:
    id: Hashable
    src: Hashable
    rng: Hashable


class DirectedGraph:
    """A finite directed graph with ordered vertices and edges."""

    def __init__(self, vertices: Sequence[Hashable], edges: Sequence[Edge | tuple]):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex names")
        self.edges = tuple(e if isinstance(e, Edge) else Edge(*e) for e in edges)
        if len({e.id for e in self.edges}) != len(self.edges):
            raise GraphError("duplicate edge ids")
        self._vindex = {v: i for i, v in enumerate(self.vertices)}
        for e in self.edges:
            if e.src not in self._vindex or e.rng not in self._vindex:
                raise GraphError(f"edge {e.id!r} touches an unknown vertex")
        self.src = np.array([self._vindex[e.src] for e in self.edges], dtype=np.int64)
        self.rng = np.array([self._vindex[e.rng] for e in self.edges], dtype=np.int64)
        self._eindex = {e.id: i for i, e in enumerate(self.edges)}
        self._out = [[] for _ in self.vertices]
        for i in range(len(self.edges)):
            self._out[self.src[i]].append(i)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex_index(self, v) -> int:
        return self._vindex[v]

    def edge_index(self, edge_id) -> int:
        return self._eindex[edge_id]

    def out_edges(self, vidx: int) -> list[int]:
        return self._out[vidx]

    def is_sink(self, vidx: int) -> bool:
        return not self._out[vidx]

    def sinks(self) -> list[int]:
        return [i for i in range(self.n_vertices) if not self._out[i]]

    def find_cycle(self):
        """Return a list of vertex indices forming a cycle, or None."""
        ts = graphlib.TopologicalSorter(
            {i: {int(self.rng[e]) for e in range(self.n_edges) if self.src[e] == i}
             for i in range(self.n_vertices)}
        )
        try:
            ts.prepare()
            return None
        except graphlib.CycleError as err:
            return [int(v) for v in err.args[1]]

    def is_acyclic(self) -> bool:
        return self.find_cycle() is None

    def __repr__(self) -> str:
        return f"DirectedGraph({self.n_vertices} vertices, {self.n_edges} edges)"

    def to_json(self) -> str:
        def enc(x):
            return list(x) if isinstance(x, tuple) else x

        return json.dumps(
            {
                "vertices": [enc(v) for v in self.vertices],
                "edges": [
                    {"id": enc(e.id), "src": enc(e.src), "rng": enc(e.rng)}
                    for e in self.edges
                ],
            }
        )

    @staticmethod
    def from_json(text: str) -> "DirectedGraph":
        data = json.loads(text)

        def dec(x):
            return tuple(dec(y) for y in x) if isinstance(x, list) else x

        vertices = [dec(v) for v in data["vertices"]]
        edges = [Edge(dec(e["id"]), dec(e["src"]), dec(e["rng"])) for e in data["edges"]]
        return DirectedGraph(vertices, edges)


def labeled_graph_from_json(text: str, G: FiniteGroup) -> tuple[DirectedGraph, Labeling]:
    """Parse a graph descriptor whose edges carry 'label' fields naming G-elements."""
    data = json.loads(text)
    graph = DirectedGraph.from_json(text)
    assignment = {}
    for e, edge in zip(data["edges"], graph.edges):
        assignment[edge.id] = e.get("label", G.name(G.identity_index))
    return graph, make_labeling(graph, assignment, G)


@dataclass(frozen=True)
class Path:
    """A finite path: a tuple of edge indices, or the empty path at a vertex."""

    graph: DirectedGraph
    edges: tuple[int, ...]
    base: int  # source vertex index; redundant unless the path is empty

    def __post_init__(self):
        prev = self.base
        for e in self.edges:
            if self.graph.src[e] != prev:
                raise GraphError(f"edges do not compose at index {e}")
            prev = self.graph.rng[e]

    @property
    def source(self) -> int:
        return self.base

    @property
    def range(self) -> int:
        return int(self.graph.rng[self.edges[-1]]) if self.edges else self.base

    def __len__(self) -> int:
        return len(self.edges)

    def prepend(self, e: int) -> "Path":
        return Path(self.graph, (e,) + self.edges, int(self.graph.src[e]))

    def key(self):
        return (self.base, self.edges)


def enumerate_sink_paths(graph: DirectedGraph) -> list[Path]:
    """All paths whose range is a sink, including length-0 paths at sinks.

    The list is complete and duplicate-free, grouped by sink and then ordered
    by length and edge sequence, so the ordering is deterministic.  Raises
    :class:`GraphHasCycle` if the graph has a cycle (the path space would be
    infinite).
    """
    cyc = graph.find_cycle()
    if cyc is not None:
        raise GraphHasCycle(f"graph has a cycle through vertices {cyc}", cycle=cyc)
    # Dynamic program: a vertex is processed after all its out-neighbors.
    order = list(
        graphlib.TopologicalSorter(
            {i: {int(graph.rng[e]) for e in graph.out_edges(i)}
             for i in range(graph.n_vertices)}
        ).static_order()
    )
    from_vertex: dict[int, list[tuple[int, ...]]] = {}
    for v in order:
        paths = [()] if graph.is_sink(v) else []
        for e in graph.out_edges(v):
            for tail in from_vertex[int(graph.rng[e])]:
                paths.append((e,) + tail)
        from_vertex[v] = paths
    out = []
    for v in range(graph.n_vertices):
        for seq in from_vertex[v]:
            out.append(Path(graph, seq, v))
    out.sort(key=lambda p: (p.range, len(p), p.edges, p.base))
    return out


def skew_product(
    graph: DirectedGraph, G: FiniteGroup, labeling: Labeling
) -> DirectedGraph:
    """The skew-product graph on vertex set E0 x G and edge set E1 x G."""
    if labeling.graph is not graph or labeling.group is not G:
        labeling = Labeling(graph, G, labeling.by_edge)
    vertices = [(v, G.name(t)) for v in graph.vertices for t in G]
    edges = []
    for i, e in enumerate(graph.edges):
        c = labeling.of(i)
        for t in G:
            edges.append(
                Edge(
                    (e.id, G.name(t)),
                    (e.src, G.name(G.mul(c, t))),
                    (e.rng, G.name(t)),
                )
            )
    return DirectedGraph(vertices, edges)


class GraphAction:
    """An action of a finite group on a graph by automorphisms.

    Stored as one vertex permutation and one edge permutation per group
    element; ``vperm[t][v]`` is the index of t.v.
    """

    def __init__(self, graph: DirectedGraph, group: FiniteGroup, vperm, eperm):
        self.graph = graph
        self.group = group
        self.vperm = np.asarray(vperm, dtype=np.int64)
        self.eperm = np.asarray(eperm, dtype=np.int64)
        self._validate()

    def _validate(self):
        g, G = self.graph, self.group
        if self.vperm.shape != (G.order, g.n_vertices):
            raise GraphError("vertex permutation table has wrong shape")
        if self.eperm.shape != (G.order, g.n_edges):
            raise GraphError("edge permutation table has wrong shape")
        ident = np.arange(g.n_vertices)
        for t in G:
            if sorted(self.vperm[t]) != list(range(g.n_vertices)):
                raise GraphError(f"element {t} does not permute vertices")
            if sorted(self.eperm[t]) != list(range(g.n_edges)):
                raise GraphError(f"element {t} does not permute edges")
            # Automorphism: commutes with source and range maps.
            if not np.array_equal(g.src[self.eperm[t]], self.vperm[t][g.src]):
                raise GraphError(f"element {t} does not respect sources")
            if not np.array_equal(g.rng[self.eperm[t]], self.vperm[t][g.rng]):
                raise GraphError(f"element {t} does not respect ranges")
        if not np.array_equal(self.vperm[self.group.identity_index], ident):
            raise GraphError("identity element acts nontrivially on vertices")
        # Homomorphism into automorphisms: (st).x = s.(t.x).
        for s in G:
            for t in G:
                st = G.mul(s, t)
                if not np.array_equal(self.vperm[st], self.vperm[s][self.vperm[t]]):
                    raise GraphError(f"vertex action breaks at ({s},{t})")
                if not np.array_equal(self.eperm[st], self.eperm[s][self.eperm[t]]):
                    raise GraphError(f"edge action breaks at ({s},{t})")

    def vertex(self, t: int, vidx: int) -> int:
        return int(self.vperm[t, vidx])

    def edge(self, t: int, eidx: int) -> int:
        return int(self.eperm[t, eidx])


def is_free(action: GraphAction) -> bool:
    """True iff no non-identity element fixes a vertex or an edge."""
    n_v = action.graph.n_vertices
    n_e = action.graph.n_edges
    for t in action.group:
        if t == action.group.identity_index:
            continue
        if np.any(action.vperm[t] == np.arange(n_v)):
            return False
        if n_e and np.any(action.eperm[t] == np.arange(n_e)):
            return False
    return True


def translation_action(skew: DirectedGraph, G: FiniteGroup) -> GraphAction:
    """The right-translation action t.(v, s) = (v, s t^-1) on a skew product.

    Raises :class:`NotSkewProduct` if the graph's cells are not (cell, group
    element) pairs covering every group coordinate.
    """
    names = set(G.elements)

    def split(cells):
        base = []
        for c in cells:
            if not (isinstance(c, tuple) and len(c) == 2 and c[1] in names):
                raise NotSkewProduct(f"cell {c!r} is not a (cell, group element) pair")
            base.append(c)
        return base

    split(skew.vertices)
    split(e.id for e in skew.edges)
    vindex = {v: i for i, v in enumerate(skew.vertices)}
    eindex = {e.id: i for i, e in enumerate(skew.edges)}
    vperm = np.zeros((G.order, skew.n_vertices), dtype=np.int64)
    eperm = np.zeros((G.order, skew.n_edges), dtype=np.int64)
    for t in G:
        for i, (v, sname) in enumerate(skew.vertices):
            s = G.index(sname)
            key = (v, G.name(G.mul(s, G.inv(t))))
            if key not in vindex:
                raise NotSkewProduct(f"missing translated vertex {key!r}")
            vperm[t, i] = vindex[key]
        for i, e in enumerate(skew.edges):
            f, sname = e.id
            s = G.index(sname)
            key = (f, G.name(G.mul(s, G.inv(t))))
            if key not in eindex:
                raise NotSkewProduct(f"missing translated edge {key!r}")
            eperm[t, i] = eindex[key]
    return GraphAction(skew, G, vperm, eperm)


class GraphIso:
    """A pair of bijections between two graphs intertwining source and range."""

    def __init__(self, a: DirectedGraph, b: DirectedGraph, vertex_map: dict, edge_map: dict):
        self.a = a
        self.b = b
        self.vertex_map = dict(vertex_map)
        self.edge_map = dict(edge_map)
        self.verify()

    def verify(self):
        a, b = self.a, self.b
        if sorted(map(repr, self.vertex_map.keys())) != sorted(map(repr, a.vertices)):
            raise GraphError("vertex map is not total on the domain")
        if sorted(map(repr, self.vertex_map.values())) != sorted(map(repr, b.vertices)):
            raise GraphError("vertex map is not a bijection onto the codomain")
        if sorted(map(repr, self.edge_map.keys())) != sorted(repr(e.id) for e in a.edges):
            raise GraphError("edge map is not total on the domain edges")
        if sorted(map(repr, self.edge_map.values())) != sorted(repr(e.id) for e in b.edges):
            raise GraphError("edge map is not a bijection onto the codomain edges")
        for e in a.edges:
            img = b.edges[b.edge_index(self.edge_map[e.id])]
            if img.src != self.vertex_map[e.src] or img.rng != self.vertex_map[e.rng]:
                raise GraphError(f"edge {e.id!r} does not intertwine s and r")

    def vertex(self, v):
        return self.vertex_map[v]

    def edge(self, eid):
        return self.edge_map[eid]

    def inverse(self) -> "GraphIso":
        return GraphIso(
            self.b,
            self.a,
            {w: v for v, w in self.vertex_map.items()},
            {fid: eid for eid, fid in self.edge_map.items()},
        )


def quotient_and_gross_tucker(
    graph: DirectedGraph, action: GraphAction
) -> tuple[DirectedGraph, Labeling, GraphIso]:
    """Quotient a free action and factor the graph through a skew product.

    Returns (E, c, iso) where E = F/G is the quotient graph on orbits, c is a
    labeling of E, and iso : F -> E x_c G is a graph isomorphism carrying the
    given action to right translation.  The section is the least-index orbit
    representative per orbit, which makes the output deterministic.
    """
    if not is_free(action):
        for t in action.group:
            if t == action.group.identity_index:
                continue
            fixed_v = np.nonzero(action.vperm[t] == np.arange(graph.n_vertices))[0]
            if len(fixed_v):
                raise ActionNotFree(
                    f"element {t} fixes vertex {graph.vertices[fixed_v[0]]!r}"
                )
            fixed_e = np.nonzero(action.eperm[t] == np.arange(graph.n_edges))[0]
            if len(fixed_e):
                raise ActionNotFree(
                    f"element {t} fixes edge {graph.edges[fixed_e[0]].id!r}"
                )
    G = action.group

    def orbit_data(perm_rows, count):
        # rep[i]: least-index orbit representative; shift[i]: the unique t
        # with i = t.rep[i] (unique because the action is free).
        rep = np.full(count, -1, dtype=np.int64)
        shift = np.full(count, -1, dtype=np.int64)
        for i in range(count):
            if rep[i] >= 0:
                continue
            orbit = [(int(perm_rows[t, i]), t) for t in G]
            r = min(o for o, _ in orbit)
            # t with t.i = r, so i = t^-1.r
            t_to_r = next(t for o, t in orbit if o == r)
            for o, t in [(int(perm_rows[t, r]), t) for t in G]:
                rep[o] = r
                shift[o] = t
            del t_to_r
        return rep, shift

    vrep, vshift = orbit_data(action.vperm, graph.n_vertices)
    erep, eshift = orbit_data(action.eperm, graph.n_edges)

    vreps = sorted(set(int(r) for r in vrep))
    ereps = sorted(set(int(r) for r in erep))
    qvertex_of = {r: ("orbit", graph.vertices[r]) for r in vreps}
    qedges = []
    labels = []
    for r in ereps:
        e = graph.edges[r]
        src_rep = int(vrep[graph.src[r]])
        rng_rep = int(vrep[graph.rng[r]])
        qedges.append(
            Edge(("orbit", e.id), qvertex_of[src_rep], qvertex_of[rng_rep])
        )
        # s(rep edge) = sigma . (source rep vertex); r(rep edge) = rho . (range rep)
        sigma = int(vshift[graph.src[r]])
        rho = int(vshift[graph.rng[r]])
        labels.append(G.mul(G.inv(sigma), rho))
    quotient = DirectedGraph([qvertex_of[r] for r in vreps], qedges)
    labeling = Labeling(quotient, G, labels)
    skew = skew_product(quotient, G, labeling)

    vertex_map = {}
    for i, v in enumerate(graph.vertices):
        t = int(vshift[i])  # v = t . rep
        vertex_map[v] = (qvertex_of[int(vrep[i])], G.name(G.inv(t)))
    edge_map = {}
    for i, e in enumerate(graph.edges):
        t = int(eshift[i])  # e = t . rep
        rho = int(vshift[graph.rng[int(erep[i])]])
        # Representative edge maps to group coordinate rho^-1; translate by t.
        coord = G.mul(G.inv(rho), G.inv(t))
        edge_map[e.id] = (("orbit", graph.edges[int(erep[i])].id), G.name(coord))
    iso = GraphIso(graph, skew, vertex_map, edge_map)

    # The isomorphism must carry the action to right translation.
    translated = translation_action(skew, G)
    skew_vindex = {v: i for i, v in enumerate(skew.vertices)}
    skew_eindex = {e.id: i for i, e in enumerate(skew.edges)}
    for t in G:
        for i, v in enumerate(graph.vertices):
            lhs = vertex_map[graph.vertices[action.vertex(t, i)]]
            rhs = skew.vertices[translated.vertex(t, skew_vindex[vertex_map[v]])]
            if lhs != rhs:
                raise GraphError(f"vertex equivariance fails at t={t}, v={v!r}")
        for i, e in enumerate(graph.edges):
            lhs = edge_map[graph.edges[action.edge(t, i)].id]
            rhs = skew.edges[translated.edge(t, skew_eindex[edge_map[e.id]])].id
            if lhs != rhs:
                raise GraphError(f"edge equivariance fails at t={t}, e={e.id!r}")
    return quotient, labeling, iso


def convention_iso(
    graph: DirectedGraph, G: FiniteGroup, labeling: Labeling, which: str = "group-first"
) -> tuple[DirectedGraph, GraphIso]:
    """Translate the skew product into one of the other standard conventions.

    'group-first'  : cells (t, v), (t, f) with s(t,f) = (t, s(f)),
                     r(t,f) = (t c(f), r(f)).
    'range-twisted': cells (v, t), (f, t) with s(f,t) = (s(f), t),
                     r(f,t) = (r(f), t c(f)).

    Either way the isomorphism onto our source-twisted skew product sends the
    vertex cell to (v, t^-1) and the edge cell to (f, c(f)^-1 t^-1).
    """
    skew = skew_product(graph, G, labeling)
    if which == "group-first":
        mk_v = lambda v, t: (G.name(t), v)
        mk_e = lambda f, t: (G.name(t), f)
    elif which == "range-twisted":
        mk_v = lambda v, t: (v, G.name(t))
        mk_e = lambda f, t: (f, G.name(t))
    else:
        raise ValueError(f"unknown convention {which!r}")
    vertices = [mk_v(v, t) for v in graph.vertices for t in G]
    edges = []
    for i, e in enumerate(graph.edges):
        c = labeling.of(i)
        for t in G:
            edges.append(Edge(mk_e(e.id, t), mk_v(e.src, t), mk_v(e.rng, G.mul(t, c))))
    other = DirectedGraph(vertices, edges)
    vertex_map = {
        mk_v(v, t): (v, G.name(G.inv(t))) for v in graph.vertices for t in G
    }
    edge_map = {}
    for i, e in enumerate(graph.edges):
        c = labeling.of(i)
        for t in G:
            edge_map[mk_e(e.id, t)] = (e.id, G.name(G.mul(G.inv(c), G.inv(t))))
    return other, GraphIso(other, skew, vertex_map, edge_map)


def find_graph_isomorphism(a: DirectedGraph, b: DirectedGraph, cell_cap: int = 64):
    """Backtracking search for a graph isomorphism; None if there is none.

    Intended as a small-scale oracle; refuses graphs with more than
    ``cell_cap`` cells.
    """
    if a.n_vertices + a.n_edges > cell_cap or b.n_vertices + b.n_edges > cell_cap:
        raise GraphError(f"graph too large for isomorphism search (cap {cell_cap})")
    if a.n_vertices != b.n_vertices or a.n_edges != b.n_edges:
        return None

    def degrees(g):
        out = [[0, 0] for _ in range(g.n_vertices)]
        for e in range(g.n_edges):
            out[g.src[e]][0] += 1
            out[g.rng[e]][1] += 1
        return [tuple(d) for d in out]

    deg_a, deg_b = degrees(a), degrees(b)
    if sorted(deg_a) != sorted(deg_b):
        return None

    # Multi-digraph adjacency with multiplicities.
    def pair_counts(g):
        counts = {}
        for e in range(g.n_edges):
            key = (int(g.src[e]), int(g.rng[e]))
            counts[key] = counts.get(key, 0) + 1
        return counts

    pc_a, pc_b = pair_counts(a), pair_counts(b)
    assign = [-1] * a.n_vertices
    used = [False] * b.n_vertices

    def ok(i, j):
        if deg_a[i] != deg_b[j]:
            return False
        for k in range(i):
            if pc_a.get((i, k), 0) != pc_b.get((j, assign[k]), 0):
                return False
            if pc_a.get((k, i), 0) != pc_b.get((assign[k], j), 0):
                return False
        if pc_a.get((i, i), 0) != pc_b.get((j, j), 0):
            return False
        return True

    def rec(i):
        if i == a.n_vertices:
            return True
        for j in range(b.n_vertices):
            if not used[j] and ok(i, j):
                assign[i] = j
                used[j] = True
                if rec(i + 1):
                    return True
                assign[i] = -1
                used[j] = False
        return False

    if not rec(0):
        return None
    vertex_map = {a.vertices[i]: b.vertices[assign[i]] for i in range(a.n_vertices)}
    # Match edges greedily within (src, rng) classes.
    edge_map = {}
    buckets: dict[tuple, list] = {}
    for e in b.edges:
        buckets.setdefault((e.src, e.rng), []).append(e.id)
    for e in a.edges:
        key = (vertex_map[e.src], vertex_map[e.rng])
        if not buckets.get(key):
            return None
        edge_map[e.id] = buckets[key].pop()
    return GraphIso(a, b, vertex_map, edge_map)

"""Finite groups given by Cayley tables, their regular representations, and
group-valued edge labelings.

Group elements are indices into an ordered element list; human-readable names
are kept only for I/O.  All group-law checks are exhaustive, which is why the
order is capped at ``MAX_GROUP_ORDER``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

MAX_GROUP_ORDER = 16


class GroupError(ValueError):
    """Base class for group-validation failures."""


class NotLatinSquare(GroupError):
    pass


class NoIdentity(GroupError):
    pass


class NoInverse(GroupError):
    pass


class NotAssociative(GroupError):
    pass


class MissingEdge(ValueError):
    """A labeling left some edge unassigned."""


class FiniteGroup:
    """A finite group: ordered element names plus a validated Cayley table.

    ``table[i, j]`` is the index of the product (element i) * (element j).
    Instances are immutable; construct through :func:`make_group` (or the
    named constructors) so the group laws are checked exhaustively.
    """

    def __init__(self, elements: Sequence[str], table: np.ndarray, identity_index: int):
        self.elements = tuple(elements)
        self.table = np.asarray(table, dtype=np.int64)
        self.table.setflags(write=False)
        self.identity_index = int(identity_index)
        self._inverse = np.empty(len(self.elements), dtype=np.int64)
        for i in range(len(self.elements)):
            self._inverse[i] = int(np.nonzero(self.table[i] == self.identity_index)[0][0])
        self._inverse.setflags(write=False)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(range(len(self.elements)))

    def mul(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def inv(self, i: int) -> int:
        return int(self._inverse[i])

    def name(self, i: int) -> str:
        return self.elements[i]

    def index(self, name: str) -> int:
        return self.elements.index(name)

    def __repr__(self) -> str:
        return f"FiniteGroup({list(self.elements)!r})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FiniteGroup)
            and self.elements == other.elements
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.elements, self.table.tobytes()))

    def to_json(self) -> str:
        return json.dumps({"elements": list(self.elements), "table": self.table.tolist()})

    @staticmethod
    def from_json(text: str) -> "FiniteGroup":
        data = json.loads(text)
        return make_group(data["table"], elements=data.get("elements"))


def make_group(table, elements: Sequence[str] | None = None) -> FiniteGroup:
    """Validate a multiplication table and return the group it defines.

    Checks, exhaustively: the table is a Latin square over valid indices, a
    two-sided identity exists, every element has a two-sided inverse, and
    multiplication is associative.  Error messages name the witnessing
    indices.
    """
    t = np.asarray(table, dtype=np.int64)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise GroupError(f"table must be square, got shape {t.shape}")
    n = t.shape[0]
    if n == 0:
        raise GroupError("empty table")
    if n > MAX_GROUP_ORDER:
        raise GroupError(f"group order {n} exceeds cap {MAX_GROUP_ORDER}")
    if t.min() < 0 or t.max() >= n:
        raise GroupError("table entries must be element indices in range")

    full = frozenset(range(n))
    for i in range(n):
        if frozenset(t[i]) != full:
            raise NotLatinSquare(f"row {i} is not a permutation: {t[i].tolist()}")
        if frozenset(t[:, i]) != full:
            raise NotLatinSquare(f"column {i} is not a permutation: {t[:, i].tolist()}")

    identity = None
    for i in range(n):
        if all(t[i, j] == j and t[j, i] == j for j in range(n)):
            identity = i
            break
    if identity is None:
        raise NoIdentity("no two-sided identity element")

    for i in range(n):
        left = np.nonzero(t[:, i] == identity)[0]
        right = np.nonzero(t[i] == identity)[0]
        if len(left) == 0 or len(right) == 0 or left[0] != right[0]:
            raise NoInverse(f"element {i} has no two-sided inverse")

    # Exhaustive associativity; vectorized over the third index.
    for i in range(n):
        for j in range(n):
            if not np.array_equal(t[t[i, j]], t[i, t[j]]):
                k = int(np.nonzero(t[t[i, j]] != t[i, t[j]])[0][0])
                raise NotAssociative(f"({i}*{j})*{k} != {i}*({j}*{k})")

    if elements is None:
        elements = [f"g{i}" for i in range(n)]
        elements[identity] = "e"
    elif len(elements) != n:
        raise GroupError("element name list does not match table size")
    return FiniteGroup(elements, t, identity)


def cyclic_group(n: int) -> FiniteGroup:
    table = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    names = ["e"] + [f"g{'^' + str(k) if k > 1 else ''}" for k in range(1, n)]
    return make_group(table, elements=names)


def trivial_group() -> FiniteGroup:
    return make_group([[0]], elements=["e"])


def klein_four_group() -> FiniteGroup:
    # Z2 x Z2 with elements e, a, b, ab.
    table = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]
    return make_group(table, elements=["e", "a", "b", "ab"])


@dataclass(frozen=True)
class GroupRepresentation:
    """One of the three standard representations on C^G.

    kind 'left-regular':  lam_s e_t = e_{st}
    kind 'right-regular': rho_s e_t = e_{t s^-1}
    kind 'projection':    chi_r = rank-one projection onto e_r

    The right-regular convention is chosen so that rho_t chi_r = chi_{r t^-1} rho_t
    holds on the nose.  All matrices have exact 0/1 integer entries.
    """

    group: FiniteGroup
    kind: str

    @property
    def dimension(self) -> int:
        return self.group.order

    def matrix(self, k: int) -> np.ndarray:
        G = self.group
        n = G.order
        m = np.zeros((n, n), dtype=np.int64)
        if self.kind == "left-regular":
            for t in range(n):
                m[G.mul(k, t), t] = 1
        elif self.kind == "right-regular":
            kinv = G.inv(k)
            for t in range(n):
                m[G.mul(t, kinv), t] = 1
        elif self.kind == "projection":
            m[k, k] = 1
        else:
            raise ValueError(f"unknown representation kind {self.kind!r}")
        return m


@dataclass(frozen=True)
class RegularRepresentations:
    left: GroupRepresentation
    right: GroupRepresentation
    proj: GroupRepresentation

    def lam(self, s: int) -> np.ndarray:
        return self.left.matrix(s)

    def rho(self, s: int) -> np.ndarray:
        return self.right.matrix(s)

    def chi(self, r: int) -> np.ndarray:
        return self.proj.matrix(r)


def regular_representations(G: FiniteGroup) -> RegularRepresentations:
    """The bundle (lam, rho, chi) of regular representations of G."""
    return RegularRepresentations(
        GroupRepresentation(G, "left-regular"),
        GroupRepresentation(G, "right-regular"),
        GroupRepresentation(G, "projection"),
    )


class Labeling:
    """An assignment of a group element to every edge of a directed graph."""

    def __init__(self, graph, group: FiniteGroup, by_edge: Sequence[int]):
        self.graph = graph
        self.group = group
        self.by_edge = np.asarray(by_edge, dtype=np.int64)
        self.by_edge.setflags(write=False)
        if len(self.by_edge) != len(graph.edges):
            raise MissingEdge(
                f"labeling covers {len(self.by_edge)} of {len(graph.edges)} edges"
            )

    def of(self, edge_index: int) -> int:
        return int(self.by_edge[edge_index])

    def of_path(self, edge_indices: Sequence[int]) -> int:
        """Product c(e_1) c(e_2) ... c(e_n); identity for the empty path."""
        out = self.group.identity_index
        for e in edge_indices:
            out = self.group.mul(out, self.of(e))
        return out

    def __repr__(self) -> str:
        vals = [self.group.name(v) for v in self.by_edge]
        return f"Labeling({vals!r})"


def make_labeling(graph, assignment: Mapping, G: FiniteGroup) -> Labeling:
    """Build a labeling from an edge-id -> group-element mapping.

    Values may be element names or indices.  Every edge must be assigned;
    otherwise :class:`MissingEdge` is raised naming the first missing edge.
    """
    by_edge = []
    for edge in graph.edges:
        if edge.id not in assignment:
            raise MissingEdge(f"edge {edge.id!r} has no label")
        v = assignment[edge.id]
        if isinstance(v, str):
            if v not in G.elements:
                raise GroupError(
                    f"label {v!r} on edge {edge.id!r} is not an element of the group"
                )
            by_edge.append(G.index(v))
        else:
            by_edge.append(int(v))
    lab = Labeling(graph, G, by_edge)
    if lab.by_edge.size and (lab.by_edge.min() < 0 or lab.by_edge.max() >= G.order):
        raise GroupError("label out of range")
    return lab


def constant_labeling(graph, G: FiniteGroup, value: int | None = None) -> Labeling:
    if value is None:
        value = G.identity_index
    return Labeling(graph, G, [value] * len(graph.edges))

"""Skew-product graphs, translation actions, and quotients.

A labeling of a directed graph E by a finite group G twists E into a covering
graph E x_c G.  This walk-through builds the smallest interesting example,
recovers E from the covering by quotienting the translation action, and
translates between the skew-product conventions found in the literature.
"""
import numpy as np

from skewprod import graphs, groups

# ---------------------------------------------------------------------------
# The base graph: one edge f from v to a sink w, labeled by the generator of
# Z2.  Conventions: r(f, t) = (r(f), t) and s(f, t) = (s(f), c(f) t).
E1 = graphs.DirectedGraph(["v", "w"], [("f", "v", "w")])
Z2 = groups.cyclic_group(2)
labeling = groups.make_labeling(E1, {"f": "g"}, Z2)

skew = graphs.skew_product(E1, Z2, labeling)
print("skew product vertices:", skew.vertices)
for e in skew.edges:
    print(f"  edge {e.id}: {e.src} -> {e.rng}")
# The two edges cross the two levels: the label acts on the source coordinate.

# ---------------------------------------------------------------------------
# G acts on the covering by right translation, t.(v, s) = (v, s t^-1), and the
# action is free.
action = graphs.translation_action(skew, Z2)
print("\ntranslation action is free:", graphs.is_free(action))

# Quotienting a free action factors the graph through a skew product again:
# the labeling is recovered from a choice of orbit representatives.
quotient, recovered, iso = graphs.quotient_and_gross_tucker(skew, action)
print("quotient has", quotient.n_vertices, "vertices and", quotient.n_edges, "edge")
print("recovered label:", Z2.name(recovered.of(0)))
print("quotient isomorphic to E1:",
      graphs.find_graph_isomorphism(quotient, E1) is not None)

# ---------------------------------------------------------------------------
# Other conventions put the group coordinate first or twist the range instead
# of the source; the translation map is (v, t) -> (v, t^-1) on vertices and
# (f, t) -> (f, c(f)^-1 t^-1) on edges, verified cell by cell.
for which in ("group-first", "range-twisted"):
    other, conv = graphs.convention_iso(E1, Z2, labeling, which)
    print(f"\n{which} convention edges:")
    for e in other.edges:
        print(f"  {e.id}: {e.src} -> {e.rng}  (ours: {conv.edge(e.id)})")

# A larger random example: every skew product quotients back to its base.
rng = np.random.default_rng(7)
verts = [f"v{i}" for i in range(5)]
edges = [("a", "v0", "v1"), ("b", "v1", "v3"), ("c", "v0", "v2"), ("d", "v2", "v3")]
E = graphs.DirectedGraph(verts, edges)
Z3 = groups.cyclic_group(3)
lab = groups.Labeling(E, Z3, rng.integers(0, 3, E.n_edges))
F = graphs.skew_product(E, Z3, lab)
q, _, _ = graphs.quotient_and_gross_tucker(F, graphs.translation_action(F, Z3))
print("\nrandom example: quotient of the 3-fold covering is E:",
      graphs.find_graph_isomorphism(q, E) is not None)

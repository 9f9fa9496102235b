"""Graph C*-algebras, coactions, and the two crossed-product isomorphisms.

For a finite acyclic graph the Cuntz-Krieger algebra is a concrete matrix
algebra on path space.  A group labeling induces a coaction, and the skew
product realizes its crossed product:

    C*(E x_c G)  =  C*(E) x_delta G          (equivariantly)
    C*(E x_c G) x_gamma G  =  C*(E) (x) M_|G|

Both isomorphisms are certified in exact arithmetic below, together with the
generator chase that shows the regular representation of the full crossed
product is faithful.
"""
import numpy as np

from skewprod import duality, graphalg, graphs, groups, matalg

E1 = graphs.DirectedGraph(["v", "w"], [("f", "v", "w")])
Z2 = groups.cyclic_group(2)
labeling = groups.make_labeling(E1, {"f": "g"}, Z2)

# ---------------------------------------------------------------------------
# The path-space representation: basis {w, f}, s_f a matrix unit.
fam = graphalg.ck_representation(E1)
print("ambient path space dimension:", fam.ambient_dim)
print("s_f =\n", fam.s[0].toarray().real)
print("dim C*(E1) =", fam.dim, "=",
      matalg.span_closure(list(fam.s) + list(fam.p)).dim, "(span-closure oracle)")

# The gauge action scales each s_f by a unit-modulus z.
for z in (1.0, -1.0, 1j, np.exp(2j * np.pi / 7)):
    assert graphalg.gauge_check(fam, z).passed
print("gauge automorphisms verified for four sample points")

# ---------------------------------------------------------------------------
# The coaction delta(s_f) = s_f (x) lam_c(f), delta(p_v) = p_v (x) 1 is
# machine-verified (coaction identity to 1e-12, injectivity, nondegeneracy).
rc = graphalg.coaction(fam, Z2, labeling)
print("\ndelta(s_f) =\n", rc.delta_edge(0).toarray().real)
graded = graphalg.spectral_subspaces(fam, Z2, labeling)
print("spectral subspace dimensions:",
      {Z2.name(t): d for t, d in graded.subspace_dims().items()})

# ---------------------------------------------------------------------------
# Certificates.  Each one builds both sides in concrete matrices, checks the
# Cuntz-Krieger relations for the image family, certifies the generator map
# as a *-isomorphism, and checks equivariance exactly.
c1 = duality.certify_eqvt_iso(E1, Z2, labeling)
print("\nC*(E x_c G) = C*(E) x_delta G:", c1.passed,
      f"(dims {c1.lhs_dim} = {c1.rhs_dim}, equivariance error {c1.equivariance_error})")

c2 = duality.certify_direct_iso(E1, Z2, labeling)
print("C*(E x_c G) x_gamma G = C*(E) (x) M_2:", c2.passed,
      f"(dims {c2.lhs_dim} = {c2.rhs_dim}, signatures {c2.signatures})")

c3 = duality.certify_regular_diagram(E1, Z2, labeling)
print("duality-composite route equals Theta on every generator:",
      c3.extra["chase_ok"], f"(regular representation faithful: "
      f"{c3.extra['regular_rep_dim_ok']})")

# ---------------------------------------------------------------------------
# Free actions: two disjoint copies of E1 swapped by Z2.  The crossed product
# is stably the algebra of the quotient graph.
two = graphs.DirectedGraph(
    ["v0", "w0", "v1", "w1"], [("f0", "v0", "w0"), ("f1", "v1", "w1")]
)
swap = graphs.GraphAction(
    two, Z2, np.array([[0, 1, 2, 3], [2, 3, 0, 1]]), np.array([[0, 1], [1, 0]])
)
c4 = duality.certify_free_action(two, swap)
print("\nC*(F) x_beta Z2 = C*(F/Z2) (x) M_2:", c4.passed,
      f"(signature {c4.signatures['lhs']}, i.e. one 4x4 block)")

import numpy as np
import pytest

from skewprod import graphalg, graphs, groups, matalg
from skewprod.graphalg import (
    CKRelationError,
    ck_representation,
    coaction,
    gauge_check,
    spectral_subspaces,
)
from skewprod.graphs import DirectedGraph, EmptyGraph, GraphHasCycle


def brute_force_sink_paths(graph):
    """Independent path oracle: depth-first enumeration from every vertex."""
    out = []

    def walk(v, acc):
        if graph.is_sink(v):
            out.append(tuple(acc))
        for e in graph.out_edges(v):
            walk(int(graph.rng[e]), acc + [e])

    for v in range(graph.n_vertices):
        walk(v, [])
    return out


class TestCKRepresentation:
    def test_e1_matrices(self, e1):
        fam = ck_representation(e1)
        # Basis {w, f}: s_f is the matrix unit e_{f,w}; p_v, p_w diagonal.
        assert fam.ambient_dim == 2
        assert fam.s[0].toarray().real.tolist() == [[0, 0], [1, 0]]
        assert fam.p[0].toarray().real.tolist() == [[0, 0], [0, 1]]
        assert fam.p[1].toarray().real.tolist() == [[1, 0], [0, 0]]
        assert fam.dim == 4
        oracle = matalg.span_closure(list(fam.s) + list(fam.p))
        assert oracle.dim == 4

    def test_isolated_vertex(self):
        single = DirectedGraph(["u"], [])
        fam = ck_representation(single)
        assert fam.ambient_dim == 1
        assert fam.p[0].toarray().tolist() == [[1.0 + 0j]]

    def test_chain_full_m3(self, chain2):
        fam = ck_representation(chain2)
        assert fam.ambient_dim == 3
        assert fam.dim == 9
        assert matalg.span_closure(list(fam.s) + list(fam.p)).dim == 9
        assert matalg.wedderburn_signature(fam.span) == (3,)

    def test_dimension_formula_random(self, rng):
        # dim C*(E) = sum over sinks of (paths into the sink)^2, with the
        # path count taken from an independent depth-first oracle and the
        # dimension cross-checked by span closure.
        for _ in range(5):
            n_v = int(rng.integers(2, 6))
            verts = [f"v{i}" for i in range(n_v)]
            edges = []
            for k in range(int(rng.integers(1, 6))):
                i = int(rng.integers(0, n_v - 1))
                j = int(rng.integers(i + 1, n_v))
                edges.append((f"e{k}", verts[i], verts[j]))
            E = DirectedGraph(verts, edges)
            fam = ck_representation(E)

            def terminal(start, p):
                v = start
                for e in p:
                    v = int(E.rng[e])
                return v

            sink_counts = {v: 0 for v in range(E.n_vertices) if E.is_sink(v)}
            total = 0
            for v in range(E.n_vertices):
                for p in brute_force_sink_paths_from(E, v):
                    sink_counts[terminal(v, p)] += 1
                    total += 1
            assert fam.ambient_dim == total
            assert fam.dim == sum(n * n for n in sink_counts.values())
            if fam.ambient_dim <= 12:
                assert matalg.span_closure(list(fam.s) + list(fam.p)).dim == fam.dim

    def test_rejects_cycle(self):
        loop = DirectedGraph(["v"], [("f", "v", "v")])
        with pytest.raises(GraphHasCycle):
            ck_representation(loop)

    def test_rejects_empty(self):
        with pytest.raises(EmptyGraph):
            ck_representation(DirectedGraph([], []))


def brute_force_sink_paths_from(graph, start):
    out = []

    def walk(v, acc):
        if graph.is_sink(v):
            out.append(tuple(acc))
        for e in graph.out_edges(v):
            walk(int(graph.rng[e]), acc + [e])

    walk(start, [])
    return out


class TestGauge:
    def test_identity(self, e1):
        fam = ck_representation(e1)
        rep = gauge_check(fam, 1.0)
        assert rep.passed

    def test_minus_one_on_e1(self, e1):
        fam = ck_representation(e1)
        rep = gauge_check(fam, -1.0)
        assert rep.passed and rep.is_ck_family
        # alpha_{-1} fixes p_v and p_w and negates s_f: the scaled family
        # satisfies the relations directly.
        s_f = -1.0 * fam.s[0]
        assert matalg.frobenius(s_f.conj().T @ s_f - fam.p[1]) == 0.0
        assert matalg.frobenius(s_f @ s_f.conj().T - fam.p[0]) == 0.0

    @pytest.mark.parametrize("z", [1j, np.exp(2j * np.pi / 7)])
    def test_unit_circle_samples(self, chain2, z):
        fam = ck_representation(chain2)
        rep = gauge_check(fam, z)
        assert rep.passed

    def test_rejects_non_unit_modulus(self, e1):
        fam = ck_representation(e1)
        with pytest.raises(ValueError):
            gauge_check(fam, 2.0)

    def test_cross_check_against_pair_closure(self, e1):
        fam = ck_representation(e1)
        gens = list(fam.s) + list(fam.p)
        imgs = [(-1) * fam.s[0], fam.p[0], fam.p[1]]
        general = matalg.check_star_map(gens, imgs, target=fam.span)
        assert general.passed == gauge_check(fam, -1.0).passed is True


class TestCoaction:
    def test_e1_z2_displayed_matrix(self, e1, z2, e1_z2_labeling):
        fam = ck_representation(e1)
        rc = coaction(fam, z2, e1_z2_labeling)
        # delta(s_f) = s_f (x) lam_g, a 4x4 matrix; delta(p_v) = p_v (x) 1.
        lam_g = np.array([[0, 1], [1, 0]])
        assert np.array_equal(
            rc.delta_edge(0).toarray().real, np.kron(fam.s[0].toarray().real, lam_g)
        )
        assert np.array_equal(
            rc.delta_vertex(0).toarray().real,
            np.kron(fam.p[0].toarray().real, np.eye(2)),
        )

    def test_trivial_group(self, e1):
        G1 = groups.trivial_group()
        fam = ck_representation(e1)
        rc = coaction(fam, G1, groups.constant_labeling(e1, G1))
        for e in range(e1.n_edges):
            assert matalg.frobenius(rc.delta_edge(e) - fam.s[e]) == 0.0

    def test_verification_tolerance(self, e1, z2, e1_z2_labeling):
        fam = ck_representation(e1)
        rc = graphalg.RepresentedCoaction(fam, z2, e1_z2_labeling)
        errs = rc.verify(tol=1e-12)
        assert errs["coaction_identity"] <= 1e-12
        assert errs["injective"]

    def test_degree_revealing(self, chain2, z3, rng):
        lab = groups.Labeling(chain2, z3, rng.integers(0, 3, 2))
        fam = ck_representation(chain2)
        rc = coaction(fam, z3, lab)
        lam = [rc.reps.lam(t) for t in z3]
        for k in range(fam.dim):
            t = int(rc.graded.degrees[k])
            b = fam.span.basis_matrix(k)
            lhs = rc.delta(b)
            rhs = matalg.kron(b, lam[t])
            assert matalg.frobenius(lhs - rhs) == 0.0


class TestSpectralSubspaces:
    def test_e1_z2_dims(self, e1, z2, e1_z2_labeling):
        fam = ck_representation(e1)
        gb = spectral_subspaces(fam, z2, e1_z2_labeling)
        assert gb.subspace_dims() == {0: 2, 1: 2}

    def test_trivial_labeling_all_degree_e(self, chain2, z2):
        fam = ck_representation(chain2)
        gb = spectral_subspaces(fam, z2, groups.constant_labeling(chain2, z2))
        assert gb.subspace_dims() == {0: fam.dim, 1: 0}

    def test_degrees_multiply_to_e(self, e1, z2, e1_z2_labeling):
        fam = ck_representation(e1)
        gb = spectral_subspaces(fam, z2, e1_z2_labeling)
        # s_f s_f* lands in degree c(f) c(f)^-1 = e.
        k_f = fam.pair_index[(1, 0)]
        k_fstar = fam.pair_index[(0, 1)]
        assert gb.degrees[k_f] == 1 and gb.degrees[k_fstar] == 1
        prod = fam.pair_index[(1, 1)]
        assert gb.degrees[prod] == 0

    def test_subspace_dims_sum(self, rng):
        for _ in range(3):
            n_v = int(rng.integers(2, 5))
            verts = [f"v{i}" for i in range(n_v)]
            edges = []
            for k in range(int(rng.integers(1, 5))):
                i = int(rng.integers(0, n_v - 1))
                j = int(rng.integers(i + 1, n_v))
                edges.append((f"e{k}", verts[i], verts[j]))
            E = DirectedGraph(verts, edges)
            G = groups.klein_four_group()
            lab = groups.Labeling(E, G, rng.integers(0, 4, E.n_edges))
            fam = ck_representation(E)
            gb = spectral_subspaces(fam, G, lab)
            assert sum(gb.subspace_dims().values()) == fam.dim

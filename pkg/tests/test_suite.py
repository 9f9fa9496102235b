from skewprod import groupoids, suite


def test_random_acyclic_graph_is_acyclic(rng):
    for _ in range(10):
        E = suite.random_acyclic_graph(rng)
        assert E.is_acyclic()
        assert E.n_vertices <= 8 and E.n_edges <= 12


def test_random_graph_instance_respects_budgets(rng):
    from skewprod.graphalg import ck_representation

    for _ in range(5):
        E, G, lab = suite.random_graph_instance(rng, max_dim=128, dim_budget=200)
        fam = ck_representation(E)
        assert fam.ambient_dim * G.order**2 <= 128
        assert fam.dim * G.order**2 <= 200


def test_random_groupoid_within_caps(rng):
    for _ in range(8):
        Q = suite.random_groupoid(rng)
        assert Q.n_units <= 6 and Q.n_arrows <= 24


def test_random_cocycle_is_valid(rng):
    # Cocycle construction validates itself; exercise mixed isotropy.
    for _ in range(8):
        Q = suite.random_groupoid(rng)
        G = suite.cyclic_group(3)
        c = suite.random_cocycle(rng, Q, G)
        assert isinstance(c, groupoids.Cocycle)


def test_group_homomorphism_search():
    z2, z3 = suite.cyclic_group(2), suite.cyclic_group(3)
    homs = suite._group_homomorphisms(z2, z3)
    assert len(homs) == 1  # only the trivial one
    homs = suite._group_homomorphisms(z3, z3)
    assert len(homs) == 3


def test_suite_run_deterministic_and_ordered():
    r1 = suite.suite_run(seed=5, cases=3)
    r2 = suite.suite_run(seed=5, cases=3)
    assert [c.index for c in r1.cases] == [0, 1, 2]
    s1 = [(c.kind, c.seed, c.passed, repr(sorted(c.summary))) for c in r1.cases]
    s2 = [(c.kind, c.seed, c.passed, repr(sorted(c.summary))) for c in r2.cases]
    assert s1 == s2
    assert r1.passed

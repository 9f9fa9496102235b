import json

import numpy as np
import pytest

from skewprod import groups
from skewprod.groups import (
    GroupError,
    MissingEdge,
    NoIdentity,
    NotAssociative,
    NotLatinSquare,
    cyclic_group,
    klein_four_group,
    make_group,
    make_labeling,
    regular_representations,
    trivial_group,
)


def test_z2_from_table():
    G = make_group([[0, 1], [1, 0]])
    assert G.order == 2
    assert G.identity_index == 0
    assert G.inv(1) == 1


def test_not_latin_square_names_witness():
    with pytest.raises(NotLatinSquare) as err:
        make_group([[0, 1], [1, 1]])
    assert "1" in str(err.value)


def test_z3_cyclic():
    G = cyclic_group(3)
    assert G.order == 3
    assert G.mul(1, 2) == 0
    assert G.inv(1) == 2


def test_no_identity_rejected():
    # A Latin square whose only left identity is not a right identity.
    with pytest.raises(NoIdentity):
        make_group([[0, 1, 2], [2, 0, 1], [1, 2, 0]])


def test_non_associative_rejected():
    # Latin square with identity but not associative (order 5 loop).
    table = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    with pytest.raises(NotAssociative):
        make_group(table)


def test_order_cap():
    n = groups.MAX_GROUP_ORDER + 1
    table = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    with pytest.raises(GroupError):
        make_group(table)


def test_json_round_trip():
    G = klein_four_group()
    back = groups.FiniteGroup.from_json(G.to_json())
    assert back == G


ALL_GROUPS = [cyclic_group(2), cyclic_group(3), cyclic_group(4), klein_four_group()]


@pytest.mark.parametrize("G", ALL_GROUPS, ids=lambda g: f"order{g.order}")
def test_regular_representation_laws(G):
    reps = regular_representations(G)
    n = G.order
    assert np.array_equal(reps.lam(G.identity_index), np.eye(n, dtype=np.int64))
    for s in G:
        for t in G:
            assert np.array_equal(reps.lam(s) @ reps.lam(t), reps.lam(G.mul(s, t)))
            assert np.array_equal(reps.rho(s) @ reps.rho(t), reps.rho(G.mul(s, t)))
            # lambda and rho commute elementwise.
            assert np.array_equal(
                reps.lam(s) @ reps.rho(t), reps.rho(t) @ reps.lam(s)
            )
            # rho_t chi_r = chi_{r t^-1} rho_t.
            assert np.array_equal(
                reps.rho(t) @ reps.chi(s),
                reps.chi(G.mul(s, G.inv(t))) @ reps.rho(t),
            )


@pytest.mark.parametrize("G", ALL_GROUPS, ids=lambda g: f"order{g.order}")
def test_projections_resolve_identity(G):
    reps = regular_representations(G)
    total = sum(reps.chi(r) for r in G)
    assert np.array_equal(total, np.eye(G.order, dtype=np.int64))
    for r in G:
        for r2 in G:
            prod = reps.chi(r) @ reps.chi(r2)
            assert np.all(prod == 0) if r != r2 else np.array_equal(prod, reps.chi(r))


def test_z2_lambda_is_antidiagonal():
    # lam_s e_t = e_{st}, read off the Cayley table.
    G = cyclic_group(2)
    lam_g = regular_representations(G).lam(1)
    assert lam_g.tolist() == [[0, 1], [1, 0]]


def test_z2_chi_covariance_example():
    G = cyclic_group(2)
    reps = regular_representations(G)
    assert np.array_equal(reps.rho(1) @ reps.chi(0), reps.chi(1) @ reps.rho(1))


class TestLabeling:
    def test_single_edge(self, e1, z2):
        lab = make_labeling(e1, {"f": "g"}, z2)
        assert lab.of(0) == 1

    def test_constant_identity(self, e1, z2):
        lab = groups.constant_labeling(e1, z2)
        assert lab.of(0) == z2.identity_index

    def test_missing_edge(self, chain2, z2):
        with pytest.raises(MissingEdge):
            make_labeling(chain2, {"e1": "g"}, z2)

    def test_unknown_label(self, e1):
        with pytest.raises(GroupError):
            make_labeling(e1, {"f": "g"}, trivial_group())

    def test_path_product_order(self, chain2, z3):
        lab = make_labeling(chain2, {"e1": "g", "e2": "g^2"}, z3)
        # c(e1 e2) = c(e1) c(e2) = g g^2 = e.
        assert lab.of_path([0, 1]) == z3.identity_index
        assert lab.of_path([]) == z3.identity_index

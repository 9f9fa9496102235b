"""Randomized certification suites.

Instances are sampled under explicit size budgets (ambient dimension of the
largest constructed algebra, and the dimension of the double crossed product)
so that every certification stays at desk scale.  Sampling is deterministic
per seed, and each case derives its own child seed, so suites can be
dispatched concurrently and reassembled in case order with byte-identical
reports.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import duality, graphalg, groupoids
from .graphs import DirectedGraph, GraphHasCycle, skew_product, translation_action
from .groups import FiniteGroup, Labeling, cyclic_group, klein_four_group

GAUGE_SAMPLES = (1.0, -1.0, 1j, np.exp(2j * np.pi / 7))


def suite_groups() -> list[FiniteGroup]:
    return [cyclic_group(2), cyclic_group(3), cyclic_group(4), klein_four_group()]


def random_acyclic_graph(
    rng: np.random.Generator, max_vertices: int = 8, max_edges: int = 12
) -> DirectedGraph:
    """A random DAG: edges only go from lower to higher vertex index."""
    n_v = int(rng.integers(2, max_vertices + 1))
    n_e = int(rng.integers(1, max_edges + 1))
    vertices = [f"v{i}" for i in range(n_v)]
    edges = []
    for k in range(n_e):
        i = int(rng.integers(0, n_v - 1))
        j = int(rng.integers(i + 1, n_v))
        edges.append((f"e{k}", vertices[i], vertices[j]))
    return DirectedGraph(vertices, edges)


def random_graph_instance(
    rng: np.random.Generator,
    max_dim: int = 256,
    dim_budget: int = 512,
    groups: list[FiniteGroup] | None = None,
):
    """(graph, group, labeling) with the double-crossed-product ambient under
    ``max_dim`` and its linear dimension under ``dim_budget``."""
    groups = groups or suite_groups()
    while True:
        G = groups[int(rng.integers(len(groups)))]
        E = random_acyclic_graph(rng)
        try:
            fam = graphalg.ck_representation(E)
        except GraphHasCycle:  # pragma: no cover - generator never makes cycles
            continue
        if fam.ambient_dim * G.order**2 > max_dim:
            continue
        if fam.dim * G.order**2 > dim_budget:
            continue
        labeling = Labeling(E, G, rng.integers(0, G.order, E.n_edges))
        return E, G, labeling


def random_free_action_instance(
    rng: np.random.Generator, max_dim: int = 256, dim_budget: int = 360
):
    """A free action, generated as the translation action on a random skew
    product (every free action arises this way up to isomorphism)."""
    E, G, labeling = random_graph_instance(rng, max_dim=max_dim, dim_budget=dim_budget)
    F = skew_product(E, G, labeling)
    return F, translation_action(F, G)


def _isotropy_choices() -> list[FiniteGroup | None]:
    return [None, cyclic_group(2), cyclic_group(3)]


def random_groupoid(
    rng: np.random.Generator, max_units: int = 6, max_arrows: int = 24
) -> groupoids.FiniteGroupoid:
    """A random finite groupoid: a disjoint union of transitive components
    with mixed orbit sizes and isotropy groups."""
    while True:
        parts = []
        units = 0
        arrows = 0
        n_parts = int(rng.integers(1, 4))
        for p in range(n_parts):
            orbit = int(rng.integers(1, 4))
            iso = _isotropy_choices()[int(rng.integers(3))]
            part_arrows = orbit * orbit * (iso.order if iso else 1)
            if units + orbit > max_units or arrows + part_arrows > max_arrows:
                continue
            units += orbit
            arrows += part_arrows
            if iso is None:
                parts.append(groupoids.pair_groupoid(orbit) if orbit > 1
                             else groupoids.units_only_groupoid(1))
            else:
                parts.append(groupoids.transitive_groupoid(orbit, iso, tag=f"c{p}"))
        if parts:
            return groupoids.disjoint_union(parts) if len(parts) > 1 else parts[0]


def _group_homomorphisms(H: FiniteGroup, G: FiniteGroup) -> list[np.ndarray]:
    """All homomorphisms H -> G, by exhaustive search (tiny groups only)."""
    from itertools import product

    homs = []
    n = H.order
    for values in product(range(G.order), repeat=n):
        if values[H.identity_index] != G.identity_index:
            continue
        ok = all(
            values[H.mul(a, b)] == G.mul(values[a], values[b])
            for a in range(n)
            for b in range(n)
        )
        if ok:
            homs.append(np.array(values, dtype=np.int64))
    return homs


def random_cocycle(
    rng: np.random.Generator, Q: groupoids.FiniteGroupoid, G: FiniteGroup
) -> groupoids.Cocycle:
    """A random cocycle Q -> G: on each transitive component, a vertex
    potential twisted by a homomorphism of the isotropy group,
    c(x) = phi(r(x)) psi(iso(x)) phi(s(x))^-1."""
    phi = rng.integers(0, G.order, Q.n_units)
    # Isotropy subgroup at each unit: arrows with r = s = u.
    values = np.zeros(Q.n_arrows, dtype=np.int64)
    # Choose one homomorphism per component by brute force on the isotropy
    # group at a base unit; transport along a spanning forest.
    visited = np.full(Q.n_units, -1, dtype=np.int64)
    comp = 0
    for u0 in range(Q.n_units):
        if visited[u0] >= 0:
            continue
        stack = [u0]
        visited[u0] = comp
        while stack:
            u = stack.pop()
            for x in range(Q.n_arrows):
                for v in (int(Q.r[x]), int(Q.s[x])):
                    if (Q.r[x] == u or Q.s[x] == u) and visited[v] < 0:
                        visited[v] = comp
                        stack.append(v)
        comp += 1
    # Isotropy group at the base unit of each component, as a FiniteGroup.
    psi_of_arrow = {}
    for c_idx in range(comp):
        base = int(np.nonzero(visited == c_idx)[0][0])
        iso_arrows = [
            x for x in range(Q.n_arrows) if Q.r[x] == base and Q.s[x] == base
        ]
        table = np.zeros((len(iso_arrows), len(iso_arrows)), dtype=np.int64)
        index = {x: i for i, x in enumerate(iso_arrows)}
        for i, x in enumerate(iso_arrows):
            for j, y in enumerate(iso_arrows):
                table[i, j] = index[int(Q.mult[x, y])]
        from .groups import make_group

        H = make_group(table)
        homs = _group_homomorphisms(H, G)
        psi = homs[int(rng.integers(len(homs)))]
        # Transport: pick a reference arrow from the base to every unit.
        ref = {base: int(Q.unit_arrow[base])}
        frontier = [base]
        while frontier:
            u = frontier.pop()
            for x in range(Q.n_arrows):
                if Q.s[x] == u and int(Q.r[x]) not in ref:
                    ref[int(Q.r[x])] = int(Q.mult[x, ref[u]])
                    frontier.append(int(Q.r[x]))
        for x in range(Q.n_arrows):
            if visited[Q.r[x]] != c_idx:
                continue
            # x = ref[r(x)] h ref[s(x)]^-1 with h in the base isotropy.
            h = int(
                Q.mult[
                    int(Q.mult[Q.inv[ref[int(Q.r[x])]], x]), ref[int(Q.s[x])]
                ]
            )
            psi_of_arrow[x] = int(psi[index[h]]) if h in index else None
            if psi_of_arrow[x] is None:
                raise groupoids.GroupoidError("isotropy transport failed")
    for x in range(Q.n_arrows):
        r_, s_ = int(Q.r[x]), int(Q.s[x])
        values[x] = G.mul(
            int(phi[r_]), G.mul(psi_of_arrow[x], G.inv(int(phi[s_])))
        )
    return groupoids.Cocycle(Q, G, values)


@dataclass
class CaseResult:
    index: int
    kind: str
    seed: int
    passed: bool
    wall_time_s: float
    summary: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "seed": self.seed,
            "passed": self.passed,
            "summary": self.summary,
        }


def run_graph_case(seed: int, index: int = 0, tol: float = 1e-8,
                   max_dim: int = 256) -> CaseResult:
    """One graph-suite case: coaction + gauge checks, the equivariant and
    direct isomorphisms, and the diagram chase."""
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    E, G, labeling = random_graph_instance(rng, max_dim=max_dim)
    fam = graphalg.ck_representation(E)
    rc = graphalg.coaction(fam, G, labeling)  # verifies at 1e-12
    gauge_ok = all(
        graphalg.gauge_check(fam, z).passed for z in GAUGE_SAMPLES
    )
    c1 = duality.certify_eqvt_iso(E, G, labeling, tol=tol)
    c2 = duality.certify_direct_iso(E, G, labeling, tol=tol, rng=rng)
    c3 = duality.certify_regular_diagram(E, G, labeling, tol=tol)
    passed = (
        gauge_ok
        and c1.passed
        and c1.equivariance_error == 0.0
        and c2.passed
        and c3.passed
    )
    summary = {
        "graph": {"vertices": E.n_vertices, "edges": E.n_edges},
        "group_order": G.order,
        "dims": {
            "C*(E)": fam.dim,
            "C*(ExG)": c1.lhs_dim,
            "coaction_crossed": c1.rhs_dim,
            "action_crossed": c2.lhs_dim,
        },
        # graphalg.coaction would have raised on any violation above 1e-12.
        "coaction_ok": rc is not None,
        "gauge_ok": gauge_ok,
        "eqvt_iso": c1.as_dict(),
        "direct_iso": c2.as_dict(),
        "diagram": c3.as_dict(),
    }
    return CaseResult(index, "graph", seed, passed, time.perf_counter() - t0, summary)


def run_free_action_case(seed: int, index: int = 0, tol: float = 1e-8,
                         max_dim: int = 256) -> CaseResult:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    F, action = random_free_action_instance(rng, max_dim=max_dim)
    cert = duality.certify_free_action(F, action, tol=tol, rng=rng)
    summary = {
        "graph": {"vertices": F.n_vertices, "edges": F.n_edges},
        "group_order": action.group.order,
        "free_action": cert.as_dict(),
    }
    return CaseResult(index, "free-action", seed, cert.passed,
                      time.perf_counter() - t0, summary)


def run_groupoid_case(seed: int, index: int = 0, tol: float = 1e-8,
                      n_random: int = 100) -> CaseResult:
    """One groupoid-suite case: skew/semidirect duality, the full theorem by
    signature comparison, both equivalence bimodules, inner products, and the
    expectation identities."""
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    Q = random_groupoid(rng)
    G = cyclic_group(2) if rng.integers(2) == 0 else cyclic_group(3)
    c = random_cocycle(rng, Q, G)

    cert_iso = groupoids.certify_gpd_iso(Q, G, c, tol=tol)
    skew = groupoids.skew_product_groupoid(Q, G, c)
    trans = groupoids.translation_groupoid_action(skew, G)
    cert_semi = groupoids.certify_semi_cross(skew, G, trans, tol=tol, rng=rng)
    cert_full = groupoids.certify_full_groupoid(Q, G, c, tol=tol, rng=rng)
    _, eq_semi = groupoids.certify_equivalence("semidirect", Q, G, c, rng=rng)
    _, eq_sub = groupoids.certify_equivalence("subgroupoid", Q, G, c, rng=rng)
    expectations = groupoids.expectations_and_norm_identities(
        skew, G, trans, tol=1e-9, n_random=n_random, rng=rng
    )

    evaluator = groupoids.InnerProductEvaluator(Q, c)
    evaluator_err = 0.0
    for k in range(n_random):
        a = rng.standard_normal(Q.n_arrows) + 1j * rng.standard_normal(Q.n_arrows)
        b = rng.standard_normal(Q.n_arrows) + 1j * rng.standard_normal(Q.n_arrows)
        _, rep = evaluator(a, b, tol=1e-9, all_y=(k < 3))
        evaluator_err = max(evaluator_err, rep["formula_agreement_error"])
    module_rep = groupoids.verify_bimodule_module_structure(
        Q, c, tol=1e-9, n_random=min(n_random, 40), rng=rng
    )

    passed = all(
        [
            cert_iso.passed,
            cert_iso.equivariance_error == 0.0,
            cert_semi.passed,
            cert_full.passed,
            all(v for k, v in eq_semi.items() if k.endswith("_ok")),
            all(v for k, v in eq_sub.items() if k.endswith("_ok")),
            all(v for k, v in expectations.items() if k.endswith("_ok")),
            evaluator_err <= 1e-9,
            all(v for k, v in module_rep.items() if k.endswith("_ok")),
        ]
    )
    summary = {
        "groupoid": {"units": Q.n_units, "arrows": Q.n_arrows},
        "group_order": G.order,
        "gpd_iso": cert_iso.as_dict(),
        "semi_cross": cert_semi.as_dict(),
        "full_gpd": cert_full.as_dict(),
        "equivalence_semidirect": {k: v for k, v in eq_semi.items() if k != "kind"},
        "equivalence_subgroupoid": {k: v for k, v in eq_sub.items() if k != "kind"},
        "expectations": expectations,
        "inner_product_max_error": evaluator_err,
        "module_structure": module_rep,
    }
    return CaseResult(index, "groupoid", seed, passed, time.perf_counter() - t0, summary)


@dataclass
class SuiteReport:
    seed: int
    tolerance: float
    cases: list[CaseResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "n_cases": len(self.cases),
            "cases": [c.as_dict() for c in self.cases],
        }


def suite_run(
    seed: int = 0,
    cases: int = 20,
    tol: float = 1e-8,
    max_dim: int = 256,
    kinds: tuple[str, ...] = ("graph", "free-action", "groupoid"),
    jobs: int | None = None,
) -> SuiteReport:
    """Run a mixed certification suite; cases are dispatched concurrently and
    reassembled in case order (per-case child seeds keep it deterministic)."""
    runners = {
        "graph": run_graph_case,
        "free-action": run_free_action_case,
        "groupoid": run_groupoid_case,
    }
    tasks = []
    for i in range(cases):
        kind = kinds[i % len(kinds)]
        child = seed * 1_000_003 + i
        tasks.append((i, kind, child))

    def run(task):
        i, kind, child = task
        if kind in ("graph", "free-action"):
            return runners[kind](child, index=i, tol=tol, max_dim=max_dim)
        return runners[kind](child, index=i, tol=tol)

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(run, tasks))
    results.sort(key=lambda c: c.index)
    return SuiteReport(seed=seed, tolerance=tol, cases=results)

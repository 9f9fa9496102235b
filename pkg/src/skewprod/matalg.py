"""Finite-dimensional complex matrix *-algebra engine.

Algebras are stored as orthogonal bases under the trace inner product
<a, b> = Tr(a* b), with matrices kept sparse (CSR) so that the certifiers
scale to a few hundred ambient dimensions.  Vectorization is row-major, so
vec(A X B) = (A kron B^T) vec(X).

Two routes certify *-maps:

* :func:`check_star_map` is the general small-scale oracle.  It closes the
  graph of the generator assignment (as block-diagonal matrices) and reads
  well-definedness and injectivity off dimension counts.
* :func:`star_map_on_basis` is the structured route used by the theorem
  certifiers: the domain comes with a known orthogonal basis, the candidate
  map is given by its matrix on that basis, and multiplicativity is checked
  against every generator by exact linear algebra.  The two routes agree on
  small instances (see the tests).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

MAX_AMBIENT_DIM = 256
PRODUCT_TOL = 1e-9  # equality of single products
CLOSURE_TOL = 1e-7  # quantities accumulated over span closure


class DimensionMismatch(ValueError):
    pass


class ClosureDiverged(RuntimeError):
    pass


class NotSemisimple(RuntimeError):
    pass


class NotInSpan(ValueError):
    pass


class NotWellDefined(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def as_sparse(mat) -> sp.csr_matrix:
    if sp.issparse(mat):
        return mat.tocsr().astype(np.complex128)
    return sp.csr_matrix(np.asarray(mat, dtype=np.complex128))


def as_dense(mat) -> np.ndarray:
    if sp.issparse(mat):
        return mat.toarray()
    return np.asarray(mat, dtype=np.complex128)


def dagger(mat):
    if sp.issparse(mat):
        return mat.conj().T.tocsr()
    return mat.conj().T


def kron(a, b) -> sp.csr_matrix:
    return sp.kron(as_sparse(a), as_sparse(b), format="csr")


def direct_sum(a, b) -> sp.csr_matrix:
    return sp.block_diag([as_sparse(a), as_sparse(b)], format="csr")


def matrix_unit(n: int, i: int, j: int) -> sp.csr_matrix:
    return sp.csr_matrix(([1.0 + 0j], ([i], [j])), shape=(n, n))


def vec_rows(mats: Sequence) -> sp.csr_matrix:
    """Stack vec(m) for each matrix as the rows of one sparse matrix."""
    n = mats[0].shape[0]
    return sp.vstack([as_sparse(m).reshape(1, n * n) for m in mats], format="csr")


def star_columns(rows: sp.csr_matrix, n: int) -> sp.csr_matrix:
    """Apply vec(X) -> vec(X*) to every row: transpose indices and conjugate."""
    coo = rows.tocoo()
    new_col = (coo.col % n) * n + (coo.col // n)
    return sp.csr_matrix(
        (coo.data.conj(), (coo.row, new_col)), shape=rows.shape
    )


def left_mult_operator(g, n: int) -> sp.csr_matrix:
    """R -> R . M with row R = vec(X) giving vec(g X)."""
    return kron(as_sparse(g).T, sp.identity(n, format="csr", dtype=np.complex128))


def right_mult_operator(g, n: int) -> sp.csr_matrix:
    """R -> R . M with row R = vec(X) giving vec(X g)."""
    return kron(sp.identity(n, format="csr", dtype=np.complex128), as_sparse(g))


def frobenius(mat) -> float:
    if sp.issparse(mat):
        return float(np.sqrt((abs(mat.data) ** 2).sum())) if mat.nnz else 0.0
    return float(np.linalg.norm(mat))


def operator_norm(mat) -> float:
    d = as_dense(mat)
    if d.size == 0:
        return 0.0
    return float(np.linalg.norm(d, 2))


def max_row_norm(rows) -> float:
    """Largest Frobenius norm over the rows of a stacked vec matrix."""
    if sp.issparse(rows):
        sq = rows.multiply(rows.conj()).sum(axis=1)
        return float(np.sqrt(np.max(np.real(sq)))) if rows.shape[0] else 0.0
    return float(np.max(np.linalg.norm(rows, axis=1))) if len(rows) else 0.0


class AlgebraSpan:
    """A *-closed matrix algebra stored as an orthogonal basis.

    ``rows`` holds vec(b_i) as sparse rows; ``norms2`` the squared Frobenius
    norms.  The constructor verifies pairwise orthogonality, which is cheap
    because the structured builders produce bases with (near-)disjoint
    supports.
    """

    def __init__(
        self,
        ambient_dim: int,
        rows: sp.csr_matrix,
        generators: Sequence | None = None,
        name: str = "algebra",
        check: bool = True,
        tol: float = PRODUCT_TOL,
    ):
        self.ambient_dim = int(ambient_dim)
        self.rows = rows.tocsr()
        self._rows_h = self.rows.conj().T.tocsc()
        self.name = name
        self.generators = [as_sparse(g) for g in generators] if generators else None
        sq = np.asarray(self.rows.multiply(self.rows.conj()).sum(axis=1)).ravel()
        self.norms2 = np.real(sq)
        if np.any(self.norms2 <= tol):
            raise ValueError("zero basis row")
        if check:
            gram = (self.rows @ self.rows.conj().T).toarray()
            off = gram - np.diag(np.diag(gram))
            scale = np.sqrt(np.outer(self.norms2, self.norms2))
            if off.size and np.max(np.abs(off) / scale) > max(tol, 1e-12):
                raise ValueError(f"basis of {name} is not orthogonal")

    @property
    def dim(self) -> int:
        return self.rows.shape[0]

    def basis_matrix(self, i: int) -> sp.csr_matrix:
        n = self.ambient_dim
        return self.rows.getrow(i).reshape(n, n).tocsr()

    def basis_matrices(self) -> list[sp.csr_matrix]:
        if not hasattr(self, "_basis_mats"):
            self._basis_mats = [self.basis_matrix(i) for i in range(self.dim)]
        return self._basis_mats

    def coefficients_rows(self, rows) -> tuple[sp.csr_matrix, float]:
        """Expand stacked vec rows in this basis; return (coeffs, residual).

        The residual is the largest row-wise Frobenius error of the
        reconstruction, relative to the row norm.
        """
        rows = rows.tocsr() if sp.issparse(rows) else sp.csr_matrix(rows)
        raw = rows @ self._rows_h
        coeffs = raw.multiply(1.0 / self.norms2[None, :]).tocsr()
        recon = coeffs @ self.rows
        diff = rows - recon
        worst = 0.0
        norms = np.sqrt(
            np.maximum(np.asarray(rows.multiply(rows.conj()).sum(axis=1)).ravel().real, 1e-300)
        )
        errs = np.sqrt(np.asarray(diff.multiply(diff.conj()).sum(axis=1)).ravel().real)
        if len(errs):
            worst = float(np.max(errs / np.maximum(norms, 1.0)))
        return coeffs, worst

    def coefficients(self, mat, tol: float | None = None) -> np.ndarray:
        n = self.ambient_dim
        v = as_sparse(mat).reshape(1, n * n)
        coeffs, resid = self.coefficients_rows(v)
        if tol is not None and resid > tol:
            raise NotInSpan(f"element is not in {self.name} (residual {resid:.2e})")
        return coeffs.toarray().ravel()

    def contains(self, mat, tol: float = PRODUCT_TOL) -> bool:
        try:
            self.coefficients(mat, tol=tol)
            return True
        except NotInSpan:
            return False

    def element(self, coeffs) -> sp.csr_matrix:
        n = self.ambient_dim
        row = sp.csr_matrix(np.asarray(coeffs, dtype=np.complex128).reshape(1, -1))
        return (row @ self.rows).reshape(n, n).tocsr()

    def random_element(self, rng: np.random.Generator) -> sp.csr_matrix:
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return self.element(c)

    def unit(self, tol: float = CLOSURE_TOL) -> sp.csr_matrix:
        """The unit of the algebra (its support projection), found by solving
        u b_i = b_i for all i within the span."""
        n = self.ambient_dim
        # vec(u b_i) depends linearly on the coefficients of u: stack the
        # right-multiplication images of the whole basis and least-square.
        blocks = []
        for i in range(self.dim):
            b = self.basis_matrix(i)
            blocks.append((self.rows @ right_mult_operator(b, n)).toarray())
        A = np.concatenate(blocks, axis=1).T  # (dim*n^2, dim)
        rhs = np.concatenate([self.rows.getrow(i).toarray().ravel() for i in range(self.dim)])
        coeffs, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        u = self.element(coeffs)
        err = max(
            frobenius(u @ self.basis_matrix(i) - self.basis_matrix(i))
            for i in range(self.dim)
        )
        if err > tol * max(1.0, float(np.sqrt(self.norms2.max()))):
            raise NotInSpan(f"{self.name} has no unit inside the span")
        return u

    def __repr__(self) -> str:
        return f"AlgebraSpan({self.name!r}, dim={self.dim}, ambient={self.ambient_dim})"


def from_orthogonal(mats: Sequence, name: str = "algebra", generators=None) -> AlgebraSpan:
    """Wrap an orthogonal family of matrices as an AlgebraSpan (verified)."""
    if not mats:
        raise ValueError("empty basis")
    n = mats[0].shape[0]
    return AlgebraSpan(n, vec_rows(mats), generators=generators, name=name)


def span_closure(
    generators: Sequence,
    tol: float = CLOSURE_TOL,
    max_rounds: int = 64,
    name: str = "algebra",
) -> AlgebraSpan:
    """Orthonormal basis of the smallest *-subalgebra containing the generators.

    Breadth-first products of the current basis with the generators (and their
    adjoints), orthogonalized by modified Gram-Schmidt; stops at a fixed
    point.  The unit is not adjoined.  Idempotent: re-running on the output
    basis adds nothing.
    """
    if not generators:
        raise DimensionMismatch("need at least one generator")
    dense = [as_dense(g) for g in generators]
    n = dense[0].shape[0]
    for g in dense:
        if g.shape != (n, n):
            raise DimensionMismatch(f"generator shapes differ: {g.shape} vs {(n, n)}")
    if n > MAX_AMBIENT_DIM:
        raise DimensionMismatch(f"ambient dimension {n} exceeds cap {MAX_AMBIENT_DIM}")
    mults = dense + [g.conj().T for g in dense]

    basis: list[np.ndarray] = []  # orthonormal vecs

    def try_add(vecs: np.ndarray) -> list[int]:
        added = []
        for v in vecs:
            nv = np.linalg.norm(v)
            if nv <= tol:
                continue
            w = v.copy()
            for _ in range(2):  # re-orthogonalize for stability
                for b in basis:
                    w -= (b.conj() @ w) * b
            rn = np.linalg.norm(w)
            if rn > tol * max(1.0, nv):
                basis.append(w / rn)
                added.append(len(basis) - 1)
        return added

    frontier = try_add(np.array([g.reshape(-1) for g in mults]))
    rounds = 0
    while frontier:
        rounds += 1
        if rounds > max_rounds:
            raise ClosureDiverged(f"span closure did not stabilize in {max_rounds} rounds")
        if len(basis) > n * n:
            raise ClosureDiverged("basis exceeded ambient dimension; numerical drift")
        candidates = []
        for idx in frontier:
            b = basis[idx].reshape(n, n)
            for g in mults:
                candidates.append((g @ b).reshape(-1))
        frontier = try_add(np.array(candidates))
    rows = sp.csr_matrix(np.array([b for b in basis]))
    rows.eliminate_zeros()
    return AlgebraSpan(n, rows, generators=generators, name=name, check=False)


def tensor_span(a: AlgebraSpan, b: AlgebraSpan, name: str | None = None) -> AlgebraSpan:
    mats = []
    bmats = b.basis_matrices()
    for i in range(a.dim):
        ai = a.basis_matrix(i)
        for bj in bmats:
            mats.append(kron(ai, bj))
    gens = None
    if a.generators is not None and b.generators is not None:
        ia = sp.identity(a.ambient_dim, format="csr", dtype=np.complex128)
        ib = sp.identity(b.ambient_dim, format="csr", dtype=np.complex128)
        gens = [kron(g, ib) for g in a.generators] + [kron(ia, g) for g in b.generators]
    return from_orthogonal(mats, name=name or f"{a.name} (x) {b.name}", generators=gens)


def direct_sum_span(a: AlgebraSpan, b: AlgebraSpan, name: str | None = None) -> AlgebraSpan:
    na, nb = a.ambient_dim, b.ambient_dim
    zeros_a = sp.csr_matrix((na, na), dtype=np.complex128)
    zeros_b = sp.csr_matrix((nb, nb), dtype=np.complex128)
    mats = [direct_sum(a.basis_matrix(i), zeros_b) for i in range(a.dim)]
    mats += [direct_sum(zeros_a, b.basis_matrix(j)) for j in range(b.dim)]
    return from_orthogonal(mats, name=name or f"{a.name} (+) {b.name}")


def full_matrix_span(m: int, name: str | None = None) -> AlgebraSpan:
    mats = [matrix_unit(m, i, j) for i in range(m) for j in range(m)]
    return from_orthogonal(mats, name=name or f"M_{m}", generators=mats)


@dataclass
class StarMapReport:
    """Outcome of certifying a generator assignment as a *-homomorphism."""

    well_defined: bool
    multiplicative: bool
    star_preserving: bool
    injective: bool
    surjective: bool | None
    domain_dim: int
    image_dim: int
    max_error: float = 0.0
    witness: object = None
    notes: dict = field(default_factory=dict)

    @property
    def bijective(self) -> bool:
        return bool(self.injective and self.surjective)

    @property
    def passed(self) -> bool:
        return (
            self.well_defined
            and self.multiplicative
            and self.star_preserving
            and self.injective
            and self.surjective is not False
        )

    def raise_for_failure(self, context: str = "star map"):
        if not self.well_defined:
            raise NotWellDefined(
                f"{context}: a linear relation among domain generators is violated "
                f"in the image (max error {self.max_error:.2e})",
                witness=self.witness,
            )
        if not self.passed:
            raise ValueError(f"{context}: certification failed: {self}")


def check_star_map(
    domain_generators: Sequence,
    image_assignment: Sequence,
    tol: float = CLOSURE_TOL,
    target: AlgebraSpan | None = None,
    n_samples: int = 8,
    rng: np.random.Generator | None = None,
) -> StarMapReport:
    """Certify the map generator -> image as a *-homomorphism of spans.

    Works by closing the span of the block-diagonal pairs diag(g, T(g)): the
    result is the graph of the induced map on words, so the assignment is
    well-defined exactly when the pair span has the same dimension as the
    domain span, and injective exactly when it matches the image span.
    Multiplicativity and *-preservation of the induced linear map are spot
    checked on random elements.
    """
    if len(domain_generators) != len(image_assignment):
        raise DimensionMismatch("assignment must cover every generator")
    doms = [as_dense(g) for g in domain_generators]
    imgs = [as_dense(g) for g in image_assignment]
    n = doms[0].shape[0]
    m = imgs[0].shape[0]
    for g in doms:
        if g.shape != (n, n):
            raise DimensionMismatch("domain generators have mixed dimensions")
    for g in imgs:
        if g.shape != (m, m):
            raise DimensionMismatch("image matrices have mixed dimensions")

    pair_span = span_closure(
        [direct_sum(d, i) for d, i in zip(doms, imgs)], tol=tol, name="pair"
    )
    dom_span = span_closure(doms, tol=tol, name="domain")
    img_span = span_closure(imgs, tol=tol, name="image")

    well_defined = pair_span.dim == dom_span.dim
    injective = pair_span.dim == img_span.dim

    witness = None
    if not well_defined:
        # Find a combination of pair-basis elements with vanishing domain
        # part; its image part witnesses the violated relation.
        pairs = [pair_span.basis_matrix(i).toarray() for i in range(pair_span.dim)]
        dom_parts = np.array([p[:n, :n].reshape(-1) for p in pairs])
        u, s, _ = np.linalg.svd(dom_parts)
        rank = int(np.sum(s > tol * max(1.0, float(s[0]) if len(s) else 1.0)))
        if rank < pair_span.dim:
            c = u[:, rank].conj()
            witness = sum(c[i] * pairs[i][n:, n:] for i in range(pair_span.dim))

    # The induced map, via least squares against the pair basis.
    def apply(x: np.ndarray) -> np.ndarray:
        dom_parts = np.array(
            [
                pair_span.basis_matrix(i).toarray()[:n, :n].reshape(-1)
                for i in range(pair_span.dim)
            ]
        )
        coeff, *_ = np.linalg.lstsq(dom_parts.T, x.reshape(-1), rcond=None)
        out = np.zeros((m, m), dtype=np.complex128)
        for i in range(pair_span.dim):
            out += coeff[i] * pair_span.basis_matrix(i).toarray()[n:, n:]
        return out

    max_err = 0.0
    multiplicative = well_defined
    star_preserving = well_defined
    if well_defined:
        rng = rng or np.random.default_rng(0)
        for _ in range(n_samples):
            x = as_dense(dom_span.random_element(rng))
            y = as_dense(dom_span.random_element(rng))
            scale = max(1.0, np.linalg.norm(x) * np.linalg.norm(y))
            err = np.linalg.norm(apply(x @ y) - apply(x) @ apply(y)) / scale
            max_err = max(max_err, err)
            err = np.linalg.norm(apply(x.conj().T) - apply(x).conj().T) / max(
                1.0, np.linalg.norm(x)
            )
            max_err = max(max_err, err)
        multiplicative = star_preserving = max_err <= max(tol, 100 * CLOSURE_TOL)

    surjective = None
    if target is not None:
        member = all(target.contains(g, tol=tol) for g in imgs)
        surjective = member and img_span.dim == target.dim

    return StarMapReport(
        well_defined=well_defined,
        multiplicative=multiplicative,
        star_preserving=star_preserving,
        injective=injective,
        surjective=surjective,
        domain_dim=dom_span.dim,
        image_dim=img_span.dim,
        max_error=float(max_err),
        witness=witness,
    )


def star_map_on_basis(
    domain: AlgebraSpan,
    image_rows: sp.csr_matrix,
    image_ambient: int,
    gen_pairs: Sequence[tuple],
    tol: float = PRODUCT_TOL,
    target: AlgebraSpan | None = None,
    inverse_rows: sp.csr_matrix | None = None,
    check_right: bool = True,
) -> StarMapReport:
    """Certify a linear map given by its images on an orthogonal basis.

    ``image_rows[i]`` is vec(T(b_i)) for the i-th basis element of ``domain``.
    For every generator pair (g, T(g)) the identities T(g b_i) = T(g) T(b_i)
    (and symmetrically on the right) are checked for all i at once by sparse
    linear algebra; *-preservation is checked on the whole basis.  Since the
    basis spans the domain and multiplication is bilinear, these checks verify
    the homomorphism property on the entire algebra.

    If ``inverse_rows`` gives the candidate inverse on the target basis, the
    two coefficient matrices are composed to witness bijectivity; otherwise
    injectivity falls back to a Gram-rank computation on the images.
    """
    n = domain.ambient_dim
    m = image_ambient
    d = domain.dim
    image_rows = image_rows.tocsr()
    errs = {}

    # Domain is well-defined by construction (it is a basis); record scale.
    img_scale = max(1.0, max_row_norm(image_rows))

    # Star preservation: expand b_i* in the basis, push through T, compare.
    star_dom = star_columns(domain.rows, n)
    s_coeffs, resid = domain.coefficients_rows(star_dom)
    errs["star_domain_closure"] = resid
    lhs = star_columns(image_rows, m)
    rhs = s_coeffs @ image_rows
    errs["star"] = max_row_norm(lhs - rhs) / img_scale

    # Generator consistency (batched) and multiplicativity (per generator).
    errs["gen_consistency"] = 0.0
    errs["mult"] = 0.0
    errs["closure"] = 0.0
    eye_n = sp.identity(n, format="csr", dtype=np.complex128)
    eye_m = sp.identity(m, format="csr", dtype=np.complex128)
    gens = [as_sparse(g) for g, _ in gen_pairs]
    timgs = [as_sparse(tg) for _, tg in gen_pairs]
    if gen_pairs:
        gen_rows = sp.vstack([g.reshape(1, n * n) for g in gens], format="csr")
        timg_rows = sp.vstack([tg.reshape(1, m * m) for tg in timgs], format="csr")
        coeffs, resid = domain.coefficients_rows(gen_rows)
        errs["closure"] = max(errs["closure"], resid)
        errs["gen_consistency"] = max_row_norm(coeffs @ image_rows - timg_rows) / img_scale
    for g, tg in zip(gens, timgs):
        # Left multiplication: rows of vec(g b_i).
        left = domain.rows @ sp.kron(g.T, eye_n, format="csr")
        c_left, resid = domain.coefficients_rows(left)
        errs["closure"] = max(errs["closure"], resid)
        lhs = image_rows @ sp.kron(tg.T, eye_m, format="csr")
        rhs = c_left @ image_rows
        errs["mult"] = max(errs["mult"], max_row_norm(lhs - rhs) / img_scale)
        if check_right:
            right = domain.rows @ sp.kron(eye_n, g, format="csr")
            c_right, resid = domain.coefficients_rows(right)
            errs["closure"] = max(errs["closure"], resid)
            lhs = image_rows @ sp.kron(eye_m, tg, format="csr")
            rhs = c_right @ image_rows
            errs["mult"] = max(errs["mult"], max_row_norm(lhs - rhs) / img_scale)

    # Membership in the target and bijectivity.
    surjective = None
    injective = False
    c_t = None
    if target is not None:
        c_t, resid = target.coefficients_rows(image_rows)
        errs["target_membership"] = resid
    if inverse_rows is not None and target is not None:
        c_s, resid = domain.coefficients_rows(inverse_rows)
        errs["inverse_membership"] = resid
        comp = (c_t @ c_s).toarray()
        errs["compose_id_domain"] = float(
            np.max(np.abs(comp - np.eye(d))) if comp.size else 0.0
        )
        comp2 = (c_s @ c_t).toarray()
        errs["compose_id_target"] = float(
            np.max(np.abs(comp2 - np.eye(target.dim))) if comp2.size else 0.0
        )
        injective = errs["compose_id_domain"] <= tol
        surjective = errs["compose_id_target"] <= tol and errs["target_membership"] <= tol
    else:
        gram = (image_rows @ image_rows.conj().T).toarray()
        rank = int(np.sum(np.linalg.eigvalsh(gram) > tol * max(1.0, img_scale**2)))
        injective = rank == d
        if target is not None:
            surjective = injective and rank == target.dim and errs["target_membership"] <= tol

    max_err = max(errs.values())
    return StarMapReport(
        well_defined=errs["closure"] <= tol and errs["gen_consistency"] <= tol,
        multiplicative=errs["mult"] <= tol,
        star_preserving=errs["star"] <= tol,
        injective=bool(injective),
        surjective=surjective,
        domain_dim=d,
        image_dim=target.dim if target is not None else image_rows.shape[0],
        max_error=float(max_err),
        notes=errs,
    )


def wedderburn_signature(
    span: AlgebraSpan,
    tol: float = CLOSURE_TOL,
    rng: np.random.Generator | None = None,
    max_retries: int = 6,
) -> tuple[int, ...]:
    """Sorted multiset of matrix-block sizes {n_1, ..., n_k}, Sum n_i^2 = dim.

    The center is found as the null space of the commutator Gram matrix
    against the generators (or the basis); a random self-adjoint central
    element is diagonalized and its eigenvalue clusters give the minimal
    central projections.  Two *-closed spans are *-isomorphic iff their
    signatures match.  Raises :class:`NotSemisimple` if the decomposition
    does not reconcile, which for a genuine *-closed matrix algebra signals
    numerical or input error.
    """
    rng = rng or np.random.default_rng(0)
    d = span.dim
    if d == 0:
        return ()
    n = span.ambient_dim
    tests = span.generators if span.generators else span.basis_matrices()

    eye = sp.identity(n, format="csr", dtype=np.complex128)
    K = np.zeros((d, d), dtype=np.complex128)
    for t in tests:
        t = as_sparse(t)
        op = sp.kron(eye, t, format="csr") - sp.kron(t.T, eye, format="csr")
        r_t = span.rows @ op
        K += (r_t @ r_t.conj().T).toarray()
    w, v = np.linalg.eigh(K)
    scale = max(float(np.max(w)), 1.0)
    null_mask = w <= tol * scale
    z_dim = int(np.sum(null_mask))
    if z_dim == 0:
        raise NotSemisimple("no central elements found (not even a unit)")
    center_coeffs = v[:, null_mask]

    # Compress onto the support of the algebra so eigenvalue clusters are
    # not polluted by the ambient kernel.
    bmats = span.basis_matrices()
    N = np.zeros((n, n), dtype=np.complex128)
    for b in bmats:
        N += (b.conj().T @ b).toarray() + (b @ b.conj().T).toarray()
    wn, vn = np.linalg.eigh(N)
    support = vn[:, wn > tol * max(float(np.max(wn)), 1.0)]
    r = support.shape[1]
    compressed = [support.conj().T @ (b @ support) for b in bmats]

    centers = []
    for k in range(z_dim):
        z = sum(center_coeffs[i, k] * compressed[i] for i in range(d))
        centers.append((z + z.conj().T) / 2)
        centers.append((z - z.conj().T) / 2j)

    for attempt in range(max_retries):
        zmat = sum(rng.standard_normal() * c for c in centers)
        if np.linalg.norm(zmat) < tol:
            continue
        vals, vecs = np.linalg.eigh(zmat)
        spread = float(vals[-1] - vals[0]) if r > 1 else 0.0
        gap = max(1e-8, 1e-6 * max(spread, 1.0))
        clusters = []
        start = 0
        for i in range(1, r):
            if vals[i] - vals[i - 1] > gap:
                clusters.append((start, i))
                start = i
        clusters.append((start, r))
        if len(clusters) != z_dim:
            continue
        sizes = []
        ok = True
        for lo, hi in clusters:
            vk = vecs[:, lo:hi]
            stacked = np.array([(vk.conj().T @ c @ vk).reshape(-1) for c in compressed])
            gram = stacked @ stacked.conj().T
            ev = np.linalg.eigvalsh(gram)
            top = float(ev[-1]) if len(ev) else 1.0
            rank = int(np.sum(ev > tol * max(1.0, top)))
            nk = int(round(np.sqrt(rank)))
            if nk * nk != rank:
                ok = False
                break
            sizes.append(nk)
        if ok and sum(s * s for s in sizes) == d:
            return tuple(sorted(sizes))
    raise NotSemisimple(
        "center decomposition failed beyond tolerance; the span is either not "
        "*-closed or numerically degenerate"
    )

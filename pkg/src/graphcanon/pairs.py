"""Canonical form of a matrix pair ``(M, N)`` under simultaneous similarity.

``M`` must have distinct eigenvalues.  Diagonalizing ``M`` leaves only
diagonal similarities ``diag(s_1, ..., s_n)`` as freedom; they multiply
``b_pq`` by ``s_q / s_p``.  Entries are visited in row-major order and each
one that the remaining freedom can still change is set to exactly 1, adding
the directed edge ``p -> q``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NonzeroCrossBlock, RepeatedEigenvalue, ShapeMismatch
from .forests import DiForest, LabeledUnionFind
from .numerics import (
    PAIR_TOLERANCES,
    ToleranceConfig,
    approx_zero,
    as_complex_matrix,
    cluster_values,
    lex_compare,
    matrix_scale,
    max_norm,
)
from .triangularize import schur_ordered

CONDITION_WARNING = 1e8


class IllConditionedWarning(UserWarning):
    pass


@dataclass
class DiagPair:
    lam: list
    b: np.ndarray
    s: np.ndarray


@dataclass
class CanonicalPairResult:
    lam: list
    b_can: np.ndarray
    g: DiForest
    s_total: np.ndarray
    ones: list
    scale: float = 1.0

    @property
    def n(self) -> int:
        return len(self.lam)


def _triangular_eigenvectors(t: np.ndarray) -> np.ndarray:
    n = t.shape[0]
    x = np.zeros((n, n), dtype=np.complex128)
    for k in range(n):
        lam = t[k, k]
        x[k, k] = 1.0
        for j in range(k - 1, -1, -1):
            x[j, k] = -(t[j, j + 1 : k + 1] @ x[j + 1 : k + 1, k]) / (t[j, j] - lam)
    return x


def diagonalize_distinct(m, tol: ToleranceConfig = PAIR_TOLERANCES):
    """Eigen-decomposition ``s^-1 m s = diag(lam)`` with ``lam`` strictly lex-increasing.

    Columns of ``s`` have unit length and their first non-negligible entry is
    real positive.  Emits :class:`IllConditionedWarning` when ``cond(s)``
    exceeds 1e8.

    Raises
    ------
    RepeatedEigenvalue
        If two eigenvalues lie within ``tol.tol_eig`` (relative) of each other.
    """
    m = as_complex_matrix(m, square=True)
    schur = schur_ordered(m, tol)
    t = schur.a
    n = t.shape[0]
    radius = tol.tol_eig * schur.scale
    clusters = cluster_values(np.diag(t), schur.scale, tol.tol_eig, tol.tol_zero)
    for cl in clusters:
        if len(cl.members) > 1:
            i, j = cl.members[:2]
            raise RepeatedEigenvalue(f"eigenvalues {t[i, i]} and {t[j, j]} coincide within {radius:.3e}")
    # the Schur diagonal is already in cluster order
    lam = [cl.representative for cl in clusters]
    s = schur.u @ _triangular_eigenvectors(t)
    for k in range(n):
        col = s[:, k] / np.linalg.norm(s[:, k])
        big = np.flatnonzero(np.abs(col) > tol.tol_zero * np.max(np.abs(col)))
        lead = col[big[0]]
        s[:, k] = col * (abs(lead) / lead)
    cond = np.linalg.cond(s)
    if not cond < CONDITION_WARNING:
        warnings.warn(f"eigenvector matrix has condition number {cond:.3e}", IllConditionedWarning, stacklevel=2)
    return s, lam


def to_diag_pair(m, n_mat, tol: ToleranceConfig = PAIR_TOLERANCES) -> DiagPair:
    m = as_complex_matrix(m, square=True)
    n_mat = as_complex_matrix(n_mat, square=True)
    if m.shape != n_mat.shape:
        raise ShapeMismatch(f"pair matrices have shapes {m.shape} and {n_mat.shape}")
    s, lam = diagonalize_distinct(m, tol)
    b = np.linalg.solve(s, n_mat @ s)
    return DiagPair(lam=lam, b=b, s=s)


def canonicalize_diag_pair(dp: DiagPair, tol: ToleranceConfig = PAIR_TOLERANCES, check_prefix: bool = True) -> CanonicalPairResult:
    """Row-major reduction of ``dp.b`` by diagonal similarities.

    With ``check_prefix`` every step asserts that the entries already visited
    are left bit-for-bit unchanged.
    """
    b = dp.b.copy()
    n = b.shape[0]
    scale = matrix_scale(b)
    g = DiForest(n)
    uf = LabeledUnionFind(n, mode="scale")
    svals = np.ones(n, dtype=np.complex128)
    ones = []
    flat = b.reshape(-1)
    for k in range(n * n):
        p, q = divmod(k, n)
        if p == q:
            continue
        if approx_zero(b[p, q], scale, tol.tol_zero):
            b[p, q] = 0
            continue
        if uf.connected(p + 1, q + 1):
            continue
        before = flat[:k].copy() if check_prefix else None
        w = 1 / b[p, q]
        comp = np.array(uf.members(q + 1)) - 1
        in_comp = np.zeros(n, dtype=bool)
        in_comp[comp] = True
        svals[in_comp] *= w
        # b_kl picks up s_l / s_k: w for columns in comp, 1/w for rows in comp
        b[np.ix_(~in_comp, in_comp)] *= w
        b[np.ix_(in_comp, ~in_comp)] /= w
        b[p, q] = 1.0
        uf.union(p + 1, q + 1, svals[q] / svals[p])
        g.add_edge(p + 1, q + 1)
        ones.append((p + 1, q + 1))
        if check_prefix and not np.array_equal(before, flat[:k]):
            raise AssertionError(f"step {k + 1} changed an entry that was already reduced")
    s_total = dp.s * svals[None, :]
    return CanonicalPairResult(lam=list(dp.lam), b_can=b, g=g, s_total=s_total, ones=ones, scale=scale)


def canonicalize_pair(m, n_mat, tol: ToleranceConfig = PAIR_TOLERANCES) -> CanonicalPairResult:
    """Canonical form of ``(m, n_mat)`` under ``(M, N) -> (S^-1 M S, S^-1 N S)``.

    Raises
    ------
    RepeatedEigenvalue
        If ``m`` does not have distinct eigenvalues.
    NoConvergence
        Propagated from the Schur stage.
    """
    return canonicalize_diag_pair(to_diag_pair(m, n_mat, tol), tol)


def _path_forces_zero(g: DiForest, p: int, q: int) -> bool:
    if not g.connected(p, q):
        return True
    return any(step.edge > (p, q) for step in g.tree_path(p, q))


def is_g_canonical_pair(lam, b, g: DiForest, tol: ToleranceConfig = PAIR_TOLERANCES, scale=None) -> bool:
    """Check the ones/zeros that the directed forest ``g`` prescribes for ``b``."""
    b = as_complex_matrix(b, square=True)
    n = b.shape[0]
    if len(lam) != n or g.vertex_count != n:
        return False
    for x, y in zip(lam, lam[1:]):
        if lex_compare(x, y) >= 0:
            return False
    scale = matrix_scale(b) if scale is None else scale
    edges = g.edge_set()
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            v = b[p - 1, q - 1]
            if (p, q) in edges:
                if abs(v - 1) > tol.tol_zero:
                    return False
            elif p != q and _path_forces_zero(g, p, q) and not approx_zero(v, scale, tol.tol_zero):
                return False
    return True


def decompose_pair(cpr: CanonicalPairResult, tol: ToleranceConfig = PAIR_TOLERANCES):
    """Split a canonical pair into indecomposable pairs, one per tree of ``g``.

    Returns ``(summands, perm)``; each summand is ``(lam_i, b_i, tree_i,
    vertices_i)`` and ``perm`` is the 0-based index order (here entries and
    vertices coincide) that block-diagonalizes both matrices.
    """
    comps = cpr.g.components()
    owner = np.empty(cpr.n, dtype=int)
    for c, comp in enumerate(comps):
        owner[np.array(comp) - 1] = c
    cross = owner[:, None] != owner[None, :]
    bad = cross & (np.abs(cpr.b_can) > tol.tol_zero * cpr.scale)
    if np.any(bad):
        p, q = np.argwhere(bad)[0] + 1
        raise NonzeroCrossBlock(f"entry ({p}, {q}) joins different trees but is not zero")
    summands, perm = [], []
    for comp in comps:
        idx = [v - 1 for v in comp]
        perm.extend(idx)
        summands.append(
            ([cpr.lam[i] for i in idx], cpr.b_can[np.ix_(idx, idx)].copy(), cpr.g.induced(comp), list(comp))
        )
    return summands, np.array(perm, dtype=int)


def reassemble_pair(summands, perm):
    n = len(perm)
    lam_blocks = np.zeros(n, dtype=np.complex128)
    b_blocks = np.zeros((n, n), dtype=np.complex128)
    pos = 0
    for lam_i, b_i, _tree, _verts in summands:
        k = len(lam_i)
        lam_blocks[pos : pos + k] = lam_i
        b_blocks[pos : pos + k, pos : pos + k] = b_i
        pos += k
    lam = np.zeros(n, dtype=np.complex128)
    b = np.zeros((n, n), dtype=np.complex128)
    lam[perm] = lam_blocks
    b[np.ix_(perm, perm)] = b_blocks
    return lam, b


def canonical_pairs_equal(r1: CanonicalPairResult, r2: CanonicalPairResult, rtol: float = 1e-7):
    """Compare two canonical pairs: graph, ones and zeros exactly, then entries."""
    if r1.n != r2.n:
        return False, "different sizes"
    lam1, lam2 = np.array(r1.lam), np.array(r2.lam)
    if np.max(np.abs(lam1 - lam2)) > rtol * max(1.0, np.max(np.abs(lam1))):
        return False, "different eigenvalues"
    if r1.g.edges != r2.g.edges:
        return False, "different graphs"
    off = ~np.eye(r1.n, dtype=bool)
    if not np.array_equal((r1.b_can == 0) & off, (r2.b_can == 0) & off):
        return False, "different zero patterns"
    scale = max(matrix_scale(r1.b_can), matrix_scale(r2.b_can))
    diff = max_norm(r1.b_can - r2.b_can)
    if diff > rtol * scale:
        return False, f"entries differ by {diff:.3e}"
    return True, "equal"

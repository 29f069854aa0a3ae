"""Unitary reduction of a square matrix to block upper triangular form.

The pipeline is Householder reduction to Hessenberg form, single-shift
complex QR iteration to a Schur factor, and adjacent Givens swaps that put
the eigenvalues in lexicographic order with clustered eigenvalues adjacent.
:func:`block_partition_of` then snaps each cluster to one exact eigenvalue
and makes the first superdiagonal of every diagonal block real and
nonnegative, which is the starting point of the canonical reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ClusterAmbiguity, NoConvergence
from .numerics import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    approx_zero,
    as_complex_matrix,
    cluster_values,
    lex_compare,
    matrix_scale,
)

_EPS = np.finfo(float).eps
_SAFMIN = np.finfo(float).tiny


@dataclass
class SchurForm:
    """``u @ a @ u.conj().T`` reproduces the input; ``a`` is upper triangular."""

    u: np.ndarray
    a: np.ndarray
    diag_order: list
    scale: float


@dataclass(frozen=True)
class BlockPartition:
    sizes: tuple
    eigenvalues: tuple

    def __post_init__(self):
        if len(self.sizes) != len(self.eigenvalues):
            raise ValueError("sizes and eigenvalues differ in length")
        if any(int(m) < 1 for m in self.sizes):
            raise ValueError("block sizes must be positive")
        for a, b in zip(self.eigenvalues, self.eigenvalues[1:]):
            if lex_compare(a, b) >= 0:
                raise ValueError("block eigenvalues must be strictly increasing in lexicographic order")

    @property
    def t(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return int(sum(self.sizes))

    @property
    def offsets(self) -> list:
        out, acc = [], 0
        for m in self.sizes:
            out.append(acc)
            acc += m
        out.append(acc)
        return out

    def block(self, i: int) -> slice:
        """Entry slice of block ``i`` (1-based, as in the graph vertices)."""
        off = self.offsets
        return slice(off[i - 1], off[i])

    def block_of_index(self) -> np.ndarray:
        """0-based block number of each entry index."""
        return np.repeat(np.arange(self.t), self.sizes)


@dataclass
class ObserForm:
    a: np.ndarray
    partition: BlockPartition
    u: np.ndarray
    scale: float


def _givens(f: complex, g: complex):
    """(c, s) with ``[[c, s], [-conj(s), c]] @ [f, g] = [r, 0]`` and c real."""
    if g == 0:
        return 1.0, 0j
    if f == 0:
        return 0.0, 1 + 0j
    af = abs(f)
    r = np.hypot(af, abs(g))
    return af / r, (f / af) * np.conj(g) / r


def _rotate(h: np.ndarray, z: Optional[np.ndarray], k: int, c: float, s: complex) -> None:
    """Similarity ``h <- G h G^H`` on rows/columns k, k+1; accumulates ``z <- z G^H``."""
    rk = h[k].copy()
    rk1 = h[k + 1].copy()
    h[k] = c * rk + s * rk1
    h[k + 1] = -np.conj(s) * rk + c * rk1
    sc = np.conj(s)
    for m in (h, z):
        if m is None:
            continue
        ck = m[:, k].copy()
        ck1 = m[:, k + 1].copy()
        m[:, k] = c * ck + sc * ck1
        m[:, k + 1] = -s * ck + c * ck1


def hessenberg(m) -> tuple:
    """Householder reduction: returns ``(h, q)`` with ``q @ h @ q^H = m``."""
    h = as_complex_matrix(m, square=True)
    n = h.shape[0]
    q = np.eye(n, dtype=np.complex128)
    for k in range(n - 2):
        x = h[k + 1 :, k].copy()
        if not np.any(x[1:]):
            continue
        norm_x = np.linalg.norm(x)
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * norm_x
        v /= np.linalg.norm(v)
        h[k + 1 :, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1 :, :])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ v, v.conj())
        q[:, k + 1 :] -= 2.0 * np.outer(q[:, k + 1 :] @ v, v.conj())
        h[k + 2 :, k] = 0
    return h, q


def _wilkinson_shift(a, b, c, d) -> complex:
    # eigenvalue of [[a, b], [c, d]] nearest d; lexicographically smaller on ties
    half = (a - d) / 2
    disc = np.sqrt(half * half + b * c)
    mid = (a + d) / 2
    r1, r2 = complex(mid + disc), complex(mid - disc)
    d1, d2 = abs(r1 - d), abs(r2 - d)
    if d1 < d2:
        return r1
    if d2 < d1:
        return r2
    return r1 if lex_compare(r1, r2) <= 0 else r2


def _qr_iterate(h: np.ndarray, z: np.ndarray, max_iters: int) -> None:
    n = h.shape[0]
    hi = n - 1
    its = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            ref = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if sub <= _SAFMIN or sub <= _EPS * ref:
                h[lo, lo - 1] = 0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue
        if its >= max_iters:
            raise NoConvergence(f"QR iteration did not converge within {max_iters} iterations (row {hi + 1})")
        its += 1
        if its % 20 == 10:
            mu = h[lo, lo] + 0.75 * abs(h[lo + 1, lo].real)
        elif its % 20 == 0:
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1].real)
        else:
            mu = _wilkinson_shift(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        x, y = h[lo, lo] - mu, h[lo + 1, lo]
        for k in range(lo, hi):
            if k > lo:
                x, y = h[k, k - 1], h[k + 1, k - 1]
            c, s = _givens(x, y)
            _rotate(h, z, k, c, s)
            if k > lo:
                h[k + 1, k - 1] = 0


def _swap_adjacent(t: np.ndarray, u: np.ndarray, k: int) -> None:
    """Exchange diagonal entries k and k+1 of triangular ``t`` by a unitary rotation."""
    a, b, c = t[k, k], t[k, k + 1], t[k + 1, k + 1]
    # the eigenvector of the leading 2x2 for c is (b, c - a)
    cs, sn = _givens(b, c - a)
    _rotate(t, u, k, cs, sn)
    t[k, k], t[k + 1, k + 1] = c, a
    t[k + 1, k] = 0


def schur_ordered(m, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> SchurForm:
    """Complex Schur factorization with lexicographically ordered diagonal.

    Clustered eigenvalues (see :func:`~graphcanon.numerics.cluster_values`)
    are made contiguous and clusters appear in lexicographic order of their
    representatives.  Swaps inside a cluster are never performed.

    Raises
    ------
    NotSquare
        If ``m`` is not square.
    NoConvergence
        If some eigenvalue needs more than ``tol.qr_iters(n)`` QR sweeps.
    ClusterAmbiguity
        If the eigenvalue clustering is unstable.
    """
    m = as_complex_matrix(m, square=True)
    n = m.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    t, u = hessenberg(m)
    _qr_iterate(t, u, tol.qr_iters(n))
    t = np.triu(t)
    scale = matrix_scale(t)
    clusters = cluster_values(np.diag(t), scale, tol.tol_eig, tol.tol_zero)
    rank = np.empty(n, dtype=int)
    for r, cl in enumerate(clusters):
        rank[list(cl.members)] = r
    swapped = True
    while swapped:
        swapped = False
        for k in range(n - 1):
            if rank[k] > rank[k + 1]:
                _swap_adjacent(t, u, k)
                rank[k], rank[k + 1] = rank[k + 1], rank[k]
                swapped = True
    t = np.triu(t)
    return SchurForm(u=u, a=t, diag_order=[complex(x) for x in np.diag(t)], scale=scale)


def positivize_superdiagonal(a, tol: ToleranceConfig = DEFAULT_TOLERANCES, mask=None, scale=None):
    """Make the first superdiagonal real and nonnegative by a diagonal unitary.

    Returns ``(a_out, d)`` with ``a_out = d @ a @ inv(d)`` and
    ``d = diag(1, u1, u1*u2, ...)`` where ``u_k`` is the phase of entry
    ``(k, k+1)``.  Entries that pass the zero test become exact zeros and the
    others exact positive reals.  ``mask`` (length n-1, boolean) restricts
    the treatment to the selected superdiagonal positions.
    """
    a = as_complex_matrix(a, square=True)
    n = a.shape[0]
    scale = matrix_scale(a) if scale is None else scale
    phases = np.ones(n, dtype=np.complex128)
    targets = {}
    for k in range(n - 1):
        if mask is not None and not mask[k]:
            phases[k + 1] = phases[k]
            continue
        v = a[k, k + 1]
        if approx_zero(v, scale, tol.tol_zero):
            phases[k + 1] = phases[k]
            targets[k] = 0.0
        else:
            r = abs(v)
            phases[k + 1] = phases[k] * (v / r)
            targets[k] = r
    out = (phases[:, None] * a) / phases[None, :]
    for k, value in targets.items():
        out[k, k + 1] = value
    return out, np.diag(phases)


def nilpotent_flag_basis(nmat) -> np.ndarray:
    """Unitary ``w`` making ``w^H @ nmat @ w`` strictly upper triangular up to rounding.

    ``nmat`` is a perturbed nilpotent matrix with a single Jordan chain.  The
    basis follows the chain of approximate kernels: each new column is the
    smallest right singular vector of the induced map on the quotient by the
    previous columns.  Unlike the Schur vectors of a split cluster, whose
    error grows like ``eps ** (1 / m)``, this basis is accurate to O(eps).
    """
    work = np.array(nmat, dtype=np.complex128)
    m = work.shape[0]
    w = np.eye(m, dtype=np.complex128)
    for k in range(m - 1):
        _, _, vh = np.linalg.svd(work[k:, k:])
        v = vh.conj().T
        basis = np.concatenate([v[:, -1:], v[:, :-1]], axis=1)
        work[:, k:] = work[:, k:] @ basis
        work[k:, :] = basis.conj().T @ work[k:, :]
        w[:, k:] = w[:, k:] @ basis
    return w


def block_partition_of(s: SchurForm, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ObserForm:
    """Snap clustered eigenvalues and positivize the within-block superdiagonals.

    Each cluster of size > 1 first gets its in-block basis recomputed by
    :func:`nilpotent_flag_basis`, so snapping the diagonal only discards an
    O(eps) lower triangle.
    """
    a = s.a.copy()
    u = s.u.copy()
    clusters = cluster_values(np.diag(a), s.scale, tol.tol_eig, tol.tol_zero)
    sizes = []
    start = 0
    for cl in clusters:
        idx = list(cl.members)
        k = len(idx)
        if idx != list(range(start, start + k)):
            raise ClusterAmbiguity("eigenvalue clusters are not contiguous on the Schur diagonal")
        sl = slice(start, start + k)
        lam = cl.representative
        if k > 1:
            w = nilpotent_flag_basis(a[sl, sl] - lam * np.eye(k))
            a[:, sl] = a[:, sl] @ w
            a[sl, :] = w.conj().T @ a[sl, :]
            u[:, sl] = u[:, sl] @ w
            a[sl, sl] = np.triu(a[sl, sl], 1)
        a[sl, sl] += np.diag(lam - np.diag(a[sl, sl]))
        sizes.append(k)
        start += k
    partition = BlockPartition(tuple(sizes), tuple(cl.representative for cl in clusters))
    blocks = partition.block_of_index()
    mask = blocks[:-1] == blocks[1:]
    a_out, d = positivize_superdiagonal(a, tol, mask=mask, scale=s.scale)
    # a_out = d a d^-1 = (u d^H)^H M (u d^H)
    u = u @ d.conj()
    a_out = np.triu(a_out)
    # d_k * a_kk / d_k is not always a_kk in floating point
    np.fill_diagonal(a_out, np.repeat(np.array(partition.eigenvalues, dtype=np.complex128), partition.sizes))
    return ObserForm(a=a_out, partition=partition, u=u, scale=s.scale)


def is_nonderogatory(o: ObserForm, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    return all(block_is_nonderogatory(o, i, tol) for i in range(1, o.partition.t + 1))


def block_is_nonderogatory(o: ObserForm, i: int, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """Whether diagonal block ``i`` (1-based) is a single Jordan block."""
    sl = o.partition.block(i)
    sup = np.diag(o.a[sl, sl], 1)
    return all(not approx_zero(v, o.scale, tol.tol_zero) and v.real > 0 for v in sup)


def obser_form(m, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ObserForm:
    return block_partition_of(schur_ordered(m, tol), tol)


def sorted_eigenvalues(m, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> list:
    """Cluster representatives in lexicographic order, repeated by multiplicity."""
    s = schur_ordered(m, tol)
    return [cl.representative for cl in cluster_values(s.diag_order, s.scale, tol.tol_eig, tol.tol_zero) for _ in cl.members]

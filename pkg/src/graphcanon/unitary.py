"""Canonical form of a nonderogatory matrix under unitary similarity.

After reduction to block triangular form (see :mod:`graphcanon.triangularize`)
the only remaining freedom is a block-scalar unitary ``u_1 I + ... + u_t I``,
which multiplies block ``(i, j)`` by ``conj(u_i) * u_j``.  The blocks are
visited superdiagonal by superdiagonal; the first one that this freedom can
still change is normalized (its first nonzero entry in anti-diagonal order is
made positive) and the edge ``i - j`` is added to a forest recording the
constraint ``u_i = u_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AllZero, NonzeroCrossBlock, NotNonderogatory
from .forests import Forest, LabeledUnionFind
from .numerics import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    approx_zero,
    as_complex_matrix,
    lex_compare,
    matrix_scale,
    max_norm,
)
from .triangularize import BlockPartition, ObserForm, block_partition_of, is_nonderogatory, schur_ordered


@dataclass
class CanonicalResult:
    m_can: np.ndarray
    partition: BlockPartition
    g: Forest
    u_total: np.ndarray
    reduced_blocks: list
    marked: list = field(default_factory=list)
    scale: float = 1.0

    @property
    def t(self) -> int:
        return self.partition.t


@dataclass
class CanonicalBlockSummand:
    tree: Forest
    matrix: np.ndarray
    original_vertices: list
    partition: BlockPartition


def scan_order(t) -> list:
    """Block positions ``(i, j)``, ``i < j``, superdiagonal by superdiagonal (1-based)."""
    if isinstance(t, BlockPartition):
        t = t.t
    return [(i, i + d) for d in range(1, t) for i in range(1, t - d + 1)]


def antidiagonal_order(p: int, q: int) -> list:
    """0-based positions of a p x q block, diagonal by diagonal from the lower left."""
    order = []
    for d in range(-(p - 1), q):
        for i in range(p):
            j = i + d
            if 0 <= j < q:
                order.append((i, j))
    return order


def first_nonzero(c: np.ndarray, scale: float, tol_zero: float):
    for i, j in antidiagonal_order(*c.shape):
        if not approx_zero(c[i, j], scale, tol_zero):
            return i, j
    return None


def obss_reduce(c, tol: ToleranceConfig = DEFAULT_TOLERANCES, scale=None):
    """Normalize a block by a unit scalar.

    The first entry of ``c`` in anti-diagonal scan order that is not
    negligible (relative to ``scale``, default the block's own max-norm) is
    turned into its modulus.  Returns ``(c_out, phase, marked)`` where
    ``c_out = phase * c`` and ``marked`` is the 1-based ``(row, col)`` of the
    normalized entry, which is stored as an exact positive real.
    """
    c = as_complex_matrix(c)
    scale = matrix_scale(c) if scale is None else scale
    pos = first_nonzero(c, scale, tol.tol_zero)
    if pos is None:
        raise AllZero("block has no entry above the zero threshold")
    v = c[pos]
    r = abs(v)
    phase = complex(np.conj(v) / r)
    out = phase * c
    out[pos] = r
    return out, phase, (pos[0] + 1, pos[1] + 1)


def block_is_zero(block: np.ndarray, scale: float, tol_zero: float) -> bool:
    return bool(np.all(np.abs(block) <= tol_zero * scale))


def canonicalize_obser(o: ObserForm, tol: ToleranceConfig = DEFAULT_TOLERANCES, trace=None) -> CanonicalResult:
    """Run the block reduction on a matrix already in block triangular form.

    ``trace``, if given, is called after every reduction step with
    ``(a, phases)``: the working matrix and the current block phases, so that
    callers can check ``a == D^H @ o.a @ D`` step by step.
    """
    if not is_nonderogatory(o, tol):
        raise NotNonderogatory("a diagonal block has a vanishing superdiagonal entry")
    part = o.partition
    t = part.t
    a = o.a.copy()
    scale = o.scale
    sl = [None] + [part.block(i) for i in range(1, t + 1)]
    g = Forest(t)
    uf = LabeledUnionFind(t, mode="phase")
    phases = np.ones(t + 1, dtype=np.complex128)  # index 0 unused
    reduced, marked = [], []
    for i, j in scan_order(t):
        block = a[sl[i], sl[j]]
        if block_is_zero(block, scale, tol.tol_zero):
            a[sl[i], sl[j]] = 0
            continue
        if uf.connected(i, j):
            continue
        new_block, w, mark = obss_reduce(block, tol, scale=scale)
        comp = uf.members(j)
        in_comp = np.zeros(t + 1, dtype=bool)
        in_comp[comp] = True
        for k in comp:
            phases[k] *= w
        # blocks (k, l) pick up conj(u_k) u_l: w if only l moved, conj(w) if only k moved
        for k in range(1, t + 1):
            for l in range(k + 1, t + 1):
                if in_comp[k] == in_comp[l]:
                    continue
                a[sl[k], sl[l]] *= w if in_comp[l] else np.conj(w)
        a[sl[i], sl[j]] = new_block
        uf.union(i, j, phases[j] / phases[i])
        g.add_edge(i, j)
        reduced.append((i, j))
        bi, bj = mark
        marked.append((part.offsets[i - 1] + bi, part.offsets[j - 1] + bj))
        if trace is not None:
            trace(a.copy(), phases[1:].copy())
    d = np.repeat(phases[1:], part.sizes)
    u_total = o.u * d[None, :]
    return CanonicalResult(
        m_can=a, partition=part, g=g, u_total=u_total, reduced_blocks=reduced, marked=marked, scale=scale
    )


def canonicalize_unitary(m, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> CanonicalResult:
    """Canonical form of a nonderogatory matrix under unitary similarity.

    Returns a :class:`CanonicalResult` whose ``m_can`` is unitarily similar to
    ``m`` via ``u_total`` and is canonical for the forest ``g``.  Two
    nonderogatory matrices are unitarily similar exactly when their canonical
    results agree (see :func:`canonical_forms_equal`).

    Raises
    ------
    NotNonderogatory
        If some eigenvalue has more than one Jordan block.
    ClusterAmbiguity, NoConvergence
        Propagated from the Schur stage.
    """
    s = schur_ordered(m, tol)
    o = block_partition_of(s, tol)
    return canonicalize_obser(o, tol)


def _path_forces_zero(g: Forest, i: int, j: int) -> bool:
    if not g.connected(i, j):
        return True
    for step in g.tree_path(i, j):
        u, v = step.edge
        if v - u > j - i or (v - u == j - i and u > i):
            return True
    return False


def is_g_canonical(a, partition: BlockPartition, g: Forest, tol: ToleranceConfig = DEFAULT_TOLERANCES, scale=None) -> bool:
    """Check the zero/normalization pattern that ``g`` prescribes for ``a``."""
    a = as_complex_matrix(a, square=True)
    t = partition.t
    if a.shape[0] != partition.n or g.vertex_count != t:
        return False
    scale = matrix_scale(a) if scale is None else scale
    z = tol.tol_zero * scale
    if np.any(np.abs(np.tril(a, -1)) > z):
        return False
    for lam_a, lam_b in zip(partition.eigenvalues, partition.eigenvalues[1:]):
        if lex_compare(lam_a, lam_b) >= 0:
            return False
    for i in range(1, t + 1):
        sl = partition.block(i)
        blk = a[sl, sl]
        if np.any(np.abs(np.diag(blk) - partition.eigenvalues[i - 1]) > z):
            return False
        sup = np.diag(blk, 1)
        if np.any(np.abs(sup.imag) > z) or np.any(sup.real <= z):
            return False
    edges = g.edge_set()
    for i, j in scan_order(t):
        blk = a[partition.block(i), partition.block(j)]
        if (i, j) in edges:
            pos = first_nonzero(blk, scale, tol.tol_zero)
            if pos is None:
                return False
            v = blk[pos]
            if abs(v.imag) > z or v.real <= 0:
                return False
        elif _path_forces_zero(g, i, j) and not block_is_zero(blk, scale, tol.tol_zero):
            return False
    return True


def decompose(cr: CanonicalResult, tol: ToleranceConfig = DEFAULT_TOLERANCES):
    """Split a canonical matrix into indecomposable summands, one per tree of ``g``.

    Returns ``(summands, perm)`` where ``perm`` is a 0-based entry permutation
    with ``m_can[ix_(perm, perm)]`` equal to the direct sum of the summand
    matrices.
    """
    part = cr.partition
    m = cr.m_can
    comps = cr.g.components()
    owner = {}
    for c, comp in enumerate(comps):
        for v in comp:
            owner[v] = c
    for i, j in scan_order(part.t):
        if owner[i] != owner[j]:
            blk = m[part.block(i), part.block(j)]
            if not block_is_zero(blk, cr.scale, tol.tol_zero):
                raise NonzeroCrossBlock(f"block ({i}, {j}) joins different trees but is not zero")
    summands, perm = [], []
    for comp in comps:
        idx = [k for v in comp for k in range(part.block(v).start, part.block(v).stop)]
        perm.extend(idx)
        sub_part = BlockPartition(
            tuple(part.sizes[v - 1] for v in comp), tuple(part.eigenvalues[v - 1] for v in comp)
        )
        summands.append(
            CanonicalBlockSummand(
                tree=cr.g.induced(comp),
                matrix=m[np.ix_(idx, idx)].copy(),
                original_vertices=list(comp),
                partition=sub_part,
            )
        )
    return summands, np.array(perm, dtype=int)


def reassemble(summands, perm) -> np.ndarray:
    """Inverse of :func:`decompose`: direct sum, then undo the permutation."""
    n = len(perm)
    out = np.zeros((n, n), dtype=np.complex128)
    pos = 0
    blocks = np.zeros((n, n), dtype=np.complex128)
    for s in summands:
        k = s.matrix.shape[0]
        blocks[pos : pos + k, pos : pos + k] = s.matrix
        pos += k
    out[np.ix_(perm, perm)] = blocks
    return out


def zero_blocks(cr: CanonicalResult) -> list:
    """Off-diagonal block positions whose entries are all exactly zero."""
    part = cr.partition
    return [(i, j) for i, j in scan_order(part.t) if not np.any(cr.m_can[part.block(i), part.block(j)])]


def canonical_forms_equal(r1: CanonicalResult, r2: CanonicalResult, rtol: float = 1e-8):
    """Compare two canonical results: structure exactly, then entries.

    Returns ``(equal, reason)``.
    """
    if r1.partition.sizes != r2.partition.sizes:
        return False, "different block sizes"
    scale = max(matrix_scale(r1.m_can), matrix_scale(r2.m_can))
    lam1 = np.array(r1.partition.eigenvalues)
    lam2 = np.array(r2.partition.eigenvalues)
    if np.any(np.abs(lam1 - lam2) > rtol * scale):
        return False, "different eigenvalues"
    if r1.g.edges != r2.g.edges:
        return False, "different graphs"
    if r1.marked != r2.marked:
        return False, "different normalized positions"
    if zero_blocks(r1) != zero_blocks(r2):
        return False, "different zero patterns"
    diff = max_norm(r1.m_can - r2.m_can)
    if diff > rtol * scale:
        return False, f"entries differ by {diff:.3e}"
    return True, "equal"

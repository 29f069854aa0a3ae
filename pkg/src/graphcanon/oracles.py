"""Independent equivalence oracles and seeded random instance generators.

The oracles decide equivalence by solving the scalar constraint systems
directly (ratio propagation over a union-find), without running either
canonicalization algorithm.

Random streams
--------------
Every generator draws from ``numpy.random.PCG64`` seeded with
``SeedSequence([seed, site])`` where ``site`` is a fixed small integer per
draw site (``SITE_*`` below).  Distinct sites never share a stream, so a
fixture built from ``random_nonderogatory(p, 0.5, seed=7)`` is reproducible
regardless of what else was generated before it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

from .errors import LengthTooLarge, ShapeMismatch
from .forests import LabeledUnionFind
from .numerics import DEFAULT_TOLERANCES, ToleranceConfig, as_complex_matrix, lex_key, matrix_scale
from .triangularize import BlockPartition

SITE_UNITARY = 1
SITE_OBSER = 2
SITE_DIAG_PAIR = 3
SITE_SIMILARITY = 4
SITE_PHASES = 5
SITE_SCALES = 6

MAX_WORD_LENGTH = 8


@dataclass
class OracleVerdict:
    equivalent: bool
    witness: Optional[list] = None
    certificate: str = ""
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.equivalent


def rng_for(seed, site: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(site)])))


def _oracle_rtol(tol: ToleranceConfig) -> float:
    return max(tol.tol_zero, 1e-8)


def _propagate(pairs, n, mode, rtol):
    """Solve ``x_q / x_p = c`` for every ``(p, q, c)``; 1-based vertices.

    Returns ``(witness, None)`` or ``(None, message)`` on an inconsistent cycle.
    """
    uf = LabeledUnionFind(n, mode=mode)
    for p, q, c in pairs:
        rp, fp = uf.resolve(p)
        rq, fq = uf.resolve(q)
        if rp != rq:
            uf.union(p, q, c)
            continue
        implied = fq / fp
        if abs(implied - c) > rtol * abs(c):
            return None, f"cycle through {p} and {q} forces ratio {implied:.6g}, block requires {c:.6g}"
    return uf.factors(), None


def _ratio(x: np.ndarray, y: np.ndarray, scale: float, rtol: float):
    """Scalar c with ``y = c * x``, or None.  Pivot is the largest entry of x."""
    k = np.unravel_index(np.argmax(np.abs(x)), x.shape)
    c = complex(y[k] / x[k])
    if np.max(np.abs(y - c * x)) > rtol * scale:
        return None
    return c


def phase_match_oracle(a, b, partition: BlockPartition, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> OracleVerdict:
    """Decide whether unit scalars ``u_i`` with ``B_ij = conj(u_i) u_j A_ij`` exist.

    ``a`` and ``b`` are block upper triangular with the block sizes of
    ``partition``.  The diagonal blocks must agree; each pair of off-diagonal
    blocks must be both zero or proportional by a unit scalar; the resulting
    ratio constraints must be consistent around every cycle.
    """
    a = as_complex_matrix(a, square=True)
    b = as_complex_matrix(b, square=True)
    if a.shape != b.shape or a.shape[0] != partition.n:
        raise ShapeMismatch(f"shapes {a.shape}, {b.shape} do not fit partition of size {partition.n}")
    rtol = _oracle_rtol(tol)
    scale = max(matrix_scale(a), matrix_scale(b))
    zero = tol.tol_zero * scale
    t = partition.t
    blocks = [partition.block(i) for i in range(1, t + 1)]
    for i in range(t):
        if np.max(np.abs(a[blocks[i], blocks[i]] - b[blocks[i], blocks[i]])) > rtol * scale:
            return OracleVerdict(False, certificate=f"diagonal blocks {i + 1} differ")
    constraints = []
    for i in range(t):
        for j in range(i + 1, t):
            x, y = a[blocks[i], blocks[j]], b[blocks[i], blocks[j]]
            xz, yz = np.all(np.abs(x) <= zero), np.all(np.abs(y) <= zero)
            if xz != yz:
                return OracleVerdict(False, certificate=f"block ({i + 1}, {j + 1}) is zero in only one matrix")
            if xz:
                continue
            c = _ratio(x, y, scale, rtol)
            if c is None:
                return OracleVerdict(False, certificate=f"blocks ({i + 1}, {j + 1}) are not proportional")
            if abs(abs(c) - 1) > rtol:
                return OracleVerdict(False, certificate=f"block ({i + 1}, {j + 1}) ratio has modulus {abs(c):.6g}")
            constraints.append((i + 1, j + 1, c / abs(c)))
    witness, msg = _propagate(constraints, t, "phase", rtol)
    if witness is None:
        return OracleVerdict(False, certificate=msg)
    d = np.repeat(np.array(witness), partition.sizes)
    residual = float(np.max(np.abs(d.conj()[:, None] * a * d[None, :] - b))) / scale
    if residual > rtol:
        return OracleVerdict(False, certificate=f"witness residual {residual:.3e}")
    return OracleVerdict(True, witness=witness, details={"residual": residual})


def scale_match_oracle(b, b2, tol: ToleranceConfig = DEFAULT_TOLERANCES, lam=None, lam2=None) -> OracleVerdict:
    """Decide whether nonzero ``s_i`` with ``b2_pq = b_pq * s_q / s_p`` exist."""
    b = as_complex_matrix(b, square=True)
    b2 = as_complex_matrix(b2, square=True)
    if b.shape != b2.shape:
        raise ShapeMismatch(f"shapes {b.shape} and {b2.shape} differ")
    n = b.shape[0]
    rtol = _oracle_rtol(tol)
    scale = max(matrix_scale(b), matrix_scale(b2))
    if lam is not None and lam2 is not None:
        lam, lam2 = np.asarray(lam, dtype=complex), np.asarray(lam2, dtype=complex)
        if lam.shape != lam2.shape or np.max(np.abs(lam - lam2), initial=0) > rtol * max(1.0, np.max(np.abs(lam))):
            return OracleVerdict(False, certificate="eigenvalues differ")
    if np.max(np.abs(np.diag(b) - np.diag(b2))) > rtol * scale:
        return OracleVerdict(False, certificate="diagonals differ")
    zero = tol.tol_zero * scale
    constraints = []
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            x, y = b[p, q], b2[p, q]
            xz, yz = abs(x) <= zero, abs(y) <= zero
            if xz != yz:
                return OracleVerdict(False, certificate=f"entry ({p + 1}, {q + 1}) is zero in only one matrix")
            if not xz:
                constraints.append((p + 1, q + 1, complex(y / x)))
    witness, msg = _propagate(constraints, n, "scale", rtol)
    if witness is None:
        return OracleVerdict(False, certificate=msg)
    s = np.array(witness)
    rebuilt = b * s[None, :] / s[:, None]
    residual = float(np.max(np.abs(rebuilt - b2))) / scale
    if residual > rtol:
        return OracleVerdict(False, certificate=f"witness residual {residual:.3e}")
    return OracleVerdict(True, witness=witness, details={"residual": residual})


def trace_word_invariants(m, max_len: int) -> list:
    """Traces of all words in ``m`` and ``m^H`` of length 1..max_len.

    Words are strings over the letters ``"X"`` and ``"X*"`` (``X`` first),
    listed in shortlex order.  These are unitary-similarity invariants.
    """
    if max_len > MAX_WORD_LENGTH:
        raise LengthTooLarge(f"max_len {max_len} exceeds {MAX_WORD_LENGTH}")
    m = as_complex_matrix(m, square=True)
    letters = (("X", m), ("X*", m.conj().T))
    out = []
    for length in range(1, max_len + 1):
        for word in product((0, 1), repeat=length):
            prod = letters[word[0]][1]
            for w in word[1:]:
                prod = prod @ letters[w][1]
            out.append(("".join(letters[w][0] for w in word), complex(np.trace(prod))))
    return out


def random_unitary(n: int, seed, site: int = SITE_UNITARY) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian with R's diagonal made positive."""
    rng = rng_for(seed, site)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]


def random_similarity(n: int, seed, condition: float = 1e3) -> np.ndarray:
    """Nonsingular matrix with 2-norm condition number at most ``condition``."""
    rng = rng_for(seed, SITE_SIMILARITY)
    sigma = np.exp(rng.uniform(0, np.log(condition), size=n))
    sigma[0], sigma[-1] = 1.0, condition if n > 1 else 1.0
    u = random_unitary(n, seed, site=SITE_SIMILARITY * 100 + 1)
    v = random_unitary(n, seed, site=SITE_SIMILARITY * 100 + 2)
    return (u * sigma[None, :]) @ v.conj().T / np.sqrt(condition)


def random_eigenvalues(count: int, rng: np.random.Generator, min_gap: float = 0.5, box: float = 3.0) -> list:
    """Lexicographically sorted complex numbers with pairwise distance >= min_gap."""
    vals = []
    while len(vals) < count:
        z = complex(rng.uniform(-box, box), rng.uniform(-box, box))
        if all(abs(z - w) >= min_gap for w in vals):
            vals.append(z)
    return sorted(vals, key=lex_key)


def random_obser_form(partition, fill_density: float, seed, superdiag=(0.5, 2.0)) -> np.ndarray:
    """A block triangular matrix with the given partition and positive in-block superdiagonals.

    ``partition`` is a :class:`BlockPartition` or a sequence of block sizes
    (eigenvalues are then drawn at random).  Each off-diagonal block is a
    nonzero complex Gaussian block with probability ``fill_density`` and zero
    otherwise.
    """
    rng = rng_for(seed, SITE_OBSER)
    if not isinstance(partition, BlockPartition):
        sizes = tuple(int(m) for m in partition)
        partition = BlockPartition(sizes, tuple(random_eigenvalues(len(sizes), rng)))
    n = partition.n
    a = np.zeros((n, n), dtype=np.complex128)
    for i in range(1, partition.t + 1):
        sl = partition.block(i)
        m = sl.stop - sl.start
        blk = np.triu(rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)), 2)
        blk += np.diag(rng.uniform(*superdiag, size=max(m - 1, 0)), 1) if m > 1 else 0
        blk += partition.eigenvalues[i - 1] * np.eye(m)
        a[sl, sl] = blk
        for j in range(i + 1, partition.t + 1):
            if rng.uniform() < fill_density:
                sj = partition.block(j)
                shape = (sl.stop - sl.start, sj.stop - sj.start)
                a[sl, sj] = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return a


def random_nonderogatory(partition, fill_density: float, seed) -> np.ndarray:
    """:func:`random_obser_form` conjugated by a Haar unitary drawn from the same seed."""
    a = random_obser_form(partition, fill_density, seed)
    u = random_unitary(a.shape[0], seed)
    return u @ a @ u.conj().T


def random_phases(t: int, seed) -> np.ndarray:
    rng = rng_for(seed, SITE_PHASES)
    return np.exp(2j * np.pi * rng.uniform(size=t))


def random_scales(n: int, seed, low: float = 0.1, high: float = 10.0) -> np.ndarray:
    rng = rng_for(seed, SITE_SCALES)
    return np.exp(rng.uniform(np.log(low), np.log(high), size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


def random_diag_pair(n: int, fill_density: float, seed, condition: Optional[float] = None, min_gap: float = 0.1):
    """``(diag(lambda), B)`` with sorted eigenvalues at least ``min_gap`` apart.

    Off-diagonal entries of ``B`` are nonzero with probability
    ``fill_density``; the diagonal is always filled.  With ``condition`` the
    pair is conjugated by :func:`random_similarity` of that condition.
    """
    rng = rng_for(seed, SITE_DIAG_PAIR)
    lam = random_eigenvalues(n, rng, min_gap=min_gap, box=max(1.0, 0.5 * n * min_gap + 1.0))
    m = np.diag(np.array(lam, dtype=np.complex128))
    b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    mask = rng.uniform(size=(n, n)) < fill_density
    np.fill_diagonal(mask, True)
    b = np.where(mask, b, 0)
    if condition is not None:
        s = random_similarity(n, seed, condition)
        si = np.linalg.inv(s)
        m, b = si @ m @ s, si @ b @ s
    return m, b

"""Scalar ordering, clustering, zero tests and the tolerance policy.

Complex scalars are plain Python ``complex`` values and complex matrices
are ``numpy`` arrays of dtype ``complex128``.  Ordering is exact; every
equality or zero decision that must survive rounding goes through
:func:`cluster_values` or :func:`approx_zero` with an explicit scale.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ClusterAmbiguity, NonFiniteError, NotSquare

LESS, EQUAL, GREATER = -1, 0, 1

TOLERANCE_ENV = "GRAPHCANON_TOLERANCES"


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerances used by every numerical decision.

    ``tol_eig`` and ``tol_zero`` are relative to the max-norm of the matrix
    being examined.  ``max_qr_iters`` of ``None`` means ``30 * n``.
    """

    tol_eig: float = 1e-6
    tol_zero: float = 1e-10
    tol_residual: float = 1e-10
    max_qr_iters: Optional[int] = None

    def __post_init__(self):
        for name in ("tol_eig", "tol_zero", "tol_residual"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be a finite nonnegative number, got {value!r}")
        if self.max_qr_iters is not None and self.max_qr_iters < 1:
            raise ValueError("max_qr_iters must be >= 1")

    def qr_iters(self, n: int) -> int:
        if self.max_qr_iters is None:
            return 30 * max(n, 1)
        return self.max_qr_iters

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def with_overrides(self, **kwargs) -> "ToleranceConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    @classmethod
    def from_env(cls, environ=None, base: Optional["ToleranceConfig"] = None) -> "ToleranceConfig":
        """``base`` (default: the class defaults), overridden by ``GRAPHCANON_TOLERANCES``.

        The variable holds whitespace- or comma-separated ``name=value``
        pairs, e.g. ``"tol_eig=1e-5, tol_zero=1e-11"``.
        """
        environ = os.environ if environ is None else environ
        text = environ.get(TOLERANCE_ENV, "").strip()
        base = cls() if base is None else base
        if not text:
            return base
        known = {f.name for f in fields(cls)}
        values = {}
        for item in text.replace(",", " ").split():
            name, sep, raw = item.partition("=")
            name = name.strip()
            if not sep or name not in known:
                raise ValueError(f"bad entry {item!r} in {TOLERANCE_ENV}")
            values[name] = int(raw) if name == "max_qr_iters" else float(raw)
        return replace(base, **values)


DEFAULT_TOLERANCES = ToleranceConfig()
# Reducing a pair goes through an eigenvector matrix and its inverse, so
# rounding noise in the reduced matrix grows like eps * cond(S)**2.
PAIR_TOLERANCES = ToleranceConfig(tol_zero=1e-8)


class Cluster(NamedTuple):
    representative: complex
    members: tuple


def check_finite_scalar(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NonFiniteError(f"non-finite scalar {z!r}")
    return z


def as_complex_matrix(m, square: bool = False) -> np.ndarray:
    """Copy ``m`` into a 2-D complex128 array, rejecting NaN/Inf."""
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2:
        raise NotSquare(f"expected a 2-D matrix, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix has non-finite entries")
    return a


def max_norm(m) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m)))


def matrix_scale(m) -> float:
    """Max-norm of ``m``, or 1.0 for a zero matrix (relative tests need scale > 0)."""
    s = max_norm(m)
    return s if s > 0 else 1.0


def lex_key(z) -> tuple:
    z = complex(z)
    return (z.real, z.imag)


def lex_compare(a, b) -> int:
    """Lexicographic comparison of complex numbers: real part first, then imaginary.

    Returns ``LESS`` (-1), ``EQUAL`` (0) or ``GREATER`` (1).  Exact: no tolerance.
    """
    a = check_finite_scalar(a)
    b = check_finite_scalar(b)
    ka, kb = (a.real, a.imag), (b.real, b.imag)
    if ka < kb:
        return LESS
    if ka > kb:
        return GREATER
    return EQUAL


def approx_zero(z, scale: float, tol_zero: float) -> bool:
    return abs(complex(z)) <= tol_zero * scale


def _mean(values: Sequence[complex]) -> complex:
    # fsum is exactly rounded, so the mean does not depend on member order
    k = len(values)
    return complex(math.fsum(v.real for v in values) / k, math.fsum(v.imag for v in values) / k)


def _tie_real_parts(clusters: list, radius: float) -> list:
    # Rounding leaves ~eps-sized real parts on eigenvalues such as 0 and 1j,
    # which would decide their lexicographic order.  Real parts that chain
    # within ``radius`` are treated as equal: they are replaced by their mean
    # and the group is ordered by imaginary part.
    clusters = sorted(clusters, key=lambda c: lex_key(c.representative))
    out, group = [], [clusters[0]]
    for c in clusters[1:]:
        if c.representative.real - group[-1].representative.real <= radius:
            group.append(c)
            continue
        out.extend(_snap_group(group))
        group = [c]
    out.extend(_snap_group(group))
    return out


def _snap_group(group: list) -> list:
    if len(group) == 1:
        return group
    re = math.fsum(c.representative.real for c in group) / len(group)
    snapped = [Cluster(complex(re, c.representative.imag), c.members) for c in group]
    return sorted(snapped, key=lambda c: c.representative.imag)


def cluster_values(values: Sequence, scale: float, tol_eig: float, tol_tie: float = 0.0) -> list:
    """Single-linkage clustering of complex values.

    Two values are linked when ``|x - y| <= tol_eig * scale``.  Returns a
    list of :class:`Cluster` sorted lexicographically by representative (the
    arithmetic mean of the members); ``members`` are sorted input indices.
    Representatives whose real parts chain within ``min(tol_tie, tol_eig) * scale`` get a
    common real part, so that rounding noise cannot decide their order.

    Raises :class:`ClusterAmbiguity` when two representatives end up closer
    than ``2 * tol_eig * scale``: the grouping is then too sensitive to
    rounding to be trusted.
    """
    vals = [check_finite_scalar(v) for v in values]
    if not vals:
        return []
    if not scale > 0:
        raise ValueError("scale must be positive")
    radius = tol_eig * scale
    n = len(vals)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) <= radius:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = [Cluster(_mean([vals[i] for i in idx]), tuple(idx)) for idx in groups.values()]
    clusters = _tie_real_parts(clusters, min(tol_tie, tol_eig) * scale)
    for a in range(len(clusters)):
        for b in range(a + 1, len(clusters)):
            gap = abs(clusters[a].representative - clusters[b].representative)
            if gap < 2 * radius:
                raise ClusterAmbiguity(
                    f"cluster representatives {clusters[a].representative} and "
                    f"{clusters[b].representative} are only {gap:.3e} apart "
                    f"(linkage radius {radius:.3e})"
                )
    return clusters

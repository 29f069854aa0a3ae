"""Acyclic constraint graphs and a union-find with multiplicative labels.

Vertices are 1-based everywhere in this module, matching the block and
row indices used in the canonical-form documents.
"""

from __future__ import annotations

from collections import deque
from typing import NamedTuple

from .errors import (
    AlreadyConnected,
    BadRatio,
    CycleError,
    IndexOutOfRange,
    NotConnected,
)


class PathStep(NamedTuple):
    """One edge of a tree path.

    ``edge`` is the edge as stored in the graph; ``forward`` is True when the
    traversal goes from ``edge[0]`` to ``edge[1]``.
    """

    edge: tuple
    forward: bool


class _GraphBase:
    directed = False

    def __init__(self, vertex_count: int, edges=()):
        if vertex_count < 0:
            raise ValueError("vertex_count must be nonnegative")
        self.vertex_count = int(vertex_count)
        self._edges: list = []
        self._adj: dict = {v: [] for v in range(1, self.vertex_count + 1)}
        for p, q in edges:
            self.add_edge(p, q)

    def _check(self, v):
        if not isinstance(v, int) or isinstance(v, bool):
            v = int(v)
        if not 1 <= v <= self.vertex_count:
            raise IndexOutOfRange(f"vertex {v} outside 1..{self.vertex_count}")
        return v

    @property
    def edges(self) -> list:
        """Edges in insertion order."""
        return list(self._edges)

    def __len__(self):
        return len(self._edges)

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return self.vertex_count == other.vertex_count and self.edge_set() == other.edge_set()

    def edge_set(self) -> frozenset:
        return frozenset(self._edges)

    def _key(self, p, q):
        raise NotImplementedError

    def _parents_from(self, p):
        parents = {p: None}
        queue = deque([p])
        while queue:
            v = queue.popleft()
            for w, stored in self._adj[v]:
                if w not in parents:
                    parents[w] = (v, stored)
                    queue.append(w)
        return parents

    def connected(self, p, q) -> bool:
        p, q = self._check(p), self._check(q)
        if p == q:
            return True
        return q in self._parents_from(p)

    def add_edge(self, p, q):
        p, q = self._check(p), self._check(q)
        if self.connected(p, q):
            raise CycleError(f"edge {p}-{q} would close a cycle")
        stored = self._key(p, q)
        self._edges.append(stored)
        self._adj[p].append((q, stored))
        self._adj[q].append((p, stored))
        return self

    def tree_path(self, p, q) -> list:
        """The unique path from ``p`` to ``q`` as a list of :class:`PathStep`."""
        p, q = self._check(p), self._check(q)
        if p == q:
            return []
        parents = self._parents_from(p)
        if q not in parents:
            raise NotConnected(f"no path between {p} and {q}")
        steps = []
        v = q
        while v != p:
            prev, stored = parents[v]
            steps.append(PathStep(stored, stored == (prev, v)))
            v = prev
        steps.reverse()
        return steps

    def components(self) -> list:
        """Connected components as sorted vertex lists, ordered by smallest vertex."""
        seen = set()
        out = []
        for v in range(1, self.vertex_count + 1):
            if v in seen:
                continue
            comp = sorted(self._parents_from(v))
            seen.update(comp)
            out.append(comp)
        return out

    def induced(self, vertices) -> "_GraphBase":
        """Subgraph on ``vertices`` relabelled 1..k in increasing vertex order."""
        vertices = sorted(vertices)
        relabel = {v: i + 1 for i, v in enumerate(vertices)}
        sub = type(self)(len(vertices))
        for p, q in self._edges:
            if p in relabel and q in relabel:
                sub.add_edge(relabel[p], relabel[q])
        return sub


class Forest(_GraphBase):
    """Undirected acyclic graph; edges are stored as ``(min, max)``."""

    def _key(self, p, q):
        if p == q:
            raise CycleError(f"self-loop at {p}")
        return (min(p, q), max(p, q))

    def __repr__(self):
        return f"Forest({self.vertex_count}, {self._edges})"


class DiForest(_GraphBase):
    """Directed graph whose underlying undirected graph is acyclic."""

    directed = True

    def _key(self, p, q):
        if p == q:
            raise CycleError(f"self-loop at {p}")
        return (p, q)

    def __repr__(self):
        return f"DiForest({self.vertex_count}, {self._edges})"


class LabeledUnionFind:
    """Union-find whose vertices carry a multiplicative factor relative to the root.

    Each vertex stands for an unknown nonzero value ``x_v``; ``union(p, q, r)``
    records ``x_q = r * x_p``.  :meth:`resolve` returns ``(root, f)`` with
    ``x_v = f * x_root``.  In ``"phase"`` mode all factors have modulus 1 and
    are renormalized after every update.
    """

    def __init__(self, n: int, mode: str = "phase"):
        if mode not in ("phase", "scale"):
            raise ValueError("mode must be 'phase' or 'scale'")
        self.n = int(n)
        self.mode = mode
        self._parent = list(range(self.n + 1))
        self._label = [1 + 0j] * (self.n + 1)
        self._size = [1] * (self.n + 1)

    def _check(self, v):
        v = int(v)
        if not 1 <= v <= self.n:
            raise IndexOutOfRange(f"vertex {v} outside 1..{self.n}")
        return v

    def _norm(self, z):
        if self.mode == "phase":
            return z / abs(z)
        return z

    def resolve(self, v):
        v = self._check(v)
        path = []
        while self._parent[v] != v:
            path.append(v)
            v = self._parent[v]
        root = v
        # compress from the vertex nearest the root outwards
        acc = 1 + 0j
        for w in reversed(path):
            acc = self._norm(self._label[w] * acc)
            self._label[w] = acc
            self._parent[w] = root
        if not path:
            return root, 1 + 0j
        return root, self._label[path[0]]

    def find(self, v) -> int:
        return self.resolve(v)[0]

    def connected(self, p, q) -> bool:
        return self.find(p) == self.find(q)

    def union(self, p, q, ratio):
        ratio = complex(ratio)
        if ratio == 0:
            raise BadRatio("ratio must be nonzero")
        if self.mode == "phase" and abs(abs(ratio) - 1) > 1e-12:
            raise BadRatio(f"phase-mode ratio must have modulus 1, got |r| = {abs(ratio)!r}")
        rp, fp = self.resolve(p)
        rq, fq = self.resolve(q)
        if rp == rq:
            raise AlreadyConnected(f"{p} and {q} are already in one component")
        # x_rq = ratio * fp / fq * x_rp
        link = self._norm(ratio * fp / fq)
        if self._size[rp] >= self._size[rq]:
            self._parent[rq] = rp
            self._label[rq] = link
            self._size[rp] += self._size[rq]
        else:
            self._parent[rp] = rq
            self._label[rp] = self._norm(1 / link)
            self._size[rq] += self._size[rp]
        return self

    def members(self, v) -> list:
        root = self.find(v)
        return [w for w in range(1, self.n + 1) if self.find(w) == root]

    def factors(self) -> list:
        """Factor of every vertex relative to its root (index 0 is vertex 1)."""
        return [self.resolve(v)[1] for v in range(1, self.n + 1)]

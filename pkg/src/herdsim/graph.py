"""Undirected simple graphs: ER generation, degree statistics, edge-list
serialization, and the pairwise-stability audit."""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "Graph",
    "er_random",
    "degree_histogram",
    "is_pairwise_stable",
]


class Graph:
    """Simple undirected graph over nodes 0..n-1.

    Adjacency is kept as a dense boolean matrix plus lazily-built per-node
    neighbor lists (CSR form) for O(k) neighborhood scans in the hot loop.
    """

    __slots__ = ("n", "adj", "_csr")

    def __init__(self, n: int, adj: np.ndarray | None = None):
        if n < 0:
            raise ValueError("node count must be nonnegative")
        self.n = n
        if adj is None:
            adj = np.zeros((n, n), dtype=bool)
        else:
            adj = np.asarray(adj, dtype=bool)
            if adj.shape != (n, n):
                raise ValueError("adjacency shape mismatch")
            if not np.array_equal(adj, adj.T):
                raise ValueError("adjacency must be symmetric")
            if adj.diagonal().any():
                raise ValueError("self-loops not allowed")
            adj = adj.copy()
        self.adj = adj
        self._csr = None

    # -- basic queries ----------------------------------------------------

    def has_link(self, i: int, j: int) -> bool:
        return bool(self.adj[i, j])

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adj[i])

    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1).astype(np.int64)

    def degree(self, i: int) -> int:
        return int(self.adj[i].sum())

    @property
    def n_links(self) -> int:
        return int(self.adj.sum()) // 2

    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return 2.0 * self.n_links / (self.n * (self.n - 1))

    def edges(self) -> list[tuple[int, int]]:
        ii, jj = np.nonzero(np.triu(self.adj, 1))
        return list(zip(ii.tolist(), jj.tolist()))

    def copy(self) -> "Graph":
        return Graph(self.n, self.adj)

    # -- mutation ----------------------------------------------------------

    def add_link(self, i: int, j: int) -> None:
        if i == j:
            raise ValueError("self-loops not allowed")
        if self.adj[i, j]:
            raise ValueError(f"link ({i},{j}) already present")
        self.adj[i, j] = self.adj[j, i] = True
        self._csr = None

    def remove_link(self, i: int, j: int) -> None:
        if i == j:
            raise ValueError("self-loops not allowed")
        if not self.adj[i, j]:
            raise ValueError(f"link ({i},{j}) not present")
        self.adj[i, j] = self.adj[j, i] = False
        self._csr = None

    # -- flattened neighbor lists -------------------------------------------

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) neighbor lists; indices sorted per node."""
        if self._csr is None:
            deg = self.adj.sum(axis=1)
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(deg, out=indptr[1:])
            indices = np.nonzero(self.adj)[1].astype(np.int64)
            self._csr = (indptr, indices)
        return self._csr

    # -- serialization -----------------------------------------------------

    def to_edge_text(self) -> str:
        lines = [f"# n={self.n} density={self.density()!r}"]
        lines.extend(f"{i} {j}" for i, j in self.edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_text(cls, text: str) -> "Graph":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("#"):
            raise ValueError("edge list must start with a '# n=... density=...' header")
        header = lines[0][1:].split()
        fields = dict(part.split("=", 1) for part in header)
        g = cls(int(fields["n"]))
        for ln in lines[1:]:
            i, j = ln.split()
            g.add_link(int(i), int(j))
        return g

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_edge_text())

    @classmethod
    def load(cls, path) -> "Graph":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_edge_text(fh.read())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and np.array_equal(self.adj, other.adj)
        )

    def __reduce__(self):
        return (Graph, (self.n, self.adj))


def er_random(n: int, rho: float, rng: np.random.Generator) -> Graph:
    """Erdos-Renyi graph: each unordered pair linked independently w.p. rho."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {rho}")
    u = rng.random((n, n))
    upper = np.triu(u < rho, 1)
    return Graph(n, upper | upper.T)


def degree_histogram(graphs: Iterable[Graph]) -> np.ndarray:
    """Pooled degree counts over an ensemble; index = degree."""
    counts = np.zeros(1, dtype=np.int64)
    for g in graphs:
        deg = g.degrees()
        hi = int(deg.max(initial=0)) + 1
        if hi > counts.size:
            counts = np.concatenate([counts, np.zeros(hi - counts.size, dtype=np.int64)])
        counts[: hi] += np.bincount(deg, minlength=hi)
    return counts


def is_pairwise_stable(
    g: Graph,
    utility_fn: Callable[[int, tuple[int, ...]], float],
    costs: Sequence[float],
    tol: float = 1e-12,
) -> tuple[bool, list[tuple[int, int, str]]]:
    """Audit pairwise stability under a gross-utility model with per-link costs.

    utility_fn(i, neighborhood) must return agent i's gross expected utility;
    net utility is gross minus cost(i) per link.  Violations:
      * ("delete")  a linked pair where either endpoint strictly gains from
        dropping the link, and
      * ("add")     an unlinked pair where both endpoints strictly gain from
        adding one.
    """
    violations: list[tuple[int, int, str]] = []
    base = [utility_fn(i, tuple(g.neighbors(i).tolist())) for i in range(g.n)]

    def gain(i: int, with_j: int | None, without_j: int | None) -> float:
        nb = set(g.neighbors(i).tolist())
        if with_j is not None:
            nb.add(with_j)
            return utility_fn(i, tuple(sorted(nb))) - base[i] - costs[i]
        nb.discard(without_j)
        return utility_fn(i, tuple(sorted(nb))) - base[i] + costs[i]

    for i in range(g.n):
        for j in range(i + 1, g.n):
            if g.has_link(i, j):
                if gain(i, None, j) > tol or gain(j, None, i) > tol:
                    violations.append((i, j, "delete"))
            else:
                if gain(i, j, None) > tol and gain(j, i, None) > tol:
                    violations.append((i, j, "add"))
    return (not violations, violations)

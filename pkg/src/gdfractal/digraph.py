"""Finite directed multigraphs with ordered out-edge lists.

Paths are plain tuples of edge indices.  The empty tuple is the length-zero
path returned by :func:`reachable` when ``u == v``; ``None`` means "no path".
Every enumeration follows the out-list order fixed at construction, which
keeps reports byte-reproducible.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator, Sequence

Path = tuple[int, ...]


@dataclass(frozen=True)
class Edge:
    id: int
    src: str
    dst: str
    label: str


@dataclass(frozen=True)
class Violation:
    vertex: str
    degree: int

    def __str__(self):
        return f"vertex {self.vertex} has out-degree {self.degree}; d_u >= 2 is required"


class Digraph:
    """Directed multigraph; loops and parallel edges are allowed."""

    def __init__(self, vertices: Sequence[str], edges: Sequence[tuple]):
        self.vertices: tuple[str, ...] = tuple(str(v) for v in vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        index = {v: i for i, v in enumerate(self.vertices)}
        out: dict[str, list[int]] = {v: [] for v in self.vertices}
        built = []
        for i, e in enumerate(edges):
            src, dst = str(e[0]), str(e[1])
            if src not in index or dst not in index:
                raise ValueError(f"edge {i} uses an undeclared vertex")
            k = len(out[src]) + 1
            label = e[2] if len(e) > 2 and e[2] else f"e{src}({k})"
            built.append(Edge(i, src, dst, label))
            out[src].append(i)
        self.edges: tuple[Edge, ...] = tuple(built)
        self.out_lists: dict[str, tuple[int, ...]] = {v: tuple(ids) for v, ids in out.items()}
        self._index = index

    def __repr__(self):
        return f"Digraph({len(self.vertices)} vertices, {len(self.edges)} edges)"

    def degree(self, u: str) -> int:
        return len(self.out_lists[u])

    def position(self, e: int) -> int:
        """1-based rank of edge ``e`` in its source's out-list."""
        edge = self.edges[e]
        return self.out_lists[edge.src].index(e) + 1

    def terminal(self, path: Path, start: str | None = None) -> str:
        if not path:
            if start is None:
                raise ValueError("empty path has no terminal without a start vertex")
            return start
        return self.edges[path[-1]].dst

    def is_chain(self, path: Path) -> bool:
        return all(self.edges[a].dst == self.edges[b].src for a, b in zip(path, path[1:]))

    def labels(self, path: Path) -> list[str]:
        return [self.edges[e].label for e in path]

    def reachable_set(self, u: str, within: frozenset[str] | None = None) -> set[str]:
        seen = {u}
        todo = [u]
        while todo:
            w = todo.pop()
            for e in self.out_lists[w]:
                x = self.edges[e].dst
                if x not in seen and (within is None or x in within):
                    seen.add(x)
                    todo.append(x)
        return seen


def validate_graph(g: Digraph) -> list[Violation]:
    return [Violation(v, g.degree(v)) for v in g.vertices if g.degree(v) < 2]


def strongly_connected(g: Digraph) -> bool:
    if not g.vertices:
        return True
    root = g.vertices[0]
    if len(g.reachable_set(root)) != len(g.vertices):
        return False
    back: dict[str, list[str]] = {v: [] for v in g.vertices}
    for e in g.edges:
        back[e.dst].append(e.src)
    seen = {root}
    todo = [root]
    while todo:
        w = todo.pop()
        for x in back[w]:
            if x not in seen:
                seen.add(x)
                todo.append(x)
    return len(seen) == len(g.vertices)


def _bfs_path(g: Digraph, u: str, target, allowed) -> Path | None:
    """Shortest path from u (length >= 1) to a vertex satisfying ``target``."""
    parent: dict[str, tuple[str, int]] = {}
    queue = deque([u])
    seen = set()
    while queue:
        w = queue.popleft()
        for e in g.out_lists[w]:
            x = g.edges[e].dst
            if target(x):
                path = [e]
                while w != u:
                    w, pe = parent[w]
                    path.append(pe)
                return tuple(reversed(path))
            if x not in seen and x != u and allowed(x):
                seen.add(x)
                parent[x] = (w, e)
                queue.append(x)
    return None


def reachable(g: Digraph, u: str, v: str) -> Path | None:
    """A shortest directed path u -> v; ``()`` when u == v, None when none exists."""
    if u == v:
        return ()
    return _bfs_path(g, u, lambda x: x == v, lambda x: True)


def circuit_avoiding(g: Digraph, u: str, within: set[str] | None = None) -> Path | None:
    """Shortest directed circuit that never visits ``u``.

    Ties go to the earliest start vertex, then to out-list order.
    ``within`` restricts the search to a vertex subset.
    """
    allowed = set(g.vertices if within is None else within) - {u}
    best: Path | None = None
    for s in g.vertices:
        if s not in allowed:
            continue
        p = _bfs_path(g, s, lambda x, s=s: x == s, lambda x: x in allowed)
        if p is not None and (best is None or len(p) < len(best)):
            best = p
    return best


def all_circuits_through(g: Digraph, u: str) -> bool:
    """True iff every circuit in the part of the graph reachable from ``u`` visits ``u``."""
    return circuit_avoiding(g, u, within=g.reachable_set(u)) is None


def return_circuits(g: Digraph, u: str) -> list[Path]:
    """Circuits u -> u whose intermediate vertices are distinct and differ from u."""
    out: list[Path] = []

    def dfs(w: str, path: list[int], visited: set[str]):
        for e in g.out_lists[w]:
            x = g.edges[e].dst
            if x == u:
                out.append(tuple(path + [e]))
            elif x not in visited:
                visited.add(x)
                dfs(x, path + [e], visited)
                visited.discard(x)

    dfs(u, [], set())
    return out


def simple_circuits(g: Digraph, avoid: str | None = None) -> list[Path]:
    """Every simple circuit (no repeated vertex), each listed once.

    A circuit is rooted at its earliest vertex in declaration order; the list
    is sorted by (length, root, edge ids).
    """
    order = {v: i for i, v in enumerate(g.vertices)}
    found = []
    for s in g.vertices:
        if s == avoid:
            continue

        def dfs(w: str, path: list[int], visited: set[str], s=s):
            for e in g.out_lists[w]:
                x = g.edges[e].dst
                if x == s:
                    found.append((len(path) + 1, order[s], tuple(path + [e])))
                elif x not in visited and x != avoid and order[x] > order[s]:
                    visited.add(x)
                    dfs(x, path + [e], visited)
                    visited.discard(x)

        dfs(s, [], {s})
    found.sort()
    return [p for _, _, p in found]


def circuit_vertices(g: Digraph, circuit: Path) -> list[str]:
    return [g.edges[e].src for e in circuit]


def paths_from(g: Digraph, u: str, max_len: int) -> Iterator[Path]:
    """All paths of length 1..max_len leaving u, by length then out-list order."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    level: list[Path] = [(e,) for e in g.out_lists[u]]
    for length in range(1, max_len + 1):
        yield from level
        if length == max_len:
            break
        level = [p + (e,) for p in level for e in g.out_lists[g.edges[p[-1]].dst]]

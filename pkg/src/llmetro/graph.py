"""Undirected simple graphs and the inward-oriented mixed graph.

Vertices are integers 0..n-1. Adjacency is validated and canonicalized
(sorted) at construction and never mutated afterwards, so instances are
safe to share across threads and all downstream iteration order is
deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .rng import STREAM_GRAPH, stream

# Sentinel BFS distance for unreachable vertices; larger than any radius
# anyone can meaningfully pass, yet safe against integer overflow in +1.
UNREACHABLE = np.iinfo(np.int64).max // 4


class GraphFormatError(ValueError):
    """Malformed graph text; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GirthTooSmall(ValueError):
    """Raised when an operation needs girth >= 2r+1 and the graph has less."""


@dataclass(frozen=True)
class GirthResult:
    """Length of a shortest cycle; ``value`` is None for forests."""

    value: int | None

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def at_least(self, k: int) -> bool:
        return self.value is None or self.value >= k

    def __str__(self) -> str:
        return "inf" if self.value is None else str(self.value)


class Graph:
    """Immutable undirected simple graph.

    Edges are stored as a lexicographically sorted (m, 2) array with
    u < w in every row; per-vertex neighbor arrays are sorted ascending.
    """

    __slots__ = ("n", "edges", "adj", "deg", "edge_u", "edge_w")

    def __init__(self, n: int, edges) -> None:
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        seen: set[tuple[int, int]] = set()
        canon: list[tuple[int, int]] = []
        for e in edges:
            u, w = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= w < n):
                raise ValueError(f"edge ({u},{w}) out of range for n={n}")
            if u == w:
                raise ValueError(f"self-loop at vertex {u}")
            key = (u, w) if u < w else (w, u)
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            canon.append(key)
        canon.sort()
        self.n = n
        self.edges = np.array(canon, dtype=np.int64).reshape(-1, 2)
        self.edge_u = self.edges[:, 0].copy()
        self.edge_w = self.edges[:, 1].copy()
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, w in canon:
            nbrs[u].append(w)
            nbrs[w].append(u)
        self.adj = tuple(np.array(sorted(a), dtype=np.int64) for a in nbrs)
        self.deg = np.array([len(a) for a in self.adj], dtype=np.int64)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def max_degree(self) -> int:
        return int(self.deg.max()) if self.n else 0

    def neighbors(self, v: int) -> np.ndarray:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return int(self.deg[v])

    def has_edge(self, u: int, w: int) -> bool:
        a = self.adj[u]
        i = int(np.searchsorted(a, w))
        return i < len(a) and a[i] == w

    def distances_from(self, v: int) -> np.ndarray:
        """BFS distances; UNREACHABLE marks vertices outside v's component."""
        dist = np.full(self.n, UNREACHABLE, dtype=np.int64)
        dist[v] = 0
        queue = deque([v])
        while queue:
            u = queue.popleft()
            du = dist[u] + 1
            for w in self.adj[u]:
                if dist[w] == UNREACHABLE:
                    dist[w] = du
                    queue.append(int(w))
        return dist

    def distances_from_set(self, sources) -> np.ndarray:
        dist = np.full(self.n, UNREACHABLE, dtype=np.int64)
        queue = deque()
        for v in sources:
            dist[int(v)] = 0
            queue.append(int(v))
        while queue:
            u = queue.popleft()
            du = dist[u] + 1
            for w in self.adj[u]:
                if dist[w] == UNREACHABLE:
                    dist[w] = du
                    queue.append(int(w))
        return dist

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def ball(g: Graph, v: int, r: int) -> np.ndarray:
    """Vertices at distance <= r from v, ascending."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return np.nonzero(g.distances_from(v) <= r)[0]


def sphere(g: Graph, v: int, r: int) -> np.ndarray:
    """Vertices at distance exactly r from v, ascending."""
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    return np.nonzero(g.distances_from(v) == r)[0]


def girth(g: Graph) -> GirthResult:
    """Length of a shortest cycle, found by BFS from every vertex.

    From each root, any scanned edge that closes back into the visited set
    certifies a closed walk of length dist[u]+dist[w]+1, which always
    contains a cycle no longer than that; rooting the BFS at a vertex of a
    shortest cycle attains the girth exactly. O(n*m) total.
    """
    best: int | None = None
    for s in range(g.n):
        dist = np.full(g.n, -1, dtype=np.int64)
        parent = np.full(g.n, -1, dtype=np.int64)
        dist[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(int(w))
                elif w != parent[u]:
                    cand = int(dist[u] + dist[w] + 1)
                    if best is None or cand < best:
                        best = cand
        if best == 3:
            break
    return GirthResult(best)


class MixedGraph:
    """A graph whose edge set is split into undirected and directed parts.

    ``undirected_edges`` is a (k, 2) array of unordered pairs (u < w);
    ``directed_edges`` is a (j, 2) array of ordered (tail, head) pairs.
    Together they cover every base edge exactly once. Per-vertex neighbor
    partitions: ``gamma_un`` (undirected), ``gamma_in`` (edges pointing at
    the vertex), ``gamma_out`` (edges the vertex points along).
    """

    __slots__ = (
        "base",
        "undirected_edges",
        "directed_edges",
        "un_u",
        "un_w",
        "dir_tail",
        "dir_head",
        "gamma_un",
        "gamma_in",
        "gamma_out",
        "center",
        "radius",
    )

    def __init__(self, base: Graph, undirected, directed, center=None, radius=None):
        und = [(int(u), int(w)) if u < w else (int(w), int(u)) for u, w in undirected]
        dirs = [(int(u), int(w)) for u, w in directed]
        covered: dict[tuple[int, int], int] = {}
        for u, w in und:
            covered[(u, w)] = covered.get((u, w), 0) + 1
        for u, w in dirs:
            if u == w:
                raise ValueError(f"directed self-loop at {u}")
            key = (u, w) if u < w else (w, u)
            covered[key] = covered.get(key, 0) + 1
        base_set = {(int(u), int(w)) for u, w in base.edges}
        for key, count in covered.items():
            if key not in base_set:
                raise ValueError(f"edge {key} not in base graph")
            if count > 1:
                raise ValueError(f"edge {key} assigned more than once")
        if len(covered) != len(base_set):
            missing = base_set - set(covered)
            raise ValueError(f"base edges not covered: {sorted(missing)[:5]}")

        und.sort()
        dirs.sort()
        self.base = base
        self.undirected_edges = np.array(und, dtype=np.int64).reshape(-1, 2)
        self.directed_edges = np.array(dirs, dtype=np.int64).reshape(-1, 2)
        self.un_u = self.undirected_edges[:, 0].copy()
        self.un_w = self.undirected_edges[:, 1].copy()
        self.dir_tail = self.directed_edges[:, 0].copy()
        self.dir_head = self.directed_edges[:, 1].copy()
        g_un: list[list[int]] = [[] for _ in range(base.n)]
        g_in: list[list[int]] = [[] for _ in range(base.n)]
        g_out: list[list[int]] = [[] for _ in range(base.n)]
        for u, w in und:
            g_un[u].append(w)
            g_un[w].append(u)
        for u, w in dirs:
            g_out[u].append(w)
            g_in[w].append(u)
        self.gamma_un = tuple(np.array(sorted(a), dtype=np.int64) for a in g_un)
        self.gamma_in = tuple(np.array(sorted(a), dtype=np.int64) for a in g_in)
        self.gamma_out = tuple(np.array(sorted(a), dtype=np.int64) for a in g_out)
        self.center = center
        self.radius = radius

    @classmethod
    def all_undirected(cls, base: Graph) -> "MixedGraph":
        """Degenerate mixed graph with an empty directed part."""
        return cls(base, [tuple(e) for e in base.edges], [])

    @property
    def n(self) -> int:
        return self.base.n

    def neighbors(self, v: int) -> np.ndarray:
        return self.base.neighbors(v)

    def __repr__(self) -> str:
        return (
            f"MixedGraph(n={self.n}, undirected={len(self.undirected_edges)}, "
            f"directed={len(self.directed_edges)})"
        )


def orient_ball_inward(g: Graph, v: int, r: int) -> MixedGraph:
    """Direct every edge strictly inside the radius-r ball toward v.

    Requires girth >= 2r+1 (forests pass), which makes each inward
    direction unique and leaves each vertex with at most one outgoing
    directed edge. Edges with an endpoint outside the ball, or with both
    endpoints exactly on the r-sphere, stay undirected. Vertices
    unreachable from v count as outside every ball.
    """
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range")
    if r < 1:
        raise ValueError("radius must be a positive integer")
    gr = girth(g)
    if not gr.at_least(2 * r + 1):
        raise GirthTooSmall(f"girth {gr} < {2 * r + 1} required for radius {r}")
    dist = g.distances_from(v)
    undirected: list[tuple[int, int]] = []
    directed: list[tuple[int, int]] = []
    for u, w in g.edges:
        du, dw = int(dist[u]), int(dist[w])
        if du > r or dw > r or (du == r and dw == r):
            undirected.append((int(u), int(w)))
        elif dw < du:
            directed.append((int(u), int(w)))
        elif du < dw:
            directed.append((int(w), int(u)))
        else:
            # equal distances below the sphere would close a short odd cycle
            raise AssertionError("girth precondition violated during orientation")
    mg = MixedGraph(g, undirected, directed, center=v, radius=r)
    for u in range(g.n):
        if len(mg.gamma_out[u]) > 1:
            raise AssertionError(f"vertex {u} has {len(mg.gamma_out[u])} outgoing edges")
    return mg


# ---------------------------------------------------------------------------
# Text format: first data line "n m", then m lines "u w" (0-based).
# Lines starting with '#' and blank lines are ignored.
# ---------------------------------------------------------------------------


def parse_graph(text: str) -> Graph:
    header: tuple[int, int] | None = None
    header_line = 0
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if header is None:
            if len(parts) != 2:
                raise GraphFormatError("expected header 'n m'", lineno)
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise GraphFormatError("header fields must be integers", lineno)
            header_line = lineno
            continue
        if len(parts) != 2:
            raise GraphFormatError("expected edge 'u w'", lineno)
        try:
            u, w = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError("edge endpoints must be integers", lineno)
        edges.append((u, w))
        if len(edges) > header[1]:
            raise GraphFormatError(f"more than {header[1]} edges listed", lineno)
    if header is None:
        raise GraphFormatError("empty graph file", 1)
    n, m = header
    if len(edges) != m:
        raise GraphFormatError(f"header promises {m} edges, found {len(edges)}", header_line)
    try:
        return Graph(n, edges)
    except ValueError as exc:
        raise GraphFormatError(str(exc), header_line)


def load_graph(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


def format_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {w}" for u, w in g.edges)
    return "\n".join(lines) + "\n"


def save_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_graph(g))


# ---------------------------------------------------------------------------
# Named generators
# ---------------------------------------------------------------------------


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    if n < 1:
        raise ValueError("path needs at least 1 vertex")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> Graph:
    """K_{1,leaves}: center is vertex 0."""
    if leaves < 1:
        raise ValueError("star needs at least 1 leaf")
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_tree(arity: int, depth: int) -> Graph:
    """Complete arity-ary tree of the given depth, root 0, level order."""
    if arity < 1 or depth < 0:
        raise ValueError("need arity >= 1 and depth >= 0")
    n = sum(arity**d for d in range(depth + 1))
    edges = [(int((k - 1) // arity), k) for k in range(1, n)]
    return Graph(n, edges)


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p) with a dedicated deterministic stream per (seed)."""
    if not 0 <= p <= 1:
        raise ValueError("edge probability must be in [0,1]")
    rng = stream(seed, 0, STREAM_GRAPH)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = rng.random(len(pairs)) < p
    return Graph(n, [e for e, keep in zip(pairs, mask) if keep])


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, outer + spokes + inner)


def make_graph(spec: str, seed: int = 0) -> Graph:
    """Build a named family from "name:arg:...": cycle:9, path:5, complete:4,
    star:3, tree:ARITY:DEPTH, er:N:P[:SEED], petersen."""
    parts = spec.split(":")
    name, args = parts[0], parts[1:]
    try:
        if name == "cycle":
            return cycle_graph(int(args[0]))
        if name == "path":
            return path_graph(int(args[0]))
        if name == "complete":
            return complete_graph(int(args[0]))
        if name == "star":
            return star_graph(int(args[0]))
        if name == "tree":
            return complete_tree(int(args[0]), int(args[1]))
        if name == "er":
            er_seed = int(args[2]) if len(args) > 2 else seed
            return erdos_renyi(int(args[0]), float(args[1]), er_seed)
        if name == "petersen":
            return petersen_graph()
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad generator spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown generator {name!r}")

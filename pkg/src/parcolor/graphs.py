"""Graph containers and construction: dual-CSR bipartite graphs, symmetric
adjacency graphs, Matrix Market ingestion and synthetic generation.

Both graph kinds are plain frozen dataclasses over numpy index arrays.  A
bipartite graph keeps two CSR views of the same edge set: net -> member
vertices and vertex -> incident nets.  Graphs are immutable after
construction (the arrays are marked read-only) and safe for concurrent
reads.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

ID_DTYPE = np.int32
OFF_DTYPE = np.int64


class GraphInvariantError(ValueError):
    """A graph failed one of its structural invariants."""


class MatrixMarketError(ValueError):
    """Matrix Market input was rejected; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class StructuralSymmetryError(ValueError):
    """The matrix pattern is not square/symmetric, naming the first bad pair."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _csr_from_entries(group_ids, item_ids, num_groups):
    """Group entries by group id, keeping entry order within each group."""
    counts = np.bincount(group_ids, minlength=num_groups)
    offsets = np.zeros(num_groups + 1, dtype=OFF_DTYPE)
    np.cumsum(counts, out=offsets[1:])
    order = np.argsort(group_ids, kind="stable")
    flat = np.asarray(item_ids, dtype=ID_DTYPE)[order]
    return offsets, flat


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Dual-CSR bipartite structure: vertices are colored, nets constrain.

    ``net_offsets``/``net_members`` list the member vertices of each net;
    ``vertex_offsets``/``vertex_nets`` list the nets incident to each vertex.
    Both views describe the same edge set.
    """

    num_vertices: int
    num_nets: int
    net_offsets: np.ndarray
    net_members: np.ndarray
    vertex_offsets: np.ndarray
    vertex_nets: np.ndarray

    def __post_init__(self):
        for a in (self.net_offsets, self.net_members,
                  self.vertex_offsets, self.vertex_nets):
            _freeze(a)

    @property
    def num_edges(self) -> int:
        return int(self.net_members.shape[0])

    def vtxs(self, net: int) -> np.ndarray:
        return self.net_members[self.net_offsets[net]:self.net_offsets[net + 1]]

    def nets(self, vertex: int) -> np.ndarray:
        return self.vertex_nets[self.vertex_offsets[vertex]:self.vertex_offsets[vertex + 1]]

    @staticmethod
    def from_entries(num_nets: int, num_vertices: int,
                     net_ids: Sequence[int], vertex_ids: Sequence[int],
                     dedup: bool = True) -> "BipartiteGraph":
        graph, _ = _build_bipartite(num_nets, num_vertices, net_ids, vertex_ids, dedup)
        return graph

    @staticmethod
    def from_net_lists(num_vertices: int,
                       nets: Iterable[Sequence[int]]) -> "BipartiteGraph":
        net_ids: list[int] = []
        vertex_ids: list[int] = []
        count = 0
        for count, members in enumerate(nets, start=1):
            net_ids.extend([count - 1] * len(members))
            vertex_ids.extend(members)
        return BipartiteGraph.from_entries(count, num_vertices, net_ids, vertex_ids)

    def edge_set(self) -> set[tuple[int, int]]:
        """All (net, vertex) pairs from the net-side view."""
        nets = np.repeat(np.arange(self.num_nets), np.diff(self.net_offsets))
        return set(zip(nets.tolist(), self.net_members.tolist()))

    def edge_set_from_vertices(self) -> set[tuple[int, int]]:
        """All (net, vertex) pairs from the vertex-side view."""
        vt = np.repeat(np.arange(self.num_vertices), np.diff(self.vertex_offsets))
        return set(zip(self.vertex_nets.tolist(), vt.tolist()))

    def validate(self) -> None:
        _check_offsets(self.net_offsets, self.num_nets, len(self.net_members), "net_offsets")
        _check_offsets(self.vertex_offsets, self.num_vertices, len(self.vertex_nets), "vertex_offsets")
        if self.net_members.size and (
                self.net_members.min() < 0 or self.net_members.max() >= self.num_vertices):
            raise GraphInvariantError("net member id out of range")
        if self.vertex_nets.size and (
                self.vertex_nets.min() < 0 or self.vertex_nets.max() >= self.num_nets):
            raise GraphInvariantError("vertex net id out of range")
        _check_no_duplicates(self.net_offsets, self.net_members, "net")
        _check_no_duplicates(self.vertex_offsets, self.vertex_nets, "vertex")
        if self.edge_set() != self.edge_set_from_vertices():
            raise GraphInvariantError("net view and vertex view disagree")


@dataclass(frozen=True, eq=False)
class UnipartiteGraph:
    """Symmetric adjacency CSR used by distance-2 coloring."""

    num_vertices: int
    offsets: np.ndarray
    adjacency: np.ndarray

    def __post_init__(self):
        _freeze(self.offsets)
        _freeze(self.adjacency)

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.shape[0]) // 2

    def nbor(self, vertex: int) -> np.ndarray:
        return self.adjacency[self.offsets[vertex]:self.offsets[vertex + 1]]

    @staticmethod
    def from_edges(num_vertices: int, u_ids: Sequence[int],
                   v_ids: Sequence[int]) -> "UnipartiteGraph":
        """Build a symmetric graph from undirected edge endpoints.

        Self loops are dropped, both directions are inserted, duplicates
        collapsed.
        """
        u = np.asarray(u_ids, dtype=np.int64)
        v = np.asarray(v_ids, dtype=np.int64)
        keep = u != v
        u, v = u[keep], v[keep]
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        if src.size:
            keys = src * num_vertices + dst
            _, first = np.unique(keys, return_index=True)
            first.sort()
            src, dst = src[first], dst[first]
        offsets, adjacency = _csr_from_entries(src, dst, num_vertices)
        return UnipartiteGraph(num_vertices, offsets, adjacency)

    def validate(self) -> None:
        _check_offsets(self.offsets, self.num_vertices, len(self.adjacency), "offsets")
        if self.adjacency.size and (
                self.adjacency.min() < 0 or self.adjacency.max() >= self.num_vertices):
            raise GraphInvariantError("neighbor id out of range")
        _check_no_duplicates(self.offsets, self.adjacency, "adjacency")
        src = np.repeat(np.arange(self.num_vertices, dtype=np.int64), np.diff(self.offsets))
        dst = self.adjacency.astype(np.int64)
        if np.any(src == dst):
            raise GraphInvariantError("self loop present")
        keys = np.sort(src * self.num_vertices + dst)
        mirror = np.sort(dst * self.num_vertices + src)
        if not np.array_equal(keys, mirror):
            raise GraphInvariantError("adjacency is not symmetric")


@dataclass(frozen=True)
class DegreeStats:
    """Degree summary used for marker sizing and color-bound checks.

    ``max_d2_degree_bound`` over-approximates the largest distance-2
    neighborhood: for a bipartite vertex u it is the sum over nets(u) of
    (net size - 1); for a unipartite vertex it additionally counts the
    direct neighbors themselves, since they constrain u as well.
    """

    max_net_size: int
    max_vertex_degree: int
    max_d2_degree_bound: int
    mean_net_size: float
    stddev_net_size: float


@dataclass(frozen=True)
class MtxMeta:
    """What the Matrix Market reader saw while building the graph."""

    rows: int
    cols: int
    declared_entries: int
    symmetry: str
    field: str
    entries_after_expansion: int
    duplicates_collapsed: int


def _check_offsets(off, n, flat_len, name):
    if len(off) != n + 1:
        raise GraphInvariantError(f"{name} has length {len(off)}, expected {n + 1}")
    if off[0] != 0 or off[-1] != flat_len:
        raise GraphInvariantError(f"{name} endpoints are wrong")
    if np.any(np.diff(off) < 0):
        raise GraphInvariantError(f"{name} not monotone")


def _check_no_duplicates(off, flat, what):
    groups = np.repeat(np.arange(len(off) - 1, dtype=np.int64), np.diff(off))
    if flat.size == 0:
        return
    keys = groups * (flat.max() + 1) + flat
    if len(np.unique(keys)) != len(keys):
        raise GraphInvariantError(f"duplicate entry in a {what} list")


def _build_bipartite(num_nets, num_vertices, net_ids, vertex_ids, dedup=True):
    net = np.asarray(net_ids, dtype=np.int64)
    vtx = np.asarray(vertex_ids, dtype=np.int64)
    if net.size and (net.min() < 0 or net.max() >= num_nets):
        raise GraphInvariantError("net id out of range")
    if vtx.size and (vtx.min() < 0 or vtx.max() >= num_vertices):
        raise GraphInvariantError("vertex id out of range")
    collapsed = 0
    if dedup and net.size:
        keys = net * num_vertices + vtx
        _, first = np.unique(keys, return_index=True)
        if len(first) != len(keys):
            collapsed = len(keys) - len(first)
            first.sort()
            net, vtx = net[first], vtx[first]
    net_offsets, net_members = _csr_from_entries(net, vtx, num_nets)
    vertex_offsets, vertex_nets = _csr_from_entries(vtx, net, num_vertices)
    graph = BipartiteGraph(num_vertices, num_nets, net_offsets, net_members,
                           vertex_offsets, vertex_nets)
    return graph, collapsed


_MM_FIELDS = {"real", "integer", "pattern", "complex"}
_TOKENS_PER_FIELD = {"pattern": 2, "real": 3, "integer": 3, "complex": 4}


def _open_text(source) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", errors="replace")
    if isinstance(source, io.TextIOBase) or hasattr(source, "readline"):
        return source
    raise TypeError(f"cannot read Matrix Market data from {type(source)!r}")


def load_matrix_market(source) -> BipartiteGraph:
    """Read a Matrix Market coordinate file as a bipartite graph.

    Rows become nets and columns become the vertices to color.  Values are
    ignored (pattern semantics: explicit zeros count as structural
    nonzeros).  Symmetric headers expand off-diagonal entries to both
    triangles.  Duplicate entries are collapsed silently; use
    :func:`load_matrix_market_with_meta` to see how many.
    """
    graph, _ = load_matrix_market_with_meta(source)
    return graph


def load_matrix_market_with_meta(source) -> tuple[BipartiteGraph, MtxMeta]:
    stream = _open_text(source)
    close = stream is not source
    try:
        return _parse_mtx(stream)
    finally:
        if close:
            stream.close()


def _parse_mtx(stream) -> tuple[BipartiteGraph, MtxMeta]:
    header = stream.readline()
    if not header:
        raise MatrixMarketError("empty input", line=1)
    tokens = header.strip().split()
    if len(tokens) != 5 or tokens[0].lower() not in ("%%matrixmarket",):
        raise MatrixMarketError("malformed MatrixMarket banner", line=1)
    _, obj, fmt, field, symmetry = (t.lower() for t in tokens)
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", line=1)
    if fmt != "coordinate":
        raise MatrixMarketError(f"unsupported format {fmt!r}: only coordinate is accepted", line=1)
    if field not in _MM_FIELDS:
        raise MatrixMarketError(f"unsupported field {field!r}", line=1)
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}", line=1)

    want_tokens = _TOKENS_PER_FIELD[field]
    rows = cols = nnz = -1
    net_ids: list[int] = []
    vtx_ids: list[int] = []
    seen = 0
    lineno = 1
    for raw in stream:
        lineno += 1
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        parts = line.split()
        if rows < 0:
            if len(parts) != 3:
                raise MatrixMarketError("size line must be 'rows cols entries'", line=lineno)
            try:
                rows, cols, nnz = (int(p) for p in parts)
            except ValueError:
                raise MatrixMarketError("size line must be three integers", line=lineno) from None
            if rows < 0 or cols < 0 or nnz < 0:
                raise MatrixMarketError("negative size", line=lineno)
            if symmetry == "symmetric" and rows != cols:
                raise MatrixMarketError("symmetric matrix must be square", line=lineno)
            continue
        if seen >= nnz:
            raise MatrixMarketError(f"more than the declared {nnz} entries", line=lineno)
        if len(parts) != want_tokens:
            raise MatrixMarketError(
                f"expected {want_tokens} tokens for field {field!r}, got {len(parts)}",
                line=lineno)
        try:
            i = int(parts[0])
            j = int(parts[1])
        except ValueError:
            raise MatrixMarketError("entry indices must be integers", line=lineno) from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise MatrixMarketError("index out of range", line=lineno)
        net_ids.append(i - 1)
        vtx_ids.append(j - 1)
        if symmetry == "symmetric" and i != j:
            net_ids.append(j - 1)
            vtx_ids.append(i - 1)
        seen += 1
    if rows < 0:
        raise MatrixMarketError("missing size line", line=lineno)
    if seen != nnz:
        raise MatrixMarketError(f"expected {nnz} entries, found {seen}", line=lineno)
    graph, collapsed = _build_bipartite(rows, cols, net_ids, vtx_ids)
    meta = MtxMeta(rows=rows, cols=cols, declared_entries=nnz, symmetry=symmetry,
                   field=field, entries_after_expansion=len(net_ids),
                   duplicates_collapsed=collapsed)
    return graph, meta


def write_matrix_market(graph: BipartiteGraph, target) -> None:
    """Write the pattern of a bipartite graph as coordinate/pattern/general."""
    stream = open(target, "w", encoding="utf-8") if isinstance(target, (str, Path)) else target
    close = stream is not target
    try:
        stream.write("%%MatrixMarket matrix coordinate pattern general\n")
        stream.write(f"{graph.num_nets} {graph.num_vertices} {graph.num_edges}\n")
        for v in range(graph.num_nets):
            for u in graph.vtxs(v):
                stream.write(f"{v + 1} {u + 1}\n")
    finally:
        if close:
            stream.close()


def to_unipartite(graph: BipartiteGraph) -> UnipartiteGraph:
    """Interpret a square, structurally symmetric pattern as an adjacency graph.

    The adjacency of vertex i is vtxs(net i) with the diagonal dropped.
    Raises :class:`StructuralSymmetryError` naming the first violating pair.
    """
    if graph.num_nets != graph.num_vertices:
        raise StructuralSymmetryError(
            f"pattern is {graph.num_nets}x{graph.num_vertices}, not square")
    n = graph.num_vertices
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(graph.net_offsets))
    cols = graph.net_members.astype(np.int64)
    keys = rows * n + cols
    mirror = cols * n + rows
    present = np.isin(mirror, keys)
    if not present.all():
        k = int(np.argmin(present))
        raise StructuralSymmetryError(
            f"entry ({int(rows[k])},{int(cols[k])}) has no symmetric mate")
    keep = rows != cols
    offsets, adjacency = _csr_from_entries(rows[keep], cols[keep], n)
    return UnipartiteGraph(n, offsets, adjacency)


def symmetrize(graph: BipartiteGraph) -> BipartiteGraph:
    """Union a square pattern with its transpose (diagonal dropped)."""
    if graph.num_nets != graph.num_vertices:
        raise StructuralSymmetryError("symmetrize needs a square pattern")
    rows = np.repeat(np.arange(graph.num_nets, dtype=np.int64), np.diff(graph.net_offsets))
    cols = graph.net_members.astype(np.int64)
    keep = rows != cols
    rows, cols = rows[keep], cols[keep]
    return BipartiteGraph.from_entries(
        graph.num_nets, graph.num_vertices,
        np.concatenate([rows, cols]), np.concatenate([cols, rows]))


def generate_random_bipartite(num_vertices: int, num_nets: int,
                              avg_net_size: int, seed: int) -> BipartiteGraph:
    """Deterministic random bipartite graph; every net draws ``avg_net_size``
    distinct member vertices.
    """
    if num_vertices <= 0 or num_nets <= 0 or avg_net_size <= 0:
        raise ValueError("all generator counts must be positive")
    if avg_net_size > num_vertices:
        raise ValueError("avg_net_size cannot exceed num_vertices")
    rng = np.random.default_rng(seed)
    k = int(avg_net_size)
    members = np.empty(num_nets * k, dtype=np.int64)
    if k > num_vertices // 2:
        # dense nets: rejection sampling degenerates, use partial shuffles
        for v in range(num_nets):
            members[v * k:(v + 1) * k] = rng.permutation(num_vertices)[:k]
    else:
        seen = np.zeros(num_vertices, dtype=np.int64)
        for v in range(num_nets):
            stamp = v + 1
            got = 0
            base = v * k
            while got < k:
                for d in rng.integers(0, num_vertices, size=k - got):
                    if seen[d] != stamp:
                        seen[d] = stamp
                        members[base + got] = d
                        got += 1
        del seen
    net_ids = np.repeat(np.arange(num_nets, dtype=np.int64), k)
    return BipartiteGraph.from_entries(num_nets, num_vertices, net_ids, members,
                                       dedup=False)


def _segment_sums(values_per_entry: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Per-group sums for CSR segments, robust to empty groups."""
    csum = np.zeros(len(values_per_entry) + 1, dtype=np.int64)
    np.cumsum(values_per_entry, out=csum[1:])
    return csum[offsets[1:]] - csum[offsets[:-1]]


def degree_stats(graph: BipartiteGraph | UnipartiteGraph) -> DegreeStats:
    if isinstance(graph, BipartiteGraph):
        net_sizes = np.diff(graph.net_offsets)
        vertex_degrees = np.diff(graph.vertex_offsets)
        contrib = (net_sizes - 1)[graph.vertex_nets]
        d2 = _segment_sums(contrib, graph.vertex_offsets)
        sizes = net_sizes
    else:
        degrees = np.diff(graph.offsets)
        contrib = (degrees - 1)[graph.adjacency]
        d2 = degrees + _segment_sums(contrib, graph.offsets)
        net_sizes = degrees
        vertex_degrees = degrees
        sizes = degrees
    return DegreeStats(
        max_net_size=int(net_sizes.max()) if net_sizes.size else 0,
        max_vertex_degree=int(vertex_degrees.max()) if vertex_degrees.size else 0,
        max_d2_degree_bound=int(d2.max()) if d2.size else 0,
        mean_net_size=float(sizes.mean()) if sizes.size else 0.0,
        stddev_net_size=float(sizes.std()) if sizes.size else 0.0,
    )

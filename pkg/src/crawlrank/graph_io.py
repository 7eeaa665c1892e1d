"""Partitioned edge-list files and modulo partitioning.

A graph lives on disk as one text file per worker. The file holds two
header lines, the count of vertices this worker owns and the count of
its out-edges, followed by one "<source> <dest>" row per edge. A vertex
is owned by worker ``id % workers``, and a partition may only carry
edges whose source it owns. Destinations can point anywhere.

The format is deliberately rigid (single spaces, LF line endings, a
trailing newline, no blank lines) so that emitting and re-parsing a
partition is byte-exact in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class FormatError(ValueError):
    """A partition file does not match the expected text format."""


class OwnershipError(ValueError):
    """An edge sits in a partition that does not own its source vertex."""


class ConsistencyError(ValueError):
    """Partition headers disagree with the vertices their edges identify."""


@dataclass
class GraphPartition:
    """One worker's share of a graph: owned vertices and their out-edges."""

    worker_index: int
    vertex_count: int
    edge_count: int
    edges: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class EdgeList:
    """A whole graph: every vertex id, plus (source, dest) pairs."""

    vertex_ids: set[int] = field(default_factory=set)
    edges: list[tuple[int, int]] = field(default_factory=list)


def assign_worker(vertex_id: int, workers: int) -> int:
    """Owning worker of a vertex: the vertex id modulo the worker count."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if vertex_id < 0:
        raise ValueError("vertex ids must be >= 0")
    return vertex_id % workers


def partition_path(base: str, worker_index: int) -> str:
    """File name for one worker's partition, 1-based suffix."""
    return f"{base}_{worker_index + 1}"


def _parse_int(token: str, line_no: int, what: str) -> int:
    if not token.isdigit():
        raise FormatError(f"line {line_no}: {what} must be a non-negative integer, got {token!r}")
    return int(token)


def parse_partition(text: str, worker_index: int, workers: int) -> GraphPartition:
    """Parse one partition file's text.

    Raises FormatError for malformed text (bad headers, bad rows, a
    header/body mismatch, duplicate rows, a missing final newline) and
    OwnershipError for rows whose source is owned by a different worker.
    Error messages carry the 1-based line number.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if not 0 <= worker_index < workers:
        raise ValueError(f"worker_index {worker_index} out of range for {workers} workers")
    lines = text.split("\n")
    if lines[-1] != "":
        raise FormatError(f"line {len(lines)}: file must end with a newline")
    lines.pop()
    if len(lines) < 2:
        raise FormatError("line 1: missing header lines (vertex count, edge count)")
    vertex_count = _parse_int(lines[0], 1, "vertex count")
    edge_count = _parse_int(lines[1], 2, "edge count")
    body = len(lines) - 2
    if body != edge_count:
        raise FormatError(f"line 2: header declares {edge_count} edges but {body} rows follow")
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    sources: set[int] = set()
    for line_no, row in enumerate(lines[2:], start=3):
        fields = row.split(" ")
        if len(fields) != 2:
            raise FormatError(f"line {line_no}: expected '<source> <dest>', got {row!r}")
        src = _parse_int(fields[0], line_no, "source")
        dst = _parse_int(fields[1], line_no, "dest")
        if src % workers != worker_index:
            raise OwnershipError(
                f"line {line_no}: source {src} is owned by worker {src % workers}, "
                f"not worker {worker_index}"
            )
        pair = (src, dst)
        if pair in seen:
            raise FormatError(f"line {line_no}: duplicate edge {src} {dst}")
        seen.add(pair)
        sources.add(src)
        edges.append(pair)
    if vertex_count < len(sources):
        raise FormatError(
            f"line 1: header declares {vertex_count} vertices but rows name "
            f"{len(sources)} distinct sources"
        )
    return GraphPartition(worker_index, vertex_count, edge_count, edges)


def emit_partition(partition: GraphPartition) -> str:
    """Render a partition back to its text form.

    Inverse of parse_partition: parse(emit(p)) == p, and emit(parse(t))
    reproduces t byte for byte.
    """
    if partition.edge_count != len(partition.edges):
        raise ValueError(
            f"edge_count {partition.edge_count} does not match {len(partition.edges)} edges"
        )
    pieces = [f"{partition.vertex_count}\n{partition.edge_count}\n"]
    pieces.extend(f"{src} {dst}\n" for src, dst in partition.edges)
    return "".join(pieces)


def partition_graph(graph: EdgeList, workers: int) -> list[GraphPartition]:
    """Split a whole graph into one partition per worker.

    Edges are deduplicated and sorted, then routed by source ownership.
    Every vertex id is counted toward its owner's header, including
    vertices with no out-edges.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    vertex_counts = [0] * workers
    for vid in graph.vertex_ids:
        vertex_counts[assign_worker(vid, workers)] += 1
    buckets: list[list[tuple[int, int]]] = [[] for _ in range(workers)]
    for src, dst in sorted(set(graph.edges)):
        buckets[src % workers].append((src, dst))
    return [
        GraphPartition(w, vertex_counts[w], len(buckets[w]), buckets[w])
        for w in range(workers)
    ]


def make_edge_list(edges, isolated=()) -> EdgeList:
    """Build an EdgeList whose vertex set covers every edge endpoint."""
    vertex_ids = set(isolated)
    for src, dst in edges:
        vertex_ids.add(src)
        vertex_ids.add(dst)
    return EdgeList(vertex_ids, list(edges))


def edge_list_from_partitions(partitions: list[GraphPartition]) -> EdgeList:
    """Reassemble a whole graph from one partition per worker.

    A vertex that never sources an edge has no row of its own; it is
    owned by ``id % workers`` and must be covered by that partition's
    vertex-count header. Headers are therefore checked against the
    vertex set the edges identify: a header smaller than that set means
    some destination has no declared home, a larger one counts vertices
    whose ids cannot be recovered. Either case raises ConsistencyError.
    Duplicate edges within a partition are collapsed, first one wins.
    """
    workers = len(partitions)
    if workers == 0:
        raise ValueError("need at least one partition")
    for expected, part in enumerate(partitions):
        if part.worker_index != expected:
            raise ConsistencyError(
                f"partition at position {expected} has worker_index {part.worker_index}"
            )
    owned: list[set[int]] = []
    edges: list[tuple[int, int]] = []
    for part in partitions:
        kept: list[tuple[int, int]] = []
        seen: set[tuple[int, int]] = set()
        sources: set[int] = set()
        for src, dst in part.edges:
            if src % workers != part.worker_index:
                raise OwnershipError(
                    f"edge ({src}, {dst}) in partition {part.worker_index}: "
                    f"source is owned by worker {src % workers}"
                )
            if (src, dst) in seen:
                continue
            seen.add((src, dst))
            sources.add(src)
            kept.append((src, dst))
        owned.append(sources)
        edges.extend(kept)
    for _src, dst in edges:
        owned[dst % workers].add(dst)
    vertex_ids: set[int] = set()
    for part, ids in zip(partitions, owned):
        if part.vertex_count != len(ids):
            if part.vertex_count < len(ids):
                unsourced = sorted(ids - {src for src, _ in part.edges})
                hint = (
                    f" (destination vertex {unsourced[0]} has no declared home)"
                    if unsourced
                    else ""
                )
                raise ConsistencyError(
                    f"partition {part.worker_index} declares {part.vertex_count} "
                    f"vertices but its edges identify {len(ids)}{hint}"
                )
            raise ConsistencyError(
                f"partition {part.worker_index} declares {part.vertex_count} vertices "
                f"but only {len(ids)} are identifiable from edges"
            )
        vertex_ids |= ids
    return EdgeList(vertex_ids, edges)

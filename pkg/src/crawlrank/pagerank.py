"""Damped link ranking over the bulk-synchronous engine.

Values are un-normalized: every vertex starts at ``init_value`` and
settles toward ``value = (1 - d) + d * sum(incoming)``, where each
in-neighbor contributes its own value divided by its out-degree. On a
graph without dangling vertices the values then always sum to the vertex
count. Convergence is judged through aggregator slot 0, which collects
the absolute value change of every vertex per superstep.

``power_iteration_oracle`` recomputes the same iterates without the
engine. It mirrors the engine's summation order on purpose, so the two
routes agree bit for bit and either one can check the other.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .bsp import EngineConfig, run
from .graph_io import EdgeList

DELTA_SLOT = 0


@dataclass(frozen=True)
class PageRankParams:
    damping: float = 0.85
    eps: float = 1e-6
    init_value: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must be strictly between 0 and 1")
        if self.eps < 0.0:
            raise ValueError("eps must be >= 0")


_DEFAULT_PARAMS = PageRankParams()


def pagerank_compute(ctx, messages, params: PageRankParams = _DEFAULT_PARAMS) -> None:
    """One vertex's compute step toward the damped rank fixed point.

    Superstep 0 seeds the vertex with init_value and fans it out. From
    superstep 1 on, the vertex sums its incoming contributions into a new
    value and accumulates ``|old - new|`` into slot 0. From superstep 2
    on it first checks the previous superstep's folded delta and votes to
    halt once that drops below eps; since every vertex reads the same
    global, they all halt in the same superstep and the run ends.

    A vertex without out-edges simply sends nothing. Its mass leaks out
    of the system, no division by zero and no redistribution.
    """
    if ctx.superstep_index == 0:
        value = params.init_value
    else:
        if ctx.superstep_index >= 2 and ctx.get_aggr_global(DELTA_SLOT) < params.eps:
            ctx.vote_to_halt()
            return
        total = 0.0
        for payload in messages:
            total += payload
        value = (1.0 - params.damping) + params.damping * total
        ctx.accumulate_aggr(DELTA_SLOT, abs(ctx.value - value))
    ctx.value = value
    degree = ctx.out_degree
    if degree > 0:
        ctx.send_message_to_all_neighbors(value / degree)


class PageRankProgram:
    """``pagerank_compute`` bound to a fixed parameter set, in the shape
    the engine expects of a vertex program."""

    def __init__(self, params: PageRankParams | None = None):
        self.params = params if params is not None else PageRankParams()

    def compute(self, ctx, messages) -> None:
        pagerank_compute(ctx, messages, self.params)


def run_pagerank(
    partitions,
    worker_count: int,
    params: PageRankParams | None = None,
    max_supersteps: int = 1000,
    trace=None,
):
    """Run the rank program over partitioned graph files. Returns a RunReport."""
    config = EngineConfig(worker_count=worker_count, max_supersteps=max_supersteps)
    return run(partitions, PageRankProgram(params), config, trace=trace)


def power_iteration_oracle(
    graph: EdgeList,
    params: PageRankParams | None = None,
    max_iters: int = 1000,
) -> dict[int, float]:
    """Plain Jacobi iteration of the same update rule, engine-free.

    Per-vertex sums run over in-neighbors in ascending id order and each
    sender's contribution is computed once per iteration, matching the
    engine's arithmetic exactly. Returns the first iterate whose summed
    absolute change falls below eps, or the max_iters-th iterate.
    """
    params = params if params is not None else PageRankParams()
    damping = params.damping
    base = 1.0 - damping
    edges = sorted(set(graph.edges))
    out_degree = dict.fromkeys(graph.vertex_ids, 0)
    for src, _dst in edges:
        out_degree[src] += 1
    in_neighbors: dict[int, list[int]] = {vid: [] for vid in graph.vertex_ids}
    for src, dst in edges:
        in_neighbors[dst].append(src)
    ids = sorted(graph.vertex_ids)
    values = dict.fromkeys(ids, params.init_value)
    for _ in range(max_iters):
        shares = {
            vid: values[vid] / out_degree[vid] for vid in ids if out_degree[vid] > 0
        }
        new_values = {}
        for vid in ids:
            total = 0.0
            for src in in_neighbors[vid]:
                total += shares[src]
            new_values[vid] = base + damping * total
        delta = 0.0
        for vid in ids:
            delta += abs(values[vid] - new_values[vid])
        values = new_values
        if delta < params.eps:
            break
    return values


def rank(values: dict[int, float]) -> list[tuple[int, float]]:
    """Vertices ranked by descending value; ties break toward smaller ids."""
    return sorted(values.items(), key=lambda item: (-item[1], item[0]))


def format_values(values: dict[int, float]) -> str:
    """Result text: one "<id>\\t<value>" line per vertex, ascending id,
    values at 15 significant digits."""
    return "".join(f"{vid}\t{values[vid]:.15g}\n" for vid in sorted(values))


def write_values(path, values: dict[int, float]) -> None:
    Path(path).write_text(format_values(values), encoding="ascii")

"""Vertex-centric bulk-synchronous graph execution.

A run advances in numbered supersteps. During superstep ``s`` the
engine calls ``program.compute(ctx, messages)`` once for every active
vertex, where ``messages`` holds exactly the payloads sent to that
vertex during superstep ``s - 1``. Everything a compute call emits,
outgoing messages and aggregator contributions alike, becomes visible
only after the barrier: messages arrive one superstep later, aggregator
globals hold the previous superstep's folded sum.

A vertex leaves the run by voting to halt and is woken again only by an
incoming message. The run ends at the first barrier where every vertex
is inactive and no messages are in flight (a natural halt), or when the
superstep cap is reached.

Execution is deterministic by construction regardless of worker count:
message lists are ordered by sending vertex id, and aggregator
contributions fold in ascending vertex-id order, so floating point
results are reproducible bit for bit.
"""

from __future__ import annotations

import heapq
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from operator import itemgetter
from typing import Callable, Protocol, Sequence

from . import graph_io


class ConfigurationError(ValueError):
    """The engine configuration does not fit its inputs."""


class ProgramError(RuntimeError):
    """A vertex program used the engine API outside its contract."""


@dataclass
class VertexState:
    """One vertex as the engine tracks it between supersteps."""

    id: int
    value: float
    out_edges: tuple[int, ...]
    active: bool = True


@dataclass(frozen=True)
class MessageEnvelope:
    """A single payload in flight from source to dest for one superstep."""

    dest: int
    source: int
    payload: float


@dataclass
class AggregatorSlot:
    """One global running sum.

    ``accumulated`` gathers this superstep's contributions and resets at
    every barrier; ``global_value`` is the folded sum from the previous
    superstep, the only part programs can read.
    """

    index: int
    accumulated: float = 0.0
    global_value: float = 0.0


@dataclass(frozen=True)
class EngineConfig:
    worker_count: int
    max_supersteps: int = 1000
    deterministic: bool = True
    aggregator_slots: int = 1

    def __post_init__(self):
        if self.worker_count < 1:
            raise ConfigurationError("worker_count must be >= 1")
        if self.max_supersteps < 1:
            raise ConfigurationError("max_supersteps must be >= 1")
        if self.aggregator_slots < 0:
            raise ConfigurationError("aggregator_slots must be >= 0")
        if not self.deterministic:
            raise ConfigurationError("only deterministic execution is supported")


@dataclass
class RunReport:
    """What a finished run looked like.

    supersteps_executed counts compute phases, so the last executed
    superstep had index supersteps_executed - 1. halted_naturally is
    False only when the superstep cap cut the run short.
    """

    supersteps_executed: int
    final_values: dict[int, float]
    halted_naturally: bool


class VertexProgram(Protocol):
    def compute(self, ctx: "VertexContext", messages: Sequence[float]) -> None: ...


_MISSING = object()


class VertexContext:
    """Handle through which a program reads and drives one vertex.

    Mutating operations are only meaningful inside a compute call; the
    engine hands the same context to every compute of a given vertex.
    """

    __slots__ = ("_runner", "_lane", "_state")

    def __init__(self, runner, lane, state):
        self._runner = runner
        self._lane = lane
        self._state = state

    @property
    def vertex_id(self) -> int:
        return self._state.id

    @property
    def superstep_index(self) -> int:
        """Index of the superstep currently executing, starting at 0."""
        return self._runner.superstep

    @property
    def value(self) -> float:
        return self._state.value

    @value.setter
    def value(self, new_value) -> None:
        self._state.value = float(new_value)

    @property
    def out_edges(self) -> tuple[int, ...]:
        return self._state.out_edges

    @property
    def out_degree(self) -> int:
        return len(self._state.out_edges)

    @property
    def worker_index(self) -> int:
        return self._lane.index

    def send_message_to_all_neighbors(self, payload) -> None:
        """Queue payload to every out-neighbor, delivered next superstep.

        On a vertex without out-edges this is a no-op. Repeated calls in
        one compute queue one payload per call per neighbor.
        """
        state = self._state
        if not state.out_edges:
            return
        payload = float(payload)
        outbox = self._lane.outbox
        current = outbox.get(state.id)
        if current is None:
            outbox[state.id] = payload
        elif type(current) is list:
            current.append(payload)
        else:
            outbox[state.id] = [current, payload]
            self._lane.has_multi = True

    def vote_to_halt(self) -> None:
        """Mark this vertex inactive; an incoming message wakes it again."""
        state = self._state
        if state.active:
            state.active = False
            self._lane.newly_halted += 1

    def accumulate_aggr(self, slot: int, value) -> None:
        """Add value into an aggregator; readable globally next superstep."""
        contribs = self._lane.contribs
        if not 0 <= slot < len(contribs):
            raise ProgramError(f"unknown aggregator slot {slot}")
        contribs[slot].append((self._state.id, float(value)))

    def get_aggr_global(self, slot: int) -> float:
        """Folded sum of the previous superstep's contributions (0.0 at start)."""
        slots = self._runner.slots
        if not 0 <= slot < len(slots):
            raise ProgramError(f"unknown aggregator slot {slot}")
        return slots[slot].global_value


class _Lane:
    """Per-worker working state for one superstep."""

    __slots__ = ("index", "vertex_ids", "outbox", "has_multi", "contribs", "newly_halted")

    def __init__(self, index: int, vertex_ids: list[int]):
        self.index = index
        self.vertex_ids = vertex_ids
        self.reset(0)

    def reset(self, slots: int) -> None:
        self.outbox = {}
        self.has_multi = False
        self.contribs = [[] for _ in range(slots)]
        self.newly_halted = 0


_by_owner = itemgetter(0)


class _Runner:
    def __init__(self, partitions, program, config):
        self.program = program
        self.config = config
        graph = graph_io.edge_list_from_partitions(list(partitions))
        out_edges: dict[int, list[int]] = {vid: [] for vid in graph.vertex_ids}
        for src, dst in graph.edges:
            out_edges[src].append(dst)
        self.vertices = {
            vid: VertexState(id=vid, value=0.0, out_edges=tuple(out_edges[vid]))
            for vid in sorted(graph.vertex_ids)
        }
        # In-neighbor lists are presorted by source id; together with the
        # source-keyed outbox this fixes the message order every compute sees.
        in_neighbors: dict[int, list[int]] = {vid: [] for vid in graph.vertex_ids}
        for src, dst in sorted(graph.edges):
            in_neighbors[dst].append(src)
        self.in_neighbors = {vid: tuple(nbrs) for vid, nbrs in in_neighbors.items()}
        self.potential_senders = sum(1 for st in self.vertices.values() if st.out_edges)
        workers = config.worker_count
        self.lanes = [
            _Lane(w, [vid for vid in self.vertices if vid % workers == w])
            for w in range(workers)
        ]
        self.contexts = {}
        for lane in self.lanes:
            for vid in lane.vertex_ids:
                self.contexts[vid] = VertexContext(self, lane, self.vertices[vid])
        self.slots = [AggregatorSlot(i) for i in range(config.aggregator_slots)]
        self.active_count = len(self.vertices)
        self.superstep = 0
        self.incoming: dict = {}
        self.incoming_full = False

    def execute(self, trace) -> RunReport:
        config = self.config
        pool = None
        if config.worker_count > 1 and self.vertices:
            pool = ThreadPoolExecutor(max_workers=config.worker_count)
        try:
            superstep = 0
            pending: dict = {}
            pending_multi = False
            while True:
                if pending and self.active_count < len(self.vertices):
                    self._reactivate(pending)
                if self.active_count == 0:
                    halted_naturally = True
                    break
                if superstep >= config.max_supersteps:
                    halted_naturally = False
                    break
                if trace is not None:
                    trace(f"superstep: {superstep}")
                self.superstep = superstep
                self.incoming = pending
                self.incoming_full = (
                    not pending_multi and len(pending) == self.potential_senders
                )
                for lane in self.lanes:
                    lane.reset(config.aggregator_slots)
                if pool is None:
                    for lane in self.lanes:
                        self._compute_lane(lane)
                else:
                    list(pool.map(self._compute_lane, self.lanes))
                # Barrier. Fold aggregators in ascending vertex-id order,
                # publish them, merge lane outboxes for the next superstep.
                for slot in self.slots:
                    folded = 0.0
                    streams = [lane.contribs[slot.index] for lane in self.lanes]
                    for _owner, value in heapq.merge(*streams, key=_by_owner):
                        folded += value
                    slot.accumulated = folded
                for slot in self.slots:
                    slot.global_value = slot.accumulated
                    slot.accumulated = 0.0
                merged: dict = {}
                pending_multi = False
                for lane in self.lanes:
                    merged.update(lane.outbox)
                    if lane.has_multi:
                        pending_multi = True
                    self.active_count -= lane.newly_halted
                pending = merged
                superstep += 1
            return RunReport(
                supersteps_executed=superstep,
                final_values={vid: st.value for vid, st in self.vertices.items()},
                halted_naturally=halted_naturally,
            )
        finally:
            if pool is not None:
                pool.shutdown()

    def _reactivate(self, pending) -> None:
        vertices = self.vertices
        for src in pending:
            for dst in vertices[src].out_edges:
                state = vertices[dst]
                if not state.active:
                    state.active = True
                    self.active_count += 1

    def _compute_lane(self, lane) -> None:
        vertices = self.vertices
        incoming = self.incoming
        in_neighbors = self.in_neighbors
        contexts = self.contexts
        compute = self.program.compute
        if self.incoming_full:
            # Every potential sender sent exactly one payload, so each
            # in-neighbor has exactly one entry: skip the lookups.
            for vid in lane.vertex_ids:
                if not vertices[vid].active:
                    continue
                compute(contexts[vid], [incoming[v] for v in in_neighbors[vid]])
            return
        get = incoming.get
        for vid in lane.vertex_ids:
            if not vertices[vid].active:
                continue
            messages: list[float] = []
            for src in in_neighbors[vid]:
                payload = get(src, _MISSING)
                if payload is _MISSING:
                    continue
                if type(payload) is list:
                    messages.extend(payload)
                else:
                    messages.append(payload)
            compute(contexts[vid], messages)


def run(
    partitions: Sequence[graph_io.GraphPartition],
    program: VertexProgram,
    config: EngineConfig,
    trace: Callable[[str], None] | None = None,
) -> RunReport:
    """Run a vertex program over a partitioned graph until it halts.

    There must be exactly one partition per configured worker, in worker
    order. ``trace``, when given, receives one "superstep: <n>" line per
    compute phase and a final "elapsed: <seconds>" line.

    Raises ConfigurationError for a partition/worker mismatch and the
    graph_io consistency errors for partitions that do not assemble into
    a well-formed graph.
    """
    if len(partitions) != config.worker_count:
        raise ConfigurationError(
            f"{len(partitions)} partitions given for worker_count {config.worker_count}"
        )
    started = time.perf_counter()
    report = _Runner(partitions, program, config).execute(trace)
    if trace is not None:
        trace(f"elapsed: {time.perf_counter() - started:.6f}")
    return report

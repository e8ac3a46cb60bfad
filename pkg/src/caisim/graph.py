"""Typed module graphs, implementation pools and the logical executor.

A system is a DAG of modules with typed ports. Every module owns a pool of
interchangeable implementations that differ in cost and quality; a mapping
picks exactly one per module. The executor does not run real models: it
propagates payload descriptors (size in bytes, accuracy in (0,1]) through the
graph. Bytes scale by the chosen implementation's ``output_scale``, accuracy
multiplies along single-input chains and combines as noisy-or at fusion
modules with two or more inputs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

DOMAINS = ("terrestrial", "aerial", "satellite")


@dataclass(frozen=True)
class Violation:
    """One validation finding; ``code`` is a stable machine-readable tag."""

    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class Port:
    name: str
    dtype: str


@dataclass(frozen=True)
class ModuleSpec:
    """A functional role in the system graph.

    ``input_ports`` is the ordered list of typed inputs; a module with no
    input ports is an entry module and receives the request payload directly.
    ``state_size`` is the number of bytes migrated when the module is moved
    to another node.
    """

    id: str
    name: str = ""
    input_ports: tuple[Port, ...] = ()
    output_type: str = "data"
    state_size: float = 0.0

    def __post_init__(self):
        if not self.id:
            raise ValueError("module id must be non-empty")
        ports = tuple(
            p if isinstance(p, Port) else Port(*p) for p in self.input_ports
        )
        object.__setattr__(self, "input_ports", ports)
        if not self.name:
            object.__setattr__(self, "name", self.id)
        if self.state_size < 0:
            raise ValueError(f"module {self.id}: state_size must be >= 0")

    @property
    def is_entry(self) -> bool:
        return not self.input_ports


@dataclass(frozen=True)
class Edge:
    """Directed connection: ``source``'s output feeds ``target``'s ``port``."""

    source: str
    target: str
    port: str


@dataclass(frozen=True)
class StructuralGraph:
    modules: tuple[ModuleSpec, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "modules", tuple(self.modules))
        object.__setattr__(
            self,
            "edges",
            tuple(e if isinstance(e, Edge) else Edge(*e) for e in self.edges),
        )

    def module_map(self) -> dict[str, ModuleSpec]:
        return {m.id: m for m in self.modules}

    def incoming(self, module_id: str) -> list[Edge]:
        """Edges into ``module_id``, in canonical (source id, port) order."""
        found = [e for e in self.edges if e.target == module_id]
        found.sort(key=lambda e: (e.source, e.port))
        return found

    def outgoing(self, module_id: str) -> list[Edge]:
        found = [e for e in self.edges if e.source == module_id]
        found.sort(key=lambda e: (e.target, e.port))
        return found

    def exit_module(self) -> str:
        """Id of the unique module without outgoing edges.

        Only meaningful on a validated graph; raises otherwise.
        """
        sources = {e.source for e in self.edges}
        exits = sorted(m.id for m in self.modules if m.id not in sources)
        if len(exits) != 1:
            raise ValueError(f"graph must have exactly one exit module, found {exits}")
        return exits[0]


@dataclass(frozen=True)
class Implementation:
    """One concrete realization of a module.

    ``compute_demand`` is giga-op per request, ``memory_required`` MB,
    ``accuracy_factor`` the multiplicative quality in (0,1], ``output_scale``
    the ratio of output bytes to the sum of input bytes. ``domain_affinity``
    optionally restricts hosting to a set of node domains.
    """

    id: str
    module_id: str
    compute_demand: float
    memory_required: float = 0.0
    accuracy_factor: float = 1.0
    output_scale: float = 1.0
    domain_affinity: frozenset[str] | None = None

    def __post_init__(self):
        if self.compute_demand < 0:
            raise ValueError(f"implementation {self.id}: compute_demand must be >= 0")
        if self.memory_required < 0:
            raise ValueError(f"implementation {self.id}: memory_required must be >= 0")
        if not (0.0 < self.accuracy_factor <= 1.0):
            raise ValueError(
                f"implementation {self.id}: accuracy_factor must be in (0, 1]"
            )
        if self.output_scale <= 0:
            raise ValueError(f"implementation {self.id}: output_scale must be > 0")
        if self.domain_affinity is not None:
            aff = frozenset(self.domain_affinity)
            unknown = aff - set(DOMAINS)
            if unknown:
                raise ValueError(
                    f"implementation {self.id}: unknown domains {sorted(unknown)}"
                )
            object.__setattr__(self, "domain_affinity", aff)


@dataclass(frozen=True)
class ImplementationPool:
    module_id: str
    implementations: tuple[Implementation, ...]

    def __post_init__(self):
        object.__setattr__(self, "implementations", tuple(self.implementations))
        if not self.implementations:
            raise ValueError(f"pool for {self.module_id} must be non-empty")
        ids = [i.id for i in self.implementations]
        if len(set(ids)) != len(ids):
            raise ValueError(f"pool for {self.module_id} has duplicate implementation ids")
        for impl in self.implementations:
            if impl.module_id != self.module_id:
                raise ValueError(
                    f"pool for {self.module_id} contains implementation "
                    f"{impl.id} owned by {impl.module_id}"
                )

    def get(self, impl_id: str) -> Implementation:
        for impl in self.implementations:
            if impl.id == impl_id:
                return impl
        raise KeyError(impl_id)


@dataclass(frozen=True)
class Mapping:
    """Choice of one implementation id per module id."""

    choices: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "choices", dict(self.choices))


@dataclass(frozen=True)
class Payload:
    """Descriptor of data moving through the graph: bytes plus a quality score."""

    size: float
    accuracy: float = 1.0

    def __post_init__(self):
        if self.size < 0:
            raise ValueError("payload size must be >= 0")
        if not (0.0 < self.accuracy <= 1.0):
            raise ValueError("payload accuracy must be in (0, 1]")


@dataclass(frozen=True)
class TraceRecord:
    module_id: str
    input_bytes: float
    output_bytes: float
    accuracy: float


def validate_graph(graph: StructuralGraph) -> list[Violation]:
    """Check all structural invariants; an empty report means the graph is valid.

    Violations are data, not exceptions: each finding names the offending
    module or edge and carries a stable code.
    """
    out: list[Violation] = []
    seen: set[str] = set()
    for m in graph.modules:
        if m.id in seen:
            out.append(Violation("DUP_MODULE", f"duplicate module id {m.id}"))
        seen.add(m.id)
        port_names = [p.name for p in m.input_ports]
        for name in sorted(set(n for n in port_names if port_names.count(n) > 1)):
            out.append(Violation("DUP_PORT", f"module {m.id}: duplicate port {name}"))

    modules = graph.module_map()
    good_edges: list[Edge] = []
    for e in sorted(graph.edges, key=lambda e: (e.source, e.target, e.port)):
        ok = True
        for mid in (e.source, e.target):
            if mid not in modules:
                out.append(
                    Violation("UNKNOWN_MODULE", f"edge {e.source}→{e.target} references unknown module {mid}")
                )
                ok = False
        if not ok:
            continue
        target = modules[e.target]
        port = next((p for p in target.input_ports if p.name == e.port), None)
        if port is None:
            out.append(
                Violation("UNKNOWN_PORT", f"edge {e.source}→{e.target}: module {e.target} has no port {e.port}")
            )
            continue
        source = modules[e.source]
        if source.output_type != port.dtype:
            out.append(
                Violation(
                    "TYPE_MISMATCH",
                    f"type mismatch on edge {e.source}→{e.target}: output "
                    f"'{source.output_type}' feeds port '{port.name}' of type '{port.dtype}'",
                )
            )
        good_edges.append(e)

    # Every non-entry input port is fed by exactly one edge.
    for m in graph.modules:
        for p in m.input_ports:
            feeders = [e for e in good_edges if e.target == m.id and e.port == p.name]
            if not feeders:
                out.append(Violation("PORT_UNBOUND", f"module {m.id}: port {p.name} has no incoming edge"))
            elif len(feeders) > 1:
                out.append(
                    Violation("PORT_CONFLICT", f"module {m.id}: port {p.name} has {len(feeders)} incoming edges")
                )

    cyclic = _cycle_members(set(modules), good_edges)
    if cyclic:
        out.append(Violation("CYCLE", "cycle: " + ",".join(sorted(cyclic))))

    if not cyclic and modules:
        sources = {e.source for e in good_edges}
        exits = sorted(mid for mid in modules if mid not in sources)
        if not exits:
            out.append(Violation("NO_EXIT", "graph has no exit module"))
        elif len(exits) > 1:
            out.append(Violation("MULTI_EXIT", "multiple exit modules: " + ",".join(exits)))
    return out


def _cycle_members(ids: set[str], edges: list[Edge]) -> set[str]:
    # Trim nodes with no incoming, then no outgoing, until stable; what
    # survives lies on a directed cycle.
    remaining = set(ids)
    changed = True
    while changed and remaining:
        changed = False
        incoming = {mid: 0 for mid in remaining}
        outgoing = {mid: 0 for mid in remaining}
        for e in edges:
            if e.source in remaining and e.target in remaining:
                incoming[e.target] += 1
                outgoing[e.source] += 1
        drop = {mid for mid in remaining if incoming[mid] == 0 or outgoing[mid] == 0}
        if drop:
            remaining -= drop
            changed = True
    return remaining


def topological_order(graph: StructuralGraph) -> list[str]:
    """Module ids ordered so every edge goes forward; ties resolve by id."""
    report = validate_graph(graph)
    if any(v.code == "CYCLE" for v in report):
        raise ValueError("cycle detected")
    indeg = {m.id: 0 for m in graph.modules}
    succ: dict[str, list[str]] = {m.id: [] for m in graph.modules}
    for e in graph.edges:
        indeg[e.target] += 1
        succ[e.source].append(e.target)
    ready = sorted(mid for mid, d in indeg.items() if d == 0)
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        mid = heapq.heappop(ready)
        order.append(mid)
        for nxt in succ[mid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(order) != len(graph.modules):
        raise ValueError("cycle detected")
    return order


def validate_mapping(
    graph: StructuralGraph,
    pools: list[ImplementationPool] | tuple[ImplementationPool, ...],
    mapping: Mapping,
) -> list[Violation]:
    """Empty iff the mapping is total over the modules and each choice is in the module's pool."""
    out: list[Violation] = []
    by_module = {p.module_id: p for p in pools}
    for m in graph.modules:
        if m.id not in mapping.choices:
            out.append(Violation("UNMAPPED_MODULE", f"unmapped module {m.id}"))
            continue
        choice = mapping.choices[m.id]
        pool = by_module.get(m.id)
        if pool is None:
            out.append(Violation("MISSING_POOL", f"module {m.id} has no implementation pool"))
        elif all(impl.id != choice for impl in pool.implementations):
            out.append(
                Violation("NOT_IN_POOL", f"choice {choice} for module {m.id} is not in its pool")
            )
    known = {m.id for m in graph.modules}
    for mid in sorted(mapping.choices):
        if mid not in known:
            out.append(Violation("UNKNOWN_MODULE", f"mapping references unknown module {mid}"))
    return out


def execute(
    graph: StructuralGraph,
    pools: list[ImplementationPool] | tuple[ImplementationPool, ...],
    mapping: Mapping,
    payload: Payload,
) -> tuple[Payload, list[TraceRecord]]:
    """Propagate a payload through the graph under the given mapping.

    Modules are evaluated in topological order. Per module the output byte
    count is the sum of incoming bytes times the implementation's
    ``output_scale``; accuracy is the incoming accuracy times
    ``accuracy_factor`` for single-input modules, and the noisy-or
    ``1 - prod(1 - a_k)`` of the incoming accuracies (times the factor) for
    fusion modules. Entry modules receive the request payload directly.

    Returns the exit module's payload and one trace record per module.
    """
    problems = validate_graph(graph)
    if problems:
        raise ValueError("invalid graph: " + "; ".join(str(v) for v in problems))
    problems = validate_mapping(graph, pools, mapping)
    if problems:
        raise ValueError("invalid mapping: " + "; ".join(str(v) for v in problems))

    by_module = {p.module_id: p for p in pools}
    order = topological_order(graph)
    out_bytes: dict[str, float] = {}
    out_acc: dict[str, float] = {}
    trace: list[TraceRecord] = []
    for mid in order:
        impl = by_module[mid].get(mapping.choices[mid])
        incoming = graph.incoming(mid)
        if not incoming:
            in_bytes = payload.size
            in_acc = payload.accuracy
        else:
            in_bytes = 0.0
            for e in incoming:
                in_bytes += out_bytes[e.source]
            if len(incoming) == 1:
                in_acc = out_acc[incoming[0].source]
            else:
                miss = 1.0
                for e in incoming:
                    miss *= 1.0 - out_acc[e.source]
                in_acc = 1.0 - miss
        out_bytes[mid] = in_bytes * impl.output_scale
        out_acc[mid] = in_acc * impl.accuracy_factor
        trace.append(TraceRecord(mid, in_bytes, out_bytes[mid], out_acc[mid]))
    exit_id = order[-1]
    return Payload(out_bytes[exit_id], out_acc[exit_id]), trace

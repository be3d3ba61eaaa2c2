"""Labeled graphs, edit operations and cost evaluation.

Edges are undirected and stored once under the key ``(min(u, v), max(u, v))``.
Implied edge costs follow the second-endpoint rule: an edge is charged when
the later of its two endpoints is resolved by a vertex operation, so every
edge of either graph is charged exactly once along a complete path.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from fastged.errors import (
    InvalidGraphError,
    InvalidMappingError,
    InvalidOperationError,
    InvalidPathError,
)

Label = str

DEFAULT_EDGE_LABEL: Label = "—"
COST_TOL = 1e-9


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Simple undirected graph with vertex and edge labels.

    ``edges`` accepts a mapping ``{(u, v): label}`` or an iterable of
    ``(u, v)`` / ``(u, v, label)`` tuples. Equality ignores ``name``.
    """

    labels: tuple[Label, ...]
    edges: Mapping[tuple[int, int], Label] = field(default_factory=dict)
    name: str | None = None

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        raw = self.edges.items() if isinstance(self.edges, Mapping) else self.edges
        n = len(labels)
        edges: dict[tuple[int, int], Label] = {}
        adj: list[dict[int, Label]] = [{} for _ in range(n)]
        for item in raw:
            if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], tuple):
                (u, v), lab = item
            elif len(item) == 3:
                u, v, lab = item
            elif len(item) == 2:
                (u, v), lab = item, DEFAULT_EDGE_LABEL
            else:
                raise InvalidGraphError(f"bad edge spec {item!r}")
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidGraphError(f"edge ({u}, {v}) references a missing vertex (n={n})")
            if u == v:
                raise InvalidGraphError(f"self-loop on vertex {u}")
            key = _edge_key(u, v)
            if key in edges:
                raise InvalidGraphError(f"duplicate edge {key}")
            lab = DEFAULT_EDGE_LABEL if lab is None else str(lab)
            edges[key] = lab
            adj[u][v] = lab
            adj[v][u] = lab
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "edges", dict(sorted(edges.items())))
        object.__setattr__(self, "_adj", tuple(adj))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_label(self, u: int, v: int) -> Label | None:
        return self._adj[u].get(v)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def neighbors(self, v: int) -> Mapping[int, Label]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def __eq__(self, other):
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return self.labels == other.labels and self.edges == other.edges

    def __hash__(self):
        return hash((self.labels, frozenset(self.edges.items())))

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"<LabeledGraph{tag} n={self.n} m={self.m}>"


@dataclass(frozen=True)
class CostModel:
    """Edit costs. Substituting equal labels is always free."""

    vsub: float = 2.0
    vdel: float = 4.0
    vins: float = 4.0
    esub: float = 1.0
    edel: float = 2.0
    eins: float = 2.0

    def __post_init__(self):
        for name in ("vsub", "vdel", "vins", "esub", "edel", "eins"):
            val = float(getattr(self, name))
            if not (val >= 0 and val < float("inf")):
                raise ValueError(f"cost {name} must be finite and >= 0, got {val}")
            object.__setattr__(self, name, val)

    @classmethod
    def preset(cls, name: str) -> CostModel:
        try:
            return cls(*PRESETS[name])
        except KeyError:
            raise ValueError(f"unknown cost preset {name!r}; choose from {sorted(PRESETS)}") from None

    @classmethod
    def parse(cls, text: str) -> CostModel:
        """Parse a preset name or ``"vsub,vdel,vins,esub,edel,eins"``."""
        text = text.strip()
        if text in PRESETS:
            return cls.preset(text)
        parts = [p for p in text.split(",") if p.strip()]
        if len(parts) != 6:
            raise ValueError(f"expected six comma-separated costs or a preset name, got {text!r}")
        return cls(*(float(p) for p in parts))

    def as_tuple(self) -> tuple[float, ...]:
        return (self.vsub, self.vdel, self.vins, self.esub, self.edel, self.eins)

    @property
    def is_integral(self) -> bool:
        return all(float(c).is_integer() for c in self.as_tuple())

    def vertex_sub(self, a: Label, b: Label) -> float:
        return 0.0 if a == b else self.vsub

    def edge_sub(self, a: Label, b: Label) -> float:
        return 0.0 if a == b else self.esub


PRESETS = {
    "default": (2, 4, 4, 1, 2, 2),
    "setting1": (2, 4, 4, 1, 2, 2),
    "uniform": (1, 2, 2, 1, 2, 2),
    "setting2": (4, 12, 12, 1, 10, 10),
}


@dataclass(frozen=True, order=True)
class EditOp:
    """A vertex operation. ``u is None`` deletes ``v``; ``v is None`` inserts ``u``."""

    v: int | None
    u: int | None

    def __post_init__(self):
        if self.v is None and self.u is None:
            raise InvalidOperationError("an edit op needs at least one vertex")

    @classmethod
    def sub(cls, v: int, u: int) -> EditOp:
        return cls(v, u)

    @classmethod
    def delete(cls, v: int) -> EditOp:
        return cls(v, None)

    @classmethod
    def insert(cls, u: int) -> EditOp:
        return cls(None, u)

    @property
    def kind(self) -> str:
        if self.v is None:
            return "insert"
        if self.u is None:
            return "delete"
        return "substitute"

    def __str__(self):
        a = "eps" if self.v is None else f"v{self.v}"
        b = "eps" if self.u is None else f"u{self.u}"
        return f"{a}->{b}"


@dataclass(frozen=True)
class EditPath:
    ops: tuple[EditOp, ...] = ()
    total_cost: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "total_cost", float(self.total_cost))

    def __len__(self):
        return len(self.ops)

    def forward_map(self) -> dict[int, int | None]:
        """g1 vertex -> g2 vertex (``None`` when deleted)."""
        return {op.v: op.u for op in self.ops if op.v is not None}

    def is_complete(self, n1: int, n2: int) -> bool:
        fm = self.forward_map()
        used = {op.u for op in self.ops if op.u is not None}
        return len(fm) == n1 and len(used) == n2

    def to_json(self) -> list[list[int | None]]:
        return [[op.v, op.u] for op in self.ops]


def _check_op(op: EditOp, g1: LabeledGraph, g2: LabeledGraph) -> None:
    if op.v is not None and not (0 <= op.v < g1.n):
        raise InvalidOperationError(f"{op}: g1 vertex out of range (n1={g1.n})")
    if op.u is not None and not (0 <= op.u < g2.n):
        raise InvalidOperationError(f"{op}: g2 vertex out of range (n2={g2.n})")


def check_path(ops: Iterable[EditOp], g1: LabeledGraph, g2: LabeledGraph) -> None:
    """Raise InvalidPathError if a vertex is used twice or an index is invalid."""
    seen1: set[int] = set()
    seen2: set[int] = set()
    for op in ops:
        try:
            _check_op(op, g1, g2)
        except InvalidOperationError as exc:
            raise InvalidPathError(str(exc)) from None
        if op.v is not None:
            if op.v in seen1:
                raise InvalidPathError(f"g1 vertex {op.v} used twice")
            seen1.add(op.v)
        if op.u is not None:
            if op.u in seen2:
                raise InvalidPathError(f"g2 vertex {op.u} used twice")
            seen2.add(op.u)


def op_cost(op: EditOp, g1: LabeledGraph, g2: LabeledGraph, cm: CostModel) -> float:
    """Vertex part of an operation's cost; implied edges are charged separately."""
    _check_op(op, g1, g2)
    if op.v is None:
        return cm.vins
    if op.u is None:
        return cm.vdel
    return cm.vertex_sub(g1.labels[op.v], g2.labels[op.u])


def edge_events(ops: Sequence[EditOp], g1: LabeledGraph, g2: LabeledGraph, cm: CostModel):
    """Charged edge events of a (possibly partial) path.

    Returns ``(counts, cost)`` where counts has keys ``sub``, ``del`` and ``ins``.
    An edge is charged only when both of its endpoints are resolved.
    """
    fwd = {op.v: op.u for op in ops if op.v is not None}
    back = {op.u: op.v for op in ops if op.u is not None}
    counts: Counter = Counter()
    cost = 0.0
    for (a, b), lab in g1.edges.items():
        if a not in fwd or b not in fwd:
            continue
        x, y = fwd[a], fwd[b]
        lab2 = None if x is None or y is None else g2.edge_label(x, y)
        if lab2 is None:
            counts["del"] += 1
            cost += cm.edel
        else:
            counts["sub"] += 1
            cost += cm.edge_sub(lab, lab2)
    for (x, y) in g2.edges:
        if x not in back or y not in back:
            continue
        p, q = back[x], back[y]
        if p is None or q is None or not g1.has_edge(p, q):
            counts["ins"] += 1
            cost += cm.eins
    return counts, cost


def path_cost(path: EditPath | Sequence[EditOp], g1: LabeledGraph, g2: LabeledGraph,
              cm: CostModel) -> float:
    """Recompute a path's cost from scratch (vertex ops plus implied edges)."""
    ops = path.ops if isinstance(path, EditPath) else tuple(path)
    check_path(ops, g1, g2)
    total = sum(op_cost(op, g1, g2, cm) for op in ops)
    _, ecost = edge_events(ops, g1, g2, cm)
    return total + ecost


def vertex_origins(n1: int, ops: Sequence[EditOp]) -> list[tuple[int | None, int | None]]:
    """Layout of the graph produced by applying ``ops`` to a graph with ``n1`` vertices.

    Entry ``i`` is ``(g1 vertex or None, g2 vertex or None)`` for result vertex ``i``:
    surviving g1 vertices come first in g1 order, then inserted vertices in op order.
    """
    fwd = {op.v: op.u for op in ops if op.v is not None}
    out: list[tuple[int | None, int | None]] = []
    for v in range(n1):
        if v in fwd:
            if fwd[v] is not None:
                out.append((v, fwd[v]))
        else:
            out.append((v, None))
    out.extend((None, op.u) for op in ops if op.v is None)
    return out


def apply_edit_path(g1: LabeledGraph, path: EditPath, g2: LabeledGraph,
                    prefix_len: int | None = None) -> LabeledGraph:
    """Graph obtained after applying the first ``prefix_len`` operations.

    Resolved vertices carry their g2 label and edges between two resolved
    vertices take their g2 state; unresolved g1 vertices keep their label and
    their edges to each other and to substituted vertices. Vertex order is
    given by :func:`vertex_origins`.
    """
    if prefix_len is None:
        prefix_len = len(path.ops)
    if not 0 <= prefix_len <= len(path.ops):
        raise IndexError(f"prefix_len {prefix_len} outside [0, {len(path.ops)}]")
    ops = path.ops[:prefix_len]
    check_path(path.ops, g1, g2)
    origins = vertex_origins(g1.n, ops)
    labels = [g2.labels[u] if u is not None else g1.labels[v] for v, u in origins]
    edges: dict[tuple[int, int], Label] = {}
    for i in range(len(origins)):
        vi, ui = origins[i]
        for j in range(i + 1, len(origins)):
            vj, uj = origins[j]
            if ui is not None and uj is not None:
                lab = g2.edge_label(ui, uj)
            elif vi is not None and vj is not None:
                lab = g1.edge_label(vi, vj)
            else:
                lab = None
            if lab is not None:
                edges[(i, j)] = lab
    return LabeledGraph(labels, edges)


def target_mapping(g1: LabeledGraph, path: EditPath, g2: LabeledGraph) -> dict[int, int]:
    """For a complete path: result-vertex index -> g2 vertex index."""
    if not path.is_complete(g1.n, g2.n):
        raise InvalidPathError("target mapping needs a complete path")
    return {i: u for i, (_, u) in enumerate(vertex_origins(g1.n, path.ops))}


def graphs_equal_under_mapping(a: LabeledGraph, b: LabeledGraph,
                               mapping: Mapping[int, int] | Sequence[int]) -> bool:
    """True iff ``mapping`` (a-index -> b-index) is a label- and edge-preserving bijection."""
    if not isinstance(mapping, Mapping):
        mapping = dict(enumerate(mapping))
    if (sorted(mapping) != list(range(a.n))
            or sorted(mapping.values()) != list(range(b.n))):
        raise InvalidMappingError(
            f"mapping is not a bijection between {a.n} and {b.n} vertices")
    if a.m != b.m:
        return False
    if any(a.labels[i] != b.labels[mapping[i]] for i in range(a.n)):
        return False
    return all(b.edge_label(mapping[x], mapping[y]) == lab for (x, y), lab in a.edges.items())

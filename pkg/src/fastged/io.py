"""Graph parsers, serializers, dataset loading and random generation."""

from __future__ import annotations

import csv
import json
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from fastged.errors import DatasetError, InvalidGraphError, ParseError
from fastged.graph import DEFAULT_EDGE_LABEL, Label, LabeledGraph

log = logging.getLogger(__name__)

GRAPH_SUFFIXES = (".gxl", ".json")


# -- GXL ---------------------------------------------------------------------

def _attr_label(elem: ET.Element) -> Label | None:
    attrs = []
    for attr in elem.findall("attr"):
        value = next(iter(attr), None)
        text = (value.text if value is not None else attr.text) or ""
        attrs.append((attr.get("name", ""), text.strip()))
    if not attrs:
        return None
    if len(attrs) == 1:
        return attrs[0][1]
    return ";".join(f"{k}={v}" for k, v in sorted(attrs))


def parse_gxl(data: bytes | str, source: str | None = None) -> LabeledGraph:
    """Parse the GXL subset used by the IAM graph repository.

    Node and edge labels come from their ``attr`` children (several
    attributes are folded into one sorted ``name=value`` label). Edge
    direction is ignored.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed XML at line {line}, column {col}", source) from None
    graph = root if root.tag == "graph" else root.find("graph")
    if graph is None:
        raise ParseError("no <graph> element", source)

    index: dict[str, int] = {}
    labels: list[Label] = []
    for pos, node in enumerate(graph.findall("node")):
        nid = node.get("id")
        if nid is None:
            raise ParseError(f"<node> #{pos} has no id", source)
        if nid in index:
            raise ParseError(f"duplicate node id {nid!r}", source)
        index[nid] = len(labels)
        lab = _attr_label(node)
        labels.append(DEFAULT_EDGE_LABEL if lab is None else lab)

    edges: dict[tuple[int, int], Label] = {}
    for pos, edge in enumerate(graph.findall("edge")):
        a, b = edge.get("from"), edge.get("to")
        where = f"<edge> #{pos} ({a!r} -> {b!r})"
        if a not in index or b not in index:
            raise ParseError(f"{where} references an undeclared node", source)
        u, v = index[a], index[b]
        if u == v:
            raise ParseError(f"{where} is a self-loop", source)
        key = (min(u, v), max(u, v))
        if key in edges:
            raise ParseError(f"{where} duplicates an existing edge", source)
        lab = _attr_label(edge)
        edges[key] = DEFAULT_EDGE_LABEL if lab is None else lab
    return LabeledGraph(labels, edges, name=graph.get("id"))


# -- JSON --------------------------------------------------------------------

def parse_json_graph(data: bytes | str, source: str | None = None) -> LabeledGraph:
    try:
        doc = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"invalid JSON: {exc}", source) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", source)
    if "vertices" not in doc:
        raise ParseError("missing field 'vertices'", source)
    verts = doc["vertices"]
    if not isinstance(verts, list):
        raise ParseError("'vertices' must be a list", source)
    labels = []
    for i, vert in enumerate(verts):
        if not isinstance(vert, dict) or "label" not in vert:
            raise ParseError(f"vertices[{i}].label is missing", source)
        labels.append(str(vert["label"]))
    edges = []
    for i, e in enumerate(doc.get("edges", [])):
        if not isinstance(e, dict):
            raise ParseError(f"edges[{i}] must be an object", source)
        for key in ("u", "v"):
            if not isinstance(e.get(key), int) or isinstance(e.get(key), bool):
                raise ParseError(f"edges[{i}].{key} must be an integer", source)
        if e["u"] == e["v"]:
            raise ParseError(f"edges[{i}] is a self-loop on vertex {e['u']}", source)
        if e["u"] > e["v"]:
            raise ParseError(f"edges[{i}] must satisfy u < v", source)
        edges.append((e["u"], e["v"], e.get("label", DEFAULT_EDGE_LABEL)))
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ParseError("'name' must be a string", source)
    try:
        return LabeledGraph(labels, edges, name=name)
    except InvalidGraphError as exc:
        raise ParseError(str(exc), source) from None


def graph_to_dict(g: LabeledGraph) -> dict:
    doc: dict = {}
    if g.name is not None:
        doc["name"] = g.name
    doc["vertices"] = [{"label": lab} for lab in g.labels]
    doc["edges"] = [{"u": u, "v": v, "label": lab} for (u, v), lab in g.edges.items()]
    return doc


def emit_json_graph(g: LabeledGraph) -> bytes:
    return (json.dumps(graph_to_dict(g), ensure_ascii=False) + "\n").encode("utf-8")


def read_graph(path: str | Path) -> LabeledGraph:
    """Read a .gxl or .json file; the file stem names graphs that carry no name."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read: {exc.strerror}", str(path)) from None
    if path.suffix.lower() == ".gxl":
        g = parse_gxl(data, str(path))
    else:
        g = parse_json_graph(data, str(path))
    if g.name is None:
        g = LabeledGraph(g.labels, g.edges, name=path.stem)
    return g


def write_graph(g: LabeledGraph, path: str | Path) -> None:
    Path(path).write_bytes(emit_json_graph(g))


# -- random graphs -----------------------------------------------------------

@dataclass(frozen=True)
class GenSpec:
    """Erdős–Rényi G(n, p) with uniformly drawn labels.

    Draws come from numpy's PCG64 seeded with ``seed``: vertex labels first,
    then one uniform per vertex pair in lexicographic ``(i < j)`` order, then
    the labels of the kept edges.
    """

    n: int
    density: float
    vertex_alphabet: tuple[Label, ...] = ("A",)
    edge_alphabet: tuple[Label, ...] = (DEFAULT_EDGE_LABEL,)
    seed: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError("density must lie in [0, 1]")
        if not self.vertex_alphabet or not self.edge_alphabet:
            raise ValueError("label alphabets must be non-empty")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "vertex_alphabet", tuple(self.vertex_alphabet))
        object.__setattr__(self, "edge_alphabet", tuple(self.edge_alphabet))


def generate_random(spec: GenSpec, name: str | None = None) -> LabeledGraph:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n = spec.n
    vlab = rng.integers(0, len(spec.vertex_alphabet), size=n)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < spec.density
    elab = rng.integers(0, len(spec.edge_alphabet), size=int(keep.sum()))
    labels = [spec.vertex_alphabet[i] for i in vlab]
    edges = [(int(a), int(b), spec.edge_alphabet[c])
             for a, b, c in zip(iu[keep], ju[keep], elab)]
    return LabeledGraph(labels, edges, name=name)


# -- datasets ----------------------------------------------------------------

@dataclass
class Dataset:
    graphs: list[LabeledGraph]
    classes: dict[str, str] | None = None
    errors: list[tuple[str, str]] = field(default_factory=list)

    def __len__(self):
        return len(self.graphs)

    @property
    def names(self) -> list[str]:
        return [g.name for g in self.graphs]

    def labels_of(self, graphs: Sequence[LabeledGraph] | None = None) -> list[str]:
        if self.classes is None:
            raise DatasetError("dataset carries no class labels")
        return [self.classes[g.name] for g in (graphs or self.graphs)]


def _strip_suffix(name: str) -> str:
    for suf in GRAPH_SUFFIXES:
        if name.lower().endswith(suf):
            return name[: -len(suf)]
    return name


def read_class_file(path: str | Path) -> dict[str, str]:
    classes = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise DatasetError(f"{path}:{lineno}: expected 'name,class', got {row!r}")
            classes[_strip_suffix(row[0].strip())] = row[1].strip()
    return classes


def load_dataset(dir_path: str | Path, class_file: str | Path | None = None) -> Dataset:
    """Load every .gxl/.json graph in a directory.

    Files that fail to parse are logged and collected in ``Dataset.errors``
    instead of aborting the load. Graphs are named after their file stem.
    """
    root = Path(dir_path)
    if not root.is_dir():
        raise OSError(f"not a readable directory: {root}")
    graphs: list[LabeledGraph] = []
    errors: list[tuple[str, str]] = []
    seen: set[str] = set()
    for path in sorted(root.iterdir()):
        if path.suffix.lower() not in GRAPH_SUFFIXES or not path.is_file():
            continue
        try:
            g = read_graph(path)
        except ParseError as exc:
            log.warning("skipping %s", exc)
            errors.append((path.name, str(exc)))
            continue
        g = LabeledGraph(g.labels, g.edges, name=path.stem)
        if g.name in seen:
            errors.append((path.name, f"duplicate graph name {g.name!r}"))
            continue
        seen.add(g.name)
        graphs.append(g)
    classes = None
    if class_file is not None:
        classes = read_class_file(class_file)
        missing = sorted(set(classes) - seen)
        if missing:
            raise DatasetError(f"class file names graphs that were not loaded: {missing[:5]}")
    return Dataset(graphs, classes, errors)

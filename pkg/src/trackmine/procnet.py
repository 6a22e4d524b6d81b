"""Directly-follows process networks per cycle and their matrix form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DataError
from .eventlog import Cycle, EventRecord

# worker/vehicle role abbreviations used by the default labeler
_DEFAULT_ROLES = {
    "worker-left": "LP",
    "worker-right": "RP",
    "worker": "P",
    "big-AGV": "BV",
    "small-AGV": "SV",
}


@dataclass(frozen=True, order=True)
class NodeLabel:
    entity_role: str
    location_id: str

    def __post_init__(self):
        if not self.entity_role or not self.location_id:
            raise DataError("node label needs a non-empty role and location")

    def render(self) -> str:
        return f"{self.entity_role}_{self.location_id}"

    @classmethod
    def parse(cls, text: str) -> "NodeLabel":
        if "_" not in text:
            raise DataError(f"node label {text!r} is not of the form role_location")
        role, loc = text.rsplit("_", 1)
        return cls(role, loc)


def default_labeler(record: EventRecord) -> list[NodeLabel]:
    """One node per (entity, location) pair, in record order."""
    labels = []
    for g in record.groups:
        for e in g.entities:
            role = _DEFAULT_ROLES.get(e.prop or e.entity_id, e.prop or e.entity_id)
            labels.append(NodeLabel(role, g.location_id))
    return labels


@dataclass
class ProcessNetwork:
    nodes: list[NodeLabel]
    edges: dict[tuple[NodeLabel, NodeLabel], float]
    activities: dict[NodeLabel, int]

    def __post_init__(self):
        known = set(self.nodes)
        for a, b in self.edges:
            if a not in known or b not in known:
                raise DataError(f"edge endpoint {a.render()}->{b.render()} not in node list")


@dataclass
class LinkMatrix:
    labels: list[NodeLabel]
    values: np.ndarray  # square, non-negative

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = len(self.labels)
        if self.values.shape != (n, n):
            raise DataError(
                f"link matrix shape {self.values.shape} does not match {n} labels"
            )

    @property
    def index(self) -> dict[NodeLabel, int]:
        return {lbl: i for i, lbl in enumerate(self.labels)}


def build_dfg(
    cycle: Cycle,
    labeler: Callable[[EventRecord], Sequence[NodeLabel]] = default_labeler,
) -> ProcessNetwork:
    """Mine the weighted directly-follows graph of one cycle.

    Nodes appear in first-appearance order; each adjacent pair in the
    labeled event sequence adds one to its edge, including self-loops.
    """
    sequence: list[NodeLabel] = []
    for record in cycle.records:
        sequence.extend(labeler(record))
    nodes: list[NodeLabel] = []
    seen = set()
    activities: dict[NodeLabel, int] = {}
    for lbl in sequence:
        if lbl not in seen:
            seen.add(lbl)
            nodes.append(lbl)
        activities[lbl] = activities.get(lbl, 0) + 1
    edges: dict[tuple[NodeLabel, NodeLabel], float] = {}
    for a, b in zip(sequence, sequence[1:]):
        edges[(a, b)] = edges.get((a, b), 0) + 1
    return ProcessNetwork(nodes=nodes, edges=edges, activities=activities)


def activity_ranking(net: ProcessNetwork, k: int) -> list[tuple[NodeLabel, int]]:
    """Top-k nodes by occurrence count, ties broken by rendered label."""
    if k < 1:
        raise DataError("k must be >= 1")
    ranked = sorted(net.activities.items(), key=lambda kv: (-kv[1], kv[0].render()))
    return ranked[:k]


def link_matrix(net: ProcessNetwork) -> LinkMatrix:
    if not net.nodes:
        raise DataError("cannot build a link matrix from an empty network")
    idx = {lbl: i for i, lbl in enumerate(net.nodes)}
    n = len(net.nodes)
    L = np.zeros((n, n))
    for (a, b), w in net.edges.items():
        L[idx[a], idx[b]] = w
    return LinkMatrix(labels=list(net.nodes), values=L)


def network_from_matrix(lm: LinkMatrix) -> ProcessNetwork:
    """Inverse of link_matrix at fixed node order (activities from diagonal
    presence are not recoverable; self-occurrence counts default to row sums)."""
    edges = {}
    n = len(lm.labels)
    for i in range(n):
        for j in range(n):
            if lm.values[i, j] != 0:
                edges[(lm.labels[i], lm.labels[j])] = float(lm.values[i, j])
    activities = {lbl: max(1, int(round(lm.values[i].sum()))) for i, lbl in enumerate(lm.labels)}
    return ProcessNetwork(nodes=list(lm.labels), edges=edges, activities=activities)


# ---------------------------------------------------------------------------
# export / import

def matrix_to_csv(lm: LinkMatrix) -> str:
    """Labeled CSV: first row and first column carry rendered node labels."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([""] + [lbl.render() for lbl in lm.labels])
    for i, lbl in enumerate(lm.labels):
        writer.writerow([lbl.render()] + [repr(v) for v in lm.values[i].tolist()])
    return buf.getvalue()


def matrix_from_csv(text: str) -> LinkMatrix:
    reader = list(csv.reader(io.StringIO(text)))
    if not reader or len(reader[0]) < 2:
        raise DataError("matrix CSV needs a label header row")
    col_labels = [NodeLabel.parse(t) for t in reader[0][1:]]
    rows = []
    row_labels = []
    for lineno, row in enumerate(reader[1:], start=2):
        if not row:
            continue
        if len(row) != len(col_labels) + 1:
            raise DataError(f"matrix CSV line {lineno}: expected {len(col_labels) + 1} cells")
        row_labels.append(row[0])
        try:
            rows.append([float(v) for v in row[1:]])
        except ValueError as exc:
            raise DataError(f"matrix CSV line {lineno}: {exc}") from None
    if row_labels != reader[0][1:]:
        raise DataError("matrix CSV row labels do not match column labels")
    return LinkMatrix(labels=col_labels, values=np.array(rows))


def network_to_dot(net: ProcessNetwork) -> str:
    lines = ["digraph process {"]
    for lbl in net.nodes:
        lines.append(f'  "{lbl.render()}" [label="{lbl.render()} ({net.activities.get(lbl, 0)})"];')
    for (a, b), w in sorted(net.edges.items(), key=lambda kv: (kv[0][0].render(), kv[0][1].render())):
        weight = int(w) if float(w).is_integer() else w
        lines.append(f'  "{a.render()}" -> "{b.render()}" [label="{weight}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

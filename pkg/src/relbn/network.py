"""Discrete Bayesian network model: nodes, CPTs, queries, validation.

Nodes carry a stable integer index and a string name.  File formats and the
CLI speak names; every in-package API speaks indices.  A network derived from
another (by pruning or absorption) keeps the surviving nodes' indices, so
posteriors computed on different reductions of the same model can be compared
directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import factors
from .errors import CycleError, NetworkValidationError
from .factors import Factor

CPT_ROW_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Node:
    """One discrete variable: named states plus a CPT over parents + self."""

    index: int
    name: str
    states: tuple[str, ...]
    cpt: Factor

    def __post_init__(self):
        if len(self.states) < 2:
            raise NetworkValidationError(f"node {self.name} needs at least 2 states")
        if not self.cpt.scope or self.cpt.scope[-1] != self.index:
            raise NetworkValidationError(
                f"node {self.name}: CPT scope must end with the node itself"
            )

    @property
    def parents(self) -> tuple[int, ...]:
        return self.cpt.scope[:-1]

    @property
    def card(self) -> int:
        return len(self.states)


class BeliefNetwork:
    """Immutable DAG of Nodes, in declaration order."""

    def __init__(self, name: str, nodes: Sequence[Node]):
        self.name = name
        self.nodes = tuple(nodes)
        self._by_index = {n.index: n for n in self.nodes}
        if len(self._by_index) != len(self.nodes):
            raise NetworkValidationError("duplicate node index")
        children: dict[int, list[int]] = {n.index: [] for n in self.nodes}
        for n in self.nodes:
            for p in n.parents:
                if p in children:
                    children[p].append(n.index)
        self._children = {i: tuple(cs) for i, cs in children.items()}
        self._topo: list[int] | None = None
        self._topo_pos: dict[int, int] | None = None

    # -- lookups ---------------------------------------------------------

    def __contains__(self, index: int) -> bool:
        return index in self._by_index

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, index: int) -> Node:
        return self._by_index[index]

    def card(self, index: int) -> int:
        return self._by_index[index].card

    def parents(self, index: int) -> tuple[int, ...]:
        return self._by_index[index].parents

    def children(self, index: int) -> tuple[int, ...]:
        return self._children[index]

    def indices(self) -> list[int]:
        return [n.index for n in self.nodes]

    def index_of(self, name: str) -> int:
        for n in self.nodes:
            if n.name == name:
                return n.index
        raise KeyError(name)

    def declaration_position(self, index: int) -> int:
        for pos, n in enumerate(self.nodes):
            if n.index == index:
                return pos
        raise KeyError(index)

    # -- structure -------------------------------------------------------

    def topological_order(self) -> list[int]:
        if self._topo is None:
            self._topo = topological_order(self)
        return list(self._topo)

    def topo_position(self, index: int) -> int:
        if self._topo_pos is None:
            self._topo_pos = {v: i for i, v in enumerate(self.topological_order())}
        return self._topo_pos[index]

    def descendants(self, seeds: Iterable[int]) -> set[int]:
        """All strict descendants of the seed set."""
        out: set[int] = set()
        stack = [c for s in seeds for c in self._children[s]]
        while stack:
            v = stack.pop()
            if v not in out:
                out.add(v)
                stack.extend(self._children[v])
        return out

    def ancestors(self, seeds: Iterable[int]) -> set[int]:
        """All strict ancestors of the seed set."""
        out: set[int] = set()
        stack = [p for s in seeds for p in self._by_index[s].parents]
        while stack:
            v = stack.pop()
            if v not in out:
                out.add(v)
                stack.extend(self._by_index[v].parents)
        return out

    def subnetwork(
        self,
        keep: Iterable[int],
        replaced: Mapping[int, Node] | None = None,
    ) -> "BeliefNetwork":
        """Network over `keep` (declaration order preserved, indices kept).

        `replaced` substitutes whole nodes (reparented or re-CPT'd).  The
        caller is responsible for keeping CPT scopes inside `keep`.
        """
        keep = set(keep)
        replaced = replaced or {}
        nodes = [replaced.get(n.index, n) for n in self.nodes if n.index in keep]
        return BeliefNetwork(self.name, nodes)

    def total_cpt_entries(self) -> int:
        return sum(n.cpt.values.size for n in self.nodes)

    def state_space_size(self) -> int:
        size = 1
        for n in self.nodes:
            size *= n.card
        return size


@dataclass(frozen=True)
class Query:
    """Target set and evidence assignment (node index -> state index)."""

    targets: frozenset[int]
    evidence: Mapping[int, int]

    def __init__(self, targets: Iterable[int], evidence: Mapping[int, int]):
        object.__setattr__(self, "targets", frozenset(targets))
        object.__setattr__(self, "evidence", dict(evidence))


def check_query(net: BeliefNetwork, query: Query) -> None:
    """Raise NetworkValidationError unless the query fits the network."""
    overlap = query.targets & set(query.evidence)
    if overlap:
        raise NetworkValidationError(
            f"targets and evidence overlap on {sorted(overlap)}"
        )
    for t in query.targets:
        if t not in net:
            raise NetworkValidationError(f"target node {t} not in network")
    for v, s in query.evidence.items():
        if v not in net:
            raise NetworkValidationError(f"evidence node {v} not in network")
        if not 0 <= s < net.card(v):
            raise NetworkValidationError(
                f"state {s} out of range for evidence node {v}"
            )


# -- validation ------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    node: str | None
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, node: str | None, detail: str) -> None:
        self.violations.append(Violation(kind, node, detail))

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"[{v.kind}] {v.node}: {v.detail}" for v in self.violations)


def validate(net: BeliefNetwork) -> ValidationReport:
    """Check every structural invariant; diagnostics are the return value."""
    report = ValidationReport()

    names = [n.name for n in net.nodes]
    for name in sorted({x for x in names if names.count(x) > 1}):
        report.add("duplicate-id", name, "node id declared more than once")

    for n in net.nodes:
        for p in n.parents:
            if p not in net:
                report.add("dangling-arc", n.name, f"parent index {p} not in network")

    try:
        topological_order(net)
    except CycleError as err:
        a, b = err.arc
        name_a = net.node(a).name if a in net else str(a)
        name_b = net.node(b).name if b in net else str(b)
        report.add("cycle", None, f"arc {name_a} -> {name_b} lies on a cycle")

    for n in net.nodes:
        if any(p not in net for p in n.parents):
            continue
        expected = tuple(net.card(p) for p in n.parents) + (n.card,)
        if n.cpt.cards != expected:
            report.add(
                "cpt-shape", n.name,
                f"CPT shape {n.cpt.cards} does not match parents+self {expected}",
            )
            continue
        if np.any(n.cpt.values < 0) or np.any(n.cpt.values > 1):
            report.add("cpt-range", n.name, "CPT entries must lie in [0, 1]")
        sums = n.cpt.values.sum(axis=-1)
        bad = np.argwhere(np.abs(sums - 1.0) > CPT_ROW_TOLERANCE)
        for conf in bad[:8]:
            conf_t = tuple(int(c) for c in conf)
            report.add(
                "cpt-normalization", n.name,
                f"row for parent configuration {conf_t} sums to {sums[conf_t]!r}",
            )
    return report


def topological_order(net: BeliefNetwork) -> list[int]:
    """Parents before children; ties broken by declaration order."""
    position = {n.index: pos for pos, n in enumerate(net.nodes)}
    missing_ok_parents = {
        n.index: [p for p in n.parents if p in position] for n in net.nodes
    }
    indegree = {n.index: len(missing_ok_parents[n.index]) for n in net.nodes}
    ready = sorted((i for i, d in indegree.items() if d == 0), key=position.get)
    order: list[int] = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        inserted = False
        for c in net.children(v):
            indegree[c] -= 1
            if indegree[c] == 0:
                ready.append(c)
                inserted = True
        if inserted:
            ready.sort(key=position.get)
    if len(order) != len(net.nodes):
        done = set(order)
        leftover = [i for i in position if i not in done]
        for v in leftover:
            for p in missing_ok_parents[v]:
                if p in leftover:
                    raise CycleError((p, v))
        raise CycleError((leftover[0], leftover[0]))
    return order


# -- construction helpers ----------------------------------------------------


def make_node(
    index: int,
    name: str,
    states: Sequence[str],
    parents: Sequence[int],
    parent_cards: Sequence[int],
    cpt_flat: Sequence[float],
) -> Node:
    """Node from a flat row-major CPT over (parents..., self)."""
    cards = tuple(parent_cards) + (len(states),)
    cpt = factors.from_flat(tuple(parents) + (index,), cards, cpt_flat)
    return Node(index, name, tuple(states), cpt)


def uniform_node(index: int, name: str, n_states: int, parents: Sequence[tuple[int, int]]) -> Node:
    """Node with a uniform CPT; `parents` is a list of (index, card) pairs."""
    p_idx = tuple(p for p, _ in parents)
    p_cards = tuple(c for _, c in parents)
    shape = p_cards + (n_states,)
    values = np.full(shape, 1.0 / n_states)
    return Node(index, name, tuple(f"s{i}" for i in range(n_states)),
                Factor(p_idx + (index,), values))

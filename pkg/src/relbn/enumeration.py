"""Brute-force inference and trail enumeration.

Everything here is deliberately naive: posteriors come from chain-rule
enumeration of whole configurations (no factor algebra), and separation
questions are answered by enumerating minimal trails and applying the
active-trail conditions literally.  These routines are the ground truth the
fast engines are tested against, so they share no inference code with them.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import StateSpaceLimitError, ZeroProbabilityEvidenceError
from .network import BeliefNetwork, Query, check_query

DEFAULT_STATE_CEILING = 2 ** 20
ORACLE_NODE_CEILING = 10


def joint_enumerate(
    net: BeliefNetwork,
    query: Query,
    ceiling: int = DEFAULT_STATE_CEILING,
) -> tuple[dict[int, np.ndarray], float]:
    """Posteriors of the query targets plus Pr(evidence), by enumeration.

    Walks every complete configuration in topological order, multiplying CPT
    entries (the chain rule), and accumulates the mass consistent with the
    evidence per target state.
    """
    check_query(net, query)
    if net.state_space_size() > ceiling:
        raise StateSpaceLimitError(
            f"joint has {net.state_space_size()} states, ceiling is {ceiling}"
        )
    order = net.topological_order()
    evidence = dict(query.evidence)

    # Per-node lookup tables in plain Python; assignment is indexed by node id.
    tables = {}
    for v in order:
        node = net.node(v)
        tables[v] = (node.parents, node.cpt.values.tolist(), node.card)

    targets = sorted(query.targets)
    accum = {t: [0.0] * net.card(t) for t in targets}
    assignment: dict[int, int] = {}
    total = 0.0

    def recurse(pos: int, prob: float) -> None:
        nonlocal total
        if pos == len(order):
            total += prob
            for t in targets:
                accum[t][assignment[t]] += prob
            return
        v = order[pos]
        parents, table, card = tables[v]
        row = table
        for p in parents:
            row = row[assignment[p]]
        if v in evidence:
            s = evidence[v]
            p_here = prob * row[s]
            if p_here > 0.0:
                assignment[v] = s
                recurse(pos + 1, p_here)
                del assignment[v]
        else:
            for s in range(card):
                p_here = prob * row[s]
                if p_here > 0.0:
                    assignment[v] = s
                    recurse(pos + 1, p_here)
                    del assignment[v]

    recurse(0, 1.0)
    if total <= 0.0:
        raise ZeroProbabilityEvidenceError("evidence configuration has probability zero")
    posteriors = {t: np.asarray(accum[t]) / total for t in targets}
    return posteriors, total


# -- trails ------------------------------------------------------------------


def _skeleton(net: BeliefNetwork) -> dict[int, list[int]]:
    adj: dict[int, set[int]] = {v: set() for v in net.indices()}
    for n in net.nodes:
        for p in n.parents:
            adj[n.index].add(p)
            adj[p].add(n.index)
    return {v: sorted(ns) for v, ns in adj.items()}


def is_active_trail(net: BeliefNetwork, trail: list[int], evidence: Iterable[int]) -> bool:
    """Literal active-trail test: each interior head-to-head node must be in
    the evidence or have a descendant there; every other interior node must
    be outside the evidence."""
    ev = set(evidence)
    for i in range(1, len(trail) - 1):
        v = trail[i]
        parents = set(net.parents(v))
        head_to_head = trail[i - 1] in parents and trail[i + 1] in parents
        if head_to_head:
            if v not in ev and not (net.descendants([v]) & ev):
                return False
        elif v in ev:
            return False
    return True


def _simple_trails(
    adj: dict[int, list[int]], start: int, goals: set[int]
) -> Iterator[list[int]]:
    """All minimal (node-distinct) trails from start to any goal node."""
    path = [start]
    on_path = {start}

    def walk(v: int) -> Iterator[list[int]]:
        for u in adj[v]:
            if u in on_path:
                continue
            path.append(u)
            on_path.add(u)
            if u in goals:
                yield list(path)
            yield from walk(u)
            on_path.discard(u)
            path.pop()

    yield from walk(start)


def trail_oracle(
    net: BeliefNetwork,
    query: Query,
    node_ceiling: int = ORACLE_NODE_CEILING,
) -> set[int]:
    """d-separated node set, by exhaustive minimal-trail enumeration."""
    check_query(net, query)
    if len(net) > node_ceiling:
        raise StateSpaceLimitError(
            f"trail enumeration limited to {node_ceiling} nodes, network has {len(net)}"
        )
    adj = _skeleton(net)
    targets = set(query.targets)
    ev = set(query.evidence)
    separated: set[int] = set()
    for v in net.indices():
        if v in targets or v in ev:
            continue
        connected = False
        for trail in _simple_trails(adj, v, targets):
            if is_active_trail(net, trail, ev):
                connected = True
                break
        if not connected:
            separated.add(v)
    return separated


def evidential_trail_nodes(
    net: BeliefNetwork,
    query: Query,
    node_ceiling: int = ORACLE_NODE_CEILING,
) -> set[int]:
    """Union of nodes lying on some minimal active trail from an evidence
    node to a target node.  Exhaustive; test-oracle scale only."""
    check_query(net, query)
    if len(net) > node_ceiling:
        raise StateSpaceLimitError(
            f"trail enumeration limited to {node_ceiling} nodes, network has {len(net)}"
        )
    adj = _skeleton(net)
    targets = set(query.targets)
    ev = set(query.evidence)
    on_trail: set[int] = set()
    for e in sorted(ev):
        for trail in _simple_trails(adj, e, targets):
            if is_active_trail(net, trail, ev):
                on_trail.update(trail)
    return on_trail

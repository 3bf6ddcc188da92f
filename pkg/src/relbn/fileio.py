"""JSON interchange for networks and evidence files.

Network file: ``{"name": ..., "nodes": [{"id", "states", "parents", "cpt"}]}``
where ``cpt`` is flattened row-major over (parents..., self) with the node's
own states fastest-varying and parents in the order listed.  Arcs are implied
by the per-node parent lists.  Evidence file: ``{"node_id": "state_label"}``.
"""

from __future__ import annotations

import json
from typing import Mapping

import numpy as np

from .errors import NetworkFormatError, NetworkValidationError
from .network import BeliefNetwork, Node, make_node, validate

# Rows whose sum is off by more than this are rejected; anything closer is
# renormalized exactly, so text-format rounding never fails validation.
ROW_SUM_REJECT = 1e-6


def network_from_dict(doc: dict) -> BeliefNetwork:
    if not isinstance(doc, dict) or "nodes" not in doc:
        raise NetworkFormatError("network document must be an object with a 'nodes' array")
    name = doc.get("name", "network")
    raw_nodes = doc["nodes"]
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise NetworkFormatError("'nodes' must be a non-empty array")

    index_of: dict[str, int] = {}
    for i, raw in enumerate(raw_nodes):
        node_id = raw.get("id")
        if not isinstance(node_id, str):
            raise NetworkFormatError(f"node #{i} has no string 'id'")
        if node_id in index_of:
            raise NetworkValidationError(f"duplicate node id {node_id!r}")
        index_of[node_id] = i

    nodes: list[Node] = []
    for i, raw in enumerate(raw_nodes):
        node_id = raw["id"]
        states = raw.get("states")
        parents = raw.get("parents", [])
        cpt = raw.get("cpt")
        if not isinstance(states, list) or len(states) < 2:
            raise NetworkFormatError(f"node {node_id}: 'states' must list at least 2 labels")
        if not isinstance(parents, list):
            raise NetworkFormatError(f"node {node_id}: 'parents' must be a list")
        if not isinstance(cpt, list):
            raise NetworkFormatError(f"node {node_id}: 'cpt' must be a flat list")
        try:
            parent_idx = [index_of[p] for p in parents]
        except KeyError as err:
            raise NetworkValidationError(f"node {node_id}: unknown parent {err.args[0]!r}")
        parent_cards = [len(raw_nodes[j]["states"]) for j in parent_idx]
        try:
            node = make_node(i, node_id, states, parent_idx, parent_cards, cpt)
        except ValueError as err:
            raise NetworkFormatError(f"node {node_id}: {err}")
        nodes.append(_renormalized(node))

    net = BeliefNetwork(name, nodes)
    report = validate(net)
    if not report.ok:
        raise NetworkValidationError(f"invalid network:\n{report}")
    return net


def _renormalized(node: Node) -> Node:
    sums = node.cpt.values.sum(axis=-1)
    off = np.abs(sums - 1.0) > ROW_SUM_REJECT
    if np.any(off):
        conf = tuple(int(c) for c in np.argwhere(off)[0])
        raise NetworkValidationError(
            f"node {node.name}: CPT row for parent configuration {conf} "
            f"sums to {float(sums[conf]):.9g}"
        )
    values = node.cpt.values / sums[..., None]
    return Node(node.index, node.name, node.states, type(node.cpt)(node.cpt.scope, values))


def network_to_dict(net: BeliefNetwork) -> dict:
    nodes = []
    for n in net.nodes:
        nodes.append({
            "id": n.name,
            "states": list(n.states),
            "parents": [net.node(p).name for p in n.parents],
            "cpt": n.cpt.flat().tolist(),
        })
    return {"name": net.name, "nodes": nodes}


def load_network(path: str) -> BeliefNetwork:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise NetworkFormatError(f"cannot read {path}: {err}")
    except json.JSONDecodeError as err:
        raise NetworkFormatError(f"{path} is not valid JSON: {err}")
    return network_from_dict(doc)


def save_network(net: BeliefNetwork, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(network_to_dict(net), fh, indent=2)
        fh.write("\n")


def evidence_from_dict(net: BeliefNetwork, doc: dict) -> dict[int, int]:
    if not isinstance(doc, dict):
        raise NetworkFormatError("evidence document must be an object")
    evidence: dict[int, int] = {}
    for node_id, label in doc.items():
        try:
            idx = net.index_of(node_id)
        except KeyError:
            raise NetworkValidationError(f"evidence names unknown node {node_id!r}")
        states = net.node(idx).states
        if label not in states:
            raise NetworkValidationError(
                f"evidence for {node_id!r}: unknown state {label!r} (have {list(states)})"
            )
        evidence[idx] = states.index(label)
    return evidence


def evidence_to_dict(net: BeliefNetwork, evidence: Mapping[int, int]) -> dict:
    return {
        net.node(v).name: net.node(v).states[s]
        for v, s in sorted(evidence.items(), key=lambda kv: net.declaration_position(kv[0]))
    }


def load_evidence(net: BeliefNetwork, path: str) -> dict[int, int]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise NetworkFormatError(f"cannot read {path}: {err}")
    except json.JSONDecodeError as err:
        raise NetworkFormatError(f"{path} is not valid JSON: {err}")
    return evidence_from_dict(net, doc)


def save_evidence(net: BeliefNetwork, evidence: Mapping[int, int], path: str) -> None:
    with open(path, "w") as fh:
        json.dump(evidence_to_dict(net, evidence), fh, indent=2)
        fh.write("\n")

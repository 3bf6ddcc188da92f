"""Relevance pruning: extract the subnetwork that matters for a query.

Four reductions compose into `relevant_subnetwork`:

* evidence propagation — instantiate nodes whose values are forced by the
  evidence through deterministic CPT entries;
* barren-node removal — drop non-query nodes all of whose descendants are
  barren;
* d-separation removal — drop nodes with no active trail to any target,
  found by a two-direction reachability sweep over (node, direction) states;
* evidence absorption — slice children's CPTs on observed parent states,
  then fold each observed node's own likelihood into its ancestors so the
  observed nodes can be deleted outright.

The absorbed network is evidence-free and its prior marginals equal the
original network's posteriors given the evidence, which is what lets every
downstream engine run on the reduced model without special-casing evidence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import factors
from .errors import EvidenceContradictionError, ZeroProbabilityEvidenceError
from .factors import Factor
from .network import BeliefNetwork, Node, Query, check_query

_ONE = 1.0 - 1e-12
_ZERO = 1e-12


@dataclass
class ReductionTrace:
    """Why each original node left (or stayed in) the reduced network."""

    removed_d_separated: set[int] = field(default_factory=set)
    removed_barren: set[int] = field(default_factory=set)
    absorbed_evidence: set[int] = field(default_factory=set)
    propagated_instantiations: dict[int, int] = field(default_factory=dict)
    surviving: set[int] = field(default_factory=set)

    def relevant_nodes(self) -> set[int]:
        """Nodes whose tables took part in the computation: the surviving
        set plus everything absorbed or instantiated into it."""
        return (
            set(self.surviving)
            | set(self.absorbed_evidence)
            | set(self.propagated_instantiations)
        )


def d_separated_set(net: BeliefNetwork, query: Query) -> set[int]:
    """Nodes (outside targets and evidence) with no active trail to any
    target given the evidence.  Linear in the number of arcs."""
    check_query(net, query)
    ev = set(query.evidence)
    valley_ok = net.ancestors(ev) | ev  # in evidence, or has a descendant there

    UP, DOWN = 0, 1  # arrived from a child / from a parent
    queue: list[tuple[int, int]] = []
    for t in sorted(query.targets):
        for p in net.parents(t):
            queue.append((p, UP))
        for c in net.children(t):
            queue.append((c, DOWN))
    visited: set[tuple[int, int]] = set()
    reached: set[int] = set()
    while queue:
        state = queue.pop()
        if state in visited:
            continue
        visited.add(state)
        v, direction = state
        reached.add(v)
        if direction == UP:
            if v not in ev:
                for p in net.parents(v):
                    queue.append((p, UP))
                for c in net.children(v):
                    queue.append((c, DOWN))
        else:
            if v not in ev:
                for c in net.children(v):
                    queue.append((c, DOWN))
            if v in valley_ok:
                for p in net.parents(v):
                    queue.append((p, UP))
    return set(net.indices()) - reached - set(query.targets) - ev


def barren_set(net: BeliefNetwork, query: Query) -> set[int]:
    """Maximal set of non-query nodes whose descendants are all barren."""
    check_query(net, query)
    keep = set(query.targets) | set(query.evidence)
    barren: set[int] = set()
    for v in reversed(net.topological_order()):
        if v in keep:
            continue
        if all(c in barren for c in net.children(v)):
            barren.add(v)
    return barren


# -- evidence propagation ----------------------------------------------------


def _forced_state(node: Node, evidence: Mapping[int, int]) -> int | None:
    """State the node must take if, for every configuration of its free
    parents, the CPT puts all mass (within tolerance) on that one state."""
    fixed = {p: evidence[p] for p in node.parents if p in evidence}
    row = factors.reduce(node.cpt, fixed)
    vals = row.values.reshape(-1, node.card)
    hard = vals >= _ONE
    forced = np.all(hard, axis=0)
    hits = np.flatnonzero(forced)
    if hits.size == 1:
        return int(hits[0])
    return None


def _possible_parent_states(node: Node, parent: int, observed: int,
                            evidence: Mapping[int, int]) -> list[int]:
    """Parent states that leave the child's observed state achievable for
    some configuration of the remaining free parents."""
    fixed = {p: evidence[p] for p in node.parents if p in evidence}
    like = factors.reduce(node.cpt, {**fixed, node.index: observed})
    axis = like.scope.index(parent)
    other = tuple(i for i in range(len(like.scope)) if i != axis)
    best = like.values.max(axis=other) if other else like.values
    return [int(i) for i in np.flatnonzero(best > _ZERO)]


def propagate_evidence(net: BeliefNetwork, query: Query) -> dict[int, int]:
    """Extend the evidence with every instantiation it logically implies.

    Forward, a node is instantiated when its CPT is deterministic toward one
    state under every completion of its free parents; backward, a parent is
    instantiated when all its other states give the observed child state
    probability zero.  Repeats to fixpoint.  Probabilities are compared to
    0/1 exactly (tolerance 1e-12); soft determinism is never rounded.
    """
    check_query(net, query)
    ev = dict(query.evidence)
    topo = net.topological_order()
    changed = True
    while changed:
        changed = False
        for v in topo:
            if v in ev:
                continue
            forced = _forced_state(net.node(v), ev)
            if forced is not None:
                ev[v] = forced
                changed = True
        for c in reversed(topo):
            if c not in ev:
                continue
            node = net.node(c)
            fixed = {p: ev[p] for p in node.parents if p in ev}
            like = factors.reduce(node.cpt, {**fixed, c: ev[c]})
            if like.is_scalar():
                if like.scalar() <= _ZERO:
                    raise EvidenceContradictionError(node.name)
                continue
            if float(like.values.max()) <= _ZERO:
                raise EvidenceContradictionError(node.name)
            for parent in like.scope:
                possible = _possible_parent_states(node, parent, ev[c], ev)
                if not possible:
                    raise EvidenceContradictionError(node.name)
                if len(possible) == 1:
                    ev[parent] = possible[0]
                    changed = True
    return ev


# -- evidence absorption -----------------------------------------------------


def _fold_likelihood(net: BeliefNetwork, like: Factor, origin: str) -> BeliefNetwork:
    """Multiply a likelihood over surviving nodes into the network.

    Folds into the topologically last variable of the likelihood's scope:
    that node's CPT is reweighted and renormalized, its parent set extends
    with the likelihood's other variables, and the row sums become the
    residual likelihood to fold further up.  Terminates at a scalar, which
    must be positive or the evidence was impossible.
    """
    while like.scope:
        v = max(like.scope, key=net.topo_position)
        node = net.node(v)
        extra = tuple(x for x in like.scope if x != v and x not in node.parents)
        new_parents = node.parents + extra
        prod = factors.align(factors.multiply(node.cpt, like), new_parents + (v,))
        z = prod.values.sum(axis=-1)
        safe = z > 0.0
        denom = np.where(safe, z, 1.0)[..., None]
        rows = np.where(safe[..., None], prod.values / denom, 1.0 / node.card)
        new_node = Node(v, node.name, node.states, Factor(new_parents + (v,), rows))
        net = net.subnetwork(net.indices(), {v: new_node})
        like = Factor(new_parents, z)
    if like.scalar() <= 0.0:
        raise ZeroProbabilityEvidenceError(
            f"evidence on {origin} has probability zero"
        )
    return net


def absorb_evidence(net: BeliefNetwork, evidence: Mapping[int, int]) -> BeliefNetwork:
    """Remove observed nodes, conditioning the rest of the network on them.

    Children's CPTs are sliced on the observed parent states (dropping those
    arcs); each observed node's own CPT, sliced at its observed state, is a
    likelihood over its unobserved parents and is folded into their CPTs so
    the surviving network's joint is the original conditional.
    """
    ev = dict(evidence)
    if not ev:
        return net
    replaced: dict[int, Node] = {}
    likelihoods: list[tuple[int, Factor]] = []
    for n in net.nodes:
        sliced = {p: ev[p] for p in n.parents if p in ev}
        if n.index in ev:
            likelihoods.append(
                (n.index, factors.reduce(n.cpt, {**sliced, n.index: ev[n.index]}))
            )
        elif sliced:
            replaced[n.index] = Node(n.index, n.name, n.states,
                                     factors.reduce(n.cpt, sliced))
    keep = [v for v in net.indices() if v not in ev]
    reduced = net.subnetwork(keep, replaced)
    for v, like in sorted(likelihoods, key=lambda kv: kv[0]):
        reduced = _fold_likelihood(reduced, like, net.node(v).name)
    return reduced


# -- the composed pipeline ---------------------------------------------------


def _remove_nodes(net: BeliefNetwork, removal: set[int],
                  evidence: Mapping[int, int]) -> BeliefNetwork:
    """Drop `removal`, patching evidence nodes whose parents disappeared.

    Only an observed node can lose a parent here (surviving unobserved nodes
    are never separated from their parents); its CPT is averaged uniformly
    over the removed parents' states, which leaves target posteriors alone
    because the detached branch contributes a constant factor.
    """
    if not removal:
        return net
    replaced: dict[int, Node] = {}
    for n in net.nodes:
        if n.index in removal:
            continue
        gone = [p for p in n.parents if p in removal]
        if not gone:
            continue
        if n.index not in evidence:
            raise AssertionError(
                f"removal would orphan unobserved node {n.name}"
            )
        cards = [n.cpt.card(p) for p in gone]
        averaged = factors.marginalize(n.cpt, gone)
        averaged = Factor(averaged.scope, averaged.values / float(np.prod(cards)))
        replaced[n.index] = Node(n.index, n.name, n.states, averaged)
    keep = [v for v in net.indices() if v not in removal]
    return net.subnetwork(keep, replaced)


@dataclass
class ReductionResult:
    network: BeliefNetwork
    trace: ReductionTrace
    query: Query


def _reduce(net: BeliefNetwork, query: Query, *, absorb: bool) -> ReductionResult:
    check_query(net, query)
    trace = ReductionTrace()
    targets = set(query.targets)
    evidence = dict(query.evidence)
    current = net
    while True:
        changed = False

        extended = propagate_evidence(current, Query(targets, evidence))
        for v, s in extended.items():
            if v not in evidence:
                trace.propagated_instantiations[v] = s
                targets.discard(v)
                changed = True
        evidence = extended

        barren = barren_set(current, Query(targets, evidence))
        if barren:
            trace.removed_barren |= barren
            current = _remove_nodes(current, barren, evidence)
            changed = True

        separated = d_separated_set(current, Query(targets, evidence))
        if separated:
            trace.removed_d_separated |= separated
            current = _remove_nodes(current, separated, evidence)
            changed = True

        if absorb and evidence:
            current = absorb_evidence(current, evidence)
            for v in evidence:
                if v not in trace.propagated_instantiations:
                    trace.absorbed_evidence.add(v)
            evidence = {}
            changed = True

        if not changed:
            break

    trace.surviving = set(current.indices())
    return ReductionResult(current, trace, Query(targets, evidence))


def relevant_subnetwork(
    net: BeliefNetwork, query: Query
) -> tuple[BeliefNetwork, ReductionTrace, Query]:
    """Full pipeline; the returned query carries no evidence (all absorbed)
    and the returned network's priors equal the original posteriors."""
    result = _reduce(net, query, absorb=True)
    return result.network, result.trace, result.query


def relevant_with_evidence(
    net: BeliefNetwork, query: Query
) -> tuple[BeliefNetwork, ReductionTrace, Query]:
    """Propagation, barren and d-separation removal only, to fixpoint.

    The returned network still contains its evidence nodes; this is the
    'computationally relevant' form that nuisance identification expects.
    """
    result = _reduce(net, query, absorb=False)
    return result.network, result.trace, result.query

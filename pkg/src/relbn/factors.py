"""Dense factors over discrete variables.

A factor is a nonnegative table over an ordered tuple of variables.  Values
are held in a numpy array with one axis per scope variable, C-ordered, so the
flattened view is row-major with the last scope variable fastest-varying.
Factors are not required to normalize to anything; CPTs, likelihood slices
and clique potentials are all factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class Factor:
    """Table over `scope` (variable ids) with one array axis per variable."""

    scope: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != len(self.scope):
            raise ValueError(
                f"factor over {self.scope} needs {len(self.scope)} axes, "
                f"got array of shape {arr.shape}"
            )
        if len(set(self.scope)) != len(self.scope):
            raise ValueError(f"duplicate variable in scope {self.scope}")
        object.__setattr__(self, "values", arr)

    @property
    def cards(self) -> tuple[int, ...]:
        return self.values.shape

    def card(self, var: int) -> int:
        return self.values.shape[self.scope.index(var)]

    def is_scalar(self) -> bool:
        return not self.scope

    def scalar(self) -> float:
        if self.scope:
            raise ValueError(f"factor over {self.scope} is not a scalar")
        return float(self.values)

    def canonical(self) -> "Factor":
        """Equivalent factor with scope sorted ascending (for comparisons)."""
        order = tuple(sorted(range(len(self.scope)), key=lambda i: self.scope[i]))
        return Factor(
            tuple(self.scope[i] for i in order),
            np.ascontiguousarray(np.transpose(self.values, order)),
        )

    def flat(self) -> np.ndarray:
        """Row-major values, last scope variable fastest-varying."""
        return np.ascontiguousarray(self.values).reshape(-1)


def scalar_factor(value: float) -> Factor:
    return Factor((), np.asarray(float(value)))


def from_flat(scope: Sequence[int], cards: Sequence[int], flat: Sequence[float]) -> Factor:
    """Build a factor from a row-major flat list (last variable fastest)."""
    arr = np.asarray(list(flat), dtype=float)
    expected = int(np.prod(cards)) if len(cards) else 1
    if arr.size != expected:
        raise ValueError(f"expected {expected} values for cards {tuple(cards)}, got {arr.size}")
    return Factor(tuple(scope), arr.reshape(tuple(cards)))


def _check_shared_cards(f: Factor, g: Factor) -> None:
    for v in f.scope:
        if v in g.scope and f.card(v) != g.card(v):
            raise ValueError(
                f"variable {v} has cardinality {f.card(v)} in one factor "
                f"and {g.card(v)} in the other"
            )


def multiply(f: Factor, g: Factor) -> Factor:
    """Pointwise product; scope is the ordered union (f's order first)."""
    _check_shared_cards(f, g)
    out_scope = f.scope + tuple(v for v in g.scope if v not in f.scope)
    labels = {v: i for i, v in enumerate(out_scope)}
    values = np.einsum(
        f.values, [labels[v] for v in f.scope],
        g.values, [labels[v] for v in g.scope],
        [labels[v] for v in out_scope],
    )
    return Factor(out_scope, values)


def marginalize(f: Factor, out: Iterable[int]) -> Factor:
    """Sum out the variables in `out`."""
    out = set(out)
    missing = out - set(f.scope)
    if missing:
        raise ValueError(f"cannot marginalize {sorted(missing)}: not in scope {f.scope}")
    if not out:
        return f
    axes = tuple(i for i, v in enumerate(f.scope) if v in out)
    return Factor(
        tuple(v for v in f.scope if v not in out),
        f.values.sum(axis=axes),
    )


def reduce(f: Factor, assignment: Mapping[int, int]) -> Factor:
    """Slice on an assignment; assigned variables leave the scope."""
    hit = {v: s for v, s in assignment.items() if v in f.scope}
    if not hit:
        return f
    index = []
    for v in f.scope:
        if v in hit:
            s = hit[v]
            if not 0 <= s < f.card(v):
                raise ValueError(f"state {s} out of range for variable {v} (card {f.card(v)})")
            index.append(s)
        else:
            index.append(slice(None))
    return Factor(
        tuple(v for v in f.scope if v not in hit),
        f.values[tuple(index)],
    )


def align(f: Factor, scope: Sequence[int]) -> Factor:
    """Transpose to the given scope order (a permutation of f.scope)."""
    scope = tuple(scope)
    if scope == f.scope:
        return f
    if set(scope) != set(f.scope) or len(scope) != len(f.scope):
        raise ValueError(f"{scope} is not a permutation of {f.scope}")
    perm = tuple(f.scope.index(v) for v in scope)
    return Factor(scope, np.transpose(f.values, perm))


def normalize(f: Factor) -> tuple[Factor, float]:
    """Scale to total mass 1; returns (normalized factor, original mass)."""
    total = float(f.values.sum())
    if total <= 0.0:
        raise ValueError("cannot normalize a factor with zero total mass")
    return Factor(f.scope, f.values / total), total

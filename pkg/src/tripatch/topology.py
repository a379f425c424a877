"""Migration topologies on three patches and their canonical forms.

An arc ``i -> j`` means migration from patch ``i`` to patch ``j`` is
allowed, i.e. rate entry ``m[j][i]`` may be positive.  A configuration
is *admissible* when no patch is isolated and the underlying undirected
graph is connected, so no patch evolves independently of the rest.  Up
to relabeling the patches there are exactly 13 admissible
configurations; each carries a stable string token used throughout the
package and in all CLI output.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np

from .model import ModelParams

__all__ = [
    "TOPOLOGIES",
    "InadmissibleArcsError",
    "apply_topology",
    "arc_labels",
    "arcs_of_topology",
    "canonical_form",
    "enumerate_canonical",
    "is_admissible",
    "is_strongly_connected",
    "iter_arc_sets",
    "zeroed_rates",
]


class InadmissibleArcsError(ValueError):
    """Raised for arc sets with an isolated patch or a disconnected graph."""


#: The 13 canonical topology tokens, full coupling first, sparsest last.
TOPOLOGIES = (
    "FULL", "EX2", "HUB0", "EX3", "EX7", "EX8", "EX1",
    "EX6", "EX2N", "EX7N", "CHAIN", "CONVERGE", "DIVERGE",
)

# Representative of each class, given by the rate entries that are pinned
# to zero (1-based tokens: mIJ is the rate into patch I from patch J).
_ZEROED = {
    "FULL": (),
    "EX2": ("m23",),
    "HUB0": ("m23", "m32"),
    "EX3": ("m31", "m12"),
    "EX7": ("m21", "m23"),
    "EX8": ("m21", "m31"),
    "EX1": ("m31", "m12", "m23"),
    "EX6": ("m21", "m31", "m23"),
    "EX2N": ("m12", "m21", "m32"),
    "EX7N": ("m21", "m23", "m12"),
    "CHAIN": ("m13", "m31", "m12", "m23"),
    "CONVERGE": ("m13", "m31", "m12", "m32"),
    "DIVERGE": ("m13", "m31", "m21", "m23"),
}

_ALL_PAIRS = ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1))


def _token_entry(token: str) -> tuple[int, int]:
    return int(token[1]) - 1, int(token[2]) - 1


def zeroed_rates(topo: str) -> tuple[tuple[int, int], ...]:
    """Rate-matrix entries (0-based ``(into, from)``) pinned to zero."""
    _check_topology(topo)
    return tuple(_token_entry(t) for t in _ZEROED[topo])


def arcs_of_topology(topo: str) -> frozenset[tuple[int, int]]:
    """Representative arc set of a topology as ``(src, dst)`` pairs."""
    zeroed = set(zeroed_rates(topo))
    return frozenset((j, i) for (i, j) in _ALL_PAIRS if (i, j) not in zeroed)


def _check_topology(topo: str) -> None:
    if topo not in _ZEROED:
        raise ValueError(f"unknown topology token {topo!r}")


def arc_labels(arcs: frozenset[tuple[int, int]]) -> list[str]:
    """Human-readable sorted arc strings like ``'1->2'`` (1-based)."""
    return [f"{s + 1}->{d + 1}" for s, d in sorted(arcs)]


def iter_arc_sets():
    """All 64 subsets of the 6 possible arcs, as frozensets of (src, dst)."""
    all_arcs = [(j, i) for (i, j) in _ALL_PAIRS]
    for mask in range(64):
        yield frozenset(a for b, a in enumerate(all_arcs) if mask >> b & 1)


def is_admissible(arcs: frozenset[tuple[int, int]]) -> bool:
    """True iff no patch is isolated and the undirected graph is connected."""
    touched = [False] * 3
    neighbors: list[set[int]] = [set(), set(), set()]
    for s, d in arcs:
        touched[s] = touched[d] = True
        neighbors[s].add(d)
        neighbors[d].add(s)
    if not all(touched):
        return False
    seen = {0}
    stack = [0]
    while stack:
        for n in neighbors[stack.pop()]:
            if n not in seen:
                seen.add(n)
                stack.append(n)
    return len(seen) == 3


def is_strongly_connected(arcs: frozenset[tuple[int, int]]) -> bool:
    """True iff every patch is reachable from every other along arcs."""
    if not is_admissible(arcs):
        raise InadmissibleArcsError(f"arc set {sorted(arcs)} is not admissible")
    out: list[set[int]] = [set(), set(), set()]
    for s, d in arcs:
        out[s].add(d)
    for start in range(3):
        seen = {start}
        stack = [start]
        while stack:
            for n in out[stack.pop()]:
                if n not in seen:
                    seen.add(n)
                    stack.append(n)
        if len(seen) != 3:
            return False
    return True


def _flags(arcs: frozenset[tuple[int, int]]) -> tuple[bool, ...]:
    """Fixed-order bit pattern over rate entries (m12, m13, ..., m32)."""
    return tuple((j, i) in arcs for (i, j) in _ALL_PAIRS)


def _permute_arcs(arcs, perm) -> frozenset[tuple[int, int]]:
    """Relabel patches: ``perm[new] = old``; arcs map through the inverse."""
    inv = [0, 0, 0]
    for new, old in enumerate(perm):
        inv[old] = new
    return frozenset((inv[s], inv[d]) for s, d in arcs)


def permute_params(params: ModelParams, perm: tuple[int, int, int]) -> ModelParams:
    """Relabel the patches of a parameter set.

    ``perm[new] = old``: patch ``new`` of the result is patch
    ``old`` of the input.  Both indices of ``m`` are permuted together,
    so the relabeled model generates the same dynamics up to renaming.
    """
    idx = list(perm)
    m = np.asarray(params.m)[np.ix_(idx, idx)]
    return ModelParams(np.asarray(params.r)[idx], np.asarray(params.k)[idx], m)


# Deterministic class key -> token, built once from the representatives.
def _class_key(arcs) -> tuple[bool, ...]:
    return min(_flags(_permute_arcs(arcs, p)) for p in permutations(range(3)))


_KEY_TO_TOPOLOGY = {_class_key(arcs_of_topology(t)): t for t in TOPOLOGIES}


def canonical_form(arcs) -> tuple[str, tuple[int, int, int]]:
    """Identify the topology class of an arc set.

    Returns the class token together with a patch relabeling ``perm``
    (``perm[new] = old``) such that relabeling the input arcs — or a
    parameter set with that sparsity, via :func:`permute_params` —
    lands exactly on the class representative of
    :func:`arcs_of_topology`.  Representatives map to themselves with
    the identity permutation.
    """
    arcs = frozenset(arcs)
    if not is_admissible(arcs):
        raise InadmissibleArcsError(f"arc set {sorted(arcs)} is not admissible")
    topo = _KEY_TO_TOPOLOGY[_class_key(arcs)]
    target = arcs_of_topology(topo)
    for perm in permutations(range(3)):
        if _permute_arcs(arcs, perm) == target:
            return topo, perm
    raise AssertionError("class key matched but no permutation aligns")  # pragma: no cover


def enumerate_canonical() -> list[tuple[str, frozenset[tuple[int, int]]]]:
    """The 13 topology classes with their representative arc sets."""
    return [(t, arcs_of_topology(t)) for t in TOPOLOGIES]


def apply_topology(params: ModelParams, topo: str) -> ModelParams:
    """Project a parameter set onto a topology by zeroing absent rates."""
    _check_topology(topo)
    m = np.array(params.m)
    for i, j in zeroed_rates(topo):
        m[i, j] = 0.0
    return ModelParams(params.r, params.k, m)

"""Minimum-weight perfect matching on complete graphs.

Weights are quantised to integers relative to the weight range, the
problem is turned into a maximum-weight matching and solved with the blossom
kernel.  Among optimal matchings the one with the lexicographically smallest
sorted pair list is returned; the brute-force enumerator applies the same
quantisation and tie-break so both paths agree exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from synpa import kernels
from synpa.errors import MatchingError

QUANT_BITS = 40
BRUTE_FORCE_LIMIT = 12


@dataclass(frozen=True)
class PairGraph:
    """Complete graph on ``n`` vertices with symmetric non-negative weights."""

    weights: tuple[tuple[float, ...], ...]

    def __init__(self, weights):
        rows = tuple(tuple(float(v) for v in row) for row in weights)
        n = len(rows)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise MatchingError("weight matrix must be square")
            for j in range(i + 1, n):
                w = row[j]
                if not math.isfinite(w) or w < 0.0:
                    raise MatchingError(f"weight({i}, {j}) = {w!r} is not a finite value >= 0")
                if w != rows[j][i]:
                    raise MatchingError(f"weight({i}, {j}) differs from weight({j}, {i})")
        object.__setattr__(self, "weights", rows)

    @classmethod
    def from_function(cls, n: int, weight) -> PairGraph:
        rows = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                rows[i][j] = rows[j][i] = float(weight(i, j))
        return cls(rows)

    @property
    def n(self) -> int:
        return len(self.weights)

    def weight(self, i: int, j: int) -> float:
        return self.weights[i][j]


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]
    total_weight: float

    def partner(self, v: int) -> int:
        for a, b in self.pairs:
            if a == v:
                return b
            if b == v:
                return a
        raise KeyError(v)


def _check_even(graph: PairGraph):
    n = graph.n
    if n < 2 or n % 2:
        raise MatchingError(
            f"perfect matching needs an even number of vertices >= 2, got {n}; "
            "pad with a zero-weight dummy vertex")


def quantize(graph: PairGraph) -> list[list[int]]:
    """Integer weights ``round((w - lo) / (hi - lo) * 2**QUANT_BITS)``."""
    n = graph.n
    off = [graph.weights[i][j] for i in range(n) for j in range(i + 1, n)]
    lo, hi = min(off), max(off)
    span = hi - lo
    scale = (1 << QUANT_BITS) / span if span > 0 else 0.0
    q = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            q[i][j] = q[j][i] = int(round((graph.weights[i][j] - lo) * scale))
    return q


def _finish(graph: PairGraph, pairs) -> Matching:
    pairs = tuple(sorted((min(a, b), max(a, b)) for a, b in pairs))
    return Matching(pairs, math.fsum(graph.weights[a][b] for a, b in pairs))


def _solve(q: Sequence[Sequence[int]], vertices: Sequence[int]):
    """Optimal matching of the subgraph induced by ``vertices``.

    Returns ``(mate, dual, blossomparent, cost)`` in local indices, where
    ``cost`` is the summed quantised weight of the matching.
    """
    m = len(vertices)
    top = max((q[a][b] for ia, a in enumerate(vertices) for b in vertices[ia + 1:]), default=0)
    ceiling = top + 1
    # all converted weights are >= 1, so the maximum-weight matching is perfect
    w = [[ceiling - q[a][b] if a != b else 0 for b in vertices] for a in vertices]
    mate, dual, parent = kernels.max_weight_matching(w)
    if any(v < 0 for v in mate):
        raise MatchingError("blossom kernel returned an imperfect matching")
    cost = sum(q[vertices[i]][vertices[mate[i]]] for i in range(m) if i < mate[i])
    return mate, dual, parent, w, cost


def tight_edges(weights, dual, blossomparent) -> set[tuple[int, int]]:
    """Edges with zero reduced cost under the final dual solution.

    The reduced cost of (i, j) is ``dual[i] + dual[j] - 2 w(i, j)`` plus twice
    the duals of every blossom containing both endpoints.  Every maximum
    matching uses only such edges.
    """
    n = len(weights)

    def chain(v):
        out = []
        b = blossomparent[v]
        while b != -1:
            out.append(b)
            b = blossomparent[b]
        return out

    chains = [chain(v) for v in range(n)]
    out = set()
    for i in range(n):
        ci = set(chains[i])
        for j in range(i + 1, n):
            common = sum(dual[b] for b in chains[j] if b in ci)
            if dual[i] + dual[j] - 2 * weights[i][j] + 2 * common == 0:
                out.add((i, j))
    return out


def min_weight_perfect_matching(graph: PairGraph) -> Matching:
    """Minimum-weight perfect matching; lexicographically smallest on ties."""
    _check_even(graph)
    q = quantize(graph)
    remaining = list(range(graph.n))
    pairs = []
    while remaining:
        mate, dual, parent, w, best = _solve(q, remaining)
        if len(remaining) == 2:
            pairs.append((remaining[0], remaining[1]))
            break
        tight = tight_edges(w, dual, parent)
        v = remaining[0]
        chosen = None
        for lu in range(1, len(remaining)):
            if (0, lu) not in tight:
                continue
            if mate[0] == lu:
                chosen = lu
                break
            u = remaining[lu]
            rest = [x for x in remaining if x != v and x != u]
            if q[v][u] + _solve(q, rest)[4] == best:
                chosen = lu
                break
        if chosen is None:
            chosen = mate[0]
        pairs.append((v, remaining[chosen]))
        u = remaining[chosen]
        remaining = [x for x in remaining if x != v and x != u]
    return _finish(graph, pairs)


def perfect_matchings(vertices: Sequence[int]) -> Iterator[list[tuple[int, int]]]:
    """All perfect matchings of ``vertices`` in lexicographic order."""
    if not vertices:
        yield []
        return
    v = vertices[0]
    for k in range(1, len(vertices)):
        u = vertices[k]
        rest = list(vertices[1:k]) + list(vertices[k + 1:])
        for sub in perfect_matchings(rest):
            yield [(v, u)] + sub


def brute_force_matching(graph: PairGraph) -> Matching:
    """Exhaustive reference; same quantisation and tie-break as the blossom path."""
    _check_even(graph)
    if graph.n > BRUTE_FORCE_LIMIT:
        raise MatchingError(
            f"brute force is limited to {BRUTE_FORCE_LIMIT} vertices, got {graph.n}")
    q = quantize(graph)
    best = None
    best_pairs = None
    for pm in perfect_matchings(list(range(graph.n))):
        cost = sum(q[a][b] for a, b in pm)
        # enumeration is lexicographic, so the first optimum is the smallest
        if best is None or cost < best:
            best, best_pairs = cost, pm
    return _finish(graph, best_pairs)

"""Combinatorics of the trivalent tree dual to the Farey triangulation.

Regions of the tree are slopes p/q in Q u {oo}, stored as reduced integer
pairs with q >= 0 (and oo = 1/0).  Two regions share an edge exactly when
the slopes are Farey neighbours, |ps - rq| = 1.  Nothing is stored
globally: neighbours, edges and partitions are recomputed from integer
arithmetic on demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator, NamedTuple


class NotNeighbors(ValueError):
    pass


class BadMatrix(ValueError):
    pass


class NotHyperbolic(ValueError):
    pass


class Slope(NamedTuple):
    p: int
    q: int

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"

    def sort_key(self) -> tuple[int, Fraction]:
        # oo sorts last; otherwise ordinary rational order.
        if self.q == 0:
            return (1, Fraction(0))
        return (0, Fraction(self.p, self.q))


# Regions are in bijection with slopes; the alias keeps signatures readable.
Region = Slope

INF = Slope(1, 0)
ZERO = Slope(0, 1)
ONE = Slope(1, 1)


def slope(p: int, q: int) -> Slope:
    """Reduced slope with q >= 0; (p, 0) normalises to 1/0."""
    if p == 0 and q == 0:
        raise ValueError("0/0 is not a slope")
    g = gcd(p, q)
    p, q = p // g, q // g
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return Slope(p, q)


def parse_slope(text: str) -> Slope:
    text = text.strip()
    if text in ("oo", "inf", "infinity", "1/0"):
        return INF
    if "/" in text:
        p, q = text.split("/")
        return slope(int(p), int(q))
    return slope(int(text), 1)


def are_neighbors(a: Slope, b: Slope) -> bool:
    return abs(a.p * b.q - b.p * a.q) == 1


def base_vertex() -> tuple[Region, Region, Region]:
    """The regions X(oo), Y(0), Z(1) meeting at the base vertex."""
    return INF, ZERO, ONE


def edge_quad(X: Region, Y: Region) -> tuple[Region, Region]:
    """The two regions adjacent to both X and Y: (mediant, difference)."""
    if not are_neighbors(X, Y):
        raise NotNeighbors(f"{X} and {Y} are not Farey neighbours")
    return slope(X.p + Y.p, X.q + Y.q), slope(X.p - Y.p, X.q - Y.q)


def other_region(X: Region, Y: Region, Z: Region) -> Region:
    """The region across the edge X n Y from Z."""
    m, d = edge_quad(X, Y)
    if Z == m:
        return d
    if Z == d:
        return m
    raise NotNeighbors(f"{Z} does not meet the edge {X} n {Y}")


@dataclass(frozen=True)
class DirectedEdge:
    """The directed edge (X, Y; Z -> W): coasts X, Y, tail region Z, head region W."""

    X: Region
    Y: Region
    Z: Region
    W: Region

    @classmethod
    def toward(cls, X: Region, Y: Region, head: Region) -> "DirectedEdge":
        return cls(X, Y, other_region(X, Y, head), head)

    @classmethod
    def away_from(cls, X: Region, Y: Region, tail: Region) -> "DirectedEdge":
        return cls(X, Y, tail, other_region(X, Y, tail))

    def reverse(self) -> "DirectedEdge":
        return DirectedEdge(self.X, self.Y, self.W, self.Z)

    def undirected(self) -> frozenset:
        return frozenset((self.X, self.Y))


def farey_parents(r: Slope) -> tuple[Slope, Slope] | None:
    """The two Farey neighbours of ``r`` that are closer to the base vertex.

    Returns None for the base regions oo, 0 and 1.  For every other slope
    the result (A, B) satisfies: A, B are Farey neighbours and ``r`` is one
    of the two regions adjacent to A n B.
    """
    p, q = r
    if r in (INF, ZERO, ONE):
        return None
    if q == 1:
        if p >= 2:
            return slope(p - 1, 1), INF
        return slope(p + 1, 1), INF
    # Neighbours with smaller denominator: p*s - q*r' = +-1, 0 < s < q.
    s = pow(p % q, -1, q)
    left = slope((p * s - 1) // q, s)
    right = slope(p - left.p, q - left.q)
    return left, right


def tree_distance(r: Slope) -> int:
    """Number of parent steps from ``r`` to the base vertex."""
    depth = 0
    while True:
        parents = farey_parents(r)
        if parents is None:
            return depth
        a, b = parents
        r = max(a, b, key=lambda s: (s.q, abs(s.p)))
        depth += 1


def neighbors_around(X: Region, start: Region, count: int) -> list[Region]:
    """``count`` consecutive neighbours of X starting at ``start``, walking one way.

    The walk direction is fixed by integer arithmetic: the n-th neighbour is
    start + n*X (as integer vectors), which preserves |det| = 1.
    """
    if not are_neighbors(X, start):
        raise NotNeighbors(f"{start} does not meet {X}")
    return [slope(start.p + n * X.p, start.q + n * X.q) for n in range(count)]


def act(M, X: Region) -> Region:
    """Action of an integer matrix with det +-1 on slopes."""
    (a, b), (c, d) = M
    if abs(a * d - b * c) != 1:
        raise BadMatrix("matrix must have determinant +-1")
    return slope(a * X.p + b * X.q, c * X.p + d * X.q)


L_MATRIX = ((1, 1), (0, 1))
R_MATRIX = ((1, 0), (1, 1))


def matmul(M, N):
    (a, b), (c, d) = M
    (e, f), (g, h) = N
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def matinv(M):
    (a, b), (c, d) = M
    det = a * d - b * c
    return ((d * det, -b * det), (-c * det, a * det))


def word_matrix(word: str):
    """Product of L and R factors; lower-case letters are inverses."""
    M = ((1, 0), (0, 1))
    table = {
        "L": L_MATRIX,
        "R": R_MATRIX,
        "l": matinv(L_MATRIX),
        "r": matinv(R_MATRIX),
    }
    for ch in word:
        if ch not in table:
            raise ValueError(f"bad monodromy letter {ch!r}")
        M = matmul(M, table[ch])
    return M


def fibonacci(e: tuple[Region, Region], X: Region) -> int:
    """Fibonacci weight F_e(X): 1 on the coasts of e, additive away from e.

    An integer matrix sending the coasts of e to oo and 0 turns the weight
    into |p| + |q| of the transformed slope.
    """
    (p, q), (r, s) = e
    if abs(p * s - r * q) != 1:
        raise NotNeighbors("fibonacci needs an edge")
    Xp = act(matinv(((p, r), (q, s))), X)
    return abs(Xp.p) + abs(Xp.q)


def side_of_edge(edge: DirectedEdge, X: Region) -> int:
    """+1 if X is in the head component, -1 if in the tail component, 0 on the coasts."""
    if X in (edge.X, edge.Y):
        return 0
    M = matinv(((edge.X.p, edge.Y.p), (edge.X.q, edge.Y.q)))
    Xp, Wp = act(M, X), act(M, edge.W)
    # After the change of basis the coasts are oo and 0; the two sides are
    # the slopes of positive and negative sign.
    return 1 if (Xp.p > 0) == (Wp.p > 0) else -1


def stern_brocot(lo: Slope, hi: Slope, depth: int) -> Iterator[Slope]:
    """Mediants between neighbours ``lo`` and ``hi`` down to ``depth`` levels (in order)."""
    if depth <= 0:
        return
    mid = slope(lo.p + hi.p, lo.q + hi.q)
    yield from stern_brocot(lo, mid, depth - 1)
    yield mid
    yield from stern_brocot(mid, hi, depth - 1)


# -- monodromy axis ---------------------------------------------------------


@dataclass
class AxisDescription:
    """One period of the H-invariant path in the tree.

    ``edges`` lists (left coast, right coast) for the m edges of a period.
    ``left_edges`` holds, for each change of left coast, the triple
    (X_{j-1}, X_j, head) describing the edge X_{j-1} n X_j whose head lies
    on the path; ``right_edges`` is the mirror image.
    """

    word: str
    period: int
    edges: list[tuple[Region, Region]]
    left: list[Region]
    right: list[Region]
    left_edges: list[tuple[Region, Region, Region]]
    right_edges: list[tuple[Region, Region, Region]]
    matrix: tuple
    conjugator: tuple
    sign: int

    def to_json(self) -> dict:
        return {
            "word": self.word,
            "period": self.period,
            "left": [str(s) for s in self.left],
            "right": [str(s) for s in self.right],
        }


def _fix_form(M, X: Slope) -> int:
    # Homogeneous quadratic vanishing exactly at the fixed points of M.
    (a, b), (c, d) = M
    return c * X.p * X.p + (d - a) * X.p * X.q - b * X.q * X.q


def _crossing(M, X: Slope, Y: Slope) -> bool:
    return (_fix_form(M, X) > 0) != (_fix_form(M, Y) > 0)


def _find_crossing_edge(H, limit: int = 200_000) -> tuple[Region, Region]:
    from collections import deque

    seen = {frozenset((INF, ZERO))}
    queue = deque([(INF, ZERO)])
    while queue and limit > 0:
        X, Y = queue.popleft()
        limit -= 1
        if _crossing(H, X, Y):
            return X, Y
        for Z in edge_quad(X, Y):
            for e in ((X, Z), (Z, Y)):
                key = frozenset(e)
                if key not in seen:
                    seen.add(key)
                    queue.append(e)
    raise NotHyperbolic("no edge separates the fixed points")


def _frame(X: Region, Y: Region):
    """Integer matrix with det 1 sending oo to X and 0 to Y."""
    M = ((X.p, Y.p), (X.q, Y.q))
    if X.p * Y.q - Y.p * X.q == -1:
        M = ((X.p, -Y.p), (X.q, -Y.q))
    return M


def _attracting_side_positive(H) -> bool:
    # For H with the edge oo n 0 on its axis, decide whether the attracting
    # fixed point is positive.  Iterating H on 1 converges to it, and no
    # iterate can cross the separating edge backwards.
    (a, b), (c, d) = H
    p, q = 1, 1
    for _ in range(64):
        p, q = a * p + b * q, c * p + d * q
        if p == 0 or q == 0:
            continue
        g = gcd(p, q)
        p, q = p // g, q // g
    return (p > 0) == (q > 0)


def monodromy_axis(H, period_budget: int = 10_000) -> AxisDescription:
    """Walk one period of the path of Farey edges separating H's fixed points.

    The walk moves toward the attracting fixed point.  A turn is 'L' when
    the left coast is kept and 'R' when the right coast is kept, so a
    positive word in L and R reads back as its own period word starting from
    the base edge oo n 0.
    """
    if isinstance(H, str):
        if not H:
            raise ValueError("empty monodromy word")
        H = word_matrix(H)
    (a, b), (c, d) = H
    if a * d - b * c != 1:
        raise BadMatrix("monodromy must lie in SL(2, Z)")
    tr = a + d
    if abs(tr) <= 2:
        raise NotHyperbolic(f"trace {tr} is not hyperbolic")
    sign = 1 if tr > 0 else -1
    if sign < 0:
        H = ((-a, -b), (-c, -d))

    X, Y = _find_crossing_edge(H)
    G = _frame(X, Y)
    if not _attracting_side_positive(matmul(matmul(matinv(G), H), G)):
        G = _frame(Y, X)
    target = (act(H, act(G, INF)), act(H, act(G, ZERO)))

    F = G
    turns: list[str] = []
    edges: list[tuple[Region, Region]] = []
    left_edges: list[tuple[Region, Region, Region]] = []
    right_edges: list[tuple[Region, Region, Region]] = []
    for _ in range(period_budget):
        lc, rc = act(F, INF), act(F, ZERO)
        if edges and (lc, rc) == target:
            break
        edges.append((lc, rc))
        ahead = act(F, ONE)
        if _crossing(H, lc, ahead):
            turns.append("L")
            right_edges.append((rc, ahead, lc))
            F = matmul(F, L_MATRIX)
        else:
            turns.append("R")
            left_edges.append((lc, ahead, rc))
            F = matmul(F, R_MATRIX)
    else:
        raise NotHyperbolic("axis period exceeded budget")

    left = _period_regions(H, [e[0] for e in edges])
    right = _period_regions(H, [e[1] for e in edges])
    return AxisDescription(
        word="".join(turns),
        period=len(edges),
        edges=edges,
        left=left,
        right=right,
        left_edges=left_edges,
        right_edges=right_edges,
        matrix=H,
        conjugator=G,
        sign=sign,
    )


def _period_regions(H, coasts: list[Region]) -> list[Region]:
    out: list[Region] = []
    for r in coasts:
        if r not in out:
            out.append(r)
    # Drop a coast that is already the H-image of the first one.
    first_image = act(H, out[0])
    return [r for r in out if r != first_image]

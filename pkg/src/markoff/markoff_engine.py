"""mu-Markoff triples and the maps they generate on the Farey tree."""

from __future__ import annotations

import cmath
import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .branch_kernel import markoff_mu
from .farey_tree import (
    INF,
    ONE,
    ZERO,
    Region,
    act,
    are_neighbors,
    farey_parents,
    other_region,
    parse_slope,
    slope,
    word_matrix,
)


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class MuTriple:
    x: complex
    y: complex
    z: complex

    @property
    def mu(self) -> complex:
        return markoff_mu(self.x, self.y, self.z)

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return (self.x, self.y, self.z)


def vieta(x: complex, y: complex, z: complex) -> complex:
    """The value across the edge with coasts x, y from z: w = xy - z."""
    return x * y - z


def third_root(x: complex, y: complex, mu: complex) -> tuple[complex, complex]:
    """Both roots z of z^2 - xyz + x^2 + y^2 - mu = 0, smaller modulus first."""
    b = x * y
    disc = cmath.sqrt(b * b - 4.0 * (x * x + y * y - mu))
    r1, r2 = (b + disc) / 2.0, (b - disc) / 2.0
    # Recompute the small root from the product to avoid cancellation.
    big = r1 if abs(r1) >= abs(r2) else r2
    small = (x * x + y * y - mu) / big if big != 0 else 0j
    return small, big


class MarkoffMap:
    """A mu-Markoff map anchored at X(oo) = x, Y(0) = y, Z(1) = z.

    Values are produced lazily through the edge relation and memoised by
    slope.  The invariant mu is fixed from the seed once.
    """

    def __init__(self, x: complex, y: complex, z: complex):
        self.seed = MuTriple(complex(x), complex(y), complex(z))
        self.mu = self.seed.mu
        self._memo: dict[Region, complex] = {INF: self.seed.x, ZERO: self.seed.y, ONE: self.seed.z}
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        x, y, z = self.seed.as_tuple()
        return f"MarkoffMap({x!r}, {y!r}, {z!r})"

    def value(self, r: Region) -> complex:
        memo = self._memo
        v = memo.get(r)
        if v is not None:
            return v
        stack = [r]
        while stack:
            s = stack[-1]
            if s in memo:
                stack.pop()
                continue
            a, b = farey_parents(s)
            c = other_region(a, b, s)
            missing = [t for t in (a, b, c) if t not in memo]
            if missing:
                stack.extend(missing)
                continue
            w = memo[a] * memo[b] - memo[c]
            with self._lock:
                memo.setdefault(s, w)
            stack.pop()
        return memo[r]

    def __call__(self, r: Region) -> complex:
        return self.value(r)

    def materialized(self) -> dict[Region, complex]:
        return dict(self._memo)

    def preload(self, values: dict[Region, complex]) -> None:
        with self._lock:
            for k, v in values.items():
                self._memo.setdefault(k, complex(v))


def from_triple(x: complex, y: complex, z: complex) -> MarkoffMap:
    return MarkoffMap(x, y, z)


def from_mu(x: complex, y: complex, mu: complex, root: str = "small") -> MarkoffMap:
    """Map with X(oo) = x, Y(0) = y and Z(1) chosen as a root of the Markoff equation."""
    small, big = third_root(complex(x), complex(y), complex(mu))
    return MarkoffMap(x, y, small if root == "small" else big)


def vertex_residual(m: MarkoffMap, a: Region, b: Region, c: Region) -> float:
    x, y, z = m(a), m(b), m(c)
    return abs(markoff_mu(x, y, z) - m.mu)


# -- neighbours ---------------------------------------------------------------


def neighbor_sequence(m: MarkoffMap, X: Region, n_range: range, start: Region | None = None) -> list[complex]:
    """Values on the neighbours Y_n of X, Y_n = start + n X as integer vectors.

    ``start`` defaults to a parent of X (for the base regions, another base
    region).  Consecutive entries satisfy y_{n+1} = x y_n - y_{n-1}.
    """
    if start is None:
        start = _default_neighbor(X)
    if not are_neighbors(X, start):
        raise ValueError(f"{start} is not a neighbour of {X}")
    return [m(slope(start.p + n * X.p, start.q + n * X.q)) for n in n_range]


def _default_neighbor(X: Region) -> Region:
    if X == INF:
        return ZERO
    if X in (ZERO, ONE):
        return INF
    return farey_parents(X)[0]


# -- arrows and descent -------------------------------------------------------


@dataclass(frozen=True)
class Arrow:
    X: Region
    Y: Region
    tail: Region
    head: Region
    tie: bool = False


def arrow(m: MarkoffMap, X: Region, Y: Region, Z: Region | None = None) -> Arrow:
    """Arrow on the edge X n Y, pointing to the adjacent region of smaller modulus.

    Ties point to the region earlier in slope order.
    """
    from .farey_tree import edge_quad

    P, Q = edge_quad(X, Y)
    if Z is not None and Z == Q:
        P, Q = Q, P
    p, q = abs(m(P)), abs(m(Q))
    if p > q:
        return Arrow(X, Y, P, Q)
    if q > p:
        return Arrow(X, Y, Q, P)
    lo, hi = sorted((P, Q), key=lambda s: s.sort_key())
    return Arrow(X, Y, hi, lo, tie=True)


@dataclass
class DescentResult:
    kind: str  # "sink", "small", or "budget"
    vertex: tuple[Region, Region, Region]
    region: Region | None = None
    steps: int = 0
    lemma_violations: list = field(default_factory=list)


def descend(
    m: MarkoffMap,
    start: tuple[Region, Region, Region] = (INF, ZERO, ONE),
    budget: int = 100_000,
    small: float = 2.0,
) -> DescentResult:
    """Follow arrows from ``start`` until a sink or a region of modulus < ``small``."""
    A, B, C = start
    violations = []
    for step in range(budget):
        vals = {R: m(R) for R in (A, B, C)}
        low = min((A, B, C), key=lambda R: (abs(vals[R]), R.sort_key()))
        if abs(vals[low]) < small:
            return DescentResult("small", (A, B, C), low, step, violations)
        outgoing = []
        for P, Q, R in ((A, B, C), (B, C, A), (C, A, B)):
            arr = arrow(m, P, Q, R)
            if arr.head != R:
                outgoing.append((abs(m(arr.head)), P, Q, arr.head))
        if len(outgoing) >= 2:
            # Two arrows leaving a vertex force the shared coast into |x| <= 2.
            shared = set(outgoing[0][1:3]) & set(outgoing[1][1:3])
            for S in shared:
                if abs(m(S)) > 2.0 + 1e-9:
                    violations.append((A, B, C, S))
        if not outgoing:
            return DescentResult("sink", (A, B, C), None, step, violations)
        outgoing.sort(key=lambda t: (t[0], t[3].sort_key()))
        _, P, Q, D = outgoing[0]
        A, B, C = P, Q, D
    return DescentResult("budget", (A, B, C), None, budget, violations)


# -- representations ----------------------------------------------------------


def reconstruct_representation(x: complex, y: complex, z: complex) -> tuple[np.ndarray, np.ndarray]:
    """Unimodular A, B with tr A = x, tr B = y, tr AB = z.

    A = [[x, -1], [1, 0]] and B = [[0, s], [-1/s, y]] with s + 1/s = z.  The
    chart is total: s is never zero, so no fallback is required.
    """
    x, y, z = complex(x), complex(y), complex(z)
    s = (z + cmath.sqrt(z * z - 4.0)) / 2.0
    A = np.array([[x, -1.0], [1.0, 0.0]], dtype=complex)
    B = np.array([[0.0, s], [-1.0 / s, y]], dtype=complex)
    return A, B


# -- mapping classes ----------------------------------------------------------


def apply_mapping_class(m: MarkoffMap, word: str) -> MarkoffMap:
    """The map X -> m(H X), where H is the product of the L/R letters of ``word``."""
    H = word_matrix(word)
    return MarkoffMap(m(act(H, INF)), m(act(H, ZERO)), m(act(H, ONE)))


def apply_matrix(m: MarkoffMap, H) -> MarkoffMap:
    return MarkoffMap(m(act(H, INF)), m(act(H, ZERO)), m(act(H, ONE)))


def klein_sign(m: MarkoffMap, signs: tuple[int, int, int]) -> MarkoffMap:
    """Sign change of the seed by (+-1, +-1, +-1) with an even number of minus signs."""
    sx, sy, sz = signs
    if sx * sy * sz != 1:
        raise ValueError("sign changes must have product +1")
    x, y, z = m.seed.as_tuple()
    return MarkoffMap(sx * x, sy * y, sz * z)


# -- snapshots and cache ------------------------------------------------------


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def snapshot(m: MarkoffMap) -> dict:
    items = sorted(m.materialized().items(), key=lambda kv: kv[0].sort_key())
    return {
        "mu": _pair(m.mu),
        "seed": [_pair(v) for v in m.seed.as_tuple()],
        "values": [{"slope": str(k), "re": v.real, "im": v.imag} for k, v in items],
    }


def from_snapshot(data: dict) -> MarkoffMap:
    seed = [complex(*p) for p in data["seed"]]
    m = MarkoffMap(*seed)
    m.preload({parse_slope(e["slope"]): complex(e["re"], e["im"]) for e in data["values"]})
    return m


def cache_key(seed: tuple[complex, complex, complex], mu: complex, depth: int) -> str:
    payload = json.dumps({"seed": [_pair(complex(v)) for v in seed], "mu": _pair(complex(mu)), "depth": depth})
    return hashlib.sha256(payload.encode()).hexdigest()[:32]


def cache_dir() -> Path:
    root = os.environ.get("MARKOFF_CACHE_DIR")
    if root:
        return Path(root)
    return Path.home() / ".cache" / "markoff"


def load_cached(seed, depth: int, directory: Path | None = None) -> MarkoffMap | None:
    m = MarkoffMap(*seed)
    path = (directory or cache_dir()) / f"{cache_key(seed, m.mu, depth)}.json"
    if not path.exists():
        return None
    try:
        return from_snapshot(json.loads(path.read_text()))
    except (ValueError, KeyError):
        return None


def store_cached(m: MarkoffMap, depth: int, directory: Path | None = None) -> Path:
    directory = directory or cache_dir()
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{cache_key(m.seed.as_tuple(), m.mu, depth)}.json"
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(snapshot(m)))
    tmp.replace(path)
    return path

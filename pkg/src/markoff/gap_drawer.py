"""Word pairs on the universal cover of the slope set, and pictures of their gaps.

Words in the free group on a, b are tuples of nonzero ints: 1 = a, 2 = b,
negative = inverse.  Every word handled here is freely reduced, so equality
of tuples is equality in the group.

Integer indices follow

    R_0 = a,  L_1 = b,  L_n^-1 R_n = c,  L_{n+2} = R_n^-1,

with c = b^-1 a^-1 b a, and a Farey mediant (p+r)/(q+s) of neighbours
p/q < r/s gets L = R_{p/q} L_{r/s}, R = L_{r/s} R_{p/q}.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .farey_tree import Slope, slope
from .geometry_verify import INFTY, NotLoxodromic, fixed_points, inv, is_inf, mobius

Word = tuple[int, ...]

A_LETTER, B_LETTER = 1, 2
C_WORD: Word = (-2, -1, 2, 1)
_LETTERS = {1: "a", 2: "b", -1: "A", -2: "B"}
_PARSE = {v: k for k, v in _LETTERS.items()}


class UnsupportedFormat(ValueError):
    pass


class NonLoxodromicWord(ValueError):
    pass


def reduce_word(letters) -> Word:
    out: list[int] = []
    for x in letters:
        if x not in _LETTERS:
            raise ValueError(f"bad letter {x!r}")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def mul(*words: Word) -> Word:
    return reduce_word(x for w in words for x in w)


def inverse(w: Word) -> Word:
    return tuple(-x for x in reversed(w))


def commutator(u: Word, v: Word) -> Word:
    """[u, v] = u v u^-1 v^-1, so that c = [b^-1, a^-1] = b^-1 a^-1 b a."""
    return mul(u, v, inverse(u), inverse(v))


C_INV = inverse(C_WORD)


def word_str(w: Word) -> str:
    """Capital letters are inverses; the empty word prints as 1."""
    return "".join(_LETTERS[x] for x in w) or "1"


def parse_word(s: str) -> Word:
    if s in ("", "1"):
        return ()
    try:
        return reduce_word(_PARSE[ch] for ch in s)
    except KeyError as exc:
        raise ValueError(f"bad letter in word {s!r}") from exc


# -- word pairs ----------------------------------------------------------------


@dataclass(frozen=True)
class WordPair:
    index: Fraction
    L: Word
    R: Word


@lru_cache(maxsize=None)
def _integer_pair(n: int) -> tuple[Word, Word]:
    if n == 0:
        R = (A_LETTER,)
        return mul(R, C_INV), R
    if n == 1:
        L = (B_LETTER,)
        return L, mul(L, C_WORD)
    if n >= 2:
        L = inverse(_integer_pair(n - 2)[1])
        return L, mul(L, C_WORD)
    R = inverse(_integer_pair(n + 2)[0])
    return mul(R, C_INV), R


def farey_parents_q(t: Fraction) -> tuple[Fraction, Fraction] | None:
    """The Farey neighbours p/q < r/s whose mediant is t; None for integers."""
    if t.denominator == 1:
        return None
    n = math.floor(t)
    lo, hi = (n, 1), (n + 1, 1)
    while True:
        med = (lo[0] + hi[0], lo[1] + hi[1])
        mf = Fraction(*med)
        if mf == t:
            return Fraction(*lo), Fraction(*hi)
        if t < mf:
            hi = med
        else:
            lo = med


@lru_cache(maxsize=None)
def _pair(t: Fraction) -> tuple[Word, Word]:
    parents = farey_parents_q(t)
    if parents is None:
        return _integer_pair(int(t))
    lo, hi = parents
    L_lo, R_lo = _pair(lo)
    L_hi, R_hi = _pair(hi)
    return mul(R_lo, L_hi), mul(L_hi, R_lo)


def word_pair(index) -> WordPair:
    t = Fraction(index)
    L, R = _pair(t)
    return WordPair(t, L, R)


def index_to_slope(index) -> Slope:
    """Slope of the free homotopy class of L_index (the index is not the slope).

    Indices are 2-periodic up to inversion; [0, 1] maps to slopes by
    t -> (1 - t)/t and (1, 2) by t -> (1 - t)/(2 - t).  With
    x = tr A, y = tr B, z = tr AB this puts a at infinity, b at 0, ab at 1.
    """
    t = Fraction(index) % 2
    if t == 0:
        return slope(1, 0)
    if t <= 1:
        v = (1 - t) / t
    else:
        v = (1 - t) / (2 - t)
    return slope(v.numerator, v.denominator)


def indices(lo: int, hi: int, max_den: int) -> list[Fraction]:
    """All rationals in [lo, hi] with denominator at most ``max_den``, ascending."""
    out = {Fraction(p, q) for q in range(1, max_den + 1) for p in range(lo * q, hi * q + 1)}
    return sorted(out)


def stern_brocot_indices(lo: int, hi: int, depth: int) -> list[Fraction]:
    """Integers in [lo, hi] plus every mediant within ``depth`` levels between consecutive ones."""
    out = set()
    for n in range(lo, hi):
        level = [Fraction(n), Fraction(n + 1)]
        out.update(level)
        for _ in range(depth):
            nxt = [level[0]]
            for u, v in zip(level, level[1:]):
                nxt.append(Fraction(u.numerator + v.numerator, u.denominator + v.denominator))
                nxt.append(v)
            level = nxt
        out.update(level)
    if lo == hi:
        out.add(Fraction(lo))
    return sorted(out)


# -- evaluation ------------------------------------------------------------------


def evaluate(word: Word, rep) -> np.ndarray:
    A, B = (np.asarray(M, dtype=complex) for M in rep)
    gens = {1: A, 2: B, -1: inv(A), -2: inv(B)}
    M = np.eye(2, dtype=complex)
    for x in word:
        M = M @ gens[x]
    return M


def parabolic_example() -> tuple[np.ndarray, np.ndarray]:
    """The once-punctured-torus holonomy with C = z -> z - 4."""
    r = math.sqrt(2.0)
    A = np.array([[0.0, r / 2.0], [-r, 2.0 * r]], dtype=complex)
    B = np.array([[r, r / 2.0], [r, r]], dtype=complex)
    return A, B


def normalizer(C: np.ndarray, mode: str = "auto") -> tuple[np.ndarray, str]:
    """Matrix M so that M C M^-1 has the requested normal form.

    A parabolic commutator is sent to one fixing infinity; a loxodromic one to
    one fixing 0 (repelling) and infinity (attracting).
    """
    if mode == "none":
        return np.eye(2, dtype=complex), "none"
    tr = complex(np.trace(C))
    parabolic = abs(tr * tr - 4.0) < 1e-9
    if mode == "auto":
        mode = "parabolic" if parabolic else "loxodromic"
    if mode == "parabolic":
        if abs(C[1, 0]) < 1e-12:
            return np.eye(2, dtype=complex), mode
        f = (C[0, 0] - C[1, 1]) / (2.0 * C[1, 0])
        return np.array([[0, 1], [-1, f]], dtype=complex), mode
    if mode == "loxodromic":
        plus, minus = fixed_points(C)
        if is_inf(plus):
            M = np.array([[1, -minus], [0, 1]], dtype=complex)
        elif is_inf(minus):
            M = np.array([[0, 1], [-1, plus]], dtype=complex)
        else:
            M = np.array([[1, -minus], [1, -plus]], dtype=complex)
            M = M / np.sqrt(complex(np.linalg.det(M)))
        return M, mode
    raise ValueError(f"unknown normalization {mode!r}")


@dataclass(frozen=True)
class GapSegment:
    index: Fraction
    start: complex  # attracting fixed point of rho(L)
    end: complex  # attracting fixed point of rho(R)
    L: Word
    R: Word


def gap_segments(rep, index_set, normalization: str = "auto", diagnostics: list | None = None) -> list[GapSegment]:
    """One segment per index, joining the attracting fixed points of rho(L) and rho(R).

    Words whose image is not loxodromic are skipped; their index and reason
    are appended to ``diagnostics`` when given.
    """
    A, B = (np.asarray(M, dtype=complex) for M in rep)
    M, _ = normalizer(evaluate(C_WORD, (A, B)), normalization)
    Mi = inv(M)
    rep_n = (M @ A @ Mi, M @ B @ Mi)
    out = []
    for t in index_set:
        wp = word_pair(t)
        try:
            s = fixed_points(evaluate(wp.L, rep_n))[0]
            e = fixed_points(evaluate(wp.R, rep_n))[0]
        except NotLoxodromic as exc:
            if diagnostics is not None:
                diagnostics.append(NonLoxodromicWord(f"index {wp.index}: {exc}"))
            continue
        out.append(GapSegment(wp.index, complex(s), complex(e), wp.L, wp.R))
    return out


def shift_segments(segments: list[GapSegment], M: np.ndarray) -> list[tuple[complex, complex]]:
    return [(mobius(M, s.start), mobius(M, s.end)) for s in segments]


# -- rendering -----------------------------------------------------------------


def _finite(segments):
    return [s for s in segments if not (is_inf(s.start) or is_inf(s.end))]


def _fmt(v: float) -> str:
    return f"{v + 0.0:.10g}"  # no "-0"


def to_json(segments: list[GapSegment], meta: dict | None = None) -> dict:
    rows = []
    for s in segments:
        row = {"index": str(s.index), "L": word_str(s.L), "R": word_str(s.R)}
        for key, p in (("1", s.start), ("2", s.end)):
            row["x" + key] = None if is_inf(p) else p.real
            row["y" + key] = None if is_inf(p) else p.imag
        rows.append(row)
    return {"meta": meta or {}, "segments": rows}


def _svg(segments: list[GapSegment]) -> str:
    segs = _finite(segments)
    if segs:
        xs = [p.real for s in segs for p in (s.start, s.end)]
        ys = [-p.imag for s in segs for p in (s.start, s.end)]
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    pad = 0.05 * max(x1 - x0, y1 - y0, 1e-9)
    w, hgt = x1 - x0 + 2 * pad, y1 - y0 + 2 * pad
    stroke = _fmt(max(w, hgt) / 500.0)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_fmt(x0 - pad)} {_fmt(y0 - pad)} {_fmt(w)} {_fmt(hgt)}">',
    ]
    for s in segs:
        # SVG y grows downward; flip so the upper half plane is up.
        d = f"M {_fmt(s.start.real)} {_fmt(-s.start.imag)} L {_fmt(s.end.real)} {_fmt(-s.end.imag)}"
        lines.append(f'<path data-index="{s.index}" d="{d}" stroke="black" stroke-width="{stroke}" fill="none"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render(segments: list[GapSegment], fmt: str, meta: dict | None = None) -> bytes:
    if fmt == "json":
        return (json.dumps(to_json(segments, meta), indent=2, sort_keys=True) + "\n").encode()
    if fmt == "svg":
        return _svg(segments).encode()
    raise UnsupportedFormat(f"format {fmt!r} is not one of json, svg")


def render_png(segments: list[GapSegment], path, title: str | None = None) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    for s in _finite(segments):
        ax.plot([s.start.real, s.end.real], [s.start.imag, s.end.imag], color="black", lw=0.8)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    if title:
        ax.set_title(title)
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=150, metadata={"Software": None})
    plt.close(fig)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())

"""Exact expectations of (1/n) Tr H^k by enumerating index coincidences.

H = (v^2/rho) B - (v/sqrt(rho)) A. Expanding H^k gives 2^k words in A and B.
In the trace, every A moves the walker along an edge and every B stays put
but adds a free neighbour index through d_i = sum_j a_ij. The expectation of
a word is a sum over set partitions of these indices: a partition with c
blocks is realised by [n]_c assignments, vanishes if any factor joins a
block to itself, and otherwise scores p^e with e the number of distinct
block pairs used (p = rho/n).

Nothing here touches random numbers or eigenvalues; it is the reference the
Monte Carlo estimates are checked against.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from fractions import Fraction
from functools import lru_cache

MAX_ORDER = 7


def _restricted_growth(nvars: int):
    """All set partitions of range(nvars) as block labels."""
    labels = [0] * nvars

    def rec(i, top):
        if i == nvars:
            yield tuple(labels)
            return
        for b in range(top + 2):
            labels[i] = b
            yield from rec(i + 1, max(top, b))

    if nvars == 0:
        yield ()
        return
    yield from rec(1, 0)


def _word_factors(word: tuple[str, ...]):
    """Index pairs (x, y) of the a_xy factors of one word, and the variable count."""
    a = word.count("A")
    npath = max(a, 1)
    nxt = npath
    pos = 0
    factors = []
    for letter in word:
        if letter == "A":
            factors.append((pos, (pos + 1) % npath))
            pos = (pos + 1) % npath
        else:
            factors.append((pos, nxt))
            nxt += 1
    return factors, nxt


@lru_cache(maxsize=None)
def word_census(word: tuple[str, ...]) -> dict[tuple[int, int], int]:
    """Map (blocks c, distinct edges e) -> number of contributing partitions."""
    factors, nvars = _word_factors(word)
    census: dict[tuple[int, int], int] = defaultdict(int)
    for labels in _restricted_growth(nvars):
        edges = set()
        for x, y in factors:
            bx, by = labels[x], labels[y]
            if bx == by:
                break
            edges.add((bx, by) if bx < by else (by, bx))
        else:
            census[(max(labels) + 1, len(edges))] += 1
    return dict(census)


def _words(k: int):
    return itertools.product("AB", repeat=k)


def _check_order(k: int):
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > MAX_ORDER:
        raise ValueError(f"enumeration limited to k <= {MAX_ORDER}, got {k}")


def _falling(n: int, c: int) -> int:
    out = 1
    for i in range(c):
        out *= n - i
    return out


def exact_moment_terms(n: int, rho, k: int) -> dict[tuple[int, int], Fraction]:
    """S[(a, b)] = sum over words with a A's and b B's of (1/n) E Tr(word).

    Exact in ``rho`` (converted with ``Fraction``) and ``n``.
    """
    _check_order(k)
    if n < 1:
        raise ValueError("n must be positive")
    p = Fraction(rho) / n
    if not 0 <= p <= 1:
        raise ValueError("need 0 <= rho <= n")
    terms: dict[tuple[int, int], Fraction] = defaultdict(Fraction)
    for word in _words(k):
        total = Fraction(0)
        for (c, e), count in word_census(word).items():
            total += count * _falling(n, c) * p**e
        key = (word.count("A"), word.count("B"))
        terms[key] += total / n
    return dict(terms)


def exact_moment_oracle(n: int, rho, v, k: int) -> float:
    """E (1/n) Tr H^k for the G(n, rho/n) ensemble, by exhaustive enumeration."""
    if k == 0:
        return 1.0
    rho_f = float(rho)
    v = float(v)
    out = 0.0
    for (a, b), s in exact_moment_terms(n, rho, k).items():
        if s == 0:
            continue
        out += float(s) * (v * v / rho_f) ** b * (-v / math.sqrt(rho_f)) ** a
    return out


def moment_expansion(k: int) -> dict[int, dict[int, Fraction]]:
    """Large-n, large-rho expansion of E (1/n) Tr H^k.

    Returns ``{j: {q: c}}`` meaning the coefficient of rho^(-j) is
    sum_q c v^q, after first sending n -> infinity at fixed rho. Only
    tree-shaped partitions (c = e + 1) survive that limit, each scoring
    rho^e.
    """
    _check_order(k)
    out: dict[int, dict[int, Fraction]] = defaultdict(lambda: defaultdict(Fraction))
    for word in _words(k):
        a, b = word.count("A"), word.count("B")
        for (c, e), count in word_census(word).items():
            if c > e + 1:
                raise AssertionError("index graph must be connected")
            if c < e + 1:
                continue
            # rho power: e - b - a/2; tree walks force a even
            twice = 2 * (e - b) - a
            if twice % 2:
                raise AssertionError("odd A-count on a tree-shaped walk")
            j = -(twice // 2)
            if j < 0:
                raise AssertionError("positive power of rho in the expansion")
            out[j][2 * b + a] += (-1) ** a * count
    return {j: {q: c for q, c in poly.items() if c} for j, poly in out.items()}


def _eval_poly(poly: dict[int, Fraction], v: float) -> float:
    return math.fsum(float(c) * v**q for q, c in poly.items())


def limit_moment_enumerated(k: int, v: float) -> float:
    """rho^0 coefficient of the expansion: the limiting moment."""
    if k == 0:
        return 1.0
    return _eval_poly(moment_expansion(k).get(0, {}), v)


def correction_oracle(k: int, v: float) -> float:
    """rho^-1 coefficient: lim rho (M_k - limit moment) in the sparse regime."""
    return _eval_poly(moment_expansion(k).get(1, {}), v)


def correction_oracle_poly(k: int) -> dict[int, Fraction]:
    return dict(sorted(moment_expansion(k).get(1, {}).items()))

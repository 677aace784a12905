"""Exact unitary Weingarten function on S_n for an integer dimension N.

``Wg_N`` is the inverse, in the group algebra of S_n, of the class function
``sigma -> N^{#cycles(sigma)}``. Because both are central we invert inside the
centre: with ``x_lam`` the unknown value on the class ``lam`` and
``c_nu[lam, mu]`` the number of ways to write a fixed ``z`` in class ``nu`` as
``a * b`` with ``a`` in ``lam`` and ``b`` in ``mu``, the convolution identity
becomes the ``p(n) x p(n)`` system

    sum_{lam, mu} c_nu[lam, mu] * N^{len(mu)} * x_lam = [nu == (1^n)].

:func:`compute_table_full` solves the unreduced ``n! x n!`` system instead and
serves as an independent check for small n.

Permutations are 1-based one-line tuples; ``(2, 1, 3)`` swaps 1 and 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Mapping, Sequence

from .errors import CapacityError, ContractError, SingularityError
from .ncpart import Pairing, catalan, cycle_type, cycles, product_cycle_structure

__all__ = [
    "CycleType",
    "WeingartenTable",
    "N_MAX",
    "integer_partitions",
    "compute_table",
    "compute_table_full",
    "wg",
    "wg_pairings",
    "half_cycle_type",
    "leading_term",
    "solve_exact",
]

N_MAX = 8
FULL_N_MAX = 5


class CycleType(tuple):
    """Cycle lengths of a permutation, sorted in decreasing order."""

    def __new__(cls, parts: Sequence[int]):
        parts = tuple(sorted((int(p) for p in parts), reverse=True))
        if any(p < 1 for p in parts):
            raise ContractError(f"cycle lengths must be positive, got {parts}")
        return super().__new__(cls, parts)

    @property
    def n(self) -> int:
        return sum(self)

    @classmethod
    def of(cls, perm: Sequence[int]) -> "CycleType":
        return cls(cycle_type(perm))

    def __repr__(self):
        return f"CycleType({list(self)})"


def integer_partitions(n: int) -> list[CycleType]:
    """Partitions of n, lexicographically decreasing: ``(n), ..., (1^n)``."""
    out: list[tuple[int, ...]] = []

    def rec(rest, cap, acc):
        if rest == 0:
            out.append(tuple(acc))
            return
        for k in range(min(rest, cap), 0, -1):
            rec(rest - k, k, acc + [k])

    rec(n, n, [])
    return [CycleType(p) for p in out]


@dataclass(frozen=True)
class WeingartenTable:
    n: int
    N: int
    values: Mapping[CycleType, Fraction] = field(repr=False)

    def __call__(self, sigma) -> Fraction:
        return wg(self, sigma)

    def rows(self):
        """``(cycle_type, numerator, denominator)`` per class, in partition order."""
        for lam in integer_partitions(self.n):
            v = self.values[lam]
            yield lam, v.numerator, v.denominator


def solve_exact(A: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals; raises on a singular matrix."""
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(r)] for row, r in zip(A, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise SingularityError("singular Weingarten system")
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        pivot_row = [v * inv for v in M[col]]
        M[col] = pivot_row
        for r in range(n):
            f = M[r][col]
            if r != col and f != 0:
                row = M[r]
                M[r] = [a - f * b for a, b in zip(row, pivot_row)]
    return [M[r][n] for r in range(n)]


def _inverse_perm(p):
    inv = [0] * len(p)
    for x, y in enumerate(p, start=1):
        inv[y - 1] = x
    return tuple(inv)


def _mul(p, q):
    # (p q)(x) = p(q(x))
    return tuple(p[x - 1] for x in q)


@lru_cache(maxsize=None)
def _class_structure(n: int) -> tuple[tuple[CycleType, ...], tuple]:
    classes = tuple(integer_partitions(n))
    index = {lam: k for k, lam in enumerate(classes)}
    group = list(permutations(range(1, n + 1)))
    cls_of = {g: index[CycleType.of(g)] for g in group}
    counts = []
    for nu in classes:
        # representative of nu: consecutive cycles
        z, start = [0] * n, 1
        for length in nu:
            for k in range(length):
                z[start + k - 1] = start + (k + 1) % length
            start += length
        z = tuple(z)
        c = [[0] * len(classes) for _ in classes]
        for a in group:
            b = _mul(_inverse_perm(a), z)
            c[cls_of[a]][cls_of[b]] += 1
        counts.append(c)
    return classes, tuple(counts)


def _validate(n, N):
    if not isinstance(n, int) or n < 1:
        raise ContractError(f"n must be a positive integer, got {n!r}")
    if n > N_MAX:
        raise CapacityError(f"Weingarten tables are limited to n <= {N_MAX}, got n={n}")
    if not isinstance(N, int) or N < n:
        raise SingularityError(f"Weingarten function needs N >= n (got n={n}, N={N})")


@lru_cache(maxsize=None)
def compute_table(n: int, N: int) -> WeingartenTable:
    _validate(n, N)
    classes, counts = _class_structure(n)
    A = []
    rhs = []
    for nu, c in zip(classes, counts):
        A.append(
            [sum(c[l][m] * N ** len(mu) for m, mu in enumerate(classes)) for l in range(len(classes))]
        )
        rhs.append(1 if nu == CycleType([1] * n) else 0)
    x = solve_exact(A, rhs)
    return WeingartenTable(n, N, dict(zip(classes, x)))


def compute_table_full(n: int, N: int) -> WeingartenTable:
    """Oracle route: solve ``sum_sigma Wg(sigma) N^{#(sigma^-1 pi)} = [pi = e]`` over all of S_n."""
    _validate(n, N)
    if n > FULL_N_MAX:
        raise CapacityError(f"full group-algebra solve limited to n <= {FULL_N_MAX}")
    group = list(permutations(range(1, n + 1)))
    e = tuple(range(1, n + 1))
    A = [[N ** len(cycles(_mul(_inverse_perm(s), pi))) for s in group] for pi in group]
    rhs = [1 if pi == e else 0 for pi in group]
    x = solve_exact(A, rhs)
    values: dict[CycleType, Fraction] = {}
    for g, v in zip(group, x):
        lam = CycleType.of(g)
        if values.setdefault(lam, v) != v:
            raise ContractError(f"non-central solution on class {lam}")
    return WeingartenTable(n, N, values)


def wg(table: WeingartenTable, sigma) -> Fraction:
    """Value of ``Wg_N`` on a permutation (1-based one-line) or a :class:`CycleType`."""
    lam = sigma if isinstance(sigma, CycleType) else CycleType.of(sigma)
    if lam.n != table.n:
        raise ContractError(f"argument lives in S_{lam.n}, table is for S_{table.n}")
    return table.values[lam]


def half_cycle_type(p: Pairing, q: Pairing) -> CycleType:
    """Cycle type of ``c_1 ... c_k`` where ``pq = c_1 c_1' ... c_k c_k'``.

    The cycles of ``pq`` come in pairs of equal length, so halving every
    multiplicity recovers the type.
    """
    if p.n % 2:
        raise ContractError("pairings need an even ground set")
    full = product_cycle_structure(p, q)
    if any(full[k] != full[k + 1] for k in range(0, len(full), 2)):
        raise ContractError(f"cycles of pq do not pair up: {full}")
    return CycleType(full[::2])


def wg_pairings(table: WeingartenTable, p: Pairing, q: Pairing) -> Fraction:
    if p.n != 2 * table.n or q.n != p.n:
        raise ContractError(f"pairings of [{p.n}], [{q.n}] against a table for S_{table.n}")
    return table.values[half_cycle_type(p, q)]


def leading_term(sigma) -> tuple[int, int]:
    """``(w1, exponent)`` with ``Wg_N(sigma) ~ w1 * N^exponent`` as N grows."""
    lam = sigma if isinstance(sigma, CycleType) else CycleType.of(sigma)
    w1 = 1
    for length in lam:
        w1 *= (-1) ** (length - 1) * catalan(length - 1)
    return w1, -2 * lam.n + len(lam)

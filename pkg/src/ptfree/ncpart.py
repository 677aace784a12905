"""Set partitions, pairings and the non-crossing partition lattice NC(n).

Partitions are stored canonically: elements of each block ascending, blocks
ordered by their least element. Ground sets are ``{1, ..., n}``.

Sign strings (the exponent pattern of a word) are tuples over ``{'1', '*'}``;
:func:`signs` accepts the usual spellings (``"1*1*"``, ``(1, -1)``,
``("1", "*")``).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Iterable, Iterator, Sequence

from .errors import CapacityError, ContractError, DomainError

__all__ = [
    "SetPartition",
    "Pairing",
    "signs",
    "catalan",
    "enumerate_pairings",
    "enumerate_eps_pairings",
    "join",
    "cycles",
    "cycle_type",
    "product_cycle_structure",
    "is_noncrossing",
    "enumerate_nc",
    "enumerate_nc_eps_alt",
    "is_eps_alternating",
    "kreweras",
    "mobius_nc",
    "mobius_nc_formula",
    "canonical_pairings",
    "nc_sum",
    "cumulant_from_moments",
]

MOBIUS_MAX_N = 8
NC_MAX_N = 12


class SetPartition:
    """A partition of ``{1, ..., n}`` into nonempty blocks."""

    __slots__ = ("n", "blocks", "_label")

    def __init__(self, n: int, blocks: Iterable[Iterable[int]]):
        canon = tuple(sorted(tuple(sorted(b)) for b in blocks))
        seen = [x for b in canon for x in b]
        if any(len(b) == 0 for b in canon):
            raise ContractError("blocks must be nonempty")
        if sorted(seen) != list(range(1, n + 1)):
            raise ContractError(f"blocks {canon} do not partition [1, {n}]")
        self.n = n
        self.blocks = canon
        label = [0] * (n + 1)
        for k, b in enumerate(canon):
            for x in b:
                label[x] = k
        self._label = tuple(label)

    @classmethod
    def discrete(cls, n: int) -> "SetPartition":
        return cls(n, [(i,) for i in range(1, n + 1)])

    @classmethod
    def full(cls, n: int) -> "SetPartition":
        return cls(n, [tuple(range(1, n + 1))] if n else [])

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __eq__(self, other):
        return isinstance(other, SetPartition) and self.n == other.n and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.n, self.blocks))

    def __lt__(self, other):
        return (self.n, self.blocks) < (other.n, other.blocks)

    def __repr__(self):
        inner = "".join("(" + ",".join(map(str, b)) + ")" for b in self.blocks)
        return f"{type(self).__name__}({inner or '{}'})"

    def block_index(self, x: int) -> int:
        return self._label[x]

    def leq(self, other: "SetPartition") -> bool:
        """Refinement order: every block of ``self`` sits inside a block of ``other``."""
        if self.n != other.n:
            raise ContractError("partitions of different ground sets")
        lab = other._label
        return all(len({lab[x] for x in b}) == 1 for b in self.blocks)

    def as_permutation(self) -> tuple[int, ...]:
        """Blocks read as increasing cycles; 1-based one-line notation."""
        img = [0] * self.n
        for b in self.blocks:
            for k, x in enumerate(b):
                img[x - 1] = b[(k + 1) % len(b)]
        return tuple(img)

    def restrict(self, subset: Sequence[int]) -> "SetPartition":
        """Restriction to ``subset`` relabelled order-preservingly to ``1..len(subset)``."""
        pos = {x: k + 1 for k, x in enumerate(sorted(subset))}
        groups: dict[int, list[int]] = {}
        for x in pos:
            groups.setdefault(self._label[x], []).append(pos[x])
        return SetPartition(len(pos), groups.values())


class Pairing(SetPartition):
    """A partition into 2-element blocks, i.e. a fixed-point-free involution."""

    __slots__ = ()

    def __init__(self, n: int, blocks: Iterable[Iterable[int]]):
        super().__init__(n, blocks)
        if any(len(b) != 2 for b in self.blocks):
            raise ContractError(f"not a pairing: {self.blocks}")

    def partner(self, x: int) -> int:
        a, b = self.blocks[self._label[x]]
        return b if x == a else a


def signs(eps) -> tuple[str, ...]:
    """Normalize a sign string to a tuple over ``{'1', '*'}``."""
    out = []
    items = list(eps.replace(" ", "")) if isinstance(eps, str) else list(eps)
    for e in items:
        if e in (1, "1", True):
            out.append("1")
        elif e in ("*", -1, "-1"):
            out.append("*")
        else:
            raise DomainError(f"invalid sign {e!r}; expected 1 or *")
    return tuple(out)


def catalan(k: int) -> int:
    return comb(2 * k, k) // (k + 1)


def _pairings(items: tuple[int, ...]) -> Iterator[list[tuple[int, int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        for tail in _pairings(rest[:k] + rest[k + 1:]):
            yield [(first, partner)] + tail


def enumerate_pairings(n: int) -> list[Pairing]:
    if n < 0:
        raise DomainError("n must be nonnegative")
    if n % 2:
        return []
    return sorted(Pairing(n, p) for p in _pairings(tuple(range(1, n + 1))))


def enumerate_eps_pairings(n: int, eps) -> list[Pairing]:
    """Pairings joining only positions of opposite sign."""
    eps = signs(eps)
    if len(eps) != n:
        raise ContractError(f"sign string of length {len(eps)} for n={n}")
    return [p for p in enumerate_pairings(n) if all(eps[a - 1] != eps[b - 1] for a, b in p.blocks)]


def join(a: SetPartition, b: SetPartition) -> SetPartition:
    """Least upper bound in the lattice of all set partitions."""
    if a.n != b.n:
        raise ContractError(f"join of partitions on [{a.n}] and [{b.n}]")
    parent = list(range(a.n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for part in (a, b):
        for blk in part.blocks:
            r = find(blk[0])
            for x in blk[1:]:
                parent[find(x)] = r
    groups: dict[int, list[int]] = {}
    for x in range(1, a.n + 1):
        groups.setdefault(find(x), []).append(x)
    return SetPartition(a.n, groups.values())


def cycles(perm: Sequence[int]) -> list[tuple[int, ...]]:
    """Cycle decomposition of a 1-based one-line permutation."""
    n = len(perm)
    seen = [False] * (n + 1)
    out = []
    for start in range(1, n + 1):
        if seen[start]:
            continue
        cyc = []
        x = start
        while not seen[x]:
            seen[x] = True
            cyc.append(x)
            x = perm[x - 1]
        out.append(tuple(cyc))
    return out


def cycle_type(perm: Sequence[int]) -> tuple[int, ...]:
    return tuple(sorted((len(c) for c in cycles(perm)), reverse=True))


def _compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    # (p q)(x) = p(q(x))
    return tuple(p[q[x] - 1] for x in range(len(q)))


def product_cycle_structure(p: Pairing, q: Pairing) -> tuple[int, ...]:
    """Cycle type of ``p q`` (``q`` applied first), checked against ``2 #(p v q) = #(pq)``."""
    if p.n != q.n:
        raise ContractError("pairings of different sizes")
    ct = cycle_type(_compose(p.as_permutation(), q.as_permutation()))
    if len(ct) != 2 * len(join(p, q)):
        raise ContractError(f"cycle count {len(ct)} of pq is not twice #(p v q) for {p}, {q}")
    return ct


def is_noncrossing(pi: SetPartition) -> bool:
    lab = pi._label
    n = pi.n
    # a < b < c < d with a ~ c, b ~ d in different blocks
    for a in range(1, n + 1):
        for c in range(a + 2, n + 1):
            if lab[a] != lab[c]:
                continue
            inside = {lab[b] for b in range(a + 1, c)} - {lab[a]}
            if any(lab[d] in inside for d in range(c + 1, n + 1)):
                return False
    return True


def _nc_blocks(seq: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], ...]]:
    if not seq:
        yield ()
        return

    def grow(block, remaining):
        for tail in _nc_blocks(remaining):
            yield (tuple(block),) + tail
        for k in range(len(remaining)):
            for gap in _nc_blocks(remaining[:k]):
                for more in grow(block + [remaining[k]], remaining[k + 1:]):
                    yield gap + more

    yield from grow([seq[0]], seq[1:])


@lru_cache(maxsize=None)
def _nc_cached(n: int) -> tuple[SetPartition, ...]:
    return tuple(sorted(SetPartition(n, blocks) for blocks in _nc_blocks(tuple(range(1, n + 1)))))


def enumerate_nc(n: int) -> list[SetPartition]:
    """All of NC(n) in canonical sorted order; ``len == catalan(n)``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    if n > NC_MAX_N:
        raise CapacityError(f"NC({n}) enumeration above the n={NC_MAX_N} ceiling")
    return list(_nc_cached(n))


def is_eps_alternating(pi: SetPartition, eps) -> bool:
    eps = signs(eps)
    for blk in pi.blocks:
        if len(blk) % 2:
            return False
        if any(eps[blk[k] - 1] == eps[blk[k + 1] - 1] for k in range(len(blk) - 1)):
            return False
    return True


def enumerate_nc_eps_alt(n: int, eps) -> list[SetPartition]:
    """Non-crossing partitions with even blocks whose signs alternate along each block."""
    eps = signs(eps)
    if len(eps) != n:
        raise ContractError(f"sign string of length {len(eps)} for n={n}")
    if n % 2:
        return []
    return [pi for pi in enumerate_nc(n) if is_eps_alternating(pi, eps)]


def kreweras(pi: SetPartition) -> SetPartition:
    """Kreweras complement, computed as the cycles of ``pi^{-1} gamma`` with ``gamma = (1 2 ... n)``."""
    if not is_noncrossing(pi):
        raise ContractError(f"{pi} is crossing")
    n = pi.n
    perm = pi.as_permutation()
    inv = [0] * n
    for x, y in enumerate(perm, start=1):
        inv[y - 1] = x
    gamma = tuple(x % n + 1 for x in range(1, n + 1))
    return SetPartition(n, cycles(_compose(inv, gamma)))


@lru_cache(maxsize=4096)
def _mobius_row(sigma: SetPartition) -> dict[SetPartition, int]:
    # mu(sigma, y) for every y >= sigma, by triangular inversion of zeta
    above = [y for y in _nc_cached(sigma.n) if sigma.leq(y)]
    above.sort(key=len, reverse=True)  # finer partitions first
    mu: dict[SetPartition, int] = {}
    for y in above:
        if y == sigma:
            mu[y] = 1
            continue
        mu[y] = -sum(v for z, v in mu.items() if len(z) > len(y) and z.leq(y))
    return mu


def mobius_nc(sigma: SetPartition, pi: SetPartition) -> int:
    """Moebius function of NC(n) on the interval ``[sigma, pi]``."""
    if sigma.n != pi.n:
        raise ContractError("partitions of different ground sets")
    if sigma.n > MOBIUS_MAX_N:
        raise CapacityError(f"Moebius table limited to n <= {MOBIUS_MAX_N}")
    if not (is_noncrossing(sigma) and is_noncrossing(pi)):
        raise ContractError("both arguments must be non-crossing")
    if not sigma.leq(pi):
        raise ContractError(f"{sigma} is not below {pi}")
    return _mobius_row(sigma)[pi]


def mobius_nc_formula(sigma: SetPartition, pi: SetPartition) -> int:
    """Same value via the product of signed Catalan numbers over relative Kreweras blocks."""
    if not sigma.leq(pi):
        raise ContractError(f"{sigma} is not below {pi}")
    out = 1
    for blk in pi.blocks:
        for w in kreweras(sigma.restrict(blk)).blocks:
            k = len(w)
            out *= (-1) ** (k - 1) * catalan(k - 1)
    return out


def canonical_pairings(k: int) -> tuple[Pairing, Pairing]:
    """The pairings on [2k] sending 2l to 2l+1, respectively 2l-1 (mod 2k)."""
    if k < 1:
        raise DomainError("k must be at least 1")
    n = 2 * k

    def wrap(x):
        return (x - 1) % n + 1

    p = Pairing(n, [(2 * l, wrap(2 * l + 1)) for l in range(1, k + 1)])
    q = Pairing(n, [(2 * l, wrap(2 * l - 1)) for l in range(1, k + 1)])
    return p, q


def nc_sum(
    n: int,
    block_value: Callable[[tuple[int, ...]], object],
    partitions: Iterable[SetPartition] | None = None,
    weight: Callable[[SetPartition], object] | None = None,
):
    """``sum_pi weight(pi) * prod_{V in pi} block_value(V)`` over NC(n) or ``partitions``."""
    total = Fraction(0)
    for pi in enumerate_nc(n) if partitions is None else partitions:
        term = 1 if weight is None else weight(pi)
        if term == 0:
            continue
        for blk in pi.blocks:
            term *= block_value(blk)
            if term == 0:
                break
        total += term
    return total


def cumulant_from_moments(n: int, moment: Callable[[tuple[int, ...]], object]):
    """Free cumulant ``kappa_n = sum_{pi in NC(n)} mu(pi, 1_n) prod_V moment(V)``."""
    one = SetPartition.full(n)
    return nc_sum(n, moment, weight=lambda pi: mobius_nc(pi, one))

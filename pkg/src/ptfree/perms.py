"""Entry permutations of [M]^2: identity, transpose and partial transposes.

An entry permutation ``sigma`` acts on a matrix by relocating entries,
``[U^sigma]_{i,j} = U_{sigma(i,j)}``. All indices at the public boundary are
1-based; internally tables hold 0-based flat indices ``i * M + j``.

The block picture: with ``M = b * d`` a matrix is a ``b x b`` grid of
``d x d`` blocks and an index ``i`` splits as ``i = (a1 - 1) d + a2``.
The right partial transpose (theta = +1) transposes every block in place,
the left one (theta = -1) permutes the blocks and leaves their contents alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import CapacityError, ContractError, DomainError

__all__ = [
    "BlockShape",
    "Coordinates4",
    "EntryPermutation",
    "Identity",
    "FullTranspose",
    "PartialTranspose",
    "Compose",
    "Inverse",
    "phi",
    "phi_inverse",
    "apply",
    "fixed_point_count",
    "overlap_triple_count",
    "TABLE_MAX_M",
]

# Tables have M^2 entries; beyond this the caller must use per-point evaluation.
TABLE_MAX_M = 2**14
# Triple counts use an (M * K)-sized histogram.
_TRIPLE_MAX_CELLS = 2**27


@dataclass(frozen=True)
class BlockShape:
    b: int
    d: int

    def __post_init__(self):
        for name in ("b", "d"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise DomainError(f"BlockShape.{name} must be a positive integer, got {v!r}")

    @property
    def M(self) -> int:
        return self.b * self.d


class Coordinates4(NamedTuple):
    """Block row, inner row, block column, inner column (all 1-based)."""

    a1: int
    a2: int
    am1: int
    am2: int


def _check_index(i, M, what="index"):
    if not (1 <= i <= M):
        raise DomainError(f"{what} {i} outside [1, {M}]")


def phi(shape: BlockShape, i: int, j: int) -> Coordinates4:
    """Split ``(i, j)`` into block and in-block coordinates."""
    _check_index(i, shape.M, "row index")
    _check_index(j, shape.M, "column index")
    a1, a2 = divmod(i - 1, shape.d)
    am1, am2 = divmod(j - 1, shape.d)
    return Coordinates4(a1 + 1, a2 + 1, am1 + 1, am2 + 1)


def phi_inverse(shape: BlockShape, c: Sequence[int]) -> tuple[int, int]:
    a1, a2, am1, am2 = c
    _check_index(a1, shape.b, "a1")
    _check_index(am1, shape.b, "a-1")
    _check_index(a2, shape.d, "a2")
    _check_index(am2, shape.d, "a-2")
    return (a1 - 1) * shape.d + a2, (am1 - 1) * shape.d + am2


class EntryPermutation:
    """Base class. Subclasses are immutable and hashable."""

    M: int

    def __call__(self, i: int, j: int) -> tuple[int, int]:
        return self.apply(i, j)

    def apply(self, i: int, j: int) -> tuple[int, int]:
        _check_index(i, self.M, "row index")
        _check_index(j, self.M, "column index")
        return self._apply0(i - 1, j - 1)

    def _apply0(self, i: int, j: int) -> tuple[int, int]:
        # 0-based in, 1-based out
        raise NotImplementedError

    def inverse(self) -> "EntryPermutation":
        raise NotImplementedError

    def table(self) -> np.ndarray:
        """Flat 0-based table ``t`` with ``t[i*M + j] = flat(sigma(i, j))``.

        Read-only and cached per permutation.
        """
        if self.M > TABLE_MAX_M:
            raise CapacityError(f"table materialization limited to M <= {TABLE_MAX_M}, got {self.M}")
        return _cached_table(self)

    def _build_table(self) -> np.ndarray:
        raise NotImplementedError

    def then(self, other: "EntryPermutation") -> "Compose":
        """``other`` applied after ``self``."""
        return Compose((other, self))


@lru_cache(maxsize=256)
def _cached_table(perm: EntryPermutation) -> np.ndarray:
    t = perm._build_table().astype(np.int64, copy=False)
    t.setflags(write=False)
    return t


def _check_M(M):
    if not isinstance(M, (int, np.integer)) or M < 1:
        raise DomainError(f"matrix size must be a positive integer, got {M!r}")


@dataclass(frozen=True)
class Identity(EntryPermutation):
    M: int

    def __post_init__(self):
        _check_M(self.M)

    def _apply0(self, i, j):
        return i + 1, j + 1

    def inverse(self):
        return self

    def _build_table(self):
        return np.arange(self.M * self.M)

    def __str__(self):
        return "I"


@dataclass(frozen=True)
class FullTranspose(EntryPermutation):
    M: int

    def __post_init__(self):
        _check_M(self.M)

    def _apply0(self, i, j):
        return j + 1, i + 1

    def inverse(self):
        return self

    def _build_table(self):
        M = self.M
        return np.arange(M * M).reshape(M, M).T.ravel()

    def __str__(self):
        return "T"


@dataclass(frozen=True)
class PartialTranspose(EntryPermutation):
    """Right (theta=+1) or left (theta=-1) partial transpose for ``shape``."""

    shape: BlockShape
    theta: int

    def __post_init__(self):
        if self.theta not in (1, -1):
            raise DomainError(f"theta must be +1 or -1, got {self.theta!r}")

    @classmethod
    def of(cls, theta: int, b: int, d: int) -> "PartialTranspose":
        return cls(BlockShape(b, d), theta)

    @property
    def M(self) -> int:
        return self.shape.M

    @property
    def b(self) -> int:
        return self.shape.b

    @property
    def d(self) -> int:
        return self.shape.d

    def _apply0(self, i, j):
        d = self.shape.d
        a1, a2 = divmod(i, d)
        am1, am2 = divmod(j, d)
        if self.theta == 1:
            a2, am2 = am2, a2
        else:
            a1, am1 = am1, a1
        return a1 * d + a2 + 1, am1 * d + am2 + 1

    def inverse(self):
        return self

    def _build_table(self):
        b, d = self.shape.b, self.shape.d
        M = b * d
        # axes (a1, a2, am1, am2) of the source index grid
        idx = np.arange(M * M).reshape(b, d, b, d)
        if self.theta == 1:
            out = idx.transpose(0, 3, 2, 1)
        else:
            out = idx.transpose(2, 1, 0, 3)
        return np.ascontiguousarray(out).ravel()

    def __str__(self):
        return f"G({self.theta},{self.shape.b},{self.shape.d})"


@dataclass(frozen=True)
class Compose(EntryPermutation):
    """Composition applied right to left: ``Compose((f, g))(x) = f(g(x))``."""

    perms: tuple

    def __post_init__(self):
        perms = tuple(self.perms)
        if not perms:
            raise ContractError("Compose needs at least one permutation")
        sizes = {p.M for p in perms}
        if len(sizes) != 1:
            raise ContractError(f"Compose over mismatched sizes {sorted(sizes)}")
        object.__setattr__(self, "perms", perms)

    @property
    def M(self) -> int:
        return self.perms[0].M

    def _apply0(self, i, j):
        i, j = i + 1, j + 1
        for p in reversed(self.perms):
            i, j = p._apply0(i - 1, j - 1)
        return i, j

    def inverse(self):
        return Compose(tuple(p.inverse() for p in reversed(self.perms)))

    def _build_table(self):
        # flat(f(g(x))) = t_f[t_g[x]]
        t = self.perms[-1].table()
        for p in reversed(self.perms[:-1]):
            t = p.table()[t]
        return t

    def __str__(self):
        return "(" + " o ".join(str(p) for p in self.perms) + ")"


@dataclass(frozen=True)
class Inverse(EntryPermutation):
    perm: EntryPermutation

    @property
    def M(self) -> int:
        return self.perm.M

    def _apply0(self, i, j):
        return self.perm.inverse()._apply0(i, j)

    def inverse(self):
        return self.perm

    def _build_table(self):
        t = self.perm.table()
        inv = np.empty_like(t)
        inv[t] = np.arange(t.size)
        return inv

    def __str__(self):
        return f"inv({self.perm})"


def apply(perm: EntryPermutation, ij: Sequence[int]) -> tuple[int, int]:
    i, j = ij
    return perm.apply(i, j)


def _same_domain(p1, p2, M):
    if p1.M != p2.M:
        raise ContractError(f"permutations act on different sizes ({p1.M} vs {p2.M})")
    if M is not None and M != p1.M:
        raise ContractError(f"declared M={M} but permutations act on M={p1.M}")
    return p1.M


def fixed_point_count(p1: EntryPermutation, p2: EntryPermutation, M: int | None = None) -> int:
    """Number of ``(i, j)`` in ``[M]^2`` with ``p1(i, j) == p2(i, j)``."""
    M = _same_domain(p1, p2, M)
    if M <= TABLE_MAX_M:
        return int(np.count_nonzero(p1.table() == p2.table()))
    return sum(
        p1._apply0(i, j) == p2._apply0(i, j) for i in range(M) for j in range(M)
    )


def overlap_triple_count(
    p1: EntryPermutation, p2: EntryPermutation, M: int | None = None, mode: str = "full"
) -> int:
    """Cardinality of ``{(i1, i2, j) : f(p1(i1, j)) == f(p2(i2, j))}``.

    ``mode='full'`` compares whole output pairs; ``'coord_1'`` and ``'coord_2'``
    compare only the output row or column index.
    """
    M = _same_domain(p1, p2, M)
    if mode == "full":
        K = M * M
        proj = lambda t: t  # noqa: E731
    elif mode == "coord_1":
        K = M
        proj = lambda t: t // M  # noqa: E731
    elif mode == "coord_2":
        K = M
        proj = lambda t: t % M  # noqa: E731
    else:
        raise ContractError(f"unknown mode {mode!r}")
    if M * K > _TRIPLE_MAX_CELLS:
        raise CapacityError(f"triple count for M={M} in mode {mode} exceeds the histogram budget")
    # rows of t.reshape(M, M) are indexed by the first argument, columns by j
    v1 = proj(p1.table().reshape(M, M))
    v2 = proj(p2.table().reshape(M, M))
    j = np.broadcast_to(np.arange(M)[None, :], (M, M))
    c1 = np.bincount((j * K + v1).ravel(), minlength=M * K)
    c2 = np.bincount((j * K + v2).ravel(), minlength=M * K)
    return int(np.dot(c1, c2))

"""Asymptotic freeness of partial transposes of one Haar unitary.

Two transposes ``U^G`` and ``U^G'`` of the same ``M x M`` Haar unitary are
asymptotically free exactly when the fraction of positions where ``G`` and
``G'`` agree tends to zero. For partial transposes with block shapes
``(b, d)`` and ``(b', d')`` this reduces to divergence conditions:

* same theta: ``lcm(b, b') / min(b, b') -> inf`` and the same for ``d, d'``;
* opposite theta: ``b d' -> inf`` and ``b' d -> inf``.

Sizes are given as :class:`SizeExpr` closed forms in the matrix size ``N``
(constants, ``N``, ``N/k``, ``N^alpha``), decided symbolically, or as
explicit tables, decided by a tagged heuristic.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .errors import ContractError, DomainError, ParseError
from .perms import PartialTranspose, fixed_point_count, overlap_triple_count

log = logging.getLogger(__name__)

__all__ = [
    "SizeExpr",
    "TransposeSpec",
    "FreenessVerdict",
    "parse_spec",
    "condition19_fraction",
    "lemma_equivalent_predicate",
    "lemma_cardinalities",
    "predict_pair",
    "predict_family",
    "nonfreeness_witness",
    "nearest_divisor",
]

# fewer tabulated points than this and a table-driven verdict is inconclusive
MIN_TABLE_POINTS = 4


def nearest_divisor(M: int, target: float) -> int:
    """Divisor of ``M`` closest to ``target``; ties go to the smaller divisor."""
    divs = [k for k in range(1, M + 1) if M % k == 0]
    return min(divs, key=lambda k: (abs(k - target), k))


@dataclass(frozen=True)
class SizeExpr:
    """A block size as a function of ``N``.

    ``kind`` is ``'const'`` (``value``), ``'frac'`` (``N / value``; ``N`` itself
    is ``value = 1``) or ``'power'`` (``N^alpha`` rounded to a divisor of N).
    """

    kind: str
    value: int = 1
    alpha: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in ("const", "frac", "power"):
            raise ContractError(f"unknown size kind {self.kind!r}")
        if self.value < 1:
            raise DomainError("sizes and divisors must be positive")
        if self.kind == "power" and not (0 <= self.alpha <= 1):
            raise DomainError(f"exponent must lie in [0, 1], got {self.alpha}")

    @classmethod
    def parse(cls, text: str, offset: int = 0, full: str | None = None) -> "SizeExpr":
        full = text if full is None else full
        s = text.strip()
        if re.fullmatch(r"\d+", s):
            return cls("const", int(s))
        if s == "N":
            return cls("frac", 1)
        m = re.fullmatch(r"N/(\d+)", s)
        if m:
            return cls("frac", int(m.group(1)))
        m = re.fullmatch(r"N\^\(?(\d+(?:\.\d+)?|\d+/\d+)\)?", s)
        if m:
            return cls("power", 1, Fraction(m.group(1)))
        raise ParseError("expected an integer, N, N/k or N^alpha", full, offset)

    @property
    def exponent(self) -> Fraction:
        """Growth exponent: the size is of order ``N^exponent``."""
        if self.kind == "const":
            return Fraction(0)
        if self.kind == "frac":
            return Fraction(1)
        return self.alpha

    def at(self, N: int) -> int:
        if self.kind == "const":
            return self.value
        if self.kind == "frac":
            if N % self.value:
                raise ContractError(f"N={N} is not divisible by {self.value}")
            return N // self.value
        return nearest_divisor(N, N ** float(self.alpha))

    def __str__(self):
        if self.kind == "const":
            return str(self.value)
        if self.kind == "frac":
            return "N" if self.value == 1 else f"N/{self.value}"
        return f"N^{self.alpha}"


@dataclass(frozen=True)
class TransposeSpec:
    """A sequence of partial transposes ``G^(theta)_{b_N, d_N}`` indexed by the size ``N``."""

    theta: int
    b: SizeExpr | None = None
    d: SizeExpr | None = None
    table: tuple = ()  # ((N, b, d), ...) when no closed form is known

    def __post_init__(self):
        if self.theta not in (1, -1):
            raise DomainError(f"theta must be +1 or -1, got {self.theta!r}")
        if self.table:
            rows = tuple(sorted(tuple(int(x) for x in row) for row in self.table))
            for N, b, d in rows:
                if b * d != N:
                    raise ContractError(f"table row N={N} has b*d = {b * d}")
            object.__setattr__(self, "table", rows)
        elif self.b is None or self.d is None:
            raise ContractError("give both b and d, or a table")

    @classmethod
    def from_table(cls, theta: int, rows: Mapping[int, tuple[int, int]] | Sequence) -> "TransposeSpec":
        if isinstance(rows, Mapping):
            rows = [(N, b, d) for N, (b, d) in rows.items()]
        return cls(theta, table=tuple(rows))

    @property
    def symbolic(self) -> bool:
        return not self.table

    def shape(self, N: int) -> tuple[int, int]:
        if self.table:
            for row in self.table:
                if row[0] == N:
                    return row[1], row[2]
            raise ContractError(f"no tabulated shape at N={N}")
        b, d = self.b.at(N), self.d.at(N)
        if b * d != N:
            raise ContractError(f"{self}: b*d = {b}*{d} = {b * d} differs from N={N}")
        return b, d

    def at(self, N: int) -> PartialTranspose:
        b, d = self.shape(N)
        return PartialTranspose.of(self.theta, b, d)

    def __str__(self):
        if self.table:
            return f"t={self.theta},table=" + ";".join(f"{N}:{b}x{d}" for N, b, d in self.table)
        return f"t={self.theta},b={self.b},d={self.d}"


def parse_spec(text: str) -> TransposeSpec:
    """Parse ``t=<+-1>,b=<expr>,d=<expr>``."""
    fields: dict[str, tuple[str, int]] = {}
    pos = 0
    for part in text.split(","):
        m = re.fullmatch(r"\s*([a-z]+)\s*=\s*(.*?)\s*", part)
        if not m:
            raise ParseError("expected key=value", text, pos)
        key = m.group(1)
        if key not in ("t", "b", "d"):
            raise ParseError(f"unknown key {key!r}", text, pos + m.start(1))
        if key in fields:
            raise ParseError(f"duplicate key {key!r}", text, pos + m.start(1))
        fields[key] = (m.group(2), pos + m.start(2))
        pos += len(part) + 1
    for key in ("t", "b", "d"):
        if key not in fields:
            raise ParseError(f"missing key {key!r}", text, len(text))
    t, tpos = fields["t"]
    if t not in ("1", "+1", "-1"):
        raise ParseError("t must be 1 or -1", text, tpos)
    b = SizeExpr.parse(fields["b"][0], fields["b"][1], text)
    d = SizeExpr.parse(fields["d"][0], fields["d"][1], text)
    if b.exponent + d.exponent != 1:
        raise ParseError(f"b*d must grow like N (exponents {b.exponent} + {d.exponent})", text, fields["b"][1])
    return TransposeSpec(int(t), b, d)


def _M_of(spec1, spec2, N):
    p1, p2 = spec1.at(N), spec2.at(N)
    if p1.M != p2.M:
        raise ContractError(f"specs give different sizes at N={N}: {p1.M} vs {p2.M}")
    return p1, p2


def condition19_fraction(spec1, spec2, N: int) -> Fraction:
    """Exact fraction of ``(i, j)`` in ``[M]^2`` on which the two transposes agree.

    ``spec1``/``spec2`` are :class:`TransposeSpec` or entry permutations.
    """
    p1 = spec1.at(N) if isinstance(spec1, TransposeSpec) else spec1
    p2 = spec2.at(N) if isinstance(spec2, TransposeSpec) else spec2
    if p1.M != p2.M:
        raise ContractError(f"permutations act on different sizes ({p1.M} vs {p2.M})")
    return Fraction(fixed_point_count(p1, p2), p1.M**2)


def nonfreeness_witness(spec1, spec2, N: int) -> Fraction:
    """Predicted ``E tr(U^G (U^G')*)``; equal to the agreement fraction."""
    return condition19_fraction(spec1, spec2, N)


def lemma_cardinalities(p1, p2, mode: str = "full") -> tuple[int, int]:
    """``(#{(i,j): p1 = p2}, #{(i1,i2,j): p1(i1,j) ~ p2(i2,j)})`` for diagnostics."""
    return fixed_point_count(p1, p2), overlap_triple_count(p1, p2, mode=mode)


@dataclass(frozen=True)
class ClauseResult:
    clause: str
    holds: bool | None
    heuristic: bool
    detail: str = ""


def _ratio_lcm(x, y):
    return Fraction(math.lcm(x, y), min(x, y))


def _symbolic_diverges_lcm(e1: SizeExpr, e2: SizeExpr) -> bool:
    # lcm/min >= max/min, which diverges when the exponents differ; with equal
    # exponents the supported forms stay within a constant ratio of each other.
    return e1.exponent != e2.exponent


def _symbolic_diverges_product(e1: SizeExpr, e2: SizeExpr) -> bool:
    return e1.exponent + e2.exponent > 0


def _heuristic_diverges(values: list[Fraction]) -> bool:
    # strictly increasing over the last three points, and at least doubled overall
    tail = values[-3:]
    return all(a < b for a, b in zip(tail, tail[1:])) and values[-1] >= 2 * values[0]


def lemma_equivalent_predicate(spec1: TransposeSpec, spec2: TransposeSpec, grid: Sequence[int] = ()) -> ClauseResult:
    """Evaluate the divergence clause that decides freeness of the pair.

    Closed-form specs are decided symbolically. Table specs are sampled on
    their common points; fewer than ``MIN_TABLE_POINTS`` gives ``holds=None``.
    """
    same = spec1.theta == spec2.theta
    clause = "same-theta lcm" if same else "mixed-theta product"
    if spec1.symbolic and spec2.symbolic:
        if same:
            holds = _symbolic_diverges_lcm(spec1.b, spec2.b) and _symbolic_diverges_lcm(spec1.d, spec2.d)
        else:
            holds = _symbolic_diverges_product(spec1.b, spec2.d) and _symbolic_diverges_product(spec2.b, spec1.d)
        return ClauseResult(clause, holds, False)

    Ns = sorted(set(grid) if grid else {r[0] for s in (spec1, spec2) for r in s.table})
    Ns = [N for N in Ns if _defined(spec1, N) and _defined(spec2, N)]
    if len(Ns) < MIN_TABLE_POINTS:
        return ClauseResult(clause, None, True, f"only {len(Ns)} common points")
    shapes = [(spec1.shape(N), spec2.shape(N)) for N in Ns]
    if same:
        s1 = [_ratio_lcm(a[0], b[0]) for a, b in shapes]
        s2 = [_ratio_lcm(a[1], b[1]) for a, b in shapes]
    else:
        s1 = [Fraction(a[0] * b[1]) for a, b in shapes]
        s2 = [Fraction(b[0] * a[1]) for a, b in shapes]
    holds = _heuristic_diverges(s1) and _heuristic_diverges(s2)
    return ClauseResult(clause, holds, True, f"sampled at N={Ns}")


def _defined(spec, N):
    try:
        spec.shape(N)
    except ContractError:
        return False
    return True


@dataclass
class FreenessVerdict:
    pair: tuple[str, str]
    clause: str
    predicted_free: bool | None
    fractions: list[tuple[int, Fraction]] = field(default_factory=list)
    heuristic: bool = False
    diagnostic: str = ""

    def record(self) -> dict:
        return {
            "pair": list(self.pair),
            "clause": self.clause,
            "predicted_free": self.predicted_free,
            "fractions": [[M, f.numerator, f.denominator] for M, f in self.fractions],
            "heuristic": self.heuristic,
            "diagnostic": self.diagnostic,
        }

    def to_json(self) -> str:
        return json.dumps(self.record())


def _trend_diagnostic(fractions, free) -> str:
    vals = [f for _, f in fractions]
    if len(vals) < 2 or free is None:
        return ""
    decreasing = all(a > b for a, b in zip(vals, vals[1:]))
    flat = all(a <= b for a, b in zip(vals, vals[1:]))
    if free and flat:
        return "clause says free but the agreement fraction does not decrease on the grid"
    if not free and decreasing and vals[-1] * 4 <= vals[0]:
        return "clause says not free but the agreement fraction keeps decreasing on the grid"
    return ""


def predict_pair(spec1: TransposeSpec, spec2: TransposeSpec, grid: Sequence[int] = ()) -> FreenessVerdict:
    res = lemma_equivalent_predicate(spec1, spec2, grid)
    fractions = []
    for N in grid:
        if _defined(spec1, N) and _defined(spec2, N):
            fractions.append((N, condition19_fraction(spec1, spec2, N)))
    diag = _trend_diagnostic(fractions, res.holds)
    if diag:
        log.warning("%s vs %s: %s", spec1, spec2, diag)
    clause = res.clause + (f" ({res.detail})" if res.detail else "")
    if res.holds is None:
        clause += ": inconclusive"
    return FreenessVerdict((str(spec1), str(spec2)), clause, res.holds, fractions, res.heuristic, diag)


def predict_family(specs: Sequence[TransposeSpec], grid: Sequence[int] = ()):
    """Pairwise verdicts ``{(s, t): verdict}`` for ``s < t`` and the family verdict.

    The family is free when every pair is; any inconclusive pair makes the
    family verdict ``None`` unless some pair is already not free.
    """
    verdicts = {(s, t): predict_pair(specs[s], specs[t], grid) for s, t in combinations(range(len(specs)), 2)}
    flags = [v.predicted_free for v in verdicts.values()]
    if any(f is False for f in flags):
        family = False
    elif any(f is None for f in flags):
        family = None
    else:
        family = True
    return verdicts, family

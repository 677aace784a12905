"""Exact expected normalized traces of words in entry-permuted Haar unitaries.

A word is read cyclically, letter ``s`` being ``(U_label^{sigma_s})^{eps_s}``.
Writing the trace as a sum over ``(i_1, ..., i_n)`` with ``j_s = i_{s+1}``,
letter ``s`` contributes the entry ``(k_s, l_s) = sigma_s(eps_s(i_s, i_{s+1}))``
of ``U`` (conjugated when ``eps_s = '*'``). Two independent evaluations:

* :func:`exact_trace_expectation_direct` applies the Weingarten integration
  formula letter-group by letter-group, summing over ``S_m x S_m``;
* :func:`exact_trace_expectation_pairing` sums ``V(p, q)`` over pairs of
  sign-respecting pairings of the word positions.

Distinct labels denote independent unitaries; positions carrying different
labels are never matched. Everything is exact (``Fraction``).

The second half of the module holds the free-probability predictions:
R-diagonal cumulant models, their non-crossing moment sums, and the
limit moments of the ``b x b`` unitary with free entries (the block limit).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import ncpart
from .errors import CapacityError, ContractError, DomainError
from .ncpart import Pairing, SetPartition, catalan, signs
from .perms import EntryPermutation
from .weingarten import compute_table, wg_pairings

__all__ = [
    "Letter",
    "Word",
    "EVAL_BUDGET",
    "exact_trace_expectation_direct",
    "exact_trace_expectation_pairing",
    "label_pairings",
    "pairing_terms",
    "V_pq",
    "count_A",
    "count_F",
    "V_by_join",
    "CumulantSpec",
    "beta",
    "haar_spec",
    "transpose_spec",
    "block_spec",
    "moments_from_cumulants",
    "predicted_block_cumulant",
    "predicted_transpose_moment",
    "counterexample_prediction",
    "brown_moment",
    "component_moment",
]

EVAL_BUDGET = 10**9
_CHUNK = 1 << 17


@dataclass(frozen=True)
class Letter:
    label: str
    perm: EntryPermutation
    eps: str = "1"

    def __post_init__(self):
        object.__setattr__(self, "eps", signs([self.eps])[0])

    def __str__(self):
        return f"{self.label}{chr(39) if self.eps == '*' else ''}:{self.perm}"


@dataclass(frozen=True)
class Word:
    letters: tuple
    N: int

    def __post_init__(self):
        letters = tuple(self.letters)
        if not letters:
            raise ContractError("a word needs at least one letter")
        for k, letter in enumerate(letters):
            if letter.perm.M != self.N:
                raise ContractError(
                    f"letter {k + 1} permutes [{letter.perm.M}]^2 but the word has N={self.N}"
                )
        object.__setattr__(self, "letters", letters)

    @classmethod
    def of(cls, N: int, spec: Iterable[tuple]) -> "Word":
        """``Word.of(N, [(label, perm, eps), ...])``."""
        return cls(tuple(Letter(*t) for t in spec), N)

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return " ".join(map(str, self.letters))

    @property
    def eps(self) -> tuple[str, ...]:
        return tuple(l.eps for l in self.letters)

    def rotate(self, k: int) -> "Word":
        k %= len(self.letters)
        return Word(self.letters[k:] + self.letters[:k], self.N)

    def groups(self) -> dict[str, tuple[list[int], list[int]]]:
        """label -> (0-based positions with eps=1, positions with eps=*)."""
        out: dict[str, tuple[list[int], list[int]]] = {}
        for s, letter in enumerate(self.letters):
            plain, star = out.setdefault(letter.label, ([], []))
            (plain if letter.eps == "1" else star).append(s)
        return out

    def balanced(self) -> bool:
        return all(len(a) == len(b) for a, b in self.groups().values())


def _check_budget(word: Word, budget: int):
    n, N = len(word), word.N
    if N**n > budget:
        raise CapacityError(f"N^n = {N}^{n} exceeds the evaluation budget {budget}")


def _index_chunks(N: int, n: int):
    total = N**n
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        idx = np.empty((flat.size, n), dtype=np.int64)
        for s in range(n - 1, -1, -1):
            flat, idx[:, s] = np.divmod(flat, N)
        yield idx


def _entry_coordinates(word: Word, idx: np.ndarray):
    N, n = word.N, len(word)
    K = np.empty_like(idx)
    L = np.empty_like(idx)
    for s, letter in enumerate(word.letters):
        a, c = idx[:, s], idx[:, (s + 1) % n]
        src = a * N + c if letter.eps == "1" else c * N + a
        K[:, s], L[:, s] = np.divmod(letter.perm.table()[src], N)
    return K, L


def _tables(word: Word):
    return {lab: compute_table(len(plain), word.N) for lab, (plain, _) in word.groups().items()}


# --------------------------------------------------------------------------
# route 1: Weingarten formula over S_m x S_m
# --------------------------------------------------------------------------


def _s_m(m):
    return [tuple(p) for p in permutations(range(m))]


def exact_trace_expectation_direct(word: Word, budget: int = EVAL_BUDGET) -> Fraction:
    """``E tr`` of the word by the integration formula with permutation sums."""
    groups = word.groups()
    if any(len(a) != len(b) for a, b in groups.values()):
        return Fraction(0)
    _check_budget(word, budget)
    tables = _tables(word)
    labels = list(groups)

    # per label: candidate row matchings sigma and column matchings pi
    choices = []
    for lab in labels:
        plain, star = groups[lab]
        m = len(plain)
        sym = _s_m(m)
        weights = {}
        for sg in sym:
            inv = [0] * m
            for a, b in enumerate(sg):
                inv[b] = a
            for pi in sym:
                # sigma^{-1} pi as 1-based one-line permutation
                comp = tuple(inv[pi[a]] + 1 for a in range(m))
                weights[sg, pi] = tables[lab](comp)
        choices.append((plain, star, sym, weights))

    counts: dict[tuple, int] = defaultdict(int)
    for idx in _index_chunks(word.N, len(word)):
        K, L = _entry_coordinates(word, idx)
        masks = []
        for plain, star, sym, _ in choices:
            rows = {sg: np.all(K[:, plain] == K[:, [star[x] for x in sg]], axis=1) for sg in sym}
            cols = {pi: np.all(L[:, plain] == L[:, [star[x] for x in pi]], axis=1) for pi in sym}
            masks.append((rows, cols))
        combos = product(*[[(sg, pi) for sg in c[2] for pi in c[2]] for c in choices])
        for combo in combos:
            mask = None
            for (sg, pi), (rows, cols) in zip(combo, masks):
                part = rows[sg] & cols[pi]
                mask = part if mask is None else mask & part
            counts[combo] += int(np.count_nonzero(mask))

    total = Fraction(0)
    for combo, cnt in counts.items():
        if cnt == 0:
            continue
        w = Fraction(1)
        for pair, c in zip(combo, choices):
            w *= c[3][pair]
        total += w * cnt
    return total / word.N


# --------------------------------------------------------------------------
# route 2: sum over pairs of pairings
# --------------------------------------------------------------------------


def label_pairings(word: Word) -> list[Pairing]:
    """Pairings of [n] joining opposite signs and equal labels only."""
    n = len(word)
    per_label = []
    for lab, (plain, star) in word.groups().items():
        pos = sorted(plain + star)
        local = ncpart.enumerate_eps_pairings(len(pos), [word.letters[s].eps for s in pos])
        per_label.append([[(pos[a - 1] + 1, pos[b - 1] + 1) for a, b in p.blocks] for p in local])
    return [Pairing(n, [blk for part in combo for blk in part]) for combo in product(*per_label)]


def _wg_factor(word: Word, p: Pairing, q: Pairing, tables=None) -> Fraction:
    tables = tables or _tables(word)
    w = Fraction(1)
    for lab, (plain, star) in word.groups().items():
        pos = [s + 1 for s in sorted(plain + star)]
        pl, ql = p.restrict(pos), q.restrict(pos)
        w *= wg_pairings(tables[lab], Pairing(pl.n, pl.blocks), Pairing(ql.n, ql.blocks))
    return w


def _check_pairs(word: Word, p: Pairing, q: Pairing):
    allowed = set(label_pairings(word))
    for name, x in (("p", p), ("q", q)):
        if not isinstance(x, Pairing) or x not in allowed:
            raise ContractError(f"{name}={x!r} does not join opposite signs of equal labels in {word}")


def _pair_masks(word: Word, K, L, pairings):
    rows, cols = {}, {}
    for p in pairings:
        partner = [p.partner(s + 1) - 1 for s in range(len(word))]
        rows[p] = np.all(K == K[:, partner], axis=1)
        cols[p] = np.all(L == L[:, partner], axis=1)
    return rows, cols


def _count_all(word: Word, budget: int) -> dict[tuple[Pairing, Pairing], int]:
    _check_budget(word, budget)
    pairings = label_pairings(word)
    counts = {(p, q): 0 for p in pairings for q in pairings}
    for idx in _index_chunks(word.N, len(word)):
        K, L = _entry_coordinates(word, idx)
        rows, cols = _pair_masks(word, K, L, pairings)
        for p, q in counts:
            counts[p, q] += int(np.count_nonzero(rows[p] & cols[q]))
    return counts


def pairing_terms(word: Word, budget: int = EVAL_BUDGET) -> dict[tuple[Pairing, Pairing], Fraction]:
    """``{(p, q): V(p, q)}`` over all admissible pairs."""
    if not word.balanced():
        return {}
    tables = _tables(word)
    return {
        (p, q): _wg_factor(word, p, q, tables) * Fraction(cnt, word.N)
        for (p, q), cnt in _count_all(word, budget).items()
    }


def exact_trace_expectation_pairing(word: Word, budget: int = EVAL_BUDGET) -> Fraction:
    """``E tr`` of the word as ``sum_{p,q} Wg_N(p, q) |A(p, q)| / N``."""
    return sum(pairing_terms(word, budget).values(), Fraction(0))


def count_A(word: Word, p: Pairing, q: Pairing, budget: int = EVAL_BUDGET) -> int:
    """Number of index tuples with ``k_s = k_{p(s)}`` and ``l_s = l_{q(s)}`` for all s."""
    _check_pairs(word, p, q)
    _check_budget(word, budget)
    total = 0
    for idx in _index_chunks(word.N, len(word)):
        K, L = _entry_coordinates(word, idx)
        rows, _ = _pair_masks(word, K, L, [p])
        _, cols = _pair_masks(word, K, L, [q])
        total += int(np.count_nonzero(rows[p] & cols[q]))
    return total


def V_pq(word: Word, p: Pairing, q: Pairing, budget: int = EVAL_BUDGET) -> Fraction:
    return _wg_factor(word, p, q) * Fraction(count_A(word, p, q, budget), word.N)


def count_F(word: Word, p: Pairing, q: Pairing, S: Iterable[int], budget: int = EVAL_BUDGET) -> int:
    """Number of distinct restrictions ``(i_s, j_s)_{s in S}`` of tuples counted by :func:`count_A`.

    ``S`` holds 1-based letter positions; since ``j_s = i_{s+1}`` the
    restriction is the projection onto the index positions ``s`` and ``s+1``.
    """
    _check_pairs(word, p, q)
    _check_budget(word, budget)
    n = len(word)
    S = sorted(set(S))
    if not S or S[0] < 1 or S[-1] > n:
        raise DomainError(f"S must be a nonempty subset of [1, {n}]")
    cols_needed = sorted({s - 1 for s in S} | {s % n for s in S})
    seen = set()
    for idx in _index_chunks(word.N, n):
        K, L = _entry_coordinates(word, idx)
        rows, _ = _pair_masks(word, K, L, [p])
        _, cols = _pair_masks(word, K, L, [q])
        hits = idx[rows[p] & cols[q]][:, cols_needed]
        seen.update(map(tuple, hits.tolist()))
    return len(seen)


def V_by_join(word: Word, budget: int = EVAL_BUDGET) -> dict[SetPartition, Fraction]:
    """Group the pairing expansion by ``p v q``."""
    out: dict[SetPartition, Fraction] = defaultdict(Fraction)
    for (p, q), v in pairing_terms(word, budget).items():
        out[ncpart.join(p, q)] += v
    return dict(out)


# --------------------------------------------------------------------------
# free-probability predictions
# --------------------------------------------------------------------------


def beta(r: int) -> int:
    """Signed Catalan number ``(-1)^(r-1) Cat_(r-1)``."""
    if r < 1:
        raise DomainError("r must be at least 1")
    return (-1) ** (r - 1) * catalan(r - 1)


@dataclass(frozen=True)
class CumulantSpec:
    """An R-diagonal element: ``kappa(r)`` is the alternating cumulant of length ``2r``."""

    name: str
    kappa: Callable[[int], Fraction]

    def __call__(self, r: int) -> Fraction:
        return Fraction(self.kappa(r))


def haar_spec() -> CumulantSpec:
    return CumulantSpec("haar", beta)


def transpose_spec(b: int) -> CumulantSpec:
    """Limit of the block transpose with ``b`` blocks: ``kappa_2r = b^(2-2r) beta_r``."""
    _positive(b)
    return CumulantSpec(f"transpose(b={b})", lambda r: Fraction(b) ** (2 - 2 * r) * beta(r))


def block_spec(b: int) -> CumulantSpec:
    """Single block, or single diagonal component: ``kappa_2r = b^(1-2r) beta_r``."""
    _positive(b)
    return CumulantSpec(f"block(b={b})", lambda r: Fraction(b) ** (1 - 2 * r) * beta(r))


def _positive(b):
    if not isinstance(b, int) or b < 1:
        raise DomainError(f"b must be a positive integer, got {b!r}")


def _normalize_pattern(pattern) -> list[tuple[str, str]]:
    if isinstance(pattern, str):
        from .grammar import parse_pattern

        return parse_pattern(pattern)
    out = []
    for item in pattern:
        if isinstance(item, tuple):
            lab, e = item
        else:
            lab, e = "u", item
        out.append((str(lab), signs([e])[0]))
    return out


def moments_from_cumulants(specs, pattern) -> Fraction:
    """Moment of an alternating-cumulant model over ``NC_{eps,alt}(n)``.

    ``specs`` is one :class:`CumulantSpec` or a mapping label -> spec; distinct
    labels are free, so blocks mixing labels contribute nothing.
    """
    pat = _normalize_pattern(pattern)
    if not isinstance(specs, Mapping):
        specs = {lab: specs for lab, _ in pat}
    missing = {lab for lab, _ in pat} - set(specs)
    if missing:
        raise ContractError(f"no cumulant spec for labels {sorted(missing)}")
    n = len(pat)
    eps = [e for _, e in pat]

    def block_value(blk):
        labs = {pat[x - 1][0] for x in blk}
        if len(labs) != 1:
            return 0
        return specs[labs.pop()](len(blk) // 2)

    return ncpart.nc_sum(n, block_value, ncpart.enumerate_nc_eps_alt(n, eps))


def predicted_block_cumulant(r: int, b: int) -> Fraction:
    _positive(b)
    return Fraction(b) ** (1 - 2 * r) * beta(r)


def predicted_transpose_moment(pattern, b: int) -> Fraction:
    """Limit moment of the block transpose of a Haar unitary (``b`` blocks)."""
    pat = [("u", e) for _, e in _normalize_pattern(pattern)]
    return moments_from_cumulants(transpose_spec(b), pat)


def counterexample_prediction(b: int) -> Fraction:
    """Limit of ``Phi(v^t A (v^t)* A v^t A (v^t)* A)`` for the top 2x2 swap ``A``."""
    _positive(b)
    if b < 2:
        raise DomainError("the swap matrix needs b >= 2")
    return Fraction(-4, b**4)


# Entries of the b x b Haar unitary in the block limit: (row, col, adjoint).
_KINDS = ("v", "v*", "vt", "vt*")


def _entry(kind, x, y):
    if kind == "v":
        return (x, y, False)
    if kind == "v*":
        return (y, x, True)
    if kind == "vt":
        return (y, x, False)
    return (x, y, True)


def _entry_cumulant(entries, b) -> Fraction:
    r = len(entries)
    if r % 2:
        return Fraction(0)
    for t in range(r):
        e, f = entries[t], entries[(t + 1) % r]
        if e[2] == f[2]:
            return Fraction(0)
        if not e[2] and e[1] != f[1]:
            return Fraction(0)
        if e[2] and e[0] != f[0]:
            return Fraction(0)
    return Fraction(b) ** (1 - r) * beta(r // 2)


def brown_moment(factors: Sequence, b: int) -> Fraction:
    """``Phi`` of a cyclic product of ``v, v*, v^t, (v^t)*`` and scalar ``b x b`` matrices.

    ``factors`` mixes the strings ``'v', 'v*', 'vt', 'vt*'`` with matrices
    (nested sequences or arrays of exact numbers); a missing matrix between two
    letters is the identity. The value is the large-block limit computed from
    the joint cumulants of the entries ``v_ij``.
    """
    _positive(b)
    items = list(factors)
    if not any(isinstance(f, str) for f in items):
        raise ContractError("need at least one unitary letter")
    while not isinstance(items[0], str):
        items.append(items.pop(0))
    kinds, mats = [], []
    for f in items:
        if isinstance(f, str):
            if f not in _KINDS:
                raise ContractError(f"unknown letter {f!r}; use one of {_KINDS}")
            kinds.append(f)
            mats.append(None)
        else:
            A = [[Fraction(x) for x in row] for row in np.asarray(f, dtype=object).tolist()]
            if len(A) != b or any(len(row) != b for row in A):
                raise ContractError(f"scalar factors must be {b}x{b}")
            prev = mats[-1]
            mats[-1] = A if prev is None else _matmul(prev, A)
    eye = [[Fraction(int(i == j)) for j in range(b)] for i in range(b)]
    mats = [eye if A is None else A for A in mats]
    m = len(kinds)
    nonzero = [[(i, j, A[i][j]) for i in range(b) for j in range(b) if A[i][j] != 0] for A in mats]
    partitions = ncpart.enumerate_nc(m)

    total = Fraction(0)
    for choice in product(*nonzero):
        coef = Fraction(1)
        for _, _, a in choice:
            coef *= a
        # letter k sits between the column of A_{k-1} and the row of A_k
        entries = [_entry(kinds[k], choice[k - 1][1], choice[k][0]) for k in range(m)]
        phi = ncpart.nc_sum(m, lambda blk: _entry_cumulant([entries[x - 1] for x in blk], b), partitions)
        total += coef * phi
    return total / b


def _matmul(A, B):
    n = len(A)
    return [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def component_moment(pattern: Sequence[tuple[int, str]], b: int) -> Fraction:
    """``Phi`` of a product of diagonal-decomposition components ``v_k`` of ``v^t``.

    ``pattern`` lists ``(k, eps)``; ``v_k`` keeps the entries ``(i, i+k mod b)``
    of ``v^t``.
    """
    _positive(b)
    pat = [(int(k) % b, signs([e])[0]) for k, e in pattern]

    def unit(i):
        return [[Fraction(int(r == c == i)) for c in range(b)] for r in range(b)]

    total = Fraction(0)
    # v_k = sum_i E_ii v^t E_{i+k,i+k};  v_k^* = sum_i E_{i+k,i+k} (v^t)^* E_ii
    for rows in product(range(b), repeat=len(pat)):
        factors = []
        for (k, e), i in zip(pat, rows):
            left, right = (i, (i + k) % b) if e == "1" else ((i + k) % b, i)
            factors += [unit(left), "vt" if e == "1" else "vt*", unit(right)]
        factors = factors[1:] + factors[:1]
        if any(not isinstance(f, str) and not any(any(r) for r in f) for f in factors):
            continue
        prod_ok = True
        merged = []
        for f in factors:
            if merged and not isinstance(f, str) and not isinstance(merged[-1], str):
                merged[-1] = _matmul(merged[-1], f)
                if not any(any(r) for r in merged[-1]):
                    prod_ok = False
                    break
            else:
                merged.append(f)
        if prod_ok:
            total += brown_moment(merged, b)
    return total

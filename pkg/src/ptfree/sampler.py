"""Haar unitary sampling and Monte Carlo estimates of word traces.

Sample ``i`` of a run with seed ``s`` draws from its own streams
``SeedSequence(s, spawn_key=(i, k))``, one per independent matrix ``k``, so results do not depend on how samples
are distributed over threads. Per-sample values are kept and reduced with
``math.fsum`` in sample order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .errors import CapacityError, ContractError, DomainError
from .moments import Word
from .perms import BlockShape, EntryPermutation, PartialTranspose

__all__ = [
    "UnitarySample",
    "EstimatorResult",
    "sample_haar",
    "sample_rng",
    "apply_entry_permutation",
    "extract_blocks",
    "assemble_blocks",
    "diagonal_decomposition",
    "grid_transpose",
    "shift_matrix",
    "collect",
    "summarize",
    "estimate",
    "estimate_word_trace",
    "word_value",
    "check_budget",
    "N_LIMIT",
    "SAMPLES_LIMIT",
    "UNITARITY_TOL",
]

N_LIMIT = 4096
SAMPLES_LIMIT = 10**7
UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class UnitarySample:
    N: int
    matrix: np.ndarray

    def residual(self) -> float:
        """Max-norm of ``U U* - I``."""
        U = self.matrix
        return float(np.max(np.abs(U @ U.conj().T - np.eye(self.N))))


def sample_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Generator for sample ``index`` (and independent ``stream`` within it)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index, stream)))


def sample_haar(N: int, rng: np.random.Generator) -> UnitarySample:
    """Haar unitary from the QR factorization of a complex Ginibre matrix.

    Columns of ``Q`` are rescaled by the phases of ``diag(R)`` so the
    triangular factor has a positive diagonal; without this step the law of
    ``Q`` is not Haar.
    """
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}")
    while True:
        Z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / math.sqrt(2)
        Q, R = np.linalg.qr(Z)
        diag = np.diagonal(R)
        if np.min(np.abs(diag)) > 1e-12:
            break
    U = Q * (diag / np.abs(diag))
    return UnitarySample(N, U)


def apply_entry_permutation(U: np.ndarray, perm: EntryPermutation) -> np.ndarray:
    """``V[i, j] = U[perm(i, j)]``."""
    U = np.asarray(U)
    if U.shape != (perm.M, perm.M):
        raise ContractError(f"matrix of shape {U.shape} vs permutation on [{perm.M}]^2")
    return U.ravel()[perm.table()].reshape(U.shape)


def _shape_for(U, shape: BlockShape):
    U = np.asarray(U)
    if U.shape != (shape.M, shape.M):
        raise ContractError(f"matrix of shape {U.shape} does not split as {shape.b}x{shape.b} blocks of {shape.d}")
    return U


def extract_blocks(U: np.ndarray, shape: BlockShape) -> np.ndarray:
    """Array ``B`` of shape ``(b, b, d, d)`` with ``B[i, j]`` the block ``U_{i+1, j+1}``."""
    U = _shape_for(U, shape)
    b, d = shape.b, shape.d
    return U.reshape(b, d, b, d).transpose(0, 2, 1, 3).copy()


def assemble_blocks(blocks: np.ndarray) -> np.ndarray:
    b, b2, d, d2 = blocks.shape
    if b != b2 or d != d2:
        raise ContractError(f"block grid of shape {blocks.shape} is not square")
    return blocks.transpose(0, 2, 1, 3).reshape(b * d, b * d)


def grid_transpose(U: np.ndarray, shape: BlockShape) -> np.ndarray:
    """Transpose the grid of blocks, leaving each block unchanged."""
    return apply_entry_permutation(_shape_for(U, shape), PartialTranspose(shape, -1))


def diagonal_decomposition(U: np.ndarray, shape: BlockShape, k: int) -> np.ndarray:
    """Component ``v_k`` of the grid transpose.

    ``v_k`` keeps the blocks at grid positions ``(i, i + k mod b)`` of the
    grid transpose, i.e. block ``(i + k, i)`` of ``U``, and is zero elsewhere.
    """
    U = _shape_for(U, shape)
    b = shape.b
    k %= b
    src = extract_blocks(U, shape)
    out = np.zeros_like(src)
    for i in range(b):
        out[i, (i + k) % b] = src[(i + k) % b, i]
    return assemble_blocks(out)


def shift_matrix(b: int) -> np.ndarray:
    """Cyclic shift ``s`` with ``s[i, j] = 1`` iff ``j = i + 1 mod b``."""
    if not isinstance(b, (int, np.integer)) or b < 1:
        raise DomainError(f"b must be a positive integer, got {b!r}")
    return np.roll(np.eye(b, dtype=int), 1, axis=1)


@dataclass(frozen=True)
class EstimatorResult:
    word: str
    N: int
    n_samples: int
    seed: int
    mean_re: float
    mean_im: float
    std_error: float
    b: int | None = None
    d: int | None = None

    FIELDS = ("word", "N", "b", "d", "n_samples", "seed", "mean_re", "mean_im", "std_error")

    @property
    def mean(self) -> complex:
        return complex(self.mean_re, self.mean_im)

    def record(self) -> dict:
        rec = asdict(self)
        return {k: rec[k] for k in self.FIELDS}

    def to_json(self) -> str:
        return json.dumps(self.record())

    def csv_row(self) -> list:
        return [self.record()[k] for k in self.FIELDS]


def check_budget(N, n_samples):
    if N > N_LIMIT:
        raise CapacityError(f"N={N} exceeds the sampling limit {N_LIMIT}")
    if n_samples > SAMPLES_LIMIT:
        raise CapacityError(f"n_samples={n_samples} exceeds the limit {SAMPLES_LIMIT}")
    if n_samples < 1:
        raise DomainError("n_samples must be positive")


def collect(
    fn: Callable[[int, np.random.Generator], object],
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> list:
    """``[fn(i, rng_i) for i in range(n_samples)]`` with per-index streams."""
    def one(i):
        return fn(i, sample_rng(seed, i))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(n_samples)))
    return [one(i) for i in range(n_samples)]


def summarize(values) -> tuple[complex, float]:
    """Sample mean and standard error (complex magnitude ``E|x - mean|^2``)."""
    values = [complex(v) for v in values]
    n = len(values)
    if n == 0:
        raise DomainError("no samples")
    mean = complex(math.fsum(v.real for v in values) / n, math.fsum(v.imag for v in values) / n)
    if n < 2:
        return mean, float("nan")
    var = math.fsum(abs(v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def estimate(
    fn: Callable[[int, np.random.Generator], complex],
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> tuple[complex, float]:
    """Mean and standard error of ``fn(index, rng)`` over independent draws."""
    return summarize(collect(fn, n_samples, seed, threads))


def word_value(word: Word, unitaries: dict[str, np.ndarray]) -> complex:
    """Normalized trace of the word evaluated on given matrices."""
    prod = None
    for letter in word.letters:
        X = apply_entry_permutation(unitaries[letter.label], letter.perm)
        if letter.eps == "*":
            X = X.conj().T
        prod = X if prod is None else prod @ X
    return complex(np.trace(prod)) / word.N


def estimate_word_trace(word: Word, n_samples: int, seed: int, threads: int = 1) -> EstimatorResult:
    """Monte Carlo estimate of ``E tr`` of the word.

    Each label gets its own Haar sample per draw; repeated labels reuse it.
    """
    N = word.N
    check_budget(N, n_samples)
    labels = sorted({l.label for l in word.letters})

    def fn(i, _rng):
        us = {lab: sample_haar(N, sample_rng(seed, i, k)).matrix for k, lab in enumerate(labels)}
        return word_value(word, us)

    mean, se = estimate(fn, n_samples, seed, threads)
    shapes = {(l.perm.b, l.perm.d) for l in word.letters if isinstance(l.perm, PartialTranspose)}
    b, d = shapes.pop() if len(shapes) == 1 else (None, None)
    return EstimatorResult(str(word), N, n_samples, int(seed), mean.real, mean.imag, se, b, d)

"""Canned experiments comparing limit predictions with finite-N measurements.

Each runner returns a :class:`Report`. Monte Carlo rows pass when the
measurement lies within ``band`` standard errors of the prediction; exact
rows pass on equality or on the stated trend.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import moments
from .errors import ConfigError
from .freeness import parse_spec, predict_family, predict_pair
from .perms import BlockShape, PartialTranspose
from .sampler import (
    apply_entry_permutation,
    check_budget,
    collect,
    diagonal_decomposition,
    extract_blocks,
    grid_transpose,
    sample_haar,
    sample_rng,
    summarize,
)

__all__ = ["Row", "Report", "EXPERIMENTS", "DEFAULTS", "run", "swap_matrix"]

DEFAULT_BAND = 4.0


@dataclass
class Row:
    quantity: str
    prediction: Fraction
    measured: complex | Fraction | None = None
    std_error: float | None = None
    passed: bool = False
    note: str = ""

    def record(self) -> dict:
        m = self.measured
        if isinstance(m, Fraction):
            measured = str(m)
        elif m is None:
            measured = None
        else:
            measured = [m.real, m.imag]
        return {
            "quantity": self.quantity,
            "prediction": str(self.prediction),
            "prediction_float": float(self.prediction),
            "measured": measured,
            "std_error": self.std_error,
            "passed": self.passed,
            "note": self.note,
        }


@dataclass
class Report:
    name: str
    params: dict
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r.passed for r in self.rows)

    def record(self) -> dict:
        return {"name": self.name, "params": self.params, "passed": self.passed, "rows": [r.record() for r in self.rows]}


def _mc_row(quantity, prediction, values, band, note=""):
    mean, se = summarize(values)
    ok = abs(mean - float(prediction)) <= band * se if se > 0 else abs(mean - float(prediction)) < 1e-12
    return Row(quantity, prediction, mean, se, bool(ok), note)


def _mc_rows(quantities, predictions, samples, band, note=""):
    cols = list(zip(*samples))
    return [_mc_row(q, p, c, band, note) for q, p, c in zip(quantities, predictions, cols)]


def swap_matrix(b: int) -> np.ndarray:
    """``b x b`` matrix swapping the first two basis vectors, zero elsewhere."""
    A = np.zeros((b, b), dtype=int)
    A[0, 1] = A[1, 0] = 1
    return A


def _haar(N, seed, i):
    return sample_haar(N, sample_rng(seed, i)).matrix


def thm16(b=2, d=64, samples=10_000, seed=7, band=DEFAULT_BAND, threads=1) -> Report:
    """Second alternating moment of the block transpose, ``2 - 1/b^2``."""
    N = b * d
    check_budget(N, samples)
    pred = moments.predicted_transpose_moment("1*1*", b)
    limit = moments.brown_moment(["vt", "vt*", "vt", "vt*"], b)
    G = PartialTranspose.of(-1, b, d)

    def fn(i, _):
        V = apply_entry_permutation(_haar(N, seed, i), G)
        W = V @ V.conj().T
        return np.trace(W @ W) / N

    rows = [
        Row("limit model agrees with cumulant prediction", pred, limit, None, limit == pred),
        _mc_row("E tr((V V*)^2), V = grid transpose", pred, collect(fn, samples, seed, threads), band),
    ]
    return Report("thm16", dict(b=b, d=d, samples=samples, seed=seed, band=band), rows)


def counterexample(b=2, d=64, samples=10_000, seed=11, band=DEFAULT_BAND, threads=1) -> Report:
    """``tr(V A V* A V A V* A)`` with ``A`` the swap of the first two block rows."""
    if b < 2:
        raise ConfigError("b", "the swap needs b >= 2")
    N = b * d
    check_budget(N, samples)
    A = swap_matrix(b)
    pred = moments.counterexample_prediction(b)
    limit = moments.brown_moment(["vt", A, "vt*", A, "vt", A, "vt*", A], b)
    AN = np.kron(A, np.eye(d))
    shape = BlockShape(b, d)

    def fn(i, _):
        V = grid_transpose(_haar(N, seed, i), shape)
        X = V @ AN @ V.conj().T @ AN
        return np.trace(X @ X) / N

    rows = [
        Row("limit model agrees with closed form", pred, limit, None, limit == pred),
        _mc_row("E tr(V A V* A V A V* A)", pred, collect(fn, samples, seed, threads), band),
    ]
    return Report("counterexample", dict(b=b, d=d, samples=samples, seed=seed, band=band), rows)


def blocks(b=2, d=64, samples=10_000, seed=13, band=DEFAULT_BAND, threads=1) -> Report:
    """Alternating moments of the top-left ``d x d`` block, normalized by ``d``."""
    N = b * d
    check_budget(N, samples)
    spec = moments.block_spec(b)
    E = np.zeros((b, b), dtype=int)
    E[0, 0] = 1
    patterns = ["1*", "1*1*", "1*1*1*"]
    preds = [moments.moments_from_cumulants(spec, p) for p in patterns]
    shape = BlockShape(b, d)
    rows = []
    for p, pred in zip(patterns, preds):
        word = []
        for e in p:
            word += [E, "v" if e == "1" else "v*"]
        limit = b * moments.brown_moment(word, b)
        rows.append(Row(f"limit model, pattern {p}", pred, limit, None, limit == pred))

    def fn(i, _):
        B = extract_blocks(_haar(N, seed, i), shape)[0, 0]
        W = B @ B.conj().T
        out, P = [], np.eye(d)
        for _k in patterns:
            P = P @ W
            out.append(np.trace(P) / d)
        return out

    names = [f"E (1/d) Tr((U11 U11*)^{k + 1})" for k in range(len(patterns))]
    rows += _mc_rows(names, preds, collect(fn, samples, seed, threads), band)
    return Report("blocks", dict(b=b, d=d, samples=samples, seed=seed, band=band), rows)


def _parse_grid(grid):
    if isinstance(grid, str):
        try:
            grid = [int(x) for x in grid.split(",") if x.strip()]
        except ValueError:
            raise ConfigError("grid", f"expected comma-separated integers, got {grid!r}") from None
    grid = sorted(set(int(x) for x in grid))
    if len(grid) < 2 or grid[0] < 1:
        raise ConfigError("grid", "need at least two positive sizes")
    return grid


def _trend_row(quantity, fractions):
    vals = [f for _, f in fractions]
    ok = all(a > b for a, b in zip(vals, vals[1:]))
    return Row(quantity, Fraction(0), vals[-1], None, ok, "fractions " + ", ".join(f"M={M}: {f}" for M, f in fractions))


def cor26(b=2, grid="8,16,32,64") -> Report:
    """Right partial transpose with ``b`` blocks against its transpose."""
    grid = _parse_grid(grid)
    s1 = parse_spec(f"t=1,b={b},d=N/{b}")
    s2 = parse_spec(f"t=-1,b={b},d=N/{b}")
    v = predict_pair(s1, s2, grid)
    rows = [
        Row("clause predicts free", Fraction(1), Fraction(int(bool(v.predicted_free))), None, v.predicted_free is True, v.clause),
        _trend_row("agreement fraction strictly decreasing", v.fractions),
    ]
    if v.diagnostic:
        rows.append(Row("trend agrees with clause", Fraction(0), None, None, False, v.diagnostic))
    return Report("cor26", dict(b=b, grid=grid), rows)


COR27_FAMILY = ("t=-1,b=1,d=N", "t=1,b=N^1/2,d=N^1/2", "t=1,b=1,d=N", "t=-1,b=N^1/2,d=N^1/2")


def cor27(grid="16,64,256") -> Report:
    """Identity, a balanced right partial transpose, the transpose and the left one."""
    grid = _parse_grid(grid)
    specs = [parse_spec(s) for s in COR27_FAMILY]
    verdicts, family = predict_family(specs, grid)
    rows = [Row("family predicted free", Fraction(1), Fraction(int(bool(family))), None, family is True)]
    for (s, t), v in verdicts.items():
        rows.append(_trend_row(f"fraction {COR27_FAMILY[s]} vs {COR27_FAMILY[t]}", v.fractions))
    return Report("cor27", dict(grid=grid, family=list(COR27_FAMILY)), rows)


DIAGFREE_PATTERNS = (
    ((0, "1"), (0, "*"), (1, "1"), (1, "*")),
    ((0, "1"), (1, "1"), (0, "*"), (1, "*")),
    ((0, "1"), (1, "1"), (1, "*"), (0, "*")),
    ((1, "1"), (1, "*"), (1, "1"), (1, "*")),
    ((1, "1"), (2, "1"), (1, "*"), (2, "*")),
    ((1, "1"), (2, "*"), (0, "1"), (1, "*"), (2, "1"), (0, "*")),
)


def _pattern_name(p):
    return " ".join(f"v{k}" + ("*" if e == "*" else "") for k, e in p)


def diagfree(b=3, d=32, samples=2_000, seed=17, band=DEFAULT_BAND, threads=1) -> Report:
    """Mixed moments of the diagonal components of the grid transpose.

    Components are predicted free, each with cumulants ``b^(1-2m) beta_m``.
    """
    N = b * d
    check_budget(N, samples)
    specs = {str(k): moments.block_spec(b) for k in range(b)}
    patterns = [tuple((k % b, e) for k, e in p) for p in DIAGFREE_PATTERNS]
    preds = [moments.moments_from_cumulants(specs, [(str(k), e) for k, e in p]) for p in patterns]
    rows = []
    for p, pred in zip(patterns, preds):
        limit = moments.component_moment(p, b)
        rows.append(Row(f"limit model, {_pattern_name(p)}", pred, limit, None, limit == pred))
    shape = BlockShape(b, d)

    def fn(i, _):
        U = _haar(N, seed, i)
        comps = [diagonal_decomposition(U, shape, k) for k in range(b)]
        adj = [c.conj().T for c in comps]
        out = []
        for p in patterns:
            P = np.eye(N)
            for k, e in p:
                P = P @ (comps[k] if e == "1" else adj[k])
            out.append(np.trace(P) / N)
        return out

    rows += _mc_rows([f"E tr({_pattern_name(p)})" for p in patterns], preds, collect(fn, samples, seed, threads), band)
    return Report("diagfree", dict(b=b, d=d, samples=samples, seed=seed, band=band), rows)


EXPERIMENTS: dict[str, Callable[..., Report]] = {
    "thm16": thm16,
    "counterexample": counterexample,
    "blocks": blocks,
    "cor26": cor26,
    "cor27": cor27,
    "diagfree": diagfree,
}


def run(name: str, **overrides) -> Report:
    if name not in EXPERIMENTS:
        raise ConfigError("name", f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    fn = EXPERIMENTS[name]
    params = inspect.signature(fn).parameters
    bad = [k for k, v in overrides.items() if v is not None and k not in params]
    if bad:
        raise ConfigError(bad[0], f"not a parameter of {name}")
    return fn(**{k: v for k, v in overrides.items() if v is not None})


DEFAULTS = {
    name: {k: p.default for k, p in inspect.signature(fn).parameters.items()}
    for name, fn in EXPERIMENTS.items()
}

"""Random LP test sets with known feasible points or degenerate solutions.

Both generators draw a random matrix ``A`` and a witness ``(x, y, s)`` and set
``b = A x`` and ``c = A'y + s``. For the first set the witness is merely
feasible; for the second it is complementary with few nonzeros, so it is a
primal-dual degenerate optimal solution.
"""

from __future__ import annotations

import io
import os
from typing import Optional

import numpy as np

from .problem import GeneratedInstance, InstanceKind, StandardLP

DEFAULT_M_RANGE = (10, 200)
DEFAULT_N_RANGE = (20, 500)


def _dimensions(rng: np.random.Generator, m_range, n_range) -> tuple[int, int]:
    # open intervals: m in (m_lo, m_hi), n in (n_lo, n_hi) with 2m < n < 7m
    m_lo, m_hi = m_range
    n_lo, n_hi = n_range
    while True:
        m = int(rng.integers(m_lo + 1, m_hi))
        lo = max(n_lo, 2 * m) + 1
        hi = min(n_hi, 7 * m)
        if lo < hi:
            return m, int(rng.integers(lo, hi))


def _matrix(rng: np.random.Generator, m: int, n: int, density: float) -> np.ndarray:
    while True:
        mask = rng.random((m, n)) < density
        if mask.any(axis=1).all():
            break
    values = rng.random((m, n)) * rng.choice([-1.0, 1.0], size=(m, n))
    return np.where(mask, values, 0.0)


def _assemble(A, x, y, s, kind, seed, density) -> GeneratedInstance:
    lp = StandardLP(A, A @ x, A.T @ y + s, name=f"{kind.value}-{seed}")
    return GeneratedInstance(lp, x, y, s, kind, seed, density)


def generate_ts1(seed: int, m_range=DEFAULT_M_RANGE, n_range=DEFAULT_N_RANGE) -> GeneratedInstance:
    """Instance built around a random feasible point.

    Parameters
    ----------
    seed : int
        Seed for :func:`numpy.random.default_rng`; equal seeds give equal
        instances.
    m_range, n_range : tuple of int
        Open intervals for the row and column counts. The column count is
        further restricted to ``2m < n < 7m``.
    """
    rng = np.random.default_rng(seed)
    m, n = _dimensions(rng, m_range, n_range)
    density = float(rng.uniform(0.4, 0.8))
    A = _matrix(rng, m, n, density)
    x = np.where(rng.random(n) < 0.5, rng.random(n), 0.0)
    s = np.where(rng.random(n) < 0.5, rng.random(n), 0.0)
    y = rng.uniform(-1.0, 1.0, m)
    return _assemble(A, x, y, s, InstanceKind.FEASIBLE_POINT, seed, density)


def generate_ts2(seed: int, m_range=DEFAULT_M_RANGE, n_range=DEFAULT_N_RANGE) -> GeneratedInstance:
    """Instance built around a complementary degenerate solution.

    ``x`` has between 1 and ``m - 1`` nonzeros and ``s`` between 1 and
    ``n - m - 1``, on disjoint supports, with values in ``(0, 1]``.
    """
    rng = np.random.default_rng(seed)
    m, n = _dimensions(rng, m_range, n_range)
    density = float(rng.uniform(0.4, 0.8))
    A = _matrix(rng, m, n, density)
    kx = int(rng.integers(1, m))
    ks = int(rng.integers(1, n - m))
    perm = rng.permutation(n)
    x = np.zeros(n)
    s = np.zeros(n)
    x[perm[:kx]] = 1.0 - rng.random(kx)
    s[perm[kx:kx + ks]] = 1.0 - rng.random(ks)
    y = rng.uniform(-1.0, 1.0, m)
    return _assemble(A, x, y, s, InstanceKind.DEGENERATE_SOLUTION, seed, density)


def write_instance(inst: GeneratedInstance, path: Optional[str | os.PathLike] = None) -> str:
    """Serialize to text; returns the text and writes it to ``path`` if given.

    Layout: a header ``m n density seed kind``, one ``i j value`` line per
    nonzero of ``A`` (0-based), then ``b``, ``c``, ``x``, ``y``, ``s`` with one
    value per line.
    """
    lp = inst.lp
    out = io.StringIO()
    out.write(f"{lp.m} {lp.n} {inst.density!r} {inst.seed} {inst.kind.value}\n")
    rows, cols = np.nonzero(lp.A)
    for i, j in zip(rows, cols):
        out.write(f"{i} {j} {float(lp.A[i, j])!r}\n")
    for vec in (lp.b, lp.c, inst.x, inst.y, inst.s):
        for v in vec:
            out.write(f"{float(v)!r}\n")
    text = out.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def read_instance(source: str | os.PathLike) -> GeneratedInstance:
    """Inverse of :func:`write_instance`; accepts a path or the text itself."""
    if isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source) as fh:
            text = fh.read()
    lines = text.splitlines()
    head = lines[0].split()
    if len(head) != 5:
        raise ValueError("instance header must be 'm n density seed kind'")
    m, n = int(head[0]), int(head[1])
    density, seed, kind = float(head[2]), int(head[3]), InstanceKind(head[4])
    A = np.zeros((m, n))
    values = []
    for ln in lines[1:]:
        tok = ln.split()
        if len(tok) == 3:
            A[int(tok[0]), int(tok[1])] = float(tok[2])
        elif len(tok) == 1:
            values.append(float(tok[0]))
        elif tok:
            raise ValueError(f"unexpected line {ln!r}")
    values = np.array(values)
    if values.size != 3 * n + 2 * m:
        raise ValueError(f"expected {3 * n + 2 * m} vector entries, got {values.size}")
    b, c, x, y, s = np.split(values, np.cumsum([m, n, n, m]))
    lp = StandardLP(A, b, c, name=f"{kind.value}-{seed}")
    return GeneratedInstance(lp, x, y, s, kind, seed, density)

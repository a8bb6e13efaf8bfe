"""Fixed-format MPS reader and conversion to standard form.

Supported: ``N/L/G/E`` rows, ``RHS``, ``RANGES`` and bound types
``UP/LO/FX/FR``. Integer markers are skipped (the relaxation is read).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .problem import InfeasibleError, StandardLP

# fixed-format field spans (0-based, end exclusive)
_FIELDS = ((1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61))
_SECTIONS = ("NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA",
             "OBJSENSE")
_BOUND_TYPES = ("UP", "LO", "FX", "FR")


class MPSParseError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


@dataclass
class MPSModel:
    """A general-form LP as read from an MPS file.

    ``min c'x + offset`` subject to ``row_lo <= A x <= row_hi`` and
    ``lower <= x <= upper``.
    """

    name: str
    row_names: list[str]
    row_types: list[str]
    col_names: list[str]
    entries: dict[tuple[int, int], float]
    c: np.ndarray
    rhs: np.ndarray
    ranges: dict[int, float] = field(default_factory=dict)
    lower: np.ndarray = None
    upper: np.ndarray = None
    offset: float = 0.0

    def dense_matrix(self) -> np.ndarray:
        A = np.zeros((len(self.row_names), len(self.col_names)))
        for (i, j), v in self.entries.items():
            A[i, j] = v
        return A

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(len(self.row_names), -np.inf)
        hi = np.full(len(self.row_names), np.inf)
        for i, (kind, b) in enumerate(zip(self.row_types, self.rhs)):
            r = self.ranges.get(i)
            if kind == "E":
                lo[i] = hi[i] = b
                if r is not None:
                    if r > 0:
                        hi[i] = b + r
                    elif r < 0:
                        lo[i] = b + r
            elif kind == "L":
                hi[i] = b
                if r is not None:
                    lo[i] = b - abs(r)
            else:
                lo[i] = b
                if r is not None:
                    hi[i] = b + abs(r)
        return lo, hi


def _split(line: str) -> list[str]:
    """Whitespace tokens, falling back to fixed columns when names contain blanks."""
    tokens = line.split()
    if len(tokens) <= 6:
        return tokens
    out = []
    for a, b in _FIELDS:
        piece = line[a:b].strip()
        if piece:
            out.append(piece)
    return out


def _number(tok: str, path, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise MPSParseError(path, lineno, f"expected a number, got {tok!r}") from None
    if not math.isfinite(v):
        raise MPSParseError(path, lineno, f"non-finite value {tok!r}")
    return v


def read_mps(path: str | os.PathLike) -> MPSModel:
    """Parse a fixed-format MPS file into an :class:`MPSModel`."""
    row_index: dict[str, int] = {}
    row_names: list[str] = []
    row_types: list[str] = []
    obj_name = None
    col_index: dict[str, int] = {}
    col_names: list[str] = []
    cost: dict[int, float] = {}
    entries: dict[tuple[int, int], float] = {}
    rhs: dict[int, float] = {}
    ranges: dict[int, float] = {}
    bounds: list[tuple[str, int, float, int]] = []
    offset = 0.0
    name = ""
    section = None
    seen = set()

    with open(path, "r") as fh:
        lines = fh.readlines()

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n\r")
        if not line.strip() or line.startswith("*"):
            continue
        if not line[0].isspace():
            head = line.split()[0].upper()
            if head not in _SECTIONS:
                raise MPSParseError(path, lineno, f"unknown section {head!r}")
            if head == "OBJSENSE":
                raise MPSParseError(path, lineno, "OBJSENSE is not supported")
            section = head
            seen.add(head)
            if head == "NAME":
                rest = line.split(None, 1)
                name = rest[1].split()[0] if len(rest) > 1 else ""
            elif head == "RHS" and len(line.split()) > 1:
                raise MPSParseError(path, lineno, "free-format RHS header")
            if head == "ENDATA":
                break
            continue

        tok = _split(line)
        if section == "ROWS":
            if len(tok) != 2:
                raise MPSParseError(path, lineno, "ROWS entry needs a type and a name")
            kind, rname = tok[0].upper(), tok[1]
            if kind not in ("N", "L", "G", "E"):
                raise MPSParseError(path, lineno, f"unknown row type {kind!r}")
            if rname in row_index or rname == obj_name:
                raise MPSParseError(path, lineno, f"duplicate row {rname!r}")
            if kind == "N":
                if obj_name is None:
                    obj_name = rname
                # further free rows are ignored
                else:
                    row_index[rname] = -1
                continue
            row_index[rname] = len(row_names)
            row_names.append(rname)
            row_types.append(kind)
        elif section == "COLUMNS":
            if "'MARKER'" in tok:
                continue
            if len(tok) not in (3, 5):
                raise MPSParseError(path, lineno, "COLUMNS entry needs 3 or 5 fields")
            cname = tok[0]
            j = col_index.get(cname)
            if j is None:
                j = col_index[cname] = len(col_names)
                col_names.append(cname)
            for rname, val in zip(tok[1::2], tok[2::2]):
                v = _number(val, path, lineno)
                if rname == obj_name:
                    cost[j] = cost.get(j, 0.0) + v
                    continue
                i = row_index.get(rname)
                if i is None:
                    raise MPSParseError(path, lineno, f"unknown row {rname!r}")
                if i >= 0 and v != 0.0:
                    entries[(i, j)] = entries.get((i, j), 0.0) + v
        elif section in ("RHS", "RANGES"):
            # optional set name: odd token count means it is present
            body = tok[1:] if len(tok) % 2 == 1 else tok
            if len(body) not in (2, 4):
                raise MPSParseError(path, lineno, f"{section} entry has {len(tok)} fields")
            for rname, val in zip(body[0::2], body[1::2]):
                v = _number(val, path, lineno)
                if section == "RHS" and rname == obj_name:
                    # constant in the objective row enters with a minus sign
                    offset = -v
                    continue
                i = row_index.get(rname)
                if i is None:
                    raise MPSParseError(path, lineno, f"unknown row {rname!r}")
                if i < 0:
                    continue
                (rhs if section == "RHS" else ranges)[i] = v
        elif section == "BOUNDS":
            if not tok:
                continue
            kind = tok[0].upper()
            if kind not in _BOUND_TYPES:
                raise MPSParseError(path, lineno, f"unsupported bound type {kind!r}")
            need_value = kind != "FR"
            body = tok[1:]
            if need_value:
                if len(body) == 3:
                    body = body[1:]
                if len(body) != 2:
                    raise MPSParseError(path, lineno, "bound entry needs a column and a value")
                cname, val = body[0], _number(body[1], path, lineno)
            else:
                if len(body) == 2:
                    body = body[1:]
                if len(body) != 1:
                    raise MPSParseError(path, lineno, "FR bound needs a column")
                cname, val = body[0], 0.0
            j = col_index.get(cname)
            if j is None:
                raise MPSParseError(path, lineno, f"unknown column {cname!r}")
            bounds.append((kind, j, val, lineno))
        else:
            raise MPSParseError(path, lineno, "data line outside of a section")

    for required in ("ROWS", "COLUMNS"):
        if required not in seen:
            raise MPSParseError(path, len(lines), f"missing {required} section")
    if obj_name is None:
        raise MPSParseError(path, len(lines), "no objective (N) row")

    n = len(col_names)
    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    for kind, j, val, lineno in bounds:
        if kind == "UP":
            if val < 0 and lower[j] == 0.0:
                raise MPSParseError(
                    path, lineno, f"negative upper bound on {col_names[j]!r} "
                    "would imply a free lower bound, which is unsupported")
            upper[j] = val
        elif kind == "LO":
            lower[j] = val
        elif kind == "FX":
            lower[j] = upper[j] = val
        else:
            lower[j], upper[j] = -np.inf, np.inf

    m = len(row_names)
    c = np.zeros(n)
    for j, v in cost.items():
        c[j] = v
    b = np.zeros(m)
    for i, v in rhs.items():
        b[i] = v
    return MPSModel(name=name, row_names=row_names, row_types=row_types,
                    col_names=col_names, entries=entries, c=c, rhs=b,
                    ranges=ranges, lower=lower, upper=upper, offset=offset)


def standardize(model: MPSModel) -> StandardLP:
    """Rewrite a general-form model as ``min c'x, Ax = b, x >= 0``.

    Inequality rows get a nonnegative slack, ranged rows a slack with its own
    upper-bound row, finite lower bounds are shifted out, finite upper bounds
    become an extra row with a slack, free columns are split into a
    difference of two nonnegative ones, and fixed columns are substituted.
    """
    A0 = model.dense_matrix()
    m0, n0 = A0.shape
    lo_row, hi_row = model.row_bounds()
    lower, upper = model.lower, model.upper
    c0 = model.c
    offset = model.offset

    if np.any(lower > upper):
        j = int(np.flatnonzero(lower > upper)[0])
        raise InfeasibleError(f"column {model.col_names[j]} has lower bound above upper bound")

    # substitute fixed columns and shift finite lower bounds: x = lower + x'
    shift = np.where(np.isfinite(lower), lower, 0.0)
    rowshift = A0 @ shift
    lo_row = lo_row - rowshift
    hi_row = hi_row - rowshift
    offset += float(c0 @ shift)

    cols: list[np.ndarray] = []
    costs: list[float] = []
    names: list[str] = []
    ub_rows: list[tuple[int, float]] = []  # (column position, bound)
    for j in range(n0):
        if lower[j] == upper[j]:
            continue
        a = A0[:, j]
        if np.isinf(lower[j]):
            cols += [a, -a]
            costs += [c0[j], -c0[j]]
            names += [model.col_names[j] + "+", model.col_names[j] + "-"]
            continue
        cols.append(a)
        costs.append(c0[j])
        names.append(model.col_names[j])
        if np.isfinite(upper[j]):
            ub_rows.append((len(cols) - 1, upper[j] - lower[j]))

    rows_b: list[float] = []
    row_names: list[str] = []
    slack_cols: list[tuple[int, float]] = []  # (row, coefficient)
    range_rows: list[tuple[int, float]] = []  # (slack column index, width)
    for i in range(m0):
        lo, hi = lo_row[i], hi_row[i]
        row_names.append(model.row_names[i])
        if lo == hi:
            rows_b.append(hi)
        elif np.isinf(lo):
            rows_b.append(hi)
            slack_cols.append((i, 1.0))
        elif np.isinf(hi):
            rows_b.append(lo)
            slack_cols.append((i, -1.0))
        else:
            rows_b.append(lo)
            slack_cols.append((i, -1.0))
            range_rows.append((len(slack_cols) - 1, hi - lo))

    n_struct = len(cols)
    n_total = n_struct + len(slack_cols) + len(ub_rows) + len(range_rows)
    m_total = m0 + len(ub_rows) + len(range_rows)
    A = np.zeros((m_total, n_total))
    if n_struct:
        A[:m0, :n_struct] = np.column_stack(cols)
    c = np.zeros(n_total)
    c[:n_struct] = costs
    b = np.zeros(m_total)
    b[:m0] = rows_b
    col_names = list(names)
    for k, (i, coef) in enumerate(slack_cols):
        A[i, n_struct + k] = coef
        col_names.append(f"slack:{model.row_names[i]}")
    r = m0
    nxt = n_struct + len(slack_cols)
    for pos, ub in ub_rows:
        A[r, pos] = 1.0
        A[r, nxt] = 1.0
        b[r] = ub
        row_names.append(f"ub:{names[pos]}")
        col_names.append(f"ubslack:{names[pos]}")
        r += 1
        nxt += 1
    for k, width in range_rows:
        row = slack_cols[k][0]
        A[r, n_struct + k] = 1.0
        A[r, nxt] = 1.0
        b[r] = width
        row_names.append(f"range:{model.row_names[row]}")
        col_names.append(f"rangeslack:{model.row_names[row]}")
        r += 1
        nxt += 1

    return StandardLP(A, b, c, tuple(row_names), tuple(col_names), model.name, offset)


def drop_trivial_rows(lp: StandardLP, tol: float = 1e-12) -> StandardLP:
    """Remove empty rows and rows that fix a single column.

    An empty row must have a zero right-hand side. A row ``a x_j = b_i`` fixes
    ``x_j = b_i / a``; the column is substituted out (its cost moves into the
    objective offset). Repeats until no such row remains.
    """
    A = np.array(lp.A)
    b = np.array(lp.b)
    c = np.array(lp.c)
    rnames = list(lp.row_names) if lp.row_names else [f"#{i}" for i in range(lp.m)]
    cnames = list(lp.col_names) if lp.col_names else [f"x{j}" for j in range(lp.n)]
    offset = lp.obj_offset
    changed = True
    while changed:
        changed = False
        nnz = np.sum(np.abs(A) > tol, axis=1)
        for i in np.flatnonzero(nnz == 0):
            if abs(b[i]) > 1e-9 * (1.0 + np.abs(b).max()):
                raise InfeasibleError(f"row {rnames[i]} is empty but has right-hand side {b[i]:g}")
        keep = nnz > 0
        if not keep.all():
            A, b = A[keep], b[keep]
            rnames = [r for r, k in zip(rnames, keep) if k]
            changed = True
            continue
        singles = np.flatnonzero(nnz == 1)
        if singles.size:
            i = int(singles[0])
            j = int(np.flatnonzero(np.abs(A[i]) > tol)[0])
            val = b[i] / A[i, j]
            if val < -1e-9:
                raise InfeasibleError(f"row {rnames[i]} fixes {cnames[j]} to negative value {val:g}")
            val = max(val, 0.0)
            b = b - A[:, j] * val
            offset += c[j] * val
            rows = np.arange(A.shape[0]) != i
            cols = np.arange(A.shape[1]) != j
            A = A[np.ix_(rows, cols)]
            b, c = b[rows], c[cols]
            del rnames[i]
            del cnames[j]
            changed = True
    return StandardLP(A, b, c, tuple(rnames), tuple(cnames), lp.name, offset)


def load_mps(path: str | os.PathLike, *, reduce: bool = True) -> StandardLP:
    """Read an MPS file and return the standard-form problem.

    With ``reduce`` (default) empty rows and single-column equality rows are
    eliminated after standardization.
    """
    lp = standardize(read_mps(path))
    if reduce:
        lp = drop_trivial_rows(lp)
    return lp


def write_mps(path: str | os.PathLike, name: str, c, A_ub=None, b_ub=None,
              A_eq=None, b_eq=None) -> None:
    """Write ``min c'x, A_ub x <= b_ub, A_eq x = b_eq, x >= 0`` as fixed-format MPS."""
    c = np.asarray(c, dtype=float)
    n = c.size
    blocks = []
    if A_ub is not None and np.size(A_ub):
        blocks.append(("L", np.atleast_2d(A_ub), np.asarray(b_ub, float)))
    if A_eq is not None and np.size(A_eq):
        blocks.append(("E", np.atleast_2d(A_eq), np.asarray(b_eq, float)))
    rows = [(kind, A[i], bb[i]) for kind, A, bb in blocks for i in range(A.shape[0])]
    rname = [f"R{i + 1:04d}" for i in range(len(rows))]
    cname = [f"C{j + 1:04d}" for j in range(n)]

    def num(v: float) -> str:
        s = repr(float(v))
        return s[:-2] if s.endswith(".0") else s

    out = [f"NAME          {name}", "ROWS", " N  COST"]
    out += [f" {kind}  {r}" for (kind, _, _), r in zip(rows, rname)]
    out.append("COLUMNS")
    for j in range(n):
        pairs = []
        if c[j] != 0:
            pairs.append(("COST", c[j]))
        pairs += [(r, a[j]) for (_, a, _), r in zip(rows, rname) if a[j] != 0]
        for rn, v in pairs:
            out.append(f"    {cname[j]:<8}  {rn:<8}  {num(v):>12}")
    out.append("RHS")
    for (_, _, bi), r in zip(rows, rname):
        if bi != 0:
            out.append(f"    {'RHS':<8}  {r:<8}  {num(bi):>12}")
    out.append("ENDATA")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")

from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from pertlp.crossover import SimplexStatus, build_basis, revised_simplex
from pertlp.mps import MPSParseError, load_mps, read_mps, standardize, write_mps

NETLIB = Path(__file__).parent / "data" / "netlib"


def _write(tmp_path, text, name="t.mps"):
    p = tmp_path / name
    p.write_text(text)
    return p


MINIMAL = """\
NAME          TINY
ROWS
 N  COST
 E  R1
COLUMNS
    X1        COST         1.0   R1           1.0
    X2        COST         2.0   R1           1.0
RHS
    RHS       R1           1.0
ENDATA
"""


def test_minimal_equality(tmp_path):
    lp = load_mps(_write(tmp_path, MINIMAL))
    assert_array_equal(lp.A, [[1.0, 1.0]])
    assert_array_equal(lp.b, [1.0])
    assert_array_equal(lp.c, [1.0, 2.0])


def test_inequalities_get_slacks(tmp_path):
    text = """\
NAME
ROWS
 N  OBJ
 L  LIM
 G  LOW
COLUMNS
    X         OBJ   -1.0   LIM   1.0
    X         LOW    1.0
    Y         OBJ   -1.0   LIM   2.0
RHS
    RHS       LIM    4.0   LOW   1.0
ENDATA
"""
    lp = load_mps(_write(tmp_path, text), reduce=False)
    assert (lp.m, lp.n) == (2, 4)
    assert_array_equal(lp.A, [[1, 2, 1, 0], [1, 0, 0, -1]])
    assert_array_equal(lp.b, [4, 1])


def test_bounds_and_ranges(tmp_path):
    text = """\
NAME          BND
ROWS
 N  OBJ
 E  R1
 L  R2
COLUMNS
    X         OBJ   1.0    R1    1.0
    X         R2    1.0
    Y         OBJ   1.0    R1    1.0
    Z         OBJ   1.0    R1    1.0
    W         OBJ   1.0    R2    1.0
RHS
    RHS       R1    5.0    R2    3.0
    RHS       OBJ   2.0
RANGES
    RNG       R2    2.0
BOUNDS
 LO BND       X     1.0
 UP BND       X     4.0
 FR BND       Y
 FX BND       Z     0.5
ENDATA
"""
    model = read_mps(_write(tmp_path, text))
    assert model.offset == -2.0
    lo, hi = model.row_bounds()
    assert_array_equal(lo, [5.0, 1.0])
    assert_array_equal(hi, [5.0, 3.0])
    lp = standardize(model)
    # columns: X', Y+, Y-, W, slack R2, ub slack X, range slack R2
    assert lp.n == 7 and lp.m == 4
    # objective constant: offset + cost of shifts (X lower 1, Z fixed 0.5)
    assert lp.obj_offset == pytest.approx(-2.0 + 1.0 + 0.5)
    # a feasible point of the original model maps to a feasible standard point
    X, Y, Z, W = 2.0, 2.5, 0.5, 0.5
    r2 = X + W  # in [1, 3]
    xs = np.array([X - 1.0, Y, 0.0, W, r2 - 1.0, 4.0 - X, 3.0 - r2])
    assert_allclose(lp.A @ xs, lp.b)
    assert lp.objective(xs) == pytest.approx(X + Y + Z + W - 2.0)


@pytest.mark.parametrize("body, msg", [
    ("ROWS\n N  OBJ\n Q  R1\nENDATA\n", "unknown row type"),
    ("ROWS\n N  OBJ\n E  R1\nCOLUMNS\n    X  R9  1.0\nENDATA\n", "unknown row"),
    ("ROWS\n N  OBJ\n E  R1\nCOLUMNS\n    X  R1  abc\nENDATA\n", "expected a number"),
    ("ROWS\n N  OBJ\n E  R1\nCOLUMNS\n    X  R1  1.0\nBOUNDS\n MI BND  X\nENDATA\n",
     "unsupported bound type"),
    ("ROWS\n N  OBJ\n E  R1\nCOLUMNS\n    X  R1  1.0\nBOUNDS\n BV BND  X  1\nENDATA\n",
     "unsupported bound type"),
    ("ROWS\n N  OBJ\n E  R1\nBOGUS\n", "unknown section"),
])
def test_parse_errors_report_line(tmp_path, body, msg):
    p = _write(tmp_path, "NAME  BAD\n" + body)
    with pytest.raises(MPSParseError, match=msg) as info:
        load_mps(p)
    assert info.value.lineno > 1
    assert f"{p}:{info.value.lineno}:" in str(info.value)


def test_free_column_split(tmp_path):
    text = MINIMAL.replace("ENDATA", "BOUNDS\n FR BND       X1\nENDATA")
    lp = load_mps(_write(tmp_path, text))
    assert_array_equal(lp.A, [[1.0, -1.0, 1.0]])
    assert_array_equal(lp.c, [1.0, -1.0, 2.0])


# dimensions after standardization, as listed for the Netlib subset
TABLE_DIMS = {"afiro": (27, 51), "adlittle": (55, 137), "sc50a": (49, 77),
              "sc50b": (48, 76), "blend": (74, 114)}


@pytest.mark.parametrize("name", sorted(TABLE_DIMS))
def test_netlib_dimensions(name):
    lp = load_mps(NETLIB / f"{name}.mps")
    assert (lp.m, lp.n) == TABLE_DIMS[name]


@pytest.mark.parametrize("name", sorted(TABLE_DIMS))
def test_netlib_objective_matches_reference(name):
    lp = load_mps(NETLIB / f"{name}.mps")
    ref = float(np.load(NETLIB / "npz" / f"{name.upper()}.npz")["obj"])
    res = revised_simplex(lp, build_basis(lp, ()))
    assert res.status is SimplexStatus.OPTIMAL
    assert res.objective == pytest.approx(ref, rel=1e-8, abs=1e-8)


@pytest.mark.parametrize("name", ["afiro", "adlittle"])
def test_standardized_and_raw_objectives_agree(name):
    # reducing trivial rows must not change the optimal value
    full = load_mps(NETLIB / f"{name}.mps", reduce=False)
    red = load_mps(NETLIB / f"{name}.mps")
    a = revised_simplex(full, build_basis(full, ()))
    b = revised_simplex(red, build_basis(red, ()))
    assert a.objective == pytest.approx(b.objective, rel=1e-9)


def test_writer_round_trip(tmp_path):
    # write the npz form of AFIRO and compare with the original MPS file
    d = np.load(NETLIB / "npz" / "AFIRO.npz")
    p = tmp_path / "afiro_rt.mps"
    write_mps(p, "AFIRO", d["c"], d["A_ub"], d["b_ub"], d["A_eq"], d["b_eq"])
    model = read_mps(p)
    assert_array_equal(model.dense_matrix(), np.vstack([d["A_ub"], d["A_eq"]]))
    assert_array_equal(model.c, d["c"])
    lp = load_mps(p)
    assert (lp.m, lp.n) == TABLE_DIMS["afiro"]

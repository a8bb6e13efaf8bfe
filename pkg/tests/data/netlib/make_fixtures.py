"""Regenerate the SC50A, SC50B and BLEND MPS fixtures from the bundled npz data.

The npz files hold each problem as ``min c'x, A_ub x <= b_ub, A_eq x = b_eq,
x >= 0`` (greater-or-equal rows already negated). Run from the repository
root: ``python3 tests/data/netlib/make_fixtures.py``.
"""

from pathlib import Path

import numpy as np

from pertlp.mps import write_mps

HERE = Path(__file__).resolve().parent

for name in ("SC50A", "SC50B", "BLEND"):
    d = np.load(HERE / "npz" / f"{name}.npz")
    write_mps(HERE / f"{name.lower()}.mps", name, d["c"], d["A_ub"], d["b_ub"],
              d["A_eq"], d["b_eq"])
    print("wrote", name.lower() + ".mps")

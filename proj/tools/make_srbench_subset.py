# Copyright 2026 The tlgp Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes three small public black-box regression problems in tlgp CSV form.

Features are numbered 1..d in the header (stand-ins for wavenumbers); every
row is its own group. Sources ship with scikit-learn and statsmodels, so no
download is needed.
"""

import argparse
import pathlib

import numpy as np
import statsmodels.api as sm
from sklearn.datasets import load_diabetes


def write(path, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with open(path, "w") as f:
        f.write(",".join(str(i + 1) for i in range(x.shape[1])) + ",target,group\n")
        for i, (row, t) in enumerate(zip(x, y)):
            f.write(",".join(repr(float(v)) for v in row) + f",{float(t)!r},r{i}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "srbench"))
    out = pathlib.Path(ap.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)

    diabetes = load_diabetes()
    write(out / "diabetes.csv", diabetes.data, diabetes.target)

    ccard = sm.datasets.ccard.load_pandas().data
    write(out / "ccard.csv", ccard.drop(columns="AVGEXP"), ccard["AVGEXP"])

    scotland = sm.datasets.scotland.load_pandas().data
    write(out / "scotland.csv", scotland.drop(columns="YES"), scotland["YES"])


if __name__ == "__main__":
    main()

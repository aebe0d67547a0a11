#!/usr/bin/env python3
"""Recompute the frozen LTR regression predictions used by tests/test_ltr.py.

Run after any intentional change to tree growth or lambda computation, then
paste the printed list into GOLDEN_PREDICTIONS.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from legalir.ltr import TrainParams, fit
from test_ltr import _golden_fixture


def main() -> None:
    train, valid = _golden_fixture()
    model = fit(train, valid, TrainParams(max_trees=25, early_stopping_rounds=25))
    print(f"# best_iteration={model.best_iteration}, trees={len(model.trees)}")
    scores = model.predict(train.feature_matrix()[:6])
    print("GOLDEN_PREDICTIONS = [")
    for value in scores.tolist():
        print(f"    {value!r},")
    print("]")


if __name__ == "__main__":
    main()

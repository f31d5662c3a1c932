#!/usr/bin/env python3
# Copyright 2026 The sliceaudit Authors
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
"""Generates data/adult_predictions.csv from data/adult.csv.

Out-of-fold probabilities from a 5-fold logistic regression over one-hot
categoricals and standardized numeric columns. Rows keep the dataset order.
"""

import argparse
import os
import sys

import numpy as np
import pandas as pd
from sklearn.compose import ColumnTransformer
from sklearn.linear_model import LogisticRegression
from sklearn.model_selection import StratifiedKFold, cross_val_predict
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import OneHotEncoder, StandardScaler

HERE = os.path.dirname(os.path.abspath(__file__))


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--data", default=os.path.join(HERE, "..", "data", "adult.csv"))
    parser.add_argument("--out", default=os.path.join(HERE, "..", "data", "adult_predictions.csv"))
    parser.add_argument("--label", default="income")
    parser.add_argument("--positive", default=">50K")
    args = parser.parse_args()

    df = pd.read_csv(args.data, keep_default_na=False)
    y = (df[args.label] == args.positive).astype(int).to_numpy()
    x = df.drop(columns=[args.label])
    numeric = [c for c in x.columns if pd.api.types.is_numeric_dtype(x[c])]
    categorical = [c for c in x.columns if c not in numeric]

    model = make_pipeline(
        ColumnTransformer([
            ("num", StandardScaler(), numeric),
            ("cat", OneHotEncoder(handle_unknown="ignore"), categorical),
        ]),
        LogisticRegression(max_iter=2000),
    )
    folds = StratifiedKFold(n_splits=5, shuffle=True, random_state=0)
    p_pos = cross_val_predict(model, x, y, cv=folds, method="predict_proba")[:, 1]
    p_pos = np.round(p_pos, 6)

    out = pd.DataFrame({"y_true": y, "p_pos": p_pos, "y_pred": (p_pos >= 0.5).astype(int)})
    out.to_csv(args.out, index=False, float_format="%.6f")
    acc = (out.y_true == out.y_pred).mean()
    print(f"wrote {len(out)} rows to {args.out} (accuracy {acc:.4f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
# Copyright 2026 The adaqubo Authors.
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
"""Regenerates the committed test fixtures under fixtures/data/.

Trains three small dense classifiers on scikit-learn's bundled 8x8 digits:

  mnist1_fixture.json  64 -> 10 softmax
  mnist2_fixture.json  64 -> 32 -> 16 -> 10 (relu, relu, softmax)
  micro_fixture.json   12 -> 10 softmax (4x3 pooled digits, for exact-solver tests)

and writes the matching test CSVs plus fixtures_golden.json, whose per-layer
outputs come from plain Python loops (no numpy on the forward path).

The committed files are canonical; regenerating with another scikit-learn
version may produce different weights.
"""
import json
import math
import pathlib

import numpy as np
from sklearn.datasets import load_digits
from sklearn.linear_model import LogisticRegression
from sklearn.neural_network import MLPClassifier

SEED = 42
N_TRAIN = 1297
OUT = pathlib.Path(__file__).resolve().parent / "data"


def pooled_micro(images):
    # 8x8 -> 4 rows x 3 cols: 2x2 average pooling over columns 1..6.
    out = np.zeros((images.shape[0], 12))
    for r in range(4):
        for c in range(3):
            block = images[:, 2 * r:2 * r + 2, 1 + 2 * c:3 + 2 * c]
            out[:, r * 3 + c] = block.mean(axis=(1, 2))
    return out


def layer_dict(weights, bias, activation):
    return {
        "weights": [[float(v) for v in row] for row in weights],
        "bias": [float(v) for v in bias],
        "activation": activation,
    }


def write_model(path, layers):
    doc = {"format": "adaqubo-model", "version": 1, "layers": layers}
    path.write_text(json.dumps(doc, indent=1) + "\n")


def write_dataset(path, features, labels):
    with path.open("w", newline="\n") as fh:
        fh.write("label," + ",".join(f"f{j}" for j in range(features.shape[1])) + "\n")
        for x, y in zip(features, labels):
            fh.write(str(int(y)) + "," + ",".join(repr(float(v)) for v in x) + "\n")


def scalar_forward(layers, x):
    pres, posts = [], []
    for layer in layers:
        y = []
        for row, b in zip(layer["weights"], layer["bias"]):
            acc = 0.0
            for w, xv in zip(row, x):
                acc += w * xv
            y.append(acc + b)
        if layer["activation"] == "relu":
            z = [v if v > 0.0 else 0.0 for v in y]
        elif layer["activation"] == "softmax":
            m = max(y)
            e = [math.exp(v - m) for v in y]
            s = sum(e)
            z = [v / s for v in e]
        else:
            z = list(y)
        pres.append(y)
        posts.append(z)
        x = z
    return pres, posts


def argmax(values):
    best = 0
    for k, v in enumerate(values):
        if v > values[best]:
            best = k
    return best


def golden_for(layers, features, labels, n_batch=5):
    correct = 0
    preds = []
    for x, y in zip(features, labels):
        _, posts = scalar_forward(layers, [float(v) for v in x])
        p = argmax(posts[-1])
        preds.append(p)
        correct += int(p == int(y))
    batch = []
    for x in features[:n_batch]:
        pres, posts = scalar_forward(layers, [float(v) for v in x])
        batch.append({"pre": pres, "post": posts})
    return {
        "float_accuracy": correct / len(labels),
        "correct": correct,
        "rows": len(labels),
        "predictions_head": preds[:n_batch],
        "batch": batch,
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    digits = load_digits()
    rng = np.random.RandomState(SEED)
    order = rng.permutation(len(digits.target))
    train, test = order[:N_TRAIN], order[N_TRAIN:]
    x64 = digits.data / 16.0
    x12 = pooled_micro(digits.images / 16.0)
    y = digits.target

    golden = {}

    clf1 = LogisticRegression(max_iter=2000, C=1.0, random_state=SEED)
    clf1.fit(x64[train], y[train])
    mnist1 = [layer_dict(clf1.coef_, clf1.intercept_, "softmax")]
    write_model(OUT / "mnist1_fixture.json", mnist1)
    write_dataset(OUT / "digits64_test.csv", x64[test], y[test])
    write_dataset(OUT / "digits64_train.csv", x64[train], y[train])
    golden["mnist1_fixture"] = golden_for(mnist1, x64[test], y[test])

    clf2 = MLPClassifier(hidden_layer_sizes=(32, 16), activation="relu",
                         max_iter=600, random_state=SEED)
    clf2.fit(x64[train], y[train])
    acts = ["relu", "relu", "softmax"]
    mnist2 = [layer_dict(W.T, b, a) for W, b, a in zip(clf2.coefs_, clf2.intercepts_, acts)]
    write_model(OUT / "mnist2_fixture.json", mnist2)
    golden["mnist2_fixture"] = golden_for(mnist2, x64[test], y[test])

    clf3 = LogisticRegression(max_iter=2000, C=1.0, random_state=SEED)
    clf3.fit(x12[train], y[train])
    micro = [layer_dict(clf3.coef_, clf3.intercept_, "softmax")]
    write_model(OUT / "micro_fixture.json", micro)
    write_dataset(OUT / "digits12_test.csv", x12[test], y[test])
    golden["micro_fixture"] = golden_for(micro, x12[test], y[test])

    (OUT / "fixtures_golden.json").write_text(json.dumps(golden, indent=1) + "\n")
    for name, g in golden.items():
        print(f"{name}: float accuracy {g['float_accuracy']:.4f} ({g['correct']}/{g['rows']})")


if __name__ == "__main__":
    main()

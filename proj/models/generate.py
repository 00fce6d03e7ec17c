#!/usr/bin/env python3
# Copyright 2026 The rtdeploy Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the bundled example models and their int8 weight blobs."""

import json
import pathlib
import random

HERE = pathlib.Path(__file__).resolve().parent


def write(name, doc, blobs, seed):
    rng = random.Random(seed)
    doc["weight_sizes"] = {k: v for k, v in blobs}
    if blobs:
        doc["weights_file"] = name + ".bin"
        data = bytes(rng.randrange(-8, 8) & 0xFF for _, n in blobs for _ in range(n))
        (HERE / (name + ".bin")).write_bytes(data)
    (HERE / (name + ".json")).write_text(json.dumps(doc, indent=2) + "\n")


def conv(id_, src, cin, cout, k, pad, shift, relu=True):
    return {"id": id_, "op": "Conv2D", "inputs": [src], "weights": id_ + ".w",
            "attrs": {"in_channels": cin, "out_channels": cout, "kernel": k,
                      "stride": 1, "padding": pad, "shift": shift}}, (id_ + ".w", cout * k * k * cin)


def relu(id_, src):
    return {"id": id_, "op": "ReLU", "inputs": [src]}


c1, w1 = conv("conv1", "input", 8, 16, 3, 1, 4)
c2, w2 = conv("conv2", "relu1", 16, 16, 3, 1, 5)
write("tiny_cnn", {
    "input": {"dims": [16, 16, 8]},
    "layers": [
        c1, relu("relu1", "conv1"),
        c2, relu("relu2", "conv2"),
        {"id": "pool", "op": "MaxPool2D", "inputs": ["relu2"], "attrs": {"window": 2, "stride": 2}},
        {"id": "flat", "op": "Flatten", "inputs": ["pool"]},
        {"id": "fc", "op": "Dense", "inputs": ["flat"], "weights": "fc.w",
         "attrs": {"in_features": 1024, "out_features": 10, "shift": 6}},
    ]}, [w1, w2, ("fc.w", 10 * 1024)], 1)

write("two_layer", {
    "input": {"dims": [64]},
    "layers": [
        {"id": "fc1", "op": "Dense", "inputs": ["input"], "weights": "fc1.w",
         "attrs": {"in_features": 64, "out_features": 32, "shift": 4, "relu": True}},
        {"id": "fc2", "op": "Dense", "inputs": ["fc1"], "weights": "fc2.w",
         "attrs": {"in_features": 32, "out_features": 10, "shift": 4}},
    ]}, [("fc1.w", 64 * 32), ("fc2.w", 32 * 10)], 2)

r1, rw1 = conv("conv1", "input", 4, 8, 3, 1, 3)
r2, rw2 = conv("conv2", "relu1", 8, 8, 3, 1, 4)
write("residual", {
    "input": {"dims": [8, 8, 4]},
    "layers": [
        r1, relu("relu1", "conv1"),
        r2,
        {"id": "add", "op": "ElementwiseAdd", "inputs": ["conv2", "relu1"]},
        relu("relu2", "add"),
    ]}, [rw1, rw2], 3)

write("empty", {"input": {"dims": [4]}, "layers": []}, [], 4)

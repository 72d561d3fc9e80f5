"""Straight-line evaluation of the five GCN layers, mean pooling, the pooled standardisation
and three dense layers on a 4-node graph with formula-set weights."""
import json
import pathlib

import numpy as np

FEATURES = np.array([[0.5, -1.0], [1.5, 0.25], [-0.75, 0.8], [0.1, 2.0]])
EDGES = [(0, 1), (1, 2), (2, 3), (0, 2)]
GCN = [16, 32, 48, 64, 96]
FC = [96, 64, 2]


def weight(layer, rows, cols):
    i = np.arange(rows)[:, None]
    j = np.arange(cols)[None, :]
    return 3.0 * np.sin(12.9898 * (i + 1) + 78.233 * (j + 1) + 37.719 * layer) / np.sqrt(rows)


def bias(layer, cols):
    return 0.05 * np.cos(np.arange(cols) + layer)


def pool_mean(j):
    return 0.5 * np.sin(j)


def pool_var(j):
    return 1.0 + 0.5 * np.cos(2.0 * j)


def main():
    n = len(FEATURES)
    a = np.eye(n)
    for s, t in EDGES:
        a[s, t] = a[t, s] = 1.0
    dinv = 1.0 / np.sqrt(a.sum(axis=1))
    a_hat = dinv[:, None] * a * dinv[None, :]
    h = FEATURES
    fan_in = FEATURES.shape[1]
    for l, width in enumerate(GCN):
        h = np.maximum(a_hat @ h @ weight(l, fan_in, width) + bias(l, width), 0.0)
        fan_in = width
    x = h.mean(axis=0)
    j = np.arange(GCN[-1])
    x = (x - pool_mean(j)) / np.sqrt(pool_var(j) + 1e-5)
    for k, width in enumerate(FC):
        layer = len(GCN) + k
        x = x @ weight(layer, fan_in, width) + bias(layer, width)
        if k < len(FC) - 1:
            x = np.maximum(x, 0.0)
        fan_in = width
    out = {"features": FEATURES.tolist(), "edges": EDGES, "output": x.tolist(),
           "weight": "3.0*sin(12.9898*(i+1)+78.233*(j+1)+37.719*layer)/sqrt(rows)", "bias": "0.05*cos(j+layer)",
           "pool_mean": "0.5*sin(j)", "pool_var": "1+0.5*cos(2j)"}
    path = pathlib.Path(__file__).resolve().parent.parent / "data" / "toy_gcn.json"
    path.write_text(json.dumps(out, indent=1) + "\n")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Regenerates the fixture corpus. Deterministic: rerunning rewrites identical files.

    python3 fixtures/generate.py

Needs numpy and scikit-learn. Gradient-boosted models are trained with
scikit-learn and exported in the nested JSON dump layout; additive models are
synthetic lookup tables in the bin/score layout.
"""

import csv
import json
from pathlib import Path

import numpy as np
from sklearn.ensemble import GradientBoostingClassifier

HERE = Path(__file__).resolve().parent
NAMES = ["g", "l", "s", "p"]
BOUNDS = [(0.37, 6.05), (0.0, 3.29), (0.0, 10.5), (0.33, 0.57)]
SPECS = {
    "specs": [
        {"id": "A", "kind": "implication", "premise": ["g > 5.0"], "conclusion": "logit <= 0",
         "description": "deep groundwater: no spreading"},
        {"id": "B", "kind": "monotone", "feature": "p", "direction": "non-decreasing",
         "description": "risk does not fall as shaking grows"},
        {"id": "C", "kind": "implication", "premise": ["l > 2.5", "p < 0.35"], "conclusion": "logit <= 0",
         "description": "far from the free face under weak shaking: no spreading"},
        {"id": "D", "kind": "implication", "premise": ["s < 0.1", "l > 2.5", "p < 0.35"], "conclusion": "logit <= 0",
         "description": "flat ground, far, weak shaking: no spreading"},
    ]
}


def write_json(path, value):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(value, indent=1) + "\n")


def space_json():
    return {"features": [{"name": n, "lower": lo, "upper": hi} for n, (lo, hi) in zip(NAMES, BOUNDS)]}


def f32_inward(lo, hi):
    a, b = np.float32(lo), np.float32(hi)
    if float(a) < lo:
        a = np.nextafter(a, np.float32(np.inf))
    if float(b) > hi:
        b = np.nextafter(b, np.float32(-np.inf))
    return a, b


def f32_text(x):
    return float(str(np.float32(x)))


def split_condition(t):
    """Smallest binary32 strictly above the float64 threshold `t`: for binary32
    inputs `x <= t` holds exactly when `x < split_condition(t)`."""
    c = np.float32(t)
    if float(c) <= t:
        c = np.nextafter(c, np.float32(np.inf))
    return c


def leaf(nid, value):
    return {"nodeid": nid, "leaf": value}


def node(nid, depth, feature, cond, yes, no):
    return {"nodeid": nid, "depth": depth, "split": feature, "split_condition": cond,
            "yes": yes["nodeid"], "no": no["nodeid"], "children": [yes, no]}


def sklearn_tree_to_dump(tree, scale):
    t = tree.tree_
    counter = [0]

    def walk(i, depth):
        nid = counter[0]
        counter[0] += 1
        if t.children_left[i] == -1:
            return leaf(nid, float(repr(scale * float(t.value[i][0][0]))))
        left = walk(t.children_left[i], depth + 1)
        right = walk(t.children_right[i], depth + 1)
        cond = split_condition(float(t.threshold[i]))
        return node(nid, depth, NAMES[t.feature[i]], f32_text(cond), left, right)

    return walk(0, 0)


def count_leaves(n):
    return 1 if "leaf" in n else sum(count_leaves(c) for c in n["children"])


def sample_domain(rng, count):
    cols = []
    for lo, hi in BOUNDS:
        a, b = f32_inward(lo, hi)
        cols.append(rng.uniform(float(a), float(b), count).astype(np.float32))
    return np.stack(cols, axis=1)


def lateral_spreading_data(rng, count):
    g = np.clip(rng.gamma(2.2, 0.9, count) + 0.37, 0.37, 6.05)
    l = np.clip(rng.exponential(0.9, count), 0.0, 3.29)
    s = np.clip(rng.gamma(1.3, 1.4, count), 0.0, 10.5)
    p = np.clip(rng.normal(0.43, 0.05, count), 0.33, 0.57)
    X = np.stack([g, l, s, p], axis=1).astype(np.float32)
    z = 1.2 - 0.55 * g - 1.6 * l + 0.18 * s + 9.0 * (p - 0.43)
    z += 0.9 * np.exp(-((p - 0.42) / 0.015) ** 2) * (l > 1.5)  # sparse-data artefact
    y = (rng.uniform(size=count) < 1.0 / (1.0 + np.exp(-z))).astype(int)
    return X, y


def write_fixture(path, X, logits):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NAMES + ["logit"])
        for row, z in zip(X, logits):
            w.writerow([str(np.float32(v)) for v in row] + [repr(float(z))])


def gbt_model():
    rng = np.random.default_rng(20110222)
    X, y = lateral_spreading_data(rng, 7291)
    clf = GradientBoostingClassifier(n_estimators=100, max_depth=5, learning_rate=0.1,
                                     min_samples_leaf=4, random_state=7)
    clf.fit(X, y)
    prior = float(clf._raw_predict_init(X[:1])[0][0])
    trees = [sklearn_tree_to_dump(est[0], clf.learning_rate) for est in clf.estimators_]
    out = HERE / "gbt100"
    write_json(out / "model.json", trees)
    write_json(out / "space.json", space_json())
    write_json(out / "specs.json", SPECS)
    (out / "base_score.txt").write_text(repr(prior) + "\n")

    points = sample_domain(rng, 180)
    # rows sitting exactly on split conditions exercise the strict `<` rule
    conds = [(n["split"], n["split_condition"]) for t in trees for n in walk_nodes(t) if "split" in n]
    extra = sample_domain(rng, 20)
    for k, row in enumerate(extra):
        f, c = conds[(k * 37) % len(conds)]
        row[NAMES.index(f)] = np.float32(c)
    points = np.concatenate([points, extra])
    write_fixture(out / "fixture.csv", points, clf.decision_function(points))
    return sum(count_leaves(t) for t in trees), prior


def walk_nodes(n):
    yield n
    for c in n.get("children", []):
        yield from walk_nodes(c)


def smooth_walk(rng, count, step, start=0.0):
    return start + np.cumsum(rng.normal(0.0, step, count))


def additive_model():
    rng = np.random.default_rng(2011)
    edge_counts = [1010, 1010, 1010, 1009]
    terms = []
    tables = []
    for j, (name, (lo, hi)) in enumerate(zip(NAMES, BOUNDS)):
        a, b = f32_inward(lo, hi)
        edges = np.unique(np.linspace(float(a), float(b), edge_counts[j] + 2)[1:-1].astype(np.float32))
        assert len(edges) == edge_counts[j]
        if name == "p":
            scores = np.sort(rng.normal(0.0, 0.4, len(edges) + 1))  # monotone-constrained shape
        elif name in ("g", "l"):
            scores = -np.sort(rng.normal(0.0, 0.35, len(edges) + 1)) + rng.normal(0, 0.01, len(edges) + 1)
        else:
            scores = smooth_walk(rng, len(edges) + 1, 0.02)
        scores = np.round(scores - scores.mean(), 6)
        terms.append({"features": [name], "edges": [f32_text(e) for e in edges], "scores": [float(s) for s in scores]})
        tables.append(("u", j, edges, scores))
    for a in range(4):
        for b in range(a + 1, 4):
            axes = []
            for j in (a, b):
                lo, hi = f32_inward(*BOUNDS[j])
                axes.append(np.unique(np.linspace(float(lo), float(hi), 63)[1:-1].astype(np.float32)))
            grid = rng.normal(0.0, 0.05, (62, 62))
            if NAMES[b] == "p":
                grid = np.sort(grid, axis=1)
            grid = np.round(grid, 6)
            terms.append({"features": [NAMES[a], NAMES[b]],
                          "edges": [[f32_text(e) for e in axes[0]], [f32_text(e) for e in axes[1]]],
                          "scores": [[float(v) for v in row] for row in grid]})
            tables.append(("p", (a, b), axes, grid))
    intercept = -1.25
    dump = {"intercept": intercept, "terms": terms,
            "metadata": {"kind": "additive", "note": "synthetic lookup tables, monotone in p"}}
    out = HERE / "additive"
    write_json(out / "model.json", dump)
    write_json(out / "space.json", space_json())
    write_json(out / "specs.json", SPECS)

    points = sample_domain(rng, 200)
    # put a third of the rows exactly on bin edges
    for k, row in enumerate(points[::3]):
        j = k % 4
        row[j] = np.float32(terms[j]["edges"][(k * 101) % len(terms[j]["edges"])])
    logits = []
    for row in points:
        z = intercept
        for kind, f, edges, scores in tables:
            if kind == "u":
                z += scores[np.searchsorted(edges, row[f], side="right")]
            else:
                i = np.searchsorted(edges[0], row[f[0]], side="right")
                k = np.searchsorted(edges[1], row[f[1]], side="right")
                z += scores[i][k]
        logits.append(z)
    write_fixture(out / "fixture.csv", points, logits)
    return sum(len(t[3]) for t in tables if t[0] == "u")


def worked():
    def split(nid, feature, cond, yes, no):
        return node(nid, 0 if nid == 0 else 1, feature, cond, yes, no)

    h1 = split(0, "g", 2.5,
               split(1, "p", 0.42, leaf(3, 0.3), leaf(4, 0.5)),
               split(2, "p", 0.42, leaf(5, -0.1), leaf(6, 0.05)))
    h2 = split(0, "l", 1.0, leaf(1, 0.2), leaf(2, -0.3))
    out = HERE / "worked"
    write_json(out / "model.json", [h1, h2])
    write_json(out / "space.json", space_json())
    write_json(out / "specs.json", SPECS)
    # every leaf non-positive: all four specs hold
    c1 = split(0, "g", 2.5,
               split(1, "p", 0.42, leaf(3, -0.3), leaf(4, -0.1)),
               split(2, "p", 0.42, leaf(5, -0.5), leaf(6, -0.25)))
    c2 = split(0, "l", 1.0, leaf(1, -0.2), leaf(2, -0.3))
    write_json(out / "compliant.json", [c1, c2])


def thin_sliver():
    """Violates C only for 2.5 < l < 2.5001 with s < 0.05, a sliver no grid below n = 200 samples."""
    l_lo, l_hi = 2.5, 2.5001
    for n in (30, 50, 100, 200):
        a, b = f32_inward(*BOUNDS[1])
        grid = np.linspace(float(a), float(b), n).astype(np.float32)
        assert not np.any((grid > np.float32(l_lo)) & (grid < np.float32(l_hi))), n
    rng = np.random.default_rng(5)
    trees = []
    nid = [0]

    def fresh():
        nid[0] += 1
        return nid[0]

    sliver = node(0, 0, "l", 2.5, leaf(1, -0.4),
                  node(2, 1, "l", l_hi, node(3, 2, "s", 0.05, leaf(5, 2.0), leaf(6, -0.4)), leaf(4, -0.4)))
    trees.append(sliver)
    for _ in range(11):
        f = int(rng.integers(0, 4))
        lo, hi = BOUNDS[f]
        c = round(float(rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo))), 3)
        w = [round(float(v), 4) for v in rng.uniform(-0.1, 0.02, 2)]
        trees.append(node(0, 0, NAMES[f], c, leaf(1, w[0]), leaf(2, w[1])))
    out = HERE / "sliver"
    write_json(out / "model.json", trees)
    write_json(out / "space.json", space_json())
    write_json(out / "specs.json", SPECS)


def sum_of_steps():
    """Two steps on p: the first falls, the second rises by more, so the sum rises."""
    t1 = node(0, 0, "p", 0.4, leaf(1, 1.0), leaf(2, 0.0))
    t2 = node(0, 0, "p", 0.4, leaf(1, 0.0), leaf(2, 2.0))
    out = HERE / "steps"
    write_json(out / "model.json", [t1, t2])
    write_json(out / "space.json", space_json())
    write_json(out / "specs.json", {"specs": [SPECS["specs"][1]]})


if __name__ == "__main__":
    worked()
    thin_sliver()
    sum_of_steps()
    leaves, prior = gbt_model()
    bins = additive_model()
    print(f"gbt100: {leaves} leaves, base score {prior!r}; additive: {bins} univariate bins")

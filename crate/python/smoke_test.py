"""Smoke test for the pyilc extension module.

Build it and put it on the path first:

    cargo build --release -p ilc-py
    cp target/release/libpyilc.so python/pyilc.so
    python3 python/smoke_test.py
"""
import os
import sys

here = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, here)

import pyilc  # noqa: E402

root = os.path.dirname(here)

m = pyilc.Mapping("weighted", weights=[0.5, 1, 2, 4])
v = [3.0, -2.0, 7.0, 1.0]
assert m.decode(m.encode(v), 4) == v
for kind in ["static", "partial-dynamic", "full-dynamic"]:
    mk = pyilc.Mapping(kind)
    assert mk.decode(mk.encode([1.0, 2.0, 3.0]), 3) == [1.0, 2.0, 3.0], kind

data = pyilc.Dataset.from_csv(os.path.join(root, "data", "breast-cancer-wisconsin.csv"), preset="wbc")
assert len(data) == 683 and data.classes == ["benign", "malignant"]
assert data.labels.count("benign") == 444

cfg = {"pitch": 0.5, "min_pure_support": 8}
rules, trace = pyilc.discover(data, config=cfg)
assert trace.count("\n") >= len(rules)
metrics = rules.metrics(data)
assert metrics["decided"] == 683 and metrics["correct"] == 683, metrics
assert pyilc.rules_from_trace(trace, data).to_jsonl() == rules.to_jsonl()
assert pyilc.RuleSet.from_jsonl(rules.to_jsonl()).to_jsonl() == rules.to_jsonl()

joined, steps = pyilc.join(rules, data)
assert joined.classify(data) == rules.classify(data)
pruned, what = pyilc.prune(rules, data, strategy="refuse", tau=7)
assert all(p is None or p == l for p, l in zip(pruned.classify(data), data.labels))

report, text = pyilc.cross_validate(data, config=cfg, cv={"k": 3, "seed": 7})
assert len(report["folds"]) == 3 and "mean fold accuracy" in text
fold, avg = pyilc.scenario_estimates(68, 10, 10)
assert abs(fold - 85.29) < 0.01 and abs(avg - 98.53) < 0.01, (fold, avg)

svg = pyilc.render(data, ruleset=rules, mirrored=True, limit=50)
assert svg.startswith("<svg") or svg.startswith("<?xml")

fit, desc = pyilc.fit_linear(data, "malignant")
assert fit["accuracy"] > 0.9, fit
fit1, _ = pyilc.fit_linear(data, "malignant", config={"angles": 36, "selectors": ["endpoint", {"node": 0}], "mode": "one_sided"})
assert fit1["accuracy"] == 1.0, fit1

adv, _ = pyilc.cross_validate(data, config=cfg, cv={"k": 3, "adversarial": "mini-box"}, rules={"prune": "refuse"})
assert len(adv["folds"]) == 3

s = pyilc.Session(data, config=cfg)
top = s.candidates(limit=3)
s.accept(s.version, candidate=0)
try:
    s.accept(0, candidate=0)
    raise AssertionError("stale token accepted")
except ValueError:
    pass
assert s.undo()
s.auto_complete()
assert s.done and s.ruleset().to_jsonl() == rules.to_jsonl()

print(f"ok: {len(rules)} rules, {len(what)} pruned, cv {report['folds'][0]['accuracy']:.4f}, {desc}")

#!/usr/bin/env python3
"""Runs every gsm-tail command on a small fixture and validates its JSON and CSV outputs."""
import csv
import json
import pathlib
import random
import subprocess
import sys

import jsonschema

tool, schemas, configs, work = (pathlib.Path(a) for a in sys.argv[1:5])
work.mkdir(parents=True, exist_ok=True)
failures = []


def schema(name):
    return json.loads((schemas / f"{name}.schema.json").read_text())


def validate(path, name):
    try:
        jsonschema.validate(json.loads(pathlib.Path(path).read_text()), schema(name))
    except jsonschema.ValidationError as e:
        failures.append(f"{path}: {e.message}")


def check_csv(path):
    raw = pathlib.Path(path).read_bytes()
    if b"\n" in raw.replace(b"\r\n", b""):
        failures.append(f"{path}: bare LF line ending")
    rows = list(csv.reader(raw.decode().splitlines()))
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        failures.append(f"{path}: ragged or empty")


def run(*args, expect=0):
    p = subprocess.run([str(tool), *map(str, args)], capture_output=True, text=True)
    if p.returncode != expect:
        failures.append(f"{' '.join(map(str, args))}: exit {p.returncode}, wanted {expect}\n{p.stderr}")
    return p


for name in ["fit", "experiment", "generator"]:
    validate(configs / f"{name}.json", {"fit": "fit_config", "experiment": "experiment_config"}.get(name, name))

rng = random.Random(3)
data = work / "data.csv"
data.write_text("value\n" + "".join(f"{rng.gammavariate(2.0, 1.5):.6f}\n" for _ in range(120)))
fit_cfg = work / "fit.json"
fit_cfg.write_text(json.dumps({"J": 20, "iterations": 400, "burn_in": 100, "seed": 5, "transform": "cube_root"}))
validate(fit_cfg, "fit_config")

run("fit", data, "--config", fit_cfg, "--out", work / "fit")
run("tail", work / "fit" / "draws.json", "--k", "0,1,5,20", "--out", work / "tail")
p = run("calibrate", data, "--J", 20, "--omega", 0.5, "--out", work / "cal")
jsonschema.validate(json.loads(p.stdout), schema("calibration"))
run("diagnose", work / "fit" / "draws.json", data, "--out", work / "diag")
exp_cfg = work / "experiment.json"
exp_cfg.write_text(json.dumps({"thresholds": [1.0, 4.0], "n_replicates": 1, "iterations": 200, "burn_in": 50, "k_max": 2}))
validate(exp_cfg, "experiment_config")
run("simulate", "--generator", '{"n": 300, "lognormal": {"mu": 0.5, "sigma": 0.8}}', "--config", exp_cfg,
    "--out", work / "sim")

validate(work / "fit" / "draws.json", "draws")
validate(work / "fit" / "diagnostics.json", "diagnostics")
validate(work / "diag" / "diagnostics.json", "diagnostics")
validate(work / "cal" / "calibration.json", "calibration")
for d in ["fit", "tail", "cal", "diag", "sim"]:
    validate(work / d / "manifest.json", "manifest")
    for f in (work / d).glob("*.csv"):
        check_csv(f)

# Config documents the schema rejects are rejected by the tool too.
bad = work / "bad.json"
for doc in [{"J": 0}, {"alpha": 3}, {"alpha": 3, "beta": 1.0, "omega": 0.2}, {"variant": "slice"}, {"colour": 1}]:
    bad.write_text(json.dumps(doc))
    try:
        jsonschema.validate(doc, schema("fit_config"))
        failures.append(f"schema accepted {doc}")
    except jsonschema.ValidationError:
        pass
    run("fit", data, "--config", bad, "--out", work / "bad", expect=3)

for f in failures:
    print("FAIL", f)
print("schema checks:", "FAIL" if failures else "PASS")
sys.exit(1 if failures else 0)

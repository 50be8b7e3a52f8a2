"""Runs every boxctl subcommand once and validates the manifests.

usage: check_manifests.py <boxctl> <manifest.schema.json>
"""

import csv
import json
import math
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

ERROR_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "tool", "command", "exit_status", "error"],
    "properties": {
        "exit_status": {"enum": [1, 2, 3]},
        "error": {
            "type": "object",
            "required": ["kind", "code", "message"],
            "properties": {"kind": {"enum": ["usage", "numerical", "internal"]}},
        },
    },
}


def main() -> int:
    boxctl, schema_path = sys.argv[1], sys.argv[2]
    schema = json.loads(Path(schema_path).read_text())
    failures = []

    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp)
        with open(work / "V.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["tau", "V"])
            for i in range(101):
                tau = 0.5 * i / 100
                w.writerow([tau, -2.0 + math.sin(3.0 * tau)])
        (work / "run.json").write_text(json.dumps({
            "path": {"type": "samples", "horizontal": "shape.csv", "vertical": 1.0},
            "basis": 10, "dt": 0.01, "initial": {"mode": [2, 1], "frame": "gauge"}, "observe_every": 20,
            "output": "evolve.csv"}))

        runs = [
            ["spectrum", "--a", "1.2", "--count", "20"],
            ["crossings", "--a0", "1.2", "--a1", "0.8", "--t1", "20", "--max-index", "3"],
            ["sigma", "--a", "1.5707963267948966", "--atilde", "0.5235987755982988", "--K", "2000",
             "--out", "sigma.csv"],
            ["orbit", "--table", "sigma.csv", "--start-max", "200", "--period-max", "8"],
            ["entropy", "--table", "sigma.csv", "--K", "1000", "--out", "entropy.csv"],
            ["synthesize", "--V", "V.csv", "--a", "1.2", "--samples", "513", "--out", "shape.csv"],
            ["evolve", "--config", "run.json"],
            ["pump", "--n", "12", "--dt", "0.02", "--speed", "0.2"],
            ["sah2", "--out", "sah2.csv"],
        ]
        for args in runs:
            p = subprocess.run([boxctl, *args], cwd=work, capture_output=True, text=True)
            label = " ".join(args)
            if p.returncode != 0:
                failures.append(f"{label}: exit {p.returncode}: {p.stderr.strip()}")
                continue
            try:
                doc = json.loads(p.stdout)
                jsonschema.validate(doc, schema)
                for entry in doc["files"]:
                    with open(work / entry["path"]) as f:
                        rows = list(csv.reader(f))
                    if rows[0] != entry["columns"] or len(rows) - 1 != entry["rows"]:
                        failures.append(f"{label}: {entry['path']} does not match its manifest entry")
            except (json.JSONDecodeError, jsonschema.ValidationError) as e:
                failures.append(f"{label}: {e}")

        for args, status in ([["spectrum", "--count", "3"], 2], [["sigma", "--a", "1", "--atilde", "0.5", "--K", "9"], 3]):
            p = subprocess.run([boxctl, *args], cwd=work, capture_output=True, text=True)
            if p.returncode != status:
                failures.append(f"{' '.join(args)}: expected exit {status}, got {p.returncode}")
                continue
            try:
                jsonschema.validate(json.loads(p.stderr), ERROR_SCHEMA)
            except (json.JSONDecodeError, jsonschema.ValidationError) as e:
                failures.append(f"{' '.join(args)}: bad error object: {e}")

    for f in failures:
        print("FAIL", f)
    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
# Copyright 2026 The qldlab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Runs qldlab in JSON mode and validates each document against docs/schema."""
import json
import pathlib
import subprocess
import sys

import jsonschema

RUNS = [
    ["advantage", "--ensemble", "stabilizer:n=1", "--plan", "comp-basis,m=2", "--k", "2"],
    ["advantage", "--ensemble", "stabilizer:n=2", "--plan", "comp-basis,m=2", "--k", "2", "--audit", "local-llr"],
    ["advantage", "--ensemble", "haar:n=1", "--plan", "random-local,m=2", "--D", "1", "--k", "2"],
    ["design-check", "--ensemble", "stabilizer:n=1", "--k", "4"],
    ["design-check", "--ensemble", "point:zero-state,n=1", "--k", "2"],
    ["biclique-power", "--n", "16", "--lambda", "2,8", "--trials", "20"],
    ["biclique-power", "--n", "8", "--trials", "0"],
    ["biclique-mass", "--n", "2", "--max-size", "3"],
    ["mitigation", "--n", "3", "--l", "1", "--trials", "10", "--plan", "random-local,m=1", "--k", "2"],
    ["mitigation", "--n", "3", "--l", "1", "--trials", "10", "--check", "purity"],
    ["haar-verify", "--samples", "500", "--dmax", "2", "--kmax", "2"],
]


def main() -> int:
    exe, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    schemas = {p.name.removesuffix(".schema.json"): json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
    for s in schemas.values():
        jsonschema.Draft7Validator.check_schema(s)
    failures = 0
    for args in RUNS:
        proc = subprocess.run([exe, *args, "--seed", "3", "--format", "json"], capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"FAIL {' '.join(args)}: exit {proc.returncode}: {proc.stderr.strip()}")
            failures += 1
            continue
        try:
            jsonschema.validate(json.loads(proc.stdout), schemas[args[0]])
            print(f"ok   {' '.join(args)}")
        except jsonschema.ValidationError as e:
            print(f"FAIL {' '.join(args)}: {e.message}")
            failures += 1
    # The schemas must reject a truncated document.
    try:
        jsonschema.validate({"command": "advantage", "seed": 1}, schemas["advantage"])
        print("FAIL advantage schema accepted a document without a report")
        failures += 1
    except jsonschema.ValidationError:
        print("ok   truncated document rejected")
    for cfg in sorted((schema_dir.parent / "configs").glob("*.json")):
        try:
            jsonschema.validate(json.loads(cfg.read_text()), schemas["config"])
            print(f"ok   {cfg.name}")
        except jsonschema.ValidationError as e:
            print(f"FAIL {cfg.name}: {e.message}")
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

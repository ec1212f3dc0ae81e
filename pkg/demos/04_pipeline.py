"""The whole pipeline on the bundled fixture, from raw JSONL to report tables.

Equivalent to:

    iwaa fixture /tmp/iwaa-demo
    iwaa run --config /tmp/iwaa-demo/config.json
"""

import csv
import json
import sys
import tempfile
from pathlib import Path

from iwaa.pipeline import STAGES, RunConfig, run_pipeline, write_bundled_fixture

root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="iwaa-"))
cfg = RunConfig.from_file(write_bundled_fixture(root))
manifest = run_pipeline(cfg, STAGES)

print(f"status: {manifest['status']}, {len(manifest['outputs'])} files in {cfg.out}")
for stage, info in manifest["stages"].items():
    print(f"  {stage:<10} {info['rows']}")

model = json.loads((Path(cfg.out) / "cluster_model.json").read_text())
print(f"clustering: {model['algorithm']} {model['hyperparameters']}")

with open(Path(cfg.out) / "thresholds.csv", newline="") as fh:
    for row in csv.DictReader(fh):
        if row["group"] == "all":
            print(f"  {row['side']:<10} fraction {float(row['fraction']):.2f} of {row['n_seekers']} seekers")

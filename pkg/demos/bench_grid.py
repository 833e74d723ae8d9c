"""Drive the benchmark from Python instead of the command line.

Runs a reduced grid (both inputs, delta = 1, lambda = 0, two initial controls,
both modes) at N = M = 64 and prints the summary table written to disk.

    python3 demos/bench_grid.py [out_dir]
"""

import sys
from pathlib import Path

from poroslip.bench import load_config, run_grid

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("bench-demo")
cfg = load_config(None, "ci")
cfg.update({"deltas": [1.0], "lambdas": [0.0], "inits": [1, 6], "n_time": 64, "n_space": 64})

rows = run_grid(cfg, out)
print((out / "summary.csv").read_text())
print(f"controls in {out / 'controls'}, per-iteration logs in {out / 'logs'}")

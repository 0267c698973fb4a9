#!/usr/bin/env python3
"""
Smoke run: a tiny synthetic experiment end to end, then the report.
"""
import json
from datetime import datetime
from pathlib import Path

# Add the project root to the Python path
import sys
sys.path.append(str(Path(__file__).parent.parent))

from mero.config.run_config import RunConfig
from mero.experiment import cmd_run
from mero.report import cmd_report


def smoke_config(out_dir: Path) -> RunConfig:
    return RunConfig.model_validate({
        "algorithm": ["mero-anytime", "mero-multistage", "gdro"],
        "task": {"kind": "synthetic", "synthetic": {"m": 3, "dimension": 10, "seed": 0}},
        "iters": 500,
        "seeds": [0, 1],
        "checkpoint_every": 50,
        "n_eval": 2000,
        "rstar": {"method": "erm", "train_n": 2000, "eval_n": 2000},
        "output_dir": str(out_dir),
    })


def main():
    """Run the smoke config and print what came out."""
    print("Starting smoke run...")
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    out_dir = Path("runs") / f"smoke_{timestamp}"

    config = smoke_config(out_dir)
    print(f"Algorithms: {', '.join(a.value for a in config.algorithm)}")
    manifest_path = cmd_run(config)
    summary = cmd_report(out_dir)

    with open(manifest_path, encoding="utf-8") as f:
        manifest = json.load(f)
    print(f"\nMinimal risks ({manifest['rstar']['method']}): {manifest['rstar']['values']}")
    for run in manifest["runs"]:
        print(f"{run['algorithm']:>16} seed {run['seed']}: {run['rounds']} rounds, "
              f"final MER {run['final_mer']:.4f}, samples {run['samples_per_dist']}")
    print(f"\nAggregate: {summary.aggregate}")
    print(f"Slopes: {summary.slopes}")
    print(f"Charts: {', '.join(p.name for p in summary.charts)}")


if __name__ == "__main__":
    main()

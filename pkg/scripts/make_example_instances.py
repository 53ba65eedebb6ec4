#!/usr/bin/env python3
"""Write example instance files for the check/gap CLI into instances/.

The one-item worst-case instance serializes extensionally; the query-pool
and cascade examples use generator descriptors, so the files stay small
and the loader rebuilds them deterministically from their seeds.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from adsub.instance_io import instance_to_dict, save_instance
from adsub.sampling import lower_bound_instance


def main() -> int:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("instances")
    outdir.mkdir(parents=True, exist_ok=True)

    save_instance(lower_bound_instance(), outdir / "one_item_worst_case.json")

    (outdir / "query_pool_small.json").write_text(json.dumps({
        "utility": {"kind": "active-learning", "hypotheses": 12, "points": 4,
                    "queries": 4, "labels": 2, "k": 2, "seed": 0},
    }, indent=2) + "\n")

    (outdir / "cascade_tiny.json").write_text(json.dumps({
        "utility": {"kind": "independent-cascade",
                    "edges": [[0, 1, 1.0], [1, 2, 0.1], [3, 4, 1.0],
                              [4, 5, 1.0], [5, 6, 1.0]],
                    "k": 2},
    }, indent=2) + "\n")

    for name in sorted(p.name for p in outdir.glob("*.json")):
        print(f"wrote {outdir / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Regenerate the golden boundary paths used by the SVG regression tests.

Run from the repository root:  python scripts/make_golden.py
"""

import json
from pathlib import Path

from srgkit.engine import compute_region, region_boundary
from srgkit.gains import FrequencyGainProvider
from srgkit.lti import load_model

ROOT = Path(__file__).resolve().parents[1]
CASES = [("t1", "soft", 33), ("t1", "hard", 17), ("t2", "soft", 33), ("t2", "hard", 33),
         ("t3", "soft", 65), ("t3", "hard", 65)]


def golden(name: str, mode: str, n: int) -> dict:
    model = load_model(ROOT / "models" / f"{name}.json")
    region = compute_region(FrequencyGainProvider(model, mode), n)
    path = region_boundary(region)
    return {"model": name, "mode": mode, "alphas": n,
            "boundary": [["inf", "inf"] if p.is_inf else [p.re, p.im] for p in path.points]}


def main() -> None:
    out = ROOT / "tests" / "golden"
    out.mkdir(exist_ok=True)
    for name, mode, n in CASES:
        (out / f"{name}_{mode}.json").write_text(json.dumps(golden(name, mode, n), indent=1) + "\n")
        print(f"wrote {name}_{mode}.json")


if __name__ == "__main__":
    main()

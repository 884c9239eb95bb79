"""Shared plumbing for the figure scripts: config, region + SVG output."""

from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from srgkit.engine import compute_region, region_contains_within, region_to_json
from srgkit.gains import FrequencyGainProvider
from srgkit.lti import load_model
from srgkit.render import PlotConfig, render_svg

ROOT = Path(__file__).resolve().parents[1]


@dataclass
class FigureConfig:
    model: str
    alphas: int = 65
    modes: tuple[str, ...] = ("soft", "hard")
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None
    out_dir: Path = field(default_factory=lambda: ROOT / "results")


def parse(defaults: FigureConfig) -> FigureConfig:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=int, default=defaults.alphas)
    ap.add_argument("--out-dir", type=Path, default=defaults.out_dir)
    args = ap.parse_args()
    defaults.alphas, defaults.out_dir = args.alphas, args.out_dir
    return defaults


def run_figure(cfg: FigureConfig, samples_for=None) -> dict:
    """Compute one region per mode, write JSON + SVG, return a summary.

    ``samples_for(mode)`` may return ``(z, inf, tol)`` oracle samples to
    overlay and check for containment.
    """
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    model = load_model(ROOT / "models" / f"{cfg.model}.json")
    summary = {"config": {k: str(v) if isinstance(v, Path) else v for k, v in asdict(cfg).items()}}
    for mode in cfg.modes:
        t0 = time.perf_counter()
        region = compute_region(FrequencyGainProvider(model, mode), cfg.alphas)
        z = inf = None
        entry = {"includes_infinity": region.includes_infinity, "seconds": None}
        if samples_for is not None:
            z, inf, tol = samples_for(model, mode)
            ok = region_contains_within(region, z, tol, inf)
            entry["oracle"] = {"samples": int(ok.size), "violations": int(np.count_nonzero(~ok)), "tol": tol}
        entry["seconds"] = round(time.perf_counter() - t0, 3)
        stem = cfg.out_dir / f"{cfg.model}_{mode}"
        stem.with_suffix(".json").write_text(region_to_json(region))
        plot = PlotConfig(xlim=cfg.xlim, ylim=cfg.ylim, annuli=True, title=f"{cfg.model} ({mode})")
        stem.with_suffix(".svg").write_text(render_svg(region, plot, z, inf))
        summary[mode] = entry
        print(f"{cfg.model} {mode}: {json.dumps(entry)} -> {stem}.svg")
    return summary

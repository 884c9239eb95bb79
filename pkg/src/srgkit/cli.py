"""Command-line front end.

``srgkit srg``   computes a region and writes JSON (and optionally SVG);
``srgkit gains`` tabulates the gains of ``T - alpha*I`` as CSV.

Exit codes: 0 success, 2 model/usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .engine import SrgComputationError, compute_region, region_contains_within, region_to_json
from .gains import BoundedRealGainProvider, FrequencyGainProvider, MatrixGainProvider
from .gains.matrix import srg_sample_matrix_array
from .lti import MatrixModel, ModelError, StateSpace, TransferMatrix, load_model, realize
from .oracle import SimConfig, points_to_arrays, srg_points_from_frequency, srg_points_from_sim
from .render import PlotConfig, render_svg

EXIT_OK, EXIT_MODEL, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("srgkit")


class UsageError(Exception):
    pass


def _limits(text: str | None) -> tuple[float, float] | None:
    if text is None:
        return None
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from exc
    if not a < b:
        raise argparse.ArgumentTypeError(f"empty interval {text!r}")
    return a, b


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, type=Path, help="model file (JSON)")
    p.add_argument("--kind", choices=("matrix", "tf", "ss"),
                   help="gain provider (default: from the model type)")
    p.add_argument("--mode", choices=("soft", "hard"), default="soft")
    p.add_argument("--omega-max", type=float, default=None, help="upper end of the frequency grid")
    p.add_argument("--tol", type=float, default=None,
                   help="chordal tolerance of --validate (default 1e-6; 2e-2 for simulated samples)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="srgkit", description="Scaled relative graphs of linear operators.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("srg", help="compute an SRG region")
    _common(s)
    s.add_argument("--alphas", type=int, default=65, help="number of alpha grid points")
    s.add_argument("--validate", type=int, default=0, metavar="N", help="check N oracle samples for containment")
    s.add_argument("--svg", type=Path, default=None)
    s.add_argument("--annuli", action="store_true", help="draw the per-alpha rings in the SVG")
    s.add_argument("--xlim", type=_limits, default=None)
    s.add_argument("--ylim", type=_limits, default=None)
    g = sub.add_parser("gains", help="tabulate min/max gains of T - alpha I as CSV")
    _common(g)
    g.add_argument("--alpha", type=float, action="append", default=None, help="alpha value (repeatable)")
    g.add_argument("--alphas", type=int, default=None, help="use the tangent-law grid of this size instead")
    return ap


def make_provider(model, kind: str | None, mode: str, omega_max: float | None):
    """Pick the gain provider for ``model``; ``kind`` overrides the default."""
    if kind is None:
        kind = {MatrixModel: "matrix", TransferMatrix: "tf", StateSpace: "ss"}[type(model)]
    if kind == "matrix":
        if not isinstance(model, MatrixModel):
            raise UsageError("--kind matrix needs a 'matrix' model file")
        return MatrixGainProvider(model.M)
    if isinstance(model, MatrixModel):
        raise UsageError(f"--kind {kind} needs a 'tf' or 'ss' model file")
    if kind == "tf":
        return FrequencyGainProvider(model, mode, omega_max=omega_max)
    if isinstance(model, TransferMatrix):
        if model.has_delay:
            raise UsageError("--kind ss cannot represent delays; use --kind tf")
        if not model.is_proper:
            raise UsageError("--kind ss needs a proper transfer matrix")
        model = realize(model)
    return BoundedRealGainProvider(model, mode)


def _fmt(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf"
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _validation_points(model, provider, mode: str, count: int, seed: int):
    """Oracle samples suited to the provider, and the default tolerance for them."""
    if isinstance(model, MatrixModel):
        z = srg_sample_matrix_array(model.M, count, seed)
        return np.concatenate([z, z.conj()]), np.zeros(2 * z.size, bool), 1e-6, "random vectors"
    delay_free = not getattr(model, "has_delay", False)
    if mode == "hard" and delay_free:
        ss = model if isinstance(model, StateSpace) else realize(model)
        pts = srg_points_from_sim(ss, SimConfig(count=count, seed=seed))
        z, inf = points_to_arrays(pts)
        return z, inf, 2e-2, "simulated truncated pairs"
    rng = np.random.default_rng(seed)
    grid = getattr(provider, "grid", None)
    omega = grid.omega if grid is not None else np.geomspace(1e-3, 1e3, 400)
    pts = []
    for w in rng.choice(omega, size=count):
        v = rng.standard_normal(model.m) + 1j * rng.standard_normal(model.m)
        pts.extend(srg_points_from_frequency(model, [w], v[None, :]))
    z, inf = points_to_arrays(pts)
    return z, inf, 1e-6, "frequency-response samples"


def cmd_srg(args) -> int:
    model = load_model(args.model)
    provider = make_provider(model, args.kind, args.mode, args.omega_max)
    region = compute_region(provider, args.alphas)
    for e in region.errors:
        print(f"warning: dropped annulus at {e}", file=sys.stderr)
    if region.diagnostic:
        print(f"warning: {region.diagnostic}", file=sys.stderr)
    samples = samples_inf = None
    if args.validate:
        samples, samples_inf, tol, what = _validation_points(model, provider, args.mode, args.validate, args.seed)
        tol = args.tol if args.tol is not None else tol
        ok = region_contains_within(region, samples, tol, samples_inf)
        bad = int(np.count_nonzero(~ok))
        print(f"containment: {ok.size} {what}, {bad} violations (chordal tol {tol:g})")
        region.provenance["validation"] = {"samples": int(ok.size), "violations": bad, "tol": tol,
                                           "source": what, "seed": args.seed}
    text = region_to_json(region)
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.svg is not None:
        cfg = PlotConfig(xlim=args.xlim, ylim=args.ylim, annuli=args.annuli, title=str(args.model.name))
        args.svg.write_text(render_svg(region, cfg, samples, samples_inf), encoding="utf-8")
    return EXIT_OK


def cmd_gains(args) -> int:
    from .engine import make_alpha_grid

    model = load_model(args.model)
    provider = make_provider(model, args.kind, args.mode, args.omega_max)
    if args.alphas is not None:
        alphas = make_alpha_grid(args.alphas, provider.scale(), provider.center())
    else:
        alphas = args.alpha if args.alpha else [0.0]
    lines = ["alpha,min_gain,max_gain,witness"]
    for a in alphas:
        try:
            g = provider.gains(float(a))
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            raise SrgComputationError(f"alpha={a:g} ({provider.kind}/{provider.mode} gains): {exc}") from exc
        wit = f"min:{g.min_witness or '-'};max:{g.max_witness or '-'}"
        lines.append(f"{_fmt(a)},{_fmt(g.min_gain)},{_fmt(g.max_gain)},{wit}")
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s: %(message)s")
    try:
        return {"srg": cmd_srg, "gains": cmd_gains}[args.command](args)
    except (ModelError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (ArithmeticError, np.linalg.LinAlgError, OverflowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

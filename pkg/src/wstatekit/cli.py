"""Command-line interface.

Subcommands cover the full pipeline: ``simulate`` a splitter cascade,
``render`` the image pair, ``retrieve`` mode amplitudes and phases from
images, ``compare`` images, search for an entanglement ``witness``, and
emit a figure/CSV ``report``.  Reports are JSON, written to --out when
given and to stdout otherwise; image outputs are PGM files with JSON
sidecars.  Exit codes: 0 success, 2 usage or input error, 3 declared
infeasibility.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import fileio, metrics, optics, pgm, retrieval, state, witness

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


def _emit(payload: dict, out) -> None:
    if out:
        fileio.write_json(out, payload)
    else:
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")


def _parse_splitter_override(text: str):
    """Parse LEVEL:POS=RATIO[,PHASE_UPPER[,PHASE_LOWER]]."""
    try:
        node, _, values = text.partition("=")
        level_text, _, pos_text = node.partition(":")
        level, pos = int(level_text), int(pos_text)
        parts = [float(v) for v in values.split(",")]
        if not 1 <= len(parts) <= 3:
            raise ValueError
    except ValueError:
        raise ValueError(
            f"bad splitter override {text!r}; expected LEVEL:POS=RATIO[,PU[,PL]]"
        ) from None
    ratio = parts[0]
    phase_upper = parts[1] if len(parts) > 1 else 0.0
    phase_lower = parts[2] if len(parts) > 2 else 0.0
    return (level, pos), state.SplitterSpec(ratio, phase_upper, phase_lower)


def cmd_simulate(args) -> int:
    if not 0 <= args.depth <= 6:
        raise ValueError(f"depth must be in [0, 6], got {args.depth}")
    nodes = dict(state.CircuitSpec.ideal(args.depth).splitters)
    for text in args.splitter or []:
        key, spec = _parse_splitter_override(text)
        if key not in nodes:
            raise ValueError(f"splitter {key[0]}:{key[1]} does not exist at depth {args.depth}")
        nodes[key] = spec
    result = state.propagate(state.CircuitSpec(args.depth, nodes))
    payload = {
        "n_modes": result.n_modes,
        "amplitudes": [float(v) for v in result.amplitudes],
        "phases_rad": [float(v) for v in result.phases],
    }
    if args.out:
        state.save_state(result, args.out)
    else:
        _emit(payload, None)
    return EXIT_OK


def _load_layout(n_modes: int, grid: int, spacing: float, waist: float) -> optics.SpotLayout:
    return optics.SpotLayout.linear(n_modes, grid, grid, spacing=spacing, waist=waist)


def cmd_render(args) -> int:
    prepared = state.load_state(args.state)
    layout = _load_layout(prepared.n_modes, args.grid, args.spacing, args.waist)
    noise = optics.NoiseModel(args.p, args.q)
    real_img, fourier_img = optics.render_pair(prepared, noise, layout, args.grid, args.grid)
    if args.background > 0 or args.noise_scale > 0:
        seed_real, seed_fourier = fileio.derive_seeds(args.seed, 2)
        real_img = optics.add_detection_noise(
            real_img, args.background, seed_real, args.noise_scale
        )
        fourier_img = optics.add_detection_noise(
            fourier_img, args.background, seed_fourier, args.noise_scale
        )
    pgm.write_pgm(real_img, args.out + "_real.pgm")
    pgm.write_pgm(fourier_img, args.out + "_fourier.pgm")
    return EXIT_OK


def cmd_retrieve(args) -> int:
    real_img = pgm.read_pgm(args.real)
    fourier_img = pgm.read_pgm(args.fourier)
    if real_img.values.shape != fourier_img.values.shape:
        raise ValueError(
            f"image dimensions disagree: {real_img.values.shape} vs {fourier_img.values.shape}"
        )
    config = retrieval.GSConfig(
        max_iters=args.iters, tol=args.tol, seed=args.seed, restarts=args.restarts
    )
    result = retrieval.gerchberg_saxton(
        retrieval.sqrt_image(real_img), retrieval.sqrt_image(fourier_img), config
    )
    layout = optics.SpotLayout.linear(
        args.modes,
        real_img.values.shape[1],
        real_img.values.shape[0],
        spacing=args.spacing,
        waist=args.waist,
    )
    estimate = retrieval.extract_modes(result.field, layout)
    estimate = retrieval.canonicalize(estimate, remove_ramp=args.ramp)
    twin_used = False
    if args.reference:
        reference = state.load_state(args.reference)
        estimate, twin_used = retrieval.best_match(estimate, reference)
    payload = {
        "amplitudes": [float(v) for v in estimate.amplitudes],
        "phases_rad": [float(v) for v in estimate.phases],
        "iterations": result.iterations,
        "final_error": float(result.error_trace[-1]),
        "converged": result.converged,
        "seed": args.seed,
        "twin_used": twin_used,
    }
    _emit(payload, args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    img_a = pgm.read_pgm(args.image_a)
    img_b = pgm.read_pgm(args.image_b)
    params = metrics.SsimParams(window=args.window)
    visibility_a = visibility_b = None
    if args.envelope:
        envelope = pgm.read_pgm(args.envelope)
        visibility_a = metrics.fringe_visibility(img_a, args.halfwidth, envelope)
        visibility_b = metrics.fringe_visibility(img_b, args.halfwidth, envelope)
    p_hat = None
    if args.coh or args.inc:
        if not (args.coh and args.inc):
            raise ValueError("--coh and --inc must be given together")
        p_hat = metrics.estimate_p(img_a, pgm.read_pgm(args.coh), pgm.read_pgm(args.inc))
    payload = {
        "ssim": metrics.ssim(img_a, img_b, params),
        "ncc": metrics.ncc_overlap(img_a, img_b),
        "visibility_a": visibility_a,
        "visibility_b": visibility_b,
        "p_hat": p_hat,
    }
    _emit(payload, args.out)
    return EXIT_OK


def cmd_witness(args) -> int:
    certificate = witness.find_witness(args.p_min, args.q_max)
    _emit(certificate.to_dict(), args.out)
    return EXIT_OK if certificate.feasible else EXIT_INFEASIBLE


def cmd_report(args) -> int:
    from . import report

    amplitudes = phases = None
    if args.retrieval:
        with open(args.retrieval, "r", encoding="ascii") as fh:
            payload = json.load(fh)
        try:
            amplitudes = [float(v) for v in payload["amplitudes"]]
            phases = [float(v) for v in payload["phases_rad"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed retrieval report {args.retrieval!r}") from exc
    elif args.state:
        loaded = state.load_state(args.state)
        amplitudes, phases = list(loaded.amplitudes), list(loaded.phases)
    real_img = pgm.read_pgm(args.real) if args.real else None
    fourier_img = pgm.read_pgm(args.fourier) if args.fourier else None
    if amplitudes is None and real_img is None and fourier_img is None:
        raise ValueError("nothing to report: give --retrieval, --state, or images")
    reference = 1.0 / np.sqrt(len(amplitudes)) if amplitudes else None
    written = report.render_report(
        args.out_dir,
        amplitudes=amplitudes,
        phases=phases,
        real_img=real_img,
        fourier_img=fourier_img,
        n_modes=args.modes,
        spacing=args.spacing,
        waist=args.waist,
        reference_amplitude=reference,
    )
    _emit({"written": written}, None)
    return EXIT_OK


def _add_layout_flags(parser, with_grid: bool = True) -> None:
    if with_grid:
        parser.add_argument("--grid", type=int, default=optics.DEFAULT_GRID,
                            help="square image side in pixels (default 256)")
    parser.add_argument("--spacing", type=float, default=optics.DEFAULT_SPACING,
                        help="spot center spacing in pixels (default 16)")
    parser.add_argument("--waist", type=float, default=optics.DEFAULT_WAIST,
                        help="Gaussian spot waist in pixels (default 4)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wstatekit",
        description="Simulate, image, retrieve, and certify path-encoded single-photon states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="propagate a photon through a splitter cascade")
    p_sim.add_argument("--depth", type=int, default=3, help="tree depth, 0-6 (default 3)")
    p_sim.add_argument("--splitter", action="append", metavar="L:P=R[,PU[,PL]]",
                       help="override one node's ratio and phases; repeatable")
    p_sim.add_argument("--out", help="state JSON path (default: stdout)")
    p_sim.set_defaults(func=cmd_simulate)

    p_render = sub.add_parser("render", help="render the real/Fourier image pair of a state")
    p_render.add_argument("--state", required=True, help="state JSON path")
    p_render.add_argument("--p", type=float, default=1.0, help="coherent fraction (default 1)")
    p_render.add_argument("--q", type=float, default=0.0,
                          help="two-excitation weight; recorded but does not alter images (default 0)")
    _add_layout_flags(p_render)
    p_render.add_argument("--background", type=float, default=0.0,
                          help="constant detection background (default 0)")
    p_render.add_argument("--noise-scale", type=float, default=0.0,
                          help="Poisson-like fluctuation scale (default 0)")
    p_render.add_argument("--seed", type=int, default=0, help="detection noise seed (default 0)")
    p_render.add_argument("--out", required=True,
                          help="output prefix; writes <out>_real.pgm and <out>_fourier.pgm")
    p_render.set_defaults(func=cmd_render)

    p_ret = sub.add_parser("retrieve", help="retrieve mode amplitudes and phases from an image pair")
    p_ret.add_argument("real", help="real-space PGM")
    p_ret.add_argument("fourier", help="Fourier-space PGM")
    p_ret.add_argument("--modes", type=int, default=8, help="number of modes (default 8)")
    _add_layout_flags(p_ret, with_grid=False)
    p_ret.add_argument("--iters", type=int, default=5000, help="iteration cap (default 5000)")
    p_ret.add_argument("--tol", type=float, default=1e-4,
                       help="relative residual that counts as converged (default 1e-4)")
    p_ret.add_argument("--restarts", type=int, default=5, help="random restarts (default 5)")
    p_ret.add_argument("--seed", type=int, default=0, help="restart seed (default 0)")
    p_ret.add_argument("--ramp", action="store_true",
                       help="remove a fitted linear phase ramp across modes")
    p_ret.add_argument("--reference", help="state JSON; pick the twin orientation closer to it")
    p_ret.add_argument("--out", help="report JSON path (default: stdout)")
    p_ret.set_defaults(func=cmd_retrieve)

    p_cmp = sub.add_parser("compare", help="compare two images")
    p_cmp.add_argument("image_a", help="first PGM (the measured one for --coh/--inc fits)")
    p_cmp.add_argument("image_b", help="second PGM")
    p_cmp.add_argument("--window", type=int, default=11, help="SSIM window side (default 11)")
    p_cmp.add_argument("--envelope", help="fully incoherent PGM for fringe visibility")
    p_cmp.add_argument("--halfwidth", type=int, default=24,
                       help="visibility window half-width in pixels (default 24)")
    p_cmp.add_argument("--coh", help="fully coherent template PGM for the coherent-fraction fit")
    p_cmp.add_argument("--inc", help="fully incoherent template PGM for the coherent-fraction fit")
    p_cmp.add_argument("--out", help="report JSON path (default: stdout)")
    p_cmp.set_defaults(func=cmd_compare)

    p_wit = sub.add_parser("witness", help="search for witness coefficients over a (p, q) rectangle")
    p_wit.add_argument("--p-min", type=float, required=True,
                       help="lower edge of the coherent-fraction range")
    p_wit.add_argument("--q-max", type=float, required=True,
                       help="upper edge of the two-excitation weight range")
    p_wit.add_argument("--out", help="certificate JSON path (default: stdout)")
    p_wit.set_defaults(func=cmd_witness)

    p_rep = sub.add_parser("report", help="render figures and CSV tables from run outputs")
    p_rep.add_argument("--retrieval", help="retrieval report JSON")
    p_rep.add_argument("--state", help="state JSON (used when no retrieval report is given)")
    p_rep.add_argument("--real", help="real-space PGM")
    p_rep.add_argument("--fourier", help="Fourier-space PGM")
    p_rep.add_argument("--modes", type=int, default=8, help="modes for the profile overlay (default 8)")
    _add_layout_flags(p_rep, with_grid=False)
    p_rep.add_argument("--out-dir", required=True, help="directory for figures and tables")
    p_rep.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

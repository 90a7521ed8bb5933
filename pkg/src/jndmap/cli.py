"""Command-line pipeline around the library modules.

Every stage reads and writes the documented interchange files, so partial
re-runs are possible: ``simulate`` produces a corpus, ``run`` chains
screen -> classify -> decompose -> fit (-> evaluate when truth rows exist),
and the single-stage subcommands re-run any step from its inputs.  ``render``
turns curve samples into a standalone SVG.

Configuration comes from an optional JSON file (see :mod:`jndmap.config`);
command-line flags override file values, and the ``JNDMAP_SEED`` environment
variable overrides the configured seed (but not an explicit ``--seed``).
Failures exit with status 2 and a one-line JSON error record on stderr naming
the failure and any artifacts already written.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__, config as config_mod, corpus as corpus_mod
from . import evaluate as evaluate_mod
from . import mapping as mapping_mod
from . import predict as predict_mod
from . import ranges as ranges_mod
from . import render as render_mod
from . import screening as screening_mod
from . import significance as significance_mod
from . import simulate as simulate_mod
from .errors import JndmapError

log = logging.getLogger(__name__)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    written: list[str] = []
    try:
        args.func(args, written)
    except (JndmapError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        message = str(exc)
        if isinstance(exc, KeyError) and message.startswith("'") and message.endswith("'"):
            message = message[1:-1]
        record = {
            "error": type(exc).__name__,
            "message": message,
            "command": args.command,
            "artifacts_written": written,
        }
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 2
    return 0


# -- shared helpers ----------------------------------------------------------


def _resolve_config(args: argparse.Namespace) -> config_mod.RunConfig:
    """Config file -> JNDMAP_SEED env -> explicit flags, later wins."""
    cfg = config_mod.load_config(getattr(args, "config", None))
    env_seed = os.environ.get("JNDMAP_SEED")
    if env_seed is not None:
        cfg = dataclasses.replace(cfg, seed=int(env_seed))
    simple = {}
    for name in ("alpha", "test", "screening", "bin_width", "glm_mode", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            simple[name] = value
    if getattr(args, "families", None):
        simple["families"] = tuple(args.families.split(","))
    if getattr(args, "thresholds", None):
        simple["thresholds"] = tuple(float(t) for t in args.thresholds.split(","))
    if getattr(args, "no_chain", False):
        simple["chain_orders"] = False
    cfg = dataclasses.replace(cfg, **simple) if simple else cfg
    decomp = {}
    for name in ("strategy", "k", "width", "balance"):
        value = getattr(args, name, None)
        if value is not None:
            decomp[name] = value
    if getattr(args, "bounds", None):
        decomp["bounds"] = tuple(float(b) for b in args.bounds.split(","))
    if decomp:
        cfg = dataclasses.replace(
            cfg, decomposition=dataclasses.replace(cfg.decomposition, **decomp)
        )
    cfg.validate()
    return cfg


def _build_decomposition(
    cfg: config_mod.RunConfig, corpus: corpus_mod.Corpus
) -> ranges_mod.Decomposition:
    dc = cfg.decomposition
    if dc.strategy == "balanced":
        return ranges_mod.decompose_balanced(corpus, dc.k, dc.balance)
    if dc.strategy == "fixed_width":
        return ranges_mod.decompose_fixed(dc.width, corpus)
    return ranges_mod.decompose_explicit(list(dc.bounds))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(path: Path, text: str, written: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    written.append(path.name)


def _stage(label: str, started: float) -> None:
    print(f"[{label}] done in {time.perf_counter() - started:.2f}s")


# -- subcommands -------------------------------------------------------------


def cmd_run(args: argparse.Namespace, written: list[str]) -> None:
    cfg = _resolve_config(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    inputs = {Path(p).name: _sha256(Path(p)) for p in
              [args.vmaf, args.ratings] + ([args.truth] if args.truth else [])}

    t0 = time.perf_counter()
    corpus = corpus_mod.load_corpus(args.vmaf, args.ratings, args.truth)
    print(
        f"[load] {len(corpus.stimuli)} stimuli, {len(corpus.ratings)} ratings, "
        f"{len(corpus.truths)} truth rows"
    )

    report = screening_mod.screen(corpus, cfg.screening)
    screening_mod.write_report(report, out / "screening.json")
    written.append("screening.json")
    corpus = screening_mod.apply_screening(corpus, report)
    print(f"[screen] removed {len(report.removed_observers)} observer(s)")

    pairs = significance_mod.classify_pairs(corpus, cfg.alpha, cfg.test, jobs=args.jobs)
    _write(out / "pairs.csv", significance_mod.pairs_csv_text(pairs), written)
    print(f"[classify] {len(pairs)} pairs, {sum(p.sig for p in pairs)} significant")

    decomp = _build_decomposition(cfg, corpus)
    decomp = ranges_mod.assign_pairs(pairs, decomp, corpus)
    _write(
        out / "ranges.json",
        json.dumps(ranges_mod.decomposition_to_json_dict(decomp), indent=2, sort_keys=True) + "\n",
        written,
    )
    print(f"[decompose] {len(decomp.ranges)} ranges ({decomp.strategy})")

    codists, models = mapping_mod.fit_all(
        decomp, pairs, cfg.families, cfg.bin_width, cfg.glm_mode, jobs=args.jobs
    )
    _write(out / "codist.csv", mapping_mod.codist_csv_text(codists), written)
    _write(
        out / "mf_params.json",
        json.dumps(mapping_mod.models_to_json_dict(models), indent=2, sort_keys=True) + "\n",
        written,
    )
    _write(out / "curve_samples.csv", mapping_mod.curve_samples_csv_text(models), written)
    n_fits = sum(len(f) for f in models.values())
    print(f"[fit] {n_fits} fits over {len(codists)} ranges")

    if corpus.truths:
        grid = evaluate_mod.evaluate_grid(
            corpus,
            models,
            decomp,
            evaluate_mod.EvalGridSpec(
                thresholds=cfg.thresholds,
                families=cfg.families,
                chain_orders=cfg.chain_orders,
            ),
        )
        _write(
            out / "predictions.csv",
            predict_mod.predictions_csv_text(list(grid.predictions)),
            written,
        )
        _write(
            out / "metrics.json",
            json.dumps(evaluate_mod.metrics_json_dict(grid), indent=2, sort_keys=True) + "\n",
            written,
        )
        for direction in sorted({t.direction for t in corpus.truths}):
            print()
            print(evaluate_mod.format_grid_table(grid, direction))
        key, best = grid.best_cell()
        print(
            f"[evaluate] best cell: direction={key[0]} family={key[1]} thr={key[2]:g} "
            f"mae={best.mae:.4f} rmse={best.rmse:.4f} (n={best.n}, clamped={best.clamped})"
        )
    else:
        print("[evaluate] skipped: no truth rows")

    config_text = config_mod.config_json_text(cfg)
    manifest = {
        "tool": "jndmap",
        "version": __version__,
        "config": cfg.to_json_dict(),
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "inputs": inputs,
        "artifacts": sorted(set(written)),
        "seed": cfg.seed,
    }
    _write(out / "run_manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n", written)
    _stage("run", t0)


def cmd_simulate(args: argparse.Namespace, written: list[str]) -> None:
    spec = (
        simulate_mod.read_sim_spec_json(args.spec)
        if args.spec
        else simulate_mod.SimSpec()
    )
    env_seed = os.environ.get("JNDMAP_SEED")
    if env_seed is not None:
        spec = dataclasses.replace(spec, seed=int(env_seed))
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    corpus, info = simulate_mod.simulate_corpus(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "vmaf_scores.csv", corpus_mod.vmaf_csv_text(corpus), written)
    _write(out / "dcr_ratings.csv", corpus_mod.ratings_csv_text(corpus), written)
    _write(out / "jnd_truth.csv", corpus_mod.truth_csv_text(corpus), written)
    _write(
        out / "sim_truth.json",
        json.dumps(simulate_mod.truth_info_json_dict(info), indent=2, sort_keys=True) + "\n",
        written,
    )
    print(
        f"[simulate] seed={spec.seed}: {len(corpus.stimuli)} stimuli, "
        f"{len(corpus.ratings)} ratings, {len(corpus.truths)} truths -> {out}"
    )


def cmd_screen(args: argparse.Namespace, written: list[str]) -> None:
    cfg = _resolve_config(args)
    corpus = corpus_mod.load_corpus(args.vmaf, args.ratings)
    report = screening_mod.screen(corpus, cfg.screening)
    screening_mod.write_report(report, Path(args.out))
    written.append(Path(args.out).name)
    print(f"[screen] removed: {sorted(report.removed_observers) or 'nobody'}")


def cmd_classify(args: argparse.Namespace, written: list[str]) -> None:
    cfg = _resolve_config(args)
    corpus = corpus_mod.load_corpus(args.vmaf, args.ratings)
    if args.screening_report:
        report = screening_mod.read_report(args.screening_report)
        corpus = screening_mod.apply_screening(corpus, report)
    pairs = significance_mod.classify_pairs(corpus, cfg.alpha, cfg.test, jobs=args.jobs)
    _write(Path(args.out), significance_mod.pairs_csv_text(pairs), written)
    print(f"[classify] {len(pairs)} pairs, {sum(p.sig for p in pairs)} significant")


def cmd_decompose(args: argparse.Namespace, written: list[str]) -> None:
    cfg = _resolve_config(args)
    corpus = corpus_mod.load_corpus(args.vmaf, None)
    decomp = _build_decomposition(cfg, corpus)
    pairs = significance_mod.read_pairs_csv(args.pairs)
    decomp = ranges_mod.assign_pairs(pairs, decomp, corpus)
    _write(
        Path(args.out),
        json.dumps(ranges_mod.decomposition_to_json_dict(decomp), indent=2, sort_keys=True) + "\n",
        written,
    )
    print(f"[decompose] {decomp.strategy}: {', '.join(decomp.range_ids())}")


def cmd_fit(args: argparse.Namespace, written: list[str]) -> None:
    cfg = _resolve_config(args)
    pairs = significance_mod.read_pairs_csv(args.pairs)
    decomp = ranges_mod.read_ranges_json(args.ranges)
    codists, models = mapping_mod.fit_all(
        decomp, pairs, cfg.families, cfg.bin_width, cfg.glm_mode, jobs=args.jobs
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "codist.csv", mapping_mod.codist_csv_text(codists), written)
    _write(
        out / "mf_params.json",
        json.dumps(mapping_mod.models_to_json_dict(models), indent=2, sort_keys=True) + "\n",
        written,
    )
    _write(out / "curve_samples.csv", mapping_mod.curve_samples_csv_text(models), written)
    print(f"[fit] {sum(len(f) for f in models.values())} fits over {len(codists)} ranges")


def cmd_predict(args: argparse.Namespace, written: list[str]) -> None:
    models = mapping_mod.read_mf_params_json(args.models)
    decomp = ranges_mod.read_ranges_json(args.ranges)
    if args.vmaf_table and args.content and args.recipe:
        corpus = corpus_mod.load_corpus(args.vmaf_table, None)
        anchor = corpus.stimulus(args.content, args.recipe)
    elif args.anchor_vmaf is not None:
        anchor = corpus_mod.Stimulus(
            content_id=args.content or "anchor",
            recipe=corpus_mod.Recipe(args.recipe or "anchor", "other", 0),
            vmaf=args.anchor_vmaf,
        )
    else:
        raise ValueError(
            "predict needs --anchor-vmaf, or --vmaf-table with --content and --recipe"
        )
    pred = predict_mod.predict_jnd(
        models, decomp, anchor, args.direction, args.threshold, args.family
    )
    print(
        json.dumps(
            {
                "range_id": pred.range_id,
                "family": pred.family,
                "threshold": pred.threshold,
                "delta_obj_jnd": pred.delta_obj_jnd,
                "target_vmaf": pred.target_vmaf,
                "clamped": pred.clamped,
            },
            sort_keys=True,
        )
    )
    if args.out:
        _write(Path(args.out), predict_mod.predictions_csv_text([pred]), written)


def cmd_evaluate(args: argparse.Namespace, written: list[str]) -> None:
    cfg = _resolve_config(args)
    corpus = corpus_mod.load_corpus(args.vmaf, args.ratings, args.truth)
    models = mapping_mod.read_mf_params_json(args.models)
    decomp = ranges_mod.read_ranges_json(args.ranges)
    orders = tuple(int(o) for o in args.orders.split(",")) if args.orders else None
    grid = evaluate_mod.evaluate_grid(
        corpus,
        models,
        decomp,
        evaluate_mod.EvalGridSpec(
            thresholds=cfg.thresholds,
            families=cfg.families,
            chain_orders=cfg.chain_orders,
            orders=orders,
        ),
    )
    _write(
        Path(args.out),
        json.dumps(evaluate_mod.metrics_json_dict(grid), indent=2, sort_keys=True) + "\n",
        written,
    )
    if args.predictions:
        _write(
            Path(args.predictions),
            predict_mod.predictions_csv_text(list(grid.predictions)),
            written,
        )
    for direction in sorted({t.direction for t in corpus.truths}):
        print(evaluate_mod.format_grid_table(grid, direction))


def cmd_render(args: argparse.Namespace, written: list[str]) -> None:
    curves = mapping_mod.read_curve_samples_csv(args.curves)
    codists = mapping_mod.read_codist_csv(args.codist) if args.codist else None
    svg = render_mod.render_svg(curves, codists)
    render_mod.write_svg(svg, Path(args.out))
    written.append(Path(args.out).name)
    print(f"[render] wrote {args.out}")


# -- parser ------------------------------------------------------------------


def _add_config_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file (flags override its values)")
    sub.add_argument("--alpha", type=float, help="significance level")
    sub.add_argument("--test", choices=significance_mod.TESTS, help="two-sample test")
    sub.add_argument("--screening", choices=screening_mod.METHODS, help="observer screening method")
    sub.add_argument("--bin-width", dest="bin_width", type=float, help="|dVMAF| histogram bin width")
    sub.add_argument("--families", help="comma-separated curve families")
    sub.add_argument("--thresholds", help="comma-separated decision thresholds")
    sub.add_argument("--glm-mode", dest="glm_mode", choices=("pairwise", "points"))
    sub.add_argument("--no-chain", dest="no_chain", action="store_true",
                     help="score higher-order truths without chaining")
    sub.add_argument("--seed", type=int, help="seed override (beats JNDMAP_SEED)")
    sub.add_argument("--strategy", choices=ranges_mod.STRATEGIES, help="decomposition strategy")
    sub.add_argument("--k", type=int, help="balanced range count")
    sub.add_argument("--width", type=float, help="fixed range width")
    sub.add_argument("--bounds", help="comma-separated explicit bounds")
    sub.add_argument("--balance", choices=("stimuli", "pairs"), help="balanced target")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jndmap",
        description="Map |dVMAF| between paired encodings to JND probability.",
    )
    parser.add_argument("--version", action="version", version=f"jndmap {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="full pipeline from corpus tables")
    run.add_argument("vmaf", help="vmaf_scores.csv")
    run.add_argument("ratings", help="dcr_ratings.csv")
    run.add_argument("--truth", help="jnd_truth.csv (enables evaluation)")
    run.add_argument("--out-dir", required=True)
    run.add_argument("--jobs", type=int, default=1)
    _add_config_flags(run)
    run.set_defaults(func=cmd_run)

    sim = subs.add_parser("simulate", help="generate a synthetic corpus")
    sim.add_argument("--spec", help="simulator spec JSON (defaults built in)")
    sim.add_argument("--out-dir", required=True)
    sim.add_argument("--seed", type=int, help="seed override (beats JNDMAP_SEED)")
    sim.set_defaults(func=cmd_simulate)

    screen = subs.add_parser("screen", help="observer screening report")
    screen.add_argument("vmaf")
    screen.add_argument("ratings")
    screen.add_argument("--out", required=True)
    _add_config_flags(screen)
    screen.set_defaults(func=cmd_screen)

    classify = subs.add_parser("classify", help="pair significance labels")
    classify.add_argument("vmaf")
    classify.add_argument("ratings")
    classify.add_argument("--screening-report", dest="screening_report",
                          help="screening.json to apply before pairing")
    classify.add_argument("--out", required=True)
    classify.add_argument("--jobs", type=int, default=1)
    _add_config_flags(classify)
    classify.set_defaults(func=cmd_classify)

    decompose = subs.add_parser("decompose", help="sub-quality ranges + assignment")
    decompose.add_argument("vmaf")
    decompose.add_argument("--pairs", required=True)
    decompose.add_argument("--out", required=True)
    _add_config_flags(decompose)
    decompose.set_defaults(func=cmd_decompose)

    fit = subs.add_parser("fit", help="co-distributions and curve fits")
    fit.add_argument("--pairs", required=True)
    fit.add_argument("--ranges", required=True)
    fit.add_argument("--out-dir", required=True)
    fit.add_argument("--jobs", type=int, default=1)
    _add_config_flags(fit)
    fit.set_defaults(func=cmd_fit)

    predict = subs.add_parser("predict", help="one JND prediction from fitted curves")
    predict.add_argument("--models", required=True, help="mf_params.json")
    predict.add_argument("--ranges", required=True, help="ranges.json")
    predict.add_argument("--anchor-vmaf", dest="anchor_vmaf", type=float)
    predict.add_argument("--vmaf-table", dest="vmaf_table")
    predict.add_argument("--content")
    predict.add_argument("--recipe")
    predict.add_argument("--direction", choices=("inc", "dec"), required=True)
    predict.add_argument("--threshold", type=float, default=0.95)
    predict.add_argument("--family", default="glm", choices=mapping_mod.FAMILIES)
    predict.add_argument("--out", help="optional predictions.csv")
    predict.set_defaults(func=cmd_predict)

    evaluate = subs.add_parser("evaluate", help="grid metrics against truth rows")
    evaluate.add_argument("--vmaf", required=True)
    evaluate.add_argument("--ratings")
    evaluate.add_argument("--truth", required=True)
    evaluate.add_argument("--models", required=True)
    evaluate.add_argument("--ranges", required=True)
    evaluate.add_argument("--out", required=True, help="metrics.json")
    evaluate.add_argument("--predictions", help="optional predictions.csv")
    evaluate.add_argument("--orders", help="comma-separated truth orders to keep")
    _add_config_flags(evaluate)
    evaluate.set_defaults(func=cmd_evaluate)

    render = subs.add_parser("render", help="SVG from curve samples")
    render.add_argument("--curves", required=True, help="curve_samples.csv")
    render.add_argument("--codist", help="codist.csv for P_SD scatter")
    render.add_argument("--out", required=True, help="curves.svg")
    render.set_defaults(func=cmd_render)

    return parser


if __name__ == "__main__":
    sys.exit(main())

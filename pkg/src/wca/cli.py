"""Command-line surface.

Subcommands: classify, eval, cache, bench, theorem, gen-fixtures. Results
go to --out (stdout by default); logs go to stderr only. Exit codes: 0 on
success, 1 for domain or configuration errors, 2 for I/O and file format
errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .backend import DemoEncoder
from .classify import (
    RunConfig,
    bench_csv,
    bench_timing,
    classify,
    evaluate,
    load_manifest,
    precompute_cache,
)
from .descriptions import DEFAULT_TEMPLATE, load_descriptions
from .errors import ConfigError, FormatError, WcaError
from .fixtures import gen_fixtures
from .prompts import ImageBuffer, PromptConfig, STYLES, load_image
from .theorem import counterexample_probe
from .wem import read_embedding_files

log = logging.getLogger("wca")

AGG_CHOICES = ["wca", "avg", "max", "llm", "clip", "clip-e", "mixed"]


class _Parser(argparse.ArgumentParser):
    """Usage problems (unknown flags, bad values) are config errors: exit 1."""

    def error(self, message):
        raise ConfigError(message)


def _add_backend_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--embeddings",
        action="append",
        metavar="WEM1",
        help="precomputed embedding store; repeat to merge several files",
    )
    group.add_argument(
        "--model",
        metavar="SPEC",
        help="pixel backend spec; 'demo' or 'demo:<grid>' (deterministic toy encoder)",
    )


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--agg", choices=AGG_CHOICES, default="wca", help="score aggregation")
    p.add_argument("--lambda", dest="mixed_lambda", type=float, default=None,
                   help="blend weight for --agg mixed")
    p.add_argument("--alpha", type=float, default=0.5, help="crop scale lower bound")
    p.add_argument("--beta", type=float, default=0.9, help="crop scale upper bound")
    p.add_argument("--crops", type=int, default=60, help="number of crops per image")
    p.add_argument("--max-descriptions", type=int, default=50,
                   help="keep at most this many descriptions per class")
    p.add_argument("--template", default=DEFAULT_TEMPLATE, help="label prompt template")
    p.add_argument("--prompt-style", choices=list(STYLES), default="crop")
    p.add_argument("--seed", type=int, default=None,
                   help="global seed (falls back to $WCA_SEED, then 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wca", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="classify one image")
    p.add_argument("image", help="image id (store backend) or image file (pixel backend)")
    p.add_argument("--descriptions", required=True)
    _add_backend_flags(p)
    _add_run_flags(p)
    p.add_argument("--explain", action="store_true",
                   help="emit per-description contribution rows")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="evaluate a manifest and report top-1 accuracy")
    p.add_argument("--manifest", required=True)
    p.add_argument("--descriptions", required=True)
    _add_backend_flags(p)
    _add_run_flags(p)
    p.add_argument("--cache", default=None, help="augmented-embedding cache to consume")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="parallel workers over images")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cache", help="precompute augmented embeddings into a WEM1 file")
    p.add_argument("--manifest", required=True)
    p.add_argument("--descriptions", required=True)
    _add_backend_flags(p)
    _add_run_flags(p)
    p.add_argument("--out", required=True, help="cache file to write")
    p.set_defaults(func=cmd_cache)

    p = sub.add_parser("bench", help="timing table over the crop-count grid")
    p.add_argument("images", nargs="*", help="sample image files (synthetic if omitted)")
    _add_run_flags(p)
    p.add_argument("--model", default="demo", help="pixel backend spec (default: demo)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("theorem", help="probe the part-alignment theorem")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--cos2-max", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_theorem)

    p = sub.add_parser("gen-fixtures", help="write deterministic test fixtures")
    p.add_argument("--seed", type=int, default=7,
                   help="fixture recipe seed (default 7, the documented bundle)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen_fixtures)

    return parser


def _seed_of(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get("WCA_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"WCA_SEED must be an integer, got {raw!r}") from None


def _check_sidecars(paths, cfg: RunConfig) -> None:
    """Exporters record the crop parameters next to their output; a run with
    different parameters would silently pair the wrong crops, so mismatches
    are hard errors."""
    checks = {
        "alpha": cfg.prompt.alpha,
        "beta": cfg.prompt.beta,
        "N": cfg.prompt.num_crops,
        "seed": cfg.prompt.seed,
    }
    for p in paths:
        sidecar = Path(str(p) + ".meta.json")
        if not sidecar.exists():
            continue
        try:
            meta = json.loads(sidecar.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"unreadable sidecar {sidecar}: {exc}") from exc
        for key, expected in checks.items():
            if key in meta and meta[key] != expected:
                raise ConfigError(
                    f"{sidecar} was exported with {key}={meta[key]}, "
                    f"but this run uses {key}={expected}"
                )


def _build_backend(args):
    if getattr(args, "embeddings", None):
        return read_embedding_files(args.embeddings)
    spec = args.model or "demo"
    if spec == "demo":
        return DemoEncoder()
    if spec.startswith("demo:"):
        try:
            return DemoEncoder(grid=int(spec.split(":", 1)[1]))
        except ValueError:
            raise ConfigError(f"bad --model spec {spec!r}; expected demo:<grid>") from None
    raise ConfigError(
        f"unknown --model spec {spec!r}; this build ships the 'demo' encoder, "
        "real model runtimes plug in through the EncoderBackend API"
    )


def _build_config(args, seed: int, cache=None, jobs=1, explain=False) -> RunConfig:
    prompt = PromptConfig(
        alpha=args.alpha,
        beta=args.beta,
        num_crops=args.crops,
        seed=seed,
        style=args.prompt_style,
    )
    truncate = args.max_descriptions
    if truncate is not None and truncate <= 0:
        raise ConfigError("--max-descriptions must be positive")
    return RunConfig(
        aggregation=args.agg,
        prompt=prompt,
        mixed_lambda=args.mixed_lambda,
        truncate_m=truncate,
        cache_path=cache,
        jobs=jobs,
        explain=explain,
        template=args.template,
    )


def _emit(args, text: str) -> None:
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")


def _emit_json(args, payload) -> None:
    _emit(args, json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


def cmd_classify(args) -> int:
    seed = _seed_of(args)
    cfg = _build_config(args, seed, explain=args.explain)
    backend = _build_backend(args)
    if args.embeddings:
        _check_sidecars(args.embeddings, cfg)
    catalog = load_descriptions(args.descriptions, truncate_m=cfg.truncate_m,
                                template=args.template)
    image = args.image
    from .wem import PrecomputedStore

    if not isinstance(backend, PrecomputedStore):
        image = load_image(args.image)
    report = classify(image, catalog, backend, cfg, image_id=args.image)
    log.info(
        "classified %s as %s (crop %.4fs encode %.4fs score %.4fs)",
        args.image, report.predicted_label,
        report.crop_preprocess_seconds, report.encode_seconds, report.score_seconds,
    )
    _emit_json(args, report.body_dict())
    return 0


def cmd_eval(args) -> int:
    seed = _seed_of(args)
    cfg = _build_config(args, seed, cache=args.cache, jobs=args.jobs)
    backend = _build_backend(args)
    if args.embeddings:
        _check_sidecars(args.embeddings, cfg)
    catalog = load_descriptions(args.descriptions, truncate_m=cfg.truncate_m,
                                template=args.template)
    manifest = load_manifest(args.manifest, root=str(Path(args.manifest).parent))
    report = evaluate(manifest, catalog, backend, cfg)
    log.info("top-1 accuracy %.4f over %d images; timing %s",
             report.top1, report.n, report.timing_dict())
    _emit_json(args, report.body_dict())
    return 0


def cmd_cache(args) -> int:
    seed = _seed_of(args)
    cfg = _build_config(args, seed)
    if cfg.aggregation != "wca":
        raise ConfigError("caches hold augmented embeddings for --agg wca")
    backend = _build_backend(args)
    if args.embeddings:
        _check_sidecars(args.embeddings, cfg)
    catalog = load_descriptions(args.descriptions, truncate_m=cfg.truncate_m,
                                template=args.template)
    manifest = load_manifest(args.manifest, root=str(Path(args.manifest).parent))
    summary = precompute_cache(manifest, catalog, backend, cfg, args.out)
    log.info("wrote cache %s", summary)
    sys.stdout.write(json.dumps(summary) + "\n")
    return 0


def _synthetic_images(seed: int, count: int = 4, size: int = 224) -> list[ImageBuffer]:
    rng = np.random.default_rng(seed)
    return [
        ImageBuffer(rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8))
        for _ in range(count)
    ]


def cmd_bench(args) -> int:
    seed = _seed_of(args)
    cfg = _build_config(args, seed)
    backend = _build_backend(args)
    if args.images:
        images = [load_image(p) for p in args.images]
    else:
        log.info("no sample images given; benching on 4 synthetic 224x224 images")
        images = _synthetic_images(seed)
    rows = bench_timing(images, cfg, backend)
    inner = [r for r in rows if r["N"] > 0]
    monotone = all(a["crop_preprocess_s"] <= b["crop_preprocess_s"]
                   for a, b in zip(inner, inner[1:]))
    log.info("crop+preprocess monotone in N: %s (reported, not asserted)", monotone)
    _emit(args, bench_csv(rows))
    return 0


def cmd_theorem(args) -> int:
    seed = _seed_of(args)
    summary = counterexample_probe(seed, args.trials, d_in=args.dim, d_out=args.dim,
                                   cos2_max=args.cos2_max)
    log.info("probe max_cos=%s linearity_max_err=%.3e",
             summary.max_cos, summary.linearity_max_err)
    _emit_json(args, summary.to_json_dict())
    return 0


def cmd_gen_fixtures(args) -> int:
    summary = gen_fixtures(args.out, seed=args.seed)
    log.info("fixtures written to %s", summary["out_dir"])
    sys.stdout.write(json.dumps(summary) + "\n")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except FormatError as exc:
        log.error("%s", exc)
        return 2
    except OSError as exc:
        log.error("%s", exc)
        return 2
    except WcaError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

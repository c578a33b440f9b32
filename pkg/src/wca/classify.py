"""End-to-end classification, batch evaluation, caching, and the timing bench.

The classification loop mirrors the two-stage structure of the method:
patch weights are computed once per image (outside the class loop) and
description weights once per class (inside it, but shared across images).
Batch evaluation therefore precomputes one augmented text embedding per
class and one augmented image embedding per image and scores through inner
products; the explicit cross-alignment matrix is kept as the slow path for
explanations and for the equivalence tests.
"""

from __future__ import annotations

import json
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .descriptions import DEFAULT_TEMPLATE, LabelCatalog
from .errors import (
    CacheInvalidError,
    ConfigError,
    DomainError,
    ExplanationUnavailableError,
    IngestionError,
    MissingEmbeddingError,
)
from .prompts import ImageBuffer, PromptConfig, crop_specs_for_image, load_image, prompt_image
from .scoring import (
    augmented_image_embedding,
    augmented_text_embedding,
    avg_score,
    clip_score,
    cross_matrix,
    desc_weights,
    llm_score,
    max_score,
    mixed_score,
    patch_weights,
    wca_score,
)
from .vecmath import cosine_rows, normalize
from .wem import PrecomputedStore, read_embedding_file, write_embedding_file

AGGREGATIONS = ("wca", "avg", "max", "llm", "clip", "clip-e", "mixed")

DEFAULT_ENSEMBLE_TEMPLATES = [
    "a photo of a {}",
    "a photo of the {}",
    "a close-up photo of a {}",
    "a cropped photo of a {}",
]

CACHE_IMAGE_PREFIX = "img::"
CACHE_CLASS_PREFIX = "cls::"


@dataclass(frozen=True)
class RunConfig:
    aggregation: str = "wca"
    prompt: PromptConfig = field(default_factory=PromptConfig)
    mixed_lambda: float | None = None
    truncate_m: int | None = None
    cache_path: str | None = None
    jobs: int = 1
    explain: bool = False
    template: str = DEFAULT_TEMPLATE
    ensemble_templates: tuple[str, ...] = tuple(DEFAULT_ENSEMBLE_TEMPLATES)

    def __post_init__(self):
        if self.aggregation not in AGGREGATIONS:
            raise ConfigError(
                f"unknown aggregation {self.aggregation!r}, expected one of {AGGREGATIONS}"
            )
        if self.mixed_lambda is not None and self.aggregation != "mixed":
            raise ConfigError("--lambda is only valid with --agg mixed")
        if self.aggregation == "mixed":
            if self.mixed_lambda is None:
                raise ConfigError("--agg mixed requires --lambda")
            if not (0.0 <= self.mixed_lambda <= 1.0):
                raise ConfigError(f"lambda must lie in [0, 1], got {self.mixed_lambda}")
        if self.cache_path is not None and self.aggregation != "wca":
            raise ConfigError("a cache file only reproduces the wca fast path; use --agg wca")
        if self.cache_path is not None and self.explain:
            raise ConfigError(
                "explanations need the slow scoring path; drop --cache to use --explain"
            )
        if self.explain and self.aggregation != "wca":
            raise ConfigError("--explain is defined for --agg wca")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")

    @property
    def seed(self) -> int:
        return self.prompt.seed

    def public_dict(self) -> dict:
        return {
            "aggregation": self.aggregation,
            "alpha": self.prompt.alpha,
            "beta": self.prompt.beta,
            "crops": self.prompt.num_crops,
            "style": self.prompt.style,
            "seed": self.prompt.seed,
            "lambda": self.mixed_lambda,
            "max_descriptions": self.truncate_m,
            "template": self.template,
        }


@dataclass
class ExplanationRow:
    description: str
    weight: float
    w_weighted_sim: float
    contribution: float


@dataclass
class ClassificationReport:
    image_id: str
    predicted_label: str
    per_class_scores: dict[str, float]
    explanation: dict[str, list[ExplanationRow]] | None = None
    crop_preprocess_seconds: float = 0.0
    encode_seconds: float = 0.0
    score_seconds: float = 0.0

    def runner_up(self) -> str | None:
        ordered = sorted(
            self.per_class_scores, key=lambda lbl: -self.per_class_scores[lbl]
        )
        return ordered[1] if len(ordered) > 1 else None

    def body_dict(self) -> dict:
        body = {
            "image_id": self.image_id,
            "predicted_label": self.predicted_label,
            "per_class_scores": self.per_class_scores,
        }
        if self.explanation is not None:
            body["explanation"] = {
                label: [vars(r) for r in rows] for label, rows in self.explanation.items()
            }
        return body


def explain(report: ClassificationReport) -> dict[str, list[ExplanationRow]]:
    """Explanation rows of a slow-path report; fast-path runs carry none."""
    if report.explanation is None:
        raise ExplanationUnavailableError(
            "this report was produced without the explicit cross-alignment matrix; "
            "rerun without the cache (slow path) and with explanations enabled"
        )
    return report.explanation


@dataclass
class DatasetManifest:
    records: list[tuple[str, str]]
    root: str | None = None

    def __post_init__(self):
        if not self.records:
            raise DomainError("manifest holds no records")
        ids = [r[0] for r in self.records]
        if len(set(ids)) != len(ids):
            dupes = sorted({x for x in ids if ids.count(x) > 1})
            raise IngestionError(f"duplicate image ids in manifest: {dupes[:5]}")

    def require_labels_in(self, catalog: LabelCatalog) -> None:
        known = set(catalog.labels)
        for image_id, label in self.records:
            if label not in known:
                raise IngestionError(
                    f"manifest label {label!r} (image {image_id!r}) is not in the catalog"
                )


def load_manifest(path, root: str | None = None) -> DatasetManifest:
    records = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"cannot read manifest {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IngestionError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
        if not isinstance(obj, dict) or "id" not in obj or "label" not in obj:
            raise IngestionError(f'{path}:{lineno}: expected {{"id": ..., "label": ...}}')
        records.append((str(obj["id"]), str(obj["label"])))
    return DatasetManifest(records=records, root=root)


# ---------------------------------------------------------------------------
# Embedding resolution.
# ---------------------------------------------------------------------------

class _BackendGuard:
    """Serializes calls to backends that are not safe for concurrent use."""

    def __init__(self, backend):
        self.backend = backend
        self.dim = backend.dim
        self._lock = None if getattr(backend, "thread_safe", False) else threading.Lock()

    def _call(self, fn, arg):
        if self._lock is None:
            return fn(arg)
        with self._lock:
            return fn(arg)

    def encode_image(self, arg):
        return self._call(self.backend.encode_image, arg)

    def encode_text(self, arg):
        return self._call(self.backend.encode_text, arg)

    @property
    def is_store(self) -> bool:
        return isinstance(self.backend, PrecomputedStore)

    def has_id(self, entry_id: str) -> bool:
        return self.is_store and entry_id in self.backend


@dataclass
class ClassEmbeddings:
    label: str
    descriptions: tuple[str, ...]
    desc_embs: np.ndarray
    prompt_emb: np.ndarray | None
    ensemble_emb: np.ndarray | None
    weights: np.ndarray
    augmented: np.ndarray


def _needs_anchor(aggregation: str) -> bool:
    return aggregation in ("wca", "mixed", "clip")


def prepare_classes(
    catalog: LabelCatalog, backend, cfg: RunConfig
) -> list[ClassEmbeddings]:
    """Embed descriptions and label prompts once per class.

    Description weights use a uniform vector for the aggregations that do
    not weight descriptions, so downstream code has one shape to handle.
    """
    guard = backend if isinstance(backend, _BackendGuard) else _BackendGuard(backend)
    out = []
    for cls in catalog.classes:
        label = cls.label
        if guard.is_store:
            descs = [guard.encode_text(f"{label}::{j}") for j in range(len(cls.descriptions))]
        else:
            descs = [guard.encode_text(text) for text in cls.descriptions]
        desc_embs = np.stack(descs)

        prompt_emb = None
        if _needs_anchor(cfg.aggregation) or cfg.explain:
            prompt_emb = guard.encode_text(
                f"cls::{label}" if guard.is_store else catalog.prompt_for(label)
            )

        ensemble_emb = None
        if cfg.aggregation == "clip-e":
            ensemble_emb = _ensemble_embedding(guard, catalog, label, cfg)

        if prompt_emb is not None:
            v = desc_weights(prompt_emb, desc_embs)
        else:
            v = np.full(len(descs), 1.0 / len(descs))
        out.append(
            ClassEmbeddings(
                label=label,
                descriptions=cls.descriptions,
                desc_embs=desc_embs,
                prompt_emb=prompt_emb,
                ensemble_emb=ensemble_emb,
                weights=v,
                augmented=augmented_text_embedding(desc_embs, v),
            )
        )
    return out


def _ensemble_embedding(guard: _BackendGuard, catalog: LabelCatalog, label: str, cfg: RunConfig):
    """Mean of unit template-prompt embeddings. Stores enumerate
    ``cls::<label>::t<k>`` records; live backends encode the template list."""
    members = []
    if guard.is_store:
        k = 0
        while guard.has_id(f"cls::{label}::t{k}"):
            members.append(guard.encode_text(f"cls::{label}::t{k}"))
            k += 1
        if not members:
            raise MissingEmbeddingError(f"cls::{label}::t0")
    else:
        from .descriptions import label_prompt

        for template in cfg.ensemble_templates:
            members.append(guard.encode_text(label_prompt(label, template)))
    unit = np.stack([normalize(m) for m in members])
    return unit.mean(axis=0)


@dataclass
class _ImageEmbeddings:
    whole: np.ndarray | None
    patches: np.ndarray | None
    crop_seconds: float
    encode_seconds: float


def _needs_patches(aggregation: str) -> bool:
    return aggregation in ("wca", "avg", "max", "mixed")


def _needs_whole(aggregation: str) -> bool:
    return aggregation in ("wca", "llm", "clip", "clip-e", "mixed")


def _resolve_image(image, image_id, guard: _BackendGuard, cfg: RunConfig) -> _ImageEmbeddings:
    need_patches = _needs_patches(cfg.aggregation)
    need_whole = _needs_whole(cfg.aggregation) or (need_patches and cfg.aggregation == "wca")

    if guard.is_store:
        if not isinstance(image, str):
            raise ConfigError("a precomputed store backend is addressed by image id strings")
        if cfg.prompt.style != "crop":
            raise ConfigError(
                "precomputed stores hold crop embeddings; "
                f"prompt style {cfg.prompt.style!r} needs a pixel backend"
            )
        t0 = time.perf_counter()
        whole = guard.encode_image(image) if need_whole else None
        patches = None
        if need_patches:
            patches = np.stack(
                [guard.encode_image(f"{image}::{i}") for i in range(cfg.prompt.num_crops)]
            )
        return _ImageEmbeddings(whole, patches, 0.0, time.perf_counter() - t0)

    buf = image if isinstance(image, ImageBuffer) else load_image(image)
    t0 = time.perf_counter()
    prompted = []
    if need_patches:
        specs = crop_specs_for_image(cfg.prompt, buf.width, buf.height, image_id)
        prompted = [prompt_image(buf, cfg.prompt, spec) for spec in specs]
    t1 = time.perf_counter()
    whole = guard.encode_image(buf) if need_whole else None
    patches = np.stack([guard.encode_image(p) for p in prompted]) if prompted else None
    t2 = time.perf_counter()
    return _ImageEmbeddings(whole, patches, t1 - t0, t2 - t1)


# ---------------------------------------------------------------------------
# Scoring.
# ---------------------------------------------------------------------------

def _score_class(
    img: _ImageEmbeddings,
    w: np.ndarray | None,
    cls: ClassEmbeddings,
    cfg: RunConfig,
) -> tuple[float, np.ndarray | None]:
    """Score one class; returns (score, sims matrix or None)."""
    agg = cfg.aggregation
    if agg == "clip":
        return clip_score(img.whole, cls.prompt_emb), None
    if agg == "clip-e":
        return clip_score(img.whole, cls.ensemble_emb), None
    if agg == "llm":
        return llm_score(img.whole, cls.desc_embs), None

    sims = cross_matrix(img.patches, cls.desc_embs)
    if agg == "avg":
        return avg_score(sims), sims
    if agg == "max":
        return max_score(sims), sims
    if agg == "wca":
        return wca_score(sims, w, cls.weights), sims
    if agg == "mixed":
        whole_side = float(cosine_rows(cls.desc_embs, img.whole) @ cls.weights)
        patch_side = wca_score(sims, w, cls.weights)
        return mixed_score(cfg.mixed_lambda, whole_side, patch_side), sims
    raise ConfigError(f"unknown aggregation {agg!r}")


def _argmax_label(scores: dict[str, float]) -> str:
    best_label = None
    best = -math.inf
    for label, value in scores.items():
        if value > best:
            best = value
            best_label = label
    return best_label


def classify(
    image,
    catalog: LabelCatalog,
    backend,
    cfg: RunConfig,
    image_id: str | None = None,
    classes: list[ClassEmbeddings] | None = None,
) -> ClassificationReport:
    """Score an image against every class and pick the argmax.

    ``image`` is an id string for store backends, or a path/ImageBuffer
    for pixel backends. ``classes`` may carry pre-embedded class data to
    amortize the class loop across a batch.
    """
    if len(catalog) == 0:
        raise DomainError("catalog holds no classes")
    guard = backend if isinstance(backend, _BackendGuard) else _BackendGuard(backend)
    if image_id is None:
        image_id = image if isinstance(image, str) else "image"

    if classes is None:
        classes = prepare_classes(catalog, guard, cfg)

    img = _resolve_image(image, image_id, guard, cfg)

    t0 = time.perf_counter()
    w = None
    if img.patches is not None and cfg.aggregation in ("wca", "mixed"):
        w = patch_weights(img.whole, img.patches)

    scores: dict[str, float] = {}
    sims_by_label: dict[str, np.ndarray] = {}
    for cls in classes:
        value, sims = _score_class(img, w, cls, cfg)
        scores[cls.label] = value
        if sims is not None:
            sims_by_label[cls.label] = sims
    predicted = _argmax_label(scores)
    score_seconds = time.perf_counter() - t0

    explanation = None
    if cfg.explain:
        explanation = _build_explanation(
            predicted, scores, classes, sims_by_label, w, img, cfg
        )

    return ClassificationReport(
        image_id=image_id,
        predicted_label=predicted,
        per_class_scores=scores,
        explanation=explanation,
        crop_preprocess_seconds=img.crop_seconds,
        encode_seconds=img.encode_seconds,
        score_seconds=score_seconds,
    )


def _build_explanation(predicted, scores, classes, sims_by_label, w, img, cfg):
    if cfg.aggregation != "wca" or w is None:
        raise ConfigError("explanations are defined for the wca aggregation")
    by_label = {c.label: c for c in classes}
    ordered = sorted(scores, key=lambda lbl: -scores[lbl])
    targets = ordered[:2]
    out = {}
    for label in targets:
        cls = by_label[label]
        sims = sims_by_label[label]
        w_weighted = w @ sims
        rows = [
            ExplanationRow(
                description=cls.descriptions[j],
                weight=float(cls.weights[j]),
                w_weighted_sim=float(w_weighted[j]),
                contribution=float(cls.weights[j] * w_weighted[j]),
            )
            for j in range(sims.shape[1])
        ]
        rows.sort(key=lambda r: -r.contribution)
        out[label] = rows
    return out


# ---------------------------------------------------------------------------
# Batch evaluation.
# ---------------------------------------------------------------------------

@dataclass
class EvaluationReport:
    top1: float
    per_class: dict[str, float]
    confusion: dict[str, dict[str, int]]
    n: int
    seed: int
    config: dict
    predicted: dict[str, str]
    scores: dict[str, dict[str, float]]
    wall_seconds: float = 0.0
    crop_preprocess_seconds: float = 0.0
    encode_seconds: float = 0.0
    score_seconds: float = 0.0

    def body_dict(self) -> dict:
        """Canonical report body; excludes wall-clock measurements so that
        identical runs serialize byte-identically."""
        return {
            "top1": self.top1,
            "per_class": self.per_class,
            "confusion": self.confusion,
            "n": self.n,
            "seed": self.seed,
            "config": self.config,
            "predicted": self.predicted,
        }

    def timing_dict(self) -> dict:
        return {
            "wall_seconds": self.wall_seconds,
            "crop_preprocess_seconds": self.crop_preprocess_seconds,
            "encode_seconds": self.encode_seconds,
            "score_seconds": self.score_seconds,
        }


def _annotate(exc: Exception, image_id: str) -> Exception:
    if exc.args:
        exc.args = (f"image {image_id!r}: {exc.args[0]}",) + exc.args[1:]
    else:
        exc.args = (f"image {image_id!r}",)
    return exc


def evaluate(
    manifest: DatasetManifest,
    catalog: LabelCatalog,
    backend,
    cfg: RunConfig,
) -> EvaluationReport:
    """Classify every manifest record and report top-1 accuracy.

    Deterministic for a fixed seed and backend; parallelism over images
    never changes results because each image owns an independent stream
    and the reduction is pure counting.
    """
    manifest.require_labels_in(catalog)
    t_start = time.perf_counter()

    if cfg.cache_path is not None:
        reports = _evaluate_cached(manifest, catalog, backend, cfg)
    else:
        guard = _BackendGuard(backend)
        classes = prepare_classes(catalog, guard, cfg)

        def run_one(record):
            image_id, _ = record
            image = image_id if guard.is_store else _image_path(manifest, image_id)
            try:
                return classify(image, catalog, guard, cfg, image_id, classes)
            except Exception as exc:
                raise _annotate(exc, image_id)

        if cfg.jobs > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                reports = list(pool.map(run_one, manifest.records))
        else:
            reports = [run_one(r) for r in manifest.records]

    truth = dict(manifest.records)
    confusion: dict[str, dict[str, int]] = {}
    per_class_total: dict[str, int] = {}
    per_class_correct: dict[str, int] = {}
    correct = 0
    for report in reports:
        true_label = truth[report.image_id]
        pred = report.predicted_label
        per_class_total[true_label] = per_class_total.get(true_label, 0) + 1
        if pred == true_label:
            correct += 1
            per_class_correct[true_label] = per_class_correct.get(true_label, 0) + 1
        confusion.setdefault(true_label, {})
        confusion[true_label][pred] = confusion[true_label].get(pred, 0) + 1

    labels_in_order = [lbl for lbl in catalog.labels if lbl in per_class_total]
    per_class = {
        lbl: per_class_correct.get(lbl, 0) / per_class_total[lbl] for lbl in labels_in_order
    }
    confusion = {
        lbl: dict(sorted(confusion[lbl].items())) for lbl in labels_in_order
    }

    return EvaluationReport(
        top1=correct / len(manifest.records),
        per_class=per_class,
        confusion=confusion,
        n=len(manifest.records),
        seed=cfg.seed,
        config=cfg.public_dict(),
        predicted={r.image_id: r.predicted_label for r in reports},
        scores={r.image_id: r.per_class_scores for r in reports},
        wall_seconds=time.perf_counter() - t_start,
        crop_preprocess_seconds=sum(r.crop_preprocess_seconds for r in reports),
        encode_seconds=sum(r.encode_seconds for r in reports),
        score_seconds=sum(r.score_seconds for r in reports),
    )


def _image_path(manifest: DatasetManifest, image_id: str):
    if manifest.root is None:
        raise ConfigError(
            "pixel backends need a manifest root directory to resolve image files"
        )
    return Path(manifest.root) / image_id


# ---------------------------------------------------------------------------
# Augmented-embedding cache.
# ---------------------------------------------------------------------------

def precompute_cache(
    manifest: DatasetManifest,
    catalog: LabelCatalog,
    backend,
    cfg: RunConfig,
    cache_path,
) -> dict:
    """Write per-image and per-class augmented embeddings as a WEM1 file.

    Ids are ``img::<image id>`` and ``cls::<label>``. A later evaluation
    run loading this cache skips the crop and encode phases entirely.
    """
    manifest.require_labels_in(catalog)
    base = replace(cfg, cache_path=None, aggregation="wca", explain=False)
    guard = _BackendGuard(backend)
    classes = prepare_classes(catalog, guard, base)

    store = PrecomputedStore(dim=guard.dim)
    for cls in classes:
        store.add(f"{CACHE_CLASS_PREFIX}{cls.label}", cls.augmented)
    for image_id, _ in manifest.records:
        img = _resolve_image(image_id if guard.is_store else _image_path(manifest, image_id),
                             image_id, guard, base)
        w = patch_weights(img.whole, img.patches)
        store.add(f"{CACHE_IMAGE_PREFIX}{image_id}", augmented_image_embedding(img.patches, w))
    write_embedding_file(store, cache_path)
    return {"cache": str(cache_path), "images": len(manifest.records), "classes": len(classes)}


def _evaluate_cached(manifest, catalog, backend, cfg) -> list[ClassificationReport]:
    cache = read_embedding_file(cfg.cache_path)
    backend_dim = getattr(backend, "dim", None)
    if backend_dim is not None and cache.dim != backend_dim:
        raise CacheInvalidError(
            f"cache dim {cache.dim} does not match backend dim {backend_dim}"
        )
    t_vectors = []
    for label in catalog.labels:
        key = f"{CACHE_CLASS_PREFIX}{label}"
        if key not in cache:
            raise CacheInvalidError(f"cache is missing the class embedding {key!r}")
        t_vectors.append(cache.lookup(key))
    t_matrix = np.stack(t_vectors)

    reports = []
    for image_id, _ in manifest.records:
        key = f"{CACHE_IMAGE_PREFIX}{image_id}"
        if key not in cache:
            raise CacheInvalidError(f"cache is missing the image embedding {key!r}")
        t0 = time.perf_counter()
        k = cache.lookup(key)
        values = t_matrix @ k
        scores = {label: float(v) for label, v in zip(catalog.labels, values)}
        reports.append(
            ClassificationReport(
                image_id=image_id,
                predicted_label=_argmax_label(scores),
                per_class_scores=scores,
                score_seconds=time.perf_counter() - t0,
            )
        )
    return reports


# ---------------------------------------------------------------------------
# Timing bench.
# ---------------------------------------------------------------------------

BENCH_GRID = (0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)


def _bench_pipeline(buf: ImageBuffer, image_id: str, n: int, cfg: RunConfig, guard):
    """One image through crop, encode, and image-side score precompute."""
    t0 = time.perf_counter()
    if n == 0:
        prompted = [buf]
    else:
        prompt_cfg = replace(cfg.prompt, num_crops=n)
        specs = crop_specs_for_image(prompt_cfg, buf.width, buf.height, image_id)
        prompted = [prompt_image(buf, prompt_cfg, spec) for spec in specs]
    t1 = time.perf_counter()
    whole = guard.encode_image(buf)
    patches = np.stack([guard.encode_image(p) for p in prompted])
    t2 = time.perf_counter()
    w = patch_weights(whole, patches)
    augmented_image_embedding(patches, w)
    t3 = time.perf_counter()
    return t1 - t0, t2 - t1, t3 - t2


def bench_timing(images: list[ImageBuffer], cfg: RunConfig, backend) -> list[dict]:
    """Mean per-image seconds for crop+preprocess, encode, and the image-side
    score precompute, across the crop-count grid. N=0 is the whole-image
    baseline. total_s comes from a separate end-to-end pass, so phase
    additivity is an observation, not an identity. Purely observational:
    values depend on hardware.
    """
    if not images:
        raise DomainError("bench needs at least one sample image")
    guard = _BackendGuard(backend)
    rows = []
    for n in BENCH_GRID:
        crop_s = encode_s = score_s = total_s = 0.0
        for index, buf in enumerate(images):
            image_id = f"bench_{index}"
            c, e, s = _bench_pipeline(buf, image_id, n, cfg, guard)
            crop_s += c
            encode_s += e
            score_s += s
            t0 = time.perf_counter()
            _bench_pipeline(buf, image_id, n, cfg, guard)
            total_s += time.perf_counter() - t0
        count = len(images)
        rows.append(
            {
                "N": n,
                "crop_preprocess_s": crop_s / count,
                "encode_s": encode_s / count,
                "score_s": score_s / count,
                "total_s": total_s / count,
            }
        )
    return rows


def bench_csv(rows: list[dict]) -> str:
    header = ["N", "crop_preprocess_s", "encode_s", "score_s", "total_s"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                str(row["N"]) if col == "N" else f"{row[col]:.6f}" for col in header
            )
        )
    return "\n".join(lines) + "\n"

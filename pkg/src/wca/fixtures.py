"""Deterministic fixtures and the independent reference evaluator.

``gen_fixtures`` writes two synthetic datasets (manifests, description
JSON, WEM1 embeddings) from seeded recipes, together with expected outputs
computed by a brute-force evaluator so the test suite can diff the engine
against an implementation it shares no code with.

The reference evaluator below is intentionally plain Python over lists:
explicit loops, ``math.sqrt`` and ``math.exp``, no numpy, no imports from
the scoring modules. Keep it that way; its value is independence.

Fixture shapes:

* ``fx-classify-01`` exercises one classification in depth: 3 classes,
  8 patches, 5 descriptions per class, expected scores for every
  aggregation and the full explanation row ordering.
* ``fx-bench-noisy`` exercises batch evaluation: 10 classes x 20 images.
  Each image holds patches drawn near its class prototype plus confuser
  patches near other prototypes and pure-noise patches; descriptions mix
  informative and junk entries. Whole-image anchoring then demotes the
  confusers, so weighted aggregation beats the plain mean, which beats
  taking the single best matrix entry.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import DomainError
from .prompts import PromptConfig, sample_crop_specs
from .rng import SplitMix64, stream_seed
from .wem import PrecomputedStore, write_embedding_file

FX_CLASSIFY = "fx-classify-01"
FX_BENCH = "fx-bench-noisy"

CLASSIFY_LABELS = ["kingfisher", "lighthouse", "orchard"]
BENCH_LABELS = [
    "bakery", "canal", "dune", "fjord", "grove",
    "harbor", "islet", "jetty", "kiln", "lagoon",
]

ENSEMBLE_TEMPLATES = ["a photo of a {}", "a detailed photo of a {}"]
MIXED_LAMBDA = 0.25

CROP_GOLDEN_SEEDS = [7, 42, 123456789]
CROP_GOLDEN_IMAGES = [("img_001", 224, 224), ("photo-77", 640, 480), ("åçé_unicode", 333, 257)]


# ---------------------------------------------------------------------------
# Reference evaluator (independent of the engine's scoring path).
# ---------------------------------------------------------------------------

def ref_dot(u, v):
    total = 0.0
    for a, b in zip(u, v):
        total += a * b
    return total


def ref_norm(u):
    return math.sqrt(ref_dot(u, u))


def ref_cos(u, v):
    value = ref_dot(u, v) / (ref_norm(u) * ref_norm(v))
    return min(1.0, max(-1.0, value))


def ref_softmax(scores):
    peak = max(scores)
    exps = [math.exp(s - peak) for s in scores]
    total = sum(exps)
    return [e / total for e in exps]


def ref_matrix(patches, descs):
    return [[ref_cos(p, d) for d in descs] for p in patches]


def ref_class_score(agg, whole, patches, anchor, descs, ensemble=None, lam=None):
    """Score one class the long way; every aggregation spelled out."""
    if agg == "clip":
        return ref_cos(whole, anchor)
    if agg == "clip-e":
        mean = [0.0] * len(whole)
        for vec in ensemble:
            n = ref_norm(vec)
            for i, x in enumerate(vec):
                mean[i] += x / n / len(ensemble)
        return ref_cos(whole, mean)
    if agg == "llm":
        return sum(ref_cos(whole, d) for d in descs) / len(descs)

    v = ref_softmax([ref_cos(anchor, d) for d in descs])
    if agg == "mixed":
        whole_side = sum(vj * ref_cos(whole, d) for vj, d in zip(v, descs))
        patch_side = ref_class_score("wca", whole, patches, anchor, descs)
        return lam * whole_side + (1.0 - lam) * patch_side

    sims = ref_matrix(patches, descs)
    if agg == "avg":
        return sum(sum(row) for row in sims) / (len(sims) * len(sims[0]))
    if agg == "max":
        return max(max(row) for row in sims)
    if agg == "wca":
        w = ref_softmax([ref_cos(whole, p) for p in patches])
        total = 0.0
        for i, row in enumerate(sims):
            for j, s in enumerate(row):
                total += w[i] * v[j] * s
        return total
    raise ValueError(f"unknown aggregation {agg!r}")


def ref_classify(agg, whole, patches, classes, lam=None):
    """classes: ordered list of (label, anchor, descs, ensemble). Returns
    (scores dict, predicted label); ties go to the first label in order."""
    scores = {}
    best_label = None
    best = -math.inf
    for label, anchor, descs, ensemble in classes:
        s = ref_class_score(agg, whole, patches, anchor, descs, ensemble, lam)
        scores[label] = s
        if s > best:
            best = s
            best_label = label
    return scores, best_label


def ref_explanation(whole, patches, anchor, descs, desc_texts):
    """Rows (description, weight, w-weighted similarity, contribution),
    sorted by contribution descending, ties by original index."""
    w = ref_softmax([ref_cos(whole, p) for p in patches])
    v = ref_softmax([ref_cos(anchor, d) for d in descs])
    sims = ref_matrix(patches, descs)
    rows = []
    for j in range(len(descs)):
        wws = sum(w[i] * sims[i][j] for i in range(len(patches)))
        rows.append(
            {
                "index": j,
                "description": desc_texts[j],
                "weight": v[j],
                "w_weighted_sim": wws,
                "contribution": v[j] * wws,
            }
        )
    rows.sort(key=lambda r: (-r["contribution"], r["index"]))
    return rows


# ---------------------------------------------------------------------------
# Recipes.
# ---------------------------------------------------------------------------

def _f32(vec: np.ndarray) -> list[float]:
    """Project to float32 and back, so the oracle sees exactly the stored values."""
    return [float(x) for x in vec.astype(np.float32).astype(np.float64)]


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _near(rng, proto, spread, lo=0.5, hi=2.0):
    v = proto + spread * rng.normal(size=proto.shape[0])
    return v / np.linalg.norm(v) * rng.uniform(lo, hi)


def _junk(rng, dim, lo=0.5, hi=2.0):
    return _unit(rng, dim) * rng.uniform(lo, hi)


def _build_classify_fixture(seed: int) -> dict:
    rng = np.random.default_rng([seed, 0xA])
    dim, n_patches, n_descs = 16, 8, 5
    protos = [_unit(rng, dim) for _ in CLASSIFY_LABELS]

    image_id = "fx01_img"
    whole = _f32(_near(rng, protos[0], 0.30))
    patches = []
    for kind in (0, 0, 0, 0, 0, 1, 2, None):
        vec = _junk(rng, dim) if kind is None else _near(rng, protos[kind], 0.35 if kind == 0 else 0.25)
        patches.append(_f32(vec))

    classes = []
    desc_texts = {}
    for k, label in enumerate(CLASSIFY_LABELS):
        anchor = _f32(_near(rng, protos[k], 0.08))
        descs = [_f32(_near(rng, protos[k], 0.40)) for _ in range(n_descs - 1)]
        descs.append(_f32(_junk(rng, dim)))
        ensemble = [_f32(_near(rng, protos[k], 0.08)) for _ in ENSEMBLE_TEMPLATES]
        classes.append((label, anchor, descs, ensemble))
        desc_texts[label] = [
            f"a {label} with characteristic detail {j}" for j in range(n_descs)
        ]

    return {
        "dim": dim,
        "num_crops": n_patches,
        "image_id": image_id,
        "true_label": CLASSIFY_LABELS[0],
        "whole": whole,
        "patches": patches,
        "classes": classes,
        "desc_texts": desc_texts,
    }


def _build_bench_fixture(seed: int) -> dict:
    rng = np.random.default_rng([seed, 0xB])
    dim, n_patches, n_descs, per_class = 32, 8, 6, 20
    protos = [_unit(rng, dim) for _ in BENCH_LABELS]

    # Noise levels tuned once so the three aggregators separate cleanly
    # (weighted ~0.92 > mean ~0.80 > max ~0.62) with no near-tied argmax.
    classes = []
    desc_texts = {}
    for k, label in enumerate(BENCH_LABELS):
        anchor = _f32(_near(rng, protos[k], 0.10))
        descs = [_f32(_near(rng, protos[k], 0.30)) for _ in range(4)]
        descs += [_f32(_junk(rng, dim)) for _ in range(n_descs - 4)]
        classes.append((label, anchor, descs, None))
        desc_texts[label] = [f"a {label} with visual trait {j}" for j in range(n_descs)]

    images = []
    for k, label in enumerate(BENCH_LABELS):
        for i in range(per_class):
            image_id = f"{label}_{i:03d}"
            whole = _f32(_near(rng, protos[k], 0.18))
            patches = [_f32(_near(rng, protos[k], 0.22)) for _ in range(4)]
            for _ in range(2):
                other = int(rng.integers(0, len(BENCH_LABELS) - 1))
                if other >= k:
                    other += 1
                patches.append(_f32(_near(rng, protos[other], 0.25)))
            patches += [_f32(_junk(rng, dim)) for _ in range(2)]
            images.append({"id": image_id, "label": label, "whole": whole, "patches": patches})

    return {
        "dim": dim,
        "num_crops": n_patches,
        "classes": classes,
        "desc_texts": desc_texts,
        "images": images,
    }


# ---------------------------------------------------------------------------
# Writers.
# ---------------------------------------------------------------------------

def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _store_for(dim: int, images, classes, with_ensemble: bool) -> PrecomputedStore:
    store = PrecomputedStore(dim=dim)
    for img in images:
        store.add(img["id"], img["whole"])
        for i, p in enumerate(img["patches"]):
            store.add(f"{img['id']}::{i}", p)
    for label, anchor, descs, ensemble in classes:
        store.add(f"cls::{label}", anchor)
        for j, d in enumerate(descs):
            store.add(f"{label}::{j}", d)
        if with_ensemble and ensemble is not None:
            for t, vec in enumerate(ensemble):
                store.add(f"cls::{label}::t{t}", vec)
    return store


def _min_margin(scores: dict[str, float], predicted: str) -> float:
    rest = [s for label, s in scores.items() if label != predicted]
    return scores[predicted] - max(rest) if rest else math.inf


def _expected_classify(fx: dict, seed: int) -> dict:
    classes = fx["classes"]
    aggs = ["wca", "avg", "max", "llm", "clip", "clip-e", "mixed"]
    results = {}
    for agg in aggs:
        lam = MIXED_LAMBDA if agg == "mixed" else None
        scores, predicted = ref_classify(agg, fx["whole"], fx["patches"], classes, lam)
        results[agg] = {"scores": scores, "predicted": predicted}

    wca_scores = results["wca"]["scores"]
    predicted = results["wca"]["predicted"]
    ordered = sorted(wca_scores, key=lambda lbl: -wca_scores[lbl])
    runner_up = ordered[1] if len(ordered) > 1 else None

    explanations = {}
    for label in filter(None, [predicted, runner_up]):
        entry = next(c for c in classes if c[0] == label)
        explanations[label] = ref_explanation(
            fx["whole"], fx["patches"], entry[1], entry[2], fx["desc_texts"][label]
        )

    return {
        "fixture": FX_CLASSIFY,
        "seed": seed,
        "config": {
            "crops": fx["num_crops"],
            "dim": fx["dim"],
            "mixed_lambda": MIXED_LAMBDA,
            "ensemble_templates": ENSEMBLE_TEMPLATES,
        },
        "image_id": fx["image_id"],
        "true_label": fx["true_label"],
        "results": results,
        "predicted": predicted,
        "runner_up": runner_up,
        "explanations": explanations,
    }


def _expected_bench(fx: dict, seed: int) -> dict:
    aggs = ["wca", "avg", "max"]
    per_image = {}
    correct = {agg: 0 for agg in aggs}
    min_gap = {agg: math.inf for agg in aggs}
    for img in fx["images"]:
        entry = {"label": img["label"], "scores": {}, "predicted": {}}
        for agg in aggs:
            scores, predicted = ref_classify(agg, img["whole"], img["patches"], fx["classes"])
            entry["scores"][agg] = scores
            entry["predicted"][agg] = predicted
            if predicted == img["label"]:
                correct[agg] += 1
            min_gap[agg] = min(min_gap[agg], abs(_min_margin(scores, predicted)))
        per_image[img["id"]] = entry

    n = len(fx["images"])
    accuracies = {agg: correct[agg] / n for agg in aggs}
    # Labels must stay stable under float32 cache round-trips and under the
    # 1e-9 oracle tolerance; a degenerate recipe is a hard error, not a flaky test.
    if min_gap["wca"] < 1e-4 or min(min_gap["avg"], min_gap["max"]) < 1e-6:
        raise DomainError(
            f"fixture recipe produced near-tied scores (gaps {min_gap}); "
            "regenerate with a different seed"
        )
    return {
        "fixture": FX_BENCH,
        "seed": seed,
        "config": {"crops": fx["num_crops"], "dim": fx["dim"]},
        "n": n,
        "accuracies": accuracies,
        "per_image": per_image,
    }


def _write_fixture_dir(root: Path, name: str, fx: dict, expected: dict, with_ensemble: bool):
    fxdir = root / name
    fxdir.mkdir(parents=True, exist_ok=True)

    images = fx.get("images") or [
        {"id": fx["image_id"], "label": fx["true_label"], "whole": fx["whole"], "patches": fx["patches"]}
    ]
    manifest_lines = [json.dumps({"id": img["id"], "label": img["label"]}) for img in images]
    (fxdir / "manifest.jsonl").write_text("\n".join(manifest_lines) + "\n", encoding="utf-8")

    _write_json(fxdir / "descriptions.json", fx["desc_texts"])
    write_embedding_file(_store_for(fx["dim"], images, fx["classes"], with_ensemble), fxdir / "embeddings.wem1")
    _write_json(fxdir / "expected.json", expected)


def _write_crop_goldens(root: Path) -> None:
    outdir = root / "crop_specs"
    outdir.mkdir(parents=True, exist_ok=True)
    for seed in CROP_GOLDEN_SEEDS:
        cfg = PromptConfig(seed=seed)
        dump = {
            "seed": seed,
            "alpha": cfg.alpha,
            "beta": cfg.beta,
            "num_crops": cfg.num_crops,
            "images": [],
        }
        for image_id, width, height in CROP_GOLDEN_IMAGES:
            stream = SplitMix64(stream_seed(seed, image_id))
            specs = sample_crop_specs(cfg, width, height, stream)
            dump["images"].append(
                {
                    "id": image_id,
                    "width": width,
                    "height": height,
                    "specs": [
                        {"gamma": s.gamma, "size": s.size, "left": s.left, "top": s.top}
                        for s in specs
                    ],
                }
            )
        _write_json(outdir / f"seed{seed}.json", dump)


def gen_fixtures(out_dir, seed: int = 7) -> dict:
    """Write both fixture bundles and crop-spec goldens; returns a summary."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)

    fx1 = _build_classify_fixture(seed)
    expected1 = _expected_classify(fx1, seed)
    _write_fixture_dir(root, FX_CLASSIFY, fx1, expected1, with_ensemble=True)

    fx2 = _build_bench_fixture(seed)
    expected2 = _expected_bench(fx2, seed)
    _write_fixture_dir(root, FX_BENCH, fx2, expected2, with_ensemble=False)

    _write_crop_goldens(root)

    return {
        "out_dir": str(root),
        "seed": seed,
        "fixtures": [FX_CLASSIFY, FX_BENCH],
        "bench_accuracies": expected2["accuracies"],
    }

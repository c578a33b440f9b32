"""Acceptance suite.

One test per acceptance criterion, each at its stated tolerance, each
printing a PASS line on success (failures surface as assertions). The
whole suite runs from generated fixtures; no model runtime, no network.
"""

import json
import time

import numpy as np
import pytest

from wca.classify import RunConfig, classify, evaluate, load_manifest, precompute_cache
from wca.cli import main as cli_main
from wca.descriptions import load_descriptions
from wca.errors import FormatError
from wca.prompts import PromptConfig, crop_specs_for_image
from wca.scoring import (
    augmented_image_embedding,
    augmented_text_embedding,
    avg_score,
    cross_matrix,
    llm_score,
    wca_score,
)
from wca.theorem import counterexample_probe
from wca.vecmath import softmax
from wca.wem import PrecomputedStore, read_embedding_file, write_embedding_file

from test_wem import corruptions, make_store


def report(name):
    print(f"[ACCEPTANCE] {name}: PASS")


def random_instance(rng):
    n = int(rng.integers(1, 17))
    m = int(rng.integers(1, 17))
    dim = int(rng.integers(2, 24))
    patches = rng.normal(size=(n, dim))
    descs = rng.normal(size=(m, dim))
    patches *= (rng.uniform(0.1, 10, size=n) / np.linalg.norm(patches, axis=1))[:, None]
    descs *= (rng.uniform(0.1, 10, size=m) / np.linalg.norm(descs, axis=1))[:, None]
    w = rng.dirichlet(np.ones(n))
    v = rng.dirichlet(np.ones(m))
    return patches, descs, w, v


def test_augmented_embedding_equivalence():
    """1,000 seeded instances (N,M <= 16, norms in [0.1,10]):
    |wca_score - k.t| < 1e-9, in under 5 seconds."""
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        patches, descs, w, v = random_instance(rng)
        slow = wca_score(cross_matrix(patches, descs), w, v)
        fast = float(augmented_image_embedding(patches, w) @ augmented_text_embedding(descs, v))
        worst = max(worst, abs(slow - fast))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-9, f"worst deviation {worst:.3e}"
    assert elapsed < 5.0, f"took {elapsed:.2f}s"
    report(f"augmented-embedding equivalence (worst {worst:.2e}, {elapsed:.2f}s)")


def test_softmax_simplex_and_shift_invariance():
    """10,000 random softmax calls: nonnegative, sum to 1 +- 1e-9, and
    shift-invariant within 1e-9."""
    rng = np.random.default_rng(102)
    for _ in range(10_000):
        scores = rng.uniform(-30, 30, size=int(rng.integers(1, 33)))
        w = softmax(scores)
        assert np.all(w >= 0)
        assert abs(float(w.sum()) - 1.0) < 1e-9
        shifted = softmax(scores + rng.uniform(-100, 100))
        assert float(np.max(np.abs(shifted - w))) < 1e-9
    report("softmax simplex + shift invariance (10,000 calls)")


def test_reductions():
    """1,000 random instances: uniform-weight score equals the plain matrix
    mean within 1e-12; a single whole-image patch with uniform description
    weights equals the description-mean score within 1e-12."""
    rng = np.random.default_rng(103)
    for _ in range(1000):
        patches, descs, _, _ = random_instance(rng)
        n, m = len(patches), len(descs)
        sims = cross_matrix(patches, descs)
        uniform_w = np.full(n, 1.0 / n)
        uniform_v = np.full(m, 1.0 / m)
        assert abs(wca_score(sims, uniform_w, uniform_v) - avg_score(sims)) < 1e-12

        whole = patches[0]
        single = cross_matrix([whole], descs)
        assert abs(wca_score(single, [1.0], uniform_v) - llm_score(whole, descs)) < 1e-12
    report("reductions to mean and description-mean scores (1,000 instances)")


def test_theorem_suite():
    """10,000 constructed instances (d=8, cos2_max=0.9, norm floor 0.1):
    recombined cosine < 1 - 1e-9 and encoder additivity within 1e-9,
    in under 30 seconds."""
    t0 = time.perf_counter()
    summary = counterexample_probe(2024, 10_000, d_in=8, d_out=8, cos2_max=0.9)
    elapsed = time.perf_counter() - t0
    assert summary.max_cos < 1 - 1e-9, f"max cosine {summary.max_cos!r}"
    assert summary.linearity_max_err < 1e-9
    assert elapsed < 30.0, f"took {elapsed:.2f}s"
    report(
        f"theorem suite (max cos {summary.max_cos:.6f}, "
        f"linearity {summary.linearity_max_err:.1e}, {elapsed:.2f}s)"
    )


def _cfg(crops, agg="wca", **kw):
    return RunConfig(aggregation=agg, prompt=PromptConfig(num_crops=crops, seed=7), **kw)


def test_oracle_equivalence(classify_fixture, bench_fixture):
    """Engine classify/evaluate agree with the independent brute-force
    evaluator: labels exactly, scores within 1e-9; aggregator accuracies
    are ordered max <= avg <= wca."""
    expected = classify_fixture["expected"]
    store = read_embedding_file(classify_fixture["embeddings"])
    catalog = load_descriptions(classify_fixture["descriptions"])
    crops = expected["config"]["crops"]
    for agg, want in expected["results"].items():
        lam = expected["config"]["mixed_lambda"] if agg == "mixed" else None
        rep = classify(expected["image_id"], catalog, store, _cfg(crops, agg, mixed_lambda=lam))
        assert rep.predicted_label == want["predicted"], agg
        for label, score in want["scores"].items():
            assert abs(rep.per_class_scores[label] - score) < 1e-9, (agg, label)

    expected_bench = bench_fixture["expected"]
    store = read_embedding_file(bench_fixture["embeddings"])
    catalog = load_descriptions(bench_fixture["descriptions"])
    manifest = load_manifest(bench_fixture["manifest"])
    crops = expected_bench["config"]["crops"]
    acc = {}
    for agg in ("wca", "avg", "max"):
        rep = evaluate(manifest, catalog, store, _cfg(crops, agg))
        acc[agg] = rep.top1
        assert rep.top1 == expected_bench["accuracies"][agg]
        for image_id, pred in rep.predicted.items():
            assert pred == expected_bench["per_image"][image_id]["predicted"][agg]
        for image_id, scores in rep.scores.items():
            want = expected_bench["per_image"][image_id]["scores"][agg]
            for label, value in scores.items():
                assert abs(value - want[label]) < 1e-9
    assert acc["max"] <= acc["avg"] <= acc["wca"]
    report(
        "oracle equivalence on both fixtures "
        f"(accuracies max {acc['max']:.3f} <= avg {acc['avg']:.3f} <= wca {acc['wca']:.3f})"
    )


def test_determinism_and_cache_coherence(bench_fixture, tmp_path):
    """Two identically seeded CLI runs serialize byte-identically; cached
    and uncached evaluation agree on every label and on scores within 1e-6."""
    argv_common = [
        "eval",
        "--manifest", str(bench_fixture["manifest"]),
        "--descriptions", str(bench_fixture["descriptions"]),
        "--embeddings", str(bench_fixture["embeddings"]),
        "--agg", "wca", "--crops", "8", "--seed", "7",
    ]
    blobs = []
    for name in ("run1.json", "run2.json"):
        out = tmp_path / name
        assert cli_main(argv_common + ["--out", str(out)]) == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]

    store = read_embedding_file(bench_fixture["embeddings"])
    catalog = load_descriptions(bench_fixture["descriptions"])
    manifest = load_manifest(bench_fixture["manifest"])
    cache_path = tmp_path / "aug.wem1"
    precompute_cache(manifest, catalog, store, _cfg(8), cache_path)
    uncached = evaluate(manifest, catalog, store, _cfg(8))
    cached = evaluate(manifest, catalog, store, _cfg(8, cache_path=str(cache_path)))
    assert cached.predicted == uncached.predicted
    worst = 0.0
    for image_id in uncached.scores:
        for label, value in uncached.scores[image_id].items():
            worst = max(worst, abs(value - cached.scores[image_id][label]))
    assert worst < 1e-6, f"worst cached-score deviation {worst:.3e}"
    report(f"determinism + cache coherence (worst cache deviation {worst:.2e})")


def test_positive_scale_argmax_invariance(bench_fixture, tmp_path):
    """Rescaling stored embeddings by c in {1e-3, 1, 1e3} flips no label."""
    catalog = load_descriptions(bench_fixture["descriptions"])
    manifest = load_manifest(bench_fixture["manifest"])
    base_store = read_embedding_file(bench_fixture["embeddings"])
    baseline = evaluate(manifest, catalog, base_store, _cfg(8)).predicted

    for c in (1e-3, 1.0, 1e3):
        scaled = PrecomputedStore(dim=base_store.dim)
        for entry_id, vec in base_store.entries.items():
            scaled.add(entry_id, vec * c)
        predicted = evaluate(manifest, catalog, scaled, _cfg(8)).predicted
        assert predicted == baseline, f"labels changed under global rescale c={c}"

    # Rescaling a single stored embedding must be just as harmless.
    spot = PrecomputedStore(dim=base_store.dim)
    for entry_id, vec in base_store.entries.items():
        spot.add(entry_id, vec * 1e3 if entry_id == "bakery_000" else vec)
    assert evaluate(manifest, catalog, spot, _cfg(8)).predicted == baseline
    report("positive-scale argmax invariance (c in {1e-3, 1, 1e3} + spot rescale)")


def test_wem1_roundtrip_and_corruption(tmp_path):
    """100 random stores survive write-read bit-exactly; 10+ corrupted
    variants each raise the typed format error."""
    rng = np.random.default_rng(104)
    for index in range(100):
        dim = int(rng.integers(1, 33))
        count = int(rng.integers(0, 12))
        store = PrecomputedStore(dim=dim)
        for j in range(count):
            store.add(f"id_{index}_{j}", rng.normal(size=dim).astype(np.float32))
        path = tmp_path / f"rt_{index}.wem1"
        write_embedding_file(store, path)
        loaded = read_embedding_file(path)
        assert list(loaded.entries) == list(store.entries)
        for key, vec in store.entries.items():
            np.testing.assert_array_equal(
                vec.astype(np.float32), loaded.entries[key].astype(np.float32)
            )

    base = make_store(2, [("aa", [1.0, 2.0]), ("bb", [3.0, 4.0])])
    base_path = tmp_path / "base.wem1"
    write_embedding_file(base, base_path)
    variants = corruptions(base_path.read_bytes())
    assert len(variants) >= 10
    for name, payload in variants.items():
        bad = tmp_path / f"bad_{name}.wem1"
        bad.write_bytes(payload)
        with pytest.raises(FormatError):
            read_embedding_file(bad)
    report(f"WEM1 round-trip (100 stores) + {len(variants)} corruptions rejected")


def test_crop_sampler_statistics():
    """10,000 samples at alpha=0.5, beta=0.9, short side 224: sizes within
    [112, 202] and mean gamma within 0.01 of 0.7."""
    cfg = PromptConfig(alpha=0.5, beta=0.9, num_crops=10_000, seed=7)
    specs = crop_specs_for_image(cfg, 224, 224, "acceptance")
    sizes = [s.size for s in specs]
    assert min(sizes) >= 112 and max(sizes) <= 202
    mean_gamma = sum(s.gamma for s in specs) / len(specs)
    assert abs(mean_gamma - 0.7) < 0.01
    report(
        f"crop sampler statistics (sizes [{min(sizes)}, {max(sizes)}], "
        f"mean gamma {mean_gamma:.4f})"
    )

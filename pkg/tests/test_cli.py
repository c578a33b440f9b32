import json

import numpy as np
import pytest

from wca.cli import main


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture()
def bench_paths(bench_fixture):
    return {
        "manifest": str(bench_fixture["manifest"]),
        "descriptions": str(bench_fixture["descriptions"]),
        "embeddings": str(bench_fixture["embeddings"]),
    }


class TestEval:
    def test_happy_path(self, bench_paths, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", bench_paths["embeddings"],
            "--agg", "wca", "--crops", "8", "--seed", "7",
            "--out", str(out),
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert set(report) >= {"top1", "per_class", "confusion", "n", "seed", "config"}
        assert report["n"] == 200
        assert report["seed"] == 7
        # wall-clock measurements never enter the canonical body
        assert "wall_seconds" not in json.dumps(report)

    def test_lambda_without_mixed_exits_1(self, bench_paths, capsys):
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", bench_paths["embeddings"],
            "--agg", "wca", "--lambda", "0.5", "--crops", "8",
        )
        assert code == 1

    def test_byte_identical_runs(self, bench_paths, tmp_path):
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            code = run_cli(
                "eval",
                "--manifest", bench_paths["manifest"],
                "--descriptions", bench_paths["descriptions"],
                "--embeddings", bench_paths["embeddings"],
                "--agg", "wca", "--crops", "8", "--seed", "7",
                "--jobs", "3",
                "--out", str(out),
            )
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_missing_embedding_file_exits_2(self, bench_paths, tmp_path):
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", str(tmp_path / "missing.wem1"),
            "--crops", "8",
        )
        assert code == 2

    def test_corrupt_embedding_file_exits_2(self, bench_paths, tmp_path):
        bad = tmp_path / "bad.wem1"
        bad.write_bytes(b"XXXX" + b"\x00" * 16)
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", str(bad),
            "--crops", "8",
        )
        assert code == 2

    def test_unknown_flag_exits_1(self, bench_paths):
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", bench_paths["embeddings"],
            "--frobnicate",
        )
        assert code == 1

    def test_backends_mutually_exclusive(self, bench_paths):
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", bench_paths["embeddings"],
            "--model", "demo",
        )
        assert code == 1

    def test_wca_seed_env_fallback(self, bench_paths, tmp_path, monkeypatch):
        monkeypatch.setenv("WCA_SEED", "31337")
        out = tmp_path / "seeded.json"
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", bench_paths["embeddings"],
            "--crops", "8",
            "--out", str(out),
        )
        assert code == 0
        assert json.loads(out.read_text())["seed"] == 31337

    def test_bad_wca_seed_env_exits_1(self, bench_paths, monkeypatch):
        monkeypatch.setenv("WCA_SEED", "not-a-number")
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", bench_paths["embeddings"],
            "--crops", "8",
        )
        assert code == 1


class TestClassify:
    def test_explain_output(self, classify_fixture, tmp_path):
        out = tmp_path / "report.json"
        code = run_cli(
            "classify", "fx01_img",
            "--descriptions", str(classify_fixture["descriptions"]),
            "--embeddings", str(classify_fixture["embeddings"]),
            "--crops", "8", "--explain",
            "--out", str(out),
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["predicted_label"] == classify_fixture["expected"]["predicted"]
        assert report["image_id"] == "fx01_img"
        labels = set(report["explanation"])
        assert classify_fixture["expected"]["predicted"] in labels

    def test_unknown_id_exits_1(self, classify_fixture):
        code = run_cli(
            "classify", "no_such_image",
            "--descriptions", str(classify_fixture["descriptions"]),
            "--embeddings", str(classify_fixture["embeddings"]),
            "--crops", "8",
        )
        assert code == 1


class TestTheorem:
    def test_probe_json(self, tmp_path):
        out = tmp_path / "probe.json"
        code = run_cli(
            "theorem", "--trials", "50", "--dim", "8", "--cos2-max", "0.9",
            "--seed", "3", "--out", str(out),
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["trials"] == 50
        assert payload["max_cos"] < 1 - 1e-9
        assert set(payload) == {"trials", "d_in", "d_out", "cos2_max", "max_cos", "worst_seed"}


class TestBench:
    def test_bench_csv_on_file(self, tmp_path):
        from PIL import Image

        rng = np.random.default_rng(0)
        img_path = tmp_path / "sample.png"
        Image.fromarray(rng.integers(0, 256, (48, 48, 3), dtype=np.uint8)).save(img_path)
        out = tmp_path / "bench.csv"
        code = run_cli("bench", str(img_path), "--out", str(out), "--seed", "1")
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "N,crop_preprocess_s,encode_s,score_s,total_s"
        assert len(lines) == 12


class TestGenFixtures:
    def test_rerun_overwrites_identically(self, tmp_path, capsys):
        out_dir = tmp_path / "fx"
        assert run_cli("gen-fixtures", "--out", str(out_dir), "--seed", "7") == 0
        first = {
            p.relative_to(out_dir): p.read_bytes()
            for p in sorted(out_dir.rglob("*")) if p.is_file()
        }
        assert run_cli("gen-fixtures", "--out", str(out_dir), "--seed", "7") == 0
        second = {
            p.relative_to(out_dir): p.read_bytes()
            for p in sorted(out_dir.rglob("*")) if p.is_file()
        }
        assert first == second
        assert len(first) >= 9

    def test_unwritable_target_exits_2(self, tmp_path):
        blocker = tmp_path / "file.txt"
        blocker.write_text("i am a file")
        code = run_cli("gen-fixtures", "--out", str(blocker / "sub"))
        assert code == 2


class TestCacheCommand:
    def test_cache_then_eval(self, bench_paths, tmp_path, capsys):
        cache = tmp_path / "aug.wem1"
        code = run_cli(
            "cache",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", bench_paths["embeddings"],
            "--crops", "8", "--out", str(cache),
        )
        assert code == 0
        assert cache.exists()
        out = tmp_path / "cached.json"
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", bench_paths["embeddings"],
            "--agg", "wca", "--crops", "8",
            "--cache", str(cache),
            "--out", str(out),
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["top1"] > 0.9


class TestSidecars:
    def test_mismatched_sidecar_exits_1(self, bench_paths, tmp_path):
        import shutil

        emb = tmp_path / "e.wem1"
        shutil.copy(bench_paths["embeddings"], emb)
        (tmp_path / "e.wem1.meta.json").write_text(
            json.dumps({"model": "x", "seed": 99, "alpha": 0.5, "beta": 0.9, "N": 8})
        )
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", str(emb),
            "--crops", "8", "--seed", "7",
        )
        assert code == 1

    def test_matching_sidecar_accepted(self, bench_paths, tmp_path):
        import shutil

        emb = tmp_path / "e.wem1"
        shutil.copy(bench_paths["embeddings"], emb)
        (tmp_path / "e.wem1.meta.json").write_text(
            json.dumps({"model": "x", "seed": 7, "alpha": 0.5, "beta": 0.9, "N": 8})
        )
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", str(emb),
            "--crops", "8", "--seed", "7",
            "--out", str(tmp_path / "r.json"),
        )
        assert code == 0


class TestPixelBackendCli:
    @pytest.fixture()
    def pixel_dataset(self, tmp_path):
        from PIL import Image

        rng = np.random.default_rng(21)
        records = []
        for label, tint in (("meadow", (60, 170, 70)), ("ember", (200, 70, 30))):
            for j in range(2):
                name = f"{label}{j}.png"
                px = (np.array(tint)[None, None, :] + rng.integers(0, 50, (40, 40, 3)))
                Image.fromarray(px.clip(0, 255).astype(np.uint8)).save(tmp_path / name)
                records.append({"id": name, "label": label})
        manifest = tmp_path / "manifest.jsonl"
        manifest.write_text("\n".join(json.dumps(r) for r in records) + "\n")
        descriptions = tmp_path / "descriptions.json"
        descriptions.write_text(json.dumps({
            "meadow": ["an open grassy field", "green blades in sunlight"],
            "ember": ["glowing orange coals", "smoldering red embers"],
        }))
        return {"manifest": manifest, "descriptions": descriptions}

    def test_eval_from_pixels_resolves_manifest_root(self, pixel_dataset, tmp_path):
        out = tmp_path / "pixel_eval.json"
        code = run_cli(
            "eval",
            "--manifest", str(pixel_dataset["manifest"]),
            "--descriptions", str(pixel_dataset["descriptions"]),
            "--model", "demo",
            "--crops", "4", "--seed", "2", "--jobs", "2",
            "--out", str(out),
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["n"] == 4
        assert 0.0 <= report["top1"] <= 1.0

    def test_classify_alt_prompt_style_from_pixels(self, pixel_dataset, tmp_path):
        out = tmp_path / "alt.json"
        code = run_cli(
            "classify", str(pixel_dataset["manifest"].parent / "meadow0.png"),
            "--descriptions", str(pixel_dataset["descriptions"]),
            "--model", "demo",
            "--crops", "3", "--seed", "2",
            "--prompt-style", "greyscale",
            "--out", str(out),
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert set(report["per_class_scores"]) == {"meadow", "ember"}

    def test_prompt_style_rejected_with_store(self, bench_paths):
        code = run_cli(
            "eval",
            "--manifest", bench_paths["manifest"],
            "--descriptions", bench_paths["descriptions"],
            "--embeddings", bench_paths["embeddings"],
            "--crops", "8", "--prompt-style", "blur",
        )
        assert code == 1


class TestMergedStores:
    def test_embeddings_flag_repeats_and_merges(self, bench_fixture, tmp_path):
        from wca.wem import PrecomputedStore, read_embedding_file, write_embedding_file

        full = read_embedding_file(bench_fixture["embeddings"])
        ids = sorted(full.entries)
        half_a = PrecomputedStore(dim=full.dim)
        half_b = PrecomputedStore(dim=full.dim)
        for index, entry_id in enumerate(ids):
            (half_a if index % 2 == 0 else half_b).add(entry_id, full.entries[entry_id])
        path_a = tmp_path / "a.wem1"
        path_b = tmp_path / "b.wem1"
        write_embedding_file(half_a, path_a)
        write_embedding_file(half_b, path_b)

        out = tmp_path / "merged.json"
        code = run_cli(
            "eval",
            "--manifest", str(bench_fixture["manifest"]),
            "--descriptions", str(bench_fixture["descriptions"]),
            "--embeddings", str(path_a),
            "--embeddings", str(path_b),
            "--agg", "wca", "--crops", "8", "--seed", "7",
            "--out", str(out),
        )
        assert code == 0
        assert json.loads(out.read_text())["top1"] == pytest.approx(
            bench_fixture["expected"]["accuracies"]["wca"]
        )

    def test_overlapping_stores_rejected(self, bench_fixture, tmp_path):
        code = run_cli(
            "eval",
            "--manifest", str(bench_fixture["manifest"]),
            "--descriptions", str(bench_fixture["descriptions"]),
            "--embeddings", str(bench_fixture["embeddings"]),
            "--embeddings", str(bench_fixture["embeddings"]),
            "--crops", "8",
        )
        assert code == 2

import json

import pytest

from dis2vec.cli import DESK_GRID, main, select_best, tally
from dis2vec.synthgen import SyntheticSpec, generate
from dis2vec.trainer import TrainingConfig, grid_configs


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out-dir", str(out), "--sentences", "3000", "--diseases", "5",
                 "--fillers", "200", "--seed", "2"]) == 0
    return out


def run(*argv):
    return main([str(a) for a in argv])


def test_synth_matches_library(synth_dir):
    corpus = generate(SyntheticSpec(n_sentences=3000, n_diseases=5, n_filler_words=200, seed=2))
    assert (synth_dir / "corpus.txt").read_text() == corpus.text


def test_train_sgns_header(synth_dir, tmp_path):
    out = tmp_path / "e.txt"
    assert run("train", synth_dir / "corpus.txt", "--mode", "sgns", "--dim", 32, "--window", 5, "--neg", 5,
               "--alpha", 0.75, "--seed", 7, "--epochs", 1, "--out", out) == 0
    n = len(out.read_text().splitlines()) - 1
    assert out.read_text().splitlines()[0] == f"{n} 32"


def test_train_manifest(synth_dir, tmp_path):
    out = tmp_path / "e.txt"
    assert run("train", synth_dir / "corpus.txt", "--vocab", synth_dir / "vocabulary.json",
               "--annotations", synth_dir / "annotations.json", "--mode", "dis2vec_combined",
               "--pi-s", 0.7, "--pi-o", 0.7, "--dim", 16, "--epochs", 2, "--subsample", "none", "--out", out) == 0
    manifest = json.loads((tmp_path / "e.txt.manifest.json").read_text())
    pc = manifest["pair_counts"]
    assert pc["dd"] + pc["nn"] + pc["mixed"] == pc["total"] > 0
    assert sum(r["pairs_dd"] + r["pairs_nn"] + r["pairs_mixed"] for r in manifest["epochs"]) == pc["total"]
    assert manifest["config"]["subsample_t"] is None and manifest["config"]["pi_o"] == 0.7
    assert manifest["config"]["lr_min"] == pytest.approx(2.5e-6)
    assert len(manifest["inputs"]["corpus"]["sha256"]) == 64
    assert 0 <= manifest["final_accuracies"]["overall"] <= 1
    log = (tmp_path / "e.txt.loss.tsv").read_text().splitlines()
    assert log[0].split("\t")[:3] == ["epoch", "total", "loss_dd"] and len(log) == 3


def test_config_precedence(synth_dir, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dim": 12, "window": 3, "epochs": 1}))
    out = tmp_path / "e.txt"
    assert run("train", synth_dir / "corpus.txt", "--config", cfg, "--window", 2, "--out", out) == 0
    resolved = json.loads((tmp_path / "e.txt.manifest.json").read_text())["config"]
    assert (resolved["dim"], resolved["window"], resolved["negative"]) == (12, 2, 5)


def test_replay_byte_identical(synth_dir, tmp_path):
    out = tmp_path / "e.txt"
    assert run("train", synth_dir / "corpus.txt", "--vocab", synth_dir / "vocabulary.json",
               "--mode", "dis2vec_objective", "--dim", 8, "--epochs", 2, "--subsample", "1e-3", "--out", out) == 0
    assert run("replay", tmp_path / "e.txt.manifest.json", "--out", tmp_path / "r.txt") == 0
    assert (tmp_path / "r.txt").read_bytes() == out.read_bytes()


def test_replay_detects_changed_input(tmp_path):
    corpus = tmp_path / "c.txt"
    corpus.write_text("a b c a b c a b c a b c a b c .\n")
    assert run("train", corpus, "--dim", 4, "--epochs", 1, "--subsample", "none", "--out", tmp_path / "e.txt") == 0
    corpus.write_text("a b c a b c a b c a b c a b c a .\n")
    assert run("replay", tmp_path / "e.txt.manifest.json") == 2


def test_taxonomy_command(synth_dir, tmp_path, capsys):
    out = tmp_path / "e.txt"
    run("train", synth_dir / "corpus.txt", "--dim", 8, "--epochs", 1, "--out", out)
    capsys.readouterr()
    assert run("taxonomy", out, "--vocab", synth_dir / "vocabulary.json",
               "--annotations", synth_dir / "annotations.json", "--out", tmp_path / "rep") == 0
    assert "overall" in capsys.readouterr().out
    doc = json.loads((tmp_path / "rep.taxonomy.json").read_text())
    assert len(doc["entries"]) == 20
    assert (tmp_path / "rep.taxonomy.tsv").read_text().startswith("disease\tcategory\taccuracy\tclass\n")


def test_usage_errors(synth_dir, tmp_path, capsys):
    assert run("train", synth_dir / "corpus.txt", "--mode", "dis2vec_combined", "--out", tmp_path / "e.txt") == 1
    with pytest.raises(SystemExit) as exc:
        main(["train", "--dim", "3"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["train", "x", "--out", "y", "--subsample", "-1"])
    assert exc.value.code == 1
    assert run("train", synth_dir / "corpus.txt", "--pi-s", 2, "--out", tmp_path / "e.txt") == 1


def test_data_errors(tmp_path):
    assert run("train", tmp_path / "missing.txt", "--out", tmp_path / "e.txt") == 2
    bad_vocab = tmp_path / "v.json"
    bad_vocab.write_text('{"terms": [{"term": "x", "categories": ["weather"]}]}')
    (tmp_path / "c.txt").write_text("x y .\n" * 10)
    assert run("train", tmp_path / "c.txt", "--vocab", bad_vocab, "--mode", "dis2vec_sample",
               "--out", tmp_path / "e.txt") == 2
    assert run("train", tmp_path / "c.txt", "--min-count", 50, "--out", tmp_path / "e.txt") == 2


def test_numeric_failure(synth_dir, tmp_path):
    assert run("train", synth_dir / "corpus.txt", "--lr", 1e30, "--dim", 4, "--subsample", 0,
               "--out", tmp_path / "e.txt") == 3


def test_sweep_singleton_and_tally(synth_dir, tmp_path):
    grid = tmp_path / "g.json"
    grid.write_text(json.dumps({"dim": [8], "window": [3], "negative": [2], "alpha": [0.75],
                                "pi_s": [0.5], "pi_o": [0.5]}))
    assert run("sweep", synth_dir / "corpus.txt", "--vocab", synth_dir / "vocabulary.json",
               "--annotations", synth_dir / "annotations.json", "--grid", grid, "--epochs", 1,
               "--out", tmp_path / "sw") == 0
    best = json.loads((tmp_path / "sw" / "best.json").read_text())
    for entry in best["best"].values():
        assert entry["config"]["dim"] == 8 and entry["config"]["pi_o"] == 0.5
    assert best["tally"]["dis2vec_combined"]["window"] == {"3": 4}
    assert len((tmp_path / "sw" / "sweep.tsv").read_text().splitlines()) == 2


def test_select_best_never_picks_dominated():
    good, bad = TrainingConfig(dim=8), TrainingConfig(dim=16)
    cats = ["symptoms", "exposures"]
    results = [(bad, {"symptoms": 0.2, "exposures": 0.1}, 0.15), (good, {"symptoms": 0.3, "exposures": 0.4}, 0.35)]
    best = select_best(results, cats)
    assert all(cfg is good for cfg, _ in best.values())
    counts = tally(best, {"dim": [8, 16]})
    assert counts["sgns"]["dim"] == {8: 2, 16: 0}


def test_default_grid_size():
    assert DESK_GRID["dim"] == (32, 64)
    assert len(list(grid_configs(TrainingConfig(), DESK_GRID))) == 324

import json

import pytest

from outfitcomplete.cli import dispatch


def run(*argv):
    return dispatch(list(argv))


TRAIN_FLAGS = ("--embedding-dim", "8", "--hidden-dim", "12",
               "--epochs", "3", "--patience", "3", "--seed", "0")


def build_pipeline(root):
    """gen -> filter -> annotate -> prepare -> mine -> train, all via the CLI."""
    posts = root / "posts.jsonl"
    kept = root / "kept.jsonl"
    structured = root / "structured.jsonl"
    corpus = root / "corpus"
    lexicon = root / "lexicon.json"
    model = root / "model.ckpt"
    assert run("gen", "--n", "150", "--seed", "3", "--out", str(posts),
               "--quiet") == 0
    assert run("filter", "--in", str(posts), "--out", str(kept),
               "--percentile", "50", "--quiet") == 0
    assert run("annotate", "--in", str(kept), "--out", str(structured),
               "--quiet") == 0
    assert run("prepare", "--in", str(structured), "--out", str(corpus),
               "--seed", "0", "--quiet") == 0
    assert run("mine", "--corpus", str(corpus), "--min-support", "2",
               "--granularity", "apparel", "--out", str(lexicon),
               "--quiet") == 0
    assert run("train", "--corpus", str(corpus), "--out", str(model),
               *TRAIN_FLAGS, "--quiet") == 0
    return {"posts": posts, "kept": kept, "structured": structured,
            "corpus": corpus, "lexicon": lexicon, "model": model}


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    return build_pipeline(root)


def test_help_exits_zero(capsys):
    assert run("--help") == 0
    assert "outfitcomplete" in capsys.readouterr().out


def test_missing_required_flag_exits_one(capsys):
    assert run("gen") == 1
    assert "error" in capsys.readouterr().err


def test_unknown_subcommand_exits_one():
    assert run("frobnicate") == 1


def test_missing_input_file_exits_two(tmp_path, capsys):
    assert run("annotate", "--in", str(tmp_path / "nope.jsonl"),
               "--out", str(tmp_path / "out.jsonl")) == 2
    assert "error" in capsys.readouterr().err


def test_pipeline_artifacts_exist(pipeline):
    for key in ("posts", "kept", "structured", "lexicon", "model"):
        assert pipeline[key].exists(), key
    assert (pipeline["model"].parent / "model.ckpt.json").exists()
    for name in ("train.jsonl", "test.jsonl", "validate.jsonl", "vocab.json",
                 "structured_train.jsonl", "structured_test.jsonl",
                 "structured_validate.jsonl", "manifest.json"):
        assert (pipeline["corpus"] / name).exists(), name


def test_manifests_written(pipeline):
    manifest = json.loads(
        (pipeline["model"].parent / "model.ckpt.manifest.json").read_text())
    assert manifest["subcommand"] == "train"
    assert manifest["seed"] == 0
    assert "--epochs" in manifest["argv"]
    assert manifest["config"]["model"]["embedding_dim"] == 8


def test_eval_model_and_lexicon(pipeline, tmp_path):
    report = tmp_path / "model_report.json"
    assert run("eval", "--model", str(pipeline["model"]),
               "--test", str(pipeline["corpus"]), "--k", "3",
               "--report", str(report), "--quiet") == 0
    data = json.loads(report.read_text())
    assert data["method"] == "model"
    assert set(data["jss_at_k"]) == {"1", "2", "3"}

    lex_report = tmp_path / "lexicon_report.json"
    assert run("eval", "--lexicon", str(pipeline["lexicon"]),
               "--test", str(pipeline["corpus"]), "--granularity", "apparel",
               "--k", "3", "--report", str(lex_report), "--quiet") == 0
    assert json.loads(lex_report.read_text())["method"] == "apriori"


def test_eval_requires_exactly_one_source(pipeline, tmp_path):
    assert run("eval", "--test", str(pipeline["corpus"]),
               "--report", str(tmp_path / "r.json")) == 2
    assert run("eval", "--model", str(pipeline["model"]),
               "--lexicon", str(pipeline["lexicon"]),
               "--test", str(pipeline["corpus"]),
               "--report", str(tmp_path / "r.json")) == 2


def test_retrieval_report(pipeline, tmp_path):
    report = tmp_path / "retrieval.json"
    assert run("retrieval", "--model", str(pipeline["model"]),
               "--test", str(pipeline["corpus"]), "--k-neg", "2",
               "--seed", "0", "--report", str(report), "--quiet") == 0
    data = json.loads(report.read_text())
    assert data["k_neg"] == 2
    assert 0.0 < data["mrr"] <= 1.0


def test_recommend_prints_ranked_candidates(pipeline, capsys):
    assert run("recommend", "--model", str(pipeline["model"]),
               "--query", "blue jeans", "--k", "3") == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("1\t")


def test_recommend_unrecognized_query_exits_two(pipeline, capsys):
    assert run("recommend", "--model", str(pipeline["model"]),
               "--query", "lorem ipsum") == 2
    assert "error" in capsys.readouterr().err


def test_config_file_and_flag_precedence(pipeline, tmp_path):
    cfg = tmp_path / "train.json"
    cfg.write_text(json.dumps({"embedding-dim": 8, "hidden-dim": 12,
                               "epochs": 2, "patience": 2}))
    out = tmp_path / "cfg_model.ckpt"
    assert run("train", "--corpus", str(pipeline["corpus"]),
               "--config", str(cfg), "--epochs", "1",
               "--out", str(out), "--quiet") == 0
    manifest = json.loads(
        (tmp_path / "cfg_model.ckpt.manifest.json").read_text())
    # flag wins over config file; config file wins over default
    assert manifest["config"]["train"]["epochs"] == 1
    assert manifest["config"]["model"]["embedding_dim"] == 8


def test_rerun_is_byte_identical(pipeline, tmp_path):
    """prepare + train + eval rerun with the same inputs and seed."""
    manifest = json.loads(
        (pipeline["corpus"] / "manifest.json").read_text())
    corpus2 = tmp_path / "corpus2"
    assert run("prepare", "--in", str(pipeline["structured"]),
               "--out", str(corpus2), "--seed", str(manifest["seed"]),
               "--quiet") == 0
    for name in ("train.jsonl", "test.jsonl", "validate.jsonl", "vocab.json"):
        assert (corpus2 / name).read_bytes() == \
            (pipeline["corpus"] / name).read_bytes(), name

    model2 = tmp_path / "model2.ckpt"
    assert run("train", "--corpus", str(corpus2), "--out", str(model2),
               *TRAIN_FLAGS, "--quiet") == 0
    assert model2.read_bytes() == pipeline["model"].read_bytes()

    reports = []
    for i, (model, corpus) in enumerate([(pipeline["model"], pipeline["corpus"]),
                                         (model2, corpus2)]):
        report = tmp_path / f"report{i}.json"
        assert run("eval", "--model", str(model), "--test", str(corpus),
                   "--k", "2", "--report", str(report), "--quiet") == 0
        reports.append(report.read_text())
    # corpus_id differs by path; compare the metric payloads
    a, b = (json.loads(r) for r in reports)
    assert a["jss_at_k"] == b["jss_at_k"]

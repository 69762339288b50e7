import json
import subprocess
import sys

import pytest

from treecomment.cli import run
from treecomment.corpus import write_pairs
from treecomment.synthetic import classification_corpus, split_classification, toy_pairs
from treecomment.tree import node_to_dict


def _labeled(path, examples):
    with open(path, "w") as fh:
        for ex in examples:
            fh.write(json.dumps({"tree": node_to_dict(ex.tree.root), "label": ex.label}) + "\n")


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    train, test = split_classification(classification_corpus(4, seed=0), 1)
    _labeled(d / "train.jsonl", train)
    _labeled(d / "test.jsonl", test)
    write_pairs(toy_pairs()[:6], d / "pairs.jsonl")
    (d / "code.java").write_text("int s = 0; for (int v : xs) { s += v; } return s;")
    return d


def _run(argv, capsys):
    code = run([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def models(work):
    enc = work / "enc.ckpt"
    gen = work / "gen.ckpt"
    assert run(["train-encoder", "--train", str(work / "train.jsonl"), "--out", str(enc), "--d", "8",
                "--epochs", "2"]) == 0
    assert run(["train-gen", "--pairs", str(work / "pairs.jsonl"), "--encoder", str(enc), "--out", str(gen),
                "--epochs", "3", "--hidden", "6", "--embed", "6", "--min-freq", "1"]) == 0
    return enc, gen


def test_split_ident(capsys):
    assert _run(["split-ident", "buildDataDictionary"], capsys)[:2] == (0, "build data dictionary\n")
    assert _run(["split-ident", "dm", "--context", "Matrix DoubleMatrix confusionMatrix"], capsys)[1] == \
        "double matrix\n"


def test_rouge_identical_files(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("returns the sum of values\nadds two numbers\n")
    code, out, _ = _run(["rouge", "--hyp", tmp_path / "a.txt", "--ref", tmp_path / "a.txt"], capsys)
    assert code == 0 and json.loads(out)["f1"] == 1.0


def test_rouge_length_mismatch(tmp_path, capsys):
    (tmp_path / "a.txt").write_text("a b\n")
    (tmp_path / "b.txt").write_text("a b\nc d\n")
    assert _run(["rouge", "--hyp", tmp_path / "a.txt", "--ref", tmp_path / "b.txt"], capsys)[0] == 1


def test_classify_reports_metrics(work, models, capsys):
    before = (work / "test.jsonl").read_bytes()
    code, out, _ = _run(["classify", "--encoder", models[0], "--test", work / "test.jsonl"], capsys)
    doc = json.loads(out)
    assert code == 0 and set(doc) == {"purity", "f1", "accuracy", "assignment"}
    assert (work / "test.jsonl").read_bytes() == before


def test_generate_prints_one_line(work, models, capsys):
    code, out, _ = _run(["generate", "--model", models[1], "--code", work / "code.java", "--beam", "3",
                         "--alpha", "0.5", "--max-len", "6"], capsys)
    assert code == 0 and out.count("\n") == 1
    assert len(out.split()) <= 6


def test_tune_beam_small_grid(work, models, capsys):
    code, out, _ = _run(["tune-beam", "--model", models[1], "--pairs", work / "pairs.jsonl", "--beams", "1,2",
                         "--alphas", "0,1", "--max-len", "5", "--table"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["table"]) == 4 and doc["beam"] in (1, 2)


def test_split_writes_three_files(work, capsys):
    code, out, _ = _run(["split", "--pairs", work / "pairs.jsonl", "--seed", "2", "--out-dir", work / "sp"],
                        capsys)
    assert code == 0 and json.loads(out) == {"train": 4, "valid": 1, "test": 1}
    assert sorted(p.name for p in (work / "sp").iterdir()) == ["pairs.test.jsonl", "pairs.train.jsonl",
                                                               "pairs.valid.jsonl"]


def test_extract(tmp_path, capsys):
    (tmp_path / "repo").mkdir()
    (tmp_path / "repo" / "A.java").write_text(
        "class A { /** Returns the total number of items currently stored in this container. */ "
        "int size() { return n; } }")
    code, out, _ = _run(["extract", "--repo", tmp_path / "repo", "--out", tmp_path / "p.jsonl"], capsys)
    assert code == 0 and json.loads(out)["pairs"] == 1


def test_truncated_checkpoint_exits_2(work, models, tmp_path, capsys):
    text = models[1].read_text()
    (tmp_path / "bad.ckpt").write_text(text[: len(text) // 2])
    code, _, err = _run(["generate", "--model", tmp_path / "bad.ckpt", "--code", work / "code.java"], capsys)
    assert code == 2 and "tensors" in err


def test_unknown_config_key_exits_1(work, tmp_path, capsys):
    (tmp_path / "c.json").write_text('{"sede": 3}')
    code, _, err = _run(["gradcheck", "--config", tmp_path / "c.json"], capsys)
    assert code == 1 and "sede" in err


def test_config_file_is_used(tmp_path, capsys):
    (tmp_path / "c.json").write_text('{"instances": 2, "seed": 5}')
    code, out, _ = _run(["gradcheck", "--config", tmp_path / "c.json"], capsys)
    assert code == 0 and all(s["instances"] == 2 for s in json.loads(out)["suites"])


@pytest.mark.parametrize("argv", [[], ["bogus"], ["rouge", "--hyp", "x"], ["tune-beam", "--model", "m",
                                                                          "--pairs", "p", "--beams", "a,b"]])
def test_usage_errors_exit_1(argv, capsys):
    assert _run(argv, capsys)[0] == 1


def test_missing_input_exits_1(tmp_path, capsys):
    code, _, err = _run(["rouge", "--hyp", tmp_path / "no.txt", "--ref", tmp_path / "no.txt"], capsys)
    assert code == 1 and err.startswith("error:")


def test_gradcheck_seed_7(capsys):
    code, out, _ = _run(["gradcheck", "--seed", "7"], capsys)
    doc = json.loads(out)
    assert code == 0 and all(s["passed"] for s in doc["suites"])
    assert all(s["instances"] == 50 for s in doc["suites"])


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "treecomment.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout

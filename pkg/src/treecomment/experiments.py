"""Desk-scale experiments shared by the acceptance tests and the demo scripts.

Each function is seeded and returns plain numbers so callers can print,
plot or assert on them.
"""
from __future__ import annotations

import contextlib
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify import LabeledExample, classify, evaluate_assignment, train_classifier
from .corpus import split_corpus, write_pairs
from .decoder import greedy_decode, strip_sentinels, train_generator
from .encoder import EncoderConfig, TreeEncoder
from .rouge import rouge_n
from .synthetic import classification_corpus, split_classification, structured_corpus, toy_pairs
from .tree import node_to_dict


@dataclass
class OverfitResult:
    mean_f1: float
    exact: int
    total: int
    final_loss: float


def overfit_toy(seed: int = 0, epochs: int = 800, lr: float = 0.1, d: int = 64, hidden: int = 64,
                embed: int = 64) -> OverfitResult:
    """Fit Code-GRU on the twenty toy pairs and score it on the same pairs.

    The encoder is randomly initialized and frozen; the decoder has to
    memorize every comment from the code vector alone.
    """
    pairs = toy_pairs()
    trees = [p.tree for p in pairs]
    encoder = TreeEncoder.fit_vocab(trees, EncoderConfig("avg", d), np.random.default_rng(seed))
    res = train_generator([(p.tree, p.comment) for p in pairs], encoder, "gru", epochs=epochs, lr=lr,
                          seed=seed, hidden=hidden, embed=embed, min_freq=1)
    outs = [strip_sentinels(greedy_decode(res.decoder, encoder.vector(t))) for t in trees]
    f1 = [rouge_n(o, p.comment).f1 for o, p in zip(outs, pairs)]
    exact = sum(o == p.comment for o, p in zip(outs, pairs))
    return OverfitResult(float(np.mean(f1)), exact, len(pairs), res.losses[-1])


@dataclass
class ClassificationResult:
    tree_accuracy: float
    bag_accuracy: float
    n_train: int
    n_test: int


def classify_templates(seed: int = 0, tree_model: str = "avg", bag_model: str = "lea", d: int = 64,
                       epochs: int = 20, lr: float = 0.05) -> ClassificationResult:
    """Three program classes with randomized identifiers, 30 train / 9 test."""
    train, test = split_classification(classification_corpus(13, seed), 3)
    gold = [ex.label for ex in test]
    acc = {}
    for model in (tree_model, bag_model):
        res = train_classifier(train, EncoderConfig(model, d), epochs=epochs, lr=lr, seed=seed, k=3)
        pred = classify(res.encoder, res.head, [ex.tree for ex in test])
        acc[model] = evaluate_assignment(pred, gold, 3).accuracy
    return ClassificationResult(acc[tree_model], acc[bag_model], len(train), len(test))


@dataclass
class OrderingResult:
    code_gru: float
    basic_rnn: float
    bag_gru: float
    n_test: int

    @property
    def ordered(self) -> bool:
        return self.code_gru >= self.basic_rnn >= self.bag_gru


def generation_ordering(seed: int = 0, d: int = 64, encoder_epochs: int = 20, epochs: int = 50,
                        lr: float = 0.1, hidden: int = 32, embed: int = 32) -> OrderingResult:
    """Held-out Rouge-2 of three generators on the 60-pair structured corpus.

    Encoders are first trained to recognize the template, standing in for
    the supervised encoder pretraining; then each decoder is fit with its
    encoder frozen.
    """
    pairs = structured_corpus(10, seed)
    train, _, test = split_corpus(pairs, (0.8, 0.1, 0.1), seed)
    labeled = [LabeledExample(p.tree, p.meta["template"]) for p in train]
    encoders = {m: train_classifier(labeled, EncoderConfig(m, d), epochs=encoder_epochs, seed=seed, k=6).encoder
                for m in ("avg", "lea")}

    def score(encoder, cell):
        gen = train_generator([(p.tree, p.comment) for p in train], encoder, cell, epochs=epochs, lr=lr,
                              seed=seed, hidden=hidden, embed=embed, min_freq=1).decoder
        outs = [strip_sentinels(greedy_decode(gen, encoder.vector(p.tree))) for p in test]
        return float(np.mean([rouge_n(o, p.comment).f1 for o, p in zip(outs, test)]))

    return OrderingResult(score(encoders["avg"], "gru"), score(encoders["avg"], "basic"),
                          score(encoders["lea"], "gru"), len(test))


def toy_pipeline(workdir: str | Path, seed: int = 0, encoder_epochs: int = 5, epochs: int = 40) -> dict:
    """Run the CLI end to end in ``workdir``; returns every artifact as bytes.

    The steps are: write data, train an encoder, train a generator, generate
    one comment per toy method, score them.
    """
    from .cli import run

    work = Path(workdir)
    work.mkdir(parents=True, exist_ok=True)
    train, _ = split_classification(classification_corpus(4, seed), 1)
    with open(work / "labeled.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for ex in train:
            fh.write(json.dumps({"tree": node_to_dict(ex.tree.root), "label": ex.label}, sort_keys=True) + "\n")
    pairs = toy_pairs()
    write_pairs(pairs, work / "pairs.jsonl")
    s = str(seed)
    steps = [
        ["train-encoder", "--train", work / "labeled.jsonl", "--out", work / "encoder.ckpt", "--d", "16",
         "--epochs", str(encoder_epochs), "--seed", s],
        ["train-gen", "--pairs", work / "pairs.jsonl", "--encoder", work / "encoder.ckpt",
         "--out", work / "generator.ckpt", "--epochs", str(epochs), "--hidden", "16", "--embed", "16",
         "--min-freq", "1", "--lr", "0.1", "--seed", s],
    ]
    logs = []
    for argv in steps:
        logs.append(_run_cli(run, argv))
    hyps = []
    for i, p in enumerate(pairs):
        tree_path = work / f"method{i}.json"
        tree_path.write_text(json.dumps({"format": "codetree/1", "root": node_to_dict(p.tree.root)}))
        hyps.append(_run_cli(run, ["generate", "--model", work / "generator.ckpt", "--code", tree_path,
                                   "--beam", "3", "--alpha", "0.6"]))
    (work / "hyp.txt").write_text("".join(hyps))
    (work / "ref.txt").write_text("".join(" ".join(p.comment) + "\n" for p in pairs))
    logs.append(_run_cli(run, ["rouge", "--hyp", work / "hyp.txt", "--ref", work / "ref.txt"]))
    (work / "log.txt").write_text("".join(_relative(line, work) for line in logs))
    return {p.name: p.read_bytes() for p in sorted(work.iterdir()) if p.is_file()}


def _run_cli(run, argv) -> str:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = run([str(a) for a in argv])
    if code != 0:
        raise RuntimeError(f"treecomment {argv[0]} exited with {code}")
    return buf.getvalue()


def _relative(text: str, work: Path) -> str:
    # output paths differ between work directories; the rest must not
    return text.replace(str(work), "<work>")

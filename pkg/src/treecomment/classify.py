"""Softmax classification over code vectors and best-assignment evaluation."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .encoder import CodeVector, EncoderConfig, TreeEncoder
from .numeric import AdaGrad, DEFAULT_LR, DimensionError, cross_entropy, softmax, uniform_init
from .tree import ParseTree

log = logging.getLogger(__name__)

BRUTE_FORCE_MAX_K = 8


@dataclass
class ClassifierHead:
    W_s: np.ndarray  # k x d
    b_s: np.ndarray  # k

    def __post_init__(self):
        k = self.b_s.shape[0]
        if k < 2 or self.W_s.ndim != 2 or self.W_s.shape[0] != k:
            raise DimensionError(f"head needs k>=2 and W_s of shape (k, d); got {self.W_s.shape}, k={k}")

    @property
    def k(self) -> int:
        return self.b_s.shape[0]

    def tensors(self) -> dict[str, np.ndarray]:
        return {"W_s": self.W_s, "b_s": self.b_s}

    @classmethod
    def initialize(cls, k: int, d: int, rng: np.random.Generator) -> "ClassifierHead":
        return cls(uniform_init(rng, (k, d)), uniform_init(rng, (k,)))


@dataclass
class LabeledExample:
    tree: ParseTree
    label: int


def predict(head: ClassifierHead, v) -> np.ndarray:
    v = v.v if isinstance(v, CodeVector) else np.asarray(v, dtype=np.float64)
    if v.shape != (head.W_s.shape[1],):
        raise DimensionError(f"vector has shape {v.shape}, head expects ({head.W_s.shape[1]},)")
    return softmax(head.W_s @ v + head.b_s)


def head_loss_and_grads(head: ClassifierHead, v: np.ndarray, label: int):
    """Cross-entropy loss, head gradients and the gradient w.r.t. the input vector."""
    p = predict(head, v)
    loss = cross_entropy(p, label)
    dlogits = p.copy()
    dlogits[label] -= 1.0
    grads = {"W_s": np.outer(dlogits, v), "b_s": dlogits}
    return loss, grads, head.W_s.T @ dlogits


def example_loss_and_grads(encoder: TreeEncoder, head: ClassifierHead, prepared, label: int):
    v, ctx = encoder.forward(prepared)
    loss, hgrads, dv = head_loss_and_grads(head, v, label)
    egrads = encoder.backward(ctx, dv)
    return loss, egrads, hgrads


@dataclass
class TrainResult:
    encoder: TreeEncoder
    head: ClassifierHead
    losses: list[float]


def train_classifier(data: Sequence[LabeledExample], config: EncoderConfig, epochs: int = 20,
                     lr: float = DEFAULT_LR, seed: int = 0, k: int | None = None) -> TrainResult:
    """Jointly fit encoder and softmax head with per-example AdaGrad updates."""
    if not data:
        raise ValueError("no training examples")
    labels = [ex.label for ex in data]
    k = k if k is not None else max(labels) + 1
    missing = sorted(set(range(k)) - set(labels))
    if missing:
        raise ValueError(f"classes without training examples: {missing}")
    rng = np.random.default_rng(seed)
    encoder = TreeEncoder.fit_vocab([ex.tree for ex in data], config, rng)
    head = ClassifierHead.initialize(k, config.d, rng)
    prepared = [encoder.prepare(ex.tree) for ex in data]
    params = {**encoder.params.tensors(), **head.tensors()}
    opt = AdaGrad(params, lr)
    losses = []
    for epoch in range(epochs):
        total = 0.0
        for i in rng.permutation(len(data)):
            loss, eg, hg = example_loss_and_grads(encoder, head, prepared[i], labels[i])
            opt.step(params, {**eg, **hg})
            total += loss
        losses.append(total / len(data))
        log.debug("epoch %d mean loss %.6f", epoch, losses[-1])
    return TrainResult(encoder, head, losses)


def classify(encoder: TreeEncoder, head: ClassifierHead, trees) -> list[int]:
    return [int(np.argmax(predict(head, encoder.vector(t)))) for t in trees]


# ---------------------------------------------------------------------------
# evaluation

@dataclass
class ClassMetrics:
    purity: float
    macro_f1: float
    accuracy: float
    assignment: list[int]  # predicted label -> gold label

    def to_dict(self) -> dict:
        return {"purity": self.purity, "f1": self.macro_f1, "accuracy": self.accuracy,
                "assignment": self.assignment}


def _confusion(pred, gold, k) -> np.ndarray:
    m = np.zeros((k, k), dtype=np.int64)  # rows: predicted, cols: gold
    for p, g in zip(pred, gold):
        m[p, g] += 1
    return m


def best_assignment(pred: Sequence[int], gold: Sequence[int], k: int) -> list[int]:
    """Label permutation maximizing the number of matches.

    Exhaustive over all k! permutations for small k; the Hungarian method
    (also exact) beyond that.
    """
    conf = _confusion(pred, gold, k)
    if k <= BRUTE_FORCE_MAX_K:
        best, best_hits = None, -1
        for perm in itertools.permutations(range(k)):
            hits = int(sum(conf[p, perm[p]] for p in range(k)))
            if hits > best_hits:
                best, best_hits = list(perm), hits
        return best
    rows, cols = linear_sum_assignment(-conf)
    perm = [0] * k
    for r, c in zip(rows, cols):
        perm[r] = int(c)
    return perm


def evaluate_assignment(predictions: Sequence[int], gold: Sequence[int], k: int) -> ClassMetrics:
    if len(predictions) != len(gold):
        raise ValueError(f"{len(predictions)} predictions for {len(gold)} gold labels")
    if not gold:
        raise ValueError("nothing to evaluate")
    for x in (*predictions, *gold):
        if not 0 <= x < k:
            raise ValueError(f"label {x} outside [0, {k})")
    n = len(gold)
    conf = _confusion(predictions, gold, k)
    purity = conf.max(axis=1).sum() / n
    perm = best_assignment(predictions, gold, k)
    mapped = [perm[p] for p in predictions]
    accuracy = sum(m == g for m, g in zip(mapped, gold)) / n
    f1s = []
    for c in sorted(set(gold) | set(mapped)):
        tp = sum(m == c and g == c for m, g in zip(mapped, gold))
        n_pred = sum(m == c for m in mapped)
        n_gold = sum(g == c for g in gold)
        if tp == 0:
            f1s.append(0.0)
        else:
            prec, rec = tp / n_pred, tp / n_gold
            f1s.append(2 * prec * rec / (prec + rec))
    return ClassMetrics(float(purity), float(np.mean(f1s)), float(accuracy), perm)

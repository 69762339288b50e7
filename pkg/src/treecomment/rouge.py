"""ROUGE-N between token sequences."""
from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f1: float

    def to_dict(self) -> dict:
        return asdict(self)


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int = 2) -> RougeScore:
    """Clipped n-gram overlap; ratios with an empty denominator are 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cand = ngrams([t.lower() for t in candidate], n)
    ref = ngrams([t.lower() for t in reference], n)
    overlap = sum(min(c, ref[g]) for g, c in cand.items())
    n_ref, n_cand = sum(ref.values()), sum(cand.values())
    recall = overlap / n_ref if n_ref else 0.0
    precision = overlap / n_cand if n_cand else 0.0
    f1 = 0.0 if recall + precision == 0 else 2 * recall * precision / (recall + precision)
    return RougeScore(recall, precision, f1)


def corpus_rouge(pairs: Iterable[tuple[Sequence[str], Sequence[str]]], n: int = 2) -> RougeScore:
    """Unweighted mean of per-pair scores over ``(candidate, reference)`` pairs."""
    scores = [rouge_n(c, r, n) for c, r in pairs]
    if not scores:
        raise ValueError("corpus_rouge needs at least one pair")
    k = len(scores)
    return RougeScore(sum(s.recall for s in scores) / k,
                      sum(s.precision for s in scores) / k,
                      sum(s.f1 for s in scores) / k)

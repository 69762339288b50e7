from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

START, END, UNK = "START", "END", "UNK"


class Vocab:
    """Token <-> id mapping with reserved entries at the front.

    Ordering is deterministic: reserved tokens, then by descending frequency,
    then lexicographically.
    """

    def __init__(self, tokens: Sequence[str], unk: str = UNK):
        if len(set(tokens)) != len(tokens):
            raise ValueError("duplicate tokens in vocabulary")
        if unk not in tokens:
            raise ValueError(f"vocabulary must contain {unk!r}")
        self.itos = list(tokens)
        self.stoi = {t: i for i, t in enumerate(self.itos)}
        self.unk = unk
        self.unk_id = self.stoi[unk]

    @classmethod
    def from_counts(cls, counts: Counter, reserved: Sequence[str], min_freq: int = 1,
                    unk: str = UNK) -> "Vocab":
        kept = sorted((w for w, c in counts.items() if c >= min_freq and w not in reserved),
                      key=lambda w: (-counts[w], w))
        return cls(list(reserved) + kept, unk)

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, token: str) -> bool:
        return token in self.stoi

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocab) and self.itos == other.itos and self.unk == other.unk

    def id(self, token: str) -> int:
        return self.stoi.get(token, self.unk_id)

    def ids(self, tokens: Iterable[str]) -> list[int]:
        return [self.id(t) for t in tokens]

    def tokens(self, ids: Iterable[int]) -> list[str]:
        return [self.itos[i] for i in ids]

    def to_dict(self) -> dict:
        return {"tokens": self.itos, "unk": self.unk}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocab":
        return cls(d["tokens"], d["unk"])


def comment_vocab(comments: Iterable[Sequence[str]], min_freq: int = 3) -> Vocab:
    """Comment-word vocabulary with START, END and UNK."""
    counts = Counter(w for c in comments for w in c)
    return Vocab.from_counts(counts, (START, END, UNK), min_freq)


def to_sequence(words: Sequence[str], vocab: Vocab) -> list[str]:
    """Bracket a comment with sentinels, substituting UNK for unknown words."""
    return [START] + [w if w in vocab and w not in (START, END) else UNK for w in words] + [END]

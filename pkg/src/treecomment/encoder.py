"""Recursive tree encoder (sum / average aggregation) and bag-of-words baselines.

Every internal node computes ``V = V_node + relu(W @ agg + b)`` where ``agg``
is the sum (``sum`` model) or mean (``avg`` model) of its children's vectors.
Leaves return their own embedding unchanged.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .identifiers import rewrite_identifiers, strip_identifiers
from .numeric import DimensionError, uniform_init
from .tree import WORD_KINDS, ParseNode, ParseTree, as_node
from .vocab import Vocab

TREE_MODELS = ("sum", "avg")
BAG_MODELS = ("les", "lea")
ENCODER_MODELS = TREE_MODELS + BAG_MODELS
UNK_KIND = UNK_WORD = "<unk>"
DEFAULT_DIM = 64

_INT_RE = re.compile(r"^(0[xX][0-9a-fA-F_]+|0[bB][01_]+|\d[\d_]*)[lL]?$")
_FLOAT_RE = re.compile(r"^(\d[\d_]*\.?[\d_]*|\.\d[\d_]*)([eE][+-]?\d+)?[fFdD]?$")


def literal_bucket(token: str) -> str:
    """Map a literal's source text to a coarse class token."""
    if token in ("true", "false"):
        return "BOOL_LIT"
    if token == "null":
        return "NULL_LIT"
    if token.startswith('"'):
        return "STR_LIT"
    if token.startswith("'"):
        return "CHAR_LIT"
    if _INT_RE.match(token):
        return "INT_LIT"
    if _FLOAT_RE.match(token):
        return "FLOAT_LIT"
    return "LIT"


def node_word(node: ParseNode) -> str | None:
    """Vocabulary word carried by a node, or None."""
    if node.token is None:
        return None
    if node.kind == "Literal":
        return literal_bucket(node.token)
    return node.token.lower()


def bag_words(tree: ParseTree | ParseNode) -> list[str]:
    """Word tokens of a tree in source order, ignoring structure."""
    return [w for n in as_node(tree).walk() if (w := node_word(n)) is not None]


@dataclass
class CodeVector:
    v: np.ndarray
    provenance: str

    def __len__(self) -> int:
        return self.v.shape[0]


@dataclass
class CodeRnnParams:
    W: np.ndarray
    b: np.ndarray
    kind_emb: np.ndarray
    word_emb: np.ndarray
    kinds: Vocab
    words: Vocab

    def __post_init__(self):
        d = self.b.shape[0]
        if self.W.shape != (d, d):
            raise DimensionError(f"W must be {d}x{d}, got {self.W.shape}")
        if self.kind_emb.shape != (len(self.kinds), d) or self.word_emb.shape != (len(self.words), d):
            raise DimensionError("embedding tables do not match vocabularies / dimension")

    @property
    def d(self) -> int:
        return self.b.shape[0]

    def tensors(self) -> dict[str, np.ndarray]:
        return {"W": self.W, "b": self.b, "kind_emb": self.kind_emb, "word_emb": self.word_emb}

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.tensors().items()}

    def copy(self) -> "CodeRnnParams":
        return CodeRnnParams(self.W.copy(), self.b.copy(), self.kind_emb.copy(),
                             self.word_emb.copy(), self.kinds, self.words)

    @classmethod
    def initialize(cls, kinds: Vocab, words: Vocab, d: int, rng: np.random.Generator,
                   scale: float = 0.1) -> "CodeRnnParams":
        return cls(
            W=uniform_init(rng, (d, d), scale),
            b=uniform_init(rng, (d,), scale),
            kind_emb=uniform_init(rng, (len(kinds), d), scale),
            word_emb=uniform_init(rng, (len(words), d), scale),
            kinds=kinds,
            words=words,
        )


def build_encoder_vocab(trees: Iterable[ParseTree | ParseNode], min_freq: int = 1) -> tuple[Vocab, Vocab]:
    kinds: Counter = Counter()
    words: Counter = Counter()
    for t in trees:
        for n in as_node(t).walk():
            kinds[n.kind] += 1
            w = node_word(n)
            if w is not None:
                words[w] += 1
    return (Vocab.from_counts(kinds, (UNK_KIND,), 1, UNK_KIND),
            Vocab.from_counts(words, (UNK_WORD,), min_freq, UNK_WORD))


def _node_slots(node: ParseNode, params: CodeRnnParams) -> tuple[int | None, int | None]:
    word = node_word(node)
    word_id = None if word is None else params.words.id(word)
    if word is not None and node.kind in WORD_KINDS:
        return None, word_id
    return params.kinds.id(node.kind), word_id


@dataclass
class EncodeTrace:
    """Per-node forward values in post-order (root last)."""

    model: str
    d: int
    n_kinds: int
    n_words: int
    kind_ids: list = field(default_factory=list)
    word_ids: list = field(default_factory=list)
    children: list = field(default_factory=list)
    aggs: list = field(default_factory=list)
    pres: list = field(default_factory=list)
    outs: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.outs)


def _canonical_sum(vectors: list[np.ndarray]) -> np.ndarray:
    # Summing in a value-determined order makes the result bitwise
    # independent of child order.
    if len(vectors) == 1:
        return vectors[0].copy()
    m = np.stack(vectors)
    order = np.lexsort(m.T[::-1])
    acc = m[order[0]].copy()
    for i in order[1:]:
        acc += m[i]
    return acc


def encode(tree: ParseTree | ParseNode, params: CodeRnnParams, model: str = "sum"):
    """Encode a tree bottom-up; returns ``(CodeVector, EncodeTrace)``."""
    if model not in TREE_MODELS:
        raise ValueError(f"unknown tree model {model!r}; expected one of {TREE_MODELS}")
    trace = EncodeTrace(model, params.d, len(params.kinds), len(params.words))
    root = as_node(tree)
    # iterative post-order so deep expression chains cannot hit the recursion limit
    stack: list[tuple[ParseNode, bool]] = [(root, False)]
    pending: list[int] = []
    while stack:
        node, expanded = stack.pop()
        if not expanded:
            stack.append((node, True))
            for c in reversed(node.children):
                stack.append((c, False))
            continue
        n = len(node.children)
        kids = pending[len(pending) - n:] if n else []
        if n:
            del pending[len(pending) - n:]
        kind_id, word_id = _node_slots(node, params)
        own = np.zeros(params.d, dtype=params.W.dtype)
        if kind_id is not None:
            own += params.kind_emb[kind_id]
        if word_id is not None:
            own += params.word_emb[word_id]
        if n:
            agg = _canonical_sum([trace.outs[k] for k in kids])
            if model == "avg":
                agg = agg / n
            pre = params.W @ agg + params.b
            out = own + np.maximum(pre, 0.0)
        else:
            agg = pre = None
            out = own
        trace.kind_ids.append(kind_id)
        trace.word_ids.append(word_id)
        trace.children.append(kids)
        trace.aggs.append(agg)
        trace.pres.append(pre)
        trace.outs.append(out)
        pending.append(len(trace.outs) - 1)
    return CodeVector(trace.outs[-1].copy(), model), trace


def encode_backward(trace: EncodeTrace, grad_root, params: CodeRnnParams,
                    grads: dict[str, np.ndarray] | None = None) -> dict[str, np.ndarray]:
    """Reverse-mode gradients of ``grad_root . V_root`` w.r.t. all parameters.

    Gradients are accumulated into ``grads`` when given.
    """
    if (trace.d, trace.n_kinds, trace.n_words) != (params.d, len(params.kinds), len(params.words)):
        raise DimensionError("trace was produced with differently shaped parameters")
    grad_root = np.asarray(grad_root, dtype=np.float64)
    if grad_root.shape != (params.d,):
        raise DimensionError(f"grad_root must have shape ({params.d},), got {grad_root.shape}")
    if grads is None:
        grads = params.zero_grads()
    n = len(trace)
    G = np.zeros((n, params.d))
    G[n - 1] = grad_root
    dW, db, dk, dw = grads["W"], grads["b"], grads["kind_emb"], grads["word_emb"]
    for i in range(n - 1, -1, -1):
        g = G[i]
        if trace.kind_ids[i] is not None:
            dk[trace.kind_ids[i]] += g
        if trace.word_ids[i] is not None:
            dw[trace.word_ids[i]] += g
        kids = trace.children[i]
        if not kids:
            continue
        da = g * (trace.pres[i] > 0)
        dW += np.outer(da, trace.aggs[i])
        db += da
        dagg = params.W.T @ da
        if trace.model == "avg":
            dagg = dagg / len(kids)
        for k in kids:
            G[k] += dagg
    return grads


def encode_bag(tree: ParseTree | ParseNode, params: CodeRnnParams, model: str = "lea") -> CodeVector:
    """Sum (``les``) or mean (``lea``) of the tree's word embeddings."""
    ids = _bag_ids(tree, params)
    v = params.word_emb[ids].sum(axis=0)
    if model == "lea":
        v = v / len(ids)
    return CodeVector(v, model)


def encode_bag_backward(tree: ParseTree | ParseNode, grad, params: CodeRnnParams, model: str = "lea",
                        grads: dict[str, np.ndarray] | None = None) -> dict[str, np.ndarray]:
    ids = _bag_ids(tree, params)
    if grads is None:
        grads = params.zero_grads()
    g = np.asarray(grad, dtype=np.float64)
    if model == "lea":
        g = g / len(ids)
    np.add.at(grads["word_emb"], ids, g)
    return grads


def _bag_ids(tree, params: CodeRnnParams) -> list[int]:
    words = bag_words(tree)
    if not words:
        raise ValueError("tree has no words to embed")
    return params.words.ids(words)


@dataclass
class EncoderConfig:
    model: str = "avg"
    d: int = DEFAULT_DIM
    no_ident: bool = False
    expand_abbrev: bool = False

    def __post_init__(self):
        if self.model not in ENCODER_MODELS:
            raise ValueError(f"unknown encoder model {self.model!r}; expected one of {ENCODER_MODELS}")
        if self.d < 1:
            raise ValueError("dimension must be positive")

    @property
    def tag(self) -> str:
        return self.model + ("-ni" if self.no_ident else "")


def prepare_tree(tree: ParseTree | ParseNode, config: EncoderConfig) -> ParseTree:
    """Identifier preprocessing applied before any encoder sees a tree."""
    if config.no_ident:
        return strip_identifiers(tree)
    return rewrite_identifiers(tree, expand_abbrev=config.expand_abbrev)


class TreeEncoder:
    """Parameters plus configuration: one object that turns trees into vectors."""

    def __init__(self, params: CodeRnnParams, config: EncoderConfig):
        if params.d != config.d:
            raise DimensionError(f"params have d={params.d}, config says d={config.d}")
        self.params = params
        self.config = config

    @classmethod
    def fit_vocab(cls, trees, config: EncoderConfig, rng: np.random.Generator) -> "TreeEncoder":
        prepared = [prepare_tree(t, config) for t in trees]
        kinds, words = build_encoder_vocab(prepared)
        return cls(CodeRnnParams.initialize(kinds, words, config.d, rng), config)

    def prepare(self, tree) -> ParseTree:
        return prepare_tree(tree, self.config)

    def forward(self, prepared):
        """Vector of an already-prepared tree plus whatever backward needs."""
        if self.config.model in TREE_MODELS:
            vec, trace = encode(prepared, self.params, self.config.model)
            return vec.v, trace
        vec = encode_bag(prepared, self.params, self.config.model)
        return vec.v, prepared

    def backward(self, ctx, grad, grads=None) -> dict[str, np.ndarray]:
        if self.config.model in TREE_MODELS:
            return encode_backward(ctx, grad, self.params, grads)
        return encode_bag_backward(ctx, grad, self.params, self.config.model, grads)

    def vector(self, tree) -> CodeVector:
        v, _ = self.forward(self.prepare(tree))
        return CodeVector(v, self.config.tag)

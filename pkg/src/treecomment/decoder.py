"""Comment decoders conditioned on a fixed code vector.

Two cells share one interface:

* :class:`CodeGruParams` -- a GRU whose candidate state also sees the code
  vector through a *choose gate* ``c``::

      z = sigmoid(W_z [h, x])      r = sigmoid(W_r [h, x])      c = sigmoid(W_c [h, x])
      h~ = tanh(W [r*h, c*V_m, x])
      h' = (1 - z)*h + z*h~
      y = softmax(W_oh h' + b_o)

* :class:`BasicRnnParams` -- a plain recurrent cell with the code vector
  injected as an extra bias ``W_hi V_m``.

Training uses teacher forcing with the summed per-token cross-entropy and
full backpropagation through time.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .encoder import TreeEncoder
from .numeric import (AdaGrad, DEFAULT_LR, DimensionError, PROB_FLOOR, log_softmax, sigmoid,
                      softmax, uniform_init)
from .rouge import rouge_n
from .vocab import END, START, Vocab, comment_vocab, to_sequence

log = logging.getLogger(__name__)

CELLS = ("gru", "basic")
ACTIVATIONS = ("tanh", "relu")
DEFAULT_HIDDEN = 64
DEFAULT_EMBED = 64
DEFAULT_MAX_LEN = 30
BEAM_GRID = tuple(range(1, 11))
ALPHA_GRID = tuple(i / 10 for i in range(11))


def _check_vec(v: np.ndarray, n: int, what: str):
    if v.shape != (n,):
        raise DimensionError(f"{what} has shape {v.shape}, expected ({n},)")


@dataclass
class CodeGruParams:
    W_z: np.ndarray  # H x (H+E)
    W_r: np.ndarray  # H x (H+E)
    W_c: np.ndarray  # d x (H+E)
    W: np.ndarray    # H x (H+d+E)
    W_oh: np.ndarray  # |V| x H
    b_o: np.ndarray
    emb: np.ndarray   # |V| x E
    vocab: Vocab

    cell = "gru"

    def __post_init__(self):
        H, E, d, V = self.H, self.E, self.d, len(self.vocab)
        expected = {"W_z": (H, H + E), "W_r": (H, H + E), "W_c": (d, H + E), "W": (H, H + d + E),
                    "W_oh": (V, H), "b_o": (V,), "emb": (V, E)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def H(self) -> int:
        return self.W_z.shape[0]

    @property
    def E(self) -> int:
        return self.emb.shape[1]

    @property
    def d(self) -> int:
        return self.W_c.shape[0]

    @property
    def h0(self) -> np.ndarray:
        return np.zeros(self.H)

    def tensors(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in ("W_z", "W_r", "W_c", "W", "W_oh", "b_o", "emb")}

    @classmethod
    def initialize(cls, vocab: Vocab, H: int, E: int, d: int, rng: np.random.Generator,
                   scale: float = 0.1) -> "CodeGruParams":
        V = len(vocab)
        return cls(uniform_init(rng, (H, H + E), scale), uniform_init(rng, (H, H + E), scale),
                   uniform_init(rng, (d, H + E), scale), uniform_init(rng, (H, H + d + E), scale),
                   uniform_init(rng, (V, H), scale), uniform_init(rng, (V,), scale),
                   uniform_init(rng, (V, E), scale), vocab)

    def forward(self, h_prev: np.ndarray, x_id: int, vm: np.ndarray):
        H = self.H
        x = self.emb[x_id]
        u = np.concatenate([h_prev, x])
        z = sigmoid(self.W_z @ u)
        r = sigmoid(self.W_r @ u)
        c = sigmoid(self.W_c @ u)
        q = np.concatenate([r * h_prev, c * vm, x])
        h_tilde = np.tanh(self.W @ q)
        h = (1.0 - z) * h_prev + z * h_tilde
        logits = self.W_oh @ h + self.b_o
        cache = (h_prev, x_id, vm, u, z, r, c, q, h_tilde, h)
        return h, logits, cache

    def backward(self, cache, dh: np.ndarray, grads: dict[str, np.ndarray]):
        """Backprop one step given dL/dh; returns (dL/dh_prev, dL/dV_m)."""
        h_prev, x_id, vm, u, z, r, c, q, h_tilde, h = cache
        H, d = self.H, self.d
        dz = dh * (h_tilde - h_prev)
        dh_tilde = dh * z
        dh_prev = dh * (1.0 - z)
        da = dh_tilde * (1.0 - h_tilde ** 2)
        grads["W"] += np.outer(da, q)
        dq = self.W.T @ da
        dq_r, dq_c, dx = dq[:H], dq[H:H + d], dq[H + d:].copy()
        dr = dq_r * h_prev
        dh_prev += dq_r * r
        dc = dq_c * vm
        dvm = dq_c * c
        da_z = dz * z * (1.0 - z)
        da_r = dr * r * (1.0 - r)
        da_c = dc * c * (1.0 - c)
        grads["W_z"] += np.outer(da_z, u)
        grads["W_r"] += np.outer(da_r, u)
        grads["W_c"] += np.outer(da_c, u)
        du = self.W_z.T @ da_z + self.W_r.T @ da_r + self.W_c.T @ da_c
        dh_prev += du[:H]
        dx += du[H:]
        grads["emb"][x_id] += dx
        return dh_prev, dvm


@dataclass
class BasicRnnParams:
    W_hi: np.ndarray  # H x d
    W_hx: np.ndarray  # H x E
    W_hh: np.ndarray  # H x H
    b_h: np.ndarray
    W_oh: np.ndarray
    b_o: np.ndarray
    emb: np.ndarray
    vocab: Vocab
    activation: str = "tanh"

    cell = "basic"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        H, E, d, V = self.H, self.E, self.d, len(self.vocab)
        expected = {"W_hi": (H, d), "W_hx": (H, E), "W_hh": (H, H), "b_h": (H,),
                    "W_oh": (V, H), "b_o": (V,), "emb": (V, E)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def H(self) -> int:
        return self.W_hh.shape[0]

    @property
    def E(self) -> int:
        return self.emb.shape[1]

    @property
    def d(self) -> int:
        return self.W_hi.shape[1]

    @property
    def h0(self) -> np.ndarray:
        return np.zeros(self.H)

    def tensors(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in ("W_hi", "W_hx", "W_hh", "b_h", "W_oh", "b_o", "emb")}

    @classmethod
    def initialize(cls, vocab: Vocab, H: int, E: int, d: int, rng: np.random.Generator,
                   scale: float = 0.1, activation: str = "tanh") -> "BasicRnnParams":
        V = len(vocab)
        return cls(uniform_init(rng, (H, d), scale), uniform_init(rng, (H, E), scale),
                   uniform_init(rng, (H, H), scale), uniform_init(rng, (H,), scale),
                   uniform_init(rng, (V, H), scale), uniform_init(rng, (V,), scale),
                   uniform_init(rng, (V, E), scale), vocab, activation)

    def forward(self, h_prev: np.ndarray, x_id: int, vm: np.ndarray):
        x = self.emb[x_id]
        a = self.W_hx @ x + self.W_hh @ h_prev + self.b_h + self.W_hi @ vm
        h = np.tanh(a) if self.activation == "tanh" else np.maximum(a, 0.0)
        logits = self.W_oh @ h + self.b_o
        return h, logits, (h_prev, x_id, vm, a, h)

    def backward(self, cache, dh: np.ndarray, grads: dict[str, np.ndarray]):
        h_prev, x_id, vm, a, h = cache
        da = dh * (1.0 - h ** 2) if self.activation == "tanh" else dh * (a > 0)
        grads["W_hx"] += np.outer(da, self.emb[x_id])
        grads["W_hh"] += np.outer(da, h_prev)
        grads["b_h"] += da
        grads["W_hi"] += np.outer(da, vm)
        grads["emb"][x_id] += self.W_hx.T @ da
        return self.W_hh.T @ da, self.W_hi.T @ da


DecoderParams = CodeGruParams | BasicRnnParams


def _word_id(params: DecoderParams, x_word) -> int:
    return x_word if isinstance(x_word, (int, np.integer)) else params.vocab.id(x_word)


def _step(params: DecoderParams, h_prev, x_word, V_m):
    vm = V_m.v if hasattr(V_m, "v") else np.asarray(V_m, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    _check_vec(h_prev, params.H, "h_prev")
    _check_vec(vm, params.d, "V_m")
    h, logits, _ = params.forward(h_prev, _word_id(params, x_word), vm)
    return h, softmax(logits)


def code_gru_step(params: CodeGruParams, h_prev, x_word, V_m):
    """One Code-GRU step; returns ``(h, y)`` with ``y`` a distribution over the vocabulary."""
    return _step(params, h_prev, x_word, V_m)


def basic_rnn_step(params: BasicRnnParams, h_prev, x_word, V_m):
    return _step(params, h_prev, x_word, V_m)


def sequence_nll(params: DecoderParams, vm: np.ndarray, ids: Sequence[int]):
    """Teacher-forced loss as a numpy scalar in the dtype of the parameters."""
    h = params.h0
    loss = 0.0
    for t in range(len(ids) - 1):
        h, logits, _ = params.forward(h, ids[t], vm)
        loss -= max(log_softmax(logits)[ids[t + 1]], np.log(PROB_FLOOR))
    return loss


def sequence_loss(params: DecoderParams, vm: np.ndarray, ids: Sequence[int]) -> float:
    return float(sequence_nll(params, vm, ids))


def sequence_loss_and_grads(params: DecoderParams, vm: np.ndarray, ids: Sequence[int]):
    """Teacher-forced loss over ``ids`` (START ... END) and its full BPTT gradients.

    Returns ``(loss, grads, dL/dV_m)``.
    """
    h = params.h0
    caches, probs = [], []
    loss = 0.0
    for t in range(len(ids) - 1):
        h, logits, cache = params.forward(h, ids[t], vm)
        logp = log_softmax(logits)
        p = np.exp(logp)
        loss -= max(logp[ids[t + 1]], np.log(PROB_FLOOR))
        caches.append(cache)
        probs.append(p)
    grads = {k: np.zeros_like(v) for k, v in params.tensors().items()}
    dvm = np.zeros(params.d)
    dh_next = np.zeros(params.H)
    for t in range(len(caches) - 1, -1, -1):
        cache, p = caches[t], probs[t]
        h_t = cache[-1]
        do = p.copy()
        do[ids[t + 1]] -= 1.0
        grads["W_oh"] += np.outer(do, h_t)
        grads["b_o"] += do
        dh = dh_next + params.W_oh.T @ do
        dh_next, dv = params.backward(cache, dh, grads)
        dvm += dv
    return float(loss), grads, dvm


# ---------------------------------------------------------------------------
# training

@dataclass
class GeneratorResult:
    decoder: DecoderParams
    losses: list[float]


def init_decoder(cell: str, vocab: Vocab, H: int, E: int, d: int, rng: np.random.Generator,
                 activation: str = "tanh") -> DecoderParams:
    if cell == "gru":
        return CodeGruParams.initialize(vocab, H, E, d, rng)
    if cell == "basic":
        return BasicRnnParams.initialize(vocab, H, E, d, rng, activation=activation)
    raise ValueError(f"unknown cell {cell!r}; expected one of {CELLS}")


def train_generator(pairs, encoder: TreeEncoder, cell: str = "gru", epochs: int = 800,
                    lr: float = DEFAULT_LR, seed: int = 0, hidden: int = DEFAULT_HIDDEN,
                    embed: int = DEFAULT_EMBED, min_freq: int = 3, activation: str = "tanh",
                    vocab: Vocab | None = None) -> GeneratorResult:
    """Fit a decoder on ``(tree, comment_words)`` pairs with the encoder frozen."""
    if not pairs:
        raise ValueError("no training pairs")
    rng = np.random.default_rng(seed)
    vms = [encoder.vector(tree).v for tree, _ in pairs]
    comments = [list(words) for _, words in pairs]
    if vocab is None:
        vocab = comment_vocab(comments, min_freq)
    seqs = [vocab.ids(to_sequence(c, vocab)) for c in comments]
    decoder = init_decoder(cell, vocab, hidden, embed, encoder.config.d, rng, activation)
    params = decoder.tensors()
    opt = AdaGrad(params, lr)
    losses = []
    for epoch in range(epochs):
        total = 0.0
        for i in rng.permutation(len(pairs)):
            loss, grads, _ = sequence_loss_and_grads(decoder, vms[i], seqs[i])
            opt.step(params, grads)
            total += loss
        losses.append(total / len(pairs))
        if epoch % 50 == 0 or epoch == epochs - 1:
            log.info("epoch %d mean loss %.5f", epoch, losses[-1])
    return GeneratorResult(decoder, losses)


# ---------------------------------------------------------------------------
# decoding

@dataclass(frozen=True)
class BeamConfig:
    beam_size: int = 1
    alpha: float = 0.0
    max_len: int = DEFAULT_MAX_LEN

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")


def length_penalty(length: int, alpha: float) -> float:
    return ((5.0 + length) ** alpha) / (6.0 ** alpha)


def _finish(params: DecoderParams, ids: Sequence[int]) -> list[str]:
    words = params.vocab.tokens(ids)
    if not words or words[-1] != END:
        words.append(END)
    return [START] + words


def greedy_decode(params: DecoderParams, V_m, max_len: int = DEFAULT_MAX_LEN) -> list[str]:
    """Feed back the most probable word until END or ``max_len`` words."""
    vm = V_m.v if hasattr(V_m, "v") else np.asarray(V_m, dtype=np.float64)
    start, end = params.vocab.id(START), params.vocab.id(END)
    h, x, out = params.h0, start, []
    for _ in range(max_len):
        h, logits, _ = params.forward(h, x, vm)
        row = log_softmax(logits)
        row[start] = -np.inf
        x = int(np.argmax(row))
        out.append(x)
        if x == end:
            break
    return _finish(params, out)


def beam_search(params: DecoderParams, V_m, cfg: BeamConfig = BeamConfig()) -> list[str]:
    """Beam search ranking hypotheses by ``log P(Y) / lp(|Y|)``.

    ``|Y|`` counts generated tokens including END. Finished hypotheses leave
    the beam; the best finished one is returned, or the best unfinished one
    once ``max_len`` tokens have been generated.
    """
    vm = V_m.v if hasattr(V_m, "v") else np.asarray(V_m, dtype=np.float64)
    start, end = params.vocab.id(START), params.vocab.id(END)
    beams: list[tuple[tuple[int, ...], float, np.ndarray]] = [((), 0.0, params.h0)]
    finished: list[tuple[float, tuple[int, ...]]] = []
    for t in range(1, cfg.max_len + 1):
        states, rows = [], []
        for toks, lp, h in beams:
            h2, logits, _ = params.forward(h, toks[-1] if toks else start, vm)
            row = lp + log_softmax(logits)
            row[start] = -np.inf
            states.append(h2)
            rows.append(row)
        totals = np.stack(rows)
        scores = totals / length_penalty(t, cfg.alpha)
        order = np.argsort(-scores, axis=None, kind="stable")[: cfg.beam_size]
        nxt = []
        for flat in order:
            b, w = divmod(int(flat), totals.shape[1])
            if not np.isfinite(totals[b, w]):
                continue
            toks = beams[b][0] + (w,)
            if w == end:
                finished.append((float(scores[b, w]), toks))
            else:
                nxt.append((toks, float(totals[b, w]), states[b]))
        beams = nxt
        if not beams:
            break
    if finished:
        best = min(finished, key=lambda f: (-f[0], f[1]))[1]
    else:
        best = beams[0][0]
    return _finish(params, best)


def strip_sentinels(seq: Sequence[str]) -> list[str]:
    return [w for w in seq if w not in (START, END)]


def decode(params: DecoderParams, V_m, cfg: BeamConfig) -> list[str]:
    if cfg.beam_size == 1 and cfg.alpha == 0.0:
        return greedy_decode(params, V_m, cfg.max_len)
    return beam_search(params, V_m, cfg)


@dataclass
class TuneResult:
    best: BeamConfig
    score: float
    table: list[tuple[int, float, float]] = field(default_factory=list)  # (beam, alpha, rouge-2 f1)


def tune_beam(params: DecoderParams, vectors: Sequence, references: Sequence[Sequence[str]],
              beam_sizes: Sequence[int] = BEAM_GRID, alphas: Sequence[float] = ALPHA_GRID,
              max_len: int = DEFAULT_MAX_LEN, n: int = 2) -> TuneResult:
    """Grid search maximizing mean ROUGE-2 F1; ties go to smaller beam, then smaller alpha."""
    if not vectors:
        raise ValueError("validation set is empty")
    if len(vectors) != len(references):
        raise ValueError("vectors and references differ in length")
    best, best_score, table = None, -1.0, []
    for beam in sorted(beam_sizes):
        for alpha in sorted(alphas):
            cfg = BeamConfig(beam, alpha, max_len)
            outs = [strip_sentinels(beam_search(params, v, cfg)) for v in vectors]
            score = float(np.mean([rouge_n(o, r, n).f1 for o, r in zip(outs, references)]))
            table.append((beam, alpha, score))
            log.info("beam=%d alpha=%.1f rouge-%d f1=%.4f", beam, alpha, n, score)
            if score > best_score:
                best, best_score = cfg, score
    return TuneResult(best, best_score, table)

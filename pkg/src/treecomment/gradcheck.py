"""Finite-difference verification of every hand-written backward pass.

Each suite draws seeded random instances, computes analytic gradients and
compares them with central differences. Instances whose ReLU
pre-activations sit within ``KINK_MARGIN`` of zero are redrawn, because a
finite difference straddling the kink does not estimate a derivative.

The numeric side evaluates every loss in ``np.longdouble``. Gradients
routinely contain entries near 1e-9, where float64 cancellation in
``L(p+h) - L(p-h)`` alone would exceed the tolerance.
"""
from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass

import numpy as np

from .classify import ClassifierHead, head_loss_and_grads
from .decoder import BasicRnnParams, CodeGruParams, sequence_loss_and_grads, sequence_nll
from .encoder import CodeRnnParams, EncoderConfig, TreeEncoder, encode, encode_backward
from .numeric import finite_diff_gradient, log_softmax, max_relative_error
from .tree import ParseNode
from .vocab import END, START, UNK, Vocab

FD_STEP = 1e-5
TOLERANCE = 1e-4
KINK_MARGIN = 1e-3
PARAM_SCALE = 0.5

_KINDS = ["Block", "IfStatement", "ReturnStatement", "BinaryExpr", "MethodCall", "Literal",
          "BreakStatement", "ThisExpr"]
_WORDS = ["sum", "count", "value", "index", "INT_LIT", "str"]


def random_tree(rng: np.random.Generator, max_nodes: int = 15) -> ParseNode:
    """Random tree mixing structural leaves, token leaves and CombineName groups."""
    budget = [int(rng.integers(1, max_nodes + 1))]

    def build(depth: int) -> ParseNode:
        budget[0] -= 1
        if budget[0] <= 0 or depth > 4 or rng.random() < 0.25:
            r = rng.random()
            if r < 0.35:
                return ParseNode("Identifier", str(rng.choice(_WORDS)))
            if r < 0.55:
                return ParseNode("Literal", str(rng.choice(["0", "1.5", '"s"', "true"])))
            return ParseNode(str(rng.choice(["BreakStatement", "ThisExpr"])))
        if budget[0] >= 2 and rng.random() < 0.15:
            n = int(rng.integers(2, 4))
            n = min(n, budget[0])
            budget[0] -= n
            return ParseNode("CombineName", None,
                             tuple(ParseNode("Word", str(rng.choice(_WORDS))) for _ in range(n)))
        n_children = int(rng.integers(1, 4))
        kids = []
        for _ in range(n_children):
            if budget[0] <= 0:
                break
            kids.append(build(depth + 1))
        return ParseNode(str(rng.choice(_KINDS[:5])), None, tuple(kids))

    return build(0)


def _random_encoder_params(rng, d: int) -> CodeRnnParams:
    kinds = Vocab(["<unk>"] + _KINDS + ["CombineName", "Word", "Identifier"], "<unk>")
    words = Vocab(["<unk>"] + sorted(set(w.lower() for w in _WORDS) | {"int_lit", "float_lit",
                                                                      "str_lit", "bool_lit"}),
                  "<unk>")
    return CodeRnnParams.initialize(kinds, words, d, rng, scale=PARAM_SCALE)


def _widened(obj):
    """Copy of a parameter dataclass with every tensor in extended precision."""
    return dataclasses.replace(obj, **{k: v.astype(np.longdouble) for k, v in obj.tensors().items()})


def _near_kink(trace) -> bool:
    return any(p is not None and np.min(np.abs(p)) < KINK_MARGIN for p in trace.pres)


@dataclass
class SuiteResult:
    name: str
    instances: int
    max_error: float
    seconds: float

    @property
    def passed(self) -> bool:
        return self.max_error <= TOLERANCE


def check_encoder_instance(rng, model: str) -> float:
    while True:
        d = int(rng.integers(2, 9))
        params = _random_encoder_params(rng, d)
        tree = random_tree(rng)
        _, trace = encode(tree, params, model)
        if not _near_kink(trace):
            break
    probe = rng.normal(size=d)
    analytic = encode_backward(trace, probe, params)

    def loss():
        return probe @ encode(tree, _widened(params), model)[0].v

    numeric = finite_diff_gradient(loss, params.tensors(), FD_STEP)
    return max_relative_error(analytic, numeric)


def check_classifier_instance(rng, model: str) -> float:
    """Joint encoder + softmax head cross-entropy."""
    while True:
        d = int(rng.integers(2, 9))
        k = int(rng.integers(2, 5))
        params = _random_encoder_params(rng, d)
        tree = random_tree(rng)
        if model in ("les", "lea") and not any(n.token for n in tree.walk()):
            continue
        if model in ("sum", "avg") and _near_kink(encode(tree, params, model)[1]):
            continue
        break
    encoder = TreeEncoder(params, EncoderConfig(model=model, d=d))
    head = ClassifierHead(rng.uniform(-PARAM_SCALE, PARAM_SCALE, (k, d)),
                          rng.uniform(-PARAM_SCALE, PARAM_SCALE, k))
    label = int(rng.integers(k))
    v, ctx = encoder.forward(tree)
    _, hgrads, dv = head_loss_and_grads(head, v, label)
    egrads = encoder.backward(ctx, dv)
    analytic = {**{"enc." + k_: g for k_, g in egrads.items()}, **hgrads}
    tensors = {**{"enc." + k_: t for k_, t in params.tensors().items()}, **head.tensors()}

    def loss():
        wide = TreeEncoder(_widened(params), encoder.config)
        out, _ = wide.forward(tree)
        logits = head.W_s.astype(np.longdouble) @ out + head.b_s.astype(np.longdouble)
        return -log_softmax(logits)[label]

    numeric = finite_diff_gradient(loss, tensors, FD_STEP)
    return max_relative_error(analytic, numeric)


def _random_decoder(rng, cell: str, activation: str = "tanh"):
    H, E, d = (int(x) for x in rng.integers(2, 7, size=3))
    n_words = int(rng.integers(1, 4))
    vocab = Vocab([START, END, UNK] + [f"w{i}" for i in range(n_words)])
    if cell == "gru":
        params = CodeGruParams.initialize(vocab, H, E, d, rng, scale=PARAM_SCALE)
    else:
        params = BasicRnnParams.initialize(vocab, H, E, d, rng, scale=PARAM_SCALE,
                                           activation=activation)
    length = int(rng.integers(0, 4))  # interior words; full sequence has <= 5 tokens
    ids = [vocab.id(START)] + [int(x) for x in rng.integers(2, len(vocab), size=length)] + [vocab.id(END)]
    vm = rng.normal(size=d)
    return params, ids, vm


def check_decoder_instance(rng, cell: str, activation: str = "tanh") -> float:
    while True:
        params, ids, vm = _random_decoder(rng, cell, activation)
        if cell == "basic" and activation == "relu":
            h, near = params.h0, False
            for t in range(len(ids) - 1):
                h, _, cache = params.forward(h, ids[t], vm)
                near |= bool(np.min(np.abs(cache[3])) < KINK_MARGIN)
            if near:
                continue
        break
    _, grads, dvm = sequence_loss_and_grads(params, vm, ids)
    analytic = {**grads, "V_m": dvm}
    tensors = {**params.tensors(), "V_m": vm}

    def loss():
        return sequence_nll(_widened(params), vm.astype(np.longdouble), ids)

    numeric = finite_diff_gradient(loss, tensors, FD_STEP)
    return max_relative_error(analytic, numeric)


SUITES = {
    "code-rnn-sum": lambda rng: check_encoder_instance(rng, "sum"),
    "code-rnn-avg": lambda rng: check_encoder_instance(rng, "avg"),
    "classifier-avg": lambda rng: check_classifier_instance(rng, "avg"),
    "classifier-sum": lambda rng: check_classifier_instance(rng, "sum"),
    "classifier-lea": lambda rng: check_classifier_instance(rng, "lea"),
    "classifier-les": lambda rng: check_classifier_instance(rng, "les"),
    "code-gru": lambda rng: check_decoder_instance(rng, "gru"),
    "basic-rnn-tanh": lambda rng: check_decoder_instance(rng, "basic", "tanh"),
    "basic-rnn-relu": lambda rng: check_decoder_instance(rng, "basic", "relu"),
}


def run_suite(name: str, seed: int = 0, instances: int = 50) -> SuiteResult:
    rng = np.random.default_rng([seed, sorted(SUITES).index(name)])
    t0 = time.perf_counter()
    worst = max(SUITES[name](rng) for _ in range(instances))
    return SuiteResult(name, instances, worst, time.perf_counter() - t0)


def run_gradcheck(seed: int = 0, instances: int = 50, suites=None) -> list[SuiteResult]:
    return [run_suite(name, seed, instances) for name in (suites or SUITES)]

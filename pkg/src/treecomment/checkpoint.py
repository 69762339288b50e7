"""Self-describing text checkpoints for encoders, classifier heads and decoders.

A checkpoint is one JSON document with three sections, written in a fixed
layout so identical models give identical bytes::

    {
     "header": {...},          # version, kind, dims, seed, encoder config, meta
     "vocab": {...},           # kinds / words / comment vocabularies
     "tensors": {
      "encoder.W": [[...]],    # one tensor per line, nested lists
      ...
     }
    }

Floats are written with ``repr``, which round-trips float64 exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classify import ClassifierHead
from .decoder import BasicRnnParams, CodeGruParams
from .encoder import CodeRnnParams, EncoderConfig, TreeEncoder
from .vocab import Vocab

FORMAT_VERSION = "treecomment-ckpt/1"
SECTIONS = ("header", "vocab", "tensors")
KINDS = ("encoder", "generator")


class CheckpointError(Exception):
    """A checkpoint could not be read; ``section`` names where it failed."""

    def __init__(self, section: str, message: str):
        super().__init__(f"checkpoint {section}: {message}")
        self.section = section


@dataclass
class Checkpoint:
    kind: str
    seed: int
    dims: dict
    encoder: dict  # EncoderConfig fields
    tensors: dict[str, np.ndarray]
    vocabs: dict[str, dict]
    meta: dict = field(default_factory=dict)
    version: str = FORMAT_VERSION

    def __eq__(self, other) -> bool:
        if not isinstance(other, Checkpoint):
            return NotImplemented
        same_header = (self.kind, self.seed, self.dims, self.encoder, self.vocabs, self.meta,
                       self.version) == (other.kind, other.seed, other.dims, other.encoder,
                                         other.vocabs, other.meta, other.version)
        return (same_header and self.tensors.keys() == other.tensors.keys()
                and all(self.tensors[k].dtype == other.tensors[k].dtype
                        and np.array_equal(self.tensors[k], other.tensors[k]) for k in self.tensors))

    @property
    def header(self) -> dict:
        return {"version": self.version, "kind": self.kind, "seed": self.seed, "dims": self.dims,
                "encoder": self.encoder, "meta": self.meta}


# ---------------------------------------------------------------------------
# text format

def dumps_checkpoint(ckpt: Checkpoint) -> str:
    for name, t in ckpt.tensors.items():
        if not np.all(np.isfinite(t)):
            raise ValueError(f"tensor {name} has non-finite entries")

    def dump(obj) -> str:
        return json.dumps(obj, sort_keys=True, allow_nan=False)

    lines = ["{", f' "header": {dump(ckpt.header)},', f' "vocab": {dump(ckpt.vocabs)},',
             ' "tensors": {']
    names = sorted(ckpt.tensors)
    for i, name in enumerate(names):
        sep = "," if i < len(names) - 1 else ""
        lines.append(f"  {dump(name)}: {dump(ckpt.tensors[name].tolist())}{sep}")
    lines += [" }", "}", ""]
    return "\n".join(lines)


def _section_at(text: str, pos: int) -> str:
    found = "header"
    for name in SECTIONS:
        at = text.find(f'\n "{name}": ')
        if 0 <= at <= pos:
            found = name
    return found


def loads_checkpoint(text: str) -> Checkpoint:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointError(_section_at(text, exc.pos), f"malformed or truncated ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise CheckpointError("header", "top level is not an object")
    missing = [s for s in SECTIONS if s not in doc]
    if missing:
        raise CheckpointError(missing[0], "section missing")
    header = doc["header"]
    if not isinstance(header, dict) or "version" not in header:
        raise CheckpointError("header", "no format version")
    if header["version"] != FORMAT_VERSION:
        raise CheckpointError("header", f"unsupported format version {header['version']!r}; "
                                        f"this build reads {FORMAT_VERSION!r}")
    for key in ("kind", "seed", "dims", "encoder", "meta"):
        if key not in header:
            raise CheckpointError("header", f"missing field {key!r}")
    if header["kind"] not in KINDS:
        raise CheckpointError("header", f"unknown checkpoint kind {header['kind']!r}")
    vocabs = doc["vocab"]
    if not isinstance(vocabs, dict):
        raise CheckpointError("vocab", "not an object")
    for name, v in vocabs.items():
        if (not isinstance(v, dict) or not isinstance(v.get("tokens"), list)
                or not all(isinstance(t, str) for t in v["tokens"]) or v.get("unk") not in v["tokens"]
                or len(set(v["tokens"])) != len(v["tokens"])):
            raise CheckpointError("vocab", f"vocabulary {name!r} is malformed")
    tensors = {}
    if not isinstance(doc["tensors"], dict):
        raise CheckpointError("tensors", "not an object")
    for name, data in doc["tensors"].items():
        try:
            arr = np.array(data, dtype=np.float64)
        except (ValueError, TypeError):
            raise CheckpointError("tensors", f"tensor {name!r} is ragged or non-numeric") from None
        if arr.ndim not in (1, 2) or not np.all(np.isfinite(arr)):
            raise CheckpointError("tensors", f"tensor {name!r} has bad shape or values")
        tensors[name] = arr
    return Checkpoint(header["kind"], header["seed"], header["dims"], header["encoder"], tensors,
                      vocabs, header["meta"], header["version"])


def save_checkpoint(path: str | Path, ckpt: Checkpoint) -> None:
    Path(path).write_text(dumps_checkpoint(ckpt), encoding="utf-8", newline="\n")


def load_checkpoint(path: str | Path) -> Checkpoint:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError:
        raise CheckpointError("header", "not a UTF-8 text file") from None
    return loads_checkpoint(text)


# ---------------------------------------------------------------------------
# models <-> checkpoints

def _prefixed(prefix: str, tensors: dict) -> dict:
    return {f"{prefix}.{k}": np.array(v, dtype=np.float64) for k, v in tensors.items()}


def _encoder_config_dict(config: EncoderConfig) -> dict:
    return {"model": config.model, "d": config.d, "no_ident": config.no_ident,
            "expand_abbrev": config.expand_abbrev}


def encoder_checkpoint(encoder: TreeEncoder, head: ClassifierHead | None = None, seed: int = 0,
                       meta: dict | None = None) -> Checkpoint:
    tensors = _prefixed("encoder", encoder.params.tensors())
    if head is not None:
        tensors.update(_prefixed("head", head.tensors()))
    dims = {"d": encoder.config.d, "H": None, "E": None, "k": head.k if head is not None else None}
    vocabs = {"kinds": encoder.params.kinds.to_dict(), "words": encoder.params.words.to_dict()}
    return Checkpoint("encoder", seed, dims, _encoder_config_dict(encoder.config), tensors, vocabs,
                      dict(meta or {}))


def generator_checkpoint(encoder: TreeEncoder, decoder, seed: int = 0, meta: dict | None = None) -> Checkpoint:
    """Decoder plus the frozen encoder it was trained against."""
    ckpt = encoder_checkpoint(encoder, None, seed, meta)
    ckpt.kind = "generator"
    ckpt.tensors.update(_prefixed("decoder", decoder.tensors()))
    ckpt.vocabs["comment"] = decoder.vocab.to_dict()
    ckpt.dims.update(H=decoder.H, E=decoder.E)
    ckpt.meta = {**ckpt.meta, "cell": decoder.cell,
                 "activation": getattr(decoder, "activation", None)}
    return ckpt


def _section(ckpt: Checkpoint, prefix: str) -> dict:
    n = len(prefix) + 1
    return {k[n:]: v for k, v in ckpt.tensors.items() if k.startswith(prefix + ".")}


def restore_encoder(ckpt: Checkpoint) -> TreeEncoder:
    try:
        config = EncoderConfig(**ckpt.encoder)
        t = _section(ckpt, "encoder")
        params = CodeRnnParams(t["W"], t["b"], t["kind_emb"], t["word_emb"],
                               Vocab.from_dict(ckpt.vocabs["kinds"]), Vocab.from_dict(ckpt.vocabs["words"]))
        return TreeEncoder(params, config)
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError("tensors", f"cannot rebuild encoder: {exc}") from None


def restore_head(ckpt: Checkpoint) -> ClassifierHead:
    t = _section(ckpt, "head")
    if not t:
        raise CheckpointError("tensors", "checkpoint has no classifier head")
    try:
        return ClassifierHead(t["W_s"], t["b_s"])
    except (KeyError, ValueError) as exc:
        raise CheckpointError("tensors", f"cannot rebuild classifier head: {exc}") from None


def restore_decoder(ckpt: Checkpoint):
    if ckpt.kind != "generator":
        raise CheckpointError("header", f"a {ckpt.kind} checkpoint holds no decoder")
    t = _section(ckpt, "decoder")
    try:
        vocab = Vocab.from_dict(ckpt.vocabs["comment"])
        if ckpt.meta.get("cell") == "gru":
            return CodeGruParams(t["W_z"], t["W_r"], t["W_c"], t["W"], t["W_oh"], t["b_o"], t["emb"], vocab)
        return BasicRnnParams(t["W_hi"], t["W_hx"], t["W_hh"], t["b_h"], t["W_oh"], t["b_o"], t["emb"],
                              vocab, ckpt.meta.get("activation") or "tanh")
    except (KeyError, ValueError) as exc:
        raise CheckpointError("tensors", f"cannot rebuild decoder: {exc}") from None


"""``treecomment`` command-line entry point.

Exit status is 0 on success, 1 for user errors (bad flags, missing or
malformed inputs) and 2 when an internal invariant fails (corrupt
checkpoint, dimension mismatch, failing gradient check).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .checkpoint import (CheckpointError, encoder_checkpoint, generator_checkpoint, load_checkpoint,
                         restore_decoder, restore_encoder, restore_head, save_checkpoint)
from .classify import LabeledExample, classify, evaluate_assignment, train_classifier
from .config import ConfigError, load_config
from .corpus import extract_pairs, read_pairs, split_corpus, write_pairs
from .decoder import BeamConfig, decode, strip_sentinels, train_generator, tune_beam
from .encoder import EncoderConfig
from .gradcheck import TOLERANCE, run_gradcheck
from .identifiers import AbbrevContext, expand_abbreviation, split_identifier
from .javalike import ParseError, parse_source
from .numeric import DimensionError
from .rouge import corpus_rouge
from .tree import ParseTree, TreeSchemaError, load_tree, node_from_dict

log = logging.getLogger("treecomment")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")


def _config(args, **overrides):
    return load_config(args.config, overrides)


# ---------------------------------------------------------------------------
# input helpers

def read_code(path: str) -> ParseTree:
    """A ``.json`` tree document, or Java-like source (``-`` reads stdin)."""
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        return load_tree(text)
    return parse_source(text)


def read_labeled(path: str) -> list[LabeledExample]:
    """JSONL of ``{"tree": <node>, "label": int}`` or ``{"code": <source>, "label": int}``."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                tree = (ParseTree(node_from_dict(doc["tree"], "tree")) if "tree" in doc
                        else parse_source(doc["code"]))
                label = doc["label"]
                if not isinstance(label, int) or isinstance(label, bool) or label < 0:
                    raise ValueError(f"label must be a non-negative integer, got {label!r}")
            except (ValueError, KeyError, TypeError, ParseError, TreeSchemaError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            out.append(LabeledExample(tree, label))
    if not out:
        raise ValueError(f"{path}: no examples")
    return out


def read_lines(path: str) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh.read().splitlines()]


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# subcommands

def cmd_extract(args) -> int:
    pairs = extract_pairs(args.repo)
    write_pairs(pairs, args.out)
    _emit({"out": args.out, "pairs": len(pairs)})
    return 0


def cmd_split(args) -> int:
    cfg = _config(args, seed=args.seed, ratios=_floats(args.ratios) if args.ratios else None)
    pairs = read_pairs(args.pairs)
    parts = split_corpus(pairs, cfg.ratios, cfg.seed)
    src = Path(args.pairs)
    out_dir = Path(args.out_dir) if args.out_dir else src.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    counts = {}
    for name, part in zip(("train", "valid", "test"), parts):
        path = out_dir / f"{src.stem}.{name}.jsonl"
        if path.resolve() == src.resolve():
            raise ValueError(f"refusing to overwrite input {src}")
        write_pairs(part, path)
        counts[name] = len(part)
    _emit(counts)
    return 0


def _encoder_overrides(args) -> dict:
    return dict(seed=args.seed, d=args.d, lr=args.lr, encoder_epochs=args.epochs, model=args.model,
                no_ident=args.no_ident or None, expand_abbrev=args.expand_abbrev or None)


def _train_encoder(cfg, data):
    config = EncoderConfig(model=cfg.model, d=cfg.d, no_ident=cfg.no_ident, expand_abbrev=cfg.expand_abbrev)
    k = max(ex.label for ex in data) + 1
    result = train_classifier(data, config, epochs=cfg.encoder_epochs, lr=cfg.lr, seed=cfg.seed, k=k)
    ckpt = encoder_checkpoint(result.encoder, result.head, cfg.seed,
                              {"epochs": cfg.encoder_epochs, "lr": cfg.lr, "loss": result.losses})
    return result, ckpt


def cmd_train_encoder(args) -> int:
    cfg = _config(args, **_encoder_overrides(args))
    data = read_labeled(args.train)
    result, ckpt = _train_encoder(cfg, data)
    save_checkpoint(args.out, ckpt)
    _emit({"out": args.out, "final_loss": result.losses[-1], "examples": len(data)})
    return 0


def cmd_classify(args) -> int:
    test = read_labeled(args.test)
    if args.encoder:
        ckpt = load_checkpoint(args.encoder)
        encoder, head = restore_encoder(ckpt), restore_head(ckpt)
    else:
        if not args.train:
            raise UsageError("classify needs --train or --encoder")
        cfg = _config(args, **_encoder_overrides(args))
        result, ckpt = _train_encoder(cfg, read_labeled(args.train))
        encoder, head = result.encoder, result.head
        if args.out:
            save_checkpoint(args.out, ckpt)
    gold = [ex.label for ex in test]
    if max(gold) >= head.k:
        raise ValueError(f"test label {max(gold)} outside the {head.k} trained classes")
    pred = classify(encoder, head, [ex.tree for ex in test])
    _emit(evaluate_assignment(pred, gold, head.k).to_dict())
    return 0


def cmd_train_gen(args) -> int:
    cfg = _config(args, seed=args.seed, lr=args.lr, epochs=args.epochs, cell=args.cell,
                  hidden=args.hidden, embed=args.embed, min_freq=args.min_freq, activation=args.activation)
    ckpt = load_checkpoint(args.encoder)
    encoder = restore_encoder(ckpt)
    pairs = read_pairs(args.pairs)
    if not pairs:
        raise ValueError(f"{args.pairs}: no pairs")
    result = train_generator([(p.tree, p.comment) for p in pairs], encoder, cfg.cell, epochs=cfg.epochs,
                             lr=cfg.lr, seed=cfg.seed, hidden=cfg.hidden, embed=cfg.embed,
                             min_freq=cfg.min_freq, activation=cfg.activation)
    out = generator_checkpoint(encoder, result.decoder, cfg.seed,
                               {"epochs": cfg.epochs, "lr": cfg.lr, "min_freq": cfg.min_freq,
                                "loss": result.losses})
    save_checkpoint(args.out, out)
    _emit({"out": args.out, "final_loss": result.losses[-1], "pairs": len(pairs),
           "vocab": len(result.decoder.vocab)})
    return 0


def _load_generator(path):
    ckpt = load_checkpoint(path)
    return restore_encoder(ckpt), restore_decoder(ckpt)


def cmd_generate(args) -> int:
    cfg = _config(args, max_len=args.max_len)
    encoder, decoder = _load_generator(args.model)
    tree = read_code(args.code)
    beam = BeamConfig(args.beam, args.alpha, cfg.max_len)
    words = strip_sentinels(decode(decoder, encoder.vector(tree), beam))
    sys.stdout.write(" ".join(words) + "\n")
    return 0


def cmd_rouge(args) -> int:
    hyp, ref = read_lines(args.hyp), read_lines(args.ref)
    if len(hyp) != len(ref):
        raise ValueError(f"{args.hyp} has {len(hyp)} lines but {args.ref} has {len(ref)}")
    _emit(corpus_rouge(zip(hyp, ref), args.n).to_dict())
    return 0


def cmd_tune_beam(args) -> int:
    cfg = _config(args, max_len=args.max_len, n=args.n,
                  beam_sizes=_ints(args.beams) if args.beams else None,
                  alphas=_floats(args.alphas) if args.alphas else None)
    encoder, decoder = _load_generator(args.model)
    pairs = read_pairs(args.pairs)
    result = tune_beam(decoder, [encoder.vector(p.tree) for p in pairs], [p.comment for p in pairs],
                       cfg.beam_sizes, cfg.alphas, cfg.max_len, cfg.n)
    doc = {"beam": result.best.beam_size, "alpha": result.best.alpha, "rouge": result.score}
    if args.table:
        doc["table"] = [list(row) for row in result.table]
    _emit(doc)
    return 0


def cmd_gradcheck(args) -> int:
    cfg = _config(args, seed=args.seed, instances=args.instances)
    results = run_gradcheck(cfg.seed, cfg.instances)
    _emit({"tolerance": TOLERANCE, "suites": [
        {"name": r.name, "instances": r.instances, "max_error": r.max_error, "passed": r.passed}
        for r in results]})
    return 0 if all(r.passed for r in results) else 2


def cmd_split_ident(args) -> int:
    if args.context:
        expansion = expand_abbreviation(args.name, AbbrevContext.from_words(args.context.split()))
        if expansion is not None:
            sys.stdout.write(" ".join(expansion) + "\n")
            return 0
    sys.stdout.write(" ".join(split_identifier(args.name)) + "\n")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="treecomment", description="Tree-structured code encoders and comment generators.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def command(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON file of RunConfig values")
        sp.set_defaults(func=func)
        return sp

    sp = command("extract", cmd_extract, "mine (body, comment) pairs from a source tree")
    sp.add_argument("--repo", required=True)
    sp.add_argument("--out", required=True)

    sp = command("split", cmd_split, "seeded train/valid/test split of a pairs file")
    sp.add_argument("--pairs", required=True)
    sp.add_argument("--ratios")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out-dir")

    for name, func in (("train-encoder", cmd_train_encoder), ("classify", cmd_classify)):
        sp = command(name, func, "train a code encoder with a softmax head" if name == "train-encoder"
                     else "classify a labeled test set and report best-assignment metrics")
        sp.add_argument("--train", required=name == "train-encoder")
        sp.add_argument("--model", choices=["sum", "avg", "les", "lea"])
        sp.add_argument("--no-ident", action="store_true")
        sp.add_argument("--expand-abbrev", action="store_true")
        sp.add_argument("--d", type=int)
        sp.add_argument("--epochs", type=int)
        sp.add_argument("--lr", type=float)
        sp.add_argument("--seed", type=int)
        if name == "train-encoder":
            sp.add_argument("--out", required=True)
        else:
            sp.add_argument("--test", required=True)
            sp.add_argument("--encoder", help="evaluate this checkpoint instead of training")
            sp.add_argument("--out", help="also save the trained encoder here")

    sp = command("train-gen", cmd_train_gen, "train a comment decoder on a frozen encoder")
    sp.add_argument("--pairs", required=True)
    sp.add_argument("--encoder", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--cell", choices=["gru", "basic"])
    sp.add_argument("--activation", choices=["tanh", "relu"])
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--lr", type=float)
    sp.add_argument("--hidden", type=int)
    sp.add_argument("--embed", type=int)
    sp.add_argument("--min-freq", type=int)
    sp.add_argument("--seed", type=int)

    sp = command("generate", cmd_generate, "print a comment for one method")
    sp.add_argument("--model", required=True)
    sp.add_argument("--code", required=True)
    sp.add_argument("--beam", type=int, default=1)
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--max-len", type=int)

    sp = command("rouge", cmd_rouge, "Rouge-N between line-aligned hypothesis and reference files")
    sp.add_argument("--hyp", required=True)
    sp.add_argument("--ref", required=True)
    sp.add_argument("-n", type=int, default=2)

    sp = command("tune-beam", cmd_tune_beam, "grid-search beam size and length-penalty alpha")
    sp.add_argument("--model", required=True)
    sp.add_argument("--pairs", required=True)
    sp.add_argument("--beams")
    sp.add_argument("--alphas")
    sp.add_argument("--max-len", type=int)
    sp.add_argument("-n", type=int)
    sp.add_argument("--table", action="store_true")

    sp = command("gradcheck", cmd_gradcheck, "finite-difference check of every backward pass")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--instances", type=int)

    sp = command("split-ident", cmd_split_ident, "show the words of an identifier")
    sp.add_argument("name")
    sp.add_argument("--context", help="space-separated context identifiers for abbreviation expansion")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip("\n") + "\n")
        return 1
    except (CheckpointError, DimensionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (OSError, ValueError, KeyError, ParseError, TreeSchemaError, ConfigError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort invariant failure
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

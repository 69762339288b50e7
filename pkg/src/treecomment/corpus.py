"""Mining (method body, leading comment) pairs from Java-like sources."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .javalike import MODIFIERS, ParseError, Token, parse_tokens, tokenize
from .tree import ParseTree, node_from_dict, node_to_dict
from .vocab import Vocab, comment_vocab

log = logging.getLogger(__name__)

MIN_COMMENT_WORDS = 9  # "more than eight words"
SOURCE_SUFFIXES = (".java",)

_TAG_RE = re.compile(r"(?<![\w{])@[A-Za-z]+")
_INLINE_TAG_RE = re.compile(r"\{@[A-Za-z]+\s*([^}]*)\}")
_HTML_RE = re.compile(r"</?[A-Za-z][^>]*>")
_WORD_RE = re.compile(r"[a-z0-9]+")


@dataclass
class CommentPair:
    tree: ParseTree
    comment: list[str]
    meta: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {"tree": node_to_dict(self.tree.root), "comment": self.comment, "meta": self.meta}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "CommentPair":
        doc = json.loads(line)
        return cls(ParseTree(node_from_dict(doc["tree"], "tree")), list(doc["comment"]),
                   dict(doc.get("meta", {})))


def clean_comment(text: str) -> list[str]:
    """Strip comment markup, tag markers and punctuation; lowercase words.

    Tag payloads are kept: ``@return float`` contributes ``float``.
    """
    body = text
    if body.startswith("/*"):
        body = body[2:]
    if body.endswith("*/"):
        body = body[:-2]
    lines = [re.sub(r"^\s*\*+", "", ln) for ln in body.splitlines()]
    body = "\n".join(lines)
    body = _INLINE_TAG_RE.sub(r" \1 ", body)
    body = _HTML_RE.sub(" ", body)
    body = _TAG_RE.sub(" ", body)
    return _WORD_RE.findall(body.lower())


def keep_pair(comment: Sequence[str], is_constructor: bool) -> bool:
    return len(comment) >= MIN_COMMENT_WORDS and not is_constructor


@dataclass
class _Method:
    name: str
    is_constructor: bool
    comment: str | None
    signature: list[Token]
    body: list[Token]


_NON_METHOD_WORDS = frozenset({"new", "return", "throw", "if", "while", "for", "switch", "catch",
                               "synchronized", "else", "do", "try", "case", "assert"})


def scan_methods(text: str) -> list[_Method]:
    """Find method declarations with bodies in a source file, nested classes included."""
    toks = tokenize(text, keep_comments=True)
    methods: list[_Method] = []
    classes: list[tuple[str, int]] = []  # (name, brace depth of its body)
    depth = 0
    member: list[Token] = []
    i = 0
    while i < len(toks):
        t = toks[i]
        if t.kind == "eof":
            break
        in_class_body = bool(classes) and classes[-1][1] == depth
        if t.kind == "op" and t.text == "{":
            if in_class_body or not classes:
                code = [m for m in member if m.kind != "comment"]
                texts = [m.text for m in code]
                kw = next((k for k in ("class", "interface", "enum") if k in texts), None)
                if kw is not None and "=" not in texts and "(" not in texts[: texts.index(kw)]:
                    at = texts.index(kw)
                    name = texts[at + 1] if at + 1 < len(texts) else "?"
                    depth += 1
                    classes.append((name, depth))
                    member = []
                    i += 1
                    continue
                m = _as_method(member, classes[-1][0] if classes else None) if in_class_body else None
                if m is not None:
                    end = _matching_brace(toks, i)
                    m.body = [x for x in toks[i:end + 1] if x.kind != "comment"]
                    methods.append(m)
                    member = []
                    i = end + 1
                    continue
            depth += 1
            member = []
        elif t.kind == "op" and t.text == "}":
            if classes and classes[-1][1] == depth:
                classes.pop()
            depth -= 1
            member = []
        elif t.kind == "op" and t.text == ";" and in_class_body:
            member = []
        elif in_class_body or not classes:
            member.append(t)
        i += 1
    return methods


def _matching_brace(toks: list[Token], i: int) -> int:
    depth = 0
    for j in range(i, len(toks)):
        if toks[j].kind == "op":
            if toks[j].text == "{":
                depth += 1
            elif toks[j].text == "}":
                depth -= 1
                if depth == 0:
                    return j
    raise ParseError("unbalanced braces", toks[i].line, toks[i].col, "'}'")


def _strip_annotations(code: list[Token]) -> list[Token]:
    out, i = [], 0
    while i < len(code):
        if code[i].text == "@" and i + 1 < len(code) and code[i + 1].kind == "ident":
            i += 2
            while i + 1 < len(code) and code[i].text == "." and code[i + 1].kind == "ident":
                i += 2
            if i < len(code) and code[i].text == "(":
                depth = 0
                while i < len(code):
                    depth += {"(": 1, ")": -1}.get(code[i].text, 0)
                    i += 1
                    if depth == 0:
                        break
            continue
        out.append(code[i])
        i += 1
    return out


def _as_method(member: list[Token], class_name: str | None) -> _Method | None:
    raw = [m for m in member if m.kind != "comment"]
    code = _strip_annotations(raw)
    texts = [m.text for m in code]
    if "(" not in texts or "=" in texts or not code:
        return None
    p = texts.index("(")
    if p == 0 or code[p - 1].kind != "ident":
        return None
    if any(w in texts[:p] for w in _NON_METHOD_WORDS):
        return None
    name = texts[p - 1]
    # the leading comment must come right before the member's first code token
    comment = None
    first = member.index(raw[0])
    for tok in reversed(member[:first]):
        if tok.kind == "comment":
            if tok.text.startswith("/*"):
                comment = tok.text
            break
    return_type = [t for t in code[:p - 1] if not (t.kind == "keyword" and t.text in MODIFIERS)]
    if return_type and return_type[0].text == "<":  # generic method type parameters
        depth, k = 0, 0
        for k, t in enumerate(return_type):
            depth += {"<": 1, ">": -1, ">>": -2}.get(t.text, 0)
            if depth <= 0:
                break
        return_type = return_type[k + 1:]
    is_ctor = name == class_name or not return_type
    return _Method(name, is_ctor, comment, code, [])


def extract_file(path: Path, rel: str) -> list[CommentPair]:
    text = path.read_text(encoding="utf-8", errors="replace")
    pairs = []
    for m in scan_methods(text):
        if m.comment is None:
            continue
        words = clean_comment(m.comment)
        if not keep_pair(words, m.is_constructor):
            continue
        try:
            body = parse_tokens(m.body + [Token("eof", "", 0, 0, 0)])
        except ParseError as exc:
            log.warning("%s: skipping %s: %s", rel, m.name, exc)
            continue
        pairs.append(CommentPair(ParseTree(body), words, {"path": rel, "method": m.name}))
    return pairs


def extract_pairs(repo_root: str | Path, suffixes: Sequence[str] = SOURCE_SUFFIXES) -> list[CommentPair]:
    """Every (body tree, cleaned comment) pair under ``repo_root`` in path order."""
    root = Path(repo_root)
    if not root.is_dir():
        raise NotADirectoryError(f"{root} is not a directory")
    pairs: list[CommentPair] = []
    for path in sorted(p for p in root.rglob("*") if p.suffix in suffixes and p.is_file()):
        rel = path.relative_to(root).as_posix()
        try:
            pairs.extend(extract_file(path, rel))
        except (OSError, ParseError, UnicodeError) as exc:
            log.warning("%s: skipped (%s)", rel, exc)
    return pairs


def split_corpus(pairs: Sequence, ratios: Sequence[float] = (0.8, 0.1, 0.1), seed: int = 0):
    """Seeded shuffle, then contiguous train/validation/test slices."""
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three positive numbers summing to 1, got {ratios}")
    n = len(pairs)
    if n < 3:
        raise ValueError(f"corpus of {n} pairs is too small to split three ways")
    n_train = max(1, int(round(n * ratios[0])))
    n_val = max(1, int(round(n * ratios[1])))
    while n_train + n_val > n - 1:
        if n_train >= n_val and n_train > 1:
            n_train -= 1
        else:
            n_val -= 1
    order = np.random.default_rng(seed).permutation(n)
    items = [pairs[i] for i in order]
    return items[:n_train], items[n_train:n_train + n_val], items[n_train + n_val:]


def build_vocab(pairs: Iterable, min_freq: int = 3) -> Vocab:
    """Comment vocabulary from CommentPairs or plain word lists."""
    comments = [p.comment if isinstance(p, CommentPair) else p for p in pairs]
    if not comments:
        raise ValueError("no training comments")
    return comment_vocab(comments, min_freq)


def write_pairs(pairs: Iterable[CommentPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pairs:
            fh.write(p.to_json() + "\n")


def read_pairs(path: str | Path) -> list[CommentPair]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    out.append(CommentPair.from_json(line))
                except (ValueError, KeyError) as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
    return out

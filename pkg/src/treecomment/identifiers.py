"""Word-level semantics of identifiers.

Compound names are split into primitive words, short names can be expanded
from longer words found next to them, and Identifier leaves are rewritten
into ``CombineName`` subtrees so the encoder sees one leaf per word.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .tree import COMBINE, ParseNode, ParseTree, as_node

_PART_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+|[^\W\d_]+")
_SEPARATORS = re.compile(r"[_$]+")


def split_identifier(name: str) -> list[str]:
    """Split at underscores, camelCase humps, acronym boundaries and digit runs.

    >>> split_identifier("buildDataDictionary")
    ['build', 'data', 'dictionary']
    >>> split_identifier("XMLReader2")
    ['xml', 'reader', '2']
    """
    words = []
    for chunk in _SEPARATORS.split(name):
        words.extend(m.group().lower() for m in _PART_RE.finditer(chunk))
    return words


def initials(words: Sequence[str]) -> str:
    return "".join(w[0] for w in words if w)


def is_subsequence(short: str, long: str) -> bool:
    it = iter(long)
    return all(ch in it for ch in short)


@dataclass(frozen=True)
class AbbrevContext:
    """Compound words seen around an identifier.

    ``positions`` are token offsets of each word in the surrounding statement
    and ``anchor`` is the offset of the identifier itself; candidates nearer
    the anchor win ties.
    """

    words: tuple[str, ...]
    positions: tuple[int, ...]
    anchor: int = -1

    @classmethod
    def from_words(cls, words: Sequence[str]) -> "AbbrevContext":
        return cls(tuple(words), tuple(range(len(words))), -1)


# Rule ranks: substring beats initials beats letter subsequence.
_SUBSTRING, _INITIALS, _SUBSEQUENCE = 0, 1, 2


def _match(ident: str, word: str) -> tuple[int, list[str]] | None:
    parts = split_identifier(word)
    if not parts:
        return None
    joined = "".join(parts)
    # substring: return the primitive words the match spans
    at = joined.find(ident)
    if at >= 0:
        spans, offset = [], 0
        for p in parts:
            if offset < at + len(ident) and offset + len(p) > at:
                spans.append(p)
            offset += len(p)
        return _SUBSTRING, spans
    inits = initials(parts)
    if len(parts) >= 2 and len(ident) >= 2 and inits.startswith(ident):
        return _INITIALS, parts[: len(ident)]
    for p in parts:
        if len(p) > len(ident) and p[0] == ident[0] and is_subsequence(ident, p):
            return _SUBSEQUENCE, [p]
    return None


def expand_abbreviation(ident: str, ctx: AbbrevContext) -> list[str] | None:
    """Find the long form of ``ident`` among the context words, if any.

    A context word is a candidate when ``ident`` is a substring of it (the
    spanned primitive words are returned), when ``ident`` equals a leading run
    of its word initials (``dm`` for ``DoubleMatrix``), or, failing both, when
    ``ident`` is a letter subsequence of one of its words sharing the first
    letter (``rnd`` for ``random``). Lower rule rank wins, then nearest
    position, then the longest expansion.
    """
    key = ident.lower()
    if not key:
        return None
    best = None
    for word, pos in zip(ctx.words, ctx.positions):
        if word.lower() == key:
            continue
        found = _match(key, word)
        if found is None:
            continue
        rank, expansion = found
        if "".join(expansion) == key:
            continue
        score = (rank, abs(pos - ctx.anchor), -len("".join(expansion)), pos)
        if best is None or score < best[0]:
            best = (score, expansion)
    return None if best is None else best[1]


def verify_expansion(ident: str, expansion: Sequence[str]) -> bool:
    """Re-check that an expansion satisfies one of the matching rules."""
    key = ident.lower()
    joined = "".join(expansion)
    if key in joined:
        return True
    if len(expansion) >= 2 and initials(expansion) == key:
        return True
    return len(expansion) == 1 and expansion[0][:1] == key[:1] and is_subsequence(key, expansion[0])


# ---------------------------------------------------------------------------
# tree rewriting

def _statement_contexts(root: ParseNode) -> dict[str, AbbrevContext]:
    """Context of each identifier's first occurrence: its enclosing statement."""
    contexts: dict[str, AbbrevContext] = {}

    def visit(node: ParseNode, stmt: ParseNode | None):
        for child in node.children:
            visit(child, child if node.kind == "Block" or stmt is None else stmt)
        if node.kind == "Identifier" and node.token and node.token not in contexts:
            scope = stmt if stmt is not None else root
            toks = [n.token for n in scope.walk() if n.kind == "Identifier" and n.token]
            anchor = toks.index(node.token)
            pairs = [(t, i) for i, t in enumerate(toks) if t != node.token]
            contexts[node.token] = AbbrevContext(
                tuple(t for t, _ in pairs), tuple(i for _, i in pairs), anchor)

    visit(root, None)
    return contexts


def identifier_words(name: str, ctx: AbbrevContext | None = None) -> list[str]:
    words = split_identifier(name)
    if ctx is not None and len(words) == 1:
        expanded = expand_abbreviation(name, ctx)
        if expanded:
            words = expanded
    return words


def rewrite_identifiers(tree: ParseTree | ParseNode, expand_abbrev: bool = False) -> ParseTree:
    """Replace compound Identifier leaves by ``CombineName[Word...]`` subtrees.

    Single-word identifiers stay Identifier leaves with a lowercased token.
    With ``expand_abbrev`` a single-word identifier is first looked up in the
    statement where it first occurs.
    """
    root = as_node(tree)
    contexts = _statement_contexts(root) if expand_abbrev else {}

    def visit(node: ParseNode) -> ParseNode:
        if node.kind == "Identifier" and node.token and not node.children:
            words = identifier_words(node.token, contexts.get(node.token))
            if len(words) >= 2:
                return ParseNode(COMBINE, None, tuple(ParseNode("Word", w) for w in words))
            if len(words) == 1:
                return ParseNode("Identifier", words[0])
            return node
        if not node.children:
            return node
        return ParseNode(node.kind, node.token, tuple(visit(c) for c in node.children))

    return ParseTree(visit(root))


def strip_identifiers(tree: ParseTree | ParseNode) -> ParseTree:
    """Consistently replace identifier names with placeholders ``ID0, ID1, ...``.

    Word leaves of a CombineName all take the placeholder of the combined
    name so kinds and arities are unchanged.
    """
    root = as_node(tree)
    names: dict[str, str] = {}

    def placeholder(name: str) -> str:
        if name not in names:
            names[name] = f"ID{len(names)}"
        return names[name]

    def visit(node: ParseNode) -> ParseNode:
        if node.kind == "Identifier" and node.token is not None:
            return ParseNode(node.kind, placeholder(node.token), node.children)
        if node.kind == COMBINE:
            ph = placeholder("".join(c.token or "" for c in node.children))
            return ParseNode(COMBINE, node.token,
                             tuple(ParseNode(c.kind, ph, c.children) for c in node.children))
        if not node.children:
            return node
        return ParseNode(node.kind, node.token, tuple(visit(c) for c in node.children))

    return ParseTree(visit(root))

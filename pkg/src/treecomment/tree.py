"""Kind-labeled parse trees and their JSON serialization (``codetree/1``)."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterator

TREE_FORMAT = "codetree/1"

# Kinds that carry a word as their token. Everything else that carries a
# token (literals, primitive types) is a structural node with a payload.
WORD_KINDS = frozenset({"Identifier", "Word"})
COMBINE = "CombineName"


class TreeSchemaError(ValueError):
    """A serialized tree does not match the ``codetree/1`` schema."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ParseNode:
    kind: str
    token: str | None = None
    children: tuple["ParseNode", ...] = ()

    def __post_init__(self):
        if not self.kind:
            raise ValueError("node kind must be nonempty")
        if not isinstance(self.children, tuple):
            object.__setattr__(self, "children", tuple(self.children))
        if self.token is not None and self.children:
            raise ValueError(f"{self.kind} node carries a token and children")

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self) -> Iterator["ParseNode"]:
        """Pre-order traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def pretty(self, indent: int = 0) -> str:
        label = self.kind if self.token is None else f"{self.kind}({self.token!r})"
        lines = ["  " * indent + label]
        lines += [c.pretty(indent + 1) for c in self.children]
        return "\n".join(lines)

    def skeleton(self) -> str:
        """Compact bracket form, e.g. ``Block[ReturnStatement[Literal("0")]]``."""
        head = self.kind if self.token is None else f'{self.kind}("{self.token}")'
        if not self.children:
            return head
        return head + "[" + ", ".join(c.skeleton() for c in self.children) + "]"


@dataclass(frozen=True)
class ParseTree:
    root: ParseNode
    source_span: tuple[int, int] | None = field(default=None, compare=False)

    def walk(self) -> Iterator[ParseNode]:
        return self.root.walk()

    def size(self) -> int:
        return self.root.size()


def as_node(tree: ParseTree | ParseNode) -> ParseNode:
    return tree.root if isinstance(tree, ParseTree) else tree


def node_kinds(tree: ParseTree | ParseNode) -> Counter:
    return Counter(n.kind for n in as_node(tree).walk())


def node_to_dict(node: ParseNode) -> dict[str, Any]:
    return {
        "kind": node.kind,
        "token": node.token,
        "children": [node_to_dict(c) for c in node.children],
    }


def node_from_dict(obj: Any, path: str = "root") -> ParseNode:
    if not isinstance(obj, dict):
        raise TreeSchemaError(path, f"expected an object, got {type(obj).__name__}")
    extra = set(obj) - {"kind", "token", "children"}
    if extra:
        raise TreeSchemaError(path, f"unexpected keys {sorted(extra)}")
    kind = obj.get("kind")
    if not isinstance(kind, str) or not kind:
        raise TreeSchemaError(f"{path}.kind", "must be a nonempty string")
    token = obj.get("token")
    if token is not None and not isinstance(token, str):
        raise TreeSchemaError(f"{path}.token", "must be a string or null")
    children = obj.get("children", [])
    if not isinstance(children, list):
        raise TreeSchemaError(f"{path}.children", "must be a list")
    if token is not None and children:
        raise TreeSchemaError(path, "a node with a token cannot have children")
    kids = tuple(node_from_dict(c, f"{path}.children[{i}]") for i, c in enumerate(children))
    return ParseNode(kind, token, kids)


def dump_tree(tree: ParseTree | ParseNode) -> str:
    """Canonical JSON text for a tree file."""
    doc = {"format": TREE_FORMAT, "root": node_to_dict(as_node(tree))}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def load_tree(data: str | bytes | dict) -> ParseTree:
    """Parse a tree from JSON text or an already-decoded object.

    Accepts either a full file document ``{"format": "codetree/1", "root": ...}``
    or a bare node object.
    """
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise TreeSchemaError("$", f"invalid JSON: {exc}") from None
    if isinstance(data, dict) and "root" in data:
        fmt = data.get("format")
        if fmt != TREE_FORMAT:
            raise TreeSchemaError("format", f"expected {TREE_FORMAT!r}, got {fmt!r}")
        return ParseTree(node_from_dict(data["root"], "root"))
    return ParseTree(node_from_dict(data, "root"))


def canonical(data: str | dict) -> str:
    """Canonical text of a serialized tree (defaults filled in)."""
    return dump_tree(load_tree(data))

"""Tokenizer and recursive-descent parser for a small Java-like language.

Only method bodies are turned into trees. A full method declaration is
accepted, but its modifiers, return type, name and parameter list are
discarded. The supported subset is documented in the README.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .tree import ParseNode, ParseTree


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, expected: str | None = None):
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"line {line}, column {col}: {message}{hint}")
        self.line = line
        self.col = col
        self.expected = expected


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, number, string, char, op, comment, eof
    text: str
    line: int
    col: int
    offset: int


KEYWORDS = frozenset("""
abstract assert boolean break byte case catch char class const continue default do
double else enum extends final finally float for goto if implements import instanceof
int interface long native new package private protected public return short static
strictfp super switch synchronized this throw throws transient try void volatile while
true false null var
""".split())
PRIMITIVES = frozenset("boolean byte char short int long float double void".split())
MODIFIERS = frozenset(
    "public private protected static final abstract synchronized native strictfp "
    "transient volatile default".split()
)

_OPS = sorted("""
>>>= <<= >>= >>> ... -> :: ++ -- && || == != <= >= += -= *= /= %= &= |= ^= << >>
+ - * / % = < > ! ~ ? : ; , . ( ) [ ] { } & | ^ @
""".split(), key=len, reverse=True)

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n\f]+)"
    r"|(?P<comment>//[^\n]*|/\*.*?\*/)"
    r"|(?P<string>\"(?:\\.|[^\"\\\n])*\")"
    r"|(?P<char>'(?:\\.|[^'\\\n])+')"
    r"|(?P<number>0[xX][0-9a-fA-F_]+[lL]?|0[bB][01_]+[lL]?"
    r"|(?:\d[\d_]*\.?[\d_]*|\.\d[\d_]*)(?:[eE][+-]?\d+)?[fFdDlL]?)"
    r"|(?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)"
    r"|(?P<op>" + "|".join(re.escape(o) for o in _OPS) + ")",
    re.DOTALL,
)


def tokenize(text: str, keep_comments: bool = False) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            if text.startswith("/*", pos):
                raise ParseError("unterminated comment", line, col, "'*/'")
            if text[pos] in "\"'":
                raise ParseError("unterminated literal", line, col)
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "ident" and value in KEYWORDS:
            kind = "keyword"
        if kind != "ws" and (kind != "comment" or keep_comments):
            tokens.append(Token(kind, value, line, pos - line_start + 1, pos))
        nl = value.count("\n")
        if nl:
            line += nl
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, pos))
    return tokens


def _node(kind, *children, token=None) -> ParseNode:
    return ParseNode(kind, token, tuple(c for c in children if c is not None))


def _ident(tok: Token) -> ParseNode:
    return ParseNode("Identifier", tok.text)


_ASSIGN_OPS = frozenset("= += -= *= /= %= &= |= ^= <<= >>= >>>=".split())
_BINARY_LEVELS = [
    ("||",), ("&&",), ("|",), ("^",), ("&",), ("==", "!="),
    ("<", ">", "<=", ">=", "instanceof"), ("<<", ">>", ">>>"), ("+", "-"), ("*", "/", "%"),
]


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = [t for t in tokens if t.kind != "comment"]
        if not self.toks or self.toks[-1].kind != "eof":
            last = self.toks[-1] if self.toks else Token("eof", "", 1, 1, 0)
            self.toks.append(Token("eof", "", last.line, last.col, last.offset))
        self.i = 0
        self._splits: list[tuple[int, Token]] = []

    def mark(self) -> tuple[int, int]:
        return self.i, len(self._splits)

    def reset(self, mark: tuple[int, int]):
        self.i, n = mark
        while len(self._splits) > n:
            idx, orig = self._splits.pop()
            self.toks[idx] = orig

    # -- token helpers -------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "keyword") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"unexpected {self.describe(self.tok)}", f"'{text}'")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error(f"unexpected {self.describe(self.tok)}", "identifier")
        return self.advance()

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    def error(self, message: str, expected: str | None = None):
        raise ParseError(message, self.tok.line, self.tok.col, expected)

    # -- declarations --------------------------------------------------
    def parse_method_or_body(self) -> ParseNode:
        start = self.mark()
        if self._skip_method_header():
            body = self.parse_block()
        else:
            self.reset(start)
            stmts = []
            while self.tok.kind != "eof":
                stmts.append(self.parse_statement())
            body = _node("Block", *stmts)
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.describe(self.tok)} after method body", "end of input")
        return body

    def _skip_method_header(self) -> bool:
        """Consume a method/constructor header up to its body's ``{``."""
        try:
            self.skip_modifiers()
            if self.at("<"):
                self._skip_balanced("<", ">")
            if self.tok.kind == "ident" and self.peek().text == "(":
                self.advance()  # constructor
            else:
                if not self._try_type():
                    return False
                if self.tok.kind != "ident" or self.peek().text != "(":
                    return False
                self.advance()
            self._skip_balanced("(", ")")
            while self.accept("["):
                self.expect("]")
            if self.accept("throws"):
                self.parse_type()
                while self.accept(","):
                    self.parse_type()
            return self.at("{")
        except ParseError:
            return False

    def skip_modifiers(self):
        while True:
            if self.tok.kind == "keyword" and self.tok.text in MODIFIERS:
                self.advance()
            elif self.at("@") and self.peek().kind == "ident":
                self.advance()
                self.advance()
                while self.at(".") and self.peek().kind == "ident":
                    self.advance()
                    self.advance()
                if self.at("("):
                    self._skip_balanced("(", ")")
            else:
                return

    def _skip_balanced(self, open_: str, close: str):
        depth = 0
        while True:
            t = self.advance()
            if t.kind == "eof":
                self.error("unbalanced brackets", f"'{close}'")
            if t.text == open_:
                depth += 1
            elif t.text == close:
                depth -= 1
            elif close == ">" and t.text in (">>", ">>>"):
                depth -= len(t.text)
            if depth <= 0:
                return

    # -- types ---------------------------------------------------------
    def _try_type(self) -> ParseNode | None:
        start = self.mark()
        try:
            return self.parse_type()
        except ParseError:
            self.reset(start)
            return None

    def parse_type(self) -> ParseNode:
        t = self.tok
        if t.kind == "keyword" and t.text in PRIMITIVES:
            self.advance()
            node = ParseNode("PrimitiveType", t.text)
        elif t.kind == "ident" or (t.kind == "keyword" and t.text == "var"):
            self.advance()
            name = t
            while self.at(".") and self.peek().kind == "ident":
                self.advance()
                name = self.advance()
            args = self._type_args() if self.at("<") else []
            node = _node("ClassType", ParseNode("Identifier", name.text), *args)
        else:
            self.error(f"unexpected {self.describe(t)}", "type")
        while self.at("[") and self.peek().text == "]":
            self.advance()
            self.advance()
            node = _node("ArrayType", node)
        return node

    def _type_args(self) -> list[ParseNode]:
        self.expect("<")
        args = []
        if self.at(">"):  # diamond
            self.advance()
            return args
        while True:
            if self.accept("?"):
                if self.accept("extends") or self.accept("super"):
                    args.append(self.parse_type())
                else:
                    args.append(ParseNode("WildcardType"))
            else:
                args.append(self.parse_type())
            if self._close_angle():
                return args
            self.expect(",")

    def _close_angle(self) -> bool:
        t = self.tok
        if t.kind != "op":
            return False
        if t.text == ">":
            self.advance()
            return True
        if t.text in (">>", ">>>"):
            # split the shift token: consume one '>' and leave the rest
            rest = t.text[1:]
            self._splits.append((self.i, t))
            self.toks[self.i] = Token("op", rest, t.line, t.col + 1, t.offset + 1)
            return True
        return False

    # -- statements ----------------------------------------------------
    def parse_block(self) -> ParseNode:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("unexpected end of input", "'}'")
            stmts.append(self.parse_statement())
        self.advance()
        return _node("Block", *stmts)

    def parse_statement(self) -> ParseNode:
        t = self.tok
        if t.kind == "op" and t.text == "{":
            return self.parse_block()
        if t.kind == "op" and t.text == ";":
            self.advance()
            return ParseNode("EmptyStatement")
        if t.kind == "keyword":
            handler = getattr(self, "_stmt_" + t.text, None)
            if handler is not None:
                return handler()
            if t.text in ("class", "interface", "enum", "assert", "goto", "const"):
                self.error(f"unsupported statement {t.text!r}")
        decl = self._try_local_declaration()
        if decl is not None:
            self.expect(";")
            return decl
        expr = self.parse_expression()
        self.expect(";")
        return _node("ExprStatement", expr)

    def _try_local_declaration(self) -> ParseNode | None:
        start = self.mark()
        while self.accept("final"):
            pass
        if self.at("@"):
            self.skip_modifiers()
        ty = self._try_type()
        if ty is None or self.tok.kind != "ident" or self.peek().text not in ("=", ";", ",", "[", ":"):
            self.reset(start)
            return None
        declarators = [self._declarator()]
        while self.accept(","):
            declarators.append(self._declarator())
        return _node("VariableDeclaration", ty, *declarators)

    def _declarator(self) -> ParseNode:
        name = self.expect_ident()
        while self.at("[") and self.peek().text == "]":
            self.advance()
            self.advance()
        init = None
        if self.accept("="):
            init = self._array_initializer() if self.at("{") else self.parse_expression()
        return _node("VariableDeclarator", _ident(name), init)

    def _array_initializer(self) -> ParseNode:
        self.expect("{")
        items = []
        while not self.at("}"):
            items.append(self._array_initializer() if self.at("{") else self.parse_expression())
            if not self.accept(","):
                break
        self.expect("}")
        return _node("ArrayInitializer", *items)

    def _paren_expr(self) -> ParseNode:
        self.expect("(")
        e = self.parse_expression()
        self.expect(")")
        return e

    def _stmt_if(self):
        self.advance()
        cond = self._paren_expr()
        then = self.parse_statement()
        other = self.parse_statement() if self.accept("else") else None
        return _node("IfStatement", cond, then, other)

    def _stmt_while(self):
        self.advance()
        cond = self._paren_expr()
        return _node("WhileStatement", cond, self.parse_statement())

    def _stmt_do(self):
        self.advance()
        body = self.parse_statement()
        self.expect("while")
        cond = self._paren_expr()
        self.expect(";")
        return _node("DoStatement", body, cond)

    def _stmt_for(self):
        self.advance()
        self.expect("(")
        start = self.mark()
        while self.accept("final"):
            pass
        ty = self._try_type()
        if ty is not None and self.tok.kind == "ident" and self.peek().text == ":":
            name = self.advance()
            self.advance()
            iterable = self.parse_expression()
            self.expect(")")
            var = _node("VariableDeclaration", ty, _node("VariableDeclarator", _ident(name)))
            return _node("ForEachStatement", var, iterable, self.parse_statement())
        self.reset(start)
        init: list[ParseNode] = []
        if not self.at(";"):
            decl = self._try_local_declaration()
            if decl is not None:
                init.append(decl)
            else:
                init.append(self.parse_expression())
                while self.accept(","):
                    init.append(self.parse_expression())
        self.expect(";")
        cond = None if self.at(";") else self.parse_expression()
        self.expect(";")
        updates = []
        if not self.at(")"):
            updates.append(self.parse_expression())
            while self.accept(","):
                updates.append(self.parse_expression())
        self.expect(")")
        return _node("ForStatement", *init, cond, *updates, self.parse_statement())

    def _stmt_return(self):
        self.advance()
        value = None if self.at(";") else self.parse_expression()
        self.expect(";")
        return _node("ReturnStatement", value)

    def _stmt_break(self):
        self.advance()
        if self.tok.kind == "ident":
            self.advance()
        self.expect(";")
        return ParseNode("BreakStatement")

    def _stmt_continue(self):
        self.advance()
        if self.tok.kind == "ident":
            self.advance()
        self.expect(";")
        return ParseNode("ContinueStatement")

    def _stmt_throw(self):
        self.advance()
        e = self.parse_expression()
        self.expect(";")
        return _node("ThrowStatement", e)

    def _stmt_synchronized(self):
        self.advance()
        lock = self._paren_expr()
        return _node("SynchronizedStatement", lock, self.parse_block())

    def _stmt_try(self):
        self.advance()
        parts = [self.parse_block()]
        while self.accept("catch"):
            self.expect("(")
            while self.accept("final"):
                pass
            types = [self.parse_type()]
            while self.accept("|"):
                types.append(self.parse_type())
            name = self.expect_ident()
            self.expect(")")
            param = _node("Parameter", *types, _ident(name))
            parts.append(_node("CatchClause", param, self.parse_block()))
        if self.accept("finally"):
            parts.append(_node("FinallyClause", self.parse_block()))
        if len(parts) == 1:
            self.error("try without catch or finally", "'catch' or 'finally'")
        return _node("TryStatement", *parts)

    def _stmt_switch(self):
        self.advance()
        selector = self._paren_expr()
        self.expect("{")
        entries = []
        while not self.at("}"):
            if self.accept("case"):
                label = self.parse_expression()
            elif self.accept("default"):
                label = None
            else:
                self.error(f"unexpected {self.describe(self.tok)}", "'case' or 'default'")
            self.expect(":")
            body = []
            while not self.at("case", "default", "}"):
                if self.tok.kind == "eof":
                    self.error("unexpected end of input", "'}'")
                body.append(self.parse_statement())
            entries.append(_node("SwitchEntry", label, *body))
        self.advance()
        return _node("SwitchStatement", selector, *entries)

    # -- expressions ---------------------------------------------------
    def parse_expression(self) -> ParseNode:
        lhs = self._conditional()
        if self.tok.kind == "op" and self.tok.text in _ASSIGN_OPS:
            self.advance()
            rhs = self._array_initializer() if self.at("{") else self.parse_expression()
            return _node("Assign", lhs, rhs)
        return lhs

    def _conditional(self) -> ParseNode:
        cond = self._binary(0)
        if self.accept("?"):
            a = self.parse_expression()
            self.expect(":")
            b = self._conditional()
            return _node("ConditionalExpr", cond, a, b)
        return cond

    def _binary(self, level: int) -> ParseNode:
        if level == len(_BINARY_LEVELS):
            return self._unary()
        left = self._binary(level + 1)
        ops = _BINARY_LEVELS[level]
        while self.tok.kind in ("op", "keyword") and self.tok.text in ops:
            op = self.advance().text
            if op == "instanceof":
                left = _node("InstanceOfExpr", left, self.parse_type())
            else:
                left = _node("BinaryExpr", left, self._binary(level + 1))
        return left

    def _unary(self) -> ParseNode:
        if self.at("+", "-", "!", "~", "++", "--"):
            self.advance()
            return _node("UnaryExpr", self._unary())
        if self.at("("):
            cast = self._try_cast()
            if cast is not None:
                return cast
        return self._postfix(self._primary())

    def _try_cast(self) -> ParseNode | None:
        start = self.mark()
        self.advance()
        ty = self._try_type()
        if ty is None or not self.at(")"):
            self.reset(start)
            return None
        self.advance()
        nxt = self.tok
        primitive = ty.kind == "PrimitiveType" or (
            ty.kind == "ArrayType" and ty.children[0].kind == "PrimitiveType")
        starts_operand = nxt.kind in ("ident", "number", "string", "char") or (
            nxt.kind == "keyword" and nxt.text in ("this", "new", "true", "false", "null", "super")
        ) or (nxt.kind == "op" and nxt.text in ("(", "!", "~"))
        if primitive and nxt.kind == "op" and nxt.text in ("+", "-", "++", "--"):
            starts_operand = True
        if not starts_operand:
            self.reset(start)
            return None
        return _node("CastExpr", ty, self._unary())

    def _primary(self) -> ParseNode:
        t = self.tok
        if t.kind in ("number", "string", "char"):
            self.advance()
            return ParseNode("Literal", t.text)
        if t.kind == "keyword":
            if t.text in ("true", "false", "null"):
                self.advance()
                return ParseNode("Literal", t.text)
            if t.text == "this":
                self.advance()
                if self.at("("):
                    return _node("MethodCall", ParseNode("ThisExpr"), *self._arguments())
                return ParseNode("ThisExpr")
            if t.text == "super":
                self.advance()
                if self.at("("):
                    return _node("MethodCall", ParseNode("SuperExpr"), *self._arguments())
                return ParseNode("SuperExpr")
            if t.text == "new":
                return self._creator()
            if t.text in PRIMITIVES:
                # int.class and similar
                ty = self.parse_type()
                self.expect(".")
                self.expect("class")
                return _node("ClassExpr", ty)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.parse_expression()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                return _node("MethodCall", _ident(t), *self._arguments())
            return _ident(t)
        self.error(f"unexpected {self.describe(t)}", "expression")

    def _arguments(self) -> list[ParseNode]:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.parse_expression())
            while self.accept(","):
                args.append(self.parse_expression())
        self.expect(")")
        return args

    def _creator(self) -> ParseNode:
        self.expect("new")
        t = self.tok
        if t.kind == "keyword" and t.text in PRIMITIVES:
            self.advance()
            base = ParseNode("PrimitiveType", t.text)
        else:
            name = self.expect_ident()
            while self.at(".") and self.peek().kind == "ident":
                self.advance()
                name = self.advance()
            args = self._type_args() if self.at("<") else []
            base = _node("ClassType", _ident(name), *args)
        if self.at("["):
            dims = []
            ty = base
            while self.at("["):
                self.advance()
                if self.at("]"):
                    self.advance()
                else:
                    dims.append(self.parse_expression())
                    self.expect("]")
                ty = _node("ArrayType", ty)
            init = self._array_initializer() if self.at("{") else None
            return _node("ArrayCreation", ty, *dims, init)
        if base.kind == "PrimitiveType":
            self.error(f"unexpected {self.describe(self.tok)}", "'['")
        args = self._arguments()
        if self.at("{"):
            self.error("anonymous classes are not supported")
        return _node("ObjectCreation", base, *args)

    def _postfix(self, expr: ParseNode) -> ParseNode:
        while True:
            if self.at("."):
                self.advance()
                if self.accept("class"):
                    expr = _node("ClassExpr", expr)
                    continue
                if self.at("<"):
                    self._skip_balanced("<", ">")
                name = self.expect_ident()
                if self.at("("):
                    expr = _node("MethodCall", expr, _ident(name), *self._arguments())
                else:
                    expr = _node("FieldAccess", expr, _ident(name))
            elif self.at("["):
                self.advance()
                idx = self.parse_expression()
                self.expect("]")
                expr = _node("ArrayAccess", expr, idx)
            elif self.at("++", "--"):
                self.advance()
                expr = _node("UnaryExpr", expr)
            elif self.at("->", "::"):
                self.error("lambdas and method references are not supported")
            else:
                return expr


def parse_source(text: str) -> ParseTree:
    """Parse a method (or a bare sequence of statements) into its body tree.

    >>> parse_source("return 0;").root.skeleton()
    'Block[ReturnStatement[Literal("0")]]'
    """
    parser = Parser(tokenize(text))
    return ParseTree(parser.parse_method_or_body(), (0, len(text.encode("utf-8"))))


def parse_tokens(tokens: list[Token]) -> ParseNode:
    """Parse a brace-enclosed body given as a token slice (used by extraction)."""
    parser = Parser(list(tokens))
    body = parser.parse_block()
    if parser.tok.kind != "eof":
        parser.error(f"unexpected {parser.describe(parser.tok)} after body", "end of input")
    return body

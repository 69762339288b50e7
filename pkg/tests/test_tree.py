import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treecomment.javalike import ParseError, parse_source, tokenize
from treecomment.tree import (ParseNode, ParseTree, TreeSchemaError, canonical, dump_tree, load_tree,
                              node_kinds)

FIG3 = """
if (!found){
  allFound = false;
}
if (allFound){
  return true;
}
"""


class TestParseSource:
    def test_single_return(self):
        assert parse_source("return 0;").root.skeleton() == 'Block[ReturnStatement[Literal("0")]]'

    def test_assignment(self):
        assert parse_source("x = a + b;").root.skeleton() == (
            'Block[ExprStatement[Assign[Identifier("x"), BinaryExpr[Identifier("a"), Identifier("b")]]]]')

    def test_two_if_fragment(self):
        root = parse_source(FIG3).root
        assert [c.kind for c in root.children] == ["IfStatement", "IfStatement"]
        first, second = root.children
        assert first.children[0].kind == "UnaryExpr"
        assert first.children[1].kind == "Block"
        assert second.children[0] == ParseNode("Identifier", "allFound")
        assert second.children[1].skeleton() == 'Block[ReturnStatement[Literal("true")]]'

    def test_method_header_dropped(self):
        tree = parse_source("public static int twice(int value) { return value * 2; }")
        tokens = {n.token for n in tree.walk() if n.token}
        assert "twice" not in tokens
        assert tree.root.skeleton() == 'Block[ReturnStatement[BinaryExpr[Identifier("value"), Literal("2")]]]'

    def test_generic_method_and_annotations(self):
        src = "@Override public <T extends Comparable<T>> List<T> f(Map<String, List<T>> m) { return null; }"
        assert parse_source(src).root.skeleton() == 'Block[ReturnStatement[Literal("null")]]'

    def test_nested_generics_with_shift_token(self):
        tree = parse_source("List<List<String>> xs = new ArrayList<>(); int y = a >> 2;")
        kinds = node_kinds(tree)
        assert kinds["VariableDeclaration"] == 2
        assert kinds["BinaryExpr"] == 1

    @pytest.mark.parametrize("src, kind", [
        ("while (i < n) { i++; }", "WhileStatement"),
        ("for (int i = 0; i < n; i++) { s += i; }", "ForStatement"),
        ("for (String s : items) { use(s); }", "ForEachStatement"),
        ("do { i--; } while (i > 0);", "DoStatement"),
        ("try { f(); } catch (IOException e) { g(); } finally { h(); }", "TryStatement"),
        ("switch (k) { case 1: f(); break; default: g(); }", "SwitchStatement"),
        ("throw new IllegalStateException(\"x\");", "ThrowStatement"),
        ("x = cond ? a : b;", "ConditionalExpr"),
        ("y = (int) z;", "CastExpr"),
        ("ok = o instanceof String;", "InstanceOfExpr"),
        ("v = this.items[i].size();", "ArrayAccess"),
        ("int[] a = {1, 2, 3};", "ArrayInitializer"),
        ("a = new int[n];", "ArrayCreation"),
    ])
    def test_constructs(self, src, kind):
        assert node_kinds(parse_source(src))[kind] >= 1

    def test_literal_kinds(self):
        tree = parse_source("f(1, 2.5, \"s\", 'c', true, null);")
        lits = [n.token for n in tree.walk() if n.kind == "Literal"]
        assert lits == ["1", "2.5", '"s"', "'c'", "true", "null"]

    def test_deterministic(self):
        assert parse_source(FIG3) == parse_source(FIG3)

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError) as info:
            parse_source("int x = ;")
        assert (info.value.line, info.value.col) == (1, 9)
        assert "expression" in str(info.value)

    def test_unterminated_block(self):
        with pytest.raises(ParseError):
            parse_source("if (a) { b();")

    def test_comments_ignored(self):
        a = parse_source("/* lead */ return 1; // trailing")
        assert a.root == parse_source("return 1;").root


class TestTreeJson:
    def test_minimal(self):
        tree = load_tree('{"kind":"Block","children":[]}')
        assert tree.root == ParseNode("Block")
        assert tree.size() == 1

    def test_round_trip(self):
        doc = {"format": "codetree/1", "root": {"kind": "Block", "children": [
            {"kind": "ReturnStatement", "children": [{"kind": "Literal", "token": "0"}]}]}}
        assert dump_tree(load_tree(doc)) == canonical(doc)
        assert load_tree(dump_tree(load_tree(doc))) == load_tree(doc)

    def test_unknown_kind_accepted(self):
        assert load_tree({"kind": "Foo"}).root.kind == "Foo"

    @pytest.mark.parametrize("doc, path", [
        ({"kind": ""}, "root.kind"),
        ({"kind": "Block", "children": [{"token": "x"}]}, "root.children[0].kind"),
        ({"kind": "Block", "children": [{"kind": "Identifier", "token": 3}]}, "root.children[0].token"),
        ({"kind": "Identifier", "token": "x", "children": [{"kind": "Block"}]}, "root"),
        ({"kind": "Block", "extra": 1}, "root"),
    ])
    def test_schema_errors_name_path(self, doc, path):
        with pytest.raises(TreeSchemaError) as info:
            load_tree(doc)
        assert info.value.path == path

    def test_wrong_format_tag(self):
        with pytest.raises(TreeSchemaError):
            load_tree({"format": "other/9", "root": {"kind": "Block"}})

    def test_combine_name_children_allowed(self):
        node = {"kind": "CombineName", "children": [{"kind": "Word", "token": "all"},
                                                    {"kind": "Word", "token": "found"}]}
        assert load_tree(node).root.children[1].token == "found"


class TestNodeKinds:
    def test_single(self):
        assert node_kinds(ParseTree(ParseNode("Block"))) == {"Block": 1}

    def test_two_ifs(self):
        assert node_kinds(parse_source(FIG3))["IfStatement"] == 2

    def test_total_equals_size(self):
        tree = parse_source(FIG3)
        assert sum(node_kinds(tree).values()) == tree.size()


# --- grammar-derived fuzzing ---------------------------------------------------

names = st.sampled_from(["a", "b", "count", "allFound", "x_1", "dm"])
literals = st.sampled_from(["0", "42", "1.5", "\"s\"", "'c'", "true", "null"])


def _expressions():
    base = st.one_of(names, literals)
    return st.recursive(base, lambda inner: st.one_of(
        st.tuples(inner, st.sampled_from(["+", "-", "*", "<", "==", "&&"]), inner).map(
            lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(names, st.lists(inner, max_size=3)).map(lambda t: f"{t[0]}({', '.join(t[1])})"),
        inner.map(lambda e: f"!{e}"),
        st.tuples(names, inner).map(lambda t: f"{t[0]}[{t[1]}]"),
    ), max_leaves=8)


def _statements():
    expr = _expressions()
    simple = st.one_of(
        st.tuples(names, expr).map(lambda t: f"{t[0]} = {t[1]};"),
        st.tuples(names, expr).map(lambda t: f"int {t[0]} = {t[1]};"),
        expr.map(lambda e: f"return {e};"),
        st.just("break;"),
    )
    return st.recursive(simple, lambda inner: st.one_of(
        st.tuples(expr, st.lists(inner, max_size=3)).map(
            lambda t: f"if ({t[0]}) {{ {' '.join(t[1])} }}"),
        st.tuples(expr, st.lists(inner, max_size=3)).map(
            lambda t: f"while ({t[0]}) {{ {' '.join(t[1])} }}"),
    ), max_leaves=6)


@settings(max_examples=150, deadline=None)
@given(st.lists(_statements(), min_size=1, max_size=4))
def test_fuzz_grammar_programs_parse(stmts):
    src = "\n".join(stmts)
    tree = parse_source(src)
    assert tree.root.kind == "Block"
    for node in tree.walk():
        assert node.token is not None or node.children or node.kind in (
            "BreakStatement", "Block", "ReturnStatement", "ThisExpr", "EmptyStatement")
    assert load_tree(dump_tree(tree)) == tree


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(["if", "(", ")", "{", "}", "x", "=", "1", ";", "+", "return",
                                 "while", "<", ">", ".", ",", "new", "int", "[", "]"]), max_size=25))
def test_fuzz_token_soup_never_crashes(toks):
    try:
        tree = parse_source(" ".join(toks))
    except ParseError as exc:
        assert exc.line >= 1 and exc.col >= 1
    else:
        assert isinstance(tree, ParseTree)


def test_tokenize_keeps_comments_on_request():
    toks = tokenize("/** doc */ int x;", keep_comments=True)
    assert toks[0].kind == "comment"
    assert json.dumps([t.text for t in tokenize("a>>=b")]) == '["a", ">>=", "b", ""]'

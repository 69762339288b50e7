import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from treecomment.identifiers import (AbbrevContext, expand_abbreviation, rewrite_identifiers,
                                     split_identifier, strip_identifiers, verify_expansion)
from treecomment.javalike import parse_source
from treecomment.tree import COMBINE, ParseNode, ParseTree

# Identifier splitting examples published with the method.
SPLIT_TABLE = [
    ("contextInitialize", ["context", "initialize"]),
    ("apiSettings", ["api", "settings"]),
    ("buildDataDictionary", ["build", "data", "dictionary"]),
    ("add_result", ["add", "result"]),
]

# (abbreviation, expected words, context expression it was taken from)
ABBREV_TABLE = [
    ("val", ["value"], "key.value()"),
    ("cm", ["confusion", "matrix"], "new ConfusionMatrix()"),
    ("conf", ["configuration"], "context.getConfiguration()"),
    ("rnd", ["random"], "RandomUtils.getRandom()"),
]


class TestSplit:
    @pytest.mark.parametrize("name, words", SPLIT_TABLE)
    def test_published_rows(self, name, words):
        assert split_identifier(name) == words

    def test_atomic(self):
        assert split_identifier("x") == ["x"]

    def test_acronyms_and_digits(self):
        assert split_identifier("XMLReader") == ["xml", "reader"]
        assert split_identifier("parseHTTP2Frame") == ["parse", "http", "2", "frame"]
        assert split_identifier("MAX_VALUE") == ["max", "value"]

    @given(st.from_regex(r"[A-Za-z_$][A-Za-z0-9_$]{0,15}", fullmatch=True))
    def test_concatenation_property(self, name):
        words = split_identifier(name)
        assert "".join(words) == re.sub(r"[_$]", "", name).lower()
        assert all(words) and all(w == w.lower() for w in words)


class TestAbbreviation:
    @pytest.mark.parametrize("abbr, words, context", ABBREV_TABLE)
    def test_published_rows_in_statement_context(self, abbr, words, context):
        tree = rewrite_identifiers(parse_source(f"Object {abbr} = {context};"), expand_abbrev=True)
        declarator = tree.root.children[0].children[1]
        target = declarator.children[0]
        if len(words) == 1:
            assert target == ParseNode("Identifier", words[0])
        else:
            assert target.kind == COMBINE
            assert [w.token for w in target.children] == words

    def test_double_matrix_walkthrough(self):
        ctx = AbbrevContext.from_words(["Matrix", "DoubleMatrix", "confusionMatrix"])
        assert expand_abbreviation("dm", ctx) == ["double", "matrix"]
        tree = rewrite_identifiers(parse_source("Matrix dm = new DoubleMatrix(confusionMatrix);"),
                                   expand_abbrev=True)
        dm = tree.root.children[0].children[1].children[0]
        assert dm.kind == COMBINE and [w.token for w in dm.children] == ["double", "matrix"]

    @pytest.mark.parametrize("abbr, words, context", ABBREV_TABLE)
    def test_published_rows_with_word_context(self, abbr, words, context):
        names = re.findall(r"[A-Za-z]+", context.replace("new ", ""))
        assert expand_abbreviation(abbr, AbbrevContext.from_words(names)) == words

    def test_no_match(self):
        assert expand_abbreviation("zz", AbbrevContext.from_words(["value"])) is None

    def test_case_insensitive(self):
        assert expand_abbreviation("CM", AbbrevContext.from_words(["ConfusionMatrix"])) == ["confusion", "matrix"]

    def test_initials_prefix_run(self):
        ctx = AbbrevContext.from_words(["bufferedReaderFactory"])
        assert expand_abbreviation("br", ctx) == ["buffered", "reader"]

    def test_nearest_candidate_wins(self):
        ctx = AbbrevContext(("valueA", "values"), (0, 5), anchor=4)
        assert expand_abbreviation("val", ctx) == ["values"]

    @given(st.text("abcdm", min_size=1, max_size=4),
           st.lists(st.sampled_from(["DoubleMatrix", "value", "confusionMatrix", "getRandom", "cmd",
                                     "abcDef", "mdBook"]), max_size=4))
    def test_self_verifying(self, ident, words):
        out = expand_abbreviation(ident, AbbrevContext.from_words(words))
        if out is not None:
            assert verify_expansion(ident, out)


class TestRewrite:
    def test_compound_becomes_combine_name(self):
        tree = rewrite_identifiers(ParseTree(ParseNode("Identifier", "allFound")))
        assert tree.root == ParseNode(COMBINE, None, (ParseNode("Word", "all"), ParseNode("Word", "found")))

    def test_single_word_lowercased_leaf(self):
        assert rewrite_identifiers(ParseTree(ParseNode("Identifier", "x"))).root == ParseNode("Identifier", "x")
        assert rewrite_identifiers(ParseTree(ParseNode("Identifier", "Count"))).root.token == "count"

    def test_expansion_off_by_default(self):
        tree = rewrite_identifiers(parse_source("Matrix dm = new DoubleMatrix(m);"))
        assert tree.root.children[0].children[1].children[0] == ParseNode("Identifier", "dm")

    def test_node_count_accounting(self):
        src = "if (!found) { allFound = false; } if (allFound) { return buildDataDictionary(x); }"
        before = parse_source(src)
        after = rewrite_identifiers(before)
        extra = sum(len(n.children) for n in after.walk() if n.kind == COMBINE)
        assert after.size() == before.size() + extra
        non_ident = [n.kind for n in before.walk() if n.kind != "Identifier"]
        assert [n.kind for n in after.walk() if n.kind not in ("Identifier", COMBINE, "Word")] == non_ident


class TestStrip:
    def test_consistent_placeholders(self):
        tree = strip_identifiers(parse_source("a = b + a;"))
        idents = [n.token for n in tree.walk() if n.kind == "Identifier"]
        assert idents == ["ID0", "ID1", "ID0"]

    def test_no_identifiers_unchanged(self):
        tree = parse_source("return 1 + 2;")
        assert strip_identifiers(tree) == tree

    def test_structure_preserved(self):
        tree = parse_source("if (allFound) { total = count(items, 3); }")
        stripped = strip_identifiers(tree)
        assert [(n.kind, len(n.children)) for n in stripped.walk()] == [
            (n.kind, len(n.children)) for n in tree.walk()]

    def test_combine_name_gets_one_placeholder(self):
        combined = rewrite_identifiers(parse_source("allFound = allFound;"))
        stripped = strip_identifiers(combined)
        words = [n.token for n in stripped.walk() if n.kind == "Word"]
        assert words and len(set(words)) == 1

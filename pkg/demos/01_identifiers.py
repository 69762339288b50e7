"""
Identifier words
================

Compound names are split into words, and short names are expanded from the
names around them. Both feed the tree encoder through CombineName nodes.
"""
from treecomment import parse_source, rewrite_identifiers, split_identifier
from treecomment.identifiers import AbbrevContext, expand_abbreviation

for name in ["contextInitialize", "apiSettings", "buildDataDictionary", "add_result", "XMLReader"]:
    print(f"{name:22s} -> {split_identifier(name)}")

# "dm" is not a substring of any nearby name, but it is the initials of DoubleMatrix
ctx = AbbrevContext.from_words(["Matrix", "DoubleMatrix", "confusionMatrix"])
print("dm ->", expand_abbreviation("dm", ctx))

tree = parse_source("Matrix dm = new DoubleMatrix(confusionMatrix);")
print(tree.root.skeleton())
print(rewrite_identifiers(tree, expand_abbrev=True).root.skeleton())

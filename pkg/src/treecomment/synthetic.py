"""Small synthetic corpora for smoke tests, demos and the toy experiments.

* ``toy_pairs`` -- twenty hand-written methods with hand-written comments.
* ``classification_corpus`` -- three program classes (loop-sum,
  conditional-max, string-builder) whose identifiers, library names
  included, are drawn at random so only structure tells them apart.
* ``structured_corpus`` -- six templates, each with one fixed comment, so
  the comment is a function of the program structure alone.
"""
from __future__ import annotations

import numpy as np

from .classify import LabeledExample
from .corpus import CommentPair
from .javalike import parse_source

_TOY = [
    ("int add(int a, int b) { return a + b; }",
     "adds two integers"),
    ("boolean isEmpty() { return size == 0; }",
     "checks whether the list has no elements"),
    ("void clear() { size = 0; head = null; }",
     "removes every element from the list"),
    ("int max(int a, int b) { if (a > b) { return a; } return b; }",
     "returns the larger of two numbers"),
    ("int sum(int[] values) { int total = 0; for (int v : values) { total += v; } return total; }",
     "sums all values in the array"),
    ("String greet(String name) { return \"Hello \" + name; }",
     "builds a greeting for the given name"),
    ("void swap(int[] a, int i, int j) { int t = a[i]; a[i] = a[j]; a[j] = t; }",
     "swaps two entries of an array"),
    ("double average(double[] xs) { double s = 0; for (int i = 0; i < xs.length; i++) { s += xs[i]; }"
     " return s / xs.length; }",
     "computes the mean of the samples"),
    ("int indexOf(int[] data, int key) { for (int i = 0; i < data.length; i++) {"
     " if (data[i] == key) { return i; } } return -1; }",
     "finds the position of a key or minus one"),
    ("void log(String message) { System.out.println(message); }",
     "prints a message to standard output"),
    ("int count(List<String> items) { return items.size(); }",
     "counts the items in a list"),
    ("boolean isEven(int n) { return n % 2 == 0; }",
     "tests if a number is even"),
    ("int factorial(int n) { int r = 1; while (n > 1) { r *= n; n--; } return r; }",
     "computes the factorial iteratively"),
    ("String reverse(String s) { return new StringBuilder(s).reverse().toString(); }",
     "returns the characters of a string in reverse order"),
    ("void close() { if (stream != null) { stream.close(); stream = null; } }",
     "closes the underlying stream if it is open"),
    ("int abs(int x) { return x < 0 ? -x : x; }",
     "absolute value of an integer"),
    ("Object get(int index) { checkIndex(index); return elements[index]; }",
     "returns the element stored at an index"),
    ("void push(Object item) { ensureCapacity(size + 1); elements[size++] = item; }",
     "pushes an item on top of the stack"),
    ("int gcd(int a, int b) { while (b != 0) { int t = b; b = a % b; a = t; } return a; }",
     "greatest common divisor by euclid"),
    ("boolean contains(Set<String> seen, String key) { synchronized (seen) { return seen.contains(key); } }",
     "thread safe membership test on a shared set"),
]

_POOL = ["alpha", "bravo", "cargo", "delta", "ember", "flint", "grove", "haven", "iris", "jolt",
         "koala", "lumen", "maple", "nexus", "orbit", "prism", "quill", "raven", "sable", "tango",
         "umber", "vivid", "willow", "xenon", "yarrow", "zephyr"]

CLASS_NAMES = ("loop-sum", "conditional-max", "string-builder")

_NUMERIC = ("int", "long", "double")

# Each template body uses {placeholders}; {T} is a numeric primitive type,
# every other placeholder becomes a random identifier.
_LOOP_SUM = [
    "{T} {acc} = 0; for (int {i} = 0; {i} < {arr}.{len}; {i}++) {{ {acc} += {arr}[{i}]; }} return {acc};",
    "{T} {acc} = 0; int {i} = 0; while ({i} < {arr}.{len}) {{ {acc} += {arr}[{i}]; {i}++; }} return {acc};",
    "{T} {acc} = 0; for ({T} {x} : {arr}) {{ {acc} += {x}; }} return {acc};",
]
_COND_MAX = [
    "{T} {acc} = {arr}[0]; for (int {i} = 1; {i} < {arr}.{len}; {i}++) {{"
    " if ({arr}[{i}] > {acc}) {{ {acc} = {arr}[{i}]; }} }} return {acc};",
    "{T} {acc} = {arr}[0]; int {i} = 1; while ({i} < {arr}.{len}) {{"
    " if ({arr}[{i}] > {acc}) {{ {acc} = {arr}[{i}]; }} {i}++; }} return {acc};",
    "{T} {acc} = {arr}[0]; for ({T} {x} : {arr}) {{ if ({x} > {acc}) {{ {acc} = {x}; }} }} return {acc};",
]
_STRING_BUILDER = [
    "{B} {acc} = new {B}(); for (int {i} = 0; {i} < {arr}.{len}; {i}++) {{"
    " {acc}.{app}({arr}[{i}]); }} return {acc}.{fin}();",
    "{B} {acc} = new {B}(); int {i} = 0; while ({i} < {arr}.{len}) {{"
    " {acc}.{app}({arr}[{i}]); {i}++; }} return {acc}.{fin}();",
    "{B} {acc} = new {B}(); for ({T} {x} : {arr}) {{ {acc}.{app}({x}); }} return {acc}.{fin}();",
]
_COUNT_POSITIVE = [
    "int {acc} = 0; for (int {i} = 0; {i} < {arr}.{len}; {i}++) {{"
    " if ({arr}[{i}] > 0) {{ {acc}++; }} }} return {acc};",
    "int {acc} = 0; for ({T} {x} : {arr}) {{ if ({x} > 0) {{ {acc}++; }} }} return {acc};",
]
_FIND_INDEX = [
    "for (int {i} = 0; {i} < {arr}.{len}; {i}++) {{ if ({arr}[{i}] == {key}) {{ return {i}; }} }} return -1;",
    "int {i} = 0; while ({i} < {arr}.{len}) {{ if ({arr}[{i}] == {key}) {{ return {i}; }} {i}++; }}"
    " return -1;",
]
_REVERSE = [
    "for (int {i} = 0; {i} < {arr}.{len} / 2; {i}++) {{ {T} {x} = {arr}[{i}];"
    " {arr}[{i}] = {arr}[{arr}.{len} - 1 - {i}]; {arr}[{arr}.{len} - 1 - {i}] = {x}; }}",
    "int {i} = 0; int {j} = {arr}.{len} - 1; while ({i} < {j}) {{ {T} {x} = {arr}[{i}];"
    " {arr}[{i}] = {arr}[{j}]; {arr}[{j}] = {x}; {i}++; {j}--; }}",
]

_CLASS_TEMPLATES = (_LOOP_SUM, _COND_MAX, _STRING_BUILDER)

STRUCTURED_TEMPLATES = (
    (_LOOP_SUM, "returns the sum of all elements in the array"),
    (_COND_MAX, "returns the largest element in the array"),
    (_STRING_BUILDER, "joins all elements of the array into one string"),
    (_COUNT_POSITIVE, "counts the elements of the array that are positive"),
    (_FIND_INDEX, "returns the index of the first element equal to the key"),
    (_REVERSE, "reverses the order of the elements in the array in place"),
)

_NOISE = [
    "{helper}({arr});",
    "int {n} = {arr}.{len};",
]


def random_identifier(rng: np.random.Generator, taken: set[str]) -> str:
    """Fresh camelCase name of one or two pool words."""
    while True:
        words = [str(w) for w in rng.choice(_POOL, size=int(rng.integers(1, 3)), replace=False)]
        name = words[0] + "".join(w.capitalize() for w in words[1:])
        if name not in taken:
            taken.add(name)
            return name


def _fill(template: str, rng: np.random.Generator, noise: bool = True) -> str:
    taken: set[str] = set()
    names = {k: random_identifier(rng, taken)
             for k in ("acc", "i", "j", "x", "arr", "len", "key", "app", "fin", "helper", "n")}
    cls_name = random_identifier(rng, taken)
    names["B"] = cls_name[0].upper() + cls_name[1:]
    names["T"] = str(rng.choice(_NUMERIC))
    body = template
    if noise and rng.random() < 0.5:
        body = str(rng.choice(_NOISE)) + " " + body
    return body.format(**names)


def toy_pairs() -> list[CommentPair]:
    """The twenty hand-written (method, comment) pairs."""
    return [CommentPair(parse_source(src), comment.split(), {"method": f"toy{i}"})
            for i, (src, comment) in enumerate(_TOY)]


def classification_corpus(n_per_class: int = 13, seed: int = 0) -> list[LabeledExample]:
    """Labeled examples, classes interleaved, identifiers randomized."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_per_class):
        for label, templates in enumerate(_CLASS_TEMPLATES):
            src = _fill(str(rng.choice(templates)), rng)
            out.append(LabeledExample(parse_source(src), label))
    return out


def split_classification(examples: list[LabeledExample], n_test_per_class: int = 3):
    """Last ``n_test_per_class`` examples of every class go to the test split."""
    by_label: dict[int, list[LabeledExample]] = {}
    for ex in examples:
        by_label.setdefault(ex.label, []).append(ex)
    train, test = [], []
    for label in sorted(by_label):
        items = by_label[label]
        train += items[:-n_test_per_class]
        test += items[-n_test_per_class:]
    return train, test


def structured_corpus(n_per_template: int = 10, seed: int = 0) -> list[CommentPair]:
    """Pairs whose comment depends only on which template produced the body."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n_per_template):
        for t, (templates, comment) in enumerate(STRUCTURED_TEMPLATES):
            src = _fill(str(rng.choice(templates)), rng)
            out.append(CommentPair(parse_source(src), comment.split(), {"template": t, "index": k}))
    return out

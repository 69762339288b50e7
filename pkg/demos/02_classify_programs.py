"""
Classifying programs by structure
=================================

Three kinds of method (summing loop, conditional max, string building) are
written with random identifier names. A tree encoder sees the structure; a
bag of words mostly sees noise.
"""
import numpy as np

from treecomment import EncoderConfig, classify, evaluate_assignment, train_classifier
from treecomment.synthetic import CLASS_NAMES, classification_corpus, split_classification

train, test = split_classification(classification_corpus(13, seed=0), 3)
print(f"{len(train)} training and {len(test)} test methods")
gold = [ex.label for ex in test]

for model in ["avg", "sum", "lea", "les"]:
    res = train_classifier(train, EncoderConfig(model, 64), epochs=20, seed=0, k=3)
    pred = classify(res.encoder, res.head, [ex.tree for ex in test])
    m = evaluate_assignment(pred, gold, 3)
    print(f"{model:4s} accuracy {m.accuracy:.3f} purity {m.purity:.3f} f1 {m.macro_f1:.3f}"
          f"  loss {res.losses[0]:.3f} -> {res.losses[-1]:.3f}")

# the learned code vectors of one class sit close together
res = train_classifier(train, EncoderConfig("avg", 64), epochs=20, seed=0, k=3)
vecs = np.stack([res.encoder.vector(ex.tree).v for ex in test])
unit = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
print("cosine similarity of test vectors (rows grouped by class):")
print(np.round(unit @ unit.T, 2))
print("classes:", ", ".join(CLASS_NAMES))

"""
Generating comments
===================

Train a Code-GRU decoder on the twenty toy methods, then decode greedily and
with beam search. The code vector comes from a frozen, randomly initialized
encoder, so the decoder must learn to read it.
"""
import numpy as np

from treecomment import EncoderConfig, TreeEncoder, train_generator, tune_beam
from treecomment.decoder import BeamConfig, beam_search, greedy_decode, strip_sentinels
from treecomment.synthetic import toy_pairs

pairs = toy_pairs()
encoder = TreeEncoder.fit_vocab([p.tree for p in pairs], EncoderConfig("avg", 64), np.random.default_rng(0))
res = train_generator([(p.tree, p.comment) for p in pairs], encoder, "gru", epochs=300, lr=0.1,
                      hidden=64, embed=64, min_freq=1)
print("loss by epoch:", [round(x, 3) for x in res.losses[::50]])

for p in pairs[:5]:
    v = encoder.vector(p.tree)
    print("gold  :", " ".join(p.comment))
    print("greedy:", " ".join(strip_sentinels(greedy_decode(res.decoder, v))))
    print("beam 4:", " ".join(strip_sentinels(beam_search(res.decoder, v, BeamConfig(4, 0.6)))))

vectors = [encoder.vector(p.tree) for p in pairs]
tuned = tune_beam(res.decoder, vectors, [p.comment for p in pairs], beam_sizes=(1, 2, 4), alphas=(0.0, 0.5, 1.0))
print(f"best beam {tuned.best.beam_size}, alpha {tuned.best.alpha}, Rouge-2 F1 {tuned.score:.3f}")

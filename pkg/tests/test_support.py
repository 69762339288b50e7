"""Config loading, synthetic corpora and the gradient-check harness."""
import numpy as np
import pytest

from treecomment.config import ConfigError, RunConfig, load_config
from treecomment.gradcheck import SUITES, check_encoder_instance, random_tree, run_gradcheck
from treecomment.synthetic import (CLASS_NAMES, STRUCTURED_TEMPLATES, classification_corpus, random_identifier,
                                   split_classification, structured_corpus, toy_pairs)


class TestConfig:
    def test_defaults(self):
        cfg = load_config()
        assert cfg == RunConfig()
        assert len(cfg.beam_sizes) == 10 and len(cfg.alphas) == 11

    def test_precedence(self, tmp_path):
        (tmp_path / "c.json").write_text('{"seed": 4, "d": 16}')
        cfg = load_config(tmp_path / "c.json", {"seed": 9, "d": None})
        assert (cfg.seed, cfg.d) == (9, 16)

    @pytest.mark.parametrize("doc", ['{"sede": 1}', "[1]", "{bad", '{"lr": -1}', '{"model": "tree"}',
                                     '{"ratios": [0.5, 0.5]}', '{"epochs": true}', '{"alphas": [2]}'])
    def test_rejected(self, tmp_path, doc):
        (tmp_path / "c.json").write_text(doc)
        with pytest.raises(ConfigError):
            load_config(tmp_path / "c.json")

    def test_unknown_override(self):
        with pytest.raises(ConfigError):
            load_config(None, {"nope": 1})


class TestSynthetic:
    def test_toy_pairs(self):
        pairs = toy_pairs()
        assert len(pairs) == 20
        assert len({" ".join(p.comment) for p in pairs}) == 20

    def test_classification_sizes_and_labels(self):
        train, test = split_classification(classification_corpus(13, seed=0), 3)
        assert (len(train), len(test)) == (30, 9)
        assert sorted(ex.label for ex in test) == [0, 0, 0, 1, 1, 1, 2, 2, 2]
        assert len(CLASS_NAMES) == 3

    def test_seeded(self):
        a = [ex.tree for ex in classification_corpus(3, seed=5)]
        b = [ex.tree for ex in classification_corpus(3, seed=5)]
        c = [ex.tree for ex in classification_corpus(3, seed=6)]
        assert a == b and a != c

    def test_identifiers_are_randomized(self):
        trees = [ex.tree for ex in classification_corpus(6, seed=0) if ex.label == 0]
        names = [{n.token for n in t.walk() if n.kind == "Identifier"} for t in trees]
        assert len({frozenset(s) for s in names}) == len(names)

    def test_random_identifier_avoids_taken(self):
        rng = np.random.default_rng(0)
        taken: set[str] = set()
        names = [random_identifier(rng, taken) for _ in range(30)]
        assert len(set(names)) == 30

    def test_structured_corpus(self):
        pairs = structured_corpus(10, seed=1)
        assert len(pairs) == 60
        for p in pairs:
            assert p.comment == STRUCTURED_TEMPLATES[p.meta["template"]][1].split()


class TestGradcheck:
    def test_random_tree_size(self):
        rng = np.random.default_rng(0)
        assert all(1 <= random_tree(rng, 15).size() <= 15 for _ in range(200))

    def test_instance_error_small(self):
        assert check_encoder_instance(np.random.default_rng(3), "avg") <= 1e-4

    def test_run_subset(self):
        results = run_gradcheck(seed=1, instances=3, suites=["code-gru", "basic-rnn-relu"])
        assert [r.name for r in results] == ["code-gru", "basic-rnn-relu"]
        assert all(r.passed and r.instances == 3 for r in results)

    def test_all_suites_named(self):
        assert {"code-rnn-sum", "code-rnn-avg", "code-gru", "basic-rnn-tanh"} <= set(SUITES)

    def test_broken_gradient_is_caught(self, monkeypatch):
        import treecomment.encoder as enc
        original = enc.encode_backward

        def wrong(trace, grad_root, params, grads=None):
            g = original(trace, grad_root, params, grads)
            g["W"] *= 1.01
            return g

        monkeypatch.setattr(enc, "encode_backward", wrong)
        monkeypatch.setattr("treecomment.gradcheck.encode_backward", wrong, raising=False)
        results = run_gradcheck(seed=0, instances=5, suites=["code-rnn-sum"])
        assert not results[0].passed

"""Tree-structured code encoders and comment generators in plain numpy."""

__version__ = "0.1.0"

from .checkpoint import (Checkpoint, CheckpointError, load_checkpoint, restore_decoder, restore_encoder,
                         restore_head, save_checkpoint)
from .classify import (ClassifierHead, ClassMetrics, LabeledExample, best_assignment, classify,
                       evaluate_assignment, predict, train_classifier)
from .corpus import CommentPair, build_vocab, clean_comment, extract_pairs, split_corpus
from .decoder import (BasicRnnParams, BeamConfig, CodeGruParams, basic_rnn_step, beam_search, code_gru_step,
                      greedy_decode, length_penalty, train_generator, tune_beam)
from .encoder import CodeRnnParams, CodeVector, EncoderConfig, TreeEncoder, encode, encode_backward, encode_bag
from .identifiers import (AbbrevContext, expand_abbreviation, rewrite_identifiers, split_identifier,
                          strip_identifiers)
from .javalike import ParseError, parse_source
from .numeric import AdaGrad, adagrad_step, cross_entropy, finite_diff_gradient, matvec, relu, softmax
from .rouge import RougeScore, corpus_rouge, rouge_n
from .tree import ParseNode, ParseTree, TreeSchemaError, dump_tree, load_tree, node_kinds
from .vocab import END, START, UNK, Vocab

"""Unsupervised constituency parsing with constituency tests."""

from ._core import (
    GrammarOracle,
    InputError,
    NativeScorer,
    NotTrainableError,
    Scorer,
    apply_test,
    baseline,
    binarize_right,
    corpus_f1,
    main,
    mbr_parse,
    normalize_for_eval,
    preprocess,
    render,
    test_names,
    tree_spans,
    tree_words,
)

__all__ = [
    "GrammarOracle",
    "InputError",
    "NativeScorer",
    "NotTrainableError",
    "Scorer",
    "apply_test",
    "baseline",
    "binarize_right",
    "corpus_f1",
    "main",
    "mbr_parse",
    "normalize_for_eval",
    "preprocess",
    "render",
    "test_names",
    "tree_spans",
    "tree_words",
]

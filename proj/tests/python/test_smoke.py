import random
from pathlib import Path

import pytest

import ctparse

SOURCE = Path(__file__).resolve().parents[2]
GRAMMAR = str(SOURCE / "data" / "grammars" / "default.cfg")
MIDDAY = "by midday , the london market was in full retreat".split()


def test_test_names_and_goldens():
    assert ctparse.test_names() == [
        "cleft_is", "cleft_was", "coordination", "sub_it",
        "sub_ones", "sub_did_so", "front_movement", "end_movement",
    ]
    out = ctparse.apply_test("sub_it", MIDDAY, 3, 6)
    assert " ".join(out) == "by midday , it was in full retreat"
    out = ctparse.apply_test("front_movement", MIDDAY, 3, 6)
    assert " ".join(out) == "the london market , by midday , was in full retreat"
    with pytest.raises(ValueError):
        ctparse.apply_test("nope", MIDDAY, 3, 6)
    with pytest.raises(ValueError):
        ctparse.apply_test("sub_it", MIDDAY, 3, 30)


def test_preprocess():
    assert ctparse.preprocess(["``", "The", "Dog", "ran", "''", "."]) == ["the", "dog", "ran"]


def _binary_trees(lo, hi):
    if hi - lo == 1:
        yield []
        return
    for k in range(lo + 1, hi):
        for left in _binary_trees(lo, k):
            for right in _binary_trees(k, hi):
                yield [(lo, hi)] + left + right


def test_mbr_parse_matches_enumeration():
    rng = random.Random(3)
    for n in range(2, 8):
        words = [f"w{i}" for i in range(n)]
        for _ in range(20):
            scores = {(lo, hi): rng.randint(0, 6) / 6
                      for lo in range(n) for hi in range(lo + 2, n + 1) if hi - lo < n}
            full = lambda s: 1.0 if s[1] - s[0] in (1, n) else scores[s]
            best = max(sum(full(s) for s in t) for t in _binary_trees(0, n))
            tree = ctparse.mbr_parse(words, scores)
            got = sum(full(s) for s in ctparse.tree_spans(tree))
            assert got == pytest.approx(best, abs=1e-12)


def test_eval_and_baselines():
    gold = ["(S (NP (DT the) (NN dog)) (VP (VBD saw) (NP (PRP it))) (. .))"]
    assert ctparse.corpus_f1(gold, gold) == 100.0
    assert ctparse.normalize_for_eval(gold[0]) == [(0, 2), (2, 4)]
    rb = ctparse.baseline("right", ["a", "b", "c", "d"])
    assert ctparse.tree_spans(rb) == [(0, 4), (1, 4), (2, 4)]
    with pytest.raises(ValueError):
        ctparse.tree_spans("(S (NP x)")


def test_oracle_pipeline_beats_right_branching():
    oracle = ctparse.GrammarOracle(GRAMMAR)
    assert not oracle.trainable
    sample = oracle.sample(200, 12, 7)
    sents = [s for s, _ in sample]
    gold = [t for _, t in sample]
    pred = oracle.parse(sents, workers=2)
    rb = [ctparse.baseline("right", s) for s in sents]
    f1 = ctparse.corpus_f1(gold, pred)
    assert f1 >= 85.0
    assert f1 - ctparse.corpus_f1(gold, rb) >= 20.0


def _toy():
    runs = [[f"t{k:02d}" for k in range(start, start + n)]
            for n in range(3, 9) for start in range(0, 41 - n)]
    train = [r for r in runs if (int(r[0][1:]) % 5) != 2]
    held = [r for r in runs if (int(r[0][1:]) % 5) == 2]
    return train, held


def _shuffled(rng, toks):
    while True:
        out = toks[:]
        rng.shuffle(out)
        if out != toks:
            return out


def test_realfake_toy_reference_solver_and_native_scorer():
    pytest.importorskip("sklearn")
    from sklearn.feature_extraction.text import CountVectorizer
    from sklearn.linear_model import LogisticRegression

    rng = random.Random(0)
    train, held = _toy()
    x_train, y_train = [], []
    for _ in range(2000):
        r = rng.choice(train)
        x_train += [r, _shuffled(rng, r)]
        y_train += [1, 0]
    x_held, y_held = [], []
    for r in held:
        x_held += [r, _shuffled(rng, r)]
        y_held += [1, 0]

    # Convex reference: bigram features separate the training set exactly.
    # Its held-out accuracy depends on the regularization strength, so only
    # separability is asserted here.
    vec = CountVectorizer(analyzer=lambda toks: ["<s>|" + toks[0]] +
                          [a + "|" + b for a, b in zip(toks, toks[1:])] + [toks[-1] + "|</s>"])
    ref = LogisticRegression(C=10.0, max_iter=2000).fit(vec.fit_transform(x_train), y_train)
    assert ref.score(vec.transform(x_train), y_train) == 1.0

    model = ctparse.NativeScorer(18)
    for i in range(0, len(x_train), 64):
        model.train_step(x_train[i:i + 64], y_train[i:i + 64], 1e-2)
    probs = model.score(x_held)
    acc = sum((p > 0.5) == bool(y) for p, y in zip(probs, y_held)) / len(y_held)
    assert acc >= 0.9


def test_native_scorer_roundtrip(tmp_path):
    m = ctparse.NativeScorer(12)
    assert m.score([["a", "b"]]) == [0.5]
    m.train_step([["a", "b"], ["b", "a"]], [1, 0], 0.1)
    path = str(tmp_path / "m.bin")
    m.save(path)
    again = ctparse.NativeScorer.load(path)
    assert again.score([["a", "b"], ["b", "a"]]) == m.score([["a", "b"], ["b", "a"]])
    assert again.step == 1


def test_cli_entry_point(tmp_path):
    gold = tmp_path / "g.txt"
    gold.write_text("(S (NP (DT the) (NN dog)) (VP (VBD ran)))\n")
    assert ctparse.main(["eval", "--gold", str(gold), "--pred", str(gold)]) == 0
    assert ctparse.main(["bogus"]) == 2

import random

import pytest
from hypothesis import given, settings

from helpers import dags, make_sentence, random_dag
from pointer_sdp.evaluation import AlignmentError, EvalCounts, evaluate, macro_average
from pointer_sdp.graph import SemanticGraph, Sentence


def half_match():
    s = make_sentence(4)
    gold = SemanticGraph.from_triples(s, [(0, 2, "ROOT"), (2, 1, "A"), (2, 3, "B"), (3, 4, "C")])
    # two arcs exact, one with the wrong label, one wrong head
    pred = SemanticGraph.from_triples(s, [(0, 2, "ROOT"), (2, 1, "A"), (2, 3, "X"), (1, 4, "C")])
    return pred, gold


def test_identity(example_graph):
    scores = evaluate([example_graph], [example_graph])
    assert scores.lf1 == scores.uf1 == 1.0
    assert scores.table().splitlines()[1] == "\t".join(["100.0"] * 6)


def test_disjoint():
    s = make_sentence(3)
    a = SemanticGraph.from_triples(s, [(0, 1, "ROOT"), (1, 2, "A")])
    b = SemanticGraph.from_triples(s, [(2, 1, "A"), (3, 2, "A")])
    scores = evaluate([a], [b])
    assert scores.lf1 == scores.uf1 == 0.0


def test_half_match():
    pred, gold = half_match()
    scores = evaluate([pred], [gold])
    assert (scores.labelled_tp, scores.unlabelled_tp, scores.predicted, scores.gold) == (2, 3, 4, 4)
    assert scores.lp == scores.lr == scores.lf1 == 0.5
    assert scores.uf1 == 0.75
    assert scores.table() == "UP\tUR\tUF1\tLP\tLR\tLF1\n75.0\t75.0\t75.0\t50.0\t50.0\t50.0"


def test_empty_graphs_score_zero():
    g = SemanticGraph(make_sentence(2))
    assert evaluate([g], [g]).lf1 == 0.0
    assert EvalCounts().scores() == dict.fromkeys(["up", "ur", "uf1", "lp", "lr", "lf1"], 0.0)


def test_macro_average_rounds_to_one_decimal():
    assert f"{macro_average([92.5, 94.2, 81.0]):.1f}" == "89.2"
    assert macro_average([0.925, 0.942, 0.810]) == pytest.approx(0.8923333)
    with pytest.raises(ValueError):
        macro_average([])


def test_counts_add_over_corpus():
    rng = random.Random(1)
    gold = [random_dag(rng, 6, 1.0) for _ in range(10)]
    pred = [random_dag(rng, 6, 1.0) for _ in range(10)]
    total = evaluate(pred, gold)
    pieces = [evaluate([p], [g]) for p, g in zip(pred, gold)]
    assert sum(pieces, EvalCounts()) == total


@settings(max_examples=100, deadline=None)
@given(dags(max_n=6), dags(max_n=6))
def test_swap_symmetry_and_bounds(a, b):
    b = SemanticGraph(a.sentence, b.arcs) if b.n == a.n else a
    ab, ba = evaluate([a], [b]), evaluate([b], [a])
    assert ab.lp == ba.lr and ab.up == ba.ur
    assert ab.lf1 == pytest.approx(ba.lf1)
    assert 0.0 <= ab.lf1 <= ab.uf1 <= 1.0


def test_misaligned_inputs_raise():
    a = SemanticGraph(make_sentence(2))
    b = SemanticGraph(Sentence.from_forms(["x", "y"]))
    with pytest.raises(AlignmentError):
        evaluate([a], [a, a])
    with pytest.raises(AlignmentError):
        evaluate([a], [b])

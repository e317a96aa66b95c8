import pytest

from chorc import events as ev
from chorc import harness
from chorc.harness import (GenParams, SweepReport, count_terms, enumerate_terms, gen_random,
                           metatheory_sweep, soundness_sweep, synthesize_actions)
from chorc.semantics import interpret
from chorc.syntax import Empty, Interaction, Refinable, is_ground, leaf_count, parse
from chorc.typecheck import type_of
from oracles import RUNNING


def test_enumerate_one_leaf():
    terms = list(enumerate_terms(GenParams(max_leaves=1, participants=("A", "B"), messages=("m",))))
    assert terms == [Empty(), Interaction("A", "B", "m"), Interaction("B", "A", "m")]


def test_enumerate_zero_leaves():
    assert list(enumerate_terms(GenParams(max_leaves=0))) == [Empty()]


def test_enumerate_counts_by_hand():
    # 2 leaves over {A,B} x {m}: 2 single leaves, then 3 operators x 2 x 2
    params = GenParams(max_leaves=2, participants=("A", "B"), messages=("m",))
    terms = list(enumerate_terms(params))
    assert len(terms) == 1 + 2 + 12 == count_terms(params)


def test_enumerate_is_ordered_duplicate_free_and_replayable():
    params = GenParams(max_leaves=3)
    terms = list(enumerate_terms(params))
    assert len(terms) == len(set(terms)) == count_terms(params)
    assert terms == list(enumerate_terms(params))
    sizes = [leaf_count(t) for t in terms]
    assert sizes == sorted(sizes)


def test_enumerate_with_refinables():
    params = GenParams(max_leaves=1, participants=("A", "B", "C"), messages=("m",), allow_refinable=True)
    terms = list(enumerate_terms(params))
    refinables = [t for t in terms if isinstance(t, Refinable)]
    assert refinables and all(t.tag is None for t in refinables)
    assert Refinable("A", (("m", "B"), ("m", "C"))) in refinables
    assert len(terms) == len(set(terms))


def test_params_validation():
    with pytest.raises(ValueError):
        GenParams(participants=("A",))
    with pytest.raises(ValueError):
        GenParams(messages=())
    with pytest.raises(ValueError):
        GenParams(seed=-1)


def test_gen_random_reproducible_and_bounded():
    for seed in range(200):
        p = GenParams(max_leaves=5, seed=seed)
        g = gen_random(p)
        assert g == gen_random(p)
        assert leaf_count(g) <= 5 and is_ground(g)


def test_soundness_sweep_three_leaves():
    report = soundness_sweep(GenParams(max_leaves=3))
    assert report.passed, report.violations[:3]
    assert report.total == count_terms(GenParams(max_leaves=3))
    assert 0 < report.typable < report.wf < report.total
    assert report.checks["unique-typing"] == report.typable


def test_metatheory_sweep_three_leaves():
    report = metatheory_sweep(GenParams(max_leaves=3))
    assert report.passed, report.violations[:3]
    assert report.checks["singleton-maxima"] == report.typable
    assert report.checks["t-ref-admission"] > 0


def test_single_term_sweeps():
    report = soundness_sweep(terms=[parse(RUNNING)])
    assert (report.total, report.typable, report.wf, report.violations) == (1, 1, 1, [])
    report = soundness_sweep(terms=[parse("A -> B : m | A -> C : m")])
    assert (report.typable, report.wf, report.violations) == (0, 1, [])


def test_metatheory_on_relay_and_empty():
    relay = parse("C -> B : md ; B -> S : md")
    actions = synthesize_actions(type_of(relay))
    assert parse("C ~> {md : S}") in actions
    report = metatheory_sweep(terms=[relay])
    assert report.passed and report.checks["t-ref-admission"] == len(actions)
    empty = metatheory_sweep(terms=[Empty()])
    assert "min-max" not in empty.checks and empty.passed


def test_sweeps_reject_refinables():
    with pytest.raises(ValueError):
        soundness_sweep(terms=[parse("A ~> {m : B}")])


def test_sweeps_are_deterministic():
    terms = [gen_random(GenParams(max_leaves=4, seed=s)) for s in range(100)]
    assert metatheory_sweep(terms=terms).to_json() == metatheory_sweep(terms=terms).to_json()


def test_skipped_terms_are_counted():
    choice = "(A -> B : m + A -> B : n)"
    g = parse(" ; ".join([choice] * 4))
    report = soundness_sweep(terms=[g, parse("A -> B : m")], cap=4)
    assert report.skipped == 1 and report.total == 2


def test_violations_are_sorted():
    report = SweepReport()
    report.violate(parse("B -> A : m"), "p", "w")
    report.violate(parse("A -> B : m"), "p", "w")
    assert [t for t, _, _ in report.finish().violations] == ["A -> B : m", "B -> A : m"]


def test_literal_composition_breaks_min_max():
    # the witness for the branch-local copies: with the literal composition a
    # maximal configuration ends in an output
    g = parse("(A -> B : m + A -> B : n) ; C -> A : m")
    assert metatheory_sweep(terms=[g]).passed
    left = interpret(g.left).es
    literal = ev.seq_compose(left, interpret(g.right).es, branch_local=False)
    ends = [{literal.labels[e].polarity for e in ev.bits(literal.max_mask(x))}
            for x in ev.max_config_masks(literal)]
    assert any("!" in pols for pols in ends)


def test_report_json_shape():
    report = soundness_sweep(terms=[parse(RUNNING)])
    assert set(report.to_json()) == {"total", "typable", "wf", "skipped", "checks", "violations"}
    assert harness.SweepReport().passed

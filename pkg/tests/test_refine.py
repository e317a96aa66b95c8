import pytest

from chorc.refine import (Binding, DuplicateTag, UnknownTag, infer_context, refine_and_check,
                          refines, substitute)
from chorc.semantics import interpret
from chorc.syntax import is_ground, parse, pretty, refinable_occurrences
from chorc.typecheck import ChorTypeError, RefContext, type_of, validate_ref_context
from oracles import G_ERR, RUNNING, TIE, labs


def bind(tag, text):
    return Binding(tag, parse(text))


def act(text):
    return parse(text)


def test_refines_single_interaction():
    report = refines(parse("A -> B : m"), act("A ~> {m : B}"))
    assert report.holds and report.initiator_found == "A" and report.failed_clause is None


def test_refines_choice_example():
    assert refines(parse("A -> B : m + A -> B : n ; A -> B : m"), act("A ~> {m : B}")).holds


def test_refines_relay():
    report = refines(parse("C -> B : md ; B -> S : md"), act("C ~> {md : S}"))
    assert report.holds and report.initiator_found == "C"


def test_parallel_with_two_initiators_fails_clause_ii():
    report = refines(parse("A -> B : m | C -> B : n"), act("A ~> {m : B}"))
    assert not report.holds and report.failed_clause == "ii"
    assert report.witnesses["initiators"] == ["A", "C"]


def test_missing_terminal_input_fails_clause_iii():
    report = refines(parse("C -> S : req ; S -> C : done"), act("C ~> {req : S}"))
    assert not report.holds and report.failed_clause == "iii"
    assert report.witnesses["participant"] == "S"


def test_undefined_candidate_fails_clause_i():
    report = refines(parse(G_ERR), act("C ~> {md : S}"))
    assert report.failed_clause == "i"
    assert "clause i" in report.describe()


def test_infer_context():
    assert infer_context(parse("C -> B : md ; B -> S : md")) == RefContext(
        frozenset("BCS"), labs("CB!md", "CB?md", "BS?md"), labs("CB!md", "BS!md", "BS?md"))
    assert infer_context(parse("A -> B : m")) == RefContext(
        frozenset("AB"), labs("AB!m", "AB?m"), labs("AB!m", "AB?m"))
    assert infer_context(parse("C -> B : x ; B -> S : req")) == RefContext(
        frozenset("BCS"), labs("CB!x", "CB?x", "BS?req"), labs("CB!x", "BS!req", "BS?req"))
    with pytest.raises(ChorTypeError):
        infer_context(parse("A -> B : m | A -> C : m"))


def test_substitute():
    g = parse(TIE)
    one = substitute(g, [bind("r3", "S -> C : stats ; S -> C : done")])
    assert one == parse("C ~> {md : S} + (C ~> {req : S} ; (S -> C : stats ; S -> C : done))")
    assert [n for n, _ in refinable_occurrences(one)] == ["r1", "r2"]
    assert substitute(g, []) == g
    full = substitute(g, [bind("r1", "C -> S : md"), bind("r2", "C -> S : req"),
                          bind("r3", "S -> C : stats ; S -> C : done")])
    assert full == parse(RUNNING)


def test_substitute_errors():
    with pytest.raises(UnknownTag):
        substitute(parse(TIE), [bind("r9", "A -> B : m")])
    with pytest.raises(DuplicateTag):
        substitute(parse(TIE), [bind("r1", "A -> B : m"), bind("r1", "A -> B : n")])
    with pytest.raises(ValueError):
        Binding("r1", parse("A ~> {m : B}"))


def test_substitute_commutes_on_disjoint_tags():
    g = parse(TIE)
    a = [bind("r1", "C -> S : md")]
    b = [bind("r3", "S -> C : done")]
    # refinable names shift after a substitution, so use stable user tags
    tagged = parse("C ~> {md : S} as x + (C ~> {req : S} ; S ~> {done : C} as y)")
    ax = [bind("x", "C -> S : md")]
    by = [bind("y", "S -> C : done")]
    assert substitute(substitute(tagged, ax), by) == substitute(substitute(tagged, by), ax)
    assert substitute(g, a + b) == substitute(g, b + a)


def test_end_to_end_refinement():
    report = refine_and_check(parse(TIE), [
        bind("r1", "C -> B : md ; B -> S : md"),
        bind("r2", "C -> B : x ; B -> S : req"),
        bind("r3", "S -> C : done")])
    assert report.ok and report.error is None
    assert report.result_type.pi == {"B", "C", "S"}
    assert all(h.tref_valid and h.sem_refines.holds for h in report.per_hole)
    assert is_ground(report.substituted)
    assert interpret(report.substituted).es is not None


def test_partial_refinement_reproduces_g_err():
    report = refine_and_check(parse(TIE), [
        bind("r1", "C -> B : md ; B -> S : md"),
        bind("r2", "C -> S : req"),
        bind("r3", "S -> C : done")])
    assert not report.ok
    assert report.substituted == parse(G_ERR)
    assert report.error.rule == "t-ch" and "{B,C,S} ≠ {C,S}" in report.error.detail
    assert report.stage == "substituted term"
    assert interpret(report.substituted).es is None


def test_remaining_holes_keep_their_contexts():
    g = parse(TIE)
    r3_ctx = RefContext(frozenset("CS"), labs("SC!done", "SC?done"), labs("SC!done", "SC?done"))
    report = refine_and_check(g, [bind("r1", "C -> S : md")], ctxs={"r3": r3_ctx},
                              use_default_ctx=False)
    # r2 has no context once defaults are off; it is renamed r1 in the result
    assert report.error.rule == "t-ref" and "r1" in report.error.detail
    report = refine_and_check(g, [bind("r1", "C -> S : md")])
    assert report.ok and report.result_type == type_of(g)


def test_empty_bindings():
    report = refine_and_check(parse(TIE), [])
    assert report.result_type == type_of(parse(TIE)) and report.per_hole == []


def test_untypable_replacement_is_reported():
    report = refine_and_check(parse("A ~> {m : B} ; B -> C : n"),
                              [bind("r1", "A -> B : m | A -> C : k")])
    (hole,) = report.per_hole
    assert not hole.tref_valid and hole.error.rule == "t-par"


def test_admission_implies_refinement_on_examples():
    cases = [("C -> B : md ; B -> S : md", "C ~> {md : S}"),
             ("A -> B : m", "A ~> {m : B}"),
             ("A -> B : m + A -> B : n ; A -> B : m", "A ~> {m : B}"),
             ("C -> B : x ; B -> S : req", "C ~> {req : S}")]
    for cand, action in cases:
        g, a = parse(cand), act(action)
        ok, _ = validate_ref_context(a, infer_context(g))
        assert ok, pretty(g)
        assert refines(g, a).holds


def test_report_json():
    report = refines(parse("A -> B : m | C -> B : n"), act("A ~> {m : B}"))
    assert report.to_json() == {"holds": False, "initiator": None, "failed_clause": "ii",
                                "witnesses": {"initiators": ["A", "C"]}}

import pytest

from chorc.syntax import parse
from chorc.typecheck import (ChorType, ChorTypeError, RefContext, compch, default_ref_context,
                             hat, input_uniform, minus, output_uniform, type_of,
                             validate_ref_context)
from oracles import G_ERR, RUNNING, TIE, labs

PHI1 = labs("CS!req", "CS?req")
PHI2 = labs("SC!done", "SC?done")
PHI6 = labs("CS!done", "CS?done")


def typ(pi, first, last):
    return ChorType(frozenset(pi), labs(*first), labs(*last))


def test_hat():
    assert hat(labs("CB!md", "CB?md", "BS?md"), "C") == labs("CB!md")
    assert hat(frozenset(), "C") == frozenset()
    assert hat(PHI1, "S") == labs("CS?req")


def test_hat_partitions():
    ls = labs("CB!md", "CB?md", "BS?md", "BS!md")
    assert frozenset().union(*(hat(ls, p) for p in "BCS")) == ls


def test_minus():
    assert minus(labs("BS!md", "BS?md"), {"C", "B"}) == labs("BS?md")
    assert minus(PHI1, set()) == PHI1
    assert minus(labs("CB!md", "CB?md"), {"B", "S"}) == labs("CB!md")


def test_uniformity():
    assert output_uniform(labs("CS!req"), labs("CS!done"))
    assert not output_uniform(labs("CS!req"), labs("CS!req"))
    assert output_uniform(frozenset(), frozenset()) and input_uniform(frozenset(), frozenset())
    assert input_uniform(labs("CS?req"), labs("CS?done"))
    assert not input_uniform(labs("CS?req"), labs("CS!done"))


def test_compch():
    assert compch(PHI1, PHI6, {"C", "S"}) == (True, "C")
    assert compch(PHI1, PHI2, {"C", "S"}) == (False, None)
    assert compch(PHI1, PHI1, {"C", "S"}) == (False, None)


def test_type_interaction_and_empty():
    assert type_of(parse("0")) == ChorType(frozenset(), frozenset(), frozenset())
    assert type_of(parse("A -> B : m")) == typ("AB", ["AB!m", "AB?m"], ["AB!m", "AB?m"])


def test_typing_seq_goldens():
    assert type_of(parse("C -> S : req ; S -> C : done")) == typ(
        "CS", ["CS!req", "CS?req"], ["SC!done", "SC?done"])
    assert type_of(parse("C -> B : md ; B -> S : md")) == typ(
        "BCS", ["CB!md", "CB?md", "BS?md"], ["CB!md", "BS!md", "BS?md"])


def test_typing_choice_goldens():
    assert type_of(parse("C -> S : req + C -> S : done")) == ChorType(
        frozenset("CS"), PHI1 | PHI6, PHI1 | PHI6)
    with pytest.raises(ChorTypeError) as g1:
        type_of(parse("C -> S : req + C -> S : req"))
    assert g1.value.rule == "t-ch" and "compch" in g1.value.detail
    with pytest.raises(ChorTypeError) as g2:
        type_of(parse("C -> S : req + S -> C : done"))
    assert g2.value.rule == "t-ch" and "no participant" in g2.value.detail
    with pytest.raises(ChorTypeError) as g3:
        type_of(parse("C -> S : req + C -> B : md"))
    assert g3.value.rule == "t-ch" and "{C,S} ≠ {B,C}" in g3.value.detail


def test_running_example_type():
    t = type_of(parse(RUNNING))
    assert t == typ("CS", ["CS!md", "CS?md", "CS!req", "CS?req"], ["CS!md", "CS?md", "SC!done", "SC?done"])


def test_g_err_rejected_with_context_mismatch():
    with pytest.raises(ChorTypeError) as info:
        type_of(parse(G_ERR))
    assert info.value.rule == "t-ch"
    assert "{B,C,S} ≠ {C,S}" in info.value.detail


def test_par_overlap_rejected():
    with pytest.raises(ChorTypeError) as info:
        type_of(parse("A -> B : m | A -> C : m"))
    assert info.value.rule == "t-par" and info.value.witness == ("A",)
    assert type_of(parse("A -> B : m | C -> D : n")).pi == {"A", "B", "C", "D"}


def test_error_path_points_at_subterm():
    with pytest.raises(ChorTypeError) as info:
        type_of(parse("X -> Y : k ; (A -> B : m | A -> C : m)"))
    assert info.value.path == ("R",)
    assert str(info.value).startswith("t-par at /R:")


def test_default_ref_context():
    ctx = default_ref_context(parse("C ~> {md : S}"))
    assert ctx == RefContext(frozenset("CS"), labs("CS!md", "CS?md"), labs("CS!md", "CS?md"))
    ctx = default_ref_context(parse("A ~> {m : B, n : C}"))
    assert ctx.pi == {"A", "B", "C"} and ctx.first == ctx.last == labs("AB!m", "AB?m", "AC!n", "AC?n")
    assert default_ref_context(parse("S ~> {done : C}")).first == PHI2


def test_default_contexts_are_valid():
    for text in ["C ~> {md : S}", "A ~> {m : B, n : C}", "S ~> {done : C}"]:
        r = parse(text)
        assert validate_ref_context(r, default_ref_context(r)) == (True, "ok")


def test_validate_ref_context_remark_instance():
    r = parse("a ~> {m : b}")
    labels = labs("ab!m", "ab?m", "cd?m")
    # c is not the subject of any label, so the participant condition fails as stated
    ok, reason = validate_ref_context(r, RefContext(frozenset("abcd"), labels, labels))
    assert not ok and "participants" in reason
    assert validate_ref_context(r, RefContext(frozenset("abd"), labels, labels)) == (True, "ok")


def test_validate_ref_context_failures():
    r = parse("a ~> {m : b}")
    two_outputs = labs("ab!m", "ab?m", "cb!m", "cb?m")
    ok, reason = validate_ref_context(r, RefContext(frozenset("abc"), two_outputs, labs("ab!m", "ab?m", "cb!m")))
    assert not ok
    no_input = RefContext(frozenset("ab"), labs("ab!m", "ab?m"), labs("ab!m", "ba!k"))
    ok, reason = validate_ref_context(r, no_input)
    assert not ok and "b" in reason
    wrong_msg = RefContext(frozenset("ab"), labs("ab!m", "ab?m"), labs("ab!m", "ab?k"))
    assert not validate_ref_context(r, wrong_msg)[0]


def test_tie_with_default_contexts():
    t = type_of(parse(TIE))
    assert t == typ("CS", ["CS!md", "CS?md", "CS!req", "CS?req"], ["CS!md", "CS?md", "SC!done", "SC?done"])


def test_explicit_context_and_missing_context():
    g = parse(TIE)
    with pytest.raises(ChorTypeError) as info:
        type_of(g, use_default_ctx=False)
    assert info.value.rule == "t-ref" and "r1" in info.value.detail
    r1 = type_of(parse("C -> B : md ; B -> S : md"))
    # an explicit context for r1 changes Π of the left branch, so t-ch fails
    with pytest.raises(ChorTypeError) as info:
        type_of(g, {"r1": RefContext.of(r1)})
    assert info.value.rule == "t-ch"
    tagged = parse("A ~> {m : B} as h ; B -> A : n")
    ctx = RefContext(frozenset("AB"), labs("AB!m", "AB?m"), labs("AB!k", "AB?m"))
    assert type_of(tagged, {"h": ctx}).first == labs("AB!m", "AB?m")


def test_invalid_explicit_context_rejected():
    bad = RefContext(frozenset("CS"), labs("SC!x", "SC?x"), labs("CS?md"))
    with pytest.raises(ChorTypeError) as info:
        type_of(parse("C ~> {md : S}"), {"r1": bad})
    assert info.value.rule == "t-ref"


def test_typing_is_deterministic():
    g = parse(RUNNING)
    assert type_of(g) == type_of(g)

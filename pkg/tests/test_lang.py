from fractions import Fraction as F
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from constructibility.lang import (
    Assert,
    Between,
    Disc,
    Equal,
    HalfPlane,
    If,
    Incident,
    LetCircle,
    LetIntersections,
    LetJoin,
    LetMeet,
    OpenSetExpr,
    Output,
    Parallel,
    PointLit,
    Repeat,
    Request,
    SameSide,
    Script,
    ScriptSyntaxError,
    check,
    parse,
    pretty_print,
)
from constructibility.numbers import real, sqrt
from mutations import mutations

CORPUS = sorted(Path(__file__).parent.joinpath("data", "corpus").glob("*.cst"))
BUNDLED = sorted(p for p in resources.files("constructibility").joinpath("scripts").iterdir()
                 if p.name.endswith(".cst"))


def all_sources():
    return [(p.name, p.read_text()) for p in CORPUS] + [(p.name, p.read_text()) for p in BUNDLED]


def test_two_statement_script():
    s = parse("given A, B; let l = join(A, B); output l;")
    assert s.givens == ("A", "B")
    assert s.body == (LetJoin("l", "A", "B"), Output("l"))


def test_arity_error_at_call_site():
    src = "given A;\nlet l = join(A);"
    with pytest.raises(ScriptSyntaxError) as exc:
        parse(src)
    err = exc.value.errors[0]
    assert (err.line, err.column) == (2, 9)
    assert "join" in err.message


def test_errors_are_collected_across_statements():
    src = "given A, B;\nlet l = join(A B);\nlet m = meet(l);\noutput l;\n"
    with pytest.raises(ScriptSyntaxError) as exc:
        parse(src)
    assert [e.line for e in exc.value.errors] == [2, 3]


@pytest.mark.parametrize("name,source", all_sources(), ids=[n for n, _ in all_sources()])
def test_round_trip(name, source):
    s = parse(source)
    text = pretty_print(s)
    assert parse(text) == s
    assert pretty_print(parse(text)) == text


def test_empty_script_prints_header_only():
    assert pretty_print(parse("given;")) == "given;\n"


def test_nested_indentation_is_stable():
    src = "given A,B;repeat 2{if equal(A,B){output A;}else{repeat 1{output B;}}}"
    text = pretty_print(parse(src))
    assert text == (
        "given A, B;\n"
        "repeat 2 {\n"
        "  if equal(A, B) {\n"
        "    output A;\n"
        "  } else {\n"
        "    repeat 1 {\n"
        "      output B;\n"
        "    }\n"
        "  }\n"
        "}\n"
    )


def test_mutations_report_the_mutated_line():
    total = 0
    for name, source in all_sources():
        for line, mutated in mutations(source):
            try:
                parse(mutated)
            except ScriptSyntaxError as exc:
                total += 1
                assert exc.errors[0].line == line, (name, mutated)
    assert total > 1000


def test_check_clean_script():
    s = parse("given A, B; let l = join(A, B); output l;")
    assert check(s) == []


def test_check_undefined_identifier():
    diags = check(parse("given A, B; let l = join(A, C);"))
    assert len(diags) == 1 and "undefined" in diags[0].message and "'C'" in diags[0].message


def test_check_dead_repeat():
    diags = check(parse("given A; repeat 0 { output A; }"))
    assert [(d.severity, d.message) for d in diags] == [("warning", "repeat 0: dead block")]


def test_check_types_and_arity():
    from constructibility import projective as pj

    s = parse("given A, B; let l = join(A, B); let X = meet(l, A);")
    assert any("meet needs line" in d.message for d in check(s, [pj.point(0, 0), pj.point(1, 0)]))
    diags = check(parse("given A, B, C;"), [pj.point(0, 0)])
    assert any("3 givens" in d.message for d in diags)


def test_check_block_scope_and_rebinding():
    diags = check(parse("given A, B; if equal(A, B) { let l = join(A, B); } output l;"))
    assert [d.message for d in diags] == ["undefined identifier 'l'"]
    diags = check(parse("given A, B; let A = meet(A, B);"))
    assert any("already bound" in d.message for d in diags)


def test_bound_names_match_runtime_bindings():
    from constructibility import projective as pj
    from constructibility.closure import Configuration
    from constructibility.game import play, rational_adversary

    src = ("given C; request A in disc((0, 0), 1/2); request B in disc((1/2, 1/2), 1/10);"
           "let l = join(A, B); let P, Q = intersect(l, C); output P;")
    s = parse(src)
    assert check(s) == []
    trace = play(s, rational_adversary(), Configuration([pj.unit_circle()]))
    assert trace.outcome in ("lost", "won")
    assert len(trace.outputs) == 1


# -- random ASTs ------------------------------------------------------------------------

NAMES = st.sampled_from(["A", "B", "C", "l", "m", "P_1", "q2", "Xy"])
values = st.one_of(
    st.fractions(min_value=-5, max_value=5, max_denominator=9).map(real),
    st.tuples(st.integers(2, 7), st.fractions(min_value=-2, max_value=2, max_denominator=3)).map(
        lambda t: t[1] + sqrt(t[0])),
)
radii = st.fractions(min_value=F(1, 100), max_value=3, max_denominator=100)
tests_ = st.one_of(
    st.builds(Incident, NAMES, NAMES),
    st.builds(Equal, NAMES, NAMES),
    st.builds(Parallel, NAMES, NAMES),
    st.builds(Between, NAMES, NAMES, NAMES),
    st.builds(SameSide, NAMES, NAMES, NAMES),
)
atoms = st.one_of(
    st.builds(Disc, st.one_of(NAMES, st.builds(PointLit, values, values)), radii),
    st.builds(HalfPlane, NAMES, st.sampled_from(["+", "-"])),
)
simple = st.one_of(
    st.builds(LetJoin, NAMES, NAMES, NAMES),
    st.builds(LetMeet, NAMES, NAMES, NAMES),
    st.builds(LetIntersections, st.tuples(NAMES), NAMES, NAMES, st.sampled_from([None, 0, 1])),
    st.builds(LetIntersections, st.tuples(NAMES, NAMES), NAMES, NAMES),
    st.builds(LetCircle, NAMES, NAMES, NAMES, NAMES),
    st.builds(Request, NAMES, st.lists(atoms, min_size=1, max_size=3).map(lambda a: OpenSetExpr(tuple(a)))),
    st.builds(Output, NAMES),
    st.builds(Assert, tests_),
)


def _blocks(children):
    body = st.lists(children, max_size=3).map(tuple)
    return st.one_of(
        st.builds(If, tests_, body, st.one_of(st.none(), body)),
        st.builds(Repeat, st.integers(0, 20), body),
    )


statements = st.recursive(simple, _blocks, max_leaves=12)
scripts = st.builds(Script, st.lists(NAMES, max_size=3, unique=True).map(tuple),
                    st.lists(statements, max_size=6).map(tuple))


@settings(max_examples=150)
@given(scripts)
def test_random_ast_round_trip(script):
    assert parse(pretty_print(script)) == script

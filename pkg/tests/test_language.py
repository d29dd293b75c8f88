import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdchase.language import (
    Atom,
    ConjunctiveQuery,
    MatchingDependency,
    ParseError,
    QueryClass,
    SimAtom,
    Var,
    changeable_attributes,
    classify_query,
    parse_md,
    parse_mds,
    parse_query,
    print_md,
)
from mdchase.model import Attr, Schema
from mdchase.similarity import EQUALITY, SimilaritySpec, SimRegistry

from conftest import CHAIN_MDS

R = lambda a: Attr("R", a)  # noqa: E731
P = lambda a: Attr("P", a)  # noqa: E731


def test_parse_people_md():
    md = parse_md("P[Phone] ~ P[Phone] & P[Address] ~ P[Address] -> P[Name] == P[Name]", name="m")
    assert md.lhs == (SimAtom(P("Phone"), P("Phone"), None), SimAtom(P("Address"), P("Address"), None))
    assert md.rhs == ((P("Name"), P("Name")),)


def test_parse_chain_pair():
    m = parse_mds(CHAIN_MDS)
    assert [md.name for md in m] == ["m1", "m2"]
    assert m["m1"].lhs == (SimAtom(R("A"), R("A"), EQUALITY),)
    assert m["m1"].rhs == ((R("B"), R("B")),)
    assert m["m2"].lhs == (SimAtom(R("B"), R("B"), EQUALITY),)
    assert m["m2"].rhs == ((R("C"), R("C")),)


def test_attribute_lists_pair_componentwise():
    md = parse_md("R[A] = R[A] -> R[B,C] == R[B,C]", name="m")
    assert md.rhs == ((R("B"), R("B")), (R("C"), R("C")))


def test_unnamed_mds_numbered_and_names_kept():
    m = parse_mds("# header\n\nfoo: R[A] = R[A] -> R[B] == R[B]  # trailing\nR[B] = R[B] -> R[C] == R[C]\n")
    assert [md.name for md in m] == ["foo", "m2"]


def test_two_relation_md_and_orientation():
    reg = SimRegistry([SimilaritySpec("sim1")])
    md = parse_md("R[A] ~sim1 S[B] & S[E] = R[F] -> R[C] == S[D]", name="m", registry=reg)
    assert md.lhs[0] == SimAtom(R("A"), Attr("S", "B"), "sim1")
    assert md.lhs[1] == SimAtom(R("F"), Attr("S", "E"), EQUALITY)
    assert md.left_rel == "R" and md.right_rel == "S"


def test_unicode_operators():
    md = parse_md("R[A] ≈ R[A] ∧ R[C] = R[C] → R[B] ≐ R[B]", name="m")
    assert md == parse_md("R[A] ~ R[A] & R[C] = R[C] -> R[B] == R[B]", name="m")


@pytest.mark.parametrize("text, token", [
    ("R[A] = R[A] -> R[B] == Q[B]", "R"),
    ("R[A] = S[A] & T[A] = R[A] -> R[B] == S[B]", "T"),
    ("R[A,B] = R[A] -> R[B] == R[B]", "R"),
    ("R[A] = R[A] -> ", "<end of line>"),
    ("R[A] = R[A] R[B] == R[B]", "R"),
    ("R[A] ! R[A] -> R[B] == R[B]", "!"),
])
def test_syntax_errors_name_the_token(text, token):
    with pytest.raises(ParseError) as e:
        parse_mds(text, source="bad.md")
    assert e.value.line == 1
    assert e.value.token == token
    assert "bad.md" in str(e.value)


def test_reference_errors():
    schema = Schema({"R": ["A", "B"]})
    with pytest.raises(ParseError, match="unknown attribute R\\[C\\]"):
        parse_mds("R[A] = R[A] -> R[C] == R[C]", schema=schema)
    with pytest.raises(ParseError, match="unknown relation"):
        parse_mds("S[A] = S[A] -> S[B] == S[B]", schema=schema)
    with pytest.raises(ParseError, match="unknown similarity 'lev'"):
        parse_mds("R[A] ~lev R[A] -> R[B] == R[B]", schema=schema)
    with pytest.raises(ParseError, match="line 2"):
        parse_mds("R[A] = R[A] -> R[B] == R[B]\nR[A] = R[A] -> R[B] = R[B]")
    with pytest.raises(ParseError, match="duplicate MD name"):
        parse_mds("x: R[A] = R[A] -> R[B] == R[B]\nx: R[A] = R[A] -> R[B] == R[B]")


@pytest.mark.parametrize("text", [
    "P[Phone] ~ P[Phone] & P[Address] ~ P[Address] -> P[Name] == P[Name]",
    "R[A] = R[A] -> R[B] == R[B]",
    "R[A] = R[A] -> R[B,C] == R[B,C]",
    "R[A] ~sim1 S[B] -> R[C] == S[D]",
])
def test_round_trip(text):
    reg = SimRegistry([SimilaritySpec("sim1")])
    md = parse_md(text, name="m", registry=reg)
    again = parse_md(print_md(md), registry=reg)
    assert again == md


def test_printing_is_normalized():
    a = parse_md("m:R[A]=R[A]->R[B]==R[B]")
    b = parse_md("m:   R[A]   =  R[A]   ->  R[B]  ==   R[B]")
    assert print_md(a) == print_md(b) == "m: R[A] = R[A] -> R[B] == R[B]"


attr_names = st.sampled_from(["A", "B", "C", "D'"])


@st.composite
def mds(draw):
    rels = draw(st.sampled_from([("R", "R"), ("R", "S")]))
    sims = st.sampled_from([EQUALITY, None, "lev"])
    lhs = draw(st.lists(st.builds(lambda a, b, s: SimAtom(Attr(rels[0], a), Attr(rels[1], b), s),
                                  attr_names, attr_names, sims), min_size=1, max_size=3))
    rhs = draw(st.lists(st.builds(lambda a, b: (Attr(rels[0], a), Attr(rels[1], b)),
                                  attr_names, attr_names), min_size=1, max_size=3))
    return MatchingDependency(draw(st.sampled_from(["m1", "x", "rule_2"])), tuple(lhs), tuple(rhs))


@given(mds())
def test_round_trip_property(md):
    reg = SimRegistry([SimilaritySpec("lev", "edit_distance", 1)])
    assert parse_md(print_md(md), registry=reg) == md


def test_changeable_attributes():
    assert changeable_attributes(parse_mds(CHAIN_MDS)) == {R("B"), R("C")}
    assert changeable_attributes(parse_mds("")) == frozenset()


def test_parse_query():
    q = parse_query("Q(x, z) :- R(x, y, z), S(z, 'c', \"d e\", 3)")
    assert q.head == (Var("x"), Var("z"))
    assert q.body[1] == Atom("S", (Var("z"), "c", "d e", "3"))
    assert q.existential == {Var("y")}
    assert parse_query(str(q)) == q
    primed = parse_query("Q(y, z') :- R(x, y, z), R(x, y', z')")
    assert Var("z'") in primed.head


@pytest.mark.parametrize("text", [
    "Q(x, w) :- R(x, y)",
    "Q('a') :- R(x, y)",
    "Q(x) R(x)",
    "Q(x) :- R(x,",
])
def test_bad_queries(text):
    with pytest.raises(ParseError):
        parse_query(text)


def test_query_arity_checked_against_schema():
    with pytest.raises(ParseError, match="arity"):
        parse_query("Q(x) :- R(x, y)", schema=Schema({"R": ["A", "B", "C"]}))


BC_MD = "R[A] = R[A] -> R[B,C] == R[B,C]"


def test_classify_reference_queries():
    m = parse_mds(BC_MD)
    assert classify_query(parse_query("Q() :- R(x, y, 'c'), R(z, y, 'd')"), m) is QueryClass.NON_UJCQ
    assert classify_query(parse_query("Q(y, z') :- R(x, y, z), R(x, y', z')"), m).is_ujcq
    assert classify_query(parse_query("Q(y, y', z') :- R(x, y, z), R(x, y', z')"), m).is_ujcq
    chain = parse_mds(CHAIN_MDS)
    assert classify_query(parse_query("Q(x, z) :- R(x, y, z)"), chain) is QueryClass.UJCQ_ONLY
    assert classify_query(parse_query("Q(x, y, z) :- R(x, y, z), S(x, w, t)"), chain) is QueryClass.CHAQ


def test_classify_details():
    chain = parse_mds(CHAIN_MDS)
    # join on y sits in changeable slot B
    assert classify_query(parse_query("Q(x) :- R(x, y, z), R(x, y, w)"), chain) is QueryClass.NON_UJCQ
    # repeated variable inside one atom counts as a join
    assert classify_query(parse_query("Q(x) :- R(x, y, y)"), chain) is QueryClass.NON_UJCQ
    # joins on a free variable are fine
    assert classify_query(parse_query("Q(x, y, z) :- R(x, y, z), R(w, y, z)"), chain) is QueryClass.CHAQ
    # constants disqualify a free occurrence
    assert classify_query(parse_query("Q(x, y) :- R(x, y, 'c')"), chain) is QueryClass.UJCQ_ONLY
    # a free occurrence over a relation outside the MDs does not count
    assert classify_query(parse_query("Q(x, w, t) :- R(x, y, z), S(x, w, t)"), chain) is QueryClass.UJCQ_ONLY


def _random_query(r: random.Random) -> ConjunctiveQuery:
    vars_ = [Var(v) for v in "xyzw"]
    body = []
    for _ in range(r.randint(1, 3)):
        args = tuple(r.choice(vars_) if r.random() < 0.85 else r.choice("ab") for _ in range(3))
        body.append(Atom(r.choice("RS"), args))
    occurring = sorted({t for a in body for t in a.args if isinstance(t, Var)})
    head = tuple(v for v in occurring if r.random() < 0.5)
    return ConjunctiveQuery(head, tuple(body))


def test_classification_properties():
    r = random.Random(7)
    schema = Schema({"R": ["A", "B", "C"], "S": ["A", "B", "C"]})
    both = parse_mds(CHAIN_MDS + "m3: S[A] = S[A] -> S[C] == S[C]\n", schema=schema)
    r_only = parse_mds(CHAIN_MDS, schema=schema)
    seen = set()
    for _ in range(400):
        q = _random_query(r)
        for m in (both, r_only):
            cls = classify_query(q, m)
            seen.add(cls)
            if cls is QueryClass.CHAQ:
                assert cls.is_ujcq
            changeable = changeable_attributes(m)
            slots = [Attr(a.rel, n) for a in q.body for n in m.schema.attributes(a.rel)]
            if not set(slots) & changeable:
                assert cls is not QueryClass.NON_UJCQ
    assert seen == set(QueryClass)

import itertools

import pytest

from mdchase.analysis import (
    AnalysisError,
    build_mdg,
    components,
    equivalent_sets,
    hardness_verdict,
    non_inclusive,
    structure_report,
    theorem1,
    theorem3,
)
from mdchase.language import parse_mds
from mdchase.model import Attr, Schema
from mdchase.similarity import SimilaritySpec, SimRegistry

from conftest import CHAIN_MDS
from gen import random_case, random_linear_pair, rng

R = lambda a: Attr("R", a)  # noqa: E731
S = lambda a: Attr("S", a)  # noqa: E731

CYCLIC = "m1: R[A] = R[A] -> R[B] == R[B]\nm2: R[B] = R[B] -> R[A] == R[A]\n"
EASY = ("m1: R[A] ~ S[A'] -> R[B] == S[B']\n"
        "m2: R[A] ~ S[A'] & R[B] ~ S[B'] -> R[C] == S[C']\n")


def transitive_default():
    return SimRegistry([SimilaritySpec("default", "equality", transitive=True)])


def test_mdg_chain():
    g = build_mdg(parse_mds(CHAIN_MDS))
    assert g.edges == {("m1", "m2")}
    assert g.overlaps[("m1", "m2")] == {R("B")}


def test_mdg_disjoint_and_cyclic():
    g = build_mdg(parse_mds("R[A] = R[A] -> R[B] == R[B]\nR[C] = R[C] -> R[D] == R[D]"))
    assert not g.edges
    assert build_mdg(parse_mds(CYCLIC)).edges == {("m1", "m2"), ("m2", "m1")}


def test_structure_reports():
    rep = structure_report(parse_mds(CHAIN_MDS))
    assert (rep.acyclic, rep.interacting, rep.pair_preserving, rep.linear_pair) == (
        True, True, True, ("m1", "m2"))
    rep = structure_report(parse_mds(CYCLIC))
    assert not rep.acyclic and rep.linear_pair is None
    rep = structure_report(parse_mds("R[A] = R[A] -> R[B] == R[B]"))
    assert (rep.acyclic, rep.interacting, rep.linear_pair) == (True, False, None)


def test_self_loop_is_a_cycle():
    rep = structure_report(parse_mds("R[A] = R[A] -> R[A,B] == R[A,B]"))
    assert rep.self_loops == ("m1",) and not rep.acyclic
    v = hardness_verdict(parse_mds("R[A] = R[A] -> R[A,B] == R[A,B]"))
    assert v.outcome == "UNKNOWN"
    assert any("self-loop" in line for line in v.trace)


def test_pair_preserving():
    assert not structure_report(parse_mds("R[A] ~ S[B] & R[A] ~ S[C] -> R[D] == S[D]")).pair_preserving
    assert structure_report(parse_mds(EASY)).pair_preserving


def test_shape_errors():
    with pytest.raises(AnalysisError):
        build_mdg(parse_mds("R[A] = S[A] -> R[B] == S[B]\nR[A] = T[A] -> R[B] == T[B]"))
    with pytest.raises(AnalysisError):
        build_mdg(parse_mds("R[A] = S[A] -> R[B] == S[B]\nR[A] = R[A] -> R[B] == R[B]"))


def test_components():
    m = parse_mds(CHAIN_MDS)
    assert components(m["m2"], "L").classes == (frozenset({R("B")}),)
    assert components(m["m1"], "R").classes == (frozenset({R("B")}),)
    md = parse_mds("R[A] ~ S[B] & R[A] ~ S[C] -> R[D] == S[D]")["m1"]
    assert components(md, "L").classes == (frozenset({R("A"), S("B"), S("C")}),)
    assert components(md, "R").classes == (frozenset({R("D"), S("D")}),)
    with pytest.raises(ValueError):
        components(md, "X")


def test_equivalent_sets_chain():
    ess = equivalent_sets(("m1", "m2"), parse_mds(CHAIN_MDS))
    assert [(e.relation, e.attrs, e.bound) for e in ess] == [("R", frozenset({R("B")}), False)]


def test_equivalent_sets_two_relations():
    ess = equivalent_sets(("m1", "m2"), parse_mds(EASY))
    got = {(e.relation, e.attrs, e.bound) for e in ess}
    assert got == {
        ("R", frozenset({R("A")}), True), ("R", frozenset({R("B")}), False),
        ("S", frozenset({S("A'")}), True), ("S", frozenset({S("B'")}), False),
    }


def test_equivalent_sets_disjoint_lhs():
    m = parse_mds("m1: R[A] = R[A] -> R[B] == R[B]\nm2: R[B] = R[B] -> R[C] == R[C]")
    assert [e.attrs for e in equivalent_sets(("m1", "m2"), m)] == [frozenset({R("B")})]
    with pytest.raises(AnalysisError):
        equivalent_sets(("m1", "m2"), parse_mds(CYCLIC))


def test_non_inclusive_examples():
    m = parse_mds(CHAIN_MDS)
    assert non_inclusive(R("C"), {"m1", "m2"}, m)
    assert non_inclusive(R("B"), {"m2"}, m)
    assert non_inclusive(R("A"), {"m1"}, m)
    # MDs inside M' never count, so this is vacuous
    assert non_inclusive(R("B"), {"m1"}, m)
    # R[C] comes from m2, whose only LHS attribute is covered by m3
    m3 = parse_mds(CHAIN_MDS + "m3: R[B] = R[B] -> R[D] == R[D]\n")
    assert not non_inclusive(R("C"), {"m3"}, m3)
    assert non_inclusive(R("C"), set(), m3)
    with pytest.raises(AnalysisError):
        non_inclusive(R("A"), {"m1"}, parse_mds(CYCLIC))


def test_verdict_chain_hard_by_both_paths():
    v = hardness_verdict(parse_mds(CHAIN_MDS))
    assert v.label() == "HARD (Theorem 1)"
    assert v.theorem1.conditions["a"] == {"i": False, "ii": False, "iii": False}
    assert v.theorem1.conditions["a"] == v.theorem1.conditions["b"]
    assert [(w.c, w.b) for w in v.theorem3] == [(R("C"), R("B"))]
    assert v.trace[-1] == "verdict: HARD (Theorem 1)"


def test_verdict_easy_needs_transitivity():
    m = parse_mds(EASY, registry=transitive_default())
    v = hardness_verdict(m)
    assert v.label() == "EASY (Theorem 2)"
    assert v.theorem1.conditions["a"]["iii"] and v.theorem1.conditions["b"]["iii"]
    assert v.theorem3 == []
    assert hardness_verdict(m, all_sims_transitive=False).outcome == "UNKNOWN"


def test_verdict_unknown_outside_scope():
    overlap = parse_mds("m1: R[A] = R[A] -> R[B,D] == R[B,D]\nm2: R[B] = R[B] -> R[C,D] == R[C,D]")
    v = hardness_verdict(overlap, all_sims_transitive=True)
    assert not v.theorem1.rhs_disjoint
    # Theorem 3 still applies: pair-preserving and acyclic
    assert v.outcome in ("HARD", "UNKNOWN") and v.by != "Theorem 1"
    assert hardness_verdict(parse_mds(CYCLIC), all_sims_transitive=True).outcome == "UNKNOWN"


def _brute_edges(m):
    def attrs(pairs):
        return {a for p in pairs for a in p}
    return {(x.name, y.name) for x in m for y in m
            if attrs(x.rhs) & attrs((a.left, a.right) for a in y.lhs)}


def test_mdg_matches_brute_force():
    r = rng(11)
    for _ in range(300):
        _, m = random_case(r, max_mds=3)
        assert build_mdg(m).edges == _brute_edges(m)


def _closure_oracle(m1, m2, rel):
    """Equivalent sets by repeated merging of overlapping groups."""
    groups = [set(c) for c in components(m1, "R").classes + components(m2, "L").classes]
    groups = [{a for a in g if a.rel == rel} for g in groups]
    groups += [{a} for a in m1.lhs_attrs | m1.rhs_attrs | m2.lhs_attrs | m2.rhs_attrs if a.rel == rel]
    merged = True
    while merged:
        merged = False
        for g, h in itertools.combinations(groups, 2):
            if g & h:
                groups.remove(h)
                g |= h
                merged = True
                break
    return {frozenset(g) for g in groups if g & m2.lhs_attrs}


def test_equivalent_sets_against_closure_oracle():
    r = rng(12)
    for _ in range(200):
        m = random_linear_pair(r)
        m1, m2 = m["m1"], m["m2"]
        ess = equivalent_sets((m1, m2))
        for rel in sorted({e.relation for e in ess}):
            classes = [e.attrs for e in ess if e.relation == rel]
            assert set(classes) == _closure_oracle(m1, m2, rel)
            assert sum(map(len, classes)) == len(frozenset().union(*classes))
        for e in ess:
            assert e.attrs & m2.lhs_attrs
            assert e.bound == bool(e.attrs & m1.lhs_attrs)


def test_linear_pair_generator_is_in_scope():
    r = rng(13)
    for _ in range(100):
        m = random_linear_pair(r)
        rep = structure_report(m)
        assert rep.linear_pair == ("m1", "m2")
        assert rep.acyclic and rep.pair_preserving
        assert not m["m1"].rhs_attrs & m["m2"].rhs_attrs


def test_theorem1_theorem3_agree_on_linear_pairs():
    r = rng(14)
    hard = 0
    for _ in range(300):
        m = random_linear_pair(r)
        t1 = theorem1(m["m1"], m["m2"]).hard
        t3 = bool(theorem3(m))
        assert t1 == t3, [str(md) for md in m]
        # direct criterion: some LHS(m1) attribute is missing from LHS(m2)
        assert t1 == (not m["m1"].lhs_attrs <= m["m2"].lhs_attrs)
        hard += t1
    assert 0 < hard < 300


def test_easy_only_in_dichotomy_scope():
    r = rng(15)
    for k in range(300):
        if k % 2:
            m = random_linear_pair(r)
        else:
            _, m = random_case(r, max_mds=3)
        for flag in (True, False):
            v = hardness_verdict(m, all_sims_transitive=flag)
            assert not (v.is_hard and v.is_easy)
            if v.is_easy:
                rep = structure_report(m)
                assert flag and rep.linear_pair
                assert not m[rep.linear_pair[0]].rhs_attrs & m[rep.linear_pair[1]].rhs_attrs


def test_non_inclusive_terminates_on_acyclic_chains():
    names = [f"A{i}" for i in range(8)]
    text = "\n".join(f"R[{a}] = R[{a}] -> R[{b}] == R[{b}]" for a, b in zip(names, names[1:]))
    text += "\nx: R[A0] = R[A0] -> R[Z] == R[Z]"
    m = parse_mds(text, schema=Schema({"R": names + ["Z"]}))
    assert non_inclusive(R("A7"), set(), m)
    # the walk back from A7 reaches A1, produced from A0, which x covers
    assert not non_inclusive(R("A7"), {"x"}, m)

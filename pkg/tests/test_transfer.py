import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from xfer.qlf import (
    Atom, Choice, MissingChoice, alpha_equivalent, apply_assignment, children, collect_choices,
    enumerate_assignments, parse_qlf, print_qlf,
)
from xfer.synth import random_transfer_fixture
from xfer.transfer import (
    DuplicateRuleId, RecursionDepthExceeded, RuleSet, TransferRule, UnboundTargetMeta, load_rules,
    match_pattern, rule_bag_for_assignment, transfer,
)
from xfer.qlf import QlfSyntaxError

from _strategies import canonical_bag, qlf_trees, reference_transfer

FLIGHTS_ON_MONDAY = ("elliptical_np(term(bare_plur,C^[and,[flight1,C],"
                     "form(prep(on),term(bare_sing,E^[monday1,E]))]))")


def pat(text):
    return parse_qlf(text, patterns=True)


def test_load_single_rule():
    rs = load_rules("rule on_avec: prep(on) => prep(avec).")
    assert len(rs) == 1
    (r,) = rs
    assert r.id == "on_avec" and print_qlf(r.target) == "prep(avec)"


def test_load_empty_and_comments():
    assert len(load_rules("")) == 0
    assert len(load_rules("% nothing here\n\n")) == 0


def test_duplicate_rule_id():
    with pytest.raises(DuplicateRuleId):
        load_rules("rule on_avec: on => avec.\nrule on_avec: on => sur.\n")


def test_rule_syntax_errors():
    with pytest.raises(QlfSyntaxError) as e:
        load_rules("rule a: f(@x) => g(@x\n")
    assert e.value.line == 1
    with pytest.raises(QlfSyntaxError) as e:
        load_rules("rule ok: a => b.\nrule bad: f(@x) => g(@x,.\n")
    assert e.value.line == 2


def test_target_meta_must_be_bound():
    with pytest.raises(UnboundTargetMeta):
        load_rules("rule r: f(@x) => g(@y).")
    with pytest.raises(UnboundTargetMeta):
        TransferRule("r", pat("f(@x)"), pat("g(tr(@z))"))


def test_source_cannot_use_transfer_marker():
    with pytest.raises((ValueError, QlfSyntaxError)):
        load_rules("rule r: f(tr(@x)) => g(@x).")


def test_match_bare_meta():
    b = match_pattern(pat("@d"), Atom("bare_plur"))
    assert b.metas == {"d": Atom("bare_plur")}


def test_match_form():
    n = parse_qlf("form(prep(on),term(bare_sing,E^[monday1,E]))")
    b = match_pattern(pat("form(prep(@p),@t)"), n)
    assert b.metas["p"] == Atom("on")
    assert b.metas["t"] == n.args[1]


def test_match_failures():
    assert match_pattern(pat("prep(sur)"), parse_qlf("prep(avec)")) is None
    assert match_pattern(pat("f(@x,@x)"), parse_qlf("f(a,b)")) is None
    assert match_pattern(pat("f(@x,@x)"), parse_qlf("f(a,a)")) is not None


def test_match_variable_renaming_is_injective():
    assert match_pattern(pat("f(X,Y)"), parse_qlf("f(A,A)")) is None
    assert match_pattern(pat("f(X,X)"), parse_qlf("f(A,B)")) is None
    assert match_pattern(pat("f(X,X)"), parse_qlf("f(A,A)")).vars == {"X": "A"}


def test_worked_example_packing(pipeline):
    r = transfer(pipeline.rules, parse_qlf(FLIGHTS_ON_MONDAY))
    assert collect_choices(r.packed) == [(1, 3), (2, 5), (3, 2)]
    alts = {}

    def walk(n):
        if isinstance(n, Choice):
            alts[n.id] = [a.name for a in n.alternatives]
        for c in children(n):
            walk(c)

    walk(r.packed)
    assert alts == {1: ["def_plur", "indef_plural", "bare_plur"],
                    2: ["a_bord_de", "temporal_np", "sur", "pour", "avec"],
                    3: ["def_sing", "bare_sing"]}
    expected = parse_qlf(
        "elliptical_np(term(#(1,[def_plur,indef_plural,bare_plur]),C^[and,[vol1,C],"
        "form(prep(#(2,[a_bord_de,temporal_np,sur,pour,avec])),"
        "term(#(3,[def_sing,bare_sing]),E^[lundi1,E]))]))")
    assert alpha_equivalent(r.packed, expected)


def test_worked_example_rule_bags(pipeline):
    r = transfer(pipeline.rules, parse_qlf(FLIGHTS_ON_MONDAY))
    bag = rule_bag_for_assignment(r, {1: 0, 2: 1, 3: 0})
    assert bag == Counter(["bp_def_plur", "on_temporal_np", "bs_def_sing", "flight", "monday"])
    other = rule_bag_for_assignment(r, {1: 0, 2: 4, 3: 0})
    assert bag - other == Counter(["on_temporal_np"])
    assert other - bag == Counter(["on_avec"])


def test_missing_choice_in_assignment(pipeline):
    r = transfer(pipeline.rules, parse_qlf(FLIGHTS_ON_MONDAY))
    with pytest.raises(MissingChoice):
        rule_bag_for_assignment(r, {1: 0, 3: 0})


def test_no_rules_is_congruent_copy():
    src = parse_qlf(FLIGHTS_ON_MONDAY)
    r = transfer(RuleSet(), src)
    assert r.events == ()
    assert alpha_equivalent(r.packed, src)
    assert r.packed != src  # object variables are renamed C -> C_1


def test_single_lexical_rule_trace():
    r = transfer(load_rules("rule flight: flight1 => vol1."), parse_qlf("[flight1,C]"))
    assert print_qlf(r.packed) == "[vol1,C_1]"
    assert [(e.rule_id, e.conditions) for e in r.events] == [("flight", frozenset())]


def test_fresh_names_avoid_source_names():
    r = transfer(RuleSet(), parse_qlf("f(C,C_1)"))
    assert print_qlf(r.packed) == "f(C_2,C_1_1)"


def test_recursive_transfer_and_structure():
    rules = load_rules(
        "rule fm: form(prep(@p),@t) => form(tr(@p),tr(@t)).\n"
        "rule on_sur: on => sur.\n"
        "rule on_avec: on => avec.\n")
    r = transfer(rules, parse_qlf("form(prep(on),term(a,X^[b,X]))"))
    assert print_qlf(r.packed) == "form(#(1,[sur,avec]),term(a,X_1^[b,X_1]))"
    assert {(e.rule_id, e.conditions) for e in r.events} == {
        ("fm", frozenset()), ("on_sur", frozenset({(1, 0)})), ("on_avec", frozenset({(1, 1)}))}


def test_nested_choice_conditions_inherit():
    rules = load_rules(
        "rule w1: w(@x) => u(tr(@x)).\n"
        "rule w2: w(@x) => v(@x).\n"
        "rule a1: a => b.\n"
        "rule a2: a => c.\n")
    r = transfer(rules, parse_qlf("w(a)"))
    assert print_qlf(r.packed) == "#(1,[u(#(2,[b,c])),v(a)])"
    conds = {e.rule_id: e.conditions for e in r.events}
    assert conds["a2"] == frozenset({(1, 0), (2, 1)})
    assert rule_bag_for_assignment(r, {1: 1}) == Counter(["w2"])


def test_target_only_variable_is_fresh_per_application():
    rules = load_rules("rule c: code(@x) => term(def_sing,V^[and,[vol1,V],[code_name,V,@x]]).")
    r = transfer(rules, parse_qlf("[code(a),code(b)]"))
    assert print_qlf(r.packed) == ("[term(def_sing,V_1^[and,[vol1,V_1],[code_name,V_1,a]]),"
                                   "term(def_sing,V_2^[and,[vol1,V_2],[code_name,V_2,b]])]")


def test_recursion_guard():
    rules = load_rules("rule loop: f(@x) => f(tr(@x)).")
    deep = parse_qlf("f(" * 40 + "a" + ")" * 40)
    assert transfer(rules, deep).packed == deep
    with pytest.raises(RecursionDepthExceeded):
        transfer(rules, deep, max_depth=20)


def test_choice_in_source_rejected():
    with pytest.raises(ValueError):
        transfer(RuleSet(), parse_qlf("#(1,[a,b])"))


def _check_against_reference(rules, src):
    r = transfer(rules, src)
    packed = []
    for a in enumerate_assignments(r.packed):
        packed.append((apply_assignment(r.packed, a), rule_bag_for_assignment(r, a)))
    ref = reference_transfer(list(rules), src)
    assert canonical_bag(packed) == canonical_bag(ref)
    for cid, n in collect_choices(r.packed):
        assert n >= 2


def test_packing_matches_reference_on_random_fixtures():
    rng = random.Random(1234)
    for _ in range(150):
        rules, src = random_transfer_fixture(rng)
        _check_against_reference(rules, src)


@settings(max_examples=80, deadline=None)
@given(qlf_trees(max_leaves=10), st.randoms(use_true_random=False))
def test_packing_matches_reference_property(src, rng):
    rules, _ = random_transfer_fixture(rng)
    r = transfer(rules, src)
    if len(collect_choices(r.packed)) > 10:
        return
    _check_against_reference(rules, src)


@given(qlf_trees(max_leaves=12))
def test_transfer_is_deterministic(src):
    rules = load_rules("rule r1: a => x.\nrule r2: a => y.\nrule f1: f(@u) => g(tr(@u)).\n")
    assert transfer(rules, src) == transfer(rules, src)

from collections import Counter

import pytest
from hypothesis import HealthCheck, given, settings

from xfer.qlf import apply_assignment, collect_choices, enumerate_assignments, parse_qlf, symbols
from xfer.rewrite import order_pp_modifiers
from xfer.transfer import transfer
from xfer.triples import (
    ExpansionLimitExceeded, NoHeadPredicate, RoleTable, Triple, extract_conditional_triples,
    extract_triples, load_roles, parse_triple, satisfied_triples, term_signature,
)

from _strategies import packed_qlfs

SHOW_FLIGHTS = "[show,E,term(bare_plur,C^[and,[flight,C],form(prep(with),term(a,S^[stop,S]))])]"
PREFERRED = ("elliptical_np(term(def_plur,C^[and,[vol1,C],"
             "form(temporal_np,term(def_sing,E^[lundi1,E]))]))")
PACKED = ("elliptical_np(term(#(1,[def_plur,indef_plural,bare_plur]),C^[and,[vol1,C],"
          "form(prep(#(2,[a_bord_de,temporal_np,sur,pour,avec])),"
          "term(#(3,[def_sing,bare_sing]),E^[lundi1,E]))]))")


def T(text):
    return parse_triple(text)


def bag(*texts):
    return Counter(T(t) for t in texts)


def test_triple_text_round_trip():
    t = Triple("show", "obj", "flight")
    assert str(t) == "(show,obj,flight)"
    assert parse_triple(" ( show , obj , flight ) ") == t
    with pytest.raises(ValueError):
        Triple("", "det", "x")


def test_term_signature():
    assert term_signature(parse_qlf("term(a,S^[stop1,S])")) == ("a", "stop1")
    assert term_signature(parse_qlf("term(def_sing,E^[lundi1,E])")) == ("def_sing", "lundi1")
    assert term_signature(parse_qlf("term(def_plur,C^[and,[q,C]])")) == ("def_plur", "q")
    assert term_signature(parse_qlf("term(d,C^[and,[r,C,X],[q,C]])")) == ("d", "q")
    with pytest.raises(NoHeadPredicate):
        term_signature(parse_qlf("term(d,C^[and,[r,C,X]])"))


def test_show_flights_six_triples(pipeline):
    got = extract_triples(parse_qlf(SHOW_FLIGHTS), pipeline.roles)
    assert got == bag("(show,obj,flight)", "(show,obj,bare_plur)", "(bare_plur,det,flight)",
                      "(flight,with,stop)", "(flight,with,a)", "(a,det,stop)")


def test_default_role_label():
    got = extract_triples(parse_qlf(SHOW_FLIGHTS))
    assert T("(show,arg2,flight)") in got


def test_preferred_qlf_triples(pipeline):
    got = extract_triples(parse_qlf(PREFERRED), pipeline.roles)
    assert got == bag("(def_plur,det,vol1)", "(vol1,temporal_np,lundi1)",
                      "(vol1,temporal_np,def_sing)", "(def_sing,det,lundi1)")


def test_no_terms_no_triples():
    assert extract_triples(parse_qlf("f(a,[b,c])")) == Counter()


def test_clause_modifier_governor(pipeline):
    q = parse_qlf("[and,[aller1,E],form(prep(avec),term(proper_name,D^[delta,D]))]")
    got = extract_triples(q, pipeline.roles)
    assert got == bag("(aller1,avec,delta)", "(aller1,avec,proper_name)", "(proper_name,det,delta)")


def test_existential_role(pipeline):
    q = parse_qlf("[exist,E,term(indef_plur,T^[transport1,T])]")
    got = extract_triples(q, pipeline.roles)
    assert got == bag("(exist,exist_subj,transport1)", "(exist,exist_subj,indef_plur)",
                      "(indef_plur,det,transport1)")


def test_three_place_roles(pipeline):
    q = parse_qlf("[indiquer1,E,term(ref,Y^[vous,Y]),term(def_plur,C^[vol1,C])]")
    got = extract_triples(q, pipeline.roles)
    assert T("(indiquer1,subj_impl,vous)") in got
    assert T("(indiquer1,obj,def_plur)") in got


def test_headless_term_reported_and_skipped():
    diags = []
    q = parse_qlf("[show,E,term(d,C^[and,[r,C,X]])]")
    assert extract_triples(q, None, diags) == Counter()
    assert [d.kind for d in diags] == ["NoHeadPredicate"]


def test_load_roles_errors():
    assert load_roles("role show/2 2 obj\n") == RoleTable({("show", 2, 2): "obj"})
    with pytest.raises(SyntaxError):
        load_roles("role show 2 obj\n")


def test_choice_free_conditional_equals_plain(pipeline):
    q = parse_qlf(SHOW_FLIGHTS)
    cts = extract_conditional_triples(q, pipeline.roles)
    assert all(ct.conditions == frozenset() for ct in cts)
    assert Counter(ct.triple for ct in cts) == extract_triples(q, pipeline.roles)


def test_packed_worked_example_conditions(pipeline):
    cts = extract_conditional_triples(parse_qlf(PACKED), pipeline.roles)
    pairs = {(ct.triple, ct.conditions) for ct in cts}
    assert (T("(vol1,temporal_np,lundi1)"), frozenset({(2, 1)})) in pairs
    assert (T("(vol1,temporal_np,def_sing)"), frozenset({(2, 1), (3, 0)})) in pairs
    assert (T("(def_plur,det,vol1)"), frozenset({(1, 0)})) in pairs


def test_packed_worked_example_all_unpackings(pipeline):
    q = parse_qlf(PACKED)
    cts = extract_conditional_triples(q, pipeline.roles)
    for a in enumerate_assignments(q):
        assert satisfied_triples(cts, a) == extract_triples(apply_assignment(q, a), pipeline.roles)


def test_expansion_limit():
    q = parse_qlf("[and,[#(1,[p1,p2,p3,p4,p5]),E],"
                  "form(prep(#(2,[x,y,z])),term(#(3,[d1,d2]),S^[stop,S]))]")
    with pytest.raises(ExpansionLimitExceeded) as e:
        extract_conditional_triples(q, None, expansion_limit=16)
    assert e.value.count == 30
    assert extract_conditional_triples(q, None, expansion_limit=30)


def test_transfer_output_equivalence(pipeline, sources):
    for src in sources:
        r = transfer(pipeline.rules, src)
        cts = extract_conditional_triples(r.packed, pipeline.roles)
        for a in enumerate_assignments(r.packed):
            assert satisfied_triples(cts, a) == extract_triples(apply_assignment(r.packed, a), pipeline.roles)


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(packed_qlfs())
def test_packed_plain_equivalence(q):
    if len(collect_choices(q)) > 10:
        return
    roles = RoleTable({("indiquer1", 3, 2): "subj_impl", ("aller1", 3, 2): "agent"})
    cts = extract_conditional_triples(q, roles)
    for a in enumerate_assignments(q):
        assert satisfied_triples(cts, a) == extract_triples(apply_assignment(q, a), roles)


@settings(max_examples=150, deadline=None)
@given(packed_qlfs())
def test_triples_use_only_input_symbols(q):
    if len(collect_choices(q)) > 10:
        return
    allowed = symbols(q) | {"det", "arg2", "arg3", "arg4"}
    for ct in extract_conditional_triples(q, None):
        assert {ct.triple.left, ct.triple.relation, ct.triple.right} <= allowed


def test_modifier_order_does_not_change_triples(pipeline):
    q = parse_qlf("[and,[aller1,E],form(temporal_np,term(def_sing,D^[lundi1,D])),"
                  "form(prep(sur),term(proper_name,X^[delta,X])),form(prep(a),term(proper_name,B^[boston,B]))]")
    mods = order_pp_modifiers(list(q.items[2:]), pipeline.pp_table)
    reordered = type(q)(q.items[:2] + tuple(mods))
    assert reordered != q
    assert extract_triples(reordered, pipeline.roles) == extract_triples(q, pipeline.roles)

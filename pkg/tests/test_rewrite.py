from __future__ import annotations

import random

import pytest
from helpers import xor_chain
from hypothesis import given, settings
from hypothesis import strategies as st

from cmw.acceptance import random_circuit
from cmw.circuit import Kind, Measure, parse_formula, size, truth_table, x
from cmw.rewrite import (
    RULE_BY_NAME,
    RULES,
    Gc,
    Ge,
    Restriction,
    RewriteError,
    Sub,
    apply_step,
    check_record,
    constant_fanout,
    is_normalized,
    is_terminal,
    match_rules,
    normalize,
    record_is_layered,
    replay,
    substitute_and_normalize,
)


def test_rule_table_has_seventeen_named_rules():
    assert len(RULES) == 17
    assert [r.id for r in RULES] == list(range(17))
    assert {"FIX_AND_L", "PASS_OR_R", "RESOLVE_AND", "PRUNE_NOT"} <= set(RULE_BY_NAME)


def test_passing_rule_rewires_readers():
    c = parse_formula("(1 & x1) | x2")
    and_gate = c.gates[c.output].inputs[0]
    const, inp = c.gates[and_gate].inputs
    out, changed = apply_step(c, Ge.make(RULE_BY_NAME["PASS_AND_L"].id, alpha=and_gate, gamma=inp, kappa=const))
    assert changed
    assert out.gates[out.output].inputs[0] == inp
    assert and_gate in out.gates and not out.readers()[and_gate]


def test_garbage_collection_step():
    c = parse_formula("(1 & x1) | x2")
    out, _ = normalize(c)
    assert all(g.kind is not Kind.CONST for g in out.gates.values())
    dangling = parse_formula("(1 & x1) | x2")
    and_gate = dangling.gates[dangling.output].inputs[0]
    const, inp = dangling.gates[and_gate].inputs
    mid, _ = apply_step(dangling, Ge.make(RULE_BY_NAME["PASS_AND_L"].id, alpha=and_gate, gamma=inp, kappa=const))
    after, changed = apply_step(mid, Gc(and_gate))
    assert changed and and_gate not in after.gates


def test_resolving_rule_makes_constant():
    c = parse_formula("x1 | ~x1")
    (rule, roles), = match_rules(c)
    assert RULES[rule].name == "RESOLVE_OR"
    out, _ = apply_step(c, Ge.make(rule, **roles))
    assert out.gates[out.output].kind is Kind.CONST and out.gates[out.output].value == 1
    assert not out.gates[out.output].inputs


def test_match_rules_examples():
    assert match_rules(xor_chain(3)) == []
    (rule, _), = match_rules(parse_formula("~~x1"))
    assert RULES[rule].name == "PRUNE_NOT"
    (rule, _), = match_rules(parse_formula("0 & x1"))
    assert RULES[rule].category.value == "fixing"


def test_normalize_simple_constant():
    c = parse_formula("1 & x1")
    out, rec = normalize(c)
    assert str(truth_table(out, [x(1)])) == "01"
    assert size(c) - size(out) == 1
    assert check_record(c, rec) == {"terminal": True, "layered": True}


def test_normalize_is_identity_on_normal_circuit():
    c = xor_chain(3)
    out, rec = normalize(c)
    assert out == c and len(rec) == 0


def test_restriction_of_xor2():
    out, _ = substitute_and_normalize(xor_chain(2), {x(1): 0})
    assert str(truth_table(out, [x(2)])) == "01"
    assert size(out) == 0


def test_single_variable_restriction_of_xor3_costs_three():
    c = xor_chain(3)
    for v in (x(1), x(2), x(3)):
        for b in (0, 1):
            out, _ = substitute_and_normalize(c, {v: b})
            assert size(out) == 3


def test_two_variable_restriction_of_xor3():
    out, _ = substitute_and_normalize(xor_chain(3), {x(1): 1, x(2): 1})
    assert out.variables() == {x(3)}
    assert str(truth_table(out, [x(3)])) == "01"


def test_empty_assignment_only_normalizes():
    c = parse_formula("(1 & x1) | x2")
    assert substitute_and_normalize(c, {})[0] == normalize(c)[0]


def test_record_checks():
    c = parse_formula("(0 | x1) & x2")
    assert not is_terminal(c)
    assert check_record(c, Restriction([]))["terminal"] is False
    # shallow rule first, deeper rule second
    c = parse_formula("1 & ((1 & x1) | x2)")
    top = c.output
    k_top, mid = c.gates[top].inputs
    inner = c.gates[mid].inputs[0]
    k_in, v = c.gates[inner].inputs
    rid = RULE_BY_NAME["PASS_AND_L"].id
    rec = Restriction([Ge.make(rid, alpha=top, gamma=mid, kappa=k_top), Ge.make(rid, alpha=inner, gamma=v, kappa=k_in)])
    assert replay(c, rec)
    assert record_is_layered(c, rec) is False
    assert record_is_layered(c, Restriction(list(reversed(rec.steps))))


def test_replay_rejects_inapplicable_step():
    with pytest.raises(RewriteError):
        replay(xor_chain(2), Restriction([Sub("y", 1, 0)]))


def test_record_text_round_trip():
    c = parse_formula("(1 & x1) | (0 | ~~x2)")
    _, rec = substitute_and_normalize(c, {x(1): 1})
    text = rec.format()
    assert Restriction.parse(text).steps == rec.steps
    assert any(line.startswith("SUB x 1 1") for line in text.splitlines())


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_normalization_lemma_property(seed):
    c = random_circuit(random.Random(seed))
    out, rec = normalize(c)
    lone_const = len(out.gates) == 1 and out.gates[out.output].kind is Kind.CONST
    assert lone_const or size(c) - size(out) >= constant_fanout(c)
    assert is_normalized(out)
    assert check_record(c, rec) == {"terminal": True, "layered": True}
    assert replay(c, rec) == out


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(0, 1))
def test_restriction_preserves_function(seed, var, bit):
    from cmw.truthtable import restrict_tt

    c = random_circuit(random.Random(seed))
    order = [x(i) for i in range(1, 5)]
    out, _ = substitute_and_normalize(c, {x(var): bit})
    want = restrict_tt(truth_table(c, order), {var: bit})
    assert truth_table(out, [v for v in order if v != x(var)]) == want
    assert size(out, Measure.R) <= size(c, Measure.R)

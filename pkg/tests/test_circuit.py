from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmw.circuit import (
    Builder,
    Circuit,
    CircuitError,
    Gate,
    Kind,
    Measure,
    VarRef,
    canonical_form,
    depth_order,
    evaluate,
    fanout,
    format_bcir,
    parse_bcir,
    parse_formula,
    size,
    subcircuit,
    truth_table,
    x,
    y,
)
from cmw.readonce import from_circuit, leaves

from helpers import xor_chain


def test_evaluate_xor2(xor2):
    assert evaluate(xor2, {x(1): 1, x(2): 1}) == 0
    assert evaluate(xor2, {x(1): 1, x(2): 0}) == 1


def test_evaluate_single_input():
    c = Circuit([Gate(0, Kind.INPUT, var=x(1))], 0)
    assert evaluate(c, {x(1): 1}) == 1


def test_evaluate_xor3_chain_matches_parity():
    c = xor_chain(3)
    for bits in itertools.product((0, 1), repeat=3):
        assert evaluate(c, dict(zip([x(1), x(2), x(3)], bits))) == sum(bits) % 2
    assert evaluate(c, {x(1): 1, x(2): 0, x(3): 1}) == 0


def test_missing_variable_raises(xor2):
    with pytest.raises((CircuitError, KeyError, ValueError)):
        evaluate(xor2, {x(1): 1})


def test_truth_tables():
    assert str(truth_table(xor_chain(2), [x(1), x(2)])) == "0110"
    assert str(truth_table(parse_formula("x1 & x2"), [x(1), x(2)])) == "0001"


def test_truth_table_of_or_of_ands():
    c = parse_formula("(y1 & z1) | (y2 & z2)")
    order = [y(1), y(2), VarRef("z", 1), VarRef("z", 2)]
    expected = "".join(
        str(int((r >> 3 & 1) & (r >> 1 & 1) or (r >> 2 & 1) & (r & 1))) for r in range(16)
    )
    assert str(truth_table(c, order)) == expected


def test_sizes():
    c = xor_chain(2)
    assert size(c, Measure.D) == 3
    assert size(c, Measure.R) == 4
    assert size(Circuit([Gate(0, Kind.INPUT, var=x(1))], 0)) == 0


def test_fanout():
    c = xor_chain(3)
    assert fanout(c, c.output) == 0
    for gid in c.input_gates():
        assert fanout(c, gid) == 2
    b = Builder()
    g = b.input(x(1))
    b.and_(g, g)
    assert fanout(Circuit(b.gates, 1), 0) == 2


def test_depth_order_chain():
    c = parse_formula("~(x1 & x2)")
    order = depth_order(c)
    kinds = [c.gates[g].kind for g in order]
    assert kinds[:2] == [Kind.INPUT, Kind.INPUT]
    assert kinds[2:] == [Kind.AND, Kind.NOT]


def test_subcircuit():
    c = xor_chain(2)
    assert subcircuit(c, c.output) == c
    leaf = c.input_gates()[0]
    assert len(subcircuit(c, leaf)) == 1


def test_subcircuit_at_tree_root_is_read_once(xor_or_y):
    c = parse_formula("(x1 ^ x2) | (y1 & y2)")
    root = c.gates[c.output].inputs[1]
    fm = from_circuit(c, root)
    assert sorted(lf.var for lf in leaves(fm)) == [y(1), y(2)]


def test_canonical_form_invariance():
    c = xor_chain(3)
    assert canonical_form(c) == canonical_form(c.shift_ids(100))
    assert canonical_form(parse_formula("x1 & x2")) != canonical_form(parse_formula("x1 | x2"))


def test_canonical_form_distinguishes_xor2_realizations():
    from cmw.oracle import enumerate_optimal_circuits
    from cmw.truthtable import xor_tt

    circuits = enumerate_optimal_circuits(xor_tt(2))
    assert len({canonical_form(c) for c in circuits}) == len(circuits)


def test_bcir_round_trip_and_errors():
    c = xor_chain(3)
    text = format_bcir(c)
    back, inputs = parse_bcir(text)
    assert back == c and inputs == [x(1), x(2), x(3)]
    with pytest.raises(CircuitError):
        parse_bcir("inputs x1\ngate 0 INPUT x1\ngate 1 AND 0 5\noutput 1\n")
    with pytest.raises(CircuitError):
        parse_bcir("inputs x1\ngate 0 INPUT x1\n")
    with pytest.raises(CircuitError):
        parse_bcir("inputs x1\ngate 0 INPUT x1\ngate 0 NOT 0\noutput 0\n")


def test_bcir_comments():
    text = "# header\ninputs x1 x2\ngate 0 INPUT x1 # a\ngate 1 INPUT x2\ngate 2 OR 0 1\noutput 2\n"
    c, _ = parse_bcir(text)
    assert str(truth_table(c, [x(1), x(2)])) == "0111"


_OPS = {"&": lambda a, b: a & b, "|": lambda a, b: a | b, "^": lambda a, b: a ^ b}


@st.composite
def formulas(draw, depth=3):
    """Fully parenthesized formula text plus a reference evaluator."""
    if depth == 0 or draw(st.booleans()):
        i = draw(st.integers(1, 3))
        return f"x{i}", lambda bits: bits[i - 1]
    op = draw(st.sampled_from(sorted(_OPS)))
    lt, lf = draw(formulas(depth=depth - 1))
    rt, rf = draw(formulas(depth=depth - 1))
    neg = draw(st.booleans())
    fn = _OPS[op]
    return ("~" if neg else "") + f"({lt} {op} {rt})", lambda bits: fn(lf(bits), rf(bits)) ^ neg


@settings(max_examples=60, deadline=None)
@given(formulas())
def test_formula_parser_matches_reference(pair):
    text, ref = pair
    c = parse_formula(text)
    for bits in itertools.product((0, 1), repeat=3):
        assignment = {x(i): b for i, b in enumerate(bits, start=1)}
        assert evaluate(c, {v: assignment[v] for v in c.variables()}) == ref(bits)


@settings(max_examples=60, deadline=None)
@given(formulas(), st.integers(1, 500))
def test_bcir_and_canonical_form_stable(pair, shift):
    c = parse_formula(pair[0])
    back, _ = parse_bcir(format_bcir(c))
    assert back == c
    assert canonical_form(c.shift_ids(shift)) == canonical_form(c)

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmw.circuit import Kind, parse_formula as parse_circuit, truth_table, y
from cmw.readonce import (
    FormulaError,
    Leaf,
    Op,
    enumerate_read_once_formulas,
    format_formula,
    formula_count,
    formula_table,
    from_circuit,
    label,
    leaf_count,
    parse_formula,
)

YS = [y(i) for i in range(1, 6)]


def test_small_counts():
    assert len(list(enumerate_read_once_formulas(1, monotone=True))) == 1
    assert len(list(enumerate_read_once_formulas(1))) == 2
    assert len(list(enumerate_read_once_formulas(2, monotone=True))) == 2


@pytest.mark.parametrize("a", [1, 2, 3, 4])
@pytest.mark.parametrize("monotone", [True, False])
def test_closed_form_matches_enumeration(a, monotone):
    formulas = list(enumerate_read_once_formulas(a, monotone))
    assert len(formulas) == formula_count(a, monotone)
    assert len(set(formulas)) == len(formulas)
    assert all(leaf_count(fm) == a for fm in formulas)


def test_enumeration_rejects_empty():
    with pytest.raises(FormulaError):
        list(enumerate_read_once_formulas(0))


def test_format_and_parse():
    fm = Op(Kind.AND, Leaf(y(1)), Leaf(y(2), True), True)
    assert format_formula(fm) == "!(y1&!y2)"
    assert parse_formula("!(y1&!y2)") == fm
    assert format_formula(Leaf(None)) == "?"
    with pytest.raises(FormulaError):
        parse_formula("(y1^y2)")
    with pytest.raises(FormulaError):
        parse_formula("(y1&y2")


def test_formula_table_matches_circuit():
    fm = parse_formula("((y1|!y2)&y3)")
    c = parse_circuit("(y1 | ~y2) & y3")
    assert formula_table(fm, YS[:3]) == truth_table(c, YS[:3]).bits


def test_from_circuit_reads_tree():
    c = parse_circuit("~(y1 & y2) | y3")
    fm = from_circuit(c, c.output)
    assert formula_table(fm, YS[:3]) == truth_table(c, YS[:3]).bits


def test_label_checks_arity():
    with pytest.raises(FormulaError):
        label(Leaf(None), YS[:2])


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.booleans(), st.data())
def test_format_parse_round_trip(a, monotone, data):
    formulas = list(enumerate_read_once_formulas(a, monotone))
    fm = label(data.draw(st.sampled_from(formulas)), YS[:a])
    assert parse_formula(format_formula(fm)) == fm

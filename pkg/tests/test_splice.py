from __future__ import annotations

import pytest
from helpers import xor2_circuit
from hypothesis import given, settings
from hypothesis import strategies as st

from cmw.circuit import Measure, canonical_form, parse_formula, size, truth_table, var_order, x, y
from cmw.readonce import Leaf, enumerate_read_once_formulas, label
from cmw.rewrite import replay
from cmw.splice import (
    WIDGETS,
    Splice,
    SpliceCode,
    SpliceCodeError,
    SubsetViolation,
    compositions,
    decode,
    derive_widgets,
    encode,
    enumerate_implicit_codes,
    max_slots,
    widgets_for,
)
from cmw.truthtable import find_keys, tt_isomorphic, xor_tt
from cmw.xor_catalog import variable_reads
from cmw.ytree import extract_ytree_decomposition, find_all_stops_restriction

F2 = xor_tt(2)


def _round_trip(text: str, m: int):
    G = parse_formula(text)
    keys = find_keys(truth_table(G, var_order(2, m)), F2)
    rho = find_all_stops_restriction(G, F2, keys)
    F = replay(G, rho)
    D = extract_ytree_decomposition(G, 2, m, F2, keys)
    return G, F, encode(G, F, D, rho)


def test_widget_derivation():
    ws = derive_widgets()
    assert len(ws) == 4 and set(ws) == set(WIDGETS)
    assert len(widgets_for(Measure.R)) == 2


def test_compositions():
    assert list(compositions(3, 2)) == [(1, 2), (2, 1)]
    assert list(compositions(5, 1)) == [(5,)]
    assert list(compositions(4, 4)) == [(1, 1, 1, 1)]
    with pytest.raises(ValueError):
        list(compositions(2, 3))


def test_encode_single_or_graft():
    G, F, E = _round_trip("(x1 ^ x2) | y1", 1)
    assert sum(E.origins) == 1 and E.combiners == 1
    (sp,) = E.splices[0]
    assert WIDGETS[sp.widget].kind.value == "OR" and not WIDGETS[sp.widget].negated
    ell = max_slots(F)
    assert sp.target == (1,) + (0,) * (ell - 1)
    assert canonical_form(decode(F, E)) == canonical_form(G)


def test_encode_base_is_empty_code():
    _, F, E = _round_trip("x1 ^ x2", 0)
    assert E.origins == (0,) * len(E.origins) and E.splices == ()
    assert canonical_form(decode(F, E)) == canonical_form(F)


def test_compounded_combiners_share_one_sequence():
    G, F, E = _round_trip("((x1 ^ x2) | y1) | y2", 2)
    assert len(E.splices) == 1 and len(E.splices[0]) == 2
    assert canonical_form(decode(F, E)) == canonical_form(G)


def test_decode_or_graft_on_output():
    F = xor2_circuit()
    E = SpliceCode((0, 0, 0, 0, 1), ((Splice((1, 0), (1, 0), 2, Leaf(y(1))),),))
    G = decode(F, E)
    assert size(G) == 4
    want = truth_table(parse_formula("(x1 ^ x2) | y1"), var_order(2, 1))
    assert tt_isomorphic(truth_table(G, var_order(2, 1)), want) is not None


def test_subset_violation():
    F = xor2_circuit()
    # after the first splice the new combiner owns slot 0 of x1 and x1 keeps slot 1
    first = Splice((1, 1), (1, 0), 2, Leaf(y(1)))
    E = SpliceCode((1, 0, 0, 0, 0), ((first, Splice((1, 0), (0, 1), 2, Leaf(y(2)))),))
    with pytest.raises(SubsetViolation):
        decode(F, E)


def test_code_text_round_trip_and_errors():
    _, _, E = _round_trip("((x1 ^ x2) | y1) | y2", 2)
    assert SpliceCode.parse(E.format()) == E
    with pytest.raises(SpliceCodeError):
        SpliceCode.parse("splice target=1 wires=1 widget=2 moves=c ytree=y1\n")
    with pytest.raises(SpliceCodeError):
        SpliceCode.parse("origins 1\norigin 0\nsplice target=1 wires=1 widget=2 moves=c,c ytree=y1\n")


def test_implicit_codes_m0_and_m1():
    F = parse_formula("x1 & x2")
    assert [c.origins for c in enumerate_implicit_codes(F, 0)] == [(0, 0, 0)]
    codes = list(enumerate_implicit_codes(F, 1))
    assert codes and all(sum(c.origins) == 1 and c.combiners == 1 for c in codes)
    assert {c.origins for c in codes} == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}


_CODES = list(enumerate_implicit_codes(xor2_circuit(), 2))


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_decoded_candidates_have_extension_shape(data):
    code = data.draw(st.sampled_from(_CODES))
    d = code.combiners
    comp = data.draw(st.sampled_from(list(compositions(2, d))))
    trees, nxt = [], 1
    for a in comp:
        fm = data.draw(st.sampled_from(list(enumerate_read_once_formulas(a))))
        trees.append(label(fm, [y(i) for i in range(nxt, nxt + a)]))
        nxt += a
    G = decode(xor2_circuit(), code.with_trees(trees))
    assert size(G) == 3 + 2
    reads = variable_reads(G)
    assert reads[y(1)] == reads[y(2)] == 1
    assert reads[x(1)] >= 1 and reads[x(2)] >= 1

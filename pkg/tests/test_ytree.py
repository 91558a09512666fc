from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmw.circuit import Kind, parse_formula, size, truth_table, var_order, x, y
from cmw.oracle import exact_cc, optimal_circuits_for_many
from cmw.readonce import Leaf, leaves
from cmw.rewrite import Sub, check_record, replay
from cmw.truthtable import find_keys, xor_tt
from cmw.ytree import (
    AllStopsError,
    ExtractionError,
    YTreeDecomposition,
    YTreeTriple,
    extract_ytree_decomposition,
    find_all_stops_restriction,
    origin_of,
    original_gates,
    segment_is_simple,
    segments,
    validate_decomposition,
)

F = xor_tt(2)


def _setup(text: str, m: int):
    G = parse_formula(text)
    keys = find_keys(truth_table(G, var_order(2, m)), F)
    return G, keys


def test_all_stops_single_or():
    G, keys = _setup("(x1 ^ x2) | y1", 1)
    rec = find_all_stops_restriction(G, F, keys)
    subs = [s for s in rec.steps if isinstance(s, Sub)]
    assert subs == [Sub("y", 1, 0)]
    assert len(rec.ge_steps()) == 1 and segment_is_simple(rec)
    residue = replay(G, rec)
    assert size(residue) == 3 and exact_cc(truth_table(residue, var_order(2))) == 3
    assert check_record(G, rec) == {"terminal": True, "layered": True}


def test_all_stops_without_extension_is_empty():
    G = parse_formula("x1 ^ x2")
    assert len(find_all_stops_restriction(G, F, [])) == 0


def test_all_stops_deeper_variable_first():
    G, keys = _setup("((x1 ^ x2) | y1) | y2", 2)
    rec = find_all_stops_restriction(G, F, keys)
    assert [s.index for s in rec.steps if isinstance(s, Sub)] == [1, 2]
    parts = segments(rec)
    assert len(parts) == 2 and all(segment_is_simple(p) for p in parts)


def test_all_stops_requires_key():
    G = parse_formula("(x1 ^ x2) | y1")
    with pytest.raises(AllStopsError):
        find_all_stops_restriction(G, F, [])


def test_decomposition_single_or():
    G, keys = _setup("(x1 ^ x2) | y1", 1)
    D = extract_ytree_decomposition(G, 2, 1, F, keys)
    (t,) = D.triples
    assert t.combiner == G.output and t.side == "R" and t.tree == Leaf(y(1))
    assert D.weight == 1
    check = validate_decomposition(G, D, 2, 1)
    assert check and check.total


def test_decomposition_empty_for_base():
    G = parse_formula("x1 ^ x2")
    D = extract_ytree_decomposition(G, 2, 0, F, [])
    assert D == YTreeDecomposition() and D.is_total(0)


def test_decomposition_two_leaf_tree():
    G, keys = _setup("(x1 ^ x2) | (y1 & y2)", 2)
    D = extract_ytree_decomposition(G, 2, 2, F, keys)
    (t,) = D.triples
    assert sorted(lf.var for lf in leaves(t.tree)) == [y(1), y(2)]


def test_decomposition_text_round_trip():
    G, keys = _setup("((x1 ^ x2) | y1) | y2", 2)
    D = extract_ytree_decomposition(G, 2, 2, F, keys)
    assert D.format() == "combiner=7 side=R tree=y1\ncombiner=9 side=R tree=y2\n"
    assert YTreeDecomposition.parse(D.format()) == D


def test_validate_rejects_base_variable_in_tree():
    G = parse_formula("(x1 ^ x2) | y1")
    bad = YTreeDecomposition(frozenset({YTreeTriple(G.output, "L", Leaf(x(1)))}))
    check = validate_decomposition(G, bad, 2, 1)
    assert not check and "base variable" in check.reason


def test_validate_rejects_shared_root():
    G = parse_formula("((x1 ^ x2) | y1) & (x1 | y1)")
    comb = next(gid for gid, g in G.gates.items()
                if g.kind is Kind.OR and G.gates[g.inputs[1]].kind is Kind.INPUT and G.gates[g.inputs[0]].kind is Kind.AND)
    bad = YTreeDecomposition(frozenset({YTreeTriple(comb, "R", Leaf(y(1)))}))
    assert not validate_decomposition(G, bad, 2, 1)


def test_extraction_error_on_non_extension():
    G = parse_formula("(x1 ^ x2) & (x1 | y1)")
    keys = find_keys(truth_table(G, var_order(2, 1)), F)
    with pytest.raises(ExtractionError):
        extract_ytree_decomposition(G, 2, 1, F, keys)


def test_origins():
    G, keys = _setup("((x1 ^ x2) | y1) | y2", 2)
    rec = find_all_stops_restriction(G, F, keys)
    D = extract_ytree_decomposition(G, 2, 2, F, keys)
    orig = original_gates(G, rec)
    eta = G.gates[7].inputs[0]
    assert {origin_of(G, D, c, orig) for c in D.combiners()} == {eta}
    # a combiner directly on an input gate
    G, keys = _setup("(x1 | y1) ^ x2", 1)
    rec = find_all_stops_restriction(G, F, keys)
    D = extract_ytree_decomposition(G, 2, 1, F, keys)
    (c,) = D.combiners()
    o = origin_of(G, D, c, original_gates(G, rec))
    assert G.gates[o].kind is Kind.INPUT and G.gates[o].var == x(1)


_POSITIVES = None


def _positive_circuits():
    """Optimal circuits of every 4-variable simple extension of XOR_2 seen by the oracle."""
    global _POSITIVES
    if _POSITIVES is None:
        from cmw.oracle import is_simple_extension_bruteforce
        from cmw.truthtable import TruthTable

        gs = [g for g in range(1 << 16) if is_simple_extension_bruteforce(F, TruthTable(4, g))]
        names = [x(1), x(2), y(1), y(2)]
        circuits = optimal_circuits_for_many(4, gs[::7], names=names)
        _POSITIVES = [(TruthTable(4, g), c) for g in gs[::7] for c in circuits[g][:3]]
    return _POSITIVES


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_sampled_extensions_decompose(data):
    g, G = data.draw(st.sampled_from(_positive_circuits()))
    D = extract_ytree_decomposition(G, 2, 2, F, find_keys(g, F))
    check = validate_decomposition(G, D, 2, 2)
    assert check and check.total

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmw.bpis import (
    BpisError,
    BpisInstance,
    StructureError,
    block_permutations,
    brute_solve_bpis,
    check_consistency,
    circuit_to_witness,
    reduce,
    variables,
    verify_instance,
    witness_to_circuit,
)
from cmw.circuit import Builder, evaluate, parse_formula, truth_table
from cmw.truthtable import PartialTruthTable, Permutation

ID2 = Permutation((1, 2))
EDGES2 = [(j, k, a, b) for j in (1, 2) for k in (1, 2) for a in (1, 2) for b in (1, 2)]


def _row(values: dict, n: int) -> int:
    r = 0
    for v in variables(n):
        r = (r << 1) | values.get(v, 0)
    return r


def test_instance_text_round_trip():
    inst = BpisInstance(2, frozenset({(1, 2, 2, 1)}))
    assert BpisInstance.parse(inst.format()) == inst
    with pytest.raises(BpisError):
        BpisInstance.parse("n=1\n1 1 2 1\n")
    with pytest.raises(BpisError):
        BpisInstance.parse("1 1 1 1\n")


def test_brute_force_examples():
    assert brute_solve_bpis(BpisInstance(1)) == ID2
    assert brute_solve_bpis(BpisInstance(1, frozenset({(1, 1, 1, 1)}))) is None
    # every choice of pi(1) is forbidden against every second-block option
    blocked = frozenset((1, k, 1, kk) for k in (1, 2) for kk in (1, 2))
    assert brute_solve_bpis(BpisInstance(2, blocked)) is None


def test_reduction_rows_n1():
    pt = reduce(BpisInstance(1))
    xs, ys, zs = variables(1)[:2], variables(1)[2:4], variables(1)[4:]
    row = _row({zs[0]: 1, zs[1]: 1, ys[0]: 1}, 1)
    assert (pt.care >> row) & 1 and (pt.bits >> row) & 1
    row = _row({zs[0]: 1, zs[1]: 1}, 1)
    assert (pt.care >> row) & 1 and not (pt.bits >> row) & 1
    for r in range(64):
        if r & 0b11 == 0:  # z = 00
            assert (pt.care >> r) & 1 and not (pt.bits >> r) & 1
    unconstrained = _row({xs[0]: 1, ys[1]: 1, zs[0]: 1}, 1)
    assert "⋆" in str(pt) and not (pt.care >> unconstrained) & 1


def test_identity_witness_formula():
    c = witness_to_circuit(ID2, 1)
    ref = parse_formula("((x1 | y1) & z1) | ((x2 | y2) & z2)")
    assert truth_table(c, variables(1)) == truth_table(ref, variables(1))


def test_witness_round_trips():
    for n in (1, 2, 3):
        for pi in block_permutations(n):
            assert circuit_to_witness(witness_to_circuit(pi, n), n) == pi


def test_wrong_pairing_is_read_back():
    b = Builder()
    terms = []
    for i, j in ((1, 2), (2, 1)):
        terms.append(b.and_(b.or_(b.input(f"x{j}"), b.input(f"y{i}")), b.input(f"z{i}")))
    c = b.build(b.or_(*terms))
    assert circuit_to_witness(c, 1) == Permutation((2, 1))


def test_structure_mismatch():
    with pytest.raises(StructureError):
        circuit_to_witness(parse_formula("x1 & x2"), 1)


def test_consistency_examples():
    c = witness_to_circuit(ID2, 1)
    assert check_consistency(c, reduce(BpisInstance(1)))
    edge_pt = reduce(BpisInstance(1, frozenset({(1, 1, 1, 1)})))
    assert not check_consistency(c, edge_pt)
    zs = variables(1)[4:]
    edge_row = {v: 0 for v in variables(1)} | {zs[0]: 1, zs[1]: 1}
    assert evaluate(c, edge_row) == 0
    assert check_consistency(c, PartialTruthTable(6, 0, 0))


def test_soundness_exhaustive_single_edges():
    for e in EDGES2:
        assert all(verify_instance(BpisInstance(2, frozenset({e}))).values())
    for edges in (frozenset(), frozenset({(1, 1, 1, 1)})):
        assert all(verify_instance(BpisInstance(1, edges)).values())


@settings(max_examples=25, deadline=None)
@given(st.sets(st.sampled_from(EDGES2), max_size=8))
def test_soundness_random_n2(edges):
    assert all(verify_instance(BpisInstance(2, frozenset(edges))).values())

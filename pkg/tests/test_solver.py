from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmw.circuit import Measure, parse_formula, size, truth_table, var_order
from cmw.oracle import enumerate_optimal_circuits, is_simple_extension_bruteforce
from cmw.solver import (
    C_BUDGET,
    SepInstance,
    SolverError,
    budget_bound,
    candidate_stats,
    check_witness,
    solve,
    solve_xor,
    witness,
)
from cmw.truthtable import TruthTable, or_tt, xor_tt
from cmw.xor_catalog import catalog_from_circuits, enumerate_open_optimal_xor

F = xor_tt(2)
CAT = enumerate_open_optimal_xor(2)
G_POS = truth_table(parse_formula("(x1 ^ x2) | y1"), var_order(2, 1))


def inst(g: TruthTable, f: TruthTable = F, cat=CAT) -> SepInstance:
    return SepInstance(f.num_vars, f, g, Measure.D, cat)


def or_catalog():
    f = or_tt(2)
    return catalog_from_circuits(f, enumerate_optimal_circuits(f))


def test_examples():
    assert not solve(inst(xor_tt(3)))
    assert solve(inst(G_POS))
    assert solve(inst(F))
    assert solve(inst(or_tt(3), or_tt(2), or_catalog()))


def test_solve_xor_examples():
    assert solve_xor(2, G_POS)
    assert not solve_xor(3, xor_tt(4))
    dummy = TruthTable.from_function(3, lambda a, b, c: a ^ b)
    assert not solve_xor(2, dummy)


def test_witness_positive():
    w = witness(inst(G_POS))
    assert w is not None
    circuit, pi = w
    assert size(circuit) == 4
    assert all(check_witness(inst(G_POS), circuit, pi).values())


def test_witness_negative_and_m0():
    assert witness(inst(xor_tt(3))) is None
    circuit, pi = witness(inst(F))
    assert size(circuit) == 3 and all(check_witness(inst(F), circuit, pi).values())


def test_instance_validation():
    with pytest.raises(SolverError):
        SepInstance(2, TruthTable.from_str("0011"), G_POS, Measure.D, CAT)
    with pytest.raises(SolverError):
        inst(G_POS, or_tt(2), CAT)
    with pytest.raises(SolverError):
        SepInstance(3, xor_tt(3), xor_tt(4), Measure.D, CAT)


def test_budget():
    st_ = candidate_stats(inst(G_POS))
    assert st_.within_budget and st_.decoded <= st_.bound
    assert budget_bound(CAT, 1) == len(CAT.classes) * 2 ** (C_BUDGET * CAT.ell * (CAT.s + 1))


def test_three_variable_sweep_matches_oracle():
    for f, cat in ((F, CAT), (or_tt(2), or_catalog())):
        for g in range(256):
            t = TruthTable(3, g)
            assert solve(inst(t, f, cat)) == is_simple_extension_bruteforce(f, t)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**16 - 1))
def test_four_variable_samples_match_oracle(bits):
    g = TruthTable(4, bits)
    ans = solve(inst(g))
    assert ans == is_simple_extension_bruteforce(F, g)
    if ans:
        assert all(check_witness(inst(g), *witness(inst(g))).values())

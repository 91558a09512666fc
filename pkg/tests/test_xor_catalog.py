from __future__ import annotations

import pytest
from helpers import xor_chain

from cmw.circuit import Measure, canonical_form, parse_formula, size, truth_table, var_order, x
from cmw.oracle import enumerate_optimal_circuits, exact_cc
from cmw.truthtable import xor_tt
from cmw.xor_catalog import (
    CatalogError,
    catalog_from_circuits,
    composition_count,
    enumerate_open_optimal_xor,
    format_catalog,
    labeled_closure,
    parse_catalog,
    strip_labels,
    tree_shapes,
    validate_block_partition,
    variable_reads,
    xor2_blocks,
)

NAMES = [x(1), x(2), x(3), x(4)]


def test_xor2_blocks_contain_standard_realization():
    std = canonical_form(parse_formula("(x1 | x2) & ~(x1 & x2)"))
    assert std in {canonical_form(c) for c in xor2_blocks(Measure.D)}


def test_xor2_blocks_under_r_have_three_binary_gates():
    blocks = xor2_blocks(Measure.R)
    assert len(blocks) == 2
    assert all(size(c, Measure.D) == 3 for c in blocks)


def test_tree_shapes_are_catalan():
    assert [len(tree_shapes(n)) for n in range(1, 6)] == [1, 1, 2, 5, 14]


def test_catalog_regression_counts():
    assert [len(enumerate_open_optimal_xor(n).classes) for n in (2, 3, 4)] == [14, 224, 5236]
    cat = enumerate_open_optimal_xor(3)
    assert (cat.s, cat.ell) == (6, 2)


def test_n2_catalog_is_xor2_blocks_without_labels():
    cat = enumerate_open_optimal_xor(2)
    stripped = {canonical_form(strip_labels(c).circuit) for c in xor2_blocks(Measure.D)}
    assert {canonical_form(oc.circuit) for oc in cat.classes} <= stripped


def test_n3_classes_are_optimal_xor3_isomorphs():
    cat = enumerate_open_optimal_xor(3)
    for oc in cat.classes:
        c = oc.label(NAMES[:3])
        t = truth_table(c, var_order(3))
        assert exact_cc(t) == 6
        assert t == xor_tt(3)


def test_closure_equals_oracle_enumeration_n3():
    closure = labeled_closure(enumerate_open_optimal_xor(3))
    assert set(closure) == {canonical_form(c) for c in enumerate_optimal_circuits(xor_tt(3))}
    assert composition_count(3) > 0


def test_block_partition_of_chain_and_and():
    blocks = validate_block_partition(xor_chain(4))
    assert blocks is not None and len(blocks) == 3
    assert sorted(g for b in blocks for g in b.binary) == sorted(
        gid for gid, g in xor_chain(4).gates.items() if g.kind.binary)
    assert validate_block_partition(parse_formula("x1 & x2")) is None


def test_variables_are_read_twice():
    for n in (2, 3):
        for oc in enumerate_open_optimal_xor(n).classes:
            assert set(variable_reads(oc.label(NAMES[:n])).values()) == {2}


def test_catalog_text_round_trip():
    cat = enumerate_open_optimal_xor(2)
    back = parse_catalog(format_catalog(cat))
    assert (back.n, back.s, back.ell, back.measure) == (cat.n, cat.s, cat.ell, cat.measure)
    assert [canonical_form(a.circuit) for a in back.classes] == [canonical_form(a.circuit) for a in cat.classes]
    with pytest.raises(CatalogError):
        parse_catalog("xor-catalog n=2\n")
    with pytest.raises(CatalogError):
        parse_catalog("")


def test_generic_catalog_for_or2():
    from cmw.truthtable import or_tt

    f = or_tt(2)
    cat = catalog_from_circuits(f, enumerate_optimal_circuits(f))
    assert cat.base == f and cat.s == 1
    assert parse_catalog(format_catalog(cat)).base == f


def test_materialization_cap():
    with pytest.raises(CatalogError):
        enumerate_open_optimal_xor(5)


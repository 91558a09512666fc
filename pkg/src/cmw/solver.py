"""Deciding whether g is a simple extension of f, given an open catalog of optimal circuits for f.

For every catalog class (labeled x1..xn), every implicit splice code adding
m binary gates, every split of the m extension variables over the code's
Y-trees and every choice of read-once formulas, the decoded circuit's truth
table is reduced to its permutation-canonical form. g is a simple extension
exactly when it has a key, depends on all its variables and its canonical
form is among those candidates.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field

from ._polar import Polar
from .circuit import Circuit, Kind, Measure, VarRef, size, truth_table, var_order, x, y
from .readonce import Formula, enumerate_read_once_formulas, formula_count, formula_table, label
from .rewrite import is_normalized
from .splice import SpliceCode, compositions, decode, decode_structure, enumerate_implicit_codes, max_slots
from .truthtable import (
    Permutation,
    TruthTable,
    apply_perm,
    find_keys,
    full_mask,
    is_nondegenerate,
    perm_canonical,
    tt_isomorphic,
    var_bits,
    xor_tt,
)
from .xor_catalog import CatalogMeta, enumerate_open_optimal_xor, format_catalog, variable_reads

# Recorded constant for the candidate budget |L| * 2^(C_BUDGET * ell * (s + m)).
C_BUDGET = 4


class SolverError(ValueError):
    pass


@dataclass
class SepInstance:
    n: int
    f: TruthTable
    g: TruthTable
    measure: Measure
    catalog: CatalogMeta

    def __post_init__(self) -> None:
        self.measure = Measure(self.measure)
        if self.f.num_vars != self.n:
            raise SolverError(f"f has {self.f.num_vars} variables, expected {self.n}")
        if not is_nondegenerate(self.f):
            raise SolverError("f must depend on all of its variables")
        if self.g.num_vars < self.n:
            raise SolverError("g has fewer variables than f")
        if self.catalog.n != self.n or self.catalog.measure is not self.measure:
            raise SolverError("catalog does not match the instance's arity or measure")
        if self.catalog.base != self.f:
            raise SolverError("catalog was built for a different base function")

    @property
    def m(self) -> int:
        return self.g.num_vars - self.n


@dataclass
class Hit:
    cls: int
    code: SpliceCode
    trees: tuple[Formula, ...]


@dataclass
class CandidateIndex:
    """Canonical tables of every decoded candidate for one catalog and m."""

    m: int
    hits: dict[int, Hit] = field(default_factory=dict)
    codes: int = 0
    decoded: int = 0
    ell: int = 0


@dataclass
class Stats:
    decoded: int
    codes: int
    bound: int
    within_budget: bool


_INDEX: dict[tuple[str, int], CandidateIndex] = {}


def _catalog_key(cat: CatalogMeta) -> str:
    return hashlib.sha1(format_catalog(cat).encode()).hexdigest()


def _tree_options(a: int, offset: int, order: list[VarRef], monotone: bool) -> dict[int, Formula]:
    """Distinct functions of read-once formulas on y_(offset+1)..y_(offset+a)."""
    names = [y(offset + i) for i in range(1, a + 1)]
    out: dict[int, Formula] = {}
    for fm in enumerate_read_once_formulas(a, monotone):
        fm = label(fm, names)
        out.setdefault(formula_table(fm, order), fm)
    return out


def _evaluate(p: Polar, order: list[int], nv: int, leaf: dict[int, int]) -> int:
    mask = full_mask(nv)
    val: dict[int, int] = {}
    for gid in order:
        nd = p.nodes[gid]
        if nd.kind is Kind.INPUT:
            val[gid] = leaf[gid]
        elif nd.kind is Kind.CONST:
            val[gid] = mask if nd.value else 0
        else:
            (a, pa), (b, pb) = nd.ins
            va = val[a] ^ mask if pa else val[a]
            vb = val[b] ^ mask if pb else val[b]
            val[gid] = va & vb if nd.kind is Kind.AND else va | vb
    node, pol = p.output
    return val[node] ^ mask if pol else val[node]


def build_index(cat: CatalogMeta, m: int) -> CandidateIndex:
    key = (_catalog_key(cat), m)
    if key in _INDEX:
        return _INDEX[key]
    n, measure = cat.n, cat.measure
    nv = n + m
    order_vars = var_order(n, m)
    monotone = measure is Measure.R
    idx = CandidateIndex(m)
    base_names = [x(i) for i in range(1, n + 1)]
    var_pos = {v: i + 1 for i, v in enumerate(order_vars)}
    tree_cache: dict[tuple[int, int], dict[int, Formula]] = {}
    seen: set[int] = set()
    for ci, oc in enumerate(cat.classes):
        F = oc.label(base_names)
        ell = max(cat.ell, max_slots(F))
        idx.ell = max(idx.ell, ell)
        base = Polar.from_circuit(F)
        for code in enumerate_implicit_codes(F, m, ell, measure=measure):
            idx.codes += 1
            if m == 0:
                idx.decoded += 1
                t = truth_table(F, order_vars).bits
                if t not in seen:
                    seen.add(t)
                    idx.hits.setdefault(perm_canonical(TruthTable(nv, t)), Hit(ci, code, ()))
                continue
            p = decode_structure(base, code, measure=measure)
            order = p.order()
            leaf = {}
            zs = {}
            for gid, nd in p.nodes.items():
                if nd.kind is Kind.INPUT:
                    if nd.var.cls == "z":
                        zs[nd.var.index] = gid
                    else:
                        leaf[gid] = var_bits(nv, var_pos[nd.var])
            d = code.combiners
            for comp in compositions(m, d):
                idx.decoded += math.prod(formula_count(a, monotone) for a in comp)
                opts = []
                offset = 0
                for a in comp:
                    if (a, offset) not in tree_cache:
                        tree_cache[(a, offset)] = _tree_options(a, offset, order_vars, monotone)
                    opts.append(tree_cache[(a, offset)])
                    offset += a
                for combo in itertools.product(*(o.items() for o in opts)):
                    for j, (tab, _) in enumerate(combo, start=1):
                        leaf[zs[j]] = tab
                    t = _evaluate(p, order, nv, leaf)
                    if t in seen:
                        continue
                    seen.add(t)
                    canon = perm_canonical(TruthTable(nv, t))
                    if canon not in idx.hits:
                        idx.hits[canon] = Hit(ci, code, tuple(fm for _, fm in combo))
    _INDEX[key] = idx
    return idx


def budget_bound(cat: CatalogMeta, m: int, ell: int | None = None) -> int:
    ell = cat.ell if ell is None else ell
    return len(cat.classes) * 2 ** (C_BUDGET * ell * (cat.s + m))


def candidate_stats(inst: SepInstance) -> Stats:
    idx = build_index(inst.catalog, inst.m)
    bound = budget_bound(inst.catalog, inst.m, idx.ell)
    return Stats(idx.decoded, idx.codes, bound, idx.decoded <= bound)


def _preconditions(inst: SepInstance) -> bool:
    return bool(find_keys(inst.g, inst.f)) and is_nondegenerate(inst.g)


def solve(inst: SepInstance) -> bool:
    if inst.m == 0:
        return tt_isomorphic(inst.g, inst.f) is not None
    if not _preconditions(inst):
        return False
    return perm_canonical(inst.g) in build_index(inst.catalog, inst.m).hits


def witness(inst: SepInstance) -> tuple[Circuit, Permutation] | None:
    """A circuit G' and permutation pi with apply_perm(tt(G'), pi) == g, or None."""
    names = [x(i) for i in range(1, inst.n + 1)]
    if inst.m == 0:
        pi = tt_isomorphic(inst.f, inst.g)
        if pi is None:
            return None
        return inst.catalog.classes[0].label(names), pi
    if not _preconditions(inst):
        return None
    hit = build_index(inst.catalog, inst.m).hits.get(perm_canonical(inst.g))
    if hit is None:
        return None
    F = inst.catalog.classes[hit.cls].label(names)
    circuit = decode(F, hit.code.with_trees(list(hit.trees)), measure=inst.measure, m=inst.m)
    pi = tt_isomorphic(truth_table(circuit, var_order(inst.n, inst.m)), inst.g)
    if pi is None:
        raise SolverError("indexed candidate is not isomorphic to g")
    return circuit, pi


def check_witness(inst: SepInstance, circuit: Circuit, pi: Permutation) -> dict[str, bool]:
    """Independent re-check of a witness circuit against the instance."""
    order = var_order(inst.n, inst.m)
    reads = variable_reads(circuit)
    return {
        "computes_g": apply_perm(truth_table(circuit, order), pi) == inst.g,
        "size": size(circuit, inst.measure) == inst.catalog.s + inst.m,
        "normalized": is_normalized(circuit),
        "extension_read_once": all(reads.get(v, 0) == 1 for v in order[inst.n:]),
        "base_read": all(reads.get(v, 0) >= 1 for v in order[: inst.n]),
    }


def solve_xor(n: int, g: TruthTable, measure: Measure | str = Measure.D) -> bool:
    cat = enumerate_open_optimal_xor(n, measure)
    return solve(SepInstance(n, xor_tt(n), g, Measure(measure), cat))

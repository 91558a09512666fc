"""Read-once formulas over extension variables, with optional edge negations."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from ._polar import PNode, Polar, Wire
from .circuit import Circuit, Kind, VarRef
from .truthtable import full_mask, var_bits


@dataclass(frozen=True)
class Leaf:
    var: VarRef | None = None  # None while the formula is open
    neg: bool = False


@dataclass(frozen=True)
class Op:
    kind: Kind
    left: "Formula"
    right: "Formula"
    neg: bool = False


Formula = Union[Leaf, Op]


class FormulaError(ValueError):
    pass


def leaves(fm: Formula) -> list[Leaf]:
    if isinstance(fm, Leaf):
        return [fm]
    return leaves(fm.left) + leaves(fm.right)


def leaf_count(fm: Formula) -> int:
    return 1 if isinstance(fm, Leaf) else leaf_count(fm.left) + leaf_count(fm.right)


def label(fm: Formula, names: list[VarRef]) -> Formula:
    """Assign variables to the leaves left to right."""
    it = iter(names)

    def go(f: Formula) -> Formula:
        if isinstance(f, Leaf):
            return Leaf(next(it), f.neg)
        return Op(f.kind, go(f.left), go(f.right), f.neg)

    out = go(fm)
    if next(it, None) is not None:
        raise FormulaError("more names than leaves")
    return out


def negate(fm: Formula) -> Formula:
    if isinstance(fm, Leaf):
        return Leaf(fm.var, not fm.neg)
    return Op(fm.kind, fm.left, fm.right, not fm.neg)


def format_formula(fm: Formula) -> str:
    bang = "!" if fm.neg else ""
    if isinstance(fm, Leaf):
        return bang + (str(fm.var) if fm.var is not None else "?")
    op = "&" if fm.kind is Kind.AND else "|"
    return f"{bang}({format_formula(fm.left)}{op}{format_formula(fm.right)})"


_TOK = re.compile(r"\s*(?:([a-z]\d+|\?)|(.))")


def parse_formula(text: str) -> Formula:
    toks = [m.group(1) or m.group(2) for m in _TOK.finditer(text) if (m.group(1) or m.group(2))]
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(toks):
            raise FormulaError("unexpected end of formula")
        pos += 1
        return toks[pos - 1]

    def term() -> Formula:
        t = take()
        if t == "!":
            return negate(term())
        if t == "(":
            a = term()
            op = take()
            if op not in "&|":
                raise FormulaError(f"expected & or |, got {op!r}")
            b = term()
            if take() != ")":
                raise FormulaError("expected )")
            return Op(Kind.AND if op == "&" else Kind.OR, a, b)
        if t == "?":
            return Leaf(None)
        try:
            return Leaf(VarRef.parse(t))
        except ValueError as exc:
            raise FormulaError(str(exc)) from exc

    fm = term()
    if pos != len(toks):
        raise FormulaError("trailing input in formula")
    return fm


def formula_table(fm: Formula, order: list[VarRef]) -> int:
    n = len(order)
    mask = full_mask(n)
    idx = {v: i + 1 for i, v in enumerate(order)}

    def go(f: Formula) -> int:
        if isinstance(f, Leaf):
            t = var_bits(n, idx[f.var])
        else:
            a, b = go(f.left), go(f.right)
            t = a & b if f.kind is Kind.AND else a | b
        return t ^ mask if f.neg else t

    return go(fm)


def attach(p: Polar, fm: Formula) -> Wire:
    """Add the formula's gates to a polar circuit; returns the wire of its root."""
    def go(f: Formula) -> Wire:
        if isinstance(f, Leaf):
            if f.var is None:
                raise FormulaError("cannot attach an open formula")
            if any(nd.kind is Kind.INPUT and nd.var == f.var for nd in p.nodes.values()):
                raise FormulaError(f"variable {f.var} already present")
            gid = p.next_id()
            p.nodes[gid] = PNode(Kind.INPUT, var=f.var)
            return (gid, int(f.neg))
        a, b = go(f.left), go(f.right)
        gid = p.next_id()
        p.nodes[gid] = PNode(f.kind, (a, b))
        return (gid, int(f.neg))

    return go(fm)


def from_polar(p: Polar, wire: Wire) -> Formula:
    node, pol = wire
    nd = p.nodes[node]
    if nd.kind is Kind.INPUT:
        return Leaf(nd.var, bool(pol))
    if not nd.kind.binary:
        raise FormulaError("formula may contain only inputs and binary gates")
    return Op(nd.kind, from_polar(p, nd.ins[0]), from_polar(p, nd.ins[1]), bool(pol))


def from_circuit(c: Circuit, gid: int) -> Formula:
    p = Polar.from_circuit(Circuit({k: c.gates[k] for k in c.reachable(gid)}, gid, check=False))
    return from_polar(p, p.output)


def _shapes(a: int) -> list:
    if a == 1:
        return [None]
    return [(l, r) for k in range(1, a) for l in _shapes(k) for r in _shapes(a - k)]


def enumerate_read_once_formulas(a: int, monotone: bool = False) -> Iterator[Formula]:
    """Ordered binary trees with ``a`` open leaves, AND/OR internal labels and edge negations.

    Without ``monotone`` every edge, including the output edge, may carry a
    negation, giving C(a-1) * 2^(a-1) * 2^(2a-1) formulas.
    """
    if a < 1:
        raise FormulaError("a read-once formula needs at least one leaf")
    negs = (False,) if monotone else (False, True)

    def build(shape) -> Iterator[Formula]:
        if shape is None:
            for n in negs:
                yield Leaf(None, n)
            return
        for left in build(shape[0]):
            for right in build(shape[1]):
                for kind in (Kind.AND, Kind.OR):
                    for n in negs:
                        yield Op(kind, left, right, n)

    for shape in _shapes(a):
        yield from build(shape)


def formula_count(a: int, monotone: bool = False) -> int:
    from math import comb

    catalan = comb(2 * (a - 1), a - 1) // a
    return catalan * 2 ** (a - 1) * (1 if monotone else 2 ** (2 * a - 1))

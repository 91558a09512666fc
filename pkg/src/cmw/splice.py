"""Splice codes: grafting combiners and Y-trees onto a base circuit.

A base circuit F is viewed with negations folded into edges. Each non-NOT
node of F may act as an origin. The slots of an origin are the binary gates
of F reading it (ascending id and input position), followed by the circuit
output when F outputs that node. Gates and combiners are never named by id:
a splice names its target by the set of slots currently reading it.

A splice with widget ``(K, p)`` creates ``delta = K(beta^p, T)`` with the
Y-tree T on the right input, and every selected slot that read ``beta^s``
reads ``delta^(s xor p)`` afterwards.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterator

from ._polar import PNode, Polar, Wire
from .circuit import Builder, Circuit, Kind, Measure, VarRef, canonical_form, size, y
from .readonce import (  # noqa: F401  (re-exported)
    Formula,
    FormulaError,
    Leaf,
    attach,
    enumerate_read_once_formulas,
    format_formula,
    formula_count,
    leaf_count,
    parse_formula,
)
from .rewrite import Restriction, replay, substitute_and_normalize
from .ytree import YTreeDecomposition, origin_of, segment_is_simple

OUT = -1  # reader id of the output slot


class SpliceCodeError(ValueError):
    """Base class for malformed splice codes."""


class OriginCountError(SpliceCodeError):
    pass


class CodeLengthError(SpliceCodeError):
    pass


class WireIndexError(SpliceCodeError):
    """A bit is set beyond the origin's reader list."""


class UnknownTargetError(SpliceCodeError):
    """No gate in the origin's family has the target code."""


class EmptySelectionError(SpliceCodeError):
    pass


class SubsetViolation(SpliceCodeError):
    """Selected wires are not a subset of the target's code."""


class WidgetError(SpliceCodeError):
    pass


class TreeError(SpliceCodeError):
    """Missing, open or reused Y-tree, or a leaf count mismatch."""


class EncodeError(ValueError):
    pass


# widgets ------------------------------------------------------------------------------

@dataclass(frozen=True)
class Widget:
    """Combiner kind plus whether the target is negated on its way in.

    A negation between target and combiner always comes with a negation
    above the combiner on every moved wire, so the pair is one flag. A
    negation at the tree root belongs to the tree's formula.
    """

    id: int
    kind: Kind
    negated: bool

    @property
    def shape(self) -> str:
        op = "and" if self.kind is Kind.AND else "or"
        return f"{op}(!target,T) under !" if self.negated else f"{op}(target,T)"


WIDGETS: tuple[Widget, ...] = (
    Widget(0, Kind.AND, False),
    Widget(1, Kind.AND, True),
    Widget(2, Kind.OR, False),
    Widget(3, Kind.OR, True),
)


def widgets_for(measure: Measure | str = Measure.D) -> tuple[Widget, ...]:
    if Measure(measure) is Measure.R:
        return tuple(w for w in WIDGETS if not w.negated)
    return WIDGETS


def _widget_probe(kind: Kind, below: int, root_neg: int, above: int, tree_left: bool) -> tuple[Circuit, Circuit, dict]:
    b = Builder()
    x1, x2, x3 = b.input("x1"), b.input("x2"), b.input("x3")
    beta = b.and_(x1, x2)
    leaf = b.input("y1")
    tree = b.not_(leaf) if root_neg else leaf
    src = b.not_(beta) if below else beta
    ins = (tree, src) if tree_left else (src, tree)
    delta = b.and_(*ins) if kind is Kind.AND else b.or_(*ins)
    top = b.or_(b.not_(delta) if above else delta, x3)
    g = b.build(top)
    e = Builder()
    x1, x2, x3 = e.input("x1"), e.input("x2"), e.input("x3")
    beta = e.and_(x1, x2)
    top = e.or_(e.not_(beta) if below ^ above else beta, x3)
    neutral = 1 if kind is Kind.AND else 0
    return g, e.build(top), {y(1): neutral ^ root_neg}


def derive_widgets() -> list[Widget]:
    """Invert every simple single-gate elimination and collect the combiner shapes.

    Each probe grafts a one-leaf tree onto a gate, fixes the leaf to the
    combiner's neutral value and keeps the shape when normalization removes
    exactly the combiner through a simple segment and restores the original
    wiring. Tree side is dropped as a symmetry, root negation belongs to the
    tree and the negation above a combiner is forced by the one below it.
    """
    found: set[tuple[Kind, bool]] = set()
    for kind, below, root_neg, above, left in itertools.product(
            (Kind.AND, Kind.OR), (0, 1), (0, 1), (0, 1), (False, True)):
        g, expected, key = _widget_probe(kind, below, root_neg, above, left)
        out, rec = substitute_and_normalize(g, key)
        if size(g) - size(out) != 1 or not segment_is_simple(rec):
            continue
        if canonical_form(out) != canonical_form(expected):
            continue
        found.add((kind, bool(below)))
    derived = [w for w in WIDGETS if (w.kind, w.negated) in found]
    if len(derived) != len(found):
        raise AssertionError("derived widget outside the known table")
    return derived


# codes ----------------------------------------------------------------------------------

Bits = tuple[int, ...]


def _bits(s: str) -> Bits:
    if not s or any(ch not in "01" for ch in s):
        raise SpliceCodeError(f"bad bit string {s!r}")
    return tuple(int(ch) for ch in s)


def _str(bits: Bits) -> str:
    return "".join(map(str, bits))


def _set(bits: Bits) -> frozenset[int]:
    return frozenset(i for i, b in enumerate(bits) if b)


def _vec(items, ell: int) -> Bits:
    return tuple(1 if i in items else 0 for i in range(ell))


@dataclass(frozen=True)
class FanoutRelativeCode:
    bits: Bits

    def __str__(self) -> str:
        return _str(self.bits)

    @property
    def members(self) -> frozenset[int]:
        return _set(self.bits)


@dataclass(frozen=True)
class Splice:
    target: Bits
    wires: Bits
    widget: int
    ytree: Formula | None = None

    @property
    def moves(self) -> tuple[str, ...]:
        """Destination of each selected wire inside the widget; only the combiner exists."""
        return ("c",) * sum(self.wires)

    def format(self) -> str:
        tree = format_formula(self.ytree) if self.ytree is not None else "-"
        return (f"splice target={_str(self.target)} wires={_str(self.wires)} widget={self.widget} "
                f"moves={','.join(self.moves) or '-'} ytree={tree}")


@dataclass(frozen=True)
class SpliceCode:
    origins: Bits
    splices: tuple[tuple[Splice, ...], ...] = ()

    @property
    def combiners(self) -> int:
        return sum(len(s) for s in self.splices)

    @property
    def leaves(self) -> int:
        return sum(leaf_count(sp.ytree) for seq in self.splices for sp in seq if sp.ytree is not None)

    @property
    def is_explicit(self) -> bool:
        return all(sp.ytree is not None for seq in self.splices for sp in seq)

    def with_trees(self, trees: list[Formula]) -> SpliceCode:
        it = iter(trees)
        seqs = tuple(tuple(replace(sp, ytree=next(it)) for sp in seq) for seq in self.splices)
        return SpliceCode(self.origins, seqs)

    def format(self) -> str:
        lines = [f"origins {_str(self.origins)}"]
        ranks = [i for i, b in enumerate(self.origins) if b]
        for rank, seq in zip(ranks, self.splices):
            lines.append(f"origin {rank}")
            lines.extend(sp.format() for sp in seq)
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> SpliceCode:
        origins: Bits | None = None
        seqs: list[list[Splice]] = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, _, rest = line.partition(" ")
            if head == "origins":
                origins = _bits(rest.strip())
            elif head == "origin":
                seqs.append([])
            elif head == "splice":
                if not seqs:
                    raise SpliceCodeError("splice before any origin line")
                kv = dict(part.split("=", 1) for part in rest.split())
                try:
                    tree = None if kv.get("ytree", "-") == "-" else parse_formula(kv["ytree"])
                    sp = Splice(_bits(kv["target"]), _bits(kv["wires"]), int(kv["widget"]), tree)
                except (KeyError, FormulaError) as exc:
                    raise SpliceCodeError(f"bad splice line {line!r}: {exc}") from exc
                moves = kv.get("moves", "-")
                if moves != "-" and tuple(moves.split(",")) != sp.moves:
                    raise SpliceCodeError(f"moves {moves!r} do not match the selected wires")
                seqs[-1].append(sp)
            else:
                raise SpliceCodeError(f"unknown line {line!r}")
        if origins is None:
            raise SpliceCodeError("missing origins line")
        return cls(origins, tuple(tuple(s) for s in seqs))


# shape of the base circuit ----------------------------------------------------------------

def origin_candidates(p: Polar) -> list[int]:
    return sorted(g for g, nd in p.nodes.items() if nd.kind is not Kind.CONST)


def reader_slots(p: Polar, eta: int) -> list[tuple[int, int]]:
    slots = [(r, pos) for r in sorted(p.nodes) for pos, (a, _) in enumerate(p.nodes[r].ins) if a == eta]
    if p.output[0] == eta:
        slots.append((OUT, 0))
    return slots


def max_slots(F: Circuit) -> int:
    p = Polar.from_circuit(F)
    return max((len(reader_slots(p, g)) for g in origin_candidates(p)), default=0)


# decoding ---------------------------------------------------------------------------------

class _Decoder:
    """Applies splices one origin at a time to a polar copy of the base circuit."""

    def __init__(self, F: Circuit | Polar, measure: Measure | str = Measure.D):
        self.p = F.copy() if isinstance(F, Polar) else Polar.from_circuit(F)
        self.origins = origin_candidates(self.p)
        self.slots = {g: reader_slots(self.p, g) for g in self.origins}
        self.widgets = {w.id: w for w in widgets_for(measure)}
        self.monotone = Measure(measure) is Measure.R

    def begin(self, eta: int) -> None:
        self.eta = eta
        self.cur = [eta] * len(self.slots[eta])
        self.family = [eta]

    def codes(self) -> list[frozenset[int]]:
        return [frozenset(i for i, c in enumerate(self.cur) if c == m) for m in self.family]

    def apply(self, sp: Splice, root: Wire) -> int:
        slots = self.slots[self.eta]
        if len(sp.target) != len(sp.wires):
            raise CodeLengthError("target and wires differ in length")
        if len(sp.target) < len(slots):
            raise CodeLengthError(f"code length {len(sp.target)} below reader count {len(slots)}")
        code, wires = _set(sp.target), _set(sp.wires)
        if any(i >= len(slots) for i in code | wires):
            raise WireIndexError("bit set beyond the reader list")
        if not code:
            raise UnknownTargetError("empty target code")
        beta = next((m for m, c in zip(self.family, self.codes()) if c == code), None)
        if beta is None:
            raise UnknownTargetError(f"no gate has code {_str(sp.target)}")
        if not wires:
            raise EmptySelectionError("no wire selected")
        if not wires <= code:
            raise SubsetViolation(f"wires {_str(sp.wires)} not within target {_str(sp.target)}")
        w = self.widgets.get(sp.widget)
        if w is None:
            raise WidgetError(f"unknown widget {sp.widget}")
        pol = int(w.negated)
        delta = self.p.next_id()
        self.p.nodes[delta] = PNode(w.kind, ((beta, pol), root))
        for i in sorted(wires):
            r, pos = slots[i]
            if r == OUT:
                node, s = self.p.output
                self.p.output = (delta, s ^ pol)
            else:
                nd = self.p.nodes[r]
                ins = list(nd.ins)
                node, s = ins[pos]
                ins[pos] = (delta, s ^ pol)
                nd.ins = tuple(ins)
            assert node == beta
            self.cur[i] = delta
        self.family.append(delta)
        return delta

    def attach_tree(self, tree: Formula | None) -> Wire:
        if tree is None:
            raise TreeError("implicit splice has no Y-tree")
        if self.monotone and _has_negation(tree):
            raise TreeError("Y-trees must be monotone under the R measure")
        try:
            return attach(self.p, tree)
        except FormulaError as exc:
            raise TreeError(str(exc)) from exc


def _has_negation(fm: Formula) -> bool:
    if fm.neg:
        return True
    return not isinstance(fm, Leaf) and (_has_negation(fm.left) or _has_negation(fm.right))


def _run(dec: _Decoder, E: SpliceCode, tree_wire) -> None:
    if len(E.origins) != len(dec.origins):
        raise OriginCountError(f"origin vector has length {len(E.origins)}, expected {len(dec.origins)}")
    chosen = [g for g, b in zip(dec.origins, E.origins) if b]
    if len(chosen) != len(E.splices):
        raise OriginCountError(f"{len(chosen)} origins but {len(E.splices)} splice sequences")
    for eta, seq in zip(chosen, E.splices):
        if not seq:
            raise OriginCountError("origin with an empty splice sequence")
        dec.begin(eta)
        for sp in seq:
            dec.apply(sp, tree_wire(sp))


def decode(F: Circuit, E: SpliceCode, *, measure: Measure | str = Measure.D, m: int | None = None) -> Circuit:
    """Materialize every splice of E on top of F."""
    dec = _Decoder(F, measure)
    _run(dec, E, lambda sp: dec.attach_tree(sp.ytree))
    if m is not None and E.leaves != m:
        raise TreeError(f"code has {E.leaves} Y-tree leaves, expected {m}")
    return dec.p.to_circuit()


def decode_structure(F: Circuit | Polar, E: SpliceCode, *, measure: Measure | str = Measure.D) -> Polar:
    """Decode with each Y-tree replaced by a placeholder input ``z<j>`` (j counts splices)."""
    dec = _Decoder(F, measure)
    count = itertools.count(1)

    def placeholder(sp: Splice) -> Wire:
        gid = dec.p.next_id()
        dec.p.nodes[gid] = PNode(Kind.INPUT, var=VarRef("z", next(count)))
        return (gid, 0)

    _run(dec, E, placeholder)
    return dec.p


# encoding ---------------------------------------------------------------------------------

def encode(G: Circuit, F: Circuit, D: YTreeDecomposition, rho: Restriction | None = None) -> SpliceCode:
    """Splice code turning F back into G, grafting inner combiners first."""
    if rho is not None and replay(G, rho) != F:
        raise EncodeError("restriction does not map G onto F")
    pg, pf = Polar.from_circuit(G), Polar.from_circuit(F)
    original = set(pf.nodes)
    if not original <= set(pg.nodes):
        raise EncodeError("F has gates that are not in G")
    side = {t.combiner: "LR".index(t.side) for t in D.triples}
    trees = {t.combiner: t.tree for t in D.triples}
    beta: dict[int, Wire] = {}
    for d, s in side.items():
        nd = pg.nodes.get(d)
        if nd is None or not nd.kind.binary:
            raise EncodeError(f"combiner {d} is not a binary gate of G")
        beta[d] = nd.ins[1 - s]
    try:
        origin = {d: origin_of(G, D, d, original) for d in side}
    except ValueError as exc:
        raise EncodeError(str(exc)) from exc

    def source(slot: tuple[int, int]) -> int:
        r, pos = slot
        return pg.output[0] if r == OUT else pg.nodes[r].ins[pos][0]

    def chain(node: int, eta: int) -> list[int]:
        out = []
        while node != eta:
            if node not in side:
                raise EncodeError(f"gate {node} lies between a reader and origin {eta} but is no combiner")
            out.append(node)
            node = beta[node][0]
        return out

    def level(d: int) -> int:
        return len(chain(d, origin[d]))

    cands = origin_candidates(pf)
    slots_of = {g: reader_slots(pf, g) for g in cands}
    ell = max((len(s) for s in slots_of.values()), default=0)
    used = sorted(set(origin.values()))
    seqs = []
    for eta in used:
        slots = slots_of[eta]
        chains = [set(chain(source(sl), eta)) for sl in slots]
        cur = [eta] * len(slots)
        seq = []
        for d in sorted((d for d in side if origin[d] == eta), key=lambda d: (level(d), d)):
            b = beta[d][0]
            code = {i for i, c in enumerate(cur) if c == b}
            wires = {i for i, ch in enumerate(chains) if d in ch}
            if not wires or not wires <= code:
                raise EncodeError(f"combiner {d} cannot be reached from origin {eta} by moving wires")
            wid = next(w.id for w in WIDGETS if w.kind is pg.nodes[d].kind and w.negated == bool(beta[d][1]))
            seq.append(Splice(_vec(code, ell), _vec(wires, ell), wid, trees[d]))
            for i in wires:
                cur[i] = d
        seqs.append(tuple(seq))
    return SpliceCode(tuple(1 if g in used else 0 for g in cands), tuple(seqs))


# implicit codes -------------------------------------------------------------------------

def compositions(m: int, d: int) -> Iterator[tuple[int, ...]]:
    """Positive compositions of m into d parts, lexicographic."""
    if not 1 <= d <= m:
        raise ValueError(f"need 1 <= d <= m, got d={d}, m={m}")
    for cuts in itertools.combinations(range(1, m), d - 1):
        bounds = (0, *cuts, m)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(d))


def _weak_compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for k in range(total, -1, -1):
        for rest in _weak_compositions(total - k, parts - 1):
            yield (k, *rest)


def _submasks(mask: int) -> Iterator[int]:
    sub = mask
    out = []
    while sub:
        out.append(sub)
        sub = (sub - 1) & mask
    return iter(sorted(out))


def _origin_sequences(nslots: int, k: int, ell: int, widgets: tuple[Widget, ...]) -> Iterator[tuple[Splice, ...]]:
    """Every sequence of k splices on one origin with nslots readers."""
    def go(cur: list[int], nfam: int, left: int) -> Iterator[tuple[Splice, ...]]:
        if left == 0:
            yield ()
            return
        for member in range(nfam):
            code = sum(1 << i for i, c in enumerate(cur) if c == member)
            if not code:
                continue
            target = tuple((code >> i) & 1 for i in range(ell))
            for sub in _submasks(code):
                wires = tuple((sub >> i) & 1 for i in range(ell))
                nxt = [nfam if (sub >> i) & 1 else c for i, c in enumerate(cur)]
                for w in widgets:
                    head = Splice(target, wires, w.id)
                    for tail in go(nxt, nfam + 1, left - 1):
                        yield (head, *tail)

    yield from go([0] * nslots, 1, k)


def enumerate_implicit_codes(
    F: Circuit, m: int, ell: int | None = None, *, measure: Measure | str = Measure.D
) -> Iterator[SpliceCode]:
    """Implicit codes with 1..m combiners in a fixed order; only the empty code when m = 0.

    Targets are drawn from the codes of the current family members rather
    than all bit vectors, which skips exactly the codes decode would reject.
    """
    p = Polar.from_circuit(F)
    cands = origin_candidates(p)
    nslots = [len(reader_slots(p, g)) for g in cands]
    ell = max(nslots, default=0) if ell is None else ell
    if ell < max(nslots, default=0):
        raise ValueError(f"ell={ell} is below the largest reader count {max(nslots)}")
    if m == 0:
        yield SpliceCode(tuple(0 for _ in cands), ())
        return
    widgets = widgets_for(measure)
    for d in range(1, m + 1):
        for counts in _weak_compositions(d, len(cands)):
            parts = [list(_origin_sequences(nslots[i], k, ell, widgets)) for i, k in enumerate(counts) if k]
            if any(not ps for ps in parts):
                continue
            origins = tuple(1 if k else 0 for k in counts)
            for combo in itertools.product(*parts):
                yield SpliceCode(origins, combo)

"""All-stops restrictions and Y-tree decompositions of extension circuits."""

from __future__ import annotations

from dataclasses import dataclass, field

from ._polar import Polar
from .circuit import Circuit, Kind, VarRef, depths, size, truth_table, var_order
from .readonce import Formula, format_formula, from_circuit, leaves, parse_formula
from .rewrite import RULES, Category, Ge, Restriction, Sub, replay, substitute_and_normalize
from .truthtable import Key, TruthTable


class AllStopsError(ValueError):
    """The circuit is not an optimal simple-extension circuit for the given keys."""


class ExtractionError(ValueError):
    """No total Y-tree decomposition could be read off the circuit."""


@dataclass(frozen=True, order=True)
class YTreeTriple:
    combiner: int
    side: str  # "L" or "R": the combiner input carrying the tree
    tree: Formula = field(compare=False)

    def format(self) -> str:
        return f"combiner={self.combiner} side={self.side} tree={format_formula(self.tree)}"

    @property
    def variables(self) -> list[VarRef]:
        return [lf.var for lf in leaves(self.tree)]


@dataclass(frozen=True)
class YTreeDecomposition:
    triples: frozenset[YTreeTriple] = frozenset()

    @property
    def weight(self) -> int:
        return sum(len(t.variables) for t in self.triples)

    def is_total(self, m: int) -> bool:
        return self.weight == m

    def combiners(self) -> set[int]:
        return {t.combiner for t in self.triples}

    def triple(self, combiner: int) -> YTreeTriple:
        for t in self.triples:
            if t.combiner == combiner:
                return t
        raise KeyError(combiner)

    def format(self) -> str:
        return "".join(t.format() + "\n" for t in sorted(self.triples))

    @classmethod
    def parse(cls, text: str) -> YTreeDecomposition:
        out = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = dict(part.split("=", 1) for part in line.split())
            side = fields["side"]
            if side not in ("L", "R"):
                raise ValueError(f"bad side {side!r}")
            out.append(YTreeTriple(int(fields["combiner"]), side, parse_formula(fields["tree"])))
        return cls(frozenset(out))


# all-stops restrictions ---------------------------------------------------------------

def _ext_vars(c: Circuit) -> list[VarRef]:
    return sorted(v for v in c.variables() if v.is_extension)


def segment_is_simple(segment: Restriction) -> bool:
    """A segment after one substitution: optional constant negation, one pass, optional double negation."""
    cats = [(RULES[s.rule].category, RULES[s.rule].kind) for s in segment.steps if isinstance(s, Ge)]
    if cats and cats[0] == (Category.FIXING, Kind.NOT):
        cats = cats[1:]
    if cats and cats[-1] == (Category.PRUNING, Kind.NOT):
        cats = cats[:-1]
    return len(cats) == 1 and cats[0][0] is Category.PASSING


def segments(record: Restriction) -> list[Restriction]:
    """Split a record at substitutions; each part starts with its Sub."""
    out: list[Restriction] = []
    for s in record.steps:
        if isinstance(s, Sub) or not out:
            out.append(Restriction([]))
        out[-1].steps.append(s)
    return out


def find_all_stops_restriction(G: Circuit, f: TruthTable, keys: list[Key]) -> Restriction:
    """Substitute extension variables one at a time, each removing exactly one binary gate.

    The deepest remaining variable goes first; among its values consistent
    with the surviving keys the smaller is tried first, and eliminations by
    a simple passing segment are preferred over other single-gate ones.
    """
    ext = _ext_vars(G)
    if not ext:
        return Restriction([])
    if not keys:
        raise AllStopsError("no key provided")
    dG = depths(G)
    remaining = sorted(keys)
    current = G
    record = Restriction([])
    while True:
        ext = _ext_vars(current)
        if not ext:
            break
        d = depths(current)
        by_depth = sorted(ext, key=lambda v: (-max(d[g] for g in current.input_gates(v)), v))
        chosen = None
        for want_simple in (True, False):
            for v in by_depth:
                for b in sorted({k.bits[v.index - 1] for k in remaining}):
                    trial, seg = substitute_and_normalize(current, {v: b}, depth=dG)
                    if size(current) - size(trial) != 1:
                        continue
                    if want_simple and not segment_is_simple(seg):
                        continue
                    chosen = (v, b, trial, seg)
                    break
                if chosen:
                    break
            if chosen:
                break
        if chosen is None:
            raise AllStopsError(
                f"no substitution of {', '.join(map(str, ext))} removes exactly one binary gate")
        v, b, current, seg = chosen
        record = record + seg
        remaining = [k for k in remaining if k.bits[v.index - 1] == b]
    if truth_table(current, var_order(f.num_vars)) != f:
        raise AllStopsError("restricted circuit does not compute the base function")
    return record


# decompositions -----------------------------------------------------------------------

def _y_only(p: Polar) -> dict[int, bool]:
    yo: dict[int, bool] = {}
    for gid in p.order():
        nd = p.nodes[gid]
        if nd.kind is Kind.INPUT:
            yo[gid] = nd.var.is_extension
        elif nd.kind is Kind.CONST:
            yo[gid] = False
        else:
            yo[gid] = all(yo[a] for a, _ in nd.ins)
    return yo


def original_gates(G: Circuit, record: Restriction) -> set[int]:
    """Ids of the non-NOT gates surviving the restriction."""
    F = replay(G, record)
    return {gid for gid, g in F.gates.items() if g.kind is not Kind.NOT}


def decomposition_from_originals(G: Circuit, original: set[int]) -> YTreeDecomposition:
    """Read the combiners and trees off G given the gates that survive restriction."""
    p = Polar.from_circuit(G)
    yo = _y_only(p)
    triples = []
    for gid in sorted(p.nodes):
        nd = p.nodes[gid]
        if not nd.kind.binary or gid in original or yo[gid]:
            continue
        flags = [yo[a] for a, _ in nd.ins]
        if flags.count(True) != 1:
            raise ExtractionError(f"eliminated gate {gid} is neither a combiner nor inside a tree")
        side = flags.index(True)
        root = G.gates[gid].inputs[side]
        triples.append(YTreeTriple(gid, "LR"[side], from_circuit(G, root)))
    for gid, nd in p.nodes.items():
        if nd.kind.binary and yo[gid] and gid in original:
            raise ExtractionError(f"gate {gid} reads only extension variables yet survives")
    return YTreeDecomposition(frozenset(triples))


def extract_ytree_decomposition(G: Circuit, n: int, m: int, f: TruthTable, keys: list[Key]) -> YTreeDecomposition:
    if m == 0:
        return YTreeDecomposition()
    try:
        record = find_all_stops_restriction(G, f, keys)
    except AllStopsError as exc:
        raise ExtractionError(str(exc)) from exc
    D = decomposition_from_originals(G, original_gates(G, record))
    check = validate_decomposition(G, D, n, m)
    if not check:
        raise ExtractionError(f"decomposition fails validation: {check.reason}")
    if not check.total:
        raise ExtractionError(f"decomposition has weight {D.weight}, expected {m}")
    return D


@dataclass(frozen=True)
class DecompositionCheck:
    valid: bool
    total: bool
    weight: int
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


def validate_decomposition(G: Circuit, D: YTreeDecomposition, n: int, m: int) -> DecompositionCheck:
    """Admissibility of every triple plus non-intersection; reports weight and totality."""
    readers = G.readers()
    seen: set[VarRef] = set()

    def bad(reason: str) -> DecompositionCheck:
        return DecompositionCheck(False, False, D.weight, reason)

    for t in sorted(D.triples):
        g = G.gates.get(t.combiner)
        if g is None or not g.kind.binary:
            return bad(f"combiner {t.combiner} is not a binary gate")
        side = "LR".index(t.side)
        root, other = g.inputs[side], g.inputs[1 - side]
        cone = G.reachable(root)
        tvars: list[VarRef] = []
        for gid in cone:
            h = G.gates[gid]
            if h.kind is Kind.CONST or (h.kind is Kind.INPUT and not h.var.is_extension):
                return bad(f"tree under {t.combiner} reads a base variable or constant")
            if h.kind is Kind.INPUT:
                tvars.append(h.var)
            rs = readers[gid]
            if gid == root:
                if rs != [t.combiner] or other == root:
                    return bad(f"tree root {root} is not read by its combiner alone")
            elif len(rs) != 1 or rs[0] not in cone:
                return bad(f"gate {gid} of the tree under {t.combiner} is not read once inside it")
        if len(set(tvars)) != len(tvars):
            return bad(f"tree under {t.combiner} is not read-once")
        if sorted(tvars) != sorted(t.variables):
            return bad(f"tree under {t.combiner} does not match its formula")
        if seen & set(tvars):
            return bad("trees intersect")
        seen |= set(tvars)
        if not any(G.gates[h].kind is Kind.INPUT and not G.gates[h].var.is_extension
                   for h in G.reachable(other)):
            return bad(f"other child of {t.combiner} reads no base variable")
    w = D.weight
    return DecompositionCheck(True, w == m, w)


def origin_of(G: Circuit, D: YTreeDecomposition, delta: int, original: set[int]) -> int:
    """Walk from a combiner down its non-tree child, through NOTs and stacked combiners."""
    combiners = {t.combiner: "LR".index(t.side) for t in D.triples}
    if delta not in combiners:
        raise ExtractionError(f"{delta} is not a combiner")
    cur = delta
    for _ in range(len(G.gates) + 1):
        g = G.gates.get(cur)
        if g is None:
            raise ExtractionError(f"walk left the circuit at {cur}")
        if cur in combiners:
            nxt = g.inputs[1 - combiners[cur]]
        elif g.kind is Kind.NOT:
            nxt = g.inputs[0]
        elif cur in original:
            return cur
        else:
            raise ExtractionError(f"walk from {delta} reached {cur}, which is neither original nor a combiner")
        cur = nxt
    raise ExtractionError("walk did not terminate")

"""Optimal (negated) XOR circuits: 2-input blocks, open catalogs and block partitions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from ._polar import Polar, binary_reads
from .circuit import Circuit, CircuitError, Gate, Kind, Measure, VarRef, canonical_form, format_bcir, parse_bcir, size, x
from .oracle import Skeleton, enumerate_optimal_circuits, realisations
from .truthtable import TruthTable, full_mask, var_bits, xor_tt

# Open catalogs grow roughly like 16^(n-1) classes; beyond this they are not materialised.
MATERIALIZE_MAX_N = 4


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    gates: frozenset[int]  # the three binary gates plus NOTs between them
    binary: tuple[int, int, int]  # two inner gates, then the block output gate
    input_wires: tuple[int, int]  # nodes feeding the block
    output_wire: int
    core_wires: frozenset[tuple[int, int]]  # (source, reader) edges inside the block
    parity: str  # "XOR2" or "NOT_XOR2"


@dataclass
class OpenCircuit:
    circuit: Circuit
    slots: list[int]

    def label(self, names: list[VarRef]) -> Circuit:
        if len(names) != len(self.slots):
            raise CatalogError("labeling length does not match slot count")
        gates = dict(self.circuit.gates)
        for gid, v in zip(self.slots, names):
            gates[gid] = Gate(gid, Kind.INPUT, var=v)
        return Circuit(gates, self.circuit.output, check=False)


@dataclass
class CatalogMeta:
    n: int
    measure: Measure
    s: int
    ell: int
    classes: list[OpenCircuit] = field(default_factory=list)
    f: TruthTable | None = None

    @property
    def base(self) -> TruthTable:
        return self.f if self.f is not None else xor_tt(self.n)


# blocks ---------------------------------------------------------------------------------------

def xor2_blocks(measure: Measure | str = Measure.D) -> list[Circuit]:
    """All normalized optimal circuits for XOR_2 and its complement."""
    measure = Measure(measure)
    t = xor_tt(2)
    return enumerate_optimal_circuits(t, measure) + enumerate_optimal_circuits(~t, measure)


# open catalogs -------------------------------------------------------------------------------

def tree_shapes(n: int) -> list:
    """Ordered binary trees with n leaves, as nested pairs with ``None`` leaves."""
    if n == 1:
        return [None]
    out = []
    for k in range(1, n):
        for left in tree_shapes(k):
            for right in tree_shapes(n - k):
                out.append((left, right))
    return out


def _skeleton(n: int, shape, variants: tuple[int, ...]) -> Skeleton:
    """Function-level circuit for a block tree; leaves read x1..xn left to right."""
    mask = full_mask(n)
    gates: list[tuple[int, int, int]] = []
    leaves = iter(range(1, n + 1))
    choice = iter(variants)

    def build(node) -> int:
        if node is None:
            return var_bits(n, next(leaves))
        a = build(node[0])
        b = build(node[1])
        if next(choice) == 0:
            g1 = (a & b, a, b)
            g2 = ((a ^ mask) & (b ^ mask), a ^ mask, b ^ mask)
        else:
            g1 = (a & (b ^ mask), a, b ^ mask)
            g2 = ((a ^ mask) & b, a ^ mask, b)
        g3v = (g1[0] ^ mask) & (g2[0] ^ mask)
        gates.extend([g1, g2, (g3v, g1[0] ^ mask, g2[0] ^ mask)])
        return g3v

    build(shape)
    return Skeleton(n, tuple(gates), xor_tt(n).bits)


def strip_labels(c: Circuit) -> OpenCircuit:
    gates = dict(c.gates)
    slots = []
    for gid, g in sorted(gates.items()):
        if g.kind is Kind.INPUT:
            gates[gid] = Gate(gid, Kind.INPUT)
            slots.append((g.var, gid))
    slots.sort()
    return OpenCircuit(Circuit(gates, c.output, check=False), [gid for _, gid in slots])


def composed_circuits(n: int, measure: Measure | str = Measure.D) -> list[Circuit]:
    """Every block-tree composition for XOR_n with leaves labeled left to right."""
    measure = Measure(measure)
    out = []
    for shape in tree_shapes(n):
        for variants in itertools.product((0, 1), repeat=n - 1):
            out.extend(realisations(_skeleton(n, shape, variants), measure))
    if measure is Measure.R and out:
        least = min(size(c, Measure.R) for c in out)
        out = [c for c in out if size(c, Measure.R) == least]
    return out


def max_fanout(c: Circuit) -> int:
    return max(binary_reads(c).values(), default=0)


@lru_cache(maxsize=None)
def _catalog(n: int, measure: Measure) -> CatalogMeta:
    if n == 1:
        c = Circuit([Gate(0, Kind.INPUT)], 0)
        return CatalogMeta(1, measure, 0, 0, [OpenCircuit(c, [0])])
    seen: dict[bytes, OpenCircuit] = {}
    for c in composed_circuits(n, measure):
        oc = strip_labels(c)
        seen.setdefault(canonical_form(oc.circuit), oc)
    classes = [seen[k] for k in sorted(seen)]
    s = size(classes[0].circuit, measure)
    ell = max(max_fanout(oc.circuit) for oc in classes)
    return CatalogMeta(n, measure, s, ell, classes)


def enumerate_open_optimal_xor(n: int, measure: Measure | str = Measure.D, *, max_n: int = MATERIALIZE_MAX_N) -> CatalogMeta:
    measure = Measure(measure)
    if n < 1 or n > max_n:
        raise CatalogError(f"catalog size n={n} outside 1..{max_n}")
    return _catalog(n, measure)


def labeled_closure(catalog: CatalogMeta) -> dict[bytes, Circuit]:
    """Every labeling of every class by x1..xn, deduplicated with labels kept."""
    names = [x(i) for i in range(1, catalog.n + 1)]
    out: dict[bytes, Circuit] = {}
    for oc in catalog.classes:
        for perm in itertools.permutations(names):
            c = oc.label(list(perm))
            out.setdefault(canonical_form(c), c)
    return out


def composition_count(n: int) -> int:
    """Labeled block-tree compositions before deduplication (shapes x skeletons x gate forms)."""
    return len(tree_shapes(n)) * 2 ** (n - 1) * 8 ** (n - 1)


# block partition ----------------------------------------------------------------------------

def _block_parity(p: Polar, g1: int, g2: int, g3: int, u: int, v: int) -> str | None:
    """Evaluate g3 as a function of the two unit wires u, v (2-variable tables)."""
    tab = {u: 0b1100, v: 0b1010}  # row r = (u, v) with u as the high bit

    def val(w):
        node, pol = w
        return tab[node] ^ (0b1111 if pol else 0)

    out = {}
    for gid in (g1, g2, g3):
        nd = p.nodes[gid]
        a, b = (val(w) if w[0] in tab else None for w in nd.ins)
        if a is None or b is None:
            return None
        tab[gid] = (a & b) if nd.kind is Kind.AND else (a | b)
        out[gid] = tab[gid]
    t = out[g3]
    if t == 0b0110:
        return "XOR2"
    if t == 0b1001:
        return "NOT_XOR2"
    return None


def validate_block_partition(circuit: Circuit) -> list[Block] | None:
    """Partition the binary gates into 3-gate XOR_2 blocks forming a binary tree, or None.

    Bottom-up greedy matching: repeatedly find a gate whose two inputs are
    gates reading exactly the same pair of current units, contract the
    three into a new unit and continue.
    """
    p = Polar.from_circuit(circuit)
    if any(nd.kind is Kind.CONST for nd in p.nodes.values()):
        return None
    readers = p.readers()
    units = {gid for gid, nd in p.nodes.items() if nd.kind is Kind.INPUT}
    pending = {gid for gid, nd in p.nodes.items() if nd.kind.binary}
    if len(units) < 2 or len(pending) != 3 * (len(units) - 1):
        return None
    not_of: dict[int, int] = {}
    for gid, g in circuit.gates.items():
        if g.kind is Kind.NOT:
            not_of[gid] = g.inputs[0]
    blocks: list[Block] = []
    progress = True
    while pending and progress:
        progress = False
        for g3 in sorted(pending):
            ins = p.nodes[g3].ins
            g1, g2 = ins[0][0], ins[1][0]
            if g1 == g2 or g1 not in pending or g2 not in pending:
                continue
            pair1 = {w[0] for w in p.nodes[g1].ins}
            pair2 = {w[0] for w in p.nodes[g2].ins}
            if pair1 != pair2 or len(pair1) != 2 or not pair1 <= units:
                continue
            u, v = sorted(pair1)
            # u and v feed only this block; g1 and g2 feed only g3
            if sorted(r for r, _ in readers[u]) != sorted((g1, g2)) or sorted(r for r, _ in readers[v]) != sorted((g1, g2)):
                continue
            if [r for r, _ in readers[g1]] != [g3] or [r for r, _ in readers[g2]] != [g3]:
                continue
            parity = _block_parity(p, g1, g2, g3, u, v)
            if parity is None:
                continue
            inner = {g1, g2, g3} | {k for k, t in not_of.items() if t in (g1, g2)}
            core = frozenset({(g1, g3), (g2, g3)})
            blocks.append(Block(frozenset(inner), (g1, g2, g3), (u, v), g3, core, parity))
            pending -= {g1, g2, g3}
            units -= {u, v}
            units.add(g3)
            progress = True
            break
    if pending or len(units) != 1 or p.output[0] not in units:
        return None
    return blocks


def variable_reads(circuit: Circuit) -> dict[VarRef, int]:
    """How many binary-gate inputs read each variable, through negations."""
    reads = binary_reads(circuit)
    return {g.var: reads[gid] for gid, g in circuit.gates.items() if g.kind is Kind.INPUT and g.var is not None}


# catalog files ---------------------------------------------------------------------------------

def format_catalog(cat: CatalogMeta) -> str:
    head = "xor-catalog" if cat.f is None else "catalog"
    fields = [f"n={cat.n}", f"measure={cat.measure.value}", f"ell={cat.ell}", f"s={cat.s}"]
    if cat.f is not None:
        fields.append(f"f={cat.f}")
    lines = [head + " " + " ".join(fields)]
    for k, oc in enumerate(cat.classes):
        lines.append(f"class {k}")
        lines.append("slots " + " ".join(map(str, oc.slots)))
        lines.append(format_bcir(oc.circuit, []).rstrip("\n"))
        lines.append("end")
    return "\n".join(lines) + "\n"


def parse_catalog(text: str) -> CatalogMeta:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise CatalogError("empty catalog file")
    head = lines[0].split()
    if head[0] not in ("xor-catalog", "catalog"):
        raise CatalogError("catalog header must start with 'xor-catalog' or 'catalog'")
    try:
        meta = dict(tok.split("=", 1) for tok in head[1:])
        n, measure = int(meta["n"]), Measure(meta["measure"])
        ell, s = int(meta["ell"]), int(meta["s"])
        f = TruthTable.from_str(meta["f"]) if "f" in meta else None
    except (KeyError, ValueError) as exc:
        raise CatalogError(f"bad catalog header: {exc}") from exc
    if head[0] == "catalog" and f is None:
        raise CatalogError("generic catalogs need f=<truth table>")
    classes = []
    body: list[str] = []
    slots: list[int] | None = None
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "class":
            body, slots = [], None
        elif parts[0] == "slots":
            slots = [int(t) for t in parts[1:]]
        elif parts[0] == "end":
            if slots is None:
                raise CatalogError("class without slots line")
            try:
                c, _ = parse_bcir("\n".join(body), allow_open=True)
            except CircuitError as exc:
                raise CatalogError(str(exc)) from exc
            if len(slots) != n or any(c.gates.get(sl) is None or c.gates[sl].kind is not Kind.INPUT for sl in slots):
                raise CatalogError("slots must list n input gates")
            classes.append(OpenCircuit(c, slots))
        else:
            body.append(ln)
    if not classes:
        raise CatalogError("catalog has no classes")
    return CatalogMeta(n, measure, s, ell, classes, f)


def load_catalog(path: str | Path) -> CatalogMeta:
    return parse_catalog(Path(path).read_text())


def catalog_from_circuits(f: TruthTable, circuits: list[Circuit], measure: Measure | str = Measure.D) -> CatalogMeta:
    """Open catalog from explicit labeled optimal circuits of ``f``."""
    measure = Measure(measure)
    seen: dict[bytes, OpenCircuit] = {}
    for c in circuits:
        oc = strip_labels(c)
        seen.setdefault(canonical_form(oc.circuit), oc)
    classes = [seen[k] for k in sorted(seen)]
    s = size(classes[0].circuit, measure)
    ell = max(max_fanout(oc.circuit) for oc in classes)
    return CatalogMeta(f.num_vars, measure, s, ell, classes, f)

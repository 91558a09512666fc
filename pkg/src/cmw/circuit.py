"""Circuits over the basis {AND, OR, NOT, CONST, INPUT}.

A circuit is an immutable id-indexed collection of gates with one designated
output. Gate ids are never renumbered by any operation in this package.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .truthtable import TruthTable, full_mask, var_bits


class CircuitError(ValueError):
    pass


class Kind(str, Enum):
    AND = "AND"
    OR = "OR"
    NOT = "NOT"
    CONST = "CONST"
    INPUT = "INPUT"

    @property
    def arity(self) -> int:
        return {"AND": 2, "OR": 2, "NOT": 1}.get(self.value, 0)

    @property
    def binary(self) -> bool:
        return self is Kind.AND or self is Kind.OR


class Measure(str, Enum):
    D = "D"
    R = "R"


_VAR_RE = re.compile(r"^([a-z])(\d+)$")


@dataclass(frozen=True, order=True)
class VarRef:
    """A named input. ``x`` marks base variables and ``y`` extension variables."""

    cls: str
    index: int

    @classmethod
    def parse(cls, s: str) -> VarRef:
        m = _VAR_RE.match(s.strip())
        if not m or int(m.group(2)) < 1:
            raise CircuitError(f"bad variable name {s!r}")
        return cls(m.group(1), int(m.group(2)))

    @property
    def is_extension(self) -> bool:
        return self.cls == "y"

    def __str__(self) -> str:
        return f"{self.cls}{self.index}"


def x(i: int) -> VarRef:
    return VarRef("x", i)


def y(i: int) -> VarRef:
    return VarRef("y", i)


def var_order(n: int, m: int = 0) -> list[VarRef]:
    return [x(i) for i in range(1, n + 1)] + [y(j) for j in range(1, m + 1)]


@dataclass(frozen=True)
class Gate:
    id: int
    kind: Kind
    inputs: tuple[int, ...] = ()
    value: int | None = None
    var: VarRef | None = None

    def __post_init__(self) -> None:
        if len(self.inputs) != self.kind.arity:
            raise CircuitError(f"gate {self.id}: {self.kind.value} takes {self.kind.arity} inputs")
        if self.kind is Kind.CONST and self.value not in (0, 1):
            raise CircuitError(f"gate {self.id}: constant needs a bit value")

    def label(self) -> str:
        if self.kind is Kind.CONST:
            return f"CONST {self.value}"
        if self.kind is Kind.INPUT:
            return f"INPUT {self.var}" if self.var is not None else "INPUT"
        return self.kind.value


class Circuit:
    """Single-output DAG. Instances are treated as values and never mutated."""

    __slots__ = ("gates", "output", "_readers", "_topo", "_hash")

    def __init__(self, gates: Mapping[int, Gate] | Iterable[Gate], output: int, *, check: bool = True):
        if not isinstance(gates, Mapping):
            gates = {g.id: g for g in gates}
        self.gates: dict[int, Gate] = dict(gates)
        self.output = output
        self._readers = None
        self._topo = None
        self._hash = None
        if check:
            self.validate()

    # structure -------------------------------------------------------------
    def validate(self) -> None:
        if self.output not in self.gates:
            raise CircuitError(f"output gate {self.output} does not exist")
        for gid, g in self.gates.items():
            if g.id != gid:
                raise CircuitError(f"gate keyed {gid} carries id {g.id}")
            for a in g.inputs:
                if a not in self.gates:
                    raise CircuitError(f"gate {gid} reads missing gate {a}")
        self.topological_order()

    def __getitem__(self, gid: int) -> Gate:
        return self.gates[gid]

    def __contains__(self, gid: int) -> bool:
        return gid in self.gates

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates[i] for i in sorted(self.gates))

    def __len__(self) -> int:
        return len(self.gates)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Circuit) and self.output == other.output and self.gates == other.gates

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.output, tuple(sorted(self.gates.items()))))
        return self._hash

    def __repr__(self) -> str:
        return f"Circuit({len(self.gates)} gates, output={self.output})"

    def readers(self) -> dict[int, list[int]]:
        """Map gate id to the ids of gates reading it, with multiplicity."""
        if self._readers is None:
            r: dict[int, list[int]] = {gid: [] for gid in self.gates}
            for gid in sorted(self.gates):
                for a in self.gates[gid].inputs:
                    r[a].append(gid)
            self._readers = r
        return self._readers

    def topological_order(self) -> list[int]:
        """Inputs before readers; among ready gates the smallest id first."""
        if self._topo is None:
            import heapq

            indeg = {gid: len(g.inputs) for gid, g in self.gates.items()}
            readers = self.readers()
            ready = [gid for gid, d in indeg.items() if d == 0]
            heapq.heapify(ready)
            out = []
            while ready:
                gid = heapq.heappop(ready)
                out.append(gid)
                for r in readers[gid]:
                    indeg[r] -= 1
                    if indeg[r] == 0:
                        heapq.heappush(ready, r)
            if len(out) != len(self.gates):
                raise CircuitError("cycle detected")
            self._topo = out
        return self._topo

    def variables(self) -> set[VarRef]:
        return {g.var for g in self.gates.values() if g.kind is Kind.INPUT and g.var is not None}

    def input_gates(self, var: VarRef | None = None) -> list[int]:
        return sorted(
            gid for gid, g in self.gates.items() if g.kind is Kind.INPUT and (var is None or g.var == var)
        )

    def reachable(self, root: int | None = None) -> set[int]:
        root = self.output if root is None else root
        seen = {root}
        stack = [root]
        while stack:
            for a in self.gates[stack.pop()].inputs:
                if a not in seen:
                    seen.add(a)
                    stack.append(a)
        return seen

    def replace(self, gates: Mapping[int, Gate], output: int | None = None, *, check: bool = False) -> Circuit:
        return Circuit(gates, self.output if output is None else output, check=check)

    def relabel(self, mapping: Mapping[VarRef, VarRef | None]) -> Circuit:
        gates = {}
        for gid, g in self.gates.items():
            if g.kind is Kind.INPUT and g.var in mapping:
                g = Gate(gid, Kind.INPUT, var=mapping[g.var])
            gates[gid] = g
        return Circuit(gates, self.output, check=False)

    def shift_ids(self, offset: int) -> Circuit:
        gates = {
            gid + offset: Gate(gid + offset, g.kind, tuple(a + offset for a in g.inputs), g.value, g.var)
            for gid, g in self.gates.items()
        }
        return Circuit(gates, self.output + offset, check=False)

    def renumbered(self) -> Circuit:
        """Copy with ids 0..k-1 assigned in topological order."""
        order = self.topological_order()
        new = {old: i for i, old in enumerate(order)}
        gates = {}
        for old in order:
            g = self.gates[old]
            gates[new[old]] = Gate(new[old], g.kind, tuple(new[a] for a in g.inputs), g.value, g.var)
        return Circuit(gates, new[self.output], check=False)


# builder ------------------------------------------------------------------------

class Builder:
    """Incremental construction helper that hands out fresh ids."""

    def __init__(self, start: int = 0):
        self.gates: dict[int, Gate] = {}
        self.next_id = start
        self._inputs: dict[VarRef, int] = {}

    def _add(self, kind: Kind, inputs=(), value=None, var=None) -> int:
        gid = self.next_id
        self.next_id += 1
        self.gates[gid] = Gate(gid, kind, tuple(inputs), value, var)
        return gid

    def input(self, var: VarRef | str | None) -> int:
        if isinstance(var, str):
            var = VarRef.parse(var)
        if var is not None and var in self._inputs:
            return self._inputs[var]
        gid = self._add(Kind.INPUT, var=var)
        if var is not None:
            self._inputs[var] = gid
        return gid

    def const(self, value: int) -> int:
        return self._add(Kind.CONST, value=value)

    def and_(self, a: int, b: int) -> int:
        return self._add(Kind.AND, (a, b))

    def or_(self, a: int, b: int) -> int:
        return self._add(Kind.OR, (a, b))

    def not_(self, a: int) -> int:
        return self._add(Kind.NOT, (a,))

    def xor_block(self, a: int, b: int) -> int:
        """The standard three-gate block (a OR b) AND NOT(a AND b)."""
        return self.and_(self.or_(a, b), self.not_(self.and_(a, b)))

    def build(self, output: int) -> Circuit:
        return Circuit(self.gates, output)


_TOKEN = re.compile(r"\s*(?:([a-z]\d+)|([01])|(.))")


def parse_formula(text: str) -> Circuit:
    """Build a circuit from an infix formula.

    Operators by increasing precedence: ``|``, ``^``, ``&``, prefix ``~`` or ``!``.
    ``a ^ b`` expands to the block (a | b) & ~(a & b) with a and b shared.
    Repeated variables share one INPUT gate.
    """
    toks: list[tuple[str, str]] = []
    for m in _TOKEN.finditer(text):
        if m.group(1):
            toks.append(("var", m.group(1)))
        elif m.group(2):
            toks.append(("const", m.group(2)))
        elif m.group(3) and not m.group(3).isspace():
            toks.append(("op", m.group(3)))
    b = Builder()
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else ("end", "")

    def take(kind=None, val=None):
        nonlocal pos
        t = peek()
        if (kind and t[0] != kind) or (val and t[1] != val):
            raise CircuitError(f"formula parse error near token {pos}: {t}")
        pos += 1
        return t

    def atom():
        t = peek()
        if t == ("op", "(" ):
            take()
            v = expr_or()
            take("op", ")")
            return v
        if t[0] == "op" and t[1] in "~!":
            take()
            return b.not_(atom())
        if t[0] == "var":
            take()
            return b.input(t[1])
        if t[0] == "const":
            take()
            return b.const(int(t[1]))
        raise CircuitError(f"formula parse error near token {pos}: {t}")

    def binary(sub, op, make):
        def rule():
            v = sub()
            while peek() == ("op", op):
                take()
                v = make(v, sub())
            return v
        return rule

    expr_and = binary(atom, "&", b.and_)
    expr_xor = binary(expr_and, "^", b.xor_block)
    expr_or = binary(expr_xor, "|", b.or_)
    out = expr_or()
    if pos != len(toks):
        raise CircuitError(f"trailing tokens in formula: {toks[pos:]}")
    return b.build(out)


# evaluation -----------------------------------------------------------------------

def _eval_bits(circuit: Circuit, leaf) -> dict[int, int]:
    vals: dict[int, int] = {}
    for gid in circuit.topological_order():
        g = circuit.gates[gid]
        k = g.kind
        if k is Kind.AND:
            vals[gid] = vals[g.inputs[0]] & vals[g.inputs[1]]
        elif k is Kind.OR:
            vals[gid] = vals[g.inputs[0]] | vals[g.inputs[1]]
        elif k is Kind.NOT:
            vals[gid] = leaf(None, vals[g.inputs[0]])
        else:
            vals[gid] = leaf(g, None)
    return vals


def evaluate(circuit: Circuit, assignment: Mapping[VarRef, int]) -> int:
    def leaf(g, neg):
        if g is None:
            return neg ^ 1
        if g.kind is Kind.CONST:
            return g.value
        if g.var not in assignment:
            raise CircuitError(f"assignment misses variable {g.var}")
        return assignment[g.var] & 1

    return _eval_bits(circuit, leaf)[circuit.output]


def node_tables(circuit: Circuit, order: list[VarRef]) -> dict[int, int]:
    """Bit-parallel value of every gate over all rows of ``order``."""
    n = len(order)
    mask = full_mask(n)
    pos = {v: i + 1 for i, v in enumerate(order)}

    def leaf(g, neg):
        if g is None:
            return neg ^ mask
        if g.kind is Kind.CONST:
            return mask if g.value else 0
        if g.var not in pos:
            raise CircuitError(f"variable {g.var} missing from variable order")
        return var_bits(n, pos[g.var])

    return _eval_bits(circuit, leaf)


def truth_table(circuit: Circuit, order: list[VarRef]) -> TruthTable:
    return TruthTable(len(order), node_tables(circuit, order)[circuit.output])


# measures ----------------------------------------------------------------------------

def size(circuit: Circuit, measure: Measure | str = Measure.D) -> int:
    measure = Measure(measure)
    counted = (Kind.AND, Kind.OR) if measure is Measure.D else (Kind.AND, Kind.OR, Kind.NOT)
    return sum(1 for g in circuit.gates.values() if g.kind in counted)


def fanout(circuit: Circuit, gid: int) -> int:
    if gid not in circuit.gates:
        raise CircuitError(f"unknown gate {gid}")
    return len(circuit.readers()[gid])


def depths(circuit: Circuit) -> dict[int, int]:
    """Depth of every gate: the largest number of binary-gate out-edges on a path to the output.

    Out-edges of binary gates weigh one, all others zero; gates without a path
    to the output get depth -1.
    """
    d: dict[int, int] = {circuit.output: 0}
    for gid in reversed(circuit.topological_order()):
        if gid not in d:
            continue
        g = circuit.gates[gid]
        w = 1 if g.kind.binary else 0
        for a in g.inputs:
            cand = d[gid] + w
            if d.get(a, -1) < cand:
                d[a] = cand
    return {gid: d.get(gid, -1) for gid in circuit.gates}


def depth_order(circuit: Circuit) -> list[int]:
    d = depths(circuit)
    return sorted(circuit.gates, key=lambda g: (-d[g], g))


def subcircuit(circuit: Circuit, root: int) -> Circuit:
    if root not in circuit.gates:
        raise CircuitError(f"unknown gate {root}")
    keep = circuit.reachable(root)
    return Circuit({gid: circuit.gates[gid] for gid in keep}, root, check=False)


# canonical form --------------------------------------------------------------------------

def _refine_colors(circuit: Circuit) -> dict[int, int]:
    gates = circuit.gates
    readers = circuit.readers()
    color = {}
    base = {gid: (g.label(), gid == circuit.output) for gid, g in gates.items()}
    ranks = {key: i for i, key in enumerate(sorted(set(base.values())))}
    color = {gid: ranks[base[gid]] for gid in gates}
    classes = len(ranks)
    while True:
        sig = {}
        for gid, g in gates.items():
            ins = [color[a] for a in g.inputs]
            if g.kind.binary:
                ins.sort()
            rd = []
            for r in readers[gid]:
                rg = gates[r]
                if rg.kind.binary:
                    other = rg.inputs[1] if rg.inputs[0] == gid else rg.inputs[0]
                    rd.append((color[r], color[other]))
                else:
                    rd.append((color[r], -1))
            sig[gid] = (color[gid], tuple(ins), tuple(sorted(rd)))
        ranks = {key: i for i, key in enumerate(sorted(set(sig.values())))}
        new = {gid: ranks[sig[gid]] for gid in gates}
        if len(ranks) == classes:
            return new
        classes = len(ranks)
        color = new


def canonical_form(circuit: Circuit) -> bytes:
    """Isomorphism-invariant encoding; AND and OR inputs are treated as unordered."""
    gates = circuit.gates
    color = _refine_colors(circuit)
    readers = circuit.readers()
    kind_code = {gid: f"{g.label()}" for gid, g in gates.items()}
    sinks = sorted((gid for gid in gates if not readers[gid] and gid != circuit.output), key=lambda g: color[g])
    best: list[str] | None = None

    # A state is (tokens, labels, stack). The stack holds gate ids and
    # separator markers; root lists of equal colour are branched over.
    def children_orders(gid: int, labels: dict[int, int]) -> list[tuple[int, ...]]:
        ins = gates[gid].inputs
        if len(ins) < 2:
            return [ins]
        a, b = ins
        ka = (color[a], labels.get(a, -1))
        kb = (color[b], labels.get(b, -1))
        if ka < kb:
            return [(a, b)]
        if kb < ka:
            return [(b, a)]
        if a == b:
            return [(a, b)]
        return [(a, b), (b, a)]

    def run(tokens: list[str], labels: dict[int, int], stack: list, pending: list[int]) -> None:
        nonlocal best
        while True:
            if best is not None and tokens > best[: len(tokens)]:
                return
            if not stack:
                rest = [s for s in pending if s not in labels]
                if not rest:
                    break
                c0 = color[rest[0]]
                tied = [s for s in rest if color[s] == c0]
                if len(tied) == 1:
                    stack = [("root",), tied[0]]
                    continue
                for s in tied:
                    run(tokens[:], dict(labels), [("root",), s], [p for p in rest if p != s])
                return
            item = stack.pop()
            if isinstance(item, tuple):
                tokens.append("|")
                continue
            gid = item
            if gid in labels:
                tokens.append(f"@{labels[gid]}")
                continue
            labels[gid] = len(labels)
            tokens.append(kind_code[gid])
            orders = children_orders(gid, labels)
            if len(orders) == 1:
                stack.extend(reversed(orders[0]))
                continue
            for order in orders:
                run(tokens[:], dict(labels), stack + list(reversed(order)), pending)
            return
        if best is None or tokens < best:
            best = tokens

    run([], {}, [circuit.output], sinks)
    assert best is not None
    return "\n".join(best).encode()


# text format ---------------------------------------------------------------------------------

def format_bcir(circuit: Circuit, inputs: list[VarRef] | None = None) -> str:
    if inputs is None:
        inputs = sorted(circuit.variables())
    lines = ["inputs " + " ".join(map(str, inputs)) if inputs else "inputs"]
    for gid in circuit.topological_order():
        g = circuit.gates[gid]
        if g.kind is Kind.CONST:
            lines.append(f"gate {gid} CONST {g.value}")
        elif g.kind is Kind.INPUT:
            lines.append(f"gate {gid} INPUT" + (f" {g.var}" if g.var is not None else ""))
        else:
            lines.append(f"gate {gid} {g.kind.value} " + " ".join(map(str, g.inputs)))
    lines.append(f"output {circuit.output}")
    return "\n".join(lines) + "\n"


def parse_bcir(text: str, *, allow_open: bool = False) -> tuple[Circuit, list[VarRef]]:
    """Parse the line format; returns the circuit and its declared input list."""
    gates: dict[int, Gate] = {}
    output = None
    inputs: list[VarRef] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "inputs":
                inputs = [VarRef.parse(p) for p in parts[1:]]
            elif parts[0] == "gate":
                gid = int(parts[1])
                if gid < 0 or gid in gates:
                    raise CircuitError(f"duplicate or negative gate id {gid}")
                kind = Kind(parts[2])
                args = parts[3:]
                if kind is Kind.CONST:
                    if args not in (["0"], ["1"]):
                        raise CircuitError("CONST needs 0 or 1")
                    gates[gid] = Gate(gid, kind, value=int(args[0]))
                elif kind is Kind.INPUT:
                    if not args and allow_open:
                        gates[gid] = Gate(gid, kind)
                    elif len(args) == 1:
                        gates[gid] = Gate(gid, kind, var=VarRef.parse(args[0]))
                    else:
                        raise CircuitError("INPUT needs one variable")
                else:
                    ins = tuple(int(a) for a in args)
                    for a in ins:
                        if a not in gates:
                            raise CircuitError(f"gate {gid} reads undeclared gate {a}")
                    gates[gid] = Gate(gid, kind, ins)
            elif parts[0] == "output":
                if output is not None or len(parts) != 2:
                    raise CircuitError("exactly one output line expected")
                output = int(parts[1])
            else:
                raise CircuitError(f"unknown directive {parts[0]!r}")
        except (ValueError, IndexError) as exc:
            raise CircuitError(f"line {lineno}: {exc}") from exc
    if output is None:
        raise CircuitError("missing output line")
    circ = Circuit(gates, output)
    declared = set(inputs)
    for v in circ.variables():
        if inputs and v not in declared:
            raise CircuitError(f"variable {v} used but not declared")
    return circ, inputs

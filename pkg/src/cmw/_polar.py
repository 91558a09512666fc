"""Circuits with negations folded into edges.

Every NOT chain collapses onto the non-NOT node it starts from, so a wire is
a pair ``(node, polarity)``. Converting back introduces at most one shared
NOT per node, which yields circuits without double negations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import Circuit, Gate, Kind, VarRef
from .truthtable import full_mask, var_bits

Wire = tuple[int, int]


@dataclass
class PNode:
    kind: Kind
    ins: tuple[Wire, ...] = ()
    var: VarRef | None = None
    value: int | None = None


@dataclass
class Polar:
    nodes: dict[int, PNode] = field(default_factory=dict)
    output: Wire = (0, 0)

    @classmethod
    def from_circuit(cls, c: Circuit) -> Polar:
        wire: dict[int, Wire] = {}
        nodes: dict[int, PNode] = {}
        for gid in c.topological_order():
            g = c.gates[gid]
            if g.kind is Kind.NOT:
                node, pol = wire[g.inputs[0]]
                wire[gid] = (node, pol ^ 1)
                continue
            wire[gid] = (gid, 0)
            nodes[gid] = PNode(g.kind, tuple(wire[a] for a in g.inputs), g.var, g.value)
        return cls(nodes, wire[c.output])

    def copy(self) -> Polar:
        return Polar({k: PNode(v.kind, v.ins, v.var, v.value) for k, v in self.nodes.items()}, self.output)

    def next_id(self) -> int:
        return max(self.nodes, default=-1) + 1

    def readers(self) -> dict[int, list[tuple[int, int]]]:
        """For each node, the (reader, input position) pairs reading it in any polarity."""
        out: dict[int, list[tuple[int, int]]] = {k: [] for k in self.nodes}
        for gid in sorted(self.nodes):
            for pos, (a, _) in enumerate(self.nodes[gid].ins):
                out[a].append((gid, pos))
        return out

    def order(self) -> list[int]:
        seen: set[int] = set()
        out: list[int] = []
        for root in sorted(self.nodes):
            if root in seen:
                continue
            stack = [(root, False)]
            while stack:
                gid, done = stack.pop()
                if done:
                    out.append(gid)
                    continue
                if gid in seen:
                    continue
                seen.add(gid)
                stack.append((gid, True))
                for a, _ in reversed(self.nodes[gid].ins):
                    if a not in seen:
                        stack.append((a, False))
        return out

    def tables(self, order: list[VarRef]) -> dict[int, int]:
        n = len(order)
        mask = full_mask(n)
        pos = {v: i + 1 for i, v in enumerate(order)}
        val: dict[int, int] = {}
        for gid in self.order():
            nd = self.nodes[gid]
            if nd.kind is Kind.INPUT:
                val[gid] = var_bits(n, pos[nd.var])
            elif nd.kind is Kind.CONST:
                val[gid] = mask if nd.value else 0
            else:
                (a, pa), (b, pb) = nd.ins
                va = val[a] ^ (mask if pa else 0)
                vb = val[b] ^ (mask if pb else 0)
                val[gid] = va & vb if nd.kind is Kind.AND else va | vb
        return val

    def table(self, order: list[VarRef]) -> int:
        node, pol = self.output
        return self.tables(order)[node] ^ (full_mask(len(order)) if pol else 0)

    def to_circuit(self) -> Circuit:
        gates: dict[int, Gate] = {}
        nxt = self.next_id()
        negs: dict[int, int] = {}

        def src(w: Wire) -> int:
            nonlocal nxt
            node, pol = w
            if not pol:
                return node
            if node not in negs:
                negs[node] = nxt
                gates[nxt] = Gate(nxt, Kind.NOT, (node,))
                nxt += 1
            return negs[node]

        for gid in self.order():
            nd = self.nodes[gid]
            if nd.kind is Kind.INPUT:
                gates[gid] = Gate(gid, Kind.INPUT, var=nd.var)
            elif nd.kind is Kind.CONST:
                gates[gid] = Gate(gid, Kind.CONST, value=nd.value)
            else:
                gates[gid] = Gate(gid, nd.kind, tuple(src(w) for w in nd.ins))
        out = src(self.output)
        return Circuit(gates, out, check=False)


def binary_reads(c: Circuit) -> dict[int, int]:
    """Number of binary-gate input edges fed by each non-NOT gate, directly or through NOTs."""
    p = Polar.from_circuit(c)
    reads = {gid: 0 for gid in p.nodes}
    for nd in p.nodes.values():
        if nd.kind.binary:
            for a, _ in nd.ins:
                reads[a] += 1
    return reads

"""Bipartite permutation independent set and its reduction to a partial extension table.

Variables of the reduced table are ordered x1..x2n, y1..y2n, z1..z2n. A
block-respecting permutation pi corresponds to the read-once formula
OR_i ((x_pi(i) OR y_i) AND z_i).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .circuit import Builder, Circuit, Kind, VarRef, truth_table, x, y
from .truthtable import PartialTruthTable, Permutation, TruthTable

log = logging.getLogger(__name__)

MAX_BRUTE_N = 4


class BpisError(ValueError):
    pass


class StructureError(BpisError):
    """The circuit is not of the form OR_i ((x_j OR y_i) AND z_i)."""


Edge = tuple[int, int, int, int]  # (j, k, j', k')


@dataclass(frozen=True)
class BpisInstance:
    n: int
    edges: frozenset[Edge] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise BpisError("n must be positive")
        for e in self.edges:
            if len(e) != 4 or any(not 1 <= v <= self.n for v in e):
                raise BpisError(f"edge {e} out of range for n={self.n}")

    def format(self) -> str:
        return f"n={self.n}\n" + "".join(" ".join(map(str, e)) + "\n" for e in sorted(self.edges))

    @classmethod
    def parse(cls, text: str) -> BpisInstance:
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines or not lines[0].startswith("n="):
            raise BpisError("first line must be n=<n>")
        try:
            n = int(lines[0][2:])
            edges = []
            for ln in lines[1:]:
                parts = tuple(int(t) for t in ln.split())
                if len(parts) != 4:
                    raise BpisError(f"edge line needs four indices: {ln!r}")
                edges.append(parts)
        except ValueError as exc:
            raise BpisError(str(exc)) from exc
        return cls(n, frozenset(edges))

    @classmethod
    def load(cls, path: str | Path) -> BpisInstance:
        return cls.parse(Path(path).read_text())


def variables(n: int) -> list[VarRef]:
    m = 2 * n
    return [x(i) for i in range(1, m + 1)] + [y(i) for i in range(1, m + 1)] + [VarRef("z", i) for i in range(1, m + 1)]


# BPIS itself ------------------------------------------------------------------------------

def block_permutations(n: int):
    """Permutations of [2n] fixing both halves setwise, in lexicographic order."""
    for lo in itertools.permutations(range(1, n + 1)):
        for hi in itertools.permutations(range(n + 1, 2 * n + 1)):
            yield Permutation(lo + hi)


def is_block_respecting(pi: Permutation, n: int) -> bool:
    return pi.size == 2 * n and set(pi.images[:n]) == set(range(1, n + 1))


def satisfies(inst: BpisInstance, pi: Permutation) -> bool:
    if not is_block_respecting(pi, inst.n):
        return False
    img = pi.images
    return all(img[j - 1] != k or img[inst.n + jj - 1] != inst.n + kk for j, k, jj, kk in inst.edges)


def brute_solve_bpis(inst: BpisInstance) -> Permutation | None:
    if inst.n > MAX_BRUTE_N:
        raise BpisError(f"brute force is limited to n <= {MAX_BRUTE_N}")
    return next((pi for pi in block_permutations(inst.n) if satisfies(inst, pi)), None)


# the reduction -----------------------------------------------------------------------------

def _row(n: int, xs, ys, zs) -> int:
    bits = list(xs) + list(ys) + list(zs)
    r = 0
    for b in bits:
        r = (r << 1) | b
    return r


def reduce(inst: BpisInstance) -> PartialTruthTable:
    """Partial table prescribing the structural cases, the two half-identity blocks and one row per edge.

    When an edge row coincides with a structural row (only possible for
    n = 1) the edge row wins, since it is the one carrying the instance.
    """
    n = inst.n
    m = 2 * n
    nv = 6 * n
    care = bits = 0
    fixed: dict[int, int] = {}

    def put(row: int, val: int, override: bool = False) -> None:
        old = fixed.get(row)
        if old is not None and old != val:
            if not override:
                raise BpisError(f"prescribed regions disagree on row {row}")
            log.warning("edge row %d overrides a structural value", row)
        fixed[row] = val

    ones, zeros = (1,) * m, (0,) * m
    for xs, ys, zs in itertools.product(itertools.product((0, 1), repeat=m), repeat=3):
        if xs == zeros:
            put(_row(n, xs, ys, zs), int(any(a & b for a, b in zip(ys, zs))))
        if xs == ones:
            put(_row(n, xs, ys, zs), int(any(zs)))
        if zs == ones:
            put(_row(n, xs, ys, zs), int(any(xs) or any(ys)))
        if zs == zeros:
            put(_row(n, xs, ys, zs), 0)
    half_lo = (1,) * n + (0,) * n
    half_hi = (0,) * n + (1,) * n
    for xs in itertools.product((0, 1), repeat=m):
        put(_row(n, xs, zeros, half_lo), int(any(xs[:n])))
        put(_row(n, xs, zeros, half_hi), int(any(xs[n:])))
    for j, k, jj, kk in sorted(inst.edges):
        xs = [1] * m
        xs[k - 1] = 0
        xs[n + kk - 1] = 0
        zs = [0] * m
        zs[j - 1] = 1
        zs[n + jj - 1] = 1
        put(_row(n, xs, zeros, zs), 1, override=True)
    for r, v in fixed.items():
        care |= 1 << r
        if v:
            bits |= 1 << r
    return PartialTruthTable(nv, care, bits)


# witnesses ---------------------------------------------------------------------------------

def witness_to_circuit(pi: Permutation, n: int) -> Circuit:
    """OR_i ((x_pi(i) OR y_i) AND z_i) with a left-leaning OR tree."""
    if pi.size != 2 * n:
        raise BpisError("permutation arity must be 2n")
    b = Builder()
    terms = []
    for i in range(1, 2 * n + 1):
        xi = b.input(x(pi.images[i - 1]))
        yi = b.input(y(i))
        zi = b.input(VarRef("z", i))
        terms.append(b.and_(b.or_(xi, yi), zi))
    acc = terms[0]
    for t in terms[1:]:
        acc = b.or_(acc, t)
    return b.build(acc)


def circuit_to_witness(c: Circuit, n: int) -> Permutation:
    """Read off pi from which x shares an OR gate with each y_i."""
    g = c.gates
    readers = c.readers()

    def fail(msg: str):
        raise StructureError(msg)

    def leaves(gid: int) -> list[int]:
        h = g[gid]
        if h.kind is Kind.AND:
            return [gid]
        if h.kind is Kind.OR and not all(g[a].kind is Kind.INPUT for a in h.inputs):
            return leaves(h.inputs[0]) + leaves(h.inputs[1])
        fail(f"gate {gid} is neither part of the OR tree nor a term")

    images = {}
    for t in leaves(c.output):
        a, b = g[t].inputs
        if g[b].kind is Kind.OR and g[a].kind is Kind.INPUT:
            a, b = b, a
        z_gate, or_gate = g[b], g[a]
        if z_gate.kind is not Kind.INPUT or z_gate.var.cls != "z" or or_gate.kind is not Kind.OR:
            fail(f"term {t} is not (x OR y) AND z")
        ins = [g[u] for u in or_gate.inputs]
        if any(u.kind is not Kind.INPUT for u in ins):
            fail(f"gate {a} does not read two inputs")
        xs = [u.var for u in ins if u.var.cls == "x"]
        ys = [u.var for u in ins if u.var.cls == "y"]
        if len(xs) != 1 or len(ys) != 1 or ys[0].index != z_gate.var.index:
            fail(f"term {t} does not pair one x with y_i and z_i")
        if len(readers[a]) != 1:
            fail(f"gate {a} has fanout {len(readers[a])}")
        images[ys[0].index] = xs[0].index
    if sorted(images) != list(range(1, 2 * n + 1)):
        fail("terms do not cover y_1..y_2n")
    try:
        return Permutation(tuple(images[i] for i in range(1, 2 * n + 1)))
    except ValueError as exc:
        raise StructureError(str(exc)) from exc


def check_consistency(c: Circuit, pt: PartialTruthTable) -> bool:
    nv = pt.num_vars
    if nv % 6:
        raise BpisError("table arity is not 6n")
    order = variables(nv // 6)
    if not c.variables() <= set(order):
        raise BpisError("circuit reads variables outside the table")
    return pt.consistent_with(truth_table(c, order))


def base_restriction_table(pi: Permutation, n: int) -> TruthTable:
    """Table of the witness circuit with x fixed to zero, over y and z."""
    c = witness_to_circuit(pi, n)
    tt = truth_table(c, variables(n))
    m = 2 * n
    bits = 0
    for r in range(1 << (2 * m)):
        if (tt.bits >> r) & 1:  # x occupies the high bits; x = 0 keeps rows below 2^(2m)
            bits |= 1 << r
    return TruthTable(2 * m, bits)


def verify_instance(inst: BpisInstance) -> dict[str, bool]:
    """Compare the BPIS answer with the existence of a consistent witness circuit."""
    pt = reduce(inst)
    answer = brute_solve_bpis(inst)
    consistent = [pi for pi in block_permutations(inst.n)
                  if check_consistency(witness_to_circuit(pi, inst.n), pt)]
    valid = [pi for pi in block_permutations(inst.n) if satisfies(inst, pi)]
    return {
        "answers_agree": (answer is not None) == bool(consistent),
        "same_permutations": consistent == valid,
        "least_matches": answer == (consistent[0] if consistent else None),
    }

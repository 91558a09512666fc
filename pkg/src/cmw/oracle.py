"""Brute-force ground truth: exact circuit complexity and optimal-circuit enumeration.

Complexity tables come from an exhaustive search over gate sequences
(see :mod:`cmw._search`) followed by closure under input permutations,
input negations and output complement. Optimal circuits are enumerated by a
second, independent exhaustive search for sequences of exactly the optimal
length, expanded into every AND/OR realisation with shared negations.
"""

from __future__ import annotations

import itertools
import logging
import os
import struct
import time
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _search
from .circuit import Circuit, Gate, Kind, Measure, VarRef, canonical_form, size, x
from .truthtable import TruthTable, find_keys, full_mask, is_nondegenerate

log = logging.getLogger(__name__)

MAX_ORACLE_VARS = 4
UNKNOWN = 255
MAGIC = b"CMWCC"
FORMAT_VERSION = 2

# Exhaustive depth of the first search pass per variable count (D measure).
D_FULL_DEPTH = {2: 3, 3: 6, 4: 8}
# Deepest targeted search; beyond it functions keep only the lower bound.
D_MAX_DEPTH = {2: 3, 3: 6, 4: 9}
# Binary-gate depth explored for the R measure; larger values are reported unknown.
R_DEPTH = {1: 2, 2: 5, 3: 6, 4: 5}


class OracleError(ValueError):
    pass


class BudgetExceeded(OracleError):
    pass


def cache_dir() -> Path:
    d = os.environ.get("CMW_CACHE_DIR")
    path = Path(d) if d else Path.home() / ".cache" / "cmw"
    path.mkdir(parents=True, exist_ok=True)
    return path


# symmetry group ------------------------------------------------------------------

def group_rowmaps(n: int, negations: bool = True) -> np.ndarray:
    """Row maps of input permutations (and negations): row r of the image reads row map[r]."""
    maps = []
    negs = range(1 << n) if negations else (0,)
    for perm in itertools.permutations(range(n)):
        for neg in negs:
            rm = np.zeros(1 << n, np.int64)
            for r in range(1 << n):
                src = 0
                for v in range(n):
                    bit = ((r >> (n - 1 - perm[v])) & 1) ^ ((neg >> v) & 1)
                    src |= bit << (n - 1 - v)
                rm[r] = src
            maps.append(rm)
    return np.array(maps)


def _gate_key(i: int, j: int, p: int) -> int:
    if i < j:
        i, j, p = j, i, ((p & 1) << 1) | (p >> 1)
    return (i * 64 + j) * 4 + p


def _first_gate_stabiliser(n: int) -> list[tuple[list[int], list[int]]]:
    """Input permutations and negations that fix AND(x1, x2), acting on node ids."""
    stab = []
    for head in itertools.permutations((0, 1)):
        for tail in itertools.permutations(range(2, n)):
            perm = list(head) + list(tail) + [n, n + 1]
            for neg in range(1 << max(n - 2, 0)):
                flip = [0, 0] + [(neg >> (k - 2)) & 1 for k in range(2, n)] + [0, 0]
                stab.append((perm, flip))
    return stab


def _image_key(sym, i: int, j: int, p: int) -> int:
    perm, flip = sym
    return _gate_key(perm[i], perm[j], p ^ flip[i] ^ (flip[j] << 1))


def symmetry_filters(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Allowed keys for the second and third gates once the first is AND(x1, x2).

    The second gate must be key-minimal under every symmetry fixing the
    first gate; the third under every symmetry fixing the first two. The
    orbit member whose second and then third keys are least satisfies both,
    so no circuit is lost up to symmetry.
    """
    ok2 = np.zeros((n + 1) * 256, np.int8)
    ok3 = np.zeros(((n + 1) * 256, (n + 2) * 256), np.int8)
    if n < 2:
        return ok2, ok3
    stab = _first_gate_stabiliser(n)
    for i in range(1, n + 1):
        for j in range(i):
            for p in range(4):
                k2 = _gate_key(i, j, p)
                if k2 > min(_image_key(s, i, j, p) for s in stab):
                    continue
                ok2[k2] = 1
                fixing = [s for s in stab if _image_key(s, i, j, p) == k2]
                for a in range(1, n + 2):
                    for b in range(a):
                        for q in range(4):
                            k3 = _gate_key(a, b, q)
                            if k3 <= min(_image_key(s, a, b, q) for s in fixing):
                                ok3[k2, k3] = 1
    return ok2, ok3


# tables ----------------------------------------------------------------------------

@dataclass
class CcTable:
    num_vars: int
    measure: Measure
    sizes: np.ndarray  # uint8 indexed by table bits; UNKNOWN when beyond the explored depth
    depth: int  # every value <= depth is exact; UNKNOWN means > depth

    def __getitem__(self, tt: TruthTable) -> int | None:
        if tt.num_vars != self.num_vars:
            raise OracleError("arity mismatch")
        v = int(self.sizes[tt.bits])
        return None if v == UNKNOWN else v

    @property
    def complete(self) -> bool:
        return bool((self.sizes != UNKNOWN).all())

    def histogram(self) -> dict[int, int]:
        vals, counts = np.unique(self.sizes, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}

    # persistence: magic, version, n, measure, depth, crc32(payload), payload
    def to_bytes(self) -> bytes:
        payload = self.sizes.astype(np.uint8).tobytes()
        head = MAGIC + struct.pack(
            "<BBcBI", FORMAT_VERSION, self.num_vars, self.measure.value.encode(), self.depth, zlib.crc32(payload)
        )
        return head + payload

    @classmethod
    def from_bytes(cls, data: bytes) -> CcTable:
        hl = len(MAGIC) + struct.calcsize("<BBcBI")
        if len(data) < hl or data[: len(MAGIC)] != MAGIC:
            raise OracleError("bad cache header")
        ver, n, meas, depth, crc = struct.unpack("<BBcBI", data[len(MAGIC):hl])
        payload = data[hl:]
        if ver != FORMAT_VERSION or len(payload) != 1 << (1 << n) or zlib.crc32(payload) != crc:
            raise OracleError("corrupted cache file")
        sizes = np.frombuffer(payload, dtype=np.uint8).copy()
        return cls(n, Measure(meas.decode()), sizes, depth)


def _literal_bits(n: int) -> list[int]:
    mask = full_mask(n)
    out = []
    for i in range(1, n + 1):
        t = TruthTable.var(n, i).bits
        out += [t, t ^ mask]
    return out


def _build_d(n: int) -> tuple[np.ndarray, int]:
    """Exhaustive pass, then alternate composition bounds and targeted deeper searches.

    After an exhaustive search to depth k every unreached function needs
    more than k gates, so an upper bound of k + 1 from composing two
    smaller circuits settles it exactly.
    """
    nfun = 1 << (1 << n)
    mask = full_mask(n)
    best = np.full(nfun, 127, np.int64)
    ok2, ok3 = symmetry_filters(n)
    maps = group_rowmaps(n)
    depth = D_FULL_DEPTH.get(n, 0)
    if depth:
        t0 = time.time()
        _search.search_levels(n, depth, np.ones(nfun, np.int8), best, True, ok2, ok3, np.ones(1, np.int8))
        best = _search.close_under_group(best, maps, 1 << n)
        log.info("D table n=%d: exhaustive to %d gates in %.1fs", n, depth, time.time() - t0)
    best[0] = best[mask] = 0
    for t in _literal_bits(n):
        best[t] = 0
    while True:
        open_ = best == 127
        if open_.any():
            ub = _search.compose_bounds(best, mask, depth + 1)
            best[open_ & (ub == depth + 1)] = depth + 1
            open_ = best == 127
        if not open_.any() or depth + 1 > D_MAX_DEPTH.get(n, depth):
            break
        t0 = time.time()
        trial = best.copy()
        want = open_.astype(np.int8)
        sup = _search.superset_flags(want, 1 << n)
        _search.search_levels(n, depth + 1, want, trial, True, ok2, ok3, sup)
        best = _search.close_under_group(trial, maps, 1 << n)
        depth += 1
        log.info("D table n=%d: targeted search at %d gates left %d open in %.1fs",
                 n, depth, int((best == 127).sum()), time.time() - t0)
    return np.where(best == 127, UNKNOWN, best).astype(np.uint8), depth


def _build_r(n: int) -> tuple[np.ndarray, int]:
    nfun = 1 << (1 << n)
    mask = full_mask(n)
    best = np.full(nfun, 127, np.int64)
    depth = R_DEPTH.get(n, 4)
    if n >= 2:
        _search.search_r(n, depth, best)
        best = _search.close_under_group(best, group_rowmaps(n, negations=False), 1 << n, False)
    best[0] = best[mask] = 0
    for i in range(1, n + 1):
        t = TruthTable.var(n, i).bits
        best[t] = 0
        best[t ^ mask] = min(best[t ^ mask], 1)
    # a circuit cheaper than k + 1 has at most k binary gates, so values up
    # to one past the explored binary depth are exact
    out = np.where(best <= depth + 1, best, UNKNOWN).astype(np.uint8)
    return out, depth + 1


_TABLES: dict[tuple[int, Measure], CcTable] = {}


def cc_table(n: int, measure: Measure | str = Measure.D, *, use_cache: bool = True) -> CcTable:
    measure = Measure(measure)
    if not 0 <= n <= MAX_ORACLE_VARS:
        raise OracleError(f"oracle supports at most {MAX_ORACLE_VARS} variables")
    key = (n, measure)
    if key in _TABLES:
        return _TABLES[key]
    path = cache_dir() / f"cc_v{FORMAT_VERSION}_{measure.value}_{n}.bin"
    table = None
    if use_cache and path.exists():
        try:
            table = CcTable.from_bytes(path.read_bytes())
        except OracleError:
            log.warning("rebuilding corrupted cache %s", path)
            table = None
    if table is None:
        sizes, depth = _build_d(n) if measure is Measure.D else _build_r(n)
        table = CcTable(n, measure, sizes, depth)
        if use_cache:
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(table.to_bytes())
            tmp.replace(path)
    _TABLES[key] = table
    return table


def exact_cc(tt: TruthTable, measure: Measure | str = Measure.D, cap: int | None = None) -> int | None:
    """Exact minimum size, or None when it exceeds ``cap``."""
    measure = Measure(measure)
    if tt.num_vars > MAX_ORACLE_VARS:
        raise OracleError(f"oracle supports at most {MAX_ORACLE_VARS} variables")
    table = cc_table(tt.num_vars, measure)
    v = table[tt]
    if v is None:
        if cap is not None and cap <= table.depth:
            return None
        raise BudgetExceeded(f"complexity above explored depth {table.depth}")
    if cap is not None and v > cap:
        return None
    return v


# skeletons ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Skeleton:
    """Function-level circuit: each gate computes the AND of two wanted input functions.

    ``gates`` holds (value, in1, in2) as table bits in topological order;
    ``target`` is the function delivered at the output.
    """

    num_vars: int
    gates: tuple[tuple[int, int, int], ...]
    target: int

    @property
    def key(self) -> frozenset:
        mask = full_mask(self.num_vars)
        return frozenset((_repb(v, mask), frozenset((a, b))) for v, a, b in self.gates)


def _repb(v: int, mask: int) -> int:
    return v ^ mask if v & 1 else v


def _decode_rows(n: int, rows: np.ndarray, K: int) -> dict[int, list[Skeleton]]:
    mask = full_mask(n)
    base = [TruthTable.var(n, i).bits for i in range(1, n + 1)]
    out: dict[int, dict[frozenset, Skeleton]] = {}
    for row in rows:
        vals = list(base)
        gates = []
        for q in range(K):
            i, j, p = int(row[1 + 3 * q]), int(row[2 + 3 * q]), int(row[3 + 3 * q])
            a = vals[i] ^ mask if p & 1 else vals[i]
            b = vals[j] ^ mask if p & 2 else vals[j]
            v = a & b
            vals.append(v)
            gates.append((v, a, b))
        sk = Skeleton(n, tuple(gates), vals[-1])
        out.setdefault(int(row[0]), {})[sk.key] = sk
    return {rep: list(d.values()) for rep, d in out.items()}

def skeletons(n: int, K: int, reps: set[int] | None = None) -> dict[int, list[Skeleton]]:
    """All distinct function-level circuits with exactly K gates, grouped by output rep."""
    want = np.zeros(1 << (1 << n), np.int8)
    if reps is None:
        want[:] = 1
    else:
        for r in reps:
            want[r] = 1
    dummy = np.zeros((1, 1 + 3 * K), np.int64)
    count = _search.enumerate_exact(n, K, want, dummy, True)
    rows = np.zeros((count, 1 + 3 * K), np.int64)
    _search.enumerate_exact(n, K, want, rows, False)
    return _decode_rows(n, rows, K)


def _read_polarities(sk: Skeleton, target: int) -> dict[int, set[int]]:
    """For each node rep, the set of functions its readers (and the output) want."""
    mask = full_mask(sk.num_vars)
    wants: dict[int, set[int]] = {}
    for _, a, b in sk.gates:
        for w in (a, b):
            wants.setdefault(_repb(w, mask), set()).add(w)
    wants.setdefault(_repb(target, mask), set()).add(target)
    return wants


def realise(sk: Skeleton, kinds: tuple[bool, ...], names: list[VarRef] | None = None) -> Circuit:
    """Explicit circuit for a skeleton; ``kinds[q]`` selects the OR form for gate q."""
    n = sk.num_vars
    mask = full_mask(n)
    names = names or [x(i) for i in range(1, n + 1)]
    lit_bits = [TruthTable.var(n, i).bits for i in range(1, n + 1)]
    used_reps = set()
    for _, a, b in sk.gates:
        used_reps.add(_repb(a, mask))
        used_reps.add(_repb(b, mask))
    used_reps.add(_repb(sk.target, mask))
    gates: dict[int, Gate] = {}
    value: dict[int, int] = {}  # rep -> actual function carried by the node
    node_id: dict[int, int] = {}
    neg_id: dict[int, int] = {}
    nid = 0
    for i, t in enumerate(lit_bits):
        r = _repb(t, mask)
        if r in used_reps:
            gates[nid] = Gate(nid, Kind.INPUT, var=names[i])
            node_id[r] = nid
            value[r] = t
            nid += 1

    def wire(w: int) -> int:
        nonlocal nid
        r = _repb(w, mask)
        if value[r] == w:
            return node_id[r]
        if r not in neg_id:
            gates[nid] = Gate(nid, Kind.NOT, (node_id[r],))
            neg_id[r] = nid
            nid += 1
        return neg_id[r]

    for q, (v, a, b) in enumerate(sk.gates):
        if kinds[q]:
            ins = (wire(a ^ mask), wire(b ^ mask))
            gates[nid] = Gate(nid, Kind.OR, ins)
            carried = v ^ mask
        else:
            ins = (wire(a), wire(b))
            gates[nid] = Gate(nid, Kind.AND, ins)
            carried = v
        r = _repb(v, mask)
        node_id[r] = nid
        value[r] = carried
        nid += 1
    out = wire(sk.target)
    return Circuit(gates, out, check=False)


def realisations(sk: Skeleton, measure: Measure, names: list[VarRef] | None = None) -> list[Circuit]:
    """Every AND/OR realisation; under R only those with the fewest gates overall."""
    k = len(sk.gates)
    circuits = [realise(sk, kinds, names) for kinds in itertools.product((False, True), repeat=k)]
    if measure is Measure.D:
        return circuits
    least = min(size(c, Measure.R) for c in circuits)
    return [c for c in circuits if size(c, Measure.R) == least]


def _optimal_skeletons(tt: TruthTable, measure: Measure, budget: int) -> list[Skeleton]:
    n = tt.num_vars
    mask = full_mask(n)
    cd = exact_cc(tt, Measure.D)
    if cd > budget:
        raise BudgetExceeded(f"optimal size {cd} exceeds enumeration budget {budget}")
    rep = _repb(tt.bits, mask)
    if measure is Measure.D:
        return [Skeleton(n, s.gates, tt.bits) for s in skeletons(n, cd, {rep}).get(rep, [])] if cd else []
    cr = exact_cc(tt, Measure.R)
    out = []
    for k in range(max(cd, 1), cr + 1):
        if k > budget:
            raise BudgetExceeded(f"binary size {k} exceeds enumeration budget {budget}")
        for s in skeletons(n, k, {rep}).get(rep, []):
            s = Skeleton(n, s.gates, tt.bits)
            if min(size(c, Measure.R) for c in realisations(s, Measure.R)) == cr:
                out.append(s)
    return out


def _trivial_circuits(tt: TruthTable, measure: Measure, names: list[VarRef]) -> list[Circuit] | None:
    n = tt.num_vars
    mask = full_mask(n)
    if tt.bits in (0, mask):
        return [Circuit([Gate(0, Kind.CONST, value=1 if tt.bits else 0)], 0)]
    for i in range(1, n + 1):
        t = TruthTable.var(n, i).bits
        if tt.bits == t:
            return [Circuit([Gate(0, Kind.INPUT, var=names[i - 1])], 0)]
        if tt.bits == t ^ mask:
            return [Circuit([Gate(0, Kind.INPUT, var=names[i - 1]), Gate(1, Kind.NOT, (0,))], 1)]
    return None


def enumerate_optimal_circuits(
    tt: TruthTable,
    measure: Measure | str = Measure.D,
    *,
    names: list[VarRef] | None = None,
    budget: int = 7,
) -> list[Circuit]:
    """Every normalized optimal circuit for ``tt`` up to isomorphism, input labels kept."""
    measure = Measure(measure)
    names = names or [x(i) for i in range(1, tt.num_vars + 1)]
    trivial = _trivial_circuits(tt, measure, names)
    if trivial is not None:
        return trivial
    seen: dict[bytes, Circuit] = {}
    for sk in _optimal_skeletons(tt, measure, budget):
        for c in realisations(sk, measure, names):
            seen.setdefault(canonical_form(c), c)
    return [seen[k] for k in sorted(seen)]


def optimal_circuits_for_many(
    n: int, tables: list[int], *, names: list[VarRef] | None = None, budget: int = 7
) -> dict[int, list[Circuit]]:
    """D-optimal circuits for many functions of the same arity, sharing search passes."""
    mask = full_mask(n)
    by_cc: dict[int, set[int]] = {}
    for t in tables:
        c = exact_cc(TruthTable(n, t), Measure.D)
        if c > budget:
            raise BudgetExceeded(f"optimal size {c} exceeds enumeration budget {budget}")
        by_cc.setdefault(c, set()).add(_repb(t, mask))
    out: dict[int, list[Circuit]] = {}
    names = names or [x(i) for i in range(1, n + 1)]
    for k, reps in sorted(by_cc.items()):
        found = skeletons(n, k, reps) if k else {}
        for t in tables:
            if exact_cc(TruthTable(n, t), Measure.D) != k:
                continue
            trivial = _trivial_circuits(TruthTable(n, t), Measure.D, names)
            if trivial is not None:
                out[t] = trivial
                continue
            seen: dict[bytes, Circuit] = {}
            for sk in found.get(_repb(t, mask), []):
                for c in realisations(Skeleton(n, sk.gates, t), Measure.D, names):
                    seen.setdefault(canonical_form(c), c)
            out[t] = [seen[key] for key in sorted(seen)]
    return out


# simple extensions -------------------------------------------------------------------------

def is_simple_extension_bruteforce(f: TruthTable, g: TruthTable, measure: Measure | str = Measure.D) -> bool:
    """The definition checked directly against the complexity oracle."""
    measure = Measure(measure)
    m = g.num_vars - f.num_vars
    if m < 0:
        raise OracleError("g has fewer variables than f")
    if m == 0:
        return g == f
    if not is_nondegenerate(g):
        return False
    if not find_keys(g, f):
        return False
    cf = exact_cc(f, measure)
    cg = exact_cc(g, measure, cap=cf + m)
    return cg == cf + m

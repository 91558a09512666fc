"""The twelve acceptance checks, shared by the test suite and ``cmw selftest``."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import oracle
from .bpis import BpisInstance, block_permutations, circuit_to_witness, verify_instance, witness_to_circuit
from .circuit import Builder, Circuit, Kind, Measure, canonical_form, size, x, y
from .oracle import enumerate_optimal_circuits, exact_cc, is_simple_extension_bruteforce, optimal_circuits_for_many
from .rewrite import check_record, constant_fanout, normalize, replay, substitute_and_normalize
from .solver import SepInstance, candidate_stats, check_witness, solve, witness
from .splice import decode, derive_widgets, encode
from .truthtable import Permutation, TruthTable, apply_perm, find_keys, or_tt, tt_isomorphic, tt_isomorphic_naive, xor_tt
from .xor_catalog import (
    CatalogMeta,
    MATERIALIZE_MAX_N,
    catalog_from_circuits,
    enumerate_open_optimal_xor,
    labeled_closure,
    validate_block_partition,
    variable_reads,
)
from .ytree import extract_ytree_decomposition, find_all_stops_restriction, validate_decomposition

TABLE_BUDGET_S = 300.0
SWEEP_BUDGET_S = 1800.0


@dataclass
class Config:
    measure: Measure = Measure.D
    oracle_max_vars: int = 4
    catalog_max_n: int = 8
    workers: int = 1
    cache_dir: Path | None = None
    seed: int = 2024
    cold_table: bool = True  # rebuild the 4-variable table from scratch to time it

    def __post_init__(self) -> None:
        if self.oracle_max_vars < 1 or self.catalog_max_n < 1 or self.workers < 1:
            raise ValueError("bounds must be positive and workers >= 1")


@dataclass
class Result:
    number: int
    name: str
    status: str  # "pass", "fail", "skipped" or "budget"
    measured: str
    expected: str
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "skipped")

    def line(self) -> str:
        return (f"criterion={self.number} status={self.status} name={self.name} "
                f"measured={self.measured} expected={self.expected} seconds={self.seconds:.1f}")


@dataclass
class Context:
    """Results shared between criteria (the sweep population is reused)."""

    cfg: Config
    bases: dict[str, tuple[TruthTable, CatalogMeta]] = field(default_factory=dict)
    positives: dict[tuple[str, int], list[int]] = field(default_factory=dict)
    sweep_instances: int = 0
    fpt_violations: int = 0
    fpt_seen: dict[tuple[str, int], object] = field(default_factory=dict)


def _sweep_sizes(cfg: Config) -> list[int]:
    return [nv for nv in (3, 4) if nv <= cfg.oracle_max_vars]


def _get_bases(ctx: Context) -> dict[str, tuple[TruthTable, CatalogMeta]]:
    if not ctx.bases:
        f_or = or_tt(2)
        ctx.bases = {
            "XOR_2": (xor_tt(2), enumerate_open_optimal_xor(2)),
            "OR_2": (f_or, catalog_from_circuits(f_or, enumerate_optimal_circuits(f_or))),
        }
    return ctx.bases


# criteria -------------------------------------------------------------------------------------

def c1_schnorr(ctx: Context) -> Result:
    cfg = ctx.cfg
    ns = [n for n in (2, 3, 4) if n <= cfg.oracle_max_vars]
    seconds = 0.0
    if 4 in ns and cfg.cold_table:
        # bypass both caches so the timing covers a from-scratch build
        oracle._TABLES.pop((4, Measure.D), None)
        t0 = time.time()
        oracle.cc_table(4, Measure.D, use_cache=False)
        seconds = time.time() - t0
    values = [exact_cc(xor_tt(n), Measure.D) for n in ns]
    expected = [3 * (n - 1) for n in ns]
    status = "pass" if values == expected else "fail"
    if status == "pass" and seconds > TABLE_BUDGET_S:
        status = "budget"
    if status == "pass" and len(ns) < 3:
        status = "skipped"
    timing = f",table4={seconds:.0f}s" if seconds else ""
    return Result(1, "schnorr_exact", status, ",".join(map(str, values)) + timing,
                  ",".join(map(str, expected)) + f",table4<={TABLE_BUDGET_S:.0f}s")


def c2_structure(ctx: Context) -> Result:
    circuits = enumerate_optimal_circuits(xor_tt(3), Measure.D)
    partition_fail = sum(validate_block_partition(c) is None for c in circuits)
    closure = labeled_closure(enumerate_open_optimal_xor(3))
    same = set(closure) == {canonical_form(c) for c in circuits}
    ok = partition_fail == 0 and same
    return Result(2, "xor3_structure", "pass" if ok else "fail",
                  f"circuits={len(circuits)},partition_failures={partition_fail},closure_equal={same}",
                  "partition_failures=0,closure_equal=True")


def c3_read_twice(ctx: Context) -> Result:
    cfg = ctx.cfg
    top = min(4, cfg.catalog_max_n, MATERIALIZE_MAX_N)
    bad = checked = 0
    for n in range(2, top + 1):
        cat = enumerate_open_optimal_xor(n)
        names = [x(i) for i in range(1, n + 1)]
        for oc in cat.classes:
            c = oc.label(names)
            if any(v != 2 for v in variable_reads(c).values()):
                bad += 1
            for v in names:
                for b in (0, 1):
                    out, _ = substitute_and_normalize(c, {v: b})
                    checked += 1
                    const = out.gates[out.output].kind is Kind.CONST
                    if size(c) - size(out) != 3 or const:
                        bad += 1
    status = "pass" if bad == 0 else "fail"
    if status == "pass" and top < 4:
        status = "skipped"
    return Result(3, "read_twice_rate_limit", status, f"violations={bad},restrictions={checked},max_n={top}",
                  "violations=0")


def c4_solver(ctx: Context) -> Result:
    cfg = ctx.cfg
    t0 = time.time()
    disagree = total = 0
    for name, (f, cat) in _get_bases(ctx).items():
        for nv in _sweep_sizes(cfg):
            pos = []
            for g in range(1 << (1 << nv)):
                inst = SepInstance(2, f, TruthTable(nv, g), Measure.D, cat)
                a = solve(inst)
                b = is_simple_extension_bruteforce(f, inst.g, Measure.D)
                total += 1
                if a != b:
                    disagree += 1
                if b:
                    pos.append(g)
                st = candidate_stats(inst)
                ctx.fpt_seen[(name, nv)] = st
                if not st.within_budget:
                    ctx.fpt_violations += 1
            ctx.positives[(name, nv)] = pos
    ctx.sweep_instances = total
    secs = time.time() - t0
    status = "pass" if disagree == 0 else "fail"
    if status == "pass" and secs > SWEEP_BUDGET_S:
        status = "budget"
    if status == "pass" and 4 not in _sweep_sizes(cfg):
        status = "skipped"
    npos = sum(len(v) for v in ctx.positives.values())
    return Result(4, "solver_vs_bruteforce", status, f"instances={total},disagreements={disagree},positives={npos}",
                  "disagreements=0")


def _need_sweep(ctx: Context) -> None:
    if not ctx.positives:
        c4_solver(ctx)


def c5_witness(ctx: Context) -> Result:
    _need_sweep(ctx)
    bad = total = 0
    for (name, nv), gs in ctx.positives.items():
        f, cat = _get_bases(ctx)[name]
        for g in gs:
            inst = SepInstance(2, f, TruthTable(nv, g), Measure.D, cat)
            w = witness(inst)
            total += 1
            if w is None or not all(check_witness(inst, *w).values()):
                bad += 1
    return Result(5, "witness_recheck", "pass" if bad == 0 else "fail", f"witnesses={total},failures={bad}",
                  "failures=0")


def _population(ctx: Context):
    """Every optimal circuit of every positive instance, with its base and keys."""
    _need_sweep(ctx)
    for (name, nv), gs in sorted(ctx.positives.items()):
        f, _ = _get_bases(ctx)[name]
        names = [x(1), x(2)] + [y(i) for i in range(1, nv - 1)]
        circuits = optimal_circuits_for_many(nv, gs, names=names)
        for g in gs:
            tt = TruthTable(nv, g)
            keys = find_keys(tt, f)
            for G in circuits[g]:
                yield f, nv - 2, keys, G


def c6_c7_ytree_and_splice(ctx: Context) -> tuple[Result, Result]:
    t0 = time.time()
    total = dec_fail = rt_fail = 0
    for f, m, keys, G in _population(ctx):
        total += 1
        try:
            D = extract_ytree_decomposition(G, 2, m, f, keys)
            check = validate_decomposition(G, D, 2, m)
            if not (check and check.total):
                dec_fail += 1
                continue
        except ValueError:
            dec_fail += 1
            continue
        try:
            rho = find_all_stops_restriction(G, f, keys)
            F = replay(G, rho)
            if canonical_form(decode(F, encode(G, F, D, rho))) != canonical_form(G):
                rt_fail += 1
        except ValueError:
            rt_fail += 1
    secs = time.time() - t0
    skipped = 4 not in _sweep_sizes(ctx.cfg)
    r6 = Result(6, "ytree_total", "skipped" if skipped and not dec_fail else ("pass" if dec_fail == 0 else "fail"),
                f"circuits={total},failures={dec_fail}", "failures=0", secs)
    r7 = Result(7, "splice_roundtrip", "skipped" if skipped and not rt_fail else ("pass" if rt_fail == 0 else "fail"),
                f"circuits={total},failures={rt_fail}", "failures=0", secs)
    return r6, r7


def random_circuit(rng: random.Random, max_gates: int = 12, max_consts: int = 4, nvars: int = 4) -> Circuit:
    """Random circuit whose gates all reach the output."""
    while True:
        b = Builder()
        pool = [b.input(x(i)) for i in range(1, nvars + 1)]
        pool += [b.const(rng.randint(0, 1)) for _ in range(rng.randint(0, max_consts))]
        for _ in range(rng.randint(1, max_gates)):
            kind = rng.choice((Kind.AND, Kind.OR, Kind.NOT))
            if kind is Kind.NOT:
                pool.append(b.not_(rng.choice(pool)))
            else:
                a, c = rng.sample(pool, 2)
                pool.append(b.and_(a, c) if kind is Kind.AND else b.or_(a, c))
        full = b.build(pool[-1])
        keep = full.reachable()
        return Circuit({g: full.gates[g] for g in keep}, full.output)


def c8_normalization(ctx: Context, count: int = 10_000) -> Result:
    rng = random.Random(ctx.cfg.seed)
    bad = 0
    for _ in range(count):
        c = random_circuit(rng)
        out, rec = normalize(c)
        single_const = len(out.gates) == 1 and next(iter(out.gates.values())).kind is Kind.CONST
        drop_ok = single_const or size(c) - size(out) >= constant_fanout(c)
        rc = check_record(c, rec)
        if not (drop_ok and rc["terminal"] and rc["layered"]):
            bad += 1
    return Result(8, "normalization", "pass" if bad == 0 else "fail", f"circuits={count},violations={bad},seed={ctx.cfg.seed}",
                  "violations=0")


def c9_widgets(ctx: Context) -> Result:
    k = len(derive_widgets())
    return Result(9, "widget_count", "pass" if k == 4 else "fail", f"widgets={k}", "widgets=4")


def c10_bpis(ctx: Context, samples: int = 50) -> Result:
    rng = random.Random(ctx.cfg.seed)
    bad = checked = 0
    insts = [BpisInstance(1, frozenset(e)) for e in (set(), {(1, 1, 1, 1)})]
    all_edges = [(j, k, a, b) for j in (1, 2) for k in (1, 2) for a in (1, 2) for b in (1, 2)]
    insts += [BpisInstance(2, frozenset({e})) for e in all_edges]
    insts += [BpisInstance(2, frozenset(rng.sample(all_edges, rng.randint(0, 8)))) for _ in range(samples)]
    for inst in insts:
        checked += 1
        if not all(verify_instance(inst).values()):
            bad += 1
    trips = 0
    for n in (1, 2, 3):
        for pi in block_permutations(n):
            trips += 1
            if circuit_to_witness(witness_to_circuit(pi, n), n) != pi:
                bad += 1
    return Result(10, "bpis_soundness", "pass" if bad == 0 else "fail",
                  f"instances={checked},round_trips={trips},failures={bad},seed={ctx.cfg.seed}", "failures=0")


def c11_fpt(ctx: Context) -> Result:
    from .solver import C_BUDGET

    _need_sweep(ctx)
    worst = max((st.decoded / st.bound for st in ctx.fpt_seen.values()), default=0.0)
    status = "pass" if ctx.fpt_violations == 0 else "fail"
    if status == "pass" and 4 not in _sweep_sizes(ctx.cfg):
        status = "skipped"
    return Result(11, "fpt_budget", status,
                  f"instances={ctx.sweep_instances},violations={ctx.fpt_violations},c={C_BUDGET},worst_ratio={worst:.3f}",
                  "violations=0")


def c12_isomorphism(ctx: Context, samples: int = 1000) -> Result:
    bad = pairs = 0
    for a in range(256):
        ta = TruthTable(3, a)
        for b in range(256):
            tb = TruthTable(3, b)
            pairs += 1
            if tt_isomorphic(ta, tb) != tt_isomorphic_naive(ta, tb):
                bad += 1
    rng = random.Random(ctx.cfg.seed)
    for k in range(samples):
        ta = TruthTable(4, rng.getrandbits(16))
        if k % 2:
            tb = apply_perm(ta, Permutation(tuple(rng.sample(range(1, 5), 4))))
        else:
            tb = TruthTable(4, rng.getrandbits(16))
        pairs += 1
        if tt_isomorphic(ta, tb) != tt_isomorphic_naive(ta, tb):
            bad += 1
    return Result(12, "tt_isomorphism", "pass" if bad == 0 else "fail", f"pairs={pairs},mismatches={bad}",
                  "mismatches=0")


def run_all(cfg: Config | None = None, only: set[int] | None = None,
            report: Callable[[Result], None] | None = None) -> list[Result]:
    ctx = Context(cfg or Config())
    steps: list[tuple[tuple[int, ...], Callable]] = [
        ((1,), c1_schnorr), ((2,), c2_structure), ((3,), c3_read_twice), ((4,), c4_solver),
        ((5,), c5_witness), ((6, 7), c6_c7_ytree_and_splice), ((8,), c8_normalization),
        ((9,), c9_widgets), ((10,), c10_bpis), ((11,), c11_fpt), ((12,), c12_isomorphism),
    ]
    out = []
    for nums, fn in steps:
        if only is not None and not set(nums) & only:
            continue
        t0 = time.time()
        res = fn(ctx)
        res = res if isinstance(res, tuple) else (res,)
        for r in res:
            if not r.seconds:
                r.seconds = time.time() - t0
            out.append(r)
            if report:
                report(r)
    return out

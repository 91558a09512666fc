"""Command-line front end: ``cmw <command> ...``.

Exit codes: 0 for success or a yes answer, 1 for a no answer or a failed
check, 2 for usage and input errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import acceptance
from .bpis import BpisInstance, brute_solve_bpis, reduce, verify_instance, witness_to_circuit
from .circuit import Circuit, CircuitError, Measure, VarRef, evaluate, format_bcir, parse_bcir, size, truth_table, var_order
from .oracle import BudgetExceeded, enumerate_optimal_circuits, exact_cc, is_simple_extension_bruteforce
from .rewrite import normalize, substitute_and_normalize
from .solver import SepInstance, solve, witness
from .splice import SpliceCode, decode
from .truthtable import TruthTable, find_keys, parse_table, xor_tt
from .xor_catalog import (
    CatalogMeta,
    catalog_from_circuits,
    enumerate_open_optimal_xor,
    format_catalog,
    load_catalog,
    validate_block_partition,
)
from .ytree import extract_ytree_decomposition

YES, NO, USAGE = 0, 1, 2


class InputError(Exception):
    pass


# helpers --------------------------------------------------------------------------------------

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _circuit(path: str) -> tuple[Circuit, list[VarRef]]:
    c, inputs = parse_bcir(_read(path))
    return c, inputs or sorted(c.variables())


def _table(arg: str) -> TruthTable:
    """A table given inline or as a file holding one line."""
    text = arg if set(arg) <= set("01") and arg else _read(arg)
    tt = parse_table(text)
    if not isinstance(tt, TruthTable):
        raise InputError("a fully specified table is required")
    return tt


def _assignment(text: str) -> dict[VarRef, int]:
    out = {}
    for part in filter(None, text.split(",")):
        name, _, val = part.partition("=")
        if val not in ("0", "1"):
            raise InputError(f"bad assignment {part!r}")
        out[VarRef.parse(name.strip())] = int(val)
    return out


def _order(c: Circuit, inputs: list[VarRef], text: str | None) -> list[VarRef]:
    if text:
        return [VarRef.parse(t) for t in text.split(",")]
    return inputs


def _catalog_for(f: TruthTable, measure: Measure, path: str | None) -> CatalogMeta:
    if path:
        return load_catalog(path)
    if f == xor_tt(f.num_vars):
        return enumerate_open_optimal_xor(f.num_vars, measure)
    return catalog_from_circuits(f, enumerate_optimal_circuits(f, measure), measure)


def _config(args) -> acceptance.Config:
    return acceptance.Config(
        measure=Measure(args.measure),
        oracle_max_vars=args.oracle_max_vars,
        catalog_max_n=args.catalog_max_n,
        workers=args.workers,
        cache_dir=Path(args.cache_dir) if args.cache_dir else None,
        seed=args.seed,
        cold_table=not args.warm_table,
    )


# commands -------------------------------------------------------------------------------------

def cmd_eval(args) -> int:
    c, _ = _circuit(args.circuit)
    print(f"value={evaluate(c, _assignment(args.assign))}")
    return YES


def cmd_tt(args) -> int:
    c, inputs = _circuit(args.circuit)
    print(f"tt={truth_table(c, _order(c, inputs, args.order))}")
    return YES


def _emit_rewrite(before: Circuit, after: Circuit, record, inputs, args) -> None:
    sys.stdout.write(format_bcir(after, [v for v in inputs if v in after.variables()]))
    print(f"eliminated={size(before, args.measure) - size(after, args.measure)}")
    if args.record:
        Path(args.record).write_text(record.format())


def cmd_normalize(args) -> int:
    c, inputs = _circuit(args.circuit)
    out, rec = normalize(c)
    _emit_rewrite(c, out, rec, inputs, args)
    return YES


def cmd_restrict(args) -> int:
    c, inputs = _circuit(args.circuit)
    out, rec = substitute_and_normalize(c, _assignment(args.assign))
    _emit_rewrite(c, out, rec, inputs, args)
    return YES


def cmd_cc_oracle(args) -> int:
    tt = _table(args.table)
    if tt.num_vars > args.oracle_max_vars:
        raise InputError(f"table has {tt.num_vars} variables; oracle_max_vars={args.oracle_max_vars}")
    try:
        print(f"cc={exact_cc(tt, args.measure)}")
    except BudgetExceeded as exc:
        print(f"cc=unknown reason={str(exc).replace(' ', '_')}")
        return NO
    return YES


def cmd_enumerate_optimal(args) -> int:
    tt = _table(args.table)
    circuits = enumerate_optimal_circuits(tt, args.measure)
    print(f"count={len(circuits)}")
    for k, c in enumerate(circuits):
        print(f"# circuit {k}")
        sys.stdout.write(format_bcir(c))
    return YES


def cmd_xor_catalog(args) -> int:
    n = args.n
    if n > args.catalog_max_n:
        raise InputError(f"n={n} exceeds catalog_max_n={args.catalog_max_n}")
    text = format_catalog(enumerate_open_optimal_xor(n, args.measure))
    if args.out:
        Path(args.out).write_text(text)
        print(f"catalog={args.out}")
    else:
        sys.stdout.write(text)
    return YES


def cmd_validate_xor_structure(args) -> int:
    c, _ = _circuit(args.circuit)
    blocks = validate_block_partition(c)
    if blocks is None:
        print("partition=none")
        return NO
    print(f"partition=found blocks={len(blocks)}")
    for b in blocks:
        a, c, out = b.binary
        print(f"block gates={a},{c},{out} inputs={b.input_wires[0]},{b.input_wires[1]} output={b.output_wire} parity={b.parity}")
    return YES


def cmd_ytree_decompose(args) -> int:
    G, _ = _circuit(args.circuit)
    f = _table(args.f)
    n = f.num_vars
    nv = len(G.variables())
    g = truth_table(G, var_order(n, nv - n))
    keys = find_keys(g, f)
    try:
        D = extract_ytree_decomposition(G, n, nv - n, f, keys)
    except ValueError as exc:
        print(f"decomposition=none reason={str(exc).replace(' ', '_')}")
        return NO
    print(f"weight={D.weight}")
    sys.stdout.write(D.format())
    return YES


def cmd_splice_decode(args) -> int:
    F, _ = _circuit(args.base)
    E = SpliceCode.parse(_read(args.code))
    G = decode(F, E, measure=args.measure)
    sys.stdout.write(format_bcir(G))
    return YES


def cmd_sep_solve(args) -> int:
    f, g = _table(args.f), _table(args.g)
    measure = Measure(args.measure)
    inst = SepInstance(f.num_vars, f, g, measure, _catalog_for(f, measure, args.catalog))
    answer = solve(inst)
    print(f"answer={'yes' if answer else 'no'}")
    code = YES if answer else NO
    if answer and args.witness:
        circuit, pi = witness(inst)
        order = var_order(inst.n, inst.m)
        # relabel so the written circuit computes g itself
        named = circuit.relabel({order[i - 1]: order[pi(i) - 1] for i in range(1, len(order) + 1)})
        Path(args.witness).write_text(format_bcir(named, order))
        print(f"witness={args.witness}")
    if args.verify_exhaustive:
        brute = is_simple_extension_bruteforce(f, g, measure)
        agree = brute == answer
        print(f"bruteforce={'yes' if brute else 'no'} agree={'true' if agree else 'false'}")
        if not agree:
            code = NO
    return code


def cmd_bpis_reduce(args) -> int:
    print(reduce(BpisInstance.parse(_read(args.instance))))
    return YES


def cmd_bpis_solve(args) -> int:
    inst = BpisInstance.parse(_read(args.instance))
    pi = brute_solve_bpis(inst)
    if pi is None:
        print("answer=no")
        return NO
    print(f"answer=yes perm={','.join(map(str, pi.images))}")
    if args.witness:
        Path(args.witness).write_text(format_bcir(witness_to_circuit(pi, inst.n)))
        print(f"witness={args.witness}")
    return YES


def cmd_bpis_verify(args) -> int:
    res = verify_instance(BpisInstance.parse(_read(args.instance)))
    for k, v in res.items():
        print(f"{k}={'true' if v else 'false'}")
    return YES if all(res.values()) else NO


def cmd_selftest(args) -> int:
    only = {int(t) for t in args.only.split(",")} if args.only else None
    print(f"seed={args.seed}")
    results = acceptance.run_all(_config(args), only, report=lambda r: print(r.line(), flush=True))
    failed = [r for r in results if not r.ok]
    print(f"summary passed={len(results) - len(failed)} failed={len(failed)}")
    return YES if not failed else NO


# parser ---------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--measure", choices=["D", "R"], default="D")
    common.add_argument("--oracle-max-vars", type=int, default=4)
    common.add_argument("--catalog-max-n", type=int, default=8)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--cache-dir", default=None, help="overrides CMW_CACHE_DIR")
    common.add_argument("--seed", type=int, default=2024)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cmw", description="Circuit minimization tools for simple extensions.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, fn, help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = add("eval", cmd_eval, "evaluate a circuit on an assignment")
    sp.add_argument("circuit")
    sp.add_argument("--assign", required=True, help="e.g. x1=1,x2=0")

    sp = add("tt", cmd_tt, "print a circuit's truth table")
    sp.add_argument("circuit")
    sp.add_argument("--order", help="comma-separated variable order")

    sp = add("normalize", cmd_normalize, "normalize a circuit")
    sp.add_argument("circuit")
    sp.add_argument("--record", help="write the restriction record here")

    sp = add("restrict", cmd_restrict, "substitute variables and normalize")
    sp.add_argument("circuit")
    sp.add_argument("--assign", required=True)
    sp.add_argument("--record")

    sp = add("cc-oracle", cmd_cc_oracle, "exact circuit complexity of a table")
    sp.add_argument("table", help="table string or file")

    sp = add("enumerate-optimal", cmd_enumerate_optimal, "all optimal circuits of a table")
    sp.add_argument("table")

    sp = add("xor-catalog", cmd_xor_catalog, "open catalog of optimal XOR circuits")
    sp.add_argument("n", type=int)
    sp.add_argument("--out")

    sp = add("validate-xor-structure", cmd_validate_xor_structure, "find an XOR block partition")
    sp.add_argument("circuit")

    sp = add("ytree-decompose", cmd_ytree_decompose, "Y-tree decomposition of an extension circuit")
    sp.add_argument("circuit")
    sp.add_argument("--f", required=True, help="base function table")

    sp = add("splice-decode", cmd_splice_decode, "apply a splice code to a base circuit")
    sp.add_argument("code")
    sp.add_argument("--base", required=True)

    sp = add("sep-solve", cmd_sep_solve, "decide whether g is a simple extension of f")
    sp.add_argument("--f", required=True)
    sp.add_argument("--g", required=True)
    sp.add_argument("--catalog")
    sp.add_argument("--witness", help="write a witness circuit here")
    sp.add_argument("--verify-exhaustive", action="store_true")

    sp = add("bpis-reduce", cmd_bpis_reduce, "partial table for a BPIS instance")
    sp.add_argument("instance")

    sp = add("bpis-solve", cmd_bpis_solve, "brute-force a BPIS instance")
    sp.add_argument("instance")
    sp.add_argument("--witness")

    sp = add("bpis-verify", cmd_bpis_verify, "check the reduction on one instance")
    sp.add_argument("instance")

    sp = add("selftest", cmd_selftest, "run the acceptance suite")
    sp.add_argument("--only", help="comma-separated criterion numbers")
    sp.add_argument("--warm-table", action="store_true", help="reuse the cached 4-variable table instead of timing a rebuild")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    if args.cache_dir:
        os.environ["CMW_CACHE_DIR"] = args.cache_dir
    if min(args.oracle_max_vars, args.catalog_max_n, args.workers) < 1:
        print("error: bounds must be positive and workers >= 1", file=sys.stderr)
        return USAGE
    try:
        return args.func(args)
    except (InputError, CircuitError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Gate elimination, garbage collection, substitution and normalization.

Rule table (id, name, pattern, result):

==  ==============  =================  ======
 0  FIX_AND_L       0 & g              0
 1  FIX_AND_R       g & 0              0
 2  FIX_OR_L        1 | g              1
 3  FIX_OR_R        g | 1              1
 4  FIX_NOT_0       ~0                 1
 5  FIX_NOT_1       ~1                 0
 6  PASS_AND_L      1 & g              g
 7  PASS_AND_R      g & 1              g
 8  PASS_OR_L       0 | g              g
 9  PASS_OR_R       g | 0              g
10  RESOLVE_AND     g & ~g             0
11  RESOLVE_AND_N   ~g & g             0
12  RESOLVE_OR      g | ~g             1
13  RESOLVE_OR_N    ~g | g             1
14  PRUNE_AND       g & g              g
15  PRUNE_OR        g | g              g
16  PRUNE_NOT       ~~g                g
==  ==============  =================  ======

Bindings name the gates playing each pattern role: ``alpha`` (main
connective), ``gamma`` (matched node), ``kappa`` (constant) and ``nu`` (the
inner negation of resolving rules and of ``~~g``).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .circuit import Circuit, Gate, Kind, VarRef, depths, size


class Category(str, Enum):
    FIXING = "fixing"
    PASSING = "passing"
    RESOLVING = "resolving"
    PRUNING = "pruning"


@dataclass(frozen=True)
class Rule:
    id: int
    name: str
    category: Category
    kind: Kind
    result: int | str  # constant bit or "gamma"


_C = Category
RULES: tuple[Rule, ...] = (
    Rule(0, "FIX_AND_L", _C.FIXING, Kind.AND, 0),
    Rule(1, "FIX_AND_R", _C.FIXING, Kind.AND, 0),
    Rule(2, "FIX_OR_L", _C.FIXING, Kind.OR, 1),
    Rule(3, "FIX_OR_R", _C.FIXING, Kind.OR, 1),
    Rule(4, "FIX_NOT_0", _C.FIXING, Kind.NOT, 1),
    Rule(5, "FIX_NOT_1", _C.FIXING, Kind.NOT, 0),
    Rule(6, "PASS_AND_L", _C.PASSING, Kind.AND, "gamma"),
    Rule(7, "PASS_AND_R", _C.PASSING, Kind.AND, "gamma"),
    Rule(8, "PASS_OR_L", _C.PASSING, Kind.OR, "gamma"),
    Rule(9, "PASS_OR_R", _C.PASSING, Kind.OR, "gamma"),
    Rule(10, "RESOLVE_AND", _C.RESOLVING, Kind.AND, 0),
    Rule(11, "RESOLVE_AND_N", _C.RESOLVING, Kind.AND, 0),
    Rule(12, "RESOLVE_OR", _C.RESOLVING, Kind.OR, 1),
    Rule(13, "RESOLVE_OR_N", _C.RESOLVING, Kind.OR, 1),
    Rule(14, "PRUNE_AND", _C.PRUNING, Kind.AND, "gamma"),
    Rule(15, "PRUNE_OR", _C.PRUNING, Kind.OR, "gamma"),
    Rule(16, "PRUNE_NOT", _C.PRUNING, Kind.NOT, "gamma"),
)
RULE_BY_NAME = {r.name: r for r in RULES}
ROLES = ("alpha", "gamma", "kappa", "nu")

# When True every Ge application is checked against the fanout-update table.
CHECK_FANOUT = False


class RewriteError(ValueError):
    pass


# steps --------------------------------------------------------------------------------

@dataclass(frozen=True)
class Gc:
    gate: int

    def __str__(self) -> str:
        return f"GC {self.gate}"


@dataclass(frozen=True)
class Ge:
    rule: int
    binding: tuple[tuple[str, int], ...]

    @classmethod
    def make(cls, rule: int, **roles: int) -> Ge:
        return cls(rule, tuple(sorted(roles.items(), key=lambda kv: ROLES.index(kv[0]))))

    @property
    def roles(self) -> dict[str, int]:
        return dict(self.binding)

    @property
    def alpha(self) -> int:
        return self.roles["alpha"]

    def __str__(self) -> str:
        return f"GE {RULES[self.rule].name} " + " ".join(f"{k}={v}" for k, v in self.binding)


@dataclass(frozen=True)
class Sub:
    cls: str
    index: int
    value: int

    @property
    def var(self) -> VarRef:
        return VarRef(self.cls, self.index)

    def __str__(self) -> str:
        return f"SUB {self.cls} {self.index} {self.value}"


Step = Gc | Ge | Sub


@dataclass
class Restriction:
    steps: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __add__(self, other: Restriction) -> Restriction:
        return Restriction(self.steps + other.steps)

    @property
    def is_simplification(self) -> bool:
        return not any(isinstance(s, Sub) for s in self.steps)

    def ge_steps(self) -> list[Ge]:
        return [s for s in self.steps if isinstance(s, Ge)]

    def format(self) -> str:
        return "".join(str(s) + "\n" for s in self.steps)

    @classmethod
    def parse(cls, text: str) -> Restriction:
        steps: list = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "GC":
                steps.append(Gc(int(parts[1])))
            elif parts[0] == "SUB":
                steps.append(Sub(parts[1], int(parts[2]), int(parts[3])))
            elif parts[0] == "GE":
                rule = RULE_BY_NAME[parts[1]].id
                roles = dict(p.split("=") for p in parts[2:])
                steps.append(Ge.make(rule, **{k: int(v) for k, v in roles.items()}))
            else:
                raise RewriteError(f"unknown step {parts[0]!r}")
        return cls(steps)


# mutable working copy ---------------------------------------------------------------------

class _Work:
    """Mutable circuit used inside rewriting; readers tracked with multiplicity."""

    __slots__ = ("gates", "output", "nread")

    def __init__(self, circuit: Circuit):
        self.gates: dict[int, Gate] = dict(circuit.gates)
        self.output = circuit.output
        self.nread: Counter = Counter()
        for g in self.gates.values():
            for a in g.inputs:
                self.nread[a] += 1

    def freeze(self) -> Circuit:
        return Circuit(self.gates, self.output, check=False)

    def fo(self, gid: int) -> int:
        """Fanout counting the output designation as one extra wire."""
        return self.nread[gid] + (1 if gid == self.output else 0)

    def set_gate(self, gate: Gate) -> None:
        old = self.gates.get(gate.id)
        if old is not None:
            for a in old.inputs:
                self.nread[a] -= 1
        for a in gate.inputs:
            self.nread[a] += 1
        self.gates[gate.id] = gate

    def delete(self, gid: int) -> None:
        for a in self.gates[gid].inputs:
            self.nread[a] -= 1
        del self.gates[gid]
        self.nread.pop(gid, None)

    def redirect(self, old: int, new: int) -> None:
        for gid, g in list(self.gates.items()):
            if old in g.inputs:
                self.set_gate(Gate(gid, g.kind, tuple(new if a == old else a for a in g.inputs), g.value, g.var))
        if self.output == old:
            self.output = new

    def collectable(self, gid: int) -> bool:
        return gid in self.gates and gid != self.output and self.nread[gid] == 0

    def collect(self, seeds: Iterable[int], steps: list) -> None:
        queue = list(seeds)
        while queue:
            gid = queue.pop(0)
            if self.collectable(gid):
                ins = self.gates[gid].inputs
                self.delete(gid)
                steps.append(Gc(gid))
                for a in ins:
                    if a not in queue:
                        queue.append(a)

    def collect_all(self, steps: list) -> None:
        while True:
            dead = sorted(g for g in self.gates if self.collectable(g))
            if not dead:
                return
            self.collect(dead[:1], steps)


def _const(w: _Work, gid: int) -> int | None:
    g = w.gates[gid]
    return g.value if g.kind is Kind.CONST else None


def _is_not_of(w: _Work, neg: int, target: int) -> bool:
    g = w.gates[neg]
    return g.kind is Kind.NOT and g.inputs[0] == target


def _matches_at(w: _Work, a: int) -> list[tuple[int, dict[str, int]]]:
    g = w.gates[a]
    out: list[tuple[int, dict[str, int]]] = []
    if g.kind is Kind.NOT:
        (c,) = g.inputs
        v = _const(w, c)
        if v is not None:
            out.append((4 if v == 0 else 5, {"alpha": a, "kappa": c}))
        inner = w.gates[c]
        if inner.kind is Kind.NOT:
            out.append((16, {"alpha": a, "nu": c, "gamma": inner.inputs[0]}))
        return out
    if not g.kind.binary:
        return out
    l, r = g.inputs
    is_and = g.kind is Kind.AND
    absorbing = 0 if is_and else 1
    vl, vr = _const(w, l), _const(w, r)
    if vl is not None:
        rid = (0 if is_and else 2) if vl == absorbing else (6 if is_and else 8)
        out.append((rid, {"alpha": a, "kappa": l, "gamma": r}))
    if vr is not None:
        rid = (1 if is_and else 3) if vr == absorbing else (7 if is_and else 9)
        out.append((rid, {"alpha": a, "gamma": l, "kappa": r}))
    if _is_not_of(w, r, l):
        out.append((10 if is_and else 12, {"alpha": a, "gamma": l, "nu": r}))
    if _is_not_of(w, l, r):
        out.append((11 if is_and else 13, {"alpha": a, "nu": l, "gamma": r}))
    if l == r:
        out.append((14 if is_and else 15, {"alpha": a, "gamma": l}))
    return out


def _all_matches(w: _Work, depth: Mapping[int, int]) -> list[tuple[int, dict[str, int]]]:
    found = []
    for a in w.gates:
        for rid, b in _matches_at(w, a):
            found.append((-depth.get(a, -1), a, rid, b))
    found.sort(key=lambda t: (t[0], t[1], t[2]))
    return [(rid, b) for _, _, rid, b in found]


def _check_fanout(rule: Rule, roles: dict[str, int], before: dict[str, int], w: _Work) -> None:
    ids = list(roles.values())
    if len(set(ids)) != len(ids):
        return
    after = {k: (w.fo(v) if v in w.gates else 0) for k, v in roles.items()}
    cat = rule.category
    expect: dict[str, int] = {}
    if cat is Category.FIXING:
        expect = {"alpha": before["alpha"], "kappa": before["kappa"] - 1}
        if "gamma" in roles:
            expect["gamma"] = before["gamma"] - 1
    elif cat is Category.PASSING:
        expect = {
            "alpha": 0,
            "kappa": before["kappa"] - 1,
            "gamma": before["gamma"] + before["alpha"] - 1,
        }
    elif cat is Category.RESOLVING:
        expect = {"alpha": before["alpha"], "gamma": before["gamma"] - 1, "nu": before["nu"] - 1}
    else:
        expect = {"alpha": 0}
        if "nu" in roles:
            expect["nu"] = before["nu"] - 1
        if after["gamma"] < before["gamma"] + before["alpha"] - 2:
            raise AssertionError(f"{rule.name}: pruning fanout bound violated")
    for k, v in expect.items():
        if after[k] != v:
            raise AssertionError(f"{rule.name}: fo'({k}) = {after[k]}, table says {v}")


def _apply_ge(w: _Work, step: Ge, steps: list) -> bool:
    """Apply one rule with immediate recursive garbage collection."""
    roles = step.roles
    a = roles.get("alpha")
    if a not in w.gates:
        return False
    if not any(rid == step.rule and b == roles for rid, b in _matches_at(w, a)):
        return False
    rule = RULES[step.rule]
    before = {k: w.fo(v) for k, v in roles.items()} if CHECK_FANOUT else None
    steps.append(step)
    g = w.gates[a]
    if rule.result == "gamma":
        w.redirect(a, roles["gamma"])
        seeds = [a]
    else:
        seeds = list(dict.fromkeys(g.inputs))
        w.set_gate(Gate(a, Kind.CONST, value=int(rule.result)))
    if CHECK_FANOUT:
        # the table describes fanouts once alpha itself is collected
        if rule.result == "gamma":
            if w.collectable(a):
                w.delete(a)
                steps.append(Gc(a))
            seeds = list(dict.fromkeys(g.inputs))
        _check_fanout(rule, roles, before, w)
        w.collect(seeds, steps)
    else:
        w.collect(seeds, steps)
    return True


def _apply_sub(w: _Work, step: Sub, steps: list) -> bool:
    hit = False
    for gid, g in list(w.gates.items()):
        if g.kind is Kind.INPUT and g.var == step.var:
            w.set_gate(Gate(gid, Kind.CONST, value=step.value))
            hit = True
    if hit:
        steps.append(step)
    return hit


def _apply(w: _Work, step, steps: list) -> bool:
    if isinstance(step, Gc):
        if w.collectable(step.gate):
            w.delete(step.gate)
            steps.append(step)
            return True
        return False
    if isinstance(step, Ge):
        # a recorded Ge step is followed by its own Gc steps in records,
        # so replay applies the rule without implicit collection
        return _apply_ge_bare(w, step, steps)
    if isinstance(step, Sub):
        return _apply_sub(w, step, steps)
    raise RewriteError(f"unknown step {step!r}")


def _apply_ge_bare(w: _Work, step: Ge, steps: list) -> bool:
    roles = step.roles
    a = roles.get("alpha")
    if a not in w.gates or not any(rid == step.rule and b == roles for rid, b in _matches_at(w, a)):
        return False
    rule = RULES[step.rule]
    if rule.result == "gamma":
        w.redirect(a, roles["gamma"])
    else:
        w.set_gate(Gate(a, Kind.CONST, value=int(rule.result)))
    steps.append(step)
    return True


def apply_step(circuit: Circuit, step) -> tuple[Circuit, bool]:
    """Apply a single step; no garbage collection beyond the step itself."""
    w = _Work(circuit)
    ok = _apply(w, step, [])
    return (w.freeze(), True) if ok else (circuit, False)


def match_rules(circuit: Circuit) -> list[tuple[int, dict[str, int]]]:
    return _all_matches(_Work(circuit), depths(circuit))


# normalization ------------------------------------------------------------------------------

def _normalize_work(w: _Work, depth: Mapping[int, int], steps: list) -> None:
    w.collect_all(steps)
    while True:
        found = _all_matches(w, depth)
        if not found:
            return
        rid, b = found[0]
        _apply_ge(w, Ge.make(rid, **b), steps)


def normalize(circuit: Circuit) -> tuple[Circuit, Restriction]:
    """Apply rules deepest main connective first, collecting garbage after each."""
    w = _Work(circuit)
    steps: list = []
    _normalize_work(w, depths(circuit), steps)
    return w.freeze(), Restriction(steps)


def substitute_and_normalize(
    circuit: Circuit, assignment: Mapping[VarRef, int], *, depth: Mapping[int, int] | None = None
) -> tuple[Circuit, Restriction]:
    """Substitute variables in ascending order, normalizing after each one."""
    w = _Work(circuit)
    depth = depths(circuit) if depth is None else depth
    steps: list = []
    _normalize_work(w, depth, steps)
    for var in sorted(assignment):
        _apply_sub(w, Sub(var.cls, var.index, int(assignment[var])), steps)
        _normalize_work(w, depth, steps)
    return w.freeze(), Restriction(steps)


def replay(circuit: Circuit, record: Restriction) -> Circuit:
    w = _Work(circuit)
    for k, step in enumerate(record.steps):
        if not _apply(w, step, []):
            raise RewriteError(f"step {k} ({step}) does not apply")
    return w.freeze()


def is_terminal(circuit: Circuit) -> bool:
    w = _Work(circuit)
    if any(w.collectable(g) for g in w.gates):
        return False
    return not _all_matches(w, {})


def record_is_layered(circuit: Circuit, record: Restriction) -> bool:
    """Binary main-connective depths never increase between substitutions."""
    depth = depths(circuit)
    w = _Work(circuit)
    last = None
    for step in record.steps:
        if isinstance(step, Sub):
            last = None
        elif isinstance(step, Ge):
            g = w.gates.get(step.alpha)
            if g is not None and g.kind.binary:
                d = depth.get(step.alpha, -1)
                if last is not None and d > last:
                    return False
                last = d
        _apply(w, step, [])
    return True


def check_record(circuit: Circuit, record: Restriction) -> dict[str, bool]:
    final = replay(circuit, record)
    return {"terminal": is_terminal(final), "layered": record_is_layered(circuit, record)}


def is_normalized(circuit: Circuit) -> bool:
    """Constant-free or a lone constant, every gate reaches the output, and no rule matches."""
    if len(circuit.reachable()) != len(circuit.gates):
        return False
    consts = [g for g in circuit.gates.values() if g.kind is Kind.CONST]
    if consts and len(circuit.gates) != 1:
        return False
    return not match_rules(circuit)


def has_shared_negations(circuit: Circuit) -> bool:
    """True when no gate feeds more than one NOT gate."""
    seen: Counter = Counter()
    for g in circuit.gates.values():
        if g.kind is Kind.NOT:
            seen[g.inputs[0]] += 1
    return all(c <= 1 for c in seen.values())


def is_optimal_normal(circuit: Circuit) -> bool:
    """Normalized in the sense required of optimal circuits under the D measure."""
    return is_normalized(circuit) and has_shared_negations(circuit)


def constant_fanout(circuit: Circuit) -> int:
    readers = circuit.readers()
    return sum(len(readers[gid]) for gid, g in circuit.gates.items() if g.kind is Kind.CONST)


def eliminated(before: Circuit, after: Circuit) -> int:
    return size(before) - size(after)

"""Ground-truth target sets and rediscovery matching.

The extrinsic reward needs a fixed catalogue of target entities per
domain.  Each catalogue is built once per process by replaying
production rules from the seed concepts, then reduced to
path-independent signatures: a definition is identified by category,
arity, and behaviour on a canonical probe set; a statement by its
connective shape over its operands' signatures.  Any derivation route
to the same behaviour earns the same entry, so the catalogue stays
agnostic about construction paths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import domain, rules
from .domain import (
    CAT_CONSTANT,
    CAT_FUNCTION,
    CAT_PREDICATE,
    DOMAIN_FF27,
    DOMAIN_NAT,
    NODE_CONJECTURE,
    NODE_DEFINITION,
    NODE_THEOREM,
)
from .interp import TriBool

SIG_BUDGET = 500_000

# Both catalogues top out at binary definitions.  Wider entities can
# never match an entry, and their probe grids grow exponentially with
# arity, so signature computation stops here.
GT_MAX_DEF_ARITY = 2

# Function outputs beyond this magnitude collapse to one marker: no
# catalogue value comes near it, and signatures must stay serializable
# even when a probe hits an iterated-construction tower.
SIG_VALUE_CAP = 10**9

# entry node-kind requirements
REQ_DEFINITION = "definition"
REQ_CONJECTURE = "conjecture"  # statement discovered, proven or not
REQ_THEOREM = "theorem"  # statement established


def probe_tuples(domain_tag: str, arity: int):
    """Canonical probe set per domain and arity; fixed forever, since
    signatures are compared across graphs."""
    if arity == 0:
        return ((),)
    if domain_tag == DOMAIN_FF27:
        span = 27 if arity <= 2 else 9
    else:
        span = 13 if arity <= 2 else 7
    probes = [()]
    for _ in range(arity):
        probes = [p + (v,) for p in probes for v in range(span)]
    return tuple(probes)


def _plain(x):
    if isinstance(x, (tuple, list)):
        return [_plain(v) for v in x]
    return x


def entity_signature(graph, entity_id: str):
    """Path-independent identity of an entity, as a JSON string, or
    None when the entity has no computable identity."""
    e = graph.entity(entity_id)
    if e.node_kind == NODE_DEFINITION:
        sig = _value_signature(graph, e)
    else:
        sig = _statement_signature(graph, e)
    return None if sig is None else json.dumps(sig, separators=(",", ":"))


def _value_signature(graph, e):
    if e.interpretation is None or e.input_arity > GT_MAX_DEF_ARITY:
        return None
    outs = []
    for probe in probe_tuples(graph.domain_tag, e.input_arity):
        ctx = graph.context(probe, budget=SIG_BUDGET)
        try:
            if e.category == CAT_PREDICATE:
                r = e.interpretation.eval_pred(probe, ctx)
                outs.append({TriBool.TRUE: 1, TriBool.FALSE: 0}.get(r, "?"))
            else:
                value = int(e.interpretation.eval_func(probe, ctx))
                outs.append(value if abs(value) <= SIG_VALUE_CAP else "big")
        except Exception:
            outs.append("!")
    return ["def", e.category, e.input_arity, outs]


def _statement_signature(graph, e):
    step = e.own_step()
    if step is None:
        return None
    operands = []
    for input_id in step.inputs:
        sub = entity_signature(graph, input_id)
        if sub is None:
            return None
        operands.append(sub)
    if step.rule_name == rules.RULE_EQUIVALENCE:
        operands = sorted(operands)  # either statement order, same claim
    return ["stmt", step.rule_name, operands, _plain(step.params)]


@dataclass(frozen=True)
class GTEntry:
    name: str
    requires: str  # definition | conjecture | theorem
    category: str | None
    arity: int
    sig: str
    domain_tag: str

    def to_json(self):
        return {
            "name": self.name,
            "requires": self.requires,
            "category": self.category,
            "arity": self.arity,
            "sig": self.sig,
            "domain_tag": self.domain_tag,
        }


class GroundTruthSet:
    def __init__(self, domain_tag: str, entries):
        self.domain_tag = domain_tag
        self.entries = list(entries)
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("duplicate ground-truth entry names")
        self._by_sig: dict[str, list[GTEntry]] = {}
        for entry in self.entries:
            self._by_sig.setdefault(entry.sig, []).append(entry)
        self._def_shapes = {
            (entry.category, entry.arity)
            for entry in self.entries
            if entry.requires == REQ_DEFINITION
        }

    def __len__(self):
        return len(self.entries)

    def match(self, graph, entity_id: str, claimed=frozenset()):
        """All not-yet-claimed entries this entity satisfies right now."""
        e = graph.entity(entity_id)
        # shape pre-filter: skip the (possibly expensive) signature when
        # nothing in the catalogue could accept this node anyway
        if e.node_kind == NODE_DEFINITION:
            if (e.category, e.input_arity) not in self._def_shapes:
                return []
        elif e.node_kind in (NODE_CONJECTURE, NODE_THEOREM):
            if not any(
                entry.requires != REQ_DEFINITION and entry.name not in claimed
                for entry in self.entries
            ):
                return []
        else:
            return []  # disproven statements match nothing
        sig = entity_signature(graph, entity_id)
        if sig is None:
            return []
        hits = []
        for entry in self._by_sig.get(sig, ()):
            if entry.name in claimed:
                continue
            if entry.requires == REQ_DEFINITION:
                ok = (
                    e.node_kind == NODE_DEFINITION
                    and e.category == entry.category
                    and e.input_arity == entry.arity
                )
            elif entry.requires == REQ_CONJECTURE:
                ok = e.node_kind in (NODE_CONJECTURE, NODE_THEOREM)
            else:
                ok = e.node_kind == NODE_THEOREM
            if ok:
                hits.append(entry)
        return hits

    def to_json(self):
        return {
            "domain_tag": self.domain_tag,
            "entries": [e.to_json() for e in self.entries],
        }


def save_ground_truth(path, gt: GroundTruthSet):
    Path(path).write_text(json.dumps(gt.to_json(), indent=2) + "\n")


def load_ground_truth(path) -> GroundTruthSet:
    obj = json.loads(Path(path).read_text())
    entries = [
        GTEntry(
            d["name"],
            d["requires"],
            d["category"],
            d["arity"],
            d["sig"],
            d["domain_tag"],
        )
        for d in obj["entries"]
    ]
    return GroundTruthSet(obj["domain_tag"], entries)


# --- catalogue construction ------------------------------------------------
#
# Each builder replays rule applications on a scratch graph and records
# the entries.  Statements get a conjecture entry (stating it counts)
# and the established ones also a theorem entry (settling it counts
# again).


class _Recorder:
    def __init__(self, graph):
        self.graph = graph
        self.entries = []

    def apply(self, rule, inputs, **params) -> str:
        action = rules.make_action(rule, inputs, **params)
        return rules.commit_action(self.graph, action)

    def record(self, name, entity_id, theorem=False):
        e = self.graph.entity(entity_id)
        sig = entity_signature(self.graph, entity_id)
        if sig is None:
            raise ValueError(f"catalogue entity {name} has no signature")
        tag = self.graph.domain_tag
        if e.node_kind == NODE_DEFINITION:
            self.entries.append(
                GTEntry(name, REQ_DEFINITION, e.category, e.input_arity, sig, tag)
            )
        else:
            self.entries.append(GTEntry(name, REQ_CONJECTURE, None, 0, sig, tag))
            if theorem:
                self.entries.append(
                    GTEntry(name + "_established", REQ_THEOREM, None, 0, sig, tag)
                )

    def build(self, name, rule, inputs, theorem=False, **params) -> str:
        eid = self.apply(rule, inputs, **params)
        self.record(name, eid, theorem=theorem)
        return eid


def _build_nat() -> GroundTruthSet:
    g = domain.KnowledgeGraph()
    g.instance_store.update(range(13))
    zero = rules.seed_entity(g, "zero", CAT_CONSTANT, 0, value=0)
    succ = rules.seed_entity(
        g,
        "successor",
        CAT_FUNCTION,
        1,
        builtin="nat_successor",
        symbolic="Func(params 1; ReturnExpr x_0 + 1;)",
    )
    eq = rules.seed_entity(
        g,
        "equals",
        CAT_PREDICATE,
        2,
        builtin="equals",
        symbolic="Pred(params 2; ReturnPred x_0 == x_1;)",
    )
    r = _Recorder(g)
    one = r.build("one", "specialize", (succ, zero), index=0)
    two = r.build("two", "specialize", (succ, one), index=0)
    r.build("three", "specialize", (succ, two), index=0)
    add = r.build("addition", "iterate", (succ,))
    mul = r.build("multiplication", "iterate", (add, zero))
    square = r.build("square", "match", (mul,), indices=(0, 1))
    r.build("double", "specialize", (mul, two), index=0)
    divides = r.build("divides", "exists", (mul,), indices=(0,))
    is_even = r.build("is_even", "specialize", (divides, two), index=0)
    r.build("is_odd", "negate", (is_even,))
    leq = r.build("less_or_equal", "exists", (add,), indices=(0,))
    r.build("is_zero", "specialize", (eq, zero), index=0)
    sq_times = r.apply("compose", (mul, square), positions=(0,))
    r.build("cube", "match", (sq_times,), indices=(0, 1))
    tau = r.build("divisor_count", "size", (divides,), indices=(0,))
    eq_tau = r.apply("compose", (eq, tau), positions=(0,))
    r.build("is_prime", "specialize", (eq_tau, two), index=1)
    # statements
    r.build("divides_reflexive", "implication", (eq, divides), theorem=True)
    not_one_div = r.apply("specialize", (divides, one), index=0)
    neg_od = r.apply("negate", (not_one_div,))
    r.build("one_divides_all", "nonexistence", (neg_od,), theorem=True)
    r.build("equal_implies_leq", "implication", (eq, leq), theorem=True)
    add_zero = r.apply("specialize", (add, zero), index=0)
    mul_one = r.apply("specialize", (mul, one), index=0)
    r.build("additive_identity", "equivalence", (add_zero, mul_one), theorem=True)
    return GroundTruthSet(DOMAIN_NAT, r.entries)


def _build_ff() -> GroundTruthSet:
    from .ff import FF27

    g = domain.KnowledgeGraph(DOMAIN_FF27, ff=FF27)
    g.instance_store.update(range(FF27.size))
    zero = rules.seed_entity(g, "zero", CAT_CONSTANT, 0, value=0)
    one = rules.seed_entity(g, "one", CAT_CONSTANT, 0, value=1)
    rules.seed_entity(g, "gen", CAT_CONSTANT, 0, value=FF27.generator)
    add = rules.seed_entity(
        g, "ff_add", CAT_FUNCTION, 2, builtin="ff_add", symbolic="Func(params 2; ReturnExpr x_0 + x_1;)"
    )
    mul = rules.seed_entity(
        g, "ff_mul", CAT_FUNCTION, 2, builtin="ff_mul", symbolic="Func(params 2; ReturnExpr x_0 * x_1;)"
    )
    eq = rules.seed_entity(
        g, "equals", CAT_PREDICATE, 2, builtin="ff_equals", symbolic="Pred(params 2; ReturnPred x_0 == x_1;)"
    )
    r = _Recorder(g)
    r.build("gen_squared", "constant", (), value=FF27.mul(FF27.generator, FF27.generator))
    double = r.build("double", "match", (add,), indices=(0, 1))
    dbl_plus = r.apply("compose", (add, double), positions=(0,))
    triple = r.build("sum_three_times", "match", (dbl_plus,), indices=(0, 1))
    square = r.build("square", "match", (mul,), indices=(0, 1))
    is_zero = r.build("is_zero", "specialize", (eq, zero), index=0)
    r.build("is_one", "specialize", (eq, one), index=0)
    nonzero = r.build("is_nonzero", "negate", (is_zero,))
    ffdiv = r.build("scales_to", "exists", (mul,), indices=(0,))
    has_inv = r.build("has_inverse", "specialize", (ffdiv, one), index=1)
    r.build("is_square", "exists", (square,), indices=(0,))
    # statements
    zero_fn = r.apply("specialize", (mul, zero), index=0)
    r.build("characteristic_three", "equivalence", (triple, zero_fn), theorem=True)
    r.build("inverses_exist", "implication", (nonzero, has_inv), theorem=True)
    return GroundTruthSet(DOMAIN_FF27, r.entries)


_CACHE: dict[str, GroundTruthSet] = {}


def ground_truth_set(domain_tag: str) -> GroundTruthSet:
    if domain_tag not in _CACHE:
        builder = _build_ff if domain_tag == DOMAIN_FF27 else _build_nat
        _CACHE[domain_tag] = builder()
    return _CACHE[domain_tag]

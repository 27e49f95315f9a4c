"""Knowledge graph of definitions, conjectures, theorems and disprovals.

The graph is the whole MDP state: nodes are entities, edges record which
inputs each production consumed, and the instance store accumulates every
domain element seen in an example so later rules can sample candidates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import interp as it
from .errors import (
    ArityMismatch,
    BudgetExceeded,
    DuplicateId,
    EntityInUse,
    UnknownEntity,
    UnknownInput,
)
from .interp import TriBool

NODE_DEFINITION = "Definition"
NODE_CONJECTURE = "Conjecture"
NODE_THEOREM = "Theorem"
NODE_DISPROVEN = "Disproven"

CAT_PREDICATE = "Predicate"
CAT_FUNCTION = "Function"
CAT_CONSTANT = "Constant"

DOMAIN_NAT = "Nat"
DOMAIN_FF27 = "FF27"

GRAPH_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ConstructionStep:
    rule_name: str
    inputs: tuple
    params: tuple = ()  # sorted (key, value) pairs, JSON-serializable

    def to_json(self):
        return {
            "rule": self.rule_name,
            "inputs": list(self.inputs),
            "params": [[k, v] for k, v in self.params],
        }

    @staticmethod
    def from_json(obj):
        return ConstructionStep(
            rule_name=obj["rule"],
            inputs=tuple(obj["inputs"]),
            params=tuple((k, _untuple(v)) for k, v in obj["params"]),
        )


def _untuple(v):
    # JSON round-trips tuples as lists; construction params are hashable.
    if isinstance(v, list):
        return tuple(_untuple(x) for x in v)
    return v


@dataclass
class ProofRecord:
    status: str  # 'Proven' | 'Disproven' | 'Unknown'
    witness: dict | None = None  # variable name -> value, from the solver model
    detail: str = ""

    def to_json(self):
        return {
            "status": self.status,
            "witness": dict(self.witness) if self.witness is not None else None,
            "detail": self.detail,
        }

    @staticmethod
    def from_json(obj):
        w = obj.get("witness")
        return ProofRecord(obj["status"], dict(w) if w is not None else None, obj.get("detail", ""))


@dataclass
class Entity:
    id: str
    name: str
    node_kind: str
    category: str | None  # None for conjectures
    input_arity: int
    output_arity: int
    interpretation: it.Interp | None
    symbolic_def: str  # concrete-syntax DSL text of the local definition
    history: tuple = ()  # full ordered construction history
    step_age: int = 0
    positives: set = field(default_factory=set)
    negatives: set = field(default_factory=set)
    proof: ProofRecord | None = None
    builtin: str | None = None  # registry name for seed interpretations

    @property
    def size(self) -> int:
        return self.input_arity + self.output_arity

    def own_step(self) -> ConstructionStep | None:
        return self.history[-1] if self.history else None


class KnowledgeGraph:
    def __init__(self, domain_tag=DOMAIN_NAT, ff=None):
        self.domain_tag = domain_tag
        self.nodes: dict[str, Entity] = {}
        self.edges: list[tuple[str, str, str]] = []  # (src, dst, rule_name)
        self.step_counter = 0
        self.instance_store: set[int] = set()
        self.ff = ff  # FiniteFieldSpec when domain_tag is FF27
        self._id_counter = 0
        self._signatures: dict[str, tuple] = {}

    # -- identity ----------------------------------------------------------
    def new_id(self) -> str:
        eid = f"e{self._id_counter}"
        self._id_counter += 1
        return eid

    def entity(self, entity_id: str) -> Entity:
        if entity_id not in self.nodes:
            raise UnknownEntity(f"no entity {entity_id!r} in graph")
        return self.nodes[entity_id]

    def by_name(self, name: str) -> Entity:
        for e in self.nodes.values():
            if e.name == name:
                return e
        raise UnknownEntity(f"no entity named {name!r}")

    def definitions(self):
        return [e for e in self.nodes.values() if e.node_kind == NODE_DEFINITION]

    def conjectures(self):
        return [e for e in self.nodes.values() if e.node_kind == NODE_CONJECTURE]

    # -- evaluation contexts -----------------------------------------------
    def context(self, instance=(), budget=it.DEFAULT_STEP_BUDGET) -> it.EvalContext:
        if self.domain_tag == DOMAIN_FF27:
            return it.ff_context(self.ff.size, budget)
        return it.nat_context(instance, budget)


# ---------------------------------------------------------------------------
# operations


def add_entity(graph: KnowledgeGraph, entity: Entity, inputs) -> str:
    """Commit a freshly produced entity, wiring edges from its inputs."""
    if entity.id in graph.nodes:
        raise DuplicateId(f"entity id {entity.id!r} already present")
    for src in inputs:
        if src not in graph.nodes:
            raise UnknownInput(f"input {src!r} not in graph")
    for tup in list(entity.positives) + list(entity.negatives):
        if len(tup) != entity.size:
            raise ArityMismatch(
                f"example tuple {tup!r} does not match entity size {entity.size}"
            )
    graph.step_counter += 1
    entity.step_age = graph.step_counter
    graph.nodes[entity.id] = entity
    rule = entity.own_step().rule_name if entity.own_step() else "seed"
    for src in inputs:
        graph.edges.append((src, entity.id, rule))
    for tup in list(entity.positives) + list(entity.negatives):
        _store_instances(graph, tup)
    return entity.id


# Iterated constructions can compute astronomically large outputs; the
# store feeds quantifier bounds and constant candidates, where such
# values are useless, so only word-sized numbers are kept.
STORE_VALUE_BIT_CAP = 64


def _store_instances(graph: KnowledgeGraph, values):
    graph.instance_store.update(
        v for v in values if v.bit_length() <= STORE_VALUE_BIT_CAP
    )


def classify_instance(graph: KnowledgeGraph, entity_id: str, instance) -> TriBool:
    """Tri-valued membership/value check with example-cache read-through."""
    e = graph.entity(entity_id)
    instance = tuple(instance)
    if len(instance) != e.size:
        raise ArityMismatch(
            f"instance {instance!r} has length {len(instance)}, entity size is {e.size}"
        )
    if instance in e.positives:
        return TriBool.TRUE
    if instance in e.negatives:
        return TriBool.FALSE
    verdict = evaluate_entity(graph, e, instance)
    if verdict is TriBool.TRUE:
        e.positives.add(instance)
        _store_instances(graph, instance)
    elif verdict is TriBool.FALSE:
        e.negatives.add(instance)
        _store_instances(graph, instance)
    return verdict


def evaluate_entity(graph: KnowledgeGraph, e: Entity, instance, budget=it.DEFAULT_STEP_BUDGET) -> TriBool:
    """Evaluate without touching caches."""
    if e.interpretation is None:
        return TriBool.UNKNOWN
    ctx = graph.context(instance, budget)
    try:
        if e.category == CAT_PREDICATE or e.category is None:
            return e.interpretation.eval_pred(instance, ctx)
        inputs = instance[: e.input_arity]
        out = e.interpretation.eval_func(inputs, ctx)
        if out is None:
            return TriBool.UNKNOWN
        return it.tb(tuple([out]) == tuple(instance[e.input_arity :]))
    except BudgetExceeded:
        return TriBool.UNKNOWN


def compute_function(graph: KnowledgeGraph, e: Entity, inputs, budget=it.DEFAULT_STEP_BUDGET):
    """Apply a function entity to concrete inputs; None when undetermined."""
    ctx = graph.context(inputs, budget)
    try:
        return e.interpretation.eval_func(tuple(inputs), ctx)
    except BudgetExceeded:
        return None


# -- canonical probes and signatures ----------------------------------------

NAT_PROBE_RANGE_SMALL = 13  # arities 1..2 probe over 0..12
NAT_PROBE_RANGE_TERNARY = 9  # arity 3 probes over 0..8
NAT_PROBE_RANGE_WIDE = 5  # arity >= 4 (not used by the shipped ground truth)
FF_PROBE_MAX_ARITY = 3


def canonical_probes(domain_tag: str, size: int, ff_size: int = 27):
    if size == 0:
        return [()]
    if domain_tag == DOMAIN_FF27:
        k = min(size, FF_PROBE_MAX_ARITY)
        probes = _product(range(ff_size), k)
        if k < size:
            probes = [p + (0,) * (size - k) for p in probes]
        return probes
    if size <= 2:
        r = NAT_PROBE_RANGE_SMALL
    elif size == 3:
        r = NAT_PROBE_RANGE_TERNARY
    else:
        r = NAT_PROBE_RANGE_WIDE
    return _product(range(r), size)


def _product(values, k):
    out = [()]
    for _ in range(k):
        out = [p + (v,) for p in out for v in values]
    return out


def example_signature(graph: KnowledgeGraph, entity_id: str, probes=None) -> tuple:
    """Canonical behaviour fingerprint used for ground-truth matching.

    Definitions are probed pointwise (read-only: probe results are not
    written back into caches). Closed statements are fingerprinted
    structurally from their kind and their inputs' signatures, which keeps
    matching independent of the construction path.
    """
    e = graph.entity(entity_id)
    if probes is None and entity_id in graph._signatures:
        return graph._signatures[entity_id]
    if e.node_kind != NODE_DEFINITION and e.category is None:
        step = e.own_step()
        parts = [e.history[-1].rule_name if e.history else "statement"]
        if step:
            for src in step.inputs:
                parts.append(example_signature(graph, src))
            parts.append(step.params)
        sig = tuple(parts)
    else:
        pts = probes if probes is not None else canonical_probes(
            graph.domain_tag, e.size, graph.ff.size if graph.ff else 27
        )
        out = []
        for p in pts:
            if p in e.positives:
                out.append(TriBool.TRUE.value)
            elif p in e.negatives:
                out.append(TriBool.FALSE.value)
            else:
                out.append(evaluate_entity(graph, e, p).value)
        sig = tuple(out)
    if probes is None:
        graph._signatures[entity_id] = sig
    return sig


# -- structured queries ------------------------------------------------------

QUERY_KINDS = (
    "ancestors",
    "descendants",
    "construction_depth",
    "in_degree",
    "out_degree",
    "rule_names",
    "step_age",
    "num_concepts",
    "num_conjectures",
    "node_type",
    "category",
    "input_arity",
    "num_component_types",
    "examples",
    "nonexamples",
    "num_construction_inputs",
    "is_proven",
)


def graph_query(graph: KnowledgeGraph, entity_id: str, kind: str):
    if kind not in QUERY_KINDS:
        raise ValueError(f"unknown query kind {kind!r}")
    e = graph.entity(entity_id)
    if kind == "ancestors":
        return sorted(_closure(graph, entity_id, upstream=True))
    if kind == "descendants":
        return sorted(_closure(graph, entity_id, upstream=False))
    if kind == "construction_depth":
        return _depth(graph, entity_id, {})
    if kind == "in_degree":
        return sum(1 for s, d, _ in graph.edges if d == entity_id)
    if kind == "out_degree":
        return sum(1 for s, d, _ in graph.edges if s == entity_id)
    if kind == "rule_names":
        return [s.rule_name for s in e.history]
    if kind == "step_age":
        return e.step_age
    if kind == "num_concepts":
        return sum(1 for n in graph.nodes.values() if n.node_kind == NODE_DEFINITION)
    if kind == "num_conjectures":
        return sum(1 for n in graph.nodes.values() if n.node_kind == NODE_CONJECTURE)
    if kind == "node_type":
        return {
            NODE_DEFINITION: "Concept",
            NODE_CONJECTURE: "Conjecture",
            NODE_THEOREM: "Theorem",
            NODE_DISPROVEN: "Conjecture",
        }[e.node_kind]
    if kind == "category":
        return e.category
    if kind == "input_arity":
        return e.input_arity
    if kind == "num_component_types":
        if not e.positives:
            return 0
        columns = [set() for _ in range(e.size)]
        for tup in e.positives:
            for i, v in enumerate(tup):
                columns[i].add(v)
        return len({frozenset(c) for c in columns})
    if kind == "examples":
        return sorted(e.positives)
    if kind == "nonexamples":
        return sorted(e.negatives)
    if kind == "num_construction_inputs":
        step = e.own_step()
        return len(step.inputs) if step else 0
    if kind == "is_proven":
        return e.node_kind == NODE_THEOREM
    raise AssertionError(kind)


def _closure(graph, entity_id, upstream):
    seen = set()
    frontier = [entity_id]
    while frontier:
        cur = frontier.pop()
        for s, d, _ in graph.edges:
            nxt = None
            if upstream and d == cur:
                nxt = s
            elif not upstream and s == cur:
                nxt = d
            if nxt is not None and nxt not in seen and nxt != entity_id:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _depth(graph, entity_id, memo):
    if entity_id in memo:
        return memo[entity_id]
    parents = [s for s, d, _ in graph.edges if d == entity_id]
    memo[entity_id] = 0 if not parents else 1 + max(_depth(graph, p, memo) for p in parents)
    return memo[entity_id]


def merge_histories(input_entities, step: ConstructionStep) -> tuple:
    """Full construction history: input histories in order, deduplicated,
    followed by the new step."""
    seen = set()
    out = []
    for e in input_entities:
        for s in e.history:
            if s not in seen:
                seen.add(s)
                out.append(s)
    out.append(step)
    return tuple(out)


def set_proof(graph: KnowledgeGraph, entity_id: str, record: ProofRecord):
    """The only path by which conjectures become theorems or disprovals."""
    e = graph.entity(entity_id)
    e.proof = record
    if record.status == "Proven":
        e.node_kind = NODE_THEOREM
    elif record.status == "Disproven":
        e.node_kind = NODE_DISPROVEN
    graph._signatures.pop(entity_id, None)


def remove_entity(graph: KnowledgeGraph, entity_id: str):
    """User-level removal (the REPL's remove verb); ids are never reused.

    Entities something else was built from stay put, otherwise the
    dependents' histories would dangle and a saved graph could not be
    reloaded.
    """
    graph.entity(entity_id)
    dependents = sorted({d for s, d, _ in graph.edges if s == entity_id})
    if dependents:
        raise EntityInUse(f"{entity_id} is an input of {', '.join(dependents)}")
    del graph.nodes[entity_id]
    graph.edges = [(s, d, r) for s, d, r in graph.edges if s != entity_id and d != entity_id]
    graph._signatures.pop(entity_id, None)


# ---------------------------------------------------------------------------
# persistence


def graph_to_json(graph: KnowledgeGraph) -> dict:
    nodes = []
    for eid in sorted(graph.nodes, key=_id_key):
        e = graph.nodes[eid]
        nodes.append(
            {
                "id": e.id,
                "name": e.name,
                "node_kind": e.node_kind,
                "category": e.category,
                "input_arity": e.input_arity,
                "output_arity": e.output_arity,
                "symbolic_def": e.symbolic_def,
                "builtin": e.builtin,
                "step_age": e.step_age,
                "history": [s.to_json() for s in e.history],
                "positives": sorted(list(t) for t in e.positives),
                "negatives": sorted(list(t) for t in e.negatives),
                "proof": e.proof.to_json() if e.proof else None,
            }
        )
    return {
        "version": GRAPH_FORMAT_VERSION,
        "domain_tag": graph.domain_tag,
        "step_counter": graph.step_counter,
        "id_counter": graph._id_counter,
        "nodes": nodes,
        "edges": [{"src": s, "dst": d, "rule": r} for s, d, r in graph.edges],
        "instance_store": sorted(graph.instance_store),
    }


def dumps_graph(graph: KnowledgeGraph) -> str:
    return json.dumps(graph_to_json(graph), indent=2, sort_keys=True) + "\n"


def save_graph(graph: KnowledgeGraph, path):
    with open(path, "w") as fh:
        fh.write(dumps_graph(graph))


def graph_from_json(obj: dict) -> KnowledgeGraph:
    from . import rules  # deferred: rules imports this module

    if obj.get("version") != GRAPH_FORMAT_VERSION:
        raise ValueError(f"unsupported graph format version {obj.get('version')!r}")
    ff = None
    if obj["domain_tag"] == DOMAIN_FF27:
        from .ff import FF27

        ff = FF27
    graph = KnowledgeGraph(obj["domain_tag"], ff=ff)
    graph.step_counter = obj["step_counter"]
    graph._id_counter = obj["id_counter"]
    graph.edges = [(e["src"], e["dst"], e["rule"]) for e in obj["edges"]]
    graph.instance_store = set(obj["instance_store"])
    ordered = sorted(obj["nodes"], key=lambda n: n["step_age"])
    for n in ordered:
        e = Entity(
            id=n["id"],
            name=n["name"],
            node_kind=n["node_kind"],
            category=n["category"],
            input_arity=n["input_arity"],
            output_arity=n["output_arity"],
            interpretation=None,
            symbolic_def=n["symbolic_def"],
            history=tuple(ConstructionStep.from_json(s) for s in n["history"]),
            step_age=n["step_age"],
            positives={tuple(t) for t in n["positives"]},
            negatives={tuple(t) for t in n["negatives"]},
            proof=ProofRecord.from_json(n["proof"]) if n.get("proof") else None,
            builtin=n.get("builtin"),
        )
        graph.nodes[e.id] = e
    for e in sorted(graph.nodes.values(), key=lambda x: x.step_age):
        e.interpretation = rules.rebuild_interpretation(graph, e)
    return graph


def load_graph(path) -> KnowledgeGraph:
    with open(path) as fh:
        return graph_from_json(json.load(fh))


def _id_key(eid: str):
    return (0, int(eid[1:])) if eid[1:].isdigit() else (1, eid)

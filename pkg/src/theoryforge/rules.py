"""Production rules: nine definition-forming moves, four conjecture-forming
moves, and the machinery around them (validation, forbidden paths, example
propagation, action enumeration, simulation, and interpretation rebuilding
for loaded graphs).

Every rule builds an uncommitted Entity; committing goes through
domain.add_entity so edges, step ages and the instance store stay
consistent. Example caches are filled by sound propagation from the inputs
where the rule admits it (negation swaps, filters for specialization and
matching, projections for the quantifier rules) and otherwise by a
deterministic sweep over small instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from random import Random

from . import domain, interp as it
from .domain import (
    CAT_CONSTANT,
    CAT_FUNCTION,
    CAT_PREDICATE,
    DOMAIN_FF27,
    NODE_CONJECTURE,
    NODE_DEFINITION,
    ConstructionStep,
    Entity,
    KnowledgeGraph,
    merge_histories,
)
from .errors import (
    ArityMismatch,
    CategoryMismatch,
    EmptyIndexSet,
    EmptySet,
    ForbiddenPath,
    FullQuantification,
    IncompatibleCategories,
    IndexOutOfRange,
    InvalidMapping,
    InvalidSharingMap,
    MissingInit,
    MissingValue,
    NotAConstant,
    NotAPredicate,
    TooFewIndices,
    UnknownConfig,
    WrongArity,
)
from .interp import TriBool

RULE_COMPOSE = "compose"
RULE_EXISTS = "exists"
RULE_ITERATE = "iterate"
RULE_FORALL = "forall"
RULE_MATCH = "match"
RULE_CONSTANT = "constant"
RULE_SPECIALIZE = "specialize"
RULE_NEGATE = "negate"
RULE_SIZE = "size"

RULE_IMPLICATION = "implication"
RULE_EQUIVALENCE = "equivalence"
RULE_NONEXISTENCE = "nonexistence"
RULE_EXCLUSIVITY = "exclusivity"

RULE_PROVE = "prove"

DEFINITION_RULES = (
    RULE_COMPOSE,
    RULE_EXISTS,
    RULE_ITERATE,
    RULE_FORALL,
    RULE_MATCH,
    RULE_CONSTANT,
    RULE_SPECIALIZE,
    RULE_NEGATE,
    RULE_SIZE,
)
CONJECTURE_RULES = (RULE_IMPLICATION, RULE_EQUIVALENCE, RULE_NONEXISTENCE, RULE_EXCLUSIVITY)
ALL_RULES = DEFINITION_RULES + CONJECTURE_RULES + (RULE_PROVE,)

RULE_ALIASES = {"iter": RULE_ITERATE, "specialized": RULE_SPECIALIZE, "neg": RULE_NEGATE}

COMMIT_SAMPLE_CAP = 64
SIMULATE_SAMPLE_CAP = 16
ACTION_CAP = 200
MAX_INDEX_SUBSET = 2
MAX_CONSTANT_CANDIDATES = 8
MAX_EXCLUSIVITY_POSITIVES = 3


@dataclass(frozen=True)
class Action:
    rule: str
    inputs: tuple
    params: tuple = ()  # sorted (key, value) pairs

    def param_dict(self):
        return dict(self.params)

    def to_json(self):
        return {
            "rule": self.rule,
            "inputs": list(self.inputs),
            "params": {k: _jsonable(v) for k, v in self.params},
        }

    @staticmethod
    def from_json(obj):
        params = tuple(sorted((k, _tupled(v)) for k, v in obj.get("params", {}).items()))
        return Action(obj["rule"], tuple(obj["inputs"]), params)


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


def _tupled(v):
    if isinstance(v, list):
        return tuple(_tupled(x) for x in v)
    return v


def make_action(rule, inputs, **params):
    rule = RULE_ALIASES.get(rule, rule)
    return Action(rule, tuple(inputs), tuple(sorted(params.items())))


# ---------------------------------------------------------------------------
# seeds


def seed_entity(graph, name, category, input_arity, builtin=None, value=None, symbolic=""):
    """Create and commit a starting concept backed by a builtin evaluator."""
    if category == CAT_CONSTANT:
        interp = it.ConstInterp(value)
        builtin = f"const:{value}"
        symbolic = symbolic or f"Func(params 0; ReturnExpr {value};)"
        output_arity = 1
    elif category == CAT_FUNCTION:
        interp = it.BuiltinFunc(builtin)
        output_arity = 1
    else:
        interp = it.BuiltinPred(builtin)
        output_arity = 0
    e = Entity(
        id=graph.new_id(),
        name=name,
        node_kind=NODE_DEFINITION,
        category=category,
        input_arity=input_arity,
        output_arity=output_arity,
        interpretation=interp,
        symbolic_def=symbolic,
        history=(),
        builtin=builtin,
    )
    if category == CAT_CONSTANT:
        e.positives = {(value,)}
    else:
        _sample_examples(graph, e, COMMIT_SAMPLE_CAP)
    domain.add_entity(graph, e, ())
    return e.id


# ---------------------------------------------------------------------------
# deterministic example sampling


def _sample_examples(graph, entity, cap):
    """Fill example caches by sweeping products of the smallest known
    instance values (no randomness; at most `cap` candidates)."""
    k = entity.input_arity
    vals = sorted(graph.instance_store) or list(range(5))
    if k == 0:
        candidates = [()]
    else:
        r = 1
        while r < len(vals) and (r + 1) ** k <= cap:
            r += 1
        candidates = list(product(vals[:r], repeat=k))
    is_pred = entity.category == CAT_PREDICATE
    for combo in candidates:
        ctx = graph.context(combo)
        try:
            if is_pred:
                v = entity.interpretation.eval_pred(combo, ctx)
                if v is TriBool.TRUE:
                    entity.positives.add(combo)
                elif v is TriBool.FALSE:
                    entity.negatives.add(combo)
            else:
                out = entity.interpretation.eval_func(combo, ctx)
                if out is not None:
                    entity.positives.add(combo + (out,))
        except it.BudgetExceeded:
            continue


def _project(instances, drop):
    drop = set(drop)
    return {tuple(v for i, v in enumerate(tup) if i not in drop) for tup in instances}


# ---------------------------------------------------------------------------
# the shared constructor: interpretation + local definition text + shape


def _kw_call(name, args):
    if not args:
        return f"{name}()"
    inner = ", ".join(f"x_{i}={a}" for i, a in enumerate(args))
    return f"{name}({inner})"


def _require(graph, eid):
    return graph.entity(eid)


def _constant_value(graph, e):
    if e.category != CAT_CONSTANT:
        raise NotAConstant(f"{e.id} ({e.name}) is not a constant")
    v = domain.compute_function(graph, e, ())
    if v is None:
        raise MissingValue(f"constant {e.id} has no computable value")
    return v


def _construct(graph, rule, input_ids, params):
    """Build (category, input_arity, output_arity, interp, symbolic) for a
    rule application; raises the rule's validation errors."""
    ents = [_require(graph, eid) for eid in input_ids]
    ff = graph.domain_tag == DOMAIN_FF27
    builder = _CONSTRUCTORS.get(rule)
    if builder is None:
        raise UnknownConfig(f"unknown rule {rule!r}")
    return builder(graph, ents, params, ff)


def _is_func_like(e):
    return e.category in (CAT_FUNCTION, CAT_CONSTANT)


def _c_compose(graph, ents, params, ff):
    if len(ents) != 2:
        raise WrongArity("compose takes an outer and an inner input")
    outer, inner = ents
    if outer.category == CAT_CONSTANT or outer.input_arity == 0:
        raise IncompatibleCategories("the outer input must take at least one argument")
    if _is_func_like(inner):
        positions = tuple(sorted(set(params.get("positions", ()))))
        if not positions:
            raise InvalidMapping("compose needs at least one substitution position")
        if any(p < 0 or p >= outer.input_arity for p in positions):
            raise IndexOutOfRange("substitution position outside the outer input's arity")
        n, m = inner.input_arity, outer.input_arity
        extras = [j for j in range(m) if j not in positions]
        k = n + len(extras)
        slot_map = []
        for j in range(m):
            if j in positions:
                slot_map.append(("inner", 0))
            else:
                slot_map.append(("param", extras.index(j)))
        interp = it.ComposeInterp(
            inner=inner.interpretation,
            inner_arity=n,
            outer=outer.interpretation,
            slot_map=tuple(slot_map),
            outer_is_pred=outer.category == CAT_PREDICATE,
        )
        inner_call = _kw_call(inner.id, [f"x_{i}" for i in range(n)])
        outer_args = [
            inner_call if j in positions else f"x_{n + extras.index(j)}" for j in range(m)
        ]
        body = _kw_call(outer.id, outer_args)
        if outer.category == CAT_PREDICATE:
            symbolic = f"Pred(params {k}; ReturnPred {body};)"
            return CAT_PREDICATE, k, 0, interp, symbolic
        category = CAT_FUNCTION if k > 0 else CAT_CONSTANT
        symbolic = f"Func(params {k}; ReturnExpr {body};)"
        return category, k, 1, interp, symbolic
    if inner.category == CAT_PREDICATE and outer.category == CAT_PREDICATE:
        shared = params.get("shared")
        if shared is None:
            shared = min(inner.input_arity, outer.input_arity)
        if not (1 <= shared <= min(inner.input_arity, outer.input_arity)):
            raise InvalidSharingMap(
                f"shared prefix {shared} outside 1..{min(inner.input_arity, outer.input_arity)}"
            )
        n, m = inner.input_arity, outer.input_arity
        k = n + m - shared
        slot_map = tuple(
            ("arg", j) if j < shared else ("arg", n + j - shared) for j in range(m)
        )
        interp = it.ComposeInterp(
            inner=inner.interpretation,
            inner_arity=n,
            outer=outer.interpretation,
            slot_map=slot_map,
            outer_is_pred=True,
            inner_is_pred=True,
            conjunction=True,
        )
        inner_call = _kw_call(inner.id, [f"x_{i}" for i in range(n)])
        outer_call = _kw_call(
            outer.id,
            [f"x_{j}" if j < shared else f"x_{n + j - shared}" for j in range(m)],
        )
        symbolic = f"Pred(params {k}; ReturnPred And({inner_call}, {outer_call});)"
        return CAT_PREDICATE, k, 0, interp, symbolic
    raise IncompatibleCategories(
        f"cannot compose {outer.category} with {inner.category} inner"
    )


def _quant_indices(e, params, proper_for_pred):
    indices = tuple(sorted(set(params.get("indices", ()))))
    if not indices:
        raise EmptyIndexSet("an index set is required")
    if any(i < 0 or i >= e.input_arity for i in indices):
        raise IndexOutOfRange(f"index outside 0..{e.input_arity - 1}")
    if proper_for_pred and e.category == CAT_PREDICATE and len(indices) == e.input_arity:
        raise FullQuantification(
            "quantifying every variable makes a statement, not a definition"
        )
    return indices


def _quant_symbolic(e, indices):
    """Argument strings for the base call under quantification: quantified
    positions become binder refs, free ones keep parameter order."""
    free = [i for i in range(e.input_arity) if i not in indices]
    args = []
    for i in range(e.input_arity):
        if i in indices:
            args.append(f"b_{indices.index(i)}")
        else:
            args.append(f"x_{free.index(i)}")
    binders = ", ".join(f"b_{j}" for j in range(len(indices)))
    return _kw_call(e.id, args), binders


def _c_exists(graph, ents, params, ff):
    (base,) = ents
    if base.category == CAT_CONSTANT or base.input_arity == 0:
        raise EmptyIndexSet("the input takes no quantifiable arguments")
    indices = _quant_indices(base, params, proper_for_pred=True)
    if base.category == CAT_PREDICATE:
        k = base.input_arity - len(indices)
        interp = it.ExistsPred(base.interpretation, base.input_arity, indices)
        call, binders = _quant_symbolic(base, indices)
        symbolic = (
            f"Pred(params {k}; bounded params {len(indices)}; "
            f"ReturnPred Exists([{binders}], {call});)"
        )
        return CAT_PREDICATE, k, 0, interp, symbolic
    # function graph projection: the output becomes the final free variable
    k = base.input_arity - len(indices) + 1
    interp = it.ExistsPred(base.interpretation, base.input_arity, indices, base_is_func=True)
    call, binders = _quant_symbolic(base, indices)
    symbolic = (
        f"Pred(params {k}; bounded params {len(indices)}; "
        f"ReturnPred Exists([{binders}], {call} == x_{k - 1});)"
    )
    return CAT_PREDICATE, k, 0, interp, symbolic


def _c_forall(graph, ents, params, ff):
    (base,) = ents
    if base.category != CAT_PREDICATE:
        raise NotAPredicate("universal projection applies to predicates")
    indices = _quant_indices(base, params, proper_for_pred=True)
    k = base.input_arity - len(indices)
    interp = it.ForAllPred(base.interpretation, base.input_arity, indices, exhaustive=ff)
    call, binders = _quant_symbolic(base, indices)
    symbolic = (
        f"Pred(params {k}; bounded params {len(indices)}; "
        f"ReturnPred ForAll([{binders}], {call});)"
    )
    return CAT_PREDICATE, k, 0, interp, symbolic


def _c_iterate(graph, ents, params, ff):
    base = ents[0]
    if not _is_func_like(base) or base.category == CAT_CONSTANT:
        raise CategoryMismatch("iteration applies to functions")
    if base.input_arity == 1:
        if len(ents) != 1:
            raise WrongArity("iterating a unary function takes no initial value")
        interp = it.IterateFunc(base.interpretation)
        symbolic = (
            f"Func(params 2; RecurBase x_0; RecurStep {_kw_call(base.id, ['rec'])};)"
        )
        return CAT_FUNCTION, 2, 1, interp, symbolic
    if base.input_arity == 2:
        if len(ents) != 2:
            raise MissingInit("iterating a binary function needs an initial constant")
        init = ents[1]
        value = _constant_value(graph, init)
        interp = it.IterateFunc(base.interpretation, init=value)
        symbolic = (
            f"Func(params 2; RecurBase {init.id}(); "
            f"RecurStep {_kw_call(base.id, ['rec', 'x_0'])};)"
        )
        return CAT_FUNCTION, 2, 1, interp, symbolic
    raise WrongArity("iteration applies to unary or binary functions")


def _c_match(graph, ents, params, ff):
    (base,) = ents
    if base.category == CAT_CONSTANT:
        raise WrongArity("constants have no positions to identify")
    indices = tuple(sorted(set(params.get("indices", ()))))
    if len(indices) < 2:
        raise TooFewIndices("identifying positions needs at least two indices")
    if any(i < 0 or i >= base.input_arity for i in indices):
        raise IndexOutOfRange(f"index outside 0..{base.input_arity - 1}")
    if base.input_arity < 2:
        raise WrongArity("need at least two input positions to identify")
    k = base.input_arity - (len(indices) - 1)
    is_pred = base.category == CAT_PREDICATE
    interp = it.MatchInterp(base.interpretation, base.input_arity, indices, is_pred=is_pred)
    target = indices[0]
    kept = sorted(set(range(base.input_arity)) - set(indices[1:]))
    args = [
        f"x_{kept.index(p)}" if p in kept else f"x_{kept.index(target)}"
        for p in range(base.input_arity)
    ]
    body = _kw_call(base.id, args)
    if is_pred:
        return CAT_PREDICATE, k, 0, interp, f"Pred(params {k}; ReturnPred {body};)"
    return CAT_FUNCTION, k, 1, interp, f"Func(params {k}; ReturnExpr {body};)"


def _c_constant(graph, ents, params, ff):
    if ents:
        raise WrongArity("constants are introduced from a value, not inputs")
    value = params.get("value")
    if value is None:
        raise MissingValue("a constant needs a value")
    value = int(value)
    limit = graph.ff.size if ff else None
    if value < 0 or (limit is not None and value >= limit):
        raise MissingValue(f"value {value} outside the domain")
    interp = it.ConstInterp(value)
    return CAT_CONSTANT, 0, 1, interp, f"Func(params 0; ReturnExpr {value};)"


def _c_specialize(graph, ents, params, ff):
    if len(ents) != 2:
        raise WrongArity("specialization takes the definition and a constant")
    base, const = ents
    if base.category == CAT_CONSTANT:
        raise WrongArity("constants have no position to fix")
    index = params.get("index")
    if index is None or not (0 <= index < base.input_arity):
        raise IndexOutOfRange(f"index {index!r} outside 0..{base.input_arity - 1}")
    value = _constant_value(graph, const)
    is_pred = base.category == CAT_PREDICATE
    k = base.input_arity - 1
    interp = it.SpecializeInterp(
        base.interpretation, base.input_arity, index, value, is_pred=is_pred
    )
    args = []
    shift = 0
    for p in range(base.input_arity):
        if p == index:
            args.append(f"{const.id}()")
            shift = 1
        else:
            args.append(f"x_{p - shift}")
    body = _kw_call(base.id, args)
    if is_pred:
        return CAT_PREDICATE, k, 0, interp, f"Pred(params {k}; ReturnPred {body};)"
    category = CAT_FUNCTION if k > 0 else CAT_CONSTANT
    return category, k, 1, interp, f"Func(params {k}; ReturnExpr {body};)"


def _c_negate(graph, ents, params, ff):
    (base,) = ents
    if base.category != CAT_PREDICATE:
        raise NotAPredicate("negation applies to predicates")
    interp = it.NegateInterp(base.interpretation)
    call = _kw_call(base.id, [f"x_{i}" for i in range(base.input_arity)])
    symbolic = f"Pred(params {base.input_arity}; ReturnPred Not({call});)"
    return CAT_PREDICATE, base.input_arity, 0, interp, symbolic


def _c_size(graph, ents, params, ff):
    (base,) = ents
    if base.category != CAT_PREDICATE:
        raise NotAPredicate("counting applies to predicates")
    indices = _quant_indices(base, params, proper_for_pred=False)
    k = base.input_arity - len(indices)
    interp = it.SizeInterp(base.interpretation, base.input_arity, indices, exhaustive=ff)
    call, binders = _quant_symbolic(base, indices)
    symbolic = (
        f"Func(params {k}; bounded params {len(indices)}; "
        f"ReturnExpr Size([{binders}], {call});)"
    )
    return CAT_FUNCTION, k, 1, interp, symbolic


def _conjecture_binders(arity):
    return ", ".join(f"b_{i}" for i in range(arity))


def _closed_call(e):
    return _kw_call(e.id, [f"b_{i}" for i in range(e.input_arity)])


def _c_implication(graph, ents, params, ff):
    p, q = ents
    if p.category != CAT_PREDICATE or q.category != CAT_PREDICATE:
        raise NotAPredicate("implications connect predicates")
    if p.input_arity != q.input_arity:
        raise ArityMismatch("implication needs equal arities")
    arity = p.input_arity
    interp = it.ImplicationStmt(p.interpretation, q.interpretation, arity, exhaustive=ff)
    body = f"Implies({_closed_call(p)}, {_closed_call(q)})"
    symbolic = (
        f"Pred(params 0; bounded params {arity}; "
        f"ReturnPred ForAll([{_conjecture_binders(arity)}], {body});)"
    )
    return None, 0, 0, interp, symbolic


def _c_equivalence(graph, ents, params, ff):
    a, b = ents
    if a.category == CAT_PREDICATE and b.category == CAT_PREDICATE:
        if a.input_arity != b.input_arity:
            raise ArityMismatch("equivalence needs equal arities")
        arity = a.input_arity
        interp = it.EquivalenceStmt(a.interpretation, b.interpretation, arity, exhaustive=ff)
        body = (
            f"And(Implies({_closed_call(a)}, {_closed_call(b)}), "
            f"Implies({_closed_call(b)}, {_closed_call(a)}))"
        )
    elif _is_func_like(a) and _is_func_like(b):
        if a.input_arity != b.input_arity:
            raise ArityMismatch("function agreement needs equal arities")
        arity = a.input_arity
        interp = it.EquivalenceStmt(
            a.interpretation, b.interpretation, arity, funcs=True, exhaustive=ff
        )
        body = f"{_closed_call(a)} == {_closed_call(b)}"
    else:
        raise IncompatibleCategories("equivalence connects two predicates or two functions")
    symbolic = (
        f"Pred(params 0; bounded params {arity}; "
        f"ReturnPred ForAll([{_conjecture_binders(arity)}], {body});)"
    )
    return None, 0, 0, interp, symbolic


def _c_nonexistence(graph, ents, params, ff):
    (p,) = ents
    if p.category == CAT_PREDICATE:
        arity = p.input_arity
        if arity == 0:
            raise EmptyIndexSet("a closed statement has nothing to quantify")
        interp = it.NonexistenceStmt(p.interpretation, arity, exhaustive=ff)
        body = _closed_call(p)
    elif _is_func_like(p):
        value = params.get("value")
        if value is None:
            raise MissingValue("nonexistence for a function needs a target value")
        arity = p.input_arity
        if arity == 0:
            raise EmptyIndexSet("a constant has nothing to quantify")
        interp = it.NonexistenceStmt(
            p.interpretation, arity, is_func=True, value=int(value), exhaustive=ff
        )
        body = f"{_closed_call(p)} == {int(value)}"
    else:
        raise IncompatibleCategories("nonexistence applies to predicates or functions")
    symbolic = (
        f"Pred(params 0; bounded params {arity}; "
        f"ReturnPred Not(Exists([{_conjecture_binders(arity)}], {body}));)"
    )
    return None, 0, 0, interp, symbolic


def _eq_tuple(member):
    parts = [f"b_{i} == {v}" for i, v in enumerate(member)]
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = f"And({p}, {out})"
    return out


def _c_exclusivity(graph, ents, params, ff):
    (p,) = ents
    if p.category != CAT_PREDICATE:
        raise NotAPredicate("exclusivity applies to predicates")
    if p.input_arity == 0:
        raise EmptyIndexSet("a closed statement has nothing to enumerate")
    members = tuple(sorted(tuple(m) for m in params.get("members", ())))
    if not members:
        raise EmptySet("exclusivity needs at least one known example")
    arity = p.input_arity
    interp = it.ExclusivityStmt(p.interpretation, arity, members, exhaustive=ff)
    negs = [f"Not({_eq_tuple(m)})" for m in members]
    conj = negs[-1]
    for n in reversed(negs[:-1]):
        conj = f"And({n}, {conj})"
    body = f"Implies({_closed_call(p)}, Not({conj}))"
    symbolic = (
        f"Pred(params 0; bounded params {arity}; "
        f"ReturnPred ForAll([{_conjecture_binders(arity)}], {body});)"
    )
    return None, 0, 0, interp, symbolic


_CONSTRUCTORS = {
    RULE_COMPOSE: _c_compose,
    RULE_EXISTS: _c_exists,
    RULE_ITERATE: _c_iterate,
    RULE_FORALL: _c_forall,
    RULE_MATCH: _c_match,
    RULE_CONSTANT: _c_constant,
    RULE_SPECIALIZE: _c_specialize,
    RULE_NEGATE: _c_negate,
    RULE_SIZE: _c_size,
    RULE_IMPLICATION: _c_implication,
    RULE_EQUIVALENCE: _c_equivalence,
    RULE_NONEXISTENCE: _c_nonexistence,
    RULE_EXCLUSIVITY: _c_exclusivity,
}


# ---------------------------------------------------------------------------
# forbidden paths


def _direct_negation_of(graph, a, b):
    """True when entity a is negate(b) by its own final step."""
    step = graph.entity(a).own_step()
    return step is not None and step.rule_name == RULE_NEGATE and step.inputs == (b,)


def is_forbidden(graph, rule, inputs, params=None):
    """The four do-nothing loops: double negation, self-implication,
    self-equivalence, and equivalence with a direct negation."""
    if rule == RULE_NEGATE:
        step = graph.entity(inputs[0]).own_step()
        return step is not None and step.rule_name == RULE_NEGATE
    if rule == RULE_IMPLICATION:
        return inputs[0] == inputs[1]
    if rule == RULE_EQUIVALENCE:
        a, b = inputs
        if a == b:
            return True
        return _direct_negation_of(graph, a, b) or _direct_negation_of(graph, b, a)
    return False


# ---------------------------------------------------------------------------
# example propagation


def _propagate_examples(graph, rule, ents, params, entity):
    if rule == RULE_NEGATE:
        base = ents[0]
        entity.positives = set(base.negatives)
        entity.negatives = set(base.positives)
        return
    if rule == RULE_SPECIALIZE:
        base, const = ents
        index = params["index"]
        value = _constant_value(graph, const)
        entity.positives = {
            t[:index] + t[index + 1 :] for t in base.positives if t[index] == value
        }
        entity.negatives = {
            t[:index] + t[index + 1 :] for t in base.negatives if t[index] == value
        }
        return
    if rule == RULE_MATCH:
        base = ents[0]
        indices = tuple(sorted(set(params["indices"])))
        drop = indices[1:]
        keep = [i for i in range(base.size) if i not in drop]

        def ok(t):
            return len({t[i] for i in indices}) == 1

        entity.positives = {tuple(t[i] for i in keep) for t in base.positives if ok(t)}
        entity.negatives = {tuple(t[i] for i in keep) for t in base.negatives if ok(t)}
        return
    if rule == RULE_EXISTS:
        base = ents[0]
        indices = set(params["indices"])
        entity.positives = _project(base.positives, indices)
        return
    if rule == RULE_FORALL:
        base = ents[0]
        indices = set(params["indices"])
        entity.negatives = _project(base.negatives, indices)
        return
    if rule == RULE_CONSTANT:
        entity.positives = {(params["value"],)}
        return
    # compose, iterate, size: no sound pointwise propagation


def apply_rule(graph, rule, input_ids, params=None, sample_cap=COMMIT_SAMPLE_CAP):
    """Produce the uncommitted entity for one rule application."""
    rule = RULE_ALIASES.get(rule, rule)
    params = dict(params or {})
    input_ids = tuple(input_ids)
    if rule == RULE_EXCLUSIVITY and "members" not in params:
        src = graph.entity(input_ids[0])
        params["members"] = tuple(sorted(src.positives))
    if is_forbidden(graph, rule, input_ids, params):
        raise ForbiddenPath(f"{rule} on {input_ids} adds nothing")
    category, in_ar, out_ar, interp, symbolic = _construct(graph, rule, input_ids, params)
    ents = [graph.entity(eid) for eid in input_ids]
    step_params = tuple(sorted(params.items()))
    step = ConstructionStep(rule, input_ids, step_params)
    entity = Entity(
        id=graph.new_id(),
        name=_fresh_name(graph, rule, ents, params),
        node_kind=NODE_CONJECTURE if rule in CONJECTURE_RULES else NODE_DEFINITION,
        category=category,
        input_arity=in_ar,
        output_arity=out_ar,
        interpretation=interp,
        symbolic_def=symbolic,
        history=merge_histories(ents, step),
    )
    if entity.node_kind == NODE_DEFINITION:
        _propagate_examples(graph, rule, ents, params, entity)
        if category == CAT_CONSTANT and not entity.positives:
            v = domain.compute_function(graph, entity, ())
            if v is not None:
                entity.positives = {(v,)}
        if not entity.positives and not entity.negatives:
            _sample_examples(graph, entity, sample_cap)
    return entity


def commit_action(graph, action, sample_cap=COMMIT_SAMPLE_CAP):
    """Apply and add to the graph; returns the new entity id."""
    entity = apply_rule(graph, action.rule, action.inputs, action.param_dict(), sample_cap)
    return domain.add_entity(graph, entity, action.inputs)


def clone_graph(graph):
    """Cheap structural copy for what-if evaluation: entities are shared
    (rules only read them), bookkeeping is copied."""
    g = KnowledgeGraph(graph.domain_tag, ff=graph.ff)
    g.nodes = dict(graph.nodes)
    g.edges = list(graph.edges)
    g.step_counter = graph.step_counter
    g.instance_store = set(graph.instance_store)
    g._id_counter = graph._id_counter
    g._signatures = dict(graph._signatures)
    return g


def simulate(graph, action):
    """Apply on a throwaway copy; returns (clone, new_entity_id)."""
    clone = clone_graph(graph)
    eid = commit_action(clone, action, sample_cap=SIMULATE_SAMPLE_CAP)
    return clone, eid


# ---------------------------------------------------------------------------
# interpretation rebuilding (persistence support)


def rebuild_interpretation(graph, entity):
    """Reconstruct the evaluator of a loaded entity from its final step.

    Inputs are rebuilt first (callers iterate in step-age order), so their
    interpretations are available.
    """
    if entity.builtin:
        if entity.builtin.startswith("const:"):
            return it.ConstInterp(int(entity.builtin.split(":", 1)[1]))
        if entity.category == CAT_PREDICATE:
            return it.BuiltinPred(entity.builtin)
        return it.BuiltinFunc(entity.builtin)
    step = entity.own_step()
    if step is None:
        return None
    _cat, _i, _o, interp, _sym = _construct(
        graph, step.rule_name, step.inputs, dict(step.params)
    )
    return interp


# ---------------------------------------------------------------------------
# names


def _fresh_name(graph, rule, ents, params):
    if rule == RULE_CONSTANT:
        base = f"c{params['value']}"
    elif rule in CONJECTURE_RULES:
        base = f"{rule}_" + "_".join(e.name for e in ents[:2])
    elif ents:
        base = f"{rule}_{ents[0].name}"
    else:
        base = rule
    base = base[:48]
    taken = {e.name for e in graph.nodes.values()}
    if base not in taken:
        return base
    n = 2
    while f"{base}_{n}" in taken:
        n += 1
    return f"{base}_{n}"


# ---------------------------------------------------------------------------
# action enumeration


def _index_subsets(n, max_size=MAX_INDEX_SUBSET):
    out = []
    for size in range(1, min(n, max_size) + 1):
        out.extend(combinations(range(n), size))
    return out


def enumerate_actions(graph, focus_ids=None, seed=0, cap=ACTION_CAP):
    """All legal next moves touching the focus entities (every entity when
    no focus is given), deterministically ordered; a seeded sample keeps at
    most `cap` of them."""
    if focus_ids is None:
        focus_ids = sorted(graph.nodes, key=domain._id_key)
    defs = [e for e in graph.nodes.values() if e.node_kind == NODE_DEFINITION]
    defs.sort(key=lambda e: domain._id_key(e.id))
    preds = [e for e in defs if e.category == CAT_PREDICATE]
    funcs = [e for e in defs if e.category == CAT_FUNCTION]
    consts = [e for e in defs if e.category == CAT_CONSTANT]
    consts_by_value = sorted(
        consts, key=lambda e: (domain.compute_function(graph, e, ()) or 0, e.id)
    )[:MAX_CONSTANT_CANDIDATES]

    actions = []
    seen = set()

    def add(rule, inputs, **params):
        a = make_action(rule, inputs, **params)
        if a in seen or is_forbidden(graph, a.rule, a.inputs, a.param_dict()):
            return
        seen.add(a)
        actions.append(a)

    known_const_values = set()
    for c in consts:
        v = domain.compute_function(graph, c, ())
        if v is not None:
            known_const_values.add(v)
    for v in sorted(graph.instance_store)[:MAX_CONSTANT_CANDIDATES]:
        if v not in known_const_values:
            add(RULE_CONSTANT, (), value=v)

    for fid in focus_ids:
        e = graph.nodes.get(fid)
        if e is None:
            continue
        if e.node_kind == NODE_CONJECTURE:
            add(RULE_PROVE, (fid,))
            continue
        if e.node_kind != NODE_DEFINITION:
            continue
        n = e.input_arity
        if e.category == CAT_PREDICATE:
            add(RULE_NEGATE, (fid,))
            for idx in _index_subsets(n):
                if len(idx) < n:
                    add(RULE_EXISTS, (fid,), indices=idx)
                    add(RULE_FORALL, (fid,), indices=idx)
                add(RULE_SIZE, (fid,), indices=idx)
            if n >= 1:
                add(RULE_NONEXISTENCE, (fid,))
            if 1 <= len(e.positives) <= MAX_EXCLUSIVITY_POSITIVES and n >= 1:
                add(RULE_EXCLUSIVITY, (fid,), members=tuple(sorted(e.positives)))
            for other in preds:
                if other.input_arity == n and other.id != fid:
                    add(RULE_IMPLICATION, (fid, other.id))
                    add(RULE_IMPLICATION, (other.id, fid))
                    pair = tuple(sorted((fid, other.id), key=domain._id_key))
                    add(RULE_EQUIVALENCE, pair)
                if 1 <= min(n, other.input_arity):
                    for s in range(1, min(n, other.input_arity, MAX_INDEX_SUBSET) + 1):
                        add(RULE_COMPOSE, (fid, other.id), shared=s)
        if e.category == CAT_FUNCTION:
            for idx in _index_subsets(n):
                add(RULE_EXISTS, (fid,), indices=idx)
            if n == 1:
                add(RULE_ITERATE, (fid,))
            if n == 2:
                for c in consts_by_value:
                    add(RULE_ITERATE, (fid, c.id))
            for other in funcs:
                if other.input_arity == n and domain._id_key(other.id) > domain._id_key(fid):
                    add(RULE_EQUIVALENCE, (fid, other.id))
            for v in sorted(graph.instance_store)[:MAX_CONSTANT_CANDIDATES]:
                if n >= 1:
                    add(RULE_NONEXISTENCE, (fid,), value=v)
        if e.category in (CAT_PREDICATE, CAT_FUNCTION):
            if n >= 2:
                for pair in combinations(range(n), 2):
                    add(RULE_MATCH, (fid,), indices=pair)
            for i in range(n):
                for c in consts_by_value:
                    add(RULE_SPECIALIZE, (fid, c.id), index=i)
            # as the outer of a substitution, any function/constant inside
            for inner in funcs + consts:
                for pos in _index_subsets(n):
                    add(RULE_COMPOSE, (fid, inner.id), positions=pos)
            # as the inner of a substitution into any other definition
            if e.category == CAT_FUNCTION:
                for outer in preds + funcs:
                    if outer.id == fid or outer.input_arity == 0:
                        continue
                    for pos in _index_subsets(outer.input_arity):
                        add(RULE_COMPOSE, (outer.id, fid), positions=pos)

    actions.sort(key=lambda a: (a.rule, a.inputs, repr(a.params)))
    if len(actions) > cap:
        rng = Random(seed)
        actions = rng.sample(actions, cap)
        actions.sort(key=lambda a: (a.rule, a.inputs, repr(a.params)))
    return actions

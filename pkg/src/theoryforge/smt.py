"""Hygienic flattening of nested definitions and SMT-LIB 2 emission.

Flattening hoists nested definitions to the top level, mangling child names
as innerName_parentName and disambiguating engineered collisions with a
numeric suffix. Compilation emits:

  * definitions-only scripts when the program carries no goal: one
    define-fun per flat definition, binders rendered bare;
  * proof scripts (AssertTruth / AssertNegation) when the program's own
    return is a closed predicate: predicate calls are hygienically inlined
    into the goal so that every quantifier lives in the asserted formula,
    where each bound variable gets an explicit nonnegativity guard.
    Function definitions are quantifier-free, so total-integer define-funs
    agree with natural-number semantics on guarded arguments.

Recursive functions lower to an uninterpreted function plus two universally
quantified defining equations instead of define-fun-rec; structurally
identical recurrences share one symbol so that re-derived copies of the
same function are definitionally equal. The counting construct has no
SMT-LIB image and raises UnsupportedConstruct.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import dsl
from .errors import (
    NameCollision,
    RecursionDepthExceeded,
    UnresolvedName,
    UnsupportedConstruct,
)

MODE_ASSERT_TRUTH = "assert_truth"
MODE_ASSERT_NEGATION = "assert_negation"

INLINE_DEPTH_CAP = 32


@dataclass
class FlatDef:
    name: str
    kind: str  # 'Func' | 'Pred'
    params: int
    return_expr: object | None = None
    return_pred: object | None = None
    recur_base: object | None = None
    recur_step: object | None = None

    @property
    def recursive(self):
        return self.recur_base is not None


@dataclass
class FlattenResult:
    defs: list  # FlatDef, dependency order (children before parents)
    top_name: str | None  # name of the outermost definition, if named
    goal_pred: object | None  # anonymous top-level predicate goal, if any
    goal_params: int = 0


def flatten(program: dsl.DslProgram) -> FlattenResult:
    taken = set()
    out = []

    def fresh(base):
        if base not in taken:
            taken.add(base)
            return base
        i = 2
        while f"{base}__{i}" in taken:
            i += 1
        name = f"{base}__{i}"
        taken.add(name)
        return name

    def walk(prog, parent_flat, scope, depth):
        if depth > INLINE_DEPTH_CAP:
            raise RecursionDepthExceeded("definition nesting exceeds the cap")
        seen_siblings = set()
        local = dict(scope)
        flat_children = []
        for d in prog.defs:
            if d.name in seen_siblings:
                raise NameCollision(f"sibling definitions both named {d.name!r}")
            seen_siblings.add(d.name)
        for d in prog.defs:
            base = d.name if parent_flat is None else f"{d.name}_{parent_flat}"
            flat = fresh(base)
            local[d.name] = flat
            flat_children.append((d, flat))
        for d, flat in flat_children:
            walk(d, flat, local, depth + 1)
        if prog.name is not None or parent_flat is not None:
            out.append(
                FlatDef(
                    name=parent_flat,
                    kind=prog.kind,
                    params=prog.params,
                    return_expr=_rewrite(prog.return_expr, local),
                    return_pred=_rewrite(prog.return_pred, local),
                    recur_base=_rewrite(prog.recur_base, local),
                    recur_step=_rewrite(prog.recur_step, local),
                )
            )
            return None
        return (
            _rewrite(prog.return_pred, local),
            _rewrite(prog.return_expr, local),
            prog.params,
        )

    if program.name is not None:
        top_flat = fresh(program.name)
        walk(program, top_flat, {program.name: top_flat}, 0)
        return FlattenResult(defs=out, top_name=top_flat, goal_pred=None)
    goal_pred, goal_expr, params = walk(program, None, {}, 0)
    if goal_expr is not None:
        raise UnsupportedConstruct("top-level numeric goals have no SMT form")
    return FlattenResult(defs=out, top_name=None, goal_pred=goal_pred, goal_params=params)


def _rewrite(node, names):
    """Rename call targets according to the flat-name map."""
    if node is None:
        return None
    t = type(node)
    if t in (dsl.Num, dsl.ParamRef, dsl.BoundRef, dsl.RecRef):
        return node
    if t is dsl.BinOp:
        return dsl.BinOp(node.op, _rewrite(node.left, names), _rewrite(node.right, names))
    if t is dsl.Call:
        return dsl.Call(names.get(node.name, node.name), tuple(_rewrite(a, names) for a in node.args))
    if t is dsl.CallP:
        return dsl.CallP(names.get(node.name, node.name), tuple(_rewrite(a, names) for a in node.args))
    if t is dsl.SizeExpr:
        return dsl.SizeExpr(node.bound, _rewrite(node.body, names))
    if t is dsl.Compare:
        return dsl.Compare(node.op, _rewrite(node.left, names), _rewrite(node.right, names))
    if t in (dsl.Exists, dsl.ForAllQ):
        return t(node.bound, _rewrite(node.body, names))
    if t in (dsl.Implies, dsl.And):
        return t(_rewrite(node.p, names), _rewrite(node.q, names))
    if t is dsl.Not:
        return dsl.Not(_rewrite(node.p, names))
    raise TypeError(f"unexpected node {node!r}")


# ---------------------------------------------------------------------------
# emission


class _Emitter:
    def __init__(self, flat: FlattenResult, proof_mode: bool):
        self.defs = {d.name: d for d in flat.defs}
        self.order = [d.name for d in flat.defs]
        self.proof_mode = proof_mode
        self.lines = []
        self.fresh_counter = 0
        self.canonical = {}  # recursive def name -> shared symbol
        self._recur_keys = {}

    def fresh_binder(self):
        name = f"q{self.fresh_counter}"
        self.fresh_counter += 1
        return name

    # -- definitions --------------------------------------------------------
    def emit_definitions(self):
        for name in self.order:
            d = self.defs[name]
            if d.recursive:
                self._emit_recursive(d)
            elif d.kind == "Func":
                self._emit_define_fun(d)
            elif not self.proof_mode:
                self._emit_define_fun(d)
            # predicate bodies are inlined into the goal in proof mode

    def _emit_define_fun(self, d: FlatDef):
        params = " ".join(f"(x_{i} Int)" for i in range(d.params))
        ret = "Int" if d.kind == "Func" else "Bool"
        env = _Env(params={i: f"x_{i}" for i in range(d.params)}, bound={})
        if d.kind == "Func":
            body = self.expr(d.return_expr, env)
        else:
            body = self.pred(d.return_pred, env, guard=False, inline=False)
        self.lines.append(f"(define-fun {d.name} ({params}) {ret} {body})")

    def _emit_recursive(self, d: FlatDef):
        key = self._recurrence_key(d)
        if key in self._recur_keys:
            self.canonical[d.name] = self._recur_keys[key]
            return
        self._recur_keys[key] = d.name
        self.canonical[d.name] = d.name
        k = d.params
        args = " ".join("Int" for _ in range(k))
        self.lines.append(f"(declare-fun {d.name} ({args}) Int)")
        xs = [f"x_{i}" for i in range(k - 1)]
        env = _Env(params={i: xs[i] for i in range(k - 1)}, bound={})
        base = self.expr(d.recur_base, _Env(params={**env.params, k - 1: "0"}, bound={}))
        binders = " ".join(f"({x} Int)" for x in xs)
        guards = [f"(>= {x} 0)" for x in xs]
        lhs0 = f"({d.name} {' '.join(xs + ['0'])})" if xs else f"({d.name} 0)"
        self.lines.append(_forall(binders, guards, f"(= {lhs0} {base})"))
        nvar = "n"
        rec_term = f"({d.name} {' '.join(xs + [nvar])})"
        env_step = _Env(params={**{i: xs[i] for i in range(k - 1)}, k - 1: f"(+ {nvar} 1)"}, bound={}, rec=rec_term)
        step = self.expr(d.recur_step, env_step)
        binders2 = " ".join([f"({x} Int)" for x in xs] + [f"({nvar} Int)"])
        guards2 = guards + [f"(>= {nvar} 0)"]
        lhs1 = f"({d.name} {' '.join(xs + [f'(+ {nvar} 1)'])})"
        self.lines.append(_forall(binders2, guards2, f"(= {lhs1} {step})"))

    def _recurrence_key(self, d: FlatDef):
        base = self._normal_form(d.recur_base, d.name, 0)
        step = self._normal_form(d.recur_step, d.name, 0)
        return (d.params, base, step)

    def _normal_form(self, node, self_name, depth):
        """Print the recurrence body with non-recursive calls inlined and
        recursive call targets replaced by their canonical symbols."""
        if depth > INLINE_DEPTH_CAP:
            return dsl.print_expr(node)
        t = type(node)
        if t is dsl.Num:
            return str(node.value)
        if t is dsl.ParamRef:
            return f"x_{node.index}"
        if t is dsl.BoundRef:
            return f"b_{node.index}"
        if t is dsl.RecRef:
            return "rec"
        if t is dsl.BinOp:
            a = self._normal_form(node.left, self_name, depth)
            b = self._normal_form(node.right, self_name, depth)
            if node.op == "+" and a > b:
                a, b = b, a  # commutative: order operands canonically
            if node.op == "*" and a > b:
                a, b = b, a
            return f"({node.op} {a} {b})"
        if t is dsl.Call:
            target = self.defs.get(node.name)
            args = [self._normal_form(a, self_name, depth) for a in node.args]
            if target is None:
                return f"({node.name} {' '.join(args)})" if args else node.name
            if target.recursive:
                sym = self.canonical.get(target.name, target.name)
                return f"({sym} {' '.join(args)})"
            # inline the quantifier-free function body
            sub = {i: a for i, a in enumerate(node.args)}
            inlined = _substitute_expr(target.return_expr, sub)
            return self._normal_form(inlined, self_name, depth + 1)
        return dsl.print_expr(node)

    # -- terms ---------------------------------------------------------------
    def expr(self, node, env) -> str:
        t = type(node)
        if t is dsl.Num:
            return str(node.value)
        if t is dsl.ParamRef:
            return env.params[node.index]
        if t is dsl.BoundRef:
            return env.bound[node.index]
        if t is dsl.RecRef:
            return env.rec
        if t is dsl.BinOp:
            op = node.op
            return f"({op} {self.expr(node.left, env)} {self.expr(node.right, env)})"
        if t is dsl.Call:
            target = self.defs.get(node.name)
            if target is None:
                raise UnresolvedName(f"call to unknown definition {node.name!r}")
            name = self.canonical.get(node.name, node.name)
            args = " ".join(self.expr(a, env) for a in node.args)
            return f"({name} {args})" if args else name
        if t is dsl.SizeExpr:
            raise UnsupportedConstruct("the counting construct has no SMT-LIB form")
        raise TypeError(f"unexpected expression node {node!r}")

    def pred(self, node, env, guard: bool, inline: bool, depth=0) -> str:
        if depth > INLINE_DEPTH_CAP:
            raise RecursionDepthExceeded("predicate inlining exceeds the cap")
        t = type(node)
        if t is dsl.Compare:
            a, b = self.expr(node.left, env), self.expr(node.right, env)
            return {
                "==": f"(= {a} {b})",
                "!=": f"(not (= {a} {b}))",
                "<=": f"(<= {a} {b})",
                "<": f"(< {a} {b})",
                ">=": f"(>= {a} {b})",
                ">": f"(> {a} {b})",
            }[node.op]
        if t in (dsl.Exists, dsl.ForAllQ):
            if guard:
                names = [self.fresh_binder() for _ in node.bound]
            else:
                names = [f"b_{j}" for j in node.bound]
            inner = _Env(env.params, {**env.bound, **dict(zip(node.bound, names))}, env.rec)
            body = self.pred(node.body, inner, guard, inline, depth)
            binders = " ".join(f"({n} Int)" for n in names)
            if not guard:
                kw = "exists" if t is dsl.Exists else "forall"
                return f"({kw} ({binders}) {body})"
            guards = [f"(>= {n} 0)" for n in names]
            if t is dsl.Exists:
                return f"(exists ({binders}) (and {' '.join(guards)} {body}))"
            head = guards[0] if len(guards) == 1 else f"(and {' '.join(guards)})"
            return f"(forall ({binders}) (=> {head} {body}))"
        if t is dsl.Implies:
            return f"(=> {self.pred(node.p, env, guard, inline, depth)} {self.pred(node.q, env, guard, inline, depth)})"
        if t is dsl.And:
            return f"(and {self.pred(node.p, env, guard, inline, depth)} {self.pred(node.q, env, guard, inline, depth)})"
        if t is dsl.Not:
            return f"(not {self.pred(node.p, env, guard, inline, depth)})"
        if t is dsl.CallP:
            target = self.defs.get(node.name)
            if target is None:
                raise UnresolvedName(f"call to unknown definition {node.name!r}")
            if not inline:
                args = " ".join(self.expr(a, env) for a in node.args)
                return f"({node.name} {args})" if args else node.name
            arg_terms = [self.expr(a, env) for a in node.args]
            inner = _Env(params=dict(enumerate(arg_terms)), bound={})
            return self.pred(target.return_pred, inner, guard, inline, depth + 1)
        raise TypeError(f"unexpected predicate node {node!r}")


@dataclass
class _Env:
    params: dict
    bound: dict
    rec: str | None = None


def _forall(binders, guards, body):
    if not binders:
        return f"(assert {body})"
    head = guards[0] if len(guards) == 1 else f"(and {' '.join(guards)})"
    return f"(assert (forall ({binders}) (=> {head} {body})))"


def _substitute_expr(node, sub):
    """Replace ParamRef i by the expression sub[i]."""
    t = type(node)
    if t is dsl.ParamRef:
        return sub[node.index]
    if t in (dsl.Num, dsl.BoundRef, dsl.RecRef):
        return node
    if t is dsl.BinOp:
        return dsl.BinOp(node.op, _substitute_expr(node.left, sub), _substitute_expr(node.right, sub))
    if t is dsl.Call:
        return dsl.Call(node.name, tuple(_substitute_expr(a, sub) for a in node.args))
    if t is dsl.SizeExpr:
        return node
    raise TypeError(f"unexpected node {node!r}")


def compile_smt(program: dsl.DslProgram, mode: str = MODE_ASSERT_TRUTH) -> str:
    """Compile a program to an SMT-LIB 2 script.

    A named program (or one with no return of its own) yields a
    definitions-only script. An anonymous program whose ReturnPred is a
    closed statement yields a proof script: AssertTruth asserts the goal as
    written; AssertNegation skolemizes the goal's leading universals into
    declared constants and asserts the negated matrix, so counterexample
    values can be read back from the model.
    """
    if mode not in (MODE_ASSERT_TRUTH, MODE_ASSERT_NEGATION):
        raise ValueError(f"unknown mode {mode!r}")
    flat = flatten(program)
    if flat.goal_pred is None:
        em = _Emitter(flat, proof_mode=False)
        em.emit_definitions()
        return "\n".join(em.lines) + "\n"
    if flat.goal_params:
        raise UnsupportedConstruct("proof goals must be closed (no parameters)")
    em = _Emitter(flat, proof_mode=True)
    em.lines.append("(set-option :produce-models true)")
    em.emit_definitions()
    env = _Env(params={}, bound={})
    if mode == MODE_ASSERT_TRUTH:
        goal = em.pred(flat.goal_pred, env, guard=True, inline=True)
        em.lines.append(f"(assert {goal})")
    else:
        _emit_negation(em, flat.goal_pred, env)
    em.lines.append("(check-sat)")
    em.lines.append("(get-model)")
    return "\n".join(em.lines) + "\n"


def _emit_negation(em: _Emitter, goal, env):
    """Negate the goal, skolemizing its leading universal block."""
    # not (forall B . M)  ==  exists B . not M
    # not (not (exists B . M))  ==  exists B . M
    consts = []
    matrix = None
    negate = True
    node = goal
    while True:
        if isinstance(node, dsl.ForAllQ):
            names = [f"n_{len(consts) + i}" for i in range(len(node.bound))]
            env = _Env(env.params, {**env.bound, **dict(zip(node.bound, names))}, env.rec)
            consts.extend(names)
            node = node.body
        elif isinstance(node, dsl.Not) and isinstance(node.p, dsl.Exists):
            names = [f"n_{len(consts) + i}" for i in range(len(node.p.bound))]
            env = _Env(env.params, {**env.bound, **dict(zip(node.p.bound, names))}, env.rec)
            consts.extend(names)
            node = node.p.body
            negate = not negate
        else:
            matrix = node
            break
    for n in consts:
        em.lines.append(f"(declare-const {n} Int)")
    for n in consts:
        em.lines.append(f"(assert (>= {n} 0))")
    body = em.pred(matrix, env, guard=True, inline=True)
    em.lines.append(f"(assert (not {body}))" if negate else f"(assert {body})")


def lower_entity(graph, entity_id: str, depth: int = 0, _name=None) -> dsl.DslProgram:
    """Close an entity's definition over its dependencies.

    Parses the entity's stored definition text and recursively nests the
    definitions of every referenced entity, producing a self-contained
    program: named after the entity for definitions, anonymous (a goal) for
    closed statements.
    """
    if depth > INLINE_DEPTH_CAP:
        raise RecursionDepthExceeded(f"dependency chain below {entity_id!r} exceeds the cap")
    e = graph.entity(entity_id)
    prog = dsl.parse_dsl(e.symbolic_def)
    dep_ids = sorted(_entity_refs(graph, prog), key=lambda s: int(s[1:]))
    nested = tuple(lower_entity(graph, dep, depth + 1, _name=dep) for dep in dep_ids)
    name = None if e.category is None and depth == 0 else (_name or entity_id)
    return replace(prog, name=name, defs=prog.defs + nested)


def _entity_refs(graph, prog):
    refs = set()

    def walk(node):
        if node is None:
            return
        t = type(node)
        if t in (dsl.Call, dsl.CallP):
            local = {d.name for d in prog.defs}
            if node.name not in local and node.name in graph.nodes:
                refs.add(node.name)
            for a in node.args:
                walk(a)
        elif t is dsl.BinOp:
            walk(node.left)
            walk(node.right)
        elif t is dsl.Compare:
            walk(node.left)
            walk(node.right)
        elif t in (dsl.Exists, dsl.ForAllQ, dsl.SizeExpr):
            walk(node.body)
        elif t in (dsl.Implies, dsl.And):
            walk(node.p)
            walk(node.q)
        elif t is dsl.Not:
            walk(node.p)

    for d in prog.defs:
        walk(d.return_expr)
        walk(d.return_pred)
        walk(d.recur_base)
        walk(d.recur_step)
    walk(prog.return_expr)
    walk(prog.return_pred)
    walk(prog.recur_base)
    walk(prog.recur_step)
    return refs

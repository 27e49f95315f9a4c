"""Script-level decision engine.

Consumes an SMT-LIB subset: integer sorts, define-fun macros, declared
constants and functions, guarded quantifiers, and recurrence axioms of the
shape emitted for recursively defined functions. Decides satisfiability by
a pipeline of bounded-quantifier expansion, quantifier elimination, ground
rewriting against the recurrence rules, bounded witness search, and a
one-step induction tactic. Verdicts are only ever emitted when justified:
sat comes with a checked witness or a complete elimination, unsat from a
complete elimination or a discharged induction; everything else is unknown.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import count

from ..errors import BudgetExceeded
from . import lia
from .sexpr import parse_all, to_text

EXPAND_CAP = 64
LITERAL_UNFOLD_CAP = 24
WITNESS_SUM_CAP = 24
DEFAULT_BUDGET = 400_000


class CannotTranslate(Exception):
    pass


class CannotEval(Exception):
    pass


class DeadlineBudget(lia.Budget):
    __slots__ = ("deadline", "_check")

    def __init__(self, nodes, deadline=None):
        super().__init__(nodes)
        self.deadline = deadline
        self._check = 0

    def tick(self, n=1):
        super().tick(n)
        self._check += 1
        if self.deadline is not None and self._check % 256 == 0:
            if time.monotonic() > self.deadline:
                raise BudgetExceeded("solver deadline exceeded")


@dataclass
class RecurrenceRule:
    name: str
    params: tuple
    base: object = None
    step: object = None
    step_var: str = None

    @property
    def complete(self):
        return self.base is not None and self.step is not None


@dataclass
class SolveResult:
    verdict: str  # "sat" | "unsat" | "unknown"
    model: dict | None = None
    wants_model: bool = False

    def render(self):
        lines = [self.verdict]
        if self.wants_model:
            if self.verdict == "sat":
                lines.append("(model")
                for name in sorted(self.model or {}):
                    v = self.model[name]
                    lit = str(v) if v >= 0 else f"(- {-v})"
                    lines.append(f"  (define-fun {name} () Int {lit})")
                lines.append(")")
            else:
                lines.append('(error "model is not available")')
        return "\n".join(lines) + "\n"


@dataclass
class _Script:
    macros: dict = field(default_factory=dict)  # name -> (params, ret, body)
    declared: dict = field(default_factory=dict)  # name -> arity
    rules: dict = field(default_factory=dict)  # name -> RecurrenceRule
    goal: list = field(default_factory=list)  # translated IR formulas
    wants_model: bool = False
    checked: bool = False


def solve_script(text, budget=DEFAULT_BUDGET, timeout=None):
    """Decide one script. Any failure inside the pipeline degrades to an
    unknown verdict rather than an error."""
    deadline = time.monotonic() + timeout if timeout else None
    bud = DeadlineBudget(budget, deadline)
    try:
        commands = parse_all(text)
    except Exception:
        return SolveResult("unknown")
    sc = _Script()
    verdict = "unknown"
    model = None
    try:
        for cmd in commands:
            if not isinstance(cmd, list) or not cmd:
                continue
            head = cmd[0]
            if head in ("set-option", "set-logic", "set-info", "exit", "echo"):
                continue
            if head == "define-fun":
                _, name, params, ret, body = cmd
                sc.macros[name] = ([(p[0], p[1]) for p in params], ret, body)
            elif head == "declare-fun":
                sc.declared[cmd[1]] = len(cmd[2])
            elif head == "declare-const":
                sc.declared[cmd[1]] = 0
            elif head == "assert":
                _ingest_assert(sc, cmd[1], bud)
            elif head == "check-sat":
                verdict, model = _decide(sc, bud)
                sc.checked = True
            elif head == "get-model":
                sc.wants_model = True
    except (BudgetExceeded, CannotTranslate, lia.NotLinear, RecursionError):
        return SolveResult("unknown", wants_model=sc.wants_model)
    except Exception:
        return SolveResult("unknown", wants_model=sc.wants_model)
    if not sc.checked:
        return SolveResult("unknown", wants_model=sc.wants_model)
    return SolveResult(verdict, model, sc.wants_model)


# ---------------------------------------------------------------------------
# recurrence-axiom recognition (on raw terms, before translation)


def _ingest_assert(sc, term, bud):
    rule = _match_recurrence(sc, term)
    if rule is not None:
        name, which, params, step_var, rhs = rule
        r = sc.rules.setdefault(name, RecurrenceRule(name, params))
        if which == "base":
            r.base = rhs
        else:
            r.step = rhs
            r.step_var = step_var
        return
    sc.goal.append(_formula(sc, term, {}, bud))


def _match_recurrence(sc, term):
    """Recognize  (forall binds (=> guards (= (f xs last) rhs)))  with last
    either 0 or (+ n 1); returns (name, kind, params, step_var, rhs). A
    nullary base arrives unquantified as a bare equation."""
    if not isinstance(term, list) or not term:
        return None
    if term[0] == "forall":
        binds = [b[0] for b in term[1]]
        body = term[2]
    elif term[0] == "=":
        binds = []
        body = term
    else:
        return None
    if isinstance(body, list) and body and body[0] == "=>":
        body = body[2]
    if not (isinstance(body, list) and len(body) == 3 and body[0] == "="):
        return None
    lhs, rhs = body[1], body[2]
    if not (isinstance(lhs, list) and lhs and isinstance(lhs[0], str)):
        return None
    name = lhs[0]
    if name not in sc.declared or sc.declared[name] != len(lhs) - 1:
        return None
    args = lhs[1:]
    if len(args) < 1:
        return None
    head, last = args[:-1], args[-1]
    if list(head) != binds[: len(head)]:
        return None
    if last == "0":
        if len(binds) != len(head):
            return None
        return (name, "base", tuple(head), None, rhs)
    if isinstance(last, list) and len(last) == 3 and last[0] == "+":
        a, b = last[1], last[2]
        n = a if b == "1" else (b if a == "1" else None)
        if n is None or not isinstance(n, str):
            return None
        if binds != list(head) + [n]:
            return None
        return (name, "step", tuple(head), n, rhs)
    return None


# ---------------------------------------------------------------------------
# term/formula translation into the lia IR


def _int_term(sc, term, env, bud):
    bud.tick()
    if isinstance(term, str):
        if term in env:
            v = env[term]
            if not isinstance(v, tuple):
                raise CannotTranslate(term)
            return v
        if term.isdigit():
            return lia.lin_const(int(term))
        if term in sc.macros:
            params, ret, body = sc.macros[term]
            if params or ret != "Int":
                raise CannotTranslate(term)
            return _int_term(sc, body, {}, bud)
        if term in sc.declared and sc.declared[term] == 0:
            return lia.lin_var(term)
        raise CannotTranslate(term)
    head = term[0]
    if head == "+":
        out = lia.lin_const(0)
        for a in term[1:]:
            out = lia.lin_add(out, _int_term(sc, a, env, bud))
        return out
    if head == "*":
        out = lia.lin_const(1)
        for a in term[1:]:
            out = lia.lin_mul(out, _int_term(sc, a, env, bud))
        return out
    if head == "-":
        if len(term) == 2:
            return lia.lin_neg(_int_term(sc, term[1], env, bud))
        out = _int_term(sc, term[1], env, bud)
        for a in term[2:]:
            out = lia.lin_sub(out, _int_term(sc, a, env, bud))
        return out
    if isinstance(head, str) and head in sc.macros:
        params, ret, body = sc.macros[head]
        if ret != "Int" or len(params) != len(term) - 1:
            raise CannotTranslate(head)
        inner = {p[0]: _int_term(sc, a, env, bud) for p, a in zip(params, term[1:])}
        return _int_term(sc, body, inner, bud)
    if isinstance(head, str) and head in sc.declared:
        if sc.declared[head] != len(term) - 1:
            raise CannotTranslate(head)
        args = tuple(_int_term(sc, a, env, bud) for a in term[1:])
        return lia.lin_app(head, args)
    raise CannotTranslate(to_text(term))


def _formula(sc, term, env, bud):
    bud.tick()
    if term == "true":
        return lia.TRUE
    if term == "false":
        return lia.FALSE
    if isinstance(term, str):
        raise CannotTranslate(term)
    head = term[0]
    if head == "and":
        return lia.f_and([_formula(sc, a, env, bud) for a in term[1:]])
    if head == "or":
        return lia.f_or([_formula(sc, a, env, bud) for a in term[1:]])
    if head == "not":
        return lia.f_not(_formula(sc, term[1], env, bud))
    if head == "=>":
        args = [_formula(sc, a, env, bud) for a in term[1:]]
        out = args[-1]
        for a in reversed(args[:-1]):
            out = ("=>", a, out)
        return out
    if head in ("=", "<", "<=", ">", ">="):
        a = _int_term(sc, term[1], env, bud)
        b = _int_term(sc, term[2], env, bud)
        if head == "=":
            return ("eq", lia.lin_sub(a, b))
        if head == "<":
            return ("lt", lia.lin_sub(a, b))
        if head == ">":
            return ("lt", lia.lin_sub(b, a))
        if head == "<=":
            return ("lt", lia.lin_add(lia.lin_sub(a, b), lia.lin_const(-1)))
        return ("lt", lia.lin_add(lia.lin_sub(b, a), lia.lin_const(-1)))
    if head in ("exists", "forall"):
        out = _formula(sc, term[2], _bind(env, term[1]), bud)
        for v, _sort in reversed(term[1]):
            out = (head, _scoped(env, v), out)
        return out
    if isinstance(head, str) and head in sc.macros:
        params, ret, body = sc.macros[head]
        if ret != "Bool" or len(params) != len(term) - 1:
            raise CannotTranslate(head)
        inner = {p[0]: _int_term(sc, a, env, bud) for p, a in zip(params, term[1:])}
        return _formula(sc, body, inner, bud)
    raise CannotTranslate(to_text(term))


def _scoped(env, name):
    # alpha-rename shadowed binders so IR variable names stay unique
    return name if name not in env else f"{name}#"


def _bind(env, binders):
    out = dict(env)
    for v, _sort in binders:
        out[v] = lia.lin_var(_scoped(env, v))
    return out


# ---------------------------------------------------------------------------
# ground evaluation against recurrence rules


def _eval_app(sc, name, args, memo, bud):
    bud.tick()
    key = (name, tuple(args))
    if key in memo:
        return memo[key]
    rule = sc.rules.get(name)
    if rule is None or not rule.complete:
        raise CannotEval(name)
    if any(a < 0 for a in args):
        # the axioms only pin values on the nonnegative orthant
        raise CannotEval(name)
    last = args[-1]
    env = dict(zip(rule.params, args[:-1]))
    if last == 0:
        val = _eval_int(sc, rule.base, env, memo, bud)
    else:
        env[rule.step_var] = last - 1
        val = _eval_int(sc, rule.step, env, memo, bud)
    memo[key] = val
    return val


def _eval_int(sc, term, env, memo, bud):
    bud.tick()
    if isinstance(term, str):
        if term in env:
            return env[term]
        if term.isdigit():
            return int(term)
        if term in sc.macros:
            params, _ret, body = sc.macros[term]
            if params:
                raise CannotEval(term)
            return _eval_int(sc, body, {}, memo, bud)
        raise CannotEval(term)
    head = term[0]
    if head == "+":
        return sum(_eval_int(sc, a, env, memo, bud) for a in term[1:])
    if head == "*":
        out = 1
        for a in term[1:]:
            out *= _eval_int(sc, a, env, memo, bud)
        return out
    if head == "-":
        if len(term) == 2:
            return -_eval_int(sc, term[1], env, memo, bud)
        out = _eval_int(sc, term[1], env, memo, bud)
        for a in term[2:]:
            out -= _eval_int(sc, a, env, memo, bud)
        return out
    if isinstance(head, str) and head in sc.macros:
        params, _ret, body = sc.macros[head]
        inner = {p[0]: _eval_int(sc, a, env, memo, bud) for p, a in zip(params, term[1:])}
        return _eval_int(sc, body, inner, memo, bud)
    if isinstance(head, str) and head in sc.rules:
        args = [_eval_int(sc, a, env, memo, bud) for a in term[1:]]
        return _eval_app(sc, head, args, memo, bud)
    raise CannotEval(to_text(term))


def _lin_eval(sc, lin, memo, bud):
    total = lin[1]
    for k, c in lin[0]:
        total += c * _key_eval(sc, k, memo, bud)
    return total


def _key_eval(sc, key, memo, bud):
    if isinstance(key, str):
        raise CannotEval(key)
    if key[0] == "mul":
        return _lin_eval(sc, key[1], memo, bud) * _lin_eval(sc, key[2], memo, bud)
    args = [_lin_eval(sc, a, memo, bud) for a in key[2]]
    return _eval_app(sc, key[1], args, memo, bud)


def _eval_formula(sc, f, memo, bud):
    bud.tick()
    tag = f[0]
    if tag == "true":
        return True
    if tag == "false":
        return False
    if tag == "lt":
        return _lin_eval(sc, f[1], memo, bud) < 0
    if tag == "eq":
        return _lin_eval(sc, f[1], memo, bud) == 0
    if tag in ("dvd", "ndvd"):
        ok = _lin_eval(sc, f[2], memo, bud) % f[1] == 0
        return ok if tag == "dvd" else not ok
    if tag == "and":
        return all(_eval_formula(sc, x, memo, bud) for x in f[1])
    if tag == "or":
        return any(_eval_formula(sc, x, memo, bud) for x in f[1])
    if tag == "not":
        return not _eval_formula(sc, f[1], memo, bud)
    if tag == "=>":
        return (not _eval_formula(sc, f[1], memo, bud)) or _eval_formula(sc, f[2], memo, bud)
    raise CannotEval(tag)


def _has_quantifier(f):
    tag = f[0]
    if tag in ("exists", "forall"):
        return True
    if tag in ("and", "or"):
        return any(_has_quantifier(x) for x in f[1])
    if tag == "not":
        return _has_quantifier(f[1])
    if tag == "=>":
        return _has_quantifier(f[1]) or _has_quantifier(f[2])
    return False


# ---------------------------------------------------------------------------
# app reduction and abstraction


def _map_lins(f, fn):
    tag = f[0]
    if tag in ("lt", "eq"):
        return (tag, fn(f[1]))
    if tag in ("dvd", "ndvd"):
        return (tag, f[1], fn(f[2]))
    if tag in ("and", "or"):
        return (tag, tuple(_map_lins(x, fn) for x in f[1]))
    if tag == "not":
        return ("not", _map_lins(f[1], fn))
    if tag == "=>":
        return ("=>", _map_lins(f[1], fn), _map_lins(f[2], fn))
    if tag in ("exists", "forall"):
        return (tag, f[1], _map_lins(f[2], fn))
    return f


def _reduce_lin(sc, lin, memo, bud, unfold_var=None):
    """Rewrite app keys: fully ground ones evaluate, last-arg-0 ones take the
    base rule symbolically, last-arg unfold_var+1 take one step unfold."""
    bud.tick()
    out = lia.lin_const(lin[1])
    for k, c in lin[0]:
        out = lia.lin_add(out, lia.tuple_scale(_reduce_key(sc, k, memo, bud, unfold_var), c))
    return out


def _reduce_key(sc, key, memo, bud, unfold_var):
    if isinstance(key, str):
        return lia.lin_var(key)
    if key[0] == "mul":
        return lia.lin_mul(
            _reduce_lin(sc, key[1], memo, bud, unfold_var),
            _reduce_lin(sc, key[2], memo, bud, unfold_var),
        )
    name = key[1]
    args = tuple(_reduce_lin(sc, a, memo, bud, unfold_var) for a in key[2])
    rule = sc.rules.get(name)
    if rule is not None and rule.complete and args:
        vals = [lia.lin_value(a) for a in args]
        if all(v is not None for v in vals):
            try:
                return lia.lin_const(_eval_app(sc, name, vals, memo, bud))
            except CannotEval:
                pass
        last = args[-1]
        env = dict(zip(rule.params, args[:-1]))
        last_val = lia.lin_value(last)
        if last_val == 0:
            t = _int_term(sc, rule.base, env, bud)
            return _reduce_lin(sc, t, memo, bud, unfold_var)
        if last_val is not None and 0 < last_val <= LITERAL_UNFOLD_CAP:
            # peel the recurrence one literal step at a time; the recursive
            # occurrence in the body resurfaces with last argument k-1 and
            # reduces further on the way back through _reduce_lin
            bud.tick(4)
            env[rule.step_var] = lia.lin_const(last_val - 1)
            t = _int_term(sc, rule.step, env, bud)
            return _reduce_lin(sc, t, memo, bud, unfold_var)
        if unfold_var is not None and last == lia.lin_add(lia.lin_var(unfold_var), lia.lin_const(1)):
            env[rule.step_var] = lia.lin_var(unfold_var)
            t = _int_term(sc, rule.step, env, bud)
            return _reduce_lin(sc, t, memo, bud, None)
    return (((("app", name, args), 1),), 0)


def _reduce_apps(sc, f, bud, unfold_var=None):
    memo = {}
    return lia.simplify(_map_lins(f, lambda lin: _reduce_lin(sc, lin, memo, bud, unfold_var)), bud)


def _key_vars(k, acc):
    if isinstance(k, str):
        acc.add(k)
        return
    if k[0] == "mul":
        lins = (k[1], k[2])
    else:
        lins = k[2]
    for lin in lins:
        for kk, _ in lin[0]:
            _key_vars(kk, acc)


def _abstract_apps(formulas):
    """Replace rigid compound keys by fresh shared variables. A key that
    mentions a quantified variable is not a constant and must stay put
    (leaving it blocks the validity check, which is the safe direction)."""
    bound = set()

    def collect_bound(f):
        tag = f[0]
        if tag in ("and", "or"):
            for p in f[1]:
                collect_bound(p)
        elif tag == "not":
            collect_bound(f[1])
        elif tag == "=>":
            collect_bound(f[1])
            collect_bound(f[2])
        elif tag in ("exists", "forall"):
            bound.add(f[1])
            collect_bound(f[2])

    for f in formulas:
        collect_bound(f)

    mapping = {}
    fresh = count()

    def walk_lin(lin):
        out = lia.lin_const(lin[1])
        for k, c in lin[0]:
            if isinstance(k, str):
                out = lia.lin_add(out, lia.tuple_scale(lia.lin_var(k), c))
                continue
            acc = set()
            _key_vars(k, acc)
            if acc & bound:
                out = lia.lin_add(out, (((k, c),), 0))
                continue
            if k not in mapping:
                mapping[k] = f"@u{next(fresh)}"
            out = lia.lin_add(out, lia.tuple_scale(lia.lin_var(mapping[k]), c))
        return out

    return [_map_lins(f, walk_lin) for f in formulas], mapping


# ---------------------------------------------------------------------------
# the decision pipeline


def _decide(sc, bud):
    F = lia.simplify(lia.f_and(sc.goal), bud)
    F = lia.simplify(lia.expand_bounded(F, EXPAND_CAP, bud), bud)
    if sc.rules:
        F = _reduce_apps(sc, F, bud)
    apps = lia.formula_apps(F)
    if not apps:
        return _decide_linear(sc, F, bud)

    frees = sorted(lia.formula_free_vars(F))
    if not frees and not _has_quantifier(F):
        try:
            ok = _eval_formula(sc, F, {}, bud)
            return ("sat" if ok else "unsat", {} if ok else None)
        except CannotEval:
            pass

    model = _witness_search(sc, F, frees, bud)
    if model is not None:
        return "sat", model
    if _induction(sc, F, bud):
        return "unsat", None
    if _refute_by_instantiation(sc, F, bud):
        return "unsat", None
    return "unknown", None


def _decide_linear(sc, F, bud):
    frees = sorted(lia.formula_free_vars(F))
    try:
        closed = F
        for v in frees:
            closed = ("exists", v, closed)
        res = lia.eliminate_quantifiers(closed, bud)
        res = lia.simplify(res, bud)
        if res == lia.FALSE:
            return "unsat", None
        if res == lia.TRUE:
            model = _witness_search(sc, F, frees, bud) if frees else {}
            return "sat", model if model is not None else {}
    except lia.NotLinear:
        model = _witness_search(sc, F, frees, bud)
        if model is not None:
            return "sat", model
        if _refute_by_instantiation(sc, F, bud):
            return "unsat", None
    return "unknown", None


def _nonneg_tuples(k, total):
    if k == 0:
        if total == 0:
            yield ()
        return
    for head in range(total + 1):
        for rest in _nonneg_tuples(k - 1, total - head):
            yield (head,) + rest


VALIDITY_ATTEMPTS = 8


def _witness_search(sc, F, frees, bud):
    """Try small nonnegative assignments to the free constants; a hit is a
    verified model. Exhaustion proves nothing."""
    if not frees:
        return None
    if len(frees) > 4:
        return None
    validity_left = VALIDITY_ATTEMPTS
    for total in range(WITNESS_SUM_CAP + 1):
        for combo in _nonneg_tuples(len(frees), total):
            bud.tick()
            G = F
            for v, val in zip(frees, combo):
                G = lia.formula_subst(G, v, lia.lin_const(val), bud)
            G = lia.simplify(G, bud)
            if sc.rules:
                G = _reduce_apps(sc, G, bud)
            G = lia.simplify(lia.expand_bounded(G, EXPAND_CAP, bud), bud)
            if G == lia.TRUE:
                return dict(zip(frees, combo))
            if G == lia.FALSE:
                continue
            if lia.formula_apps(G):
                if lia.formula_free_vars(G):
                    continue
                if not _has_quantifier(G):
                    try:
                        if _eval_formula(sc, G, {}, bud):
                            return dict(zip(frees, combo))
                    except CannotEval:
                        pass
                elif validity_left > 0:
                    # residual universal facts about recurrences may still
                    # hold by induction
                    validity_left -= 1
                    if _prove_valid(sc, G, bud):
                        return dict(zip(frees, combo))
                continue
            try:
                res = lia.simplify(lia.eliminate_quantifiers(G, bud), bud)
                if res == lia.TRUE:
                    return dict(zip(frees, combo))
            except lia.NotLinear:
                continue
    return None


PROVE_VALID_DEPTH = 2


def _prove_valid(sc, G, bud, depth=0):
    """Is the closed formula G provably true? Negate, strip the leading
    existential prefix into free constants, and refute what remains."""
    if depth > PROVE_VALID_DEPTH:
        return False
    try:
        neg = lia.nnf(lia.f_not(G), bud)
        while neg[0] == "exists":
            neg = neg[2]
        neg = lia.simplify(neg, bud)
        if neg == lia.FALSE:
            return True
        if neg == lia.TRUE:
            return False
        if _induction(sc, neg, bud, depth):
            return True
        return _refute_by_instantiation(sc, neg, bud)
    except (lia.NotLinear, BudgetExceeded):
        return False


INSTANTIATION_VALUES = tuple(range(9))
INSTANTIATION_DEPTH = 3


def _lin_hard(lin):
    # any compound key (a product of variables or an unreduced recurrence
    # application) is outside what quantifier elimination can touch
    return any(isinstance(k, tuple) for k, _ in lin[0])


def _formula_hard(f):
    tag = f[0]
    if tag in ("true", "false"):
        return False
    if tag in ("and", "or"):
        return any(_formula_hard(p) for p in f[1])
    if tag == "not":
        return _formula_hard(f[1])
    if tag == "=>":
        return _formula_hard(f[1]) or _formula_hard(f[2])
    if tag in ("exists", "forall"):
        return _formula_hard(f[2])
    if tag in ("lt", "eq"):
        return _lin_hard(f[1])
    if tag in ("dvd", "ndvd"):
        return _lin_hard(f[2])
    return True


def _entailed_linear(sc, f, bud, depth=INSTANTIATION_DEPTH):
    """Linear consequences of a hard conjunct: universals are instantiated
    at small literals, conjunctions split; anything still hard is dropped."""
    if not _formula_hard(f):
        return [f]
    if f[0] == "and":
        out = []
        for p in f[1]:
            out.extend(_entailed_linear(sc, p, bud, depth))
        return out
    if f[0] == "forall" and depth > 0:
        out = []
        for k in INSTANTIATION_VALUES:
            bud.tick(4)
            inst = lia.simplify(
                lia.formula_subst(f[2], f[1], lia.lin_const(k), bud), bud
            )
            if sc.rules:
                inst = lia.simplify(_reduce_apps(sc, inst, bud), bud)
            out.extend(_entailed_linear(sc, inst, bud, depth - 1))
        return out
    return []


def _lin_weight(lin):
    return sum(abs(c) for _, c in lin[0])


def _formula_weight(f):
    tag = f[0]
    if tag in ("true", "false"):
        return 0
    if tag in ("and", "or"):
        return sum(_formula_weight(p) for p in f[1])
    if tag == "not":
        return _formula_weight(f[1])
    if tag == "=>":
        return _formula_weight(f[1]) + _formula_weight(f[2])
    if tag in ("exists", "forall"):
        return 1 + _formula_weight(f[2])
    if tag in ("lt", "eq"):
        return 1 + _lin_weight(f[1])
    if tag in ("dvd", "ndvd"):
        return 1 + _lin_weight(f[2])
    return 99


REFUTE_ATTEMPT_BUDGET = 80_000


def _refute_by_instantiation(sc, F, bud):
    """Weaken the goal set to entailed linear facts and try quantifier
    elimination on small subsets; FALSE there refutes the original set.
    Nothing follows from TRUE, so this path only ever reports unsat."""
    try:
        G = lia.nnf(lia.simplify(F, bud), bud)
        parts = list(G[1]) if G[0] == "and" else [G]
        kept, derived = [], []
        for p in parts:
            if _formula_hard(p):
                derived.extend(_entailed_linear(sc, p, bud))
            else:
                kept.append(p)
        if not derived:
            return False
    except (lia.NotLinear, BudgetExceeded):
        return False
    derived.sort(key=_formula_weight)
    # big coefficient sets make elimination explode, so try cheap subsets
    attempts = [kept + [d] for d in derived[:8]]
    attempts += [kept + derived[:n] for n in (2, 3) if len(derived) >= n]
    for parts_try in attempts:
        bud.tick(64)
        sub = lia.Budget(REFUTE_ATTEMPT_BUDGET)
        try:
            closed = lia.f_and(tuple(parts_try))
            for v in sorted(lia.formula_free_vars(closed)):
                closed = ("exists", v, closed)
            res = lia.simplify(lia.eliminate_quantifiers(closed, sub), sub)
            if res == lia.FALSE:
                return True
        except (lia.NotLinear, BudgetExceeded):
            continue
    return False


def _guard_of(f, var):
    """Recognize the skolem guard  var >= 0  (lt over -var - 1)."""
    return f == ("lt", (((var, -1),), -1))


def _induction(sc, F, bud, depth=0):
    """Try to refute the goal set by proving the universal statement it
    negates, by induction on each guarded free constant in turn."""
    if not sc.rules:
        return False
    parts = list(F[1]) if F[0] == "and" else [F]
    frees = sorted(lia.formula_free_vars(F))
    for c in frees:
        guard_idx = None
        for i, p in enumerate(parts):
            if _guard_of(p, c):
                guard_idx = i
                break
        if guard_idx is None:
            continue
        rest = [p for i, p in enumerate(parts) if i != guard_idx]
        if not rest:
            continue
        # psi(x) states the property; the goal asserts its negation at c
        psi = lia.f_not(lia.f_and(rest))
        if _induction_on(sc, psi, c, bud, depth):
            return True
    return False


def _mentions_minus(t):
    if isinstance(t, list):
        return bool(t) and t[0] == "-" or any(_mentions_minus(x) for x in t)
    return False


def _rule_nonneg(rule):
    """Whether the recurrence provably stays nonnegative on nonnegative
    arguments: true when neither base nor step uses subtraction (the only
    sign-lowering operator in scope)."""
    return not _mentions_minus(rule.base) and not _mentions_minus(rule.step)


def _nonneg(var):
    return ("lt", (((var, -1),), -1))  # var >= 0


def _induction_on(sc, psi, c, bud, depth=0):
    x = "@ind"
    psi_x = lia.formula_subst(psi, c, lia.lin_var(x), bud)

    base = lia.formula_subst(psi, c, lia.lin_const(0), bud)
    base = _reduce_apps(sc, base, bud)
    if lia.formula_apps(base):
        if not _prove_valid(sc, base, bud, depth + 1):
            return False
    elif not _valid(base, bud):
        return False

    hyp = _reduce_apps(sc, psi_x, bud)
    concl = lia.formula_subst(psi, c, lia.lin_add(lia.lin_var(x), lia.lin_const(1)), bud)
    concl = _reduce_apps(sc, concl, bud, unfold_var=x)
    (hyp2, concl2), mapping = _abstract_apps([hyp, concl])
    guards = [_nonneg(x)]
    for key, var in mapping.items():
        rule = sc.rules.get(key[1])
        if rule is not None and rule.complete and _rule_nonneg(rule):
            guards.append(_nonneg(var))
    step = ("=>", lia.f_and(guards + [hyp2]), concl2)
    return _valid(step, bud)


def _valid(f, bud):
    neg = lia.nnf(lia.f_not(f), bud)
    for v in sorted(lia.formula_free_vars(neg)):
        neg = ("exists", v, neg)
    try:
        res = lia.simplify(lia.eliminate_quantifiers(neg, bud), bud)
    except lia.NotLinear:
        return False
    return res == lia.FALSE

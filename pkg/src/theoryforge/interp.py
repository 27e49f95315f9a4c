"""Computational interpretations of entities.

Every entity carries an evaluator that maps concrete instances to a
tri-valued verdict. Seed concepts wrap named builtins; derived concepts
compose the evaluators of their construction inputs, mirroring the
production rule that made them. All nodes are plain dataclasses so graphs
pickle across process boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import BudgetExceeded


class TriBool(Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"

    def negate(self):
        if self is TriBool.TRUE:
            return TriBool.FALSE
        if self is TriBool.FALSE:
            return TriBool.TRUE
        return TriBool.UNKNOWN


def tb(value: bool) -> TriBool:
    return TriBool.TRUE if value else TriBool.FALSE


# The default evaluation budget: primitive steps per classify call.
DEFAULT_STEP_BUDGET = 10_000
# Quantifiers over the naturals search 0..max(instance values, this floor).
NAT_QUANT_FLOOR = 20
# Ranges are lazy and clipped so len() fits a machine word; any budget
# exhausts long before an index this large, so the clip is unobservable.
NAT_RANGE_CAP = 2**62
# Computed numbers beyond this size abort evaluation: iterated squaring
# doubles the representation every step, which the step budget alone
# cannot keep out of memory.
VALUE_BIT_CAP = 1_000_000


class EvalContext:
    """Carries the quantifier range and the step budget through evaluation."""

    __slots__ = ("values", "steps")

    def __init__(self, values, budget=DEFAULT_STEP_BUDGET):
        self.values = values  # indexable sequence quantifiers range over
        self.steps = budget

    def tick(self, n=1):
        self.steps -= n
        if self.steps < 0:
            raise BudgetExceeded("evaluation step budget exhausted")


def nat_context(instance, budget=DEFAULT_STEP_BUDGET) -> EvalContext:
    bound = max([NAT_QUANT_FLOOR, *instance]) if instance else NAT_QUANT_FLOOR
    return EvalContext(range(min(bound, NAT_RANGE_CAP) + 1), budget)


def ff_context(size, budget=DEFAULT_STEP_BUDGET) -> EvalContext:
    return EvalContext(range(size), budget)


# ---------------------------------------------------------------------------
# builtin registry


_BUILTIN_FUNCS: dict = {}
_BUILTIN_PREDS: dict = {}


def register_builtin_func(name, fn):
    _BUILTIN_FUNCS[name] = fn


def register_builtin_pred(name, fn):
    _BUILTIN_PREDS[name] = fn


def nat_successor(args):
    return args[0] + 1


def nat_add(args):
    return args[0] + args[1]


def nat_multiply(args):
    return args[0] * args[1]


def pred_equals(args):
    return args[0] == args[1]


def pred_leq(args):
    return args[0] <= args[1]


def pred_divides(args):
    d, n = args
    if d == 0:
        return n == 0
    return n % d == 0


register_builtin_func("nat_successor", nat_successor)
register_builtin_func("nat_add", nat_add)
register_builtin_func("nat_multiply", nat_multiply)
register_builtin_pred("equals", pred_equals)
register_builtin_pred("leq", pred_leq)
register_builtin_pred("divides", pred_divides)


class Interp:
    """Base evaluator. Functions implement eval_func, predicates eval_pred.

    eval_func returns an int or None (undetermined); eval_pred returns a
    TriBool. Both may raise BudgetExceeded, which callers map to Unknown.
    """

    def eval_func(self, args, ctx):
        raise NotImplementedError

    def eval_pred(self, args, ctx):
        raise NotImplementedError


@dataclass(frozen=True)
class BuiltinFunc(Interp):
    name: str

    def eval_func(self, args, ctx):
        ctx.tick()
        result = _BUILTIN_FUNCS[self.name](args)
        if result is not None and result.bit_length() > VALUE_BIT_CAP:
            raise BudgetExceeded("computed value exceeds the magnitude cap")
        return result


@dataclass(frozen=True)
class BuiltinPred(Interp):
    name: str

    def eval_pred(self, args, ctx):
        ctx.tick()
        return tb(_BUILTIN_PREDS[self.name](args))


@dataclass(frozen=True)
class ConstInterp(Interp):
    value: int

    def eval_func(self, args, ctx):
        ctx.tick()
        return self.value


@dataclass(frozen=True)
class ComposeInterp(Interp):
    """outer(... inner(x_1..x_n) at mapped slots, params elsewhere ...).

    `slot_map` gives, for each input position of the outer definition, either
    ('inner', output_index) or ('param', extra_param_index). Shared predicate
    composition (inner and outer both predicates joined by AND over shared
    variables) uses `conjunction=True` with slot_map describing the outer's
    argument sources relative to the joint parameter list.
    """

    inner: Interp
    inner_arity: int
    outer: Interp
    slot_map: tuple
    outer_is_pred: bool
    inner_is_pred: bool = False
    conjunction: bool = False

    def _outer_args(self, args, ctx):
        inner_args = args[: self.inner_arity]
        out = []
        inner_val = None
        for kind, idx in self.slot_map:
            if kind == "inner":
                if inner_val is None:
                    inner_val = self.inner.eval_func(inner_args, ctx)
                    if inner_val is None:
                        return None
                out.append(inner_val)
            elif kind == "param":
                out.append(args[self.inner_arity + idx])
            else:  # shared joint variable, index into args directly
                out.append(args[idx])
        return tuple(out)

    def eval_func(self, args, ctx):
        outer_args = self._outer_args(args, ctx)
        if outer_args is None:
            return None
        return self.outer.eval_func(outer_args, ctx)

    def eval_pred(self, args, ctx):
        if self.conjunction:
            first = self.inner.eval_pred(args[: self.inner_arity], ctx)
            if first is TriBool.FALSE:
                return TriBool.FALSE
            outer_args = self._outer_args(args, ctx)
            second = self.outer.eval_pred(outer_args, ctx)
            if second is TriBool.FALSE:
                return TriBool.FALSE
            if first is TriBool.TRUE and second is TriBool.TRUE:
                return TriBool.TRUE
            return TriBool.UNKNOWN
        outer_args = self._outer_args(args, ctx)
        if outer_args is None:
            return TriBool.UNKNOWN
        return self.outer.eval_pred(outer_args, ctx)


def _assignments(ctx, k):
    """Iterate all k-tuples over the context's value range, budget-checked."""
    if k == 0:
        yield ()
        return
    values = ctx.values
    idx = [0] * k
    while True:
        ctx.tick()
        yield tuple(values[i] for i in idx)
        pos = k - 1
        while pos >= 0:
            idx[pos] += 1
            if idx[pos] < len(values):
                break
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            return


@dataclass(frozen=True)
class ExistsPred(Interp):
    """Existential projection of a predicate or the graph of a function.

    For a predicate P of arity n with quantified index set I, this is
    Q(remaining) := exists x_I . P(x). For a function F it additionally
    appends the output as the final free argument:
    Q(remaining, y) := exists x_I . F(x) = y.

    Over the naturals a failed bounded search returns FALSE: the bounded
    range is the decision procedure by design, which is what lets derived
    divisibility classify non-multiples as negatives.
    """

    base: Interp
    base_arity: int
    quantified: tuple
    base_is_func: bool = False

    def eval_pred(self, args, ctx):
        free = [i for i in range(self.base_arity) if i not in self.quantified]
        if self.base_is_func:
            expected = args[-1]
            free_vals = args[:-1]
        else:
            free_vals = args
        saw_unknown = False
        for combo in _assignments(ctx, len(self.quantified)):
            full = [0] * self.base_arity
            for i, v in zip(free, free_vals):
                full[i] = v
            for i, v in zip(self.quantified, combo):
                full[i] = v
            if self.base_is_func:
                out = self.base.eval_func(tuple(full), ctx)
                if out is None:
                    saw_unknown = True
                elif out == expected:
                    return TriBool.TRUE
            else:
                r = self.base.eval_pred(tuple(full), ctx)
                if r is TriBool.TRUE:
                    return TriBool.TRUE
                if r is TriBool.UNKNOWN:
                    saw_unknown = True
        return TriBool.UNKNOWN if saw_unknown else TriBool.FALSE


@dataclass(frozen=True)
class ForAllPred(Interp):
    """Universal quantification over selected inputs of a predicate.

    Over the naturals the range is unbounded, so without a prover
    certificate every verdict is UNKNOWN. Over a finite domain (the context
    covers every element) enumeration is exact.
    """

    base: Interp
    base_arity: int
    quantified: tuple
    exhaustive: bool = False  # set for finite domains

    def eval_pred(self, args, ctx):
        if not self.exhaustive:
            return TriBool.UNKNOWN
        free = [i for i in range(self.base_arity) if i not in self.quantified]
        saw_unknown = False
        for combo in _assignments(ctx, len(self.quantified)):
            full = [0] * self.base_arity
            for i, v in zip(free, args):
                full[i] = v
            for i, v in zip(self.quantified, combo):
                full[i] = v
            r = self.base.eval_pred(tuple(full), ctx)
            if r is TriBool.FALSE:
                return TriBool.FALSE
            if r is TriBool.UNKNOWN:
                saw_unknown = True
        return TriBool.UNKNOWN if saw_unknown else TriBool.TRUE


@dataclass(frozen=True)
class ForAllImplies(Interp):
    """Merged-variable universal implication between two predicates.

    The joint parameter list is the first predicate's variables followed by
    the second's unshared ones; `tau` maps the second predicate's positions
    into that joint list. Quantified indices refer to the joint list.
    """

    p: Interp
    p_arity: int
    q: Interp
    q_arity: int
    tau: tuple
    joint_arity: int
    quantified: tuple
    exhaustive: bool = False

    def matrix(self, joint, ctx):
        pv = self.p.eval_pred(tuple(joint[: self.p_arity]), ctx)
        if pv is TriBool.FALSE:
            return TriBool.TRUE
        qv = self.q.eval_pred(tuple(joint[j] for j in self.tau), ctx)
        if pv is TriBool.TRUE:
            return qv
        if qv is TriBool.TRUE:
            return TriBool.TRUE
        return TriBool.UNKNOWN

    def eval_pred(self, args, ctx):
        if not self.exhaustive:
            return TriBool.UNKNOWN
        free = [i for i in range(self.joint_arity) if i not in self.quantified]
        saw_unknown = False
        for combo in _assignments(ctx, len(self.quantified)):
            joint = [0] * self.joint_arity
            for i, v in zip(free, args):
                joint[i] = v
            for i, v in zip(self.quantified, combo):
                joint[i] = v
            r = self.matrix(joint, ctx)
            if r is TriBool.FALSE:
                return TriBool.FALSE
            if r is TriBool.UNKNOWN:
                saw_unknown = True
        return TriBool.UNKNOWN if saw_unknown else TriBool.TRUE


@dataclass(frozen=True)
class IterateFunc(Interp):
    """n-fold iteration of a function.

    Unary base F: G(x, n) = F^n(x). Binary base F with an initial value v:
    G(x, 0) = v and G(x, n+1) = F(G(x, n), x).
    """

    base: Interp
    init: int | None = None  # None marks the unary form

    def eval_func(self, args, ctx):
        *rest, n = args
        if n < 0:
            return None
        if self.init is None:
            acc = rest[0]
            for _ in range(n):
                ctx.tick()
                acc = self.base.eval_func((acc,), ctx)
                if acc is None:
                    return None
        else:
            acc = self.init
            for _ in range(n):
                ctx.tick()
                acc = self.base.eval_func((acc, rest[0]), ctx)
                if acc is None:
                    return None
        return acc


@dataclass(frozen=True)
class MatchInterp(Interp):
    """Identify a set of input positions, keeping the lowest index."""

    base: Interp
    base_arity: int
    matched: tuple  # ascending, length >= 2
    is_pred: bool = True

    def _expand(self, args):
        target = self.matched[0]
        kept = sorted(set(range(self.base_arity)) - set(self.matched[1:]))
        full = [0] * self.base_arity
        for pos, v in zip(kept, args):
            full[pos] = v
        for pos in self.matched[1:]:
            full[pos] = full[target]
        return tuple(full)

    def eval_pred(self, args, ctx):
        return self.base.eval_pred(self._expand(args), ctx)

    def eval_func(self, args, ctx):
        return self.base.eval_func(self._expand(args), ctx)


@dataclass(frozen=True)
class SpecializeInterp(Interp):
    """Fix one input position to a constant value."""

    base: Interp
    base_arity: int
    index: int
    value: int
    is_pred: bool = True

    def _expand(self, args):
        full = list(args[: self.index]) + [self.value] + list(args[self.index :])
        return tuple(full)

    def eval_pred(self, args, ctx):
        return self.base.eval_pred(self._expand(args), ctx)

    def eval_func(self, args, ctx):
        return self.base.eval_func(self._expand(args), ctx)


@dataclass(frozen=True)
class NegateInterp(Interp):
    base: Interp

    def eval_pred(self, args, ctx):
        return self.base.eval_pred(args, ctx).negate()


@dataclass(frozen=True)
class SizeInterp(Interp):
    """Count satisfying assignments of the counted positions.

    Returns None (undetermined) when every candidate in range satisfies the
    predicate, since the true count may then exceed the bounded range; a
    finite exhaustive domain is always exact.
    """

    base: Interp
    base_arity: int
    counted: tuple
    exhaustive: bool = False

    def eval_func(self, args, ctx):
        free = [i for i in range(self.base_arity) if i not in self.counted]
        count = 0
        total = 0
        for combo in _assignments(ctx, len(self.counted)):
            total += 1
            full = [0] * self.base_arity
            for i, v in zip(free, args):
                full[i] = v
            for i, v in zip(self.counted, combo):
                full[i] = v
            r = self.base.eval_pred(tuple(full), ctx)
            if r is TriBool.UNKNOWN:
                return None
            if r is TriBool.TRUE:
                count += 1
        if count == total and not self.exhaustive:
            return None
        return count


# ---------------------------------------------------------------------------
# closed conjecture statements


@dataclass(frozen=True)
class ImplicationStmt(Interp):
    """forall x . P(x) => Q(x), variables merged over a shared prefix."""

    p: Interp
    q: Interp
    arity: int
    exhaustive: bool = False

    def matrix(self, assignment, ctx):
        pv = self.p.eval_pred(assignment, ctx)
        if pv is TriBool.FALSE:
            return TriBool.TRUE
        qv = self.q.eval_pred(assignment, ctx)
        if pv is TriBool.TRUE:
            return qv
        if qv is TriBool.TRUE:
            return TriBool.TRUE
        return TriBool.UNKNOWN

    def eval_pred(self, args, ctx):
        return _eval_universal(self, ctx)


@dataclass(frozen=True)
class EquivalenceStmt(Interp):
    """forall x . P(x) <=> Q(x); for functions, forall x . F(x) = G(x)."""

    a: Interp
    b: Interp
    arity: int
    funcs: bool = False
    exhaustive: bool = False

    def matrix(self, assignment, ctx):
        if self.funcs:
            va = self.a.eval_func(assignment, ctx)
            vb = self.b.eval_func(assignment, ctx)
            if va is None or vb is None:
                return TriBool.UNKNOWN
            return tb(va == vb)
        va = self.a.eval_pred(assignment, ctx)
        vb = self.b.eval_pred(assignment, ctx)
        if va is TriBool.UNKNOWN or vb is TriBool.UNKNOWN:
            return TriBool.UNKNOWN
        return tb(va is vb)

    def eval_pred(self, args, ctx):
        return _eval_universal(self, ctx)


@dataclass(frozen=True)
class NonexistenceStmt(Interp):
    """not exists x . P(x); for a function, not exists x . F(x) = v."""

    p: Interp
    arity: int
    is_func: bool = False
    value: int | None = None
    exhaustive: bool = False

    def matrix(self, assignment, ctx):
        if self.is_func:
            out = self.p.eval_func(assignment, ctx)
            if out is None:
                return TriBool.UNKNOWN
            return tb(out != self.value)
        return self.p.eval_pred(assignment, ctx).negate()

    def eval_pred(self, args, ctx):
        return _eval_universal(self, ctx)


@dataclass(frozen=True)
class ExclusivityStmt(Interp):
    """forall x . P(x) => x in a fixed finite set of instances."""

    p: Interp
    arity: int
    members: tuple
    exhaustive: bool = False

    def matrix(self, assignment, ctx):
        if tuple(assignment) in self.members:
            return TriBool.TRUE
        return self.p.eval_pred(assignment, ctx).negate()

    def eval_pred(self, args, ctx):
        return _eval_universal(self, ctx)


def _eval_universal(stmt, ctx):
    """Exhaustively evaluate a closed universal statement on finite domains;
    UNKNOWN over the naturals (prover certificates handle those)."""
    if not stmt.exhaustive:
        return TriBool.UNKNOWN
    saw_unknown = False
    for combo in _assignments(ctx, stmt.arity):
        r = stmt.matrix(combo, ctx)
        if r is TriBool.FALSE:
            return TriBool.FALSE
        if r is TriBool.UNKNOWN:
            saw_unknown = True
    return TriBool.UNKNOWN if saw_unknown else TriBool.TRUE


CLOSED_STATEMENTS = (ImplicationStmt, EquivalenceStmt, NonexistenceStmt, ExclusivityStmt)

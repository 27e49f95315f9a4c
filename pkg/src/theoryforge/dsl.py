"""Definition language for entities: AST, parser, printer, evaluator.

A program is a (possibly anonymous) definition: a header giving the number
of parameters (x_0, x_1, ...) and bound variables (b_0, b_1, ...), a block
of nested named definitions, and either a numeric ReturnExpr (functions) or
a boolean ReturnPred (predicates). Recursive functions produced by the
iterate rule carry RecurBase/RecurStep bodies instead of a ReturnExpr; the
token `rec` inside RecurStep denotes the previous iterate. The counting
construct Size([b...], pred) is a numeric expression.

The printer and parser round-trip: parse(print(p)) == p.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DslSyntaxError, UnresolvedName

# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class ParamRef:
    index: int


@dataclass(frozen=True)
class BoundRef:
    index: int


@dataclass(frozen=True)
class RecRef:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str  # '+' or '*'
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class SizeExpr:
    bound: tuple  # indices of the b_j being counted
    body: object


@dataclass(frozen=True)
class Compare:
    op: str  # '==', '!=', '<=', '<', '>=', '>'
    left: object
    right: object


@dataclass(frozen=True)
class Exists:
    bound: tuple
    body: object


@dataclass(frozen=True)
class ForAllQ:
    bound: tuple
    body: object


@dataclass(frozen=True)
class Implies:
    p: object
    q: object


@dataclass(frozen=True)
class And:
    p: object
    q: object


@dataclass(frozen=True)
class Not:
    p: object


@dataclass(frozen=True)
class CallP:
    name: str
    args: tuple


@dataclass(frozen=True)
class DslProgram:
    kind: str  # 'Func' | 'Pred'
    name: str | None
    params: int
    bounded: int
    defs: tuple
    return_expr: object | None = None
    return_pred: object | None = None
    recur_base: object | None = None
    recur_step: object | None = None

    @property
    def recursive(self):
        return self.recur_base is not None


# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>:=|==|!=|<=|>=|[+*<>=(),;\[\]]))"
)

_KEYWORDS = {
    "Func",
    "Pred",
    "params",
    "bounded",
    "ReturnExpr",
    "ReturnPred",
    "RecurBase",
    "RecurStep",
    "Exists",
    "ForAll",
    "Implies",
    "And",
    "Not",
    "Size",
    "None",
    "rec",
}


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise DslSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        pos = m.end()
        if m.lastgroup == "num":
            out.append(("num", m.group("num")))
        elif m.lastgroup == "ident":
            out.append(("ident", m.group("ident")))
        else:
            out.append(("op", m.group("op")))
    out.append(("eof", ""))
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind, value=None):
        t = self.next()
        if t[0] != kind or (value is not None and t[1] != value):
            raise DslSyntaxError(f"expected {value or kind}, got {t[1]!r}")
        return t

    def at(self, kind, value=None):
        t = self.peek()
        return t[0] == kind and (value is None or t[1] == value)

    # -- program -----------------------------------------------------------
    def parse_program(self):
        # Named form: IDENT := Func/Pred ( body ) ;
        if self.at("ident") and self.toks[self.i + 1][:2] == ("op", ":="):
            prog = self.parse_named_def()
            self.expect_eof()
            return prog
        # Anonymous wrapped form: Func/Pred ( body ) with optional ;
        if (
            self.at("ident")
            and self.peek()[1] in ("Func", "Pred")
            and self.toks[self.i + 1][:2] == ("op", "(")
        ):
            kind = self.next()[1]
            self.expect("op", "(")
            prog = self.parse_body(name=None, kind=kind)
            self.expect("op", ")")
            if self.at("op", ";"):
                self.next()
            self.expect_eof()
            return prog
        # Bare anonymous form: optional headers, defs, returns.
        prog = self.parse_body(name=None)
        self.expect_eof()
        return prog

    def expect_eof(self):
        if self.peek()[0] != "eof":
            raise DslSyntaxError(f"trailing input at {self.peek()[1]!r}")

    def parse_named_def(self):
        name = self.expect("ident")[1]
        if name in _KEYWORDS:
            raise DslSyntaxError(f"reserved word {name!r} cannot name a definition")
        self.expect("op", ":=")
        kind = self.expect("ident")[1]
        if kind not in ("Func", "Pred"):
            raise DslSyntaxError(f"expected Func or Pred, got {kind!r}")
        self.expect("op", "(")
        prog = self.parse_body(name=name, kind=kind)
        self.expect("op", ")")
        self.expect("op", ";")
        return prog

    def parse_body(self, name, kind=None):
        params = bounded = None
        if self.at("ident", "params"):
            self.next()
            params = int(self.expect("num")[1])
            self.expect("op", ";")
        if self.at("ident", "bounded"):
            self.next()
            self.expect("ident", "params")
            bounded = int(self.expect("num")[1])
            self.expect("op", ";")
        defs = []
        while self.at("ident") and self.toks[self.i + 1][:2] == ("op", ":="):
            defs.append(self.parse_named_def())
        return_expr = return_pred = recur_base = recur_step = None
        while self.at("ident") and self.peek()[1] in (
            "ReturnExpr",
            "ReturnPred",
            "RecurBase",
            "RecurStep",
        ):
            label = self.next()[1]
            if self.at("ident", "None"):
                self.next()
                value = None
            elif label in ("ReturnExpr", "RecurBase", "RecurStep"):
                value = self.parse_expr()
            else:
                value = self.parse_pred()
            self.expect("op", ";")
            if label == "ReturnExpr":
                return_expr = value
            elif label == "ReturnPred":
                return_pred = value
            elif label == "RecurBase":
                recur_base = value
            else:
                recur_step = value
        if kind is None:
            kind = "Pred" if return_pred is not None else "Func"
        if params is None or bounded is None:
            seen_p, seen_b = _max_refs(defs, return_expr, return_pred, recur_base, recur_step)
            if params is None:
                params = seen_p
            if bounded is None:
                bounded = seen_b
        if recur_base is not None or recur_step is not None:
            if recur_base is None or recur_step is None:
                raise DslSyntaxError("RecurBase and RecurStep must appear together")
            if return_expr is not None or return_pred is not None:
                raise DslSyntaxError("recursive definitions take no ReturnExpr/ReturnPred")
            if kind != "Func" or params < 1:
                raise DslSyntaxError("recursive definitions are functions of >= 1 parameter")
        elif kind == "Func" and return_expr is None:
            raise DslSyntaxError(f"Func {name or '<top>'} needs a ReturnExpr")
        elif kind == "Pred" and return_pred is None:
            raise DslSyntaxError(f"Pred {name or '<top>'} needs a ReturnPred")
        return DslProgram(
            kind=kind,
            name=name,
            params=params,
            bounded=bounded,
            defs=tuple(defs),
            return_expr=return_expr,
            return_pred=return_pred,
            recur_base=recur_base,
            recur_step=recur_step,
        )

    # -- predicates ----------------------------------------------------------
    def parse_pred(self):
        t = self.peek()
        if t[0] == "ident" and t[1] in ("Exists", "ForAll"):
            ctor = Exists if t[1] == "Exists" else ForAllQ
            self.next()
            self.expect("op", "(")
            bound = self.parse_bound_list()
            self.expect("op", ",")
            body = self.parse_pred()
            self.expect("op", ")")
            return ctor(bound=bound, body=body)
        if t[0] == "ident" and t[1] in ("Implies", "And"):
            ctor = Implies if t[1] == "Implies" else And
            self.next()
            self.expect("op", "(")
            p = self.parse_pred()
            self.expect("op", ",")
            q = self.parse_pred()
            self.expect("op", ")")
            return ctor(p, q)
        if t[0] == "ident" and t[1] == "Not":
            self.next()
            self.expect("op", "(")
            p = self.parse_pred()
            self.expect("op", ")")
            return Not(p)
        # predicate call or comparison
        if (
            t[0] == "ident"
            and t[1] not in _KEYWORDS
            and not _is_var(t[1])
            and self.toks[self.i + 1][:2] == ("op", "(")
        ):
            save = self.i
            call = self.parse_call()
            if self.at("op") and self.peek()[1] in ("==", "!=", "<=", "<", ">=", ">", "+", "*"):
                self.i = save  # it was a function call inside a comparison
            else:
                return CallP(call.name, call.args)
        left = self.parse_expr()
        t = self.peek()
        if t[0] == "op" and t[1] in ("==", "!=", "<=", "<", ">=", ">"):
            op = self.next()[1]
            right = self.parse_expr()
            return Compare(op, left, right)
        raise DslSyntaxError(f"expected a comparison or predicate call near {t[1]!r}")

    def parse_bound_list(self):
        self.expect("op", "[")
        out = []
        while not self.at("op", "]"):
            name = self.expect("ident")[1]
            m = re.fullmatch(r"b_(\d+)", name)
            if not m:
                raise DslSyntaxError(f"binder lists hold b_<i> names, got {name!r}")
            out.append(int(m.group(1)))
            if self.at("op", ","):
                self.next()
        self.expect("op", "]")
        return tuple(out)

    # -- expressions ---------------------------------------------------------
    def parse_expr(self):
        left = self.parse_term()
        while self.at("op", "+"):
            self.next()
            left = BinOp("+", left, self.parse_term())
        return left

    def parse_term(self):
        left = self.parse_primary()
        while self.at("op", "*"):
            self.next()
            left = BinOp("*", left, self.parse_primary())
        return left

    def parse_primary(self):
        t = self.next()
        if t[0] == "num":
            return Num(int(t[1]))
        if t[0] == "op" and t[1] == "(":
            e = self.parse_expr()
            self.expect("op", ")")
            return e
        if t[0] == "ident":
            if t[1] == "rec":
                return RecRef()
            if t[1] == "Size":
                self.expect("op", "(")
                bound = self.parse_bound_list()
                self.expect("op", ",")
                body = self.parse_pred()
                self.expect("op", ")")
                return SizeExpr(bound=bound, body=body)
            m = re.fullmatch(r"x_(\d+)", t[1])
            if m:
                return ParamRef(int(m.group(1)))
            m = re.fullmatch(r"b_(\d+)", t[1])
            if m:
                return BoundRef(int(m.group(1)))
            if t[1] in _KEYWORDS:
                raise DslSyntaxError(f"unexpected keyword {t[1]!r} in expression")
            self.i -= 1
            return self.parse_call()
        raise DslSyntaxError(f"unexpected token {t[1]!r} in expression")

    def parse_call(self):
        name = self.expect("ident")[1]
        self.expect("op", "(")
        positional = {}
        nextpos = 0
        while not self.at("op", ")"):
            if (
                self.at("ident")
                and re.fullmatch(r"x_\d+", self.peek()[1])
                and self.toks[self.i + 1][:2] == ("op", "=")
            ):
                key = self.next()[1]
                self.next()  # '='
                idx = int(key.split("_")[1])
            else:
                idx = nextpos
            positional[idx] = self.parse_expr()
            nextpos = idx + 1
            if self.at("op", ","):
                self.next()
        self.expect("op", ")")
        if positional and sorted(positional) != list(range(len(positional))):
            raise DslSyntaxError(f"call to {name} leaves argument gaps")
        args = tuple(positional[i] for i in range(len(positional)))
        return Call(name, args)


def _is_var(name):
    return bool(re.fullmatch(r"(x|b)_\d+", name)) or name == "rec"


def _max_refs(defs, *bodies):
    """Infer (params, bounded) header values from free references."""
    max_p, max_b = 0, 0

    def walk(node):
        nonlocal max_p, max_b
        if node is None:
            return
        if isinstance(node, ParamRef):
            max_p = max(max_p, node.index + 1)
        elif isinstance(node, BoundRef):
            max_b = max(max_b, node.index + 1)
        elif isinstance(node, (Exists, ForAllQ, SizeExpr)):
            for b in node.bound:
                max_b = max(max_b, b + 1)
            walk(node.body)
        elif isinstance(node, BinOp):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Compare):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, (Call, CallP)):
            for a in node.args:
                walk(a)
        elif isinstance(node, Implies) or isinstance(node, And):
            walk(node.p)
            walk(node.q)
        elif isinstance(node, Not):
            walk(node.p)

    for body in bodies:
        walk(body)
    return max_p, max_b


def parse_dsl(text: str) -> DslProgram:
    return _Parser(_tokenize(text)).parse_program()


# ---------------------------------------------------------------------------
# printer


def print_expr(node) -> str:
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, ParamRef):
        return f"x_{node.index}"
    if isinstance(node, BoundRef):
        return f"b_{node.index}"
    if isinstance(node, RecRef):
        return "rec"
    if isinstance(node, BinOp):
        left = print_expr(node.left)
        right = print_expr(node.right)
        if node.op == "*":
            if isinstance(node.left, BinOp) and node.left.op == "+":
                left = f"({left})"
            if isinstance(node.right, BinOp):
                right = f"({right})"
        elif isinstance(node.right, BinOp) and node.right.op == "+":
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if isinstance(node, Call):
        args = ", ".join(f"x_{i}={print_expr(a)}" for i, a in enumerate(node.args))
        return f"{node.name}({args})"
    if isinstance(node, SizeExpr):
        bound = ", ".join(f"b_{i}" for i in node.bound)
        return f"Size([{bound}], {print_pred(node.body)})"
    raise TypeError(f"not an expression node: {node!r}")


def print_pred(node) -> str:
    if isinstance(node, Compare):
        return f"{print_expr(node.left)} {node.op} {print_expr(node.right)}"
    if isinstance(node, (Exists, ForAllQ)):
        kw = "Exists" if isinstance(node, Exists) else "ForAll"
        bound = ", ".join(f"b_{i}" for i in node.bound)
        return f"{kw}([{bound}], {print_pred(node.body)})"
    if isinstance(node, Implies):
        return f"Implies({print_pred(node.p)}, {print_pred(node.q)})"
    if isinstance(node, And):
        return f"And({print_pred(node.p)}, {print_pred(node.q)})"
    if isinstance(node, Not):
        return f"Not({print_pred(node.p)})"
    if isinstance(node, CallP):
        args = ", ".join(f"x_{i}={print_expr(a)}" for i, a in enumerate(node.args))
        return f"{node.name}({args})"
    raise TypeError(f"not a predicate node: {node!r}")


def print_program(prog: DslProgram, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    lines = []
    if prog.name is not None:
        lines.append(f"{pad}{prog.name} := {prog.kind}(")
        body_pad = inner
    else:
        body_pad = pad
    lines.append(f"{body_pad}params {prog.params};")
    lines.append(f"{body_pad}bounded params {prog.bounded};")
    for d in prog.defs:
        lines.append(print_program(d, indent + (1 if prog.name is not None else 0)))
    if prog.recursive:
        lines.append(f"{body_pad}RecurBase {print_expr(prog.recur_base)};")
        lines.append(f"{body_pad}RecurStep {print_expr(prog.recur_step)};")
    else:
        re_txt = print_expr(prog.return_expr) if prog.return_expr is not None else "None"
        rp_txt = print_pred(prog.return_pred) if prog.return_pred is not None else "None"
        lines.append(f"{body_pad}ReturnExpr {re_txt};")
        lines.append(f"{body_pad}ReturnPred {rp_txt};")
    if prog.name is not None:
        lines.append(f"{pad});")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# evaluation


class EvalOps:
    """Domain arithmetic plus the quantifier range for evaluation."""

    def __init__(self, add, mul, values, exhaustive, budget=100_000):
        self.add = add
        self.mul = mul
        self.values = tuple(values)
        self.exhaustive = exhaustive
        self.steps = budget

    def tick(self):
        self.steps -= 1
        if self.steps < 0:
            from .errors import BudgetExceeded

            raise BudgetExceeded("DSL evaluation budget exhausted")


def nat_ops(values=None, budget=100_000):
    import operator

    vals = values if values is not None else range(21)
    return EvalOps(operator.add, operator.mul, vals, exhaustive=False, budget=budget)


class _Env:
    __slots__ = ("args", "bound", "defs", "rec")

    def __init__(self, args, bound, defs, rec=None):
        self.args = args
        self.bound = bound  # dict index -> value
        self.defs = defs  # name -> (DslProgram, lexical defs dict)
        self.rec = rec


def evaluate_program(prog: DslProgram, args, ops: EvalOps):
    """Run a closed program on concrete arguments.

    Returns an int for functions, True/False for predicates, or None when
    the verdict is undetermined (an unbounded universal over an infinite
    range, or a potentially unbounded count).
    """
    if len(args) != prog.params:
        raise ValueError(f"program takes {prog.params} arguments, got {len(args)}")
    defs = _collect_defs(prog, {})
    return _call_program(prog, tuple(args), defs, ops)


def _collect_defs(prog, outer):
    defs = dict(outer)
    for d in prog.defs:
        defs[d.name] = d
    return defs


def _call_program(prog, args, lexical, ops):
    defs = _collect_defs(prog, lexical)
    if prog.recursive:
        *rest, n = args
        if n < 0:
            return None
        env = _Env(tuple(rest) + (0,), {}, defs)
        acc = _eval_expr(prog.recur_base, env, ops)
        for _ in range(n):
            ops.tick()
            env = _Env(args, {}, defs, rec=acc)
            acc = _eval_expr(prog.recur_step, env, ops)
            if acc is None:
                return None
        return acc
    env = _Env(args, {}, defs)
    if prog.kind == "Func":
        return _eval_expr(prog.return_expr, env, ops)
    return _eval_pred(prog.return_pred, env, ops)


def _eval_expr(node, env, ops):
    ops.tick()
    if isinstance(node, Num):
        return node.value
    if isinstance(node, ParamRef):
        return env.args[node.index]
    if isinstance(node, BoundRef):
        return env.bound[node.index]
    if isinstance(node, RecRef):
        return env.rec
    if isinstance(node, BinOp):
        left = _eval_expr(node.left, env, ops)
        right = _eval_expr(node.right, env, ops)
        if left is None or right is None:
            return None
        return (ops.add if node.op == "+" else ops.mul)(left, right)
    if isinstance(node, Call):
        target = env.defs.get(node.name)
        if target is None:
            raise UnresolvedName(f"call to unknown definition {node.name!r}")
        argv = tuple(_eval_expr(a, env, ops) for a in node.args)
        if any(a is None for a in argv):
            return None
        return _call_program(target, argv, env.defs, ops)
    if isinstance(node, SizeExpr):
        count, total = 0, 0
        for combo in _combos(node.bound, env, ops):
            total += 1
            r = _eval_pred(node.body, combo, ops)
            if r is None:
                return None
            if r:
                count += 1
        if count == total and total and not ops.exhaustive:
            return None
        return count
    raise TypeError(f"not an expression node: {node!r}")


def _combos(bound, env, ops):
    """All assignments of the listed binder indices over the range."""
    idx = [0] * len(bound)
    values = ops.values
    if not bound:
        yield env
        return
    while True:
        ops.tick()
        new_bound = dict(env.bound)
        for b, i in zip(bound, idx):
            new_bound[b] = values[i]
        yield _Env(env.args, new_bound, env.defs, env.rec)
        pos = len(bound) - 1
        while pos >= 0:
            idx[pos] += 1
            if idx[pos] < len(values):
                break
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            return


def _eval_pred(node, env, ops):
    ops.tick()
    if isinstance(node, Compare):
        left = _eval_expr(node.left, env, ops)
        right = _eval_expr(node.right, env, ops)
        if left is None or right is None:
            return None
        return {
            "==": left == right,
            "!=": left != right,
            "<=": left <= right,
            "<": left < right,
            ">=": left >= right,
            ">": left > right,
        }[node.op]
    if isinstance(node, Exists):
        saw_none = False
        for combo in _combos(node.bound, env, ops):
            r = _eval_pred(node.body, combo, ops)
            if r:
                return True
            if r is None:
                saw_none = True
        return None if saw_none else False
    if isinstance(node, ForAllQ):
        saw_none = False
        for combo in _combos(node.bound, env, ops):
            r = _eval_pred(node.body, combo, ops)
            if r is False:
                return False
            if r is None:
                saw_none = True
        if not ops.exhaustive:
            return None  # unbounded universal: cannot confirm computationally
        return None if saw_none else True
    if isinstance(node, Implies):
        p = _eval_pred(node.p, env, ops)
        if p is False:
            return True
        q = _eval_pred(node.q, env, ops)
        if p is True:
            return q
        return True if q is True else None
    if isinstance(node, And):
        p = _eval_pred(node.p, env, ops)
        if p is False:
            return False
        q = _eval_pred(node.q, env, ops)
        if q is False:
            return False
        return True if (p is True and q is True) else None
    if isinstance(node, Not):
        r = _eval_pred(node.p, env, ops)
        return None if r is None else not r
    if isinstance(node, CallP):
        target = env.defs.get(node.name)
        if target is None:
            raise UnresolvedName(f"call to unknown definition {node.name!r}")
        argv = tuple(_eval_expr(a, env, ops) for a in node.args)
        if any(a is None for a in argv):
            return None
        return _call_program(target, argv, env.defs, ops)
    raise TypeError(f"not a predicate node: {node!r}")

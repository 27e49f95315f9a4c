"""Interestingness scoring.

Three layers, bottom up:

* graph primitives: named read-only queries over one entity and the
  knowledge graph, thin wrappers around :func:`domain.graph_query`;
* the five classic hand-written measures (novelty, parsimony,
  productivity, applicability, comprehensibility) plus their weighted
  combination;
* a small total expression language in which evolved measures and
  library abstractions are written.  Programs parse from an infix
  surface syntax, validate against fixed primitive signatures, and
  evaluate to a float in [0, 1] no matter what (every runtime error is
  trapped to 0.0).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

from . import domain
from .errors import (
    BudgetExceeded,
    DepthExceeded,
    LengthMismatch,
    ScoreSyntaxError,
    ScoreTypeError,
    UnknownAbstraction,
    UnknownPrimitive,
    ZeroWeights,
)

MAX_EXPR_DEPTH = 24
EVAL_NODE_BUDGET = 10_000

# expression value kinds
NUM = "num"
LIST = "list"
TEXT = "text"

# primitive name -> (graph_query kind, result kind, takes the entity argument)
PRIMITIVES = {
    "get_ancestors": ("ancestors", LIST, True),
    "get_descendants": ("descendants", LIST, True),
    "get_construction_depth": ("construction_depth", NUM, True),
    "get_in_degree": ("in_degree", NUM, True),
    "get_out_degree": ("out_degree", NUM, True),
    "get_construction_history_rule_names": ("rule_names", LIST, True),
    "get_entity_step_age": ("step_age", NUM, True),
    "get_num_concepts": ("num_concepts", NUM, False),
    "get_num_conjectures": ("num_conjectures", NUM, False),
    "get_entity_node_type": ("node_type", TEXT, True),
    "get_concept_category": ("category", TEXT, True),
    "get_input_arity": ("input_arity", NUM, True),
    "get_num_component_types": ("num_component_types", NUM, True),
    "get_examples": ("examples", LIST, True),
    "get_nonexamples": ("nonexamples", LIST, True),
    "get_num_construction_inputs": ("num_construction_inputs", NUM, True),
    "is_proven": ("is_proven", NUM, True),
}

# the 18th primitive builds a combined measure rather than querying the
# graph; it is exposed as the weighted_combine operation below
COMBINATOR = "create_weighted_interestingness_function"

PRIMITIVE_NAMES = tuple(sorted(PRIMITIVES)) + (COMBINATOR,)

# short spellings accepted by the parser; printing always emits the
# canonical name
PRIMITIVE_ALIASES = {
    "ancestors": "get_ancestors",
    "descendants": "get_descendants",
    "depth": "get_construction_depth",
    "construction_depth": "get_construction_depth",
    "in_degree": "get_in_degree",
    "out_degree": "get_out_degree",
    "rule_names": "get_construction_history_rule_names",
    "step_age": "get_entity_step_age",
    "num_concepts": "get_num_concepts",
    "num_conjectures": "get_num_conjectures",
    "node_type": "get_entity_node_type",
    "category": "get_concept_category",
    "arity": "get_input_arity",
    "input_arity": "get_input_arity",
    "num_component_types": "get_num_component_types",
    "examples": "get_examples",
    "nonexamples": "get_nonexamples",
    "num_construction_inputs": "get_num_construction_inputs",
}

MEASURE_KINDS = (
    "novelty",
    "parsimony",
    "productivity",
    "applicability",
    "comprehensibility",
)


def eval_primitive(pid: str, entity_id: str | None, graph) -> float | str | list:
    """Evaluate one graph primitive.  Booleans come back as 0.0/1.0,
    counts as floats, lists stable-ordered."""
    if pid == COMBINATOR:
        raise ScoreTypeError(f"{pid} builds a measure; use weighted_combine")
    if pid not in PRIMITIVES:
        raise UnknownPrimitive(pid)
    kind, result, takes_entity = PRIMITIVES[pid]
    if not takes_entity and entity_id is None:
        entity_id = next(iter(graph.nodes))  # graph-level kinds ignore it
    value = domain.graph_query(graph, entity_id, kind)
    if result == NUM:
        return float(value)
    return value


def hr_measure(kind: str, entity_id: str, graph, invert_novelty: bool = False) -> float:
    """One of the five classic measures, exactly as defined.

    Novelty is the fraction of entities sharing the subject's example
    classification, so a common classification scores high; pass
    invert_novelty to flip it.  Applicability of an entity with empty
    caches is 0; comprehensibility and parsimony floor their divisor
    at 1.
    """
    if kind not in MEASURE_KINDS:
        raise ValueError(f"unknown measure kind {kind!r}")
    e = graph.entity(entity_id)
    population = len(graph.nodes)
    if kind == "novelty":
        signature = (frozenset(e.positives), frozenset(e.negatives))
        same = sum(
            1
            for other in graph.nodes.values()
            if (frozenset(other.positives), frozenset(other.negatives)) == signature
        )
        value = same / population
        return 1.0 - value if invert_novelty else value
    if kind == "parsimony":
        return 1.0 / max(1, e.size)
    if kind == "productivity":
        users = sum(
            1
            for other in graph.nodes.values()
            if any(entity_id in step.inputs for step in other.history)
        )
        return users / population
    if kind == "applicability":
        pos, neg = len(e.positives), len(e.negatives)
        return pos / (pos + neg) if pos + neg else 0.0
    return 1.0 / max(1, len(e.history))  # comprehensibility


# --- expression trees ----------------------------------------------------
#
# Every node is frozen and hashable.  Lists may only appear as direct
# arguments of count/diff_count and strings only as operands of == and
# !=, which the validator enforces; everything else is a number.


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Param:
    """Reference to an enclosing abstraction's numeric parameter."""

    name: str


@dataclass(frozen=True)
class Prim:
    """Primitive call; the entity and graph arguments are implicit."""

    name: str


@dataclass(frozen=True)
class Measure:
    """Call to one of the five classic measures on the current entity."""

    kind: str


@dataclass(frozen=True)
class Call:
    """Builtin function call (min, max, log1p, exp, sqrt, clamp, count,
    diff_count)."""

    fn: str
    args: tuple


@dataclass(frozen=True)
class AbsCall:
    """Library abstraction call; missing arguments take the defaults."""

    name: str
    args: tuple


@dataclass(frozen=True)
class Arith:
    op: str  # + - * /
    left: object
    right: object


@dataclass(frozen=True)
class Cmp:
    op: str  # < <= > >= == !=
    left: object
    right: object


@dataclass(frozen=True)
class Cond:
    """Python-style conditional: then if test else other."""

    test: object
    then: object
    other: object


# builtin name -> argument kinds; min/max accept two or more numbers
BUILTINS = {
    "count": (LIST,),
    "diff_count": (LIST, LIST),
    "log1p": (NUM,),
    "exp": (NUM,),
    "sqrt": (NUM,),
    "clamp": (NUM, NUM, NUM),
    "min": (NUM, NUM),
    "max": (NUM, NUM),
}
_VARIADIC = ("min", "max")

MEASURE_CALLS = {"hr_" + k: k for k in MEASURE_KINDS}

# names the parser accepts for the implicit entity/graph arguments
_ENTITY_NAMES = ("e", "entity", "entity_id", "m")
_GRAPH_NAMES = ("g", "graph")


@dataclass(frozen=True)
class ScoreProgram:
    name: str
    docstring: str
    body: object


@dataclass(frozen=True)
class AbstractionDef:
    """Named reusable scoring fragment with numeric defaulted parameters."""

    name: str
    params: tuple  # ((name, default), ...)
    body: object

    def default(self, index: int) -> float:
        return self.params[index][1]


class AbstractionLibrary:
    """Ordered collection of abstractions; starts empty.

    A definition may call only abstractions added before it, so the
    library can never hold a cycle.  Bodies are deduplicated up to
    parameter renaming.
    """

    def __init__(self, defs=()):
        self.defs: list[AbstractionDef] = []
        self._by_name: dict[str, AbstractionDef] = {}
        self._normals: set[str] = set()
        for d in defs:
            if not self.add(d):
                raise ScoreTypeError(f"duplicate abstraction {d.name}")

    def __len__(self) -> int:
        return len(self.defs)

    def __iter__(self):
        return iter(self.defs)

    def get(self, name: str) -> AbstractionDef | None:
        return self._by_name.get(name)

    def normalized(self, definition: AbstractionDef) -> str:
        renames = {p: f"p{i}" for i, (p, _) in enumerate(definition.params)}
        return print_score_expr(_rename_params(definition.body, renames))

    def add(self, definition: AbstractionDef) -> bool:
        """Append a definition; False when its name or normalized body
        is already present."""
        if definition.name in self._by_name or definition.name in BUILTINS:
            return False
        normal = self.normalized(definition)
        if normal in self._normals:
            return False
        validate_expr(
            definition.body, self, params=tuple(p for p, _ in definition.params)
        )
        self.defs.append(definition)
        self._by_name[definition.name] = definition
        self._normals.add(normal)
        return True


def _rename_params(x, renames):
    if isinstance(x, Param):
        return Param(renames.get(x.name, x.name))
    if isinstance(x, Call):
        return Call(x.fn, tuple(_rename_params(a, renames) for a in x.args))
    if isinstance(x, AbsCall):
        return AbsCall(x.name, tuple(_rename_params(a, renames) for a in x.args))
    if isinstance(x, Arith):
        return Arith(x.op, _rename_params(x.left, renames), _rename_params(x.right, renames))
    if isinstance(x, Cmp):
        return Cmp(x.op, _rename_params(x.left, renames), _rename_params(x.right, renames))
    if isinstance(x, Cond):
        return Cond(
            _rename_params(x.test, renames),
            _rename_params(x.then, renames),
            _rename_params(x.other, renames),
        )
    return x


def inline_abstractions(x, library: AbstractionLibrary):
    """Replace every abstraction call by its body with arguments
    substituted for parameters."""
    if isinstance(x, AbsCall):
        d = library.get(x.name)
        if d is None:
            raise UnknownAbstraction(x.name)
        args = [inline_abstractions(a, library) for a in x.args]
        binding = {}
        for i, (pname, default) in enumerate(d.params):
            binding[pname] = args[i] if i < len(args) else Num(default)
        return inline_abstractions(_subst_params(d.body, binding), library)
    if isinstance(x, Call):
        return Call(x.fn, tuple(inline_abstractions(a, library) for a in x.args))
    if isinstance(x, Arith):
        return Arith(x.op, inline_abstractions(x.left, library), inline_abstractions(x.right, library))
    if isinstance(x, Cmp):
        return Cmp(x.op, inline_abstractions(x.left, library), inline_abstractions(x.right, library))
    if isinstance(x, Cond):
        return Cond(
            inline_abstractions(x.test, library),
            inline_abstractions(x.then, library),
            inline_abstractions(x.other, library),
        )
    return x


def _subst_params(x, binding):
    if isinstance(x, Param):
        return binding.get(x.name, x)
    if isinstance(x, Call):
        return Call(x.fn, tuple(_subst_params(a, binding) for a in x.args))
    if isinstance(x, AbsCall):
        return AbsCall(x.name, tuple(_subst_params(a, binding) for a in x.args))
    if isinstance(x, Arith):
        return Arith(x.op, _subst_params(x.left, binding), _subst_params(x.right, binding))
    if isinstance(x, Cmp):
        return Cmp(x.op, _subst_params(x.left, binding), _subst_params(x.right, binding))
    if isinstance(x, Cond):
        return Cond(
            _subst_params(x.test, binding),
            _subst_params(x.then, binding),
            _subst_params(x.other, binding),
        )
    return x


# --- parsing --------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<str>'[^'\\]*'|\"[^\"\\]*\")"
    r"|(?P<op><=|>=|==|!=|[-+*/(),<>]))"
)


def _tokenize(text: str):
    tokens, i = [], 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            if text[i:].strip():
                raise ScoreSyntaxError(f"bad character {text[i:].strip()[0]!r}")
            break
        i = m.end()
        if m.lastgroup == "num":
            tokens.append(("num", float(m.group("num"))))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name")))
        elif m.lastgroup == "str":
            tokens.append(("str", m.group("str")[1:-1]))
        else:
            tokens.append(("op", m.group("op")))
    tokens.append(("end", None))
    return tokens


class _Parser:
    """Recursive descent over: conditional > comparison > additive >
    multiplicative > unary > atom."""

    def __init__(self, tokens, params):
        self.toks = tokens
        self.i = 0
        self.params = set(params)

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def eat(self, kind, value=None) -> bool:
        t = self.peek()
        if t[0] == kind and (value is None or t[1] == value):
            self.i += 1
            return True
        return False

    def expect(self, value):
        if not self.eat("op", value):
            raise ScoreSyntaxError(f"expected {value!r}, got {self.peek()[1]!r}")

    def parse(self):
        x = self.conditional()
        if self.peek()[0] != "end":
            raise ScoreSyntaxError(f"trailing input at {self.peek()[1]!r}")
        return x

    def conditional(self):
        then = self.comparison()
        if self.eat("name", "if"):
            test = self.comparison()
            if not self.eat("name", "else"):
                raise ScoreSyntaxError("conditional is missing its else branch")
            other = self.conditional()
            return Cond(test, then, other)
        return then

    def comparison(self):
        left = self.additive()
        t = self.peek()
        if t[0] == "op" and t[1] in ("<", "<=", ">", ">=", "==", "!="):
            self.next()
            return Cmp(t[1], left, self.additive())
        return left

    def additive(self):
        x = self.multiplicative()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in ("+", "-"):
                self.next()
                x = Arith(t[1], x, self.multiplicative())
            else:
                return x

    def multiplicative(self):
        x = self.unary()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in ("*", "/"):
                self.next()
                x = Arith(t[1], x, self.unary())
            else:
                return x

    def unary(self):
        if self.eat("op", "-"):
            x = self.unary()
            if isinstance(x, Num):
                return Num(-x.value)
            return Arith("-", Num(0.0), x)
        return self.atom()

    def atom(self):
        t = self.next()
        if t[0] == "num":
            return Num(t[1])
        if t[0] == "str":
            return Text(t[1])
        if t[0] == "op" and t[1] == "(":
            x = self.conditional()
            self.expect(")")
            return x
        if t[0] == "name":
            return self.name_expr(t[1])
        raise ScoreSyntaxError(f"unexpected {t[1]!r}")

    def name_expr(self, name):
        if self.peek() != ("op", "("):
            if name in self.params:
                return Param(name)
            if name in _ENTITY_NAMES or name in _GRAPH_NAMES:
                raise ScoreSyntaxError(
                    f"{name!r} only appears as a primitive argument"
                )
            raise ScoreSyntaxError(f"unknown name {name!r}")
        self.next()
        args = []
        if self.peek() != ("op", ")"):
            args.append(self.argument())
            while self.eat("op", ","):
                args.append(self.argument())
        self.expect(")")
        canonical = PRIMITIVE_ALIASES.get(name, name)
        if canonical in PRIMITIVES:
            self.check_prim_args(canonical, args)
            return Prim(canonical)
        if name in MEASURE_CALLS:
            self.check_prim_args(name, args, measure=True)
            return Measure(MEASURE_CALLS[name])
        if name in BUILTINS:
            return Call(name, tuple(args))
        if name == COMBINATOR:
            raise ScoreSyntaxError(f"{name} is not callable inside a measure body")
        if name.startswith(("get_", "is_")):
            raise UnknownPrimitive(name)
        return AbsCall(name, tuple(args))

    def argument(self):
        # the entity/graph names are real tokens only in primitive
        # argument position; resolve them here so conditional() never
        # sees them
        t = self.peek()
        if t[0] == "name" and t[1] in _ENTITY_NAMES + _GRAPH_NAMES:
            nxt = self.toks[self.i + 1]
            if nxt in (("op", ","), ("op", ")")):
                self.next()
                return ("placeholder", t[1])
        return self.conditional()

    def check_prim_args(self, name, args, measure=False):
        takes_entity = True if measure else PRIMITIVES[name][2]
        expected = ["entity"] if takes_entity else []
        got = []
        for a in args:
            if isinstance(a, tuple) and a[0] == "placeholder":
                got.append("entity" if a[1] in _ENTITY_NAMES else "graph")
            else:
                raise ScoreTypeError(f"{name} takes no expression arguments")
        if got and got[-1] == "graph":
            got.pop()  # trailing graph argument is implicit anyway
        if got != expected:
            raise ScoreTypeError(
                f"{name} expects ({', '.join(expected) or ''}), got {len(args)} arguments"
            )


def parse_score_expr(text: str, library: AbstractionLibrary | None = None, params=()):
    expr = _Parser(_tokenize(text), params).parse()
    validate_expr(expr, library or AbstractionLibrary(), params=params)
    return expr


def parse_score_program(
    text: str,
    library: AbstractionLibrary | None = None,
    name: str = "measure",
    docstring: str = "",
) -> ScoreProgram:
    """Parse and validate surface text into a program.

    Leading comment lines (#) become the docstring when none is given.
    """
    lines = text.splitlines()
    doc_lines = []
    while lines and lines[0].lstrip().startswith("#"):
        doc_lines.append(lines.pop(0).lstrip().lstrip("#").strip())
    body = parse_score_expr("\n".join(lines), library)
    return ScoreProgram(name, docstring or " ".join(doc_lines), body)


# --- printing -------------------------------------------------------------

_PREC = {"if": 1, "cmp": 2, "+": 3, "-": 3, "*": 4, "/": 4, "atom": 9}


def print_score_expr(x) -> str:
    return _print(x, 0)


def _print(x, parent_prec: int) -> str:
    if isinstance(x, Num):
        v = x.value
        text = repr(int(v)) if v == int(v) and abs(v) < 1e16 else repr(v)
        return f"({text})" if v < 0 and parent_prec >= _PREC["cmp"] else text
    if isinstance(x, Text):
        return f"'{x.value}'"
    if isinstance(x, Param):
        return x.name
    if isinstance(x, Prim):
        return f"{x.name}(e)" if PRIMITIVES[x.name][2] else f"{x.name}()"
    if isinstance(x, Measure):
        return f"hr_{x.kind}(e)"
    if isinstance(x, (Call, AbsCall)):
        fn = x.fn if isinstance(x, Call) else x.name
        return f"{fn}({', '.join(_print(a, 0) for a in x.args)})"
    if isinstance(x, Arith):
        prec = _PREC[x.op]
        left = _print(x.left, prec - 1)
        right = _print(x.right, prec)  # bind tighter on the right: - and / do not associate
        out = f"{left} {x.op} {right}"
        return f"({out})" if parent_prec >= prec else out
    if isinstance(x, Cmp):
        prec = _PREC["cmp"]
        out = f"{_print(x.left, prec)} {x.op} {_print(x.right, prec)}"
        return f"({out})" if parent_prec >= prec else out
    if isinstance(x, Cond):
        prec = _PREC["if"]
        out = (
            f"{_print(x.then, prec)} if {_print(x.test, prec)}"
            f" else {_print(x.other, prec - 1)}"
        )
        return f"({out})" if parent_prec >= prec else out
    raise ScoreTypeError(f"not a score expression: {x!r}")


def print_score_program(program: ScoreProgram) -> str:
    header = f"# {program.docstring}\n" if program.docstring else ""
    return header + print_score_expr(program.body)


# --- validation -----------------------------------------------------------


def validate_expr(x, library: AbstractionLibrary, params=(), depth: int = 1) -> str:
    """Type-check and depth-check; returns the expression's value kind."""
    if depth > MAX_EXPR_DEPTH:
        raise DepthExceeded(f"expression deeper than {MAX_EXPR_DEPTH}")
    if isinstance(x, Num):
        return NUM
    if isinstance(x, Text):
        return TEXT
    if isinstance(x, Param):
        if x.name not in params:
            raise ScoreTypeError(f"unbound parameter {x.name!r}")
        return NUM
    if isinstance(x, Prim):
        if x.name not in PRIMITIVES:
            raise UnknownPrimitive(x.name)
        return PRIMITIVES[x.name][1]
    if isinstance(x, Measure):
        if x.kind not in MEASURE_KINDS:
            raise UnknownPrimitive(f"hr_{x.kind}")
        return NUM
    if isinstance(x, Call):
        spec = BUILTINS.get(x.fn)
        if spec is None:
            raise UnknownPrimitive(x.fn)
        if x.fn in _VARIADIC:
            if len(x.args) < 2:
                raise ScoreTypeError(f"{x.fn} needs at least 2 arguments")
            spec = (NUM,) * len(x.args)
        elif len(x.args) != len(spec):
            raise ScoreTypeError(
                f"{x.fn} takes {len(spec)} arguments, got {len(x.args)}"
            )
        for a, want in zip(x.args, spec):
            got = validate_expr(a, library, params, depth + 1)
            if got != want:
                raise ScoreTypeError(f"{x.fn} argument must be a {want}, got {got}")
        return NUM
    if isinstance(x, AbsCall):
        d = library.get(x.name)
        if d is None:
            raise UnknownAbstraction(x.name)
        if len(x.args) > len(d.params):
            raise ScoreTypeError(
                f"{x.name} takes at most {len(d.params)} arguments, got {len(x.args)}"
            )
        for a in x.args:
            if validate_expr(a, library, params, depth + 1) != NUM:
                raise ScoreTypeError(f"{x.name} arguments must be numbers")
        return NUM
    if isinstance(x, Arith):
        for side in (x.left, x.right):
            if validate_expr(side, library, params, depth + 1) != NUM:
                raise ScoreTypeError(f"{x.op} needs numeric operands")
        return NUM
    if isinstance(x, Cmp):
        lk = validate_expr(x.left, library, params, depth + 1)
        rk = validate_expr(x.right, library, params, depth + 1)
        if lk != rk or lk == LIST:
            raise ScoreTypeError(f"cannot compare {lk} with {rk}")
        if lk == TEXT and x.op not in ("==", "!="):
            raise ScoreTypeError("strings only support == and !=")
        return NUM
    if isinstance(x, Cond):
        for part in (x.test, x.then, x.other):
            if validate_expr(part, library, params, depth + 1) != NUM:
                raise ScoreTypeError("conditional parts must be numbers")
        return NUM
    raise ScoreTypeError(f"not a score expression: {x!r}")


# --- evaluation -----------------------------------------------------------


class _Ctx:
    def __init__(self, graph, entity_id, library):
        self.graph = graph
        self.entity_id = entity_id
        self.library = library
        self.budget = EVAL_NODE_BUDGET

    def tick(self):
        self.budget -= 1
        if self.budget < 0:
            raise BudgetExceeded("node budget exhausted")


def eval_score_program(
    program: ScoreProgram,
    entity_id: str,
    graph,
    library: AbstractionLibrary | None = None,
) -> float:
    """Total evaluation: always a finite float in [0, 1].

    Division by zero yields 0 at the dividing node; any other runtime
    error, a non-finite result, or running past the node budget yields
    0.0 for the whole program.
    """
    ctx = _Ctx(graph, entity_id, library or AbstractionLibrary())
    try:
        value = _eval(program.body, ctx, {})
        num = float(value)
    except Exception:
        return 0.0
    if not math.isfinite(num):
        return 0.0
    return min(1.0, max(0.0, num))


def _eval(x, ctx: _Ctx, env: dict):
    ctx.tick()
    if isinstance(x, Num):
        return x.value
    if isinstance(x, Text):
        return x.value
    if isinstance(x, Param):
        return env[x.name]
    if isinstance(x, Prim):
        return eval_primitive(x.name, ctx.entity_id, ctx.graph)
    if isinstance(x, Measure):
        return hr_measure(x.kind, ctx.entity_id, ctx.graph)
    if isinstance(x, Call):
        args = [_eval(a, ctx, env) for a in x.args]
        if x.fn == "count":
            return float(len(args[0]))
        if x.fn == "diff_count":
            return float(len(set(args[0]) - set(args[1])))
        if x.fn == "log1p":
            return math.log1p(args[0])
        if x.fn == "exp":
            return math.exp(args[0])
        if x.fn == "sqrt":
            return math.sqrt(args[0])
        if x.fn == "clamp":
            lo, hi = args[1], args[2]
            return min(hi, max(lo, args[0]))
        if x.fn == "min":
            return min(args)
        return max(args)
    if isinstance(x, AbsCall):
        d = ctx.library.get(x.name)
        if d is None:
            raise UnknownAbstraction(x.name)
        inner = {}
        for i, (pname, default) in enumerate(d.params):
            inner[pname] = _eval(x.args[i], ctx, env) if i < len(x.args) else default
        return _eval(d.body, ctx, inner)
    if isinstance(x, Arith):
        a = _eval(x.left, ctx, env)
        b = _eval(x.right, ctx, env)
        if x.op == "+":
            return a + b
        if x.op == "-":
            return a - b
        if x.op == "*":
            return a * b
        return a / b if b else 0.0
    if isinstance(x, Cmp):
        a = _eval(x.left, ctx, env)
        b = _eval(x.right, ctx, env)
        op = x.op
        if op == "==":
            return 1.0 if a == b else 0.0
        if op == "!=":
            return 1.0 if a != b else 0.0
        if op == "<":
            return 1.0 if a < b else 0.0
        if op == "<=":
            return 1.0 if a <= b else 0.0
        if op == ">":
            return 1.0 if a > b else 0.0
        return 1.0 if a >= b else 0.0
    if isinstance(x, Cond):
        branch = x.then if _eval(x.test, ctx, env) != 0.0 else x.other
        return _eval(branch, ctx, env)
    raise ScoreTypeError(f"not a score expression: {x!r}")


# --- classic measures as programs ----------------------------------------


def hr_program(kind: str) -> ScoreProgram:
    if kind not in MEASURE_KINDS:
        raise ValueError(f"unknown measure kind {kind!r}")
    return ScoreProgram(kind, f"classic {kind} measure", Measure(kind))


def weighted_combine(measures, weights) -> ScoreProgram:
    """Combine programs into one normalized weighted sum, clamped to
    [0, 1].  Weights must be nonnegative with a positive sum."""
    measures = list(measures)
    weights = [float(w) for w in weights]
    if len(measures) != len(weights):
        raise LengthMismatch(f"{len(measures)} measures, {len(weights)} weights")
    if any(w < 0 for w in weights):
        raise ZeroWeights("weights must be nonnegative")
    total = sum(weights)
    if total <= 0:
        raise ZeroWeights("weight sum must be positive")
    body = None
    for program, w in zip(measures, weights):
        if w == 0:
            continue
        term = Arith("*", Num(w / total), program.body)
        body = term if body is None else Arith("+", body, term)
    name = "weighted_" + "_".join(p.name for p in measures)[:40]
    doc = ", ".join(f"{p.name}:{w:g}" for p, w in zip(measures, weights))
    return ScoreProgram(name, f"weighted sum of {doc}", Call("clamp", (body, Num(0.0), Num(1.0))))


def equal_weight_program() -> ScoreProgram:
    """All five classic measures, equally weighted."""
    return weighted_combine([hr_program(k) for k in MEASURE_KINDS], [1.0] * 5)


# --- serialization --------------------------------------------------------
#
# A measure directory holds one .score file per program (surface
# syntax, docstring as a leading comment) plus manifest.json recording
# name, docstring, and fitness.  Libraries get the same treatment with
# the parameter list in the manifest.


def save_programs(directory, programs, fitness=None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    scores = list(fitness) if fitness is not None else [None] * len(programs)
    if len(scores) != len(programs):
        raise LengthMismatch(f"{len(programs)} programs, {len(scores)} fitness values")
    manifest = []
    for i, program in enumerate(programs):
        filename = f"{i:03d}_{_slug(program.name)}.score"
        (directory / filename).write_text(print_score_program(program) + "\n")
        manifest.append(
            {
                "name": program.name,
                "docstring": program.docstring,
                "fitness": scores[i],
                "file": filename,
            }
        )
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def load_programs(directory, library: AbstractionLibrary | None = None):
    """Returns (programs, fitness) read back from a measure directory."""
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    programs, fitness = [], []
    for entry in manifest:
        text = (directory / entry["file"]).read_text()
        programs.append(
            parse_score_program(
                text, library, name=entry["name"], docstring=entry["docstring"]
            )
        )
        fitness.append(entry["fitness"])
    return programs, fitness


def save_library(directory, library: AbstractionLibrary) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = []
    for i, d in enumerate(library):
        filename = f"{i:03d}_{_slug(d.name)}.score"
        (directory / filename).write_text(print_score_expr(d.body) + "\n")
        manifest.append(
            {"name": d.name, "params": [[p, v] for p, v in d.params], "file": filename}
        )
    (directory / "library.json").write_text(json.dumps(manifest, indent=2) + "\n")


def load_library(directory) -> AbstractionLibrary:
    directory = Path(directory)
    manifest = json.loads((directory / "library.json").read_text())
    library = AbstractionLibrary()
    for entry in manifest:
        params = tuple((p, float(v)) for p, v in entry["params"])
        body = _Parser(
            _tokenize((directory / entry["file"]).read_text()),
            [p for p, _ in params],
        ).parse()
        if not library.add(AbstractionDef(entry["name"], params, body)):
            raise ScoreTypeError(f"duplicate abstraction {entry['name']} in manifest")
    return library


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]+", "_", name)[:40] or "measure"

"""Bridging entities to the solver: proof attempts and instance certification.

Conjectures are compiled with their negation asserted, so an unsat verdict
proves the statement and a sat verdict refutes it with a witness read back
from the model. Single instances of a definition are compiled with the
instance asserted directly, so sat certifies membership.

The solver is an external process speaking SMT-LIB text on stdin/stdout.
The command is configurable (any solver with compatible output works); the
default runs the bundled decision procedure as a subprocess. A deterministic
in-process mode replaces wall-clock timeouts with a node budget.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import sys
from dataclasses import dataclass, field

from . import dsl, smt
from .domain import (
    CAT_CONSTANT,
    CAT_FUNCTION,
    CAT_PREDICATE,
    DOMAIN_FF27,
    NODE_CONJECTURE,
    NODE_DEFINITION,
    ProofRecord,
)
from .errors import (
    CategoryMismatch,
    DslSyntaxError,
    MalformedOutput,
    SolverUnavailable,
    UnsupportedConstruct,
)
from .interp import CLOSED_STATEMENTS, TriBool
from .solver import solve_script
from .solver.sexpr import parse_all

PROVEN = "Proven"
DISPROVEN = "Disproven"
UNKNOWN = "Unknown"

SOLVER_ENV_VAR = "THEORYFORGE_SOLVER"
SUBPROCESS_GRACE = 0.5


def default_solver_cmd():
    override = os.environ.get(SOLVER_ENV_VAR)
    if override:
        return shlex.split(override)
    return [sys.executable, "-m", "theoryforge.solver", "--timeout-ms", "{timeout_ms}"]


@dataclass
class ProverConfig:
    solver_cmd: list = None
    conjecture_timeout: float = 2.0
    instance_timeout: float = 0.5
    in_process: bool = False  # deterministic: node budget instead of wall clock
    budget: int = 400_000

    def command(self, timeout_s):
        cmd = self.solver_cmd if self.solver_cmd is not None else default_solver_cmd()
        ms = str(int(timeout_s * 1000))
        return [arg.replace("{timeout_ms}", ms) for arg in cmd]


def run_solver(script, timeout_s, config=None):
    """Returns (verdict, raw_output). Timeout degrades to unknown; a missing
    solver binary raises, garbage output raises."""
    config = config or ProverConfig()
    if config.in_process:
        result = solve_script(script, budget=config.budget)
        return result.verdict, result.render()
    argv = config.command(timeout_s)
    try:
        proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
        )
    except FileNotFoundError as exc:
        raise SolverUnavailable(f"solver command not found: {argv[0]}") from exc
    try:
        out, _ = proc.communicate(script, timeout=timeout_s + SUBPROCESS_GRACE)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.communicate()
        return UNKNOWN_VERDICT, ""
    verdict = out.split(None, 1)[0] if out.split() else ""
    if verdict not in ("sat", "unsat", "unknown"):
        raise MalformedOutput(f"unrecognized solver verdict: {out[:200]!r}")
    return verdict, out


UNKNOWN_VERDICT = "unknown"


def parse_model(output):
    """Extract integer assignments from a model block; None when absent."""
    body = output.split("\n", 1)
    if len(body) < 2 or not body[1].strip():
        return None
    try:
        forms = parse_all(body[1])
    except MalformedOutput:
        return None
    values = {}
    for form in forms:
        if not isinstance(form, list):
            continue
        entries = form[1:] if form and form[0] == "model" else form
        for entry in entries:
            if (
                isinstance(entry, list)
                and len(entry) == 5
                and entry[0] == "define-fun"
                and entry[2] == []
            ):
                v = _int_literal(entry[4])
                if v is not None:
                    values[entry[1]] = v
    return values or None


def _int_literal(node):
    if isinstance(node, str):
        try:
            return int(node)
        except ValueError:
            return None
    if isinstance(node, list) and len(node) == 2 and node[0] == "-":
        inner = _int_literal(node[1])
        return -inner if inner is not None else None
    return None


def _provable(entity):
    if entity.node_kind == NODE_CONJECTURE:
        return True
    return (
        entity.node_kind == NODE_DEFINITION
        and entity.category == CAT_PREDICATE
        and entity.input_arity == 0
    )


def prove(graph, entity_id, config=None):
    """Attempt to settle a conjecture (or closed statement); returns a
    ProofRecord and leaves the graph untouched."""
    config = config or ProverConfig()
    entity = graph.entity(entity_id)
    if not _provable(entity):
        raise CategoryMismatch(f"{entity_id} is not a conjecture or closed statement")
    if graph.domain_tag == DOMAIN_FF27:
        from .ff import ff_prove

        return ff_prove(graph, entity_id)
    try:
        program = smt.lower_entity(graph, entity_id)
        script = smt.compile_smt(program, smt.MODE_ASSERT_NEGATION)
    except (UnsupportedConstruct, DslSyntaxError) as exc:
        return ProofRecord(UNKNOWN, None, f"not expressible for the solver: {exc}")
    verdict, output = run_solver(script, config.conjecture_timeout, config)
    if verdict == "unsat":
        return ProofRecord(PROVEN, None, "negation unsatisfiable")
    if verdict == "sat":
        return ProofRecord(DISPROVEN, parse_model(output), "counterexample found")
    return ProofRecord(UNKNOWN, None, "solver returned unknown")


def certify_instance(graph, entity_id, instance, config=None):
    """Decide one membership/value query with the solver and record the
    answer in the entity's example caches. Returns a TriBool."""
    config = config or ProverConfig()
    entity = graph.entity(entity_id)
    if entity.node_kind != NODE_DEFINITION:
        raise CategoryMismatch(f"{entity_id} is not a definition")
    if graph.domain_tag == DOMAIN_FF27:
        from .domain import classify_instance

        return classify_instance(graph, entity_id, instance)
    try:
        program = smt.lower_entity(graph, entity_id)
        goal = _instance_goal(entity, program, instance)
        script = smt.compile_smt(goal, smt.MODE_ASSERT_TRUTH)
    except (UnsupportedConstruct, DslSyntaxError):
        return TriBool.UNKNOWN
    verdict, _ = run_solver(script, config.instance_timeout, config)
    if verdict == "sat":
        value = TriBool.TRUE
    elif verdict == "unsat":
        value = TriBool.FALSE
    else:
        return TriBool.UNKNOWN
    inst = tuple(instance)
    if value is TriBool.TRUE:
        entity.positives.add(inst)
        entity.negatives.discard(inst)
    else:
        entity.negatives.add(inst)
        entity.positives.discard(inst)
    graph.instance_store.update(inst)
    return value


def _instance_goal(entity, program, instance):
    instance = tuple(instance)
    args = tuple(dsl.Num(int(v)) for v in instance[: entity.input_arity])
    if entity.category == CAT_PREDICATE:
        if len(instance) != entity.input_arity:
            raise CategoryMismatch("instance length does not match arity")
        body = dsl.CallP(program.name, args)
        return dsl.DslProgram(
            kind="Pred", name=None, params=0, bounded=0, defs=(program,), return_pred=body
        )
    if entity.category in (CAT_FUNCTION, CAT_CONSTANT):
        expected = instance[entity.input_arity :]
        if len(expected) != 1:
            raise CategoryMismatch("function instance needs exactly one output value")
        body = dsl.Compare("==", dsl.Call(program.name, args), dsl.Num(int(expected[0])))
        return dsl.DslProgram(
            kind="Pred", name=None, params=0, bounded=0, defs=(program,), return_pred=body
        )
    raise CategoryMismatch(f"cannot certify instances of {entity.category}")


def run_prove(graph, entity_id, config=None):
    """prove() plus graph bookkeeping: promotes/demotes the node kind."""
    from .domain import set_proof

    record = prove(graph, entity_id, config)
    if record.status in (PROVEN, DISPROVEN):
        set_proof(graph, entity_id, record)
    else:
        graph.entity(entity_id).proof = record
    return record


def witness_refutes(graph, entity_id, witness):
    """Check a solver witness against the bounded evaluator: the statement's
    matrix must come out false at the witness point."""
    if not witness:
        return False
    entity = graph.entity(entity_id)
    interp = entity.interpretation
    if not isinstance(interp, CLOSED_STATEMENTS):
        return False
    names = sorted(witness, key=_skolem_order)
    point = tuple(witness[n] for n in names)
    ctx = graph.context()
    return interp.matrix(point, ctx) is TriBool.FALSE


def _skolem_order(name):
    digits = "".join(ch for ch in name if ch.isdigit())
    return (int(digits) if digits else 0, name)

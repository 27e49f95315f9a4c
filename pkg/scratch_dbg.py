import sys

sys.path.insert(0, "src")

from theoryforge import domain, rules, smt
from theoryforge.domain import KnowledgeGraph, CAT_CONSTANT, CAT_FUNCTION, CAT_PREDICATE

g = KnowledgeGraph("Nat")
div = rules.seed_entity(g, "divides", CAT_PREDICATE, 2, builtin="divides",
                        symbolic="Pred(params 2; bounded params 1; ReturnPred Exists([b_0], x_0 * b_0 == x_1);)")
eqp = rules.seed_entity(g, "equals", CAT_PREDICATE, 2, builtin="equals",
                        symbolic="Pred(params 2; ReturnPred x_0 == x_1;)")
conj = rules.commit_action(g, rules.make_action("implication", (eqp, div)))
prog = smt.lower_entity(g, conj)
script = smt.compile_smt(prog, smt.MODE_ASSERT_NEGATION)
print(script)
print("=" * 60)

from theoryforge.solver import lia
from theoryforge.solver import engine as eng

bud = lia.Budget(400_000)
sc = eng._Script({}, {}, {}, [], False, False)
import theoryforge.solver.engine as E

res = E.solve_script(script)
print("verdict:", res.verdict)

# manual trace
sc2 = E._Script({}, {}, {}, [], False, False)
# re-ingest by hand
from theoryforge.solver.sexpr import parse_all
forms = parse_all(script)
for f in forms:
    if f[0] == "define-fun":
        E._ingest_define(sc2, f) if hasattr(E, "_ingest_define") else None
print([f[0] for f in forms])

import sys

sys.path.insert(0, "src")

from theoryforge.solver import lia
import theoryforge.solver.engine as E

script = """
(declare-const n_0 Int)
(declare-const n_1 Int)
(assert (>= n_0 0))
(assert (>= n_1 0))
(assert (not (=> (= n_0 n_1) (exists ((q0 Int)) (and (>= q0 0) (= (* n_0 q0) n_1))))))
(check-sat)
"""

from theoryforge.solver.sexpr import parse_all

bud = lia.Budget(4_000_000)
sc = E._Script({}, {}, {}, [], False, False)
for form in parse_all(script):
    head = form[0]
    if head == "declare-const":
        sc.declared[form[1]] = 0
    elif head == "assert":
        E._ingest_assert(sc, form[1], bud)

F = lia.simplify(lia.f_and(sc.goal), bud)
print("F tag:", F[0])
G = lia.nnf(lia.simplify(F, bud), bud)
print("nnf:", G[0])
parts = list(G[1]) if G[0] == "and" else [G]
for p in parts:
    print("  part:", p[0], "hard:", E._formula_hard(p))
    if E._formula_hard(p):
        der = E._entailed_linear(sc, p, bud)
        print("    derived:", len(der))
        for d in der[:4]:
            print("      ", d)
print("refute:", E._refute_by_instantiation(sc, F, bud))

import sys, time

sys.path.insert(0, "src")

from theoryforge import domain, prover, rules
from theoryforge.domain import KnowledgeGraph, CAT_CONSTANT, CAT_FUNCTION, CAT_PREDICATE

g = KnowledgeGraph("Nat")
zero = rules.seed_entity(g, "zero", CAT_CONSTANT, 0, value=0)
one = rules.seed_entity(g, "one", CAT_CONSTANT, 0, value=1)
two = rules.seed_entity(g, "two", CAT_CONSTANT, 0, value=2)
succ = rules.seed_entity(g, "successor", CAT_FUNCTION, 1, builtin="nat_successor",
                         symbolic="Func(params 1; ReturnExpr x_0 + 1;)")
add = rules.seed_entity(g, "add", CAT_FUNCTION, 2, builtin="nat_add",
                        symbolic="Func(params 2; ReturnExpr x_0 + x_1;)")
mul = rules.seed_entity(g, "multiply", CAT_FUNCTION, 2, builtin="nat_multiply",
                        symbolic="Func(params 2; ReturnExpr x_0 * x_1;)")
div = rules.seed_entity(g, "divides", CAT_PREDICATE, 2, builtin="divides",
                        symbolic="Pred(params 2; bounded params 1; ReturnPred Exists([b_0], x_0 * b_0 == x_1);)")
leq = rules.seed_entity(g, "leq", CAT_PREDICATE, 2, builtin="leq",
                        symbolic="Pred(params 2; bounded params 1; ReturnPred Exists([b_0], x_0 + b_0 == x_1);)")
eqp = rules.seed_entity(g, "equals", CAT_PREDICATE, 2, builtin="equals",
                        symbolic="Pred(params 2; ReturnPred x_0 == x_1;)")

cfg = prover.ProverConfig(in_process=True)

# --- 1 | n, proven --------------------------------------------------------
d1 = rules.commit_action(g, rules.make_action("specialize", (div, one), index=0))
nd1 = rules.commit_action(g, rules.make_action("negate", (d1,)))
conj = rules.commit_action(g, rules.make_action("nonexistence", (nd1,)))
t0 = time.time()
rec = prover.run_prove(g, conj, cfg)
print(f"1|n: {rec.status} in {time.time()-t0:.2f}s   [{rec.detail}]")
assert rec.status == "Proven", rec
assert g.entity(conj).node_kind == "Theorem"

# --- all n even, disproven with witness -----------------------------------
dbl = rules.commit_action(g, rules.make_action("specialize", (mul, two), index=0))
even = rules.commit_action(g, rules.make_action("exists", (dbl,), indices=(0,)))
print("is_even:", g.entity(even).symbolic_def)
odd = rules.commit_action(g, rules.make_action("negate", (even,)))
conj2 = rules.commit_action(g, rules.make_action("nonexistence", (odd,)))
t0 = time.time()
rec2 = prover.run_prove(g, conj2, cfg)
print(f"all-even: {rec2.status} witness={rec2.witness} in {time.time()-t0:.2f}s")
assert rec2.status == "Disproven", rec2
assert prover.witness_refutes(g, conj2, rec2.witness), rec2.witness

# --- add(0,n) = n over the RECURSIVE add, induction ------------------------
radd = rules.commit_action(g, rules.make_action("iterate", (succ,)))
# recursive-add specialized at 0 in the accumulator slot
radd0 = rules.commit_action(g, rules.make_action("specialize", (radd, zero), index=0))
# identity function: match of ... simplest: specialize(add, 0, zero) on seed add
ident = rules.commit_action(g, rules.make_action("specialize", (add, zero), index=0))
conj3 = rules.commit_action(g, rules.make_action("equivalence", (radd0, ident)))
print("equiv:", g.entity(conj3).symbolic_def)
t0 = time.time()
rec3 = prover.run_prove(g, conj3, cfg)
print(f"add(0,n)=n: {rec3.status} in {time.time()-t0:.2f}s   [{rec3.detail}]")
assert rec3.status == "Proven", rec3

# --- divides(2,n) <-> is_even, proven --------------------------------------
d2 = rules.commit_action(g, rules.make_action("specialize", (div, two), index=0))
conj4 = rules.commit_action(g, rules.make_action("equivalence", (d2, even)))
t0 = time.time()
rec4 = prover.run_prove(g, conj4, cfg)
print(f"2|n <-> even: {rec4.status} in {time.time()-t0:.2f}s")
assert rec4.status == "Proven", rec4

# --- leq implication: x<=y -> x<=y+1 style via compose? simpler: divides -> leq
conj5 = rules.commit_action(g, rules.make_action("implication", (div, leq)))
t0 = time.time()
rec5 = prover.run_prove(g, conj5, cfg)
print(f"x|y -> x<=y: {rec5.status} witness={rec5.witness} in {time.time()-t0:.2f}s")
# false: 5 | 0 but not 5 <= 0
assert rec5.status == "Disproven", rec5
assert prover.witness_refutes(g, conj5, rec5.witness)

# --- true implication: equals -> divides? x=y -> x|y ------------------------
conj6 = rules.commit_action(g, rules.make_action("implication", (eqp, div)))
t0 = time.time()
rec6 = prover.run_prove(g, conj6, cfg)
print(f"x=y -> x|y: {rec6.status} in {time.time()-t0:.2f}s   [{rec6.detail}]")
assert rec6.status == "Proven", rec6

# --- instance certification -------------------------------------------------
from theoryforge.interp import TriBool
v = prover.certify_instance(g, div, (3, 12), cfg)
print("certify 3|12:", v)
assert v is TriBool.TRUE
v = prover.certify_instance(g, div, (5, 12), cfg)
print("certify 5|12:", v)
assert v is TriBool.FALSE
v = prover.certify_instance(g, radd, (9, 8, 17), cfg)
print("certify radd(9,8)=17:", v)
assert v is TriBool.TRUE
print("ALL PROVE PATHS OK")

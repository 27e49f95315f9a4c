import sys

sys.path.insert(0, "src")

from theoryforge import domain, rules
from theoryforge.domain import KnowledgeGraph, CAT_CONSTANT, CAT_FUNCTION, CAT_PREDICATE

g = KnowledgeGraph("Nat")
zero = rules.seed_entity(g, "zero", CAT_CONSTANT, 0, value=0)
succ = rules.seed_entity(
    g, "successor", CAT_FUNCTION, 1, builtin="nat_successor",
    symbolic="Func(params 1; ReturnExpr x_0 + 1;)",
)
eq = rules.seed_entity(
    g, "equals", CAT_PREDICATE, 2, builtin="equals",
    symbolic="Pred(params 2; ReturnPred x_0 == x_1;)",
)
print("seeds:", sorted(g.nodes), "store:", sorted(g.instance_store)[:8])

# iterate successor -> addition
a = rules.make_action("iter", (succ,))
add_id = rules.commit_action(g, a)
add = g.entity(add_id)
print("add:", add.name, add.category, add.input_arity, add.symbolic_def)
print("add(3,4) =", domain.compute_function(g, add, (3, 4)))

# iterate addition with zero -> multiplication
mul_id = rules.commit_action(g, rules.make_action("iterate", (add_id, zero)))
mul = g.entity(mul_id)
print("mul:", mul.symbolic_def)
print("mul(3,4) =", domain.compute_function(g, mul, (3, 4)))

# match multiplication's two inputs -> squaring
sq_id = rules.commit_action(g, rules.make_action("match", (mul_id,), indices=(0, 1)))
sq = g.entity(sq_id)
print("square:", sq.symbolic_def)
print("square(5) =", domain.compute_function(g, sq, (5,)))

# specialize successor at zero -> the constant one
one_id = rules.commit_action(g, rules.make_action("specialized", (succ, zero), index=0))
one = g.entity(one_id)
print("one:", one.category, one.symbolic_def, "value:", domain.compute_function(g, one, ()))
assert one.category == CAT_CONSTANT

# divides via exists over multiplication's first argument
div_id = rules.commit_action(g, rules.make_action("exists", (mul_id,), indices=(0,)))
div = g.entity(div_id)
print("divides-like:", div.symbolic_def)
print("examples +", sorted(div.positives)[:6])
from theoryforge.interp import TriBool
print("3 | 12:", domain.classify_instance(g, div_id, (3, 12)))
print("5 | 12:", domain.classify_instance(g, div_id, (5, 12)))

# negate, specialize at one, nonexistence -> "no n fails 1|n"
neg_id = rules.commit_action(g, rules.make_action("negate", (div_id,)))
spec_id = rules.commit_action(g, rules.make_action("specialize", (neg_id, one_id), index=0))
nonex_id = rules.commit_action(g, rules.make_action("nonexistence", (spec_id,)))
nonex = g.entity(nonex_id)
print("conjecture:", nonex.symbolic_def)

from theoryforge import prover
cfg = prover.ProverConfig(in_process=True)
rec = prover.run_prove(g, nonex_id, cfg)
print("prove:", rec.status, rec.detail, g.entity(nonex_id).node_kind)

# a false conjecture: all n are even (exists m. m*2 == n ... build is_even)
two_id = rules.commit_action(g, rules.make_action("constant", (), value=2))
dbl_id = rules.commit_action(g, rules.make_action("specialize", (mul_id, two_id), index=0))
print("double:", g.entity(dbl_id).symbolic_def, domain.compute_function(g, g.entity(dbl_id), (5,)))
even_id = rules.commit_action(g, rules.make_action("exists", (dbl_id,), indices=(0,)))
ev = g.entity(evuid := even_id)
print("is_even:", ev.symbolic_def, sorted(ev.positives)[:5])
# nonexistence of NOT-even would be 'every n is even' -> false
odd_id = rules.commit_action(g, rules.make_action("negate", (even_id,)))
all_even_id = rules.commit_action(g, rules.make_action("nonexistence", (odd_id,)))
rec2 = prover.run_prove(g, all_even_id, cfg)
print("prove2:", rec2.status, rec2.witness, rec2.detail)
assert rec2.status == "Disproven" and prover.witness_refutes(g, all_even_id, rec2.witness)

# forbidden paths
try:
    rules.commit_action(g, rules.make_action("negate", (odd_id,)))
    print("FORBIDDEN MISSED")
except Exception as exc:
    print("double negation blocked:", type(exc).__name__)
try:
    rules.commit_action(g, rules.make_action("equivalence", (even_id, odd_id)))
    print("FORBIDDEN MISSED")
except Exception as exc:
    print("P<->not P blocked:", type(exc).__name__)

# implication conjecture evaluable + provable
impl_id = rules.commit_action(g, rules.make_action("implication", (div_id, div_id if False else eq)))
print("impl built ok (div -> eq, surely false at (1,2)... wait arity both 2)")

# persistence round trip, byte stable
s1 = domain.dumps_graph(g)
g2 = domain.graph_from_json(__import__("json").loads(s1))
s2 = domain.dumps_graph(g2)
print("round-trip byte-stable:", s1 == s2)
print("reloaded mul(3,4):", domain.compute_function(g2, g2.entity(mul_id), (3, 4)))
print("reloaded classify 3|12:", domain.classify_instance(g2, div_id, (3, 12)))

# enumeration determinism
acts1 = rules.enumerate_actions(g, seed=7)
acts2 = rules.enumerate_actions(g, seed=7)
print("actions:", len(acts1), "deterministic:", acts1 == acts2)
print("sample:", [a.rule for a in acts1[:8]])

# simulation leaves the graph untouched
before = len(g.nodes)
clone, eid = rules.simulate(g, acts1[0])
print("simulate ok:", eid in clone.nodes, "orig unchanged:", len(g.nodes) == before)

import math

from theoryforge import domain, rules, scoring
from theoryforge.errors import (
    DepthExceeded,
    LengthMismatch,
    ScoreSyntaxError,
    ScoreTypeError,
    UnknownAbstraction,
    UnknownPrimitive,
    ZeroWeights,
)

g = domain.KnowledgeGraph()
zero = rules.seed_entity(g, "zero", domain.CAT_CONSTANT, 0, value=0)
succ = rules.seed_entity(g, "successor", domain.CAT_FUNCTION, 1, builtin="nat_successor")
eq = rules.seed_entity(g, "equals", domain.CAT_PREDICATE, 2, builtin="equals")
add = rules.commit_action(g, rules.make_action("iterate", (succ,)))
mul = rules.commit_action(g, rules.make_action("iterate", (add, zero)))
print("nodes:", sorted(g.nodes))

# primitives
assert scoring.eval_primitive("get_num_concepts", None, g) == 5.0
assert scoring.eval_primitive("get_input_arity", eq, g) == 2.0
assert scoring.eval_primitive("get_construction_history_rule_names", zero, g) == []
assert scoring.eval_primitive("is_proven", add, g) == 0.0
ex = scoring.eval_primitive("get_examples", add, g)
assert ex == sorted(ex)
try:
    scoring.eval_primitive("get_bogus", zero, g)
    raise AssertionError
except UnknownPrimitive:
    pass
try:
    scoring.eval_primitive("create_weighted_interestingness_function", None, g)
    raise AssertionError
except ScoreTypeError:
    pass

# hr measures
for k in scoring.MEASURE_KINDS:
    for eid in g.nodes:
        v = scoring.hr_measure(k, eid, g)
        assert 0.0 <= v <= 1.0, (k, eid, v)
assert scoring.hr_measure("parsimony", eq, g) == 0.5
assert scoring.hr_measure("comprehensibility", zero, g) == 1.0
assert scoring.hr_measure("applicability", add, g) == len(g.entity(add).positives) / (
    len(g.entity(add).positives) + len(g.entity(add).negatives)
)
# zero used by add? add's history: iterate(successor) -> no zero. mul uses zero.
prod_zero = scoring.hr_measure("productivity", zero, g)
print("productivity(zero):", prod_zero)

# parse / print round trip
smoke = "clamp(0.4*log1p(depth(e))/(1+arity(e)), 0, 1)"
p = scoring.parse_score_program(smoke, name="smoke")
t1 = scoring.print_score_expr(p.body)
p2 = scoring.parse_score_program(t1)
assert p2.body == p.body, (t1, scoring.print_score_expr(p2.body))
print("canonical:", t1)
for eid in g.nodes:
    v = scoring.eval_score_program(p, eid, g)
    assert 0.0 <= v <= 1.0 and math.isfinite(v)
print("smoke eval ok")

cases = [
    "0.7",
    "get_construction_depth(e) / (1 + get_entity_step_age(e))",
    "count(get_examples(e)) / (count(get_examples(e)) + count(get_nonexamples(e)))",
    "diff_count(get_ancestors(e), get_descendants(e)) / (1 + get_num_concepts())",
    "1 if get_entity_node_type(e) == 'Theorem' else 0.25",
    "(get_concept_category(e) != 'Constant') * 0.5 + 0.1",
    "min(1, max(0, exp(-0.1 * get_entity_step_age(e))))",
    "sqrt(get_in_degree(e)) / 4 if get_in_degree(e) > 0 else hr_novelty(e)",
    "hr_comprehensibility(e) * 0.5 + hr_parsimony(e) * 0.5",
    "is_proven(e)",
    "get_num_conjectures(g) / (1 + get_num_concepts())",
    "-0.5 + 1 - -0.25",
    "1 - (2 - 3) - 4 / 2 / 2",
    "(0.3 if get_input_arity(e) >= 2 else 0.6) if is_proven(e) == 0 else 0.9",
]
for text in cases:
    prog = scoring.parse_score_program(text)
    canon = scoring.print_score_expr(prog.body)
    again = scoring.parse_score_program(canon)
    assert again.body == prog.body, (text, canon, scoring.print_score_expr(again.body))
    v = scoring.eval_score_program(prog, add, g)
    assert 0.0 <= v <= 1.0 and math.isfinite(v), (text, v)
print("round trips ok")

assert scoring.eval_score_program(scoring.parse_score_program("0.7"), zero, g) == 0.7
div0 = scoring.parse_score_program("1 / (count(get_examples(e)) - count(get_examples(e)))")
assert scoring.eval_score_program(div0, zero, g) == 0.0

# errors
for text, err in [
    ("frobnicate(2)", UnknownAbstraction),
    ("get_bogus(e)", UnknownPrimitive),
    ("clamp(1, 2)", ScoreTypeError),
    ("get_examples(e) + 1", ScoreTypeError),
    ("get_entity_node_type(e) < 'x'", ScoreTypeError),
    ("get_examples()", ScoreTypeError),
    ("1 +", ScoreSyntaxError),
    ("(1", ScoreSyntaxError),
    ("1 @ 2", ScoreSyntaxError),
    ("e + 1", ScoreSyntaxError),
    ("min(1)", ScoreTypeError),
]:
    try:
        scoring.parse_score_program(text)
        raise AssertionError(f"no error for {text}")
    except err:
        pass
print("errors ok")

# depth limit
deep = "exp(" * 25 + "1" + ")" * 25
try:
    scoring.parse_score_program(deep)
    raise AssertionError
except DepthExceeded:
    pass
ok24 = "exp(" * 23 + "1" + ")" * 23
scoring.parse_score_program(ok24)
print("depth ok")

# abstractions
lib = scoring.AbstractionLibrary()
body = scoring.parse_score_expr("get_construction_depth(e) / (k + get_entity_step_age(e))", params=("k",))
assert lib.add(scoring.AbstractionDef("norm_depth", (("k", 1.0),), body))
assert not lib.add(scoring.AbstractionDef("norm_depth", (("k", 1.0),), body))
body2 = scoring.parse_score_expr("get_construction_depth(e) / (q + get_entity_step_age(e))", params=("q",))
assert not lib.add(scoring.AbstractionDef("other_name", (("q", 2.0),), body2))  # same normalized body
prog = scoring.parse_score_program("clamp(norm_depth(2) * 0.8, 0, 1)", lib)
v1 = scoring.eval_score_program(prog, add, g, lib)
inlined = scoring.ScoreProgram("inl", "", scoring.inline_abstractions(prog.body, lib))
v2 = scoring.eval_score_program(inlined, add, g)
assert v1 == v2, (v1, v2)
# defaults
prog_d = scoring.parse_score_program("norm_depth()", lib)
vd = scoring.eval_score_program(prog_d, add, g, lib)
assert vd == scoring.eval_score_program(scoring.parse_score_program("norm_depth(1)", lib), add, g, lib)
try:
    scoring.parse_score_program("norm_depth(1, 2, 3)", lib)
    raise AssertionError
except ScoreTypeError:
    pass
print("abstractions ok:", v1)

# second-layer abstraction referencing the first
bodyb = scoring.parse_score_expr("norm_depth(w) * 0.5", lib, params=("w",))
assert lib.add(scoring.AbstractionDef("half_depth", (("w", 1.0),), bodyb))

# weighted combine
hrs = [scoring.hr_program(k) for k in scoring.MEASURE_KINDS]
eq = scoring.equal_weight_program()
for eid in g.nodes:
    v = scoring.eval_score_program(eq, eid, g)
    manual = sum(scoring.hr_measure(k, eid, g) for k in scoring.MEASURE_KINDS) / 5
    assert abs(v - min(1.0, manual)) < 1e-12, (eid, v, manual)
single = scoring.weighted_combine([hrs[0]], [1.0])
for eid in g.nodes:
    assert scoring.eval_score_program(single, eid, g) == scoring.eval_score_program(hrs[0], eid, g)
ab = scoring.weighted_combine(hrs[:2], [2.0, 0.0])
for eid in g.nodes:
    assert scoring.eval_score_program(ab, eid, g) == scoring.eval_score_program(hrs[0], eid, g)
sc1 = scoring.weighted_combine(hrs, [1, 2, 3, 4, 5])
sc9 = scoring.weighted_combine(hrs, [9, 18, 27, 36, 45])
r1 = sorted(g.nodes, key=lambda eid: scoring.eval_score_program(sc1, eid, g))
r9 = sorted(g.nodes, key=lambda eid: scoring.eval_score_program(sc9, eid, g))
assert r1 == r9
for args, err in [((hrs, [1, 2]), LengthMismatch), ((hrs, [0] * 5), ZeroWeights), ((hrs, [1, 1, 1, 1, -1]), ZeroWeights)]:
    try:
        scoring.weighted_combine(*args)
        raise AssertionError
    except err:
        pass
print("weighted ok")

# serialization
import tempfile, pathlib
with tempfile.TemporaryDirectory() as d:
    d = pathlib.Path(d)
    scoring.save_library(d / "lib", lib)
    lib2 = scoring.load_library(d / "lib")
    assert [a.name for a in lib2] == [a.name for a in lib]
    assert [a.body for a in lib2] == [a.body for a in lib]
    progs = [p, prog, eq]
    scoring.save_programs(d / "m", progs, fitness=[0.5, None, 0.25])
    back, fit = scoring.load_programs(d / "m", lib2)
    assert fit == [0.5, None, 0.25]
    assert [b.body for b in back] == [q.body for q in progs]
    assert [b.name for b in back] == [q.name for q in progs]
print("serialization ok")

# totality fuzz: random trees up to depth 24
import random

rng = random.Random(0)
NUMP = [n for n, (_, k, _) in scoring.PRIMITIVES.items() if k == "num"]
LISTP = [n for n, (_, k, _) in scoring.PRIMITIVES.items() if k == "list"]
STRP = [n for n, (_, k, _) in scoring.PRIMITIVES.items() if k == "text"]

def rand_num(depth):
    if depth >= 23 or rng.random() < 0.25:
        return random.choice(
            [scoring.Num(rng.uniform(-1e6, 1e6)), scoring.Prim(rng.choice(NUMP)), scoring.Measure(rng.choice(scoring.MEASURE_KINDS))]
        )
    pick = rng.randrange(8)
    if pick == 0:
        return scoring.Arith(rng.choice("+-*/"), rand_num(depth + 1), rand_num(depth + 1))
    if pick == 1:
        return scoring.Call(rng.choice(("log1p", "exp", "sqrt")), (rand_num(depth + 1),))
    if pick == 2:
        return scoring.Call("clamp", (rand_num(depth + 1), rand_num(depth + 1), rand_num(depth + 1)))
    if pick == 3:
        return scoring.Call(rng.choice(("min", "max")), (rand_num(depth + 1), rand_num(depth + 1)))
    if pick == 4:
        return scoring.Call("count", (scoring.Prim(rng.choice(LISTP)),))
    if pick == 5:
        return scoring.Cmp(rng.choice(("<", "<=", ">", ">=", "==", "!=")), rand_num(depth + 1), rand_num(depth + 1))
    if pick == 6:
        return scoring.Cmp(rng.choice(("==", "!=")), scoring.Prim(rng.choice(STRP)), scoring.Text(rng.choice(["Theorem", "Concept", "Function", "x"])))
    return scoring.Cond(rand_num(depth + 1), rand_num(depth + 1), rand_num(depth + 1))

ids = sorted(g.nodes)
for i in range(400):
    tree = rand_num(0)
    prog = scoring.ScoreProgram("fuzz", "", tree)
    v = scoring.eval_score_program(prog, ids[i % len(ids)], g)
    assert 0.0 <= v <= 1.0 and math.isfinite(v), (i, v)
    canon = scoring.print_score_expr(tree)
    reparsed = scoring.parse_score_program(canon)
    assert reparsed.body == tree, canon
print("fuzz ok")
print("ALL SCORING OK")

import json
import random

import httpx

from theoryforge import env, evolve, scoring
from theoryforge.errors import ScoreSyntaxError

# --- abstraction surface form ---
adef = evolve.parse_abstraction_text(
    "# scaled difference\nscaled_difference(a=0, b=0, factor=0.5) = (a - b) * factor"
)
assert adef.name == "scaled_difference"
assert adef.params == (("a", 0.0), ("b", 0.0), ("factor", 0.5))
print("abs text:", evolve.format_abstraction(adef))
lib = scoring.AbstractionLibrary()
assert lib.add(adef)
# multi-line body, default-less param gets 1.0
adef2 = evolve.parse_abstraction_text("depth_boost(w) =\n  w * get_construction_depth(e)")
assert adef2.params == (("w", 1.0),)
assert lib.add(adef2)
for bad in ("count(a=1) = a", "no_body()", "x(p=q) = p", "# only a comment"):
    try:
        evolve.parse_abstraction_text(bad)
        raise AssertionError(f"expected rejection: {bad}")
    except ScoreSyntaxError:
        pass

# --- fenced block extraction ---
text = "noise\n```\n# doc\n1 + 2\n```\nmore\n```python\n3 * 4\n```"
blocks = evolve.extract_fenced_blocks(text)
assert blocks == ["# doc\n1 + 2", "3 * 4"], blocks

# --- mutation sampler: children valid and distinct from parent ---
parent = scoring.parse_score_program(
    "# parent\nclamp(log1p(get_construction_depth(e)) / (1 + get_input_arity(e)), 0, 1)"
)
ms = evolve.MutationSampler(seed=5)
ctx = evolve.render_evolution_context(
    [(scoring.print_score_program(parent), 0.5)], scoring.AbstractionLibrary(), 2
)
children = ms.propose_programs(ctx)
assert len(children) == 2
parent_text = scoring.print_score_expr(parent.body)
for child in children:
    prog = scoring.parse_score_program(child)  # must parse + validate
    assert scoring.print_score_expr(prog.body) != parent_text
    print("child:", scoring.print_score_expr(prog.body))

# deterministic across same-seeded samplers
ms_b = evolve.MutationSampler(seed=5)
assert ms_b.propose_programs(ctx) == evolve.MutationSampler(seed=5).propose_programs(ctx)

# --- mutation sampler abstraction mode on repeated subexpressions ---
rep = "# repeated\nlog1p(get_in_degree(e)) * 0.5 + log1p(get_in_degree(e)) * 0.25"
actx = evolve.render_abstraction_context([(rep, 1.0)], scoring.AbstractionLibrary(), 2)
proposals = evolve.MutationSampler(seed=1).propose_abstractions(actx)
print("abstraction proposals:", proposals)
assert proposals, "expected at least one extraction"
lib2 = scoring.AbstractionLibrary()
parsed = evolve.parse_abstraction_text(proposals[0], lib2)
assert lib2.add(parsed)

# --- remote sampler against a fake transport ---
def ok_handler(request):
    body = json.loads(request.content)
    assert body["model"] == "test-model"
    assert body["messages"][0]["role"] == "system"
    reply = "```\n# remote idea\nhr_novelty(e) * 0.5 + 0.5\n```"
    return httpx.Response(200, json={"choices": [{"message": {"content": reply}}]})

rs = evolve.RemoteChatSampler(
    base_url="http://fake", api_key="k", model="test-model",
    transport=httpx.MockTransport(ok_handler),
)
got = rs.propose_programs(ctx)
assert got == ["# remote idea\nhr_novelty(e) * 0.5 + 0.5"], got
rs_bad = evolve.RemoteChatSampler(
    base_url="http://fake", model="test-model",
    transport=httpx.MockTransport(lambda r: httpx.Response(500, text="boom")),
)
assert rs_bad.propose_programs(ctx) == []
rs_junk = evolve.RemoteChatSampler(
    base_url="http://fake", model="test-model",
    transport=httpx.MockTransport(
        lambda r: httpx.Response(200, json={"choices": [{"message": {"content": "!!! not code !!!"}}]})
    ),
)
junk = rs_junk.propose_programs(ctx)  # one block, fails parse downstream
isl = evolve.Island(0, [(parent, 0.4)])
cands = evolve.evolution_step(isl, rs_junk, evolve.EvoConfig(seed=0), random.Random(0))
assert cands == [], "malformed remote reply must yield zero candidates"

# --- tiny full run on succ_zero_eq ---
cfg = evolve.EvoConfig(
    islands=2, generations=6, abstraction_frequency=3, eval_rollouts=2, seed=4
)
rc = env.RolloutConfig(episode_step_cap=12, seed=9)
report = evolve.run_evoabstract(cfg, rc, "succ_zero_eq")
print("tiny run: seed fitness", report.seed_fitness, "best", report.best_fitness)
print("curve:", report.curve)
assert len(report.curve) == 6
assert all(b >= a for a, b in zip(report.curve, report.curve[1:])), "curve must be non-decreasing"
assert report.best_fitness == report.curve[-1]
libs = [len(isl.library) for isl in report.islands]
print("library sizes:", libs)

# --- ablation equality: abstraction off == funsearch, trajectory-identical ---
def population_snapshot(rep):
    return [
        [(scoring.print_score_program(p), f) for p, f in isl.population]
        for isl in rep.islands
    ]

cfg2 = evolve.EvoConfig(islands=2, generations=5, abstraction_frequency=2, eval_rollouts=2, seed=7)
rc2 = env.RolloutConfig(episode_step_cap=10, seed=3)
r_off = evolve.run_evoabstract(cfg2, rc2, "succ_zero_eq", sampler=evolve.MutationSampler(7), abstraction=False)
r_fun = evolve.run_funsearch(cfg2, rc2, "succ_zero_eq", sampler=evolve.MutationSampler(7))
assert population_snapshot(r_off) == population_snapshot(r_fun)
assert r_off.curve == r_fun.curve
# G > N_gen also reduces to the baseline
cfg3 = evolve.EvoConfig(islands=2, generations=5, abstraction_frequency=99, eval_rollouts=2, seed=7)
r_big_g = evolve.run_evoabstract(cfg3, rc2, "succ_zero_eq", sampler=evolve.MutationSampler(7))
assert population_snapshot(r_big_g) == population_snapshot(r_fun)
assert all(len(isl.library) == 0 for isl in r_big_g.islands)
print("ablation equality holds")

print("ALL EVOLVE OK")

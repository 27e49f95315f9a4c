import random
import time

from theoryforge import env, gt, rules, scoring
from theoryforge.errors import NoApplicableActions, UnknownConfig

# --- start configs ---
for name in env.START_CONFIGS:
    g = env.load_start_config(name)
    print(name, "->", [(e.name, e.category) for e in g.nodes.values()])
try:
    env.load_start_config("bogus")
    raise AssertionError("expected UnknownConfig")
except UnknownConfig:
    pass

# --- sample_by_score ---
rng = random.Random(0)
items = ["a", "b", "c"]
counts = {k: 0 for k in items}
for _ in range(3000):
    (pick,) = env.sample_by_score(items, [0.0, 0.0, 1.0], rng)
    counts[pick] += 1
print("sample counts (c should dominate):", counts)
assert counts["c"] > 2900, counts
# distinct draws
picks = env.sample_by_score(items, [1.0, 1.0, 1.0], rng, count=3)
assert sorted(picks) == items, picks
# count > len(items) is fine
picks = env.sample_by_score(items, [1.0, 2.0, 3.0], rng, count=10)
assert sorted(picks) == items

# --- select_action smoke ---
g = env.load_start_config("succ_zero_eq")
lib = scoring.AbstractionLibrary()
comp = scoring.hr_program("comprehensibility")
pc = env.PolicyConfig(seed=1)
a = env.select_action(g, comp, lib, pc, random.Random(1))
print("selected action:", a.rule, a.inputs, dict(a.params))
assert a.rule != rules.RULE_PROVE

# --- deterministic episodes: bit-identical traces ---
rc = env.RolloutConfig(episode_step_cap=25, seed=7)
t0 = time.monotonic()
tr1 = env.run_episode(g, comp, lib, rc, pc)
tr2 = env.run_episode(g, comp, lib, rc, pc)
el = time.monotonic() - t0
assert tr1 == tr2, "step-capped episodes must be deterministic"
assert tr1.to_json_lines() == tr2.to_json_lines()
assert len(tr1.steps) <= 25
print(f"deterministic episode: {len(tr1.steps)} steps, reward={tr1.total_reward}, {el/2:.2f}s each")
print("  matched:", tr1.matched)
for s in tr1.steps[:6]:
    print("  ", s.index, s.outcome, s.reward, s.matched or "")

# JSON-lines round trip
back = env.EpisodeTrace.from_json_lines(tr1.to_json_lines())
assert back == tr1

# zero caps -> empty trace
empty = env.run_episode(g, comp, lib, env.RolloutConfig(episode_time_cap=0.0), pc)
assert empty.steps == () and empty.total_reward == 0.0
empty2 = env.run_episode(g, comp, lib, env.RolloutConfig(episode_step_cap=0), pc)
assert empty2.steps == ()

# pre-claiming: start entities never credit. arithmetic_base seeds
# addition/multiplication/divides/leq/equals/one/two which all appear in
# the catalogue; rewards in-episode must come only from new builds.
ga = env.load_start_config("arithmetic_base")
gts = gt.ground_truth_set("nat")
claimed = set()
for eid in ga.nodes:
    for entry in gts.match(ga, eid, claimed):
        claimed.add(entry.name)
print("pre-claimed by arithmetic_base:", sorted(claimed))
assert "addition" in claimed and "divides" in claimed

# --- reward sanity: a 40-step comprehensibility episode on succ_zero_eq ---
rc40 = env.RolloutConfig(episode_step_cap=40, seed=3)
tr = env.run_episode(g, comp, lib, rc40, pc)
print("40-step comp episode: reward", tr.total_reward, "matched", tr.matched)

# --- evaluate_measure, serial vs 2 workers, identical results ---
rce = env.RolloutConfig(episode_step_cap=18, eval_rollouts=4, seed=11)
t0 = time.monotonic()
fit1 = env.evaluate_measure(comp, lib, rce, "succ_zero_eq", pc, workers=1)
t1 = time.monotonic() - t0
fit2 = env.evaluate_measure(comp, lib, rce, "succ_zero_eq", pc, workers=2)
t2 = time.monotonic() - t0 - t1
assert fit1.rewards == fit2.rewards, (fit1.rewards, fit2.rewards)
assert fit1.traces == fit2.traces
print(f"evaluate_measure: fitness={fit1.fitness:.3f} rewards={fit1.rewards} serial={t1:.1f}s pool={t2:.1f}s")

# --- criterion-7 shaped signal at small scale: comprehensibility vs constant ---
const = scoring.ScoreProgram("constant", "uniform scorer", scoring.Num(0.5))
rc_sig = env.RolloutConfig(episode_step_cap=30, eval_rollouts=8, seed=0)
fc = env.evaluate_measure(comp, lib, rc_sig, "succ_zero_eq", pc, workers=8)
fr = env.evaluate_measure(const, lib, rc_sig, "succ_zero_eq", pc, workers=8)
print("comprehensibility fitness:", fc.fitness, fc.rewards)
print("constant (random) fitness:", fr.fitness, fr.rewards)
print("gap:", fc.fitness - fr.fitness)

print("ALL ENV OK")

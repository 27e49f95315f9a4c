"""MDP runtime: start configurations, score-guided action selection,
episode rollouts with extrinsic reward, and measure fitness.

An episode interleaves two moves: pick a production action by
simulating candidates and sampling proportionally to their score, or
pop an automatically queued resolution attempt for a conjecture
created on the previous step.  Reward is +1 per distinct catalogue
entry rediscovered, deduplicated within the episode, with entries
already satisfied by the start graph excluded up front.

Episodes run against a wall clock by default; setting a step cap
switches to a fully deterministic mode (prover budgets counted in
steps, the step index standing in for the clock) so traces are
bit-identical across runs.
"""

from __future__ import annotations

import json
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from . import domain, gt, prover, rules, scoring
from .domain import CAT_CONSTANT, CAT_FUNCTION, CAT_PREDICATE, NODE_CONJECTURE
from .errors import NoApplicableActions, TheoryForgeError, UnknownConfig

SCORE_EPSILON = 1e-6
MAX_STALLS = 8

START_CONFIGS = ("succ_zero_eq", "arithmetic_base", "ff_27")


@dataclass(frozen=True)
class PolicyConfig:
    definitions_to_sample: int = 6
    simulation_limit: int = 24
    seed: int = 0

    def __post_init__(self):
        if self.definitions_to_sample < 1 or self.simulation_limit < 1:
            raise UnknownConfig("policy sample counts must be at least 1")


@dataclass(frozen=True)
class RolloutConfig:
    episode_time_cap: float = 60.0
    episode_step_cap: int | None = None  # set for deterministic mode
    episodes: int = 64
    eval_rollouts: int = 16
    gamma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.episode_time_cap < 0:
            raise UnknownConfig("time cap must be nonnegative")
        if self.episode_step_cap is not None and self.episode_step_cap < 0:
            raise UnknownConfig("step cap must be nonnegative")
        if self.episodes < 1 or self.eval_rollouts < 1:
            raise UnknownConfig("episode counts must be at least 1")
        if not 0 < self.gamma <= 1:
            raise UnknownConfig("gamma must be in (0, 1]")


def load_start_config(name: str) -> domain.KnowledgeGraph:
    if name == "succ_zero_eq":
        g = domain.KnowledgeGraph()
        g.instance_store.update(range(13))
        rules.seed_entity(g, "zero", CAT_CONSTANT, 0, value=0)
        rules.seed_entity(
            g,
            "successor",
            CAT_FUNCTION,
            1,
            builtin="nat_successor",
            symbolic="Func(params 1; ReturnExpr x_0 + 1;)",
        )
        rules.seed_entity(
            g,
            "equals",
            CAT_PREDICATE,
            2,
            builtin="equals",
            symbolic="Pred(params 2; ReturnPred x_0 == x_1;)",
        )
        return g
    if name == "arithmetic_base":
        g = domain.KnowledgeGraph()
        g.instance_store.update(range(13))
        rules.seed_entity(g, "zero", CAT_CONSTANT, 0, value=0)
        rules.seed_entity(g, "one", CAT_CONSTANT, 0, value=1)
        rules.seed_entity(g, "two", CAT_CONSTANT, 0, value=2)
        rules.seed_entity(
            g,
            "addition",
            CAT_FUNCTION,
            2,
            builtin="nat_add",
            symbolic="Func(params 2; ReturnExpr x_0 + x_1;)",
        )
        rules.seed_entity(
            g,
            "multiplication",
            CAT_FUNCTION,
            2,
            builtin="nat_multiply",
            symbolic="Func(params 2; ReturnExpr x_0 * x_1;)",
        )
        rules.seed_entity(
            g,
            "divides",
            CAT_PREDICATE,
            2,
            builtin="divides",
            symbolic="Pred(params 2; bounded params 1; ReturnPred Exists([b_0], x_0 * b_0 == x_1);)",
        )
        rules.seed_entity(
            g,
            "less_or_equal",
            CAT_PREDICATE,
            2,
            builtin="leq",
            symbolic="Pred(params 2; bounded params 1; ReturnPred Exists([b_0], x_0 + b_0 == x_1);)",
        )
        rules.seed_entity(
            g,
            "equals",
            CAT_PREDICATE,
            2,
            builtin="equals",
            symbolic="Pred(params 2; ReturnPred x_0 == x_1;)",
        )
        return g
    if name == "ff_27":
        from .ff import FF27

        g = domain.KnowledgeGraph(domain.DOMAIN_FF27, ff=FF27)
        g.instance_store.update(range(FF27.size))
        rules.seed_entity(g, "zero", CAT_CONSTANT, 0, value=0)
        rules.seed_entity(g, "one", CAT_CONSTANT, 0, value=1)
        rules.seed_entity(g, "gen", CAT_CONSTANT, 0, value=FF27.generator)
        rules.seed_entity(
            g,
            "ff_add",
            CAT_FUNCTION,
            2,
            builtin="ff_add",
            symbolic="Func(params 2; ReturnExpr x_0 + x_1;)",
        )
        rules.seed_entity(
            g,
            "ff_mul",
            CAT_FUNCTION,
            2,
            builtin="ff_mul",
            symbolic="Func(params 2; ReturnExpr x_0 * x_1;)",
        )
        rules.seed_entity(
            g,
            "equals",
            CAT_PREDICATE,
            2,
            builtin="ff_equals",
            symbolic="Pred(params 2; ReturnPred x_0 == x_1;)",
        )
        return g
    raise UnknownConfig(f"no start configuration named {name!r}")


def sample_by_score(items, scores, rng, count: int = 1):
    """Draw without replacement, probability proportional to
    (score - min + epsilon).  Equal scores reduce to uniform; the
    argmax keeps the top probability."""
    pool = list(zip(items, [float(s) for s in scores]))
    picked = []
    while pool and len(picked) < count:
        low = min(s for _, s in pool)
        weights = [s - low + SCORE_EPSILON for _, s in pool]
        total = sum(weights)
        roll = rng.random() * total
        acc = 0.0
        index = len(pool) - 1
        for i, w in enumerate(weights):
            acc += w
            if roll < acc:
                index = i
                break
        picked.append(pool.pop(index)[0])
    return picked


def select_action(graph, measure, library, config: PolicyConfig, rng=None):
    """One pass of the selection template: score all definitions,
    sample a focus set, enumerate their actions, simulate a bounded
    sample, and draw one action by prospective score."""
    rng = rng if rng is not None else random.Random(config.seed)
    definitions = graph.definitions()
    if not definitions:
        raise NoApplicableActions("graph has no definitions")
    ids = sorted((d.id for d in definitions), key=domain._id_key)
    def_scores = [scoring.eval_score_program(measure, i, graph, library) for i in ids]
    focus = sample_by_score(ids, def_scores, rng, config.definitions_to_sample)
    actions = rules.enumerate_actions(graph, focus_ids=focus, seed=rng.randrange(2**31))
    actions = [a for a in actions if a.rule != rules.RULE_PROVE]
    if not actions:
        raise NoApplicableActions("no production actions for the sampled focus")
    if len(actions) > config.simulation_limit:
        actions = rng.sample(actions, config.simulation_limit)
    candidates, prospect_scores = [], []
    for action in actions:
        try:
            clone, eid = rules.simulate(graph, action)
        except TheoryForgeError:
            continue
        candidates.append(action)
        prospect_scores.append(scoring.eval_score_program(measure, eid, clone, library))
    if not candidates:
        raise NoApplicableActions("every sampled action failed simulation")
    return sample_by_score(candidates, prospect_scores, rng)[0]


@dataclass(frozen=True)
class StepResult:
    action: rules.Action
    entity_id: str
    verdict: str | None  # set only for resolution attempts


def step(graph, action: rules.Action, prover_config=None) -> StepResult:
    """Apply one action: production actions commit a new entity,
    prove actions attempt to settle a conjecture in place."""
    if action.rule == rules.RULE_PROVE:
        (target,) = action.inputs
        record = prover.run_prove(graph, target, prover_config)
        return StepResult(action, target, record.status)
    eid = rules.commit_action(graph, action)
    return StepResult(action, eid, None)


@dataclass(frozen=True)
class TraceStep:
    index: int
    action: dict | None
    outcome: str  # entity id, verdict, or a logged failure
    reward: float
    intrinsic: float
    clock: float
    matched: tuple = ()

    def to_json(self):
        return {
            "index": self.index,
            "action": self.action,
            "outcome": self.outcome,
            "reward": self.reward,
            "intrinsic": self.intrinsic,
            "clock": self.clock,
            "matched": list(self.matched),
        }


@dataclass(frozen=True)
class EpisodeTrace:
    seed: int
    total_reward: float
    matched: tuple
    steps: tuple = field(default_factory=tuple)

    def to_json_lines(self) -> str:
        header = {
            "seed": self.seed,
            "total_reward": self.total_reward,
            "matched": list(self.matched),
        }
        lines = [json.dumps(header, separators=(",", ":"))]
        lines += [json.dumps(s.to_json(), separators=(",", ":")) for s in self.steps]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_json_lines(text: str) -> "EpisodeTrace":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        header, step_rows = rows[0], rows[1:]
        steps = tuple(
            TraceStep(
                r["index"],
                r["action"],
                r["outcome"],
                r["reward"],
                r["intrinsic"],
                r["clock"],
                tuple(r["matched"]),
            )
            for r in step_rows
        )
        return EpisodeTrace(
            header["seed"], header["total_reward"], tuple(header["matched"]), steps
        )


def run_episode(
    start,
    measure,
    library,
    rc: RolloutConfig,
    pc: PolicyConfig,
    gt_set=None,
    prover_config=None,
) -> EpisodeTrace:
    graph = rules.clone_graph(start)
    gt_set = gt_set or gt.ground_truth_set(graph.domain_tag)
    prover_config = prover_config or prover.ProverConfig(in_process=True)
    rng = random.Random(rc.seed)
    deterministic = rc.episode_step_cap is not None

    claimed = set()
    for eid in list(graph.nodes):
        for entry in gt_set.match(graph, eid, claimed):
            claimed.add(entry.name)  # present at the start, not a discovery

    steps = []
    matched = []
    queue = []
    total = 0.0
    stalls = 0
    t0 = time.monotonic()
    while True:
        t = len(steps)
        if deterministic:
            if t >= rc.episode_step_cap:
                break
            clock = float(t)
        else:
            clock = time.monotonic() - t0
            if clock >= rc.episode_time_cap:
                break
        if queue:
            action = queue.pop(0)
        else:
            try:
                action = select_action(graph, measure, library, pc, rng)
                stalls = 0
            except NoApplicableActions as exc:
                stalls += 1
                steps.append(TraceStep(t, None, f"stall: {exc}", 0.0, 0.0, clock))
                if stalls >= MAX_STALLS:
                    break
                continue
        try:
            result = step(graph, action, prover_config)
        except TheoryForgeError as exc:
            steps.append(TraceStep(t, action.to_json(), f"error: {exc}", 0.0, 0.0, clock))
            continue
        eid = result.entity_id
        hits = ()
        if result.verdict is None or result.verdict in (prover.PROVEN, prover.DISPROVEN):
            entries = gt_set.match(graph, eid, claimed)
            hits = tuple(entry.name for entry in entries)
            claimed.update(hits)
            matched.extend(hits)
        reward = float(len(hits))
        total += (rc.gamma**t) * reward
        intrinsic = scoring.eval_score_program(measure, eid, graph, library)
        outcome = result.verdict or eid
        steps.append(TraceStep(t, action.to_json(), outcome, reward, intrinsic, clock, hits))
        if result.verdict is None and graph.entity(eid).node_kind == NODE_CONJECTURE:
            queue.append(rules.make_action(rules.RULE_PROVE, (eid,)))
    return EpisodeTrace(rc.seed, total, tuple(matched), tuple(steps))


@dataclass(frozen=True)
class MeasureFitness:
    fitness: float  # mean episode reward
    rewards: tuple
    traces: tuple


def _rollout_payloads(measure, library, rc, start, pc):
    pc = pc or PolicyConfig()
    return [
        (start, measure, library, replace(rc, seed=rc.seed + i), pc)
        for i in range(rc.eval_rollouts)
    ]


def _run_rollout(payload) -> EpisodeTrace:
    start, measure, library, rc, pc = payload
    graph = load_start_config(start)
    return run_episode(graph, measure, library, rc, pc)


def evaluate_measure(
    measure, library, rc: RolloutConfig, start: str, pc=None, workers: int = 1, pool=None
) -> MeasureFitness:
    """Fitness = mean total reward over eval_rollouts independent
    seeded episodes; traces are retained for reporting.

    Callers issuing many evaluations should pass a long-lived process
    pool; otherwise one is created per call when workers > 1."""
    payloads = _rollout_payloads(measure, library, rc, start, pc)
    if pool is not None:
        traces = list(pool.map(_run_rollout, payloads))
    elif workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(payloads))) as own:
            traces = list(own.map(_run_rollout, payloads))
    else:
        traces = [_run_rollout(p) for p in payloads]
    rewards = tuple(tr.total_reward for tr in traces)
    return MeasureFitness(sum(rewards) / len(rewards), rewards, tuple(traces))

"""Island-model evolutionary search over scoring programs.

Each island holds a population of scored programs plus its own
abstraction library.  One generation samples an island, asks a
sampler backend for candidate programs conditioned on strong parents,
evaluates them by episodic rollouts, and inserts survivors.  Every
few generations an abstraction pass mines reusable fragments from the
best programs and appends them to the island's library; libraries
only ever grow, and stored fitness is never recomputed.

Two interchangeable backends: RemoteChatSampler speaks an
OpenAI-style chat API over HTTP, MutationSampler applies seeded tree
edits and runs fully offline.  Both consume the same rendered
context, so swapping them changes no bookkeeping.
"""

from __future__ import annotations

import os
import random
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import httpx

from . import env, scoring
from .errors import ScoreSyntaxError, TheoryForgeError, UnknownConfig

POPULATION_CAP = 32  # per island, worst evicted first


@dataclass(frozen=True)
class EvoConfig:
    islands: int = 4
    generations: int = 64
    abstraction_frequency: int = 8  # 0 disables the abstraction phase
    parent_sample: int = 2
    programs_per_iteration: int = 2
    abstractions_per_island: int = 2
    eval_rollouts: int = 16
    population_cap: int = POPULATION_CAP
    seed: int = 0

    def __post_init__(self):
        if self.islands < 1 or self.generations < 0:
            raise UnknownConfig("need at least one island and nonnegative generations")
        if min(self.parent_sample, self.programs_per_iteration, self.population_cap) < 1:
            raise UnknownConfig("sample sizes must be at least 1")
        if self.abstraction_frequency < 0 or self.abstractions_per_island < 0:
            raise UnknownConfig("abstraction settings must be nonnegative")


@dataclass
class Island:
    id: int
    population: list = field(default_factory=list)  # (program, fitness), best first
    library: scoring.AbstractionLibrary = field(default_factory=scoring.AbstractionLibrary)
    births: int = 0

    def best(self):
        return self.population[0]


def _insert(island: Island, program, fitness: float, cap: int):
    island.population.append((program, fitness))
    island.population.sort(key=lambda pf: -pf[1])  # stable: ties keep age order
    del island.population[cap:]


# ---------------------------------------------------------------------------
# prompt rendering

PRIMITIVE_DOCS = {
    "get_ancestors": "list of entity ids this entity was built from, transitively",
    "get_descendants": "list of entity ids built on top of this entity, transitively",
    "get_construction_depth": "length of the longest build chain ending at this entity",
    "get_in_degree": "number of incoming build edges",
    "get_out_degree": "number of entities using this entity directly",
    "get_construction_history_rule_names": "list of rule names in this entity's build history",
    "get_entity_step_age": "steps elapsed since this entity was created",
    "get_num_concepts": "number of definitions in the graph (takes no entity)",
    "get_num_conjectures": "number of open conjectures in the graph (takes no entity)",
    "get_entity_node_type": "node kind as text: 'Concept', 'Conjecture', or 'Theorem'",
    "get_concept_category": "'Constant', 'Function', or 'Predicate'",
    "get_input_arity": "number of arguments the entity takes",
    "get_num_component_types": "distinct value-column shapes over the cached examples",
    "get_examples": "list of cached instances where the entity holds",
    "get_nonexamples": "list of cached instances where the entity fails",
    "get_num_construction_inputs": "number of inputs to the entity's own build step",
    "is_proven": "1.0 when the entity is an established theorem, else 0.0",
}

EVOLUTION_PROMPT = """You are an expert programming assistant specializing in evolving code based on performance feedback.

You are participating in an evolutionary function discovery process (FunSearch) to find a high-performing scoring expression called `measure`. This expression evaluates the 'interestingness' of mathematical entities within a knowledge graph.

The user prompt contains several **example implementations** of this measure (named `measure_v0`, `measure_v1`, etc.), showcasing different approaches that have shown some success. The prompt ends with the name of the **new measure** you need to generate: `measure_vN`.

Your specific task is to **generate a new, potentially improved version** of the measure, named `measure_vN`. You should **analyze all the example measures** provided in the user prompt (`_v0` to `_v(N-1)`) to understand different successful strategies and potentially combine or adapt their ideas.

The expression is evaluated for an entity `e` within a graph. You can use the following functions to get information about the entity (`e`) or the graph itself, the description explains what it returns: {primitives}

Optionally, you can also use the following abstractions: {abstractions}

You also have access to arithmetic (`+`, `-`, `*`, and `/` which yields 0 on a zero divisor), `min`, `max`, `log1p`, `exp`, `sqrt`, `clamp(x, lo, hi)`, comparisons, and conditionals written `a if cond else b`. List results may only be used through `count(...)` and `diff_count(a, b)`; text results only under `==` or `!=`. Classic baseline measures are available as `hr_novelty(e)`, `hr_parsimony(e)`, `hr_productivity(e)`, `hr_applicability(e)`, `hr_comprehensibility(e)`. Do not use notation like `graph.METHOD_NAME(args)`, only `METHOD_NAME(args)` will work.

The goal is to create a measure that receives a higher score when evaluated, indicating it better captures mathematical interestingness.

**Output Constraints:**
- You **MUST** respond with **only** the complete, syntactically correct expression for the new measure (`measure_vN`).
- Start with a single `#` comment line serving as a concise docstring, then the expression on the following lines.
- **DO NOT** include any introductory text, explanations, or usage examples in your response.
- Enclose the entire measure within a single markdown code block like this:
- If you use any of the primitives or abstractions, make sure you use them correctly by supplying the proper arguments.
- Try not to rely on the abstractions alone - use them in a compositional way, where you also implement some of the logic yourself (passing interesting arguments to the abstractions counts).
- Try not to copy the examples exactly, but rather use them as inspiration to create a new, better, measure that *can* be similar.
- You do not have to use all primitives, and you do not have to make extremely complex expressions if you don't think it necessary.
- Watch out for potential division by zero errors.

```
# A new measure version inspired by provided examples.
clamp(log1p(get_construction_depth(e)) / (1 + get_input_arity(e)), 0, 1)
```"""

ABSTRACTION_PROMPT = """You are an expert programmer specializing in code refactoring and identifying useful, general-purpose abstractions within existing code.
You will be given a set of scoring expressions, each with a performance score, and a list of already-identified abstractions. Your task is to analyze the expressions and extract new, reusable subroutines.

An "abstraction" is a self-contained function that performs a useful calculation. It should be general enough to be used in various contexts. For example, an abstraction can generalize a pattern by turning constants into parameters.

You must only return the code blocks for the new abstractions you create. Do not include any other text, explanation, or conversation.

Your goal is to identify and implement useful, reusable subroutines (abstractions) from the provided program examples.

## 1. Existing Abstractions
Review the following abstractions that have already been created. **Avoid creating new abstractions that are functionally identical to these.**
{current_abstractions}

## 2. Program Examples to Analyze
Here are the programs to analyze, along with their performance scores. You should **prioritize creating abstractions from programs with higher scores**, as they are more likely to contain useful logic.
{program_examples}

## 3. Your Task & Guiding Principles
Carefully analyze the program examples and identify common or useful patterns that can be generalized into new abstractions.
- An abstraction should be a **small, reusable function** that captures a specific calculation or logical step.
- Good abstractions are **general**. Instead of hard-coding values, define them as function arguments. For example, if you see `(x - y) * 0.5` in a program, a good abstraction would be `scaled_difference(a, b, factor=0.5) = (a - b) * factor`, not `specific_difference(a, b) = (a - b) * 0.5`.
- You can create **improved or generalized versions** of existing abstractions. If you do, append `_v2`, `_v3`, etc., to the original name to ensure it is unique.
- You may also **compose existing abstractions** to create a new, more powerful one.

## 4. Required Output Format
Provide your response as a list of definitions, one fenced code block each. A definition starts with a single `#` docstring comment line, then a line of the form `name(arg1=1.0, arg2=0.5) = expression`. Use descriptive argument names; every argument needs a numeric default.

```
# A concise description of what this abstraction calculates.
scaled_difference(a=0, b=0, factor=0.5) = (a - b) * factor
```"""


def describe_primitives() -> str:
    return "\n" + "\n".join(
        f"- `{name}`: {PRIMITIVE_DOCS[name]}" for name in sorted(PRIMITIVE_DOCS)
    )


def format_abstraction(adef: scoring.AbstractionDef) -> str:
    params = ", ".join(
        f"{n}={scoring.print_score_expr(scoring.Num(d))}" for n, d in adef.params
    )
    return f"{adef.name}({params}) = {scoring.print_score_expr(adef.body)}"


def render_library(library) -> str:
    if library is None or not len(library):
        return "(none yet)"
    return "\n" + "\n".join(f"- `{format_abstraction(d)}`" for d in library)


@dataclass(frozen=True)
class PromptContext:
    kind: str  # "evolve" | "abstract"
    system: str
    user: str
    parents: tuple  # ((program text, fitness), ...) best last for evolve
    library: object
    count: int


def render_evolution_context(parents, library, count: int) -> PromptContext:
    system = EVOLUTION_PROMPT.format(
        primitives=describe_primitives(), abstractions=render_library(library)
    )
    chunks = []
    for i, (text, fit) in enumerate(parents):
        chunks.append(f"`measure_v{i}` (fitness {fit:.4f}):\n```\n{text}\n```")
    chunks.append(f"Now write `measure_v{len(parents)}`.")
    return PromptContext(
        "evolve", system, "\n\n".join(chunks), tuple(parents), library, count
    )


def render_abstraction_context(programs, library, count: int) -> PromptContext:
    examples = []
    for i, (text, fit) in enumerate(programs):
        examples.append(f"Program {i} (score {fit:.4f}):\n```\n{text}\n```")
    system = ABSTRACTION_PROMPT.format(
        current_abstractions=render_library(library),
        program_examples="\n\n".join(examples) or "(none)",
    )
    user = f"Extract up to {count} new abstractions now."
    return PromptContext("abstract", system, user, tuple(programs), library, count)


# ---------------------------------------------------------------------------
# abstraction surface form

_ABS_HEADER = re.compile(
    r"^\s*([A-Za-z_]\w*)\s*\(([^()]*)\)\s*(?:=\s*(\S.*))?$", re.DOTALL
)


def _reserved_names():
    names = set(scoring.PRIMITIVES) | set(scoring.BUILTINS) | set(scoring.MEASURE_CALLS)
    names |= set(scoring.PRIMITIVE_ALIASES) | {scoring.COMBINATOR}
    names |= {"e", "entity", "entity_id", "m", "g", "graph", "if", "else"}
    return names


_RESERVED = _reserved_names()


def parse_abstraction_text(text: str, library=None) -> scoring.AbstractionDef:
    """Parse `# doc` + `name(a=1, b=0.5) = body` (body may continue on
    following lines) into a definition; the body validates against the
    library it will be added to."""
    lines = text.splitlines()
    while lines and lines[0].lstrip().startswith("#"):
        lines.pop(0)
    src = "\n".join(lines).strip()
    m = _ABS_HEADER.match(src)
    if not m:
        raise ScoreSyntaxError("abstraction needs a name(args) = body header")
    name, arg_src, body_src = m.group(1), m.group(2), m.group(3) or ""
    if not body_src:
        raise ScoreSyntaxError(f"abstraction {name!r} has no body")
    if name in _RESERVED:
        raise ScoreSyntaxError(f"abstraction name {name!r} collides with a builtin")
    params = []
    for piece in filter(None, (p.strip() for p in arg_src.split(","))):
        pname, _, default = piece.partition("=")
        pname = pname.strip()
        if not re.fullmatch(r"[A-Za-z_]\w*", pname) or pname in _RESERVED:
            raise ScoreSyntaxError(f"bad parameter name {pname!r}")
        try:
            value = float(default) if default.strip() else 1.0
        except ValueError:
            raise ScoreSyntaxError(f"parameter {pname!r} needs a numeric default")
        params.append((pname, value))
    body = scoring.parse_score_expr(body_src, library, params=tuple(p for p, _ in params))
    return scoring.AbstractionDef(name, tuple(params), body)


# ---------------------------------------------------------------------------
# expression tree edits shared by the mutation sampler

_LEAF_TYPES = (scoring.Num, scoring.Text, scoring.Param, scoring.Prim, scoring.Measure)


def _children(x):
    if isinstance(x, _LEAF_TYPES):
        return ()
    if isinstance(x, (scoring.Call, scoring.AbsCall)):
        return x.args
    if isinstance(x, (scoring.Arith, scoring.Cmp)):
        return (x.left, x.right)
    return (x.test, x.then, x.other)  # Cond


def _rebuild(x, kids):
    if isinstance(x, scoring.Call):
        return scoring.Call(x.fn, tuple(kids))
    if isinstance(x, scoring.AbsCall):
        return scoring.AbsCall(x.name, tuple(kids))
    if isinstance(x, scoring.Arith):
        return scoring.Arith(x.op, kids[0], kids[1])
    if isinstance(x, scoring.Cmp):
        return scoring.Cmp(x.op, kids[0], kids[1])
    if isinstance(x, scoring.Cond):
        return scoring.Cond(kids[0], kids[1], kids[2])
    return x


def _paths(x, path=()):
    yield path, x
    for i, child in enumerate(_children(x)):
        yield from _paths(child, path + (i,))


def _replace(x, path, new):
    if not path:
        return new
    kids = list(_children(x))
    kids[path[0]] = _replace(kids[path[0]], path[1:], new)
    return _rebuild(x, kids)


def _expr_kind(x):
    if isinstance(x, scoring.Text):
        return scoring.TEXT
    if isinstance(x, scoring.Prim):
        return scoring.PRIMITIVES[x.name][1]
    return scoring.NUM


_NUM_PRIMS = tuple(sorted(n for n, (_, k, _t) in scoring.PRIMITIVES.items() if k == scoring.NUM))
_LIST_PRIMS = tuple(sorted(n for n, (_, k, _t) in scoring.PRIMITIVES.items() if k == scoring.LIST))
_LITERALS = (0.0, 0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0)


def _random_leaf(rng):
    roll = rng.random()
    if roll < 0.3:
        return scoring.Num(rng.choice(_LITERALS))
    if roll < 0.8:
        return scoring.Prim(rng.choice(_NUM_PRIMS))
    return scoring.Call("count", (scoring.Prim(rng.choice(_LIST_PRIMS)),))


def _random_expr(rng, depth):
    if depth <= 1 or rng.random() < 0.3:
        return _random_leaf(rng)
    roll = rng.random()
    if roll < 0.5:
        op = rng.choice("+-*/")
        return scoring.Arith(op, _random_expr(rng, depth - 1), _random_expr(rng, depth - 1))
    if roll < 0.65:
        return scoring.Call(rng.choice(("log1p", "sqrt")), (_random_expr(rng, depth - 1),))
    if roll < 0.8:
        fn = rng.choice(("min", "max"))
        return scoring.Call(fn, (_random_expr(rng, depth - 1), _random_expr(rng, depth - 1)))
    if roll < 0.9:
        return scoring.Call(
            "clamp", (_random_expr(rng, depth - 1), scoring.Num(0.0), scoring.Num(1.0))
        )
    test = scoring.Cmp(rng.choice(("<", ">", "<=", ">=")), _random_leaf(rng), _random_leaf(rng))
    return scoring.Cond(test, _random_expr(rng, depth - 1), _random_expr(rng, depth - 1))


def _parameterize(node):
    """Turn each distinct numeric literal in the subtree into a
    defaulted parameter; returns (params, generalized body)."""
    values = []
    for _, n in _paths(node):
        if isinstance(n, scoring.Num) and n.value not in values:
            values.append(n.value)
    renames = {v: f"p{i}" for i, v in enumerate(values)}

    def sub(x):
        if isinstance(x, scoring.Num):
            return scoring.Param(renames[x.value])
        kids = [sub(c) for c in _children(x)]
        return _rebuild(x, kids) if kids else x

    params = tuple((renames[v], float(v)) for v in values)
    return params, sub(node)


# ---------------------------------------------------------------------------
# sampler backends

def extract_fenced_blocks(text: str):
    return [m.strip() for m in re.findall(r"```[^\n`]*\n(.*?)```", text, re.DOTALL)]


class MutationSampler:
    """Offline stand-in for the chat sampler: seeded tree edits.

    Program proposals mutate a random parent with one of four edits:
    replace a numeric subtree with a fresh one from the typed grammar,
    perturb a constant, swap a primitive for one of the same result
    kind, or route a subtree through a library abstraction.
    Abstraction proposals lift a repeated non-leaf subtree out of the
    parents and expose its constants as parameters.
    """

    def __init__(self, seed: int = 0):
        self._rng = random.Random(seed)
        self._extracted = 0

    # -- programs ------------------------------------------------------
    def propose_programs(self, context: PromptContext):
        rng = self._rng
        parents = []
        for text, _ in context.parents:
            try:
                parents.append(scoring.parse_score_program(text, context.library))
            except TheoryForgeError:
                continue
        if not parents:
            return []
        out = []
        for _ in range(context.count):
            parent = parents[rng.randrange(len(parents))]
            child = self._mutate(parent.body, context.library, rng)
            out.append("# seeded local edit of a parent measure\n" + scoring.print_score_expr(child))
        return out

    def _mutate(self, body, library, rng):
        before = scoring.print_score_expr(body)
        for _ in range(12):
            candidate = self._edit(body, library, rng)
            try:
                scoring.validate_expr(candidate, library)
            except TheoryForgeError:
                continue
            if scoring.print_score_expr(candidate) != before:
                return candidate
        # every edit collapsed back onto the parent; force a visible one
        return scoring.Call("clamp", (scoring.Arith("+", body, scoring.Num(0.1)), scoring.Num(0.0), scoring.Num(1.0)))

    def _edit(self, body, library, rng):
        paths = list(_paths(body))
        nums = [(p, n) for p, n in paths if _expr_kind(n) == scoring.NUM]
        consts = [(p, n) for p, n in paths if isinstance(n, scoring.Num)]
        prims = [(p, n) for p, n in paths if isinstance(n, scoring.Prim)]
        ops = ["replace"]
        if consts:
            ops.append("perturb")
        if prims:
            ops.append("swap")
        if library is not None and len(library) and nums:
            ops.append("abstract_call")
        op = rng.choice(ops)
        if op == "perturb":
            path, node = consts[rng.randrange(len(consts))]
            if rng.random() < 0.5:
                value = node.value * rng.choice((0.5, 2.0))
            else:
                value = node.value + rng.choice((-1.0, -0.5, -0.1, 0.1, 0.5, 1.0))
            return _replace(body, path, scoring.Num(round(value, 6)))
        if op == "swap":
            path, node = prims[rng.randrange(len(prims))]
            kind = scoring.PRIMITIVES[node.name][1]
            pool = [n for n in (_NUM_PRIMS if kind == scoring.NUM else _LIST_PRIMS) if n != node.name]
            if not pool:  # text primitives have no same-kind peer
                return body
            return _replace(body, path, scoring.Prim(rng.choice(pool)))
        if op == "abstract_call":
            path, node = nums[rng.randrange(len(nums))]
            adef = library.defs[rng.randrange(len(library.defs))]
            if adef.params:
                args = (node,) + tuple(scoring.Num(d) for _, d in adef.params[1:])
            else:
                args = ()
            return _replace(body, path, scoring.AbsCall(adef.name, args))
        path, _ = nums[rng.randrange(len(nums))] if nums else ((), body)
        return _replace(body, path, _random_expr(rng, 3))

    # -- abstractions ---------------------------------------------------
    def propose_abstractions(self, context: PromptContext):
        rng = self._rng
        seen: dict[str, list] = {}
        for text, _ in context.parents:
            try:
                prog = scoring.parse_score_program(text, context.library)
            except TheoryForgeError:
                continue
            for _, node in _paths(prog.body):
                if _expr_kind(node) != scoring.NUM or not _children(node):
                    continue
                entry = seen.setdefault(scoring.print_score_expr(node), [0, node])
                entry[0] += 1
        repeated = sorted(k for k, (n, _) in seen.items() if n >= 2)
        out = []
        while repeated and len(out) < context.count:
            printed = repeated.pop(rng.randrange(len(repeated)))
            params, generalized = _parameterize(seen[printed][1])
            if not params:  # literal-free fragment: expose a neutral scale
                params = (("weight", 1.0),)
                generalized = scoring.Arith("*", scoring.Param("weight"), seen[printed][1])
            name = f"extracted_{self._extracted}"
            self._extracted += 1
            header = ", ".join(
                f"{p}={scoring.print_score_expr(scoring.Num(d))}" for p, d in params
            )
            out.append(
                "# repeated scoring pattern with its constants exposed\n"
                f"{name}({header}) = {scoring.print_score_expr(generalized)}"
            )
        return out


class RemoteChatSampler:
    """OpenAI-compatible chat backend.

    Credentials and endpoint come from THEORYFORGE_LLM_BASE_URL,
    THEORYFORGE_LLM_API_KEY, and THEORYFORGE_LLM_MODEL unless given
    explicitly.  Every failure mode (HTTP error, timeout, malformed
    payload) degrades to an empty proposal list; a transport can be
    injected for offline tests.
    """

    def __init__(self, base_url=None, api_key=None, model=None, timeout=60.0, transport=None):
        self.base_url = base_url or os.environ.get("THEORYFORGE_LLM_BASE_URL", "https://api.openai.com/v1")
        self.api_key = api_key or os.environ.get("THEORYFORGE_LLM_API_KEY", "")
        self.model = model or os.environ.get("THEORYFORGE_LLM_MODEL", "gpt-4o-mini")
        self._client = httpx.Client(
            base_url=self.base_url, timeout=timeout, transport=transport
        )

    def _complete(self, context: PromptContext):
        payload = {
            "model": self.model,
            "temperature": 1.0,
            "messages": [
                {"role": "system", "content": context.system},
                {"role": "user", "content": context.user},
            ],
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = self._client.post("/chat/completions", json=payload, headers=headers)
            response.raise_for_status()
            text = response.json()["choices"][0]["message"]["content"]
        except Exception:
            return []
        if not isinstance(text, str):
            return []
        blocks = extract_fenced_blocks(text)
        # a bare reply with no fences may still be a single proposal
        return blocks or ([text.strip()] if text.strip() else [])

    def propose_programs(self, context: PromptContext):
        return self._complete(context)[: context.count]

    def propose_abstractions(self, context: PromptContext):
        return self._complete(context)


# ---------------------------------------------------------------------------
# the generation loop

def evolution_step(island: Island, sampler, config: EvoConfig, rng=None):
    """Ask the sampler for candidates conditioned on fitness-weighted
    parents; unparseable or ill-typed replies are dropped."""
    rng = rng if rng is not None else random.Random(config.seed)
    population = island.population
    parents = env.sample_by_score(
        population, [fit for _, fit in population], rng, config.parent_sample
    )
    parents = sorted(parents, key=lambda pf: pf[1])  # strongest last
    rendered = [(scoring.print_score_program(p), f) for p, f in parents]
    context = render_evolution_context(
        rendered, island.library, config.programs_per_iteration
    )
    candidates = []
    for text in sampler.propose_programs(context)[: config.programs_per_iteration]:
        name = f"island{island.id}_gen{island.births}"
        try:
            program = scoring.parse_score_program(text, island.library, name=name)
        except TheoryForgeError:
            continue
        island.births += 1
        candidates.append(program)
    return candidates


def abstraction_step(island: Island, sampler, config: EvoConfig, rng=None):
    """Mine the island's best programs for reusable fragments; accepted
    definitions (valid, new under normalized dedup) extend the library."""
    top = island.population[: config.abstractions_per_island]
    rendered = [(scoring.print_score_program(p), f) for p, f in top]
    context = render_abstraction_context(
        rendered, island.library, config.abstractions_per_island
    )
    accepted = []
    for text in sampler.propose_abstractions(context):
        try:
            definition = parse_abstraction_text(text, island.library)
        except TheoryForgeError:
            continue
        if island.library.add(definition):
            accepted.append(definition)
        if len(accepted) >= config.abstractions_per_island:
            break
    return accepted


@dataclass(frozen=True)
class SearchReport:
    best_program: scoring.ScoreProgram
    best_fitness: float
    seed_fitness: float
    curve: tuple  # best fitness across islands after each generation
    islands: tuple


def run_evoabstract(
    config: EvoConfig,
    rc: env.RolloutConfig,
    start: str,
    sampler=None,
    pc=None,
    seed_program=None,
    workers: int = 1,
    abstraction: bool = True,
) -> SearchReport:
    """Full search loop.  Evaluation seeds are fixed across the run, so
    fitness is a pure function of (program, library) and the best-fitness
    curve never decreases; the best entry can never be evicted."""
    sampler = sampler or MutationSampler(config.seed)
    pc = pc or env.PolicyConfig()
    rc = replace(rc, eval_rollouts=config.eval_rollouts)
    seed_program = seed_program or scoring.equal_weight_program()
    rng = random.Random(config.seed)
    islands = tuple(Island(i) for i in range(config.islands))
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        seed_fitness = env.evaluate_measure(
            seed_program, islands[0].library, rc, start, pc, pool=pool
        ).fitness
        for island in islands:
            island.population.append((seed_program, seed_fitness))
        curve = []
        for gen in range(config.generations):
            island = islands[rng.randrange(config.islands)]
            for program in evolution_step(island, sampler, config, rng):
                fitness = env.evaluate_measure(
                    program, island.library, rc, start, pc, pool=pool
                ).fitness
                _insert(island, program, fitness, config.population_cap)
            curve.append(max(isl.best()[1] for isl in islands))
            run_abstraction = (
                abstraction
                and config.abstraction_frequency
                and (gen + 1) % config.abstraction_frequency == 0
            )
            if run_abstraction:
                for isl in islands:
                    abstraction_step(isl, sampler, config, rng)
    finally:
        if pool is not None:
            pool.shutdown()
    best_island = max(islands, key=lambda isl: isl.best()[1])
    program, fitness = best_island.best()
    return SearchReport(program, fitness, seed_fitness, tuple(curve), islands)


def run_funsearch(
    config: EvoConfig,
    rc: env.RolloutConfig,
    start: str,
    sampler=None,
    pc=None,
    seed_program=None,
    workers: int = 1,
) -> SearchReport:
    """Baseline: the identical loop with the abstraction phase disabled."""
    return run_evoabstract(
        config, rc, start, sampler, pc, seed_program, workers, abstraction=False
    )

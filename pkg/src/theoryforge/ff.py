"""The 27-element field F_3[x]/(x^3 + 2x + 1).

Elements are indices 0..26 encoding coefficient triples a0 + a1*x + a2*x^2
as a0 + 3*a1 + 9*a2. The addition and multiplication tables are generated
from the quotient construction and exhaustively validated at import; every
concrete field value used anywhere in the package is looked up from these
tables rather than written down by hand.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NonFieldConstruct, TooManyVariables
from .interp import register_builtin_func, register_builtin_pred

P = 3
# x^3 + 2x + 1: coefficients of the reduction x^3 = -(1 + 2x), i.e. low
# coefficients of the modulus, constant term first.
MODULUS_LOW = (1, 2, 0)
SIZE = P**3


def _to_triple(e):
    return (e % 3, (e // 3) % 3, (e // 9) % 3)


def _from_triple(t):
    return t[0] + 3 * t[1] + 9 * t[2]


def _poly_add(a, b):
    return tuple((x + y) % P for x, y in zip(a, b))


def _poly_mul(a, b):
    # schoolbook product then reduce x^3 -> -(MODULUS_LOW)
    prod = [0] * 5
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % P
    for deg in (4, 3):
        c = prod[deg]
        if c:
            prod[deg] = 0
            for k, m in enumerate(MODULUS_LOW):
                prod[deg - 3 + k] = (prod[deg - 3 + k] - c * m) % P
    return tuple(prod[:3])


def _build_tables():
    add = [[0] * SIZE for _ in range(SIZE)]
    mul = [[0] * SIZE for _ in range(SIZE)]
    triples = [_to_triple(e) for e in range(SIZE)]
    for i in range(SIZE):
        for j in range(SIZE):
            add[i][j] = _from_triple(_poly_add(triples[i], triples[j]))
            mul[i][j] = _from_triple(_poly_mul(triples[i], triples[j]))
    return add, mul


@dataclass
class FiniteFieldSpec:
    p: int
    degree: int
    size: int
    add_table: list
    mul_table: list
    generator: int  # index of x, a primitive element

    def add(self, a, b):
        return self.add_table[a][b]

    def mul(self, a, b):
        return self.mul_table[a][b]

    def neg(self, a):
        for b in range(self.size):
            if self.add_table[a][b] == 0:
                return b
        raise AssertionError("no additive inverse")

    def pow(self, a, n):
        acc = 1
        for _ in range(n):
            acc = self.mul_table[acc][a]
        return acc


def validate_tables(spec: FiniteFieldSpec):
    """Exhaustive field-axiom check; raises AssertionError on any failure."""
    n = spec.size
    add, mul = spec.add_table, spec.mul_table
    rng = range(n)
    for a in rng:
        assert add[a][0] == a and add[0][a] == a
        assert mul[a][1] == a and mul[1][a] == a
        assert mul[a][0] == 0 and mul[0][a] == 0
        for b in rng:
            assert add[a][b] == add[b][a]
            assert mul[a][b] == mul[b][a]
    for a in rng:
        assert any(add[a][b] == 0 for b in rng)  # additive inverse
        if a != 0:
            assert any(mul[a][b] == 1 for b in rng)  # multiplicative inverse
    for a in rng:
        for b in rng:
            for c in rng:
                assert add[add[a][b]][c] == add[a][add[b][c]]
                assert mul[mul[a][b]][c] == mul[a][mul[b][c]]
                assert mul[a][add[b][c]] == add[mul[a][b]][mul[a][c]]
    # characteristic 3
    for a in rng:
        assert add[add[a][a]][a] == 0
    # the generator is primitive: order exactly size - 1
    seen = set()
    acc = 1
    for _ in range(n - 1):
        acc = mul[acc][spec.generator]
        seen.add(acc)
    assert len(seen) == n - 1 and acc == 1


_ADD, _MUL = _build_tables()
FF27 = FiniteFieldSpec(p=P, degree=3, size=SIZE, add_table=_ADD, mul_table=_MUL, generator=3)

_LIGHT_VALIDATED = False


def _light_validate():
    # Commutativity/identity/inverse checks at import; the cubic-cost
    # associativity sweep runs in ff_selftest() and the test suite.
    global _LIGHT_VALIDATED
    if _LIGHT_VALIDATED:
        return
    n = FF27.size
    add, mul = FF27.add_table, FF27.mul_table
    for a in range(n):
        assert add[a][0] == a and mul[a][1] == a and mul[a][0] == 0
        assert any(add[a][b] == 0 for b in range(n))
        if a:
            assert any(mul[a][b] == 1 for b in range(n))
        for b in range(n):
            assert add[a][b] == add[b][a] and mul[a][b] == mul[b][a]
    _LIGHT_VALIDATED = True


_light_validate()


def ff_selftest():
    """Full exhaustive validation (associativity and distributivity included)."""
    validate_tables(FF27)
    return True


# builtin interpretations for field seeds


def ff_add_fn(args):
    return FF27.add_table[args[0]][args[1]]


def ff_mul_fn(args):
    return FF27.mul_table[args[0]][args[1]]


def ff_equals_fn(args):
    return args[0] == args[1]


register_builtin_func("ff_add", ff_add_fn)
register_builtin_func("ff_mul", ff_mul_fn)
register_builtin_pred("ff_equals", ff_equals_fn)


def ff_eval(program, args, spec: FiniteFieldSpec = FF27):
    """Evaluate a DSL program over the field (literals are element indices)."""
    from . import dsl

    ops = dsl.EvalOps(
        add=spec.add,
        mul=spec.mul,
        values=tuple(range(spec.size)),
        exhaustive=True,
    )
    return dsl.evaluate_program(program, tuple(args), ops)


MAX_ENUM_VARS = 3  # exhaustive proving caps at 27^3 assignments


def ff_prove(graph, entity_id, spec: FiniteFieldSpec = FF27, max_vars: int = MAX_ENUM_VARS):
    """Decide a closed statement over the field by exhaustive enumeration.

    Returns a ProofRecord: Proven when no assignment violates the matrix,
    Disproven with the first (lexicographically least) violating assignment
    as witness.
    """
    from .domain import DOMAIN_FF27, ProofRecord
    from .interp import CLOSED_STATEMENTS, TriBool

    if graph.domain_tag != DOMAIN_FF27:
        raise NonFieldConstruct("ff_prove requires a field-domain graph")
    e = graph.entity(entity_id)
    stmt = e.interpretation
    if not isinstance(stmt, CLOSED_STATEMENTS):
        raise NonFieldConstruct(f"entity {entity_id!r} is not a closed statement")
    if stmt.arity > max_vars:
        raise TooManyVariables(
            f"{stmt.arity} quantified variables exceed the enumeration cap {max_vars}"
        )
    ctx = graph.context(budget=10**9)
    total = spec.size**stmt.arity
    for i in range(total):
        v, rem = [], i
        for _ in range(stmt.arity):
            v.append(rem % spec.size)
            rem //= spec.size
        combo = tuple(reversed(v))
        r = stmt.matrix(combo, ctx)
        if r is TriBool.FALSE:
            witness = {f"n_{j}": val for j, val in enumerate(combo)}
            return ProofRecord("Disproven", witness=witness, detail="exhaustive enumeration")
        if r is TriBool.UNKNOWN:
            return ProofRecord("Unknown", detail="matrix undetermined at " + repr(combo))
    return ProofRecord("Proven", detail=f"exhaustive over {total} assignments")
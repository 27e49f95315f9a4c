"""Linear integer arithmetic core: terms, formulas, Cooper elimination.

Terms are normalized linear combinations over keys; a key is either a
variable name or an opaque subterm (an uninterpreted-function application or
a product of two non-constant terms). Opaque keys participate in linear
reasoning as indivisible units; substitution rebuilds them, so a product
whose factors become constant folds back into the linear part.

Formulas are plain tuples:

    ('true',) ('false',)
    ('and', (f, ...))  ('or', (f, ...))  ('not', f)  ('=>', f, g)
    ('lt', lin)          lin < 0
    ('eq', lin)          lin = 0
    ('dvd', d, lin)      d divides lin
    ('ndvd', d, lin)
    ('exists', v, f)  ('forall', v, f)

Cooper's method eliminates one existential over a negation-normal matrix,
giving a complete decision procedure for closed Presburger sentences.
"""

from __future__ import annotations

from math import gcd

from ..errors import BudgetExceeded

TRUE = ("true",)
FALSE = ("false",)


class NotLinear(Exception):
    """The quantified variable occurs inside an opaque subterm."""


class Budget:
    __slots__ = ("nodes",)

    def __init__(self, nodes):
        self.nodes = nodes

    def tick(self, n=1):
        self.nodes -= n
        if self.nodes < 0:
            raise BudgetExceeded("solver node budget exhausted")


# ---------------------------------------------------------------------------
# linear terms: (items, const) with items a sorted tuple of (key, coeff)


def lin_const(c):
    return ((), c)


def lin_var(v):
    return (((v, 1),), 0)


def _norm(d, const):
    items = tuple(sorted(((k, c) for k, c in d.items() if c != 0), key=_key_order))
    return (items, const)


def _key_order(item):
    k = item[0]
    return (0, k, "") if isinstance(k, str) else (1, k[0], repr(k))


def lin_add(a, b):
    d = dict(a[0])
    for k, c in b[0]:
        d[k] = d.get(k, 0) + c
    return _norm(d, a[1] + b[1])


def lin_neg(a):
    return tuple_scale(a, -1)


def tuple_scale(a, m):
    if m == 0:
        return lin_const(0)
    return (tuple((k, c * m) for k, c in a[0]), a[1] * m)


def lin_sub(a, b):
    return lin_add(a, lin_neg(b))


def lin_mul(a, b):
    av, bv = lin_value(a), lin_value(b)
    if av is not None:
        return tuple_scale(b, av)
    if bv is not None:
        return tuple_scale(a, bv)
    key = ("mul",) + tuple(sorted((a, b), key=repr))
    return (((key, 1),), 0)


def lin_app(fname, args):
    return ((((("app", fname, tuple(args))), 1),), 0)


def lin_value(a):
    return a[1] if not a[0] else None


def lin_coeff(a, var):
    for k, c in a[0]:
        if k == var:
            return c
    return 0


def key_mentions(key, var):
    if isinstance(key, str):
        return key == var
    if key[0] == "mul":
        return lin_mentions(key[1], var) or lin_mentions(key[2], var)
    if key[0] == "app":
        return any(lin_mentions(a, var) for a in key[2])
    return False


def lin_mentions(a, var):
    return any(key_mentions(k, var) for k, _ in a[0])


def lin_subst(a, var, repl):
    """Substitute repl (a lin term) for var, renormalizing opaque keys."""
    out = lin_const(a[1])
    for k, c in a[0]:
        if k == var:
            out = lin_add(out, tuple_scale(repl, c))
        elif isinstance(k, str):
            out = lin_add(out, tuple_scale(lin_var(k), c))
        elif k[0] == "mul":
            t = lin_mul(lin_subst(k[1], var, repl), lin_subst(k[2], var, repl))
            out = lin_add(out, tuple_scale(t, c))
        else:  # app
            t = lin_app(k[1], tuple(lin_subst(x, var, repl) for x in k[2]))
            out = lin_add(out, tuple_scale(t, c))
    return out


def lin_vars(a, acc=None):
    if acc is None:
        acc = set()
    for k, _ in a[0]:
        if isinstance(k, str):
            acc.add(k)
        elif k[0] == "mul":
            lin_vars(k[1], acc)
            lin_vars(k[2], acc)
        else:
            for x in k[2]:
                lin_vars(x, acc)
    return acc


def lin_apps(a, acc=None):
    """Collect opaque application keys, innermost included."""
    if acc is None:
        acc = []
    for k, _ in a[0]:
        if isinstance(k, str):
            continue
        if k[0] == "mul":
            lin_apps(k[1], acc)
            lin_apps(k[2], acc)
        else:
            for x in k[2]:
                lin_apps(x, acc)
            if k not in acc:
                acc.append(k)
    return acc


# ---------------------------------------------------------------------------
# formula helpers


def f_and(items):
    flat = []
    for f in items:
        if f == TRUE:
            continue
        if f == FALSE:
            return FALSE
        if f[0] == "and":
            flat.extend(f[1])
        else:
            flat.append(f)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return ("and", tuple(flat))


def f_or(items):
    flat = []
    for f in items:
        if f == FALSE:
            continue
        if f == TRUE:
            return TRUE
        if f[0] == "or":
            flat.extend(f[1])
        else:
            flat.append(f)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return ("or", tuple(flat))


def f_not(f):
    if f == TRUE:
        return FALSE
    if f == FALSE:
        return TRUE
    if f[0] == "not":
        return f[1]
    return ("not", f)


def formula_subst(f, var, repl, budget=None):
    if budget:
        budget.tick()
    tag = f[0]
    if tag in ("true", "false"):
        return f
    if tag in ("lt", "eq"):
        return (tag, lin_subst(f[1], var, repl))
    if tag in ("dvd", "ndvd"):
        return (tag, f[1], lin_subst(f[2], var, repl))
    if tag in ("and", "or"):
        return (tag, tuple(formula_subst(x, var, repl, budget) for x in f[1]))
    if tag == "not":
        return ("not", formula_subst(f[1], var, repl, budget))
    if tag == "=>":
        return ("=>", formula_subst(f[1], var, repl, budget), formula_subst(f[2], var, repl, budget))
    if tag in ("exists", "forall"):
        if f[1] == var:
            return f
        return (tag, f[1], formula_subst(f[2], var, repl, budget))
    raise AssertionError(tag)


def simplify(f, budget=None):
    """Constant-fold atoms and collapse boolean structure."""
    if budget:
        budget.tick()
    tag = f[0]
    if tag in ("true", "false"):
        return f
    if tag == "lt":
        v = lin_value(f[1])
        if v is not None:
            return TRUE if v < 0 else FALSE
        return f
    if tag == "eq":
        v = lin_value(f[1])
        if v is not None:
            return TRUE if v == 0 else FALSE
        return f
    if tag in ("dvd", "ndvd"):
        d, t = f[1], f[2]
        v = lin_value(t)
        if d == 0:
            base = v == 0 if v is not None else None
            if base is None:
                return ("eq", t) if tag == "dvd" else ("not", ("eq", t))
        if v is not None:
            ok = v % d == 0
            if tag == "ndvd":
                ok = not ok
            return TRUE if ok else FALSE
        if d == 1:
            return TRUE if tag == "dvd" else FALSE
        return f
    if tag == "and":
        return f_and([simplify(x, budget) for x in f[1]])
    if tag == "or":
        return f_or([simplify(x, budget) for x in f[1]])
    if tag == "not":
        return f_not(simplify(f[1], budget))
    if tag == "=>":
        a = simplify(f[1], budget)
        b = simplify(f[2], budget)
        if a == FALSE or b == TRUE:
            return TRUE
        if a == TRUE:
            return b
        if b == FALSE:
            return f_not(a)
        return ("=>", a, b)
    if tag in ("exists", "forall"):
        body = simplify(f[2], budget)
        if body in (TRUE, FALSE):
            return body
        return (tag, f[1], body)
    raise AssertionError(tag)


def nnf(f, budget=None, positive=True):
    """Push negations to atoms; import => ; split equalities into strict
    inequalities so the matrix uses only lt/dvd/ndvd atoms."""
    if budget:
        budget.tick()
    tag = f[0]
    if tag == "true":
        return TRUE if positive else FALSE
    if tag == "false":
        return FALSE if positive else TRUE
    if tag == "lt":
        if positive:
            return f
        # not (t < 0)  <=>  -t - 1 < 0
        return ("lt", lin_add(lin_neg(f[1]), lin_const(-1)))
    if tag == "eq":
        t = f[1]
        below = ("lt", lin_add(t, lin_const(-1)))  # t < 1
        above = ("lt", lin_add(lin_neg(t), lin_const(-1)))  # -t < 1
        if positive:
            return f_and([below, above])
        return f_or([("lt", t), ("lt", lin_neg(t))])
    if tag == "dvd":
        return f if positive else ("ndvd", f[1], f[2])
    if tag == "ndvd":
        return f if positive else ("dvd", f[1], f[2])
    if tag == "not":
        return nnf(f[1], budget, not positive)
    if tag == "and":
        parts = [nnf(x, budget, positive) for x in f[1]]
        return f_and(parts) if positive else f_or(parts)
    if tag == "or":
        parts = [nnf(x, budget, positive) for x in f[1]]
        return f_or(parts) if positive else f_and(parts)
    if tag == "=>":
        if positive:
            return f_or([nnf(f[1], budget, False), nnf(f[2], budget, True)])
        return f_and([nnf(f[1], budget, True), nnf(f[2], budget, False)])
    if tag == "exists":
        kw = "exists" if positive else "forall"
        return (kw, f[1], nnf(f[2], budget, positive))
    if tag == "forall":
        kw = "forall" if positive else "exists"
        return (kw, f[1], nnf(f[2], budget, positive))
    raise AssertionError(tag)


# ---------------------------------------------------------------------------
# Cooper's quantifier elimination


def _lcm(a, b):
    return a * b // gcd(a, b)


def _atoms(f, out):
    tag = f[0]
    if tag in ("lt", "dvd", "ndvd"):
        out.append(f)
    elif tag in ("and", "or"):
        for x in f[1]:
            _atoms(x, out)
    elif tag in ("true", "false"):
        pass
    else:
        raise AssertionError(f"matrix not in NNF: {tag}")


def _map_atoms(f, fn):
    tag = f[0]
    if tag in ("lt", "dvd", "ndvd"):
        return fn(f)
    if tag in ("and", "or"):
        return (tag, tuple(_map_atoms(x, fn) for x in f[1]))
    return f


def cooper_eliminate(var, matrix, budget):
    """Eliminate `exists var` over an NNF quantifier-free matrix."""
    budget.tick()
    atoms = []
    _atoms(matrix, atoms)
    coeffs = []
    for a in atoms:
        t = a[1] if a[0] == "lt" else a[2]
        c = lin_coeff(t, var)
        if c:
            coeffs.append(abs(c))
        if lin_mentions_opaque(t, var):
            raise NotLinear(var)
    if not coeffs:
        return simplify(matrix, budget)
    lam = 1
    for c in coeffs:
        lam = _lcm(lam, c)

    def scale_atom(a):
        kind = a[0]
        t = a[1] if kind == "lt" else a[2]
        c = lin_coeff(t, var)
        if c == 0:
            return a
        m = lam // abs(c)
        t2 = tuple_scale(t, m)
        # replace lam*var with a unit-coefficient fresh view: keep var with
        # coeff sign, remember scaling via the divisibility conjunct below
        items = tuple((k, (1 if cc > 0 else -1) if k == var else cc) for k, cc in t2[0])
        t3 = (items, t2[1])
        if kind == "lt":
            return ("lt", t3)
        return (kind, a[1] * m, t3)

    scaled = _map_atoms(matrix, scale_atom)
    scaled = f_and([scaled, ("dvd", lam, lin_var(var))])

    atoms2 = []
    _atoms(scaled, atoms2)
    delta = 1
    lowers = []
    for a in atoms2:
        if a[0] == "lt":
            c = lin_coeff(a[1], var)
            if c == -1:
                # -var + t < 0  <=>  var > t
                t = lin_add(a[1], lin_var(var))
                lowers.append(t)
        elif a[0] in ("dvd", "ndvd") and lin_coeff(a[2], var):
            delta = _lcm(delta, a[1])

    def minus_inf(a):
        if a[0] == "lt":
            c = lin_coeff(a[1], var)
            if c == 1:
                return TRUE  # var < bound holds at -infinity
            if c == -1:
                return FALSE
        return a

    pieces = []
    budget.tick(delta * (1 + len(lowers)))
    base = _map_atoms(scaled, minus_inf)
    for j in range(1, delta + 1):
        pieces.append(simplify(formula_subst(base, var, lin_const(j)), budget))
    for b in lowers:
        for j in range(1, delta + 1):
            repl = lin_add(b, lin_const(j))
            pieces.append(simplify(formula_subst(scaled, var, repl), budget))
    return simplify(f_or(pieces), budget)


def lin_mentions_opaque(a, var):
    for k, _ in a[0]:
        if not isinstance(k, str) and key_mentions(k, var):
            return True
    return False


def eliminate_quantifiers(f, budget):
    """Eliminate every quantifier; the result is quantifier-free NNF over
    the formula's free variables (raises NotLinear outside the fragment)."""
    budget.tick()
    tag = f[0]
    if tag in ("true", "false", "lt", "dvd", "ndvd"):
        return f
    if tag == "eq":
        return nnf(f, budget)
    if tag in ("and", "or"):
        return simplify((tag, tuple(eliminate_quantifiers(x, budget) for x in f[1])), budget)
    if tag == "not":
        return eliminate_quantifiers(nnf(f, budget), budget)
    if tag == "=>":
        return eliminate_quantifiers(nnf(f, budget), budget)
    if tag == "exists":
        body = eliminate_quantifiers(f[2], budget)
        return cooper_eliminate(f[1], nnf(body, budget), budget)
    if tag == "forall":
        body = eliminate_quantifiers(f[2], budget)
        inner = cooper_eliminate(f[1], nnf(f_not(body), budget), budget)
        return nnf(f_not(inner), budget)
    raise AssertionError(tag)


# ---------------------------------------------------------------------------
# bounded-quantifier expansion (for finite-range goals, incl. nonlinear ones)


def _const_bounds(var, conjuncts):
    """Extract [lo, hi] for var from atoms linear in var with constant rest."""
    lo = hi = None
    for a in conjuncts:
        if a[0] == "lt":
            t = a[1]
            c = lin_coeff(t, var)
            rest = lin_sub(t, tuple_scale(lin_var(var), c))
            r = lin_value(rest)
            if r is None:
                continue
            if c == 1:  # var + r < 0: var <= -r - 1
                hi = -r - 1 if hi is None else min(hi, -r - 1)
            elif c == -1:  # -var + r < 0: var >= r + 1
                lo = r + 1 if lo is None else max(lo, r + 1)
        elif a[0] == "eq":
            t = a[1]
            c = lin_coeff(t, var)
            rest = lin_sub(t, tuple_scale(lin_var(var), c))
            r = lin_value(rest)
            if r is None or c not in (1, -1):
                continue
            v = -r if c == 1 else r
            lo = v if lo is None else max(lo, v)
            hi = v if hi is None else min(hi, v)
    return lo, hi


def _conjunct_list(f):
    if f[0] == "and":
        return list(f[1])
    return [f]


def expand_bounded(f, cap, budget):
    """Replace quantifiers whose range is syntactically finite by explicit
    conjunctions/disjunctions (top-down, so inner bounds may become
    constant after the outer expansion)."""
    budget.tick()
    tag = f[0]
    if tag in ("true", "false", "lt", "eq", "dvd", "ndvd"):
        return f
    if tag in ("and", "or"):
        return (tag, tuple(expand_bounded(x, cap, budget) for x in f[1]))
    if tag == "not":
        return ("not", expand_bounded(f[1], cap, budget))
    if tag == "=>":
        return ("=>", expand_bounded(f[1], cap, budget), expand_bounded(f[2], cap, budget))
    if tag in ("exists", "forall"):
        var, body = f[1], f[2]
        if tag == "exists":
            guards = _conjunct_list(body) if body[0] == "and" else [body]
        elif body[0] == "=>":
            guards = _conjunct_list(body[1])
        else:
            guards = []
        lo, hi = _const_bounds(var, guards)
        if lo is not None and hi is not None and hi - lo + 1 <= cap:
            if hi < lo:
                return TRUE if tag == "forall" else FALSE
            parts = []
            for v in range(lo, hi + 1):
                inst = simplify(formula_subst(body, var, lin_const(v), budget), budget)
                parts.append(expand_bounded(inst, cap, budget))
            return f_and(parts) if tag == "forall" else f_or(parts)
        return (tag, var, expand_bounded(body, cap, budget))
    raise AssertionError(tag)


def formula_free_vars(f, bound=frozenset(), acc=None):
    if acc is None:
        acc = set()
    tag = f[0]
    if tag in ("lt", "eq"):
        acc |= lin_vars(f[1]) - bound
    elif tag in ("dvd", "ndvd"):
        acc |= lin_vars(f[2]) - bound
    elif tag in ("and", "or"):
        for x in f[1]:
            formula_free_vars(x, bound, acc)
    elif tag == "not":
        formula_free_vars(f[1], bound, acc)
    elif tag == "=>":
        formula_free_vars(f[1], bound, acc)
        formula_free_vars(f[2], bound, acc)
    elif tag in ("exists", "forall"):
        formula_free_vars(f[2], bound | {f[1]}, acc)
    return acc


def formula_apps(f, acc=None):
    if acc is None:
        acc = []
    tag = f[0]
    if tag in ("lt", "eq"):
        lin_apps(f[1], acc)
    elif tag in ("dvd", "ndvd"):
        lin_apps(f[2], acc)
    elif tag in ("and", "or"):
        for x in f[1]:
            formula_apps(x, acc)
    elif tag == "not":
        formula_apps(f[1], acc)
    elif tag == "=>":
        formula_apps(f[1], acc)
        formula_apps(f[2], acc)
    elif tag in ("exists", "forall"):
        formula_apps(f[2], acc)
    return acc

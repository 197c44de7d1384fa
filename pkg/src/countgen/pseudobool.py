"""Arithmetic circuits over {-1,0,1}, conditional-expectation rounding,
random search, local search, and the permanent cross-checks.

Objectives over {0,1}^n are carried as circuits whose polynomial is
multilinear (a caller contract, spot-checkable); then the point
evaluation at 1/2 in the free coordinates equals the conditional
expectation under uniform suffixes, which is what greedy bit fixing
needs.  The permanent of a 0/1 matrix doubles as the correctness anchor:
its row-product polynomial exposes the permanent both as a top
coefficient of the square-free image and through a fractional-part
identity at the point 2**-s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations

from .coins import CoinSource
from .exceptions import FormatError, SizeGuard


@dataclass(frozen=True)
class Circuit:
    """Arithmetic circuit: nodes reference earlier nodes only.

    Node kinds: ("in", k) for the k-th variable (0-based), ("const", c)
    with c in {-1,0,1}, ("add", ids) and ("mul", ids); ids may repeat.
    """

    n_vars: int
    nodes: tuple
    out: int

    def __post_init__(self):
        for i, node in enumerate(self.nodes):
            kind = node[0]
            if kind == "in":
                if not 0 <= node[1] < self.n_vars:
                    raise ValueError(f"input index {node[1]} out of range")
            elif kind == "const":
                if node[1] not in (-1, 0, 1):
                    raise ValueError("constants must be -1, 0 or 1")
            elif kind in ("add", "mul"):
                if not node[1]:
                    raise ValueError(f"{kind} node needs arguments")
                if any(not 0 <= j < i for j in node[1]):
                    raise ValueError("nodes may only reference earlier nodes")
            else:
                raise ValueError(f"unknown node kind {kind!r}")
        if not 0 <= self.out < len(self.nodes):
            raise ValueError("output node out of range")

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def depth(self) -> int:
        depths = []
        for node in self.nodes:
            if node[0] in ("add", "mul"):
                depths.append(1 + max(depths[j] for j in node[1]))
            else:
                depths.append(0)
        return depths[self.out]


class CircuitBuilder:
    """Tiny helper for assembling circuits node by node."""

    def __init__(self, n_vars: int):
        self.n_vars = n_vars
        self.nodes = []

    def var(self, k: int) -> int:
        self.nodes.append(("in", k))
        return len(self.nodes) - 1

    def const(self, c: int) -> int:
        self.nodes.append(("const", c))
        return len(self.nodes) - 1

    def add(self, *ids: int) -> int:
        self.nodes.append(("add", tuple(ids)))
        return len(self.nodes) - 1

    def mul(self, *ids: int) -> int:
        self.nodes.append(("mul", tuple(ids)))
        return len(self.nodes) - 1

    def build(self, out: int) -> Circuit:
        return Circuit(self.n_vars, tuple(self.nodes), out)


def eval_circuit(c: Circuit, point) -> Fraction:
    """Exact evaluation at a rational point, in node order."""
    if len(point) != c.n_vars:
        raise ValueError(f"need {c.n_vars} coordinates")
    values = []
    for node in c.nodes:
        kind = node[0]
        if kind == "in":
            values.append(Fraction(point[node[1]]))
        elif kind == "const":
            values.append(Fraction(node[1]))
        elif kind == "add":
            values.append(sum(values[j] for j in node[1]))
        else:
            prod = Fraction(1)
            for j in node[1]:
                prod *= values[j]
            values.append(prod)
    return values[c.out]


def msf_coefficient(c: Circuit, monomial) -> int:
    """Coefficient of a square-free monomial in a square-free circuit.

    ``monomial`` is an iterable of variable indices.  Substituting z for
    the monomial's variables and 0 elsewhere turns every node into a
    univariate polynomial of degree at most |monomial|; the wanted
    coefficient is the top one at the output.  Repeated indices give 0.
    """
    wanted = list(monomial)
    if len(set(wanted)) != len(wanted):
        return 0
    degree = len(wanted)
    chosen = set(wanted)

    def mul_poly(p, q):
        out = [0] * (degree + 1)
        for i, pi in enumerate(p):
            if pi:
                for j, qj in enumerate(q):
                    if qj and i + j <= degree:
                        out[i + j] += pi * qj
        return out

    polys = []
    for node in c.nodes:
        kind = node[0]
        if kind == "in":
            p = [0] * (degree + 1)
            if node[1] in chosen and degree >= 1:
                p[1] = 1
            polys.append(p)
        elif kind == "const":
            p = [0] * (degree + 1)
            p[0] = node[1]
            polys.append(p)
        elif kind == "add":
            p = [0] * (degree + 1)
            for j in node[1]:
                other = polys[j]
                for k in range(degree + 1):
                    p[k] += other[k]
            polys.append(p)
        else:
            p = [0] * (degree + 1)
            p[0] = 1
            for j in node[1]:
                p = mul_poly(p, polys[j])
            polys.append(p)
    return polys[c.out][degree]


# ---------------------------------------------------------------------------
# Permanent of a 0/1 matrix, three ways.


def load_matrix(text: str):
    """Parse: first line n, then n rows of 0/1 entries."""
    lines = [ln.split() for ln in text.splitlines() if ln.split()]
    if not lines:
        raise FormatError("empty matrix file")
    n = int(lines[0][0])
    rows = [tuple(int(tok) for tok in ln) for ln in lines[1 : n + 1]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise FormatError(f"expected {n} rows of {n} entries")
    if any(e not in (0, 1) for r in rows for e in r):
        raise FormatError("entries must be 0 or 1")
    return tuple(rows)


def perm_circuit(a) -> Circuit:
    """Row-product circuit: the product over rows of their variable sums."""
    n = len(a)
    builder = CircuitBuilder(n)
    variables = [builder.var(j) for j in range(n)]
    rows = []
    for i in range(n):
        selected = [variables[j] for j in range(n) if a[i][j]]
        if selected:
            rows.append(builder.add(*selected))
        else:
            rows.append(builder.const(0))
    out = rows[0] if n == 1 else builder.mul(*rows)
    return builder.build(out)


def _msf_expansion(a) -> dict:
    """Square-free image of the row-product polynomial, by expansion.

    Returns {frozenset of variable indices: coefficient}; exponential in
    n, intended for the desk-scale cross-checks only.
    """
    n = len(a)
    terms = {frozenset(): 1}
    for i in range(n):
        nxt: dict = {}
        row = [j for j in range(n) if a[i][j]]
        for mono, coef in terms.items():
            for j in row:
                grown = mono | {j}
                nxt[grown] = nxt.get(grown, 0) + coef
        terms = nxt
    return terms


def msf_perm_circuit(a) -> Circuit:
    """Explicit square-free circuit for the expanded row-product polynomial."""
    n = len(a)
    expansion = _msf_expansion(a)
    builder = CircuitBuilder(n)
    variables = [builder.var(j) for j in range(n)]
    one = builder.const(1)
    if not expansion:  # a zero row wipes out every monomial
        return builder.build(builder.const(0))
    monomials = []
    for mono in sorted(expansion, key=sorted):
        coef = expansion[mono]
        factors = [variables[j] for j in sorted(mono)] or [one]
        node = builder.mul(*factors) if len(factors) > 1 else factors[0]
        for _ in range(coef):
            monomials.append(node)
    out = builder.add(*monomials) if len(monomials) > 1 else monomials[0]
    return builder.build(out)


def permanent(a, method: str = "bruteforce", ceiling: int = 8) -> int:
    """Permanent of a 0/1 matrix.

    ``bruteforce`` sums over permutations; ``coefficient`` reads the full
    monomial of the expanded square-free row-product polynomial through
    the coefficient-extraction routine; ``fraction`` recovers it from the
    fractional part of 2**(s(n-1)) times the square-free polynomial at
    2**-s with s = n*n.
    """
    n = len(a)
    if n > ceiling:
        raise SizeGuard(f"matrix side {n} above ceiling {ceiling}")
    if method == "bruteforce":
        return sum(
            math.prod(a[i][pi[i]] for i in range(n)) for pi in permutations(range(n))
        )
    if method == "coefficient":
        return msf_coefficient(msf_perm_circuit(a), range(n))
    if method == "fraction":
        s = n * n
        point = [Fraction(1, 2**s)] * n
        value = eval_circuit(msf_perm_circuit(a), point)
        scaled = Fraction(2) ** (s * (n - 1)) * value
        fractional = scaled - math.floor(scaled)
        result = fractional * 2**s
        assert result.denominator == 1
        return int(result)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Pseudo-boolean objectives and the optimizers.


@dataclass(frozen=True)
class PbProblem:
    """Objective circuit over {0,1}^n, asserted multilinear by the caller."""

    n: int
    objective: Circuit
    goal: str = "max"

    def __post_init__(self):
        if self.goal not in ("max", "min"):
            raise ValueError("goal must be 'max' or 'min'")
        if self.objective.n_vars != self.n:
            raise ValueError("objective arity mismatch")

    def value(self, assignment) -> Fraction:
        return eval_circuit(self.objective, assignment)

    def better(self, x, y) -> bool:
        return x > y if self.goal == "max" else x < y


def probably_multilinear(c: Circuit, trials: int = 8, seed: int = 0) -> bool:
    """Second-difference probe: multilinear means affine in each variable."""
    src = CoinSource(seed)
    for _ in range(trials):
        point = [Fraction(src.draw(8)) for _ in range(c.n_vars)]
        for k in range(c.n_vars):
            lo = list(point)
            mid = list(point)
            hi = list(point)
            lo[k], mid[k], hi[k] = Fraction(0), Fraction(1), Fraction(2)
            if (
                eval_circuit(c, hi)
                - 2 * eval_circuit(c, mid)
                + eval_circuit(c, lo)
                != 0
            ):
                return False
    return True


def cond_expectation(p: PbProblem, prefix) -> Fraction:
    """Expected objective under uniform suffixes, given the fixed prefix.

    For a multilinear objective this is the point evaluation with the
    free coordinates at 1/2.
    """
    if len(prefix) > p.n:
        raise ValueError("prefix longer than the variable count")
    point = [Fraction(b) for b in prefix]
    point.extend([Fraction(1, 2)] * (p.n - len(prefix)))
    return p.value(point)


def derandomize(p: PbProblem) -> tuple:
    """Greedy bit fixing along conditional expectations.

    The output's objective value is at least (for max; at most for min)
    the unconditioned expectation, by internality.  Ties prefer bit 0.
    """
    prefix = []
    for _ in range(p.n):
        with_zero = cond_expectation(p, prefix + [0])
        with_one = cond_expectation(p, prefix + [1])
        prefix.append(1 if p.better(with_one, with_zero) else 0)
    return tuple(prefix)


def random_search(p: PbProblem, epsilon, delta, src) -> tuple:
    """Best of N uniform assignments, N = ceil(log(1/delta) / (2 eps^2))."""
    epsilon = Fraction(epsilon)
    delta = Fraction(delta)
    if not (0 < delta < 1 and epsilon > 0):
        raise ValueError("need 0 < delta < 1 and epsilon > 0")
    n_draws = max(1, math.ceil(math.log(1 / float(delta)) / (2 * float(epsilon) ** 2)))
    best = None
    best_value = None
    for _ in range(n_draws):
        bits = src.draw(p.n)
        assignment = tuple((bits >> k) & 1 for k in range(p.n))
        value = p.value(assignment)
        if best is None or p.better(value, best_value):
            best, best_value = assignment, value
    return best


def local_search(p: PbProblem, radius: int, start) -> tuple:
    """First-improvement walk over Hamming balls of the given radius.

    Flip sets are scanned by size then lexicographically, so runs are
    reproducible; the result is a local optimum of the radius-bounded
    neighborhood and the objective never decreases along the way.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    current = tuple(start)
    current_value = p.value(current)
    improved = True
    while improved:
        improved = False
        for size in range(1, radius + 1):
            for flips in combinations(range(p.n), size):
                candidate = list(current)
                for k in flips:
                    candidate[k] ^= 1
                candidate = tuple(candidate)
                value = p.value(candidate)
                if p.better(value, current_value):
                    current, current_value = candidate, value
                    improved = True
                    break
            if improved:
                break
    return current


def eg_solve(p: PbProblem, radius: int = 1) -> tuple:
    """Conditional-expectation start, then local search."""
    return local_search(p, radius, derandomize(p))


# ---------------------------------------------------------------------------
# Objective builders and instance loaders.


def max_sat_circuit(n: int, clauses) -> Circuit:
    """Satisfied-clause count as a multilinear circuit.

    Each clause contributes 1 - prod(1 - literal); literals are x for a
    positive occurrence and 1 - x for a negative one.
    """
    builder = CircuitBuilder(n)
    one = builder.const(1)
    minus = builder.const(-1)
    variables = [builder.var(k) for k in range(n)]
    negated = [builder.add(one, builder.mul(minus, v)) for v in variables]
    clause_nodes = []
    for clause in clauses:
        misses = []
        for lit in clause:
            k = abs(lit) - 1
            if not 0 <= k < n:
                raise ValueError(f"literal {lit} out of range")
            misses.append(negated[k] if lit > 0 else variables[k])
        all_miss = builder.mul(*misses) if len(misses) > 1 else misses[0]
        clause_nodes.append(builder.add(one, builder.mul(minus, all_miss)))
    out = builder.add(*clause_nodes) if len(clause_nodes) > 1 else clause_nodes[0]
    return builder.build(out)


def max_cut_circuit(n: int, edges) -> Circuit:
    """Cut size as a multilinear circuit: sum of u + v - 2uv over edges."""
    builder = CircuitBuilder(n)
    minus = builder.const(-1)
    variables = [builder.var(k) for k in range(n)]
    terms = []
    for u, v in edges:
        prod = builder.mul(variables[u], variables[v])
        neg = builder.mul(minus, prod)
        terms.extend([variables[u], variables[v], neg, neg])
    out = builder.add(*terms) if len(terms) > 1 else terms[0]
    return builder.build(out)


def sat_value(clauses, assignment) -> int:
    """Direct satisfied-clause count (oracle for the circuit objective)."""
    total = 0
    for clause in clauses:
        for lit in clause:
            bit = assignment[abs(lit) - 1]
            if (bit == 1) == (lit > 0):
                total += 1
                break
    return total


def cut_value(edges, assignment) -> int:
    return sum(1 for u, v in edges if assignment[u] != assignment[v])


def load_clauses(text: str):
    """Parse the clause format: first line ``n m``, then one clause per line."""
    lines = [ln.split() for ln in text.splitlines() if ln.split()]
    if not lines:
        raise FormatError("empty clause file")
    n, m = (int(tok) for tok in lines[0])
    clauses = [tuple(int(tok) for tok in ln) for ln in lines[1:]]
    if len(clauses) != m:
        raise FormatError(f"expected {m} clauses, found {len(clauses)}")
    return n, clauses


def load_graph(text: str):
    """Parse the edge format: first line ``n m``, then ``u v`` per line (1-based)."""
    lines = [ln.split() for ln in text.splitlines() if ln.split()]
    if not lines:
        raise FormatError("empty graph file")
    n, m = (int(tok) for tok in lines[0])
    edges = [(int(u) - 1, int(v) - 1) for u, v in (ln for ln in lines[1:])]
    if len(edges) != m:
        raise FormatError(f"expected {m} edges, found {len(edges)}")
    return n, edges


def load_circuit(text: str) -> Circuit:
    """Parse node lines ``id kind args`` with a final ``out id`` line.

    Variables are 1-based in the file.  Node ids must be defined before
    use and number consecutively from 0.
    """
    nodes = []
    out = None
    n_vars = 0
    for raw in text.splitlines():
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        if tokens[0] == "out":
            out = int(tokens[1])
            continue
        idx, kind, args = int(tokens[0]), tokens[1], tokens[2:]
        if idx != len(nodes):
            raise FormatError(f"node ids must be consecutive; got {idx}")
        if kind == "in":
            k = int(args[0]) - 1
            n_vars = max(n_vars, k + 1)
            nodes.append(("in", k))
        elif kind == "const":
            nodes.append(("const", int(args[0])))
        elif kind in ("add", "mul"):
            nodes.append((kind, tuple(int(tok) for tok in args)))
        else:
            raise FormatError(f"unknown node kind {kind!r}")
    if out is None:
        raise FormatError("missing out line")
    return Circuit(n_vars, tuple(nodes), out)

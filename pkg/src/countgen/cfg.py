"""Context-free machinery: CNF grammars, tree census, tree sampling,
multiplicity Earley parsing, and the word sampler built from them.

Derivation trees of a fixed yield length are counted exactly by the
binary-production convolution; the same table drives a uniform tree
sampler whose split point is found by a two-ended (boustrophedonic)
prefix-sum search.  The weighted Earley chart counts the derivation trees
of a given word, which is the multiplicity needed to flatten trees into
uniformly random words.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .coins import FAIL, bit_size
from .describe import Bound, Description
from .exceptions import (
    AmbiguityExceeded,
    EmptySlice,
    EpsilonInLanguage,
    FormatError,
    SizeGuard,
)

# Derivation trees are nested tuples: (A, terminal) at the leaves and
# (A, left, right) inside.


@dataclass(frozen=True)
class Grammar:
    """General context-free grammar; productions map A -> tuples of symbols."""

    variables: tuple
    terminals: tuple
    start: object
    productions: tuple  # pairs (A, rhs-tuple), in declaration order


class CnfGrammar:
    """Chomsky-normal-form grammar with fixed production order per variable.

    Binary productions of each variable are ordered by the variable order
    of their right-hand sides, unary productions by the terminal order;
    samples are reproducible because this order is part of the grammar.
    """

    def __init__(self, variables, terminals, start, binary, unary):
        self.variables = tuple(variables)
        self.terminals = tuple(terminals)
        self.start = start
        var_index = {v: i for i, v in enumerate(self.variables)}
        term_index = {t: i for i, t in enumerate(self.terminals)}
        if start not in var_index:
            raise ValueError("start symbol must be a variable")
        if len(var_index) != len(self.variables):
            raise ValueError("variables must be distinct")
        self.var_index = var_index
        self.binary = {}
        self.unary = {}
        for a in self.variables:
            pairs = list(binary.get(a, ()))
            letters = list(unary.get(a, ()))
            for b, c in pairs:
                if b not in var_index or c not in var_index:
                    raise ValueError(f"production {a!r} -> {b!r} {c!r} uses unknown variables")
            for t in letters:
                if t not in term_index:
                    raise ValueError(f"production {a!r} -> {t!r} uses an unknown terminal")
            if len(set(pairs)) != len(pairs) or len(set(letters)) != len(letters):
                raise ValueError(f"duplicate productions for {a!r}")
            pairs.sort(key=lambda bc: (var_index[bc[0]], var_index[bc[1]]))
            letters.sort(key=lambda t: term_index[t])
            self.binary[a] = tuple(pairs)
            self.unary[a] = tuple(letters)

    def productive_variables(self):
        productive = {a for a in self.variables if self.unary[a]}
        changed = True
        while changed:
            changed = False
            for a in self.variables:
                if a in productive:
                    continue
                if any(
                    b in productive and c in productive for b, c in self.binary[a]
                ):
                    productive.add(a)
                    changed = True
        return productive

    def reachable_variables(self):
        reachable = {self.start}
        frontier = [self.start]
        while frontier:
            a = frontier.pop()
            for b, c in self.binary[a]:
                for v in (b, c):
                    if v not in reachable:
                        reachable.add(v)
                        frontier.append(v)
        return reachable

    def check_no_useless(self):
        live = self.productive_variables() & self.reachable_variables()
        dead = [a for a in self.variables if a not in live]
        if dead:
            raise ValueError(f"useless variables: {dead!r}")


def tree_census_table(g: CnfGrammar, n: int) -> dict:
    """table[a][l] = number of derivation trees from a with yield length l."""
    table = {a: [0] * (n + 1) for a in g.variables}
    for a in g.variables:
        if n >= 1:
            table[a][1] = len(g.unary[a])
    for length in range(2, n + 1):
        for a in g.variables:
            total = 0
            for b, c in g.binary[a]:
                row_b, row_c = table[b], table[c]
                total += sum(
                    row_b[i] * row_c[length - i] for i in range(1, length)
                )
            table[a][length] = total
    return table


def tree_census(g: CnfGrammar, a, n: int) -> int:
    """Number of derivation trees rooted at ``a`` with yield length n."""
    if n < 1:
        raise ValueError("yield length must be >= 1")
    return tree_census_table(g, n)[a][n]


def _locate_linear(g, table, a, length, r):
    acc = 0
    for k in range(1, length):
        for b, c in g.binary[a]:
            acc += table[b][k] * table[c][length - k]
            if acc >= r:
                return b, c, k
    raise AssertionError("rank exceeded tree census")


def _bucket(g, table, a, length, k):
    return sum(table[b][k] * table[c][length - k] for b, c in g.binary[a])


def _locate_boustrophedon(g, table, a, length, r):
    """Two-ended scan for the split bucket holding prefix-sum target r.

    Buckets are ordered by split point; consuming them alternately from
    both ends costs min(k, length-k) for the winning split k, the same
    predicate (smallest prefix sum >= r) as the linear scan.
    """
    total = table[a][length]
    lo, hi = 1, length - 1
    prefix = 0  # weight of consumed buckets 1..lo-1
    suffix = 0  # weight of consumed buckets hi+1..length-1
    from_left = True
    while True:
        if from_left:
            w = _bucket(g, table, a, length, lo)
            if prefix + w >= r:
                k, acc = lo, prefix
                break
            prefix += w
            lo += 1
        else:
            w = _bucket(g, table, a, length, hi)
            suffix += w
            if r > total - suffix:
                # r <= total - (suffix - w) held before, so r is in bucket hi
                k, acc = hi, total - suffix
                break
            hi -= 1
        from_left = not from_left
    for b, c in g.binary[a]:
        acc += table[b][k] * table[c][length - k]
        if acc >= r:
            return b, c, k
    raise AssertionError("rank exceeded bucket weight")


def random_tree(
    g: CnfGrammar,
    n: int,
    src,
    confidence: int = 0,
    table: dict | None = None,
    search: str = "boustrophedon",
):
    """Uniform derivation tree with yield length n, or FAIL.

    The per-node rejection uses kappa = 3 + ceil(log n) + confidence
    attempts (kappa is global, not per recursion level); the failure
    probability is at most (2n - 1) / 2**kappa, below 1/4 at
    confidence 0.
    """
    if n < 1:
        raise ValueError("yield length must be >= 1")
    if table is None:
        table = tree_census_table(g, n)
    if table[g.start][n] == 0:
        raise EmptySlice(f"no derivation trees of yield length {n}")
    kappa = 3 + bit_size(n) + confidence
    locate = _locate_boustrophedon if search == "boustrophedon" else _locate_linear

    def generate(a, length):
        total = table[a][length]
        width = bit_size(total)
        r = None
        for _ in range(kappa):
            u = src.draw(width) + 1
            if u <= total:
                r = u
                break
        if r is None:
            return FAIL
        if length == 1:
            return (a, g.unary[a][r - 1])
        b, c, k = locate(g, table, a, length, r)
        left = generate(b, k)
        if left is FAIL:
            return FAIL
        right = generate(c, length - k)
        if right is FAIL:
            return FAIL
        return (a, left, right)

    return generate(g.start, n)


def tree_yield(tree) -> str:
    """Left-to-right concatenation of the leaf letters."""
    if len(tree) == 2:
        return tree[1]
    return tree_yield(tree[1]) + tree_yield(tree[2])


def format_tree(tree) -> str:
    """Parenthesized form like (S (A a) (B b))."""
    if len(tree) == 2:
        return f"({tree[0]} {tree[1]})"
    return f"({tree[0]} {format_tree(tree[1])} {format_tree(tree[2])})"


def enumerate_trees(g: CnfGrammar, a, n: int, guard: int = 200_000):
    """All derivation trees from ``a`` with yield length n (oracle use)."""
    if tree_census(g, a, n) > guard:
        raise SizeGuard("too many trees to enumerate")
    table = tree_census_table(g, n)

    def build(sym, length):
        if length == 1:
            for t in g.unary[sym]:
                yield (sym, t)
            return
        for b, c in g.binary[sym]:
            for k in range(1, length):
                if table[b][k] == 0 or table[c][length - k] == 0:
                    continue
                for left in build(b, k):
                    for right in build(c, length - k):
                        yield (sym, left, right)

    return list(build(a, n))


# ---------------------------------------------------------------------------
# Weighted Earley chart: counting derivation trees of one word.


def _leftmost_corner_closure(g: CnfGrammar):
    reach = {g.start}
    frontier = [g.start]
    while frontier:
        a = frontier.pop()
        for b, _ in g.binary[a]:
            if b not in reach:
                reach.add(b)
                frontier.append(b)
    return reach


def earley_chart(g: CnfGrammar, word: str) -> dict:
    """Weighted Earley chart of ``word``: {(i, j): {(A, rhs, dot): weight}}.

    Each cell keeps at most one weighted state per dotted production; a
    state's weight is the number of leftmost derivations of the span it
    consumed.
    """
    n = len(word)
    if n < 1:
        raise ValueError("word must be non-empty")
    # state key: (A, rhs, dot); rhs is a tuple of 1 terminal or 2 variables
    cells: dict = defaultdict(dict)
    marked: dict = defaultdict(set)
    waiting = defaultdict(set)  # (B, i) -> cells k with a dot before B at (k, i)

    def add(i, j, key, weight):
        cell = cells[i, j]
        if key in cell:
            cell[key] += weight
            return
        cell[key] = weight
        a, rhs, dot = key
        if dot < len(rhs) and rhs[dot] in g.var_index:
            waiting[rhs[dot], j].add(i)

    def predictions(a):
        out = [(a, (t,), 0) for t in g.unary[a]]
        out.extend((a, bc, 0) for bc in g.binary[a])
        return out

    for a in _leftmost_corner_closure(g):
        for key in predictions(a):
            add(0, 0, key, 1)

    for j in range(1, n + 1):
        # scanner
        for i in range(j - 1, -1, -1):
            for key, weight in list(cells[i, j - 1].items()):
                a, rhs, dot = key
                if dot == 0 and len(rhs) == 1:
                    marked[i, j - 1].add(key)
                    if rhs[0] == word[j - 1]:
                        add(i, j, (a, rhs, 1), weight)
        # completer: descending start index so weights are final when read
        for i in range(j - 1, -1, -1):
            while True:
                ready = [
                    key
                    for key, _ in cells[i, j].items()
                    if key[2] == len(key[1]) and key not in marked[i, j]
                ]
                if not ready:
                    break
                for key in ready:
                    marked[i, j].add(key)
                    b = key[0]
                    weight = cells[i, j][key]
                    for k in sorted(waiting.get((b, i), ()), reverse=True):
                        for pkey, pweight in list(cells[k, i].items()):
                            pa, prhs, pdot = pkey
                            if pdot < len(prhs) and prhs[pdot] == b:
                                add(k, j, (pa, prhs, pdot + 1), weight * pweight)
        # predictor
        to_predict = set()
        for i in range(j):
            for key in list(cells[i, j]):
                a, rhs, dot = key
                if key in marked[i, j] or dot >= len(rhs):
                    continue
                after = rhs[dot]
                if after in g.var_index:
                    marked[i, j].add(key)
                    to_predict.add(after)
        frontier = list(to_predict)
        predicted = set()
        while frontier:
            b = frontier.pop()
            if b in predicted:
                continue
            predicted.add(b)
            for key in predictions(b):
                if key not in cells[j, j]:
                    add(j, j, key, 1)
                a, rhs, dot = key
                if rhs[0] in g.var_index and rhs[0] not in predicted:
                    frontier.append(rhs[0])
    return dict(cells)


def earley_count(g: CnfGrammar, word: str) -> int:
    """Number of derivation trees of ``word`` (0 for non-members).

    Sums the weights of the completed start-variable states spanning the
    whole word in the weighted chart.
    """
    cells = earley_chart(g, word)
    return sum(
        weight
        for (a, rhs, dot), weight in cells.get((0, len(word)), {}).items()
        if a == g.start and dot == len(rhs)
    )


# ---------------------------------------------------------------------------
# Conversion to Chomsky normal form.


def _fresh_terminal_wrapper(term):
    return ("@lift", term)


def to_cnf(g: Grammar, drop_epsilon: bool = False) -> CnfGrammar:
    """Chomsky normal form with the same language.

    Eliminates empty and unit productions, lifts terminals out of long
    right-hand sides, binarizes, and prunes useless variables.  If the
    grammar derives the empty word this raises unless ``drop_epsilon``,
    in which case the empty word alone is dropped.
    """
    variables = set(g.variables)
    # nullable closure
    nullable = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.productions:
            if lhs not in nullable and all(s in nullable for s in rhs):
                nullable.add(lhs)
                changed = True
    if g.start in nullable and not drop_epsilon:
        raise EpsilonInLanguage("the grammar derives the empty word")
    # remove empty productions by expanding nullable occurrences
    expanded = set()
    for lhs, rhs in g.productions:
        options = []
        for sym in rhs:
            if sym in nullable:
                options.append((sym, None))
            else:
                options.append((sym,))
        stack = [()]
        for opts in options:
            stack = [prefix + (o,) for prefix in stack for o in opts]
        for version in stack:
            cleaned = tuple(s for s in version if s is not None)
            if cleaned:
                expanded.add((lhs, cleaned))
    # unit closure by reachability in the variable-to-variable graph
    unit_edges = defaultdict(set)
    for lhs, rhs in expanded:
        if len(rhs) == 1 and rhs[0] in variables:
            unit_edges[lhs].add(rhs[0])
    unit_reach = {}
    for a in variables:
        seen = {a}
        frontier = [a]
        while frontier:
            v = frontier.pop()
            for w in unit_edges.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        unit_reach[a] = seen
    base = defaultdict(set)
    for lhs, rhs in expanded:
        if len(rhs) == 1 and rhs[0] in variables:
            continue
        base[lhs].add(rhs)
    closed = defaultdict(set)
    for a in variables:
        for b in unit_reach[a]:
            closed[a] |= base[b]
    # lift terminals inside long productions, then binarize
    binary = defaultdict(set)
    unary = defaultdict(set)
    order = list(g.variables)
    fresh_seen = set()

    def note_fresh(v):
        if v not in fresh_seen:
            fresh_seen.add(v)
            order.append(v)

    chain_count = 0
    for a in sorted(closed, key=lambda v: g.variables.index(v)):
        for rhs in sorted(closed[a], key=lambda r: tuple(map(str, r))):
            if len(rhs) == 1:
                unary[a].add(rhs[0])
                continue
            symbols = []
            for sym in rhs:
                if sym in variables:
                    symbols.append(sym)
                else:
                    wrapper = _fresh_terminal_wrapper(sym)
                    note_fresh(wrapper)
                    unary[wrapper].add(sym)
                    symbols.append(wrapper)
            while len(symbols) > 2:
                chain_count += 1
                tail = ("@chain", chain_count)
                note_fresh(tail)
                binary[tail].add((symbols[-2], symbols[-1]))
                symbols = symbols[:-2] + [tail]
            binary[a].add((symbols[0], symbols[1]))
    candidate = CnfGrammar(order, g.terminals, g.start, binary, unary)
    # prune useless variables, keeping the start symbol
    live = candidate.productive_variables() & candidate.reachable_variables()
    live.add(g.start)
    kept = [v for v in order if v in live]
    kept_binary = {
        a: [bc for bc in candidate.binary[a] if bc[0] in live and bc[1] in live]
        for a in kept
    }
    kept_unary = {a: candidate.unary[a] for a in kept}
    return CnfGrammar(kept, g.terminals, g.start, kept_binary, kept_unary)


def cfl_description(
    g: CnfGrammar, bound: Bound, confidence: int = 0
) -> Description:
    """Description of the language's slices by its derivation trees.

    The carrier sampler draws uniform trees, the projection is the yield,
    and the multiplicity of a word is its number of derivation trees,
    counted by the weighted Earley chart.  Words whose tree count exceeds
    the declared bound raise AmbiguityExceeded.
    """
    tables: dict = {}

    def table_for(n):
        if n not in tables:
            tables[n] = tree_census_table(g, n)
        return tables[n]

    def sampler(n, src):
        return random_tree(g, n, src, confidence=confidence, table=table_for(n))

    def ambiguity(word):
        count = earley_count(g, word)
        if count > bound(len(word)):
            raise AmbiguityExceeded(
                f"{word!r} has {count} trees, bound {bound(len(word))}"
            )
        if count == 0:
            raise ValueError(f"{word!r} is not derivable")
        return count

    return Description(
        sampler=sampler,
        project=tree_yield,
        ambiguity=ambiguity,
        bound=bound,
        census=lambda n: table_for(n)[g.start][n],
    )


def validate_cfl_bound(g: CnfGrammar, bound: Bound, up_to: int) -> None:
    """Check the tree-count bound on every derivable word of length <= up_to."""
    for n in range(1, up_to + 1):
        if tree_census(g, g.start, n) == 0:
            continue
        seen = set()
        for tree in enumerate_trees(g, g.start, n):
            w = tree_yield(tree)
            if w in seen:
                continue
            seen.add(w)
            count = earley_count(g, w)
            if count > bound(n):
                raise AmbiguityExceeded(
                    f"{w!r} has {count} trees, bound {bound(n)}"
                )


# ---------------------------------------------------------------------------
# Text format.


def load_grammar(text: str) -> Grammar:
    """Parse: ``var`` / ``term`` / ``start`` lines, then ``A -> X Y`` rules.

    An empty right-hand side denotes the empty word.
    """
    variables = None
    terminals = None
    start = None
    productions = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "var":
            variables = tuple(tokens[1:])
        elif tokens[0] == "term":
            terminals = tuple(tokens[1:])
        elif tokens[0] == "start":
            start = tokens[1]
        elif len(tokens) >= 2 and tokens[1] == "->":
            productions.append((tokens[0], tuple(tokens[2:])))
        else:
            raise FormatError(f"cannot parse grammar line {raw!r}")
    if variables is None or terminals is None or start is None:
        raise FormatError("missing var/term/start")
    if any(len(t) != 1 for t in terminals):
        raise FormatError("terminals must be single characters")
    known = set(variables) | set(terminals)
    for lhs, rhs in productions:
        if lhs not in set(variables):
            raise FormatError(f"unknown variable {lhs!r}")
        for sym in rhs:
            if sym not in known:
                raise FormatError(f"unknown symbol {sym!r}")
    return Grammar(variables, terminals, start, tuple(productions))


def dump_grammar(g: CnfGrammar) -> str:
    """Render a CNF grammar in the text format, naming tuple variables."""
    names = {}
    for i, v in enumerate(g.variables):
        names[v] = v if isinstance(v, str) else f"N{i}"
    lines = [
        "var " + " ".join(names[v] for v in g.variables),
        "term " + " ".join(g.terminals),
        "start " + names[g.start],
    ]
    for a in g.variables:
        for b, c in g.binary[a]:
            lines.append(f"{names[a]} -> {names[b]} {names[c]}")
        for t in g.unary[a]:
            lines.append(f"{names[a]} -> {t}")
    return "\n".join(lines) + "\n"

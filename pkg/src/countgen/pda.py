"""Plain one-way pushdown automata and their per-length slice grammars.

For a fixed input length n, the machine's behaviour between two surface
configurations (state, stack top, input position) at equal stack height
is context-free: single moves, splits at a height return, and matched
push/pop brackets generate exactly the accepted words of length n.  The
resulting grammar feeds the context-free sampling and counting pipeline.

Acceptance is by final state with the stack holding only the initial
symbol; the first listed state is the start state.  A move either
consumes input (stack untouched) or pushes/pops one symbol (no input).
"""

from __future__ import annotations

from dataclasses import dataclass

from .cfg import CnfGrammar, Grammar, cfl_description, to_cnf
from .describe import Bound, Description, estimate_census, sample_described
from .exceptions import FormatError, SizeGuard


@dataclass(frozen=True)
class Pda:
    states: tuple
    input_alphabet: tuple
    stack_alphabet: tuple
    init_stack: str
    finals: frozenset
    moves: tuple
    # moves are tagged tuples:
    #   ("consume", q, symbol_or_None, top, q2)   reads symbol (None = silent)
    #   ("push", q, top, pushed, q2)
    #   ("pop", q, top, q2)                       pops the current top

    def __post_init__(self):
        states = set(self.states)
        stack = set(self.stack_alphabet)
        inputs = set(self.input_alphabet)
        if self.init_stack not in stack:
            raise ValueError("initial stack symbol not in stack alphabet")
        if not self.finals <= states:
            raise ValueError("final states must be states")
        for move in self.moves:
            kind = move[0]
            if kind == "consume":
                _, q, sym, top, q2 = move
                if sym is not None and sym not in inputs:
                    raise ValueError(f"unknown input symbol {sym!r}")
            elif kind == "push":
                _, q, top, pushed, q2 = move
                if pushed not in stack:
                    raise ValueError(f"unknown stack symbol {pushed!r}")
            elif kind == "pop":
                _, q, top, q2 = move
            else:
                raise ValueError(f"unknown move kind {kind!r}")
            if q not in states or q2 not in states or top not in stack:
                raise ValueError(f"move {move!r} references unknown names")

    @property
    def start_state(self):
        return self.states[0]


def surface_configs(m: Pda, n: int) -> list:
    """All (state, stack top, input position) triples for inputs of length n."""
    return [
        (q, top, j)
        for q in m.states
        for top in m.stack_alphabet
        for j in range(1, n + 2)
    ]


@dataclass(frozen=True)
class SliceGrammar:
    """CNF grammar for one input length, with construction statistics."""

    grammar: CnfGrammar
    n: int
    raw_variables: int
    raw_productions: int
    pruned_variables: int
    pruned_productions: int


def _single_moves(m: Pda):
    consume = []
    push = []
    pop = []
    for move in m.moves:
        if move[0] == "consume":
            consume.append(move[1:])
        elif move[0] == "push":
            push.append(move[1:])
        else:
            pop.append(move[1:])
    return consume, push, pop


def build_slice_grammar(m: Pda, n: int) -> SliceGrammar:
    """Grammar whose length-n words are exactly those the PDA accepts.

    Nonterminals are pairs of surface configurations sharing a stack top,
    flagged by whether the run in between revisits the endpoint height.
    Productions: single consuming moves, splits at a height return, and
    matching push/pop pairs around an inner run.  Unproductive and
    unreachable nonterminals are pruned before conversion to CNF.
    """
    if n < 1:
        raise ValueError("slice length must be >= 1")
    consume, push, pop = _single_moves(m)
    positions = range(1, n + 2)
    # plausible nonterminals: equal stack top, nondecreasing position
    pairs = [
        (q1, q2, top, j1, j2)
        for top in m.stack_alphabet
        for q1 in m.states
        for q2 in m.states
        for j1 in positions
        for j2 in positions
        if j1 <= j2
    ]
    productions = []
    start = "@start"
    for q1, q2, top, j1, j2 in pairs:
        c1 = (q1, top, j1)
        c2 = (q2, top, j2)
        # single moves: no interior, so they carry flag 1 (a flag-0 single
        # move would make runs that open with a consuming move underivable)
        for q, sym, mtop, q2m in consume:
            if q != q1 or mtop != top or q2m != q2:
                continue
            if sym is None and j1 == j2:
                productions.append(((c1, c2, 1), ()))
            elif sym is not None and j2 == j1 + 1:
                productions.append(((c1, c2, 1), (sym,)))
        # split at the first interior return to the endpoint height
        for qd in m.states:
            for jd in range(j1, j2 + 1):
                d = (qd, top, jd)
                for flag in (0, 1):
                    productions.append(
                        ((c1, c2, 0), ((c1, d, 1), (d, c2, flag)))
                    )
        # bracket: push from c1, matched pop into c2; an empty interior
        # (push immediately undone) consumes nothing
        for q, mtop, pushed, qp in push:
            if q != q1 or mtop != top:
                continue
            d1 = (qp, pushed, j1)
            for qq, ptop, qr in pop:
                if ptop != pushed or qr != q2:
                    continue
                d2 = (qq, pushed, j2)
                for flag in (0, 1):
                    productions.append(
                        ((c1, c2, 1), ((d1, d2, flag),))
                    )
                if d1 == d2:
                    productions.append(((c1, c2, 1), ()))
    for qf in m.finals:
        c_in = (m.start_state, m.init_stack, 1)
        c_fin = (qf, m.init_stack, n + 1)
        for flag in (0, 1):
            productions.append((start, ((c_in, c_fin, flag),)))
    variables = [start] + sorted(
        {lhs for lhs, _ in productions if lhs != start}
        | {s for _, rhs in productions for s in rhs if isinstance(s, tuple) and len(s) == 3},
        key=str,
    )
    raw = Grammar(
        tuple(variables), m.input_alphabet, start, tuple(productions)
    )
    raw_vars = len(variables)
    raw_prods = len(productions)
    cnf = to_cnf(raw, drop_epsilon=True)
    return SliceGrammar(
        grammar=cnf,
        n=n,
        raw_variables=raw_vars,
        raw_productions=raw_prods,
        pruned_variables=raw_vars - len(cnf.variables),
        pruned_productions=raw_prods
        - sum(len(cnf.binary[a]) + len(cnf.unary[a]) for a in cnf.variables),
    )


def pda_slice_description(m: Pda, n: int, bound: Bound) -> Description:
    """Description of the PDA's length-n slice through its slice grammar."""
    sliced = build_slice_grammar(m, n)
    return cfl_description(sliced.grammar, bound)


def pda_sample(m: Pda, n: int, bound: Bound, src, trials=None):
    """Uniform accepted word of length n, or FAIL."""
    return sample_described(pda_slice_description(m, n, bound), n, src, trials)


def pda_census_estimate(m: Pda, n: int, bound: Bound, epsilon, src):
    """Census estimate for the length-n slice within (1 +- epsilon)."""
    return estimate_census(pda_slice_description(m, n, bound), n, epsilon, src)


# ---------------------------------------------------------------------------
# Bounded computation search: the enumeration oracle for small machines.


def count_accepting(
    m: Pda, word: str, max_nodes: int = 200_000, max_depth: int = 300
) -> int:
    """Number of accepting computations on ``word`` by exhaustive search.

    Raises SizeGuard on cycles of non-consuming moves (which make the
    count infinite) and when the search outgrows its node or depth budget.
    """
    consume, push, pop = _single_moves(m)
    budget = [max_nodes]

    def explore(q, pos, stack, depth, quiet_seen):
        budget[0] -= 1
        if budget[0] < 0:
            raise SizeGuard("computation search exceeded its node budget")
        if depth > max_depth:
            raise SizeGuard("computation search exceeded its depth budget")
        key = (q, stack)
        if key in quiet_seen:
            raise SizeGuard("cycle of non-consuming moves: count is infinite")
        quiet_seen = quiet_seen | {key}
        total = 0
        if pos == len(word) and q in m.finals and stack == (m.init_stack,):
            total += 1
        top = stack[-1]
        for mq, sym, mtop, q2 in consume:
            if mq != q or mtop != top:
                continue
            if sym is None:
                total += explore(q2, pos, stack, depth + 1, quiet_seen)
            elif pos < len(word) and word[pos] == sym:
                total += explore(q2, pos + 1, stack, depth + 1, frozenset())
        for mq, mtop, pushed, q2 in push:
            if mq == q and mtop == top:
                total += explore(q2, pos, stack + (pushed,), depth + 1, quiet_seen)
        if len(stack) > 1:
            for mq, mtop, q2 in pop:
                if mq == q and mtop == top:
                    total += explore(q2, pos, stack[:-1], depth + 1, quiet_seen)
        return total

    return explore(m.start_state, 0, (m.init_stack,), 0, frozenset())


def pda_accepts(m: Pda, word: str) -> bool:
    return count_accepting(m, word) > 0


def load_pda(text: str) -> Pda:
    """Parse: state / input / stack / init / final lines, then move lines.

    The first state listed is the start state; ``-`` stands for a silent
    consume move.
    """
    states = None
    inputs = None
    stack = None
    init = None
    finals = ()
    moves = []
    for raw in text.splitlines():
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        key, args = tokens[0], tokens[1:]
        if key == "state":
            states = tuple(args)
        elif key == "input":
            inputs = tuple(args)
        elif key == "stack":
            stack = tuple(args)
        elif key == "init":
            init = args[0]
        elif key == "final":
            finals = tuple(args)
        elif key == "consume":
            q, sym, top, q2 = args
            moves.append(("consume", q, None if sym == "-" else sym, top, q2))
        elif key == "push":
            q, top, pushed, q2 = args
            moves.append(("push", q, top, pushed, q2))
        elif key == "pop":
            q, top, q2 = args
            moves.append(("pop", q, top, q2))
        else:
            raise FormatError(f"unknown directive {key!r}")
    if None in (states, inputs, stack, init):
        raise FormatError("missing state/input/stack/init")
    if any(len(sym) != 1 for sym in inputs):
        raise FormatError("input symbols must be single characters")
    return Pda(states, inputs, stack, init, frozenset(finals), tuple(moves))

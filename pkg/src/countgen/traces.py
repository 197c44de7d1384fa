"""Trace languages: words modulo commutation of independent adjacent letters.

A trace is the equivalence class of a word under swaps of adjacent
independent letters; its canonical representative is the lexicographically
least class member.  Counting the members of a class, or the class members
inside a regular language, runs over consumption vectors (how many
occurrences of each letter have been emitted), which is exactly the
down-set structure of the occurrence order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .describe import Bound, Description
from .dfa import Dfa, dfa_census, dfa_sample
from .exceptions import AmbiguityExceeded, SizeGuard


@dataclass(frozen=True)
class IndepAlphabet:
    """Ordered symbols plus a symmetric, irreflexive independence relation."""

    symbols: tuple
    pairs: frozenset  # of frozensets {a, b}

    def __post_init__(self):
        known = set(self.symbols)
        for pair in self.pairs:
            if len(pair) != 2:
                raise ValueError("independence pairs must join two distinct letters")
            if not pair <= known:
                raise ValueError(f"pair {set(pair)!r} uses unknown letters")

    def independent(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.pairs


def indep_alphabet(symbols, pairs) -> IndepAlphabet:
    return IndepAlphabet(
        tuple(symbols), frozenset(frozenset(p) for p in pairs)
    )


def normal_form(word: str, alph: IndepAlphabet) -> str:
    """Lexicographically least member of the word's commutation class.

    Greedy: repeatedly emit the smallest letter whose earliest remaining
    occurrence is independent of everything remaining before it.
    """
    remaining = list(word)
    out = []
    while remaining:
        best = None
        for i, letter in enumerate(remaining):
            if any(not alph.independent(remaining[j], letter) for j in range(i)):
                continue
            if best is None or letter < remaining[best]:
                best = i
        out.append(remaining.pop(best))
    return "".join(out)


def swap_closure(word: str, alph: IndepAlphabet, limit: int = 100_000) -> set:
    """Whole commutation class by breadth-first adjacent swaps (oracle)."""
    seen = {word}
    frontier = [word]
    while frontier:
        w = frontier.pop()
        for i in range(len(w) - 1):
            if alph.independent(w[i], w[i + 1]):
                swapped = w[:i] + w[i + 1] + w[i] + w[i + 2 :]
                if swapped not in seen:
                    if len(seen) >= limit:
                        raise SizeGuard("commutation class larger than limit")
                    seen.add(swapped)
                    frontier.append(swapped)
    return seen


def _occurrences(word: str, symbols):
    occ = {a: [] for a in symbols}
    for i, letter in enumerate(word):
        occ[letter].append(i)
    return occ


def _vector_states(word: str, alph: IndepAlphabet, guard: int):
    total = 1
    occ = _occurrences(word, alph.symbols)
    for positions in occ.values():
        total *= len(positions) + 1
    if total > guard:
        raise SizeGuard(f"{total} consumption vectors exceed the guard")
    return occ


def _can_emit(occ, alph, vector, letter_index, letter):
    positions = occ[letter]
    k = vector[letter_index]
    if k >= len(positions):
        return False
    nxt = positions[k]
    # every unconsumed occurrence before nxt must be independent of the
    # letter; checking the earliest unconsumed one per letter suffices
    for j, other in enumerate(alph.symbols):
        if other == letter:
            continue
        others = occ[other]
        taken = vector[j]
        if (
            taken < len(others)
            and others[taken] < nxt
            and not alph.independent(other, letter)
        ):
            return False
    return True


def class_size(word: str, alph: IndepAlphabet, guard: int = 200_000) -> int:
    """Number of words in the commutation class of ``word``."""
    occ = _vector_states(word, alph, guard)
    order = alph.symbols
    start = tuple(0 for _ in order)
    counts = {start: 1}
    for _ in range(len(word)):
        nxt: dict = {}
        for vector, ways in counts.items():
            for idx, letter in enumerate(order):
                if _can_emit(occ, alph, vector, idx, letter):
                    bumped = vector[:idx] + (vector[idx] + 1,) + vector[idx + 1 :]
                    nxt[bumped] = nxt.get(bumped, 0) + ways
        counts = nxt
    return sum(counts.values())


def count_representatives(
    dfa: Dfa, word: str, alph: IndepAlphabet, guard: int = 200_000
) -> int:
    """Number of words of the regular language inside the word's class.

    Joint dynamic program over (consumption vector, automaton state),
    pruned to reachable pairs.
    """
    occ = _vector_states(word, alph, guard)
    order = alph.symbols
    start = (tuple(0 for _ in order), dfa.start)
    counts = {start: 1}
    for _ in range(len(word)):
        nxt: dict = {}
        for (vector, q), ways in counts.items():
            for idx, letter in enumerate(order):
                if _can_emit(occ, alph, vector, idx, letter):
                    bumped = vector[:idx] + (vector[idx] + 1,) + vector[idx + 1 :]
                    key = (bumped, dfa.trans[q][dfa.symbol_index(letter)])
                    nxt[key] = nxt.get(key, 0) + ways
        counts = nxt
        if len(counts) > guard:
            raise SizeGuard("joint state space exceeded the guard")
    return sum(ways for (vector, q), ways in counts.items() if q in dfa.finals)


def trace_description(
    dfa: Dfa, alph: IndepAlphabet, bound: Bound, confidence: int = 3
) -> Description:
    """Description of the trace closure of a regular language.

    The carrier is the string language itself; projection is the
    canonical form and the multiplicity of a trace is the number of its
    representatives inside the language.
    """
    if tuple(dfa.alphabet) != tuple(alph.symbols):
        raise ValueError("automaton and independence alphabets must agree")
    tables: dict = {}

    def table_for(n):
        if n not in tables:
            tables[n] = dfa_census(dfa, n)
        return tables[n]

    def sampler(n, src):
        return dfa_sample(dfa, n, src, confidence=confidence, table=table_for(n))

    def ambiguity(trace):
        d = count_representatives(dfa, trace, alph)
        if d > bound(len(trace)):
            raise AmbiguityExceeded(
                f"trace {trace!r} has {d} representatives, bound {bound(len(trace))}"
            )
        if d == 0:
            raise ValueError(f"{trace!r} has no representative in the language")
        return d

    return Description(
        sampler=sampler,
        project=lambda w: normal_form(w, alph),
        ambiguity=ambiguity,
        bound=bound,
        census=lambda n: table_for(n).count(dfa.start, n),
    )


def load_indep(text: str, symbols) -> IndepAlphabet:
    """Collect ``indep a b`` lines from an automaton file."""
    pairs = []
    for raw in text.splitlines():
        tokens = raw.split()
        if tokens and tokens[0] == "indep":
            if len(tokens) != 3:
                raise ValueError(f"bad independence line {raw!r}")
            pairs.append((tokens[1], tokens[2]))
    return indep_alphabet(symbols, pairs)

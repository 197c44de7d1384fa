"""Sampling and counting for structures reached through a many-to-one carrier.

A target structure S is handled through a carrier T, a size-preserving
surjection of T onto S, and the multiplicity with which each element of S
is covered.  Rejection against the multiplicity turns a uniform sampler
for T into a uniform sampler for S; averaging reciprocal multiplicities
turns the census of T into an estimator for the census of S, and rounding
a sharp enough estimate recovers the exact count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

from .coins import FAIL, bit_size, gen_uniform, lcm_upto
from .exceptions import (
    AmbiguityExceeded,
    CeilingExceeded,
    EmptyLanguage,
    EmptySlice,
    FormatError,
)

# Exact verification of a budget is skipped past this size; the float
# estimate is then accurate far beyond any boundary tie we could hit.
_EXACT_BUDGET_LIMIT = 4096


@lru_cache(maxsize=None)
def trial_budget(alpha, beta, epsilon, delta) -> int:
    """Smallest t >= 1 with alpha * (1 - beta*epsilon)**t < delta.

    Sizes every retry loop in this module: alpha is the slack factor in
    front of the per-trial bound, beta*epsilon the per-trial success mass,
    delta the failure probability the loop must get under.
    """
    alpha = Fraction(alpha)
    beta = Fraction(beta)
    epsilon = Fraction(epsilon)
    delta = Fraction(delta)
    if alpha <= 0 or beta <= 0 or delta <= 0:
        raise ValueError("alpha, beta, delta must be positive")
    if not 0 < epsilon < 1 / beta:
        raise ValueError("epsilon must lie in (0, 1/beta)")
    base = 1 - beta * epsilon
    if alpha * base < delta:
        return 1
    guess = math.log(float(alpha / delta)) / -math.log(float(base))
    t = max(1, math.ceil(guess))
    if t <= _EXACT_BUDGET_LIMIT:
        while alpha * base**t >= delta:
            t += 1
        while t > 1 and alpha * base ** (t - 1) < delta:
            t -= 1
    return t


@dataclass(frozen=True)
class Bound:
    """Polynomial multiplicity bound n -> coeff * n**power + const."""

    coeff: int = 0
    power: int = 0
    const: int = 1

    def __call__(self, n: int) -> int:
        value = self.coeff * n**self.power + self.const
        if value < 1:
            raise ValueError("multiplicity bound must be >= 1")
        return value


@dataclass(frozen=True)
class Description:
    """Carrier T with projection onto the structure S being sampled.

    ``sampler(n, src)`` must be uniform on the size-n carrier slice when it
    does not FAIL and must FAIL with probability below 1/4.  ``ambiguity``
    gives, for an element of S, the number of carrier elements projecting
    onto it, and is bounded by ``bound`` at every size.  ``census`` (the
    carrier census, optional) is required for estimation and exact
    counting.
    """

    sampler: Callable
    project: Callable
    ambiguity: Callable
    bound: Bound
    census: Optional[Callable] = None


@dataclass
class SampleReport:
    value: object
    trials: int
    bits: int


def _sample_loop(desc: Description, n: int, src, trials=None):
    d_max = desc.bound(n)
    m = lcm_upto(d_max)
    width = bit_size(m)
    budget = trials if trials is not None else trial_budget(
        1, Fraction(3, 8), Fraction(1, d_max), Fraction(1, 4)
    )
    for trial in range(1, budget + 1):
        t = desc.sampler(n, src)
        if t is FAIL:
            continue
        s = desc.project(t)
        d = desc.ambiguity(s)
        if not 1 <= d <= d_max:
            raise AmbiguityExceeded(f"multiplicity {d} outside [1, {d_max}]")
        r = src.draw(width) + 1
        if r <= m // d:
            return s, trial
    return FAIL, budget


def sample_described(desc: Description, n: int, src, trials=None):
    """Uniform element of the described structure at size n, or FAIL.

    A carrier draw t is kept with probability proportional to
    1/ambiguity(project(t)), which exactly flattens the multiplicity.
    ``trials`` overrides the computed retry budget; the conditional output
    law does not depend on it.
    """
    if desc.census is not None and desc.census(n) == 0:
        raise EmptySlice(f"carrier census is 0 at size {n}")
    value, _ = _sample_loop(desc, n, src, trials)
    return value


def sample_report(desc: Description, n: int, src, trials=None) -> SampleReport:
    """Like ``sample_described`` but reporting trials and bits used."""
    if desc.census is not None and desc.census(n) == 0:
        raise EmptySlice(f"carrier census is 0 at size {n}")
    before = src.bits_consumed
    value, used = _sample_loop(desc, n, src, trials)
    return SampleReport(value, used, src.bits_consumed - before)


def estimate_census(desc: Description, n: int, epsilon, src):
    """Estimate of the structure census at size n within (1 +- epsilon).

    Averages 1/ambiguity over carrier draws and scales by the carrier
    census; the relative error is within epsilon with probability above
    3/4 conditioned on not failing, and the failure probability is below
    1/4.
    """
    if desc.census is None:
        raise ValueError("estimation needs the carrier census")
    epsilon = Fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0,1)")
    total = desc.census(n)
    if total == 0:
        raise EmptySlice(f"carrier census is 0 at size {n}")
    d_max = desc.bound(n)
    budget = trial_budget(
        Fraction(8, 3), Fraction(3, 4), (epsilon / d_max) ** 2, Fraction(1, 4)
    )
    successes = 0
    acc = Fraction(0)
    for _ in range(budget):
        t = desc.sampler(n, src)
        if t is FAIL:
            continue
        successes += 1
        acc += Fraction(1, desc.ambiguity(desc.project(t)))
    if successes == 0:
        return FAIL
    return acc * total / successes


def exact_count(desc: Description, n: int, src, ceiling: int = 512):
    """Exact structure census at size n, correct with probability > 3/4.

    Runs the estimator at tolerance 1/(3 * carrier census) and rounds.
    Refused when the carrier census exceeds ``ceiling``, since the trial
    budget grows with its square.
    """
    if desc.census is None:
        raise ValueError("exact counting needs the carrier census")
    total = desc.census(n)
    if total == 0:
        raise EmptySlice(f"carrier census is 0 at size {n}")
    if total > ceiling:
        raise CeilingExceeded(f"carrier census {total} above ceiling {ceiling}")
    estimate = estimate_census(desc, n, Fraction(1, 3 * total), src)
    if estimate is FAIL:
        return FAIL
    return int(estimate + Fraction(1, 2))


def amplify_urg(sampler: Callable, delta, delta_target) -> Callable:
    """Wrap a sampler failing with probability < delta so it fails < delta_target.

    Retries independent attempts and returns the first success, which
    leaves the conditional output law unchanged.
    """
    delta = Fraction(delta)
    delta_target = Fraction(delta_target)
    if not (0 < delta < 1 and 0 < delta_target < 1):
        raise ValueError("failure probabilities must lie in (0,1)")
    attempts = 1
    power = delta
    while power > delta_target:
        power *= delta
        attempts += 1

    def amplified(*args):
        for _ in range(attempts):
            value = sampler(*args)
            if value is not FAIL:
                return value
        return FAIL

    amplified.attempts = attempts
    return amplified


def _median(values):
    ordered = sorted(values)
    return ordered[len(ordered) // 2]


def amplify_ras(estimator: Callable, advantage, delta_target) -> Callable:
    """Boost an estimator correct with probability 1/2 + advantage.

    Repeats the estimator and returns the median of the non-FAIL results;
    the median is correct with probability at least 1 - delta_target.
    """
    advantage = Fraction(advantage)
    delta_target = Fraction(delta_target)
    if not 0 < advantage < Fraction(1, 2):
        raise ValueError("advantage must lie in (0, 1/2)")
    repeats = trial_budget(
        Fraction(4, 3), Fraction(3, 4), advantage**2, delta_target
    )

    def amplified(*args):
        results = []
        for _ in range(repeats):
            value = estimator(*args)
            if value is not FAIL:
                results.append(value)
        if not results:
            return FAIL
        return _median(results)

    amplified.repeats = repeats
    return amplified


# ---------------------------------------------------------------------------
# Word languages and their union / product combinators.


@dataclass(frozen=True)
class WordLanguage:
    """A word language exposing a slice sampler, membership and census.

    ``unrank``, when provided, maps (n, i) to the i-th word of the size-n
    slice (1-based, lexicographic); the combinators then route through a
    single uniform integer draw, which keeps their output laws exact even
    when the operand samplers fail at different rates.
    """

    sample: Callable  # (n, src) -> word | FAIL
    member: Callable  # word -> bool
    census: Optional[Callable] = None  # n -> int, n >= 0
    unrank: Optional[Callable] = None  # (n, i) -> word


def finite_language(words) -> WordLanguage:
    """WordLanguage view of an explicit finite set of words."""
    by_size: dict = {}
    for w in words:
        by_size.setdefault(len(w), []).append(w)
    for group in by_size.values():
        group.sort()

    def census(n):
        return len(by_size.get(n, ()))

    def member(w):
        return w in by_size.get(len(w), ())

    def sample(n, src):
        slice_ = by_size.get(n, ())
        if not slice_:
            raise EmptySlice(f"no words of length {n}")
        r = gen_uniform(src, len(slice_))
        if r is FAIL:
            return FAIL
        return slice_[r - 1]

    def unrank(n, i):
        return by_size[n][i - 1]

    return WordLanguage(sample, member, census, unrank)


def union(a: WordLanguage, b: WordLanguage) -> Description:
    """Description of the union of two word languages.

    The carrier is the tagged disjoint union; a word is covered once per
    operand containing it, so multiplicities are 1 or 2.  A routing draw
    over ``bit_size(total census)`` bits picks the side by threshold.
    When an operand lacks ``unrank``, both operands are presampled every
    attempt so that a side failing more often cannot skew the law.
    """
    if a.census is None or b.census is None:
        raise ValueError("union needs both census functions")

    def census(n):
        return a.census(n) + b.census(n)

    def sampler(n, src):
        total = census(n)
        if total == 0:
            raise EmptySlice(f"both operands empty at size {n}")
        width = bit_size(total)
        left = a.census(n)
        exact = a.unrank is not None and b.unrank is not None
        budget = trial_budget(1, Fraction(3, 8), 1, Fraction(1, 4))
        for _ in range(budget):
            r = src.draw(width) + 1
            if exact:
                if r <= left:
                    return ("L", a.unrank(n, r))
                if r <= total:
                    return ("R", b.unrank(n, r - left))
                continue
            # draw both sides before routing: the joint failure event is
            # independent of the side, so the conditional law stays uniform
            wa = a.sample(n, src) if left else FAIL
            wb = b.sample(n, src) if total > left else FAIL
            if r <= left:
                if wa is not FAIL and (total == left or wb is not FAIL):
                    return ("L", wa)
            elif r <= total:
                if wb is not FAIL and (left == 0 or wa is not FAIL):
                    return ("R", wb)
        return FAIL

    def ambiguity(w):
        d = int(a.member(w)) + int(b.member(w))
        if d == 0:
            raise ValueError(f"{w!r} is in neither operand")
        return d

    return Description(
        sampler=sampler,
        project=lambda t: t[1],
        ambiguity=ambiguity,
        bound=Bound(const=2),
        census=census,
    )


def product(a: WordLanguage, b: WordLanguage) -> Description:
    """Description of the concatenation language, graded over split points.

    The carrier holds every pair (s, t) with |s| + |t| = n; a word is
    covered once per factorization, so multiplicities are at most n + 1.
    Sampling first picks the split with probability proportional to the
    number of pairs it carries, then produces both halves.  With operand
    ``unrank`` the pair comes from one uniform integer draw and the law
    is exact unconditionally; through operand samplers it is exact when
    their failure rates do not depend on the slice size (in particular
    when they never fail).
    """
    if a.census is None or b.census is None:
        raise ValueError("product needs both census functions")

    def census(n):
        return sum(a.census(k) * b.census(n - k) for k in range(n + 1))

    def sampler(n, src):
        total = census(n)
        if total == 0:
            raise EmptySlice(f"product slice empty at size {n}")
        exact = a.unrank is not None and b.unrank is not None
        budget = trial_budget(1, Fraction(27, 64), 1, Fraction(1, 4))
        for _ in range(budget):
            r = gen_uniform(src, total)
            if r is FAIL:
                continue
            acc = 0
            for k in range(n + 1):
                bucket = a.census(k) * b.census(n - k)
                if acc + bucket >= r:
                    break
                acc += bucket
            if exact:
                offset = r - acc - 1
                i, j = divmod(offset, b.census(n - k))
                return (a.unrank(k, i + 1), b.unrank(n - k, j + 1))
            # a size-0 bucket can only hold the empty word
            s = "" if k == 0 else a.sample(k, src)
            if s is FAIL:
                continue
            t = "" if n - k == 0 else b.sample(n - k, src)
            if t is FAIL:
                continue
            return (s, t)
        return FAIL

    def ambiguity(w):
        d = sum(
            1
            for k in range(len(w) + 1)
            if a.member(w[:k]) and b.member(w[k:])
        )
        if d == 0:
            raise ValueError(f"{w!r} has no factorization")
        return d

    return Description(
        sampler=sampler,
        project=lambda pair: pair[0] + pair[1],
        ambiguity=ambiguity,
        bound=Bound(coeff=1, power=1, const=1),
        census=census,
    )


def product_fixed(a: WordLanguage, b: WordLanguage) -> Description:
    """Midpoint-split product: both halves sampled at size n/2.

    Covers only the even-size slices S_h * T_h; each word there factors
    uniquely at the midpoint, so the description is unambiguous and its
    carrier census is the product of the halves' censuses.
    """
    if a.census is None or b.census is None:
        raise ValueError("product needs both census functions")

    def census(n):
        if n % 2:
            return 0
        return a.census(n // 2) * b.census(n // 2)

    def sampler(n, src):
        if census(n) == 0:
            raise EmptySlice(f"midpoint product empty at size {n}")
        h = n // 2
        budget = trial_budget(1, Fraction(9, 16), 1, Fraction(1, 4))
        for _ in range(budget):
            s = a.sample(h, src)
            if s is FAIL:
                continue
            t = b.sample(h, src)
            if t is FAIL:
                continue
            return (s, t)
        return FAIL

    def ambiguity(w):
        h = len(w) // 2
        if len(w) % 2 or not (a.member(w[:h]) and b.member(w[h:])):
            raise ValueError(f"{w!r} not in the midpoint product")
        return 1

    return Description(
        sampler=sampler,
        project=lambda pair: pair[0] + pair[1],
        ambiguity=ambiguity,
        bound=Bound(const=1),
        census=census,
    )


def verify_description(desc: Description, n: int, carrier_slice) -> None:
    """Cross-check a description against an explicit carrier slice.

    Exhaustively verifies size preservation, the multiplicity counts, the
    declared bound and the census at size n.  Intended for small n.
    """
    counts: dict = {}
    for t in carrier_slice:
        s = desc.project(t)
        counts[s] = counts.get(s, 0) + 1
    d_max = desc.bound(n)
    for s, count in counts.items():
        declared = desc.ambiguity(s)
        if declared != count:
            raise AssertionError(
                f"ambiguity({s!r}) = {declared}, carrier covers it {count} times"
            )
        if count > d_max:
            raise AssertionError(f"multiplicity {count} exceeds bound {d_max}")
    if desc.census is not None and desc.census(n) != len(list(carrier_slice)):
        raise AssertionError("carrier census mismatch")


# ---------------------------------------------------------------------------
# Disjunctive normal form: the standard example of an ambiguous carrier.


@dataclass(frozen=True)
class DnfFormula:
    """DNF over n boolean variables; clauses are tuples of signed 1-based indices."""

    n: int
    clauses: tuple

    def __post_init__(self):
        for clause in self.clauses:
            if not clause:
                raise ValueError("clauses must be non-empty")
            seen = set()
            for lit in clause:
                v = abs(lit)
                if lit == 0 or v > self.n:
                    raise ValueError(f"literal {lit} out of range")
                if -lit in seen:
                    raise ValueError(f"variable {v} appears with both signs")
                seen.add(lit)

    def satisfies(self, assignment: str, j: int) -> bool:
        clause = self.clauses[j]
        return all(
            (assignment[abs(lit) - 1] == "1") == (lit > 0) for lit in clause
        )

    def clause_weight(self, j: int) -> int:
        return 1 << (self.n - len(self.clauses[j]))


def load_dnf(text: str) -> DnfFormula:
    """Parse the line format: first line ``n m``, then one clause per line."""
    lines = [ln.split() for ln in text.splitlines() if ln.split()]
    if not lines:
        raise FormatError("empty DNF file")
    try:
        n, m = (int(tok) for tok in lines[0])
        clauses = tuple(tuple(int(tok) for tok in ln) for ln in lines[1:])
    except ValueError as exc:
        raise FormatError(f"bad DNF line: {exc}") from exc
    if len(clauses) != m:
        raise FormatError(f"expected {m} clauses, found {len(clauses)}")
    return DnfFormula(n, clauses)


def dnf_description(formula: DnfFormula) -> Description:
    """Description of the satisfying assignments of a DNF.

    The carrier pairs each clause with an assignment satisfying it; an
    assignment is covered once per clause it satisfies.  The carrier
    census is the sum of 2**(n - |clause|) over clauses, and the carrier
    sampler picks a clause weighted by that count and fills the free
    variables with fresh bits.
    """
    if not formula.clauses:
        raise EmptyLanguage("DNF has no clauses")
    n = formula.n
    m = len(formula.clauses)
    weights = [formula.clause_weight(j) for j in range(m)]
    total = sum(weights)

    def census(size):
        return total if size == n else 0

    def sampler(size, src):
        if size != n:
            raise EmptySlice(f"assignments have size {n}, not {size}")
        r = gen_uniform(src, total)
        if r is FAIL:
            return FAIL
        acc = 0
        for j, w in enumerate(weights):
            acc += w
            if acc >= r:
                break
        fixed = {abs(lit) - 1: "1" if lit > 0 else "0" for lit in formula.clauses[j]}
        free = [i for i in range(n) if i not in fixed]
        bits = src.draw(len(free))
        for pos, i in enumerate(free):
            fixed[i] = "1" if (bits >> pos) & 1 else "0"
        assignment = "".join(fixed[i] for i in range(n))
        return (j, assignment)

    def ambiguity(assignment):
        d = sum(formula.satisfies(assignment, j) for j in range(m))
        if d == 0:
            raise ValueError(f"{assignment} satisfies no clause")
        return d

    return Description(
        sampler=sampler,
        project=lambda t: t[1],
        ambiguity=ambiguity,
        bound=Bound(const=m),
        census=census,
    )

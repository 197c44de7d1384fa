"""Ranking slices of bounded-ambiguity NFA languages without enumeration.

An NFA is kept as one transition matrix per symbol; the number of
accepting paths on a word is a vector-matrix-vector product.  To count
accepted *words* instead of paths, each path count c is passed through
the interpolation polynomial q with q(0) = 0 and q(c) = 1 for c up to the
ambiguity bound.  Powers of path counts summed over whole prefix cones
collapse to products of Kronecker powers of the transition matrices,
which is what makes the rank of a slice computable in polynomial time.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct

from .coins import FAIL, gen_uniform
from .exceptions import AmbiguityExceeded, EmptySlice, FormatError, SizeGuard


@dataclass(frozen=True)
class Nfa:
    alphabet: tuple
    matrices: tuple  # per symbol: dim x dim tuple of nonnegative ints
    start: tuple  # 0/1 row vector
    accept: tuple  # 0/1 column vector
    ambiguity: int  # declared bound on accepting paths per word

    def __post_init__(self):
        dim = len(self.start)
        if len(self.accept) != dim:
            raise ValueError("start/accept dimension mismatch")
        if len(self.matrices) != len(self.alphabet):
            raise ValueError("one matrix per symbol required")
        for m in self.matrices:
            if len(m) != dim or any(len(row) != dim for row in m):
                raise ValueError("matrix dimension mismatch")
            if any(e < 0 for row in m for e in row):
                raise ValueError("matrix entries must be nonnegative")
        if self.ambiguity < 1:
            raise ValueError("ambiguity bound must be >= 1")

    @property
    def dim(self) -> int:
        return len(self.start)

    def matrix(self, sym: str):
        try:
            return self.matrices[self.alphabet.index(sym)]
        except ValueError:
            raise ValueError(f"symbol {sym!r} not in alphabet") from None


def _row_times_matrix(row, matrix):
    dim = len(matrix[0]) if matrix else 0
    return tuple(
        sum(row[i] * matrix[i][j] for i in range(len(row))) for j in range(dim)
    )


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def path_count(a: Nfa, word: str) -> int:
    """Number of accepting paths on ``word``."""
    row = a.start
    for sym in word:
        row = _row_times_matrix(row, a.matrix(sym))
    return _dot(row, a.accept)


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        if pi:
            for j, qj in enumerate(q):
                out[i + j] += pi * qj
    return out


@dataclass(frozen=True)
class QPoly:
    """Polynomial with q(0) = 0 and q(c) = 1 for 1 <= c <= degree."""

    coefficients: tuple  # a_1..a_d (zero constant term omitted)

    def __call__(self, x):
        value = Fraction(0)
        power = Fraction(x)
        for a in self.coefficients:
            value += a * power
            power *= x
        return value


def build_q(d: int) -> QPoly:
    """Interpolate through (0,0), (1,1), ..., (d,1) by Lagrange bases."""
    if d < 1:
        raise ValueError("degree must be >= 1")
    points = [(0, Fraction(0))] + [(c, Fraction(1)) for c in range(1, d + 1)]
    coeffs = [Fraction(0)] * (d + 1)
    for i, (xi, yi) in enumerate(points):
        basis = [Fraction(1)]
        scale = Fraction(1)
        for j, (xj, _) in enumerate(points):
            if i == j:
                continue
            basis = _poly_mul(basis, [Fraction(-xj), Fraction(1)])
            scale *= xi - xj
        for k, b in enumerate(basis):
            coeffs[k] += yi * b / scale
    assert coeffs[0] == 0
    poly = QPoly(tuple(coeffs[1:]))
    assert poly(0) == 0 and all(poly(c) == 1 for c in range(1, d + 1))
    return poly


def _kron(a, b):
    bn = len(b)
    return tuple(
        tuple(a[i][j] * b[k][l] for j in range(len(a[0])) for l in range(len(b[0])))
        for i in range(len(a))
        for k in range(bn)
    )


def _kron_vec(u, v):
    return tuple(ui * vj for ui in u for vj in v)


def _kron_power_matrix(m, k):
    out = m
    for _ in range(k - 1):
        out = _kron(out, m)
    return out


def _kron_power_vec(v, k):
    out = v
    for _ in range(k - 1):
        out = _kron_vec(out, v)
    return out


def _matrix_add(a, b):
    return tuple(
        tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b)
    )


def _matrix_times_col(matrix, col):
    return tuple(_dot(row, col) for row in matrix)


def nfa_rank_slice(
    a: Nfa, n: int, beta: str, lift_ceiling: int = 4096, validate: bool = False
) -> int:
    """Number of accepted words of length n lexicographically <= beta.

    Every word in the prefix cone below ``beta`` contributes q(paths),
    which is 1 exactly for accepted words within the ambiguity bound.  The
    k-th powers of path counts summed over each cone are evaluated as
    single products of Kronecker-power matrices, so no word is
    enumerated.
    """
    if len(beta) != n:
        raise ValueError("beta must have length n")
    d = a.ambiguity
    if a.dim**d > lift_ceiling:
        raise SizeGuard(f"lift dimension {a.dim}**{d} above {lift_ceiling}")
    if validate:
        validate_ambiguity(a, n)
    observed = path_count(a, beta)
    if observed > d:
        raise AmbiguityExceeded(f"{beta!r} has {observed} accepting paths > {d}")
    q = build_q(d)
    total = Fraction(0)
    for k in range(1, d + 1):
        lifted = {sym: _kron_power_matrix(a.matrix(sym), k) for sym in a.alphabet}
        alphabet_sum = None
        for sym in a.alphabet:
            alphabet_sum = (
                lifted[sym]
                if alphabet_sum is None
                else _matrix_add(alphabet_sum, lifted[sym])
            )
        eta = _kron_power_vec(a.accept, k)
        # suffix[j] = (sum over symbols)**j applied to the accept vector
        suffix = [eta]
        for _ in range(n - 1):
            suffix.append(_matrix_times_col(alphabet_sum, suffix[-1]))
        row = _kron_power_vec(a.start, k)
        coeff = q.coefficients[k - 1]
        sum_k = 0
        for i, sym in enumerate(beta):
            for smaller_index in range(a.alphabet.index(sym)):
                branch = _row_times_matrix(row, lifted[a.alphabet[smaller_index]])
                sum_k += _dot(branch, suffix[n - 1 - i])
            row = _row_times_matrix(row, lifted[sym])
        sum_k += _dot(row, eta)  # the word beta itself
        total += coeff * sum_k
    assert total.denominator == 1, "rank must be integral"
    return int(total)


def nfa_slice_census(a: Nfa, n: int, lift_ceiling: int = 4096) -> int:
    """Number of accepted words of length n (not paths)."""
    d = a.ambiguity
    if a.dim**d > lift_ceiling:
        raise SizeGuard(f"lift dimension {a.dim}**{d} above {lift_ceiling}")
    q = build_q(d)
    total = Fraction(0)
    for k in range(1, d + 1):
        lifted_sum = None
        for sym in a.alphabet:
            m = _kron_power_matrix(a.matrix(sym), k)
            lifted_sum = m if lifted_sum is None else _matrix_add(lifted_sum, m)
        col = _kron_power_vec(a.accept, k)
        for _ in range(n):
            col = _matrix_times_col(lifted_sum, col)
        total += q.coefficients[k - 1] * _dot(_kron_power_vec(a.start, k), col)
    assert total.denominator == 1
    return int(total)


def nfa_rank(a: Nfa, beta: str) -> int:
    """Rank over all lengths: shorter accepted words plus the slice rank."""
    shorter = sum(nfa_slice_census(a, length) for length in range(len(beta)))
    return shorter + nfa_rank_slice(a, len(beta), beta)


def validate_ambiguity(a: Nfa, n: int, max_words: int = 1 << 16) -> None:
    """Exhaustively check path counts up to length n against the bound."""
    if len(a.alphabet) ** n > max_words:
        raise SizeGuard(f"{len(a.alphabet)}**{n} words is too many to probe")
    for length in range(n + 1):
        for tup in iproduct(a.alphabet, repeat=length):
            word = "".join(tup)
            c = path_count(a, word)
            if c > a.ambiguity:
                raise AmbiguityExceeded(
                    f"{word!r} has {c} accepting paths > {a.ambiguity}"
                )


def unrank_slice(rank_fn, alphabet, n: int, k: int) -> str:
    """Smallest word w of length n with rank_fn(w) >= k, by bisection.

    ``rank_fn`` must be nondecreasing in the lexicographic order on the
    full slice; the result is the k-th accepted word when ranks count
    accepted words only.
    """
    base = len(alphabet)

    def decode(code):
        digits = []
        for _ in range(n):
            code, digit = divmod(code, base)
            digits.append(alphabet[digit])
        return "".join(reversed(digits))

    lo, hi = 0, base**n - 1
    if rank_fn(decode(hi)) < k:
        raise EmptySlice(f"slice holds fewer than {k} accepted words")
    while lo < hi:
        mid = (lo + hi) // 2
        if rank_fn(decode(mid)) >= k:
            hi = mid
        else:
            lo = mid + 1
    return decode(lo)


def rank_sampler(rank_fn, census: int, alphabet, n: int, src, delta=Fraction(1, 4)):
    """Uniform accepted word of the slice via rank/unrank.

    Draws a rank uniformly and inverts it by bisection; uniform
    conditioned on the integer draw not failing, which happens with
    probability below ``delta``.
    """
    if census <= 0:
        raise EmptySlice("slice census is 0")
    k = gen_uniform(src, census, delta)
    if k is FAIL:
        return FAIL
    return unrank_slice(rank_fn, alphabet, n, k)


def nfa_sample_slice(a: Nfa, n: int, src, delta=Fraction(1, 4)):
    """Uniform word of length n accepted by the NFA, or FAIL."""
    census = nfa_slice_census(a, n)
    return rank_sampler(
        lambda w: nfa_rank_slice(a, n, w), census, a.alphabet, n, src, delta
    )


def nfa_from_dfa(dfa) -> Nfa:
    """0/1 matrix view of a DFA (every word has at most one path)."""
    dim = dfa.n_states
    matrices = []
    for s in range(len(dfa.alphabet)):
        m = [[0] * dim for _ in range(dim)]
        for q in range(dim):
            m[q][dfa.trans[q][s]] = 1
        matrices.append(tuple(tuple(row) for row in m))
    start = tuple(1 if q == dfa.start else 0 for q in range(dim))
    accept = tuple(1 if q in dfa.finals else 0 for q in range(dim))
    return Nfa(dfa.alphabet, tuple(matrices), start, accept, 1)


def load_nfa(text: str) -> Nfa:
    """Parse the DFA-like format with repeated trans lines and ambiguity.

    Repeated ``trans q s p`` lines raise the matrix entry, ``start``
    and ``finals`` take several states, and ``ambiguity d`` declares the
    path bound.
    """
    n_states = None
    alphabet = None
    starts = []
    finals = []
    ambiguity = None
    edges = []
    for raw in text.splitlines():
        tokens = raw.split()
        if not tokens or tokens[0].startswith("#") or tokens[0] == "indep":
            continue
        key, args = tokens[0], tokens[1:]
        if key == "states":
            n_states = int(args[0])
        elif key == "alphabet":
            alphabet = tuple(args)
        elif key == "start":
            starts.extend(int(tok) for tok in args)
        elif key == "finals":
            finals.extend(int(tok) for tok in args)
        elif key == "ambiguity":
            ambiguity = int(args[0])
        elif key == "trans":
            edges.append((int(args[0]), args[1], int(args[2])))
        else:
            raise FormatError(f"unknown directive {key!r}")
    if None in (n_states, alphabet, ambiguity) or not starts or not finals:
        raise FormatError("missing states/alphabet/start/finals/ambiguity")
    index = {sym: i for i, sym in enumerate(alphabet)}
    matrices = [
        [[0] * n_states for _ in range(n_states)] for _ in alphabet
    ]
    for q, sym, p in edges:
        if sym not in index:
            raise FormatError(f"edge symbol {sym!r} not in alphabet")
        matrices[index[sym]][q][p] += 1
    start = tuple(1 if q in set(starts) else 0 for q in range(n_states))
    accept = tuple(1 if q in set(finals) else 0 for q in range(n_states))
    return Nfa(
        alphabet,
        tuple(tuple(tuple(row) for row in m) for m in matrices),
        start,
        accept,
        ambiguity,
    )

"""Pushdown automata and their per-length slice grammars."""

from fractions import Fraction
from itertools import product as iproduct

import pytest

from countgen.cfg import earley_count, tree_census
from countgen.coins import FAIL, CoinSource
from countgen.describe import Bound, sample_described
from countgen.exceptions import SizeGuard
from countgen.pda import (
    Pda,
    build_slice_grammar,
    count_accepting,
    load_pda,
    pda_accepts,
    pda_census_estimate,
    pda_sample,
    pda_slice_description,
    surface_configs,
)


def words_of(alphabet, n):
    return ("".join(t) for t in iproduct(alphabet, repeat=n))


# a^k b^k: push a marker per a, pop per b; helper states keep every move
# either consuming or altering the stack, never both
ANBN = Pda(
    states=("load", "drain", "load@a", "drain@b"),
    input_alphabet=("a", "b"),
    stack_alphabet=("Z", "X"),
    init_stack="Z",
    finals=frozenset({"drain"}),
    moves=(
        ("consume", "load", "a", "Z", "load@a"),
        ("consume", "load", "a", "X", "load@a"),
        ("push", "load@a", "Z", "X", "load"),
        ("push", "load@a", "X", "X", "load"),
        ("consume", "load", "b", "X", "drain@b"),
        ("consume", "drain", "b", "X", "drain@b"),
        ("pop", "drain@b", "X", "drain"),
    ),
)


def anbn_member(w):
    k = len(w) // 2
    return len(w) % 2 == 0 and k >= 1 and w == "a" * k + "b" * k


# accepts "a" along two distinct silent routes: 2 accepting computations
TWO_WAY_A = Pda(
    states=("s", "l", "r", "f"),
    input_alphabet=("a",),
    stack_alphabet=("Z",),
    init_stack="Z",
    finals=frozenset({"f"}),
    moves=(
        ("consume", "s", None, "Z", "l"),
        ("consume", "s", None, "Z", "r"),
        ("consume", "l", "a", "Z", "f"),
        ("consume", "r", "a", "Z", "f"),
    ),
)

# balanced-bracket-ish: a pushes, b pops, accept at the base (Dyck prefix)
DYCK = Pda(
    states=("run", "run@a", "run@b"),
    input_alphabet=("a", "b"),
    stack_alphabet=("Z", "X"),
    init_stack="Z",
    finals=frozenset({"run"}),
    moves=(
        ("consume", "run", "a", "Z", "run@a"),
        ("consume", "run", "a", "X", "run@a"),
        ("push", "run@a", "Z", "X", "run"),
        ("push", "run@a", "X", "X", "run"),
        ("consume", "run", "b", "X", "run@b"),
        ("pop", "run@b", "X", "run"),
    ),
)


def dyck_member(w):
    height = 0
    for ch in w:
        height += 1 if ch == "a" else -1
        if height < 0:
            return False
    return height == 0 and len(w) >= 1


class TestSurfaceConfigs:
    def test_product_count(self):
        m = TWO_WAY_A
        assert len(surface_configs(m, 2)) == 4 * 1 * 3

    def test_two_state_two_symbol(self):
        m = Pda(("p", "q"), ("a",), ("Z", "X"), "Z", frozenset({"q"}), ())
        assert len(surface_configs(m, 2)) == 12

    def test_zero_length(self):
        m = Pda(("p", "q"), ("a",), ("Z", "X"), "Z", frozenset({"q"}), ())
        assert len(surface_configs(m, 0)) == 4

    def test_no_duplicates(self):
        configs = surface_configs(ANBN, 3)
        assert len(configs) == len(set(configs))


class TestComputationSearch:
    def test_anbn_counts(self):
        assert count_accepting(ANBN, "ab") == 1
        assert count_accepting(ANBN, "aabb") == 1
        assert count_accepting(ANBN, "abab") == 0
        assert count_accepting(ANBN, "") == 0

    def test_two_routes(self):
        assert count_accepting(TWO_WAY_A, "a") == 2

    def test_budget_guard(self):
        looping = Pda(
            states=("s",),
            input_alphabet=("a",),
            stack_alphabet=("Z",),
            init_stack="Z",
            finals=frozenset({"s"}),
            moves=(("consume", "s", None, "Z", "s"),),
        )
        with pytest.raises(SizeGuard):
            count_accepting(looping, "a")


class TestSliceGrammar:
    @pytest.mark.parametrize("n", range(1, 7))
    def test_anbn_language_agreement(self, n):
        sliced = build_slice_grammar(ANBN, n)
        derived = {
            w for w in words_of("ab", n) if earley_count(sliced.grammar, w) > 0
        }
        accepted = {w for w in words_of("ab", n) if anbn_member(w)}
        assert derived == accepted

    @pytest.mark.parametrize("n", range(1, 7))
    def test_dyck_language_agreement(self, n):
        sliced = build_slice_grammar(DYCK, n)
        derived = {
            w for w in words_of("ab", n) if earley_count(sliced.grammar, w) > 0
        }
        accepted = {w for w in words_of("ab", n) if dyck_member(w)}
        assert accepted == {w for w in words_of("ab", n) if pda_accepts(DYCK, w)}
        assert derived == accepted

    def test_two_route_machine(self):
        sliced = build_slice_grammar(TWO_WAY_A, 1)
        count = earley_count(sliced.grammar, "a")
        assert 1 <= count <= count_accepting(TWO_WAY_A, "a")

    @pytest.mark.parametrize("machine,member", [(ANBN, anbn_member), (DYCK, dyck_member)])
    @pytest.mark.parametrize("n", range(1, 6))
    def test_ambiguity_domination(self, machine, member, n):
        sliced = build_slice_grammar(machine, n)
        for w in words_of("ab", n):
            trees = earley_count(sliced.grammar, w)
            computations = count_accepting(machine, w)
            assert trees <= computations

    def test_prune_statistics_recorded(self):
        sliced = build_slice_grammar(ANBN, 2)
        assert sliced.pruned_variables > 0
        assert sliced.raw_productions > 0
        assert sliced.pruned_variables <= sliced.raw_variables

    def test_grammar_size_scales_polynomially(self):
        sizes = []
        for n in (2, 3, 4):
            g = build_slice_grammar(ANBN, n).grammar
            sizes.append(
                sum(len(g.binary[a]) + len(g.unary[a]) for a in g.variables)
            )
        # cubic-ish growth, nothing exponential
        assert sizes[2] <= sizes[0] * (4 / 2) ** 4


class TestSampling:
    def test_unambiguous_unique_word(self):
        w = pda_sample(ANBN, 4, Bound(const=1), CoinSource(1))
        assert w in ("aabb", FAIL)
        got = {pda_sample(ANBN, 4, Bound(const=1), CoinSource(s)) for s in range(12)}
        assert "aabb" in got

    def test_two_route_uniform_over_slice(self):
        desc = pda_slice_description(TWO_WAY_A, 1, Bound(const=2))
        values = set()
        for seed in range(12):
            w = sample_described(desc, 1, CoinSource(seed))
            if w is not FAIL:
                values.add(w)
        assert values == {"a"}

    def test_dyck_census_estimate(self):
        n = 6
        brute = sum(1 for w in words_of("ab", n) if dyck_member(w))
        hits = 0
        runs = 25
        for seed in range(runs):
            est = pda_census_estimate(
                DYCK, n, Bound(coeff=1, power=1, const=1), Fraction(1, 2), CoinSource(seed)
            )
            assert est is not FAIL
            if Fraction(brute, 2) <= est <= Fraction(3 * brute, 2):
                hits += 1
        assert hits / runs > 0.6

    def test_sampled_words_are_members(self):
        desc = pda_slice_description(DYCK, 4, Bound(coeff=1, power=1, const=1))
        for seed in range(30):
            w = sample_described(desc, 4, CoinSource(seed))
            if w is not FAIL:
                assert dyck_member(w)


class TestLoader:
    TEXT = """
state s f
input a
stack Z
init Z
final f
consume s a Z f
"""

    def test_load(self):
        m = load_pda(self.TEXT)
        assert m.start_state == "s"
        assert count_accepting(m, "a") == 1
        assert not pda_accepts(m, "aa")

    def test_silent_move_dash(self):
        m = load_pda(self.TEXT + "consume f - Z s\n")
        assert any(move[2] is None for move in m.moves if move[0] == "consume")

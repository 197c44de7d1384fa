"""Trace normal forms, class sizes, and representative counting."""

from fractions import Fraction
from itertools import product as iproduct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from countgen.coins import FAIL, CoinSource
from countgen.describe import Bound, estimate_census, sample_described
from countgen.dfa import dfa_census, dfa_from_regex
from countgen.exceptions import AmbiguityExceeded
from countgen.traces import (
    class_size,
    count_representatives,
    indep_alphabet,
    load_indep,
    normal_form,
    swap_closure,
    trace_description,
)


AB_FREE = indep_alphabet("ab", [("a", "b")])
RIGID = indep_alphabet("ab", [])
CHAIN = indep_alphabet("abc", [("a", "b"), ("b", "c")])

# the flagship language: (a*c)*(ab)*c(a*c)* with a,b and b,c independent
FLAGSHIP_DFA = dfa_from_regex("(a*c)*(ab)*c(a*c)*", alphabet="abc")


def words_of(alphabet, n):
    return ("".join(t) for t in iproduct(alphabet, repeat=n))


class TestNormalForm:
    def test_swap_pair(self):
        assert normal_form("ba", AB_FREE) == "ab"

    def test_rigid(self):
        assert normal_form("ba", RIGID) == "ba"
        assert normal_form("ab", RIGID) == "ab"

    def test_chain_class(self):
        assert swap_closure("abc", CHAIN) == {"abc", "bac", "acb"}
        assert normal_form("abc", CHAIN) == "abc"
        assert normal_form("bac", CHAIN) == "abc"
        assert normal_form("acb", CHAIN) == "abc"

    @pytest.mark.parametrize("alph", [AB_FREE, RIGID, CHAIN])
    def test_idempotent_and_class_invariant(self, alph):
        for n in range(1, 6):
            for w in words_of(alph.symbols, n):
                nf = normal_form(w, alph)
                assert normal_form(nf, alph) == nf
                cls = swap_closure(w, alph)
                assert nf == min(cls)
                assert all(normal_form(v, alph) == nf for v in cls)

    @given(st.text(alphabet="abc", min_size=1, max_size=7))
    @settings(max_examples=60)
    def test_least_member_property(self, w):
        nf = normal_form(w, CHAIN)
        assert nf in swap_closure(w, CHAIN)
        assert nf == min(swap_closure(w, CHAIN))


class TestClassSize:
    def test_rigid_singleton(self):
        assert class_size("abab", RIGID) == 1

    def test_free_pair(self):
        assert class_size("ab", AB_FREE) == 2

    def test_chain_triple(self):
        assert class_size("abc", CHAIN) == 3

    @pytest.mark.parametrize("alph", [AB_FREE, RIGID, CHAIN])
    def test_matches_swap_closure(self, alph):
        for n in range(1, 7):
            for w in words_of(alph.symbols, n):
                assert class_size(w, alph) == len(swap_closure(w, alph))


class TestCountRepresentatives:
    def test_full_language_gives_class_size(self):
        full = dfa_from_regex("(a|b|c)*", alphabet="abc")
        for w in ("abc", "bca", "aabc"):
            assert count_representatives(full, w, CHAIN) == class_size(w, CHAIN)

    def test_singleton_language(self):
        just_ab = dfa_from_regex("ab")
        assert count_representatives(just_ab, "ba", AB_FREE) == 1
        assert count_representatives(just_ab, "ab", AB_FREE) == 1

    @pytest.mark.parametrize("n", range(1, 8))
    def test_flagship_matches_brute_force(self, n):
        for w in words_of("abc", n):
            brute = sum(
                FLAGSHIP_DFA.accepts(v) for v in swap_closure(w, CHAIN)
            )
            if brute or FLAGSHIP_DFA.accepts(w):
                assert count_representatives(FLAGSHIP_DFA, w, CHAIN) == brute

    def test_flagship_matches_brute_force_n8(self):
        # at n = 8 restrict to the traces that actually meet the language
        traces_seen = {
            normal_form(w, CHAIN)
            for w in words_of("abc", 8)
            if FLAGSHIP_DFA.accepts(w)
        }
        assert traces_seen
        for t in traces_seen:
            brute = sum(FLAGSHIP_DFA.accepts(v) for v in swap_closure(t, CHAIN))
            assert count_representatives(FLAGSHIP_DFA, t, CHAIN) == brute

    @pytest.mark.parametrize("n", range(1, 8))
    def test_partition_identity(self, n):
        # summing representative counts over distinct traces recovers the
        # slice census of the string language
        table = dfa_census(FLAGSHIP_DFA, n)
        slice_size = table.count(FLAGSHIP_DFA.start, n)
        traces = {
            normal_form(w, CHAIN)
            for w in words_of("abc", n)
            if FLAGSHIP_DFA.accepts(w)
        }
        total = sum(
            count_representatives(FLAGSHIP_DFA, t, CHAIN) for t in traces
        )
        assert total == slice_size

    def test_transitive_independence_unambiguous(self):
        # with a transitive (here: complete-on-{a,b}) independence the
        # closure of this language stays 1-ambiguous on small slices
        lang = dfa_from_regex("(ab)*")
        for n in (2, 4, 6):
            for w in words_of("ab", n):
                if lang.accepts(w):
                    nf = normal_form(w, AB_FREE)
                    assert count_representatives(lang, nf, AB_FREE) == 1


class TestTraceDescription:
    def test_empty_independence_reduces_to_strings(self):
        lang = dfa_from_regex("(a|b)*")
        desc = trace_description(lang, RIGID, Bound(const=1))
        got = {sample_described(desc, 2, CoinSource(s)) for s in range(40)}
        got.discard(FAIL)
        assert got == {"aa", "ab", "ba", "bb"}

    def test_two_word_class_single_trace(self):
        lang = dfa_from_regex("ab|ba")
        desc = trace_description(lang, AB_FREE, Bound(const=2))
        assert desc.ambiguity("ab") == 2
        for seed in range(10):
            w = sample_described(desc, 2, CoinSource(seed))
            if w is not FAIL:
                assert w == "ab"

    def test_flagship_census_estimate(self):
        bound = Bound(coeff=1, power=1, const=1)
        desc = trace_description(FLAGSHIP_DFA, CHAIN, bound)
        n = 4
        brute = len(
            {
                normal_form(w, CHAIN)
                for w in words_of("abc", n)
                if FLAGSHIP_DFA.accepts(w)
            }
        )
        hits = 0
        runs = 40
        for seed in range(runs):
            est = estimate_census(desc, n, Fraction(1, 2), CoinSource(seed))
            assert est is not FAIL
            if Fraction(brute, 2) <= est <= Fraction(3 * brute, 2):
                hits += 1
        assert hits / runs > 0.7

    def test_ambiguity_guard(self):
        lang = dfa_from_regex("ab|ba")
        desc = trace_description(lang, AB_FREE, Bound(const=1))
        with pytest.raises(AmbiguityExceeded):
            desc.ambiguity("ab")


class TestLoader:
    def test_indep_lines(self):
        alph = load_indep("indep a b\nindep b c\n", "abc")
        assert alph.independent("a", "b")
        assert alph.independent("c", "b")
        assert not alph.independent("a", "c")

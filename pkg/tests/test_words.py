import itertools

import numpy as np
import pytest

from chenflow.words import (
    Alphabet,
    EMPTY_WORD,
    Word,
    all_words_upto,
    card_words,
    dagger,
    hasse_tree,
    order_vector,
    preceq,
    strip_suffix,
)


def brute_right_factor(zeta: Word, eta: Word) -> bool:
    """Check zeta <= eta by trying every left-shift of eta."""
    for cut in range(len(eta.letters) + 1):
        if eta.letters[cut:] == zeta.letters:
            return True
    return False


class TestCardWords:
    def test_known_counts(self):
        assert card_words(2, 2) == 13
        assert card_words(1, 0) == 1
        assert card_words(1, 3) == 15
        assert card_words(1, 2) == 7

    def test_single_letter_alphabet(self):
        # m = 0 leaves only powers of the lone letter
        assert card_words(0, 3) == 4
        assert card_words(0, 0) == 1

    @pytest.mark.parametrize("m", [1, 2, 3])
    @pytest.mark.parametrize("J", range(6))
    def test_matches_enumeration(self, m, J):
        assert card_words(m, J) == len(all_words_upto(Alphabet(m), J))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            card_words(-1, 2)
        with pytest.raises(ValueError):
            card_words(1, -1)


class TestOrderVector:
    def test_two_control_letters_degree_two(self):
        ov = order_vector(Alphabet(2), 2)
        assert ov.render() == [
            "e", "x0", "x0x0", "x1x0", "x2x0", "x1", "x0x1", "x1x1",
            "x2x1", "x2", "x0x2", "x1x2", "x2x2",
        ]

    def test_degree_zero(self):
        for m in [0, 1, 2]:
            ov = order_vector(Alphabet(m), 0)
            assert list(ov) == [EMPTY_WORD]

    def test_degree_one(self):
        ov = order_vector(Alphabet(1), 1)
        assert ov.render() == ["e", "x0", "x1"]

    def test_driftless_single_letter(self):
        ov = order_vector(Alphabet(1, drift=False), 3)
        assert len(ov) == 4
        assert ov.render() == ["e", "x1", "x1x1", "x1x1x1"]

    @pytest.mark.parametrize("m", [1, 2, 3])
    @pytest.mark.parametrize("J", range(6))
    def test_complete_and_distinct(self, m, J):
        alphabet = Alphabet(m)
        ov = order_vector(alphabet, J)
        assert len(ov) == card_words(m, J)
        assert len(set(ov.words)) == len(ov)
        assert set(ov.words) == all_words_upto(alphabet, J)

    @pytest.mark.parametrize("m", [1, 2])
    @pytest.mark.parametrize("J", range(4))
    def test_right_concatenation_recursion(self, m, J):
        alphabet = Alphabet(m)
        prev = order_vector(alphabet, J)
        ov = order_vector(alphabet, J + 1)
        expected = [EMPTY_WORD]
        for letter in alphabet.letters:
            expected.extend(w.append(letter) for w in prev)
        assert list(ov) == expected

    def test_index_lookup(self):
        ov = order_vector(Alphabet(2), 2)
        for i, w in enumerate(ov):
            assert ov.index(w) == i
        with pytest.raises(KeyError):
            ov.index(Word((0, 0, 0)))

    @pytest.mark.parametrize("m", [1, 2])
    def test_dfs_extends_partial_order(self, m):
        # any right factor appears no later than the word itself
        ov = order_vector(Alphabet(m), 3)
        for j, wj in enumerate(ov):
            for k, wk in enumerate(ov):
                if preceq(wk, wj):
                    assert k <= j


class TestPrefixOrder:
    def test_reflexive_examples(self):
        for w in [EMPTY_WORD, Word((0,)), Word((1, 0, 2))]:
            assert preceq(w, w)

    def test_right_factor(self):
        assert preceq(Word((0,)), Word((1, 0)))
        assert not preceq(Word((0, 1)), Word((1, 0)))

    def test_against_left_shift_oracle(self):
        rng = np.random.default_rng(7)
        alphabet = Alphabet(2)
        words = [
            Word(tuple(rng.integers(0, alphabet.size, size=rng.integers(0, 5))))
            for _ in range(60)
        ]
        for zeta, eta in itertools.product(words, repeat=2):
            assert preceq(zeta, eta) == brute_right_factor(zeta, eta)

    def test_partial_order_axioms(self):
        rng = np.random.default_rng(11)
        words = [
            Word(tuple(rng.integers(0, 3, size=rng.integers(0, 4))))
            for _ in range(25)
        ]
        for a in words:
            assert preceq(a, a)
        for a, b in itertools.product(words, repeat=2):
            if preceq(a, b) and preceq(b, a):
                assert a == b
        for a, b, c in itertools.product(words, repeat=3):
            if preceq(a, b) and preceq(b, c):
                assert preceq(a, c)

    def test_right_concatenation_is_order_embedding(self):
        rng = np.random.default_rng(13)
        words = [
            Word(tuple(rng.integers(0, 3, size=rng.integers(0, 4))))
            for _ in range(20)
        ]
        for zeta, gamma, eta in itertools.product(words[:10], words[:10], words):
            lhs = preceq(zeta, gamma)
            rhs = preceq(zeta.concat(eta), gamma.concat(eta))
            assert lhs == rhs

    def test_strip_suffix(self):
        assert strip_suffix(Word((1, 0)), Word((0,))) == Word((1,))
        assert strip_suffix(Word((1, 0)), EMPTY_WORD) == Word((1, 0))
        assert strip_suffix(Word((1, 0)), Word((1,))) is None


class TestColoredTree:
    def test_preorder_matches_order_vector(self):
        for m, depth in [(1, 3), (2, 2), (0, 4)]:
            alphabet = Alphabet(m)
            tree = hasse_tree(alphabet, depth)
            labels = [node.label for node in tree.preorder()]
            assert labels == list(order_vector(alphabet, depth))

    def test_leaves_are_full_length_words(self):
        alphabet = Alphabet(2)
        tree = hasse_tree(alphabet, 2)
        leaves = {leaf.label for leaf in tree.leaves()}
        assert leaves == {
            w for w in all_words_upto(alphabet, 2) if len(w) == 2
        }

    def test_child_prepends_letter(self):
        tree = hasse_tree(Alphabet(2), 2)
        for node in tree.preorder():
            for color, child in enumerate(node.children):
                assert child.label == node.label.prepend(color)


class TestDagger:
    def test_depth_one_times_depth_two(self):
        alphabet = Alphabet(1)
        c1, c2, c3 = (hasse_tree(alphabet, d) for d in (1, 2, 3))
        assert dagger(c1, c2) == c3

    def test_unit(self):
        alphabet = Alphabet(2)
        c0 = hasse_tree(alphabet, 0)
        for depth in range(3):
            cj = hasse_tree(alphabet, depth)
            assert dagger(c0, cj) == cj
            assert dagger(cj, c0) == cj

    def test_commutativity(self):
        alphabet = Alphabet(2)
        c1 = hasse_tree(alphabet, 1)
        c2 = hasse_tree(alphabet, 2)
        assert dagger(c1, c2) == dagger(c2, c1)

    @pytest.mark.parametrize("i,j", [(0, 0), (0, 2), (1, 1), (1, 2), (2, 1), (3, 0)])
    def test_depth_additivity(self, i, j):
        alphabet = Alphabet(1)
        product = dagger(hasse_tree(alphabet, i), hasse_tree(alphabet, j))
        assert product.depth == i + j
        assert product == hasse_tree(alphabet, i + j)

    def test_associativity_small_depths(self):
        alphabet = Alphabet(1)
        for i, j, k in itertools.product(range(2), repeat=3):
            a, b, c = (hasse_tree(alphabet, d) for d in (i, j, k))
            assert dagger(dagger(a, b), c) == dagger(a, dagger(b, c))

"""Alphabets, noncommutative words, and their canonical ordering.

Words over a finite alphabet index the monomials of a noncommutative
formal power series.  Everything downstream (iterated-sum regressors,
concatenation matrices) is indexed by the *order vector*: the list of
all words of length <= J, enumerated by a depth-first traversal of the
Hasse diagram of the prefix partial order.  The order vector satisfies
the right-concatenation recursion

    chi^0 = [e],   chi^(J+1) = [e, chi^J x0, chi^J x1, ..., chi^J xm],

which is also what makes the block-inductive construction of the
concatenation matrix line up index-for-index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

__all__ = [
    "Alphabet",
    "Word",
    "EMPTY_WORD",
    "OrderVector",
    "ColoredTree",
    "card_words",
    "order_vector",
    "preceq",
    "strip_suffix",
    "hasse_tree",
    "dagger",
]


@dataclass(frozen=True)
class Alphabet:
    """Finite alphabet of noncommuting letters.

    The standard control alphabet has a drift letter x0 (paired with the
    constant input u0 = 1) plus m control letters x1..xm.  A drift-free
    alphabet (used for plants with no drift in the identified channel)
    has letters x1..xm only.
    """

    m: int
    drift: bool = True

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValueError(f"letter count m must be >= 0, got {self.m}")
        if self.size < 1:
            raise ValueError("alphabet must contain at least one letter")

    @property
    def size(self) -> int:
        """Number of letters."""
        return self.m + 1 if self.drift else self.m

    @property
    def letters(self) -> range:
        """Positional letter indices 0..size-1."""
        return range(self.size)

    def subscript(self, letter: int) -> int:
        """Display subscript of a positional letter index."""
        return letter if self.drift else letter + 1

    def word_str(self, word: "Word") -> str:
        """Render a word like "x1x0"; the empty word renders as "e"."""
        if not word.letters:
            return "e"
        return "".join(f"x{self.subscript(k)}" for k in word.letters)


@dataclass(frozen=True)
class Word:
    """A finite sequence of letters, leftmost letter first.

    The word x_a x_b is stored as letters (a, b).  Concatenation zw
    appends w's letters after z's, so "right factor" means suffix of the
    letter tuple.
    """

    letters: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        return "".join(f"x{k}" for k in self.letters)

    def concat(self, other: "Word") -> "Word":
        """Concatenation self * other (other's letters on the right)."""
        return Word(self.letters + other.letters)

    def append(self, letter: int) -> "Word":
        """Right-concatenate a single letter."""
        return Word(self.letters + (letter,))

    def prepend(self, letter: int) -> "Word":
        """Left-concatenate a single letter (the Hasse-tree child step)."""
        return Word((letter,) + self.letters)


EMPTY_WORD = Word(())


def preceq(zeta: Word, eta: Word) -> bool:
    """Prefix partial order: zeta <= eta iff eta = gamma * zeta for some gamma.

    Equivalently, zeta is a right factor of eta.
    """
    n = len(zeta.letters)
    if n > len(eta.letters):
        return False
    return n == 0 or eta.letters[-n:] == zeta.letters


def strip_suffix(eta: Word, zeta: Word) -> Word | None:
    """Return gamma with eta = gamma * zeta, or None if zeta is not a right factor."""
    if not preceq(zeta, eta):
        return None
    n = len(eta.letters) - len(zeta.letters)
    return Word(eta.letters[:n])


def card_words(m: int, J: int) -> int:
    """Number of words of length <= J over the standard alphabet {x0..xm}.

    Equals sum_{k=0}^{J} (m+1)^k = ((m+1)^(J+1) - 1)/m for m >= 1 and
    J + 1 for m = 0 (only powers of the single letter).
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if J < 0:
        raise ValueError(f"J must be >= 0, got {J}")
    if m == 0:
        return J + 1
    return ((m + 1) ** (J + 1) - 1) // m


@dataclass(frozen=True, eq=False)
class OrderVector:
    """All words of length <= degree in depth-first order.

    entries[0] is the empty word; the blocks after it are the previous
    degree's order vector right-concatenated with each letter in turn.
    Equality and hashing are by identity: order vectors are built once
    and shared.
    """

    alphabet: Alphabet
    degree: int
    words: tuple[Word, ...]
    _index: dict[Word, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __getitem__(self, i: int) -> Word:
        return self.words[i]

    def index(self, word: Word) -> int:
        """Position of a word; raises KeyError if longer than the degree."""
        return self._index[word]

    def __contains__(self, word: Word) -> bool:
        return word in self._index

    def render(self) -> list[str]:
        """Display strings of all entries, in order."""
        return [self.alphabet.word_str(w) for w in self.words]


def order_vector(alphabet: Alphabet, J: int) -> OrderVector:
    """Build the degree-J order vector by the right-concatenation recursion."""
    if J < 0:
        raise ValueError(f"degree must be >= 0, got {J}")
    words: list[Word] = [EMPTY_WORD]
    for _ in range(J):
        prev = words
        words = [EMPTY_WORD]
        for letter in alphabet.letters:
            words.extend(w.append(letter) for w in prev)
    index = {w: i for i, w in enumerate(words)}
    if len(index) != len(words):
        raise AssertionError("order vector entries are not distinct")
    return OrderVector(alphabet, J, tuple(words), index)


@dataclass(frozen=True)
class ColoredTree:
    """Node of the colored Hasse tree of the prefix order.

    children[k] is the subtree reached through the edge colored k, whose
    root is the current label with letter k prepended.  A leaf has no
    children.  Structural equality (labels, colors, shape) is dataclass
    equality.
    """

    label: Word
    children: tuple["ColoredTree", ...] = ()

    @property
    def depth(self) -> int:
        if not self.children:
            return 0
        return 1 + max(c.depth for c in self.children)

    def preorder(self):
        """Depth-first traversal, children in color order."""
        yield self
        for child in self.children:
            yield from child.preorder()

    def leaves(self):
        if not self.children:
            yield self
        else:
            for child in self.children:
                yield from child.leaves()


def hasse_tree(alphabet: Alphabet, depth: int) -> ColoredTree:
    """The full Hasse tree of words of length <= depth, rooted at the empty word."""
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")

    def grow(label: Word, remaining: int) -> ColoredTree:
        if remaining == 0:
            return ColoredTree(label)
        children = tuple(
            grow(label.prepend(k), remaining - 1) for k in alphabet.letters
        )
        return ColoredTree(label, children)

    return grow(EMPTY_WORD, depth)


def _graft(tree: ColoredTree, beta: Word) -> ColoredTree:
    """Copy of tree with every label right-concatenated with beta."""
    return ColoredTree(
        tree.label.concat(beta),
        tuple(_graft(c, beta) for c in tree.children),
    )


def dagger(a: ColoredTree, b: ColoredTree) -> ColoredTree:
    """Leaf-substitution product: replace each leaf beta of a by b grafted onto beta.

    The product of the depth-i and depth-j Hasse trees is the depth-(i+j)
    tree, making tree depth additive under the product.
    """
    if not a.children:
        return _graft(b, a.label)
    return ColoredTree(a.label, tuple(dagger(c, b) for c in a.children))


def all_words_upto(alphabet: Alphabet, J: int) -> set[Word]:
    """Brute-force enumeration of words of length <= J (test oracle)."""
    out: set[Word] = set()
    for k in range(J + 1):
        for combo in itertools.product(alphabet.letters, repeat=k):
            out.add(Word(combo))
    return out

"""Truncated discrete-time Chen series over iterated sums.

A sampled input record u_hat(0), u_hat(1), ... (each sample a vector of
per-letter areas) generates a word-indexed family of iterated sums

    S_e[u](N) = 1,
    S_{x_i w}[u](N) = sum_{k=0}^{N} u_hat_i(k) S_w[u](k).

Collecting all words of length <= J in order-vector indexing, the series
acts on itself by left concatenation; the matrix of that action for a
single sample is unit lower triangular, and the running product

    Pi(N) = S(N) S(N-1) ... S(0)

carries the entire truncated series: its first column is the regressor
phi(N) = [S_{eta_1}(N), ..., S_{eta_l}(N)].  The production state keeps
just that column and updates it as phi <- S(N+1) phi; a debug mode
retains the full matrix for structural checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .words import OrderVector, Word, strip_suffix

__all__ = [
    "iterated_sum",
    "s_matrix",
    "s_matrix_inductive",
    "ChenState",
    "chen_init",
    "chen_step",
    "regressor",
    "evaluate",
    "predict_next",
    "prediction_weights",
    "coefficient_monomials",
    "is_unit_lower_triangular",
]


def _check_sample(sample, order: OrderVector) -> np.ndarray:
    u = np.asarray(sample, dtype=float)
    if u.shape != (order.alphabet.size,):
        raise ValueError(
            f"sample has shape {u.shape}, expected ({order.alphabet.size},)"
        )
    return u


def iterated_sum(word, samples, N: int) -> float:
    """Reference evaluation of S_word[u](N) directly from the recursion.

    samples is an array of shape (T, K) whose row k is u_hat(k); the sum
    starts at k = 0 and runs through k = N.  Independent of the matrix
    construction, so it serves as the oracle for it.
    """
    u = np.asarray(samples, dtype=float)
    if u.ndim != 2:
        raise ValueError("samples must be a 2-d array of rows u_hat(k)")
    if not 0 <= N < u.shape[0]:
        raise IndexError(f"sample index {N} outside the record 0..{u.shape[0] - 1}")
    letters = word.letters if hasattr(word, "letters") else tuple(word)
    s = np.ones(N + 1)
    for letter in reversed(letters):
        s = np.cumsum(u[: N + 1, letter] * s)
    return float(s[-1])


@lru_cache(maxsize=None)
def _suffix_splits(order: OrderVector):
    """All (j, k, p) with eta_j = eta_p * eta_k, as index arrays.

    Every split of every word contributes one matrix entry, so this is
    exactly the sparsity pattern of the concatenation matrix, with p the
    index of the prefix word whose monomial fills the entry.
    """
    js, ks, ps = [], [], []
    for j, wj in enumerate(order.words):
        n = len(wj.letters)
        for cut in range(n + 1):
            js.append(j)
            ks.append(order.index(Word(wj.letters[cut:])))
            ps.append(order.index(Word(wj.letters[:cut])))
    return np.array(js), np.array(ks), np.array(ps)


def s_matrix(sample, order: OrderVector) -> np.ndarray:
    """Direct construction of the one-sample concatenation matrix.

    Entry (j, k) is the monomial of the prefix gamma with
    eta_j = gamma * eta_k, i.e. the product of the sample values over
    gamma's letters, and 0 when eta_k is not a right factor of eta_j.
    Kept deliberately independent of the block-inductive construction.
    """
    u = _check_sample(sample, order)
    l = len(order)
    S = np.zeros((l, l))
    for j, wj in enumerate(order.words):
        for k, wk in enumerate(order.words):
            prefix = strip_suffix(wj, wk)
            if prefix is not None:
                S[j, k] = float(np.prod(u[list(prefix.letters)])) if prefix.letters else 1.0
    return S


def s_matrix_inductive(sample, order: OrderVector) -> np.ndarray:
    """Block-inductive construction of the concatenation matrix.

    Starting from the 1x1 base, each step places a 1 in the corner, the
    Kronecker product of the sample with the previous first column below
    it, and one copy of the previous matrix per letter on the block
    diagonal.  Index order matches the order vector by construction.
    """
    u = _check_sample(sample, order)
    K = order.alphabet.size
    S = np.ones((1, 1))
    for _ in range(order.degree):
        l = S.shape[0]
        out = np.zeros((1 + K * l, 1 + K * l))
        out[0, 0] = 1.0
        out[1:, 0] = np.kron(u, S[:, 0])
        for b in range(K):
            out[1 + b * l: 1 + (b + 1) * l, 1 + b * l: 1 + (b + 1) * l] = S
        S = out
    return S


def coefficient_monomials(samples, order: OrderVector) -> np.ndarray:
    """Per-word sample monomials u_hat_eta for a batch of samples.

    samples has shape (n, K); the result has shape (n, l) with column p
    holding the product of sample values over the letters of eta_p (1
    for the empty word).  This is the first column of the concatenation
    matrix of each sample, built by the order-vector block recursion.
    """
    U = np.atleast_2d(np.asarray(samples, dtype=float))
    if U.shape[1] != order.alphabet.size:
        raise ValueError(
            f"samples have {U.shape[1]} channels, expected {order.alphabet.size}"
        )
    n = U.shape[0]
    C = np.ones((n, 1))
    for _ in range(order.degree):
        blocks = [np.ones((n, 1))]
        blocks.extend(U[:, k: k + 1] * C for k in range(order.alphabet.size))
        C = np.hstack(blocks)
    return C


@dataclass(frozen=True)
class ChenState:
    """Running truncated Chen series after absorbing samples 0..n.

    phi is the first column of the representation matrix (the regressor);
    pi is the full matrix when the state was built with keep_matrix=True,
    else None.
    """

    order: OrderVector
    phi: np.ndarray
    n: int
    pi: np.ndarray | None = None


def chen_init(order: OrderVector, sample, keep_matrix: bool = False) -> ChenState:
    """State holding the single-sample series (sample index 0).

    Feeding the all-zeros sample yields the identity representation, the
    natural starting point when the record's samples begin at index 1.
    """
    S = s_matrix_inductive(sample, order)
    return ChenState(order, S[:, 0].copy(), 0, S if keep_matrix else None)


def chen_step(state: ChenState, sample) -> ChenState:
    """Absorb the next sample: one left-multiplication by its matrix."""
    S = s_matrix_inductive(sample, state.order)
    if state.pi is not None:
        pi = S @ state.pi
        return ChenState(state.order, pi[:, 0].copy(), state.n + 1, pi)
    return ChenState(state.order, S @ state.phi, state.n + 1, None)


def regressor(state: ChenState) -> np.ndarray:
    """The iterated-sum vector [S_{eta_1}(N), ..., S_{eta_l}(N)]."""
    return state.phi


def _check_theta(theta, order: OrderVector) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    if t.shape != (len(order),):
        raise ValueError(f"coefficient vector has shape {t.shape}, expected ({len(order)},)")
    return t


def evaluate(theta, state: ChenState) -> float:
    """Truncated series output: inner product of coefficients with the regressor."""
    t = _check_theta(theta, state.order)
    return float(t @ state.phi)


def predict_next(theta, state: ChenState, next_sample) -> float:
    """Output after one more sample, without advancing the state.

    Algebraically identical to evaluate(theta, chen_step(state, next)),
    but leaves the state untouched; this is the controller's cost kernel,
    a polynomial in the components of the candidate sample.
    """
    t = _check_theta(theta, state.order)
    S = s_matrix_inductive(next_sample, state.order)
    return float(t @ (S @ state.phi))


def prediction_weights(theta, state: ChenState) -> np.ndarray:
    """Coefficients w of the one-step prediction polynomial.

    predict_next(theta, state, u) equals coefficient_monomials(u) @ w:
    each (prefix, suffix) split of each word routes theta[j] * phi[k]
    onto the prefix's monomial.  Lets a batch of candidate samples be
    costed in O(l) each after O(splits) setup.
    """
    t = _check_theta(theta, state.order)
    js, ks, ps = _suffix_splits(state.order)
    w = np.zeros(len(state.order))
    np.add.at(w, ps, t[js] * state.phi[ks])
    return w


def is_unit_lower_triangular(M: np.ndarray, tol: float = 0.0) -> bool:
    """Check ones on the diagonal and zeros strictly above it."""
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    if np.max(np.abs(np.diag(M) - 1.0)) > tol:
        return False
    upper = np.triu(M, k=1)
    return bool(np.max(np.abs(upper), initial=0.0) <= tol)

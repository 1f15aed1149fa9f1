import itertools

import numpy as np
import pytest

from fbgnn import codes
from fbgnn.css import CssCode


@pytest.fixture(scope="session")
def steane() -> CssCode:
    return codes.steane()


@pytest.fixture(scope="session")
def hgp_small() -> CssCode:
    return codes.hgp_rep2()


@pytest.fixture(scope="session")
def hgp_medium() -> CssCode:
    return codes.hgp_hamming()


def brute_force_marginals(hx: np.ndarray, hz: np.ndarray, priors: np.ndarray,
                          sx: np.ndarray, sz: np.ndarray) -> np.ndarray:
    """Exact syndrome-conditioned posterior LLR triples by enumerating all 4^n
    Pauli errors.  Completely independent of the message-passing code paths."""
    n = hx.shape[1]
    digits = np.array(
        list(itertools.product(range(4), repeat=n)), dtype=np.int64
    )  # 0=I, 1=X, 2=Y, 3=Z; qubit 0 is the most significant digit here
    ex = ((digits == 1) | (digits == 2)).astype(np.int64)
    ez = ((digits == 2) | (digits == 3)).astype(np.int64)
    llrs = np.concatenate([np.zeros((n, 1)), np.asarray(priors, dtype=np.float64)], axis=1)
    probs = np.exp(-llrs)
    probs /= probs.sum(axis=1, keepdims=True)
    weight = np.prod(probs[np.arange(n)[None, :], digits], axis=1)
    ok = np.ones(len(digits), dtype=bool)
    if hx.shape[0]:
        ok &= ((ez @ hx.T) % 2 == sz).all(axis=1)
    if hz.shape[0]:
        ok &= ((ex @ hz.T) % 2 == sx).all(axis=1)
    weight = weight * ok
    marg = np.zeros((n, 4))
    for q in range(n):
        for c in range(4):
            marg[q, c] = weight[digits[:, q] == c].sum()
    if (marg <= 0).any():
        raise ValueError("some Pauli category has zero posterior mass")
    return np.log(marg[:, :1]) - np.log(marg[:, 1:])


def brute_force_in_rowspace(rows: np.ndarray, v: np.ndarray) -> bool:
    """Membership by enumerating all 2^m row combinations."""
    m = rows.shape[0]
    for bits in range(1 << m):
        acc = np.zeros(rows.shape[1], dtype=np.int64)
        for i in range(m):
            if (bits >> i) & 1:
                acc ^= rows[i].astype(np.int64)
        if np.array_equal(acc % 2, np.asarray(v) % 2):
            return True
    return False

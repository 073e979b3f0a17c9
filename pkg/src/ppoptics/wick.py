"""Exact combinatorial and linear-algebra primitives.

Determinants, permanents, alpha-determinants, enumeration of pair
contractions, and the Wick expansion of an even product of ladder
operators into a signed sum over contractions.
"""

import itertools
from dataclasses import dataclass

import numpy as np

PERMANENT_MAX_DIM = 30
ALPHA_DET_MAX_DIM = 10
CONTRACTION_MAX_ORDER = 16


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def determinant(m) -> complex:
    """Determinant via pivoted LU elimination; singular matrices return 0."""
    return complex(np.linalg.det(_as_square(m)))


def permanent(m) -> complex:
    """Permanent by Ryser's inclusion-exclusion formula.

    Gray-code iteration over column subsets keeps the row sums
    incremental, for an O(n 2^n) total cost.  Exact up to floating
    point; dimensions above PERMANENT_MAX_DIM are rejected.
    """
    a = _as_square(m)
    n = a.shape[0]
    if n > PERMANENT_MAX_DIM:
        raise ValueError(f"permanent limited to dim <= {PERMANENT_MAX_DIM}, got {n}")
    if n == 0:
        return 1 + 0j
    row = np.zeros(n, dtype=complex)
    total = 0j
    size = 0
    for k in range(1, 2**n):
        j = (k & -k).bit_length() - 1  # bit flipped by the Gray code at step k
        if (k ^ (k >> 1)) & (1 << j):
            row += a[:, j]
            size += 1
        else:
            row -= a[:, j]
            size -= 1
        total += (-1) ** size * np.prod(row)
    return complex((-1) ** n * total)


def _cycle_count(sigma) -> int:
    """Number of cycles of a permutation; fixed points count as 1-cycles."""
    seen = [False] * len(sigma)
    cycles = 0
    for start in range(len(sigma)):
        if seen[start]:
            continue
        cycles += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = sigma[j]
    return cycles


def alpha_determinant(m, alpha: float) -> complex:
    """sum over permutations of alpha^(n - #cycles) * prod_i m[i, sigma(i)].

    alpha=-1 reproduces the determinant, alpha=+1 the permanent, and
    alpha=0 keeps only the identity permutation (product of the
    diagonal).  Explicit enumeration; capped at ALPHA_DET_MAX_DIM.
    """
    a = _as_square(m)
    n = a.shape[0]
    if n > ALPHA_DET_MAX_DIM:
        raise ValueError(f"alpha-determinant limited to dim <= {ALPHA_DET_MAX_DIM}, got {n}")
    total = 0j
    for sigma in itertools.permutations(range(n)):
        prod = 1 + 0j
        for i in range(n):
            prod *= a[i, sigma[i]]
        total += alpha ** (n - _cycle_count(sigma)) * prod
    return total


def _permutation_parity(perm) -> int:
    """Signature (+1/-1) of a permutation given as a sequence of values."""
    inversions = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inversions += 1
    return -1 if inversions % 2 else 1


@dataclass(frozen=True)
class Contraction:
    """A pairing of {0..order-1} with the parity of the induced permutation.

    Pairs are ordered so that first elements increase and each pair is
    (low, high); the flattened pair sequence is the permutation whose
    signature is `parity`.
    """

    order: int
    pairs: tuple
    parity: int

    def __post_init__(self):
        flat = [i for p in self.pairs for i in p]
        if sorted(flat) != list(range(self.order)):
            raise ValueError("pairs must partition 0..order-1")


def enumerate_contractions(n: int) -> list:
    """All (n-1)!! contractions of order n.

    Constructive scheme: repeatedly pair the smallest unpaired index
    with every remaining index.  Rejects odd or too-large n.
    """
    if n <= 0 or n % 2:
        raise ValueError(f"contraction order must be even and positive, got {n}")
    if n > CONTRACTION_MAX_ORDER:
        raise ValueError(f"contraction order limited to {CONTRACTION_MAX_ORDER}, got {n}")

    out = []

    def pair_up(remaining, acc):
        if not remaining:
            flat = [i for p in acc for i in p]
            out.append(Contraction(n, tuple(acc), _permutation_parity(flat)))
            return
        first, rest = remaining[0], remaining[1:]
        for k, partner in enumerate(rest):
            pair_up(rest[:k] + rest[k + 1:], acc + [(first, partner)])

    pair_up(list(range(n)), [])
    return out


def wick_expand(pair_table, eta: int) -> complex:
    """Wick expansion: sum over contractions of eta^parity times pair moments.

    `pair_table[i, j]` holds the two-point average of operators i and j
    (only i < j entries are used).  Odd-sized tables return exactly 0,
    since creation and annihilation numbers cannot match.
    """
    _check_eta(eta)
    t = np.asarray(pair_table, dtype=complex)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError(f"pair table must be square, got shape {t.shape}")
    n = t.shape[0]
    if n == 0:
        return 1 + 0j
    if n % 2:
        return 0j
    total = 0j
    for c in enumerate_contractions(n):
        prod = 1 + 0j
        for i, j in c.pairs:
            prod *= t[i, j]
        total += prod if c.parity == 1 else eta * prod
    return total


def correlator_value(k_matrix, eta: int) -> complex:
    """Joint occupation correlator from the matrix of <a_i^dag a_j>.

    Permanent for eta=+1 (bosons), determinant for eta=-1 (fermions).
    """
    _check_eta(eta)
    return permanent(k_matrix) if eta == 1 else determinant(k_matrix)


def _check_eta(eta):
    if eta not in (-1, 1):
        raise ValueError(f"eta must be +1 or -1, got {eta}")

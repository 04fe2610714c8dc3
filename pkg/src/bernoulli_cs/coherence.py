"""Local coherences of a unitary matrix with respect to a prior cone."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .rng import as_generator
from .transforms import UnitaryOperator

SOURCES = ("exact-subspaces", "dictionary-heuristic", "sample-based")
PAIRWISE_LIMIT = 64
_CHUNK = 256


@dataclass(frozen=True)
class CoherenceVector:
    alpha: np.ndarray
    source: str = "exact-subspaces"

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if a.ndim != 1 or not np.all(np.isfinite(a)) or np.any(a < 0) or not np.any(a > 0):
            raise InvalidInputError("coherences must be finite, nonnegative and not all zero")
        object.__setattr__(self, "alpha", a)

    def __array__(self, dtype=None, copy=None):
        return self.alpha if dtype is None else self.alpha.astype(dtype)

    def __len__(self):
        return self.alpha.size


class UnionOfSubspaces:
    """A cone given as the union of ``M`` subspaces with orthonormal bases."""

    def __init__(self, bases, tol=1e-10):
        bases = [np.atleast_2d(np.asarray(B)) for B in bases]
        if not bases:
            raise InvalidInputError("need at least one subspace")
        n = bases[0].shape[0]
        for B in bases:
            if B.shape[0] != n:
                raise InvalidInputError("all bases must share the ambient dimension")
            if not 1 <= B.shape[1] <= n:
                raise InvalidInputError("subspace dimension must lie in [1, n]")
            dev = np.abs(B.conj().T @ B - np.eye(B.shape[1])).max()
            if dev > tol:
                raise InvalidInputError(f"basis columns are not orthonormal (deviation {dev:.2e})")
        self.bases = bases
        self.n = n

    @classmethod
    def from_spanning(cls, matrices):
        """Orthonormalize arbitrary spanning sets with a reduced QR."""
        return cls([np.linalg.qr(np.atleast_2d(np.asarray(A)))[0] for A in matrices])

    @property
    def M(self) -> int:
        return len(self.bases)

    @property
    def ell(self) -> int:
        return max(B.shape[1] for B in self.bases)


def coherence_exact(F: UnitaryOperator, T: UnionOfSubspaces) -> CoherenceVector:
    """``alpha_j = max_U ||B_U^* f_j||_2``.

    For a subspace with orthonormal basis ``B`` the supremum of ``|<f_j, x>|``
    over unit ``x`` in the subspace is ``||B^* f_j||``, which equals the norm of
    row ``j`` of ``F B``.
    """
    if T.n != F.n:
        raise InvalidInputError(f"prior lives in dimension {T.n}, transform in {F.n}")
    alpha = np.zeros(F.n)
    for B in T.bases:
        np.maximum(alpha, np.linalg.norm(F.apply(B), axis=1), out=alpha)
    return CoherenceVector(alpha, "exact-subspaces")


def _max_abs_response(F, vectors):
    alpha = np.zeros(F.n)
    for start in range(0, vectors.shape[0], _CHUNK):
        block = F.apply(vectors[start:start + _CHUNK].T)
        np.maximum(alpha, np.abs(block).max(axis=1), out=alpha)
    return alpha


def coherence_dictionary(F: UnitaryOperator, atoms) -> CoherenceVector:
    """Heuristic coherence against individual unit-norm atoms (rows of ``atoms``)."""
    atoms = np.atleast_2d(np.asarray(atoms))
    if atoms.size == 0:
        raise InvalidInputError("atom list is empty")
    if atoms.shape[1] != F.n:
        raise InvalidInputError(f"atoms have length {atoms.shape[1]}, transform is {F.n}")
    norms = np.linalg.norm(atoms, axis=1)
    if np.abs(norms - 1).max() > 1e-8:
        raise InvalidInputError("atoms must be unit-norm")
    return CoherenceVector(_max_abs_response(F, atoms), "dictionary-heuristic")


def sample_differences(samples, rng=None):
    """Normalized differences between prior samples.

    All pairs are used up to ``PAIRWISE_LIMIT`` samples; above that, the
    differences to the sample mean plus ``10 * count`` random pairs.
    """
    X = np.atleast_2d(np.asarray(samples))
    count = X.shape[0]
    if count < 2:
        raise InvalidInputError("need at least two samples")
    if count <= PAIRWISE_LIMIT:
        i, j = np.triu_indices(count, k=1)
        D = X[i] - X[j]
    else:
        gen = as_generator(rng)
        i = gen.integers(0, count, size=10 * count)
        j = (i + gen.integers(1, count, size=10 * count)) % count  # distinct pairs
        D = np.concatenate([X - X.mean(axis=0), X[i] - X[j]])
    norms = np.linalg.norm(D, axis=1)
    keep = norms > 1e-12 * max(np.abs(X).max(), 1e-300)
    if not np.any(keep):
        raise InvalidInputError("samples are all identical; no nonzero difference")
    return D[keep] / norms[keep, None]


def coherence_samples(F: UnitaryOperator, samples, rng=None) -> CoherenceVector:
    X = np.atleast_2d(np.asarray(samples))
    if X.shape[1] != F.n:
        raise InvalidInputError(f"samples have length {X.shape[1]}, transform is {F.n}")
    D = sample_differences(X, rng)
    return CoherenceVector(_max_abs_response(F, D), "sample-based")

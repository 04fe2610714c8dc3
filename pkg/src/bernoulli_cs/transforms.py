"""Unitary transforms used as measurement matrices and sparsity bases.

A :class:`UnitaryOperator` acts on flat length-``n`` vectors (or on stacks of
them along axis 0).  ``apply`` computes ``F @ x`` and ``adjoint`` computes
``F^* @ y``.  Row ``j`` of ``F`` measures ``x`` as ``<f_j, x> = (F x)_j`` where
``f_j = F^* e_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

KINDS = ("dft-1d", "dft-2d-channelwise", "haar-1d", "haar-2d", "identity", "dense")
_SQRT2 = np.sqrt(2.0)


def _haar_step(a, axis):
    a = np.moveaxis(a, axis, 0)
    s = (a[0::2] + a[1::2]) / _SQRT2
    d = (a[0::2] - a[1::2]) / _SQRT2
    return np.moveaxis(np.concatenate([s, d]), 0, axis)


def _ihaar_step(c, axis):
    c = np.moveaxis(c, axis, 0)
    half = c.shape[0] // 2
    s, d = c[:half], c[half:]
    out = np.empty_like(c)
    out[0::2] = (s + d) / _SQRT2
    out[1::2] = (s - d) / _SQRT2
    return np.moveaxis(out, 0, axis)


def haar_forward_1d(x, levels):
    out = np.array(x, dtype=np.result_type(x, float), copy=True)
    size = out.shape[0]
    for _ in range(levels):
        out[:size] = _haar_step(out[:size], 0)
        size //= 2
    return out


def haar_inverse_1d(c, levels):
    out = np.array(c, dtype=np.result_type(c, float), copy=True)
    size = out.shape[0] >> (levels - 1) if levels else out.shape[0]
    for _ in range(levels):
        out[:size] = _ihaar_step(out[:size], 0)
        size *= 2
    return out


def haar_forward_2d(x, levels):
    """Separable orthonormal Haar on axes (0, 1); LL band kept top-left."""
    out = np.array(x, dtype=np.result_type(x, float), copy=True)
    h, w = out.shape[:2]
    for _ in range(levels):
        block = _haar_step(_haar_step(out[:h, :w], 0), 1)
        out[:h, :w] = block
        h //= 2
        w //= 2
    return out


def haar_inverse_2d(c, levels):
    out = np.array(c, dtype=np.result_type(c, float), copy=True)
    h = out.shape[0] >> (levels - 1) if levels else out.shape[0]
    w = out.shape[1] >> (levels - 1) if levels else out.shape[1]
    for _ in range(levels):
        out[:h, :w] = _ihaar_step(_ihaar_step(out[:h, :w], 1), 0)
        h *= 2
        w *= 2
    return out


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    """An ``n x n`` unitary matrix applied matrix-free where possible.

    ``shape`` is the ``(height, width, channels)`` image layout for the 2-D
    kinds; flat vectors are reshaped C-order.  ``levels`` is the Haar depth.
    """

    kind: str
    n: int
    shape: tuple | None = None
    levels: int = 3
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown transform kind {self.kind!r}")
        if self.n < 1:
            raise InvalidInputError("n must be positive")
        if self.kind in ("dft-2d-channelwise", "haar-2d"):
            if self.shape is None or len(self.shape) != 3 or int(np.prod(self.shape)) != self.n:
                raise InvalidInputError("2-D transforms need shape=(h, w, c) with h*w*c == n")
        if self.kind == "haar-1d" and self.n % (1 << self.levels):
            raise InvalidInputError(f"n={self.n} not divisible by 2**{self.levels}")
        if self.kind == "haar-2d" and (
            self.shape[0] % (1 << self.levels) or self.shape[1] % (1 << self.levels)
        ):
            raise InvalidInputError(f"image sides must be divisible by 2**{self.levels}")
        if self.kind == "dense":
            M = np.asarray(self.matrix)
            if M.shape != (self.n, self.n):
                raise InvalidInputError("dense matrix must be n x n")
            dev = np.abs(M.conj().T @ M - np.eye(self.n)).max()
            if dev > 1e-8:
                raise InvalidInputError(f"matrix is not unitary (Gram deviation {dev:.2e})")

    @property
    def field(self) -> str:
        if self.kind.startswith("dft"):
            return "complex"
        if self.kind == "dense" and np.iscomplexobj(self.matrix):
            return "complex"
        return "real"

    def _image(self, x):
        return x.reshape(tuple(self.shape) + x.shape[1:])

    def _flat(self, x):
        return x.reshape((self.n,) + x.shape[3:])

    def _check(self, x):
        x = np.asarray(x)
        if x.shape[0] != self.n:
            raise InvalidInputError(f"expected leading dimension {self.n}, got {x.shape[0]}")
        return x

    def apply(self, x):
        """Return ``F @ x``; ``x`` may carry extra trailing (batch) axes."""
        x = self._check(x)
        k = self.kind
        if k == "identity":
            return x.copy()
        if k == "dense":
            return self.matrix @ x
        if k == "dft-1d":
            return np.fft.fft(x, axis=0, norm="ortho")
        if k == "dft-2d-channelwise":
            return self._flat(np.fft.fft2(self._image(x), axes=(0, 1), norm="ortho"))
        if k == "haar-1d":
            return haar_forward_1d(x, self.levels)
        return self._flat(haar_forward_2d(self._image(x), self.levels))

    def adjoint(self, y):
        """Return ``F^* @ y``, which is also the inverse."""
        y = self._check(y)
        k = self.kind
        if k == "identity":
            return y.copy()
        if k == "dense":
            return self.matrix.conj().T @ y
        if k == "dft-1d":
            return np.fft.ifft(y, axis=0, norm="ortho")
        if k == "dft-2d-channelwise":
            return self._flat(np.fft.ifft2(self._image(y), axes=(0, 1), norm="ortho"))
        if k == "haar-1d":
            return haar_inverse_1d(y, self.levels)
        return self._flat(haar_inverse_2d(self._image(y), self.levels))

    def row(self, j: int):
        """Measurement vector ``f_j`` (conjugate transpose of row ``j``)."""
        e = np.zeros(self.n)
        e[j] = 1.0
        return self.adjoint(e)

    def to_matrix(self):
        return self.apply(np.eye(self.n))


def dft1d(n: int) -> UnitaryOperator:
    return UnitaryOperator("dft-1d", n)


def dft2d(shape) -> UnitaryOperator:
    shape = tuple(int(s) for s in shape)
    if len(shape) == 2:
        shape = shape + (1,)
    return UnitaryOperator("dft-2d-channelwise", int(np.prod(shape)), shape=shape)


def max_haar_levels(*sides: int) -> int:
    """Largest depth for which every side stays divisible."""
    depth = 0
    while all(s % (2 << depth) == 0 for s in sides):
        depth += 1
    return depth


def haar1d(n: int, levels: int | None = None) -> UnitaryOperator:
    """Orthonormal Haar transform; ``levels=None`` decomposes fully."""
    if levels is None:
        levels = max_haar_levels(n)
    return UnitaryOperator("haar-1d", n, levels=levels)


def haar2d(shape, levels: int | None = None) -> UnitaryOperator:
    shape = tuple(int(s) for s in shape)
    if len(shape) == 2:
        shape = shape + (1,)
    if levels is None:
        levels = max_haar_levels(shape[0], shape[1])
    return UnitaryOperator("haar-2d", int(np.prod(shape)), shape=shape, levels=levels)


def identity(n: int) -> UnitaryOperator:
    return UnitaryOperator("identity", n)


def dense(matrix) -> UnitaryOperator:
    M = np.asarray(matrix)
    return UnitaryOperator("dense", M.shape[0], matrix=M)


def haar_block_starts(op: UnitaryOperator) -> list[int]:
    """Flat coefficient index of the first atom of every Haar block.

    Atoms within a block are translates of each other by multiples of their
    support length, so any circularly shift-invariant modulus (such as the
    DFT magnitude) is constant across a block.
    """
    if op.kind == "haar-1d":
        starts = [0]
        size = op.n >> op.levels
        for _ in range(op.levels):
            starts.append(size)
            size *= 2
        return starts
    if op.kind == "haar-2d":
        h, w, c = op.shape
        corners = [(0, 0)]
        for lev in range(op.levels, 0, -1):
            hh, ww = h >> lev, w >> lev
            corners += [(0, ww), (hh, 0), (hh, ww)]
        return [(r * w + col) * c + ch for r, col in corners for ch in range(c)]
    raise InvalidInputError("haar_block_starts needs a Haar operator")


def haar_atoms(op: UnitaryOperator, representative: bool = False) -> np.ndarray:
    """Haar synthesis atoms as rows of an array (``count x n``).

    With ``representative=True`` only one atom per translation block is
    returned; coherences against any shift-invariant-modulus transform are
    unchanged by the reduction.
    """
    if op.kind not in ("haar-1d", "haar-2d"):
        raise InvalidInputError("haar_atoms needs a Haar operator")
    if not representative:
        return op.adjoint(np.eye(op.n)).T
    idx = haar_block_starts(op)
    E = np.zeros((op.n, len(idx)))
    E[idx, np.arange(len(idx))] = 1.0
    return op.adjoint(E).T

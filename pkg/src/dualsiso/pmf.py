"""
Probability mass functions over the additive group of GF(q).

A pmf is a float array whose last axis has length q; entry j is the
probability of field element j.  Every function broadcasts over leading
axes so that whole batches of frames move through the decoders together.

The diagonalizing transform for convolution over (GF(p^m), +) is the
character transform of (Z_p)^m, i.e. the m-fold tensor product of the
size-p DFT.  For p = 2 it is the Walsh-Hadamard transform and stays real.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import AllZeroMass, ZeroScalar
from .galois import GaloisField


def delta(field: GaloisField, j: int = 0) -> np.ndarray:
    out = np.zeros(field.q)
    out[j] = 1.0
    return out


def uniform(field: GaloisField) -> np.ndarray:
    return np.full(field.q, 1.0 / field.q)


def normalize(P: np.ndarray) -> np.ndarray:
    """Scale every pmf along the last axis to unit mass."""
    P = np.asarray(P, dtype=float)
    total = P.sum(axis=-1, keepdims=True)
    if not np.all(total > 0) or not np.all(np.isfinite(total)):
        raise AllZeroMass("probability vector with no mass")
    return P / total


def convolve(field: GaloisField, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """(P * Q)(w) = sum_c P(c) Q(w - c): the law of the sum of independent variables."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    return np.einsum("...c,...wc->...w", P, Q[..., field.sub_table])


def permute(field: GaloisField, P: np.ndarray, h: int) -> np.ndarray:
    """Law of h*X given the law of X: result[j*h] = P[j]."""
    if int(h) % field.q == 0:
        raise ZeroScalar("cannot permute a pmf by 0")
    return np.asarray(P)[..., _gather_index(field, int(h))]


@lru_cache(maxsize=None)
def _gather_index(field: GaloisField, h: int) -> np.ndarray:
    # result[i] = P[i / h]
    idx = field.mul_table[:, field.inv(h)].copy()
    idx.flags.writeable = False
    return idx


class GroupTransform:
    """Character transform of (Z_p)^m with its spectral permutations."""

    def __init__(self, field: GaloisField):
        self.field = field
        self.shape = (field.p,) * field.m
        self.real = field.p == 2
        self._sigma: dict[int, np.ndarray] = {}

    def _axes(self, ndim: int) -> tuple[int, ...]:
        return tuple(range(ndim - self.field.m, ndim))

    def forward(self, P: np.ndarray) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        lead = P.shape[:-1]
        x = P.reshape(lead + self.shape)
        if self.real:
            x = _wht(x, self.field.m)
        else:
            x = np.fft.fftn(x, axes=self._axes(x.ndim))
        return x.reshape(lead + (self.field.q,))

    def inverse(self, S: np.ndarray) -> np.ndarray:
        S = np.asarray(S)
        lead = S.shape[:-1]
        x = S.reshape(lead + self.shape)
        if self.real:
            x = _wht(x, self.field.m) / self.field.q
        else:
            x = np.fft.ifftn(x, axes=self._axes(x.ndim)).real
        return x.reshape(lead + (self.field.q,))

    def sigma(self, h: int) -> np.ndarray:
        """Index map with forward(permute(P, h)) == forward(P)[..., sigma(h)].

        Multiplication by h is GF(p)-linear on digit vectors, x -> M x, and
        the character at a evaluated on M x is the character at M^T a.
        """
        h = int(h)
        if h % self.field.q == 0:
            raise ZeroScalar("cannot permute a spectrum by 0")
        if h not in self._sigma:
            F = self.field
            basis = F.p ** np.arange(F.m)
            M = F.digits[F.mul_table[h, basis]].T          # column i = digits(h * x^i)
            mapped = (F.digits @ M) % F.p                   # row a -> (M^T a)
            s = mapped @ basis
            s.flags.writeable = False
            self._sigma[h] = s
        return self._sigma[h]


def _wht(x: np.ndarray, m: int) -> np.ndarray:
    """Unnormalized Walsh-Hadamard butterflies over the trailing m binary axes."""
    x = np.array(x, dtype=float, copy=True)
    for ax in range(x.ndim - m, x.ndim):
        a = np.take(x, 0, axis=ax)
        b = np.take(x, 1, axis=ax)
        x = np.stack([a + b, a - b], axis=ax)
    return x


@lru_cache(maxsize=None)
def group_transform(field: GaloisField) -> GroupTransform:
    return GroupTransform(field)


def transform(field: GaloisField, P: np.ndarray) -> np.ndarray:
    return group_transform(field).forward(P)


def inverse_transform(field: GaloisField, S: np.ndarray) -> np.ndarray:
    return group_transform(field).inverse(S)


def convolve_fast(field: GaloisField, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Same as :func:`convolve`, through the transform domain."""
    T = group_transform(field)
    return np.clip(T.inverse(T.forward(P) * T.forward(Q)), 0.0, None)

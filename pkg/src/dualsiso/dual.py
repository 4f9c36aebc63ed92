"""
Soft-in soft-out decoding with the dual encoder C-bar.

The decoders run C-bar on pmfs instead of symbols: register contents are
pmfs, a symbol sum becomes a convolution and scaling by h becomes the
permutation Pi_h.  Registers hold w_i (see :mod:`dualsiso.dualspec`), one per
residue class of the code positions, so they are mutually independent and
the recursions are exact.

Positions are 1-based in the comments and 0-based in arrays.  A history
array ``hist`` of shape (B, T + N, q) stores the pmf of w_i at row i + N - 1
for i = 1 - N .. T.

Two interchangeable modes exist: ``"direct"`` convolves in the pmf domain
(O(q^2) per convolution) and ``"fast"`` multiplies spectra after the group
transform (O(q log q)).  Results agree to rounding error.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass

import numpy as np

from .dualspec import DualSpec
from .errors import AllZeroMass, LengthMismatch
from .pmf import convolve, group_transform, normalize, permute

TRANSFORM_MODES = ("direct", "fast")
_ALIASES = {"direct-convolution": "direct", "fast-transform": "fast"}
_default_mode = "direct"


def set_transform_mode(mode: str) -> None:
    global _default_mode
    _default_mode = _resolve(mode)


def get_transform_mode() -> str:
    return _default_mode


@contextlib.contextmanager
def transform_mode(mode: str):
    previous = _default_mode
    set_transform_mode(mode)
    try:
        yield
    finally:
        set_transform_mode(previous)


def _resolve(mode: str | None) -> str:
    mode = _default_mode if mode is None else _ALIASES.get(mode, mode)
    if mode not in TRANSFORM_MODES:
        raise ValueError(f"transform mode must be one of {TRANSFORM_MODES}")
    return mode


@dataclass
class RegisterBank:
    """History of register pmfs for one decoding direction.

    ``hist[..., i + N - 1, :]`` is the pmf of w_i.  Registers at time k are
    S'_j(k) = w_{k-j+1} for j = 1..N.
    """

    hist: np.ndarray
    N: int

    @property
    def T(self) -> int:
        return self.hist.shape[-2] - self.N

    @property
    def registers(self) -> np.ndarray:
        """All register pmfs, shape (..., T + 1, N, q): entry [k, j-1] is S'_j(k)."""
        return np.stack([self.at(k) for k in range(self.T + 1)], axis=-3)

    def w(self, i: int) -> np.ndarray:
        return self.hist[..., i + self.N - 1, :]

    def at(self, k: int) -> np.ndarray:
        """Register pmfs S'_1(k)..S'_N(k), shape (..., N, q)."""
        rows = [k - j + self.N for j in range(1, self.N + 1)]
        return self.hist[..., rows, :]


def _prepare(dual: DualSpec, code_pmfs) -> tuple[np.ndarray, tuple]:
    P = np.asarray(code_pmfs, dtype=float)
    if P.ndim < 2 or P.shape[-1] != dual.q:
        raise LengthMismatch(f"expected (..., T, {dual.q}) pmfs, got {P.shape}")
    if P.shape[-2] < dual.N:
        raise LengthMismatch(f"frame of {P.shape[-2]} symbols is shorter than N = {dual.N}")
    lead = P.shape[:-2]
    return normalize(P.reshape((-1,) + P.shape[-2:])), lead


def _spectral_normalize(S: np.ndarray) -> np.ndarray:
    # Coefficient 0 of the spectrum is the total mass.
    mass = S[..., :1].real
    if not np.all(mass > 0):
        raise AllZeroMass("probability vector with no mass")
    return S / mass


def _clip_normalize(P: np.ndarray) -> np.ndarray:
    return normalize(np.clip(P, 0.0, None))


class _Ops:
    """The two primitive operations of the dual recursions, in one domain."""

    def __init__(self, dual: DualSpec, mode: str):
        self.F = dual.field
        self.mode = mode
        self.G = group_transform(self.F) if mode == "fast" else None

    def to(self, P):
        return P if self.G is None else self.G.forward(P)

    def back(self, X):
        return X if self.G is None else _clip_normalize(self.G.inverse(X))

    def perm(self, X, h: int):
        if self.G is None:
            return permute(self.F, X, h)
        return X[..., self.G.sigma(h)]

    def conv(self, X, Y):
        return convolve(self.F, X, Y) if self.G is None else X * Y

    def norm(self, X):
        return normalize(X) if self.G is None else _spectral_normalize(X)

    def delta0(self, shape):
        if self.G is None:
            D = np.zeros(shape)
            D[..., 0] = 1.0
            return D
        return np.ones(shape, dtype=float if self.F.p == 2 else complex)

    def empty(self, shape):
        return np.empty(shape, dtype=float if self.G is None or self.F.p == 2 else complex)


def _mac(ops: _Ops, acc, X, h: int):
    """acc * Pi_h X, skipping zero taps (Pi_0 X is the point mass at 0)."""
    if h == 0:
        return acc
    term = ops.perm(X, h)
    return term if acc is None else ops.conv(acc, term)


def _forward_hist(dual: DualSpec, ops: _Ops, Phat: np.ndarray) -> np.ndarray:
    B, T, q = Phat.shape
    N = dual.N
    hist = ops.empty((B, T + N, q))
    if N == 0:
        hist[:] = ops.delta0(hist.shape)     # memoryless: no registers to track
        return hist
    hist[:, :N] = ops.delta0((B, N, q))
    for k in range(1, T + 1):
        hist[:, k + N - 1] = ops.norm(ops.conv(Phat[:, k - 1], ops.perm(hist[:, k - 1], dual.mu)))
    return hist


def _backward_hist(dual: DualSpec, ops: _Ops, Phat: np.ndarray) -> np.ndarray:
    B, T, q = Phat.shape
    N = dual.N
    F = dual.field
    neg_one = F.neg(1)
    hist = ops.empty((B, T + N, q))
    if N == 0:
        hist[:] = ops.delta0(hist.shape)     # memoryless: no registers to track
        return hist
    hist[:, T:] = ops.delta0((B, N, q))       # w_i for i > T - N: zero by termination
    for k in range(T, 0, -1):
        # w_{k-N} = c * (w_k - c_k)
        diff = ops.conv(hist[:, k + N - 1], ops.perm(Phat[:, k - 1], neg_one))
        hist[:, k - 1] = ops.norm(ops.perm(diff, dual.feedback_coeff))
    return hist


def forward_decode(dual: DualSpec, code_pmfs, keep_history: bool = False,
                   mode: str | None = None) -> tuple[np.ndarray, RegisterBank | None]:
    """Forward dual decoder: P(b_k | c_1..c_k) for every k.

    Returns the (..., T, q) output pmfs and, if ``keep_history``, the
    register bank (otherwise None).
    """
    P, lead = _prepare(dual, code_pmfs)
    if dual.input_gain != 1:
        P = permute(dual.field, P, dual.input_gain)
    ops = _Ops(dual, _resolve(mode))
    B, T, q = P.shape
    N, t = dual.N, dual.out_taps
    Phat = ops.to(P)
    hist = _forward_hist(dual, ops, Phat)
    out = ops.empty((B, T, q))
    for k in range(1, T + 1):
        acc = _mac(ops, None, Phat[:, k - 1], t[0])
        for j in range(1, N + 1):
            acc = _mac(ops, acc, hist[:, k - j + N - 1], t[j])
        out[:, k - 1] = ops.delta0((B, q)) if acc is None else acc
    out = ops.back(out) if ops.G is not None else normalize(out)
    out = out.reshape(lead + (T, q))
    if not keep_history:
        return out, None
    return out, RegisterBank(_history_pmfs(ops, hist).reshape(lead + hist.shape[1:]), N)


def backward_decode(dual: DualSpec, code_pmfs, keep_history: bool = False,
                    mode: str | None = None) -> tuple[np.ndarray, RegisterBank | None]:
    """Backward dual decoder: P(b_k | c_k..c_T, termination) for every k.

    This is the reverse-memory-labeled machine run on c_T..c_1 from the
    all-zero state.  Outputs and the bank come back in natural time order;
    the bank holds the same w_i as the forward bank, so the two line up
    register for register.
    """
    P, lead = _prepare(dual, code_pmfs)
    ops = _Ops(dual, _resolve(mode))
    B, T, q = P.shape
    N, beta = dual.N, dual.back_taps
    Phat = ops.to(P)
    hist = _backward_hist(dual, ops, Phat)
    out = ops.empty((B, T, q))
    for k in range(1, T + 1):
        acc = None if beta[0] == 0 else ops.perm(Phat[:, k - 1], beta[0])
        for j in range(1, N + 1):
            acc = _mac(ops, acc, hist[:, k - j + N], beta[j])
        out[:, k - 1] = ops.delta0((B, q)) if acc is None else acc
    out = ops.back(out) if ops.G is not None else normalize(out)
    out = out.reshape(lead + (T, q))
    if not keep_history:
        return out, None
    return out, RegisterBank(_history_pmfs(ops, hist).reshape(lead + hist.shape[1:]), N)


def _history_pmfs(ops: _Ops, hist: np.ndarray) -> np.ndarray:
    return hist if ops.G is None else ops.back(hist)


def combine_registers(forward: RegisterBank, backward: RegisterBank) -> RegisterBank:
    """Element-wise product of forward and backward register pmfs, renormalized."""
    if forward.hist.shape != backward.hist.shape:
        raise LengthMismatch("register banks have different shapes")
    return RegisterBank(normalize(forward.hist * backward.hist), forward.N)


def _pair_term(dual: DualSpec, ops: _Ops, W_prev, Pk, V_k, C_k):
    """Pmf of t_0 c_k + t_N w_{k-N} given all observations (pmf domain).

    Register N and c_k are not independent once the backward information is
    folded in (w_k = c_k + mu w_{k-N} ties them), so they are handled as a
    pair: joint weight W(u) P(c) V(c + mu u).
    """
    F = dual.field
    t0, tN, mu = dual.out_taps[0], dual.out_taps[dual.N], dual.mu
    if dual.N == 0:
        return permute(F, Pk, t0)
    if tN == 0:
        # Y = t0 c: marginal of c is P(c) * sum_u W(u) V(c + mu u)
        G = convolve(F, permute(F, W_prev, F.neg(mu)), V_k)
        return permute(F, normalize(Pk * G), t0)
    if F.mul(t0, mu) == tN:
        # Y = t0 (c + mu u) = t0 w_k
        return permute(F, C_k, t0)
    c_of = _pair_index(F, t0, tN, mu)
    cidx, sidx = c_of
    # J[u, y] = W(u) P(c(u, y)) V(c(u, y) + mu u)
    J = W_prev[..., :, None] * Pk[..., cidx] * V_k[..., sidx]
    return normalize(J.sum(axis=-2))


_PAIR_CACHE: dict = {}


def _pair_index(F, t0, tN, mu):
    key = (F, t0, tN, mu)
    if key not in _PAIR_CACHE:
        q = F.q
        u = np.arange(q)[:, None]
        y = np.arange(q)[None, :]
        # c = (y - tN u) / t0, s = c + mu u
        c = F.mul_table[F.inv(t0), F.sub_table[y, F.mul_table[tN, u]]]
        s = F.add_table[c, F.mul_table[mu, u]]
        _PAIR_CACHE[key] = (c, s)
    return _PAIR_CACHE[key]


def combine_decode(dual: DualSpec, code_pmfs, mode: str | None = None,
                   return_banks: bool = False):
    """Bidirectional output: P(b_k | whole frame) for every k.

    Runs both dual decoders with history, multiplies the register banks
    element-wise and reads the output off the combined registers.  The
    registers S'_1..S'_{N-1} at time k-1 are conditionally independent of
    c_k, so they enter through a convolution; register N is coupled to c_k
    through w_k and is resolved jointly in :func:`_pair_term`.
    """
    P, lead = _prepare(dual, code_pmfs)
    mode = _resolve(mode)
    B, T, q = P.shape
    N, t = dual.N, dual.out_taps
    ops = _Ops(dual, mode)
    Phat = ops.to(P)
    # Only the register histories are needed here, not the one-sided outputs.
    fwd = RegisterBank(_history_pmfs(ops, _forward_hist(dual, ops, Phat)), N)
    bwd = RegisterBank(_history_pmfs(ops, _backward_hist(dual, ops, Phat)), N)
    comb = combine_registers(fwd, bwd)
    W, V, C = fwd.hist, bwd.hist, comb.hist
    Chat = ops.to(C)
    # The coupled (c_k, w_{k-N}) term depends only on finished histories,
    # so it is evaluated for all k at once.
    pair = ops.to(_pair_term(dual, ops, W[:, :T], P, V[:, N:], C[:, N:]))
    out = ops.empty((B, T, q))
    for k in range(1, T + 1):
        acc = pair[:, k - 1]
        for j in range(1, N):
            acc = _mac(ops, acc, Chat[:, k - j + N - 1], t[j])
        out[:, k - 1] = acc
    out = ops.back(out) if ops.G is not None else normalize(out)
    out = out.reshape(lead + (T, q))
    if return_banks:
        shape = lead + W.shape[1:]
        return (out, RegisterBank(W.reshape(shape), N), RegisterBank(V.reshape(shape), N),
                RegisterBank(C.reshape(shape), N))
    return out


def fb_output_product(dual: DualSpec, code_pmfs, mode: str | None = None) -> np.ndarray:
    """Heuristic combination: normalized product of forward and backward outputs."""
    f, _ = forward_decode(dual, code_pmfs, mode=mode)
    b, _ = backward_decode(dual, code_pmfs, mode=mode)
    return normalize(f * b)

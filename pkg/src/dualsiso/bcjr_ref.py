"""
Reference bidirectional BCJR symbol-APP decoder and an exhaustive Bayes oracle.

All recursions work in the probability domain with per-step normalization
and broadcast over leading batch axes: ``code_pmfs`` has shape (..., T, q).

The default trellis for a code is the dual realization (q^N states).  Its
all-zero termination is exactly the frame termination used by the encoder,
so posteriors agree with exhaustive enumeration over the q^L messages.
The minimal q^n trellis from :func:`build_trellis` can be passed in
explicitly; with ``terminated=True`` it only constrains the encoder-C state,
which is a weaker prior when N > n.
"""

from __future__ import annotations

import itertools

import numpy as np

from .convcode import CodeSpec, Trellis, encoder
from .dualspec import DualSpec, dual_taps, dual_trellis
from .errors import AllZeroMass, LengthMismatch, TooManyStates

MODES = ("both", "forward", "backward")


def reference_trellis(code: CodeSpec | DualSpec) -> Trellis:
    dual = code if isinstance(code, DualSpec) else dual_taps(code)
    return dual_trellis(dual)


def _as_batch(trellis: Trellis, code_pmfs) -> tuple[np.ndarray, tuple]:
    P = np.asarray(code_pmfs, dtype=float)
    if P.ndim < 2 or P.shape[-1] != trellis.field.q:
        raise LengthMismatch(f"expected (..., T, {trellis.field.q}) pmfs, got {P.shape}")
    lead = P.shape[:-2]
    return P.reshape((-1,) + P.shape[-2:]), lead


def _norm(x: np.ndarray) -> np.ndarray:
    s = x.sum(axis=-1, keepdims=True)
    if not np.all(s > 0):
        raise AllZeroMass("trellis metric lost all mass (inconsistent observations)")
    return x / s


def _initial(S: int, state: int | None) -> np.ndarray:
    if state is None:
        return np.full(S, 1.0 / S)
    v = np.zeros(S)
    v[state] = 1.0
    return v


def _gamma(trellis: Trellis, Pk: np.ndarray) -> np.ndarray:
    # Uniform prior on information symbols: branch metric is the code-symbol likelihood.
    return Pk[:, trellis.out]


def _pair_outputs(trellis: Trellis) -> np.ndarray:
    """(q, S*S) one-hot code-symbol label of each state pair; zero columns for non-edges."""
    S, q = trellis.num_states, trellis.field.q
    E = np.zeros((q, S * S))
    E[trellis.out, trellis.src * S + trellis.dst] = 1.0
    return E


def _dense_gamma(trellis: Trellis, Pk: np.ndarray, E: np.ndarray | None = None) -> np.ndarray:
    S = trellis.num_states
    E = _pair_outputs(trellis) if E is None else E
    return (Pk @ E).reshape(-1, S, S)


def bcjr_forward(trellis: Trellis, code_pmfs, start: int | None = 0,
                 dense: bool = False) -> np.ndarray:
    """Normalized alpha metrics, shape (..., T+1, S).  ``start=None`` means unknown."""
    P, lead = _as_batch(trellis, code_pmfs)
    B, T, _ = P.shape
    S = trellis.num_states
    alpha = np.empty((B, T + 1, S))
    alpha[:, 0] = _initial(S, start)
    E = _pair_outputs(trellis) if dense else None
    for k in range(T):
        if dense:
            nxt = np.matmul(alpha[:, k][:, None, :], _dense_gamma(trellis, P[:, k], E))[:, 0]
        else:
            m = alpha[:, k][:, trellis.src] * _gamma(trellis, P[:, k])
            nxt = m[:, trellis.into].sum(axis=-1)
        alpha[:, k + 1] = _norm(nxt)
    return alpha.reshape(lead + alpha.shape[1:])


def bcjr_backward(trellis: Trellis, code_pmfs, end: int | None = 0,
                  dense: bool = False) -> np.ndarray:
    """Normalized beta metrics, shape (..., T+1, S).  ``end=None`` means unterminated."""
    P, lead = _as_batch(trellis, code_pmfs)
    B, T, q = P.shape
    S = trellis.num_states
    beta = np.empty((B, T + 1, S))
    beta[:, T] = _initial(S, end)
    E = _pair_outputs(trellis) if dense else None
    for k in range(T, 0, -1):
        if dense:
            prev = np.matmul(_dense_gamma(trellis, P[:, k - 1], E), beta[:, k][:, :, None])[..., 0]
        else:
            m = _gamma(trellis, P[:, k - 1]) * beta[:, k][:, trellis.dst]
            prev = m.reshape(B, S, q).sum(axis=-1)
        beta[:, k - 1] = _norm(prev)
    return beta.reshape(lead + beta.shape[1:])


def bcjr_posteriors(trellis: Trellis, code_pmfs, mode: str = "both",
                    terminated: bool = True, dense: bool = False) -> np.ndarray:
    """Per-step APPs of the information symbols, shape (..., T, q).

    ``mode="forward"`` drops beta (alpha * gamma marginal); ``mode="backward"``
    replaces alpha by a uniform state distribution (gamma * beta marginal).

    ``dense=True`` evaluates every step over all (u', u) state pairs, the
    textbook form whose cost grows as S^2; the default visits only the
    q * S trellis edges.  Both give the same posteriors.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    P, lead = _as_batch(trellis, code_pmfs)
    B, T, q = P.shape
    S = trellis.num_states
    if mode == "backward":
        alpha = np.full((B, T + 1, S), 1.0 / S)
    else:
        alpha = bcjr_forward(trellis, P, 0, dense)
    if mode == "forward":
        beta = np.ones((B, T + 1, S))
    else:
        beta = bcjr_backward(trellis, P, 0 if terminated else None, dense)
    out = np.empty((B, T, q))
    if dense:
        labels, E = _pair_labels(trellis), _pair_outputs(trellis)
    for k in range(T):
        if dense:
            # sum of alpha(u') gamma(u', u) beta(u) over all state pairs, binned by input
            M = alpha[:, k][:, :, None] * _dense_gamma(trellis, P[:, k], E) * beta[:, k + 1][:, None, :]
            out[:, k] = _norm(M.reshape(B, S * S) @ labels)
        else:
            m = alpha[:, k][:, trellis.src] * _gamma(trellis, P[:, k]) * beta[:, k + 1][:, trellis.dst]
            out[:, k] = _norm(m.reshape(B, S, q).sum(axis=1))
    return out.reshape(lead + (T, q))


def _pair_labels(trellis: Trellis) -> np.ndarray:
    """(S*S, q) one-hot input label of each state pair; all-zero rows for non-edges."""
    S, q = trellis.num_states, trellis.field.q
    X = np.zeros((S * S, q))
    X[trellis.src * S + trellis.dst, trellis.inp] = 1.0
    return X


def decode(code: CodeSpec, code_pmfs, mode: str = "both") -> np.ndarray:
    """BCJR on the reference trellis of ``code``."""
    return bcjr_posteriors(reference_trellis(code), code_pmfs, mode)


# -- exhaustive oracle --------------------------------------------------------

MAX_ENUMERATION = 1 << 16


def enumerate_frames(code: CodeSpec, L: int) -> tuple[np.ndarray, np.ndarray]:
    """All q^L terminated frames: (full info (M, L+N), codewords (M, L+N)).

    Encoding runs on the minimal encoder C; the tail is the one that flushes
    the dual machine, recomputed here from its registers.
    """
    q = code.q
    M = q**L
    if M > MAX_ENUMERATION:
        raise TooManyStates(f"q^L = {M} messages is too many to enumerate")
    dual = dual_taps(code)
    F, N = code.field, dual.N
    info = np.array(list(itertools.product(range(q), repeat=L)), dtype=np.int64).reshape(M, L)

    enc = encoder(code)
    regs = np.zeros((M, enc.memory), dtype=np.int64)
    cw = np.empty((M, L), dtype=np.int64)
    for k in range(L):
        regs, cw[:, k] = enc.step_vec(regs, info[:, k])

    # Dual registers after L steps: w_i = c_i + mu w_{i-N}.
    w = np.zeros((M, L + N), dtype=np.int64)       # w[:, N + i - 1] holds w_i
    for i in range(1, L + 1):
        w[:, N + i - 1] = F.add_table[cw[:, i - 1], F.mul_table[dual.mu, w[:, i - 1]]]
    tail = np.stack([F.neg_table[F.mul_table[dual.mu, w[:, L + i - 1]]]
                     for i in range(1, N + 1)], axis=-1) if N else np.zeros((M, 0), np.int64)
    full_code = np.concatenate([cw, tail], axis=1)

    # Information symbols, tail included, from the minimal realization of 1/g = f/a.
    inv = encoder(code.inverse())
    iregs = np.zeros((M, inv.memory), dtype=np.int64)
    full_info = np.empty_like(full_code)
    for k in range(L + N):
        iregs, full_info[:, k] = inv.step_vec(iregs, full_code[:, k])
    assert np.array_equal(full_info[:, :L], info)
    return full_info, full_code


def brute_force_posteriors(code: CodeSpec, code_pmfs) -> np.ndarray:
    """Exact Bayes APPs of all L+N information symbols by enumeration.

    Messages are uniform over GF(q)^L; the likelihood of a frame is the
    product of the code-symbol pmfs along its codeword.
    """
    P = np.asarray(code_pmfs, dtype=float)
    dual = dual_taps(code)
    T = P.shape[-2]
    L = T - dual.N
    if L < 0:
        raise LengthMismatch(f"frame of {T} symbols is shorter than the tail N = {dual.N}")
    full_info, full_code = enumerate_frames(code, L)
    lead = P.shape[:-2]
    Pb = P.reshape((-1, T, code.q))
    # (B, M) frame weights as a product over positions
    weights = np.ones((Pb.shape[0], full_code.shape[0]))
    for k in range(T):
        weights *= Pb[:, k, full_code[:, k]]
    total = weights.sum(axis=1, keepdims=True)
    if not np.all(total > 0):
        raise AllZeroMass("no frame is consistent with the observations")
    weights /= total
    out = np.zeros((Pb.shape[0], T, code.q))
    for k in range(T):
        for x in range(code.q):
            out[:, k, x] = weights[:, full_info[:, k] == x].sum(axis=1)
    return out.reshape(lead + (T, code.q))

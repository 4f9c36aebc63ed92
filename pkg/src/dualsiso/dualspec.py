"""
The dual encoder C-bar with generator q(x) = 1/g(x) = f(x)z(x) / a(x)z(x).

With a(x)z(x) = x^N - c the dual machine is a pure delay line with one
feedback tap.  Writing mu = 1/c and H = -fz/c, the machine driven by code
symbols c_k keeps registers S'_j(k) = w_{k-j+1}, j = 1..N, where

    w_k = c_k + mu * w_{k-N}
    b_k = t_0 c_k + t_1 w_{k-1} + ... + t_N w_{k-N}

with t_0 = H_0, t_j = H_j (0 < j < N) and t_N = H_N + H_0 mu.  The N
registers are sums over disjoint residue classes of the code symbols, so
their pmfs are independent; this is what makes the soft dual decoder exact.
For monic a, f with unit constant terms in characteristic 2, c = mu = 1,
H = fz and t_N = 0, which is the canonical form with taps h_1..h_{N-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .convcode import CodeSpec, RationalEncoder, Trellis, encoder, trellis_from_step
from .errors import UnsupportedCode
from .gfpoly import GfPoly, min_complementary, poly_mul


@dataclass(frozen=True)
class DualSpec:
    code: CodeSpec
    N: int
    l: int
    z: GfPoly
    taps: tuple[int, ...]          # h_0..h_N: coefficients of f(x)z(x), zero padded
    feedback_coeff: int            # c in a(x)z(x) = x^N - c
    out_taps: tuple[int, ...] = dc_field(init=False)
    back_taps: tuple[int, ...] = dc_field(init=False)
    mu: int = dc_field(init=False)
    input_gain: int = dc_field(init=False, default=1)

    def __post_init__(self):
        F = self.code.field
        c = self.feedback_coeff
        if self.N == 0:
            h0 = F.div(self.code.f.coeffs[0], self.code.a.coeffs[0])
            object.__setattr__(self, "mu", 1)
            object.__setattr__(self, "out_taps", (h0,))
            object.__setattr__(self, "back_taps", (h0,))
            return
        if len(self.taps) != self.N + 1:
            raise ValueError(f"expected {self.N + 1} taps, got {len(self.taps)}")
        mu = F.inv(c)
        scale = F.neg(mu)
        H = [F.mul(scale, h) for h in self.taps]
        if H[0] == 0:
            raise UnsupportedCode("leading dual tap is zero; decoder would not be causal")
        t = H[:self.N] + [F.add(H[self.N], F.mul(H[0], mu))]
        beta = [F.neg(F.mul(H[self.N], c)), F.mul(t[self.N], c)] + t[1:self.N]
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "out_taps", tuple(t))
        object.__setattr__(self, "back_taps", tuple(beta))

    @property
    def field(self):
        return self.code.field

    @property
    def q(self) -> int:
        return self.code.field.q

    def reversed(self) -> "DualSpec":
        """The reverse-memory-labeled machine written as a forward delay line.

        Fed c_T, ..., c_1 it keeps R_j = S'_{N+1-j}; scaling the input by
        gamma = -c puts its update in the form w <- gamma*c_k + c*R_N, so
        mu' = c and the output taps are t'_0 = beta_0 / gamma, t'_j = beta_{N+1-j}.
        """
        F, N = self.field, self.N
        rev = object.__new__(DualSpec)
        for name in ("code", "N", "l", "z", "taps"):
            object.__setattr__(rev, name, getattr(self, name))
        if N == 0:
            for name in ("feedback_coeff", "mu", "out_taps", "back_taps", "input_gain"):
                object.__setattr__(rev, name, getattr(self, name))
            return rev
        gamma = F.neg(self.feedback_coeff)
        beta = self.back_taps
        taps = (F.div(beta[0], gamma),) + tuple(beta[N + 1 - j] for j in range(1, N + 1))
        object.__setattr__(rev, "feedback_coeff", self.mu)
        object.__setattr__(rev, "mu", self.feedback_coeff)
        object.__setattr__(rev, "out_taps", taps)
        object.__setattr__(rev, "back_taps", ())
        object.__setattr__(rev, "input_gain", gamma)
        return rev

    def with_taps(self, taps: Sequence[int]) -> "DualSpec":
        """Copy with a replaced tap table (used to build negative controls)."""
        return DualSpec(self.code, self.N, self.l, self.z, tuple(taps), self.feedback_coeff)


def dual_taps(code: CodeSpec) -> DualSpec:
    """Derive the dual machine of ``code`` via the minimum complementary polynomial."""
    a, f = code.a, code.f
    if f.degree > a.degree:
        raise UnsupportedCode(
            f"deg f = {f.degree} > deg a = {a.degree}: the dual delay line cannot "
            "absorb the numerator without correlated registers")
    comp = min_complementary(a)
    if comp.N == 0:
        return DualSpec(code, 0, 0, comp.z, (f.coeffs[0],), comp.feedback_coeff)
    fz = poly_mul(f, comp.z)
    return DualSpec(code, comp.N, comp.l, comp.z, fz.padded(comp.N + 1), comp.feedback_coeff)


class DualEncoder:
    """Hard-symbol C-bar: code symbols in, information symbols out."""

    def __init__(self, dual: DualSpec):
        self.dual = dual
        F = dual.field
        self._mul, self._add = F.mul_table, F.add_table
        self._t = np.array(dual.out_taps, dtype=np.int64)

    def step_vec(self, regs: np.ndarray, c: np.ndarray):
        mul, add, t, N = self._mul, self._add, self._t, self.dual.N
        b = mul[t[0], c]
        for j in range(1, N + 1):
            b = add[b, mul[t[j], regs[..., j - 1]]]
        if N == 0:
            return regs, b
        w = add[c, mul[self.dual.mu, regs[..., N - 1]]]
        return np.concatenate([w[..., None], regs[..., :-1]], axis=-1), b

    def run(self, code_syms: Sequence[int], state: Sequence[int] | None = None):
        regs = np.zeros(self.dual.N, dtype=np.int64) if state is None \
            else np.array(state, dtype=np.int64)
        out = np.empty(len(code_syms), dtype=np.int64)
        for k, c in enumerate(code_syms):
            regs, out[k] = self.step_vec(regs, np.int64(c))
        return out, tuple(int(r) for r in regs)


class ReverseDualEncoder:
    """C-bar with reverse-memory labeling, fed the time-reversed code sequence.

    Register R_j holds S'_{N+1-j}.  One step consumes c_k and moves the
    labelled state from time k to time k-1:
    R_1 <- c * (R_N - c_k), R_j <- R_{j-1}.
    """

    def __init__(self, dual: DualSpec):
        self.dual = dual
        F = dual.field
        self._F = F
        self._beta = np.array(dual.back_taps, dtype=np.int64)

    def step_vec(self, regs: np.ndarray, c: np.ndarray):
        F, N, beta = self._F, self.dual.N, self._beta
        mul, add = F.mul_table, F.add_table
        b = mul[beta[0], c]
        for j in range(1, N + 1):
            b = add[b, mul[beta[j], regs[..., N - j]]]
        if N == 0:
            return regs, b
        new = mul[self.dual.feedback_coeff, F.sub_table[regs[..., N - 1], c]]
        return np.concatenate([new[..., None], regs[..., :-1]], axis=-1), b

    def run(self, reversed_code: Sequence[int], state: Sequence[int] | None = None):
        """Returns (info symbols in reversed order, visited states incl. start)."""
        regs = np.zeros(self.dual.N, dtype=np.int64) if state is None \
            else np.array(state, dtype=np.int64)
        states = [tuple(int(r) for r in regs)]
        out = np.empty(len(reversed_code), dtype=np.int64)
        for k, c in enumerate(reversed_code):
            regs, out[k] = self.step_vec(regs, np.int64(c))
            states.append(tuple(int(r) for r in regs))
        return out, states


def termination_tail(dual: DualSpec, dual_state: Sequence[int]) -> np.ndarray:
    """Code symbols c_{L+1..L+N} that flush C-bar from ``dual_state`` to zero.

    Each tail symbol cancels the feedback term: c_{L+i} = -mu * w_{L+i-N},
    and w_{L+i-N} is register S'_{N-i+1}(L).
    """
    F, N = dual.field, dual.N
    return np.array([F.neg(F.mul(dual.mu, dual_state[N - i])) for i in range(1, N + 1)],
                    dtype=np.int64)


@dataclass(frozen=True)
class Frame:
    info: np.ndarray        # L information symbols
    full_info: np.ndarray   # L + N symbols: info followed by the info-domain tail
    codeword: np.ndarray    # L + N transmitted code symbols


def _run_batch(machine, symbols: np.ndarray, regs: np.ndarray):
    out = np.empty_like(symbols)
    for k in range(symbols.shape[-1]):
        regs, out[..., k] = machine.step_vec(regs, symbols[..., k])
    return out, regs


def terminate(dual: DualSpec, info, check: bool = __debug__) -> Frame:
    """Encode ``info`` (shape (..., L)) and append the tail that zeroes C-bar.

    With ``check`` the frame is re-encoded by C to confirm that the same tail
    also returns C to the all-zero state.
    """
    info = np.asarray(info, dtype=np.int64)
    code, F, N = dual.code, dual.field, dual.N
    lead = info.shape[:-1]
    enc = encoder(code)
    codeword, _ = _run_batch(enc, info, np.zeros(lead + (enc.memory,), dtype=np.int64))
    dual_enc = DualEncoder(dual)
    recovered, state = _run_batch(dual_enc, codeword, np.zeros(lead + (N,), dtype=np.int64))
    # c_{L+i} = -mu * S'_{N-i+1}(L)
    tail_c = F.neg_table[F.mul_table[dual.mu, state[..., ::-1]]]
    tail_b, end_state = _run_batch(dual_enc, tail_c, state)
    full_info = np.concatenate([info, tail_b], axis=-1)
    full_code = np.concatenate([codeword, tail_c], axis=-1)
    if check:
        assert np.array_equal(recovered, info), "dual machine does not invert the encoder"
        assert not end_state.any(), "tail failed to terminate the dual machine"
        c_out, c_state = _run_batch(enc, full_info, np.zeros(lead + (enc.memory,), dtype=np.int64))
        assert np.array_equal(c_out, full_code), "encoder C disagrees with the dual tail"
        assert not c_state.any(), "dual tail does not terminate encoder C"
    return Frame(info, full_info, full_code)


def dual_trellis(dual: DualSpec) -> Trellis:
    """Trellis of the code realized on the N dual registers.

    Edges are labelled with the information symbol as input and the code
    symbol as output, so it is a trellis of the same code g(x) whose
    all-zero termination matches the N-symbol tail.
    """
    F, N = dual.field, dual.N
    t0_inv = F.inv(dual.out_taps[0])
    machine = DualEncoder(dual)
    t = np.array(dual.out_taps, dtype=np.int64)

    def step(regs, b):
        acc = np.zeros_like(b)
        for j in range(1, N + 1):
            acc = F.add_table[acc, F.mul_table[t[j], regs[..., j - 1]]]
        c = F.mul_table[t0_inv, F.sub_table[b, acc]]
        nxt, _ = machine.step_vec(regs, c)
        return nxt, c

    return trellis_from_step(F, N, step)


def inverse_encoder(code: CodeSpec) -> RationalEncoder:
    """Encoder for 1/g, minimal realization (used as an independent check)."""
    return encoder(code.inverse())

"""
Rate-1 convolutional codes over GF(q): code descriptors, the encoder C in
controller canonical form, and trellis construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import FieldMismatch, NoConstantTerm, TooManyStates
from .galois import GaloisField, parse_field
from .gfpoly import GfPoly

MAX_TRELLIS_STATES = 2**20


@dataclass(frozen=True)
class CodeSpec:
    """Generator g(x) = a(x)/f(x) of a rate-1 code over ``field``."""

    field: GaloisField
    a: GfPoly
    f: GfPoly

    def __post_init__(self):
        if self.a.field != self.field or self.f.field != self.field:
            raise FieldMismatch("generator polynomials live in a different field")
        for name, poly in (("numerator", self.a), ("denominator", self.f)):
            if poly.is_zero() or poly.coeffs[0] == 0:
                raise NoConstantTerm(f"{name} {poly} needs a nonzero constant term")

    @classmethod
    def from_coeffs(cls, field: GaloisField, a: Sequence[int], f: Sequence[int] = (1,)) -> "CodeSpec":
        return cls(field, GfPoly(field, a), GfPoly(field, f))

    @property
    def n(self) -> int:
        """Encoder memory max(deg a, deg f)."""
        return max(self.a.degree, self.f.degree)

    @property
    def K(self) -> int:
        return self.n + 1

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def descriptor(self) -> str:
        head = f"{self.field.descriptor}:({self.a})"
        if self.f.coeffs == (1,):
            return head
        return head + f"/({self.f})"

    def __str__(self):
        return self.descriptor

    def inverse(self) -> "CodeSpec":
        """The code generated by 1/g = f/a."""
        return CodeSpec(self.field, self.f, self.a)


_CODE_RE = re.compile(r"^\s*([^:]+(?::[\d,\s]+(?=:))?)\s*:\s*\(([^)]*)\)\s*(?:/\s*\(([^)]*)\))?\s*$")


def parse_code(text: str) -> CodeSpec:
    """Parse ``gf4:(1+3x+2x^2)/(1+x+2x^2)`` or ``gf4:(1+x)``."""
    match = _CODE_RE.match(text)
    if not match:
        raise ValueError(f"bad code descriptor {text!r}")
    fld, num, den = match.groups()
    F = parse_field(fld)
    a = GfPoly.parse(F, num)
    f = GfPoly.parse(F, den) if den else GfPoly(F, [1])
    return CodeSpec(F, a, f)


def state_index(regs: Sequence[int], q: int) -> int:
    """Register 1 is the least significant base-q digit."""
    idx = 0
    for r in reversed(list(regs)):
        idx = idx * q + int(r)
    return idx


def state_digits(index: np.ndarray, q: int, memory: int) -> np.ndarray:
    index = np.asarray(index)
    return np.stack([(index // q**j) % q for j in range(memory)], axis=-1).astype(np.int64) \
        if memory else np.zeros(index.shape + (0,), dtype=np.int64)


class RationalEncoder:
    """Controller canonical realization of num(x)/den(x) with ``memory`` registers.

    Internal sequence v satisfies den * v = input; the output is num * v.
    Registers hold (v_{k-1}, ..., v_{k-memory}).
    """

    def __init__(self, field: GaloisField, num: Sequence[int], den: Sequence[int],
                 memory: int | None = None):
        num, den = list(num), list(den)
        if memory is None:
            memory = max(len(num), len(den)) - 1
        if max(len(num), len(den)) - 1 > memory:
            raise ValueError("memory too small for the given polynomials")
        if not den or den[0] == 0:
            raise NoConstantTerm("denominator needs a nonzero constant term")
        self.field = field
        self.memory = memory
        self.num = np.array(num + [0] * (memory + 1 - len(num)), dtype=np.int64)
        self.den = np.array(den + [0] * (memory + 1 - len(den)), dtype=np.int64)
        self._den0_inv = field.inv(int(den[0]))

    def step_vec(self, regs: np.ndarray, inp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized transition: regs (..., memory), inp (...) -> (next regs, output)."""
        F = self.field
        mul, add, sub = F.mul_table, F.add_table, F.sub_table
        fb = np.zeros_like(inp)
        for i in range(1, self.memory + 1):
            fb = add[fb, mul[self.den[i], regs[..., i - 1]]]
        v = mul[self._den0_inv, sub[inp, fb]]
        out = mul[self.num[0], v]
        for i in range(1, self.memory + 1):
            out = add[out, mul[self.num[i], regs[..., i - 1]]]
        nxt = np.concatenate([v[..., None], regs[..., :-1]], axis=-1) if self.memory else regs
        return nxt, out

    def run(self, symbols: Sequence[int], state: Sequence[int] | None = None):
        """Encode a sequence; returns (outputs, final register tuple)."""
        regs = np.zeros(self.memory, dtype=np.int64) if state is None \
            else np.array(state, dtype=np.int64)
        if regs.shape != (self.memory,):
            raise ValueError(f"state must have {self.memory} registers")
        out = np.empty(len(symbols), dtype=np.int64)
        for k, s in enumerate(symbols):
            regs, out[k] = self.step_vec(regs, np.int64(s))
        return out, tuple(int(r) for r in regs)


def encoder(code: CodeSpec) -> RationalEncoder:
    return RationalEncoder(code.field, code.a.coeffs, code.f.coeffs, code.n)


def encode(code: CodeSpec, info: Sequence[int], initial: Sequence[int] | None = None) -> np.ndarray:
    """Codeword c = g(x) b(x), starting from ``initial`` (default all-zero)."""
    info = np.asarray(info, dtype=np.int64)
    if info.size and (info.min() < 0 or info.max() >= code.q):
        raise FieldMismatch(f"info symbols outside GF({code.q})")
    return encoder(code).run(info, initial)[0]


@dataclass(frozen=True)
class Trellis:
    """Time-invariant trellis with q edges leaving and entering every state.

    Edge ``e = u * q + x`` leaves state u on input symbol x.  ``into[u]``
    lists the q edges that end in state u.
    """

    field: GaloisField
    memory: int
    num_states: int
    src: np.ndarray
    dst: np.ndarray
    inp: np.ndarray
    out: np.ndarray
    into: np.ndarray

    @property
    def num_edges(self) -> int:
        return self.src.size

    def next_state(self, u: int, x: int) -> tuple[int, int]:
        e = u * self.field.q + x
        return int(self.dst[e]), int(self.out[e])

    def walk(self, inputs: Sequence[int], start: int = 0) -> tuple[np.ndarray, list[int]]:
        """Follow the trellis; returns (outputs, visited states incl. start)."""
        q = self.field.q
        u, states, outs = start, [start], []
        for x in inputs:
            e = u * q + int(x)
            outs.append(int(self.out[e]))
            u = int(self.dst[e])
            states.append(u)
        return np.array(outs, dtype=np.int64), states


def trellis_from_step(field: GaloisField, memory: int,
                      step: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]) -> Trellis:
    """Enumerate every (state, input) pair of a vectorized machine step."""
    q = field.q
    S = q**memory
    if S > MAX_TRELLIS_STATES:
        raise TooManyStates(f"{S} states exceed the limit of {MAX_TRELLIS_STATES}")
    src = np.repeat(np.arange(S, dtype=np.int64), q)
    inp = np.tile(np.arange(q, dtype=np.int64), S)
    regs = state_digits(src, q, memory)
    nxt, out = step(regs, inp)
    weights = q ** np.arange(memory, dtype=np.int64)
    dst = nxt @ weights if memory else np.zeros_like(src)
    order = np.argsort(dst, kind="stable")
    counts = np.bincount(dst, minlength=S)
    if not np.all(counts == q):
        raise ValueError("machine is not a bijective rate-1 trellis")
    into = order.reshape(S, q)
    arrays = (src, dst, inp, out.astype(np.int64), into)
    for arr in arrays:
        arr.flags.writeable = False
    return Trellis(field, memory, S, *arrays)


def build_trellis(code: CodeSpec) -> Trellis:
    """The q^n-state trellis of the minimal encoder C."""
    return trellis_from_step(code.field, code.n, encoder(code).step_vec)


def __getattr__(name):
    # termination lives with the dual machine, which is built on this module
    if name in ("termination_tail", "terminate"):
        from . import dualspec
        return getattr(dualspec, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")

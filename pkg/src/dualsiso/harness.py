"""
Monte Carlo BER simulation, decoder equivalence checks and the complexity
benchmark.

Every frame draws its information symbols and noise from its own random
stream keyed by (master seed, frame index), so results do not depend on
batching.  Frames are decoded in fixed-size chunks and the stop rule is
evaluated only at chunk boundaries, which keeps the frame count a
deterministic function of the configuration.
"""

from __future__ import annotations

import csv
import dataclasses
import gc
import io
import math
import random
import time
from dataclasses import dataclass, field
from functools import lru_cache, partial
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import bcjr_ref as _bcjr
from .channel import ChannelConfig, add_noise, demap, frame_rng, modulate
from .convcode import CodeSpec, encoder, parse_code
from .gfpoly import format_poly
from .dual import combine_decode, fb_output_product, forward_decode, backward_decode
from .dualspec import DualEncoder, DualSpec, ReverseDualEncoder, dual_taps, terminate
from .errors import AllZeroMass, DualSisoError

BUILTIN_CODES = (
    "gf4:(1+x)",
    "gf4:(1+3x+2x^2)",
    "gf4:(1+x+2x^2)",
    "gf4:(1+x)/(1+2x)",
    "gf4:(1+3x+2x^2)/(1+x+2x^2)",
)

DECODERS = ("bcjr", "dual-combined", "dual-fft", "dual-fb-product", "dual-forward-only")

CSV_COLUMNS = ("code", "decoder", "ebn0_db", "frames", "info_bits", "bit_errors",
               "symbol_errors", "ber", "ser", "seconds", "seed")

# Posteriors from different exact decoders differ by rounding error only;
# deciding on rounded values makes their hard decisions reproducible.
DECISION_DECIMALS = 10


@dataclass
class SimConfig:
    code: str
    decoder: str = "dual-combined"
    frame_len: int = 256
    ebn0: list[float] = field(default_factory=lambda: [0.0])
    max_frames: int | None = 20000
    target_errors: int | None = 200
    seed: int = 0
    transform_mode: str = "direct"
    chunk: int = 32
    timing: bool = True

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}; choose from {', '.join(DECODERS)}")
        if self.frame_len < 1:
            raise ValueError("frame_len must be >= 1")
        if self.max_frames is None and self.target_errors is None:
            raise ValueError("need at least one stop criterion (max_frames or target_errors)")
        if self.max_frames is not None and self.max_frames < 0:
            raise ValueError("max_frames must be >= 0")
        if self.chunk < 1:
            raise ValueError("chunk must be >= 1")
        if self.transform_mode not in ("direct", "fast"):
            raise ValueError("transform_mode must be 'direct' or 'fast'")
        self.ebn0 = [float(x) for x in self.ebn0]
        parse_code(self.code)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)


@dataclass
class BerRecord:
    code: str
    decoder: str
    ebn0_db: float
    frames: int
    info_bits: int
    bit_errors: int
    symbol_errors: int
    ber: float
    ser: float
    seconds: float
    seed: int
    failed_frames: int = 0

    def row(self) -> list[str]:
        return [self.code, self.decoder, f"{self.ebn0_db:g}", str(self.frames), str(self.info_bits),
                str(self.bit_errors), str(self.symbol_errors), f"{self.ber:.6e}", f"{self.ser:.6e}",
                f"{self.seconds:.3f}", str(self.seed)]

    def ber_interval(self, z: float = 1.96) -> tuple[float, float]:
        """Wilson score interval for the bit error rate."""
        return wilson_interval(self.bit_errors, self.info_bits, z)


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


# -- frames and decoders -------------------------------------------------------

@lru_cache(maxsize=None)
def _dual_for(code: CodeSpec) -> DualSpec:
    return dual_taps(code)


@lru_cache(maxsize=None)
def _trellis_for(code: CodeSpec):
    return _bcjr.reference_trellis(code)


def simulate_frames(dual: DualSpec, L: int, sigma: float, seed: int,
                    indices: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Draw, encode, transmit and demap a batch of frames.

    Returns (full info symbols (B, L+N), code-symbol pmfs (B, L+N, q)).
    """
    F = dual.field
    rngs = [frame_rng(seed, i) for i in indices]
    info = np.stack([r.integers(0, F.q, L) for r in rngs]) if rngs \
        else np.zeros((0, L), dtype=np.int64)
    frame = terminate(dual, info, check=False)
    chips = modulate(F, frame.codeword)
    noisy = np.stack([add_noise(c, sigma, r) for c, r in zip(chips, rngs)]) if rngs else chips
    return frame.full_info, demap(F, noisy, sigma)


def run_decoder(decoder: str, dual: DualSpec, pmfs: np.ndarray,
                transform_mode: str = "direct") -> np.ndarray:
    """Posterior info pmfs (B, L+N, q) from the named decoder."""
    if decoder == "bcjr":
        return _bcjr.bcjr_posteriors(_trellis_for(dual.code), pmfs)
    if decoder == "dual-combined":
        return combine_decode(dual, pmfs, mode=transform_mode)
    if decoder == "dual-fft":
        return combine_decode(dual, pmfs, mode="fast")
    if decoder == "dual-fb-product":
        return fb_output_product(dual, pmfs, mode=transform_mode)
    if decoder == "dual-forward-only":
        return forward_decode(dual, pmfs, mode=transform_mode)[0]
    raise ValueError(f"unknown decoder {decoder!r}")


def hard_decision(posteriors: np.ndarray) -> np.ndarray:
    return np.argmax(np.round(posteriors, DECISION_DECIMALS), axis=-1)


def _decode_robust(decoder, dual, pmfs, mode):
    """Decode a chunk; on numerical failure retry frame by frame.

    Returns (posteriors, mask of frames that decoded).
    """
    try:
        return run_decoder(decoder, dual, pmfs, mode), np.ones(len(pmfs), dtype=bool)
    except AllZeroMass:
        post = np.full(pmfs.shape, 1.0 / pmfs.shape[-1])
        ok = np.ones(len(pmfs), dtype=bool)
        for i in range(len(pmfs)):
            try:
                post[i] = run_decoder(decoder, dual, pmfs[i:i + 1], mode)[0]
            except AllZeroMass:
                ok[i] = False
        return post, ok


def _popcount_table(q: int) -> np.ndarray:
    return np.array([bin(i).count("1") for i in range(q)], dtype=np.int64)


def run_point(cfg: SimConfig, ebn0: float) -> BerRecord:
    code = parse_code(cfg.code)
    dual = _dual_for(code)
    F, L, N = code.field, cfg.frame_len, dual.N
    chan = ChannelConfig(ebn0, F.m, L, N)
    sigma = chan.sigma
    popcount = _popcount_table(F.q)
    frames = bit_errors = sym_errors = failed = 0
    start = time.perf_counter()
    next_index = 0
    while True:
        if cfg.max_frames is not None and next_index >= cfg.max_frames:
            break
        if cfg.target_errors is not None and bit_errors >= cfg.target_errors:
            break
        n = cfg.chunk if cfg.max_frames is None else min(cfg.chunk, cfg.max_frames - next_index)
        indices = range(next_index, next_index + n)
        next_index += n
        truth, pmfs = simulate_frames(dual, L, sigma, cfg.seed, indices)
        post, ok = _decode_robust(cfg.decoder, dual, pmfs, cfg.transform_mode)
        decided = hard_decision(post[:, :L])
        wrong = decided != truth[:, :L]
        bits = popcount[np.bitwise_xor(decided, truth[:, :L])]
        frames += int(ok.sum())
        failed += int((~ok).sum())
        sym_errors += int(wrong[ok].sum())
        bit_errors += int(bits[ok].sum())
    seconds = time.perf_counter() - start if cfg.timing else 0.0
    info_bits = frames * L * F.m
    n_syms = frames * L
    return BerRecord(cfg.code, cfg.decoder, float(ebn0), frames, info_bits, bit_errors, sym_errors,
                     bit_errors / info_bits if info_bits else 0.0,
                     sym_errors / n_syms if n_syms else 0.0,
                     seconds, cfg.seed, failed)


def run_simulation(cfg: SimConfig) -> list[BerRecord]:
    return [run_point(cfg, e) for e in cfg.ebn0]


# -- CSV and plot script -------------------------------------------------------

def _sort_key(row: Sequence[str]):
    return (row[0], row[1], float(row[2]))


def read_records(path: Path) -> list[list[str]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return []
    if tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path} does not have the expected CSV header")
    return rows[1:]


def format_csv(rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(sorted(rows, key=_sort_key))
    return buf.getvalue()


def write_records(path: str | Path, records: Sequence[BerRecord]) -> Path:
    """Merge records into the CSV at ``path`` (same key replaces), sorted; write a plot script."""
    path = Path(path)
    merged: dict[tuple, list[str]] = {}
    if path.exists() and path.stat().st_size:
        for row in read_records(path):
            merged[_sort_key(row)] = row
    for rec in records:
        row = rec.row()
        merged[_sort_key(row)] = row
    path.write_text(format_csv(merged.values()))
    script = path.with_suffix(".gp")
    script.write_text(gnuplot_script(path, sorted({(r[0], r[1]) for r in merged.values()})))
    return script


def gnuplot_script(csv_path: Path, series: Sequence[tuple[str, str]]) -> str:
    name = csv_path.name
    lines = [
        f"# BER curves for {name}; run: gnuplot -p {csv_path.with_suffix('.gp').name}",
        'set datafile separator ","',
        "set logscale y",
        "set format y \"10^{%L}\"",
        'set xlabel "Eb/N0 (dB)"',
        'set ylabel "BER"',
        "set grid",
        "set key bottom left",
    ]
    plots = []
    for code, dec in series:
        cond = f'(strcol(1) eq "{code}" && strcol(2) eq "{dec}" ? $8 : 1/0)'
        plots.append(f'"{name}" skip 1 using 3:{cond} with linespoints title "{code} {dec}"')
    if plots:
        lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


# -- decoder verification ---------------------------------------------------------

@dataclass
class CodeVerification:
    code: str
    frames: int
    forward_dev: float
    backward_dev: float
    combined_dev: float
    fft_dev: float
    decisions_agree: bool
    termination_pass: int
    state_match_pass: int
    tol: float = 1e-9
    fft_tol: float = 1e-10

    @property
    def ok(self) -> bool:
        return (self.forward_dev < self.tol and self.backward_dev < self.tol
                and self.combined_dev < self.tol and self.fft_dev < self.fft_tol
                and self.decisions_agree and self.termination_pass == self.frames
                and self.state_match_pass == self.frames)


@dataclass
class VerifyReport:
    results: list[CodeVerification]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def format(self) -> str:
        head = f"{'code':<30} {'forward':>9} {'backward':>9} {'combined':>9} {'fft':>9}  decisions  terminated  matched  status"
        out = [head]
        for r in self.results:
            out.append(f"{r.code:<30} {r.forward_dev:9.1e} {r.backward_dev:9.1e} {r.combined_dev:9.1e} "
                       f"{r.fft_dev:9.1e}  {'same' if r.decisions_agree else 'DIFFER':>9}  "
                       f"{r.termination_pass:>6}/{r.frames:<3}  {r.state_match_pass:>3}/{r.frames:<3}  "
                       f"{'ok' if r.ok else 'FAIL'}")
        return "\n".join(out)


def _state_checks(dual: DualSpec, info: np.ndarray) -> tuple[int, int]:
    """Count frames passing tail termination (both machines) and state agreement."""
    code = dual.code
    enc = encoder(code)
    fwd_machine, rev_machine = DualEncoder(dual), ReverseDualEncoder(dual)
    frame = terminate(dual, info, check=False)
    terminated = matched = 0
    for b, c in zip(frame.full_info, frame.codeword):
        c_out, c_state = enc.run(b)
        _, dual_state = fwd_machine.run(c)
        if np.array_equal(c_out, c) and not any(c_state) and not any(dual_state):
            terminated += 1
        regs = np.zeros(dual.N, dtype=np.int64)
        fwd_states = [tuple(regs)]
        for sym in c:
            regs, _ = fwd_machine.step_vec(regs, np.int64(sym))
            fwd_states.append(tuple(int(x) for x in regs))
        _, rev_states = rev_machine.run(c[::-1])
        if all(tuple(reversed(r)) == f for r, f in zip(rev_states[::-1], fwd_states)):
            matched += 1
    return terminated, matched


def verify_code(code: str | CodeSpec, frames: int = 100, seed: int = 0, L: int = 32,
                ebn0: float = 2.0, dual: DualSpec | None = None) -> CodeVerification:
    """Compare the dual decoders with the BCJR reference on random noisy frames.

    Frames and the reference trellis always come from ``code`` itself; a
    different ``dual`` (e.g. with corrupted taps) only replaces the machine
    under test.
    """
    spec = parse_code(code) if isinstance(code, str) else code
    true_dual = dual_taps(spec)
    dual = true_dual if dual is None else dual
    F = spec.field
    sigma = ChannelConfig(ebn0, F.m, L, true_dual.N).sigma
    truth, P = simulate_frames(true_dual, L, sigma, seed, range(frames))
    tr = _bcjr.reference_trellis(spec)
    ref_both = _bcjr.bcjr_posteriors(tr, P, "both")
    ref_fwd = _bcjr.bcjr_posteriors(tr, P, "forward")
    ref_bwd = _bcjr.bcjr_posteriors(tr, P, "backward")
    try:
        fwd = forward_decode(dual, P)[0]
        bwd = backward_decode(dual, P)[0]
        comb = combine_decode(dual, P, mode="direct")
        fast = combine_decode(dual, P, mode="fast")
    except DualSisoError:
        nan = float("inf")
        return CodeVerification(spec.descriptor, frames, nan, nan, nan, nan, False, 0, 0)
    terminated, matched = _state_checks(dual, truth[:, :L])
    return CodeVerification(
        spec.descriptor, frames,
        float(np.abs(fwd - ref_fwd).max(initial=0.0)),
        float(np.abs(bwd - ref_bwd).max(initial=0.0)),
        float(np.abs(comb - ref_both).max(initial=0.0)),
        float(np.abs(fast - comb).max(initial=0.0)),
        bool(np.array_equal(hard_decision(comb), hard_decision(ref_both))),
        terminated, matched)


def verify_theorems(codes: Iterable[str] = BUILTIN_CODES, frames: int = 100, seed: int = 0,
                    L: int = 32, ebn0: float = 2.0) -> VerifyReport:
    return VerifyReport([verify_code(c, frames, seed, L, ebn0) for c in codes])


# -- complexity benchmark ----------------------------------------------------------

@dataclass
class BenchRow:
    field: str
    n: int
    N: int
    states: int
    bcjr: float
    bcjr_sparse: float
    dual_direct: float
    dual_fft: float


@dataclass
class BenchReport:
    rows: list[BenchRow]

    def _fit_r2(self, attr: str) -> float:
        if len(self.rows) < 3:
            return float("nan")
        x = np.array([r.N for r in self.rows], dtype=float)
        y = np.array([getattr(r, attr) for r in self.rows])
        coef = np.polyfit(x, y, 1)
        resid = y - np.polyval(coef, x)
        ss_tot = np.sum((y - y.mean()) ** 2)
        return float(1.0 - np.sum(resid**2) / ss_tot) if ss_tot > 0 else 1.0

    @property
    def r2_direct(self) -> float:
        return self._fit_r2("dual_direct")

    @property
    def r2_fft(self) -> float:
        return self._fit_r2("dual_fft")

    @property
    def bcjr_ratios(self) -> list[float]:
        return [b.bcjr / a.bcjr for a, b in zip(self.rows, self.rows[1:])]

    @property
    def bcjr_sparse_ratios(self) -> list[float]:
        return [b.bcjr_sparse / a.bcjr_sparse for a, b in zip(self.rows, self.rows[1:])]

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f.name for f in dataclasses.fields(BenchRow)])
        for r in self.rows:
            w.writerow([r.field, r.n, r.N, r.states] +
                       [f"{getattr(r, k):.6f}" for k in ("bcjr", "bcjr_sparse", "dual_direct", "dual_fft")])
        return buf.getvalue()


def bench_code(q: int, n: int) -> CodeSpec:
    """Memory-n code whose dual machine has N = n + 1 and no zero taps.

    a(x) = 1 + x + ... + x^n gives z = 1 + x in characteristic 2.  The
    numerator alternates labels 1, 2 (ending in 3 when it would repeat its
    constant term) so that every coefficient of f(x)(1 + x) is nonzero and
    the decoder does the full per-register work.
    """
    if q < 4 or q % 2:
        raise ValueError("bench codes need GF(2^m) with m >= 2")
    f = [1 + (i % 2) for i in range(n + 1)]
    if n and f[n] == f[0]:
        f[n] = 3
    a = "+".join(["1", "x"] + [f"x^{i}" for i in range(2, n + 1)])
    return parse_code(f"gf{q}:({a})/({format_poly(f)})")


def _interleaved_times(jobs: Sequence[tuple], rounds: int, seed: int = 0) -> list[float]:
    """Robust seconds per call for each ``(fn, arg)`` job.

    Every round runs all jobs once in shuffled order on a fresh copy of the
    input with the garbage collector off.  Times are divided by their round
    mean, which cancels slow drift in machine speed, and the median ratio is
    scaled back by the median round mean.
    """
    rnd = random.Random(seed)
    order = list(range(len(jobs)))
    S = np.empty((rounds, len(jobs)))
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for r in range(rounds):
            rnd.shuffle(order)
            for i in order:
                fn, arg = jobs[i]
                arg = arg.copy()
                t = time.perf_counter()
                fn(arg)
                S[r, i] = time.perf_counter() - t
    finally:
        if was_enabled:
            gc.enable()
    scale = S.mean(axis=1, keepdims=True)
    return list(np.median(S / scale, axis=0) * np.median(scale))


def bench_complexity(q: int = 4, memories: Sequence[int] = (1, 2, 3), frames: int = 4,
                     L: int = 16, rounds: int = 150, pair_budget: int = 2**22,
                     bcjr_rounds: int = 3, seed: int = 0) -> BenchReport:
    """Per-frame decode time for BCJR and the dual decoders at each memory n.

    BCJR is timed in its state-pair form on batches holding ``pair_budget``
    pair metrics per step (at least ``frames`` frames), so per-call overhead
    is amortized equally at every n.  The dual decoders run many short calls
    on ``frames`` frames; see :func:`_interleaved_times`.
    """
    if frames <= 0:
        return BenchReport([])
    setups = []
    for n in memories:
        code = bench_code(q, n)
        dual = dual_taps(code)
        tr = _bcjr.reference_trellis(code)
        S = tr.num_states
        sigma = ChannelConfig(2.0, code.field.m, L, dual.N).sigma
        big = max(frames, -(-pair_budget // (S * S)))
        _, Pb = simulate_frames(dual, L, sigma, seed, range(big))
        _, P = simulate_frames(dual, L, sigma, seed, range(frames))
        setups.append((code, dual, tr, big, Pb, P))

    dual_jobs, bcjr_jobs = [], []
    for code, dual, tr, big, Pb, P in setups:
        dual_jobs += [(partial(combine_decode, dual, mode="direct"), P),
                      (partial(combine_decode, dual, mode="fast"), P)]
        bcjr_jobs += [(partial(_bcjr.bcjr_posteriors, tr, dense=True), Pb),
                      (partial(_bcjr.bcjr_posteriors, tr), Pb)]
    dual_t = _interleaved_times(dual_jobs, rounds, seed)
    bcjr_t = _interleaved_times(bcjr_jobs, bcjr_rounds, seed)

    rows = []
    for i, (code, dual, tr, big, Pb, P) in enumerate(setups):
        rows.append(BenchRow(
            code.field.descriptor, memories[i], dual.N, tr.num_states,
            bcjr_t[2 * i] / big, bcjr_t[2 * i + 1] / big,
            dual_t[2 * i] / frames, dual_t[2 * i + 1] / frames))
    return BenchReport(rows)


def bench_transform_modes(q: int = 16, n: int = 2, frames: int = 4, L: int = 16,
                          rounds: int = 100, seed: int = 0) -> tuple[float, float]:
    """(direct seconds, fast seconds) per call of the combined dual decoder over GF(q)."""
    code = bench_code(q, n)
    dual = dual_taps(code)
    sigma = ChannelConfig(2.0, code.field.m, L, dual.N).sigma
    _, P = simulate_frames(dual, L, sigma, seed, range(frames))
    direct, fast = _interleaved_times(
        [(partial(combine_decode, dual, mode="direct"), P),
         (partial(combine_decode, dual, mode="fast"), P)], rounds, seed)
    return direct, fast

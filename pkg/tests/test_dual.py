import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualsiso.bcjr_ref import bcjr_posteriors, reference_trellis
from dualsiso.convcode import parse_code
from dualsiso.dual import (backward_decode, combine_decode, fb_output_product, forward_decode,
                           get_transform_mode, set_transform_mode, transform_mode)
from dualsiso.dualspec import dual_taps, terminate
from dualsiso.errors import LengthMismatch
from dualsiso.harness import hard_decision

from conftest import EXTRA_CODES, PAPER_CODES, random_pmfs

MODES = ("direct", "fast")


def _frame(text, rng, L=10, batch=6):
    code = parse_code(text)
    d = dual_taps(code)
    return code, d, random_pmfs(rng, (batch, L + d.N), code.q)


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("text", PAPER_CODES + EXTRA_CODES)
class TestAgainstBCJR:
    def test_forward(self, text, mode, rng):
        code, d, P = _frame(text, rng)
        ref = bcjr_posteriors(reference_trellis(code), P, "forward")
        assert np.abs(forward_decode(d, P, mode=mode)[0] - ref).max() < 1e-9

    def test_backward(self, text, mode, rng):
        code, d, P = _frame(text, rng)
        ref = bcjr_posteriors(reference_trellis(code), P, "backward")
        assert np.abs(backward_decode(d, P, mode=mode)[0] - ref).max() < 1e-9

    def test_combined(self, text, mode, rng):
        code, d, P = _frame(text, rng)
        ref = bcjr_posteriors(reference_trellis(code), P)
        out = combine_decode(d, P, mode=mode)
        assert np.abs(out - ref).max() < 1e-9
        np.testing.assert_array_equal(hard_decision(out), hard_decision(ref))


@pytest.mark.parametrize("text", PAPER_CODES)
class TestNoiseless:
    def test_all_decoders_return_true_info(self, text, rng):
        code = parse_code(text)
        d = dual_taps(code)
        frame = terminate(d, rng.integers(0, 4, (3, 12)))
        P = np.eye(4)[frame.codeword]
        want = np.eye(4)[frame.full_info]
        np.testing.assert_allclose(forward_decode(d, P)[0], want, atol=1e-12)
        np.testing.assert_allclose(backward_decode(d, P)[0], want, atol=1e-12)
        np.testing.assert_allclose(combine_decode(d, P), want, atol=1e-12)
        np.testing.assert_allclose(fb_output_product(d, P), want, atol=1e-12)

    def test_banks_are_deltas_on_the_same_states(self, text, rng):
        code = parse_code(text)
        d = dual_taps(code)
        frame = terminate(d, rng.integers(0, 4, 12))
        P = np.eye(4)[frame.codeword]
        _, fwd = forward_decode(d, P, keep_history=True)
        _, bwd = backward_decode(d, P, keep_history=True)
        np.testing.assert_allclose(fwd.hist, bwd.hist, atol=1e-12)
        assert np.allclose(fwd.hist.max(-1), 1.0)
        # zero start and terminated end
        np.testing.assert_allclose(fwd.at(0)[:, 0], 1.0)
        np.testing.assert_allclose(fwd.at(fwd.T)[:, 0], 1.0, atol=1e-12)


class TestStructure:
    def test_uniform_in_uniform_out(self):
        d = dual_taps(parse_code("gf4:(1+x+2x^2)"))
        P = np.full((2, 15, 4), .25)
        np.testing.assert_allclose(forward_decode(d, P)[0], .25)
        np.testing.assert_allclose(combine_decode(d, P)[:, :15 - d.N], .25)

    @pytest.mark.parametrize("text", PAPER_CODES + EXTRA_CODES)
    def test_reversal_involution(self, text, rng):
        """Backward decoding equals forward decoding of the reversed frame by the reversed machine."""
        code, d, P = _frame(text, rng)
        rev = forward_decode(d.reversed(), P[:, ::-1])[0][:, ::-1]
        np.testing.assert_allclose(rev, backward_decode(d, P)[0], atol=1e-12)

    def test_combined_registers_at_boundaries(self, rng):
        code, d, P = _frame("gf4:(1+3x+2x^2)/(1+x+2x^2)", rng)
        _, fwd, bwd, comb = combine_decode(d, P, return_banks=True)
        np.testing.assert_allclose(comb.at(0)[..., 0], 1.0)
        np.testing.assert_allclose(comb.at(comb.T)[..., 0], 1.0, atol=1e-12)
        assert comb.registers.shape == (P.shape[0], P.shape[1] + 1, d.N, 4)

    def test_shape_errors(self):
        d = dual_taps(parse_code("gf4:(1+x+2x^2)"))
        with pytest.raises(LengthMismatch):
            forward_decode(d, np.full((10, 3), 1 / 3))
        with pytest.raises(LengthMismatch):
            combine_decode(d, np.full((3, 4), .25))

    def test_leading_axes(self, rng):
        code, d, P = _frame("gf4:(1+x)/(1+2x)", rng, batch=6)
        Q = P.reshape(2, 3, *P.shape[1:])
        np.testing.assert_allclose(combine_decode(d, Q).reshape(P.shape), combine_decode(d, P))
        np.testing.assert_allclose(combine_decode(d, P[0]), combine_decode(d, P)[0])

    def test_corrupted_taps_break_exactness(self, rng):
        code, d, P = _frame("gf4:(1+3x+2x^2)", rng)
        bad = d.with_taps((d.taps[0], d.taps[1], 2, d.taps[3]))
        ref = bcjr_posteriors(reference_trellis(code), P)
        assert np.abs(combine_decode(bad, P) - ref).max() > 1e-3

    @settings(max_examples=25, deadline=None)
    @given(st.floats(1e-3, 1e3), st.integers(0, 11))
    def test_scaling_invariance(self, scale, k):
        rng = np.random.default_rng(7)
        code, d, P = _frame("gf4:(1+x)/(1+2x)", rng, batch=2)
        Q = P.copy()
        Q[:, k] *= scale
        np.testing.assert_allclose(combine_decode(d, Q), combine_decode(d, P), atol=1e-12)


class TestTransformModes:
    def test_fast_equals_direct(self, rng):
        code, d, P = _frame("gf4:(1+x+2x^2)", rng, L=40, batch=20)
        direct = combine_decode(d, P, mode="direct")
        fast = combine_decode(d, P, mode="fast")
        assert np.abs(direct - fast).max() < 1e-10
        np.testing.assert_array_equal(hard_decision(direct), hard_decision(fast))

    def test_global_mode_and_aliases(self, rng):
        code, d, P = _frame("gf4:(1+x)", rng)
        assert get_transform_mode() == "direct"
        with transform_mode("fast-transform"):
            assert get_transform_mode() == "fast"
            out = combine_decode(d, P)
        assert get_transform_mode() == "direct"
        assert out.shape == combine_decode(d, P, mode="direct-convolution").shape
        with pytest.raises(ValueError):
            set_transform_mode("fft")

    @pytest.mark.parametrize("text", ["gf5:(1+2x+3x^2)/(2+x)", "gf16:(1+5x)/(3+x)"])
    def test_fast_mode_other_groups(self, text, rng):
        code, d, P = _frame(text, rng)
        for fn in (lambda m: forward_decode(d, P, mode=m)[0],
                   lambda m: backward_decode(d, P, mode=m)[0],
                   lambda m: combine_decode(d, P, mode=m)):
            assert np.abs(fn("fast") - fn("direct")).max() < 1e-10

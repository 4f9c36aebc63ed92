"""Exact soft-in soft-out decoding of rate-1 convolutional codes over GF(q)
with a dual-encoder shift-register machine."""

from .bcjr_ref import bcjr_posteriors, brute_force_posteriors, reference_trellis
from .channel import ChannelConfig, demap, modulate
from .convcode import CodeSpec, build_trellis, encode, parse_code
from .dual import (backward_decode, combine_decode, fb_output_product, forward_decode,
                   set_transform_mode, transform_mode)
from .dualspec import DualSpec, dual_taps, terminate
from .errors import DualSisoError
from .galois import GaloisField, field, parse_field
from .gfpoly import GfPoly, min_complementary
from .harness import SimConfig, run_point, verify_theorems

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig", "CodeSpec", "DualSisoError", "DualSpec", "GaloisField", "GfPoly",
    "SimConfig", "backward_decode", "bcjr_posteriors", "brute_force_posteriors",
    "build_trellis", "combine_decode", "demap", "dual_taps", "encode", "fb_output_product",
    "field", "forward_decode", "min_complementary", "modulate", "parse_code", "parse_field",
    "reference_trellis", "run_point", "set_transform_mode", "terminate", "transform_mode",
    "verify_theorems",
]

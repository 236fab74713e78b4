"""Tools for studying the predictability ("noise") of base-b digit sequences.

The package computes the finite-window prediction noise of digit strings,
generates sequences whose noise converges to prescribed values, builds the
marker-framed codec that copies arbitrary payload digits onto a sparse set
while keeping the overall noise small, and evaluates the entropy / noise /
Hausdorff-dimension formulas attached to Markov measures on digit shifts.
"""

__version__ = "0.1.0"

from .digitseq import (
    DigitSeq,
    champernowne,
    expand_rational,
    read_digits,
    uniform_random,
    write_digits,
)
from .predictor import (
    BlockFunction,
    ContextTable,
    NoiseProfile,
    beta_E,
    beta_ell,
    beta_ell_bruteforce,
    classify,
    default_grid,
    noise_profile,
    usable_length,
)
from .generators import (
    ProbVector,
    bernoulli_seq,
    block_concat,
    interleave,
    progression_partition,
    rauzy_u,
)
from .marker_codec import (
    CanonicalSpec,
    CodecParams,
    bin_rep,
    build_v,
    decode_block,
    encode_block,
    expand_c,
    predict_E,
    verify_block_errors,
)
from .measures import (
    DimBounds,
    MarkovSpec,
    bernoulli_opt,
    binary_entropy,
    block_prob,
    dim_bounds,
    entropy,
    markov_search,
    measure_noise,
    sample_markov,
    stationary,
)

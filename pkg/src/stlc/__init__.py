"""Nested quaternionic space-time lattice codes.

Exact constructions of the 4x4 code family L1..L6 and the DAST
baseline, a code-controlled sphere decoder, and a reproducible MISO
Rayleigh-fading simulation harness.
"""

from .algebra import (
    GaussianInt,
    QuatElement,
    gi_norm,
    golden_codeword,
    hurwitz_member,
    lipschitz_member,
    quat_mul,
    reduced_norm,
    reduced_trace,
)
from .channel import (
    BlerPoint,
    SimConfig,
    complexity_profile,
    dmt_bound,
    effective_channel,
    run_bler,
    sensitivity_metric,
)
from .decoder import (
    DecodeResult,
    EffectiveChannel,
    RankDeficient,
    block_split_decode,
    ml_oracle,
    qr_preprocess,
    sphere_decode,
)
from .lattices import (
    average_energy,
    binary_projection,
    encode_DAST,
    encode_H,
    encode_L1,
    gram_det,
    index_of,
    member,
    min_det_search,
    normalized_volume,
    rate_bpcu,
)

__version__ = "0.1.0"

"""Link-level simulator for generalized LED index modulation (GLIM) optical MIMO-OFDM.

The chain: bits -> QAM -> OFDM real stream -> GLIM LED mapping -> optical
channel -> (conditional-MAP | ZF | MMSE) detection -> bits, plus LED pair
selection and a seeded Monte Carlo BER engine.
"""

from .channel import (
    ChannelMatrix,
    RoomGeometry,
    build_lambertian_channel,
    default_room_geometry,
    load_channel_csv,
    normalize_channel,
    save_channel_csv,
    square_positions,
)
from .detect import (
    Detection,
    MapFilterBank,
    map_detect,
    map_detect_batch,
    mmse_detect,
    mmse_detect_batch,
    precompute_map_filters,
    zf_detect,
    zf_detect_batch,
)
from .glim import (
    ActiveSet,
    GlimBlock,
    LedMapping,
    active_column_indices,
    active_submatrix,
    candidate_column_indices,
    forward_model,
    map_block,
    map_blocks,
    sign_split,
    true_active_set,
    unmap_block,
)
from .modem import (
    Constellation,
    make_constellation,
    ofdm_demodulate,
    ofdm_modulate,
    qam_demap,
    qam_map,
)
from .selection import (
    CandidateScore,
    PairScore,
    SelectionReport,
    analyze_selection,
    column_cosine,
    condition_number,
    enumerate_candidates,
    score_pairs,
    select_mapping,
    worst_active_condition,
)
from .sim import (
    DETECTORS,
    BerRecord,
    SimConfig,
    count_bit_errors,
    resolve_channel,
    run_ber_sweep,
    sigma_from_snr,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveSet",
    "BerRecord",
    "CandidateScore",
    "ChannelMatrix",
    "Constellation",
    "DETECTORS",
    "Detection",
    "GlimBlock",
    "LedMapping",
    "MapFilterBank",
    "PairScore",
    "RoomGeometry",
    "SelectionReport",
    "SimConfig",
    "active_column_indices",
    "active_submatrix",
    "analyze_selection",
    "build_lambertian_channel",
    "candidate_column_indices",
    "column_cosine",
    "condition_number",
    "count_bit_errors",
    "default_room_geometry",
    "enumerate_candidates",
    "forward_model",
    "load_channel_csv",
    "make_constellation",
    "map_block",
    "map_blocks",
    "map_detect",
    "map_detect_batch",
    "mmse_detect",
    "mmse_detect_batch",
    "normalize_channel",
    "ofdm_demodulate",
    "ofdm_modulate",
    "precompute_map_filters",
    "qam_demap",
    "qam_map",
    "resolve_channel",
    "run_ber_sweep",
    "save_channel_csv",
    "score_pairs",
    "select_mapping",
    "sigma_from_snr",
    "sign_split",
    "square_positions",
    "true_active_set",
    "unmap_block",
    "worst_active_condition",
    "zf_detect",
    "zf_detect_batch",
    "__version__",
]

"""Induced proximal subshifts over symbolic base systems, at desk scale."""
from .analysis import (
    PairReport,
    check_orbit_window,
    classify_pair,
    compute_mprime,
    entropy_lower_bound,
    find_common_star_block,
    separation_blocks,
    separation_count,
    star_support,
)
from .base_system import (
    BasePoint,
    BaseSystem,
    StarSpace,
    count_words,
    distance,
    entropy_estimate,
    full_shift,
    golden_mean_shift,
    load_system,
    separated_count,
    shift,
)
from .partition import Partition, make_partition, min_valid_n, search_min_partition, verify_partition
from .points import (
    STAR,
    Orbit,
    PointSpec,
    RSequence,
    Window,
    check_membership,
    decode_r,
    decompose_index,
    sample_point,
    shift_point,
    star_point,
    symbol_at,
    window,
)
from .suite import ExperimentConfig, run_suite
from .tower import EpsSchedule, Tower, build_tower, default_toy_tower

__version__ = "0.1.0"

"""Streaming sketches, exact sparse recovery, and blackboard-protocol
experiments for heavy-hitter and set-disjointness questions at desk scale."""

from .distributions import (
    Decomposition,
    FiniteDistribution,
    decompose,
    js_divergence,
    kl_divergence,
    tv_distance,
)
from .blackboard import (
    TableProtocol,
    Transcript,
    random_table_protocol,
    run_protocol,
    transcript_distribution,
)
from .cleaning import (
    CleanProtocol,
    clean_all,
    clean_simulate,
    find_ignoring_set,
    gamma_constant,
    ignoring_set_bound,
    observation_probability,
)
from .instances import (
    DisjInstance,
    HardDistSample,
    adversarial_no_instance,
    adversarial_yes_instance,
    default_popularity,
    sample_eta,
    verify_promise,
)
from .setdisj import (
    deterministic_disj_protocol,
    epsilon_publish_protocol,
    pigeonhole_promise_protocol,
)
from .sketches import CountSketch, MisraGries, signed_estimate
from .sparse_recovery import SyndromeSketch, sketch_of_vector
from .turnstile import BoundedTurnstileHH, space_budget
from .reductions import (
    ReducedStream,
    SketchAdversary,
    compute_fp,
    fp_reduction_params,
    harmonic_power,
    hh_reduction_params,
    is_power_law,
    linear_sketch_adversary,
    powerlaw_eps_bound,
    powerlaw_reduction_params,
    to_fp_stream,
    to_hh_stream,
    to_powerlaw_stream,
)
from .streams import exact_heavy_hitters, heavy_hitter_set_valid, lp_moment, replay_updates
from .lowrank import (
    RowStreamInstance,
    counts_from_rows,
    gen_lowrank_instance,
    identify_star,
    mass_threshold,
    residual_rank1,
    top_right_singular_vector,
)

__version__ = "0.1.0"

"""Near-field hashing multi-arm beam (HMB) training simulator.

Library layout mirrors the pipeline: geometry (spherical-wave channel),
codebook (polar-domain sampling), hashing (bucket draws), multiarm (beam
synthesis and phase shaping), training (scan / decide / vote), experiments
(Monte Carlo sweeps and CSV).
"""

from .codebook import (SamplePoint, SingleBeamCodebook, build_codebook, fresnel,
                       load_codebook, max_cross_projection, projection,
                       projection_envelope, sample_angles, sample_distances,
                       save_codebook, solve_zeta)
from .experiments import (ExperimentSpec, ResultRow, emit_csv, parse_config,
                          parse_csv, run_accuracy_sweep, run_experiment,
                          run_farfield_check, run_overhead_sweep,
                          run_soft_hard_sweep, spec_from_config)
from .geometry import (ArrayGeometry, ChannelRealization, PolarPose,
                       exact_distance, los_channel, steering_vector,
                       taylor_distance)
from .hashing import (BucketTable, HashFamily, collision_rate, derive_seed,
                      draw_hash, table_from_permutation)
from .multiarm import (MainLobe, MultiArmCodeword, build_hmb_codebook,
                       deviation, load_hmb_codebook, main_lobe,
                       optimize_phases, pattern_multi, pattern_single,
                       save_hmb_codebook, synthesize)
from .training import (PowerTrace, ScenarioConfig, TrainingOutcome,
                       achievable_rate, eimb_train, exhaustive_train,
                       ground_truth_beam, hard_demultiplex, hmb_train,
                       place_base_stations, scan, soft_demultiplex, vote)

__version__ = "0.1.0"

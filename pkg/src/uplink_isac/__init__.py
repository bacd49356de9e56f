"""Projection-based joint detection and target estimation for uplink
dual-function radar-communication receivers."""

from .errors import (CapacityError, ConfigError, InvalidArgumentError,
                     ModelConstructionError, SolverError)
from .scene import (Constellation, Scene, StackedModel, SystemConfig,
                    TargetScene, build_target_response, gen_comm_channel,
                    gen_orthogonal_waveform, gen_scene, gen_symbols, qpsk,
                    radar_operators, stack_model, steering, synthesize_block)
from .receivers import (DetectionResult, Method, Strategy, detect_projected,
                        detect_sic, exhaustive_joint_ml, ls_target_estimate,
                        project, run_genie_receiver, run_projection_receiver,
                        run_sic_receiver)
from .sdr import SDROptions, sdr_relax_and_round
from .analysis import (MetricsRecord, RateReport, ber, bler,
                       crb_orthogonal, crb_target_response, ergodic_rates,
                       nmse, sinr_sic_empirical, sinr_sic_theory,
                       snr_projected_empirical,
                       snr_projected_theory, waterfill)
from .harness import (ExperimentConfig, Sweep, emit_results, load_config,
                      preset, run_sweep)
from .verify import verify

__version__ = "0.1.0"

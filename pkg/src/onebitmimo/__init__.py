"""Constructive-interference precoding benchmark for 1-bit massive-MIMO downlinks."""

from .core import (ChannelRealization, ConfigError, NoiseModel, NumericalError,
                   RngStream, real_stack, real_stack_matrix, real_unstack,
                   sample_bits, sample_channel, sample_noise, snr_to_sigma2)
from .modem import Constellation, build, build_psk, build_qam, detect, map_bits
from .ci import (BoundaryDirs, CiDecomposition, MarginReport, QamConstraintSpec,
                 boundary_dirs, bpsk_margin, classify_interference, decompose,
                 margin_report, psk_margin, qam_constraints)
from .lp import LinearProgram, LpSolution, solve_lp
from .precoders import (PRECODERS, PrecodeOutcome, PrecoderInput, get_precoder,
                        quantize_1bit)
from .bench import (BerCurve, ComplexityReport, SimConfig, count_multiplications,
                    dynamic_range_experiment, run_ber_sim, wilson_interval)
from .report import emit_csv, emit_json, emit_plot

__version__ = "0.1.0"

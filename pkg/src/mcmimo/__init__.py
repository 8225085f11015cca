"""Link-level Monte-Carlo simulator for the multi-cell massive-MIMO downlink.

Modules:
  config      scenario parameters, validation, QAM constellation bookkeeping
  geometry    hexagonal layout, user placement, large-scale gains
  channel     small-scale fading blocks and full-channel composition
  gramstats   channel-hardening moments of (1/N) H H^H
  training    pilots, uplink reception, correlation estimates, CSI modes
  precoding   MF / ZF / RZF / MMSE with a shared power normalization
  modem       square-QAM Gray mapping, genie-gain demapping, error counts
  asymptotics infinite-antenna SINR limits and the BER floor reference
  harness     drop/frame orchestration, power control, BER accumulation, CSV
  cli         batch entry point (console script `mcmimo`)
"""

from .asymptotics import (ber_floor, norm_factors, ultimate_sinr,
                          ultimate_sinr_simplified, write_floor_csv)
from .channel import (FadingBlock, ShapeMismatch, compose_full_channel,
                      draw_fading_block, draw_small_scale)
from .config import (CSI_MODES, NOISE_VAR_PER_DIM, PRECODER_KINDS,
                     BadGeometry, BadModulation, ConfigError, ModulationSpec,
                     SystemConfig, Underdetermined, config_from_mapping,
                     db_to_linear, load_config_file, modulation_spec,
                     resolved_rzf_zeta, validate_config)
from .geometry import (DegenerateDistance, Placement, build_layout,
                       hex_centers, in_hexagon, large_scale_coeffs,
                       link_distances, placement_to_csv)
from .gramstats import (GramStats, closed_form_moments, estimate_gram_moments,
                        gram_matrix, write_gram_csv)
from .harness import (BerPoint, PowerAllocation, downlink_transmit,
                      floor_table, genie_gains, power_control, run_point,
                      run_scenario, run_techniques, write_ber_csv)
from .modem import (BadLength, ZeroGain, count_errors, demap, map_bits,
                    qam_ber_reference)
from .precoding import (Precoder, PrecodingError, RankDeficient, ZeroChannel,
                        mf_precoder, mmse_precoder, rzf_precoder, zeta_mmse,
                        zf_precoder)
from .training import (ChannelEstimate, PilotSet, correlate, estimate_channel,
                       pilot_matrix, uplink_training)

__version__ = "0.1.0"

__all__ = [
    "BadGeometry", "BadLength", "BadModulation", "BerPoint", "CSI_MODES",
    "ChannelEstimate", "ConfigError", "DegenerateDistance", "FadingBlock",
    "GramStats", "ModulationSpec", "NOISE_VAR_PER_DIM", "PRECODER_KINDS",
    "PilotSet", "Placement", "PowerAllocation", "Precoder", "PrecodingError",
    "RankDeficient", "ShapeMismatch", "SystemConfig", "Underdetermined",
    "ZeroChannel", "ZeroGain", "ber_floor", "build_layout",
    "closed_form_moments", "compose_full_channel", "config_from_mapping",
    "correlate", "count_errors", "db_to_linear", "demap", "downlink_transmit",
    "draw_fading_block", "draw_small_scale", "estimate_channel",
    "estimate_gram_moments", "floor_table", "genie_gains", "gram_matrix",
    "hex_centers", "in_hexagon", "large_scale_coeffs", "link_distances",
    "load_config_file", "map_bits", "mf_precoder", "mmse_precoder",
    "modulation_spec", "norm_factors", "pilot_matrix", "placement_to_csv",
    "power_control", "qam_ber_reference", "resolved_rzf_zeta", "run_point",
    "run_scenario", "run_techniques", "rzf_precoder", "ultimate_sinr",
    "ultimate_sinr_simplified", "uplink_training", "validate_config",
    "write_ber_csv", "write_floor_csv", "write_gram_csv", "zeta_mmse",
    "zf_precoder",
]

"""OAM free-space optical links with OFDM index modulation."""
from .grid import (ComplexField, GridMismatchError, LgBeamSpec, SimulationGrid, lg_field, lg_mode,
                   normalize, overlap, power)
from .linksim import (BerRecord, NoiseModel, apply_channel, capacity_cdf, eb_n0_to_n0,
                      run_ber_sweep, union_bound_ber)
from .ofdm_im import (OfdmImConfig, combination_to_index, im_encode, index_to_combination, k_opt,
                      ml_detect, ofdm_demodulate, ofdm_modulate, qam_demap, qam_map,
                      spectral_efficiency, table1_lookup)
from .propagation import (AliasingError, ChannelEnsemble, ChannelRealization, modal_decompose,
                          sample_channel, sample_ensemble, turbulent_propagate, vacuum_step)
from .turbulence import (PhaseScreen, TurbulenceParams, generate_phase_screen, kolmogorov_spectrum,
                         rytov_variance)

__version__ = "0.1.0"

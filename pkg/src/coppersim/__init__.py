"""Multi-pair DSL binder simulator.

Synthesizes seeded per-tone binder channels, applies a ladder of crosstalk
cancellation schemes, and converts per-line SNRs into achievable data rates
under PSD masks and power constraints.
"""

__version__ = "0.1.0"

from .errors import ConfigError, NumericalError, SingularDesignError
from .tones import PROFILES, TonePlan, get_profile, tone_frequencies
from .channel import (
    BinderConfig,
    ChannelModelParams,
    ChannelTensor,
    diagonal_dominance_ratio,
    direct_insertion_loss,
    direct_response,
    fext_response,
    load_channel_csv,
    save_channel_csv,
    synth_channel,
)
from .cancelers import (
    CancelerDesign,
    Scheme,
    apply_thp,
    design_dfe,
    design_diag,
    design_mmse,
    design_thp,
    design_zf,
    effective_snr,
)
from .rates import (
    RateReport,
    SpectrumPlan,
    bitload,
    enforce_total_power,
    mask_psd,
    scenario_rates,
    tone_power,
)
from .rfi import (
    CouplingEstimate,
    RfiScenario,
    cancel_and_rate,
    coupling_gain,
    estimate_coupling,
    simulate_training,
)

__all__ = [
    "BinderConfig",
    "CancelerDesign",
    "ChannelModelParams",
    "ChannelTensor",
    "ConfigError",
    "CouplingEstimate",
    "NumericalError",
    "PROFILES",
    "RateReport",
    "RfiScenario",
    "Scheme",
    "SingularDesignError",
    "SpectrumPlan",
    "TonePlan",
    "apply_thp",
    "bitload",
    "cancel_and_rate",
    "coupling_gain",
    "design_dfe",
    "design_diag",
    "design_mmse",
    "design_thp",
    "design_zf",
    "diagonal_dominance_ratio",
    "direct_insertion_loss",
    "direct_response",
    "effective_snr",
    "enforce_total_power",
    "estimate_coupling",
    "fext_response",
    "get_profile",
    "load_channel_csv",
    "mask_psd",
    "save_channel_csv",
    "scenario_rates",
    "simulate_training",
    "synth_channel",
    "tone_frequencies",
    "tone_power",
]

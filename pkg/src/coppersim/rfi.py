"""External interference at the CPE with a noise-reference sensor.

The interferer reaches the sensor directly and leaks into the main
receiver through a frequency-dependent coupling imbalance. During a quiet
period (no desired signal) the canceler least-squares fits the coupling
per tone from paired (main, sensor) observations, then subtracts the
scaled reference from the main path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cancelers import Scheme
from .channel import ChannelTensor
from .errors import ConfigError
from .rates import RateReport, SpectrumPlan, scenario_rates, tone_power
from .tones import TonePlan, tone_frequencies

#: Default coupling imbalance bands (upper edge Hz, main-vs-sensor dB).
DEFAULT_COUPLING = ((30e6, -40.0), (106e6, -30.0), (math.inf, -20.0))


@dataclass(frozen=True)
class RfiScenario:
    """Interferer spectrum, sensor coupling profile and estimator settings.

    ``interferer_psd_dbm_hz`` is a flat PSD or per-band list of
    (upper edge Hz, PSD); ``None`` disables the interferer entirely.
    """

    interferer_psd_dbm_hz: float | tuple | None = -80.0
    coupling_db: tuple = DEFAULT_COUPLING
    sensor_noise_psd_dbm_hz: float = -150.0
    training_symbols: int = 1024
    seed: int = 0

    def __post_init__(self):
        if self.training_symbols < 1:
            raise ConfigError("training_symbols must be >= 1")
        bands = tuple((float(e), float(v)) for e, v in self.coupling_db)
        edges = [e for e, _ in bands]
        if any(b <= a for a, b in zip(edges, edges[1:])) or not math.isinf(edges[-1]):
            raise ConfigError("coupling bands must be increasing and end at infinity")
        object.__setattr__(self, "coupling_db", bands)


@dataclass
class CouplingEstimate:
    """Per-tone coupling fit plus the analytic post-cancellation residual."""

    gains_hat: np.ndarray        # (T,) complex
    residual_mw: np.ndarray      # (T,) interference power left after subtraction
    leakage_mw: np.ndarray       # (T,) sensor-noise power injected by the canceler
    flagged: np.ndarray          # (T,) bool, estimate undefined on these tones
    error_std: np.ndarray        # (T,) declared 1-sigma estimation slack


def _band_lookup(bands, f):
    edges = np.array([e for e, _ in bands])
    vals = np.array([v for _, v in bands])
    return vals[np.searchsorted(edges, np.asarray(f, dtype=float), side="left")]


def interferer_tone_power(scenario: RfiScenario, plan: TonePlan) -> np.ndarray:
    """Interferer power per tone in mW (zeros when disabled)."""
    f = tone_frequencies(plan)
    if scenario.interferer_psd_dbm_hz is None:
        return np.zeros(plan.num_tones)
    psd = scenario.interferer_psd_dbm_hz
    if np.isscalar(psd):
        psd = np.full(plan.num_tones, float(psd))
    else:
        psd = _band_lookup(tuple(psd), f)
    return tone_power(psd, plan.spacing_hz)


def coupling_gains(scenario: RfiScenario, plan: TonePlan) -> np.ndarray:
    """Per-tone complex coupling, magnitude from the band profile, seeded phase."""
    f = tone_frequencies(plan)
    mag = 10.0 ** (_band_lookup(scenario.coupling_db, f) / 20.0)
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=int(scenario.seed), spawn_key=(90,))
    )
    phase = rng.uniform(0.0, 2.0 * np.pi, plan.num_tones)
    return mag * np.exp(1j * phase)


def coupling_gain(f_hz, scenario: RfiScenario, plan: TonePlan) -> complex:
    """Coupling at one frequency: band magnitude, nearest tone's fixed phase."""
    idx = int(round((f_hz - plan.start_hz) / plan.spacing_hz))
    if f_hz <= 0 or not 0 <= idx < plan.num_tones:
        raise ConfigError(f"{f_hz} Hz lies outside the {plan.profile_name} tone plan")
    mag = float(10.0 ** (_band_lookup(scenario.coupling_db, f_hz) / 20.0))
    phase = np.angle(coupling_gains(scenario, plan)[idx])
    return complex(mag * np.exp(1j * phase))


@dataclass
class TrainingObservations:
    """Quiet-period paired snapshots: main (g*i + w) and sensor (i + v)."""

    main: np.ndarray     # (T, N) complex
    sensor: np.ndarray   # (T, N) complex
    scenario: RfiScenario
    plan: TonePlan
    line_noise_psd_dbm_hz: float


def _cgauss(rng, power, shape):
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z * np.sqrt(np.asarray(power, dtype=float) / 2.0)


def simulate_training(
    scenario: RfiScenario, plan: TonePlan, line_noise_psd_dbm_hz=-140.0
) -> TrainingObservations:
    """Generate seeded per-tone training snapshots (desired signal absent)."""
    n = scenario.training_symbols
    p_int = interferer_tone_power(scenario, plan)
    g = coupling_gains(scenario, plan)
    sv = tone_power(scenario.sensor_noise_psd_dbm_hz, plan.spacing_hz)
    sw = tone_power(line_noise_psd_dbm_hz, plan.spacing_hz)
    t = plan.num_tones
    main = np.empty((t, n), dtype=complex)
    sensor = np.empty((t, n), dtype=complex)
    # Per-tone substreams keep generation deterministic under any
    # parallel evaluation order.
    for ti in range(t):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=int(scenario.seed), spawn_key=(91, ti))
        )
        i = _cgauss(rng, p_int[ti], n)
        v = _cgauss(rng, sv, n)
        w = _cgauss(rng, sw, n)
        sensor[ti] = i + v
        main[ti] = g[ti] * i + w
    return TrainingObservations(
        main=main,
        sensor=sensor,
        scenario=scenario,
        plan=plan,
        line_noise_psd_dbm_hz=line_noise_psd_dbm_hz,
    )


def estimate_coupling(obs: TrainingObservations) -> CouplingEstimate:
    """Per-tone least-squares coupling fit with analytic residual accounting.

    Tones with no interferer (or an all-zero sensor record) are flagged and
    the canceler becomes a pass-through there: zero gain, residual equal to
    the uncancelled interference power.
    """
    scenario, plan = obs.scenario, obs.plan
    p_int = interferer_tone_power(scenario, plan)
    g = coupling_gains(scenario, plan)
    sv = tone_power(scenario.sensor_noise_psd_dbm_hz, plan.spacing_hz)
    sw = tone_power(obs.line_noise_psd_dbm_hz, plan.spacing_hz)
    n = scenario.training_symbols

    denom = (np.abs(obs.sensor) ** 2).sum(axis=1)
    flagged = (p_int == 0) | (denom == 0)
    num = (obs.main * obs.sensor.conj()).sum(axis=1)
    gains_hat = np.where(flagged, 0.0, num / np.where(denom == 0, 1.0, denom))

    residual = np.where(flagged, np.abs(g) ** 2 * p_int, np.abs(g - gains_hat) ** 2 * p_int)
    leakage = np.abs(gains_hat) ** 2 * sv
    # First-order LS error variance: (line noise + coupled sensor noise)
    # over N times the sensor power.
    sensor_pow = p_int + sv
    err_var = (sw + np.abs(g) ** 2 * sv) / (n * np.where(sensor_pow == 0, 1.0, sensor_pow))
    return CouplingEstimate(
        gains_hat=gains_hat,
        residual_mw=residual,
        leakage_mw=leakage,
        flagged=flagged,
        error_std=np.sqrt(err_var),
    )


def cancel_and_rate(
    channel: ChannelTensor,
    spectrum: SpectrumPlan,
    scheme: Scheme,
    scenario: RfiScenario,
    jobs=1,
) -> tuple[RateReport, RateReport]:
    """Rate reports with the sensor canceler off and on.

    Off adds the coupled interferer power to the per-tone noise; on adds
    the post-cancellation residual plus the canceler's sensor-noise
    leakage. Downstream only (the interference model is CPE-side).
    """
    if channel.direction != "downstream":
        raise ConfigError("sensor cancellation models CPE-side (downstream) noise")
    plan = channel.plan
    p_int = interferer_tone_power(scenario, plan)
    g = coupling_gains(scenario, plan)
    off_extra = np.abs(g) ** 2 * p_int
    obs = simulate_training(scenario, plan, spectrum.noise_psd_dbm_hz)
    est = estimate_coupling(obs)
    on_extra = est.residual_mw + est.leakage_mw
    off = scenario_rates(channel, spectrum, scheme, extra_noise_mw=off_extra, jobs=jobs)
    on = scenario_rates(channel, spectrum, scheme, extra_noise_mw=on_extra, jobs=jobs)
    off.metadata["rfi_canceler"] = "off"
    on.metadata["rfi_canceler"] = "on"
    return off, on

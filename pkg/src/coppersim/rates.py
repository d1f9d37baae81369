"""Gap-approximation bit loading and achievable-rate computation.

Pipeline per tone: PSD mask -> tone power -> total-power enforcement ->
canceler design -> effective SNR -> bit loading. Tones are processed in
fixed-size chunks (optionally on a thread pool); chunk boundaries do not
depend on the worker count, so results are bit-identical for any ``jobs``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .cancelers import COND_LIMIT, Scheme, effective_snr
from .channel import ChannelTensor
from .errors import ConfigError, NumericalError
from .tones import tone_frequencies

#: Default transmit PSD mask: (upper band edge Hz, PSD dBm/Hz). A breakpoint
#: belongs to the band below it (30 MHz reads -65, 106 MHz reads -76).
DEFAULT_MASK = ((30e6, -65.0), (106e6, -76.0), (math.inf, -79.0))

_CHUNK_TONES = 1024


@dataclass(frozen=True)
class SpectrumPlan:
    """Transmit mask, noise floor, SNR gap, bit cap and power cap."""

    mask: tuple = DEFAULT_MASK
    noise_psd_dbm_hz: float = -140.0
    gap_db: float = 10.75
    bit_cap: float = 15.0
    total_power_dbm: float = 4.0
    bit_mode: str = "continuous"

    def __post_init__(self):
        mask = tuple((float(e), float(p)) for e, p in self.mask)
        if not mask:
            raise ConfigError("mask must contain at least one band")
        edges = [e for e, _ in mask]
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ConfigError("mask band edges must be strictly increasing")
        if not math.isinf(edges[-1]):
            raise ConfigError("last mask band must extend to infinity")
        object.__setattr__(self, "mask", mask)
        if self.gap_db < 0:
            raise ConfigError("gap_db must be >= 0")
        if self.bit_cap < 1:
            raise ConfigError("bit_cap must be >= 1")
        if self.bit_mode not in ("continuous", "integer"):
            raise ConfigError("bit_mode must be 'continuous' or 'integer'")

    @property
    def gap_linear(self) -> float:
        return 10.0 ** (self.gap_db / 10.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mask"] = [[e if math.isfinite(e) else "inf", p] for e, p in self.mask]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumPlan":
        d = dict(d)
        if "mask" in d:
            d["mask"] = tuple(
                (math.inf if e in ("inf", ".inf") else float(e), float(p))
                for e, p in d["mask"]
            )
        return cls(**d)


@dataclass
class RateReport:
    """Per-line bit loading and aggregate rates for one scheme."""

    scheme: Scheme
    lengths_m: tuple
    bits: np.ndarray                 # (K, num_tones)
    snr: np.ndarray                  # (K, num_tones), linear
    per_line_rate_mbps: np.ndarray   # (K,)
    aggregate_mbps: float
    metadata: dict = field(default_factory=dict)


def mask_psd(f_hz, spectrum: SpectrumPlan, plan=None):
    """Piecewise-constant mask lookup in dBm/Hz.

    With ``plan`` given, frequencies outside the tone grid are rejected.
    """
    f = np.asarray(f_hz, dtype=float)
    if np.any(f <= 0):
        raise ConfigError("frequency must be positive")
    if plan is not None:
        freqs = tone_frequencies(plan)
        if np.any(f < freqs[0]) or np.any(f > freqs[-1]):
            raise ConfigError("frequency outside the tone plan")
    edges = np.array([e for e, _ in spectrum.mask])
    psds = np.array([p for _, p in spectrum.mask])
    idx = np.searchsorted(edges, f, side="left")
    out = psds[idx]
    return float(out) if np.isscalar(f_hz) else out


def tone_power(psd_dbm_hz, spacing_hz):
    """Power of one tone in mW given its PSD and the tone spacing."""
    if spacing_hz <= 0:
        raise ConfigError("spacing must be positive")
    return 10.0 ** (np.asarray(psd_dbm_hz, dtype=float) / 10.0) * spacing_hz


def enforce_total_power(per_tone_mw, cap_dbm):
    """Uniformly rescale tone powers so their sum meets the aggregate cap.

    Returns (scaled powers, scale factor).
    """
    p = np.asarray(per_tone_mw, dtype=float)
    if np.any(p < 0):
        raise ConfigError("tone powers must be non-negative")
    cap_mw = 10.0 ** (cap_dbm / 10.0)
    total = p.sum()
    if total <= cap_mw:
        return p.copy(), 1.0
    scale = cap_mw / total
    return p * scale, scale


def bitload(snr_linear, spectrum: SpectrumPlan):
    """Bits per tone under the SNR-gap approximation, capped and non-negative."""
    snr = np.asarray(snr_linear, dtype=float)
    if np.any(snr < 0):
        raise ConfigError("SNR must be non-negative")
    b = np.log2(1.0 + snr / spectrum.gap_linear)
    if spectrum.bit_mode == "integer":
        b = np.floor(b)
    b = np.minimum(b, spectrum.bit_cap)
    out = np.maximum(b, 0.0)
    return float(out) if np.isscalar(snr_linear) else out


def _snr_chunks(h, scheme, sigma2, p, jobs):
    t = h.shape[0]
    bounds = [(a, min(a + _CHUNK_TONES, t)) for a in range(0, t, _CHUNK_TONES)]

    def work(ab):
        a, b = ab
        return effective_snr(scheme, h[a:b], sigma2[a:b], p[a:b], cond_check=False)

    if jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(ab) for ab in bounds]
    return np.concatenate(parts, axis=0)


def scenario_rates(
    channel: ChannelTensor,
    spectrum: SpectrumPlan,
    scheme: Scheme,
    extra_noise_mw=None,
    ill_conditioned="error",
    jobs=1,
) -> RateReport:
    """Full rate pipeline for one channel tensor and one scheme.

    ``extra_noise_mw`` adds per-tone noise power (mW) on top of the
    background floor; ``ill_conditioned`` is "error" (raise, naming the
    tone) or "skip" (zero bits on offending tones of inversion-based
    schemes).
    """
    if ill_conditioned not in ("error", "skip"):
        raise ConfigError("ill_conditioned must be 'error' or 'skip'")
    if scheme.variant in ("thp",) and channel.direction != "downstream":
        raise ConfigError("THP requires a downstream channel tensor")
    if scheme.variant in ("dfe",) and channel.direction != "upstream":
        raise ConfigError("DFE requires an upstream channel tensor")
    plan = channel.plan
    freqs = tone_frequencies(plan)
    psd = mask_psd(freqs, spectrum, plan)
    p_raw = tone_power(psd, plan.spacing_hz)
    p, scale = enforce_total_power(p_raw, spectrum.total_power_dbm)
    sigma2 = np.full(
        plan.num_tones, tone_power(spectrum.noise_psd_dbm_hz, plan.spacing_hz)
    )
    if extra_noise_mw is not None:
        extra = np.asarray(extra_noise_mw, dtype=float)
        if extra.shape not in ((), (plan.num_tones,)):
            raise ConfigError("extra_noise_mw must be scalar or per-tone")
        sigma2 = sigma2 + extra

    h = channel.matrices
    skipped = np.zeros(plan.num_tones, dtype=bool)
    if scheme.variant in ("zf", "thp"):
        cond = np.linalg.cond(h)
        bad = cond > COND_LIMIT
        if bad.any():
            if ill_conditioned == "error":
                raise NumericalError(
                    "ill-conditioned channel matrix", tone=int(np.argmax(bad))
                )
            skipped = bad
            h = h.copy()
            h[bad] = np.eye(h.shape[-1])

    snr = _snr_chunks(h, scheme, sigma2, p, jobs)    # (T, K)
    bits = bitload(snr, spectrum)
    if skipped.any():
        bits[skipped] = 0.0
        snr = snr.copy()
        snr[skipped] = 0.0

    bits_kt = bits.T.copy()
    snr_kt = snr.T.copy()
    per_line = plan.symbol_rate_hz * bits_kt.sum(axis=1) / 1e6
    meta = {
        "profile": plan.profile_name,
        "direction": channel.direction,
        "scheme": scheme.variant,
        "seed": channel.binder.seed if channel.binder else None,
        "power_scale": scale,
        "spectrum": spectrum.to_dict(),
        "skipped_tones": int(skipped.sum()),
    }
    lengths = channel.binder.lengths_m if channel.binder else ()
    return RateReport(
        scheme=scheme,
        lengths_m=lengths,
        bits=bits_kt,
        snr=snr_kt,
        per_line_rate_mbps=per_line,
        aggregate_mbps=float(per_line.sum()),
        metadata=meta,
    )

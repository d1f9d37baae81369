"""Seeded synthesis of per-tone binder channel matrices.

Direct paths follow a CAT5-class three-term insertion-loss law; FEXT
couplings grow log-linearly with frequency up to a cap relative to the
victim's direct path, with log-normal dispersion and uniform phase. Every
random quantity is drawn from a substream keyed by
(seed, direction, disturber, victim), so synthesis is deterministic and
independent of evaluation order.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .tones import TonePlan, tone_frequencies

DIRECTIONS = ("downstream", "upstream")

MAX_LINES = 512


@dataclass(frozen=True)
class BinderConfig:
    """Binder geometry: K line lengths plus the master seed."""

    num_lines: int
    lengths_m: tuple
    seed: int

    def __post_init__(self):
        if not 1 <= self.num_lines <= MAX_LINES:
            raise ConfigError(f"num_lines must be in [1, {MAX_LINES}]")
        lengths = tuple(float(x) for x in self.lengths_m)
        if len(lengths) != self.num_lines:
            raise ConfigError("lengths_m must have num_lines entries")
        if any(l <= 0 for l in lengths):
            raise ConfigError("all line lengths must be positive")
        object.__setattr__(self, "lengths_m", lengths)
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ChannelModelParams:
    """Cable and FEXT model constants.

    Attenuation constants are dB per 100 m with frequency in MHz. FEXT is
    parameterized as a power ratio to the victim's direct path: ``fext_k0_db``
    at ``fext_ref_hz``, growing ``fext_slope_db_per_decade`` and clamped at
    ``fext_cap_db``, with per-pair-per-tone log-normal dispersion
    ``fext_sigma_db``.
    """

    atten_k1: float = 1.967
    atten_k2: float = 0.023
    atten_k3: float = 0.050
    delay_ns_per_m: float = 5.0
    fext_k0_db: float = -45.0
    fext_slope_db_per_decade: float = 20.0
    fext_cap_db: float = 0.0
    fext_sigma_db: float = 5.0
    fext_ref_hz: float = 1e6

    def __post_init__(self):
        if self.fext_slope_db_per_decade < 0:
            raise ConfigError("fext_slope_db_per_decade must be >= 0")
        if self.fext_sigma_db < 0:
            raise ConfigError("fext_sigma_db must be >= 0")
        if self.fext_ref_hz <= 0:
            raise ConfigError("fext_ref_hz must be positive")


@dataclass
class ChannelTensor:
    """Per-tone K x K coupling matrices for one binder and direction.

    ``matrices[t, i, j]`` is the coupling from transmitter j to receiver i
    at tone t. Immutable after synthesis.
    """

    plan: TonePlan
    matrices: np.ndarray
    direction: str
    binder: BinderConfig | None = None
    params: ChannelModelParams | None = None

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=complex)
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise ConfigError("matrices must have shape (num_tones, K, K)")
        if m.shape[0] != self.plan.num_tones:
            raise ConfigError("one matrix per tone required")
        if self.direction not in DIRECTIONS:
            raise ConfigError(f"direction must be one of {DIRECTIONS}")
        if not np.all(np.isfinite(m.view(float))):
            raise ConfigError("channel entries must be finite")
        diag = np.diagonal(m, axis1=1, axis2=2)
        if np.any(diag == 0):
            raise ConfigError("diagonal entries must be nonzero on every tone")
        m.setflags(write=False)
        self.matrices = m

    @property
    def num_lines(self) -> int:
        return self.matrices.shape[1]


def _check_f_length(f_hz, length_m):
    f = np.asarray(f_hz, dtype=float)
    if np.any(f <= 0):
        raise ConfigError("frequency must be positive")
    if length_m <= 0:
        raise ConfigError("line length must be positive")
    return f


def direct_insertion_loss(f_hz, length_m, params=None):
    """Direct-path insertion loss in dB at frequency ``f_hz`` over ``length_m``."""
    p = params or ChannelModelParams()
    f = _check_f_length(f_hz, length_m)
    f_mhz = f / 1e6
    sqrt_f = np.sqrt(f_mhz)
    per_100m = p.atten_k1 * sqrt_f + p.atten_k2 * f_mhz + p.atten_k3 / sqrt_f
    return (length_m / 100.0) * per_100m


def direct_response(f_hz, length_m, params=None):
    """Complex direct-path gain: insertion-loss magnitude, linear-delay phase."""
    p = params or ChannelModelParams()
    f = _check_f_length(f_hz, length_m)
    mag = 10.0 ** (-direct_insertion_loss(f, length_m, p) / 20.0)
    delay_s = p.delay_ns_per_m * length_m * 1e-9
    return mag * np.exp(-2j * np.pi * f * delay_s)


def _pair_rng(seed, direction, i, j):
    tag = DIRECTIONS.index(direction)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(tag, int(i), int(j)))
    return np.random.default_rng(ss)


def _pair_draws(seed, direction, i, j, num_tones, sigma_db):
    # Draw order is fixed (dispersion first, then phase) so that scalar and
    # whole-tensor synthesis consume the substream identically.
    rng = _pair_rng(seed, direction, i, j)
    shift_db = rng.standard_normal(num_tones) * sigma_db
    phase = rng.uniform(0.0, 2.0 * np.pi, num_tones)
    return shift_db, phase


def fext_gains(plan, binder, params, i, j, direction="downstream"):
    """All-tone FEXT couplings from transmitter j into receiver i."""
    if i == j:
        raise ConfigError("FEXT requires i != j")
    p = params or ChannelModelParams()
    f = tone_frequencies(plan)
    shift_db, phase = _pair_draws(
        binder.seed, direction, i, j, plan.num_tones, p.fext_sigma_db
    )
    ratio_db = (
        np.minimum(
            p.fext_cap_db,
            p.fext_k0_db
            + p.fext_slope_db_per_decade * np.log10(f / p.fext_ref_hz),
        )
        + shift_db
    )
    coupling_len = min(binder.lengths_m[i], binder.lengths_m[j])
    mag = 10.0 ** (-direct_insertion_loss(f, coupling_len, p) / 20.0)
    return mag * 10.0 ** (ratio_db / 20.0) * np.exp(1j * phase)


def fext_response(plan, tone, i, j, binder, params=None, direction="downstream"):
    """Single-tone FEXT coupling; identical to ``fext_gains(...)[tone]``."""
    if not 0 <= tone < plan.num_tones:
        raise ConfigError(f"tone index {tone} out of range")
    return complex(fext_gains(plan, binder, params, i, j, direction)[tone])


def synth_channel(binder, plan, params=None, direction="downstream"):
    """Synthesize the full per-tone channel tensor for a binder.

    Deterministic given (seed, direction); per-pair substreams make the
    result independent of evaluation order.
    """
    if direction not in DIRECTIONS:
        raise ConfigError(f"direction must be one of {DIRECTIONS}")
    p = params or ChannelModelParams()
    f = tone_frequencies(plan)
    k = binder.num_lines
    h = np.zeros((plan.num_tones, k, k), dtype=complex)
    for i in range(k):
        h[:, i, i] = direct_response(f, binder.lengths_m[i], p)
    for i in range(k):
        for j in range(k):
            if i != j:
                h[:, i, j] = fext_gains(plan, binder, p, i, j, direction)
    return ChannelTensor(
        plan=plan, matrices=h, direction=direction, binder=binder, params=p
    )


def diagonal_dominance_ratio(tensor: ChannelTensor, tone: int) -> np.ndarray:
    """Per-row ratio of summed off-diagonal magnitude to diagonal magnitude."""
    if not 0 <= tone < tensor.plan.num_tones:
        raise ConfigError(f"tone index {tone} out of range")
    h = tensor.matrices[tone]
    absh = np.abs(h)
    diag = np.diagonal(absh)
    return (absh.sum(axis=1) - diag) / diag


def save_channel_csv(tensor: ChannelTensor, path):
    """Write the tensor as CSV (tone, i, j, re, im) plus a JSON sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tone", "i", "j", "re", "im"])
        t_count, k, _ = tensor.matrices.shape
        for t in range(t_count):
            for i in range(k):
                for j in range(k):
                    z = tensor.matrices[t, i, j]
                    w.writerow([t, i, j, repr(float(z.real)), repr(float(z.imag))])
    meta = {
        "plan": tensor.plan.to_dict(),
        "direction": tensor.direction,
        "binder": asdict(tensor.binder) if tensor.binder else None,
        "params": asdict(tensor.params) if tensor.params else None,
    }
    sidecar = path.with_name(path.name + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_channel_csv(path) -> ChannelTensor:
    """Reload a tensor written by :func:`save_channel_csv`."""
    path = Path(path)
    sidecar = path.with_name(path.name + ".meta.json")
    meta = json.loads(sidecar.read_text())
    plan = TonePlan.from_dict(meta["plan"])
    binder = BinderConfig(**meta["binder"]) if meta.get("binder") else None
    params = ChannelModelParams(**meta["params"]) if meta.get("params") else None
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ConfigError(f"empty channel CSV: {path}")
    k = max(int(r["i"]) for r in rows) + 1
    h = np.zeros((plan.num_tones, k, k), dtype=complex)
    for r in rows:
        h[int(r["tone"]), int(r["i"]), int(r["j"])] = complex(
            float(r["re"]), float(r["im"])
        )
    return ChannelTensor(
        plan=plan,
        matrices=h,
        direction=meta["direction"],
        binder=binder,
        params=params,
    )

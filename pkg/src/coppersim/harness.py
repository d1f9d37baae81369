"""Scenario configuration, experiment presets and deterministic CSV output.

Presets reproduce the three studies: per-user rate bars across profiles,
average rate versus loop length, and rate versus external-interference
power with the sensor canceler on and off. All artifacts are RFC-4180
style CSV with LF line endings plus a JSON metadata sidecar; equal config
and seed yield byte-identical files regardless of the worker count.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import yaml

from . import __version__
from .cancelers import SCHEME_LADDER, Scheme
from .channel import BinderConfig, ChannelModelParams, synth_channel
from .errors import ConfigError
from .rates import SpectrumPlan, scenario_rates
from .rfi import RfiScenario, cancel_and_rate
from .tones import PROFILES, get_profile, tone_frequencies

DEFAULT_SEED = 1

#: Preset sweep grids (not fixed by the source studies; chosen for legible
#: plots, override via configs).
FIG5_LENGTHS_M = tuple(range(20, 201, 20))
FIG6_PSD_SWEEP_DBM_HZ = tuple(range(-120, -59, 10))


@dataclass
class Scenario:
    """One fully resolved simulation run."""

    profile: str
    binder: BinderConfig
    channel_params: ChannelModelParams
    spectrum: SpectrumPlan
    schemes: list
    direction: str = "downstream"
    rfi: RfiScenario | None = None
    output_dir: str = "out"
    ill_conditioned: str = "error"
    jobs: int = 1

    def to_dict(self) -> dict:
        d = {
            "profile": self.profile,
            "lines": self.binder.num_lines,
            "lengths": list(self.binder.lengths_m),
            "seed": self.binder.seed,
            "direction": self.direction,
            "schemes": [s.variant for s in self.schemes],
            "channel": {
                f.name: getattr(self.channel_params, f.name)
                for f in dc_fields(ChannelModelParams)
            },
            "spectrum": self.spectrum.to_dict(),
            "output_dir": self.output_dir,
            "ill_conditioned": self.ill_conditioned,
            "jobs": self.jobs,
        }
        if self.rfi is not None:
            d["rfi"] = {
                "interferer_psd_dbm_hz": self.rfi.interferer_psd_dbm_hz,
                "coupling_db": [
                    [e if math.isfinite(e) else "inf", v]
                    for e, v in self.rfi.coupling_db
                ],
                "sensor_noise_psd_dbm_hz": self.rfi.sensor_noise_psd_dbm_hz,
                "training_symbols": self.rfi.training_symbols,
                "seed": self.rfi.seed,
            }
        return d


_TOP_KEYS = {
    "profile", "lines", "length", "lengths", "seed", "direction", "schemes",
    "channel", "spectrum", "rfi", "output_dir", "ill_conditioned", "jobs",
}
_CHANNEL_KEYS = {f.name for f in dc_fields(ChannelModelParams)}
_SPECTRUM_KEYS = {f.name for f in dc_fields(SpectrumPlan)}
_RFI_KEYS = {
    "interferer_psd_dbm_hz", "coupling_db", "sensor_noise_psd_dbm_hz",
    "training_symbols", "seed",
}


def _reject_unknown(mapping, allowed, where):
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown key '{where}{key}'")


def _parse_bands(raw, where):
    try:
        return tuple(
            (math.inf if e in ("inf", ".inf") else float(e), float(v))
            for e, v in raw
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: expected [[edge_hz, value_db], ...]") from exc


def scenario_from_dict(cfg: dict) -> Scenario:
    """Validate a config mapping and resolve it into a Scenario."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a single top-level map")
    _reject_unknown(cfg, _TOP_KEYS, "")
    if "profile" not in cfg:
        raise ConfigError("missing required key 'profile'")
    if "seed" not in cfg:
        raise ConfigError("missing required key 'seed' (runs must be seeded)")
    plan = get_profile(str(cfg["profile"]))
    seed = int(cfg["seed"])

    lines = int(cfg.get("lines", 1))
    if "lengths" in cfg and "length" in cfg:
        raise ConfigError("give either 'length' or 'lengths', not both")
    if "lengths" in cfg:
        lengths = tuple(float(x) for x in cfg["lengths"])
    else:
        lengths = (float(cfg.get("length", 100.0)),) * lines
    binder = BinderConfig(num_lines=lines, lengths_m=lengths, seed=seed)

    direction = str(cfg.get("direction", "downstream"))
    if direction not in ("downstream", "upstream"):
        raise ConfigError(f"direction: unknown value '{direction}'")

    ch_cfg = cfg.get("channel", {}) or {}
    _reject_unknown(ch_cfg, _CHANNEL_KEYS, "channel.")
    params = ChannelModelParams(**{k: float(v) for k, v in ch_cfg.items()})

    sp_cfg = dict(cfg.get("spectrum", {}) or {})
    _reject_unknown(sp_cfg, _SPECTRUM_KEYS, "spectrum.")
    if "mask" in sp_cfg:
        sp_cfg["mask"] = _parse_bands(sp_cfg["mask"], "spectrum.mask")
    spectrum = SpectrumPlan(**sp_cfg)

    scheme_names = cfg.get("schemes", list(SCHEME_LADDER))
    schemes = []
    for name in scheme_names:
        variant = str(name)
        sch_dir = direction
        if variant == "thp":
            sch_dir = "downstream"
        elif variant == "dfe":
            sch_dir = "upstream"
        schemes.append(Scheme(variant=variant, direction=sch_dir))

    rfi = None
    if cfg.get("rfi") is not None:
        rf_cfg = dict(cfg["rfi"])
        _reject_unknown(rf_cfg, _RFI_KEYS, "rfi.")
        if "coupling_db" in rf_cfg:
            rf_cfg["coupling_db"] = _parse_bands(rf_cfg["coupling_db"], "rfi.coupling_db")
        rf_cfg.setdefault("seed", seed)
        rfi = RfiScenario(**rf_cfg)

    ill = str(cfg.get("ill_conditioned", "error"))
    if ill not in ("error", "skip"):
        raise ConfigError("ill_conditioned: must be 'error' or 'skip'")

    return Scenario(
        profile=plan.profile_name,
        binder=binder,
        channel_params=params,
        spectrum=spectrum,
        schemes=schemes,
        direction=direction,
        rfi=rfi,
        output_dir=str(cfg.get("output_dir", "out")),
        ill_conditioned=ill,
        jobs=int(cfg.get("jobs", 1)),
    )


def load_scenario(path) -> Scenario:
    """Load and validate a YAML/JSON scenario file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return scenario_from_dict(cfg)


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def _fmt(x):
    return format(float(x), ".9g")


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _write_meta(path, meta):
    meta = dict(meta)
    meta["tool_version"] = __version__
    sidecar = Path(str(path) + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return sidecar


def write_rate_summary(path, reports, lengths_m):
    """Summary CSV: (scheme, line, length_m, rate_mbps); lines are 1-based."""
    rows = []
    for rep in reports:
        for li, rate in enumerate(rep.per_line_rate_mbps):
            rows.append(
                [rep.scheme.variant, li + 1, _fmt(lengths_m[li]), _fmt(rate)]
            )
    return _write_csv(path, ["scheme", "line", "length_m", "rate_mbps"], rows)


def write_rate_detail(path, reports, plan):
    """Per-tone detail CSV: (scheme, line, tone, freq_hz, snr_db, bits)."""
    freqs = tone_frequencies(plan)
    rows = []
    for rep in reports:
        k, t = rep.bits.shape
        for li in range(k):
            for ti in range(t):
                snr = rep.snr[li, ti]
                snr_db = 10.0 * math.log10(snr) if snr > 0 else -math.inf
                rows.append(
                    [
                        rep.scheme.variant,
                        li + 1,
                        ti,
                        _fmt(freqs[ti]),
                        _fmt(snr_db) if math.isfinite(snr_db) else "-inf",
                        _fmt(rep.bits[li, ti]),
                    ]
                )
    return _write_csv(
        path, ["scheme", "line", "tone", "freq_hz", "snr_db", "bits"], rows
    )


# ---------------------------------------------------------------------------
# scenario and preset runners
# ---------------------------------------------------------------------------

def run_scenario(sc: Scenario, out_dir=None, jobs=None, detail=False):
    """Run one scenario; returns the list of written artifact paths."""
    out = Path(out_dir if out_dir is not None else sc.output_dir)
    jobs = jobs if jobs is not None else sc.jobs
    plan = get_profile(sc.profile)
    channel = synth_channel(sc.binder, plan, sc.channel_params, sc.direction)
    reports = []
    for scheme in sc.schemes:
        ch = channel
        if scheme.direction != sc.direction:
            ch = synth_channel(sc.binder, plan, sc.channel_params, scheme.direction)
        reports.append(
            scenario_rates(
                ch, sc.spectrum, scheme,
                ill_conditioned=sc.ill_conditioned, jobs=jobs,
            )
        )
    paths = []
    summary = write_rate_summary(
        out / f"rates_{sc.profile}.csv", reports, sc.binder.lengths_m
    )
    paths.append(summary)
    paths.append(_write_meta(summary, {"config": sc.to_dict()}))
    if detail:
        paths.append(write_rate_detail(out / f"detail_{sc.profile}.csv", reports, plan))
    if sc.rfi is not None:
        scheme = next(
            (s for s in sc.schemes if s.direction == "downstream"),
            Scheme("zf", "downstream"),
        )
        off, on = cancel_and_rate(channel, sc.spectrum, scheme, sc.rfi, jobs=jobs)
        rows = []
        for flag, rep in ((0, off), (1, on)):
            rows.append(
                [
                    _fmt(sc.rfi.interferer_psd_dbm_hz),
                    flag,
                    _fmt(rep.aggregate_mbps),
                    _fmt(rep.aggregate_mbps / sc.binder.num_lines),
                ]
            )
        rfi_path = _write_csv(
            out / f"rfi_{sc.profile}.csv",
            ["interferer_psd_dbm_hz", "canceler_on", "aggregate_mbps", "avg_user_mbps"],
            rows,
        )
        paths.append(rfi_path)
        paths.append(_write_meta(rfi_path, {"config": sc.to_dict()}))
    return paths


def _fig4_binder(seed):
    lengths = tuple(25.0 * (i + 1) for i in range(8))   # 25 m .. 200 m
    return BinderConfig(num_lines=8, lengths_m=lengths, seed=seed)


def run_fig4(out_dir="out", seed=DEFAULT_SEED, jobs=1, detail=False):
    """Per-user downstream rate bars: 8 lines, 25-200 m, three profiles."""
    out = Path(out_dir)
    binder = _fig4_binder(seed)
    params = ChannelModelParams()
    spectrum = SpectrumPlan()
    schemes = [Scheme(v, "downstream") for v in SCHEME_LADDER]
    paths = []
    for profile in ("gfast106", "gfast212", "gmgfast424"):
        plan = PROFILES[profile]
        channel = synth_channel(binder, plan, params, "downstream")
        reports = [
            scenario_rates(channel, spectrum, s, jobs=jobs) for s in schemes
        ]
        path = write_rate_summary(out / f"fig4_{profile}.csv", reports, binder.lengths_m)
        paths.append(path)
        paths.append(
            _write_meta(
                path,
                {
                    "preset": "fig4",
                    "profile": profile,
                    "seed": seed,
                    "lengths_m": list(binder.lengths_m),
                    "schemes": list(SCHEME_LADDER),
                },
            )
        )
        if detail:
            paths.append(write_rate_detail(out / f"fig4_{profile}_detail.csv", reports, plan))
    return paths


def run_fig5(out_dir="out", seed=DEFAULT_SEED, jobs=1, profile="gfast212",
             lengths_m=FIG5_LENGTHS_M, num_lines=25):
    """Average user rate versus loop length, equal-length binders of 25 lines."""
    out = Path(out_dir)
    plan = PROFILES[profile]
    params = ChannelModelParams()
    spectrum = SpectrumPlan()
    schemes = [Scheme(v, "downstream") for v in SCHEME_LADDER]
    rows = []
    for length in lengths_m:
        binder = BinderConfig(
            num_lines=num_lines, lengths_m=(float(length),) * num_lines, seed=seed
        )
        channel = synth_channel(binder, plan, params, "downstream")
        for scheme in schemes:
            rep = scenario_rates(channel, spectrum, scheme, jobs=jobs)
            avg = rep.aggregate_mbps / num_lines
            rows.append([_fmt(length), scheme.variant, _fmt(avg)])
    path = _write_csv(out / "fig5.csv", ["length_m", "scheme", "avg_rate_mbps"], rows)
    meta = _write_meta(
        path,
        {
            "preset": "fig5",
            "profile": profile,
            "seed": seed,
            "num_lines": num_lines,
            "lengths_m": [float(x) for x in lengths_m],
            "schemes": list(SCHEME_LADDER),
        },
    )
    return [path, meta]


def run_fig6(out_dir="out", seed=DEFAULT_SEED, jobs=1,
             sweep_dbm_hz=FIG6_PSD_SWEEP_DBM_HZ):
    """Rate versus external-interference power, sensor canceler off and on."""
    out = Path(out_dir)
    plan = PROFILES["gfast212"]
    binder = _fig4_binder(seed)
    params = ChannelModelParams()
    spectrum = SpectrumPlan()
    scheme = Scheme("zf", "downstream")
    channel = synth_channel(binder, plan, params, "downstream")
    rows = []
    for psd in sweep_dbm_hz:
        scenario = RfiScenario(interferer_psd_dbm_hz=float(psd), seed=seed)
        off, on = cancel_and_rate(channel, spectrum, scheme, scenario, jobs=jobs)
        for flag, rep in ((0, off), (1, on)):
            rows.append(
                [
                    _fmt(psd),
                    flag,
                    _fmt(rep.aggregate_mbps),
                    _fmt(rep.aggregate_mbps / binder.num_lines),
                ]
            )
    path = _write_csv(
        out / "fig6.csv",
        ["interferer_psd_dbm_hz", "canceler_on", "aggregate_mbps", "avg_user_mbps"],
        rows,
    )
    meta = _write_meta(
        path,
        {
            "preset": "fig6",
            "profile": "gfast212",
            "seed": seed,
            "scheme": "zf",
            "sweep_dbm_hz": [float(x) for x in sweep_dbm_hz],
            "lengths_m": list(binder.lengths_m),
        },
    )
    return [path, meta]

"""Three-stage UAV approach-flight scenario and adaptive-vs-fixed comparison.

The flight profile evolves Doppler spread (via a piecewise-linear velocity),
r.m.s. delay spread, and ground-station distance over three stages.  Each
adaptation epoch draws one channel realization; the adaptive scheme and
every fixed pilot configuration are evaluated on that same realization with
the same measurement pipeline, differing only in the pilot layout.  Rates,
empirical CDFs, and percentile gains of adaptation over each fixed scheme
are reported.

All randomness is keyed off one run seed: shadowing and delay-spread
fluctuations by stationarity-interval index, channel/noise/data draws by
epoch index, so identical seeds reproduce identical reports byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import yaml

from .channel import (
    ChannelParams,
    DEFAULT_PATH_LOSS,
    LinkCondition,
    PathLossParams,
    apply_channel,
    generate_channel,
    path_loss_db,
)
from .codebook import Codebook, build_default_codebook
from .errors import ConfigurationError
from .estimator import CachedMseProvider, DEFAULT_MSE_WINDOW, _interpolate_masked
from .grid import (
    GridDims,
    PilotConfig,
    build_grid,
    pilot_count,
    pilot_values,
    qpsk_symbols,
)
from .link import (
    EXPLICIT,
    advance,
    initial_state,
    receiver_epoch,
    transmitter_apply,
)
from .optimizer import (
    FeasibleSets,
    default_feasible_sets,
    feedback_bits_explicit,
    feedback_bits_implicit,
    feedback_rate_explicit,
    feedback_rate_implicit,
    rate_objective,
)
from .seeding import make_rng

SPEED_OF_LIGHT = 2.998e8   # m/s
DEFAULT_CARRIER_HZ = 5e9


@dataclass(frozen=True)
class TauProfile:
    """Delay-spread trajectory within a stage: constant or uniform fluctuation."""

    kind: str          # "constant" | "uniform"
    low_s: float
    high_s: float

    def __post_init__(self):
        if self.kind not in ("constant", "uniform"):
            raise ConfigurationError(f"unknown tau profile kind {self.kind!r}")
        if self.low_s < 0 or self.high_s < self.low_s:
            raise ConfigurationError("need 0 <= low_s <= high_s")

    @classmethod
    def constant(cls, tau_s: float) -> "TauProfile":
        return cls("constant", tau_s, tau_s)

    @classmethod
    def uniform(cls, low_s: float, high_s: float) -> "TauProfile":
        return cls("uniform", low_s, high_s)


@dataclass(frozen=True)
class ScenarioStage:
    """One flight stage: linear velocity and distance ramps plus a tau profile."""

    duration_s: float
    v_start_kmh: float
    v_end_kmh: float
    tau: TauProfile
    d_start_m: float
    d_end_m: float

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ConfigurationError("stage duration must be positive")
        if self.v_start_kmh < 0 or self.v_end_kmh < 0:
            raise ConfigurationError("velocities must be non-negative")
        if self.d_start_m <= 0 or self.d_end_m <= 0:
            raise ConfigurationError("distances must be positive")


def default_scenario() -> tuple[ScenarioStage, ...]:
    """Approach flight: hilly -> suburban -> urban, decelerating and closing in.

    Distance ramps linearly from 17 km down to 1.7 km over the full flight,
    sweeping the receive SNR from roughly 19 dB up to 37.5 dB.
    """
    return (
        ScenarioStage(120.0, 300.0, 200.0, TauProfile.constant(1000e-9), 17000.0, 11900.0),
        ScenarioStage(120.0, 200.0, 100.0, TauProfile.uniform(50e-9, 500e-9), 11900.0, 6800.0),
        ScenarioStage(120.0, 100.0, 50.0, TauProfile.constant(1440e-9), 6800.0, 1700.0),
    )


def doppler_hz(v_kmh: float, carrier_hz: float = DEFAULT_CARRIER_HZ) -> float:
    """Maximum Doppler shift of a velocity in km/h at the given carrier."""
    return (v_kmh / 3.6) * carrier_hz / SPEED_OF_LIGHT


def default_fixed_configs() -> tuple[PilotConfig, ...]:
    """Benchmark fixed configurations at -3 dB data-to-pilot ratio."""
    return tuple(
        PilotConfig.from_db(-3.0, dpf, dpt)
        for dpf, dpt in ((2, 2), (4, 2), (6, 4), (6, 6), (8, 8))
    )


def fixed_label(cfg: PilotConfig) -> str:
    return f"V{cfg.dpf}{cfg.dpt}"


@dataclass
class SimParams:
    """Link and simulation parameters shared by all schemes."""

    dims: GridDims = field(default_factory=lambda: GridDims(72, 1500, 15e3, 71.875e-6))
    path_loss: PathLossParams = DEFAULT_PATH_LOSS
    tx_power_dbm: float = 37.5
    noise_psd_dbm_hz: float = -174.0
    carrier_hz: float = DEFAULT_CARRIER_HZ
    stationarity_s: float = 0.45   # full-scale; scaled with the scenario clock
    n_taps: int = 16
    sets: FeasibleSets = field(default_factory=default_feasible_sets)
    codebook: Codebook | None = None
    mse_window: GridDims = DEFAULT_MSE_WINDOW
    mse_trials: int = 3

    def build_codebook(self) -> Codebook:
        if self.codebook is None:
            return build_default_codebook(self.dims.t_sym, self.dims.delta_f)
        return self.codebook


@dataclass(frozen=True)
class EpochRecord:
    """Per-epoch trace row."""

    epoch: int
    t_sec: float           # real (unscaled) time at epoch start
    stage: int             # 1-based stage index
    f_d_hz: float
    tau_rms_ns: float
    snr_db: float
    rho_db: float          # active adaptive config during this epoch
    dpf: int
    dpt: int
    rate_adaptive: float
    fixed_rates: tuple[float, ...]


@dataclass
class RunReport:
    """Full per-seed scenario outcome."""

    seed: int
    feedback: str
    time_scale: float
    fixed_labels: tuple[str, ...]
    records: list[EpochRecord]
    feedback_bits: int
    feedback_bps: float

    @property
    def n_epochs(self) -> int:
        return len(self.records)

    @property
    def mean_rate_adaptive(self) -> float:
        return float(np.mean([r.rate_adaptive for r in self.records]))

    def mean_rate_fixed(self) -> dict[str, float]:
        arr = np.array([r.fixed_rates for r in self.records])
        return {lab: float(arr[:, i].mean()) for i, lab in enumerate(self.fixed_labels)}


def noise_floor_dbm(dims: GridDims, noise_psd_dbm_hz: float = -174.0) -> float:
    """Thermal noise power over the occupied bandwidth, in dBm."""
    return noise_psd_dbm_hz + 10.0 * np.log10(dims.n_sub * dims.delta_f)


def shadow_for_interval(seed, interval: int, sigma_db: float) -> float:
    """Log-normal shadowing draw, constant within a stationarity interval."""
    return float(make_rng(seed, "shadow", interval).normal(0.0, sigma_db))


def tau_for_interval(profile: TauProfile, seed, interval: int) -> float:
    """Delay spread in force during a stationarity interval."""
    if profile.kind == "constant":
        return profile.low_s
    return float(make_rng(seed, "tau", interval).uniform(profile.low_s, profile.high_s))


def _locate_stage(stages: Sequence[ScenarioStage], t_scn: float) -> tuple[int, ScenarioStage, float]:
    start = 0.0
    for idx, stage in enumerate(stages):
        if t_scn < start + stage.duration_s or idx == len(stages) - 1:
            frac = (t_scn - start) / stage.duration_s
            return idx, stage, min(max(frac, 0.0), 1.0)
        start += stage.duration_s
    raise AssertionError("unreachable")


def _measured_rate(
    cfg: PilotConfig,
    dims: GridDims,
    ch,
    cond: LinkCondition,
    f_d: float,
    data_pool: np.ndarray,
    rx_seed,
) -> tuple[float, object]:
    """Realized rate of one config on a shared channel realization.

    Builds the grid, passes it through the channel (noise and ICI seeded
    identically across configs), measures the estimation MSE of the LS +
    interpolation chain against the true channel, and evaluates the rate
    objective with that measured MSE.
    """
    n_p = pilot_count(cfg, dims)
    n_d = dims.n_cells - n_p
    grid = build_grid(cfg, dims, data_pool[:n_d], np.ones(n_p, dtype=complex))
    rx = apply_channel(grid, ch, cond, f_d, rx_seed)
    ls = np.zeros_like(rx.cells)
    mask = grid.pilot_mask
    ls[mask] = rx.cells[mask] / grid.cells[mask]
    h_hat = _interpolate_masked(mask, ls)
    data = ~mask
    mse = float(np.mean(np.abs(h_hat[data] - ch.h[data]) ** 2))
    return rate_objective(cfg, dims, cond, f_d, mse), rx


def run_scenario(
    stages: Sequence[ScenarioStage],
    fixed_configs: Sequence[PilotConfig],
    sim: SimParams,
    time_scale: float,
    seed: int,
    *,
    feedback: str = EXPLICIT,
    mse_provider=None,
) -> RunReport:
    """Run the adaptive loop and all fixed configs over the scaled flight.

    time_scale in (0, 1] compresses stage durations only; the epoch window
    (n_sym symbols) keeps its physical length so estimation stays real.
    """
    if not 0.0 < time_scale <= 1.0:
        raise ValueError(f"time_scale must be in (0, 1], got {time_scale}")
    if not stages:
        raise ValueError("need at least one scenario stage")
    dims = sim.dims
    cb = sim.build_codebook()
    provider = mse_provider
    if provider is None:
        provider = CachedMseProvider(
            cb, window=sim.mse_window, trials=sim.mse_trials, n_taps=sim.n_taps
        )

    t_epoch = dims.n_sym * dims.t_sym
    total_s = sum(st.duration_s for st in stages) * time_scale
    n_epochs = int(total_s / t_epoch)
    if n_epochs < 1:
        raise ValueError(
            f"time_scale {time_scale} yields no complete epoch "
            f"({total_s:.3f} s scenario vs {t_epoch:.3f} s epoch)"
        )
    interval_s = sim.stationarity_s * time_scale
    floor_dbm = noise_floor_dbm(dims, sim.noise_psd_dbm_hz)
    labels = tuple(fixed_label(c) for c in fixed_configs)

    state = initial_state()
    records: list[EpochRecord] = []
    for k in range(n_epochs):
        t_real = k * t_epoch
        t_scn = t_real / time_scale
        stage_idx, stage, frac = _locate_stage(stages, t_scn)
        v = stage.v_start_kmh + frac * (stage.v_end_kmh - stage.v_start_kmh)
        f_d = doppler_hz(v, sim.carrier_hz)
        interval = int(t_real / interval_s)
        shadow = shadow_for_interval(seed, interval, sim.path_loss.sigma_x_db)
        tau = tau_for_interval(stage.tau, seed, interval)
        d = stage.d_start_m + frac * (stage.d_end_m - stage.d_start_m)
        snr_db = sim.tx_power_dbm - path_loss_db(d, sim.path_loss, shadow) - floor_dbm
        cond = LinkCondition(snr_db)

        ch = generate_channel(ChannelParams(f_d, tau, sim.n_taps), dims, seed=(seed, "ch", k))
        data_pool = qpsk_symbols(dims.n_cells, make_rng(seed, "data", k))
        rx_seed = (seed, "rx", k)

        rate_adaptive, rx_active = _measured_rate(
            state.active, dims, ch, cond, f_d, data_pool, rx_seed
        )
        msg, state = receiver_epoch(
            rx_active, state, cb, sim.sets, cond, mse_provider=provider, feedback=feedback
        )
        next_cfg = transmitter_apply(
            msg, state, sim.sets, cb, cond, dims, mse_provider=provider
        )
        fixed_rates = tuple(
            _measured_rate(cfg, dims, ch, cond, f_d, data_pool, rx_seed)[0]
            for cfg in fixed_configs
        )

        records.append(
            EpochRecord(
                epoch=k,
                t_sec=t_real,
                stage=stage_idx + 1,
                f_d_hz=f_d,
                tau_rms_ns=tau * 1e9,
                snr_db=snr_db,
                rho_db=state.active.rho_db,
                dpf=state.active.dpf,
                dpt=state.active.dpt,
                rate_adaptive=rate_adaptive,
                fixed_rates=fixed_rates,
            )
        )
        state = advance(state, next_cfg)

    bits = (
        feedback_bits_explicit(sim.sets)
        if feedback == EXPLICIT
        else feedback_bits_implicit(cb)
    )
    bps = (
        feedback_rate_explicit(sim.sets, dims)
        if feedback == EXPLICIT
        else feedback_rate_implicit(cb, dims)
    )
    return RunReport(
        seed=seed,
        feedback=feedback,
        time_scale=time_scale,
        fixed_labels=labels,
        records=records,
        feedback_bits=bits,
        feedback_bps=bps,
    )


def _as_reports(report_or_reports) -> list[RunReport]:
    if isinstance(report_or_reports, RunReport):
        return [report_or_reports]
    return list(report_or_reports)


def gains_from_rates(
    adaptive: Sequence[float],
    fixed: dict[str, Sequence[float]],
    percentiles: Sequence[int] = (10, 50, 90),
) -> dict[str, dict[int, float]]:
    """Percentiles of adaptive/fixed - 1 in percent, per fixed scheme."""
    adaptive = np.asarray(adaptive, dtype=float)
    if adaptive.size == 0:
        raise ValueError("no rate samples to compute gains from")
    out: dict[str, dict[int, float]] = {}
    for lab, rates in fixed.items():
        rates = np.asarray(rates, dtype=float)
        if rates.shape != adaptive.shape:
            raise ValueError(f"rate series for {lab} does not match the adaptive series")
        eta = adaptive / rates
        out[lab] = {
            int(p): float(np.percentile(eta - 1.0, p) * 100.0) for p in percentiles
        }
    return out


def percentile_gains(
    report_or_reports, percentiles: Sequence[int] = (10, 50, 90)
) -> dict[str, dict[int, float]]:
    """Percentiles of the instantaneous rate gain, in percent, per fixed config.

    The gain sample for an epoch is adaptive rate / fixed rate - 1; samples
    pool across all given reports.
    """
    reports = _as_reports(report_or_reports)
    if not reports or not any(r.records for r in reports):
        raise ValueError("no epochs to compute gains from")
    labels = reports[0].fixed_labels
    adaptive = [rec.rate_adaptive for r in reports for rec in r.records]
    fixed = {
        lab: [rec.fixed_rates[i] for r in reports for rec in r.records]
        for i, lab in enumerate(labels)
    }
    return gains_from_rates(adaptive, fixed, percentiles)


# ---------------------------------------------------------------------------
# Text rendering of run outputs (CSV / summary).  Floats print with 6
# significant digits; rendering is the single source of the byte format.
# ---------------------------------------------------------------------------


def _g6(x: float) -> str:
    return f"{x:.6g}"


def render_trace_csv(report: RunReport) -> str:
    header = (
        "epoch,t_sec,stage,f_d_hz,tau_rms_ns,snr_db,rho_db,dpf,dpt,rate_adaptive,"
        + ",".join(f"rate_{lab}" for lab in report.fixed_labels)
    )
    lines = [header]
    for r in report.records:
        row = [
            str(r.epoch),
            _g6(r.t_sec),
            str(r.stage),
            _g6(r.f_d_hz),
            _g6(r.tau_rms_ns),
            _g6(r.snr_db),
            _g6(r.rho_db),
            str(r.dpf),
            str(r.dpt),
            _g6(r.rate_adaptive),
        ] + [_g6(x) for x in r.fixed_rates]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def render_cdf_csv(report_or_reports) -> str:
    """Empirical CDF of the per-epoch rate for every scheme, pooled over runs."""
    reports = _as_reports(report_or_reports)
    labels = reports[0].fixed_labels
    samples = {"adaptive": []}
    for lab in labels:
        samples[lab] = []
    for rep in reports:
        for rec in rep.records:
            samples["adaptive"].append(rec.rate_adaptive)
            for i, lab in enumerate(labels):
                samples[lab].append(rec.fixed_rates[i])
    grid = np.unique(np.concatenate([np.asarray(v) for v in samples.values()]))
    lines = ["rate," + ",".join(f"cdf_{name}" for name in samples)]
    sorted_samples = {name: np.sort(np.asarray(v)) for name, v in samples.items()}
    n = {name: len(v) for name, v in sorted_samples.items()}
    for x in grid:
        row = [_g6(float(x))]
        for name in samples:
            c = np.searchsorted(sorted_samples[name], x, side="right") / n[name]
            row.append(_g6(float(c)))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def render_gains_csv(gains: dict[str, dict[int, float]]) -> str:
    pcts = sorted(next(iter(gains.values())).keys())
    lines = ["config," + ",".join(f"p{p}" for p in pcts)]
    for lab, row in gains.items():
        lines.append(lab + "," + ",".join(_g6(row[p]) for p in pcts))
    return "\n".join(lines) + "\n"


def render_summary(report_or_reports) -> str:
    reports = _as_reports(report_or_reports)
    labels = reports[0].fixed_labels
    total_epochs = sum(r.n_epochs for r in reports)
    mean_adaptive = float(
        np.mean([rec.rate_adaptive for r in reports for rec in r.records])
    )
    lines = [
        f"runs: {len(reports)} (seeds: {', '.join(str(r.seed) for r in reports)})",
        f"epochs total: {total_epochs}",
        f"feedback mode: {reports[0].feedback}"
        f" ({reports[0].feedback_bits} bits/epoch, {_g6(reports[0].feedback_bps)} bps)",
        f"mean rate adaptive: {_g6(mean_adaptive)}",
    ]
    for i, lab in enumerate(labels):
        m = float(np.mean([rec.fixed_rates[i] for r in reports for rec in r.records]))
        lines.append(f"mean rate {lab}: {_g6(m)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Scenario files: YAML with one block per stage.
# ---------------------------------------------------------------------------


def parse_scenario(doc: dict) -> tuple[ScenarioStage, ...]:
    """Build stages from a parsed scenario document (see docs for the schema)."""
    try:
        raw_stages = doc["stages"]
    except (KeyError, TypeError):
        raise ConfigurationError("scenario document needs a 'stages' list") from None
    stages = []
    for i, raw in enumerate(raw_stages):
        try:
            tau_raw = raw["tau_rms"]
            if "constant_ns" in tau_raw:
                tau = TauProfile.constant(float(tau_raw["constant_ns"]) * 1e-9)
            elif "uniform_ns" in tau_raw:
                lo, hi = tau_raw["uniform_ns"]
                tau = TauProfile.uniform(float(lo) * 1e-9, float(hi) * 1e-9)
            else:
                raise ConfigurationError(
                    f"stage {i}: tau_rms needs 'constant_ns' or 'uniform_ns'"
                )
            stages.append(
                ScenarioStage(
                    duration_s=float(raw["duration_s"]),
                    v_start_kmh=float(raw["v_start_kmh"]),
                    v_end_kmh=float(raw["v_end_kmh"]),
                    tau=tau,
                    d_start_m=float(raw["d_start_m"]),
                    d_end_m=float(raw["d_end_m"]),
                )
            )
        except KeyError as exc:
            raise ConfigurationError(f"stage {i}: missing field {exc}") from None
    if not stages:
        raise ConfigurationError("scenario has no stages")
    return tuple(stages)


def load_scenario_file(path: str) -> tuple[ScenarioStage, ...]:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return parse_scenario(doc)

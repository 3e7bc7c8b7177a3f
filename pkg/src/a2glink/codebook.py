"""Channel-statistics codebook and nearest-codeword matching.

Both link ends hold the same finite sets of canonical correlation profiles:
temporal codewords are Bessel (classic Doppler) autocorrelations
parametrized by the maximum Doppler shift, spectral codewords are
exponential-PDP correlations parametrized by the r.m.s. delay spread.
Matching an estimated profile to its nearest codeword projects noisy,
possibly inconsistent statistics back onto a valid model before the rate
optimization runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import jakes_correlation, pdp_frequency_correlation
from .estimator import CorrelationProfile

# Default codeword parameter grids: maximum Doppler shift [Hz] for the
# mobility regimes of a 5 GHz UAV link, and r.m.s. delay spread [s] for
# the scattering regimes.
DOPPLER_CODEWORDS_HZ = (
    (4.6, "almost stationary (1 km/h)"),
    (70.0, "low-speed taxiing (15 km/h)"),
    (250.0, "high-speed taxiing (55 km/h)"),
    (550.0, "takeoff/landing (120 km/h)"),
    (750.0, "medium-speed airborne (160 km/h)"),
    (1150.0, "high-speed airborne (250 km/h)"),
)
DELAY_CODEWORDS_S = (
    (221.5e-9, "low scattering (near-LoS)"),
    (476.4e-9, "medium scattering (suburban)"),
    (791.2e-9, "high scattering (near-urban)"),
    (1440e-9, "very high scattering (urban/hilly)"),
)


@dataclass(frozen=True)
class Codeword:
    """One canonical correlation profile with its generating parameter."""

    profile: CorrelationProfile
    parameter: float       # f_d [Hz] or tau_rms [s]
    label: str


@dataclass(frozen=True)
class Codebook:
    temporal: tuple[Codeword, ...]
    spectral: tuple[Codeword, ...]

    def __post_init__(self):
        if not self.temporal or not self.spectral:
            raise ValueError("codebook needs at least one codeword per domain")

    @property
    def m_t(self) -> int:
        return len(self.temporal)

    @property
    def m_f(self) -> int:
        return len(self.spectral)

    @property
    def n_dt(self) -> int:
        return self.temporal[0].profile.n_lags

    @property
    def n_df(self) -> int:
        return self.spectral[0].profile.n_lags


def build_default_codebook(
    t_sym: float = 71.875e-6,
    delta_f: float = 15e3,
    n_dt: int = 40,
    n_df: int = 62,
) -> Codebook:
    """Codebook on the grid's sampling steps: lags k*t_sym and k*delta_f."""
    if t_sym <= 0 or delta_f <= 0 or n_dt < 1 or n_df < 1:
        raise ValueError("codebook parameters must be positive")
    temporal = []
    for f_d, label in DOPPLER_CODEWORDS_HZ:
        vals = np.array([jakes_correlation(f_d, k * t_sym) for k in range(n_dt + 1)])
        temporal.append(Codeword(CorrelationProfile(vals, "time", t_sym), f_d, label))
    spectral = []
    for tau, label in DELAY_CODEWORDS_S:
        vals = np.array(
            [pdp_frequency_correlation(tau, k * delta_f) for k in range(n_df + 1)]
        )
        spectral.append(Codeword(CorrelationProfile(vals, "frequency", delta_f), tau, label))
    return Codebook(temporal=tuple(temporal), spectral=tuple(spectral))


def _nearest(profile: CorrelationProfile, codewords: tuple[Codeword, ...]) -> int:
    ref = codewords[0].profile
    if profile.values.size != ref.values.size:
        raise ValueError(
            f"profile length {profile.values.size} != codeword length {ref.values.size}"
        )
    if profile.domain != ref.domain:
        raise ValueError(f"domain mismatch: {profile.domain} vs {ref.domain}")
    dists = [np.linalg.norm(profile.values - cw.profile.values) for cw in codewords]
    return int(np.argmin(dists)) + 1  # argmin takes the first minimum: lowest index wins ties


def match(
    r_t_hat: CorrelationProfile, r_f_hat: CorrelationProfile, cb: Codebook
) -> tuple[int, int]:
    """Indices (1-based) of the Euclidean-nearest temporal and spectral codewords.

    Distances are scale-sensitive: callers must pass normalized profiles
    (the estimator emits them normalized).
    """
    return _nearest(r_t_hat, cb.temporal), _nearest(r_f_hat, cb.spectral)


def format_table(cb: Codebook) -> str:
    """Human-readable codebook dump (line-oriented, for docs and CLI)."""
    lines = [f"temporal codewords (M_t={cb.m_t}, {cb.n_dt} lags of {cb.temporal[0].profile.lag_step*1e6:g} us):"]
    for i, cw in enumerate(cb.temporal, start=1):
        head = " ".join(f"{v.real:+.4f}" for v in cw.profile.values[:6])
        lines.append(f"  m={i}  f_d={cw.parameter:g} Hz  {cw.label}  [{head} ...]")
    lines.append(
        f"spectral codewords (M_f={cb.m_f}, {cb.n_df} lags of {cb.spectral[0].profile.lag_step/1e3:g} kHz):"
    )
    for i, cw in enumerate(cb.spectral, start=1):
        head = " ".join(f"{abs(v):.4f}" for v in cw.profile.values[:6])
        lines.append(f"  l={i}  tau_rms={cw.parameter*1e9:g} ns  {cw.label}  [|R|: {head} ...]")
    return "\n".join(lines)

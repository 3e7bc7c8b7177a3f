"""Air-to-ground channel models.

Small-scale fading is a tapped-delay line with an exponential power delay
profile and a classic (Jakes) Doppler spectrum on every tap, synthesized
by stratified sum-of-sinusoids.  Large-scale behaviour is a log-distance
path loss with log-normal shadowing, fitted for 5 GHz A2G links.  ICI from
Doppler leakage is injected as additive Gaussian noise at its analytic
power bound, the same bound the pilot optimizer uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import j0

from .errors import ConfigurationError
from .grid import GridDims, ResourceGrid
from .seeding import make_rng

# Sinusoids per tap for the sum-of-sinusoids Doppler synthesis.  Stratified
# arrival angles keep the ensemble ACF at J0 exactly; 24 components is
# enough for the per-realization ACF tolerance used in the tests.
N_DOPPLER_COMPONENTS = 24


@dataclass(frozen=True)
class ChannelParams:
    """Small-scale fading parameters.

    The default tap count keeps the discrete profile's frequency correlation
    close enough to the exponential closed form for reliable codeword
    matching; 8 taps leave a visible quantization bias.
    """

    f_d: float            # maximum Doppler shift [Hz]
    tau_rms: float        # r.m.s. delay spread [s]
    n_taps: int = 16

    def __post_init__(self):
        if self.f_d < 0 or self.tau_rms < 0:
            raise ConfigurationError("f_d and tau_rms must be non-negative")
        if self.n_taps < 1:
            raise ConfigurationError("n_taps must be >= 1")
        if self.tau_rms > 0 and self.n_taps < 2:
            raise ConfigurationError("nonzero delay spread needs at least 2 taps")


@dataclass(frozen=True)
class ChannelRealization:
    """Complex channel gain per resource element."""

    dims: GridDims
    h: np.ndarray  # complex, shape (n_sub, n_sym)


@dataclass(frozen=True)
class PathLossParams:
    """Log-distance path loss with log-normal shadowing."""

    a_db: float           # intercept A [dB]
    n_exp: float          # path-loss exponent
    sigma_x_db: float     # shadowing std [dB]
    f_db: float           # constant offset F [dB]
    r_min: float          # validity range [m]
    r_max: float

    def __post_init__(self):
        if not self.r_min < self.r_max:
            raise ConfigurationError("require r_min < r_max")
        if self.sigma_x_db < 0:
            raise ConfigurationError("sigma_x_db must be non-negative")


# Measurement-fit parameters for the 5 GHz A2G links simulated here.
DEFAULT_PATH_LOSS = PathLossParams(
    a_db=116.0, n_exp=1.8, sigma_x_db=3.1, f_db=2.3, r_min=1700.0, r_max=19000.0
)


@dataclass(frozen=True)
class LinkCondition:
    """Average receive SNR for a unit-power transmit grid."""

    snr_db: float

    @property
    def noise_power(self) -> float:
        return 10.0 ** (-self.snr_db / 10.0)


def jakes_correlation(f_d: float, dt: float) -> float:
    """Temporal autocorrelation of classic Doppler fading at lag dt."""
    if f_d < 0:
        raise ConfigurationError("f_d must be non-negative")
    return float(j0(2.0 * np.pi * f_d * dt))


def pdp_frequency_correlation(tau_rms: float, df: float) -> complex:
    """Frequency correlation of an exponential power delay profile.

    Closed form 1 / (1 + j 2 pi df tau_rms); unit magnitude only at
    df * tau_rms == 0.
    """
    if tau_rms < 0:
        raise ConfigurationError("tau_rms must be non-negative")
    return 1.0 / (1.0 + 2j * np.pi * df * tau_rms)


def tap_profile(params: ChannelParams) -> tuple[np.ndarray, np.ndarray]:
    """Uniformly spaced exponential PDP hitting the target spread exactly.

    The decay rate is solved so the discrete profile's mean delay equals its
    r.m.s. spread (as for a continuous exponential profile), then the tap
    spacing is scaled so both equal tau_rms.  Matching both moments keeps the
    profile's frequency correlation aligned with the exponential closed form
    through second order.
    """
    if params.tau_rms == 0.0:
        return np.array([0.0]), np.array([1.0])

    k = np.arange(params.n_taps, dtype=float)

    def moments(u: float) -> tuple[float, float]:
        w = np.exp(-u * k)
        w /= w.sum()
        m1 = float(np.dot(k, w))
        m2 = float(np.dot(k * k, w))
        return m1, np.sqrt(max(m2 - m1 * m1, 0.0))

    def gap(u: float) -> float:
        m1, sd = moments(u)
        return sd - m1

    lo = 1e-12
    if gap(lo) >= 0.0:
        u = 0.0  # two-tap case: uniform powers already have mean == spread
    else:
        hi = 1.0
        while gap(hi) < 0.0:
            hi *= 2.0
            if hi > 1e6:
                raise RuntimeError("tap profile moment matching failed to bracket")
        u = brentq(gap, lo, hi, xtol=1e-12, rtol=1e-14)

    w = np.exp(-u * k)
    w /= w.sum()
    _, sd = moments(u) if u > 0.0 else moments(0.0)
    spacing = params.tau_rms / sd
    return k * spacing, w


def generate_taps(
    params: ChannelParams, n_sym: int, t_sym: float, seed
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tap delays, powers, and unit-variance fading processes.

    Each tap is an independent sum of N_DOPPLER_COMPONENTS equal-power
    sinusoids whose Doppler shifts f_d*cos(alpha) use stratified random
    arrival angles, giving E[g(t) g*(t+dt)] = J0(2 pi f_d dt) exactly.
    Returns (delays [s], powers, gains) with gains of shape (n_taps, n_sym).
    """
    delays, powers = tap_profile(params)
    n_taps = delays.size
    m = N_DOPPLER_COMPONENTS
    rng = make_rng(seed, "taps")

    rot = rng.random(n_taps)                       # stratification offsets
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(n_taps, m))
    alpha = 2.0 * np.pi * (np.arange(m)[None, :] + rot[:, None]) / m
    doppler = params.f_d * np.cos(alpha)           # (n_taps, m)

    t = np.arange(n_sym) * t_sym
    arg = 2.0 * np.pi * doppler[:, :, None] * t[None, None, :] + phases[:, :, None]
    gains = np.exp(1j * arg).sum(axis=1) / np.sqrt(m)
    return delays, powers, gains


def generate_channel(params: ChannelParams, dims: GridDims, seed) -> ChannelRealization:
    """Frequency-domain channel over the grid, deterministic given the seed.

    h[f, t] = sum_k sqrt(p_k) g_k(t) exp(-j 2 pi f delta_f tau_k).
    """
    delays, powers, gains = generate_taps(params, dims.n_sym, dims.t_sym, seed)
    f = np.arange(dims.n_sub)
    steering = np.sqrt(powers)[None, :] * np.exp(
        -2j * np.pi * np.outer(f * dims.delta_f, delays)
    )
    return ChannelRealization(dims=dims, h=steering @ gains)


def path_loss_db(d: float, params: PathLossParams, shadow_x_db: float = 0.0) -> float:
    """Distance-dependent loss A + 10 n log10(d / r_min) + X - F, in dB."""
    if not params.r_min <= d <= params.r_max:
        raise ValueError(
            f"distance {d} m outside validity range [{params.r_min}, {params.r_max}] m"
        )
    return params.a_db + 10.0 * params.n_exp * np.log10(d / params.r_min) + shadow_x_db - params.f_db


def ici_power(f_d: float, delta_f: float, sigma_d2: float) -> float:
    """Intercarrier-interference power at its mobility-dominated bound."""
    if delta_f <= 0:
        raise ValueError("delta_f must be positive")
    return (np.pi * f_d / delta_f) ** 2 * sigma_d2 / 3.0


def apply_channel(
    grid: ResourceGrid, ch: ChannelRealization, cond: LinkCondition, f_d: float, seed
) -> ResourceGrid:
    """Received grid: per-RE fading plus thermal noise plus bound-level ICI."""
    if ch.dims != grid.dims:
        raise ValueError("channel and grid dimensions differ")
    shape = (grid.dims.n_sub, grid.dims.n_sym)
    rng = make_rng(seed, "rx-noise")
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    ici = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    sigma_w2 = cond.noise_power
    sigma_i2 = ici_power(f_d, grid.dims.delta_f, grid.power.sigma_d2)
    received = (
        ch.h * grid.cells
        + noise * np.sqrt(sigma_w2 / 2.0)
        + ici * np.sqrt(sigma_i2 / 2.0)
    )
    return ResourceGrid(
        dims=grid.dims,
        cells=received,
        pilot_mask=grid.pilot_mask,
        config=grid.config,
        power=grid.power,
    )

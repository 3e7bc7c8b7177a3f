"""Rate objective and exhaustive pilot-configuration search.

The achievable-rate surrogate is spectrum utilization times the Shannon
efficiency at the post-equalization SINR of a zero-forcing receiver, with
estimation error and mobility-bound ICI folded into the noise budget.  The
feasible sets are small and discrete, so the search is a direct enumeration
with a deterministic tie-break.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

from .channel import LinkCondition, ici_power
from .errors import ConfigurationError
from .grid import GridDims, PilotConfig, power_allocation, spectrum_utilization


@dataclass(frozen=True)
class FeasibleSets:
    """Discrete candidate values for the pilot configuration triad."""

    powers: tuple[float, ...]         # data-to-pilot ratios, linear
    freq_spacings: tuple[int, ...]    # subcarriers
    time_spacings: tuple[int, ...]    # OFDM symbols

    def __post_init__(self):
        if not (self.powers and self.freq_spacings and self.time_spacings):
            raise ConfigurationError("feasible sets must be non-empty")
        if min(self.freq_spacings) < 2:
            raise ConfigurationError("frequency spacings must be >= 2")
        if min(self.time_spacings) < 1:
            raise ConfigurationError("time spacings must be >= 1")
        if min(self.powers) <= 0:
            raise ConfigurationError("power ratios must be positive")

    @property
    def size(self) -> int:
        return len(self.powers) * len(self.freq_spacings) * len(self.time_spacings)


def default_feasible_sets() -> FeasibleSets:
    """Deployment defaults: rho in {-10,-9,-7,-5,-3,0} dB, dpf in 2..12 even, dpt in 1..10."""
    return FeasibleSets(
        powers=tuple(10.0 ** (db / 10.0) for db in (-10, -9, -7, -5, -3, 0)),
        freq_spacings=(2, 4, 6, 8, 10, 12),
        time_spacings=tuple(range(1, 11)),
    )


@dataclass(frozen=True)
class SinrTerms:
    """Signal and impairment powers entering the post-equalization SINR."""

    sigma_d2: float
    sigma_w2: float
    sigma_ici2: float
    sigma_mse2: float
    sigma_zf: float = 1.0  # ZF factor, 1 for the SISO / square-MIMO case

    def __post_init__(self):
        for name in ("sigma_d2", "sigma_w2", "sigma_ici2", "sigma_mse2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def post_eq_sinr(t: SinrTerms) -> float:
    """sigma_d2 * sigma_zf / (sigma_w2 + sigma_ici2 + sigma_mse2 * sigma_d2)."""
    denom = t.sigma_w2 + t.sigma_ici2 + t.sigma_mse2 * t.sigma_d2
    if denom == 0:
        raise ZeroDivisionError("impairment-free SINR is unbounded")
    return t.sigma_d2 * t.sigma_zf / denom


def rate_objective(
    cfg: PilotConfig, dims: GridDims, cond: LinkCondition, f_d: float, mse: float
) -> float:
    """Spectral efficiency S * log2(1 + SINR) for one pilot configuration."""
    s = spectrum_utilization(cfg, dims)
    if s == 0.0:
        return 0.0
    alloc = power_allocation(cfg, dims)
    terms = SinrTerms(
        sigma_d2=alloc.sigma_d2,
        sigma_w2=cond.noise_power,
        sigma_ici2=ici_power(f_d, dims.delta_f, alloc.sigma_d2),
        sigma_mse2=mse,
    )
    return s * math.log2(1.0 + post_eq_sinr(terms))


class MseProvider(Protocol):
    """Source of estimation-MSE values for candidate configurations."""

    def codeword_params(self, m_index: int, l_index: int) -> tuple[float, float]:
        """(f_d [Hz], tau_rms [s]) represented by a 1-based codeword pair."""
        ...

    def __call__(
        self, cfg: PilotConfig, m_index: int, l_index: int, pilot_snr: float
    ) -> float:
        ...


def optimize(
    cb_indices: tuple[int, int],
    cond: LinkCondition,
    sets: FeasibleSets,
    dims: GridDims,
    mse_provider: MseProvider,
) -> tuple[PilotConfig, float]:
    """Exhaustive rate maximization over the feasible sets.

    The provider owns the codeword-index-to-parameter mapping; its Doppler
    value also sets the ICI term.  Ties break toward fewer pilots
    (larger dpf*dpt), then larger rho, then lower dpf, which makes the
    result independent of enumeration order.
    """
    m_index, l_index = cb_indices
    f_d, _ = mse_provider.codeword_params(m_index, l_index)

    best_key = None
    best: tuple[PilotConfig, float] | None = None
    for rho in sets.powers:
        for dpf in sets.freq_spacings:
            for dpt in sets.time_spacings:
                cfg = PilotConfig(rho, dpf, dpt)
                if spectrum_utilization(cfg, dims) == 0.0:
                    rate = 0.0
                else:
                    alloc = power_allocation(cfg, dims)
                    pilot_snr = alloc.sigma_p2 / cond.noise_power
                    mse = mse_provider(cfg, m_index, l_index, pilot_snr)
                    rate = rate_objective(cfg, dims, cond, f_d, mse)
                key = (rate, dpf * dpt, rho, -dpf)
                if best_key is None or key > best_key:
                    best_key = key
                    best = (cfg, rate)
    assert best is not None
    return best


def ceil_log2(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return (n - 1).bit_length()


def feedback_bits_explicit(sets: FeasibleSets) -> int:
    """Bits to index one configuration out of the full feasible product set."""
    return ceil_log2(sets.size)


def feedback_rate_explicit(sets: FeasibleSets, dims: GridDims) -> float:
    """Explicit feedback overhead in bps at one message per window."""
    return feedback_bits_explicit(sets) / (dims.n_sym * dims.t_sym)


def feedback_bits_implicit(cb) -> int:
    """Bits to index one (temporal, spectral) codeword pair."""
    return ceil_log2(cb.m_t * cb.m_f)


def feedback_rate_implicit(cb, dims: GridDims) -> float:
    return feedback_bits_implicit(cb) / (dims.n_sym * dims.t_sym)

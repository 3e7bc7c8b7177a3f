"""OFDM resource grid with diamond-lattice pilot placement.

The lattice is the union of two rectangular combs: comb A anchored at
(subcarrier 0, symbol 0) and comb B staggered by (dpf // 2, dpt // 2),
the staggering used by LTE/NR cell reference signals.  Pilot and data
powers are split so the grid-average power per resource element is
exactly one.

Array convention throughout the package: shape (n_sub, n_sym), axis 0 is
frequency (subcarrier index), axis 1 is time (OFDM symbol index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class GridDims:
    """Resource-grid dimensions and physical sampling steps."""

    n_sub: int            # subcarriers
    n_sym: int            # OFDM symbols per window
    delta_f: float        # subcarrier spacing [Hz]
    t_sym: float          # OFDM symbol duration incl. CP [s]

    def __post_init__(self):
        if self.n_sub < 2 or self.n_sym < 1:
            raise ConfigurationError(f"grid too small: {self.n_sub}x{self.n_sym}")
        if self.delta_f <= 0 or self.t_sym <= 0:
            raise ConfigurationError("delta_f and t_sym must be positive")

    @property
    def n_cells(self) -> int:
        return self.n_sub * self.n_sym


@dataclass(frozen=True)
class PilotConfig:
    """Pilot pattern triad: power ratio and spacings.

    rho is the data-to-pilot power ratio on a linear scale; dpf/dpt are the
    pilot spacings in subcarriers and OFDM symbols.
    """

    rho: float
    dpf: int
    dpt: int

    def __post_init__(self):
        if self.dpf < 2:
            raise ConfigurationError(f"dpf must be >= 2, got {self.dpf}")
        if self.dpt < 1:
            raise ConfigurationError(f"dpt must be >= 1, got {self.dpt}")
        if not self.rho > 0:
            raise ConfigurationError(f"rho must be positive, got {self.rho}")

    @classmethod
    def from_db(cls, rho_db: float, dpf: int, dpt: int) -> "PilotConfig":
        return cls(10.0 ** (rho_db / 10.0), dpf, dpt)

    @property
    def rho_db(self) -> float:
        return 10.0 * np.log10(self.rho)


@dataclass(frozen=True)
class PowerAllocation:
    """Per-RE average powers for data and pilot cells."""

    sigma_d2: float
    sigma_p2: float


@dataclass(frozen=True)
class ResourceGrid:
    """A filled time-frequency grid plus the pilot layout it was built with."""

    dims: GridDims
    cells: np.ndarray       # complex, shape (n_sub, n_sym)
    pilot_mask: np.ndarray  # bool, same shape
    config: PilotConfig
    power: PowerAllocation

    def __post_init__(self):
        shape = (self.dims.n_sub, self.dims.n_sym)
        if self.cells.shape != shape or self.pilot_mask.shape != shape:
            raise ValueError(f"cell/mask shape mismatch, expected {shape}")


def _comb_offsets(cfg: PilotConfig) -> tuple[tuple[int, int], tuple[int, int]]:
    return (0, 0), (cfg.dpf // 2, cfg.dpt // 2)


def pilot_mask(cfg: PilotConfig, dims: GridDims) -> np.ndarray:
    """Boolean (n_sub, n_sym) mask of pilot resource elements."""
    f = np.arange(dims.n_sub)[:, None]
    t = np.arange(dims.n_sym)[None, :]
    mask = np.zeros((dims.n_sub, dims.n_sym), dtype=bool)
    for off_f, off_t in _comb_offsets(cfg):
        mask |= (f % cfg.dpf == off_f) & (t % cfg.dpt == off_t)
    return mask


def pilot_positions(cfg: PilotConfig, dims: GridDims) -> set[tuple[int, int]]:
    """Set of (subcarrier, symbol) pilot positions of the two-comb lattice."""
    positions: set[tuple[int, int]] = set()
    for off_f, off_t in _comb_offsets(cfg):
        for fi in range(off_f, dims.n_sub, cfg.dpf):
            for ti in range(off_t, dims.n_sym, cfg.dpt):
                positions.add((fi, ti))
    return positions


def pilot_count(cfg: PilotConfig, dims: GridDims) -> int:
    """Number of pilot REs, by integer counting (no enumeration)."""
    total = 0
    for off_f, off_t in _comb_offsets(cfg):
        nf = len(range(off_f, dims.n_sub, cfg.dpf))
        nt = len(range(off_t, dims.n_sym, cfg.dpt))
        total += nf * nt
    return total


def spectrum_utilization(cfg: PilotConfig, dims: GridDims) -> float:
    """Fraction of REs carrying data: S = 1 - pilots / total cells."""
    return 1.0 - pilot_count(cfg, dims) / dims.n_cells


def power_allocation(cfg: PilotConfig, dims: GridDims) -> PowerAllocation:
    """Data/pilot power split meeting the unit average-power budget exactly.

    With pilot density delta, sigma_p2 = 1 / ((1 - delta) * rho + delta) and
    sigma_d2 = rho * sigma_p2, so (1-delta)*sigma_d2 + delta*sigma_p2 == 1.
    """
    delta = pilot_count(cfg, dims) / dims.n_cells
    sigma_p2 = 1.0 / ((1.0 - delta) * cfg.rho + delta)
    return PowerAllocation(sigma_d2=cfg.rho * sigma_p2, sigma_p2=sigma_p2)


def build_grid(
    cfg: PilotConfig,
    dims: GridDims,
    data_symbols: np.ndarray,
    pilot_symbols: np.ndarray,
) -> ResourceGrid:
    """Fill a grid from unit-power symbol streams, applying the power split.

    Symbols are consumed in row-major (subcarrier-major) grid order.  Exact
    counts are required: len(pilot_symbols) == number of pilot REs and
    len(data_symbols) == number of data REs.
    """
    mask = pilot_mask(cfg, dims)
    n_p = int(mask.sum())
    n_d = dims.n_cells - n_p
    data_symbols = np.asarray(data_symbols, dtype=complex)
    pilot_symbols = np.asarray(pilot_symbols, dtype=complex)
    if pilot_symbols.size != n_p:
        raise ValueError(f"need {n_p} pilot symbols, got {pilot_symbols.size}")
    if data_symbols.size != n_d:
        raise ValueError(f"need {n_d} data symbols, got {data_symbols.size}")

    alloc = power_allocation(cfg, dims)
    cells = np.empty((dims.n_sub, dims.n_sym), dtype=complex)
    cells[mask] = pilot_symbols * np.sqrt(alloc.sigma_p2)
    cells[~mask] = data_symbols * np.sqrt(alloc.sigma_d2)
    return ResourceGrid(dims=dims, cells=cells, pilot_mask=mask, config=cfg, power=alloc)


def qpsk_symbols(n: int, rng: np.random.Generator) -> np.ndarray:
    """n random unit-power QPSK symbols."""
    bits = rng.integers(0, 2, size=(2, n))
    return ((2 * bits[0] - 1) + 1j * (2 * bits[1] - 1)) / np.sqrt(2.0)


def pilot_values(cfg: PilotConfig, dims: GridDims) -> np.ndarray:
    """Transmitted pilot cell values: all-ones scaled to pilot power.

    Both link ends know these by construction, which is all LS estimation
    needs.  Order matches row-major iteration over the pilot mask.
    """
    alloc = power_allocation(cfg, dims)
    return np.full(pilot_count(cfg, dims), np.sqrt(alloc.sigma_p2), dtype=complex)

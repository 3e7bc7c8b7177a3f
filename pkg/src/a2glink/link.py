"""Per-epoch receiver processing and transmitter feedback application.

Each epoch spans one statistics window (n_sym OFDM symbols).  During epoch
k the receiver estimates the channel under the active configuration,
projects the measured statistics onto the codebook, re-optimizes the pilot
configuration, and feeds it back; the transmitter applies it from epoch
k+1.  Feedback can carry the chosen configuration itself (explicit) or the
matched codeword indices (implicit), from which the transmitter re-derives
the identical configuration by running the same deterministic optimization.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channel import LinkCondition
from .codebook import Codebook, match
from .errors import ProtocolError
from .estimator import CachedMseProvider, estimate_channel, estimate_correlations
from .grid import GridDims, PilotConfig, ResourceGrid, pilot_mask, pilot_values
from .optimizer import (
    FeasibleSets,
    MseProvider,
    feedback_bits_explicit,
    feedback_bits_implicit,
    optimize,
)

EXPLICIT = "explicit"
IMPLICIT = "implicit"

# Initial configuration before any feedback has arrived: the base pilot
# spacing (6 subcarriers, 4 symbols) at -3 dB data-to-pilot ratio.
BOOTSTRAP_CONFIG = PilotConfig.from_db(-3.0, 6, 4)


@dataclass(frozen=True)
class FeedbackMessage:
    """One per-epoch feedback payload, explicit or implicit."""

    kind: str
    config: PilotConfig | None          # explicit payload
    codeword_indices: tuple[int, int] | None  # implicit payload (m, l), 1-based
    bit_cost: int

    def __post_init__(self):
        if self.kind not in (EXPLICIT, IMPLICIT):
            raise ProtocolError(f"unknown feedback kind {self.kind!r}")
        if self.kind == EXPLICIT and self.config is None:
            raise ProtocolError("explicit feedback needs a config payload")
        if self.kind == IMPLICIT and self.codeword_indices is None:
            raise ProtocolError("implicit feedback needs codeword indices")

    def trace_line(self, epoch: int) -> str:
        if self.kind == EXPLICIT:
            c = self.config
            payload = f"rho_db={c.rho_db:.6g} dpf={c.dpf} dpt={c.dpt}"
        else:
            m, l = self.codeword_indices
            payload = f"m={m} l={l}"
        return f"epoch={epoch} mode={self.kind} {payload} bits={self.bit_cost}"


@dataclass(frozen=True)
class EpochState:
    """Adaptation state: the config in force now and the one queued next."""

    epoch: int
    active: PilotConfig
    pending: PilotConfig | None = None


def initial_state(config: PilotConfig = BOOTSTRAP_CONFIG) -> EpochState:
    return EpochState(epoch=0, active=config, pending=None)


def receiver_epoch(
    received: ResourceGrid,
    state: EpochState,
    cb: Codebook,
    sets: FeasibleSets,
    cond: LinkCondition,
    *,
    mse_provider: MseProvider | None = None,
    feedback: str = EXPLICIT,
) -> tuple[FeedbackMessage, EpochState]:
    """Receiver-side processing of one epoch window.

    Runs estimation, statistics measurement, codebook matching, and the
    exhaustive re-optimization; returns the feedback message and the state
    with the newly chosen config queued as pending.
    """
    if received.config != state.active:
        raise ProtocolError(
            f"window built with {received.config}, but active config is {state.active}"
        )
    if feedback not in (EXPLICIT, IMPLICIT):
        raise ProtocolError(f"unknown feedback kind {feedback!r}")
    if mse_provider is None:
        mse_provider = CachedMseProvider(cb)

    dims = received.dims
    mask = pilot_mask(state.active, dims)
    positions = np.argwhere(mask)
    sent = {
        (int(fi), int(ti)): v
        for (fi, ti), v in zip(positions, pilot_values(state.active, dims))
    }
    est = estimate_channel(received, sent)
    r_t, r_f = estimate_correlations(est, cb.n_dt, cb.n_df)
    m_index, l_index = match(r_t, r_f, cb)
    chosen, _ = optimize((m_index, l_index), cond, sets, dims, mse_provider)

    if feedback == EXPLICIT:
        msg = FeedbackMessage(
            kind=EXPLICIT,
            config=chosen,
            codeword_indices=None,
            bit_cost=feedback_bits_explicit(sets),
        )
    else:
        msg = FeedbackMessage(
            kind=IMPLICIT,
            config=None,
            codeword_indices=(m_index, l_index),
            bit_cost=feedback_bits_implicit(cb),
        )
    return msg, replace(state, pending=chosen)


def transmitter_apply(
    msg: FeedbackMessage,
    state: EpochState,
    sets: FeasibleSets,
    cb: Codebook,
    cond: LinkCondition,
    dims: GridDims,
    *,
    mse_provider: MseProvider | None = None,
) -> PilotConfig:
    """Config for the next epoch, derived from the feedback message.

    Implicit mode re-runs the optimization from the codeword indices under
    the shared noise-power assumption; determinism of the search guarantees
    both ends land on the same configuration.
    """
    if msg.kind == EXPLICIT:
        cfg = msg.config
        if (
            cfg.rho not in sets.powers
            or cfg.dpf not in sets.freq_spacings
            or cfg.dpt not in sets.time_spacings
        ):
            raise ProtocolError(f"explicit config {cfg} outside the shared feasible sets")
        return cfg

    m_index, l_index = msg.codeword_indices
    if not 1 <= m_index <= cb.m_t:
        raise ProtocolError(f"temporal codeword index {m_index} out of range 1..{cb.m_t}")
    if not 1 <= l_index <= cb.m_f:
        raise ProtocolError(f"spectral codeword index {l_index} out of range 1..{cb.m_f}")
    if mse_provider is None:
        mse_provider = CachedMseProvider(cb)
    cfg, _ = optimize((m_index, l_index), cond, sets, dims, mse_provider)
    return cfg


def advance(state: EpochState, next_config: PilotConfig) -> EpochState:
    """Epoch rollover: the applied config becomes active for epoch k+1."""
    return EpochState(epoch=state.epoch + 1, active=next_config, pending=None)

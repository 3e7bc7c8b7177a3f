"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator

from ..grid import PilotConfig
from ..scenario import ScenarioStage, TauProfile


class PilotConfigModel(BaseModel):
    rho_db: float
    dpf: int = Field(ge=2)
    dpt: int = Field(ge=1)

    @classmethod
    def from_core(cls, cfg: PilotConfig) -> "PilotConfigModel":
        return cls(rho_db=float(cfg.rho_db), dpf=cfg.dpf, dpt=cfg.dpt)

    def to_core(self) -> PilotConfig:
        return PilotConfig.from_db(self.rho_db, self.dpf, self.dpt)


class CodewordModel(BaseModel):
    index: int
    label: str
    parameter: float                 # f_d [Hz] or tau_rms [s]
    values: list[tuple[float, float]]  # (re, im) per lag, lag 0 first


class CodebookResponse(BaseModel):
    temporal: list[CodewordModel]
    spectral: list[CodewordModel]
    n_dt: int
    n_df: int
    implicit_bits: int
    table: str


class FeedbackBudgetResponse(BaseModel):
    explicit_bits: int
    explicit_bps: float
    implicit_bits: int
    implicit_bps: float


class OptimizeRequest(BaseModel):
    snr_db: float
    m_index: int = Field(ge=1)
    l_index: int = Field(ge=1)


class OptimizeResponse(BaseModel):
    config: PilotConfigModel
    objective: float
    m_index: int
    l_index: int


class TauModel(BaseModel):
    constant_ns: float | None = None
    uniform_ns: tuple[float, float] | None = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.constant_ns is None) == (self.uniform_ns is None):
            raise ValueError("tau_rms needs exactly one of constant_ns / uniform_ns")
        return self

    def to_core(self) -> TauProfile:
        if self.constant_ns is not None:
            return TauProfile.constant(self.constant_ns * 1e-9)
        lo, hi = self.uniform_ns
        return TauProfile.uniform(lo * 1e-9, hi * 1e-9)


class StageModel(BaseModel):
    duration_s: float = Field(gt=0)
    v_start_kmh: float = Field(ge=0)
    v_end_kmh: float = Field(ge=0)
    tau_rms: TauModel
    d_start_m: float = Field(gt=0)
    d_end_m: float = Field(gt=0)

    def to_core(self) -> ScenarioStage:
        return ScenarioStage(
            duration_s=self.duration_s,
            v_start_kmh=self.v_start_kmh,
            v_end_kmh=self.v_end_kmh,
            tau=self.tau_rms.to_core(),
            d_start_m=self.d_start_m,
            d_end_m=self.d_end_m,
        )


class ScenarioRunRequest(BaseModel):
    stages: list[StageModel] | None = None   # None: built-in default scenario
    time_scale: float = Field(default=0.02, gt=0, le=1)
    seeds: int = Field(default=1, ge=1)
    base_seed: int = Field(default=1, ge=0)
    feedback: Literal["explicit", "implicit"] = "explicit"


class EpochRecordModel(BaseModel):
    epoch: int
    t_sec: float
    stage: int
    f_d_hz: float
    tau_rms_ns: float
    snr_db: float
    rho_db: float
    dpf: int
    dpt: int
    rate_adaptive: float
    fixed_rates: list[float]


class RunModel(BaseModel):
    seed: int
    n_epochs: int
    mean_rate_adaptive: float
    mean_rate_fixed: dict[str, float]
    records: list[EpochRecordModel]
    trace_csv: str


class ScenarioRunResponse(BaseModel):
    labels: list[str]
    feedback_bits: int
    feedback_bps: float
    runs: list[RunModel]
    gains: dict[str, dict[int, float]]
    gains_csv: str
    cdf_csv: str
    summary_txt: str


class GainsRequest(BaseModel):
    adaptive: list[float]
    fixed: dict[str, list[float]]
    percentiles: list[int] = [10, 50, 90]


class GainsResponse(BaseModel):
    gains: dict[str, dict[int, float]]
    gains_csv: str

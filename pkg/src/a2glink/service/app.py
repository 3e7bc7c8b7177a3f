"""HTTP service wrapping the simulator.

One process hosts the shared Monte Carlo MSE cache, so repeated scenario
runs and optimization queries from any number of clients reuse warm
values.  Results are independent of cache warmth by construction (cache
seeds derive from the cache key), so serving does not perturb determinism.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..channel import LinkCondition
from ..codebook import Codebook, build_default_codebook, format_table
from ..errors import ConfigurationError
from ..estimator import CachedMseProvider
from ..grid import GridDims
from ..optimizer import (
    default_feasible_sets,
    feedback_bits_explicit,
    feedback_bits_implicit,
    feedback_rate_explicit,
    feedback_rate_implicit,
    optimize,
)
from ..scenario import (
    SimParams,
    default_fixed_configs,
    default_scenario,
    gains_from_rates,
    percentile_gains,
    render_cdf_csv,
    render_gains_csv,
    render_summary,
    render_trace_csv,
    run_scenario,
)
from .models import (
    CodebookResponse,
    CodewordModel,
    EpochRecordModel,
    FeedbackBudgetResponse,
    GainsRequest,
    GainsResponse,
    OptimizeRequest,
    OptimizeResponse,
    PilotConfigModel,
    RunModel,
    ScenarioRunRequest,
    ScenarioRunResponse,
)

app = FastAPI(
    title="a2glink",
    version=__version__,
    description="Adaptive OFDM pilot patterns for UAV air-to-ground links",
)

DIMS = GridDims(72, 1500, 15e3, 71.875e-6)
CODEBOOK: Codebook = build_default_codebook(DIMS.t_sym, DIMS.delta_f)
SETS = default_feasible_sets()
PROVIDER = CachedMseProvider(CODEBOOK)  # shared warm cache, order-independent values


def _codeword_models(codewords) -> list[CodewordModel]:
    return [
        CodewordModel(
            index=i,
            label=cw.label,
            parameter=cw.parameter,
            values=[(float(v.real), float(v.imag)) for v in cw.profile.values],
        )
        for i, cw in enumerate(codewords, start=1)
    ]


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__, "mse_cache_entries": len(PROVIDER)}


@app.get("/codebook", response_model=CodebookResponse)
def codebook() -> CodebookResponse:
    return CodebookResponse(
        temporal=_codeword_models(CODEBOOK.temporal),
        spectral=_codeword_models(CODEBOOK.spectral),
        n_dt=CODEBOOK.n_dt,
        n_df=CODEBOOK.n_df,
        implicit_bits=feedback_bits_implicit(CODEBOOK),
        table=format_table(CODEBOOK),
    )


@app.get("/feedback-budget", response_model=FeedbackBudgetResponse)
def feedback_budget() -> FeedbackBudgetResponse:
    return FeedbackBudgetResponse(
        explicit_bits=feedback_bits_explicit(SETS),
        explicit_bps=feedback_rate_explicit(SETS, DIMS),
        implicit_bits=feedback_bits_implicit(CODEBOOK),
        implicit_bps=feedback_rate_implicit(CODEBOOK, DIMS),
    )


@app.post("/optimize", response_model=OptimizeResponse)
def optimize_config(req: OptimizeRequest) -> OptimizeResponse:
    if not 1 <= req.m_index <= CODEBOOK.m_t:
        raise HTTPException(400, f"m_index out of range 1..{CODEBOOK.m_t}")
    if not 1 <= req.l_index <= CODEBOOK.m_f:
        raise HTTPException(400, f"l_index out of range 1..{CODEBOOK.m_f}")
    cfg, objective = optimize(
        (req.m_index, req.l_index), LinkCondition(req.snr_db), SETS, DIMS, PROVIDER
    )
    return OptimizeResponse(
        config=PilotConfigModel.from_core(cfg),
        objective=objective,
        m_index=req.m_index,
        l_index=req.l_index,
    )


@app.post("/scenario/run", response_model=ScenarioRunResponse)
def scenario_run(req: ScenarioRunRequest) -> ScenarioRunResponse:
    stages = (
        default_scenario()
        if req.stages is None
        else tuple(s.to_core() for s in req.stages)
    )
    fixed = default_fixed_configs()
    sim = SimParams(dims=DIMS, codebook=CODEBOOK, sets=SETS)
    try:
        reports = [
            run_scenario(
                stages,
                fixed,
                sim,
                req.time_scale,
                seed=req.base_seed + i,
                feedback=req.feedback,
                mse_provider=PROVIDER,
            )
            for i in range(req.seeds)
        ]
    except (ConfigurationError, ValueError) as exc:
        raise HTTPException(400, str(exc)) from exc

    gains = percentile_gains(reports)
    runs = [
        RunModel(
            seed=rep.seed,
            n_epochs=rep.n_epochs,
            mean_rate_adaptive=rep.mean_rate_adaptive,
            mean_rate_fixed=rep.mean_rate_fixed(),
            records=[
                EpochRecordModel(
                    epoch=r.epoch,
                    t_sec=r.t_sec,
                    stage=r.stage,
                    f_d_hz=r.f_d_hz,
                    tau_rms_ns=r.tau_rms_ns,
                    snr_db=r.snr_db,
                    rho_db=r.rho_db,
                    dpf=r.dpf,
                    dpt=r.dpt,
                    rate_adaptive=r.rate_adaptive,
                    fixed_rates=list(r.fixed_rates),
                )
                for r in rep.records
            ],
            trace_csv=render_trace_csv(rep),
        )
        for rep in reports
    ]
    return ScenarioRunResponse(
        labels=list(reports[0].fixed_labels),
        feedback_bits=reports[0].feedback_bits,
        feedback_bps=reports[0].feedback_bps,
        runs=runs,
        gains=gains,
        gains_csv=render_gains_csv(gains),
        cdf_csv=render_cdf_csv(reports),
        summary_txt=render_summary(reports),
    )


@app.post("/gains", response_model=GainsResponse)
def gains(req: GainsRequest) -> GainsResponse:
    try:
        table = gains_from_rates(req.adaptive, req.fixed, req.percentiles)
    except ValueError as exc:
        raise HTTPException(400, str(exc)) from exc
    return GainsResponse(gains=table, gains_csv=render_gains_csv(table))

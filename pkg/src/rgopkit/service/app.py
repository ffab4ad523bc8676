"""HTTP compute service. All endpoints are stateless; every response is a
ResultRecord envelope carrying the echoed inputs and the outputs."""

from __future__ import annotations

from datetime import datetime, timezone

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..conic import MAX_SDP_HORIZON, sdp_growth_rate, socp_growth_rate
from ..errors import NumericalFailure, RgopError
from ..fixtures import four_asset_moments
from ..growth import (
    GrowthQuery,
    approx_growth_rate_general,
    relative_gap,
    worst_case_growth_rate,
)
from ..market import (
    AutocorrelationSpec,
    CorrelationKind,
    ProjectedMoments,
    aggregate_rho,
    estimate_moments,
    project_moments,
    random_circulant_spec,
)
from ..optimizer import annotate_growth, efficient_frontier, rgop
from ..simulate import (
    SimulationConfig,
    actual_growth_rate,
    realized_sharpe,
    sample_paths,
)
from .models import (
    ApproxErrorRequest,
    EstimateMomentsRequest,
    FrontierRequest,
    GrowthRequest,
    OptimizeRequest,
    ResultRecord,
    SimulateRequest,
    VerifyRequest,
)

_STATUS_BY_CATEGORY = {"validation": 400, "numerical": 500, "io": 400}


def _record(command, req, outputs, seed=None) -> ResultRecord:
    return ResultRecord(
        command=command,
        inputs=req.model_dump(mode="json"),
        outputs=outputs,
        software_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
        seed=seed,
    )


def _random_toeplitz(rng, T, lo, hi, max_tries=1000) -> AutocorrelationSpec:
    for _ in range(max_tries):
        rho = np.concatenate([[1.0], rng.uniform(lo, hi, size=T - 1)])
        spec = AutocorrelationSpec(rho, CorrelationKind.TOEPLITZ)
        if np.linalg.eigvalsh(spec.matrix()).min() > 1e-8:
            return spec
    raise NumericalFailure(
        f"could not draw a positive definite profile at T={T} after "
        f"{max_tries} tries"
    )


def _verify_instance(p: ProjectedMoments, q: GrowthQuery, tolerance: float):
    """One instance of the closed form against the conic oracles."""
    rho_bar = aggregate_rho(p.spec) if q.horizon >= 2 else 0.0
    closed = worst_case_growth_rate(p, rho_bar, q).growth_rate
    scale = max(1.0, abs(closed))
    circulant = p.spec.kind is CorrelationKind.CIRCULANT
    row = {
        "mean": p.mean_return,
        "variance": p.variance,
        "epsilon": q.epsilon,
        "horizon": q.horizon,
        "rho_bar": rho_bar,
        "closed_form": closed,
        "exact_closed_form": circulant,
        "sdp": None,
        "sdp_gap": None,
        "socp": None,
        "socp_gap": None,
    }
    checks = []
    if q.horizon <= MAX_SDP_HORIZON:
        g = sdp_growth_rate(p, q)
        row["sdp"] = g
        if circulant:
            row["sdp_gap"] = abs(g - closed)
            checks.append(row["sdp_gap"] <= tolerance * scale)
        else:
            # aggregate shortcut is a lower bound on the dense value
            checks.append(g >= closed - 1e-7)
    if circulant:
        g = socp_growth_rate(p, q)
        row["socp"] = g
        row["socp_gap"] = abs(g - closed)
        checks.append(row["socp_gap"] <= tolerance * scale)
    row["within_tolerance"] = bool(all(checks)) if checks else None
    return row


def create_app() -> FastAPI:
    app = FastAPI(title="rgopkit", version=__version__)

    @app.exception_handler(RgopError)
    async def _domain_error(request: Request, exc: RgopError):
        return JSONResponse(
            status_code=_STATUS_BY_CATEGORY.get(exc.category, 500),
            content={
                "error": type(exc).__name__,
                "category": exc.category,
                "message": str(exc),
            },
        )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400,
            content={
                "error": type(exc).__name__,
                "category": "validation",
                "message": str(exc),
            },
        )

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/growth", response_model=ResultRecord)
    def growth(req: GrowthRequest):
        spec = req.profile.to_spec()
        q = GrowthQuery(req.epsilon, spec.horizon)
        if req.moments is not None:
            p = project_moments(
                req.moments.to_moments(), req.to_portfolio(), spec
            )
        else:
            p = ProjectedMoments(req.mean, req.variance, spec)
        res = approx_growth_rate_general(p, q)
        outputs = {
            "growth_rate": res.growth_rate,
            "feasibility_margin": res.feasibility_margin,
            "persistent_risk": res.persistent_risk,
            "compounding_risk": res.compounding_risk,
            "rho_bar": res.rho_bar_used,
            "mean": p.mean_return,
            "variance": p.variance,
            "horizon": q.horizon,
            "epsilon": q.epsilon,
            "exact": spec.kind is CorrelationKind.CIRCULANT,
        }
        return _record("growth", req, outputs)

    @app.post("/v1/verify", response_model=ResultRecord)
    def verify(req: VerifyRequest):
        rows = []
        if req.instances > 0:
            rng = np.random.default_rng(req.seed)
            for _ in range(req.instances):
                T = int(rng.integers(req.horizon_min, req.horizon_max + 1))
                spec = random_circulant_spec(rng, T)
                mean = rng.uniform(*req.mean_range)
                sd = rng.uniform(*req.sd_range)
                eps = rng.uniform(*req.epsilon_range)
                rows.append(
                    _verify_instance(
                        ProjectedMoments(mean, sd * sd, spec),
                        GrowthQuery(eps, T),
                        req.tolerance,
                    )
                )
        else:
            spec = req.profile.to_spec()
            rows.append(
                _verify_instance(
                    ProjectedMoments(req.mean, req.variance, spec),
                    GrowthQuery(req.epsilon, spec.horizon),
                    req.tolerance,
                )
            )
        gaps = [
            r[k]
            for r in rows
            for k in ("sdp_gap", "socp_gap")
            if r[k] is not None
        ]
        outputs = {
            "table": rows,
            "max_gap": max(gaps) if gaps else None,
            "all_within_tolerance": all(
                r["within_tolerance"] is not False for r in rows
            ),
            "tolerance": req.tolerance,
        }
        return _record("verify", req, outputs, seed=req.seed)

    @app.post("/v1/optimize", response_model=ResultRecord)
    def optimize(req: OptimizeRequest):
        m = req.moments.to_moments()
        W = (
            req.constraints.to_constraints(m.n_assets)
            if req.constraints
            else None
        )
        q = GrowthQuery(req.epsilon, req.horizon)
        res = rgop(m, req.rho_bar, q, W)
        w = res.portfolio.weights
        outputs = {
            "weights": w.tolist(),
            "growth_rate": res.growth_rate,
            "expected_return": float(w @ m.mu),
            "variance": float(w @ m.sigma @ w),
            "precondition_certified": res.precondition_certified,
            "rho_bar": req.rho_bar,
            "epsilon": req.epsilon,
            "horizon": req.horizon,
        }
        return _record("optimize", req, outputs)

    @app.post("/v1/frontier", response_model=ResultRecord)
    def frontier(req: FrontierRequest):
        m = req.moments.to_moments()
        W = (
            req.constraints.to_constraints(m.n_assets)
            if req.constraints
            else None
        )
        q = GrowthQuery(req.epsilon, req.horizon)
        base = efficient_frontier(m, W, req.points)
        rows = []
        optima = []
        for rb in req.rho_bars:
            for i, pt in enumerate(annotate_growth(base, rb, q)):
                row = {
                    "rho_bar": rb,
                    "index": i,
                    "expected_return": pt.expected_return,
                    "variance": pt.variance,
                    "growth_rate": pt.growth_rate,
                }
                if req.include_weights:
                    row["weights"] = pt.portfolio.weights.tolist()
                rows.append(row)
            best = rgop(m, rb, q, W)
            bw = best.portfolio.weights
            optima.append(
                {
                    "rho_bar": rb,
                    "weights": bw.tolist(),
                    "growth_rate": best.growth_rate,
                    "expected_return": float(bw @ m.mu),
                    "variance": float(bw @ m.sigma @ bw),
                    "precondition_certified": best.precondition_certified,
                }
            )
        outputs = {"table": rows, "optimal": optima}
        return _record("frontier", req, outputs)

    @app.post("/v1/simulate", response_model=ResultRecord)
    def simulate(req: SimulateRequest):
        m = (
            req.moments.to_moments()
            if req.moments is not None
            else four_asset_moments()
        )
        rows = []
        samples = {}
        for T in req.horizons:
            rb = req.rho_bar if req.rho_bar is not None else -1.0 / T
            spec = AutocorrelationSpec.constant(T, rb)
            q = GrowthQuery(req.epsilon, T)
            w_aware = rgop(m, rb, q).portfolio
            w_blind = rgop(m, 0.0, q).portfolio
            cfg = SimulationConfig(
                moments=m,
                spec=spec,
                epsilon=req.epsilon,
                scenarios=req.scenarios,
                seed=req.seed,
            )
            paths = sample_paths(cfg)
            g_aware = actual_growth_rate(paths, w_aware, req.epsilon)
            g_blind = actual_growth_rate(paths, w_blind, req.epsilon)
            sh_aware = realized_sharpe(paths, w_aware)
            sh_blind = realized_sharpe(paths, w_blind)
            rows.append(
                {
                    "horizon": T,
                    "rho_bar": rb,
                    "outperformance": relative_gap(g_aware, g_blind),
                    "growth_correlated": g_aware,
                    "growth_uncorrelated": g_blind,
                    "sharpe_median_correlated": float(np.median(sh_aware)),
                    "sharpe_median_uncorrelated": float(np.median(sh_blind)),
                    "sharpe_q1_correlated": float(np.quantile(sh_aware, 0.25)),
                    "sharpe_q3_correlated": float(np.quantile(sh_aware, 0.75)),
                    "sharpe_q1_uncorrelated": float(np.quantile(sh_blind, 0.25)),
                    "sharpe_q3_uncorrelated": float(np.quantile(sh_blind, 0.75)),
                    "weights_correlated": w_aware.weights.tolist(),
                    "weights_uncorrelated": w_blind.weights.tolist(),
                }
            )
            if req.include_sharpe_samples:
                samples[str(T)] = {
                    "correlated": sh_aware.tolist(),
                    "uncorrelated": sh_blind.tolist(),
                }
        outputs = {"table": rows}
        if req.include_sharpe_samples:
            outputs["sharpe_samples"] = samples
        return _record("simulate", req, outputs, seed=req.seed)

    @app.post("/v1/approx-error", response_model=ResultRecord)
    def approx_error(req: ApproxErrorRequest):
        rng = np.random.default_rng(req.seed)
        rows = []
        for T in req.horizons:
            q = GrowthQuery(req.epsilon, T)
            rels = []
            approxs = []
            for _ in range(req.repetitions):
                spec = _random_toeplitz(rng, T, req.rho_low, req.rho_high)
                p = ProjectedMoments(req.mean, req.sd**2, spec)
                g_apx = approx_growth_rate_general(p, q).growth_rate
                approxs.append(g_apx)
                if T <= MAX_SDP_HORIZON:
                    g_exact = sdp_growth_rate(p, q)
                    rels.append((g_apx - g_exact) / abs(g_exact))
            row = {
                "horizon": T,
                "repetitions": req.repetitions,
                "exact_available": T <= MAX_SDP_HORIZON,
                "approx_median": float(np.median(approxs)),
                "rel_error_median": None,
                "rel_error_min": None,
                "rel_error_max": None,
            }
            if rels:
                row["rel_error_median"] = float(np.median(rels))
                row["rel_error_min"] = float(np.min(rels))
                row["rel_error_max"] = float(np.max(rels))
            rows.append(row)
        return _record("approx-error", req, {"table": rows}, seed=req.seed)

    @app.post("/v1/estimate-moments", response_model=ResultRecord)
    def estimate(req: EstimateMomentsRequest):
        m = estimate_moments(np.asarray(req.returns, dtype=float))
        labels = req.labels or [f"asset_{i + 1}" for i in range(m.n_assets)]
        outputs = {
            "mu": m.mu.tolist(),
            "sigma": m.sigma.tolist(),
            "labels": list(labels),
            "n_observations": len(req.returns),
        }
        return _record("estimate-moments", req, outputs)

    return app


app = create_app()

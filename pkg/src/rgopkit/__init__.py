"""Robust growth-optimal portfolio toolkit."""

from .fixtures import four_asset_moments, industry_moments
from .growth import (
    GrowthQuery,
    GrowthResult,
    approx_growth_rate_general,
    feasibility_margin,
    relative_gap,
    worst_case_growth_rate,
)
from .market import (
    AutocorrelationSpec,
    CorrelationKind,
    MarketMoments,
    Portfolio,
    ProjectedMoments,
    aggregate_rho,
    estimate_moments,
    modified_covariance,
    project_moments,
    random_circulant_spec,
)
from .optimizer import (
    FrontierPoint,
    PortfolioConstraintSet,
    RgopResult,
    annotate_growth,
    efficient_frontier,
    rgop,
)
from .returns_io import parse_returns_csv
from .simulate import (
    ReturnPaths,
    SimulationConfig,
    actual_growth_rate,
    compare_strategies,
    realized_sharpe,
    sample_paths,
)

__version__ = "0.1.0"

__all__ = [
    "AutocorrelationSpec",
    "CorrelationKind",
    "FrontierPoint",
    "GrowthQuery",
    "GrowthResult",
    "MarketMoments",
    "Portfolio",
    "PortfolioConstraintSet",
    "ProjectedMoments",
    "ReturnPaths",
    "RgopResult",
    "SimulationConfig",
    "__version__",
    "actual_growth_rate",
    "aggregate_rho",
    "annotate_growth",
    "approx_growth_rate_general",
    "compare_strategies",
    "efficient_frontier",
    "estimate_moments",
    "feasibility_margin",
    "four_asset_moments",
    "industry_moments",
    "modified_covariance",
    "parse_returns_csv",
    "project_moments",
    "random_circulant_spec",
    "realized_sharpe",
    "relative_gap",
    "rgop",
    "sample_paths",
    "worst_case_growth_rate",
]

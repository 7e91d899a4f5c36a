"""Attribute-based construction safety risk modeling and simulation.

Relative risk per attribute and per report, Gaussian KDE with boundary
correction, smoothed-bootstrap generators (univariate and pair-preserving
bivariate), nonparametric copula density, and quantile-based risk ranges and
escalation queries.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .copula import CopulaGrid, empirical_copula_density, kendall_tau, tail_dependence_summary
from .datamodel import (
    AttributeCatalog,
    AttributeRecord,
    ReportMatrix,
    SeverityScale,
    generate_demo_matrix,
    load_demo_catalog,
    parse_catalog,
    parse_report_matrix,
    write_catalog,
    write_report_matrix,
)
from .density import (
    DensityGrid,
    KdeModel,
    Support,
    density_grid,
    kde_pdf,
    kde_pdf_corrected,
    rescale,
    silverman_bandwidth,
)
from .errors import InsufficientSupportError, SafetyRiskError, ValidationError
from .quantiles import (
    EscalationQuery,
    EscalationResult,
    RiskRanges,
    build_ranges,
    classify,
    empirical_quantile,
    escalation_estimate,
    return_period_quantile,
)
from .riskcore import (
    Basis,
    RelativeRiskVector,
    RiskSample,
    attribute_relative_risk,
    attribute_total_risk,
    catalog_relative_risks,
    display_risk,
    escalation_deltas,
    report_risks,
    situation_risk,
)
from .simgen import (
    GeneratorConfig,
    Negatives,
    RiskPairSample,
    rank_transform,
    smoothed_bootstrap_biv,
    smoothed_bootstrap_uni,
)

"""Social Promoter Score of online brands from review streams."""

from .analytics import (
    BrandSeries,
    CorrelationReport,
    DurationRun,
    Month,
    brand_series,
    detect_duration_effects,
    latency_scan,
    month_range,
    pearson,
    sales_proxy_series,
    sps_increment_series,
    sps_r_series,
)
from .ingest import (
    BrandCatalog,
    FormatError,
    IngestAborted,
    ParseError,
    ReviewRecord,
    ValidationError,
    iter_reviews,
    load_brand_catalog,
    parse_review_record,
    resolve_brand,
)
from .network import (
    CapacityError,
    CentralityScore,
    ReviewNetwork,
    ReviewNotFound,
    ReviewRef,
    brand_max_centrality,
    build_network,
    build_networks,
    export_projection,
    normalized_centrality,
    raw_centrality,
)
from .scoring import (
    ConfigurationError,
    PeriodTally,
    ReviewClass,
    ReviewTerm,
    classify_review,
    compute_sps,
    compute_sps_r,
    helpfulness_score,
    loyalty_score,
    scale_rating,
)

__version__ = "0.1.0"

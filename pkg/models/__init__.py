from .errors import *  # noqa: F401,F403
from .records import (  # noqa: F401
    ALLOWED_LIST_SIZES,
    TOOL_BUDGET_CAP,
    Basis,
    BrandVerdict,
    CheckerConfig,
    Classification,
    ConfusionCounts,
    GroundTruth,
    Label,
    NamedBrand,
    NoBrand,
    PipelineConfig,
    Strategy,
    Verdict,
    WebSample,
    validate_sample,
)
from .tools import ImageResult, LogoDetection, SearchResult, VisionDescription  # noqa: F401

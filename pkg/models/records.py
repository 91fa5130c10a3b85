# models/records.py

"""Immutable domain records shared by the condenser, agents, checker and harness."""

import base64
from enum import Enum
from typing import Annotated, List, Literal, Optional, Union
from urllib.parse import urlparse

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from .errors import EmptyIdError, InvalidUrlError


class Label(str, Enum):
    PHISH = "phish"
    BENIGN = "benign"


class GroundTruth(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: Label
    # Accepted aliases for the target brand; the first entry is the canonical name.
    true_brand: List[str] = Field(default_factory=list)

    @field_validator("true_brand", mode="before")
    @classmethod
    def _coerce_brand_list(cls, value):
        if value is None:
            return []
        if isinstance(value, str):
            return [value]
        return value


class WebSample(BaseModel):
    """One captured webpage: URL, raw markup and optional images."""

    model_config = ConfigDict(frozen=True)

    id: str
    url: str
    html: str = ""
    screenshot: Optional[bytes] = None
    logo_crop: Optional[bytes] = None
    label: Optional[GroundTruth] = None

    @field_validator("screenshot", "logo_crop", mode="before")
    @classmethod
    def _decode_base64(cls, value):
        if isinstance(value, str):
            return base64.b64decode(value)
        return value

    @field_serializer("screenshot", "logo_crop", when_used="json")
    def _encode_base64(self, value: Optional[bytes]):
        if value is None:
            return None
        return base64.b64encode(value).decode("ascii")

    @property
    def host(self) -> str:
        return urlparse(self.url).hostname or ""


def validate_sample(raw: dict) -> WebSample:
    """Build a WebSample from an unvalidated record, checking id and URL."""
    sample_id = str(raw.get("id") or "").strip()
    if not sample_id:
        raise EmptyIdError("Sample id is missing or empty.")

    url = raw.get("url")
    if not isinstance(url, str) or not url.strip():
        raise InvalidUrlError(f"Sample {sample_id} has no URL.")
    url = url.strip()
    try:
        parsed = urlparse(url)
        host = parsed.hostname
    except ValueError as e:
        raise InvalidUrlError(f"Unparseable URL for sample {sample_id}: {url!r}") from e
    if not parsed.scheme or not host or " " in url:
        raise InvalidUrlError(f"URL for sample {sample_id} is not absolute: {url!r}")

    return WebSample(
        id=sample_id,
        url=url,
        html=raw.get("html") or "",
        screenshot=raw.get("screenshot"),
        logo_crop=raw.get("logo_crop"),
        label=raw.get("label"),
    )


class NamedBrand(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["named"] = "named"
    name: str

    @field_validator("name")
    @classmethod
    def _trimmed(cls, value: str) -> str:
        value = value.strip()
        if not value:
            raise ValueError("Brand name is empty after trimming.")
        return value


class NoBrand(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["no_brand"] = "no_brand"


Brand = Annotated[Union[NamedBrand, NoBrand], Field(discriminator="kind")]

TOOL_BUDGET_CAP = 5


class BrandVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    brand: Brand
    reason: str = Field(min_length=1)
    rounds_used: int = Field(default=0, ge=0, le=TOOL_BUDGET_CAP)

    @property
    def is_no_brand(self) -> bool:
        return isinstance(self.brand, NoBrand)

    @property
    def brand_name(self) -> Optional[str]:
        return None if self.is_no_brand else self.brand.name


class Verdict(str, Enum):
    PHISHING = "phishing"
    BENIGN = "benign"


class Basis(str, Enum):
    DOMAIN_MATCH = "domain_match"
    NO_BRAND_DEFAULT = "no_brand_default"
    DOMAIN_MISMATCH = "domain_mismatch"


_BENIGN_BASES = {Basis.DOMAIN_MATCH, Basis.NO_BRAND_DEFAULT}


class Classification(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: Verdict
    basis: Basis

    @model_validator(mode="after")
    def _basis_determines_value(self):
        expected = Verdict.BENIGN if self.basis in _BENIGN_BASES else Verdict.PHISHING
        if self.value != expected:
            raise ValueError(f"Basis {self.basis.value} implies {expected.value}, got {self.value.value}.")
        return self

    @classmethod
    def from_basis(cls, basis: Basis) -> "Classification":
        value = Verdict.BENIGN if basis in _BENIGN_BASES else Verdict.PHISHING
        return cls(value=value, basis=basis)


class ConfusionCounts(BaseModel):
    model_config = ConfigDict(frozen=True)

    tp: int = Field(default=0, ge=0)
    fp: int = Field(default=0, ge=0)
    tn: int = Field(default=0, ge=0)
    fn: int = Field(default=0, ge=0)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


ALLOWED_LIST_SIZES = (1, 5, 10)


class CheckerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    list_size: int = 10
    redirection_check: bool = False

    @field_validator("list_size")
    @classmethod
    def _allowed_size(cls, value: int) -> int:
        if value not in ALLOWED_LIST_SIZES:
            raise ValueError(f"list_size must be one of {ALLOWED_LIST_SIZES}, got {value}.")
        return value

    @property
    def label(self) -> str:
        name = "single domain match" if self.list_size == 1 else f"domain list match({self.list_size})"
        return f"{name} w/ redirection check" if self.redirection_check else name


class Strategy(str, Enum):
    AGENT = "agent"
    ONE_SHOT = "one_shot"


class PipelineConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    strategy: Strategy = Strategy.AGENT
    agent_budget: int = Field(default=TOOL_BUDGET_CAP, ge=1, le=TOOL_BUDGET_CAP)
    condenser_budget: int = Field(default=3000, ge=64)
    use_logo_detector: bool = True
    use_vision: bool = True
    checker: CheckerConfig = Field(default_factory=CheckerConfig)

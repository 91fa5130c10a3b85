# models/tools.py

"""Payload shapes returned by the remote tools."""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SearchResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    title: str = ""
    snippet: str = ""
    link: str
    display_link: str
    rank: int = Field(ge=1)


class ImageResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    thumbnail_link: str
    source_link: str = ""
    title: str = ""
    snippet: str = ""
    context_link: str = ""
    rank: int = Field(ge=1)


class LogoDetection(BaseModel):
    model_config = ConfigDict(frozen=True)

    brand_guess: Optional[str] = None
    confidence: float = Field(default=0.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _no_guess_no_confidence(self):
        if self.brand_guess is None and self.confidence != 0.0:
            raise ValueError("Confidence must be 0 when no brand was detected.")
        return self

    def render(self) -> str:
        if self.brand_guess is None:
            return "no logo detected"
        return f"{self.brand_guess} (confidence {self.confidence:.2f})"


class VisionDescription(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str = ""

# services/logo_similarity.py

"""Visual similarity between the page's cropped logo and image-search thumbnails."""

import asyncio
import io
import logging
from typing import Awaitable, Callable, List, Optional, Protocol, Tuple

import imagehash
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel, ConfigDict, Field

from models.errors import CassetteMissError, GEPAgentError, UndecodableImageError
from models.tools import ImageResult

DEFAULT_THRESHOLD = 0.8
HASH_SIZE = 8
HASH_BITS = HASH_SIZE * HASH_SIZE

ThumbnailFetcher = Callable[[str], Awaitable[Optional[bytes]]]


class SimilarityScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0.0, le=1.0)
    similar: bool


class SimilarityBackend(Protocol):
    def similarity(self, a: bytes, b: bytes) -> float:
        ...


def decode_image(data: bytes) -> Image.Image:
    try:
        image = Image.open(io.BytesIO(data))
        image.load()
        return image
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise UndecodableImageError(f"Image could not be decoded: {e}") from e


class DHashBackend:
    """64-bit difference hash; images are reduced to grayscale 9x8 before hashing."""

    def similarity(self, a: bytes, b: bytes) -> float:
        hash_a = imagehash.dhash(decode_image(a), hash_size=HASH_SIZE)
        hash_b = imagehash.dhash(decode_image(b), hash_size=HASH_SIZE)
        return 1.0 - float(hash_a - hash_b) / HASH_BITS


class LogoSimilarity:
    def __init__(self, threshold: float = DEFAULT_THRESHOLD, backend: Optional[SimilarityBackend] = None, max_in_flight: int = 4):
        self.threshold = threshold
        self.backend = backend or DHashBackend()
        self.max_in_flight = max_in_flight
        self.logger = logging.getLogger(self.__class__.__name__)

    def score(self, query_logo: bytes, candidate: bytes) -> SimilarityScore:
        value = min(max(self.backend.similarity(query_logo, candidate), 0.0), 1.0)
        return SimilarityScore(value=value, similar=value >= self.threshold)

    async def annotate_image_results(
        self,
        query_logo: Optional[bytes],
        results: List[ImageResult],
        fetch: ThumbnailFetcher,
    ) -> List[Tuple[ImageResult, Optional[SimilarityScore]]]:
        """Pair each result with its thumbnail's score; per-item failures leave the score absent."""
        if not query_logo:
            return [(result, None) for result in results]

        semaphore = asyncio.Semaphore(self.max_in_flight)

        async def _score(result: ImageResult) -> Optional[SimilarityScore]:
            async with semaphore:
                try:
                    thumbnail = await fetch(result.thumbnail_link)
                except CassetteMissError:
                    raise
                except GEPAgentError as e:
                    self.logger.warning(f"Thumbnail fetch failed for {result.thumbnail_link}: {e}")
                    return None
            if thumbnail is None:
                self.logger.warning(f"Thumbnail unavailable: {result.thumbnail_link}")
                return None
            try:
                return self.score(query_logo, thumbnail)
            except UndecodableImageError as e:
                self.logger.warning(f"Thumbnail not scorable ({result.thumbnail_link}): {e}")
                return None

        scores = await asyncio.gather(*(_score(result) for result in results))
        return list(zip(results, scores))

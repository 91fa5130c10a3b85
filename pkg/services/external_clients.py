# services/external_clients.py

"""Web search, image search, logo detection and vision description, each live or cassette-backed."""

import asyncio
import base64
import logging
import os
from enum import Enum
from typing import Any, Awaitable, Callable, Dict, List, Optional

import httpx
from dotenv import load_dotenv
from openai import APIConnectionError, APIError, AsyncOpenAI, InternalServerError, RateLimitError
from pydantic import BaseModel, ConfigDict
from tenacity import AsyncRetrying, RetryCallState, retry_if_exception, stop_after_attempt, wait_exponential

from models.errors import ConfigurationError, PreconditionError, ToolUnavailableError
from models.tools import ImageResult, LogoDetection, SearchResult, VisionDescription
from services.cassette import Cassette, content_hash, normalize_query

load_dotenv()

MAX_RESULTS = 10

VISION_PROMPT = (
    "You are given a screenshot of a webpage and, when available, a logo cropped from it. "
    "Identify the brand the page represents, transcribe any visible brand names or slogans, "
    "and describe the purpose of the page (e.g. login form). "
    "If no brand can be identified, reply exactly 'no identifiable brand'."
)


class Mode(str, Enum):
    LIVE = "live"
    REPLAY = "replay"
    RECORD = "record"


class RetryPolicy(BaseModel):
    model_config = ConfigDict(frozen=True)

    retries: int = 2
    backoff: float = 0.5
    timeout: float = 15.0


class Credentials(BaseModel):
    model_config = ConfigDict(frozen=True)

    search_api_key: Optional[str] = None
    search_engine_id: Optional[str] = None
    vision_api_key: Optional[str] = None
    logo_api_key: Optional[str] = None

    @classmethod
    def from_env(cls) -> "Credentials":
        return cls(
            search_api_key=os.getenv("SEARCH_API_KEY"),
            search_engine_id=os.getenv("SEARCH_ENGINE_ID"),
            vision_api_key=os.getenv("VISION_API_KEY"),
            logo_api_key=os.getenv("LOGO_API_KEY"),
        )

    def missing(self) -> List[str]:
        names = {
            "SEARCH_API_KEY": self.search_api_key,
            "SEARCH_ENGINE_ID": self.search_engine_id,
            "VISION_API_KEY": self.vision_api_key,
            "LOGO_API_KEY": self.logo_api_key,
        }
        return [name for name, value in names.items() if not value]


def _image_mime(data: bytes) -> str:
    if data[:3] == b"\xff\xd8\xff":
        return "image/jpeg"
    if data[:4] == b"GIF8":
        return "image/gif"
    if data[:4] == b"RIFF" and data[8:12] == b"WEBP":
        return "image/webp"
    return "image/png"


def _data_uri(data: bytes) -> str:
    return f"data:{_image_mime(data)};base64,{base64.b64encode(data).decode('ascii')}"


TRANSIENT_API_ERRORS = (APIConnectionError, RateLimitError, InternalServerError)


def _is_transient(error: BaseException) -> bool:
    """5xx, 429, transport failures and timeouts are worth another attempt; anything else fails at once."""
    if isinstance(error, httpx.HTTPStatusError):
        status = error.response.status_code
        return status >= 500 or status == 429
    return isinstance(error, (httpx.TransportError, asyncio.TimeoutError, *TRANSIENT_API_ERRORS))


async def with_retries(tool: str, call: Callable[[], Awaitable[Any]], policy: RetryPolicy, logger: logging.Logger) -> Any:
    """Run `call` under the per-call timeout, retrying transient failures with exponential backoff.

    Every HTTP or API failure ends as ToolUnavailableError, retried or not.
    """

    def _log_retry(state: RetryCallState):
        error = state.outcome.exception() if state.outcome else None
        logger.warning(f"{tool} failed ({error!r}); retry {state.attempt_number}/{policy.retries}")

    try:
        async for attempt in AsyncRetrying(
            stop=stop_after_attempt(policy.retries + 1),
            wait=wait_exponential(multiplier=policy.backoff),
            retry=retry_if_exception(_is_transient),
            before_sleep=_log_retry,
            reraise=True,
        ):
            with attempt:
                return await asyncio.wait_for(call(), timeout=policy.timeout)
    except httpx.HTTPStatusError as e:
        status = e.response.status_code
        if not _is_transient(e):
            raise ToolUnavailableError(f"{tool} rejected the request with HTTP {status}") from e
        logger.error(f"{tool} unavailable after {policy.retries + 1} attempts: HTTP {status}")
        raise ToolUnavailableError(f"{tool} unavailable: HTTP {status}") from e
    except (httpx.HTTPError, httpx.InvalidURL, asyncio.TimeoutError, APIError) as e:
        logger.error(f"{tool} unavailable: {e!r}")
        raise ToolUnavailableError(f"{tool} unavailable: {e!r}") from e


class GoogleSearchBackend:
    """Custom Search JSON API; `searchType=image` switches to image search."""

    API = "https://www.googleapis.com/customsearch/v1"

    def __init__(self, http: httpx.AsyncClient, api_key: str, engine_id: str):
        self.http = http
        self.api_key = api_key
        self.engine_id = engine_id

    async def _items(self, query: str, count: int, **extra) -> List[Dict[str, Any]]:
        params = {"key": self.api_key, "cx": self.engine_id, "q": query, "num": count, **extra}
        response = await self.http.get(self.API, params=params)
        response.raise_for_status()
        return response.json().get("items", []) or []

    async def web_search(self, query: str, count: int) -> List[Dict[str, Any]]:
        items = await self._items(query, count)
        return [
            {
                "title": item.get("title", ""),
                "snippet": item.get("snippet", ""),
                "link": item.get("link", ""),
                "display_link": item.get("displayLink") or item.get("link", ""),
            }
            for item in items
            if item.get("link")
        ]

    async def image_search(self, query: str, count: int) -> List[Dict[str, Any]]:
        items = await self._items(query, count, searchType="image")
        results = []
        for item in items:
            image = item.get("image") or {}
            if not image.get("thumbnailLink"):
                continue
            results.append({
                "thumbnail_link": image["thumbnailLink"],
                "source_link": item.get("link", ""),
                "title": item.get("title", ""),
                "snippet": item.get("snippet", ""),
                "context_link": image.get("contextLink", ""),
            })
        return results


class GoogleLogoBackend:
    """Cloud Vision LOGO_DETECTION."""

    API = "https://vision.googleapis.com/v1/images:annotate"

    def __init__(self, http: httpx.AsyncClient, api_key: str):
        self.http = http
        self.api_key = api_key

    async def detect_logo(self, image: bytes) -> Dict[str, Any]:
        body = {
            "requests": [{
                "image": {"content": base64.b64encode(image).decode("ascii")},
                "features": [{"type": "LOGO_DETECTION", "maxResults": 1}],
            }]
        }
        response = await self.http.post(self.API, params={"key": self.api_key}, json=body)
        response.raise_for_status()
        annotations = (response.json().get("responses") or [{}])[0].get("logoAnnotations") or []
        if not annotations:
            return {"brand_guess": None, "confidence": 0.0}
        top = annotations[0]
        return {"brand_guess": top.get("description"), "confidence": float(top.get("score", 0.0))}


class OpenAIVisionBackend:
    def __init__(self, api_key: str, model: str = "gpt-4o"):
        self.client = AsyncOpenAI(api_key=api_key)
        self.model = model

    async def describe(self, screenshot: bytes, logo: Optional[bytes]) -> Dict[str, Any]:
        content = [{"type": "text", "text": VISION_PROMPT}, {"type": "image_url", "image_url": {"url": _data_uri(screenshot)}}]
        if logo:
            content.append({"type": "image_url", "image_url": {"url": _data_uri(logo)}})
        response = await self.client.chat.completions.create(
            model=self.model,
            messages=[{"role": "user", "content": content}],
            max_tokens=300,
            temperature=0,
        )
        return {"text": (response.choices[0].message.content or "").strip()}


class HttpFetchBackend:
    def __init__(self, http: httpx.AsyncClient):
        self.http = http

    async def fetch(self, url: str) -> Dict[str, Any]:
        response = await self.http.get(url)
        if response.status_code >= 500:
            response.raise_for_status()
        return {"status": response.status_code, "content": response.content if response.status_code == 200 else None}

    async def resolve_redirect(self, url: str) -> Dict[str, Any]:
        response = await self.http.get(url, follow_redirects=True)
        return {"final_url": str(response.url)}


class ExternalClients:
    """Uniform entry point to the remote tools; `mode` decides whether calls go live, replay or record."""

    def __init__(
        self,
        mode: Mode,
        cassette: Optional[Cassette] = None,
        search: Optional[GoogleSearchBackend] = None,
        logo: Optional[GoogleLogoBackend] = None,
        vision: Optional[OpenAIVisionBackend] = None,
        fetcher: Optional[HttpFetchBackend] = None,
        retry: RetryPolicy = RetryPolicy(),
    ):
        if mode in (Mode.REPLAY, Mode.RECORD) and cassette is None:
            raise ConfigurationError(f"{mode.value} mode requires a cassette.")
        self.mode = mode
        self.cassette = cassette
        self.search = search
        self.logo = logo
        self.vision = vision
        self.fetcher = fetcher
        self.retry = retry
        self.logger = logging.getLogger(self.__class__.__name__)

    @classmethod
    def create(
        cls,
        mode: Mode,
        cassette: Optional[Cassette] = None,
        credentials: Optional[Credentials] = None,
        http: Optional[httpx.AsyncClient] = None,
        retry: RetryPolicy = RetryPolicy(),
    ) -> "ExternalClients":
        if mode is Mode.REPLAY:
            return cls(mode, cassette=cassette, retry=retry)
        credentials = credentials or Credentials.from_env()
        missing = credentials.missing()
        if missing:
            raise ConfigurationError(f"{mode.value} mode requires credentials: {', '.join(missing)}")
        http = http or httpx.AsyncClient(timeout=retry.timeout)
        return cls(
            mode,
            cassette=cassette,
            search=GoogleSearchBackend(http, credentials.search_api_key, credentials.search_engine_id),
            logo=GoogleLogoBackend(http, credentials.logo_api_key),
            vision=OpenAIVisionBackend(credentials.vision_api_key),
            fetcher=HttpFetchBackend(http),
            retry=retry,
        )

    async def _invoke(self, tool: str, key: str, live_call: Callable[[], Awaitable[Any]]) -> Any:
        if self.mode is Mode.REPLAY:
            return self.cassette.lookup(tool, key)
        response = await with_retries(tool, live_call, self.retry, self.logger)
        if self.mode is Mode.RECORD:
            await self.cassette.record(tool, key, response)
        return response

    @staticmethod
    def _check_query(query: str, count: int) -> str:
        if not query or not query.strip():
            raise PreconditionError("Search query must be non-empty.")
        if not 1 <= count <= MAX_RESULTS:
            raise PreconditionError(f"Result count must be within 1..{MAX_RESULTS}, got {count}.")
        return normalize_query(query)

    async def web_search(self, query: str, count: int = MAX_RESULTS) -> List[SearchResult]:
        key = self._check_query(query, count)
        # always fetch a full page so one cassette entry serves every count
        items = await self._invoke("web_search", key, lambda: self.search.web_search(key, MAX_RESULTS))
        return [SearchResult(rank=rank, **item) for rank, item in enumerate(items[:count], start=1)]

    async def image_search(self, query: str, count: int = MAX_RESULTS) -> List[ImageResult]:
        key = self._check_query(query, count)
        items = await self._invoke("image_search", key, lambda: self.search.image_search(key, MAX_RESULTS))
        return [ImageResult(rank=rank, **item) for rank, item in enumerate(items[:count], start=1)]

    async def detect_logo(self, image: bytes) -> LogoDetection:
        if not image:
            raise PreconditionError("Logo image must be non-empty.")
        payload = await self._invoke("detect_logo", content_hash(image), lambda: self.logo.detect_logo(image))
        return LogoDetection(**payload)

    async def describe_screenshot(self, screenshot: bytes, logo: Optional[bytes] = None) -> VisionDescription:
        if not screenshot:
            raise PreconditionError("Screenshot must be non-empty.")
        key = f"{content_hash(screenshot)}:{content_hash(logo) if logo else '-'}"
        payload = await self._invoke("describe", key, lambda: self.vision.describe(screenshot, logo))
        return VisionDescription(**payload)

    async def fetch_thumbnail(self, url: str) -> Optional[bytes]:
        """Thumbnail bytes, or None when the server answered with a non-200 status."""
        if self.mode is Mode.REPLAY:
            payload = self.cassette.lookup("fetch_thumbnail", url)
            if payload.get("blob") is None:
                return None
            return await self.cassette.read_blob(payload["blob"])

        payload = await with_retries("fetch_thumbnail", lambda: self.fetcher.fetch(url), self.retry, self.logger)
        if self.mode is Mode.RECORD:
            digest = await self.cassette.write_blob(payload["content"]) if payload["content"] is not None else None
            await self.cassette.record("fetch_thumbnail", url, {"status": payload["status"], "blob": digest})
        return payload["content"]

    async def resolve_redirect(self, url: str) -> str:
        payload = await self._invoke("resolve_redirect", url, lambda: self.fetcher.resolve_redirect(url))
        return payload["final_url"]

    def status(self) -> Dict[str, Any]:
        return {"mode": self.mode.value, "cassette": self.cassette.status() if self.cassette else None}

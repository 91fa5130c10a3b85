# services/domain_tools.py

"""URL parsing, registrable-domain extraction and the top/second-level domain matching rule."""

import ipaddress
import logging
from functools import lru_cache
from pathlib import Path
from typing import Iterable, List, Optional
from urllib.parse import urlparse

import idna
import tldextract
from pydantic import BaseModel, ConfigDict, Field, field_validator

from models.errors import InvalidUrlError, IpHostError, PreconditionError, UnknownSuffixError
from models.records import ALLOWED_LIST_SIZES
from models.tools import SearchResult

logger = logging.getLogger(__name__)

SNAPSHOT_PATH = Path(__file__).parent / "data" / "public_suffix_list.dat"


class RegistrableDomain(BaseModel):
    model_config = ConfigDict(frozen=True)

    sld: str
    suffix: str
    # False when no public suffix matched and the last label stands in for one
    suffix_known: bool = True

    @field_validator("sld")
    @classmethod
    def _single_label(cls, value: str) -> str:
        value = value.lower()
        if not value or "." in value:
            raise ValueError(f"Second-level label must be a single non-empty label, got {value!r}.")
        return value

    @field_validator("suffix")
    @classmethod
    def _lowercase(cls, value: str) -> str:
        return value.lower()

    def __str__(self) -> str:
        return f"{self.sld}.{self.suffix}"


class DomainList(BaseModel):
    model_config = ConfigDict(frozen=True)

    entries: List[RegistrableDomain] = Field(default_factory=list)
    limit: int = 10

    def __len__(self) -> int:
        return len(self.entries)

    def contains(self, domain: RegistrableDomain) -> bool:
        return any(domains_match(entry, domain) for entry in self.entries)


class SuffixSnapshot:
    """Public-suffix lookups against the vendored snapshot file; never fetched over the network."""

    def __init__(self, path: Path = SNAPSHOT_PATH):
        self.path = Path(path)
        if not self.path.is_file():
            raise FileNotFoundError(f"Public-suffix snapshot not found: {self.path}")
        self._extract = tldextract.TLDExtract(
            cache_dir=None,
            suffix_list_urls=(self.path.resolve().as_uri(),),
            fallback_to_snapshot=False,
            include_psl_private_domains=False,
        )

    def split(self, host: str):
        """Return (labels before the suffix, suffix); suffix is '' when nothing matched."""
        result = self._extract(host)
        head = ".".join(part for part in (result.subdomain, result.domain) if part)
        return head, result.suffix


@lru_cache(maxsize=1)
def default_snapshot() -> SuffixSnapshot:
    return SuffixSnapshot()


def _host_of(url: str) -> str:
    candidate = url.strip()
    if "://" not in candidate:
        # search APIs report display links as bare hosts
        candidate = f"http://{candidate}"
    try:
        host = urlparse(candidate).hostname
    except ValueError as e:
        raise InvalidUrlError(f"Unparseable URL: {url!r}") from e
    if not host:
        raise InvalidUrlError(f"URL has no host: {url!r}")
    return host.rstrip(".").lower()


def _is_ip(host: str) -> bool:
    try:
        ipaddress.ip_address(host.strip("[]"))
        return True
    except ValueError:
        return False


def registrable_domain(url: str, snapshot: Optional[SuffixSnapshot] = None) -> RegistrableDomain:
    """Strip scheme, port, path and a leading 'www.', then split into sld + longest public suffix."""
    host = _host_of(url)
    if _is_ip(host):
        raise IpHostError(host)
    if not host.isascii():
        # UTS 46 folds width and case variants before punycode
        try:
            host = idna.encode(host, uts46=True).decode("ascii")
        except idna.IDNAError as e:
            raise InvalidUrlError(f"Host is not a valid DNS name: {host!r}") from e
    if host.startswith("www."):
        host = host[4:]

    head, suffix = (snapshot or default_snapshot()).split(host)
    if not suffix:
        labels = host.split(".")
        fallback = None
        if len(labels) >= 2 and labels[-2]:
            fallback = RegistrableDomain(sld=labels[-2], suffix=labels[-1], suffix_known=False)
        raise UnknownSuffixError(host, fallback)
    if not head:
        raise InvalidUrlError(f"Host is a bare public suffix: {host!r}")
    return RegistrableDomain(sld=head.split(".")[-1], suffix=suffix)


def domains_match(a: RegistrableDomain, b: RegistrableDomain) -> bool:
    return a.sld == b.sld and a.suffix == b.suffix


def build_domain_list(results: Iterable[SearchResult], limit: int, snapshot: Optional[SuffixSnapshot] = None) -> DomainList:
    """Registrable domains of the results' display links, rank-ordered, deduplicated, truncated to `limit`."""
    if limit not in ALLOWED_LIST_SIZES:
        raise PreconditionError(f"Domain list size must be one of {ALLOWED_LIST_SIZES}, got {limit}.")

    entries: List[RegistrableDomain] = []
    seen = set()
    for result in sorted(results, key=lambda r: r.rank):
        if len(entries) >= limit:
            break
        try:
            domain = registrable_domain(result.display_link or result.link, snapshot)
        except UnknownSuffixError as e:
            if e.fallback is None:
                continue
            domain = e.fallback
        except PreconditionError as e:
            logger.debug(f"Skipping search result {result.rank}: {e}")
            continue
        key = (domain.sld, domain.suffix)
        if key in seen:
            continue
        seen.add(key)
        entries.append(domain)
    return DomainList(entries=entries, limit=limit)

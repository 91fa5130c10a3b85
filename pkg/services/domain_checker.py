# services/domain_checker.py

"""Classifies a page by matching its registrable domain against search-derived official domains of its brand."""

import logging
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from models.errors import IpHostError, SearchUnavailableError, ToolUnavailableError, UnknownSuffixError
from models.records import Basis, BrandVerdict, CheckerConfig, Classification, WebSample
from services.domain_tools import RegistrableDomain, SuffixSnapshot, build_domain_list, registrable_domain
from services.external_clients import MAX_RESULTS, ExternalClients


class CheckOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    classification: Classification
    domains_checked: List[str] = Field(default_factory=list)
    sample_domain: Optional[str] = None
    final_url: Optional[str] = None


def brand_query(brand_name: str) -> str:
    """The brand exactly as recognized, in double quotes, with no extra keywords."""
    return f'"{brand_name}"'


class DomainChecker:
    def __init__(self, clients: ExternalClients, config: CheckerConfig = CheckerConfig(), snapshot: Optional[SuffixSnapshot] = None):
        self.clients = clients
        self.config = config
        self.snapshot = snapshot
        self.logger = logging.getLogger(self.__class__.__name__)

    def _domain_of(self, url: str) -> Optional[RegistrableDomain]:
        try:
            return registrable_domain(url, self.snapshot)
        except IpHostError:
            # an IP host can never match an official domain
            return None
        except UnknownSuffixError as e:
            return e.fallback

    async def check(self, sample: WebSample, verdict: BrandVerdict) -> CheckOutcome:
        if verdict.is_no_brand:
            return CheckOutcome(classification=Classification.from_basis(Basis.NO_BRAND_DEFAULT))

        query = brand_query(verdict.brand_name)
        try:
            # a full page, so duplicates do not shorten the list below list_size
            results = await self.clients.web_search(query, MAX_RESULTS)
        except ToolUnavailableError as e:
            raise SearchUnavailableError(f"Domain check search failed for {query}: {e}") from e
        official = build_domain_list(results, self.config.list_size, self.snapshot)
        checked = [str(domain) for domain in official.entries]

        domain = self._domain_of(sample.url)
        if domain is not None and official.contains(domain):
            self.logger.info(f"Sample {sample.id}: {domain} is an official domain of {verdict.brand_name}")
            return CheckOutcome(classification=Classification.from_basis(Basis.DOMAIN_MATCH), domains_checked=checked, sample_domain=str(domain))

        final_url = None
        if self.config.redirection_check:
            final_url, domain = await self._follow_redirects(sample, domain)
            if domain is not None and official.contains(domain):
                self.logger.info(f"Sample {sample.id}: redirects to official domain {domain}")
                return CheckOutcome(
                    classification=Classification.from_basis(Basis.DOMAIN_MATCH),
                    domains_checked=checked,
                    sample_domain=str(domain),
                    final_url=final_url,
                )

        self.logger.info(f"Sample {sample.id}: {domain or sample.host} not among {len(checked)} domains of {verdict.brand_name}")
        return CheckOutcome(
            classification=Classification.from_basis(Basis.DOMAIN_MISMATCH),
            domains_checked=checked,
            sample_domain=str(domain) if domain is not None else None,
            final_url=final_url,
        )

    async def _follow_redirects(self, sample: WebSample, domain: Optional[RegistrableDomain]):
        try:
            final_url = await self.clients.resolve_redirect(sample.url)
        except ToolUnavailableError as e:
            self.logger.warning(f"Redirection check failed for {sample.url}: {e}")
            return None, domain
        return final_url, self._domain_of(final_url)


async def classify(sample: WebSample, verdict: BrandVerdict, cfg: CheckerConfig, search: ExternalClients) -> Classification:
    outcome = await DomainChecker(search, cfg).check(sample, verdict)
    return outcome.classification

import httpx
import pytest

from conftest import CORPUS, search_items, write_cassette
from models.errors import SearchUnavailableError, ToolUnavailableError
from models.records import Basis, BrandVerdict, CheckerConfig, NamedBrand, NoBrand, Verdict, WebSample
from services.cassette import Cassette
from services.corpus_loader import load_sample_dir
from services.domain_checker import DomainChecker, brand_query, classify
from services.external_clients import Credentials, ExternalClients, Mode, RetryPolicy

CREDS = Credentials(search_api_key="k", search_engine_id="cx", vision_api_key="v", logo_api_key="l")


def named(brand):
    return BrandVerdict(brand=NamedBrand(name=brand), reason="test")


class CountingClients:
    """Wraps real clients and counts the remote calls made through it."""

    def __init__(self, inner, fail_search=False, fail_redirect=False):
        self.inner = inner
        self.fail_search = fail_search
        self.fail_redirect = fail_redirect
        self.searches = []
        self.redirects = []

    async def web_search(self, query, count):
        self.searches.append((query, count))
        if self.fail_search:
            raise ToolUnavailableError("search quota exceeded")
        return await self.inner.web_search(query, count)

    async def resolve_redirect(self, url):
        self.redirects.append(url)
        if self.fail_redirect:
            raise ToolUnavailableError("connection reset")
        return await self.inner.resolve_redirect(url)


@pytest.fixture
def counting(replay_clients):
    return CountingClients(replay_clients)


def test_brand_query_is_quoted_verbatim():
    assert brand_query("The Blue Bakery") == '"The Blue Bakery"'


async def test_no_brand_defaults_to_benign_without_searching(counting):
    sample = WebSample(id="x", url="https://intranet-portal.example.org/")
    outcome = await DomainChecker(counting).check(sample, BrandVerdict(brand=NoBrand(), reason="none"))
    assert outcome.classification.value is Verdict.BENIGN
    assert outcome.classification.basis is Basis.NO_BRAND_DEFAULT
    assert counting.searches == []


async def test_official_domain_matches(counting):
    sample = await load_sample_dir(CORPUS / "b01")
    outcome = await DomainChecker(counting).check(sample, named("PayPal"))
    assert outcome.classification.basis is Basis.DOMAIN_MATCH
    assert outcome.sample_domain == "paypal.com"
    assert counting.searches == [('"PayPal"', 10)]


async def test_lookalike_domain_mismatches(counting):
    sample = await load_sample_dir(CORPUS / "p01")
    outcome = await DomainChecker(counting).check(sample, named("PayPal"))
    assert outcome.classification.value is Verdict.PHISHING
    assert outcome.classification.basis is Basis.DOMAIN_MISMATCH
    assert outcome.sample_domain == "paypa1-secure-login.com"
    assert "paypal.com" in outcome.domains_checked
    assert counting.redirects == []


async def test_ip_host_is_phishing(counting):
    sample = await load_sample_dir(CORPUS / "p06")
    outcome = await DomainChecker(counting).check(sample, named("Chase"))
    assert outcome.classification.basis is Basis.DOMAIN_MISMATCH
    assert outcome.sample_domain is None


@pytest.mark.parametrize("sample_id,brand,matches", [
    ("b02", "Microsoft", {1: False, 5: True, 10: True}),
    ("b04", "DHL", {1: False, 5: True, 10: True}),
    ("b07", "Acme Travel", {1: False, 5: False, 10: True}),
    ("b05", "BBC", {1: True, 5: True, 10: True}),
    ("p03", "Netflix", {1: False, 5: False, 10: False}),
])
async def test_list_size_decides_rank_reach(replay_clients, sample_id, brand, matches):
    sample = await load_sample_dir(CORPUS / sample_id)
    for size, expected in matches.items():
        outcome = await DomainChecker(replay_clients, CheckerConfig(list_size=size)).check(sample, named(brand))
        assert (outcome.classification.basis is Basis.DOMAIN_MATCH) is expected
        assert len(outcome.domains_checked) <= size


async def test_redirect_to_official_domain_matches(counting):
    sample = await load_sample_dir(CORPUS / "b10")
    outcome = await DomainChecker(counting, CheckerConfig(redirection_check=True)).check(sample, named("Emburse"))
    assert outcome.classification.basis is Basis.DOMAIN_MATCH
    assert outcome.final_url == "https://www.emburse.com/products/chrome-river"
    assert outcome.sample_domain == "emburse.com"
    assert len(counting.searches) == 1
    assert counting.redirects == [sample.url]


async def test_without_redirect_check_the_same_page_mismatches(counting):
    sample = await load_sample_dir(CORPUS / "b10")
    outcome = await DomainChecker(counting).check(sample, named("Emburse"))
    assert outcome.classification.basis is Basis.DOMAIN_MISMATCH
    assert counting.redirects == []


async def test_redirect_not_followed_after_direct_match(counting):
    sample = await load_sample_dir(CORPUS / "b01")
    await DomainChecker(counting, CheckerConfig(redirection_check=True)).check(sample, named("PayPal"))
    assert counting.redirects == []


async def test_redirect_failure_keeps_the_mismatch(replay_clients):
    clients = CountingClients(replay_clients, fail_redirect=True)
    sample = await load_sample_dir(CORPUS / "b10")
    outcome = await DomainChecker(clients, CheckerConfig(redirection_check=True)).check(sample, named("Emburse"))
    assert outcome.classification.basis is Basis.DOMAIN_MISMATCH
    assert outcome.final_url is None
    assert outcome.sample_domain == "chromeriver.com"



async def test_redirect_loop_ends_as_mismatch():
    def handler(request):
        if request.url.host == "www.googleapis.com":
            return httpx.Response(200, json={"items": [{"title": "Acme", "link": "https://www.acme.com/", "displayLink": "www.acme.com"}]})
        return httpx.Response(302, headers={"Location": str(request.url)})

    http = httpx.AsyncClient(transport=httpx.MockTransport(handler))
    clients = ExternalClients.create(Mode.LIVE, credentials=CREDS, http=http, retry=RetryPolicy(retries=0, backoff=0.0))
    sample = WebSample(id="loop", url="https://acme-account-verify.net/login")
    outcome = await DomainChecker(clients, CheckerConfig(redirection_check=True)).check(sample, named("Acme"))
    assert outcome.classification.value is Verdict.PHISHING
    assert outcome.classification.basis is Basis.DOMAIN_MISMATCH
    assert outcome.domains_checked == ["acme.com"]
    assert outcome.final_url is None

async def test_search_failure_is_surfaced(replay_clients):
    clients = CountingClients(replay_clients, fail_search=True)
    sample = await load_sample_dir(CORPUS / "p01")
    with pytest.raises(SearchUnavailableError):
        await DomainChecker(clients).check(sample, named("PayPal"))


async def test_unknown_suffix_uses_last_label_fallback(tmp_path):
    path = write_cassette(tmp_path / "c.jsonl", [("web_search", '"Corp"', search_items("portal.corp.internal"))])
    clients = ExternalClients.create(Mode.REPLAY, Cassette.load(path))
    sample = WebSample(id="i", url="https://sso.corp.internal/login")
    outcome = await DomainChecker(clients).check(sample, named("Corp"))
    assert outcome.classification.basis is Basis.DOMAIN_MATCH


async def test_empty_search_results_mismatch(tmp_path):
    path = write_cassette(tmp_path / "c.jsonl", [("web_search", '"Obscure Co"', [])])
    clients = ExternalClients.create(Mode.REPLAY, Cassette.load(path))
    sample = WebSample(id="o", url="https://obscure.com/")
    outcome = await DomainChecker(clients).check(sample, named("Obscure Co"))
    assert outcome.classification.basis is Basis.DOMAIN_MISMATCH
    assert outcome.domains_checked == []


async def test_classify_returns_classification(replay_clients):
    sample = await load_sample_dir(CORPUS / "b06")
    classification = await classify(sample, named("GitHub"), CheckerConfig(), replay_clients)
    assert classification.value is Verdict.BENIGN


async def test_duplicate_results_do_not_shorten_the_list(counting):
    sample = await load_sample_dir(CORPUS / "b02")
    outcome = await DomainChecker(counting, CheckerConfig(list_size=5)).check(sample, named("Microsoft"))
    assert outcome.domains_checked == ["microsoft.com", "office.com", "microsoftonline.com", "wikipedia.org", "twitter.com"]
    assert counting.searches == [('"Microsoft"', 10)]

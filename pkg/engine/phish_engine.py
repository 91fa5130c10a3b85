# engine/phish_engine.py

"""The core engine that condenses a page's evidence, runs brand recognition, and hands the verdict to the domain checker."""

from typing import Dict, List, Optional, Protocol, Tuple
from datetime import datetime
import logging

from pydantic import BaseModel, ConfigDict, Field

from agents.base_agent import AgentRun
from agents.brand_agent import BrandAgent
from agents.model_gateway import ModelGateway, OpenAIGateway, ScenarioLibrary, ScenarioRecorder, SharedGateway
from agents.one_shot_agent import OneShotAgent
from agents.prompts import PromptContext, build_one_shot_prompt, build_prompt
from agents.tool_registry import ToolRegistry
from agents.transcript import AgentTranscript
from config.settings import RunConfig
from models.errors import ConfigurationError
from models.records import BrandVerdict, CheckerConfig, Classification, PipelineConfig, Strategy, WebSample
from models.tools import LogoDetection, VisionDescription
from services.cassette import Cassette
from services.domain_checker import CheckOutcome, DomainChecker
from services.external_clients import Credentials, ExternalClients, Mode
from services.html_condenser import CondensedPage, condense
from services.logo_similarity import LogoSimilarity


class GatewayProvider(Protocol):
    def gateway_for(self, sample_id: str) -> ModelGateway:
        ...


class Evidence(BaseModel):
    """Everything the recognizer sees about a page before any tool call."""

    model_config = ConfigDict(frozen=True)

    page: CondensedPage
    detection: Optional[LogoDetection] = None
    vision: Optional[VisionDescription] = None


class AnalysisResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    sample_id: str
    url: str
    verdict: BrandVerdict
    classification: Classification
    domains_checked: List[str] = Field(default_factory=list)
    final_url: Optional[str] = None
    transcript: AgentTranscript
    ablation: Dict[str, Classification] = Field(default_factory=dict)
    wall_time: float = 0.0

    def summary(self) -> Dict[str, object]:
        """The JSON shape printed by `analyze` and returned by POST /analyze."""
        return {
            "sample_id": self.sample_id,
            "classification": self.classification.value.value,
            "basis": self.classification.basis.value,
            "brand": self.verdict.brand_name,
            "reason": self.verdict.reason,
            "rounds_used": self.verdict.rounds_used,
            "domains_checked": list(self.domains_checked),
        }


# Checker configurations compared in the ablation, in report order.
ABLATION_CONFIGS: Tuple[CheckerConfig, ...] = (
    CheckerConfig(list_size=1, redirection_check=False),
    CheckerConfig(list_size=1, redirection_check=True),
    CheckerConfig(list_size=5, redirection_check=True),
    CheckerConfig(list_size=5, redirection_check=False),
    CheckerConfig(list_size=10, redirection_check=False),
)


class PhishEngine:
    """Main entry point for analyzing a single web sample"""

    def __init__(
        self,
        clients: ExternalClients,
        gateways: GatewayProvider,
        config: PipelineConfig = PipelineConfig(),
        similarity: Optional[LogoSimilarity] = None,
    ):
        self.clients = clients
        self.gateways = gateways
        self.config = config
        self.similarity = similarity or LogoSimilarity()
        self.checker = DomainChecker(clients, config.checker)
        self.logger = logging.getLogger(self.__class__.__name__)

    async def analyze(self, sample: WebSample, ablation: bool = False) -> AnalysisResult:
        """Run the full pipeline on one sample"""
        start_time = datetime.now()
        try:
            evidence = await self.gather_evidence(sample)
            run = await self.recognize(sample, evidence)
            outcome = await self.checker.check(sample, run.verdict)
            ablated = await self.check_ablation(sample, run.verdict) if ablation else {}
        except Exception as e:
            self.logger.error(f"Analysis of sample {sample.id} failed: {e}")
            raise

        wall_time = (datetime.now() - start_time).total_seconds()
        self.logger.info(
            f"Sample {sample.id}: {outcome.classification.value.value} "
            f"({outcome.classification.basis.value}) in {wall_time:.2f}s"
        )
        return AnalysisResult(
            sample_id=sample.id,
            url=sample.url,
            verdict=run.verdict,
            classification=outcome.classification,
            domains_checked=outcome.domains_checked,
            final_url=outcome.final_url,
            transcript=run.transcript,
            ablation=ablated,
            wall_time=wall_time,
        )

    async def gather_evidence(self, sample: WebSample) -> Evidence:
        """Condensed HTML plus, where enabled and available, the logo detector and vision describer outputs."""
        page = condense(sample.html, self.config.condenser_budget)
        if self.config.strategy is Strategy.ONE_SHOT:
            return Evidence(page=page)

        detection = None
        if self.config.use_logo_detector and sample.logo_crop:
            detection = await self.clients.detect_logo(sample.logo_crop)
        vision = None
        if self.config.use_vision and sample.screenshot:
            vision = await self.clients.describe_screenshot(sample.screenshot, sample.logo_crop)
        return Evidence(page=page, detection=detection, vision=vision)

    async def recognize(self, sample: WebSample, evidence: Evidence) -> AgentRun:
        gateway = self.gateways.gateway_for(sample.id)
        if self.config.strategy is Strategy.ONE_SHOT:
            return await OneShotAgent("one_shot_agent", gateway).process(sample, build_one_shot_prompt(evidence.page))

        ctx = PromptContext.from_evidence(
            evidence.page,
            logo_present=sample.logo_crop is not None,
            screenshot_present=sample.screenshot is not None,
            detection=evidence.detection,
            vision=evidence.vision,
        )
        tools = ToolRegistry(self.clients, self.similarity, query_logo=sample.logo_crop)
        agent = BrandAgent("brand_agent", gateway, tools, self.config.agent_budget)
        return await agent.process(sample, build_prompt(ctx, self.config.agent_budget))

    async def check_ablation(self, sample: WebSample, verdict: BrandVerdict) -> Dict[str, Classification]:
        """Classify one verdict under every ablation checker configuration."""
        results: Dict[str, Classification] = {}
        for cfg in ABLATION_CONFIGS:
            outcome: CheckOutcome = await DomainChecker(self.clients, cfg, self.checker.snapshot).check(sample, verdict)
            results[cfg.label] = outcome.classification
        return results


def build_engine(config: RunConfig, credentials: Optional[Credentials] = None) -> PhishEngine:
    """Wire cassette, remote clients and model gateways for the configured mode."""
    config.require_credentials(credentials)
    cassette = None
    if config.cassette is not None:
        cassette = Cassette.load(config.cassette, must_exist=config.mode is Mode.REPLAY)
    clients = ExternalClients.create(config.mode, cassette, credentials)

    if config.scenarios is not None:
        gateways = ScenarioLibrary(config.scenarios)
    elif config.mode is Mode.RECORD:
        gateways = ScenarioRecorder(OpenAIGateway(model=config.model), cassette.scenario_dir)
    elif config.mode is Mode.REPLAY:
        # a recorded run keeps its model turns next to the cassette
        if not cassette.scenario_dir.is_dir():
            raise ConfigurationError(
                f"Replay mode requires a scenario directory for the model gateway (none given, {cassette.scenario_dir} missing)."
            )
        gateways = ScenarioLibrary(cassette.scenario_dir)
    else:
        gateways = SharedGateway(OpenAIGateway(model=config.model))
    return PhishEngine(clients, gateways, config.pipeline)

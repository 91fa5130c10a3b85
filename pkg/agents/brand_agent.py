# agents/brand_agent.py

"""The tool-calling brand-recognition agent: prompt, bounded tool rounds, JSON verdict."""

from typing import Any, Dict, List, Optional, Tuple

from models.errors import PreconditionError
from models.records import TOOL_BUDGET_CAP, BrandVerdict, WebSample
from services.html_condenser import DEFAULT_BUDGET, condense
from .base_agent import AgentRun, BaseAgent
from .model_gateway import ModelGateway
from .prompts import IMAGE_SEARCH_TOOL, SEARCH_TOOL, PromptContext, build_prompt
from .tool_registry import ToolRegistry
from .transcript import AgentTranscript, Role


class BrandAgent(BaseAgent):
    def __init__(self, agent_id: str, gateway: ModelGateway, tools: ToolRegistry, budget: int = TOOL_BUDGET_CAP):
        super().__init__(agent_id, gateway)
        if not 1 <= budget <= TOOL_BUDGET_CAP:
            raise PreconditionError(f"Tool budget must be within 1..{TOOL_BUDGET_CAP}, got {budget}.")
        if set(tools.names) != {SEARCH_TOOL, IMAGE_SEARCH_TOOL}:
            raise PreconditionError(f"Tool registry must expose {SEARCH_TOOL} and {IMAGE_SEARCH_TOOL}.")
        self.tools = tools
        self.budget = budget

    async def _core_process(self, sample: WebSample, prompt: str) -> Tuple[BrandVerdict, AgentTranscript]:
        transcript = AgentTranscript(sample_id=sample.id)
        transcript.add_system(prompt)
        messages = [{"role": "system", "content": prompt}]
        verdict = await self._converse(transcript, messages, tools=self.tools, budget=self.budget)
        self.logger.info(f"Sample {sample.id}: {verdict.brand_name or 'no brand'} ({verdict.rounds_used} tool calls)")
        return verdict, transcript


async def run_agent(
    sample: WebSample,
    gateway: ModelGateway,
    tools: ToolRegistry,
    budget: int = TOOL_BUDGET_CAP,
    prompt: Optional[str] = None,
) -> Tuple[BrandVerdict, AgentTranscript]:
    """Run the agent on one sample. Without a prepared prompt, only the condensed HTML is used as evidence."""
    if prompt is None:
        page = condense(sample.html, DEFAULT_BUDGET)
        ctx = PromptContext.from_evidence(page, logo_present=sample.logo_crop is not None, screenshot_present=sample.screenshot is not None)
        prompt = build_prompt(ctx, budget)
    run: AgentRun = await BrandAgent("brand_agent", gateway, tools, budget).process(sample, prompt)
    return run.verdict, run.transcript


async def replay_tool_calls(transcript: AgentTranscript, tools: ToolRegistry) -> List[Dict[str, Any]]:
    """Re-dispatch every recorded tool call; against a cassette this reproduces the recorded results."""
    results = []
    for turn in transcript.turns:
        if turn.role is Role.TOOL_CALL:
            results.append(await tools.dispatch(turn.payload["name"], turn.payload["arguments"]))
    return results

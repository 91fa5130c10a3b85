# agents/one_shot_agent.py

"""Baseline brand prediction from a single prompt over the condensed HTML, without tools."""

from typing import Tuple

from models.records import BrandVerdict, WebSample
from services.html_condenser import DEFAULT_BUDGET, condense
from .base_agent import BaseAgent
from .model_gateway import ModelGateway
from .prompts import build_one_shot_prompt
from .transcript import AgentTranscript


class OneShotAgent(BaseAgent):
    async def _core_process(self, sample: WebSample, prompt: str) -> Tuple[BrandVerdict, AgentTranscript]:
        transcript = AgentTranscript(sample_id=sample.id)
        transcript.add_system(prompt)
        messages = [{"role": "user", "content": prompt}]
        # no tools: the model is asked once, plus repair prompts if its answer is malformed
        verdict = await self._converse(transcript, messages)
        return verdict, transcript


async def one_shot_brand(sample: WebSample, gateway: ModelGateway, condenser_budget: int = DEFAULT_BUDGET) -> BrandVerdict:
    prompt = build_one_shot_prompt(condense(sample.html, condenser_budget))
    run = await OneShotAgent("one_shot_agent", gateway).process(sample, prompt)
    return run.verdict

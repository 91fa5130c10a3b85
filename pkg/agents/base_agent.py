# agents/base_agent.py

"""An abstract base class for the brand-recognition agents: reasoning log and the shared
verdict/repair conversation loop."""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Tuple
import json
import logging

from models.errors import GatewayUnavailableError, MalformedOutputError, PreconditionError
from models.records import BrandVerdict, NoBrand, WebSample
from .model_gateway import FinalText, ModelGateway, ToolRequest
from .prompts import FINALIZE_INSTRUCTION, REPAIR_INSTRUCTION
from .tool_registry import ToolRegistry
from .transcript import AgentTranscript
from .verdict_parser import parse_verdict

MAX_REPAIRS = 2
UNPARSEABLE_REASON = "unparseable agent output"


class AgentRun:
    """Result of one agent invocation; the reasoning log travels inside the transcript."""

    def __init__(self, verdict: BrandVerdict, transcript: AgentTranscript):
        self.verdict = verdict
        self.transcript = transcript


class BaseAgent(ABC):
    def __init__(self, agent_id: str, gateway: ModelGateway):
        self.agent_id = agent_id
        self.gateway = gateway
        self.reasoning_log: List[Dict[str, str]] = []
        self.logger = logging.getLogger(self.__class__.__name__)

    async def process(self, sample: WebSample, prompt: str) -> AgentRun:
        self._validate_input(sample, prompt)
        self.reasoning_log = []
        self.log_reasoning('Processing Start', f'Sample {sample.id}')
        try:
            verdict, transcript = await self._core_process(sample, prompt)
        except Exception as e:
            self.logger.error(f"Error processing sample {sample.id} in {self.agent_id}: {e}")
            raise
        self.log_reasoning('Processing Complete', f'{verdict.brand_name or "no brand"} after {verdict.rounds_used} tool rounds')
        transcript.reasoning = list(self.reasoning_log)
        return AgentRun(verdict, transcript)

    @abstractmethod
    async def _core_process(self, sample: WebSample, prompt: str) -> Tuple[BrandVerdict, AgentTranscript]:
        """To be implemented by specific agents"""

    def log_reasoning(self, step: str, rationale: str):
        """Log reasoning steps for transparency"""
        self.reasoning_log.append({'step': step, 'rationale': rationale})

    def _validate_input(self, sample: WebSample, prompt: str):
        if not prompt:
            raise PreconditionError("Prompt is empty.")

    async def _converse(
        self,
        transcript: AgentTranscript,
        messages: List[Dict[str, Any]],
        tools: Optional[ToolRegistry] = None,
        budget: int = 0,
    ) -> BrandVerdict:
        """Exchange messages until the model emits a parseable verdict.

        Tool requests are dispatched while fewer than `budget` have been made; the first request past the
        budget triggers one finalization instruction, and anything after that counts against the repairs.
        """
        schemas = tools.schemas() if tools is not None else None
        finalizing = tools is None
        repairs = 0

        while True:
            reply = await self.gateway.send(messages, schemas, allow_tools=not finalizing)

            if isinstance(reply, ToolRequest):
                if not finalizing and transcript.tool_calls_used < budget:
                    await self._dispatch(transcript, messages, tools, reply)
                    continue
                if not finalizing:
                    finalizing = True
                    self.log_reasoning('Budget Exhausted', f'Refused {reply.name} after {transcript.tool_calls_used} calls')
                    self.logger.info(f"Tool budget of {budget} exhausted; forcing final answer")
                    transcript.add_system(FINALIZE_INSTRUCTION)
                    messages.append({"role": "user", "content": FINALIZE_INSTRUCTION})
                    continue
                problem = f"function call {reply.name!r} when only a final answer was allowed"
            elif isinstance(reply, FinalText):
                transcript.add_model(reply.text)
                try:
                    verdict = parse_verdict(reply.text)
                    return verdict.model_copy(update={"rounds_used": transcript.tool_calls_used})
                except MalformedOutputError as e:
                    problem = str(e)
                messages.append({"role": "assistant", "content": reply.text})
            else:
                raise GatewayUnavailableError(f"Gateway returned an unexpected reply: {reply!r}")

            if repairs >= MAX_REPAIRS:
                self.logger.warning(f"Giving up after {MAX_REPAIRS} repair attempts: {problem}")
                self.log_reasoning('Unparseable Output', problem)
                return BrandVerdict(brand=NoBrand(), reason=UNPARSEABLE_REASON, rounds_used=transcript.tool_calls_used)
            repairs += 1
            finalizing = True
            self.log_reasoning('Repair', problem)
            transcript.add_system(REPAIR_INSTRUCTION)
            messages.append({"role": "user", "content": REPAIR_INSTRUCTION})

    async def _dispatch(self, transcript: AgentTranscript, messages: List[Dict[str, Any]], tools: ToolRegistry, request: ToolRequest):
        arguments = tools.sanitize_arguments(request.arguments)
        result = await tools.dispatch(request.name, arguments)
        transcript.add_tool_exchange(request.name, arguments, result)
        self.log_reasoning('Tool Call', f'{request.name}({arguments.get("query", "")!r})')

        call_id = request.call_id or f"call_{transcript.tool_calls_used}"
        messages.append({
            "role": "assistant",
            "content": None,
            "tool_calls": [{
                "id": call_id,
                "type": "function",
                "function": {"name": request.name, "arguments": json.dumps(arguments)},
            }],
        })
        messages.append({"role": "tool", "tool_call_id": call_id, "content": json.dumps(result, ensure_ascii=False)})

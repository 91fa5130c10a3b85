# agents/model_gateway.py

"""Interchangeable model backends: the live OpenAI chat API or a scripted scenario."""

import asyncio
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Protocol, Union

import aiofiles
from dotenv import load_dotenv
from openai import APIError, AsyncOpenAI
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from models.errors import ConfigurationError, GatewayUnavailableError, ScenarioExhaustedError

load_dotenv()


class ToolRequest(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    arguments: Dict[str, Any] = Field(default_factory=dict)
    call_id: str = ""


class FinalText(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str


GatewayReply = Union[ToolRequest, FinalText]


class ModelGateway(Protocol):
    async def send(self, messages: List[Dict[str, Any]], tools: Optional[List[Dict[str, Any]]], allow_tools: bool = True) -> GatewayReply:
        ...


class OpenAIGateway:
    """Chat-completions gateway with function calling; temperature 0 for reproducibility."""

    def __init__(self, model: str = "gpt-4-turbo", temperature: float = 0.0, api_key: Optional[str] = None, timeout: float = 60.0):
        key = api_key or os.getenv("OPENAI_API_KEY")
        if not key:
            raise ConfigurationError("OPENAI_API_KEY is required for the live model gateway.")
        self.client = AsyncOpenAI(api_key=key, max_retries=2, timeout=timeout)
        self.model = model
        self.temperature = temperature
        self.logger = logging.getLogger(self.__class__.__name__)

    async def send(self, messages, tools=None, allow_tools: bool = True) -> GatewayReply:
        kwargs: Dict[str, Any] = {"model": self.model, "messages": messages, "temperature": self.temperature}
        if tools:
            kwargs["tools"] = tools
            kwargs["tool_choice"] = "auto" if allow_tools else "none"
            kwargs["parallel_tool_calls"] = False
        try:
            response = await self.client.chat.completions.create(**kwargs)
        except APIError as e:
            self.logger.error(f"OpenAI API error: {e}")
            raise GatewayUnavailableError(f"Model gateway unavailable: {e}") from e

        message = response.choices[0].message
        if message.tool_calls:
            call = message.tool_calls[0]
            try:
                arguments = json.loads(call.function.arguments or "{}")
            except json.JSONDecodeError:
                arguments = {"_raw": call.function.arguments}
            if not isinstance(arguments, dict):
                arguments = {"_raw": arguments}
            return ToolRequest(name=call.function.name, arguments=arguments, call_id=call.id)
        return FinalText(text=message.content or "")


class ScenarioStep(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["tool", "final"]
    name: Optional[str] = None
    arguments: Dict[str, Any] = Field(default_factory=dict)
    text: Optional[str] = None


_SCENARIO = TypeAdapter(List[ScenarioStep])


class ScriptedGateway:
    """Replays an ordered list of model responses; every send consumes one step."""

    def __init__(self, steps: List[ScenarioStep], name: str = "scenario"):
        self.steps = list(steps)
        self.name = name
        self.position = 0
        self.sent: List[List[Dict[str, Any]]] = []
        self._lock = asyncio.Lock()

    @classmethod
    def from_file(cls, path: Path) -> "ScriptedGateway":
        path = Path(path)
        try:
            steps = _SCENARIO.validate_json(path.read_bytes())
        except (OSError, ValidationError) as e:
            raise ConfigurationError(f"Unreadable scenario file {path}: {e}") from e
        return cls(steps, name=path.stem)

    async def send(self, messages, tools=None, allow_tools: bool = True) -> GatewayReply:
        async with self._lock:
            if self.position >= len(self.steps):
                raise ScenarioExhaustedError(f"Scenario {self.name} has no step {self.position + 1}.")
            step = self.steps[self.position]
            self.position += 1
            self.sent.append(list(messages))
        if step.kind == "tool":
            return ToolRequest(name=step.name or "", arguments=step.arguments, call_id=f"call_{self.position}")
        return FinalText(text=step.text or "")


class ScenarioLibrary:
    """One scenario file per sample id: `<dir>/<sample id>.json`."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise ConfigurationError(f"Scenario directory not found: {self.directory}")

    def gateway_for(self, sample_id: str) -> ScriptedGateway:
        path = self.directory / f"{sample_id}.json"
        if not path.is_file():
            raise ScenarioExhaustedError(f"No scenario recorded for sample {sample_id}.")
        return ScriptedGateway.from_file(path)


class SharedGateway:
    """Serves one gateway (typically the live one) to every sample."""

    def __init__(self, gateway: ModelGateway):
        self.gateway = gateway

    def gateway_for(self, sample_id: str) -> ModelGateway:
        return self.gateway


class RecordingGateway:
    """Forwards every turn to `inner` and rewrites `path` with the replies so far, in scenario-file form."""

    def __init__(self, inner: ModelGateway, path: Path):
        self.inner = inner
        self.path = Path(path)
        self.steps: List[ScenarioStep] = []

    async def send(self, messages, tools=None, allow_tools: bool = True) -> GatewayReply:
        reply = await self.inner.send(messages, tools, allow_tools)
        if isinstance(reply, ToolRequest):
            self.steps.append(ScenarioStep(kind="tool", name=reply.name, arguments=reply.arguments))
        else:
            self.steps.append(ScenarioStep(kind="final", text=reply.text))
        async with aiofiles.open(self.path, "w", encoding="utf-8") as f:
            await f.write(_SCENARIO.dump_json(self.steps, indent=2, exclude_none=True).decode("utf-8"))
        return reply


class ScenarioRecorder:
    """Record-mode provider: each sample talks to `gateway` through its own RecordingGateway."""

    def __init__(self, gateway: ModelGateway, directory: Path):
        self.gateway = gateway
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def gateway_for(self, sample_id: str) -> RecordingGateway:
        return RecordingGateway(self.gateway, self.directory / f"{sample_id}.json")

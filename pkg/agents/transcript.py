# agents/transcript.py

"""Ordered record of prompts, model replies and tool exchanges for one agent run."""

import json
from enum import Enum
from typing import Any, Dict, List, Union

from pydantic import BaseModel, Field


class Role(str, Enum):
    SYSTEM = "system"
    MODEL = "model"
    TOOL_CALL = "tool_call"
    TOOL_RESULT = "tool_result"


class Turn(BaseModel):
    role: Role
    payload: Union[str, Dict[str, Any]]


class AgentTranscript(BaseModel):
    sample_id: str = ""
    turns: List[Turn] = Field(default_factory=list)
    tool_calls_used: int = 0
    reasoning: List[Dict[str, str]] = Field(default_factory=list)

    def add_system(self, text: str):
        self.turns.append(Turn(role=Role.SYSTEM, payload=text))

    def add_model(self, text: str):
        self.turns.append(Turn(role=Role.MODEL, payload=text))

    def add_tool_exchange(self, name: str, arguments: Dict[str, Any], result: Dict[str, Any]):
        # a call is only ever recorded together with its result
        self.turns.append(Turn(role=Role.TOOL_CALL, payload={"name": name, "arguments": arguments}))
        self.turns.append(Turn(role=Role.TOOL_RESULT, payload=result))
        self.tool_calls_used += 1

    def tool_exchanges(self) -> List[Dict[str, Any]]:
        exchanges = []
        for i, turn in enumerate(self.turns):
            if turn.role is Role.TOOL_CALL:
                exchanges.append({**turn.payload, "result": self.turns[i + 1].payload})
        return exchanges

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, ensure_ascii=False, indent=2)

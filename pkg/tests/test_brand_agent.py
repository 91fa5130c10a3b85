import json
import random

import pytest

from agents.base_agent import MAX_REPAIRS, UNPARSEABLE_REASON
from agents.brand_agent import BrandAgent, replay_tool_calls, run_agent
from agents.model_gateway import ScenarioStep
from agents.prompts import FINALIZE_INSTRUCTION, IMAGE_SEARCH_TOOL, REPAIR_INSTRUCTION, SEARCH_TOOL
from agents.tool_registry import ToolRegistry
from agents.transcript import Role
from agents.verdict_parser import parse_verdict
from conftest import CORPUS, final, scripted, tool
from models.errors import CassetteMissError, MalformedOutputError, PreconditionError, ToolUnavailableError
from models.records import WebSample
from services.corpus_loader import load_sample_dir
from services.logo_similarity import LogoSimilarity

SAMPLE = WebSample(id="s1", url="https://secure-login.example.com/", html="<title>Sign in</title><button>Log in</button>")


class QuietClients:
    """Search tools that always answer with no results."""

    def __init__(self):
        self.queries = []

    async def web_search(self, query, count):
        self.queries.append(query)
        return []

    async def image_search(self, query, count):
        self.queries.append(query)
        return []

    async def fetch_thumbnail(self, url):
        return None


class FailingClients(QuietClients):
    def __init__(self, error):
        super().__init__()
        self.error = error

    async def web_search(self, query, count):
        raise self.error


def registry(clients=None):
    return ToolRegistry(clients or QuietClients(), LogoSimilarity())


async def run(gateway, budget=5, clients=None, prompt="identify the brand"):
    return await run_agent(SAMPLE, gateway, registry(clients), budget, prompt=prompt)


async def test_immediate_answer_uses_no_tools():
    gateway = scripted(final("Contoso"))
    verdict, transcript = await run(gateway)
    assert verdict.brand_name == "Contoso"
    assert verdict.rounds_used == 0
    assert gateway.position == 1
    assert [t.role for t in transcript.turns] == [Role.SYSTEM, Role.MODEL]


async def test_tool_result_is_fed_back_with_matching_call_id():
    gateway = scripted(tool(SEARCH_TOOL, "contoso login"), final("Contoso"))
    verdict, transcript = await run(gateway)
    assert verdict.rounds_used == 1
    second_send = gateway.sent[1]
    assistant, tool_message = second_send[-2], second_send[-1]
    assert assistant["tool_calls"][0]["function"]["name"] == SEARCH_TOOL
    assert tool_message["role"] == "tool"
    assert tool_message["tool_call_id"] == assistant["tool_calls"][0]["id"]
    assert transcript.tool_exchanges() == [{"name": SEARCH_TOOL, "arguments": {"query": "contoso login"}, "result": {"results": []}}]


async def test_budget_overrun_forces_a_final_answer():
    steps = [tool(SEARCH_TOOL, f"q{i}") for i in range(6)] + [final("DHL")]
    gateway = scripted(*steps)
    clients = QuietClients()
    verdict, transcript = await run(gateway, budget=5, clients=clients)
    assert verdict.brand_name == "DHL"
    assert verdict.rounds_used == 5
    assert clients.queries == ["q0", "q1", "q2", "q3", "q4"]
    assert gateway.position == 7
    assert transcript.turns[-2].payload == FINALIZE_INSTRUCTION
    assert gateway.sent[-1][-1] == {"role": "user", "content": FINALIZE_INSTRUCTION}



async def test_reasoning_log_is_exported_with_the_transcript():
    gateway = scripted(*[tool(SEARCH_TOOL, f"q{i}") for i in range(6)], final("DHL"))
    _, transcript = await run(gateway, budget=5)
    steps = [entry["step"] for entry in transcript.reasoning]
    assert steps == ["Processing Start"] + ["Tool Call"] * 5 + ["Budget Exhausted", "Processing Complete"]
    exported = json.loads(transcript.to_json())
    assert exported["reasoning"][-1]["rationale"] == "DHL after 5 tool rounds"

async def test_smaller_budget_is_honoured():
    gateway = scripted(tool(SEARCH_TOOL, "a"), tool(SEARCH_TOOL, "b"), tool(SEARCH_TOOL, "c"), final("X"))
    verdict, _ = await run(gateway, budget=2)
    assert verdict.rounds_used == 2


async def test_tool_request_after_finalization_is_repaired():
    gateway = scripted(tool(SEARCH_TOOL, "a"), tool(SEARCH_TOOL, "b"), tool(SEARCH_TOOL, "c"), final("X"))
    verdict, transcript = await run(gateway, budget=1)
    assert verdict.brand_name == "X"
    assert verdict.rounds_used == 1
    assert any(t.payload == REPAIR_INSTRUCTION for t in transcript.turns)


async def test_malformed_answer_is_repaired():
    gateway = scripted(ScenarioStep(kind="final", text="It is Amazon."), final("Amazon"))
    verdict, transcript = await run(gateway)
    assert verdict.brand_name == "Amazon"
    assert gateway.position == 2
    assert gateway.sent[1][-2] == {"role": "assistant", "content": "It is Amazon."}
    assert gateway.sent[1][-1] == {"role": "user", "content": REPAIR_INSTRUCTION}


async def test_repeated_garbage_yields_unparseable_no_brand():
    garbage = ScenarioStep(kind="final", text="not json")
    gateway = scripted(garbage, garbage, garbage, final("Never reached"))
    verdict, _ = await run(gateway)
    assert verdict.is_no_brand
    assert verdict.reason == UNPARSEABLE_REASON
    assert gateway.position == MAX_REPAIRS + 1


async def test_unknown_tool_and_empty_query_return_error_payloads():
    gateway = scripted(tool("browse_web", "x"), tool(IMAGE_SEARCH_TOOL, "   "), final("X"))
    verdict, transcript = await run(gateway)
    results = [exchange["result"] for exchange in transcript.tool_exchanges()]
    assert "unknown function" in results[0]["error"]
    assert "non-empty" in results[1]["error"]
    assert verdict.rounds_used == 2


async def test_tool_failure_is_reported_to_the_model():
    gateway = scripted(tool(SEARCH_TOOL, "acme"), final("Acme"))
    verdict, transcript = await run(gateway, clients=FailingClients(ToolUnavailableError("search down")))
    assert verdict.brand_name == "Acme"
    assert transcript.tool_exchanges()[0]["result"] == {"error": "search down"}


async def test_cassette_miss_aborts_the_run():
    gateway = scripted(tool(SEARCH_TOOL, "acme"), final("Acme"))
    with pytest.raises(CassetteMissError):
        await run(gateway, clients=FailingClients(CassetteMissError("web_search", "acme")))


async def test_long_queries_are_truncated():
    clients = QuietClients()
    await run(scripted(tool(SEARCH_TOOL, "x" * 1000), final("X")), clients=clients)
    assert len(clients.queries[0]) == 256


@pytest.mark.parametrize("budget", [0, 6])
def test_budget_outside_range_is_rejected(budget):
    with pytest.raises(PreconditionError):
        BrandAgent("a", scripted(), registry(), budget)


async def test_default_prompt_carries_condensed_page():
    gateway = scripted(final("X"))
    await run_agent(SAMPLE, gateway, registry())
    system_prompt = gateway.sent[0][0]["content"]
    assert "Sign in" in system_prompt
    assert "Log in" in system_prompt


async def test_fixture_scenario_replays_against_cassette(replay_clients, scenarios):
    sample = await load_sample_dir(CORPUS / "p01")
    tools = ToolRegistry(replay_clients, LogoSimilarity())
    verdict, transcript = await run_agent(sample, scenarios.gateway_for("p01"), tools)
    assert verdict.brand_name == "PayPal"
    assert verdict.rounds_used == 1
    assert transcript.tool_exchanges()[0]["result"]["results"][0]["display_link"] == "www.paypal.com"


@pytest.mark.parametrize("sample_id", ["p01", "p02", "p04"])
async def test_replaying_tool_calls_reproduces_recorded_results(replay_clients, scenarios, sample_id):
    sample = await load_sample_dir(CORPUS / sample_id)
    tools = ToolRegistry(replay_clients, LogoSimilarity())
    _, transcript = await run_agent(sample, scenarios.gateway_for(sample_id), tools)
    replayed = await replay_tool_calls(transcript, tools)
    assert replayed == [exchange["result"] for exchange in transcript.tool_exchanges()]


def expected_outcome(steps, budget):
    """Independent walk over a script: (brand name or None, tool calls, sends)."""
    used = sends = repairs = 0
    finalizing = False
    for step in steps:
        sends += 1
        if step.kind == "tool":
            if not finalizing and used < budget:
                used += 1
                continue
            if not finalizing:
                finalizing = True
                continue
        else:
            try:
                return parse_verdict(step.text).brand_name, used, sends
            except MalformedOutputError:
                pass
        if repairs >= MAX_REPAIRS:
            return None, used, sends
        repairs += 1
        finalizing = True
    raise AssertionError("script too short")


def random_step(rng):
    roll = rng.random()
    if roll < 0.55:
        return tool(rng.choice([SEARCH_TOOL, IMAGE_SEARCH_TOOL, "browse_web"]), rng.choice(["a", "b", "", "brand logo"]))
    if roll < 0.8:
        return ScenarioStep(kind="final", text=rng.choice(["", "{}", "It is Nike", '{"brand_name": "Nike"}', "[1]"]))
    return final(rng.choice(["Nike", "no brand found", "Adidas"]))


async def test_adversarial_scripts_respect_budget():
    rng = random.Random(2024)
    for _ in range(200):
        budget = rng.randint(1, 5)
        steps = [random_step(rng) for _ in range(rng.randint(12, 20))]
        gateway = scripted(*steps)
        verdict, transcript = await run(gateway, budget=budget)

        brand, used, sends = expected_outcome(steps, budget)
        assert transcript.tool_calls_used == used <= budget
        assert verdict.rounds_used == used
        assert gateway.position == sends <= budget + 2 + MAX_REPAIRS
        assert len(transcript.tool_exchanges()) == used
        assert verdict.brand_name == brand

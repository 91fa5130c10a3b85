import io
import json
from pathlib import Path

import pytest
from PIL import Image, ImageDraw

from agents.model_gateway import ScenarioLibrary, ScenarioStep, ScriptedGateway
from services.cassette import Cassette
from services.external_clients import ExternalClients, Mode

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"
CASSETTE = FIXTURES / "cassettes" / "fixtures.jsonl"
SCENARIOS = FIXTURES / "scenarios"


def final(brand_name, reason="grounded in the page text"):
    return ScenarioStep(kind="final", text=json.dumps({"brand_name": brand_name, "reason": reason}))


def tool(name, query):
    return ScenarioStep(kind="tool", name=name, arguments={"query": query})


def scripted(*steps):
    return ScriptedGateway(list(steps))


def png_bytes(draw_fn=None, size=(64, 64), color="white") -> bytes:
    image = Image.new("RGB", size, color)
    if draw_fn is not None:
        draw_fn(ImageDraw.Draw(image))
    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return buffer.getvalue()


def write_cassette(path: Path, entries) -> Path:
    """entries: iterable of (tool, key, response)."""
    with open(path, "w", encoding="utf-8") as f:
        for tool_name, key, response in entries:
            f.write(json.dumps({"tool": tool_name, "key": key, "response": response, "recorded_at": "2024-05-01T00:00:00+00:00"}) + "\n")
    return path


def search_items(*display_links):
    return [
        {"title": f"result {i}", "snippet": "", "link": f"https://{link}/", "display_link": link}
        for i, link in enumerate(display_links, start=1)
    ]


@pytest.fixture
def fixture_cassette() -> Cassette:
    return Cassette.load(CASSETTE)


@pytest.fixture
def replay_clients(fixture_cassette) -> ExternalClients:
    return ExternalClients.create(Mode.REPLAY, fixture_cassette)


@pytest.fixture
def scenarios() -> ScenarioLibrary:
    return ScenarioLibrary(SCENARIOS)


@pytest.fixture
def logo_png() -> bytes:
    return png_bytes(lambda d: (d.rectangle([8, 8, 40, 56], fill="navy"), d.ellipse([30, 10, 60, 40], fill="orange")))


@pytest.fixture
def other_png() -> bytes:
    return png_bytes(lambda d: d.polygon([(0, 63), (63, 0), (63, 63)], fill="black"), color="yellow")

# services/html_condenser.py

"""Reduces raw HTML to the brand-relevant fragments that fit the model's token limit."""

import logging
import math
import re
from typing import List, Optional

from bs4 import BeautifulSoup, CData, Comment, Declaration, Doctype, ProcessingInstruction
from pydantic import BaseModel, ConfigDict, Field

from models.errors import PreconditionError

logger = logging.getLogger(__name__)

MIN_BUDGET = 64
DEFAULT_BUDGET = 3000

NON_CONTENT_TAGS = ["script", "style", "noscript", "template", "head"]
BUTTON_INPUT_TYPES = {"submit", "button", "reset", "image"}

_WHITESPACE = re.compile(r"\s+")
_NON_TEXT_NODES = (Comment, CData, Declaration, Doctype, ProcessingInstruction)


def estimate_tokens(text: str) -> int:
    """ceil(utf-8 byte length / 4), a tokenizer-independent approximation."""
    return math.ceil(len(text.encode("utf-8")) / 4)


class InputField(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = ""
    placeholder: str = ""
    type: str = ""

    def render(self) -> str:
        parts = [f"{key}={value}" for key, value in (("name", self.name), ("placeholder", self.placeholder), ("type", self.type)) if value]
        return " ".join(parts)


class CondensedPage(BaseModel):
    model_config = ConfigDict(frozen=True)

    title: Optional[str] = None
    inputs: List[InputField] = Field(default_factory=list)
    buttons: List[str] = Field(default_factory=list)
    visible_text: List[str] = Field(default_factory=list)
    token_estimate: int = 0

    def render(self) -> str:
        return _render(self.title, [field.render() for field in self.inputs], self.buttons, self.visible_text)


_SECTIONS = (("inputs: ", "; "), ("buttons: ", " | "), ("text: ", " | "))


def _render(title: Optional[str], inputs: List[str], buttons: List[str], texts: List[str]) -> str:
    lines = []
    if title:
        lines.append(f"title: {title}")
    for (label, sep), items in zip(_SECTIONS, (inputs, buttons, texts)):
        if items:
            lines.append(label + sep.join(items))
    return "\n".join(lines)


def _clean(text: str) -> str:
    # '<' is dropped outright so no fragment can ever read as markup
    return _WHITESPACE.sub(" ", text.replace("<", "")).strip()


class _Section:
    """Tracks the rendered byte size of one list section as items are dropped."""

    def __init__(self, label: str, sep: str, items: List[str]):
        self.label_len = len(label.encode("utf-8"))
        self.sep_len = len(sep.encode("utf-8"))
        self.items = list(items)
        self.sizes = [len(item.encode("utf-8")) for item in items]
        self.total = sum(self.sizes)

    def size(self) -> int:
        if not self.items:
            return 0
        return self.label_len + self.total + self.sep_len * (len(self.items) - 1)

    def pop(self):
        self.items.pop()
        self.total -= self.sizes.pop()


def _fit(title: Optional[str], inputs: List[InputField], buttons: List[str], texts: List[str], budget: int):
    limit = budget * 4
    input_strings = [field.render() for field in inputs]
    sections = [_Section(label, sep, items) for (label, sep), items in zip(_SECTIONS, (input_strings, buttons, texts))]
    inputs_section, buttons_section, text_section = sections

    def total() -> int:
        sizes = [section.size() for section in sections]
        if title:
            sizes.append(len(f"title: {title}".encode("utf-8")))
        present = [size for size in sizes if size]
        return sum(present) + max(len(present) - 1, 0)

    for section in (text_section, inputs_section, buttons_section):
        while section.items and total() > limit:
            section.pop()

    if title and total() > limit:
        # the title is the last thing to go; clip it to whatever room is left
        room = limit - len("title: ".encode("utf-8"))
        title = title.encode("utf-8")[:max(room, 0)].decode("utf-8", errors="ignore").strip() or None

    kept_inputs = inputs[:len(inputs_section.items)]
    return title, kept_inputs, buttons_section.items, text_section.items


def condense(html: str, budget: int = DEFAULT_BUDGET) -> CondensedPage:
    """Extract title, inputs, buttons and visible text, truncated to `budget` estimated tokens."""
    if budget < MIN_BUDGET:
        raise PreconditionError(f"Condenser budget must be at least {MIN_BUDGET}, got {budget}.")
    if not html or not html.strip():
        return CondensedPage()

    try:
        soup = BeautifulSoup(html, "lxml")
    except Exception as e:
        logger.warning(f"Markup could not be parsed, returning empty page: {e}")
        return CondensedPage()

    title = None
    if soup.title is not None:
        title = _clean(soup.title.get_text(" ")) or None
        soup.title.decompose()

    for comment in soup.find_all(string=lambda text: isinstance(text, _NON_TEXT_NODES)):
        comment.extract()
    for tag in NON_CONTENT_TAGS:
        for el in soup.find_all(tag):
            el.decompose()

    inputs: List[InputField] = []
    buttons: List[str] = []
    for el in soup.find_all(["input", "textarea", "select", "button"]):
        if el.name == "button":
            label = _clean(el.get_text(" "))
            if label:
                buttons.append(label)
            el.decompose()
            continue
        input_type = (el.get("type") or ("text" if el.name == "input" else el.name)).lower()
        if input_type == "hidden":
            continue
        if el.name == "input" and input_type in BUTTON_INPUT_TYPES:
            label = _clean(el.get("value") or el.get("alt") or "")
            if label:
                buttons.append(label)
            continue
        field = InputField(
            name=_clean(str(el.get("name") or el.get("id") or "")),
            placeholder=_clean(str(el.get("placeholder") or el.get("aria-label") or "")),
            type=_clean(input_type),
        )
        if field.render():
            inputs.append(field)

    texts = [fragment for fragment in (_clean(s) for s in soup.stripped_strings) if fragment]

    title, inputs, buttons, texts = _fit(title, inputs, buttons, texts, budget)
    page = CondensedPage(title=title, inputs=inputs, buttons=buttons, visible_text=texts)
    estimate = estimate_tokens(page.render())
    logger.debug(f"Condensed page to {estimate} estimated tokens ({len(texts)} text fragments)")
    return page.model_copy(update={"token_estimate": estimate})

# agents/verdict_parser.py

"""Parses the agent's terminal JSON answer into a BrandVerdict."""

import json
import re

from models.errors import MalformedOutputError
from models.records import BrandVerdict, NamedBrand, NoBrand

# both spellings appear in the agent prompt
NO_BRAND_SENTINELS = {"no brand found", "no brand name"}

_FENCE = re.compile(r"^```[a-zA-Z]*\s*\n?(.*?)\n?\s*```$", re.DOTALL)


def parse_verdict(text: str) -> BrandVerdict:
    if not isinstance(text, str) or not text.strip():
        raise MalformedOutputError("Model output is empty.")

    body = text.strip()
    fenced = _FENCE.match(body)
    if fenced:
        body = fenced.group(1).strip()

    try:
        obj = json.loads(body)
    except json.JSONDecodeError as e:
        raise MalformedOutputError(f"Model output is not JSON: {e}") from e
    if not isinstance(obj, dict):
        raise MalformedOutputError("Model output is not a JSON object.")

    missing = [key for key in ("brand_name", "reason") if key not in obj]
    if missing:
        raise MalformedOutputError(f"Model output lacks required keys: {', '.join(missing)}")
    brand_name, reason = obj["brand_name"], obj["reason"]
    if not isinstance(brand_name, str) or not isinstance(reason, str):
        raise MalformedOutputError("brand_name and reason must both be strings.")
    if not reason.strip():
        raise MalformedOutputError("reason is empty.")

    name = brand_name.strip()
    if not name or name.lower() in NO_BRAND_SENTINELS:
        return BrandVerdict(brand=NoBrand(), reason=reason.strip())
    return BrandVerdict(brand=NamedBrand(name=name), reason=reason.strip())


def render_verdict(verdict: BrandVerdict) -> str:
    brand_name = "no brand found" if verdict.is_no_brand else verdict.brand.name
    return json.dumps({"brand_name": brand_name, "reason": verdict.reason}, ensure_ascii=False)

# agents/prompts.py

"""Prompt templates for the brand-recognition agent and the one-shot baseline."""

from typing import Optional

from pydantic import BaseModel, ConfigDict

from models.tools import LogoDetection, VisionDescription
from services.html_condenser import CondensedPage

NOT_AVAILABLE = "not available"

SEARCH_TOOL = "get_google_search_results"
IMAGE_SEARCH_TOOL = "get_google_img_search_res"

_NUMBER_WORDS = {1: "one", 2: "two", 3: "three", 4: "four", 5: "five"}

FINALIZE_INSTRUCTION = (
    "You have used all of your function calls. Do not call any more functions. "
    "Output your final decision now, in JSON format with the two keys brand_name and reason. No markdown and indention."
)

REPAIR_INSTRUCTION = (
    "Your previous response was not valid JSON with the two string keys brand_name and reason. "
    "Return ONLY that JSON object, no markdown, no commentary, no function calls."
)


class PromptContext(BaseModel):
    model_config = ConfigDict(frozen=True)

    processed_html: str
    logo_present: bool
    screenshot_present: bool
    logo_detector_output: str
    vision_output: str

    @classmethod
    def from_evidence(
        cls,
        page: CondensedPage,
        logo_present: bool,
        screenshot_present: bool,
        detection: Optional[LogoDetection] = None,
        vision: Optional[VisionDescription] = None,
    ) -> "PromptContext":
        vision_output = NOT_AVAILABLE
        if vision is not None:
            vision_output = vision.text.strip() or "empty description (no readable content in the screenshot)"
        return cls(
            processed_html=page.render() or NOT_AVAILABLE,
            logo_present=logo_present,
            screenshot_present=screenshot_present,
            logo_detector_output=detection.render() if detection is not None else NOT_AVAILABLE,
            vision_output=vision_output,
        )


def build_prompt(ctx: PromptContext, budget: int = 5) -> str:
    processed_html = ctx.processed_html or NOT_AVAILABLE
    query_logo = "provided (cropped from the screenshot)" if ctx.logo_present else NOT_AVAILABLE
    screenshot = "provided" if ctx.screenshot_present else NOT_AVAILABLE
    gsearch_detect_res = ctx.logo_detector_output or NOT_AVAILABLE
    gpt4v_res = ctx.vision_output or NOT_AVAILABLE
    times = _NUMBER_WORDS.get(budget, str(budget))

    return (
        "You are an expert assistant with strong reasoning and brand understanding skills. You're able to identify the brands regardless they are commercial, famous, valuable or not. Be truthful and only make claims that are grounded with the provided information. Do not fabricate any fact or make up non-existent content."
        "Given some text fragments and logo images from a webpage, your final goal is to determine the brand from the Google Search and Google Image Search that matches this webpage, or report that no known brand can be found. Please provide the brand name that matches the given text fragments and logo images, or type 'no brand found' if no brand can be found, and provide reasons for every decision you make. In some cases, if the given tools do not provide enough information, you can change the query to get more information. Try to identify which parts of the input are most likely to be brand-related."
        f"You can call any available functions, but only {times} times in total, and once you make decision, you can give output of brand name with reason in json format and terminate. "
        "INPUT: you will be given: Text fragments from the webpage html, possibly brand-related: "
        f"processed_html: {processed_html}, "
        f"Any possible logo image from the webpage: "
        f"logo: {query_logo}, screen_shot: {screenshot}, Output of Google Logo Search "
        f"on the logo image (e.g., a brand name): {gsearch_detect_res}, this is an important information to identify."
        f"Output of ChatGPT-4 Vision on the screenshot and logo: {gpt4v_res}, the brand of the website as the result is reliable for more than 60 percent of the cases. "
        "TOOLS: To search for information about the text fragments and logo images, select from the following tools to query: Google Search (get_google_search_results). Input: text query; Output: search results, you can use this function to gather more information of text fragment as well as google logo detector result. Google Image Search (get_google_img_search_res): Input: text query; Output: image URLs, basic info, snippets, titles and whether they visually match the current webpage's logo image with similarity score. A score that greater than 0.8 is considered to be similar. You can use it to understand the logo images from the webpage. "
        "FINAL OUTPUT FROM YOU: if you decide to stop, you should only have your output in JSON format for your decision based on your evaluation. There should have two keys: brand_name and reason. Find as much information as possible and specify your decision in 'reason'."
        "If you cannot decide for the brand name, specify 'no brand name' in 'brand_name' and state why you cannot decide in 'reason'. No markdown and indention."
        "Some samples of final output from you is provided below:"
        "SAMPLE FINAL OUTPUT FROM YOU: {\"brand_name\": \"Nike\", \"reason\": \"Based on the google search result and google image result, the logo from the webpage is highly similar to Nike's logo.\"}"
    )


def build_one_shot_prompt(page: CondensedPage) -> str:
    processed_html = page.render() or NOT_AVAILABLE
    return (
        "You are an expert in brand recognition and phishing analysis. "
        "Below are text fragments extracted from a webpage's HTML (title, input boxes, buttons and visible text). "
        "Determine the brand this webpage represents and the intent of the page. "
        f"processed_html: {processed_html} "
        "Answer only in JSON format with two keys: brand_name and reason. "
        "If no brand can be identified, specify 'no brand found' in 'brand_name' and explain why in 'reason'. "
        "No markdown and indention."
    )


def tool_schemas():
    """OpenAI function-calling declarations for the two agent tools."""
    query = {
        "type": "object",
        "properties": {"query": {"type": "string", "description": "Text query"}},
        "required": ["query"],
    }
    return [
        {
            "type": "function",
            "function": {
                "name": SEARCH_TOOL,
                "description": "Google Search. Returns titles, snippets and URLs of the top results.",
                "parameters": query,
            },
        },
        {
            "type": "function",
            "function": {
                "name": IMAGE_SEARCH_TOOL,
                "description": (
                    "Google Image Search. Returns thumbnails, sources, snippets and titles, each with a similarity "
                    "score against the webpage's logo (greater than 0.8 means similar)."
                ),
                "parameters": query,
            },
        },
    ]

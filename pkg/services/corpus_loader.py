# services/corpus_loader.py

"""Loads a sample corpus laid out as one directory per sample plus a labels.jsonl file."""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import aiofiles
from pydantic import ValidationError

from models.errors import GEPAgentError, MissingRootError, PreconditionError, UnparseableLabelsError
from models.records import GroundTruth, WebSample, validate_sample

INFO_FILE = "info.txt"
HTML_FILE = "html.txt"
SCREENSHOT_FILE = "shot.png"
LOGO_FILE = "logo.png"
LABELS_FILE = "labels.jsonl"

logger = logging.getLogger(__name__)


async def _read_text(path: Path) -> str:
    async with aiofiles.open(path, "r", encoding="utf-8", errors="replace") as f:
        return await f.read()


async def _read_bytes(path: Path) -> Optional[bytes]:
    if not path.is_file():
        return None
    async with aiofiles.open(path, "rb") as f:
        return await f.read()


async def load_labels(path: Path) -> Dict[str, GroundTruth]:
    """Parse labels.jsonl: one `{"id", "label", "true_brand"?}` object per line."""
    labels: Dict[str, GroundTruth] = {}
    text = await _read_text(path)
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
            labels[str(entry["id"])] = GroundTruth(label=entry["label"], true_brand=entry.get("true_brand"))
        except (json.JSONDecodeError, KeyError, TypeError, ValidationError) as e:
            raise UnparseableLabelsError(f"Bad label at {path}:{line_no}: {e}") from e
    return labels


async def load_sample_dir(directory: Path, label: Optional[GroundTruth] = None) -> WebSample:
    """Read one sample directory: info.txt holds the URL, html.txt the markup, optional shot.png and logo.png."""
    directory = Path(directory)
    info = directory / INFO_FILE
    if not info.is_file():
        raise PreconditionError(f"Sample directory {directory} has no {INFO_FILE}.")
    url = (await _read_text(info)).strip()

    html_path = directory / HTML_FILE
    if html_path.is_file():
        html = await _read_text(html_path)
    else:
        logger.warning(f"Sample {directory.name} has no {HTML_FILE}; continuing with empty html")
        html = ""

    return validate_sample({
        "id": directory.name,
        "url": url,
        "html": html,
        "screenshot": await _read_bytes(directory / SCREENSHOT_FILE),
        "logo_crop": await _read_bytes(directory / LOGO_FILE),
        "label": label,
    })


async def load_corpus(root: Path, labels: Optional[Path] = None) -> Tuple[List[WebSample], Dict[str, str]]:
    """Load every sample directory under `root`, sorted by id.

    Returns the samples and a map of unreadable sample ids to the reason they were skipped.
    Samples without a label are included with `label=None`.
    """
    root = Path(root)
    if not root.is_dir():
        raise MissingRootError(f"Corpus root not found: {root}")
    labels_path = Path(labels) if labels is not None else root / LABELS_FILE
    if labels is not None and not labels_path.is_file():
        raise UnparseableLabelsError(f"Label file not found: {labels_path}")
    truth = await load_labels(labels_path) if labels_path.is_file() else {}

    samples: List[WebSample] = []
    unreadable: Dict[str, str] = {}
    for directory in sorted(p for p in root.iterdir() if p.is_dir()):
        try:
            samples.append(await load_sample_dir(directory, truth.get(directory.name)))
        except (GEPAgentError, OSError, ValidationError) as e:
            logger.warning(f"Skipping unreadable sample {directory.name}: {e}")
            unreadable[directory.name] = str(e)
    logger.info(f"Loaded {len(samples)} samples from {root} ({len(truth)} labels, {len(unreadable)} unreadable)")
    return samples, unreadable

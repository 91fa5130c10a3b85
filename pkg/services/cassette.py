# services/cassette.py

"""JSON-lines record/replay store for remote tool I/O."""

import asyncio
import hashlib
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import aiofiles

from models.errors import CassetteMissError, ConfigurationError


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def normalize_query(query: str) -> str:
    """Collapse surrounding and internal whitespace runs so equivalent queries share a key."""
    return " ".join(query.split())


class Cassette:
    """Maps (tool, key) to a recorded response; replay reads never lock, writes append under one lock."""

    def __init__(self, path: Path, entries: Optional[Dict[Tuple[str, str], Any]] = None):
        self.path = Path(path)
        self.entries: Dict[Tuple[str, str], Any] = dict(entries or {})
        self._write_lock = asyncio.Lock()
        self.logger = logging.getLogger(self.__class__.__name__)

    @property
    def blob_dir(self) -> Path:
        return self.path.with_name(self.path.stem + ".blobs")

    @property
    def scenario_dir(self) -> Path:
        """Where record mode writes the model turns that go with this cassette."""
        return self.path.with_name(self.path.stem + ".scenarios")

    @classmethod
    def load(cls, path: Path, must_exist: bool = True) -> "Cassette":
        path = Path(path)
        if not path.exists():
            if must_exist:
                raise ConfigurationError(f"Cassette not found: {path}")
            return cls(path)

        entries: Dict[Tuple[str, str], Any] = {}
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    entry = json.loads(line)
                    # later lines win, so re-recording a key overrides it
                    entries[(entry["tool"], entry["key"])] = entry["response"]
                except (json.JSONDecodeError, KeyError, TypeError) as e:
                    raise ConfigurationError(f"Malformed cassette entry at {path}:{line_no}: {e}") from e
        cassette = cls(path, entries)
        cassette.logger.info(f"Loaded {len(entries)} cassette entries from {path}")
        return cassette

    def lookup(self, tool: str, key: str) -> Any:
        try:
            return self.entries[(tool, key)]
        except KeyError:
            raise CassetteMissError(tool, key) from None

    async def record(self, tool: str, key: str, response: Any):
        entry = {
            "tool": tool,
            "key": key,
            "response": response,
            "recorded_at": datetime.now(timezone.utc).isoformat(),
        }
        async with self._write_lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            async with aiofiles.open(self.path, "a", encoding="utf-8") as f:
                await f.write(json.dumps(entry, sort_keys=True, ensure_ascii=False) + "\n")
            self.entries[(tool, key)] = response
        self.logger.debug(f"Recorded {tool} entry {key!r}")

    async def write_blob(self, data: bytes) -> str:
        digest = content_hash(data)
        target = self.blob_dir / digest
        async with self._write_lock:
            if not target.exists():
                self.blob_dir.mkdir(parents=True, exist_ok=True)
                async with aiofiles.open(target, "wb") as f:
                    await f.write(data)
        return digest

    async def read_blob(self, digest: str) -> bytes:
        target = self.blob_dir / digest
        if not target.exists():
            raise CassetteMissError("blob", digest)
        async with aiofiles.open(target, "rb") as f:
            return await f.read()

    def status(self) -> Dict[str, Any]:
        return {"path": str(self.path), "entries": len(self.entries), "exists": self.path.exists()}

# agents/tool_registry.py

"""Dispatches the agent's function calls to web search and image search."""

import logging
from typing import Any, Dict, List, Optional

from models.errors import CassetteMissError, GEPAgentError
from services.external_clients import ExternalClients
from services.logo_similarity import LogoSimilarity
from .prompts import IMAGE_SEARCH_TOOL, SEARCH_TOOL, tool_schemas

MAX_QUERY_LENGTH = 256


class ToolRegistry:
    def __init__(self, clients: ExternalClients, similarity: LogoSimilarity, query_logo: Optional[bytes] = None, result_count: int = 10):
        self.clients = clients
        self.similarity = similarity
        self.query_logo = query_logo
        self.result_count = result_count
        self.logger = logging.getLogger(self.__class__.__name__)

    @property
    def names(self) -> List[str]:
        return [SEARCH_TOOL, IMAGE_SEARCH_TOOL]

    def schemas(self) -> List[Dict[str, Any]]:
        return tool_schemas()

    def sanitize_arguments(self, arguments: Dict[str, Any]) -> Dict[str, Any]:
        query = arguments.get("query")
        if not isinstance(query, str):
            return {"query": ""}
        query = query.strip()
        if len(query) > MAX_QUERY_LENGTH:
            self.logger.warning(f"Truncating {len(query)}-character tool query to {MAX_QUERY_LENGTH}")
            query = query[:MAX_QUERY_LENGTH].strip()
        return {"query": query}

    async def dispatch(self, name: str, arguments: Dict[str, Any]) -> Dict[str, Any]:
        """Run one tool call; failures come back as an error payload the model can read."""
        if name not in self.names:
            return {"error": f"unknown function {name!r}; available: {', '.join(self.names)}"}
        query = arguments.get("query", "")
        if not query:
            return {"error": "query must be a non-empty string"}

        self.logger.info(f"Dispatching {name}({query!r})")
        try:
            if name == SEARCH_TOOL:
                return await self._web_search(query)
            return await self._image_search(query)
        except CassetteMissError:
            raise
        except GEPAgentError as e:
            self.logger.warning(f"{name} failed: {e}")
            return {"error": str(e)}

    async def _web_search(self, query: str) -> Dict[str, Any]:
        results = await self.clients.web_search(query, self.result_count)
        return {"results": [result.model_dump() for result in results]}

    async def _image_search(self, query: str) -> Dict[str, Any]:
        results = await self.clients.image_search(query, self.result_count)
        annotated = await self.similarity.annotate_image_results(self.query_logo, results, self.clients.fetch_thumbnail)
        rows = []
        for result, score in annotated:
            row = result.model_dump()
            row["similarity"] = round(score.value, 4) if score is not None else None
            row["similar"] = score.similar if score is not None else None
            rows.append(row)
        return {"results": rows}

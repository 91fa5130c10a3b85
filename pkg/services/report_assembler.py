# services/report_assembler.py

"""Collects evaluation records and the aggregate report, and writes report.json and the markdown tables."""

from pathlib import Path
from typing import Any, Dict, List, Optional
import json
import logging
import os

import aiofiles
import yaml
from jinja2 import Environment, FileSystemLoader

from agents.transcript import AgentTranscript
from models.errors import ConfigurationError
from services.metrics import EvalRecord, EvalReport

REPORT_JSON = "report.json"
REPORT_MD = "report.md"
TRANSCRIPT_DIR = "transcripts"


class ReportAssembler:
    """Renders an EvalReport as JSON and as markdown tables with published reference rows."""

    def __init__(self, include_wall_time: bool = True):
        self.include_wall_time = include_wall_time

        template_dir = os.path.join(os.path.dirname(__file__), '..', 'templates')
        self.template_engine = Environment(loader=FileSystemLoader(template_dir), trim_blocks=True, lstrip_blocks=True)
        self.template_engine.filters['fmt'] = lambda value: f"{value:.4f}"

        self.published = self._load_published_results()
        self.logger = logging.getLogger(self.__class__.__name__)

    def _load_published_results(self) -> Dict[str, Any]:
        """Load published reference rows from YAML file."""
        path = os.path.join(os.path.dirname(__file__), '..', 'config', 'published_results.yaml')
        try:
            with open(path, 'r') as file:
                return yaml.safe_load(file) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigurationError(f"Unreadable published results file {path}: {e}") from e

    def to_json(self, report: EvalReport, records: List[EvalRecord]) -> str:
        """Deterministic JSON: sorted keys, records in sample id order, wall time only when requested."""
        exclude = None if self.include_wall_time else {"wall_time"}
        payload = {
            "report": report.model_dump(mode="json"),
            "records": [r.model_dump(mode="json", exclude=exclude) for r in sorted(records, key=lambda r: r.sample_id)],
        }
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_markdown(self, report: EvalReport, title: str = "Evaluation report") -> str:
        template = self.template_engine.get_template("report.md.j2")
        labeled_phish = report.counts.tp + report.counts.fn
        return template.render(
            title=title,
            report=report,
            labeled_phish=labeled_phish,
            published=self.published,
        )

    def summary_row(self, report: EvalReport) -> str:
        """One-line precision/recall/accuracy/F1 row for stdout."""
        return (
            "| precision | recall | accuracy | f1 |\n"
            "|---|---|---|---|\n"
            f"| {report.precision:.4f} | {report.recall:.4f} | {report.accuracy:.4f} | {report.f1:.4f} |"
        )

    async def write(
        self,
        out_dir: Path,
        report: EvalReport,
        records: List[EvalRecord],
        transcripts: Optional[Dict[str, AgentTranscript]] = None,
    ) -> Dict[str, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        outputs = {"json": out_dir / REPORT_JSON, "markdown": out_dir / REPORT_MD}

        async with aiofiles.open(outputs["json"], "w", encoding="utf-8") as f:
            await f.write(self.to_json(report, records))
        async with aiofiles.open(outputs["markdown"], "w", encoding="utf-8") as f:
            await f.write(self.to_markdown(report))

        if transcripts:
            transcript_dir = out_dir / TRANSCRIPT_DIR
            transcript_dir.mkdir(exist_ok=True)
            for sample_id, transcript in sorted(transcripts.items()):
                async with aiofiles.open(transcript_dir / f"{sample_id}.json", "w", encoding="utf-8") as f:
                    await f.write(transcript.to_json())

        self.logger.info(f"Wrote {outputs['json']} and {outputs['markdown']}")
        return outputs

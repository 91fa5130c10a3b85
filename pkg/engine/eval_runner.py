# engine/eval_runner.py

"""Runs the pipeline over a corpus with bounded concurrency and aggregates the evaluation report."""

import asyncio
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from agents.transcript import AgentTranscript
from models.errors import ConfigurationError
from models.records import WebSample
from services.metrics import EvalRecord, EvalReport, brand_outcome, compute_metrics
from services.report_assembler import ReportAssembler
from .phish_engine import AnalysisResult, PhishEngine


class SampleStatus:
    """Tracks the outcome of one sample in a suite run."""

    def __init__(self, sample_id: str, state: str = "pending", result: Optional[AnalysisResult] = None, error: Optional[str] = None):
        self.sample_id = sample_id
        self.state = state
        self.result = result
        self.error = error


class EvalRunner:
    def __init__(self, engine: PhishEngine, concurrency: int = 4, ablation: bool = False):
        if concurrency < 1:
            raise ConfigurationError(f"Concurrency must be at least 1, got {concurrency}.")
        self.engine = engine
        self.concurrency = concurrency
        self.ablation = ablation
        self.logger = logging.getLogger(self.__class__.__name__)

    async def _run_one(self, sample: WebSample, semaphore: asyncio.Semaphore) -> SampleStatus:
        async with semaphore:
            try:
                result = await self.engine.analyze(sample, ablation=self.ablation)
                return SampleStatus(sample.id, state="completed", result=result)
            except ConfigurationError:
                raise
            except Exception as e:
                self.logger.error(f"Sample {sample.id} errored: {e}")
                return SampleStatus(sample.id, state="errored", error=f"{type(e).__name__}: {e}")

    async def run(self, samples: List[WebSample]) -> Tuple[List[EvalRecord], EvalReport, Dict[str, AgentTranscript]]:
        semaphore = asyncio.Semaphore(self.concurrency)
        ordered = sorted(samples, key=lambda s: s.id)
        statuses = await asyncio.gather(*(self._run_one(sample, semaphore) for sample in ordered))

        records: List[EvalRecord] = []
        transcripts: Dict[str, AgentTranscript] = {}
        errored: Dict[str, str] = {}
        for sample, status in zip(ordered, statuses):
            if status.state != "completed":
                errored[sample.id] = status.error
                continue
            result = status.result
            transcripts[sample.id] = result.transcript
            records.append(EvalRecord(
                sample_id=sample.id,
                verdict=result.verdict,
                classification=result.classification,
                label=sample.label,
                brand_outcome=brand_outcome(result.verdict, sample.label),
                domains_checked=result.domains_checked,
                ablation=result.ablation,
                wall_time=result.wall_time,
            ))

        labeled = [r for r in records if r.label is not None]
        report = compute_metrics(labeled, config=self.engine.config.model_dump(mode="json"))
        report = report.model_copy(update={
            "errored": len(errored),
            "errored_samples": errored,
            "unlabeled": len(records) - len(labeled),
        })
        self.logger.info(
            f"Suite finished: {len(records)} classified, {len(errored)} errored; "
            f"precision {report.precision:.4f} recall {report.recall:.4f}"
        )
        return records, report, transcripts


async def run_suite(
    samples: List[WebSample],
    engine: PhishEngine,
    concurrency: int = 4,
    out_dir: Optional[Path] = None,
    ablation: bool = False,
    include_wall_time: bool = True,
) -> Tuple[List[EvalRecord], EvalReport]:
    """Evaluate every sample and, when `out_dir` is given, write report.json, report.md and transcripts."""
    records, report, transcripts = await EvalRunner(engine, concurrency, ablation).run(samples)
    if out_dir is not None:
        await ReportAssembler(include_wall_time=include_wall_time).write(out_dir, report, records, transcripts)
    return records, report

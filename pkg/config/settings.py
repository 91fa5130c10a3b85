# config/settings.py

"""Run configuration: YAML defaults, overridden by environment variables, overridden by command-line flags."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from models.errors import ConfigurationError
from models.records import CheckerConfig, PipelineConfig, Strategy
from services.external_clients import Credentials, Mode

load_dotenv()

DEFAULT_CONFIG = Path(__file__).parent / "gepagent.yaml"

# flat setting name -> environment variable
ENV_VARS = {
    "mode": "MODE",
    "strategy": "GEPAGENT_STRATEGY",
    "model": "GEPAGENT_MODEL",
    "budget": "GEPAGENT_BUDGET",
    "condenser_budget": "GEPAGENT_CONDENSER_BUDGET",
    "use_logo_detector": "GEPAGENT_USE_LOGO_DETECTOR",
    "use_vision": "GEPAGENT_USE_VISION",
    "list_size": "GEPAGENT_LIST_SIZE",
    "redirect_check": "GEPAGENT_REDIRECT_CHECK",
    "cassette": "GEPAGENT_CASSETTE",
    "scenarios": "GEPAGENT_SCENARIOS",
    "concurrency": "GEPAGENT_CONCURRENCY",
    "out": "GEPAGENT_OUT",
    "log_level": "LOG_LEVEL",
    "host": "GEPAGENT_HOST",
    "port": "GEPAGENT_PORT",
}

_PIPELINE_KEYS = {"strategy", "budget", "condenser_budget", "use_logo_detector", "use_vision"}
_CHECKER_KEYS = {"list_size", "redirect_check"}

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Mode = Mode.REPLAY
    pipeline: PipelineConfig = Field(default_factory=PipelineConfig)
    model: str = "gpt-4-turbo"
    cassette: Optional[Path] = None
    scenarios: Optional[Path] = None
    concurrency: int = Field(default=4, ge=1)
    out: Path = Path("reports")
    log_level: str = "INFO"
    host: str = "127.0.0.1"
    port: int = Field(default=8000, ge=1, le=65535)

    @model_validator(mode="after")
    def _replay_needs_cassette(self):
        if self.mode in (Mode.REPLAY, Mode.RECORD) and self.cassette is None:
            raise ValueError(f"{self.mode.value} mode requires a cassette path.")
        return self

    @property
    def checker(self) -> CheckerConfig:
        return self.pipeline.checker

    @classmethod
    def from_flat(cls, values: Mapping[str, Any]) -> "RunConfig":
        """Build from the flat key space shared by the YAML file, the environment and the flags."""
        values = {k: v for k, v in values.items() if v is not None}
        checker = {"list_size": values.get("list_size", 10), "redirection_check": values.get("redirect_check", False)}
        pipeline = {
            "strategy": values.get("strategy", Strategy.AGENT),
            "agent_budget": values.get("budget", 5),
            "condenser_budget": values.get("condenser_budget", 3000),
            "use_logo_detector": values.get("use_logo_detector", True),
            "use_vision": values.get("use_vision", True),
            "checker": checker,
        }
        rest = {k: v for k, v in values.items() if k not in _PIPELINE_KEYS | _CHECKER_KEYS}
        return cls(pipeline=pipeline, **rest)

    def require_credentials(self, credentials: Optional[Credentials] = None):
        """Live and record mode talk to the real tools; refuse to start without their keys."""
        if self.mode is Mode.REPLAY:
            return
        missing = (credentials or Credentials.from_env()).missing()
        if missing:
            raise ConfigurationError(f"{self.mode.value} mode requires credentials: {', '.join(missing)}")


def load_yaml_defaults(path: Optional[Path] = None) -> Dict[str, Any]:
    config_path = Path(path) if path is not None else DEFAULT_CONFIG
    if not config_path.is_file():
        raise ConfigurationError(f"Config file not found: {config_path}")
    try:
        with open(config_path, "r") as file:
            data = yaml.safe_load(file) or {}
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Unparseable config file {config_path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config file {config_path} must hold a mapping.")
    unknown = set(data) - set(ENV_VARS)
    if unknown:
        raise ConfigurationError(f"Unknown settings in {config_path}: {', '.join(sorted(unknown))}")
    return data


def load_settings(
    overrides: Optional[Mapping[str, Any]] = None,
    config_path: Optional[Path] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """Merge YAML defaults, environment variables and explicit overrides (None means "not given")."""
    environ = os.environ if environ is None else environ
    values = load_yaml_defaults(config_path)
    for key, var in ENV_VARS.items():
        if environ.get(var):
            values[key] = environ[var]
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    try:
        config = RunConfig.from_flat(values)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e
    logger.debug(f"Resolved configuration: {config.model_dump(mode='json')}")
    return config

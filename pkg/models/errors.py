# models/errors.py

"""Exception hierarchy shared by every stage of the pipeline."""


class GEPAgentError(Exception):
    """Root of all pipeline errors."""


class PreconditionError(GEPAgentError, ValueError):
    """A caller violated an operation's precondition."""


class InvalidUrlError(PreconditionError):
    pass


class EmptyIdError(PreconditionError):
    pass


class IpHostError(PreconditionError):
    """The URL host is an IP literal and has no registrable domain."""

    def __init__(self, host: str):
        super().__init__(f"Host is an IP literal: {host}")
        self.host = host


class UnknownSuffixError(PreconditionError):
    """No public suffix matched; `fallback` uses the last label as suffix."""

    def __init__(self, host: str, fallback):
        super().__init__(f"No public suffix matched host: {host}")
        self.host = host
        self.fallback = fallback


class UndecodableImageError(PreconditionError):
    pass


class MalformedOutputError(GEPAgentError, ValueError):
    """Model output that is not a valid verdict JSON object."""


class ToolUnavailableError(GEPAgentError, RuntimeError):
    """A remote tool failed after exhausting its retry budget."""


class SearchUnavailableError(ToolUnavailableError):
    pass


class CassetteMissError(GEPAgentError, LookupError):
    """Replay mode asked for a request that was never recorded."""

    def __init__(self, tool: str, key: str):
        super().__init__(f"No cassette entry for {tool}: {key!r}")
        self.tool = tool
        self.key = key


class GatewayUnavailableError(GEPAgentError, RuntimeError):
    """The model gateway could not produce a reply."""


class ScenarioExhaustedError(GatewayUnavailableError):
    pass


class ConfigurationError(GEPAgentError, ValueError):
    pass


class MissingRootError(ConfigurationError):
    pass


class UnparseableLabelsError(ConfigurationError):
    pass

"""Exception types shared across benchforge modules."""


class BenchforgeError(Exception):
    """Base class for all benchforge errors."""


class ConfigError(BenchforgeError):
    """Invalid or incomplete run configuration."""


class CorpusError(BenchforgeError):
    """Corpus file unreadable or structurally broken beyond per-record skips."""


class GatewayError(BenchforgeError):
    """Base for LLM gateway failures."""


class AuthError(GatewayError):
    """Provider rejected our credentials; retrying is pointless."""


class RateLimitError(GatewayError):
    """Provider rate limit persisted through the whole retry budget."""


class EmptySampleError(GatewayError):
    """Provider returned no usable completion text (refusal or empty choice)."""


class ReplayMissError(GatewayError):
    """Replay-strict mode received a request absent from the transcript."""


class EnvironmentBuildError(BenchforgeError):
    """Dependency environment could not be built (resolution conflict etc.)."""


class InfraError(BenchforgeError):
    """Infrastructure failure (executor unavailable, shim broken) as opposed
    to a content failure of the example under test."""


class CodeParseError(BenchforgeError):
    """Source code failed to parse; carries a best-effort location."""

    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        super().__init__(message)
        self.line = line
        self.offset = offset


class DatasetError(BenchforgeError):
    """Benchmark dataset file missing, malformed, or inconsistent."""


class SlotError(BenchforgeError):
    """Target region markers missing, duplicated, or out of order, or the
    requested function cannot be isolated from its surrounding code."""


class HygieneError(BenchforgeError):
    """A prompt still overlaps held-out test code after repeated masking."""

"""Exception types shared across the toolkit."""


class EdgarTextError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(EdgarTextError):
    """Invalid or missing configuration (CLI exit code 2)."""


class TransportError(EdgarTextError):
    """Network-level failure; retriable."""


class HttpStatusError(TransportError):
    """Non-success HTTP status; 403/404 are treated as permanent."""

    def __init__(self, status: int, url: str):
        super().__init__(f"HTTP {status} for {url}")
        self.status = status
        self.url = url


class DownloadError(EdgarTextError):
    """A fetch failed permanently after `attempts` tries."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(f"{message} (after {attempts} attempt(s))")
        self.attempts = attempts


class ExtractionError(EdgarTextError):
    """A filing could not be split into documents at all."""


class VectorFormatError(EdgarTextError):
    """Malformed word-vector file; carries the offending line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class OutOfVocabularyError(EdgarTextError):
    """Query token is not in the model vocabulary."""


class TrainingError(EdgarTextError):
    """Embedding training aborted (empty vocabulary, non-finite loss)."""

"""Exception types shared across the workbench."""


class RepoError(Exception):
    """Base class for repository access failures."""


class ProviderUnavailable(RepoError):
    """The repository provider could not be reached or answered with a server error."""


class RefNotFound(RepoError):
    """The pinned ref does not exist in the repository."""


class RepoFileNotFound(RepoError):
    """The requested path is not a file in the pinned tree."""


class DecodeError(RepoError):
    """Provider payload was not valid base64 or not valid UTF-8."""


class JavaParseError(Exception):
    """Structural syntax error in Java source."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class EmbeddingBackendError(Exception):
    """The embedding backend failed to produce vectors."""


class EmptyIndexError(Exception):
    """Query issued against an index with no chunks."""


class FormatVersionMismatch(Exception):
    """Persisted index has an unsupported format version."""


class UnknownModel(ValueError):
    """Model id is not in the configured model registry."""


class InvalidSampling(ValueError):
    """Sampling parameters outside their legal ranges."""


class TurnInFlight(Exception):
    """A second message was sent while a turn is still running."""


class ModelEndpointError(Exception):
    """The chat-completions endpoint failed or returned an unusable response."""


class ToolLoopBudgetExceeded(Exception):
    """The model kept issuing tool calls past the per-turn iteration budget."""


class ToolNotFound(Exception):
    """Tool call names a tool absent from the session registry."""


class ToolValidationError(Exception):
    """Tool arguments do not validate against the tool's parameter schema."""


class ToolExecutionError(Exception):
    """Tool dispatch failed; carries a model-readable message."""


class SessionNotFound(Exception):
    """No session with the given id."""


class ScenarioError(Exception):
    """Scenario file is malformed or its turns cannot be satisfied in order."""


class PortInUse(OSError):
    """Requested listen port is already bound."""


class DuplicatePlan(ValueError):
    """Two run plans share (model, sampling, task)."""


class AlreadyExecuted(Exception):
    """The run id has already been executed; re-runs are rejected."""


class UnknownRun(KeyError):
    """Annotation references a run id absent from the run registry."""


class IllegalVariant(ValueError):
    """Case variant attached to a defect category that has no case variants."""

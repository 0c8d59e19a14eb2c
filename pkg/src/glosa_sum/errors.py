"""Exception hierarchy shared by every pipeline stage."""


class GlosaError(Exception):
    """Base class for all errors raised by glosa_sum."""


class InputError(GlosaError):
    """Problem with user-supplied documents or reference files (CLI exit 1)."""


class ConfigError(GlosaError):
    """Invalid configuration value (CLI exit 2)."""


class ProviderError(GlosaError):
    """Embedding provider failure (CLI exit 3)."""


class DocumentIOError(InputError, OSError):
    pass


class EmptyDocument(InputError):
    pass


class MalformedRecord(InputError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class RefusedEmptySummary(GlosaError):
    pass


class CacheMiss(ProviderError):
    def __init__(self, index: int):
        super().__init__(f"no cached embedding for sentence index {index}")
        self.index = index


class HttpFailure(ProviderError):
    def __init__(self, status: int | None, attempts: int, detail: str = ""):
        msg = f"embedding request failed after {attempts} attempt(s)"
        if status is not None:
            msg += f" (last status {status})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.status = status
        self.attempts = attempts


class DimensionMismatch(ProviderError):
    pass


class NodeAbsent(GlosaError, KeyError):
    def __str__(self) -> str:
        return f"node {self.args[0]} is not in the graph"


class TooFewSentences(InputError):
    pass


class InvalidFiltration(GlosaError):
    pass


class EmptyPool(GlosaError):
    pass


class PoolExceedsBudget(GlosaError):
    def __init__(self, pool_size: int, budget: int):
        super().__init__(
            f"protected pool has {pool_size} sentences but the budget is {budget}"
        )
        self.pool_size = pool_size
        self.budget = budget


class EmptyAfterTokenization(InputError):
    pass


class UnmatchedId(InputError):
    def __init__(self, ids, side: str):
        self.ids = sorted(ids)
        super().__init__(f"ids present only in {side}: {', '.join(self.ids)}")

"""Exception types raised by engine operations."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine-raised errors."""


class EmptyDomainError(EngineError):
    def __init__(self, vp: str):
        super().__init__(f"variability point '{vp}' has an empty domain")
        self.vp = vp


class InvalidAssignmentError(EngineError):
    def __init__(self, vp: str, reason: str):
        super().__init__(f"invalid assignment for '{vp}': {reason}")
        self.vp = vp


class MissingDigestError(EngineError):
    def __init__(self, ref: str):
        super().__init__(f"no content digest for input reference '{ref}'")
        self.ref = ref


class MissingInputError(EngineError):
    def __init__(self, ref: str, path: str):
        super().__init__(f"input reference '{ref}' resolves to missing file: {path}")
        self.ref = ref
        self.path = path


class InvalidBudgetError(EngineError):
    def __init__(self, n: int, space: int):
        super().__init__(f"strategy budget n={n} exceeds configuration space of {space}")
        self.n = n
        self.space = space


class EmptyRemainingError(EngineError):
    def __init__(self):
        super().__init__("no remaining configurations to propose")


class NotPositiveDefiniteError(EngineError):
    def __init__(self, jitter: float):
        super().__init__(f"kernel matrix not positive definite (last jitter {jitter:g})")
        self.jitter = jitter


class StaleResponseError(EngineError):
    def __init__(self, prompt_id: str):
        super().__init__(f"prompt '{prompt_id}' is already resolved")
        self.prompt_id = prompt_id


class UnknownConfigError(EngineError):
    def __init__(self, targets: list[int]):
        joined = ", ".join(str(t) for t in targets)
        super().__init__(f"configurations not pending: {joined}")
        self.targets = targets


class UnknownEntityError(EngineError):
    def __init__(self, entity: str):
        super().__init__(f"entity '{entity}' has no embedding")
        self.entity = entity


class EmptyGraphError(EngineError):
    def __init__(self):
        super().__init__("knowledge graph has no triples to train on")


class NoContextError(EngineError):
    def __init__(self):
        super().__init__("no context entity is embedded; cannot recommend")


class SpecInvalidError(EngineError):
    """Raised when an experiment cannot start because its spec failed checks."""

    def __init__(self, issues):
        super().__init__("; ".join(str(i) for i in issues) or "invalid spec")
        self.issues = list(issues)

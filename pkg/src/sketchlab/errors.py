"""Exception types shared across the package."""


class SketchlabError(Exception):
    """Base class for package-specific failures."""


class ProtocolTableError(SketchlabError):
    """A protocol reached a (prefix, bit) pair with no message distribution."""


class TranscriptSpaceError(SketchlabError):
    """Exact enumeration would exceed the configured transcript-space cap."""


class LengthBudgetError(SketchlabError):
    """A bounded-length stream state received more updates than declared."""


class StrictPromiseError(SketchlabError):
    """The strict-turnstile promise was declared but the state contradicts it."""


class InfeasibleInstanceError(SketchlabError):
    """Requested instance parameters cannot be packed into the universe."""

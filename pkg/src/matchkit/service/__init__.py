from .app import create_app
from .edits import EditError, EditOp, apply_edits, canonical_sort
from .sessions import DocumentSession, SessionStore

__all__ = [
    "DocumentSession",
    "EditError",
    "EditOp",
    "SessionStore",
    "apply_edits",
    "canonical_sort",
    "create_app",
]

"""
Run manifest package.

Provides the RunManifest record written alongside every CLI artifact and the
run-id context variable that tags log events of the current run.
"""

from contextvars import ContextVar

from .models import RunManifest, content_hash

# Context variable holding the run id of the current CLI invocation
run_id_ctx: ContextVar[str] = ContextVar("run_id", default="")


def get_run_id() -> str:
    """Get the current run id.

    Returns:
        Current run id or empty string if not set.
    """
    return run_id_ctx.get()


def set_run_id(run_id: str) -> None:
    """Set the run id for the current context.

    Args:
        run_id: Run id to set.
    """
    run_id_ctx.set(run_id)


__all__ = [
    "RunManifest",
    "content_hash",
    "get_run_id",
    "set_run_id",
]

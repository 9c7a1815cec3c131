"""
Run manifest model.

Every artifact the CLI writes is accompanied by a manifest recording how it
was produced, so that a run can be reconstructed from its outputs alone.
"""

import hashlib
from datetime import datetime, timezone
from pathlib import Path
from typing import Any
from uuid import UUID, uuid4

UTC = timezone.utc

from pydantic import BaseModel, Field, field_validator


def content_hash(data: bytes) -> str:
    """Git-style blob hash of raw content (sha1 over 'blob <len>\\0' + data)."""
    header = f"blob {len(data)}\0".encode("ascii")
    return hashlib.sha1(header + data).hexdigest()


class RunManifest(BaseModel):
    """
    Immutable record of one CLI invocation and the artifacts it produced.
    """

    run_id: UUID = Field(default_factory=uuid4, description="Unique run identifier")
    command: str = Field(..., description="CLI subcommand", min_length=1)
    config_path: str | None = Field(default=None, description="Training config file, if any")
    config_hash: str | None = Field(
        default=None, description="Git-style content hash of the config file"
    )
    seed: int | None = Field(default=None, description="Seed used by the run")
    inputs: list[str] = Field(default_factory=list, description="Input paths")
    outputs: list[str] = Field(default_factory=list, description="Output paths")
    arguments: dict[str, Any] = Field(default_factory=dict, description="Parsed CLI flags")
    started_at: datetime = Field(
        default_factory=lambda: datetime.now(UTC), description="Start time in UTC"
    )
    finished_at: datetime | None = Field(default=None, description="End time in UTC")

    @field_validator("command")
    @classmethod
    def validate_command(cls, v: str) -> str:
        """Ensure the command name is not blank."""
        if not v.strip():
            raise ValueError("command cannot be empty")
        return v.strip()

    model_config = {"frozen": True}

    @classmethod
    def for_config(cls, command: str, config_path: str | Path | None, **kwargs: Any) -> "RunManifest":
        """Build a manifest, hashing the config file when one is given."""
        if config_path is None:
            return cls(command=command, **kwargs)
        path = Path(config_path)
        return cls(
            command=command,
            config_path=str(path),
            config_hash=content_hash(path.read_bytes()),
            **kwargs,
        )

    def finished(self, outputs: list[str]) -> "RunManifest":
        """Return a copy stamped with outputs and a finish time."""
        return self.model_copy(
            update={"outputs": outputs, "finished_at": datetime.now(UTC)}
        )

    def write_alongside(self, artifact: str | Path) -> Path:
        """Write the manifest as JSON next to an artifact (<artifact>.manifest.json)."""
        artifact = Path(artifact)
        path = artifact.with_name(artifact.name + ".manifest.json")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        return path

"""Run manifests: config hash, versions, step outcomes and output digests."""
from __future__ import annotations

import datetime as dt
import hashlib
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from .. import __version__, kernels


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    artifact_version: str = __version__
    timestamp: str = field(default_factory=lambda: dt.datetime.now(dt.timezone.utc)
                           .strftime("%Y-%m-%dT%H:%M:%SZ"))
    backend: str = kernels.BACKEND
    versions: dict = field(default_factory=lambda: {
        "python": platform.python_version(), "numpy": np.__version__,
        "scipy": scipy.__version__})
    steps: list = field(default_factory=list)
    digests: dict = field(default_factory=dict)
    runtime_seconds: float | None = None

    def add_outputs(self, run_dir, names) -> None:
        for name in names:
            self.digests[name] = sha256_file(Path(run_dir) / name)

    def to_dict(self) -> dict:
        return asdict(self)

    def write(self, run_dir) -> Path:
        path = Path(run_dir) / "manifest.json"
        path.write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n")
        return path

    @classmethod
    def read(cls, run_dir) -> "RunManifest":
        data = json.loads((Path(run_dir) / "manifest.json").read_text())
        return cls(**data)

    def verify(self, run_dir) -> dict[str, bool]:
        """Recompute digests of the recorded outputs."""
        return {name: sha256_file(Path(run_dir) / name) == d for name, d in self.digests.items()}

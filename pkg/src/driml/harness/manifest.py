"""Run manifests: written before training starts, finalized on exit."""

from __future__ import annotations

import json
import time
from pathlib import Path

from .. import __version__
from ..nn.kernels import BACKEND
from .config import ExperimentConfig, config_hash


class RunManifest:
    def __init__(self, out_dir, cfg: ExperimentConfig):
        self.path = Path(out_dir) / "manifest.json"
        self.data = {
            "config_hash": config_hash(cfg),
            "code_version": __version__,
            "kernel_backend": BACKEND,
            "seed": cfg.seed,
            "preset": cfg.preset,
            "started_at": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
            "finished_at": None,
            "status": "running",
            "artifacts": [],
        }
        self._write()

    def _write(self) -> None:
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=2)
            fh.write("\n")

    def add_artifact(self, name: str) -> None:
        if name not in self.data["artifacts"]:
            self.data["artifacts"].append(name)
        self._write()

    def finalize(self, status: str = "done") -> None:
        self.data["status"] = status
        self.data["finished_at"] = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
        self._write()

"""Prover backends sharing one interface: ``backend.prove(task, timeout)``."""

from __future__ import annotations

import os
import tempfile

from .builtin import builtin_prove
from .external import (DEFAULT_FAILURE, DEFAULT_SUCCESS, E_PROVER, VAMPIRE, BackendConfig,
                       load_backend_configs, parse_szs, run_external)
from .unify import unify
from .verdict import Status, Verdict


class BuiltinBackend:
    name = "builtin"

    def __init__(self, max_clauses: int = 20000):
        self.max_clauses = max_clauses

    def prove(self, task, timeout: float) -> Verdict:
        return builtin_prove(task.premises, task.conjecture, max_clauses=self.max_clauses,
                             max_seconds=timeout, task_name=task.id)


class ExternalBackend:
    def __init__(self, cfg: BackendConfig, workdir: str | None = None):
        self.cfg = cfg
        self.name = cfg.name
        self.workdir = workdir

    def prove(self, task, timeout: float) -> Verdict:
        fd, path = tempfile.mkstemp(prefix=f"{task.id}_", suffix=".p", dir=self.workdir)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(task.to_tptp())
            return run_external(path, self.cfg, timeout)
        finally:
            os.unlink(path)


__all__ = [
    "BackendConfig", "BuiltinBackend", "DEFAULT_FAILURE", "DEFAULT_SUCCESS", "E_PROVER",
    "ExternalBackend", "Status", "VAMPIRE", "Verdict", "builtin_prove", "load_backend_configs",
    "parse_szs", "run_external", "unify",
]

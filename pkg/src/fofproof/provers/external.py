"""External ATPs run as subprocesses, judged by their SZS status line."""

from __future__ import annotations

import os
import re
import shlex
import signal
import subprocess
import time
from dataclasses import dataclass, field

from ..errors import WorkbenchError
from .verdict import Status, Verdict

DEFAULT_SUCCESS = frozenset({"Theorem", "Unsatisfiable"})
DEFAULT_FAILURE = frozenset({"CounterSatisfiable", "Satisfiable"})

_SZS = re.compile(r"^[ \t]*[%#][ \t]*SZS status[ \t]+([A-Za-z]+)", re.M)


@dataclass(frozen=True)
class BackendConfig:
    name: str
    command_template: str
    success_statuses: frozenset = field(default=DEFAULT_SUCCESS)
    failure_statuses: frozenset = field(default=DEFAULT_FAILURE)

    def __post_init__(self):
        if "{file}" not in self.command_template:
            raise WorkbenchError(f"backend {self.name}: command template lacks {{file}}")

    def command(self, task_file: str, timeout: float) -> list[str]:
        return [arg.replace("{file}", task_file).replace("{timeout}", str(max(1, int(timeout))))
                for arg in shlex.split(self.command_template)]


# Documentation defaults; neither prover is required.
E_PROVER = BackendConfig("eprover", "eprover --auto --cpu-limit={timeout} {file}")
VAMPIRE = BackendConfig("vampire", "vampire --mode casc -t {timeout} {file}")


def parse_szs(output: str) -> str | None:
    m = _SZS.search(output)
    return m.group(1) if m else None


def status_for(word: str | None, cfg: BackendConfig) -> Status:
    if word is None:
        return Status.UNKNOWN
    if word in cfg.success_statuses:
        return Status.PROVED
    if word in cfg.failure_statuses:
        return Status.REFUTED
    if word in ("Timeout", "ResourceOut"):
        return Status.TIMEOUT
    return Status.UNKNOWN


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()


def run_external(task_file: str, cfg: BackendConfig, timeout: float) -> Verdict:
    start = time.monotonic()
    argv = cfg.command(task_file, timeout)

    def verdict(status, **kw):
        return Verdict(status, wall_seconds=time.monotonic() - start, backend=cfg.name, **kw)

    try:
        proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
                                start_new_session=True)
    except OSError as exc:
        return verdict(Status.BACKEND_ERROR, note=f"cannot start {argv[0]}: {exc.strerror or exc}")
    try:
        out, err = proc.communicate(timeout=timeout)
    except subprocess.TimeoutExpired:
        # The whole session goes, so grandchildren cannot hold the pipes open.
        _kill_group(proc)
        out, err = proc.communicate()
        return verdict(Status.TIMEOUT, derivation_text=out, note=f"killed after {timeout}s")
    word = parse_szs(out)
    status = status_for(word, cfg)
    note = ""
    if word is None:
        note = f"no SZS status line (exit code {proc.returncode})"
        if err.strip():
            note += ": " + err.strip().splitlines()[-1]
    elif status is not Status.PROVED:
        note = f"SZS status {word}"
    return verdict(status, szs_word=word, derivation_text=out, note=note)


def load_backend_configs(text: str) -> list[BackendConfig]:
    """Parse ``name<TAB>template<TAB>success_words<TAB>failure_words`` lines."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        cols = raw.split("\t")
        if len(cols) < 2:
            raise WorkbenchError(f"backend config line {lineno}: expected tab-separated name and template")
        words = lambda i, default: (frozenset(w for w in re.split(r"[,\s]+", cols[i]) if w)
                                    if len(cols) > i and cols[i].strip() else default)
        out.append(BackendConfig(cols[0].strip(), cols[1].strip(), words(2, DEFAULT_SUCCESS),
                                 words(3, DEFAULT_FAILURE)))
    return out

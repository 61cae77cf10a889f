"""Test runner: provisions pipes, spawns both processes, aggregates a verdict.

For each run the runner creates a fresh FIFO pair under the work directory,
expands the {SW_TO_FW} / {FW_TO_SW} placeholders in both command vectors,
starts the simulator first (matching the channel open order), then the test
process, and redirects stdout+stderr of each to its own log file so a live
``tail -f`` shows progress.  A wall-clock timeout bounds the whole run; on
expiry both processes are killed and the verdict is infra_error.

Verdicts: pass (both exits zero), fail (either process exited nonzero),
infra_error (spawn/FIFO failure or timeout).  Exit codes: 0 / 1 / 2.
"""

from __future__ import annotations

import os
import re
import stat
import subprocess
import time
import uuid
from dataclasses import dataclass, replace
from pathlib import Path

import yaml

from .errors import ManifestError, MissingField, TransportError
from .transport import TransportConfig, create_pipes

__all__ = [
    "VERDICT_PASS",
    "VERDICT_FAIL",
    "VERDICT_INFRA_ERROR",
    "EXIT_BY_VERDICT",
    "PLACEHOLDERS",
    "TestSpec",
    "TestReport",
    "load_manifest",
    "run",
]

VERDICT_PASS = "pass"
VERDICT_FAIL = "fail"
VERDICT_INFRA_ERROR = "infra_error"

EXIT_BY_VERDICT = {VERDICT_PASS: 0, VERDICT_FAIL: 1, VERDICT_INFRA_ERROR: 2}

PLACEHOLDERS = ("{SW_TO_FW}", "{FW_TO_SW}")

_KILL_GRACE_S = 0.5


@dataclass(frozen=True)
class TestSpec:
    """One runnable co-simulation test."""

    __test__ = False  # not a pytest class, despite the name

    name: str
    sim_cmd: tuple[str, ...]
    test_cmd: tuple[str, ...]
    work_dir: Path
    sw_log: Path
    fw_log: Path
    timeout_s: int = 60
    keep_fifos: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sim_cmd", tuple(self.sim_cmd))
        object.__setattr__(self, "test_cmd", tuple(self.test_cmd))
        object.__setattr__(self, "work_dir", Path(self.work_dir))
        object.__setattr__(self, "sw_log", Path(self.sw_log))
        object.__setattr__(self, "fw_log", Path(self.fw_log))
        if not self.sim_cmd or not self.test_cmd:
            raise ManifestError("sim_cmd and test_cmd must be non-empty")
        if self.timeout_s <= 0:
            raise ManifestError("timeout_s must be positive")


@dataclass(frozen=True)
class TestReport:
    """Aggregated outcome; exit fields are None for processes never started."""

    __test__ = False  # not a pytest class, despite the name

    verdict: str
    test_exit: int | None
    sim_exit: int | None
    duration_ms: int
    sw_log: Path
    fw_log: Path
    detail: str = ""

    @property
    def exit_code(self) -> int:
        return EXIT_BY_VERDICT[self.verdict]


def _argv(value, key: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not value:
        raise ManifestError(f"{key} must be a non-empty list of arguments")
    argv = []
    for item in value:
        if isinstance(item, (str, int, float)) and not isinstance(item, bool):
            argv.append(str(item))
        else:
            raise ManifestError(f"{key} entries must be strings, got {item!r}")
    return tuple(argv)


def load_manifest(path: Path | str) -> TestSpec:
    """Parse and validate a manifest file, applying defaults for omitted keys."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ManifestError(f"manifest is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ManifestError("manifest must be a key-value mapping")

    known = {
        "name", "sim_cmd", "test_cmd", "work_dir",
        "sw_log", "fw_log", "timeout_s", "keep_fifos",
    }
    unknown = set(raw) - known
    if unknown:
        raise ManifestError(f"unknown manifest keys: {sorted(unknown)}")
    for field_name in ("name", "sim_cmd", "test_cmd"):
        if field_name not in raw:
            raise MissingField(field_name)

    name = raw["name"]
    if not isinstance(name, str) or not name:
        raise ManifestError("name must be a non-empty string")

    base = path.resolve().parent

    def _path(key: str, default: Path) -> Path:
        if key not in raw:
            return default
        value = raw[key]
        if not isinstance(value, str) or not value:
            raise ManifestError(f"{key} must be a non-empty path string")
        p = Path(value)
        return p if p.is_absolute() else base / p

    work_dir = _path("work_dir", base / f"{name}.work")
    spec = TestSpec(
        name=name,
        sim_cmd=_argv(raw["sim_cmd"], "sim_cmd"),
        test_cmd=_argv(raw["test_cmd"], "test_cmd"),
        work_dir=work_dir,
        sw_log=_path("sw_log", work_dir / "sw.log"),
        fw_log=_path("fw_log", work_dir / "fw.log"),
        timeout_s=_int(raw.get("timeout_s", 60)),
        keep_fifos=_bool(raw.get("keep_fifos", False)),
    )
    _check_placeholders(spec)
    return spec


def _int(value) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ManifestError(f"timeout_s must be an integer, got {value!r}")
    return value


def _bool(value) -> bool:
    if not isinstance(value, bool):
        raise ManifestError(f"keep_fifos must be a boolean, got {value!r}")
    return value


def _check_placeholders(spec: TestSpec) -> None:
    for argv in (spec.sim_cmd, spec.test_cmd):
        for arg in argv:
            for ph in re.findall(r"\{[A-Z_]+\}", arg):
                if ph not in PLACEHOLDERS:
                    raise ManifestError(f"unknown placeholder {ph} in {arg!r}")


def _expand(argv: tuple[str, ...], sw_to_fw: Path, fw_to_sw: Path) -> list[str]:
    return [
        arg.replace("{SW_TO_FW}", str(sw_to_fw)).replace("{FW_TO_SW}", str(fw_to_sw))
        for arg in argv
    ]


def _kill(proc: subprocess.Popen | None) -> None:
    if proc is None or proc.poll() is not None:
        return
    proc.terminate()
    try:
        proc.wait(timeout=_KILL_GRACE_S)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.wait()


def _spawn(argv: list[str], log_path: Path, env: dict) -> subprocess.Popen:
    # The log file is created before the spawn so it exists even on failure;
    # children inherit the fd directly, so flushing is theirs to control.
    # Children keep the runner's working directory, so relative paths in a
    # manifest mean what they would mean at the prompt.
    with open(log_path, "wb") as log_file:
        return subprocess.Popen(
            argv, stdin=subprocess.DEVNULL, stdout=log_file,
            stderr=subprocess.STDOUT, env=env,
        )


def run(spec: TestSpec) -> TestReport:
    """Execute one test spec end to end and return its report."""
    start = time.monotonic()
    token = uuid.uuid4().hex[:8]
    sw_to_fw = spec.work_dir / f"sw_to_fw.{token}"
    fw_to_sw = spec.work_dir / f"fw_to_sw.{token}"
    sim_proc: subprocess.Popen | None = None
    test_proc: subprocess.Popen | None = None
    verdict = VERDICT_INFRA_ERROR
    detail = ""

    try:
        spec.work_dir.mkdir(parents=True, exist_ok=True)
        spec.sw_log.parent.mkdir(parents=True, exist_ok=True)
        spec.fw_log.parent.mkdir(parents=True, exist_ok=True)
        create_pipes(TransportConfig(sw_to_fw, fw_to_sw, timeout_ms=spec.timeout_s * 1000))

        env = dict(os.environ)
        env["PYTHONUNBUFFERED"] = "1"  # keeps child logs line-live for tail -f
        env["COSIM_SW_TO_FW"] = str(sw_to_fw)
        env["COSIM_FW_TO_SW"] = str(fw_to_sw)

        # Simulator first, then the test client, matching the open handshake.
        sim_proc = _spawn(_expand(spec.sim_cmd, sw_to_fw, fw_to_sw), spec.fw_log, env)
        test_proc = _spawn(_expand(spec.test_cmd, sw_to_fw, fw_to_sw), spec.sw_log, env)

        deadline = start + spec.timeout_s
        while True:
            sim_exit = sim_proc.poll()
            test_exit = test_proc.poll()
            if sim_exit is not None and test_exit is not None:
                verdict = VERDICT_PASS if sim_exit == 0 and test_exit == 0 else VERDICT_FAIL
                break
            if time.monotonic() >= deadline:
                detail = f"timeout after {spec.timeout_s} s"
                _kill(sim_proc)
                _kill(test_proc)
                sim_exit = sim_proc.poll()
                test_exit = test_proc.poll()
                # a test that failed on its own before the timeout is still a
                # test failure; only an undecided test makes this infra_error
                if test_exit is not None and test_exit > 0:
                    verdict = VERDICT_FAIL
                    detail = f"test failed; simulator killed at timeout ({spec.timeout_s} s)"
                break
            time.sleep(0.02)
    except (OSError, TransportError, subprocess.SubprocessError) as exc:
        detail = str(exc)
        sim_exit = sim_proc.poll() if sim_proc else None
        test_exit = test_proc.poll() if test_proc else None
    finally:
        _kill(sim_proc)
        _kill(test_proc)
        if not spec.keep_fifos:
            sw_to_fw.unlink(missing_ok=True)
            fw_to_sw.unlink(missing_ok=True)

    return TestReport(
        verdict=verdict,
        test_exit=test_exit,
        sim_exit=sim_exit,
        duration_ms=int((time.monotonic() - start) * 1000),
        sw_log=spec.sw_log,
        fw_log=spec.fw_log,
        detail=detail,
    )


def with_overrides(
    spec: TestSpec,
    *,
    timeout_s: int | None = None,
    keep_fifos: bool | None = None,
    log_dir: Path | None = None,
) -> TestSpec:
    """Apply CLI-level overrides on top of a loaded spec."""
    if timeout_s is not None:
        spec = replace(spec, timeout_s=timeout_s)
    if keep_fifos is not None:
        spec = replace(spec, keep_fifos=keep_fifos)
    if log_dir is not None:
        log_dir = Path(log_dir)
        spec = replace(spec, sw_log=log_dir / "sw.log", fw_log=log_dir / "fw.log")
    return spec


def fifo_leftovers(work_dir: Path) -> list[Path]:
    """List FIFO special files remaining under a work directory."""
    leftovers = []
    if work_dir.is_dir():
        for p in sorted(work_dir.rglob("*")):
            try:
                if stat.S_ISFIFO(p.stat().st_mode):
                    leftovers.append(p)
            except OSError:
                continue
    return leftovers

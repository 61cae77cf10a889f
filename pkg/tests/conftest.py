import threading
from contextlib import contextmanager

import pytest

from cosim.busmodel import serve
from cosim.transport import TransportConfig, create_pipes, open_channel


@pytest.fixture
def pipe_cfg(tmp_path):
    cfg = TransportConfig(tmp_path / "sw_to_fw", tmp_path / "fw_to_sw", timeout_ms=5000)
    create_pipes(cfg)
    return cfg


@contextmanager
def serving(cfg, bus, log=None):
    """Run a serve loop on a background thread; yields a box for its report.

    The client side must close its channel (or quit) before the block ends,
    otherwise the server thread would wait forever for the next command.
    """
    box = {}

    def _run():
        try:
            with open_channel(cfg, "server") as channel:
                box["report"] = serve(channel, bus, log=log)
        except Exception as exc:
            box["error"] = exc

    thread = threading.Thread(target=_run, daemon=True)
    thread.start()
    try:
        yield box
    finally:
        thread.join(timeout=15)
    if thread.is_alive():
        raise RuntimeError("server thread did not finish")
    if "error" in box:
        raise box["error"]

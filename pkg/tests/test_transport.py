import os
import random
import stat
import threading
import time

import pytest

from cosim.errors import PathIsNotFifo, PathMissing, PeerClosed, TransportTimeout
from cosim.transport import TransportConfig, create_pipes, open_channel


def _is_fifo(path):
    return stat.S_ISFIFO(os.stat(path).st_mode)


class TestConfig:
    def test_paths_must_differ(self):
        with pytest.raises(ValueError):
            TransportConfig("/tmp/x", "/tmp/x")

    def test_timeout_positive(self):
        with pytest.raises(ValueError):
            TransportConfig("/tmp/a", "/tmp/b", timeout_ms=0)


class TestCreatePipes:
    def test_creates_both_fifos(self, tmp_path):
        cfg = TransportConfig(tmp_path / "a", tmp_path / "b")
        create_pipes(cfg)
        assert _is_fifo(cfg.sw_to_fw_path) and _is_fifo(cfg.fw_to_sw_path)

    def test_idempotent(self, tmp_path):
        cfg = TransportConfig(tmp_path / "a", tmp_path / "b")
        create_pipes(cfg)
        create_pipes(cfg)
        assert _is_fifo(cfg.sw_to_fw_path)

    def test_creates_parent_dirs(self, tmp_path):
        cfg = TransportConfig(tmp_path / "deep/down/a", tmp_path / "deep/down/b")
        create_pipes(cfg)
        assert _is_fifo(cfg.sw_to_fw_path)

    def test_regular_file_in_the_way(self, tmp_path):
        cfg = TransportConfig(tmp_path / "a", tmp_path / "b")
        (tmp_path / "a").write_text("not a fifo")
        with pytest.raises(PathIsNotFifo):
            create_pipes(cfg)


def _connect_pair(cfg):
    """Open both roles concurrently; returns (client, server) channels."""
    box = {}

    def _server():
        box["server"] = open_channel(cfg, "server")

    t = threading.Thread(target=_server)
    t.start()
    client = open_channel(cfg, "client")
    t.join(timeout=10)
    assert "server" in box
    return client, box["server"]


class TestOpenChannel:
    def test_handshake(self, pipe_cfg):
        client, server = _connect_pair(pipe_cfg)
        client.close()
        server.close()

    def test_client_alone_times_out(self, tmp_path):
        cfg = TransportConfig(tmp_path / "a", tmp_path / "b", timeout_ms=100)
        create_pipes(cfg)
        t0 = time.monotonic()
        with pytest.raises(TransportTimeout):
            open_channel(cfg, "client")
        elapsed = time.monotonic() - t0
        assert 0.05 < elapsed < 1.0

    def test_server_alone_times_out(self, tmp_path):
        cfg = TransportConfig(tmp_path / "a", tmp_path / "b", timeout_ms=100)
        create_pipes(cfg)
        with pytest.raises(TransportTimeout):
            open_channel(cfg, "server")

    def test_missing_paths(self, tmp_path):
        cfg = TransportConfig(tmp_path / "a", tmp_path / "b", timeout_ms=200)
        with pytest.raises(PathMissing):
            open_channel(cfg, "client")
        with pytest.raises(PathMissing):
            open_channel(cfg, "server")

    def test_handshake_never_deadlocks(self, tmp_path):
        # both sides started concurrently, many times, with jittered order
        rng = random.Random(7)
        for i in range(100):
            cfg = TransportConfig(tmp_path / f"s{i}", tmp_path / f"f{i}", timeout_ms=5000)
            create_pipes(cfg)
            channels = {}

            def _open(role, delay):
                time.sleep(delay)
                channels[role] = open_channel(cfg, role)

            threads = [
                threading.Thread(target=_open, args=("server", rng.random() * 0.002)),
                threading.Thread(target=_open, args=("client", rng.random() * 0.002)),
            ]
            for t in threads:
                t.start()
            for t in threads:
                t.join(timeout=10)
            assert set(channels) == {"client", "server"}, f"iteration {i} failed to connect"
            channels["client"].close()
            channels["server"].close()


class TestLines:
    def test_loopback_both_directions(self, pipe_cfg):
        client, server = _connect_pair(pipe_cfg)
        with client, server:
            client.send_line("R 00000000\n")
            assert server.recv_line() == "R 00000000\n"
            server.send_line("D 00000005\n")
            assert client.recv_line() == "D 00000005\n"

    def test_ordered_byte_identical_stream(self, pipe_cfg):
        rng = random.Random(42)
        lines = [f"W {rng.randrange(2**30) * 4:08X} {rng.randrange(2**32):08X}\n" for _ in range(200)]
        client, server = _connect_pair(pipe_cfg)
        received = []

        def _drain():
            for _ in lines:
                received.append(server.recv_line())

        t = threading.Thread(target=_drain)
        t.start()
        with client, server:
            for line in lines:
                client.send_line(line)
            t.join(timeout=10)
        assert received == lines

    def test_split_lines_reassembled(self, pipe_cfg):
        # several lines in one write come out one by one
        client, server = _connect_pair(pipe_cfg)
        with client, server:
            client.send_line("OK\nBYE\nOK\n")
            assert server.recv_line() == "OK\n"
            assert server.recv_line() == "BYE\n"
            assert server.recv_line() == "OK\n"

    def test_recv_timeout(self, pipe_cfg):
        client, server = _connect_pair(pipe_cfg)
        with client, server:
            t0 = time.monotonic()
            with pytest.raises(TransportTimeout):
                client.recv_line(timeout_ms=100)
            assert time.monotonic() - t0 < 1.0

    def test_peer_closed_mid_session(self, pipe_cfg):
        client, server = _connect_pair(pipe_cfg)
        with client:
            server.close()
            with pytest.raises(PeerClosed):
                client.recv_line()

    def test_partial_line_then_close_is_peer_closed(self, pipe_cfg):
        client, server = _connect_pair(pipe_cfg)
        with server:
            os.write(client._write_fd, b"OK")  # no newline
            client.close()
            with pytest.raises(PeerClosed):
                server.recv_line()

    def test_send_requires_newline(self, pipe_cfg):
        client, server = _connect_pair(pipe_cfg)
        with client, server:
            with pytest.raises(ValueError):
                client.send_line("OK")

    def test_send_to_closed_peer(self, pipe_cfg):
        client, server = _connect_pair(pipe_cfg)
        with client:
            server.close()
            with pytest.raises(PeerClosed):
                # first write may land in the pipe buffer; keep pushing
                for _ in range(100):
                    client.send_line("OK\n")

"""Command line entry points: the ``cosim`` tool and the ``cosim-stub`` simulator.

``cosim run <manifest>`` orchestrates a full co-simulation (exit 0 pass,
1 fail, 2 infrastructure error), ``cosim regmap`` renders a register
description to its flat address listing, and ``cosim stub`` / ``cosim-stub``
runs the software bus model as the simulator process.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .busmodel import AdderDevice, Bus, RegisterBank, serve
from .errors import CosimError, RegmapError, TransportError
from .regmap import allocate, parse_description
from .runner import EXIT_BY_VERDICT, load_manifest, run, with_overrides
from .transport import TransportConfig, open_channel

__all__ = ["main", "stub_main"]


def _add_stub_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sw-to-fw", required=True, metavar="PATH",
                        help="FIFO carrying commands from the software side")
    parser.add_argument("--fw-to-sw", required=True, metavar="PATH",
                        help="FIFO carrying responses back to the software side")
    parser.add_argument("--map", metavar="FILE",
                        help="register description file; attaches a register bank at 0")
    parser.add_argument("--device", action="append", default=[], metavar="NAME@HEXBASE",
                        help="attach a built-in device, e.g. adder@0")
    parser.add_argument("--log", metavar="FILE",
                        help="write the transaction log here instead of stderr")
    parser.add_argument("--timeout-ms", type=int, default=10_000,
                        help="connect timeout in milliseconds (default 10000)")


def _build_bus(args) -> Bus:
    bus = Bus()
    if args.map:
        regmap = allocate(parse_description(Path(args.map).read_text()))
        bus.attach(0, regmap.root.span, RegisterBank(regmap))
    for devspec in args.device:
        name, sep, base_str = devspec.partition("@")
        if not sep:
            raise CosimError(f"device spec {devspec!r} must look like adder@0")
        try:
            base = int(base_str, 16)
        except ValueError:
            raise CosimError(f"bad device base address {base_str!r}") from None
        if name == "adder":
            bus.attach(base, AdderDevice.SPAN, AdderDevice())
        else:
            raise CosimError(f"unknown device {name!r}")
    return bus


def _run_stub(args) -> int:
    try:
        bus = _build_bus(args)
    except (CosimError, OSError) as exc:
        print(f"cosim-stub: {exc}", file=sys.stderr)
        return 2
    cfg = TransportConfig(args.sw_to_fw, args.fw_to_sw, timeout_ms=args.timeout_ms)
    log = open(args.log, "w", buffering=1) if args.log else sys.stderr
    try:
        try:
            channel = open_channel(cfg, "server")
        except TransportError as exc:
            print(f"cosim-stub: {exc}", file=sys.stderr)
            return 1
        with channel:
            report = serve(channel, bus, log=log)
        log.write(
            f"{bus.sim_time_ns} -- served {report.commands} command(s), "
            f"{report.errors} error(s), quit={report.quit_received}\n"
        )
        return 0 if report.quit_received else 1
    finally:
        if log is not sys.stderr:
            log.close()


def stub_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cosim-stub",
        description="Software bus model that serves the co-simulation protocol.",
    )
    _add_stub_args(parser)
    return _run_stub(parser.parse_args(argv))


def _cmd_run(args) -> int:
    try:
        spec = load_manifest(args.manifest)
        spec = with_overrides(
            spec,
            timeout_s=args.timeout,
            keep_fifos=True if args.keep_fifos else None,
            log_dir=Path(args.log_dir) if args.log_dir else None,
        )
    except CosimError as exc:
        print(f"cosim run: {exc}", file=sys.stderr)
        return EXIT_BY_VERDICT["infra_error"]
    report = run(spec)
    note = f" ({report.detail})" if report.detail else ""
    print(
        f"{spec.name}: {report.verdict}{note} "
        f"[test_exit={report.test_exit} sim_exit={report.sim_exit} {report.duration_ms} ms]"
    )
    print(f"logs: sw={report.sw_log} fw={report.fw_log}")
    return report.exit_code


def _cmd_regmap(args) -> int:
    try:
        text = Path(args.description).read_text()
        listing = allocate(parse_description(text)).emit()
    except (RegmapError, OSError) as exc:
        print(f"cosim regmap: {exc}", file=sys.stderr)
        return 2
    if args.output:
        Path(args.output).write_text(listing)
    else:
        sys.stdout.write(listing)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cosim",
        description="Bus-level software/firmware co-simulation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one co-simulation test from a manifest")
    p_run.add_argument("manifest", help="YAML manifest describing the test")
    p_run.add_argument("--timeout", type=int, default=None, metavar="N",
                       help="override timeout_s from the manifest")
    p_run.add_argument("--keep-fifos", action="store_true",
                       help="leave the FIFO pair behind for debugging")
    p_run.add_argument("--log-dir", default=None, metavar="D",
                       help="redirect both log files into this directory")

    p_map = sub.add_parser("regmap", help="allocate a register map and print the listing")
    p_map.add_argument("description", help="register description file")
    p_map.add_argument("-o", "--output", default=None, help="write the listing here")

    p_stub = sub.add_parser("stub", help="run the software bus model (same as cosim-stub)")
    _add_stub_args(p_stub)

    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "regmap":
        return _cmd_regmap(args)
    return _run_stub(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

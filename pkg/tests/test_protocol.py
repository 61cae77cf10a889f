import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cosim.errors import MalformedCommand, MalformedResponse
from cosim.protocol import (
    AdvanceTime,
    BlockRead,
    BlockWrite,
    Bye,
    Data,
    Err,
    Ok,
    Quit,
    Read,
    Write,
    encode_command,
    encode_response,
    parse_command,
    parse_response,
)

aligned_addrs = st.integers(0, 2**30 - 1).map(lambda w: w * 4)
u32 = st.integers(0, 2**32 - 1)
u64 = st.integers(0, 2**64 - 1)
word_lists = st.lists(u32, min_size=1, max_size=16).map(tuple)

commands = st.one_of(
    st.builds(Write, aligned_addrs, u32),
    st.builds(Read, aligned_addrs),
    st.builds(BlockWrite, aligned_addrs, word_lists),
    st.builds(BlockRead, aligned_addrs, st.integers(1, 2**32 - 1)),
    st.builds(AdvanceTime, u64),
    st.just(Quit()),
)

responses = st.one_of(
    st.just(Ok()),
    st.builds(Data, word_lists),
    st.builds(Err, st.sampled_from([1, 2, 3])),
    st.just(Bye()),
)


class TestEncodeCommand:
    def test_write(self):
        assert encode_command(Write(0x4, 0x7)) == "W 00000004 00000007\n"

    def test_advance_time(self):
        assert encode_command(AdvanceTime(100)) == "T 0000000000000064\n"

    def test_block_read(self):
        assert encode_command(BlockRead(0x10, 2)) == "BR 00000010 00000002\n"

    def test_block_write(self):
        assert encode_command(BlockWrite(0x0, (2, 3))) == "BW 00000000 00000002 00000002 00000003\n"

    def test_quit(self):
        assert encode_command(Quit()) == "Q\n"


class TestParseCommand:
    def test_read(self):
        assert parse_command("R 00000008\n") == Read(addr=0x8)

    def test_unaligned_address_rejected(self):
        with pytest.raises(MalformedCommand):
            parse_command("W 00000003 00000001\n")

    def test_unknown_opcode_rejected(self):
        with pytest.raises(MalformedCommand):
            parse_command("X 00\n")

    def test_tolerates_repeated_spaces(self):
        assert parse_command("W  00000004   00000007\n") == Write(0x4, 0x7)

    def test_tolerates_missing_newline(self):
        assert parse_command("R 00000008") == Read(0x8)

    def test_lowercase_hex_rejected(self):
        with pytest.raises(MalformedCommand):
            parse_command("R 0000000c\n")

    def test_hex_prefix_trick_rejected(self):
        # int() would accept "0X.." as prefixed hex; the grammar must not
        with pytest.raises(MalformedCommand):
            parse_command("R 0X000004\n")

    def test_wrong_field_width_rejected(self):
        for line in ("R 0000008\n", "R 000000080\n", "T 00000064\n"):
            with pytest.raises(MalformedCommand):
                parse_command(line)

    def test_wrong_field_count_rejected(self):
        for line in ("W 00000004\n", "R\n", "Q 00000000\n", "BR 00000000\n"):
            with pytest.raises(MalformedCommand):
                parse_command(line)

    def test_block_write_length_mismatch_rejected(self):
        with pytest.raises(MalformedCommand):
            parse_command("BW 00000000 00000002 00000001\n")

    def test_zero_count_rejected(self):
        with pytest.raises(MalformedCommand):
            parse_command("BR 00000000 00000000\n")
        with pytest.raises(MalformedCommand):
            parse_command("BW 00000000 00000000\n")

    def test_bad_characters_rejected(self):
        for line in ("garbage\n", "\n", "R\t00000000\n", "W 00000004 0000-007\n"):
            with pytest.raises(MalformedCommand):
                parse_command(line)


class TestResponses:
    def test_encode_data(self):
        assert encode_response(Data((5,))) == "D 00000005\n"

    def test_parse_err(self):
        assert parse_response("ERR 00000001\n") == Err(code=1)

    def test_empty_data_rejected(self):
        with pytest.raises(MalformedResponse):
            parse_response("D\n")

    def test_ok_bye(self):
        assert parse_response("OK\n") == Ok()
        assert parse_response("BYE\n") == Bye()

    def test_unknown_error_code_rejected(self):
        with pytest.raises(MalformedResponse):
            parse_response("ERR 00000063\n")

    def test_trailing_fields_rejected(self):
        for line in ("OK 00000000\n", "BYE X\n"):
            with pytest.raises(MalformedResponse):
                parse_response(line)


class TestConstruction:
    def test_unaligned_write_rejected(self):
        with pytest.raises(ValueError):
            Write(0x3, 1)

    def test_data_range_checked(self):
        with pytest.raises(ValueError):
            Write(0x0, 2**32)

    def test_empty_block_write_rejected(self):
        with pytest.raises(ValueError):
            BlockWrite(0x0, ())

    def test_zero_block_read_rejected(self):
        with pytest.raises(ValueError):
            BlockRead(0x0, 0)

    def test_time_range_checked(self):
        with pytest.raises(ValueError):
            AdvanceTime(-1)
        with pytest.raises(ValueError):
            AdvanceTime(2**64)

    def test_empty_data_response_rejected(self):
        with pytest.raises(ValueError):
            Data(())

    def test_unknown_err_code_rejected(self):
        with pytest.raises(ValueError):
            Err(7)


_LINE_RE = re.compile(r"[A-Z]+( [0-9A-F]+)*\n\Z")


class TestRoundTrip:
    @given(commands)
    def test_command_round_trip(self, cmd):
        assert parse_command(encode_command(cmd)) == cmd

    @given(responses)
    def test_response_round_trip(self, resp):
        assert parse_response(encode_response(resp)) == resp

    @given(commands)
    def test_command_grammar(self, cmd):
        line = encode_command(cmd)
        assert _LINE_RE.fullmatch(line)
        assert set(line) <= set("ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 \n")

    @given(responses)
    def test_response_grammar(self, resp):
        assert _LINE_RE.fullmatch(encode_response(resp))

    @given(st.text(max_size=60))
    def test_parser_never_accepts_invalid_values(self, text):
        # any input either fails cleanly or yields a command that round-trips,
        # i.e. one that satisfies every construction invariant
        try:
            cmd = parse_command(text)
        except MalformedCommand:
            return
        assert parse_command(encode_command(cmd)) == cmd

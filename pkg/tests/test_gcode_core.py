import pytest
from hypothesis import given, strategies as st

from gcodegen.core import (
    DEFAULT_REGISTRY,
    CommandRegistry,
    format_number,
    is_recognized,
    parse_program,
    serialize,
    tokenize_line,
)


def words_of(block):
    return [(w.letter, w.value) for w in block.words]


class TestTokenizeLine:
    def test_plain_words(self):
        block = tokenize_line("G01 X10.5 Y-3 F100", 1)
        assert words_of(block) == [("G", 1.0), ("X", 10.5), ("Y", -3.0), ("F", 100.0)]
        assert block.comment is None
        assert block.lex_errors == []

    def test_comment_stripping(self):
        block = tokenize_line("(face mill) G00 Z5 ; retract", 1)
        assert words_of(block) == [("G", 0.0), ("Z", 5.0)]
        assert "face mill" in block.comment and "retract" in block.comment

    def test_leading_zero_raw_preserved(self):
        block = tokenize_line("G022 X5", 1)
        assert block.lex_errors == []
        assert block.words[0].raw == "G022"
        assert block.words[0].value == 22.0

    def test_dangling_letter(self):
        block = tokenize_line("G01 X", 1)
        assert words_of(block) == [("G", 1.0)]
        assert len(block.lex_errors) == 1

    def test_bare_number(self):
        block = tokenize_line("99", 3)
        assert block.words == []
        assert len(block.lex_errors) == 1

    def test_packed_words(self):
        block = tokenize_line("G01X10.5Y-3", 1)
        assert words_of(block) == [("G", 1.0), ("X", 10.5), ("Y", -3.0)]

    def test_lowercase_normalized(self):
        block = tokenize_line("g1 x5", 1)
        assert block.words[0].letter == "G"
        assert block.words[0].raw == "G1"

    def test_unclosed_paren_is_comment(self):
        block = tokenize_line("G1 X5 (unclosed", 1)
        assert words_of(block) == [("G", 1.0), ("X", 5.0)]
        assert block.comment == "unclosed"

    @given(st.text(max_size=80))
    def test_lexing_is_total(self, text):
        line = text.replace("\n", " ").replace("\r", " ")
        block = tokenize_line(line, 1)
        assert block.line_no == 1  # never raises


class TestParseProgram:
    def test_empty_input(self):
        program = parse_program("")
        assert [b for b in program.blocks if not b.is_empty()] == []

    def test_three_line_preamble(self):
        program = parse_program("G21\nG90\nG00 X0 Y0")
        assert len(program.blocks) == 3
        assert [len(b.words) for b in program.blocks] == [1, 1, 3]

    def test_fixture_block_count_matches_line_count(self, square_gcode):
        lines = square_gcode.splitlines()
        assert len(lines) == 19
        program = parse_program(square_gcode)
        assert len(program.blocks) == 19

    def test_blank_lines_kept(self):
        program = parse_program("G21\n\nG90")
        assert len(program.blocks) == 3
        assert program.blocks[1].is_empty()


class TestSerialize:
    def test_normalization(self):
        assert serialize(parse_program("g1 x10.50")) == "G1 X10.5"

    def test_empty_program(self):
        assert serialize(parse_program("")) == ""

    def test_comments_reemitted(self):
        out = serialize(parse_program("G1 X5 (plunge)"))
        assert out == "G1 X5 ; plunge"

    def test_roundtrip_fixpoint_on_fixtures(self, square_gcode):
        for source in (square_gcode, "G21\nG90\nG00 X0 Y0", "g2 x1 y1 i0.5 j0.50"):
            once = parse_program(serialize(parse_program(source)))
            twice = parse_program(serialize(once))
            assert once == twice

    @given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
    def test_format_number_reparses(self, value):
        text = format_number(value)
        assert "e" not in text and "E" not in text
        assert abs(float(text) - value) < 1e-6 + 1e-9 * abs(value)


class TestRegistry:
    def test_recognized_examples(self):
        g02 = tokenize_line("G02", 1).words[0]
        g022 = tokenize_line("G022", 1).words[0]
        m30 = tokenize_line("M30", 1).words[0]
        assert is_recognized(DEFAULT_REGISTRY, g02)
        assert not is_recognized(DEFAULT_REGISTRY, g022)
        assert is_recognized(DEFAULT_REGISTRY, m30)

    def test_case_and_padding_equivalence(self):
        for text in ("G2", "g2", "G02"):
            word = tokenize_line(text, 1).words[0]
            assert is_recognized(DEFAULT_REGISTRY, word), text
        assert not is_recognized(DEFAULT_REGISTRY, tokenize_line("G022", 1).words[0])

    def test_minimum_command_set_present(self):
        required_g = [0, 1, 2, 3, 17, 20, 21, 28, 40, 41, 42, 43, 54, 80, 81, 83, 90, 91, 92]
        required_m = [0, 2, 3, 4, 5, 6, 8, 9, 30]
        for code in required_g:
            assert DEFAULT_REGISTRY.contains("G", code), f"G{code}"
        for code in required_m:
            assert DEFAULT_REGISTRY.contains("M", code), f"M{code}"

    def test_fractional_code_not_recognized(self):
        word = tokenize_line("G38.2", 1).words[0]
        assert not is_recognized(DEFAULT_REGISTRY, word)

    def test_registry_from_file(self, tmp_path):
        path = tmp_path / "registry.json"
        path.write_text('{"G1": "move", "M30": "end"}')
        registry = CommandRegistry.from_file(str(path))
        assert registry.contains("G", 1)
        assert registry.contains("M", 30)
        assert not registry.contains("G", 0)

    def test_registry_bad_key(self, tmp_path):
        path = tmp_path / "registry.json"
        path.write_text('{"nonsense": "x"}')
        with pytest.raises(ValueError):
            CommandRegistry.from_file(str(path))

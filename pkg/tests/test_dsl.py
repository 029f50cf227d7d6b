from pathlib import Path

import numpy as np
import pytest

from fockfuse.circuits import build_fission_circuit, build_fusion_circuit, run_circuit
from fockfuse.dsl import ParseError, load_named_circuit, parse_circuit, serialize_circuit
from fockfuse.elements import Hwp
from fockfuse.states import fidelity

DATA = Path(__file__).parent / "data"

BAD_FILES = {
    "bad_arity.lop": (4, "argument"),
    "bad_unknown_directive.lop": (2, "unknown directive"),
    "bad_undeclared_mode.lop": (2, "undeclared mode"),
    "bad_angle.lop": (2, "angle"),
    "bad_reuse_after_unfold.lop": (6, "unfolded"),
}


def random_qubit(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return (complex(v[0]), complex(v[1]))


class TestParsing:
    def test_single_element_line(self):
        circuit = parse_circuit("mode a\nhwp a 22.5\n")
        assert circuit.elements == (Hwp("a", 22.5),)

    def test_comments_and_blank_lines_ignored(self):
        circuit = parse_circuit("# header\n\nmode a  # trailing\nhwp a 10\n")
        assert circuit.modes == ("a",)

    def test_shipped_fusion_matches_builder(self):
        assert load_named_circuit("fusion") == build_fusion_circuit()

    def test_shipped_fission_matches_builder(self):
        assert load_named_circuit("fission") == build_fission_circuit()

    def test_detect_group_syntax(self):
        circuit = parse_circuit("mode a\nmode b\nphoton a H\ndetect a+b any\n")
        (pattern,) = circuit.patterns
        ((group, req),) = pattern.requirements
        assert group == frozenset({"a", "b"}) and req == "any"


class TestBehavioralEquality:
    def test_fusion_outcomes_match(self):
        rng = np.random.default_rng(61)
        parsed = load_named_circuit("fusion")
        built = build_fusion_circuit()
        for _ in range(10):
            bindings = {"psi": random_qubit(rng), "phi": random_qubit(rng)}
            for got, want in zip(
                run_circuit(parsed, bindings=bindings),
                run_circuit(built, bindings=bindings),
            ):
                assert abs(got.probability - want.probability) <= 1e-12
                assert fidelity(got.state, want.state) >= 1.0 - 1e-12

    def test_fission_outcomes_match(self):
        rng = np.random.default_rng(62)
        parsed = load_named_circuit("fission")
        built = build_fission_circuit()
        for _ in range(10):
            v = rng.normal(size=4) + 1j * rng.normal(size=4)
            bindings = {"input": tuple(v / np.linalg.norm(v))}
            for got, want in zip(
                run_circuit(parsed, bindings=bindings),
                run_circuit(built, bindings=bindings),
            ):
                assert abs(got.probability - want.probability) <= 1e-12
                assert fidelity(got.state, want.state) >= 1.0 - 1e-12


class TestSerialization:
    @pytest.mark.parametrize("builder", [build_fusion_circuit, build_fission_circuit])
    def test_round_trip(self, builder):
        circuit = builder()
        assert parse_circuit(serialize_circuit(circuit)) == circuit


class TestErrors:
    @pytest.mark.parametrize("name,expected", sorted(BAD_FILES.items()))
    def test_malformed_files_report_positions(self, name, expected):
        line, needle = expected
        with pytest.raises(ParseError) as excinfo:
            parse_circuit((DATA / name).read_text())
        err = excinfo.value
        assert err.line == line
        assert err.column >= 1
        assert needle in str(err)

    def test_arity_error_inline(self):
        with pytest.raises(ParseError) as excinfo:
            parse_circuit("mode a\nmode c\npbs a c a\n")
        assert excinfo.value.line == 3

    def test_duplicate_mode(self):
        with pytest.raises(ParseError, match="declared twice"):
            parse_circuit("mode a\nmode a\n")

    def test_bad_polarization(self):
        with pytest.raises(ParseError, match="polarization"):
            parse_circuit("mode a\nphoton a X\n")

    def test_detect_requires_pairs(self):
        with pytest.raises(ParseError):
            parse_circuit("mode a\ndetect a\n")

    def test_positions_are_columns(self):
        with pytest.raises(ParseError) as excinfo:
            parse_circuit("mode a\nhwp a nope\n")
        assert excinfo.value.column == 7  # points at the angle token

import json
import os

import numpy as np
import pytest

from avwc.cli import main
from avwc.codefile import parse_code, parse_random_code, serialize_code, serialize_random_code
from avwc.specfile import load_spec, parse_spec, serialize_spec
from avwc.errors import SpecFormatError

SAMPLES = os.path.join(os.path.dirname(__file__), "..", "sample_specs")


def sample(name):
    return os.path.join(SAMPLES, name)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSpecFile:
    def test_parse_sample(self):
        spec = load_spec(sample("degraded_pair.avwc"))
        assert spec.avwc.state_count == 2
        assert spec.state_names == ("calm", "jam")
        assert spec.avwc.main[1].rows[0, 1] == pytest.approx(0.15)

    def test_round_trip(self):
        spec = load_spec(sample("adder.avwc"))
        again = parse_spec(serialize_spec(spec))
        for a, b in zip(spec.avwc.main, again.avwc.main):
            assert np.array_equal(a.rows, b.rows)
        for a, b in zip(spec.avwc.eaves, again.avwc.eaves):
            assert np.array_equal(a.rows, b.rows)

    def test_bad_row_sum_names_the_row(self):
        text = (
            "avwc 1\nstates 1\ninputs 2\noutputs main 2\noutputs eaves 2\n"
            "main 0\n0.9 0.11\n0.1 0.9\neaves 0\n0.5 0.5\n0.5 0.5\n"
        )
        with pytest.raises(SpecFormatError, match="row 0 sums"):
            parse_spec(text)

    def test_duplicate_state_names_rejected(self):
        text = "avwc 1\nstates 2 names a a\ninputs 2\noutputs main 2\noutputs eaves 2\n"
        with pytest.raises(SpecFormatError, match="duplicate state names"):
            parse_spec(text)

    def test_missing_matrix_rejected(self):
        text = (
            "avwc 1\nstates 2\ninputs 2\noutputs main 2\noutputs eaves 2\n"
            "main 0\n1 0\n0 1\nmain 1\n1 0\n0 1\neaves 0\n0.5 0.5\n0.5 0.5\n"
        )
        with pytest.raises(SpecFormatError, match="missing eaves"):
            parse_spec(text)

    def test_parse_error_carries_line_number(self):
        text = "avwc 1\nstates 1\ninputs 2\noutputs main 2\noutputs eaves 2\nmain 0\n0.9 oops\n"
        with pytest.raises(SpecFormatError) as err:
            parse_spec(text)
        assert err.value.line == 7


class TestCodeFile:
    def test_code_round_trip(self):
        from avwc.coding import WiretapCode

        code = WiretapCode(
            n=2,
            input_size=2,
            output_size=2,
            codewords=np.array([[[0, 1], [1, 1]], [[1, 0], [0, 0]]]),
            decoder=np.array([0, -1, 1, 0]),
        )
        again = parse_code(serialize_code(code))
        assert np.array_equal(code.codewords, again.codewords)
        assert np.array_equal(code.decoder, again.decoder)

    def test_random_code_round_trip(self):
        from avwc.channels import Distribution
        from avwc.coding import RandomCode, WiretapCode

        member = WiretapCode(
            n=1,
            input_size=2,
            output_size=2,
            codewords=np.array([[[0]], [[1]]]),
            decoder=np.array([0, 1]),
        )
        rc = RandomCode(members=[member, member], mu=Distribution.uniform(2), origin="reduced")
        again = parse_random_code(serialize_random_code(rc))
        assert again.origin == "reduced"
        assert again.member_count() == 2
        assert np.array_equal(again.members[0].codewords, member.codewords)


class TestCommands:
    def test_structure_adder(self, capsys):
        code, out, err = run(capsys, "structure", sample("adder.avwc"), "--format", "json")
        assert code == 0
        report = json.loads(out)
        assert report["results"]["symmetrisability"]["symmetrisable"] is True
        assert report["results"]["best_eavesdropper_channel"]["exists"] is True

    def test_structure_single_state_best_channel(self, capsys):
        code, out, _ = run(capsys, "structure", sample("single_bsc.avwc"), "--format", "json")
        assert code == 0
        block = json.loads(out)["results"]["best_eavesdropper_channel"]
        assert block["exists"] is True
        assert block["q_star"] == [1.0]

    def test_bounds_degraded_instance(self, capsys):
        code, out, _ = run(
            capsys,
            "bounds",
            sample("degraded_pair.avwc"),
            "--starts",
            "6",
            "--format",
            "json",
        )
        assert code == 0
        results = json.loads(out)["results"]
        lower = results["secrecy_lower_bound"]["value_bits_per_use"]
        upper = results["secrecy_upper_bound_single_letter"]["value_bits_per_use"]
        assert abs(upper - lower) <= 5e-3
        assert results["gap_upper_minus_lower"] == pytest.approx(upper - lower)

    def test_bounds_deterministic_results_block(self, capsys):
        argv = ("bounds", sample("single_bsc.avwc"), "--starts", "4", "--seed", "11", "--format", "json")
        _, out1, _ = run(capsys, *argv)
        _, out2, _ = run(capsys, *argv)
        first = json.dumps(json.loads(out1)["results"], sort_keys=True)
        second = json.dumps(json.loads(out2)["results"], sort_keys=True)
        assert first == second

    def test_parse_error_exit_code(self, capsys, tmp_path):
        bad = tmp_path / "bad.avwc"
        bad.write_text("avwc 1\nstates 1\ninputs 2\noutputs main 2\noutputs eaves 2\nmain 0\n0.9 0.2\n0.1 0.9\neaves 0\n.5 .5\n.5 .5\n")
        code, _, err = run(capsys, "structure", str(bad))
        assert code == 2
        assert "row 0" in err

    def test_resource_limit_exit_code(self, capsys, monkeypatch):
        monkeypatch.setenv("AVWC_ENUM_CAP", "10")
        code, _, err = run(capsys, "code", sample("single_bsc.avwc"), "verify-lemmas", "--n", "6")
        assert code == 3
        assert "cap" in err

    def test_code_build_evaluate_chain(self, capsys, tmp_path):
        code_path = tmp_path / "code.txt"
        code, out, err = run(
            capsys,
            "code",
            sample("degraded_pair.avwc"),
            "build",
            "--n", "4", "--tau", "0.05", "--delta", "0.3", "--seed", "6",
            "--out", str(code_path), "--format", "json",
        )
        assert code == 0
        assert "size estimate" in err
        built = json.loads(out)["results"]
        assert built["message_count"] >= 1
        assert code_path.exists()

        code, out, _ = run(
            capsys,
            "code",
            sample("degraded_pair.avwc"),
            "evaluate",
            "--code", str(code_path), "--format", "json",
        )
        assert code == 0
        results = json.loads(out)["results"]
        assert 0.0 <= results["worst_state_error"] <= 1.0
        assert results["worst_leakage_bits"] >= 0.0

    def test_reduce_and_eliminate_chain(self, capsys, tmp_path):
        code_path = tmp_path / "code.txt"
        reduced_path = tmp_path / "reduced.txt"
        run(
            capsys,
            "code", sample("degraded_pair.avwc"), "build",
            "--n", "4", "--tau", "0.05", "--delta", "0.3", "--seed", "6",
            "--out", str(code_path),
        )
        code, out, _ = run(
            capsys,
            "code", sample("degraded_pair.avwc"), "reduce",
            "--code", str(code_path), "--k", "8", "--epsilon", "0.4", "--seed", "5",
            "--out", str(reduced_path), "--format", "json",
        )
        assert code == 0
        assert json.loads(out)["results"]["worst_mean_error"] <= 0.4
        code, out, _ = run(
            capsys,
            "code", sample("degraded_pair.avwc"), "eliminate",
            "--reduced", str(reduced_path), "--prefix-len", "5", "--format", "json",
        )
        assert code == 0
        results = json.loads(out)["results"]
        assert results["checks_pass"] is True
        assert results["error_decomposition_margin"] >= -1e-12

    def test_reduce_impossible_epsilon_exit_code(self, capsys, tmp_path):
        code_path = tmp_path / "code.txt"
        run(
            capsys,
            "code", sample("degraded_pair.avwc"), "build",
            "--n", "4", "--tau", "0.05", "--delta", "0.3", "--seed", "6",
            "--out", str(code_path),
        )
        code, _, err = run(
            capsys,
            "code", sample("degraded_pair.avwc"), "reduce",
            "--code", str(code_path), "--k", "4", "--epsilon", "1e-9", "--seed", "5",
        )
        assert code == 4
        assert "epsilon" in err

    def test_verify_lemmas(self, capsys):
        code, out, _ = run(
            capsys,
            "code", sample("degraded_pair.avwc"), "verify-lemmas",
            "--n", "5", "--delta", "0.2", "--format", "json",
        )
        assert code == 0
        results = json.loads(out)["results"]
        assert results["all_checks_pass"] is True
        assert len(results["typicality_checks"]) == 4

    def test_noiseless_build_then_evaluate_is_error_free(self, capsys, tmp_path):
        spec_path = tmp_path / "noiseless.avwc"
        spec_path.write_text(
            "avwc 1\nstates 1\ninputs 2\noutputs main 2\noutputs eaves 2\n"
            "main 0\n1 0\n0 1\neaves 0\n0.5 0.5\n0.5 0.5\n"
        )
        code_path = tmp_path / "code.txt"
        code, out, _ = run(
            capsys,
            "code", str(spec_path), "build",
            "--n", "3", "--tau", "0.4", "--delta", "0.4", "--seed", "2",
            "--out", str(code_path), "--format", "json",
        )
        assert code == 0
        code, out, _ = run(
            capsys,
            "code", str(spec_path), "evaluate",
            "--code", str(code_path), "--format", "json",
        )
        assert code == 0
        assert json.loads(out)["results"]["worst_state_error"] == 0.0

    def test_evaluate_writes_csv_table(self, capsys, tmp_path):
        code_path = tmp_path / "code.txt"
        table_path = tmp_path / "table.csv"
        run(
            capsys,
            "code", sample("degraded_pair.avwc"), "build",
            "--n", "4", "--tau", "0.05", "--delta", "0.3", "--seed", "6",
            "--out", str(code_path),
        )
        code, out, _ = run(
            capsys,
            "code", sample("degraded_pair.avwc"), "evaluate",
            "--code", str(code_path), "--table", str(table_path), "--format", "json",
        )
        assert code == 0
        lines = table_path.read_text().strip().splitlines()
        assert lines[0] == "state_sequence,error,leakage_bits"
        assert len(lines) == 1 + 16

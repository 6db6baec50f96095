"""End-to-end tests of the command-line entry point."""

import json

import numpy as np
import pytest

from cnn_dhm import EXIT_INVALID, EXIT_OK, main
from src.model import serialize_topology, write_weights
from src.quant import FixedPointFormat
from src.sim import random_image, write_raw
from tests.model_factory import act, conv, fc, make_model, pool, with_weights


@pytest.fixture
def network(tmp_path):
    """Topology and weights files of a small conv/relu/pool/conv network."""

    def build(model=None, fill=None, bias_fill=None):
        model = model or make_model((1, 10, 10), [
            conv("conv1", 3, 1, 3), act("relu1"), pool("pool1"), conv("conv2", 2, 3, 3),
        ], name="tiny")
        model = with_weights(model, np.random.default_rng(5), scale=0.3, fill=fill, bias_fill=bias_fill)
        topology = tmp_path / f"{model.name}.prototxt"
        weights = tmp_path / f"{model.name}.hdw"
        topology.write_text(serialize_topology(model), encoding="utf-8")
        weights.write_bytes(write_weights(model))
        return str(topology), str(weights)

    return build


def run_json(capsys, argv):
    code = main(argv + ["--json"])
    return code, json.loads(capsys.readouterr().out)


class TestHelp:
    def test_top_level_help(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--help"])
        assert info.value.code == 0
        out = capsys.readouterr().out
        for command in ("compile", "simulate", "stats", "estimate", "graph"):
            assert command in out

    @pytest.mark.parametrize("command,flags", [
        ("compile", ["--output", "--dry-run", "--with-library"]),
        ("simulate", ["--image", "--seed", "--dump", "--golden-only"]),
        ("estimate", ["--fmax", "--compare"]),
        ("graph", ["--output"]),
        ("stats", []),
    ])
    def test_command_help_lists_flags(self, capsys, command, flags):
        with pytest.raises(SystemExit) as info:
            main([command, "--help"])
        assert info.value.code == 0
        out = capsys.readouterr().out
        common = ["--bits", "--frac", "--calibrate", "--no-nef", "--no-specialize", "--json", "--verbose"]
        for flag in flags + common:
            assert flag in out


class TestCompile:
    def test_writes_project_deterministically(self, network, tmp_path, capsys):
        topology, weights = network()
        assert main(["compile", topology, weights, "-o", str(tmp_path / "a")]) == EXIT_OK
        assert main(["compile", topology, weights, "-o", str(tmp_path / "b")]) == EXIT_OK
        for name in ("tiny_toplevel.vhd", "tiny_params.vhd", "manifest.json", "README.md"):
            first = (tmp_path / "a" / name).read_bytes()
            assert first == (tmp_path / "b" / name).read_bytes()

    def test_dry_run_prints_manifest(self, network, tmp_path, capsys):
        topology, weights = network()
        code, data = run_json(capsys, ["compile", topology, weights, "-o", str(tmp_path / "out"), "--dry-run"])
        assert code == EXIT_OK
        assert data["dry_run"] is True
        assert data["manifest"]["design"] == "tiny"
        assert not (tmp_path / "out").exists()

    def test_frac_override_reaches_manifest(self, network, tmp_path, capsys):
        topology, weights = network()
        code, data = run_json(capsys, [
            "compile", topology, weights, "--dry-run", "--frac", "conv1=:5", "-o", str(tmp_path),
        ])
        assert code == EXIT_OK
        assert data["manifest"]["formats"]["layers"]["conv1"]["output"]["frac_bits"] == 5

    def test_no_specialize_keeps_every_multiplier(self, network, tmp_path, capsys):
        topology, weights = network()
        _, data = run_json(capsys, ["compile", topology, weights, "--dry-run", "--no-specialize",
                                    "-o", str(tmp_path)])
        assert data["manifest"]["census"]["total"]["multipliers"] == 3 * 9 + 2 * 3 * 9

    def test_calibration_image_sets_input_format(self, network, tmp_path, capsys):
        topology, weights = network()
        image = tmp_path / "calib.pgm"
        image.write_text("P2\n10 10\n255\n" + " ".join(["255"] * 100) + "\n", encoding="ascii")
        code, data = run_json(capsys, [
            "compile", topology, weights, "--dry-run", "--calibrate", str(image), "-o", str(tmp_path),
        ])
        assert code == EXIT_OK
        assert data["manifest"]["formats"]["input"]["frac_bits"] == 6
        assert data["manifest"]["options"]["calibrate"] == "calib.pgm"
        code, data = run_json(capsys, ["simulate", topology, weights, "--calibrate", str(image),
                                       "--image", str(image)])
        assert code == EXIT_OK
        assert data["exact"] is True

    def test_missing_calibration_image(self, network, tmp_path, capsys):
        topology, weights = network()
        assert main(["stats", topology, weights, "--calibrate", str(tmp_path / "none.pgm")]) == EXIT_INVALID
        assert "calibration image file not found" in capsys.readouterr().err

    def test_library_copy(self, network, tmp_path, capsys):
        topology, weights = network()
        assert main(["compile", topology, weights, "-o", str(tmp_path / "out"), "--with-library"]) == EXIT_OK
        assert (tmp_path / "out" / "lib" / "neighborhood_extractor.vhd").exists()


class TestSimulate:
    def test_random_image_matches_golden(self, network, capsys):
        topology, weights = network()
        code, data = run_json(capsys, ["simulate", topology, weights, "--seed", "3"])
        assert code == EXIT_OK
        assert data["exact"] is True
        assert data["diff"]["mismatches"] == 0

    def test_raw_image_and_dump(self, network, tmp_path, capsys):
        topology, weights = network()
        write_raw(random_image((1, 10, 10), FixedPointFormat(8, 7), seed=1).data, FixedPointFormat(8, 7),
                  tmp_path / "frame")
        code = main(["simulate", topology, weights, "--image", str(tmp_path / "frame.raw"),
                     "--dump", str(tmp_path / "dump")])
        assert code == EXIT_OK
        assert capsys.readouterr().out.strip() == "exact match"
        assert (tmp_path / "dump" / "golden_conv2.raw").exists()
        assert (tmp_path / "dump" / "simulated.json").exists()

    def test_fully_connected_needs_golden_only(self, network, capsys):
        model = make_model((1, 6, 6), [conv("conv1", 2, 1, 3), fc("fc1", 3, 2)], name="withfc")
        topology, weights = network(model)
        assert main(["simulate", topology, weights]) == EXIT_INVALID
        assert "golden-only" in capsys.readouterr().err
        code, data = run_json(capsys, ["simulate", topology, weights, "--golden-only"])
        assert code == EXIT_OK
        assert data["layers"]["fc1"] == [3, 1, 1]


class TestStatsEstimateGraph:
    def test_all_zero_weights(self, network, capsys):
        topology, weights = network(fill=lambda name, shape: np.zeros(shape), bias_fill=0.0)
        code, data = run_json(capsys, ["stats", topology, weights])
        assert code == EXIT_OK
        assert data["total"]["fractions"]["zero"] == 1.0
        assert set(data["layers"]) == {"conv1", "conv2"}

    def test_stats_table(self, network, capsys):
        topology, weights = network()
        assert main(["stats", topology, weights]) == EXIT_OK
        assert "TOTAL" in capsys.readouterr().out

    def test_estimate_compare(self, network, capsys):
        topology, weights = network()
        code, data = run_json(capsys, ["estimate", topology, weights, "--fmax", "100e6", "--compare"])
        assert code == EXIT_OK
        assert data["reduction"] >= 1.0
        assert data["report"]["specialized"] is True
        assert data["unspecialized"]["specialized"] is False
        assert data["report"]["fmax_hz"] == 100e6

    def test_graph_to_file(self, network, tmp_path, capsys):
        topology, weights = network()
        target = tmp_path / "dot" / "tiny.dot"
        assert main(["graph", topology, weights, "-o", str(target)]) == EXIT_OK
        assert target.read_text(encoding="utf-8").startswith('digraph "tiny"')

    def test_graph_to_stdout(self, network, capsys):
        topology, weights = network()
        assert main(["graph", topology, weights, "--no-nef"]) == EXIT_OK
        assert capsys.readouterr().out.startswith('digraph "tiny"')


class TestErrors:
    def test_bad_bits(self, network, capsys):
        topology, weights = network()
        assert main(["stats", topology, weights, "--bits", "1"]) == EXIT_INVALID
        assert "error:" in capsys.readouterr().err

    def test_missing_file(self, network, tmp_path, capsys):
        topology, _ = network()
        assert main(["stats", topology, str(tmp_path / "missing.hdw")]) == EXIT_INVALID
        assert "not found" in capsys.readouterr().err

    def test_bad_frac(self, network, capsys):
        topology, weights = network()
        assert main(["stats", topology, weights, "--frac", "conv1"]) == EXIT_INVALID
        assert "--frac" in capsys.readouterr().err

    def test_unknown_command(self, capsys):
        assert main(["synthesize", "a", "b"]) == EXIT_INVALID
        assert "error:" in capsys.readouterr().err

    def test_negative_fmax(self, network, capsys):
        topology, weights = network()
        assert main(["estimate", topology, weights, "--fmax", "-1"]) == EXIT_INVALID

    def test_corrupt_weights(self, network, tmp_path, capsys):
        topology, weights = network()
        with open(weights, "r+b") as handle:
            handle.truncate(40)
        assert main(["stats", topology, weights]) == EXIT_INVALID

import json

import pytest

from hyperwave.cli import main


def run(argv):
    return main(argv)


class TestConfigGates:
    def test_even_dimension_exit_2(self, tmp_path):
        assert run(["identities", "--d", "6", "--out", str(tmp_path / "x")]) == 2

    def test_small_radius_exit_2(self, tmp_path):
        assert run(["identities", "--R", "0.3", "--out", str(tmp_path / "x")]) == 2

    def test_unknown_config_key_exit_2(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        assert run(["identities", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2

    def test_wrong_type_exit_2(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"N": "many"}))
        assert run(["identities", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2

    def test_bad_dims_exit_2(self, tmp_path):
        assert run(["identities", "--dims", "3,four", "--out", str(tmp_path / "x")]) == 2

    def test_blowup_needs_d7(self, tmp_path):
        assert run(["blowup", "--d", "5", "--out", str(tmp_path / "x")]) == 2

    def test_config_supplies_values(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dims": "3,5", "R": 1.5}))
        out = tmp_path / "ident"
        assert run(["identities", "--config", str(cfg), "--out", str(out)]) == 0
        text = (out.with_suffix(".csv")).read_text()
        assert text.splitlines()[1].startswith("3,")

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dims": "9"}))
        out = tmp_path / "ident"
        assert run(["identities", "--config", str(cfg), "--dims", "3", "--out", str(out)]) == 0
        rows = (out.with_suffix(".csv")).read_text().splitlines()[1:]
        assert rows[0].startswith("3,")


class TestCommands:
    def test_identities_all_dims(self, tmp_path):
        out = tmp_path / "ident"
        assert run(["identities", "--dims", "3,5,7,9,11", "--out", str(out)]) == 0
        lines = (out.with_suffix(".csv")).read_text().splitlines()
        assert lines[0] == "d,check,max_residual"
        assert len(lines) > 20

    def test_identities_deterministic(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert run(["identities", "--dims", "3,5", "--out", str(a)]) == 0
        assert run(["identities", "--dims", "3,5", "--out", str(b)]) == 0
        assert a.with_suffix(".csv").read_bytes() == b.with_suffix(".csv").read_bytes()

    def test_freewave_one_dimensional(self, tmp_path):
        out = tmp_path / "fw"
        assert run(["freewave", "--d", "1", "--N", "48", "--out", str(out)]) == 0
        doc = json.loads(out.with_suffix(".json").read_text())
        assert doc["exponent_fit"] <= -0.45
        csv = out.with_suffix(".csv").read_text().splitlines()
        assert csv[0] == "s,norm"

    def test_norms_deterministic_with_seed(self, tmp_path):
        a = tmp_path / "na"
        b = tmp_path / "nb"
        assert run(["norms", "--dims", "3", "--N", "24", "--seed", "7", "--out", str(a)]) == 0
        assert run(["norms", "--dims", "3", "--N", "24", "--seed", "7", "--out", str(b)]) == 0
        assert a.with_suffix(".csv").read_bytes() == b.with_suffix(".csv").read_bytes()

    def test_spectrum_document(self, tmp_path):
        out = tmp_path / "spec"
        assert run(["spectrum", "--d", "7", "--N", "64", "--out", str(out)]) == 0
        doc = json.loads(out.with_suffix(".json").read_text())
        assert doc["mode_stable"] is True
        assert {"re", "im", "stable"} <= set(doc["eigenvalues"][0])
        assert doc["gap"] > 0

import json

import pytest

from beliefweb import fixtures, harness, sysfile
from beliefweb.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def kv(out):
    pairs = {}
    for line in out.splitlines():
        if " = " in line and not line.startswith(" "):
            key, value = line.split(" = ", 1)
            pairs[key] = value
    return pairs


class TestSystemFile:
    def test_bundled_fixtures_match_constructors(self):
        assert sysfile.load_system(fixtures.bundled_path("fig1.json")) == fixtures.fig1_system()
        assert sysfile.load_system(fixtures.bundled_path("fig1_indep.json")) == fixtures.fig1_indep_system()

    def test_round_trip(self):
        for seed in range(10):
            system = harness.random_consistent_system(harness.preset("fig1"), seed, cards={"D": 3})
            once = sysfile.loads_system(sysfile.dumps_system(system))
            twice = sysfile.loads_system(sysfile.dumps_system(once))
            assert once == system
            assert twice == once

    def test_small_deviation_renormalized_with_warning(self, caplog):
        doc = {"variables": [{"name": "A", "card": 2}], "components": [{"vars": ["A"], "probs": [0.5, 0.5000001]}]}
        system = sysfile.loads_system(json.dumps(doc))
        assert abs(system.tables[0].flat.sum() - 1.0) < 1e-15
        assert "renormalized" in caplog.text

    def test_bad_sum_rejected(self):
        doc = {"variables": [{"name": "A", "card": 2}], "components": [{"vars": ["A"], "probs": [0.5, 0.4]}]}
        with pytest.raises(sysfile.NormalizationError):
            sysfile.loads_system(json.dumps(doc))

    def test_wrong_length(self):
        doc = {"variables": [{"name": "A", "card": 3}], "components": [{"vars": ["A"], "probs": [0.5, 0.5]}]}
        with pytest.raises(sysfile.SystemFileError):
            sysfile.loads_system(json.dumps(doc))

    def test_unknown_variable(self):
        doc = {"variables": [{"name": "A", "card": 2}], "components": [{"vars": ["B"], "probs": [0.5, 0.5]}]}
        with pytest.raises(sysfile.SystemFileError):
            sysfile.loads_system(json.dumps(doc))


class TestCommands:
    def test_score_fig1(self, capsys, fig1_path):
        code, out, _ = run(capsys, "score", fig1_path)
        assert code == 0
        assert "g_standard = -2.453268" in out
        assert "g_alt = -2.457152" in out
        assert "k = 0.992126" in out
        assert "uniform = -2.772589" in out
        vals = kv(out)
        assert float(vals["check_standard"]) < 1e-9
        assert float(vals["check_alt"]) < 1e-9

    def test_unpack_fig1(self, capsys, fig1_path):
        code, out, _ = run(capsys, "unpack", fig1_path)
        assert code == 0
        steps = [line for line in out.splitlines() if line.startswith("step")]
        assert steps == [
            "step 1: component=BCD tail=D overlap=BC ostar=[B, C]",
            "step 2: component=AC tail=C overlap=A ostar=[A]",
            "step 3: component=AB tail=AB overlap={} ostar=[-]",
        ]
        assert kv(out)["classification"] == "web"

    def test_validate_bad_sum(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(
            {"variables": [{"name": "A", "card": 2}], "components": [{"vars": ["A"], "probs": [0.5, 0.4]}]}
        ))
        code, out, err = run(capsys, "validate", str(path))
        assert code == 1
        assert err.startswith("error: normalization:")

    def test_validate_good(self, capsys, fig1_path):
        code, out, _ = run(capsys, "validate", fig1_path)
        assert code == 0
        assert kv(out)["status"] == "valid"

    def test_expand_standard(self, capsys, fig1_path):
        code, out, _ = run(capsys, "expand", fig1_path, "--model", "standard")
        assert code == 0
        rows = [line.split("\t") for line in out.splitlines()[3:]]
        assert len(rows) == 16
        assert rows[0][:4] == ["0", "0", "0", "0"] and rows[-1][:4] == ["1", "1", "1", "1"]
        assert float(rows[-1][4]) == pytest.approx(0.128, abs=1e-11)

    def test_expand_alt_to_file(self, capsys, fig1_path, tmp_path):
        out_path = tmp_path / "alt.tsv"
        code, _, _ = run(capsys, "expand", fig1_path, "--model", "alt", "--out", str(out_path))
        assert code == 0
        text = out_path.read_text()
        assert "model = alternative" in text
        assert float(kv(text)["k"]) == pytest.approx(0.992126, abs=1e-6)

    def test_expand_alt_non_web(self, capsys, tmp_path):
        system = harness.random_consistent_system(harness.preset("triangle"), 0)
        path = tmp_path / "tri.json"
        sysfile.save_system(system, path)
        code, _, err = run(capsys, "expand", str(path), "--model", "alt")
        assert code != 0 and err.startswith("error: not_a_web:")
        code, out, _ = run(capsys, "expand", str(path), "--model", "alt", "--allow-non-web")
        assert code == 0 and "model = alternative" in out

    def test_consistency(self, capsys, fig1_path):
        code, out, _ = run(capsys, "consistency", fig1_path, "--tol", "1e-9", "--max-iter", "500")
        assert code == 0
        assert kv(out)["status"] == "consistent"

    def test_maxent(self, capsys, fig1_path):
        code, out, _ = run(capsys, "maxent", fig1_path)
        vals = kv(out)
        assert code == 0
        assert float(vals["entropy"]) >= float(vals["entropy_px"]) - 1e-12
        assert float(vals["residual"]) < 1e-10

    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "score", "/nonexistent.json")
        assert code == 2
        assert err.startswith("error: io:")

    def test_experiment_writes_csv_and_figure(self, capsys, tmp_path):
        out = tmp_path / "exp.csv"
        code, text, _ = run(capsys, "experiment", "--structure", "fig1", "--trials", "20", "--seed", "7", "--out", str(out))
        assert code == 0
        assert out.read_text().startswith("trial,k,ln_k,g_standard,g_alt,gap,partition,winner\n")
        png = tmp_path / "exp.png"
        assert png.exists() and png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
        assert kv(text)["trials"] == "20"

    def test_experiment_from_structure_file(self, capsys, tmp_path, fig1_path):
        code, text, _ = run(capsys, "experiment", "--structure", fig1_path, "--trials", "3", "--no-plot",
                            "--out", str(tmp_path / "e.csv"))
        assert code == 0
        assert not (tmp_path / "e.png").exists()

    def test_experiment_hypertree_ties(self, capsys):
        code, text, _ = run(capsys, "experiment", "--structure", "star5", "--trials", "1")
        row = text.strip().splitlines()[-1].split(",")
        assert row[-1] == "tie"

    def test_plot_subcommand(self, capsys, tmp_path):
        csv_path = tmp_path / "x.csv"
        run(capsys, "experiment", "--trials", "10", "--out", str(csv_path), "--no-plot")
        code, out, _ = run(capsys, "plot", str(csv_path), "--out", str(tmp_path / "fig.png"))
        assert code == 0 and (tmp_path / "fig.png").exists()

    def test_deterministic(self, capsys, fig1_path):
        a = run(capsys, "score", fig1_path)[1]
        b = run(capsys, "score", fig1_path)[1]
        assert a == b

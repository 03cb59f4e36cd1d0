import json
import subprocess
import sys
from importlib.resources import files

import numpy as np
import pytest

import sipbounds.bounds
from sipbounds.cli import (
    EXIT_INPUT,
    EXIT_OK,
    EXIT_UNSOUND,
    InputError,
    load_dataset,
    main,
    parse_anchor,
    parse_norm,
)

SAMPLES = files("sipbounds") / "samples"
SAMPLE_RUNS = {
    "orthogonal_l2.json": [],
    "single_vector.json": [],
    "zero_member.json": [],
    "skewed_weights.json": [],
    "clustered_linf.json": ["--witness", "ratio_quadratic"],
    "weighted_l1.csv": ["--norm", "wlp:1:1,2,0.5", "--weights", "1,1,2"],
}
ROOT_HALF = 0.7071067811865476


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "-o", str(out)])
    return code, (out.read_text() if out.exists() else None)


def report(tmp_path, sample, *extra):
    code, text = run(tmp_path, "report", str(SAMPLES / sample), *extra)
    assert code == EXIT_OK
    return json.loads(text)


def write(tmp_path, doc, name="data.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


def test_orthogonal_example(tmp_path):
    doc = report(tmp_path, "orthogonal_l2.json")
    assert doc["schema"] == "sipbounds.report/1"
    assert doc["ratio"] == pytest.approx(ROOT_HALF, abs=1e-12)
    assert doc["best_lower"]["name"] == "self_lower"
    assert doc["best_lower"]["value"] == pytest.approx(ROOT_HALF, abs=1e-9)
    for b in doc["bounds"]:
        if b["applicable"] and b["side"] == "lower":
            assert b["value"] <= doc["ratio"] + 1e-9


def test_single_vector_has_ratio_one(tmp_path):
    doc = report(tmp_path, "single_vector.json")
    assert doc["ratio"] == 1.0
    for b in doc["bounds"]:
        if b["name"].startswith("self_"):
            assert b["value"] == pytest.approx(1.0, abs=1e-9)


def test_zero_member_reports_index_diagnostics(tmp_path):
    doc = report(tmp_path, "zero_member.json")
    ratio_forms = [b for b in doc["bounds"] if b["name"] != "self_upper"]
    for b in ratio_forms:
        assert not b["applicable"]
        assert any(d["condition"] == "x_j is zero" and d["index"] is not None
                   for d in b["diagnostics"])
    quad = next(e for e in doc["inequalities"] if e["name"] == "mean_quadratic")
    assert quad["holds"] is True


def test_csv_with_flags(tmp_path):
    doc = report(tmp_path, "weighted_l1.csv", *SAMPLE_RUNS["weighted_l1.csv"])
    assert doc["input"]["norm"] == "wlp:1:1,2,0.5"
    assert doc["input"]["weights"] == [0.25, 0.25, 0.5]


def test_witness_tables_in_report(tmp_path):
    doc = report(tmp_path, "clustered_linf.json", "--witness", "sip_quadratic", "--eps", "0.5,0.1")
    table = doc["witness"][0]
    assert table["kind"] == "sip_quadratic" and len(table["rows"]) == 2


@pytest.mark.parametrize("sample", sorted(SAMPLE_RUNS))
def test_reports_are_deterministic(tmp_path, sample):
    argv = ["report", str(SAMPLES / sample), *SAMPLE_RUNS[sample]]
    first = run(tmp_path, *argv, name="a")
    second = run(tmp_path, *argv, name="b")
    assert first[0] == second[0] == EXIT_OK
    assert first[1] == second[1]


@pytest.mark.parametrize("sample", sorted(SAMPLE_RUNS))
def test_report_round_trip_is_bit_exact(tmp_path, sample):
    _, text = run(tmp_path, "report", str(SAMPLES / sample), *SAMPLE_RUNS[sample])
    doc = json.loads(text)
    assert json.dumps(doc, indent=2, allow_nan=False) + "\n" == text

    def floats(node):
        if isinstance(node, float):
            yield node
        elif isinstance(node, dict):
            for v in node.values():
                yield from floats(v)
        elif isinstance(node, list):
            for v in node:
                yield from floats(v)

    for value in floats(doc):
        assert float(repr(value)).hex() == value.hex()


def test_text_format(tmp_path):
    code, text = run(tmp_path, "report", str(SAMPLES / "orthogonal_l2.json"), "--format", "text")
    assert code == EXIT_OK
    assert "ratio        0.7071067811865476" in text and "self_lower" in text
    code, text = run(tmp_path, "witness", "--kind", "sip_norm_gap", "--eps", "0.5",
                     "--format", "text")
    assert code == EXIT_OK and text.startswith("witness sip_norm_gap")


def test_bounds_filter(tmp_path):
    doc = report(tmp_path, "orthogonal_l2.json", "--bounds", "self_lower,anchor_norm_gap")
    assert [b["name"] for b in doc["bounds"]] == ["anchor_norm_gap", "self_lower"]


def test_anchor_flags(tmp_path):
    doc = report(tmp_path, "orthogonal_l2.json", "--anchor", "index:0")
    assert doc["anchor_used"] == [1.0, 0.0]
    doc = report(tmp_path, "orthogonal_l2.json", "--anchor", "coords:1,1")
    assert doc["anchor_used"] == [1.0, 1.0]


def test_witness_examples(tmp_path):
    code, text = run(tmp_path, "witness", "--kind", "sip_quadratic", "--eps", "0.5,0.1,0.01")
    rows = json.loads(text)["rows"]
    assert code == EXIT_OK and len(rows) == 3
    assert rows[-1]["admissible_constant"] == pytest.approx(0.5025, abs=1e-4)
    _, text = run(tmp_path, "witness", "--kind", "ratio_norm_gap", "--eps", "0.3")
    assert abs(json.loads(text)["rows"][0]["measured_slack"]) <= 1e-9
    _, text = run(tmp_path, "witness", "--kind", "mean_quadratic", "--eps", "0.001")
    assert json.loads(text)["rows"][0]["admissible_constant"] == pytest.approx(0.5000005,
                                                                                rel=1e-12)


@pytest.mark.parametrize("argv", [
    ["report", "missing.json"],
    ["report", "{SAMPLE}", "--norm", "lp:0.5"],
    ["report", "{SAMPLE}", "--norm", "bogus"],
    ["report", "{SAMPLE}", "--anchor", "index:7"],
    ["report", "{SAMPLE}", "--anchor", "coords:1,2,3"],
    ["report", "{SAMPLE}", "--weights", "1,2,3"],
    ["report", "{SAMPLE}", "--weights", "-1,2"],
    ["report", "{SAMPLE}", "--tol", "-1"],
    ["report", "{SAMPLE}", "--bounds", "nope"],
    ["report", "{SAMPLE}", "--witness", "nope"],
    ["witness", "--kind", "nope", "--eps", "0.5"],
    ["witness", "--kind", "sip_quadratic", "--eps", "0.1,0.5"],
    ["witness", "--kind", "sip_quadratic", "--eps", "2"],
    ["witness", "--kind", "sip_quadratic", "--eps", "0.5", "--anchor", "mean"],
    ["frobnicate"],
])
def test_input_errors_exit_one(tmp_path, argv):
    argv = [a.replace("{SAMPLE}", str(SAMPLES / "orthogonal_l2.json")) for a in argv]
    code, text = run(tmp_path, *argv)
    assert code == EXIT_INPUT and text is None


@pytest.mark.parametrize("doc", [
    "{not json",
    {"vectors": []},
    {"vectors": [[1, 2], [1]]},
    {"vectors": [[1, "x"]]},
    {"schema": "other/9", "vectors": [[1, 2]]},
    {"norm": "wlp:1:1,2,3", "vectors": [[1, 2]]},
    {"norm": {"kind": "mystery"}, "vectors": [[1, 2]]},
    [1, 2, 3],
])
def test_bad_dataset_files_exit_one(tmp_path, doc):
    code, _ = run(tmp_path, "report", write(tmp_path, doc))
    assert code == EXIT_INPUT


def test_weights_are_normalized_with_warning(tmp_path, caplog):
    path = write(tmp_path, {"vectors": [[1, 0], [0, 1]], "weights": [1, 3]})
    ds = load_dataset(path)
    assert ds.weights.p.tolist() == [0.25, 0.75]
    assert "normalizing" in caplog.text


def test_dataset_object_norm_and_flags_override(tmp_path):
    path = write(tmp_path, {"norm": {"kind": "wlp", "p": "inf", "weights": [1, 2]},
                            "vectors": [[1, 0], [0, 1]], "anchor": [1, 1], "rho": 0.25})
    ds = load_dataset(path)
    assert ds.norm.describe() == "wlp:inf:1,2" and ds.rho == 0.25
    assert np.array_equal(ds.anchor, [1.0, 1.0])


def test_parsers():
    assert parse_norm("lp:inf").describe() == "lp:inf"
    assert parse_norm({"kind": "lp", "p": 3}).describe() == "lp:3"
    assert parse_anchor(None) == "mean" and parse_anchor("index:2") == "index:2"
    for bad in ("index:x", "centroid"):
        with pytest.raises(InputError):
            parse_anchor(bad)


def test_corrupted_reduction_exits_two(tmp_path, monkeypatch):
    def flipped(values, side):
        arr = np.asarray(values, dtype=float)
        j = int(np.argmax(arr)) if side == "lower" else int(np.argmin(arr))
        return float(arr[j]), j

    monkeypatch.setattr(sipbounds.bounds, "_worst", flipped)
    code, text = run(tmp_path, "report", str(SAMPLES / "skewed_weights.json"))
    assert code == EXIT_UNSOUND and text is None


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sipbounds", "witness", "--kind",
                           "sip_norm_gap", "--eps", "0.5"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["schema"] == "sipbounds.witness/1"

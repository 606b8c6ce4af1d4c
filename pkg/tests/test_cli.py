"""Command-line interface: exit codes, artifacts, manifests, pipelines."""

import csv
import json
import os

import numpy as np
import pytest

from nbperc import Digraph, write_edge_list
from nbperc.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


def strip_timestamps(text: str) -> str:
    return "\n".join(
        ln for ln in text.splitlines() if '"timestamp"' not in ln
    )


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_USAGE


def test_missing_required_output_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "two-region", "--L", "4", "--d1", "3", "--d2", "2"])
    assert exc.value.code == EXIT_USAGE


def test_generate_writes_graph_and_manifest(tmp_path):
    out = tmp_path / "g.edges"
    code = main([
        "generate", "two-region", "--L", "4", "--d1", "3", "--d2", "2",
        "--seed", "7", "-o", str(out),
    ])
    assert code == EXIT_OK
    text = out.read_text()
    assert "n 32" in text
    manifest = json.loads((tmp_path / "g.edges.manifest.json").read_text())
    assert manifest["subcommand"] == "generate"
    assert manifest["parameters"]["L"] == 4
    assert manifest["seed"] == 7
    assert "timestamp" in manifest


def test_generate_rejects_bad_family_params(tmp_path):
    out = tmp_path / "g.edges"
    code = main([
        "generate", "two-region", "--L", "4", "--d1", "2", "--d2", "3",
        "-o", str(out),
    ])
    assert code == EXIT_INPUT


def test_analyze_pipeline(tmp_path):
    graph = tmp_path / "g.edges"
    main(["generate", "complete", "--n", "4", "-o", str(graph)])
    report = tmp_path / "report.json"
    code = main(["analyze", str(graph), "--p", "0.25", "-o", str(report)])
    assert code == EXIT_OK
    payload = json.loads(report.read_text())
    assert set(payload) == {"manifest", "report", "uniqueness"}
    records = {r["bound_id"]: r for r in payload["report"]["records"]}
    assert records["chi-out-adjacency-uniform"]["value"] == pytest.approx(4.0)
    assert payload["manifest"]["input_digests"]  # hashes the edge file


def test_analyze_missing_file_is_input_error(tmp_path):
    code = main(["analyze", str(tmp_path / "absent.edges"), "--p", "0.5"])
    assert code == EXIT_INPUT


def test_analyze_bad_probability_is_input_error(tmp_path):
    graph = tmp_path / "g.edges"
    main(["generate", "complete", "--n", "4", "-o", str(graph)])
    assert main(["analyze", str(graph), "--p", "1.5"]) == EXIT_INPUT
    assert main(["analyze", str(graph), "--p", "0.2,0.3"]) == EXIT_INPUT  # wrong len


def test_analyze_strict_numerical_gate(tmp_path):
    # two equal-rate triangles joined by a bridge: defective dominant eigenvalue
    d = Digraph(6, [0, 1, 2, 2, 3, 4, 5], [1, 2, 0, 3, 4, 5, 3])
    graph = tmp_path / "def.edges"
    with open(graph, "w") as fh:
        write_edge_list(d, fh)
    out = tmp_path / "def.json"
    assert main(["analyze", str(graph), "--p", "0.5", "-o", str(out)]) == EXIT_NUMERIC
    code = main([
        "analyze", str(graph), "--p", "0.5", "--allow-unconverged", "-o", str(out),
    ])
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert any(not r["applicable"] for r in payload["report"]["records"])


def test_simulate_grid_validation(tmp_path):
    graph = tmp_path / "g.edges"
    main(["generate", "complete", "--n", "4", "-o", str(graph)])
    out = tmp_path / "sweep.csv"
    code = main(["simulate", str(graph), "--p-start", "0.2", "-o", str(out)])
    assert code == EXIT_INPUT  # incomplete grid trio


def test_simulate_writes_csv_with_sidecar(tmp_path):
    graph = tmp_path / "g.edges"
    main(["generate", "two-region", "--L", "4", "--d1", "3", "--d2", "2",
          "-o", str(graph)])
    out = tmp_path / "sweep.csv"
    code = main([
        "simulate", str(graph), "--p-list", "0.3,0.5", "--realizations", "10",
        "--modes", "out,str", "--probes", "0", "-o", str(out),
    ])
    assert code == EXIT_OK
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4  # 2 p-values x 2 modes
    assert {row["mode"] for row in rows} == {"out", "str"}
    assert all("probe_0_mean" in row for row in rows)
    sidecar = json.loads((tmp_path / "sweep.csv.manifest.json").read_text())
    assert sidecar["subcommand"] == "simulate"
    assert "workers" not in sidecar["parameters"]  # worker count never echoed


def test_fit_pipeline_and_failure_path(tmp_path):
    graph5 = tmp_path / "g5.edges"
    graph7 = tmp_path / "g7.edges"
    main(["generate", "two-region", "--L", "5", "--d1", "3", "--d2", "2",
          "-o", str(graph5)])
    main(["generate", "two-region", "--L", "7", "--d1", "3", "--d2", "2",
          "-o", str(graph7)])
    for graph, csv_path in ((graph5, "s5.csv"), (graph7, "s7.csv")):
        code = main([
            "simulate", str(graph), "--p-start", "0.30", "--p-stop", "0.65",
            "--p-step", "0.05", "--realizations", "60", "-o",
            str(tmp_path / csv_path),
        ])
        assert code == EXIT_OK
    fit_out = tmp_path / "fit.json"
    code = main([
        "fit", "--sweep", f"5={tmp_path / 's5.csv'}",
        "--sweep", f"7={tmp_path / 's7.csv'}", "-o", str(fit_out),
    ])
    assert code == EXIT_OK
    payload = json.loads(fit_out.read_text())
    assert 0.0 < payload["fit"]["p_c"] < 1.0
    assert len(payload["fit"]["per_size"]) == 2

    assert main(["fit", "--sweep", "bad-token", "-o", str(fit_out)]) == EXIT_INPUT
    assert main([
        "fit", "--sweep", f"5={tmp_path / 'missing.csv'}", "-o", str(fit_out),
    ]) == EXIT_INPUT


def test_verify_small_run(tmp_path, capsys):
    out = tmp_path / "verify.json"
    code = main([
        "verify", "--count", "4", "--n-max", "7", "--identity-count", "1",
        "-o", str(out),
    ])
    assert code == EXIT_OK
    stdout = capsys.readouterr().out
    assert "violations" in stdout
    payload = json.loads(out.read_text())
    assert payload["total_violations"] == 0
    assert payload["status"] == "pass"


def test_reproduce_smoke(tmp_path):
    outdir = tmp_path / "repro"
    code = main(["reproduce", "fig2", "--smoke", "-o", str(outdir)])
    assert code == EXIT_OK
    summary = json.loads((outdir / "fig2_summary.json").read_text())
    assert summary["status"] == "insufficient statistics"
    assert summary["figure"] == "fig2"
    assert summary["realizations"] == 4
    assert (outdir / "fig2_L75.csv").exists()
    assert (outdir / "fig2_L100.csv").exists()


def test_rerun_byte_identical_modulo_timestamp(tmp_path):
    args = ["generate", "rooted-tree", "--D", "2", "--r", "3"]
    out_a = tmp_path / "a.edges"
    out_b = tmp_path / "b.edges"
    assert main(args + ["-o", str(out_a)]) == EXIT_OK
    assert main(args + ["-o", str(out_b)]) == EXIT_OK
    assert out_a.read_bytes() == out_b.read_bytes()
    man_a = strip_timestamps((tmp_path / "a.edges.manifest.json").read_text())
    man_b = strip_timestamps((tmp_path / "b.edges.manifest.json").read_text())
    # sidecar names differ only through the output argument itself
    assert man_a.replace("a.edges", "X") == man_b.replace("b.edges", "X")


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0

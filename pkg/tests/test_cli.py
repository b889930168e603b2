import csv
import io
import json
import math
import subprocess
import sys

import pytest

from saddle_strichartz.cli import EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, main
from saddle_strichartz.grid import read_gridfunction


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def summary(text):
    out = {}
    for line in text.splitlines():
        if line.startswith("# ") and " = " in line:
            key, value = line[2:].split(" = ", 1)
            out[key] = value
    return out


def test_critical_exponent_d3(capsys):
    code, out, _ = run(capsys, "critical-exponent", "--d", "3")
    assert code == EXIT_OK
    row = table(out)[0]
    assert float(row["p_d"]) == pytest.approx(2.25, abs=1e-12)
    assert float(row["q_d"]) == pytest.approx(3.0, abs=1e-12)
    assert float(row["kappa_d"]) == pytest.approx(1.0, abs=1e-12)
    assert float(row["residual"]) < 1e-12


def test_critical_exponent_d2_and_d1(capsys):
    code, out, _ = run(capsys, "critical-exponent", "--d", "2")
    row = table(out)[0]
    assert float(row["p_d"]) == pytest.approx(1 + math.sqrt(2), abs=1e-12)
    assert row["in_range"] == "true"
    code, _, err = run(capsys, "critical-exponent", "--d", "1")
    assert code == EXIT_USAGE and "d >= 2" in err


def test_config_header_first(capsys):
    _, out, _ = run(capsys, "critical-exponent", "--d", "4", "--seed", "9")
    first = out.splitlines()[0]
    assert first.startswith("# config ")
    cfg = json.loads(first[len("# config "):])
    assert cfg["seed"] == 9 and cfg["command"] == "critical-exponent" and cfg["d"] == 4


def test_moments_balanced(capsys):
    code, out, _ = run(capsys, "moments", "--d-plus", "1", "--d-minus", "1", "--p", "2", "--kmax", "3")
    assert code == EXIT_OK
    rows = table(out)
    assert len(rows) == 3 and all(float(r["re"]) > 0 for r in rows)


def test_moments_mixed(capsys):
    code, out, _ = run(capsys, "moments", "--d-plus", "2", "--d-minus", "1", "--p", "2", "--kmax", "5")
    assert code == EXIT_OK
    assert summary(out)["witnessed"] == "true"


@pytest.mark.parametrize("args", [
    ("moments", "--p", "1.0"),
    ("moments", "--d-minus", "0"),
    ("residual", "--p", "3.5"),
    ("search", "--grid-n", "2"),
    ("search", "--t-slices", "10"),
    ("saddle", "--check", "nonsense"),
    ("moments", "--tol-abs", "0", "--tol-rel", "0"),
    ("frobnicate",),
])
def test_usage_errors(capsys, args):
    code, _, _ = run(capsys, *args)
    assert code == EXIT_USAGE


def test_paraboloid_message(capsys):
    _, _, err = run(capsys, "moments", "--d-plus", "2", "--d-minus", "0")
    assert "hyperbolic" in err


def test_residual_jsonl(capsys):
    code, out, _ = run(capsys, "residual", "--d-plus", "2", "--d-minus", "1", "--format", "jsonl")
    assert code == EXIT_OK
    lines = [json.loads(line) for line in out.splitlines()]
    assert "config" in lines[0] and "summary" in lines[-1]
    s = lines[-1]["summary"]
    assert s["residual"] > 10 * s["combined_error"] and s["witnessed"] is True
    assert len(lines) == 2 + 4


def test_residual_single_sample_inconclusive(capsys):
    code, out, _ = run(capsys, "residual", "--samples", "0:0")
    assert code == EXIT_INCONCLUSIVE
    assert float(summary(out)["residual"]) == 0.0


def test_saddle_kernel(capsys):
    code, out, _ = run(capsys, "saddle", "--check", "kernel", "--seed", "3")
    assert code == EXIT_OK
    rows = table(out)
    assert len(rows) == 10 and max(float(r["rel_error"]) for r in rows) <= 1e-4


def test_saddle_divergence(capsys):
    code, out, _ = run(capsys, "saddle", "--check", "divergence", "--cutoff-b", "8", "--cutoff-y", "10")
    assert code == EXIT_OK
    rows = table(out)
    k1 = [float(r["value"]) for r in rows if r["quantity"] == "truncated_k1"]
    assert [float(r["cutoff"]) for r in rows if r["quantity"] == "truncated_k1"] == [8, 16, 32, 64]
    assert all(b > a for a, b in zip(k1, k1[1:]))
    assert float(summary(out)["truncated_kg_l2_mean_slope"]) > 0


def test_saddle_symmetry_small(capsys):
    code, out, _ = run(capsys, "saddle", "--check", "symmetry", "--grid-n", "8")
    assert code == EXIT_OK
    assert all(float(r["rel_difference"]) <= 1e-6 for r in table(out))


def test_saddle_norm(capsys):
    code, out, _ = run(capsys, "saddle", "--check", "norm")
    assert code == EXIT_OK
    devs = {r["route"]: float(r["rel_deviation"]) for r in table(out)}
    assert devs["reduced-1d"] <= 1e-10 and devs["grid-3d"] <= 1e-2 and devs["pairing-4d"] <= 2e-2


def test_search_zero_iterations(capsys):
    code, out, _ = run(capsys, "search", "--iters", "0")
    assert code == EXIT_INCONCLUSIVE
    s = summary(out)
    assert float(s["lambda_final"]) == pytest.approx(4 * math.pi**4, rel=1e-6)
    assert s["improved_over_gaussian"] == "false"


def test_search_default_improves_and_saves(capsys, tmp_path):
    target = tmp_path / "fstar.txt"
    out_file = tmp_path / "trace.jsonl"
    code, _, _ = run(capsys, "search", "--save-f", str(target), "--out", str(out_file), "--format", "jsonl")
    assert code == EXIT_OK
    lines = [json.loads(line) for line in out_file.read_text().splitlines()]
    assert lines[-1]["summary"]["improved_over_gaussian"] is True
    f = read_gridfunction(target)
    assert f.counts == (64, 64)


def test_reproducible_bytes(tmp_path):
    outs = []
    path = tmp_path / "run.csv"
    for _ in range(2):
        assert main(["saddle", "--check", "kernel", "--seed", "5", "--out", str(path)]) == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "saddle_strichartz", "critical-exponent", "--d", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "2.25" in proc.stdout

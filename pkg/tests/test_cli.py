import hashlib
import math
import subprocess
import sys

import pytest

from mcf import cli


def run(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_orbit_exact_farey_examples(capsys):
    code, out, _ = run(["orbit", "--algo", "farey", "--mode", "exact",
                        "--start", "2,5", "--steps", "1"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,branch,x1,x2,a1,a2"
    assert lines[1] == "0,1,2,5,1,1"
    assert lines[2].startswith("1,") and lines[2].split(",")[2:4] == ["2", "3"]

    code, out, _ = run(["orbit", "--algo", "farey", "--mode", "exact",
                        "--start", "5,3", "--steps", "1"], capsys)
    assert code == 0
    assert out.splitlines()[2].split(",")[2:4] == ["2", "3"]


def test_orbit_exact_truncates_at_rational_end(capsys):
    code, out, err = run(["orbit", "--algo", "farey", "--mode", "exact",
                          "--start", "1,2", "--steps", "10"], capsys)
    assert code == 0
    assert "truncated" in err
    assert len(out.splitlines()) < 12


def test_orbit_float_deterministic(capsys):
    argv = ["orbit", "--algo", "brun", "--steps", "20", "--seed", "5"]
    _, out1, _ = run(argv, capsys)
    _, out2, _ = run(argv, capsys)
    assert out1 == out2
    assert len(out1.splitlines()) == 22


def test_mass_values(capsys):
    code, out, _ = run(["mass", "--algo", "reverse", "--tol", "1e-6"], capsys)
    assert code == 0
    value = float(out.split(":")[1].split("(")[0])
    assert abs(value - math.pi ** 2 / 4) < 1e-6

    code, out, _ = run(["mass", "--algo", "farey"], capsys)
    assert code == 0 and "infinite" in out


def test_dilog(capsys):
    code, out, _ = run(["dilog"], capsys)
    assert code == 0
    assert float(out.split(":")[1]) < 1e-12


def test_audit_ok_and_csv(tmp_path, capsys):
    out_file = tmp_path / "audit.csv"
    code, _, err = run(["audit", "--algo", "cassaigne", "--samples", "200",
                        "--seed", "7", "--format", "csv",
                        "--out", str(out_file)], capsys)
    assert code == 0 and err == ""
    lines = out_file.read_text().splitlines()
    assert lines[0] == "piece,samples,violations"
    assert all(line.endswith(",0") for line in lines[1:])


def test_audit_unsupported_algorithm(capsys):
    code, _, err = run(["audit", "--algo", "arp", "--samples", "10"], capsys)
    assert code == 1 and "category=unsupported" in err


def test_unknown_algorithm_is_a_domain_error(capsys):
    code, _, err = run(["mass", "--algo", "gauss"], capsys)
    assert code == 1 and "category=domain" in err


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["orbit"])  # missing --algo
    assert exc.value.code == 2


def test_density_check(tmp_path, capsys):
    out_file = tmp_path / "res.csv"
    code, out, _ = run(["density-check", "--algo", "reverse", "--points", "50",
                        "--seed", "2", "--out", str(out_file)], capsys)
    assert code == 0
    worst = float(out.rsplit(":", 1)[1])
    assert worst < 1e-10
    assert len(out_file.read_text().splitlines()) == 51

    code, _, err = run(["density-check", "--algo", "reverse", "--points", "5",
                        "--seed", "2", "--fail-above", "1e-30"], capsys)
    assert code == 1 and "category=residual" in err


def test_density_check_threads_byte_identical(tmp_path, capsys):
    f1, f4 = tmp_path / "t1.csv", tmp_path / "t4.csv"
    base = ["density-check", "--algo", "cassaigne", "--points", "40",
            "--seed", "3"]
    assert run(base + ["--threads", "1", "--out", str(f1)], capsys)[0] == 0
    assert run(base + ["--threads", "4", "--out", str(f4)], capsys)[0] == 0
    assert f1.read_bytes() == f4.read_bytes()


def test_hist(capsys):
    code, out, _ = run(["hist", "--algo", "cassaigne", "--steps", "50000",
                        "--bins", "8", "--seed", "3"], capsys)
    assert code == 0 and "L1=" in out


def test_brun_d(capsys):
    code, out, _ = run(["brun-d", "--dim", "4", "--points", "5",
                        "--oracle-points", "1",
                        "--oracle-samples", "50000", "--seed", "1"], capsys)
    assert code == 0
    assert "recursion equals the closed form exactly" in out
    assert "ok=True" in out


def test_fractal_reproducible_and_symmetry(tmp_path, capsys):
    out1 = tmp_path / "a.ppm"
    out2 = tmp_path / "b.ppm"
    argv = ["fractal", "--algo", "arp", "--steps", "50000", "--res", "128",
            "--seed", "1", "--order", "poincare-last"]
    assert run(argv + ["--out", str(out1)], capsys)[0] == 0
    assert run(argv + ["--out", str(out2)], capsys)[0] == 0
    d1 = out1.read_bytes()
    assert d1 == out2.read_bytes()
    assert hashlib.sha256(d1).hexdigest() == hashlib.sha256(out2.read_bytes()).hexdigest()

    code, out, _ = run(["symmetry", "--image", str(out1)], capsys)
    assert code == 0 and "jaccard" in out


def test_panels(tmp_path, capsys):
    code, out, _ = run(["panels", "--algo", "reverse", "--steps", "2000",
                        "--res", "32", "--seed", "2",
                        "--out", str(tmp_path / "pan")], capsys)
    assert code == 0
    for key in ("x", "a", "x-next", "a-next"):
        assert (tmp_path / f"pan-{key}.ppm").exists()


def test_help_lists_algorithms(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    from mcf.algorithms import registry_names
    for name in registry_names():
        assert name in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mcf.cli", "dilog"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "dilogarithm identity defect" in proc.stdout

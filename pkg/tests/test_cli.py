"""Command-line interface: subcommands, outputs on disk, and exit codes.

Every test drives main() in process so coverage tooling and debuggers see
straight through the CLI layer.
"""

import json
import math

import pytest

from hivqe.cli import main
from hivqe.determinants import det_from_string

from helpers import FIXTURES, load_reference

H2 = str(FIXTURES / "h2_0.74.fcidump")
LIH = str(FIXTURES / "lih.fcidump")

RESULT_KEYS = {
    "energy", "e_corr", "e_hf", "n_dets", "converged", "iterations",
    "dipole", "config", "seed", "sector",
}

TRACE_HEADER = (
    "iter,E_cum,E_iter,n_dets_sampled,n_dets_valid,n_dets_cum,"
    "n_dets_post_screen,wall_ms_sample,wall_ms_diag,theta_norm,e_plus,e_minus"
)


def run_result(out_dir):
    return json.loads((out_dir / "result.json").read_text())


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def test_run_writes_the_three_output_files(tmp_path, capsys):
    rc = main(["run", "--fcidump", H2, "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "status converged" in out and "Ha" in out

    doc = run_result(tmp_path)
    assert set(doc) == RESULT_KEYS
    assert doc["converged"] is True
    assert doc["sector"] == {"n_orb": 2, "n_alpha": 1, "n_beta": 1}
    assert doc["energy"] == pytest.approx(
        load_reference()["h2_0.74"]["e_fci"], abs=1e-8)
    assert doc["e_corr"] == pytest.approx(doc["energy"] - doc["e_hf"], abs=1e-12)

    trace = (tmp_path / "trace.csv").read_text().splitlines()
    assert trace[0] == TRACE_HEADER
    assert len(trace) == 1 + doc["iterations"]

    dets = [
        det_from_string(line)
        for line in (tmp_path / "subspace.txt").read_text().splitlines()
        if line.strip()
    ]
    assert len(dets) == doc["n_dets"]


def test_run_override_precedence(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"seed": 1, "k": 3, "max_iterations": 6}))

    main(["run", "--fcidump", H2, "--config", str(cfg_file),
          "--out", str(tmp_path / "a")])
    assert run_result(tmp_path / "a")["seed"] == 1

    main(["run", "--fcidump", H2, "--config", str(cfg_file),
          "--seed", "2", "--out", str(tmp_path / "b")])
    assert run_result(tmp_path / "b")["seed"] == 2

    main(["run", "--fcidump", H2, "--config", str(cfg_file), "--seed", "2",
          "--set", "seed=3", "--set", "p_flip=0.05",
          "--set", "tensor_reconstruct=true", "--set", "recovery_mode=recover",
          "--out", str(tmp_path / "c")])
    doc = run_result(tmp_path / "c")
    assert doc["seed"] == 3
    assert doc["config"]["p_flip"] == 0.05
    assert doc["config"]["tensor_reconstruct"] is True
    assert doc["config"]["k"] == 3  # file value survives under other overrides


@pytest.mark.parametrize("override", ["shotz=10", "p_flip", "shots=lots"])
def test_run_rejects_bad_overrides(tmp_path, capsys, override):
    rc = main(["run", "--fcidump", H2, "--set", override,
               "--out", str(tmp_path)])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error:")


def test_run_missing_fcidump_exits_one(tmp_path, capsys):
    rc = main(["run", "--fcidump", str(tmp_path / "nope.fcidump"),
               "--out", str(tmp_path)])
    assert rc == 1
    assert "not found" in capsys.readouterr().err


def test_run_with_dipole_sidecar(tmp_path):
    rc = main(["run", "--fcidump", H2,
               "--dipole", str(FIXTURES / "h2_0.74.dipole"),
               "--out", str(tmp_path)])
    assert rc == 0
    dipole = run_result(tmp_path)["dipole"]
    assert isinstance(dipole, list) and len(dipole) == 3
    assert max(abs(v) for v in dipole) < 1e-6  # homonuclear


def test_run_not_converged_exits_two(tmp_path, capsys):
    rc = main(["run", "--fcidump", LIH, "--set", "max_iterations=1",
               "--out", str(tmp_path)])
    assert rc == 2
    assert "status max_iterations" in capsys.readouterr().out
    doc = run_result(tmp_path)
    assert doc["converged"] is False and doc["iterations"] == 1


def test_run_zero_iterations_reports_hf_only(tmp_path, capsys):
    rc = main(["run", "--fcidump", H2, "--set", "max_iterations=0",
               "--out", str(tmp_path)])
    assert rc == 2
    assert "after 0 iterations" in capsys.readouterr().out
    doc = run_result(tmp_path)
    assert doc["energy"] is None and doc["e_corr"] is None
    assert doc["e_hf"] == pytest.approx(
        load_reference()["h2_0.74"]["e_hf"], abs=1e-9)
    assert (tmp_path / "trace.csv").read_text().splitlines() == [TRACE_HEADER]
    assert (tmp_path / "subspace.txt").read_text() == ""


def test_run_results_are_byte_identical_across_repeats(tmp_path):
    argv = ["run", "--fcidump", LIH, "--seed", "7",
            "--set", "p_flip=0.02", "--set", "recovery_mode=recover",
            "--set", "max_iterations=8"]
    main(argv + ["--out", str(tmp_path / "a")])
    main(argv + ["--out", str(tmp_path / "b")])
    bytes_a = (tmp_path / "a" / "result.json").read_bytes()
    assert bytes_a == (tmp_path / "b" / "result.json").read_bytes()

    # trace rows match column-for-column once wall times are masked out
    def masked(p):
        rows = (p / "trace.csv").read_text().splitlines()
        return [
            [v for i, v in enumerate(r.split(",")) if i not in (7, 8)]
            for r in rows
        ]

    assert masked(tmp_path / "a") == masked(tmp_path / "b")


# ---------------------------------------------------------------------------
# fci
# ---------------------------------------------------------------------------

def test_fci_solves_small_sector(capsys):
    rc = main(["fci", "--fcidump", H2])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["sector_size"] == 4
    assert doc["energy"] == pytest.approx(
        load_reference()["h2_0.74"]["e_fci"], abs=1e-9)


def big_sector_fcidump(tmp_path):
    path = tmp_path / "big.fcidump"
    path.write_text(
        "&FCI NORB=20,NELEC=14,MS2=0,\n"
        "  ORBSYM=" + "1," * 20 + "\n"
        "  ISYM=1,\n"
        "&END\n"
        "0.0 0 0 0 0\n"
    )
    return str(path)


def test_fci_count_only_handles_huge_sectors(tmp_path, capsys):
    rc = main(["fci", "--fcidump", big_sector_fcidump(tmp_path), "--count-only"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out) == {"sector_size": 6009350400}


def test_fci_refuses_huge_sector_without_count_only(tmp_path, capsys):
    rc = main(["fci", "--fcidump", big_sector_fcidump(tmp_path)])
    assert rc == 1
    assert "--count-only" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def test_sweep_writes_pes_csv(tmp_path, capsys):
    ref = load_reference()
    manifest = tmp_path / "curve.txt"
    manifest.write_text(
        "# two points along the H2 dissociation curve\n"
        f"r0.74 {FIXTURES / 'h2_0.74.fcidump'} {ref['h2_0.74']['e_fci']!r}\n"
        f"r1.50 {FIXTURES / 'h2_1.50.fcidump'}\n"
    )
    rc = main(["sweep", "--manifest", str(manifest), "--out", str(tmp_path)])
    assert rc == 0

    lines = (tmp_path / "pes.csv").read_text().splitlines()
    assert lines[0] == "label,E_hf,E_hivqe,E_ref,abs_error"
    first = lines[1].split(",")
    assert first[0] == "r0.74"
    assert abs(float(first[4])) < 1e-8
    second = lines[2].split(",")
    assert second[0] == "r1.50" and second[3] == "" and second[4] == ""
    assert float(second[2]) == pytest.approx(ref["h2_1.50"]["e_fci"], abs=1e-8)


def test_sweep_resolves_paths_relative_to_manifest(tmp_path):
    # the manifest sits in tests/, so a relative entry must resolve from there
    manifest = FIXTURES.parent / "manifest_for_test.txt"
    manifest.write_text("eq fixtures/h2_0.74.fcidump\n")
    try:
        rc = main(["sweep", "--manifest", str(manifest), "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "pes.csv").exists()
    finally:
        manifest.unlink()


def test_sweep_empty_manifest_exits_one(tmp_path, capsys):
    manifest = tmp_path / "empty.txt"
    manifest.write_text("# nothing here\n\n")
    rc = main(["sweep", "--manifest", str(manifest), "--out", str(tmp_path)])
    assert rc == 1
    assert "no geometries" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def test_report_aggregates_and_sorts_by_m(tmp_path, capsys):
    for m in (8, 2):
        main(["run", "--fcidump", LIH, "--set", f"m={m}",
              "--set", "k=40", "--set", "max_iterations=4",
              "--out", str(tmp_path / f"m{m}")])
    e_ref = load_reference()["lih"]["e_fci"]
    rc = main([
        "report",
        str(tmp_path / "m8" / "result.json"),
        str(tmp_path / "m2" / "result.json"),
        "--ref", repr(e_ref), "--out", str(tmp_path),
    ])
    assert rc == 0

    lines = (tmp_path / "report.csv").read_text().splitlines()
    assert lines[0] == "label,n_qubits,m,n_dets,energy,abs_error"
    rows = [line.split(",") for line in lines[1:]]
    assert [r[0] for r in rows] == ["m2", "m8"]  # sorted by m, labeled by dir
    assert all(r[1] == "12" for r in rows)
    errors = [float(r[5]) for r in rows]
    assert errors[0] > errors[1]  # larger m explores more couplings

    dat = (tmp_path / "report.dat").read_text().splitlines()
    assert dat[0].startswith("#")
    floored = [float(line.split()[3]) for line in dat[1:]]
    assert all(v >= 1e-16 for v in floored)


def test_report_floors_exact_errors_for_log_plots(tmp_path):
    main(["run", "--fcidump", H2, "--out", str(tmp_path / "exact")])
    doc = run_result(tmp_path / "exact")
    rc = main(["report", str(tmp_path / "exact" / "result.json"),
               "--ref", repr(doc["energy"]), "--out", str(tmp_path)])
    assert rc == 0
    csv_err = (tmp_path / "report.csv").read_text().splitlines()[1].split(",")[5]
    assert float(csv_err) == 0.0  # raw value untouched
    dat_err = (tmp_path / "report.dat").read_text().splitlines()[1].split()[3]
    assert float(dat_err) == 1e-16


def test_report_missing_result_exits_one(tmp_path, capsys):
    rc = main(["report", str(tmp_path / "ghost.json"), "--out", str(tmp_path)])
    assert rc == 1
    assert "not found" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def test_unknown_subcommand_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["polish"])
    assert exc.value.code == 2


def test_run_requires_fcidump():
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 2

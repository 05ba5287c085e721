import json
import math
import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from frustbh import sweep as sweep_mod
from frustbh.config import parse_config
from frustbh.sweep import (
    COLUMNS,
    SweepError,
    SweepResultRecord,
    emit_plot_data,
    notes_path_for,
    read_records,
    records_from_csv,
    records_to_csv,
    run_sweep,
)

PINNED_HEADER = (
    "schema_version,M,N,n_max,boundary,hardcore,t1,t2,U,Uprime,E0,gap,degenerate,eta,q_max,"
    "commensurate,Sq_norm,kappa_bar,Dxy_bar_kinetic,Dxy_bar_current,Dzz_bar,E_half,ggm,"
    "ggm_argmax_bitmask,solver_iters,residual"
)


def config(tmp_path, extra="", grid="t1_over_t2 = 0.5, 2.0\nU_prime = 0, 4", model="M = 6\nn_max = 2"):
    text = f"[model]\n{model}\n[grid]\n{grid}\n{extra}\n[output]\npath = {tmp_path / 'out.csv'}\n"
    return parse_config(text)


def test_header_is_pinned():
    assert ",".join(COLUMNS) == PINNED_HEADER


def test_two_by_two_grid(tmp_path):
    out = run_sweep(config(tmp_path))
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert lines[0] == PINNED_HEADER
    assert len(lines) == 5
    assert out.exit_code == 0 and out.n_points == 4
    rec = out.records[0]
    assert (rec.t1, rec.Uprime, rec.U) == (-0.5, 0.0, 0.0)
    assert rec.ggm_argmax_bitmask & 1
    assert all(
        math.isfinite(getattr(rec, c)) for c in COLUMNS if isinstance(getattr(rec, c), float)
    )
    assert (tmp_path / "out.notes.csv").read_text() == "t1,Uprime,kind,field,message\n"


def test_rerun_is_byte_identical(tmp_path):
    cfg = config(tmp_path)
    run_sweep(cfg)
    first = (tmp_path / "out.csv").read_bytes()
    os.remove(tmp_path / "out.csv")
    run_sweep(cfg)
    assert (tmp_path / "out.csv").read_bytes() == first


def test_resume_skips_finished_points(tmp_path, monkeypatch):
    cfg = config(tmp_path)
    run_sweep(cfg)
    path = tmp_path / "out.csv"
    full = path.read_bytes()
    # simulate an interruption after two points
    path.write_text("\n".join(path.read_text().splitlines()[:3]) + "\n")
    calls = []
    real = sweep_mod.run_point
    monkeypatch.setattr(sweep_mod, "run_point", lambda *a, **k: calls.append(a) or real(*a, **k))
    run_sweep(cfg)
    assert len(calls) == 2
    assert path.read_bytes() == full


def test_resume_refuses_foreign_results(tmp_path):
    run_sweep(config(tmp_path))
    with pytest.raises(SweepError, match="outside"):
        run_sweep(config(tmp_path, grid="t1_over_t2 = 1.0"))


def test_parallel_workers_do_not_change_bytes(tmp_path):
    cfg = config(tmp_path)
    run_sweep(cfg, workers=1)
    serial = (tmp_path / "out.csv").read_bytes()
    os.remove(tmp_path / "out.csv")
    run_sweep(cfg, workers=2)
    assert (tmp_path / "out.csv").read_bytes() == serial


def test_worker_env(monkeypatch):
    monkeypatch.setenv("FRUSTBH_WORKERS", "0")
    with pytest.raises(SweepError):
        sweep_mod._workers()
    monkeypatch.setenv("FRUSTBH_WORKERS", "3")
    assert sweep_mod._workers() == 3


def test_unwritable_output_fails_before_solving(tmp_path, monkeypatch):
    monkeypatch.setattr(sweep_mod, "run_point", lambda *a, **k: pytest.fail("solver ran"))
    cfg = parse_config(
        f"[model]\nM = 6\n[grid]\nt1_over_t2 = 1\n[output]\npath = {tmp_path / 'missing' / 'x.csv'}\n"
    )
    with pytest.raises(SweepError, match="does not exist"):
        run_sweep(cfg)


def test_failures_are_recorded_per_point(tmp_path, monkeypatch):
    real = sweep_mod.build_hamiltonian

    def flaky(basis, params):
        if params.t1 == -2.0:
            raise RuntimeError("no convergence")
        return real(basis, params)

    monkeypatch.setattr(sweep_mod, "build_hamiltonian", flaky)
    out = run_sweep(config(tmp_path))
    assert out.n_failed == 2 and out.exit_code == 3
    notes = (tmp_path / "out.notes.csv").read_text().splitlines()
    assert notes[1:] == ["-2,0,error,RuntimeError,no convergence", "-2,4,error,RuntimeError,no convergence"]
    assert len((tmp_path / "out.csv").read_text().splitlines()) == 3


def test_all_points_failing(tmp_path):
    out = run_sweep(config(tmp_path, extra="[solver]\nmax_iter = 2\n", model="M = 10\nhardcore = true"))
    assert out.exit_code == 2 and out.records == []
    assert "ConvergenceError" in notes_path_for(tmp_path / "out.csv").read_text()


def test_ggm_ceiling_leaves_empty_cell(tmp_path):
    out = run_sweep(config(tmp_path, extra="[observables]\nggm_ceiling = 4\n", grid="t1_over_t2 = 1"))
    assert out.records[0].ggm is None and out.exit_code == 0
    row = (tmp_path / "out.csv").read_text().splitlines()[1].split(",")
    assert row[COLUMNS.index("ggm")] == "" and row[COLUMNS.index("ggm_argmax_bitmask")] == ""
    assert "exceeds ceiling 4" in (tmp_path / "out.notes.csv").read_text()


def test_restricted_ggm_scope(tmp_path):
    out = run_sweep(config(tmp_path, extra="[observables]\nggm_scope = contiguous+parity\nggm_ceiling = 4\n",
                           grid="t1_over_t2 = 1"))
    assert out.records[0].ggm is not None


def test_json_output_roundtrip(tmp_path):
    cfg = config(tmp_path)
    cfg = sweep_mod.with_output(cfg, tmp_path / "out.json", "json")
    out = run_sweep(cfg)
    data = json.loads((tmp_path / "out.json").read_text())
    assert len(data) == 4 and list(data[0]) == list(COLUMNS)
    assert read_records(tmp_path / "out.json") == out.records
    before = (tmp_path / "out.json").read_bytes()
    run_sweep(cfg)
    assert (tmp_path / "out.json").read_bytes() == before


finite = st.floats(allow_nan=False, allow_infinity=False)


@given(finite, finite, st.one_of(st.none(), finite), st.booleans())
def test_csv_roundtrip_is_bit_exact(e0, kappa, g, degenerate):
    rec = SweepResultRecord(
        1, 6, 3, 2, "open", False, -0.5, -1.0, 0.0, 0.0, e0, 0.1, degenerate, 0.3, 0.0, "C",
        0.9, kappa, None, None, 0.0, 0.5, g, None if g is None else 5, 30, 1e-12,
    )
    back = records_from_csv(records_to_csv([rec]))[0]
    assert back == rec
    assert records_to_csv([back]) == records_to_csv([rec])


def test_dimer_point_record(tmp_path):
    cfg = config(tmp_path, grid="t1_over_t2 = 2.0", model="M = 12\nhardcore = true")
    rec = run_sweep(cfg).records[0]
    assert rec.E_half <= 1e-8 and rec.ggm <= 1e-8


# --- plot data ---


def test_plot_matrix(tmp_path):
    out = run_sweep(config(tmp_path))
    text = emit_plot_data(out.records, "ggm", tmp_path / "ggm.csv")
    rows = (tmp_path / "ggm.csv").read_text().splitlines()
    assert rows == text.splitlines()
    assert rows[0] == "t1_over_t2\\Uprime:ggm,0,4"
    assert [r.split(",")[0] for r in rows[1:]] == ["0.5", "2"]
    assert all(len(r.split(",")) == 3 for r in rows)


def test_plot_single_point_and_missing_cells(tmp_path):
    out = run_sweep(config(tmp_path))
    one = emit_plot_data(out.records[:1], "E0").splitlines()
    assert len(one) == 2 and len(one[1].split(",")) == 2
    holes = emit_plot_data(out.records[:3], "E0").splitlines()
    assert holes[2].endswith(",")


def test_plot_errors(tmp_path):
    out = run_sweep(config(tmp_path, extra="[observables]\nggm = false\n"))
    with pytest.raises(SweepError, match="not computed"):
        emit_plot_data(out.records, "ggm")
    with pytest.raises(SweepError, match="unknown quantity"):
        emit_plot_data(out.records, "entropy")
    other = out.records[0].__class__(**{**out.records[0].__dict__, "M": 8})
    with pytest.raises(SweepError, match="one grid"):
        emit_plot_data(out.records + [other], "E0")
    with pytest.raises(SweepError, match="duplicate"):
        emit_plot_data(out.records + out.records[:1], "E0")

import json

import numpy as np
import pytest

from qantenna import AngularGrid, dark_optimize, equispaced, load_state, save_state
from qantenna.cli import main


def _table(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_pattern_antidiagonal(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["pattern", "--family", "antidiagonal", "--n", "20", "--k-delta", "2", "--out", str(out)]) == 0
    d = _table(out)
    assert d.shape == (100 * 100, 3)
    diag = d[d[:, 0] == d[:, 1], 2]
    off = d[np.abs(np.cos(d[:, 0]) - np.cos(d[:, 1])) > 0.3, 2]
    assert diag.max() >= 10 * off.max()
    echo = json.loads((tmp_path / "p.csv.params.json").read_text())
    assert echo["family"] == "antidiagonal" and echo["n"] == 20


def test_pattern_dark(tmp_path):
    out = tmp_path / "dark.csv"
    assert main(["pattern", "--family", "dark", "--sigma", "3.2", "--out", str(out)]) == 0
    assert _table(out)[:, 2].max() <= 1e-6


def test_pattern_from_state_file(tmp_path):
    state = tmp_path / "s.json"
    save_state(dark_optimize(equispaced(4, 2.0), AngularGrid.uniform(10)), state)
    out = tmp_path / "p.csv"
    assert main(["pattern", "--state", str(state), "--n", "4", "--grid", "5", "--normalize", "--out", str(out)]) == 0
    assert _table(out)[:, 2].max() == pytest.approx(1.0)


def test_pattern_missing_state(tmp_path, capsys):
    missing = tmp_path / "nowhere.json"
    assert main(["pattern", "--state", str(missing)]) != 0
    assert str(missing) in capsys.readouterr().err


def test_pattern_state_geometry_mismatch(tmp_path):
    state = tmp_path / "s.json"
    save_state(dark_optimize(equispaced(4, 2.0), AngularGrid.uniform(10)), state)
    assert main(["pattern", "--state", str(state), "--n", "5", "--out", str(tmp_path / "p.csv")]) != 0


def test_pattern_rejects_bad_geometry(tmp_path):
    assert main(["pattern", "--n", "1", "--out", str(tmp_path / "p.csv")]) != 0
    assert main(["pattern", "--k-delta=-2", "--out", str(tmp_path / "p.csv")]) != 0


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 4, "grid": 6, "family": "dicke"}))
    out = tmp_path / "p.csv"
    assert main(["pattern", "--config", str(cfg), "--grid", "7", "--out", str(out)]) == 0
    assert _table(out).shape == (49, 3)
    echo = json.loads((tmp_path / "p.csv.params.json").read_text())
    assert echo["n"] == 4 and echo["family"] == "dicke" and echo["grid"] == 7


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit) as exc:
        main(["pattern", "--config", str(cfg)])
    assert exc.value.code != 0


def test_optimize_dark_equals_module(tmp_path):
    out = tmp_path / "s.json"
    assert main(["optimize", "--mode", "dark", "--n", "8", "--grid", "40", "--out", str(out)]) == 0
    ref = tmp_path / "ref.json"
    save_state(dark_optimize(equispaced(8, 2.0), AngularGrid.uniform(40)), ref)
    assert out.read_bytes() == ref.read_bytes()
    assert (tmp_path / "s.json.diagnostics.csv").exists()


def test_optimize_co_directional_small(tmp_path):
    out = tmp_path / "s.json"
    args = ["optimize", "--mode", "co-directional", "--n", "4", "--grid", "30", "--restarts", "2", "--out", str(out)]
    assert main(args) == 0
    s = load_state(out)
    assert s.terms.get((4, 1), 0) != 0
    rows = _table(tmp_path / "s.json.diagnostics.csv")
    assert rows.shape == (2, 5)


def test_optimize_custom_problem(tmp_path):
    problem = tmp_path / "prob.json"
    problem.write_text(
        json.dumps(
            {
                "geometry": {"N": 4, "k_delta": 2.0},
                "grid": 10,
                "visibility_weight": 0.0,
                "targets": [[1.5707963267948966, 1.5707963267948966, 24.0, 1.0]],
            }
        )
    )
    out = tmp_path / "s.json"
    assert main(["optimize", "--mode", "custom", "--problem", str(problem), "--restarts", "2", "--out", str(out)]) == 0
    assert json.loads((tmp_path / "s.json.params.json").read_text())["objective"] < 1e-8


def test_optimize_invalid_mode(tmp_path, capsys):
    assert main(["optimize", "--mode", "sideways", "--out", str(tmp_path / "s.json")]) != 0
    assert "sideways" in capsys.readouterr().err


def test_optimize_custom_needs_problem(tmp_path):
    assert main(["optimize", "--mode", "custom", "--out", str(tmp_path / "s.json")]) != 0


def test_feasibility_figure_parameters(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["feasibility", "--a", "0,0", "--b", "0,0.05", "--normalize", "--out", str(out)]) == 0
    from qantenna.design import is_convex_polygon

    pts = _table(out)
    assert len(pts) == 360
    assert is_convex_polygon(pts)
    assert pts.max() <= 1 + 1e-9


def test_feasibility_degenerate(tmp_path, capsys):
    out = tmp_path / "f.csv"
    assert main(["feasibility", "--a", "0,0.05", "--b", "0,0.05", "--out", str(out)]) == 0
    pts = _table(out)
    assert pts.shape == (2, 2)
    np.testing.assert_allclose(pts[:, 0], pts[:, 1], atol=1e-9)
    assert "warning" in capsys.readouterr().err


def test_feasibility_sweep_guard(tmp_path):
    assert main(["feasibility", "--sweep", "7", "--out", str(tmp_path / "f.csv")]) != 0
    assert not (tmp_path / "f.csv").exists()


def test_mbloch_bad_dt(tmp_path):
    assert main(["mbloch", "--dt", "0", "--out", str(tmp_path / "m.csv")]) != 0
    assert main(["mbloch", "--dt=-1e-3", "--out", str(tmp_path / "m.csv")]) != 0


def test_mbloch_rerun_is_byte_identical(tmp_path):
    common = ["mbloch", "--realizations", "1", "--seed", "3", "--dt", "5e-3", "--grid", "20"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    ta = tmp_path / "ta.csv"
    assert main(common + ["--out", str(a), "--trajectory", str(ta)]) == 0
    assert main(common + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert _table(ta).shape[1] == 1 + 3 * 3


def test_oracle_check(tmp_path, capsys):
    assert main(["oracle-check", "--n", "4", "--order", "3", "--states", "2", "--grid", "8"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_optimize_co_directional_n10(tmp_path):
    out = tmp_path / "s.json"
    assert main(["optimize", "--mode", "co-directional", "--n", "10", "--k-delta", "2", "--out", str(out)]) == 0
    s = load_state(out)
    assert sum(abs(s.terms.get((11 - j, j), 0)) ** 2 for j in range(1, 6)) >= 0.8


def test_mbloch_pattern_matches_quantum(tmp_path):
    from qantenna import ExcitationState, pattern

    out = tmp_path / "m.csv"
    args = ["mbloch", "--n", "3", "--k-delta", "4.5", "--noise-mode", "mirrored", "--realizations", "3"]
    assert main(args + ["--dt", "5e-3", "--grid", "40", "--normalize", "--out", str(out)]) == 0
    q = pattern(equispaced(3, 4.5), ExcitationState.from_terms(3, {(2, 1): 1, (3, 2): 1}), AngularGrid.uniform(40), True)
    assert np.abs(_table(out)[:, 2] - q.values.ravel()).max() <= 0.05

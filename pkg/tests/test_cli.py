import csv
import io
import json
import math

import pytest

from bellscope.cli import EXIT_MODEL, EXIT_OK, EXIT_USAGE, main, parse_setting


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code == EXIT_OK, err
    return json.loads(out)


@pytest.mark.parametrize("b, expected", [("0", -1.0), ("90", 0.0), ("45", -0.7071068)])
def test_qm_examples(capsys, b, expected):
    d = run_json(capsys, "qm", "--a", "0", "--b", b)
    assert d["E_AB"] == pytest.approx(expected, abs=1e-7)
    assert d["E_A"] == 0.0 and d["E_B"] == 0.0
    assert d["schema_version"] == 1


def test_qm_plain_output(capsys):
    code, out, _ = run(capsys, "qm", "--a", "0", "--b", "45")
    assert code == EXIT_OK
    assert "E(AB) = -0.7071068" in out


def test_qm_vector_settings(capsys):
    d = run_json(capsys, "qm", "--a", "1,0,0", "--b", "1,1,0")
    assert d["E_AB"] == pytest.approx(-1 / math.sqrt(2), abs=1e-12)
    assert d["b"] == pytest.approx([1 / math.sqrt(2), 1 / math.sqrt(2), 0])


@pytest.mark.parametrize("a, b, pre, post, quantum", [
    ("0", "90", 0.0, -1.0, 0.0),
    ("30", "30", -1.0, -1.0, -1.0),
    ("0", "60", -0.5, -1.0, -0.5),
])
def test_weatherall_demo_examples(capsys, a, b, pre, post, quantum):
    d = run_json(capsys, "weatherall-demo", "--a", a, "--b", b)
    assert d["pre_projection_E_AB"] == pytest.approx(pre, abs=1e-12)
    assert d["projected_E_AB"] == post
    assert d["quantum_E_AB"] == pytest.approx(quantum, abs=1e-12)
    assert d["tensor_single_A_is_zero"] and d["tensor_single_B_is_zero"]
    assert [(s["P_a(A)"], s["P_b(B)"]) for s in d["per_state"]] == [(1, -1), (-1, 1)]


def test_weatherall_demo_plain(capsys):
    code, out, _ = run(capsys, "weatherall-demo", "--a", "0", "--b", "90")
    assert code == EXIT_OK
    assert "post-projection E(P(A) P(B))  = -1" in out


def test_chsh_qm_optimize(capsys):
    d = run_json(capsys, "chsh", "--source", "qm", "--optimize")
    assert d["optimized"]["S_max"] == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    assert d["S"] == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    assert d["bound_satisfied"] is False


def test_chsh_weatherall_optimize(capsys):
    d = run_json(capsys, "chsh", "--source", "weatherall-projected", "--optimize")
    assert d["optimized"]["S_max"] == 2.0
    assert d["E_ab"] == d["E_ab_prime"] == -1.0


def test_chsh_qm_sampled(capsys):
    d = run_json(capsys, "chsh", "--source", "qm-sampled", "--n", "1000000", "--seed", "7")
    assert abs(d["S"] - 2 * math.sqrt(2)) <= 0.01
    assert d["n_trials"] == 1_000_000 and d["seed"] == 7


def test_chsh_sign_model_default_settings(capsys):
    d = run_json(capsys, "chsh", "--source", "sign-model")
    assert d["S"] == pytest.approx(2.0, abs=1e-12)


def test_chsh_explicit_settings_and_csv(capsys):
    code, out, _ = run(capsys, "chsh", "--source", "qm", "--settings", "0", "90", "45", "135", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["S"]) == pytest.approx(2 * math.sqrt(2), abs=1e-12)


def test_trials_weatherall_every_product_minus_one(capsys):
    code, out, err = run(capsys, "trials", "--source", "weatherall-projected", "--a", "0", "--b", "90", "--n", "10")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["trial_index", "a_outcome", "b_outcome"]
    assert len(rows) == 10
    assert all(int(r["a_outcome"]) * int(r["b_outcome"]) == -1 for r in rows)
    assert "mean AB = -1" in err


def test_trials_qm_equal_settings_anticorrelated(capsys):
    code, out, _ = run(capsys, "trials", "--source", "qm-sampled", "--a", "20", "--b", "20", "--n", "500")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert all(int(r["a_outcome"]) == -int(r["b_outcome"]) for r in rows)


def test_trials_sign_model_sixty_degrees(capsys, tmp_path):
    path = tmp_path / "t.json"
    code, out, _ = run(capsys, "trials", "--source", "sign-model", "--a", "0", "--b", "60",
                       "--n", "1000000", "--seed", "3", "--format", "json", "--out", str(path))
    assert code == EXIT_OK
    d = json.loads(path.read_text())
    assert abs(d["summary"]["mean_AB"] - (-1 / 3)) <= 0.004
    assert "n = 1000000" in out


def test_same_seed_byte_identical_files(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["trials", "--source", "qm-sampled", "--a", "0", "--b", "45", "--n", "2000",
                     "--seed", "11", "--out", str(p)]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()
    other = tmp_path / "c.csv"
    main(["trials", "--source", "qm-sampled", "--a", "0", "--b", "45", "--n", "2000", "--seed", "12", "--out", str(other)])
    assert other.read_bytes() != paths[0].read_bytes()
    capsys.readouterr()


def test_usage_errors_exit_two(capsys, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["chsh", "--source", "bohm"])
    assert info.value.code == EXIT_USAGE
    assert run(capsys, "qm", "--a", "north", "--b", "0")[0] == EXIT_USAGE
    assert run(capsys, "qm", "--a", "0,0,0", "--b", "0")[0] == EXIT_USAGE
    assert run(capsys, "qm", "--a", "1,2", "--b", "0")[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["trials", "--source", "sign-model", "--a", "0", "--b", "0", "--n", "0"])
    assert info.value.code == EXIT_USAGE
    code, _, err = run(capsys, "trials", "--source", "sign-model", "--a", "0", "--b", "0", "--n", "5",
                       "--out", str(tmp_path / "missing" / "dir" / "x.csv"))
    assert code == EXIT_USAGE and "error" in err
    assert run(capsys, "trials", "--source", "sign-model", "--a", "0", "--b", "0", "--n", "5",
               "--format", "plain")[0] == EXIT_USAGE


def test_model_errors_exit_three(capsys, monkeypatch):
    from bellscope import projection
    from bellscope.tensor import E_X, E_Y, wedge

    broken = projection.GeneralizedHVM(
        projection.FiniteStates.uniform([1, -1]), "bivector",
        lambda v, lam: wedge(E_X, E_Y), lambda v, lam: wedge(E_X, E_Y),
        projection.bivector_projections(), name="broken")
    monkeypatch.setattr(projection, "weatherall_ghvm", lambda model=None: broken)
    code, _, err = run(capsys, "trials", "--source", "weatherall-projected", "--a", "0", "--b", "0",
                       "--n", "3", "--format", "json")
    assert code == EXIT_MODEL
    d = json.loads(err)
    assert d["error"] == "reduction" and d["side"] == "A"
    code, _, err = run(capsys, "weatherall-demo", "--a", "0", "--b", "0")
    assert code == EXIT_MODEL and "model error" in err


def test_parse_setting_planes():
    assert parse_setting("90", "xz").array == pytest.approx([0, 0, 1], abs=1e-15)
    assert parse_setting(" 0,3,4 ", "xy").array == pytest.approx([0, 0.6, 0.8])

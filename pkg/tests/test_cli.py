"""Command line interface: outputs, exit codes and determinism."""

import json

import numpy as np
import pytest

from krein_topo.cli import (
    EXIT_CONFIG,
    EXIT_FLAT_BAND,
    EXIT_HYPOTHESIS,
    EXIT_NOT_IN_GAP,
    EXIT_OK,
    fmt_float,
    main,
)
from krein_topo.modelfile import save_model
from krein_topo.normal_forms import block_I
from krein_topo.tight_binding import HoppingModel

FAST = ["--k1-grid", "200"]


def _run(tmp_path, *argv):
    code = main([*argv, "--out", str(tmp_path)])
    return code


def _json(path):
    return json.loads(path.read_text())


def test_spectrum_outputs(tmp_path):
    assert _run(tmp_path, "spectrum", "harper", "--q", "3", "--p", "7", "--energy", "-1.9", "--k2-grid", "21") == EXIT_OK
    lines = (tmp_path / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "k2,re,im"
    assert len(lines) == 1 + 21 * 14
    rep = _json(tmp_path / "spectrum.json")
    assert rep["unit_circle_points"] is False and rep["min_distance_to_circle"] > 0.01
    assert (tmp_path / "spectrum.svg").read_text().startswith("<svg")


def test_spectrum_in_band_touches_circle(tmp_path):
    assert _run(tmp_path, "spectrum", "harper", "--energy", "0.5", "--format", "json") == EXIT_OK
    assert _json(tmp_path / "spectrum.json")["unit_circle_points"] is True
    assert not (tmp_path / "spectrum.csv").exists()


def test_invariants_harper(tmp_path):
    assert _run(tmp_path, "invariants", "harper", "--q", "3", "--p", "7", "--energy", "-1.9", *FAST,
                "--chern-grid", "30") == EXIT_OK
    rep = _json(tmp_path / "invariants.json")
    assert rep["sig"] == rep["chern"] == rep["signature_total"] == 3
    assert rep["agree"] is True and rep["kind"] == [-1]
    rows = (tmp_path / "crossings.csv").read_text().splitlines()
    assert rows[0] == "k1,slope,multiplicity" and len(rows) == 4


def test_invariants_kane_mele(tmp_path):
    assert _run(tmp_path, "invariants", "kanemele", *FAST, "--chern-grid", "20") == EXIT_OK
    rep = _json(tmp_path / "invariants.json")
    assert rep["sig2"] == 1 and rep["kind"] == [-1, -1, 1]


def test_invariants_from_model_file(tmp_path):
    model = HoppingModel(W1=np.eye(2), W2=np.eye(2), V=np.diag([5.0, -5.0]), name="trivial")
    save_model(tmp_path / "m.json", model)
    assert _run(tmp_path, "invariants", "--model-file", str(tmp_path / "m.json"), *FAST, "--chern-grid", "10") == EXIT_OK
    rep = _json(tmp_path / "invariants.json")
    assert rep["crossings"] == [] and rep["chern"] == 0


def test_edge_bands_eigenphases(tmp_path):
    assert _run(tmp_path, "edge-bands", "harper", "--q", "3", "--p", "7", "--energy", "-1.9", *FAST) == EXIT_OK
    lines = (tmp_path / "eigenphases.csv").read_text().splitlines()
    assert lines[0] == "k1,theta0" and len(lines) == 201
    assert _json(tmp_path / "edge_bands.json")["zero_crossings"] == 3
    assert (tmp_path / "eigenphases.svg").exists()


def test_edge_bands_energy_range(tmp_path):
    assert _run(tmp_path, "edge-bands", "harper", "--q", "3", "--p", "7", "--energy-range", "-2.2", "-1.9", "2",
                *FAST) == EXIT_OK
    rep = _json(tmp_path / "edge_bands.json")
    assert [e["status"] for e in rep["energies"]] == ["not_in_gap", "ok"]
    assert rep["energies"][-1]["signature"] == 3


def test_classify_pip(tmp_path):
    assert _run(tmp_path, "classify", "pip", "--mu", "0.2") == EXIT_OK
    rep = _json(tmp_path / "classify.json")
    assert rep["kind"] == [-1, 1, -1]
    assert rep["invariant_fields"] == ["sig", "sec"]
    assert rep["transfer_fiber_k2_0"] == {"fundamental": True, "real": True, "chiral": None}


def test_classify_matrix_file(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"T": np.diag([2.0, 2.0]).tolist(), "J_F": block_I(1).tolist()}))
    assert _run(tmp_path, "classify", "--matrix-file", str(path)) == EXIT_OK
    rep = _json(tmp_path / "classify.json")
    assert rep["symmetries_hold"] is False and "sig" not in rep
    path.write_text(json.dumps({"T": np.diag([2.0, 0.5]).tolist(), "J_F": block_I(1).tolist()}))
    assert _run(tmp_path, "classify", "--matrix-file", str(path)) == EXIT_OK
    assert _json(tmp_path / "classify.json")["sig"] == 0
    path.write_text(json.dumps({"J_F": block_I(1).tolist()}))
    assert _run(tmp_path, "classify", "--matrix-file", str(path)) == EXIT_CONFIG
    O = np.array([[np.cosh(0.3), np.sinh(0.3)], [np.sinh(0.3), np.cosh(0.3)]])
    path.write_text(json.dumps({"T": O.tolist(), "J_F": np.diag([1.0, -1.0]).tolist()}))
    assert _run(tmp_path, "classify", "--matrix-file", str(path)) == EXIT_OK
    rep = _json(tmp_path / "classify.json")
    assert rep["symmetries_hold"] is True and rep["unit_eigenvalues"] == []


def test_collide_krein_2x2(tmp_path):
    assert _run(tmp_path, "collide", "krein_2x2", "--a", "1.0", "--steps", "5") == EXIT_OK
    steps = _json(tmp_path / "collision.json")["steps"]
    assert [s["t"] for s in steps] == [-2.0, -1.0, 0.0, 1.0, 2.0]
    assert all(s["sig"] == 0 for s in steps)
    assert [s["off_circle"] for s in steps] == [2, 2, 0, 2, 2]
    assert (tmp_path / "collision.csv").read_text().startswith("t,re,im,abs\n")


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum"],
        ["spectrum", "harper", "--k2-grid", "2"],
        ["spectrum", "harper", "--format", "png"],
        ["invariants", "nope"],
        ["collide", "krein_2x2", "--param", "a"],
        ["collide", "krein_2x2", "--steps", "1"],
        ["collide", "krein_2x2", "--param", "lam=2"],
        ["classify"],
        ["invariants", "harper", "--model-file", "x.json"],
        ["invariants", "--model-file", "/nonexistent/m.json"],
    ],
)
def test_configuration_errors(argv, tmp_path, capsys):
    with pytest.raises(SystemExit) if argv[:2] == ["invariants", "nope"] else _nullcontext():
        code = _run(tmp_path, *argv)
        assert code == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


class _nullcontext:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def test_not_in_gap_exit(tmp_path):
    assert _run(tmp_path, "invariants", "harper", "--q", "3", "--p", "7", "--energy", "-2.2", *FAST) == EXIT_NOT_IN_GAP


def test_hypothesis_exit(tmp_path):
    model = HoppingModel(W1=np.eye(1), W2=np.zeros((1, 1)), V=np.zeros((1, 1)))
    save_model(tmp_path / "m.json", model)
    assert _run(tmp_path, "invariants", "--model-file", str(tmp_path / "m.json"), "--energy", "3", *FAST) == EXIT_HYPOTHESIS


def test_flat_band_exit(tmp_path, monkeypatch):
    from krein_topo import edge

    monkeypatch.setattr(edge, "eigenphases", lambda model, E, k, tol=None: np.zeros(1))
    assert _run(tmp_path, "invariants", "harper", "--q", "3", "--p", "7", "--energy", "-1.9", *FAST) == EXIT_FLAT_BAND


def test_outputs_are_deterministic(tmp_path):
    argv = ["invariants", "pip", "--mu", "0.2", *FAST, "--chern-grid", "20"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(a, *argv) == _run(b, *argv) == EXIT_OK
    for name in ("invariants.json", "crossings.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_float_format_round_trips():
    for x in (0.1, -1.9, 1e-300, np.pi, 2.0 / 3.0):
        assert float(fmt_float(x)) == x

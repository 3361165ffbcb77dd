import csv
import io as _io
import json

import numpy as np
import pytest

from lipfree import io
from lipfree.cli import run
from lipfree.free_space import FreeElement, MolecularDecomposition, Molecule, molecule_element
from lipfree.lip_func import LipFunction
from lipfree.metric_core import build_ladder, euclidean_space


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def ladder_files(tmp_path):
    space_p = write(tmp_path / "ladder.json",
                    {"ladder": {"n_levels": 4, "rung_resolution": 4, "side_resolution": 4,
                                "extra_heights": [0.1]}})
    sp, _ = io.load_space(space_p)
    u, v = sp.find((0.0, 0.1)), sp.find((1.0, 0.1))
    el = molecule_element(sp, 0, 1) - molecule_element(sp, u, v)
    el_p = write(tmp_path / "el.json", io.element_to_json(el))
    return space_p, el_p


def test_space_roundtrip_bit_exact(rng, tmp_path):
    sp = euclidean_space(rng.random((12, 2)))
    text = io.dumps(io.space_to_json(sp))
    back, graph = io.space_from_json(json.loads(text))
    assert graph is None
    assert np.array_equal(back.dist, sp.dist)
    assert io.dumps(io.space_to_json(back)) == text


def test_ladder_roundtrip():
    sp = build_ladder(3, 4, 2)
    back, _ = io.space_from_json(json.loads(io.dumps(io.space_to_json(sp))))
    assert back.kind == "ladder" and np.array_equal(back.coords, sp.coords)


def test_element_function_decomposition_roundtrip(rng):
    sp = euclidean_space(rng.random((6, 2)))
    el = FreeElement(sp, {1: 0.1 + 0.2, 4: -1 / 3})
    assert io.element_from_json(sp, json.loads(io.dumps(io.element_to_json(el)))).coeffs == el.coeffs
    f = LipFunction(sp, rng.normal(size=6))
    g = io.function_from_json(sp, json.loads(io.dumps(io.function_to_json(f))))
    assert np.array_equal(f.values, g.values)
    dec = MolecularDecomposition(sp, [(0.7, Molecule(1, 2)), (1 / 3, Molecule(3, 0))])
    back = io.decomposition_from_json(sp, json.loads(io.dumps(io.decomposition_to_json(dec))))
    assert back.terms == dec.terms


def test_parse_error_has_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"dist": [[0, 1],\n [1, 0]')
    with pytest.raises(io.ParseError, match=r"bad.json:2:"):
        io.read_json(p)
    assert run(["norm", "--space", str(p), "--element", str(p)]) == 1


def test_unknown_format(tmp_path):
    with pytest.raises(io.ParseError):
        io.space_from_json({"points": []})


def test_cli_norm_two_delta(ladder_files, capsys):
    space_p, el_p = ladder_files
    assert run(["norm", "--space", space_p, "--element", el_p]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["value"] == pytest.approx(0.2, abs=1e-12)
    assert out["seed"] == 0 and out["rng"] == "numpy.PCG64"


def test_cli_decompose_and_lip(ladder_files, tmp_path, capsys):
    space_p, el_p = ladder_files
    assert run(["decompose", "--space", space_p, "--element", el_p]) == 0
    out = json.loads(capsys.readouterr().out)
    assert sum(t[0] for t in out["terms"]) == pytest.approx(0.2)
    sp, _ = io.load_space(space_p)
    f_p = write(tmp_path / "f.json", io.function_to_json(LipFunction(sp, sp.coords[:, 0])))
    assert run(["lip", "--space", space_p, "--function", f_p]) == 0
    assert json.loads(capsys.readouterr().out)["lip"] == pytest.approx(1.0)


def test_cli_validate_perturbed(tmp_path, capsys):
    p = write(tmp_path / "m.json", {"dist": [[0, 1, 3], [1, 0, 1], [3, 1, 0]]})
    assert run(["validate", "--space", p]) == 2
    captured = capsys.readouterr()
    assert "triangle" in captured.err
    assert [0, 1, 2] in json.loads(captured.out)["triangle_violations"]


def test_cli_validate_roundtrip(tmp_path, rng):
    sp = euclidean_space(rng.random((5, 2)))
    p = write(tmp_path / "m.json", io.space_to_json(sp))
    rt = tmp_path / "rt.json"
    assert run(["validate", "--space", p, "--roundtrip", str(rt), "--out", str(tmp_path / "r.json")]) == 0
    back, _ = io.load_space(rt)
    assert np.array_equal(back.dist, sp.dist)


def test_cli_zigzag_csv(tmp_path, capsys):
    g = write(tmp_path / "g.json", {"graph": {"vertices": ["a", "b"], "edges": [[0, 1, 1.0]]},
                                    "base": 0, "geodesics": [[1, 0]]})
    assert run(["zigzag", "--graph", g, "--k", "1..8"]) == 0
    rows = list(csv.DictReader(_io.StringIO(capsys.readouterr().out)))
    assert [int(r["k"]) for r in rows] == list(range(1, 9))
    assert all(abs(float(r["norm_mu"]) - 1) < 1e-9 for r in rows)


def test_cli_nonwasq(capsys):
    assert run(["ladder-nonwasq", "--levels", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lip_constant"] <= 3 + 1e-9


def test_cli_molecule_filter(tmp_path, capsys):
    sp = write(tmp_path / "l.json", {"ladder": {"n_levels": 10, "rung_resolution": 16,
                                                "side_resolution": 4, "extra_heights": [0.03125]}})
    assert run(["molecule-filter", "--space", sp, "--eps", "0.5",
                "--rung-height", str(2 ** -10), "--k", "4"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["distance"] < 0.5
    # a zigzag high on the ladder fails the hypothesis
    assert run(["molecule-filter", "--space", sp, "--eps", "0.5", "--rung-height", "0.25"]) == 2


def test_cli_usage_errors(capsys):
    assert run([]) == 1
    assert run(["bogus"]) == 1
    assert run(["norm"]) == 1
    assert run(["zigzag", "--k", "x..y", "--graph", "missing.json"]) == 1


def test_cli_reproducible(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        p = tmp_path / name
        assert run(["oracle-suite", "--count", "10", "--seed", "4", "--out", str(p)]) == 0
        obj = json.loads(p.read_text())
        assert obj.pop("timestamp")
        outs.append(io.dumps(obj))
    assert outs[0] == outs[1]


def test_cli_ssd2p(tmp_path):
    p = tmp_path / "r.json"
    assert run(["ssd2p-refute", "--d", "1", "--seed", "2", "--out", str(p)]) == 0
    rep = json.loads(p.read_text())
    assert rep["verdict"] and all(rep["checks"].values())
    assert rep["seed"] == 2

import io
import json
import subprocess
import sys

import pytest

from twoone.cli import main, parse_range
from twoone.core import extree_slice
from twoone.constructions import structure_prop33A
from twoone.errors import SpecError
from twoone.specfile import build_structure

PROP33A = {"kind": "closed-form", "name": "prop33a"}


def run(argv, stdin=None, monkeypatch=None, capsys=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def spec_file(tmp_path):
    def write(doc, name="s.json"):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)

    return write


@pytest.fixture
def cli(monkeypatch, capsys):
    def call(argv, stdin=None):
        return run(argv, stdin, monkeypatch, capsys)

    return call


def test_construct_pipe_inspect(cli):
    code, out, _ = cli(["construct", "prop33a"])
    assert code == 0
    code, out, _ = cli(["inspect", "--beta", "0..13"], stdin=out)
    assert code == 0
    assert json.loads(out)["split_hairs"] == [1, 5, 9, 13]


def test_export_dot(cli, spec_file):
    code, out, _ = cli(["export-dot", "--spec", spec_file(PROP33A), "--root", "1", "--depth", "3"])
    assert code == 0
    nodes = {int(l.split()[0]) for l in out.splitlines() if "shape=" in l}
    T = extree_slice(structure_prop33A(), 1, 1, 3, 1000)
    assert nodes == T.nodes() == {1, 2, 4, 8}
    assert "1 -> 1 [style=solid" in out
    assert "1 [shape=doublecircle]" in out
    assert "8 -> 4 [style=dashed]" in out


def test_export_dot_deterministic(cli, spec_file, tmp_path):
    path = spec_file(PROP33A)
    outs = {cli(["export-dot", "--spec", path, "--root", "9", "--depth", "4"])[1] for _ in range(3)}
    assert len(outs) == 1
    target = tmp_path / "out.dot"
    code, out, _ = cli(["export-dot", "--spec", path, "--root", "9", "--depth", "4", "-o", str(target)])
    assert code == 0 and target.read_text() == outs.pop()


def test_iso_identity(cli, spec_file):
    path = spec_file(PROP33A)
    code, out, _ = cli(["iso", "--A", path, "--B", path, "--a0", "2", "--b0", "2", "--stages", "3"])
    assert code == 0
    rows = json.loads(out)["pairs"]
    assert all(x == y for x, y, _ in rows)
    assert [r[0] for r in rows] == [2, 4, 8, 16]


def test_iso_seeded_relabel(cli, spec_file):
    shapes = {"kind": "shapes", "rules": {"M": ["M", "N"], "N": ["L"], "L": ["M", "M"]}, "cycles": [["M"]]}
    path = spec_file(shapes)
    from twoone.families import random_permutation

    b0 = random_permutation(200, 5)[1]
    code, out, _ = cli(["iso", "--A", path, "--seed", "5", "--a0", "1", "--b0", str(b0), "--check"])
    assert code == 0 and json.loads(out)["verify"]["ok"]


def test_iso_extree_and_structure(cli, spec_file):
    path = spec_file(PROP33A)
    code, out, _ = cli(["iso", "--A", path, "--B", path, "--a0", "1", "--b0", "5", "--cyclic", "1", "--stages", "2"])
    assert code == 0 and json.loads(out)["pairs"] == [[1, 5, 0], [2, 6, 1], [4, 12, 2]]
    code, out, _ = cli(["iso", "--A", path, "--B", path, "--ks", "1", "--cycle-bound", "10", "--stages", "2"])
    assert code == 0 and json.loads(out)["complete"]


def test_domain_error_exit_one(cli, spec_file):
    path = spec_file(PROP33A)
    code, _, err = cli(["iso", "--A", path, "--B", path, "--a0", "1", "--b0", "3", "--cyclic", "1"])
    assert code == 1 and "OracleMismatch" in err


def test_argument_errors_exit_two(cli, spec_file):
    assert cli(["nonsense"])[0] == 2
    assert cli(["tree", "--root", "-3"])[0] == 2
    path = spec_file(PROP33A)
    assert cli(["inspect", "--spec", path, "--beta", "9..2"])[0] == 2
    assert cli(["iso", "--A", path, "--B", path])[0] == 2
    bad = spec_file({"kind": "mystery"}, "bad.json")
    assert cli(["build", "--spec", bad])[0] == 2
    assert cli(["construct", "prop32"])[0] == 2


def test_unresolved_is_success(cli, spec_file):
    code, out, _ = cli(["orbit", "--spec", spec_file({"kind": "closed-form", "name": "zchain"}), "--x", "4", "--step-cap", "40"])
    assert code == 0 and json.loads(out)["cycle"]["verdict"] == "unresolved"
    code, out, _ = cli(["extree", "--spec", spec_file(PROP33A), "--root", "8"])
    assert code == 0 and json.loads(out)["verdict"] == "not-found"
    code, out, _ = cli(["tree-cmp", "--A", spec_file(PROP33A), "--x", "2", "--y", "6", "--depth", "3"])
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "unresolved" and doc["isomorphic"]


def test_tree_and_text_format(cli, spec_file):
    path = spec_file(PROP33A)
    code, out, _ = cli(["tree", "--spec", path, "--root", "6", "--depth", "2"])
    assert json.loads(out)["levels"] == [[6], [12], [24]]
    code, out, _ = cli(["tree", "--spec", path, "--root", "6", "--depth", "2", "--format", "text"])
    assert code == 0 and any(l.startswith("levels") for l in out.splitlines())


def test_build_table(cli, spec_file):
    path = spec_file({"kind": "table", "values": [0, 0, 1, 1, 2, 2], "fallback": "identity"})
    code, out, _ = cli(["build", "--spec", path, "-n", "7"])
    assert json.loads(out)["values"]["7"] == 7


def test_verify_roundtrip(cli, spec_file, tmp_path):
    path = spec_file(PROP33A)
    code, out, _ = cli(["iso", "--A", path, "--B", path, "--a0", "2", "--b0", "2"])
    iso = tmp_path / "h.json"
    iso.write_text(out)
    code, out, _ = cli(["verify", "--A", path, "--B", path, "--iso", str(iso)])
    assert code == 0 and json.loads(out)["ok"]
    bad = json.loads(iso.read_text())
    bad["pairs"][1][1] = 6
    iso.write_text(json.dumps(bad))
    code, out, _ = cli(["verify", "--A", path, "--B", path, "--iso", str(iso)])
    assert code == 0 and not json.loads(out)["ok"]


def test_construct_with_registry_file(cli, tmp_path):
    reg = tmp_path / "r.json"
    reg.write_text(json.dumps([{"e": 0, "entries": [{"x": 0, "value": 1, "steps": 0},
                                                      {"x": 2, "value": 1, "steps": 3}]}]))
    code, out, _ = cli(["construct", "prop31", "--stages", "6", "--registry", str(reg)])
    assert code == 0
    doc = json.loads(out)
    assert doc["structure"]["kind"] == "construction"
    code, out2, _ = cli(["inspect", "--beta", "0..3", "--bound", "100"], stdin=out)
    assert code == 0 and 2 in json.loads(out2)["split_hairs"]


def test_every_verb_emits_json(cli, spec_file, tmp_path):
    path = spec_file(PROP33A)
    iso = tmp_path / "h.json"
    iso.write_text(json.dumps([[2, 2, 0]]))
    commands = [
        ["build", "--spec", path],
        ["inspect", "--spec", path],
        ["orbit", "--spec", path, "--x", "40", "--bound", "100"],
        ["tree", "--spec", path, "--root", "1"],
        ["extree", "--spec", path, "--root", "1"],
        ["iso", "--A", path, "--B", path, "--a0", "2", "--b0", "2"],
        ["tree-cmp", "--A", path, "--x", "9", "--y", "13"],
        ["construct", "prop33a"],
        ["verify", "--A", path, "--B", path, "--iso", str(iso)],
        ["export-dot", "--spec", path, "--root", "1", "-o", str(tmp_path / "x.dot")],
    ]
    for argv in commands:
        code, out, _ = cli(argv)
        assert code == 0, argv
        json.loads(out)


def test_range_parse():
    assert parse_range("0..13") == range(0, 14)
    assert parse_range("4") == range(4, 5)


class TestSpecFile:
    def test_relabel_offset(self):
        S = build_structure({**PROP33A, "relabel": {"offset": 100}})
        assert S.apply(106) == 105 and S.beta(101) == 2

    def test_relabel_seed(self):
        S = build_structure({**PROP33A, "relabel": {"seed": 1, "n": 30}, "oracles": False})
        assert not S.has_beta

    def test_shapes_and_errors(self):
        S = build_structure({"kind": "shapes", "rules": {"C": ["C"]}, "cycles": [["C"]]})
        assert S.apply(1) == 0
        for bad in ({"kind": "table", "values": []}, {"kind": "closed-form", "name": "x"}, [1]):
            with pytest.raises(SpecError):
                build_structure(bad)


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "twoone", "construct", "prop33a"], capture_output=True, text=True
    )
    assert out.returncode == 0 and json.loads(out.stdout)["construction"] == "prop33a"

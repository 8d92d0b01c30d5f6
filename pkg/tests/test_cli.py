import csv
import io
import json
import subprocess
import sys

import jsonschema
import pytest

import assembly_modes.cli as cli
from assembly_modes import PUBLISHED_LENGTHS
from assembly_modes.cli import SCHEMA_PATH, InputError, read_lengths, run_command
from assembly_modes.distance import V17_EDGE_ORDER

SCHEMA = json.loads(SCHEMA_PATH.read_text())
GENERIC = [75, 103, 204, 165, 77, 138, 146, 89, 192, 80, 130]


def run_json(capsys, *argv):
    code = run_command(["--json", *argv])
    out = capsys.readouterr().out
    doc = json.loads(out) if code == 0 else None
    if doc is not None:
        jsonschema.validate(doc, SCHEMA)
    return code, doc


def strip_times(doc):
    doc = json.loads(json.dumps(doc))
    for key in ("started", "finished"):
        doc["manifest"].pop(key)
    return doc


@pytest.fixture
def lengths_file(tmp_path):
    def write(payload, name="lengths.json"):
        p = tmp_path / name
        p.write_text(json.dumps(payload))
        return str(p)

    return write


# -- read_lengths -------------------------------------------------------------------


def test_vector_of_hundreds_is_valid(lengths_file):
    L = read_lengths(lengths_file([100] * 11))
    assert all(L[e] == 100 for e in V17_EDGE_ORDER)


def test_published_vector_follows_edge_order(lengths_file):
    L = read_lengths(lengths_file({"vector": list(PUBLISHED_LENGTHS)}))
    assert L[(1, 2)] == 180 and L[(1, 3)] == 70 and L[(5, 6)] == 200 and L[(5, 7)] == 100


def test_edge_map_form(lengths_file):
    edges = {f"{i}-{j}": 100 + k for k, (i, j) in enumerate(V17_EDGE_ORDER)}
    L = read_lengths(lengths_file({"edges": edges}))
    assert L[(4, 7)] == 108
    edges["7-5"] = edges.pop("5-7")  # either orientation is accepted
    assert read_lengths(lengths_file({"edges": edges}))[(5, 7)] == 110


@pytest.mark.parametrize(
    "payload",
    [
        [100] * 10,
        [100] * 10 + [0],
        [100] * 10 + [-3],
        [100] * 10 + ["a"],
        [100] * 10 + [True],
        {"edges": {"1-2": 100}},
        {"edges": {**{f"{i}-{j}": 100 for i, j in V17_EDGE_ORDER}, "1-5": 100}},
        {"edges": {"x": 1}},
        {"lengths": [100] * 11},
        "text",
    ],
)
def test_bad_inputs_are_rejected(lengths_file, payload):
    with pytest.raises(InputError):
        read_lengths(lengths_file(payload))


def test_missing_and_garbled_files(tmp_path):
    with pytest.raises(InputError):
        read_lengths(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        read_lengths(bad)


# -- subcommands ---------------------------------------------------------------------


def test_mixed_volume_prints_56(capsys):
    assert run_command(["mixed-volume", "--topology", "v17"]) == 0
    assert capsys.readouterr().out.split() == ["56"]
    code, doc = run_json(capsys, "mixed-volume", "--topology", "V17")
    assert doc["result"]["mixed_volume"] == 56 and doc["result"]["bezout"] == 72


def test_bounds_for_seven_vertices(capsys):
    code, doc = run_json(capsys, "bounds", "--n", "7")
    assert code == 0
    assert doc["result"]["fan_lower"] == 56 and doc["result"]["bezout"] == 1024


def test_topology_show(capsys):
    code, doc = run_json(capsys, "topology", "show", "v17")
    assert code == 0
    assert doc["result"]["n"] == 7 and len(doc["result"]["edges"]) == 11


def test_system_build_writes_manifest(capsys, tmp_path):
    out = tmp_path / "system.json"
    code, doc = run_json(capsys, "system", "build", "--topology", "v17", "--out", str(out))
    assert code == 0
    system = json.loads(out.read_text())
    assert system["mixed_volume"] == 56
    manifest = json.loads((tmp_path / "system.json.manifest.json").read_text())
    assert manifest["outputs"] == [str(out)]
    assert manifest["command"][:3] == ["--json", "system", "build"]


def test_count_is_deterministic(capsys, lengths_file):
    path = lengths_file(GENERIC)
    code, first = run_json(capsys, "count", "--lengths", path, "--seed", "3")
    assert code == 0
    code, second = run_json(capsys, "count", "--lengths", path, "--seed", "3")
    assert strip_times(first) == strip_times(second)
    res = first["result"]
    assert res["N"] == res["real_positive"] and res["embeddable"] <= res["N"] <= 56


def test_global_flags_work_before_and_after_subcommand(capsys):
    assert run_command(["--json", "bounds", "--n", "5"]) == 0
    before = json.loads(capsys.readouterr().out)
    assert run_command(["bounds", "--n", "5", "--json"]) == 0
    after = json.loads(capsys.readouterr().out)
    assert before["result"] == after["result"]


def test_realize_writes_svg(capsys, lengths_file, tmp_path):
    svg = tmp_path / "modes.svg"
    coords = tmp_path / "modes.json"
    code, doc = run_json(capsys, "realize", "--lengths", lengths_file(GENERIC), "--out", str(svg),
                         "--mirror", "--coords", str(coords))
    assert code == 0
    res = doc["result"]
    assert res["cells"] == 2 * res["embeddable"]
    assert svg.read_text().count('<g id="mode-') == res["cells"]
    assert len(json.loads(coords.read_text())) == res["embeddable"]
    assert (tmp_path / "modes.svg.manifest.json").exists()


def test_optimize_csv(capsys, tmp_path):
    out = tmp_path / "runs.csv"
    code, doc = run_json(capsys, "optimize", "--method", "random", "--budget", "3", "--runs", "2",
                         "--seed", "5", "--out", str(out))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["seed"] for r in rows] == ["5", "6"]
    assert [r["display"] for r in rows] == [r["display"] for r in doc["result"]["runs"]]


# -- exit codes ------------------------------------------------------------------------


def test_malformed_input_exits_1(capsys, lengths_file):
    assert run_command(["count", "--lengths", lengths_file([100] * 10 + [0])]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_topology_exits_1():
    with pytest.raises(SystemExit) as exc:
        run_command(["mixed-volume", "--topology", "v99"])
    assert exc.value.code == 1


def test_bad_optimizer_settings_exit_1(capsys):
    assert run_command(["optimize", "--method", "ce", "--budget", "0", "--runs", "1"]) == 1


def test_all_paths_lost_exits_2(capsys, lengths_file, monkeypatch):
    def lost(*args, **kwargs):
        raise cli.SolverFailure("all paths were lost")

    monkeypatch.setattr(cli, "_count_payload", lost)
    assert run_command(["count", "--lengths", lengths_file(GENERIC)]) == 2
    assert "solver failure" in capsys.readouterr().err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "assembly_modes", "bounds", "--n", "7"],
                          capture_output=True, text=True, check=True)
    assert "56" in proc.stdout

import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from conftest import FIXTURES
from gdfractal.cli import run
from gdfractal.render import render_svg

FIX = {name: str(FIXTURES / name) for name in
       ["cantor.json", "example47.json", "example43.json", "fig2.json", "t2_equalgap.json"]}


def ok(*argv):
    code, out, err = run(list(argv))
    assert code == 0, err
    return out


def report(*argv):
    return json.loads(ok(*argv))


def test_validate():
    r = report("validate", FIX["example47.json"])
    assert r["result"]["valid"] and r["result"]["edges"] == 4
    assert r["spec"]["schema"] == "gdfractal/1" and len(r["spec_sha256"]) == 64


def test_construct_example47():
    r = report("construct", FIX["example47.json"])["result"]
    assert r["lengths"] == {"1": "25/2*lam", "2": "63/4*lam"}
    assert [m["translation"] for m in r["maps"]] == ["0", "29/4*lam", "0", "27/2*lam"]
    assert r["matrix"] == [["1/2", "1/3"], ["1/5", "1/7"]]
    assert r["contractive"]["proof"] == "row-sum"
    assert r["separation"]["status"] == "CSSC"
    assert r["separation"]["Lambda"] == {"1": ["lam"], "2": ["11*lam"]}


def test_classify_example47():
    r = report("classify", FIX["example47.json"])["result"]
    assert {v: d["outcome"] for v, d in r["verdicts"].items()} == {"1": "NotCoscSelfSimilar", "2": "NotCoscSelfSimilar"}


def test_classify_with_oracle_depth():
    r = report("classify", FIX["example47.json"], "--vertex", "1", "--depth", "8")["result"]
    breach = r["verdicts"]["1"]["certificate"]["breach"]
    assert "1/7" in breach["theta1_in_cone"] and breach["theta2_in_cone"] == []


def test_extract_fig2():
    r = report("extract", FIX["fig2.json"], "--vertex", "3")["result"]
    maps = r["extracted"]["3"]["maps"]
    assert [(m["ratio"], m["translation"]) for m in maps] == [("1/3", "0"), ("1/3", "2")]


def test_gaps_example47():
    r = report("gaps", FIX["example47.json"], "--vertex", "1", "--depth", "1")["result"]
    assert sorted(r["catalogs"]["1"]["values"]) == sorted(["lam", "1/2*lam", "11/3*lam"])
    assert r["catalogs"]["1"]["count"] == 3


def test_text_format():
    out = ok("validate", FIX["cantor.json"], "--format", "text")
    assert "command: validate" in out and "valid: True" in out


def test_out_file(tmp_path):
    target = tmp_path / "r.json"
    code, out, err = run(["construct", FIX["cantor.json"], "--out", str(target)])
    assert (code, out, err) == (0, "", "")
    assert json.loads(target.read_text())["result"]["lengths"] == {"1": "1"}


def test_timing_is_opt_in():
    assert "timing_s" not in report("validate", FIX["cantor.json"])
    assert "timing_s" in report("validate", FIX["cantor.json"], "--timing")


# ---------------------------------------------------------------------------
# exit codes

def write(tmp_path, text, name="spec.json"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def mutated(tmp_path, **changes):
    doc = json.loads((FIXTURES / "cantor.json").read_text())
    doc.update(changes)
    return write(tmp_path, json.dumps(doc))


@pytest.mark.parametrize("case,code,error", [
    ("valid", 0, None),
    ("parse", 1, "ParseError"),
    ("validation", 1, "ValidationError"),
    ("missing-file", 1, "FileNotFoundError"),
    ("bad-command", 1, "UsageError"),
    ("unknown-vertex", 1, "UsageError"),
    ("not-contractive", 1, "NotContractive"),
    ("not-extractable", 1, "CircuitAvoidsU"),
    ("budget", 1, "DepthTooLarge"),
])
def test_exit_code_matrix(tmp_path, case, code, error):
    builders = {
        "valid": lambda: ["classify", FIX["cantor.json"]],
        "parse": lambda: ["validate", write(tmp_path, "{oops")],
        "validation": lambda: ["validate", mutated(tmp_path, gaps={"1": ["0"]})],
        "missing-file": lambda: ["validate", str(tmp_path / "absent.json")],
        "bad-command": lambda: ["frobnicate", FIX["cantor.json"]],
        "unknown-vertex": lambda: ["classify", FIX["cantor.json"], "--vertex", "9"],
        "not-contractive": lambda: ["construct", mutated(tmp_path, edges=[{"from": "1", "to": "1", "ratio": "1/2"},
                                                                  {"from": "1", "to": "1", "ratio": "1/2"}])],
        "not-extractable": lambda: ["extract", FIX["example47.json"], "--vertex", "1"],
        "budget": lambda: ["gaps", FIX["cantor.json"], "--depth", "30", "--max-intervals", "100"],
    }
    argv = builders[case]()
    got, out, err = run(argv)
    assert got == code
    if error is None:
        assert err == "" and json.loads(out)
    else:
        assert out == "" and json.loads(err)["error"] == error


def test_internal_error_is_exit_2(monkeypatch):
    import gdfractal.cli as cli

    def boom(spec, args):
        raise RuntimeError("kaboom")

    monkeypatch.setitem(cli.HANDLERS, "validate", boom)
    code, out, err = run(["validate", FIX["cantor.json"]])
    assert code == 2 and json.loads(err) == {"error": "InternalError", "type": "RuntimeError", "message": "kaboom"}


def test_validation_error_lists_positions(tmp_path):
    doc = json.loads((FIXTURES / "cantor.json").read_text())
    doc["edges"][0]["ratio"] = "3/2"
    code, _, err = run(["validate", write(tmp_path, json.dumps(doc))])
    assert code == 1
    assert json.loads(err)["errors"] == [{"path": "edges[0].ratio", "message": "|ratio| = 3/2 is not < 1"}]


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "gdfractal", "validate", FIX["cantor.json"]],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["result"]["valid"]
    bad = subprocess.run([sys.executable, "-m", "gdfractal", "validate", "/nonexistent.json"],
                         capture_output=True, text=True)
    assert bad.returncode == 1 and json.loads(bad.stderr)["error"] == "FileNotFoundError"


def test_stdin_spec():
    text = (FIXTURES / "cantor.json").read_text()
    out = subprocess.run([sys.executable, "-m", "gdfractal", "validate", "-"], input=text,
                         capture_output=True, text=True)
    assert out.returncode == 0


# ---------------------------------------------------------------------------
# determinism and rendering

@pytest.mark.parametrize("name", list(FIX))
@pytest.mark.parametrize("command", ["construct", "classify", "gaps"])
def test_reports_byte_identical(name, command):
    argv = [command, FIX[name]]
    if command == "gaps":
        argv += ["--depth", "3"]
    assert run(argv) == run(argv)


def test_render_cantor():
    svg = ok("render", FIX["cantor.json"], "--depth", "3")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg") and root.get("version") == "1.1" and root.get("viewBox")
    assert svg == ok("render", FIX["cantor.json"], "--depth", "3")
    assert len([el for el in root.iter() if el.tag.endswith("rect")]) == 1 + 2 + 4 + 8


def test_render_depth_zero_is_hull(cantor):
    root = ET.fromstring(render_svg(cantor, "1", 0))
    assert len([el for el in root.iter() if el.tag.endswith("rect")]) == 1


def test_render_example47_spans_hull(ex47):
    svg = render_svg(ex47, "1", 2)
    assert "over [0, 12.5]" in svg and svg == render_svg(ex47, "1", 2)
    root = ET.fromstring(svg)
    bars = [el for el in root.iter() if el.tag.endswith("rect")]
    assert (bars[0].get("x"), bars[0].get("width")) == ("20", "760")
    # label of the basic gap (25/4, 29/4) sits at its midpoint
    assert [el.get("x") for el in root.iter() if el.tag.endswith("text")] == ["430.4"]


def test_render_numeric_spec(ex43):
    svg = render_svg(ex43, "3", 2)
    assert ET.fromstring(svg).get("viewBox") and "lam*pi" in svg


def test_render_to_file(tmp_path):
    target = tmp_path / "f.svg"
    code, _, _ = run(["render", FIX["fig2.json"], "--vertex", "1", "--depth", "2", "--out", str(target)])
    assert code == 0 and ET.parse(target).getroot().tag.endswith("svg")

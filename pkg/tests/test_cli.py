import io
import json
import subprocess
import sys

import pytest

from potfin.cli import run
from potfin.errors import SchemaError
from potfin.report import LawReport, Verdict
from potfin.sysdef import load_system, system_from_definition
from potfin.system import check_laws

TWO = {"name": "two", "index": {"kind": "nat", "start": 1},
       "stages": {"1": ["x"], "2": ["x", "y"]},
       "emb": {"1->2": {"x": "x"}},
       "proj": {"2->1": {"x": "x", "y": "x"}}}

SKEW = {"name": "skew", "stages": {"1": ["x", "y"], "2": ["x", "y"]},
        "emb": {"1->2": {"x": "x", "y": "y"}},
        "proj": {"2->1": {"x": "x", "y": "x"}},
        "pmap": [[2, "x", 1, "x"], [2, "y", 1, "y"]]}


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def cli_json(*argv):
    code, out, err = cli(*argv, "--format", "json")
    return code, (json.loads(out) if out else None), err


def write(tmp_path, doc, name="sys.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return str(p)


def test_check_nat_passes():
    code, doc, _ = cli_json("check", "nat", "--laws", "all", "--max-stage", "8")
    assert code == 0
    assert doc["v"] == 1
    laws = [r["law"] for r in doc["results"]]
    assert laws == sorted(laws)


def test_json_report_round_trips():
    code, out, _ = cli("check", "dyadic", "--max-stage", "4", "--format", "json")
    assert code == 0
    rep = LawReport.from_json(out)
    assert rep.to_dict() == json.loads(out)
    assert LawReport.from_json(rep.to_json()).to_dict() == rep.to_dict()


def test_law_selection_and_parallel_runs_agree():
    a = cli("check", "nat", "--laws", "fun,stab,tmax", "--max-stage", "5")
    b = cli("check", "nat", "--laws", "fun,stab,tmax", "--max-stage", "5", "--jobs", "3")
    assert a == b
    assert a[0] == 0
    assert [ln.split()[2] for ln in a[1].splitlines() if ln.strip().startswith("[")] == ["FUN", "STAB", "TMAX"]


def test_exit_one_iff_some_law_fails(tmp_path):
    code, doc, _ = cli_json("check", write(tmp_path, SKEW))
    fails = [r for r in doc["results"] if r["verdict"] == "fail"]
    assert code == 1 and fails
    assert all(r.get("counterexample") for r in fails)
    code, doc, _ = cli_json("check", write(tmp_path, TWO, "two.json"))
    assert code == 0
    assert all(r["verdict"] != "fail" for r in doc["results"])


def test_input_errors_exit_two(tmp_path):
    broken = dict(TWO, proj={})
    code, _, err = cli("check", write(tmp_path, broken))
    assert code == 2 and "2->1" in err
    assert cli("frobnicate")[0] == 2
    assert cli("check", "nat", "--wat")[0] == 2
    assert cli("check", "nat", "--laws", "NOPE")[0] == 2
    assert cli("check", "no-such-system")[0] == 2
    assert cli("check", "nat", "--max-stage", "0")[0] == 2
    code, _, err = cli("eval", "if 0 then 1 else 2", "--stage", "3")
    assert code == 2 and "scrutinee nat" in err
    code, _, err = cli("eval", r"\x:nat", "--stage", "3")
    assert code == 2 and "1:7" in err


def test_invalid_json_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json", encoding="utf-8")
    code, _, err = cli("check", str(p))
    assert code == 2 and "invalid JSON" in err


def test_resource_cap_exits_three(monkeypatch):
    monkeypatch.setenv("POTFIN_CAP", "10")
    code, _, err = cli("funspace", "nat", "nat", "--max-stage", "3")
    assert code == 3 and "cap" in err


def test_limit_of_nat():
    code, doc, _ = cli_json("limit", "nat", "--max-stage", "5")
    assert code == 0
    assert doc["meta"]["dynamic-elements"] == 5
    assert doc["meta"]["complete"] is True


def test_funspace_with_iso_certificate():
    code, doc, _ = cli_json("funspace", "nat", "nat", "--max-stage", "3", "--verify-iso")
    assert code == 0
    assert doc["meta"]["cardinalities"]["2->2"] == [4, 4]
    assert doc["meta"]["certificate"]
    code, doc, _ = cli_json("funspace", "nat", "bool", "--max-stage", "3", "--verify-iso")
    assert code == 0 and doc["meta"]["sizes"]["3->*"] == 8


def test_continuity_of_forall():
    code, doc, _ = cli_json("continuity", "--fn", "forall", "--max-i", "16")
    assert code == 0
    assert doc["meta"]["witnesses"] == []
    code, out, _ = cli("continuity", "--fn", "forall", "--max-i", "16")
    assert "# witnesses: []" in out


def test_continuity_of_succ():
    code, doc, _ = cli_json("continuity", "--fn", "succ", "--max-i", "3", "--max-j", "3")
    assert code == 0
    assert doc["meta"]["witnesses"] == ["1->2", "1->3", "2->3"]


def test_eval():
    code, doc, _ = cli_json("eval", r"(\x:nat. succ x) 3", "--stage", "6")
    assert code == 0 and doc["meta"]["value"] == "4"
    code, doc, _ = cli_json("eval", r"\x:nat. x", "--stage", "2", "--consistency", "4")
    assert code == 0 and doc["meta"]["value"] == "{0->0,1->1}"
    code, doc, _ = cli_json("eval", "3", "--stage", "2", "--consistency", "6")
    assert code == 1
    verdicts = {r["law"]: r["verdict"] for r in doc["results"]}
    assert verdicts == {"CONS": "fail", "REF": "skip"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "potfin", "check", "bool"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "TCOMPL" in proc.stdout


def test_load_system_builtins_and_explicit(tmp_path):
    assert load_system(write(tmp_path, {"name": "nat", "builtin": "nat", "max_stage": 8})).max_stage == 8
    assert load_system(write(tmp_path, {"builtin": "dyadic", "max_stage": 6})).name == "dyadic"
    two = load_system(write(tmp_path, TWO))
    assert two.stage(2) == ("x", "y")
    assert two.proj(2, 1, "y") == "x"
    assert check_laws(two, "all", 2).ok


@pytest.mark.parametrize("doc,path", [
    ({"name": 1, "stages": {"1": ["x"]}, "pmap": []}, "$.name"),
    ({"builtin": "reals"}, "$.builtin"),
    (dict(TWO, stages={"1": ["x"], "3": ["x"]}), "$.stages"),
    (dict(TWO, emb={"1->2": {"x": "z"}}), "$.emb.1->2.x"),
    (dict(TWO, proj={"2->1": {"x": "x"}}), "$.proj.2->1"),
    (dict(SKEW, pmap=[[2, "q", 1, "x"]]), "$.pmap[0]"),
])
def test_definition_errors_name_a_path(doc, path):
    with pytest.raises(SchemaError) as e:
        system_from_definition(doc)
    assert e.value.path == path


def test_report_rejects_unexplained_failures():
    rep = LawReport("x", 1)
    with pytest.raises(ValueError):
        rep.add("L", "anchor", verdict=Verdict.FAIL)
    with pytest.raises(ValueError):
        LawReport.from_dict({"v": 2, "structure": "x", "bound": 1, "results": []})

"""
Tests for the cpa command-line interface.
"""

import json

import pytest

from costbisim import __version__
from costbisim.cli import EXIT_FAILS, EXIT_HOLDS, EXIT_USAGE, main
from costbisim.core import read_model, write_document
from costbisim.model import CPA, Alphabet, Transition, dirac

from .models import wcc


@pytest.fixture
def files(tmp_path, a23, a32, lossy, ideal):
    """Write the shared models to disk and return their paths by name."""
    context = CPA(
        "C",
        ["c0", "c1"],
        "c0",
        Alphabet(("send", "recv")),
        [Transition("c0", "send", dirac("c1"), 0), Transition("c1", "recv", dirac("c0"), 0)],
    )
    hidden = CPA("H", ["s"], "s", Alphabet((), ("send",)))
    paths = {}
    for autom in (a23, a32, lossy, ideal, wcc(2, 3, "1/2"), context, hidden):
        path = tmp_path / f"{autom.name}.cpa"
        write_document(autom, str(path))
        paths[autom.name] = str(path)
    return paths


def test_mincost(files, capsys):
    """Test plain min-cost queries."""
    assert main(["mincost", files["W"], "--from", "h0", "--action", "tau", "--target", "h1:1"]) == EXIT_HOLDS
    assert capsys.readouterr().out.strip() == "100/3"

    assert main(["mincost", files["W"], "--from", "h1", "--action", "recv", "--target", "s:1"]) == EXIT_HOLDS
    assert capsys.readouterr().out.strip() == "103/3"


def test_mincost_infeasible(files, capsys):
    """Test that an unreachable target exits with 1."""
    code = main(["mincost", files["W"], "--from", "h1", "--action", "tau", "--target", "h0:1"])

    assert code == EXIT_FAILS
    assert capsys.readouterr().out.strip() == "infeasible"


def test_mincost_json_and_outputs(files, tmp_path, capsys):
    """Test the JSON report, the scheduler file and the LP dump."""
    scheduler, dump = tmp_path / "sched.txt", tmp_path / "lp.txt"
    code = main(
        [
            "mincost", files["W"], "--from", "h0", "--action", "hop", "--target", "h1:1",
            "--json", "--scheduler", str(scheduler), "--dump-lp", str(dump),
        ]
    )
    report = json.loads(capsys.readouterr().out)

    assert code == EXIT_HOLDS
    assert report["cost"] == "100/3"
    assert report["feasible"] is True
    assert report["lp_solved"] == 1
    assert "(h0, pre) -> [t1:1] stop:0" in scheduler.read_text()
    text = dump.read_text()
    assert text.startswith("# Lmin(h0,tau)")
    # The dump keeps the edges trimming drops before solving
    assert "f[h1->h1^t2]" in text


def test_mincost_with_relation_file(files, tmp_path, capsys):
    """Test that a relation file lets the answer stop at a related state."""
    rel = tmp_path / "rel.txt"
    rel.write_text("pair h2 h1\npair h2 h2\n")
    code = main(
        ["mincost", files["W"], "--from", "h0", "--action", "tau", "--target", "h2:1", "--rel", str(rel)]
    )

    assert code == EXIT_HOLDS
    assert capsys.readouterr().out.strip() == "100/3"


def test_mincost_unknown_state(files, capsys):
    """Test that input errors exit with 2."""
    code = main(["mincost", files["W"], "--from", "h9", "--action", "tau", "--target", "h1:1"])

    assert code == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_check_minor_cost(files, capsys):
    """Test both directions of the wireless channel comparison."""
    assert main(["check", files["A32"], files["A23"], "--cost", "minor"]) == EXIT_HOLDS
    assert capsys.readouterr().out.strip() == "A32 <= A23 (weak-prob, cost minor): holds"

    assert main(["check", files["A23"], files["A32"], "--cost", "minor"]) == EXIT_FAILS
    out = capsys.readouterr().out
    assert out.startswith("A23 <= A32 (weak-prob, cost minor): does not hold")


def test_check_json(files, capsys):
    """Test the JSON verdict report."""
    code = main(["check", files["A32"], files["A23"], "--cost", "minor", "--json"])
    report = json.loads(capsys.readouterr().out)

    assert code == EXIT_HOLDS
    assert report["holds"] is True
    assert report["cost_mode"] == "minor"
    assert report["models"]["A23"] == {"states": 4, "transitions": 4, "external": 2, "internal": 1}
    assert ["A23.h1", "A32.k0"] in report["removed_pairs"]
    assert {"challenger": "A23.s", "defender": "A32.s", "condition": "border response",
            "cost": "25/1", "bound": "37/1"} in report["cost_checks"]


def test_check_strong(files, capsys):
    """Test that hidden hops break strong bisimilarity."""
    code = main(["check", files["ICC"], files["WCC"], "--rel", "strong"])

    assert code == EXIT_FAILS
    assert "ICC ~ WCC (strong, cost none): does not hold" in capsys.readouterr().out


def test_witness_roundtrip(files, tmp_path, capsys):
    """Test that a written witness verifies and a tampered one does not."""
    witness = tmp_path / "witness.txt"
    args = [files["A32"], files["A23"], "--cost", "minor", "--witness", str(witness)]

    assert main(["check"] + args) == EXIT_HOLDS
    assert (tmp_path / "witness.txt.cost").exists()
    capsys.readouterr()

    assert main(["verify"] + args) == EXIT_HOLDS
    assert capsys.readouterr().out.strip() == "witness valid"

    # Separating the start states invalidates the witness
    witness.write_text("class: A32.s\n")
    assert main(["verify"] + args) == EXIT_FAILS
    assert capsys.readouterr().out.strip() == "witness invalid"


def test_compose(files, tmp_path, capsys):
    """Test composition to a file and to stdout."""
    out = tmp_path / "composed.cpaz"
    assert main(["compose", files["ICC"], files["C"], "-o", str(out)]) == EXIT_HOLDS
    assert capsys.readouterr().out.startswith(f"wrote {out}")

    composed = read_model(str(out))
    assert composed.name == "(ICC,C)"
    assert composed.start == "(s,c0)"

    assert main(["compose", files["ICC"], files["C"], "--gen", "scaled-sum:2"]) == EXIT_HOLDS
    assert "automaton (ICC,C)" in capsys.readouterr().out


def test_compose_incompatible(files, capsys):
    """Test that incompatible alphabets exit with 1."""
    assert main(["compose", files["ICC"], files["H"]]) == EXIT_FAILS
    assert capsys.readouterr().out.startswith("error:")


def test_quotient(files, capsys):
    """Test the quotient of a union."""
    assert main(["quotient", files["ICC"], files["WCC"]]) == EXIT_HOLDS
    assert capsys.readouterr().out == (
        "class: ICC.s WCC.s\nclass: ICC.h0 WCC.h0 WCC.h1 WCC.h2\n"
    )


def test_missing_model_file(tmp_path, capsys):
    """Test that a missing input file is an input error."""
    missing = str(tmp_path / "missing.cpa")

    assert main(["check", missing, missing]) == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_malformed_model(tmp_path, capsys):
    """Test that parse errors exit with 2 and name the line."""
    bad = tmp_path / "bad.cpa"
    bad.write_text("automaton B\nstates: s\nstart: s\nexternal: a\ntrans: s a 1 -> s:1/0\n")

    assert main(["check", str(bad), str(bad)]) == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["check"], ["mincost", "m.cpa"], ["check", "a", "b", "--rel", "fuzzy"]])
def test_usage_errors(argv, capsys):
    """Test that argument errors exit with 2."""
    assert main(argv) == EXIT_USAGE


def test_version(capsys):
    """Test the version flag."""
    assert main(["--version"]) == EXIT_HOLDS
    assert __version__ in capsys.readouterr().out

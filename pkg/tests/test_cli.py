import io
import json
import subprocess
import sys

import pytest

from artifact.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_OK, main
from artifact.sexpr import parse_document, read_all
from conftest import DATA


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out)
    return code, out.getvalue()


def records(text):
    return [json.loads(line) for line in text.splitlines()]


@pytest.mark.parametrize("name,verdict", [("allen_m.net", "UNSAT"), ("cdc_cycle.net", "UNSAT"),
                                          ("cdc_chain.net", "SAT"), ("block_pair.net", "SAT")])
def test_solve_networks(name, verdict):
    code, out = run("solve", "--format", "jsonl", DATA / name)
    assert code == EXIT_OK
    (rec,) = records(out)
    assert rec["record"] == "solve" and rec["verdict"] == verdict and rec["method"] == "FACTORS"
    assert "seconds" not in rec
    assert (rec.get("witness") is not None) == (verdict == "SAT")


def test_solve_sexpr_is_readable_and_deterministic():
    a = run("solve", DATA / "cdc_chain.net")
    assert a == run("solve", DATA / "cdc_chain.net")
    (node,) = read_all(a[1])
    assert node.head == "solve"


def test_timings_only_when_asked():
    _, out = run("solve", "--format", "jsonl", "--timings", DATA / "cdc_chain.net")
    assert "seconds" in records(out)[0]


def test_solve_with_catalog_sidecar(tmp_path):
    inst = tmp_path / "i.qrel"
    cat = tmp_path / "c.cat"
    assert run("gen", "instance", "--seed", 4, "--vars", 4, "--count", 5, "-o", inst)[0] == EXIT_OK
    code, out = run("catalog", "--format", "jsonl", inst, "-o", cat)
    assert code == EXIT_OK and records(out)[0]["entries"] >= 1
    a = records(run("solve", "--format", "jsonl", inst)[1])[0]
    b = records(run("solve", "--format", "jsonl", "--catalog", cat, inst)[1])[0]
    o = records(run("oracle", "--format", "jsonl", inst)[1])[0]
    assert a["verdict"] == b["verdict"] == o["verdict"]


def test_classify_binary():
    code, out = run("classify", "--format", "jsonl", "--binary", DATA / "cdc_basics.qrel")
    recs = records(out)
    assert code == EXIT_OK and recs[-1]["record"] == "binary" and recs[-1]["verdict"] == "P"
    assert sum(r["record"] == "closure" for r in recs) == 9
    _, out = run("classify", "--format", "jsonl", "--binary", DATA / "allen_basics.qrel")
    assert records(out)[-1]["verdict"] == "P"


def test_classify_mixed_file():
    _, out = run("classify", "--format", "jsonl", "--binary", DATA / "mixed.qrel")
    recs = {r["record"]: r for r in records(out)}
    assert recs["profile"]["verdict"] == "HARD_IF_BINARY"
    assert recs["binary"]["verdict"] == "NP-COMPLETE" and recs["binary"]["offenders"] == ["lt12"]
    assert recs["binary"]["skipped"] == ["sep", "w", "weak"]


def test_classify_network_uses_basics():
    _, out = run("classify", "--format", "jsonl", "--binary", DATA / "allen_m.net")
    assert records(out)[-1]["verdict"] == "P"


def test_normalize_worked_example():
    code, out = run("normalize", "--format", "jsonl", DATA / "worked.qrel")
    (rec,) = records(out)
    assert code == EXIT_OK and rec["r5"] == 1 and rec["r6"] == 1
    assert len(read_all(rec["formula"])[0].items) == 1 + 5


def test_translate_output_parses():
    code, out = run("translate", DATA / "block_pair.net")
    doc = parse_document(out)
    assert code == EXIT_OK and len(doc.vars) == 6 and doc.constraints


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run("gen", "formulas", "--seed", 9, "--count", 30, "-o", a)
    run("gen", "formulas", "--seed", 9, "--count", 30, "-o", b)
    assert a.read_bytes() == b.read_bytes()
    assert run("gen", "relations", "--seed", 2)[1] != run("gen", "relations", "--seed", 3)[1]


def test_gen_formulas_normalize_and_oracle(tmp_path):
    f = tmp_path / "f.qrel"
    run("gen", "formulas", "--seed", 1, "--count", 10, "-o", f)
    code, out = run("normalize", "--format", "jsonl", f)
    assert code == EXIT_OK and len(records(out)) == 10
    code, out = run("oracle", "--format", "jsonl", f)
    assert code == EXIT_OK and len(records(out)) == 10


def test_gen_min_grid_report():
    code, out = run("gen", "min-grid", "--format", "jsonl")
    (rec,) = records(out)
    assert code == EXIT_OK and rec["sets"] == rec["burnside"] == 50582
    assert rec["disagreements"] == 0 and rec["failures"] == 0


@pytest.mark.parametrize("argv", [
    ["solve", "/nonexistent/file.qrel"],
    ["solve", "BAD"],
    ["frobnicate"],
    ["solve", "--max-dims", "9", "x"],
])
def test_input_errors(argv, tmp_path):
    if "BAD" in argv:
        bad = tmp_path / "bad.qrel"
        bad.write_text("(relation r 2 (x y) (lt 1 x")
        argv = [str(bad) if a == "BAD" else a for a in argv]
    assert run(*argv)[0] == EXIT_INPUT


def test_budget_exit(tmp_path):
    f = tmp_path / "big.qrel"
    f.write_text("(dims 1)\n(formula big (and %s))\n"
                 % " ".join("(lt 1 v%d v%d)" % (i, i + 1) for i in range(8)))
    assert run("oracle", "--max-oracle-vars", 4, f)[0] == EXIT_BUDGET


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "artifact", "solve", str(DATA / "cdc_cycle.net")],
                       capture_output=True, text=True)
    assert p.returncode == 0 and "UNSAT" in p.stdout

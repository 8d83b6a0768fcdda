import json

import pytest

from qarray.cli import EXIT_CAPACITY, EXIT_INCONSISTENT, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_and_solve_sort(tmp_path, capsys):
    assert run(capsys, "build", "sort", "--n", "2", "--bits", "1", "--values", "1,0")[0] == 0
    assert (tmp_path / "sort.qubo").exists() and (tmp_path / "sort.varmap.json").exists()
    code, out, _ = run(capsys, "solve", str(tmp_path / "sort"))
    rep = json.loads(out)
    assert code == 0 and rep["sorted"] == [0, 1] and rep["perm"] == [1, 0]
    assert rep["ground_energy"] == "0" and rep["ground_count"] == 1


def test_build_search_or(tmp_path, capsys):
    code, out, _ = run(capsys, "build", "search", "--n", "4", "--bits", "8", "--variant", "or",
                       "--out", "s4")
    assert code == 0
    vm = json.loads((tmp_path / "s4.varmap.json").read_text())
    assert vm["decode"]["variant"] == "logical_or" and vm["decode"]["found"] is not None


def test_bounds_with_clamp_file(tmp_path, capsys):
    run(capsys, "build", "bounds", "--n", "3", "--bits", "4", "--values", "1,4,9")
    clamp = {f"x.bit{j}": (5 >> j) & 1 for j in range(4)}
    (tmp_path / "c.json").write_text(json.dumps(clamp))
    code, out, _ = run(capsys, "solve", str(tmp_path / "bounds.qubo"), "--method", "eliminate",
                       "--clamp", str(tmp_path / "c.json"))
    rep = json.loads(out)
    assert code == 0 and rep["result"] == {"kind": "in_span", "index": 1} and rep["C"] == [0, 0, 1]


def test_solve_search_absent(tmp_path, capsys):
    run(capsys, "build", "search", "--n", "2", "--bits", "1", "--values", "0,0", "--target", "1")
    rep = json.loads(run(capsys, "solve", str(tmp_path / "search"))[1])
    assert rep["ground_energy"] == "1/2" and rep["ground_energy_decimal"] == 0.5
    assert rep["not_found"] == 1


def test_capacity_exit(tmp_path, capsys):
    run(capsys, "build", "sort", "--n", "3", "--bits", "2")
    code, _, err = run(capsys, "solve", str(tmp_path / "sort"), "--limit", "10")
    assert code == EXIT_CAPACITY and "exhaustive limit" in err


def test_inconsistent_exit(tmp_path, capsys):
    # an unweighted mapping block lets the solver pick a non-permutation
    from qarray.poly import Polynomial
    from qarray.qubofile import atomic_write, dump_json, emit_qubo
    from qarray.sort import build_sort

    p = build_sort(2, 1, [1, 0])
    m00 = p.mapping[0][0]
    atomic_write(tmp_path / "bad.qubo", emit_qubo(Polynomial.var(m00, -1), len(p.registry)))
    vm = p.varmap()
    vm["folded"] = False
    atomic_write(tmp_path / "bad.varmap.json", dump_json(vm))
    code, _, err = run(capsys, "solve", str(tmp_path / "bad.qubo"), "--limit", "30",
                       "--method", "eliminate", "--cap", "1")
    assert code == EXIT_INCONSISTENT


@pytest.mark.parametrize("argv", [
    ["build", "search", "--n", "2", "--bits", "1", "--values", "5,0"],
    ["build", "search", "--n", "2", "--bits", "1", "--values", "a,b"],
    ["solve", "missing.qubo"],
    ["sweep", "sort", "--bits", "1"],
])
def test_usage_exit(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_argparse_usage_exit(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["build", "nothing"])
    assert exc.value.code == 2


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--n", "2", "--bits", "1", "--variant", "or")
    assert code == 0
    assert json.loads(out)["minima"] == {"valid_found": "0", "valid_not_found": "1/2", "invalid": "1"}


def test_analyze_compare(capsys):
    code, out, _ = run(capsys, "analyze", "search_sum", "--n", "12", "--bits", "4", "--compare")
    d = json.loads(out)
    assert code == 0 and d["compare"]["above_threshold"]["b"] < d["compare"]["above_threshold"]["a"]


def test_sweep_and_fit(tmp_path, capsys):
    code, _, err = run(capsys, "sweep", "search_sum", "--range", "8:32:8", "--bits", "8",
                       "--no-timing", "--out", "rows.csv", "--fit", "linear", "--y", "max_degree")
    assert code == 0 and json.loads(err)["r_squared"] == 1.0
    lines = (tmp_path / "rows.csv").read_text().splitlines()
    assert lines[0].startswith("builder,variant,n,kv,total_vars,ancilla_vars,max_degree")
    assert len(lines) == 5
    code, out, _ = run(capsys, "fit", str(tmp_path / "rows.csv"), "--y", "max_degree")
    assert json.loads(out)["coefficients"] == [3.0, 0.0]


def test_anneal_report_is_byte_identical(tmp_path, capsys):
    run(capsys, "build", "sort", "--n", "2", "--bits", "1", "--values", "1,0")
    args = ["solve", str(tmp_path / "sort"), "--method", "anneal", "--seed", "5",
            "--reads", "20", "--sweeps", "200"]
    run(capsys, *args, "--out", "r1.json")
    run(capsys, *args, "--out", "r2.json")
    assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()

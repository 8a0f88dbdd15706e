import json

import pytest

from fairdiv import cli
from fairdiv.io import load_dataset


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip().startswith("{") else out), err


def test_solve_line_on_fix_a(capsys):
    code, rep, _ = run(capsys, "solve", "fixture:fix_a", "--algo", "line", "--verify")
    assert code == 0
    assert rep["diversity"] == 3.0
    assert rep["selected_ids"] == ["a0", "a4", "b7"]
    assert rep["group_counts"] == {"a": 2, "b": 1}
    assert rep["verdict"]["pass"] and rep["verdict"]["optimum"] == 3.0
    assert "wall_time_s" not in rep


def test_greedy_flow_on_tight(capsys):
    code, rep, _ = run(capsys, "solve", "fixture:fix_tight", "--algo", "greedy-flow", "--verify", "--timing")
    assert code == 0
    assert rep["diversity"] == 1.0
    assert rep["contract"]["alpha"] == pytest.approx(3 * 1.5)
    assert "wall_time_s" in rep


def test_infinite_diversity_is_a_string(capsys):
    code, rep, _ = run(capsys, "solve", "fixture:fix_b", "--algo", "brute", "--k", "g=1")
    assert code == 0
    assert rep["diversity"] == "inf"


def test_explicit_quotas_and_validate(capsys):
    code, rep, _ = run(capsys, "solve", "fixture:fix_a", "--algo", "brute", "--k", "a=1,b=1", "--validate")
    assert code == 0 and rep["quotas"] == {"a": 1, "b": 1}
    assert rep["validation"] == []
    assert rep["diversity"] == 9.0


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["solve", "fixture:fix_tight", "--algo", "euclidean"], "distance matrix"),
        (["solve", "fixture:fix_a", "--algo", "brute", "--k", "a=1"], "missing quota"),
        (["solve", "fixture:fix_a", "--algo", "brute", "--k", "a=1,b"], "bad quota"),
        (["solve", "fixture:fix_a", "--algo", "brute", "--k", "a=9,b=1"], "quota exceeds"),
        (["solve", "nowhere.csv", "--algo", "brute", "--k", "a=1"], "no such file"),
        (["solve", "fixture:fix_tight", "--algo", "line"], "coordinates"),
        (["bench", "fixture:fix_a", "--algos", "brute,magic"], "unknown algorithm"),
    ],
)
def test_errors_exit_2(capsys, argv, needle):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert needle in err


def test_unknown_algo_is_rejected_by_the_parser(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", "fixture:fix_a", "--algo", "magic"])
    assert exc.value.code == 2


def test_stream_commands(capsys):
    for algo in ("gen", "euclidean", "two-groups"):
        code, rep, _ = run(capsys, "stream", "fixture:fix_a", "--algo", algo, "--verify")
        assert code == 0, algo
        assert rep["params"]["dmin_lb"] == 1.0 and rep["params"]["dmax_ub"] == 10.0
        assert rep["memory"]["guesses"] >= 1


def test_distributed_with_partition_file(capsys, tmp_path):
    part = tmp_path / "part.csv"
    part.write_text("id,site\na0,0\nb1,0\na4,1\nb7,1\na10,2\n")
    code, rep, _ = run(capsys, "distributed", "fixture:fix_a", "--partition", f"file:{part}", "--verify")
    assert code == 0
    assert rep["info"]["sites"] == 3
    assert rep["diversity"] == 3.0


def test_coreset_command(capsys):
    code, rep, _ = run(capsys, "coreset", "fixture:fix_a", "--eps", "0.5")
    assert code == 0
    assert rep["coreset"]["a"]["ids"] == ["a0", "a10", "a4"]
    assert rep["coreset"]["a"]["insertion_radii"][0] == "inf"


def test_verify_command(capsys):
    code, rep, _ = run(capsys, "verify", "fixture:fix_a", "--ids", "a0,a4,b7")
    assert code == 0 and rep["verdict"]["pass"]
    code, rep, _ = run(capsys, "verify", "fixture:fix_a", "--ids", "a0,b1,a4")
    assert code == 1 and not rep["verdict"]["diversity_ok"]
    code, rep, _ = run(capsys, "verify", "fixture:fix_a", "--ids", "a0,b1,a4", "--alpha", "3")
    assert code == 0
    code, _, err = run(capsys, "verify", "fixture:fix_a", "--ids", "zz")
    assert code == 2 and "zz" in err


def test_gen_writes_loadable_data(tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert cli.main(["gen", "--n", "12", "--m", "3", "--dim", "3", "--seed", "2", "-o", str(out)]) == 0
    ds = load_dataset(out)
    assert ds.n == 12 and ds.m == 3 and ds.dim == 3
    mat = tmp_path / "g.txt"
    assert cli.main(["gen", "--n", "8", "--m", "2", "--matrix", "-o", str(mat)]) == 0
    assert not load_dataset(mat).is_euclidean


def test_bench(capsys):
    code, rep, _ = run(capsys, "bench", "fixture:fix_a", "--algos", "brute,line,greedy-flow", "--jobs", "2")
    assert code == 0
    assert rep["optimum"] == 3.0
    assert [r["algo"] for r in rep["results"]] == ["brute", "line", "greedy-flow"]
    assert all(r["ratio"] == 1.0 for r in rep["results"][:2])


def test_contract_table():
    from fairdiv.core import FairnessSpec, Solution
    from fairdiv.fixtures import fix_a

    ds, spec = fix_a()
    sol = Solution.build(ds, [0, 3], gamma=6.0)
    c = cli.contract_for("lp6", spec, 0.5, sol)
    assert (c.alpha, c.beta, c.exact) == (6.0, 0.5, False)
    assert cli.contract_met(c, spec, sol)
    exact = cli.contract_for("brute", spec, 0.5, sol)
    assert not cli.contract_met(exact, spec, sol)
    assert cli.contract_met(cli.contract_for("lp2", FairnessSpec((2, 1)), 0.5, sol), spec, sol)

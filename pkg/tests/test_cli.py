import json
import math

import numpy as np
import pytest

import structdist as sd
from structdist.cli import main
from structdist.problemfile import distribution_to_problem, dump_problem

from helpers import rand_chain, rand_matching, rand_spanning


@pytest.fixture()
def chain_file(tmp_path):
    dist = sd.LinearChainCRF(np.zeros(2), np.zeros((2, 2, 2)))
    path = tmp_path / "chain.json"
    dump_problem(distribution_to_problem(dist), str(path))
    return str(path)


@pytest.fixture()
def spanning_file(tmp_path):
    path = tmp_path / "spanning.json"
    dump_problem(distribution_to_problem(rand_spanning(0, n=4)), str(path))
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_logz_command(chain_file, capsys):
    code, out, _ = run_cli(capsys, "logZ", chain_file)
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "logZ"
    assert doc["result"]["log_partition"] == pytest.approx(3 * math.log(2))
    assert doc["config"] == {"n": 3, "m": 2}
    assert doc["algorithm"] == "forward"


def test_cli_result_equals_library_exactly(spanning_file, capsys):
    code, out, _ = run_cli(capsys, "logZ", spanning_file)
    doc = json.loads(out)
    assert doc["result"]["log_partition"] == sd.log_partition(rand_spanning(0, n=4))


def test_sample_is_byte_identical_across_runs(spanning_file, capsys):
    code1, out1, _ = run_cli(capsys, "sample", spanning_file, "--seed", "7", "--num", "2")
    code2, out2, _ = run_cli(capsys, "sample", spanning_file, "--seed", "7", "--num", "2")
    assert code1 == code2 == 0
    assert out1 == out2
    assert len(json.loads(out1)["result"]["samples"]) == 2


def test_kl_of_identical_files_is_zero(chain_file, capsys):
    code, out, _ = run_cli(capsys, "kl", chain_file, chain_file)
    assert code == 0
    assert abs(json.loads(out)["result"]["kl_divergence"]) < 1e-9


def test_logprob_with_indicator(tmp_path, capsys):
    dist = rand_chain(3, n=3, m=2)
    ind = sd.argmax(dist)
    path = tmp_path / "with_indicator.json"
    dump_problem(distribution_to_problem(dist, indicator=ind), str(path))
    code, out, _ = run_cli(capsys, "logprob", str(path))
    assert code == 0
    assert json.loads(out)["result"]["log_prob"] == pytest.approx(sd.log_prob(dist, ind))


def test_missing_file_exits_2(capsys):
    code, _, err = run_cli(capsys, "logZ", "/no/such/file.json")
    assert code == 2
    assert "error" in err


def test_malformed_json_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{oops")
    code, _, err = run_cli(capsys, "logZ", str(path))
    assert code == 2


def test_bad_shapes_exit_2(tmp_path, capsys):
    doc = {"family": "linear_chain", "config": {"n": 3, "m": 2}, "potentials": {"init": [0.0, 0.0]}}
    path = tmp_path / "incomplete.json"
    path.write_text(json.dumps(doc))
    code, _, err = run_cli(capsys, "logZ", str(path))
    assert code == 2
    assert "transitions" in err


def test_unsupported_op_exits_3_with_reason(tmp_path, capsys):
    path = tmp_path / "matching.json"
    dump_problem(distribution_to_problem(rand_matching(0, n=3)), str(path))
    code, _, err = run_cli(capsys, "logZ", str(path))
    assert code == 3
    assert "partition intractable for one-to-one matching" in err
    # argmax remains available for this family
    code, out, _ = run_cli(capsys, "argmax", str(path))
    assert code == 0
    assert json.loads(out)["algorithm"] == "jonker-volgenant"


def test_out_flag_writes_file(chain_file, tmp_path, capsys):
    target = tmp_path / "result.json"
    code, out, _ = run_cli(capsys, "logZ", chain_file, "--out", str(target))
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["command"] == "logZ"


def test_bench_csv_row_counts(capsys):
    code, out, _ = run_cli(capsys, "bench", "projective-argmax", "--n", "8,10,12",
                           "--iterations", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "suite,n,algorithm,median_ms,iterations"
    assert len(lines) == 1 + 6  # 2 algorithms x 3 sizes
    for line in lines[1:]:
        suite, n, algo, ms, iters = line.split(",")
        assert suite == "projective-argmax"
        assert float(ms) > 0.0
        assert int(iters) == 2


def test_bench_single_size_one_row_per_variant(capsys):
    code, out, _ = run_cli(capsys, "bench", "nonprojective-argmax", "--n", "8",
                           "--iterations", "2")
    assert code == 0
    lines = out.strip().splitlines()
    algos = [line.split(",")[2] for line in lines[1:]]
    assert algos == ["chu-liu-edmonds", "reweighting+chu-liu-edmonds"]


def test_bench_bad_size_list_exits_2(capsys):
    code, _, err = run_cli(capsys, "bench", "chain", "--n", "eight")
    assert code == 2

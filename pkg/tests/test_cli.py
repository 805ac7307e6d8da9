import json

import numpy as np
import pytest

from rdplab import serialize
from rdplab.cli import main
from rdplab.divergences import coupling_cost, total_variation, wasserstein_sq
from rdplab.pmf import Channel, Pmf
from rdplab.solver import RdpProblem, solve_rdp
from rdplab.closed_forms import binary_optimal_construction


HAMMING = [[0.0, 1.0], [1.0, 0.0]]


@pytest.fixture
def problem_file(tmp_path):
    payload = {
        "source": {"atoms": [{"label": 0, "prob": 0.75}, {"label": 1, "prob": 0.25}]},
        "distortion": HAMMING,
        "divergence": {"kind": "total_variation"},
        "D": 0.2,
        "P": 0.0,
    }
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    return header, [dict(zip(header, ln.split(","))) for ln in lines[1:]]


def test_round_trip_pmf_channel_problem():
    p = Pmf.from_probs(("a", "b", 3), (0.2, 0.5, 0.3))
    assert serialize.pmf_from_dict(serialize.pmf_to_dict(p)).atoms == p.atoms
    ch = Channel(("x", "y"), (0, 1, 2), np.array([[0.2, 0.3, 0.5], [1.0, 0.0, 0.0]]))
    back = serialize.channel_from_dict(serialize.channel_to_dict(ch))
    assert back.inputs == ch.inputs and back.outputs == ch.outputs
    assert np.array_equal(back.matrix, ch.matrix)
    for div in (total_variation(), wasserstein_sq(), coupling_cost(np.array([[0.0, 2.0], [1.0, 0.0]]))):
        prob = RdpProblem(
            source=Pmf.bernoulli(0.3),
            distortion=np.array(HAMMING),
            divergence=div,
            dist_budget=0.1,
            perc_budget=0.2,
        )
        back = serialize.problem_from_dict(serialize.problem_to_dict(prob))
        assert back.divergence.kind == div.kind
        assert np.array_equal(back.distortion, prob.distortion)
        assert back.dist_budget == prob.dist_budget


def test_round_trip_solution_and_reports():
    prob = RdpProblem(
        source=Pmf.bernoulli(0.25),
        distortion=np.array(HAMMING),
        divergence=total_variation(),
        dist_budget=0.2,
        perc_budget=0.1,
    )
    sol = solve_rdp(prob)
    back = serialize.solution_from_dict(serialize.solution_to_dict(sol))
    assert back.rate == sol.rate
    assert back.status == sol.status
    assert np.array_equal(back.channel.matrix, sol.channel.matrix)


def test_channel_outputs_default_to_inputs():
    ch = serialize.channel_from_dict({"inputs": [0, 1], "rows": [[0.7, 0.3], [0.1, 0.9]]})
    assert ch.outputs == (0, 1)


def test_curve_binary_csv(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    assert main(["curve", "binary", "--rho", "0.25", "--grid", "200", "--output", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["D", "phi", "varphi", "rd_half"]
    assert len(rows) == 201
    last = rows[-1]
    assert float(last["D"]) == pytest.approx(0.375)
    assert float(last["phi"]) == 0.0
    assert float(last["varphi"]) == 0.0
    first = rows[0]
    assert float(first["phi"]) == pytest.approx(0.811278124459, abs=1e-9)


def test_curve_gaussian_csv(tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["curve", "gaussian", "--var", "1", "--grid", "200", "--output", str(out)]) == 0
    _, rows = read_csv(out)
    at_one = [r for r in rows if abs(float(r["D"]) - 1.0) < 1e-12]
    assert len(at_one) == 1
    assert float(at_one[0]["varphi"]) == pytest.approx(0.5, abs=1e-12)
    assert rows[0]["phi"] == "inf"


def test_curve_binary_bad_rho(capsys):
    assert main(["curve", "binary", "--rho", "0.6"]) == 1
    assert "rho" in capsys.readouterr().err


def test_usage_error_exit_code(capsys):
    assert main(["curve", "binary", "--nope"]) == 1


def test_solve_command(problem_file, tmp_path):
    out = tmp_path / "sol.json"
    code = main(["solve", "--problem", problem_file, "--D", "0.0", "--P", "0.0",
                 "--output", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["rate_bits"] == pytest.approx(0.8112781244591328, abs=1e-6)
    back = serialize.solution_from_dict(payload)
    assert back.status == "optimal"


def test_solve_infeasible_exit(tmp_path):
    payload = {
        "source": {"atoms": [{"label": 0, "prob": 0.75}, {"label": 1, "prob": 0.25}]},
        "distortion": [[1.0, 2.0], [2.0, 1.0]],
        "divergence": {"kind": "wasserstein_sq"},
        "D": 5.0,
        "P": 0.0,
        "output_alphabet": [5.0, 7.0],
    }
    path = tmp_path / "p.json"
    path.write_text(json.dumps(payload))
    assert main(["solve", "--problem", str(path), "--D", "5.0", "--P", "0.0"]) == 3


def test_missing_file_exit(tmp_path):
    assert main(["solve", "--problem", str(tmp_path / "nope.json"),
                 "--D", "0.1", "--P", "0.1"]) == 1


def test_curve_solve_sweep(problem_file, tmp_path):
    out = tmp_path / "sweep.csv"
    code = main([
        "curve", "solve", "--problem", problem_file,
        "--D-grid", "0.1:0.3:3", "--output", str(out),
    ])
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["D", "P", "rate_bits", "achieved_D", "achieved_P", "status"]
    assert len(rows) == 3
    rates = [float(r["rate_bits"]) for r in rows]
    assert rates == sorted(rates, reverse=True)


def test_simulate_circle_and_determinism(tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["simulate", "circle", "--scheme", "common", "--samples", "20000",
            "--seed", "7"]
    assert main(argv + ["--output", str(out1)]) == 0
    assert main(argv + ["--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    payload = json.loads(out1.read_text())
    est = serialize.circle_estimate_from_dict(payload)
    assert abs(est.mean - est.analytic) <= 4 * est.std_error


def test_simulate_circle_env_seed(tmp_path, monkeypatch):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    monkeypatch.setenv("RDPLAB_SEED", "99")
    argv = ["simulate", "circle", "--scheme", "private", "--samples", "5000"]
    assert main(argv + ["--output", str(out1)]) == 0
    assert main(argv + ["--seed", "99", "--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_simulate_block(tmp_path):
    sol = binary_optimal_construction(0.25, 0.3)
    spec = {
        "source": {"atoms": [{"label": 0, "prob": 0.75}, {"label": 1, "prob": 0.25}]},
        "channel": serialize.channel_to_dict(sol.p_v_given_x),
        "distortion": [
            [float(v) ** 2 for v in sol.p_v_given_x.outputs],
            [(1.0 - float(v)) ** 2 for v in sol.p_v_given_x.outputs],
        ],
    }
    spec_path = tmp_path / "block.json"
    spec_path.write_text(json.dumps(spec))
    out = tmp_path / "report.json"
    csv_out = tmp_path / "marg.csv"
    code = main([
        "simulate", "block", "--spec", str(spec_path), "--n", "16",
        "--rate", "0.35", "--delta", "0.4", "--trials", "200", "--seed", "5",
        "--output", str(out), "--marginals-csv", str(csv_out),
    ])
    assert code == 0
    rep = serialize.sim_report_from_dict(json.loads(out.read_text()))
    assert rep.n == 16 and rep.trials == 200
    lines = csv_out.read_text().strip().split("\n")
    assert lines[0] == "t,atom,prob"
    assert len(lines) == 1 + 16 * 2


def test_simulate_softcover(tmp_path):
    spec = {
        "target": {"atoms": [{"label": 0, "prob": 0.5}, {"label": 1, "prob": 0.5}]},
        "channel": {"inputs": [0, 1], "rows": [[0.89, 0.11], [0.11, 0.89]]},
        "reference": {"atoms": [{"label": 0, "prob": 0.5}, {"label": 1, "prob": 0.5}]},
    }
    spec_path = tmp_path / "soft.json"
    spec_path.write_text(json.dumps(spec))
    out = tmp_path / "soft_report.json"
    code = main([
        "simulate", "softcover", "--spec", str(spec_path), "--n", "4", "6",
        "--rate", "1.0", "--delta", "0.6", "--codebooks", "3", "--seed", "1",
        "--output", str(out),
    ])
    assert code == 0
    payload = json.loads(out.read_text())
    assert [entry["n"] for entry in payload["scan"]] == [4, 6]
    assert payload["scan"][1]["tv_mean"] < payload["scan"][0]["tv_mean"]


def test_verify_kkt_exit_codes(tmp_path, capsys):
    assert main(["verify", "kkt", "--rho", "0.25", "--D", "0.2"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["passed"] is True
    report = serialize.kkt_report_from_dict(payload)
    assert report.equality_residual <= 1e-9
    # boundary D is a domain error, not a failed certificate
    assert main(["verify", "kkt", "--rho", "0.25", "--D", "0.375"]) == 1


def test_verify_kkt_failure_exit(monkeypatch, capsys):
    import dataclasses

    import rdplab.cli as cli_mod

    real = binary_optimal_construction

    def perturbed(rho, dist):
        sol = real(rho, dist)
        return dataclasses.replace(sol, lam=sol.lam * 1.01)

    monkeypatch.setattr(cli_mod.closed_forms, "binary_optimal_construction", perturbed)
    assert main(["verify", "kkt", "--rho", "0.25", "--D", "0.2"]) == 2
    assert json.loads(capsys.readouterr().out)["passed"] is False

import json
import math

import pytest

import parisi


def test_rs_anchor():
    sk = parisi.MixingFunction.sk()
    grid = parisi.SpaceGrid.defaults(sk)
    v = parisi.parisi_zero_t(sk, parisi.StepOrderParam.constant(0.0), grid)
    assert abs(v.value - math.sqrt(2 / math.pi)) < 1e-7


def test_model_and_order_parameter():
    m = parisi.MixingFunction([(3, 1.0)])
    assert m.xi(0.5) == pytest.approx(0.125)
    assert m.xi_second(0.5) == pytest.approx(3.0)
    g = parisi.StepOrderParam([(0.0, 0.5), (0.6, 2.0)])
    assert g(0.7) == 2.0
    assert parisi.l1_distance(g, parisi.StepOrderParam.constant(1.0)) == pytest.approx(0.6 * 0.5 + 0.4 * 1.0)
    with pytest.raises(ValueError):
        parisi.StepOrderParam([(0.0, 2.0), (0.5, 1.0)])


def test_profile_is_bounded():
    sk = parisi.MixingFunction.sk()
    x, psi, dpsi = parisi.psi_profile(sk, parisi.StepOrderParam.constant(1.0), parisi.SpaceGrid.defaults(sk, 513))
    assert len(x) == len(psi) == 513
    assert max(abs(d) for d in dpsi) <= 1 + 1e-10
    assert all(p >= abs(xi) - 1e-12 for xi, p in zip(x, psi))


def test_finite_beta_closed_form():
    sk = parisi.MixingFunction.sk()
    v = parisi.parisi_finite_beta(sk, parisi.DiscreteCDF.dirac(0.0), 1.0, parisi.SpaceGrid.defaults(sk))
    assert v.value == pytest.approx(math.log(2) + 0.25, abs=1e-9)


def test_oracle_instance():
    sk = parisi.MixingFunction.sk()
    ground, free = parisi.free_energy(sk, 10, 3, 10.0)
    assert ground <= free <= ground + math.log(2) / 10.0
    summary = parisi.run_oracle(sk, 8, 10, seed=2)
    assert summary["samples"] == 10
    fit = parisi.extrapolate_gse([16, 20, 24], [0.76 - 0.7 * n ** (-2 / 3) for n in (16, 20, 24)], [0, 0, 0])
    assert fit["a"] == pytest.approx(0.76, abs=1e-12)


def test_small_optimization():
    sk = parisi.MixingFunction.sk()
    r = parisi.gse_estimate(sk, k_max=1, restarts=1)
    values = [row["value"] for row in r["rows"]]
    assert values[1] <= values[0] + 1e-9 < math.sqrt(2 / math.pi)


def test_command_round_trip(tmp_path):
    cfg = json.dumps({"model": {"coeffs": [[2, 2 ** -0.5]]}})
    out = parisi.run_command("solve", cfg, str(tmp_path))
    assert out["pass"]
    assert (tmp_path / "value.json").exists()
    with pytest.raises(ValueError):
        parisi.run_command("solve", json.dumps({"grid": {}}), str(tmp_path))

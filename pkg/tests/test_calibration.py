import math

import numpy as np
import pytest

from granup.calibration import (
    DataSeries,
    M_from_friction,
    beta_from_friction,
    cohesion_curve,
    cooper_eaton_curve,
    fit_cohesion,
    fit_cooper_eaton,
    friction_angle_from_shear,
    jaky_k0,
    lode_ratio,
    mohr_coulomb_ratio,
    read_series,
)
from granup.errors import CalibrationError, FitError
from granup.params import YieldShape
from granup.yield_surface import csl_slope, lode_g

PHI = math.radians(32.0)


def test_data_series_validation():
    with pytest.raises(CalibrationError):
        DataSeries([1.0, 2.0], [1.0], "MPa", "-")
    with pytest.raises(CalibrationError):
        DataSeries([1.0, math.inf], [1.0, 2.0], "MPa", "-")
    with pytest.raises(CalibrationError):
        DataSeries([2.0, 1.0], [1.0, 2.0], "MPa", "-")
    assert len(DataSeries([2.0, 1.0, 2.0], [1.0, 2.0, 2.1], "N", "N", ordered=False)) == 3


def test_friction_angle_exact_recovery():
    load = np.array([10.0, 20.0, 20.0, 40.0])
    data = DataSeries(load, math.tan(PHI) * load, "N", "N", ordered=False)
    assert friction_angle_from_shear(data) == pytest.approx(PHI, rel=1e-14)


def test_friction_angle_needs_distinct_loads():
    with pytest.raises(FitError):
        friction_angle_from_shear(DataSeries([10.0], [6.0], "N", "N"))
    with pytest.raises(FitError):
        friction_angle_from_shear(DataSeries([10.0, 10.0], [6.0, 6.2], "N", "N", ordered=False))


def test_beta_matches_mohr_coulomb_ratio():
    beta = beta_from_friction(PHI, 0.9)
    assert beta == pytest.approx(0.190733, abs=1e-6)
    shape = YieldShape(beta=beta, gamma=0.9)
    ratio = lode_g(0.0, shape) / lode_g(math.pi / 3, shape)
    assert ratio == pytest.approx(mohr_coulomb_ratio(PHI), rel=1e-12)
    assert lode_ratio(beta, 0.9) == pytest.approx(ratio, rel=1e-14)


def test_beta_errors():
    with pytest.raises(CalibrationError):
        beta_from_friction(0.0, 0.9)
    with pytest.raises(CalibrationError):
        beta_from_friction(PHI, 1.0)
    # a near-circular section cannot reach the ratio of a steep friction angle
    with pytest.raises(CalibrationError):
        beta_from_friction(math.radians(60.0), 0.05)


def test_M_places_critical_state_on_the_friction_line():
    beta = beta_from_friction(PHI, 0.9)
    M = M_from_friction(PHI, 2.0, 0.1, 0.9, beta)
    assert M == pytest.approx(1.100649, abs=1e-6)
    shape = YieldShape(M=M, beta=beta)
    target = 6 * math.sin(PHI) / (3 - math.sin(PHI))
    assert csl_slope(shape, math.pi / 3) == pytest.approx(target, rel=1e-12)


def test_M_grows_with_friction_angle():
    angles = np.radians([20.0, 25.0, 30.0, 35.0])
    Ms = [M_from_friction(a, 2.0, 0.1, 0.9, beta_from_friction(a, 0.9)) for a in angles]
    assert np.all(np.diff(Ms) > 0)


def test_jaky():
    assert jaky_k0(PHI) == pytest.approx(0.470081, abs=1e-6)
    assert jaky_k0(0.0) == 1.0
    assert jaky_k0(math.radians(30.0)) == pytest.approx(0.5)
    with pytest.raises(CalibrationError):
        jaky_k0(math.pi / 2)


def ce_data(noise=0.0, seed=0):
    x = np.geomspace(0.5, 200.0, 25)
    y = cooper_eaton_curve(x, 1.8, 40.0, 0.37, 0.12)
    if noise:
        y = y * (1 + noise * np.random.default_rng(seed).normal(size=y.size))
    return DataSeries(x, y, "MPa", "-")


def test_cooper_eaton_exact_recovery():
    res = fit_cooper_eaton(ce_data())
    for key, ref in (("Lambda1", 1.8), ("Lambda2", 40.0), ("a1t", 0.37), ("a2t", 0.12)):
        assert res[key] == pytest.approx(ref, rel=1e-6)
    assert res.residual_norm < 1e-10


def test_cooper_eaton_noisy_recovery():
    res = fit_cooper_eaton(ce_data(noise=0.01, seed=3))
    for key, ref in (("Lambda1", 1.8), ("Lambda2", 40.0), ("a1t", 0.37), ("a2t", 0.12)):
        assert res[key] == pytest.approx(ref, rel=0.10)


def test_cooper_eaton_too_few_points():
    with pytest.raises(FitError):
        fit_cooper_eaton(DataSeries([1.0, 2.0, 3.0], [-0.1, -0.2, -0.25], "MPa", "-"))


def test_cohesion_exact_recovery_and_comparison():
    x = np.linspace(0.0, 150.0, 31)
    y = cohesion_curve(x, 0.026, 2.3, 3.2)
    res = fit_cohesion(DataSeries(x, y, "MPa", "MPa"))
    assert res["Gamma"] == pytest.approx(0.026, rel=1e-6)
    assert res["cinf"] == pytest.approx(2.3, rel=1e-6)
    assert res["pcb"] == pytest.approx(3.2, rel=1e-5)
    assert not res.degenerate
    assert res.residual_norm < res.extras["bowden_tabor_residual"]


def test_cohesion_all_zero_is_degenerate():
    res = fit_cohesion(DataSeries([0.0, 1.0, 2.0, 3.0], [0.0] * 4, "MPa", "MPa"))
    assert res.degenerate
    assert res["cinf"] == 0.0
    assert math.isnan(res["Gamma"])


def test_cohesion_too_few_points():
    with pytest.raises(FitError):
        fit_cohesion(DataSeries([1.0, 2.0, 3.0], [0.0, 0.1, 0.2], "MPa", "MPa"))


def test_read_series(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("MPa,-\n1.0,-0.1\n2.0,-0.2\n")
    s = read_series(f)
    assert (s.x_unit, s.y_unit) == ("MPa", "-")
    np.testing.assert_array_equal(s.y, [-0.1, -0.2])


@pytest.mark.parametrize(
    "text, line",
    [("MPa,-\n1.0,-0.1\n2.0,abc\n", 3), ("MPa,-\n1.0,-0.1,7\n", 2), ("MPa\n1.0,2.0\n", 1)],
)
def test_read_series_reports_the_line(tmp_path, text, line):
    f = tmp_path / "bad.csv"
    f.write_text(text)
    with pytest.raises(CalibrationError, match=f":{line}:"):
        read_series(f)


def test_read_series_missing_or_empty(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_series(tmp_path / "absent.csv")
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(CalibrationError):
        read_series(tmp_path / "e.csv")

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dampest.optimizer import golden_section, improvement_curve, minimize_mse, solve_x0
from dampest.probes import ProbeClass, photon_number


@pytest.fixture(scope="module")
def curve():
    return improvement_curve(list(range(1, 21)), 0.01)


class TestSolveX0:
    def test_reference(self):
        # sqrt(20 - 0.64 tanh 0.64)
        assert solve_x0("I", 1.6, 20, 1) == pytest.approx(4.431530693358494, abs=1e-12)
        assert solve_x0("IV", 0, 20, 1) == pytest.approx(np.sqrt(20), abs=1e-15)
        assert solve_x0("III", 0, 20, 4) == pytest.approx(np.sqrt(5), abs=1e-15)

    def test_infeasible(self):
        assert solve_x0("II", 6.0, 1.0, 1) is None
        assert solve_x0("I", 1.6, 0.3, 1) is None

    def test_bad_budget(self):
        with pytest.raises(ValueError):
            solve_x0("I", 1.0, 0, 1)


class TestGoldenSection:
    def test_parabola(self):
        assert golden_section(lambda x: (x - 0.3) ** 2, -1, 2, 1e-9) == pytest.approx(0.3, abs=1e-8)


class TestMinimize:
    @pytest.mark.parametrize("cls", [ProbeClass.III, ProbeClass.IV])
    def test_classical(self, cls):
        opt = minimize_mse(cls, 20, 0.01)
        assert opt.alpha_star == 0 and opt.n_meas_star == 1
        assert opt.mse_star == pytest.approx(0.1, rel=1e-12)
        assert opt.x0_star == pytest.approx(np.sqrt(20))

    @pytest.mark.parametrize("n_tot", [5, 10, 20])
    def test_single_measurement_is_best(self, n_tot):
        for cls in (ProbeClass.I, ProbeClass.II):
            assert minimize_mse(cls, n_tot, 0.01).n_meas_star == 1

    def test_entangled_beats_separable(self):
        one, two = minimize_mse("I", 20, 0.01), minimize_mse("II", 20, 0.01)
        assert one.mse_star < two.mse_star < 0.1

    @pytest.mark.parametrize("n_tot", [0.5, 1, 3, 7.5, 20, 60])
    def test_never_worse_than_classical(self, n_tot):
        for cls in ProbeClass:
            assert minimize_mse(cls, n_tot, 0.01).mse_star <= 2 / n_tot + 1e-12

    @pytest.mark.parametrize("n_tot", [5, 10, 20])
    def test_grid_converged(self, n_tot):
        for cls in (ProbeClass.I, ProbeClass.II):
            coarse = minimize_mse(cls, n_tot, 0.01)
            fine = minimize_mse(cls, n_tot, 0.01, alpha_step=0.005)
            assert abs(coarse.mse_star - fine.mse_star) < 1e-8

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(list(ProbeClass)), st.floats(0.2, 40), st.floats(0, 0.05))
    def test_budget_spent_exactly(self, cls, n_tot, kappa):
        opt = minimize_mse(cls, n_tot, kappa)
        assert abs(opt.n_meas_star * photon_number(opt.spec) - n_tot) < 1e-9 * n_tot

    def test_tiny_budget(self):
        # alpha = 0 with one measurement is always affordable
        opt = minimize_mse("I", 0.01, 0.01)
        assert opt.n_meas_star == 1
        assert opt.mse_star <= 2 / 0.01 + 1e-9

    def test_rejects(self):
        with pytest.raises(ValueError):
            minimize_mse("I", -1, 0.01)
        with pytest.raises(ValueError):
            minimize_mse("I", 1, -0.01)


class TestImprovement:
    def test_ordering(self, curve):
        for p in curve:
            assert p.delta_I > p.delta_II > 0

    def test_reference_budget(self, curve):
        assert curve[-1].delta_I > 0.5
        assert curve[-1].delta_I == pytest.approx(0.546, abs=1e-3)
        assert curve[-1].delta_II == pytest.approx(0.538, abs=1e-3)

    def test_saturation(self, curve):
        for attr in ("delta_I", "delta_II"):
            tail = np.array([getattr(p, attr) for p in curve[9:]])
            assert (tail.max() - tail.min()) / tail.max() < 0.05

    def test_mse_saturates_like_inverse_budget(self, curve):
        scaled = np.array([p.optima[0].mse_star * p.n_tot for p in curve[9:]])
        assert (scaled.max() - scaled.min()) / scaled.max() < 0.02

    def test_records(self, curve):
        assert [o.probe_class for o in curve[0].optima] == [ProbeClass.I, ProbeClass.II, ProbeClass.III]

    def test_empty(self):
        with pytest.raises(ValueError):
            improvement_curve([], 0.01)

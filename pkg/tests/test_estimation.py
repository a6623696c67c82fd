import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dampest.damping_response import var_X_damped
from dampest.estimation import (
    EstimatorCoeffs,
    RunConfig,
    analytic_mse,
    empirical_mse,
    estimate_kappa,
    linearize,
    run_seed,
    sample_X,
    splitmix64,
)
from dampest.optimizer import minimize_mse, solve_x0
from dampest.probes import ProbeClass, ProbeSpec, make_probe, photon_number
from dampest.state_algebra import apply_damping, vacuum

# 2 (1 - e^{-0.005}): the estimate from the exact damped mean at kappa = 0.01, x0 = 2
KAPPA_EST_EXACT_MEAN = 0.00997504161463537


class TestLinearize:
    def test_coefficients(self):
        assert linearize(ProbeSpec("IV", 0, 2.0)) == EstimatorCoeffs(2.0, -1.0)

    def test_zero_displacement(self):
        with pytest.raises(ValueError, match="zero signal"):
            linearize(ProbeSpec("I", 1.6, 0.0))

    def test_undamped_mean_gives_zero(self):
        c = linearize(ProbeSpec("I", 1.6, 3.3))
        assert estimate_kappa(c, [3.3]) == pytest.approx(0, abs=1e-15)

    def test_exact_damped_mean(self):
        c = linearize(ProbeSpec("I", 1.6, 2.0))
        assert estimate_kappa(c, [2 * np.exp(-0.005)]) == pytest.approx(KAPPA_EST_EXACT_MEAN, abs=1e-16)

    @given(st.floats(0.1, 10), st.lists(st.floats(-20, 20), min_size=1, max_size=20))
    def test_affine_in_mean(self, x0, xs):
        c = linearize(ProbeSpec("III", 0, x0))
        assert estimate_kappa(c, xs) == pytest.approx(2 * (1 - np.mean(xs) / x0), rel=1e-12, abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValueError):
            estimate_kappa(EstimatorCoeffs(2, -1), [])


class TestAnalyticMSE:
    @pytest.mark.parametrize("cls", [ProbeClass.III, ProbeClass.IV])
    @pytest.mark.parametrize("n_tot", [1.0, 5.0, 20.0, 137.0])
    def test_classical(self, cls, n_tot):
        spec = ProbeSpec(cls, 0, np.sqrt(n_tot))
        assert analytic_mse(spec, 0.01, n_tot) == pytest.approx(2 / n_tot, rel=1e-14)

    def test_twenty_photons(self):
        assert analytic_mse(ProbeSpec("IV", 0, np.sqrt(20)), 0.01, 20) == pytest.approx(0.1, rel=1e-14)

    @given(st.floats(0.05, 200), st.floats(0.01, 30), st.floats(0, 1))
    def test_classical_independent_of_split(self, n_tot, x0, kappa):
        spec = ProbeSpec("III", 0, x0)
        assert analytic_mse(spec, kappa, n_tot) == pytest.approx(2 / n_tot, rel=1e-12)

    def test_entangled_below_classical(self):
        x0 = solve_x0("I", 1.6, 20, 1)
        assert x0 == pytest.approx(4.431530693358494, abs=1e-12)
        assert analytic_mse(ProbeSpec("I", 1.6, x0), 0.01, 20) < 0.1

    def test_budget_form(self):
        spec = ProbeSpec("II", 2.0, 3.0)
        n_tot = 4 * photon_number(spec)
        c1 = linearize(spec).c1
        assert analytic_mse(spec, 0.02, n_tot) == pytest.approx(c1**2 * var_X_damped("II", 2.0, 0.02) / 4, rel=1e-14)

    def test_rejects(self):
        with pytest.raises(ValueError):
            analytic_mse(ProbeSpec("IV", 0, 1.0), 0.01, 0)
        with pytest.raises(ValueError):
            analytic_mse(ProbeSpec("IV", 0, 0.0), 0.01, 1)


class TestSeeds:
    def test_splitmix_reference(self):
        # first outputs of the reference generator seeded with 0
        assert splitmix64(0) == 0xE220A8397B1DCDAF
        assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4

    def test_distinct_runs(self):
        seeds = {run_seed(7, i) for i in range(10_000)}
        assert len(seeds) == 10_000
        assert run_seed(7, 0) != run_seed(8, 0)


class TestSampling:
    def test_vacuum_statistics(self):
        xs = sample_X(vacuum(), 100_000, seed=1)
        assert abs(xs.mean()) < 0.01
        assert xs.var() == pytest.approx(0.5, abs=0.01)

    def test_entangled_statistics(self):
        xs = sample_X(make_probe(ProbeSpec("I", 1.6, 2.0)), 100_000, seed=2)
        assert xs.mean() == pytest.approx(2.0, abs=0.01)
        assert xs.var() == pytest.approx(0.221536, abs=0.01)

    def test_deterministic(self):
        s = apply_damping(make_probe(ProbeSpec("I", 1.6, 2.0)), 0.01)
        assert np.array_equal(sample_X(s, 500, seed=3), sample_X(s, 500, seed=3))
        assert not np.array_equal(sample_X(s, 500, seed=3), sample_X(s, 500, seed=4))


class TestRunConfig:
    def test_budget_enforced(self):
        with pytest.raises(ValueError, match="budget"):
            RunConfig(ProbeSpec("IV", 0, 5.0), 0.01, n_tot=20)
        RunConfig(ProbeSpec("IV", 0, 5.0), 0.01, n_tot=20, resource_constrained=False)

    def test_exact_budget_accepted(self):
        x0 = solve_x0("II", 1.6, 20, 2)
        RunConfig(ProbeSpec("II", 1.6, x0), 0.01, n_tot=20, n_meas=2)

    @pytest.mark.parametrize(
        "kwargs",
        [dict(kappa_true=-1), dict(n_tot=0), dict(n_meas=0), dict(runs=0), dict(seed=-1), dict(n_meas=1.5)],
    )
    def test_rejects(self, kwargs):
        base = dict(spec=ProbeSpec("IV", 0, 1.0), kappa_true=0.01, n_tot=20)
        with pytest.raises(ValueError):
            RunConfig(**{**base, **kwargs})


class TestEmpiricalMSE:
    def test_classical_reference(self):
        config = RunConfig(ProbeSpec("IV", 0, 3.0), 0.01, n_tot=9, runs=10_000, seed=11)
        r = empirical_mse(config)
        assert r.analytic_mse == pytest.approx(2 / 9, rel=1e-12)
        assert r.consistent
        assert abs(r.mean_estimate - 0.01) < max(3 * r.mean_estimate_stderr, 5e-5)

    def test_entangled_optimum(self):
        opt = minimize_mse("I", 20, 0.01)
        r = empirical_mse(RunConfig(opt.spec, 0.01, n_tot=20, n_meas=opt.n_meas_star, runs=10_000))
        assert r.analytic_mse == pytest.approx(opt.mse_star, rel=1e-12)
        assert r.consistent

    def test_several_measurements(self):
        x0 = solve_x0("IV", 0, 20, 4)
        r = empirical_mse(RunConfig(ProbeSpec("IV", 0, x0), 0.01, n_tot=20, n_meas=4, runs=4000, seed=5))
        assert r.analytic_mse == pytest.approx(0.1, rel=1e-12)
        assert r.consistent

    def test_single_run(self):
        r = empirical_mse(RunConfig(ProbeSpec("IV", 0, 1.0), 0.01, n_tot=1, runs=1))
        assert r.empirical_stderr is None and r.mean_estimate_stderr is None
        assert not r.consistent

    def test_reproducible(self):
        config = RunConfig(ProbeSpec("I", 1.6, 2.0), 0.01, n_tot=5, runs=300, seed=99)
        assert empirical_mse(config) == empirical_mse(config)

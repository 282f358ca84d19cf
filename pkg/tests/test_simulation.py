"""Monte Carlo machinery: the regression family, sampling, and harness."""

import dataclasses
import math
import os

import numpy as np
import pytest
from scipy.integrate import quad

import lintail.simulation as sim
from lintail.errors import NoCandidates
from lintail.estimator import (
    PenaltyConfig,
    estimate_threshold,
    loss_profile,
)
from lintail.simulation import (
    CSweepResult,
    Scenario,
    ScenarioResult,
    g,
    g_prime,
    generate_sample,
    grid_runner,
    r_threshold,
    run_scenario,
    sweep_scenario,
)

from oracles import central_difference


class TestRegressionFamily:
    def test_g_anchor_values(self):
        assert g(0.0) == 0.0
        # both branch formulas at the join, evaluated by hand:
        # 4 * 0.25 * (3 - 2) = 1 and (4/3) * 0.5 * (1 - 5 + 7) - 1 = 1
        assert g(0.5) == pytest.approx(1.0, abs=1e-15)
        assert 4 * 0.5 ** 2 * (3 - 4 * 0.5) == 1.0
        assert (4.0 / 3.0) * 0.5 * (4 * 0.25 - 10 * 0.5 + 7) - 1.0 == pytest.approx(
            1.0, abs=1e-15
        )
        assert g(0.75) == pytest.approx(0.75, abs=1e-14)
        assert g(1.0) == pytest.approx(1.0 / 3.0, abs=1e-14)

    def test_g_is_continuous_at_the_join(self):
        left = g(np.nextafter(0.5, 0.0))
        right = g(np.nextafter(0.5, 1.0))
        assert abs(float(left) - float(right)) < 1e-12

    def test_g_rejects_out_of_domain(self):
        with pytest.raises(ValueError, match="lie in"):
            g(np.array([-0.1, 0.5]))
        with pytest.raises(ValueError, match="lie in"):
            g(1.2)

    def test_g_prime_matches_finite_differences(self):
        xs = [x for x in np.linspace(0.05, 0.95, 37) if abs(x - 0.5) > 0.011]
        for x in xs:
            fd = central_difference(lambda t: float(g(t)), x)
            assert g_prime(x) == pytest.approx(fd, abs=1e-6)

    def test_g_prime_anchor_values(self):
        # both branches give slope 0 at the join
        assert 24 * 0.5 - 48 * 0.25 == 0.0
        assert (4.0 / 3.0) * (12 * 0.25 - 20 * 0.5 + 7) == 0.0
        assert g_prime(0.5) == 0.0
        assert g_prime(0.75) == pytest.approx(-5.0 / 3.0, abs=1e-14)

    def test_threshold_family_is_continuous_at_u0(self):
        for u0, delta in [(0.3, -1.0), (0.5, 2.0), (0.75, -0.25)]:
            below = r_threshold(np.nextafter(u0, 0.0), u0, delta)
            above = r_threshold(np.nextafter(u0, 1.0), u0, delta)
            assert abs(float(below) - float(above)) < 1e-10
            assert float(r_threshold(u0, u0, delta)) == pytest.approx(
                float(g(u0)), abs=1e-15
            )

    def test_flat_tail_when_slope_jump_cancels(self):
        # at u0 = 0.5 the base slope is 0, so delta = 0 leaves the tail
        # at the constant level g(0.5) = 1, exactly
        x = np.linspace(0.5, 1.0, 101)
        assert np.all(r_threshold(x, 0.5, 0.0) == 1.0)

    def test_tail_value_hand_computed(self):
        # (g'(0.75) - 1) * 0.15 + g(0.75) = (-5/3 - 1) * 0.15 + 0.75 = 0.35
        assert float(r_threshold(0.9, 0.75, -1.0)) == pytest.approx(0.35, abs=1e-13)

    def test_rejects_bad_u0(self):
        with pytest.raises(ValueError, match="u0"):
            r_threshold(np.array([0.5]), 0.0, -1.0)
        with pytest.raises(ValueError, match="u0"):
            r_threshold(np.array([0.5]), 1.0, -1.0)


class TestGenerateSample:
    def _scenario(self, **kw):
        base = dict(
            u0=0.5, delta=-1.0, sigma=0.01, n=200,
            penalty=PenaltyConfig(c=0.01), nrep=1, base_seed=42,
        )
        base.update(kw)
        return Scenario(**base)

    def test_deterministic_per_replication(self):
        sc = self._scenario()
        s1 = generate_sample(sc, 3)
        s2 = generate_sample(sc, 3)
        assert np.array_equal(s1.x, s2.x)
        assert np.array_equal(s1.y, s2.y)

    def test_replications_differ(self):
        sc = self._scenario()
        s1 = generate_sample(sc, 0)
        s2 = generate_sample(sc, 1)
        assert not np.array_equal(s1.x, s2.x)

    def test_seeds_differ(self):
        a = generate_sample(self._scenario(base_seed=1), 0)
        b = generate_sample(self._scenario(base_seed=2), 0)
        assert not np.array_equal(a.x, b.x)

    def test_small_sigma_recovers_the_regression_function(self):
        sc = self._scenario(sigma=1e-12, n=1000)
        s = generate_sample(sc, 0)
        r = r_threshold(s.x, sc.u0, sc.delta)
        assert np.max(np.abs(s.y - r)) < 1e-10

    def test_sample_mean_matches_the_integral(self):
        sc = self._scenario(n=100_000, sigma=0.01, base_seed=7)
        s = generate_sample(sc, 0)
        integral, _ = quad(
            lambda t: float(r_threshold(t, sc.u0, sc.delta)), 0.0, 1.0,
            points=[sc.u0],
        )
        se = s.y.std(ddof=1) / math.sqrt(sc.n)
        assert abs(s.y.mean() - integral) < 4.0 * se

    def test_population_loss_is_flat_beyond_u0(self):
        # beyond u0 the model is exactly linear, so the per-point suffix
        # loss must hover at sigma^2 all the way out to gamma_n
        sc = self._scenario(n=100_000, sigma=0.01, base_seed=11)
        profile = loss_profile(generate_sample(sc, 0), sc.penalty)
        mask = profile.u >= sc.u0
        assert np.count_nonzero(mask) > 1000
        sig2 = sc.sigma ** 2
        tol = 5.0 * sig2 * sc.n ** -0.5 * math.log(sc.n)
        assert np.max(np.abs(profile.loss[mask] - sig2)) < tol


class TestScenarioValidation:
    def test_rejects_bad_parameters(self):
        good = dict(
            u0=0.5, delta=-1.0, sigma=0.01, n=100,
            penalty=PenaltyConfig(c=0.01), nrep=5,
        )
        for bad in (
            {"u0": 0.0}, {"u0": 1.0}, {"sigma": 0.0},
            {"sigma": -1.0}, {"n": 5}, {"nrep": 0},
        ):
            with pytest.raises(ValueError):
                Scenario(**{**good, **bad})


class TestRunScenario:
    def test_single_replication_is_a_passthrough(self):
        sc = Scenario(
            u0=0.5, delta=-1.0, sigma=0.01, n=300,
            penalty=PenaltyConfig(c=0.01), nrep=1, base_seed=5,
        )
        res = run_scenario(sc)
        est = estimate_threshold(loss_profile(generate_sample(sc, 0), sc.penalty))
        assert res.u_hat[0] == est.u_hat
        assert res.emae == abs(est.u_hat - sc.u0)
        assert res.failures == 0

    def test_near_noiseless_runs_localize_the_threshold(self):
        sc = Scenario(
            u0=0.5, delta=-1.0, sigma=1e-12, n=400,
            penalty=PenaltyConfig(c=0.01), nrep=3, base_seed=0,
        )
        res = run_scenario(sc)
        assert np.all(np.abs(res.u_hat - 0.5) < 0.05)

    def test_parallel_equals_serial(self):
        sc = Scenario(
            u0=0.5, delta=-1.0, sigma=0.05, n=200,
            penalty=PenaltyConfig(c=0.01), nrep=8, base_seed=3,
        )
        serial = run_scenario(sc, workers=None)
        parallel = run_scenario(sc, workers=2)
        assert np.array_equal(serial.u_hat, parallel.u_hat)
        assert np.array_equal(serial.alpha, parallel.alpha)
        assert np.array_equal(serial.beta, parallel.beta)
        assert serial.emae == parallel.emae

    def test_failures_are_counted_and_excluded(self, monkeypatch):
        sc = Scenario(
            u0=0.5, delta=-1.0, sigma=0.05, n=100,
            penalty=PenaltyConfig(c=0.01), nrep=4, base_seed=9,
        )
        clean = run_scenario(sc)
        real = sim.loss_profile
        calls = {"k": 0}

        def flaky(sample, config):
            calls["k"] += 1
            if calls["k"] == 1:
                raise NoCandidates("synthetic failure")
            return real(sample, config)

        monkeypatch.setattr(sim, "loss_profile", flaky)
        res = run_scenario(sc)
        assert res.failures == 1
        assert math.isnan(res.u_hat[0])
        assert np.array_equal(res.u_hat[1:], clean.u_hat[1:])
        assert res.emae == np.abs(clean.u_hat[1:] - sc.u0).mean()

    def test_all_failures_yield_nan_summary(self, monkeypatch):
        sc = Scenario(
            u0=0.5, delta=-1.0, sigma=0.05, n=100,
            penalty=PenaltyConfig(c=0.01), nrep=2, base_seed=9,
        )

        def broken(sample, config):
            raise NoCandidates("synthetic failure")

        monkeypatch.setattr(sim, "loss_profile", broken)
        res = run_scenario(sc)
        assert res.failures == 2
        assert math.isnan(res.emae)
        assert res.quartiles == {}

    def test_grid_runner_keeps_order_and_handles_empty(self):
        assert grid_runner([]) == []
        scs = [
            Scenario(
                u0=0.5, delta=-1.0, sigma=0.05, n=100,
                penalty=PenaltyConfig(c=c), nrep=2, base_seed=1,
            )
            for c in (0.0, 0.01)
        ]
        rows = grid_runner(scs)
        assert [r[0] for r in rows] == scs
        again = grid_runner([scs[0], scs[0]])
        assert np.array_equal(again[0][1].u_hat, again[1][1].u_hat)


class TestSweepScenario:
    def test_matches_per_c_runs_exactly(self):
        sc = Scenario(
            u0=0.5, delta=-1.0, sigma=0.05, n=120,
            penalty=PenaltyConfig(c=0.0), nrep=30, base_seed=8,
        )
        cs = [0.0, 0.005, 0.05]
        sweep = sweep_scenario(sc, cs)
        assert sweep.u_hat.shape == (30, 3)
        for j, c in enumerate(cs):
            single = run_scenario(dataclasses.replace(
                sc, penalty=dataclasses.replace(sc.penalty, c=c)
            ))
            assert np.array_equal(sweep.u_hat[:, j], single.u_hat)
            assert sweep.emae[j] == single.emae

    def test_parallel_equals_serial(self):
        sc = Scenario(
            u0=0.5, delta=-1.0, sigma=0.05, n=120,
            penalty=PenaltyConfig(c=0.0), nrep=6, base_seed=8,
        )
        a = sweep_scenario(sc, [0.0, 0.01], workers=None)
        b = sweep_scenario(sc, [0.0, 0.01], workers=2)
        assert np.array_equal(a.u_hat, b.u_hat)

    def test_rejects_bad_grids(self):
        sc = Scenario(
            u0=0.5, delta=-1.0, sigma=0.05, n=120,
            penalty=PenaltyConfig(c=0.0), nrep=2, base_seed=8,
        )
        with pytest.raises(ValueError):
            sweep_scenario(sc, [])
        with pytest.raises(ValueError):
            sweep_scenario(sc, [-0.1, 0.2])
        with pytest.raises(ValueError):
            sweep_scenario(sc, [0.1, math.inf])


@pytest.mark.slow
@pytest.mark.parametrize("u0", [0.5, 0.75])
@pytest.mark.parametrize("delta", [-1.5, -1.0, -0.5])
def test_u_hat_medians_center_on_the_truth(u0, delta):
    sc = Scenario(
        u0=u0, delta=delta, sigma=0.01, n=500,
        penalty=PenaltyConfig(c=0.002), nrep=120, base_seed=314,
    )
    res = run_scenario(sc, workers=os.cpu_count())
    assert res.failures == 0
    assert abs(res.quartiles["u_hat"][1] - u0) <= 0.03

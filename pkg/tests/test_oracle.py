import math

import pytest

from src.channel import Rayleigh, Rician
from src.oracle import (
    MIN_SYMBOLS,
    ConvergenceError,
    SerEstimate,
    bisect_decreasing,
    bound_by_integration,
    invert_ser_numeric,
    simulate_ser,
    simulation_budget,
)
from src.schemes import DiffOqpsk, Mqam, NcMfsk, Ook, UnattainableTargetError


class TestSerEstimate:
    def test_from_counts(self):
        estimate = SerEstimate.from_counts(10, 10_000, seed=3)
        assert estimate.p_hat == 1e-3
        assert estimate.ci_halfwidth == pytest.approx(1.96 * math.sqrt(1e-3 * 0.999 / 1e4))
        assert estimate.within_bound(1e-3 - 2 * estimate.ci_halfwidth)
        assert not estimate.within_bound(1e-3 - 4 * estimate.ci_halfwidth)

    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            SerEstimate(p_hat=1.5, n_symbols=10, ci_halfwidth=0.0, seed=0)


class TestSimulation:
    @pytest.mark.slow
    def test_binary_fsk_matches_exact_rayleigh_rate(self):
        estimate = simulate_ser(NcMfsk(2), 998.0, Rayleigh(), 2_000_000, seed=11)
        assert estimate.consistent_with(1.0 / (2.0 + 998.0))

    @pytest.mark.parametrize("scheme, expected", [
        (NcMfsk(4), 0.75),
        (Mqam(16), 15 / 16),
        (Ook(), 0.5),
    ])
    def test_guessing_at_zero_snr(self, scheme, expected):
        estimate = simulate_ser(scheme, 0.0, Rayleigh(), 200_000, seed=2)
        assert estimate.consistent_with(expected)

    def test_energy_detector_guesses_at_zero_snr(self):
        estimate = simulate_ser(Ook(), 0.0, Rayleigh(), 200_000, seed=2, detector="energy")
        assert estimate.consistent_with(0.5)

    @pytest.mark.parametrize("scheme, fading, gamma_bar", [
        (NcMfsk(2), Rayleigh(), 10.0),
        (NcMfsk(8), Rayleigh(), 100.0),
        (NcMfsk(4), Rician(10.0), 10.0),
        (Mqam(4), Rayleigh(), 100.0),
        (Mqam(16), Rician(1.0), 100.0),
        (Mqam(64), Rician(10.0), 1000.0),
        (Ook(), Rayleigh(), 100.0),
    ])
    def test_simulated_rate_respects_bound(self, scheme, fading, gamma_bar):
        estimate = simulate_ser(scheme, gamma_bar, fading, 200_000, seed=5)
        assert estimate.within_bound(scheme.ser_bound_faded(gamma_bar, fading))

    def test_qam16_rician_bound_value(self):
        assert Mqam(16).ser_bound_faded(100.0, Rician(1.0)) == pytest.approx(0.09898, rel=1e-3)

    def test_same_seed_same_result(self):
        a = simulate_ser(Mqam(16), 30.0, Rician(5.0), 70_000, seed=99)
        b = simulate_ser(Mqam(16), 30.0, Rician(5.0), 70_000, seed=99)
        assert a == b

    @pytest.mark.parametrize("scheme, kwargs", [
        (DiffOqpsk(), {}),
        (Mqam(13), {}),
        (NcMfsk(2), dict(n_symbols=MIN_SYMBOLS - 1)),
        (NcMfsk(2), dict(gamma_bar=-1.0)),
        (Ook(), dict(detector="coherent")),
    ])
    def test_rejects_unsupported(self, scheme, kwargs):
        call = dict(gamma_bar=10.0, fading=Rayleigh(), n_symbols=MIN_SYMBOLS, seed=0)
        call.update(kwargs)
        with pytest.raises(ValueError):
            simulate_ser(scheme, **call)


class TestIntegration:
    @pytest.mark.parametrize("scheme", [NcMfsk(2), NcMfsk(16), Mqam(16), DiffOqpsk(), Ook()],
                             ids=lambda s: s.label)
    @pytest.mark.parametrize("fading", [Rayleigh(), Rician(1.0), Rician(10.0),
                                        Rician(15.0, normalization="diffuse")],
                             ids=lambda f: f"{f.label}-{getattr(f, 'normalization', '')}")
    @pytest.mark.parametrize("gamma_bar", [1.0, 100.0, 3000.0])
    def test_quadrature_matches_closed_form(self, scheme, fading, gamma_bar):
        closed = scheme.bound_from_expectation(
            float(fading.mgf(scheme.chernoff_rate * gamma_bar / fading.omega))
        )
        assert bound_by_integration(scheme, gamma_bar, fading) == pytest.approx(closed, rel=1e-5)

    def test_zero_k_inverts_to_rayleigh_value(self):
        gamma_bar = invert_ser_numeric(NcMfsk(2), 1e-3, Rician(-math.inf))
        assert gamma_bar == pytest.approx(998.0, rel=1e-4)

    def test_required_snr_falls_with_line_of_sight(self):
        values = [invert_ser_numeric(Mqam(16), 1e-3, Rician(k)) for k in (0.0, 5.0, 10.0, 15.0)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_rejects_unattainable_target(self):
        with pytest.raises(UnattainableTargetError):
            invert_ser_numeric(NcMfsk(2), 0.7, Rician(3.0))

    def test_rejects_unknown_method(self):
        with pytest.raises(ValueError, match="method"):
            invert_ser_numeric(NcMfsk(2), 1e-3, Rician(3.0), method="newton")

    @pytest.mark.slow
    def test_simulation_method_agrees_with_closed_form(self):
        gamma_bar = invert_ser_numeric(
            NcMfsk(2), 1e-2, Rayleigh(), tolerance=0.05, seed=1, method="simulation"
        )
        assert gamma_bar == pytest.approx(NcMfsk(2).required_snr(1e-2), rel=0.15)


class TestBisection:
    def test_solves_reciprocal(self):
        assert bisect_decreasing(lambda x: 1.0 / (1.0 + x), 0.01, rel_tol=1e-10) == pytest.approx(99.0)

    def test_returns_lower_end_when_already_met(self):
        assert bisect_decreasing(lambda x: 0.0, 0.5) == 0.0

    def test_bracket_failure(self):
        with pytest.raises(ConvergenceError, match="bracket"):
            bisect_decreasing(lambda x: 1.0, 0.5, max_iter=5)

    def test_iteration_budget(self):
        with pytest.raises(ConvergenceError, match="converge"):
            bisect_decreasing(lambda x: 1.0 / (1.0 + x), 0.01, rel_tol=1e-12, max_iter=8)


def test_simulation_budget_is_clamped():
    assert simulation_budget(0.5, 0.5) == MIN_SYMBOLS
    assert simulation_budget(1e-6, 1e-3, n_max=123_456) == 123_456

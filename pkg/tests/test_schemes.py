import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from src.channel import LinkBudget, Rayleigh, Rician
from src.frame import FrameOverrunError, FrameTiming
from src.optimizer import Scenario
from src.reference import RICIAN_ENERGY_ETA, RICIAN_FRAME_ENERGY
from src.schemes import (
    DiffOqpsk,
    Mqam,
    NcMfsk,
    Ook,
    RadioParameters,
    UnattainableTargetError,
    ook_frame_energy_conditional,
    required_average_snr,
    required_symbol_energy,
    scheme_from_name,
    total_frame_energy,
)

ALL_SCHEMES = [NcMfsk(2), NcMfsk(16), NcMfsk(64), Mqam(4), Mqam(16), Mqam(13), DiffOqpsk(), Ook()]


class TestRates:
    @pytest.mark.parametrize("scheme, expected", [
        (NcMfsk(2), 0.5),
        (NcMfsk(2, zeta=2), 1.0),
        (Mqam(4), 4.0),
        (DiffOqpsk(), 2.0),
        (Ook(), 0.5),
    ])
    def test_bandwidth_efficiency(self, scheme, expected):
        assert scheme.bandwidth_efficiency() == pytest.approx(expected)

    def test_active_durations(self, carrier, ook):
        assert NcMfsk(2).active_duration(carrier.timing) == pytest.approx(0.262144)
        assert Mqam(4).active_duration(carrier.timing) == pytest.approx(0.032768)
        assert DiffOqpsk().active_duration(carrier.timing) == pytest.approx(0.065536)
        assert Ook().active_duration(ook.timing) == pytest.approx(8e-5)

    @pytest.mark.parametrize("m", range(4, 65))
    def test_timing_order(self, carrier, m):
        t_qam = Mqam(m).active_duration(carrier.timing)
        t_oqpsk = DiffOqpsk().active_duration(carrier.timing)
        t_fsk = NcMfsk(2).active_duration(carrier.timing)
        assert t_qam < t_oqpsk < t_fsk

    def test_overrun(self):
        timing = FrameTiming(n_bits=8192, frame_period=0.27, transient=0.0, bandwidth=62.5e3)
        with pytest.raises(FrameOverrunError):
            NcMfsk(8).active_duration(timing)

    @pytest.mark.parametrize("kwargs", [dict(m=3), dict(m=1), dict(m=4, zeta=3)])
    def test_nc_mfsk_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            NcMfsk(**kwargs)

    def test_mqam_rejects_small_m(self):
        with pytest.raises(ValueError):
            Mqam(2)

    def test_scheme_from_name(self):
        assert scheme_from_name("mqam", 16) == Mqam(16)
        assert scheme_from_name("oqpsk") == DiffOqpsk()
        assert scheme_from_name("nc-mfsk", 8, zeta=2) == NcMfsk(8, zeta=2)
        assert scheme_from_name("ook", duty_cycle=0.25) == Ook(duty_cycle=0.25)
        with pytest.raises(ValueError, match="Unknown scheme family"):
            scheme_from_name("psk")


class TestBounds:
    @pytest.mark.parametrize("scheme, gamma_bar, expected", [
        (NcMfsk(2), 0.0, 0.5),
        (NcMfsk(2), 998.0, 1e-3),
        (Ook(), 998.0, 1e-3),
        (Mqam(4), 1998.0, 1e-3),
        (DiffOqpsk(), 0.0, 1.0),
    ])
    def test_examples(self, scheme, gamma_bar, expected):
        assert scheme.ser_bound(gamma_bar) == pytest.approx(expected, rel=1e-12)

    def test_oqpsk_bound_exceeds_one_at_zero_snr(self):
        assert DiffOqpsk().zero_snr_bound > 1.0

    @pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.label)
    @given(gamma=st.floats(min_value=0.0, max_value=1e6), step=st.floats(min_value=1e-3, max_value=1e3))
    def test_nonincreasing_in_snr(self, scheme, gamma, step):
        assert scheme.ser_bound(gamma + step) <= scheme.ser_bound(gamma)

    @pytest.mark.parametrize("scheme", ALL_SCHEMES, ids=lambda s: s.label)
    @pytest.mark.parametrize("p_s", [1e-2, 1e-3, 1e-4])
    def test_inversion_round_trip(self, scheme, p_s):
        gamma_bar = scheme.required_snr(p_s)
        assert gamma_bar > 0
        assert scheme.ser_bound(gamma_bar) == pytest.approx(p_s, rel=1e-9)

    @pytest.mark.parametrize("p_s", [0.0, -1e-3, 0.5, 1.0])
    def test_unattainable_target(self, p_s):
        with pytest.raises(UnattainableTargetError):
            NcMfsk(2).required_snr(p_s)

    def test_oqpsk_required_snr(self):
        assert DiffOqpsk().required_snr(1e-3) == pytest.approx(7495.46, rel=1e-5)

    @pytest.mark.parametrize("m", [2, 4, 8, 16, 32, 64])
    def test_nc_mfsk_union_approximation(self, m):
        # for small P_s the bound inverts to about (M-1)/P_s - 2
        approx = (m - 1) / 1e-3 - 2.0
        assert NcMfsk(m).required_snr(1e-3) == pytest.approx(approx, rel=2e-3)

    @given(gamma=st.floats(min_value=0.0, max_value=1e6))
    def test_nc_mfsk_bound_grows_with_m(self, gamma):
        bounds = [NcMfsk(2 ** k).ser_bound(gamma) for k in range(1, 7)]
        assert all(a < b for a, b in zip(bounds, bounds[1:]))

    def test_required_snr_grows_with_m(self):
        values = [Mqam(m).required_snr(1e-3) for m in range(4, 65)]
        assert values == sorted(values)

    def test_faded_bound_matches_rayleigh_closed_form(self):
        for scheme in (NcMfsk(4), Mqam(16), Ook()):
            assert scheme.ser_bound_faded(250.0, Rayleigh()) == pytest.approx(scheme.ser_bound(250.0))

    def test_line_of_sight_lowers_bound(self):
        scheme = NcMfsk(2)
        assert scheme.ser_bound_faded(100.0, Rician(10.0)) < scheme.ser_bound(100.0)


class TestRadio:
    def test_carrier_circuit_powers(self, radio):
        assert NcMfsk(2).circuit_powers(radio) == pytest.approx((0.0125, 0.030))
        assert Mqam(16).circuit_powers(radio) == pytest.approx((0.0265, 0.0385))
        assert DiffOqpsk().circuit_powers(radio) == Mqam(4).circuit_powers(radio)

    def test_ook_circuit_powers(self):
        assert Ook().circuit_powers(RadioParameters.ook_defaults()) == pytest.approx((0.000675, 0.0186))

    @pytest.mark.parametrize("scheme, expected", [
        (Mqam(4), 1.857142857),
        (Mqam(64), 5.666666667),
        (NcMfsk(8), 0.33),
        (DiffOqpsk(), 0.33),
        (Ook(), 0.33),
    ])
    def test_amplifier_coefficient(self, scheme, expected, radio):
        assert scheme.amplifier_coefficient(radio) == pytest.approx(expected, rel=1e-9)

    def test_rejects_negative_power(self):
        with pytest.raises(ValueError, match="p_lna"):
            RadioParameters(p_lna=-1e-3)

    def test_scaled(self, radio):
        doubled = radio.scaled(2.0)
        assert doubled.p_sy == 2 * radio.p_sy
        assert doubled.n0 == 2 * radio.n0
        assert doubled.chi_e == radio.chi_e


class TestFrameEnergy:
    def test_nc_bfsk_breakdown(self, carrier, radio):
        link = LinkBudget(1.0, 3.5)
        breakdown = total_frame_energy(NcMfsk(2), 1e-3, link, Rayleigh(), carrier.timing, radio)
        e_t = 998.0 * 1e7 * 1e-21
        assert required_symbol_energy(NcMfsk(2), 1e-3, link, Rayleigh(), radio.n0) == pytest.approx(e_t)
        assert breakdown.e_rf_tx == pytest.approx(1.33 * e_t * 8192 / 0.8)
        assert breakdown.e_circuit_active == pytest.approx(0.0425 * 0.262144 / 0.8)
        assert breakdown.e_transient == pytest.approx(2 * 0.01 * 5e-6 / 0.8)

    def test_ook_symbol_energy_matches_bfsk(self, radio):
        link = LinkBudget(1.0, 3.5)
        e_ook = required_symbol_energy(Ook(), 1e-3, link, Rayleigh(), radio.n0)
        assert e_ook == pytest.approx(9.98e-12, rel=1e-12)

    def test_coherent_scale_only_touches_circuit(self, carrier):
        link = LinkBudget(10.0, 3.5)
        scaled = RadioParameters(coherent_circuit_scale=3.0)
        base = total_frame_energy(Mqam(16), 1e-3, link, Rayleigh(), carrier.timing, carrier.radio)
        boosted = total_frame_energy(Mqam(16), 1e-3, link, Rayleigh(), carrier.timing, scaled)
        assert boosted.e_circuit_active == pytest.approx(3 * base.e_circuit_active)
        assert boosted.e_rf_tx == pytest.approx(base.e_rf_tx)
        fsk = total_frame_energy(NcMfsk(4), 1e-3, link, Rayleigh(), carrier.timing, scaled)
        assert fsk == total_frame_energy(NcMfsk(4), 1e-3, link, Rayleigh(), carrier.timing, carrier.radio)

    def test_energy_grows_with_distance(self, carrier):
        energies = [
            total_frame_energy(Mqam(16), 1e-3, LinkBudget(d, 3.0), Rayleigh(),
                               carrier.timing, carrier.radio).e_total
            for d in (1.0, 10.0, 50.0, 100.0)
        ]
        assert energies == sorted(energies)

    def test_ook_components(self, ook):
        breakdown = total_frame_energy(Ook(), 1e-3, LinkBudget(1.0, 3.5), Rayleigh(),
                                       ook.timing, ook.radio)
        assert breakdown.e_circuit_active == pytest.approx(1.9275e-6 + 6.25e-8)
        assert breakdown.e_transient == pytest.approx(3.375e-12)
        assert breakdown.e_rf_tx == pytest.approx(1.659175e-7)
        assert breakdown.e_total == pytest.approx(2.1559209e-6, rel=1e-6)

    def test_ook_expectation_over_ones(self, ook):
        timing = FrameTiming(n_bits=16, frame_period=0.1, transient=2e-9, bandwidth=500e6)
        link = LinkBudget(5.0, 3.0)
        expected = sum(
            stats.binom.pmf(l_ones, 16, 0.5)
            * ook_frame_energy_conditional(l_ones, link, timing, ook.radio, 1e-3)
            for l_ones in range(17)
        )
        total = total_frame_energy(Ook(), 1e-3, link, Rayleigh(), timing, ook.radio).e_total
        assert total == pytest.approx(expected, rel=1e-12)

    def test_ook_conditional_rejects_out_of_range(self, ook):
        with pytest.raises(ValueError, match="l_ones"):
            ook_frame_energy_conditional(-1, LinkBudget(1.0, 3.0), ook.timing, ook.radio, 1e-3)


class TestRicianEnergies:
    def test_rician_needs_less_snr_than_rayleigh(self):
        rayleigh = required_average_snr(NcMfsk(4), 1e-3, Rayleigh())
        rician = required_average_snr(NcMfsk(4), 1e-3, Rician(10.0))
        assert 0 < rician < rayleigh

    @pytest.mark.parametrize("normalization", ["total", "diffuse"])
    def test_short_link_fsk_energy(self, carrier, normalization):
        link = carrier.link(10.0, RICIAN_ENERGY_ETA)
        fading = Rician(10.0, normalization=normalization)
        energy = total_frame_energy(NcMfsk(4), 1e-3, link, fading, carrier.timing, carrier.radio)
        published = RICIAN_FRAME_ENERGY[(10.0, 10.0)]["NC-4FSK"]
        assert energy.e_total == pytest.approx(published, rel=0.05)

    @pytest.mark.parametrize("k_db, m", [(10.0, 16), (1.0, 4)])
    def test_long_link_fsk_energy_diffuse(self, carrier, k_db, m):
        link = carrier.link(100.0, RICIAN_ENERGY_ETA)
        fading = Rician(k_db, normalization="diffuse")
        energy = total_frame_energy(NcMfsk(m), 1e-3, link, fading, carrier.timing, carrier.radio)
        published = RICIAN_FRAME_ENERGY[(100.0, k_db)][f"NC-{m}FSK"]
        assert energy.e_total == pytest.approx(published, rel=0.10)

    @pytest.mark.parametrize("scheme", [NcMfsk(4), Mqam(16), DiffOqpsk()], ids=lambda s: s.label)
    def test_energy_nonincreasing_in_k(self, carrier, scheme):
        link = carrier.link(100.0, RICIAN_ENERGY_ETA)
        energies = [
            total_frame_energy(scheme, 1e-3, link, Rician(k_db, normalization="diffuse"),
                               carrier.timing, carrier.radio).e_total
            for k_db in (1.0, 10.0, 15.0)
        ]
        assert energies == sorted(energies, reverse=True)


@settings(max_examples=25, deadline=None)
@given(d=st.floats(min_value=1.0, max_value=200.0), eta=st.floats(min_value=2.5, max_value=6.0))
def test_mqam_energy_terms_move_apart_with_m(d, eta):
    scenario = Scenario.carrier_defaults()
    link = scenario.link(d, eta)
    breakdowns = [
        total_frame_energy(Mqam(m), 1e-3, link, Rayleigh(), scenario.timing, scenario.radio)
        for m in range(4, 65)
    ]
    rf = [b.e_rf_tx for b in breakdowns]
    circuit = [b.e_circuit_active for b in breakdowns]
    assert all(a < b for a, b in zip(rf, rf[1:]))
    assert all(a > b for a, b in zip(circuit, circuit[1:]))

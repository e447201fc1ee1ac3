"""
Modulation schemes and their per-frame energy.

Each scheme knows its bandwidth efficiency, active-mode duration, SER upper
bound, circuit block composition and amplifier coefficient. Every bound has
the form F(q) with q = E[exp(-s * gamma)], the fading average of a single
exponential, so the Rayleigh closed forms and the Rician numeric path share
one description per scheme.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, fields, replace
from typing import Tuple, Union

from src.channel import FadingModel, LinkBudget, Rayleigh, path_loss_gain
from src.frame import EnergyBreakdown, FrameTiming, frame_energy

logger = logging.getLogger(__name__)


class UnattainableTargetError(ValueError):
    """Raised when a target SER cannot be reached by a scheme's bound."""


@dataclass(frozen=True)
class RadioParameters:
    """Transceiver block powers (W), converter efficiency and noise density.

    Defaults are the nominal carrier-based evaluation set; use
    ``ook_defaults()`` for the impulse-radio OOK set.
    """
    chi_e: float = 0.8
    n0: float = 1e-21
    p_sy: float = 10e-3
    p_filt: float = 2.5e-3
    p_filr: float = 2.5e-3
    p_lna: float = 9e-3
    p_ifa: float = 3e-3
    p_ed: float = 3e-3
    p_adc: float = 7e-3
    p_dac: float = 7e-3
    p_mix: float = 7e-3
    p_pg: float = 0.0
    p_int: float = 0.0
    alpha_fsk: float = 0.33
    alpha_oqpsk: float = 0.33
    alpha_ook: float = 0.33
    vartheta: float = 0.35
    coherent_circuit_scale: float = 1.0

    POWER_FIELDS = (
        "p_sy", "p_filt", "p_filr", "p_lna", "p_ifa", "p_ed",
        "p_adc", "p_dac", "p_mix", "p_pg", "p_int",
    )

    def __post_init__(self):
        if not 0 < self.chi_e <= 1:
            raise ValueError(f"chi_e must lie in (0, 1], got {self.chi_e}")
        if self.n0 <= 0:
            raise ValueError(f"n0 must be > 0, got {self.n0}")
        negative = [f.name for f in fields(self) if getattr(self, f.name) < 0]
        if negative:
            raise ValueError(f"Radio parameters must be >= 0: {', '.join(negative)}")
        if self.vartheta <= 0:
            raise ValueError(f"vartheta must be > 0, got {self.vartheta}")

    @classmethod
    def carrier_defaults(cls) -> "RadioParameters":
        return cls()

    @classmethod
    def ook_defaults(cls) -> "RadioParameters":
        return cls(
            p_sy=0.0, p_dac=0.0, p_mix=0.0, p_ifa=0.0,
            p_lna=3.1e-3, p_pg=0.675e-3, p_int=3e-3,
        )

    def scaled(self, factor: float) -> "RadioParameters":
        """Copy with every block power and the noise density multiplied by factor."""
        if factor <= 0:
            raise ValueError(f"scale factor must be > 0, got {factor}")
        changes = {name: getattr(self, name) * factor for name in self.POWER_FIELDS}
        changes["n0"] = self.n0 * factor
        return replace(self, **changes)


class Modulation(ABC):
    """Common behaviour of all schemes; subclasses are frozen dataclasses."""

    family: str = ""

    @property
    @abstractmethod
    def label(self) -> str:
        ...

    @property
    @abstractmethod
    def bits_per_symbol(self) -> float:
        ...

    @abstractmethod
    def bandwidth_efficiency(self) -> float:
        """Bit rate per Hz of bandwidth."""

    @abstractmethod
    def _raw_active_duration(self, timing: FrameTiming) -> float:
        ...

    @property
    @abstractmethod
    def chernoff_rate(self) -> float:
        """s in q = E[exp(-s * gamma)]."""

    @abstractmethod
    def bound_from_expectation(self, q: float) -> float:
        """Unclamped SER bound as a function of q in [0, 1]."""

    @abstractmethod
    def expectation_for_target(self, p_s: float) -> float:
        """Inverse of bound_from_expectation."""

    @abstractmethod
    def circuit_powers(self, radio: RadioParameters) -> Tuple[float, float]:
        """(amplifier-exclusive transmitter power, receiver power) in watts."""

    @abstractmethod
    def amplifier_coefficient(self, radio: RadioParameters = None) -> float:
        ...

    def rf_symbols(self, n_bits: float) -> float:
        """Number of energy-carrying symbols needed for n_bits."""
        return n_bits / self.bits_per_symbol

    def transient_power(self, radio: RadioParameters) -> float:
        """Power drawn while both ends' synthesizers settle."""
        return 2 * radio.p_sy

    def active_duration(self, timing: FrameTiming) -> float:
        """Active-mode duration T_ac for an N-bit frame.

        Raises:
            FrameOverrunError: If T_ac exceeds T_N - T_tr.
        """
        return timing.check_active(self._raw_active_duration(timing), self.label)

    def circuit_energy(self, radio: RadioParameters, t_ac: float, timing: FrameTiming) -> float:
        p_ct, p_cr = self.circuit_powers(radio)
        return frame_energy(p_ct + p_cr, 0.0, t_ac, 0.0, 0.0, radio.chi_e)

    @property
    def zero_snr_bound(self) -> float:
        """Unclamped bound at gamma_bar = 0."""
        return self.bound_from_expectation(1.0)

    def ser_bound(self, gamma_bar: float) -> float:
        """SER upper bound under Rayleigh fading, clamped to [0, 1]."""
        if gamma_bar < 0:
            raise ValueError(f"gamma_bar must be >= 0, got {gamma_bar}")
        q = 1.0 / (1.0 + self.chernoff_rate * gamma_bar)
        return min(1.0, max(0.0, self.bound_from_expectation(q)))

    def ser_bound_faded(self, gamma_bar: float, fading: FadingModel) -> float:
        """SER upper bound with the fading average taken under ``fading``."""
        if gamma_bar < 0:
            raise ValueError(f"gamma_bar must be >= 0, got {gamma_bar}")
        q = float(fading.mgf(self.chernoff_rate * gamma_bar / fading.omega))
        return min(1.0, max(0.0, self.bound_from_expectation(q)))

    def check_target(self, p_s: float) -> None:
        ceiling = min(1.0, self.zero_snr_bound)
        if not 0 < p_s < ceiling:
            raise UnattainableTargetError(
                f"{self.label}: target SER {p_s:g} outside (0, {ceiling:.6g})"
            )

    def required_snr(self, p_s: float) -> float:
        """Average SNR at which the Rayleigh bound equals p_s."""
        self.check_target(p_s)
        q = self.expectation_for_target(p_s)
        return (1.0 / q - 1.0) / self.chernoff_rate


@dataclass(frozen=True)
class NcMfsk(Modulation):
    """Non-coherent M-ary FSK with M orthogonal tones and envelope detection."""
    m: int = 2
    zeta: int = 1

    family = "nc-mfsk"

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 2 or self.m & (self.m - 1):
            raise ValueError(f"NC-MFSK needs M as a power of two >= 2, got {self.m}")
        if self.zeta not in (1, 2):
            raise ValueError(f"zeta must be 1 or 2, got {self.zeta}")

    @property
    def label(self) -> str:
        return "NC-BFSK" if self.m == 2 else f"NC-{self.m}FSK"

    @property
    def bits_per_symbol(self) -> float:
        return math.log2(self.m)

    def bandwidth_efficiency(self) -> float:
        return self.zeta * self.bits_per_symbol / self.m

    def _raw_active_duration(self, timing: FrameTiming) -> float:
        return self.m * timing.n_bits / (self.zeta * timing.bandwidth * self.bits_per_symbol)

    @property
    def chernoff_rate(self) -> float:
        return 0.5

    def bound_from_expectation(self, q: float) -> float:
        # 1 - (1 - q/2)^(M-1)
        return -math.expm1((self.m - 1) * math.log1p(-q / 2.0))

    def expectation_for_target(self, p_s: float) -> float:
        return -2.0 * math.expm1(math.log1p(-p_s) / (self.m - 1))

    def circuit_powers(self, radio: RadioParameters) -> Tuple[float, float]:
        p_ct = radio.p_sy + radio.p_filt
        p_cr = radio.p_lna + self.m * (radio.p_filr + radio.p_ed) + radio.p_ifa + radio.p_adc
        return p_ct, p_cr

    def amplifier_coefficient(self, radio: RadioParameters = None) -> float:
        return (radio or RadioParameters()).alpha_fsk


@dataclass(frozen=True)
class Mqam(Modulation):
    """Coherent square-grid MQAM; M is any integer >= 4 for optimization."""
    m: int = 4

    family = "mqam"

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 4:
            raise ValueError(f"MQAM needs an integer M >= 4, got {self.m}")

    @property
    def label(self) -> str:
        return f"{self.m}QAM"

    @property
    def is_square(self) -> bool:
        return math.isqrt(self.m) ** 2 == self.m

    @property
    def bits_per_symbol(self) -> float:
        return math.log2(self.m)

    def bandwidth_efficiency(self) -> float:
        return 2 * self.bits_per_symbol

    def _raw_active_duration(self, timing: FrameTiming) -> float:
        return timing.n_bits / (2 * timing.bandwidth * self.bits_per_symbol)

    @property
    def _edge_factor(self) -> float:
        return 2.0 * (1.0 - 1.0 / math.sqrt(self.m))

    @property
    def chernoff_rate(self) -> float:
        return 3.0 / (2.0 * (self.m - 1))

    def bound_from_expectation(self, q: float) -> float:
        return self._edge_factor * q

    def expectation_for_target(self, p_s: float) -> float:
        return p_s / self._edge_factor

    def circuit_powers(self, radio: RadioParameters) -> Tuple[float, float]:
        p_ct = radio.p_dac + radio.p_sy + radio.p_mix + radio.p_filt
        p_cr = radio.p_lna + radio.p_mix + radio.p_sy + radio.p_filr + radio.p_ifa + radio.p_adc
        return p_ct, p_cr

    def circuit_energy(self, radio: RadioParameters, t_ac: float, timing: FrameTiming) -> float:
        return radio.coherent_circuit_scale * super().circuit_energy(radio, t_ac, timing)

    def amplifier_coefficient(self, radio: RadioParameters = None) -> float:
        vartheta = (radio or RadioParameters()).vartheta
        root = math.sqrt(self.m)
        xi = 3.0 * (root - 1.0) / (root + 1.0)
        return xi / vartheta - 1.0


@dataclass(frozen=True)
class DiffOqpsk(Modulation):
    """Differentially encoded offset QPSK."""

    family = "oqpsk"

    @property
    def label(self) -> str:
        return "DOQPSK"

    @property
    def bits_per_symbol(self) -> float:
        return 2.0

    def bandwidth_efficiency(self) -> float:
        return 2.0

    def _raw_active_duration(self, timing: FrameTiming) -> float:
        return timing.n_bits / (2 * timing.bandwidth)

    @property
    def _leading_factor(self) -> float:
        return math.sqrt((1.0 + math.sqrt(2.0)) / 2.0)

    @property
    def chernoff_rate(self) -> float:
        return (2.0 - math.sqrt(2.0)) / 4.0

    def bound_from_expectation(self, q: float) -> float:
        return self._leading_factor * q

    def expectation_for_target(self, p_s: float) -> float:
        return p_s / self._leading_factor

    def circuit_powers(self, radio: RadioParameters) -> Tuple[float, float]:
        return Mqam(4).circuit_powers(radio)

    def circuit_energy(self, radio: RadioParameters, t_ac: float, timing: FrameTiming) -> float:
        return radio.coherent_circuit_scale * super().circuit_energy(radio, t_ac, timing)

    def amplifier_coefficient(self, radio: RadioParameters = None) -> float:
        return (radio or RadioParameters()).alpha_oqpsk


@dataclass(frozen=True)
class Ook(Modulation):
    """Impulse-radio on-off keying: a pulse of width 1/B for each "1" bit."""
    duty_cycle: float = 0.5

    family = "ook"

    def __post_init__(self):
        if not 0 < self.duty_cycle <= 1:
            raise ValueError(f"duty_cycle must lie in (0, 1], got {self.duty_cycle}")

    @property
    def label(self) -> str:
        return "OOK"

    @property
    def bits_per_symbol(self) -> float:
        return 1.0

    def bandwidth_efficiency(self) -> float:
        return self.duty_cycle

    def _raw_active_duration(self, timing: FrameTiming) -> float:
        return timing.n_bits / (self.duty_cycle * timing.bandwidth)

    def rf_symbols(self, n_bits: float) -> float:
        # expected number of "1" pulses
        return n_bits / 2.0

    def transient_power(self, radio: RadioParameters) -> float:
        return 2 * radio.p_pg

    @property
    def chernoff_rate(self) -> float:
        return 0.5

    def bound_from_expectation(self, q: float) -> float:
        return q / 2.0

    def expectation_for_target(self, p_s: float) -> float:
        return 2.0 * p_s

    def circuit_powers(self, radio: RadioParameters) -> Tuple[float, float]:
        p_cr = radio.p_lna + radio.p_ed + radio.p_filr + radio.p_int + radio.p_adc
        return radio.p_pg, p_cr

    def circuit_energy(self, radio: RadioParameters, t_ac: float, timing: FrameTiming,
                       l_ones: float = None) -> float:
        if l_ones is None:
            l_ones = self.rf_symbols(timing.n_bits)
        always_on = super().circuit_energy(radio, t_ac, timing)
        pulse_filter = frame_energy(radio.p_filt, 0.0, l_ones / timing.bandwidth,
                                    0.0, 0.0, radio.chi_e)
        return always_on + pulse_filter

    def amplifier_coefficient(self, radio: RadioParameters = None) -> float:
        return (radio or RadioParameters.ook_defaults()).alpha_ook


Scheme = Union[NcMfsk, Mqam, DiffOqpsk, Ook]

SCHEME_FAMILIES = {
    "nc-mfsk": NcMfsk,
    "mqam": Mqam,
    "oqpsk": DiffOqpsk,
    "ook": Ook,
}


def scheme_from_name(family: str, m: int = None, **params) -> Scheme:
    """Build a scheme from its family name, M (where it has one) and extra fields.

    Args:
        family: One of SCHEME_FAMILIES.
        m: Constellation size for NC-MFSK and MQAM; ignored otherwise.
        **params: Remaining dataclass fields, e.g. zeta or duty_cycle.
    """
    try:
        cls = SCHEME_FAMILIES[family]
    except KeyError:
        raise ValueError(
            f"Unknown scheme family {family!r}; expected one of {sorted(SCHEME_FAMILIES)}"
        ) from None
    if cls in (NcMfsk, Mqam) and m is not None:
        return cls(m, **params)
    return cls(**params)


def required_average_snr(scheme: Scheme, p_s_target: float, fading: FadingModel) -> float:
    """gamma_bar needed for p_s_target: closed form for Rayleigh, numeric otherwise."""
    if isinstance(fading, Rayleigh):
        return scheme.required_snr(p_s_target)

    from src.oracle import invert_ser_numeric

    scheme.check_target(p_s_target)
    return invert_ser_numeric(scheme, p_s_target, fading)


def required_symbol_energy(
    scheme: Scheme,
    p_s_target: float,
    link: LinkBudget,
    fading: FadingModel,
    n0: float,
) -> float:
    """Transmit energy per symbol E_t meeting p_s_target.

    Args:
        scheme: Any modulation scheme.
        p_s_target: Target symbol error probability.
        link: Link budget giving L_d.
        fading: Rayleigh uses the closed-form inverse; Rician is inverted numerically.
        n0: Noise spectral density (J).
    """
    if n0 <= 0:
        raise ValueError(f"n0 must be > 0, got {n0}")
    gamma_bar = required_average_snr(scheme, p_s_target, fading)
    return gamma_bar * path_loss_gain(link) * n0 / fading.omega


def _assemble(
    scheme: Scheme,
    e_t: float,
    energy_symbols: float,
    e_circuit: float,
    timing: FrameTiming,
    radio: RadioParameters,
) -> EnergyBreakdown:
    alpha = scheme.amplifier_coefficient(radio)
    e_rf = (1.0 + alpha) * e_t * energy_symbols / radio.chi_e
    e_transient = frame_energy(0.0, 0.0, 0.0, scheme.transient_power(radio),
                               timing.transient, radio.chi_e)
    return EnergyBreakdown(e_rf_tx=e_rf, e_circuit_active=e_circuit, e_transient=e_transient)


def total_frame_energy(
    scheme: Scheme,
    p_s_target: float,
    link: LinkBudget,
    fading: FadingModel,
    timing: FrameTiming,
    radio: RadioParameters,
) -> EnergyBreakdown:
    """Energy to deliver one N-bit frame at the target SER.

    For OOK this is the expectation over the number of "1" bits, which
    enters linearly, so it equals the energy at L = N/2.

    Raises:
        FrameOverrunError: If the scheme's active duration does not fit.
        UnattainableTargetError: If p_s_target is out of the bound's range.
    """
    t_ac = scheme.active_duration(timing)
    e_t = required_symbol_energy(scheme, p_s_target, link, fading, radio.n0)
    e_circuit = scheme.circuit_energy(radio, t_ac, timing)
    breakdown = _assemble(scheme, e_t, scheme.rf_symbols(timing.n_bits), e_circuit,
                          timing, radio)
    logger.debug(
        f"{scheme.label} d={link.d:g} eta={link.eta:g} {fading.label}: "
        f"rf={breakdown.e_rf_tx:.4e} circuit={breakdown.e_circuit_active:.4e} "
        f"total={breakdown.e_total:.4e} J"
    )
    return breakdown


def ook_frame_energy_conditional(
    l_ones: int,
    link: LinkBudget,
    timing: FrameTiming,
    radio: RadioParameters,
    p_s_target: float,
    scheme: Ook = None,
    fading: FadingModel = None,
) -> float:
    """OOK frame energy given that exactly l_ones of the N bits are "1"."""
    if not 0 <= l_ones <= timing.n_bits:
        raise ValueError(f"l_ones must lie in [0, {timing.n_bits}], got {l_ones}")
    scheme = scheme or Ook()
    fading = fading or Rayleigh()
    t_ac = scheme.active_duration(timing)
    e_t = required_symbol_energy(scheme, p_s_target, link, fading, radio.n0)
    e_circuit = scheme.circuit_energy(radio, t_ac, timing, l_ones=l_ones)
    return _assemble(scheme, e_t, l_ones, e_circuit, timing, radio).e_total

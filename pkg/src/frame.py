"""
Duty-cycle frame model.

A proactive sensor wakes once per frame period T_N, spends T_tr starting
its oscillators, T_ac actively exchanging the N-bit payload, and sleeps
for the remainder. Sleep-mode energy is taken as zero.
"""

import logging
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)


class FrameOverrunError(ValueError):
    """Raised when an active-mode duration does not fit inside the frame."""


@dataclass(frozen=True)
class FrameTiming:
    """Timing budget of one duty-cycled frame.

    Attributes:
        n_bits: Payload bits per frame (N).
        frame_period: Frame period T_N in seconds.
        transient: Start-up duration T_tr in seconds.
        bandwidth: Channel bandwidth B in Hz.
    """
    n_bits: int
    frame_period: float
    transient: float
    bandwidth: float

    def __post_init__(self):
        if self.n_bits < 1:
            raise ValueError(f"n_bits must be >= 1, got {self.n_bits}")
        if self.frame_period <= 0:
            raise ValueError(f"frame_period must be > 0, got {self.frame_period}")
        if self.bandwidth <= 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not 0 <= self.transient < self.frame_period:
            raise ValueError(
                f"transient must lie in [0, frame_period), got {self.transient}"
            )

    @property
    def available_active_time(self) -> float:
        """Longest active-mode duration the frame can hold (T_N - T_tr)."""
        return self.frame_period - self.transient

    def check_active(self, t_ac: float, label: str = "scheme") -> float:
        """Validate an active duration against the frame budget.

        Returns:
            t_ac unchanged when it fits.

        Raises:
            FrameOverrunError: If t_ac exceeds T_N - T_tr.
        """
        if t_ac < 0:
            raise ValueError(f"active duration must be >= 0, got {t_ac}")
        if t_ac > self.available_active_time:
            raise FrameOverrunError(
                f"{label}: active duration {t_ac:.6g} s exceeds the "
                f"{self.available_active_time:.6g} s available in a "
                f"{self.frame_period:.6g} s frame"
            )
        return t_ac


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy spent on one N-bit frame, split by where it goes (joules)."""
    e_rf_tx: float
    e_circuit_active: float
    e_transient: float
    e_total: float = field(init=False)

    def __post_init__(self):
        for name in ("e_rf_tx", "e_circuit_active", "e_transient"):
            value = getattr(self, name)
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        object.__setattr__(
            self, "e_total", self.e_rf_tx + self.e_circuit_active + self.e_transient
        )

    def per_bit(self, n_bits: int) -> float:
        """Total energy per information bit, E_b = E_N / N."""
        return self.e_total / n_bits


def frame_energy(
    p_circuit: float,
    p_transmit: float,
    t_ac: float,
    p_tr: float,
    t_tr: float,
    chi_e: float,
) -> float:
    """Energy drawn from the battery over one frame.

    Args:
        p_circuit: Circuit power during active mode (W).
        p_transmit: Transmit power during active mode (W).
        t_ac: Active-mode duration (s).
        p_tr: Power drawn during the transient (W).
        t_tr: Transient duration (s).
        chi_e: DC-DC converter efficiency in (0, 1].

    Returns:
        (1/chi_e) * [(p_circuit + p_transmit) * t_ac + p_tr * t_tr] in joules.
    """
    if not 0 < chi_e <= 1:
        raise ValueError(f"chi_e must lie in (0, 1], got {chi_e}")
    args = {
        "p_circuit": p_circuit,
        "p_transmit": p_transmit,
        "t_ac": t_ac,
        "p_tr": p_tr,
        "t_tr": t_tr,
    }
    negative = [name for name, value in args.items() if value < 0]
    if negative:
        raise ValueError(f"Negative inputs to frame_energy: {', '.join(negative)}")

    return ((p_circuit + p_transmit) * t_ac + p_tr * t_tr) / chi_e

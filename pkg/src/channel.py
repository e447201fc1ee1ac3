"""
Channel model: path loss, flat fading, and average SNR.

The received symbol energy is E_t * |h|^2 / L_d where L_d = M_l * d^eta * L_1
collects the distance-dependent loss and fixed link margins, and h is a
flat, memoryless fading coefficient (Rayleigh or Rician).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import constants, stats

logger = logging.getLogger(__name__)

RICIAN_NORMALIZATIONS = ("total", "diffuse")


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm: float) -> float:
    """Convert dBm (or dBm/Hz) to watts (or joules)."""
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class LinkBudget:
    """Distance and fixed gains of a sensor-to-sink link.

    Attributes:
        d: Distance in meters.
        eta: Path-loss exponent.
        margin_db: Gain margin M_l in dB.
        l1_db: Reference gain factor at 1 m, L_1, in dB.
    """
    d: float
    eta: float
    margin_db: float = 40.0
    l1_db: float = 30.0

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError(f"distance must be > 0, got {self.d}")
        if self.eta < 1:
            raise ValueError(f"path-loss exponent must be >= 1, got {self.eta}")
        if not (math.isfinite(self.margin_db) and math.isfinite(self.l1_db)):
            raise ValueError("link margins must be finite dB values")


def reference_gain_db(carrier_hz: float, gt_dbi: float, gr_dbi: float) -> float:
    """Free-space reference loss at 1 m, L_1 = (4*pi)^2 / (G_t G_r lambda^2), in dB.

    A 2.4 GHz carrier with 5 dBi antennas on both ends gives about 30 dB.
    """
    if carrier_hz <= 0:
        raise ValueError(f"carrier frequency must be > 0, got {carrier_hz}")
    wavelength = constants.c / carrier_hz
    l1 = (4 * math.pi) ** 2 / (db_to_linear(gt_dbi + gr_dbi) * wavelength ** 2)
    return 10.0 * math.log10(l1)


def path_loss_gain(link: LinkBudget) -> float:
    """Linear channel gain factor L_d = 10^((M_l + L_1)/10) * d^eta."""
    return db_to_linear(link.margin_db + link.l1_db) * link.d ** link.eta


@dataclass(frozen=True)
class Rayleigh:
    """Rayleigh fading with mean-square gain omega."""
    omega: float = 1.0

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")

    @property
    def label(self) -> str:
        return "rayleigh"

    @property
    def los_amplitude(self) -> float:
        return 0.0

    @property
    def sigma(self) -> float:
        """Per-component standard deviation of the scattered part."""
        return math.sqrt(self.omega / 2.0)

    @property
    def mean_power(self) -> float:
        return self.omega

    def amplitude_distribution(self):
        return stats.rayleigh(scale=self.sigma)

    def mgf(self, x):
        """E[exp(-x |h|^2)] for x >= 0."""
        return 1.0 / (1.0 + self.omega * np.asarray(x, dtype=float))

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.sigma * (
            rng.standard_normal(size) + 1j * rng.standard_normal(size)
        )


@dataclass(frozen=True)
class Rician:
    """Rician fading h = A + (scattered complex Gaussian).

    With normalization "total" the line-of-sight and scattered powers split
    omega as A^2 = omega*kappa/(1+kappa), 2*sigma^2 = omega/(1+kappa).
    With "diffuse" the scattered power alone equals omega (2*sigma^2 = omega,
    A^2 = kappa*omega), so E|h|^2 = omega*(1+kappa).
    """
    k_db: float
    omega: float = 1.0
    normalization: str = "total"

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if math.isnan(self.k_db) or self.k_db == math.inf:
            raise ValueError(f"Rician K factor must be finite or -inf dB, got {self.k_db}")
        if self.normalization not in RICIAN_NORMALIZATIONS:
            raise ValueError(
                f"normalization must be one of {RICIAN_NORMALIZATIONS}, "
                f"got {self.normalization!r}"
            )

    @property
    def label(self) -> str:
        return f"rician:{self.k_db:g}"

    @property
    def kappa(self) -> float:
        return db_to_linear(self.k_db)

    @property
    def scattered_power(self) -> float:
        """2*sigma^2."""
        if self.normalization == "diffuse":
            return self.omega
        return self.omega / (1.0 + self.kappa)

    @property
    def los_power(self) -> float:
        """A^2."""
        if self.normalization == "diffuse":
            return self.kappa * self.omega
        return self.omega * self.kappa / (1.0 + self.kappa)

    @property
    def los_amplitude(self) -> float:
        return math.sqrt(self.los_power)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.scattered_power / 2.0)

    @property
    def mean_power(self) -> float:
        return self.los_power + self.scattered_power

    def amplitude_distribution(self):
        return stats.rice(self.los_amplitude / self.sigma, scale=self.sigma)

    def mgf(self, x):
        """E[exp(-x |h|^2)] for x >= 0."""
        x = np.asarray(x, dtype=float)
        denom = 1.0 + self.scattered_power * x
        return np.exp(-self.los_power * x / denom) / denom

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        scattered = self.sigma * (
            rng.standard_normal(size) + 1j * rng.standard_normal(size)
        )
        return self.los_amplitude + scattered


FadingModel = Union[Rayleigh, Rician]


def average_snr(e_t: float, link: LinkBudget, fading: FadingModel, n0: float) -> float:
    """Average received SNR per symbol, gamma_bar = omega * E_t / (L_d * N0)."""
    if n0 <= 0:
        raise ValueError(f"n0 must be > 0, got {n0}")
    if e_t < 0:
        raise ValueError(f"symbol energy must be >= 0, got {e_t}")
    return fading.omega * e_t / (path_loss_gain(link) * n0)


def sample_channel_gain(
    fading: FadingModel,
    seed: Union[int, np.random.Generator, None],
    size: Optional[int] = None,
) -> np.ndarray:
    """Draw complex fading coefficients h from a deterministic stream.

    Args:
        fading: Rayleigh or Rician model.
        seed: Integer seed or an existing numpy Generator (consumed in place).
        size: Number of draws; a single complex value when omitted.
    """
    rng = np.random.default_rng(seed)
    if size is None:
        return fading.sample(rng, 1)[0]
    return fading.sample(rng, size)

"""
Monte Carlo symbol-error oracle and numeric SER inversion.

simulate_ser runs an independent detector chain (fading draw, noise,
detection, error count) so the closed-form bounds can be checked against
something that does not share their algebra. invert_ser_numeric finds the
average SNR meeting a target SER under fading models with no closed-form
inverse, either by adaptive quadrature over the amplitude pdf or by
bisection on simulated error rates.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from src.channel import FadingModel
from src.schemes import DiffOqpsk, Mqam, NcMfsk, Ook, Scheme

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 16
MIN_SYMBOLS = 10_000
Z_95 = 1.96
QUAD_EPSREL = 1e-6
OOK_DETECTORS = ("matched", "energy")
INVERSION_METHODS = ("integration", "simulation")


class ConvergenceError(RuntimeError):
    """Raised when a numeric inversion exhausts its iteration budget."""


@dataclass(frozen=True)
class SerEstimate:
    """Monte Carlo SER estimate with a 95% normal-approximation interval."""
    p_hat: float
    n_symbols: int
    ci_halfwidth: float
    seed: int
    n_errors: int = 0

    def __post_init__(self):
        if not 0 <= self.p_hat <= 1:
            raise ValueError(f"p_hat must lie in [0, 1], got {self.p_hat}")
        if self.n_symbols < 1:
            raise ValueError(f"n_symbols must be >= 1, got {self.n_symbols}")

    @classmethod
    def from_counts(cls, n_errors: int, n_symbols: int, seed: int) -> "SerEstimate":
        p_hat = n_errors / n_symbols
        ci = Z_95 * math.sqrt(p_hat * (1.0 - p_hat) / n_symbols)
        return cls(p_hat=p_hat, n_symbols=n_symbols, ci_halfwidth=ci,
                   seed=seed, n_errors=n_errors)

    def within_bound(self, bound: float, k: float = 3.0) -> bool:
        """One-sided check p_hat <= bound + k * ci."""
        return self.p_hat <= bound + k * self.ci_halfwidth

    def consistent_with(self, value: float, k: float = 3.0) -> bool:
        """Two-sided check |p_hat - value| <= k * ci."""
        return abs(self.p_hat - value) <= k * self.ci_halfwidth


def _complex_noise(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian with unit variance (N0 = 1)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)


def _nc_mfsk_errors(scheme: NcMfsk, gamma_bar: float, fading: FadingModel,
                    rng: np.random.Generator, size: int) -> int:
    # tone 0 is sent; the other M-1 branches carry noise only
    h = fading.sample(rng, size)
    received = _complex_noise(rng, (size, scheme.m))
    received[:, 0] += math.sqrt(gamma_bar / fading.omega) * h
    decisions = np.argmax(np.abs(received) ** 2, axis=1)
    return int(np.count_nonzero(decisions != 0))


def _mqam_errors(scheme: Mqam, gamma_bar: float, fading: FadingModel,
                 rng: np.random.Generator, size: int) -> int:
    levels = math.isqrt(scheme.m)
    scale = math.sqrt(3.0 / (2.0 * (scheme.m - 1)))
    idx_i = rng.integers(0, levels, size)
    idx_q = rng.integers(0, levels, size)
    symbols = scale * ((2 * idx_i - (levels - 1)) + 1j * (2 * idx_q - (levels - 1)))

    h = fading.sample(rng, size)
    amplitude = math.sqrt(gamma_bar / fading.omega)
    received = amplitude * h * symbols + _complex_noise(rng, size)

    if amplitude == 0.0:
        # every point is equidistant from a zero-energy grid; ties go to index 0
        return int(np.count_nonzero((idx_i != 0) | (idx_q != 0)))

    equalized = received * np.conj(h) / (np.abs(h) ** 2 * amplitude * scale)
    est_i = np.clip(np.rint((equalized.real + (levels - 1)) / 2), 0, levels - 1)
    est_q = np.clip(np.rint((equalized.imag + (levels - 1)) / 2), 0, levels - 1)
    return int(np.count_nonzero((est_i != idx_i) | (est_q != idx_q)))


def _ook_errors(scheme: Ook, gamma_bar: float, fading: FadingModel,
                rng: np.random.Generator, size: int, detector: str) -> int:
    bits = rng.integers(0, 2, size)
    h = fading.sample(rng, size)
    amplitude = math.sqrt(gamma_bar / fading.omega)
    received = amplitude * h * bits + _complex_noise(rng, size)
    magnitude = np.abs(h)

    if detector == "matched":
        # project onto the channel phase, threshold halfway to the "1" amplitude
        statistic = (received * np.conj(h)).real / magnitude
        decisions = statistic > amplitude * magnitude / 2.0
    else:
        # noise-normalized energy, threshold halfway between the two mean energies
        inst_snr = (amplitude * magnitude) ** 2
        decisions = np.abs(received) ** 2 > 1.0 + inst_snr / 2.0
    return int(np.count_nonzero(decisions != bits.astype(bool)))


def simulate_ser(
    scheme: Scheme,
    gamma_bar: float,
    fading: FadingModel,
    n_symbols: int,
    seed: int,
    detector: str = "matched",
) -> SerEstimate:
    """Estimate the symbol error rate of scheme at average SNR gamma_bar.

    Trials are split into chunks, each drawing from its own child of
    SeedSequence(seed), and the error counts are summed, so the result only
    depends on (seed, n_symbols).

    Args:
        scheme: NcMfsk, square Mqam, or Ook.
        gamma_bar: Average SNR per symbol; per-symbol SNR is |h|^2/omega * gamma_bar.
        fading: Rayleigh or Rician model.
        n_symbols: Trials, at least 1e4.
        seed: Non-negative integer seed.
        detector: OOK detector, "matched" (channel-phase projection) or "energy".
    """
    if gamma_bar < 0:
        raise ValueError(f"gamma_bar must be >= 0, got {gamma_bar}")
    if n_symbols < MIN_SYMBOLS:
        raise ValueError(f"n_symbols must be >= {MIN_SYMBOLS}, got {n_symbols}")
    if detector not in OOK_DETECTORS:
        raise ValueError(f"detector must be one of {OOK_DETECTORS}, got {detector!r}")

    if isinstance(scheme, NcMfsk):
        def count(rng, size):
            return _nc_mfsk_errors(scheme, gamma_bar, fading, rng, size)
    elif isinstance(scheme, Mqam):
        if not scheme.is_square:
            raise ValueError(f"Simulation supports square MQAM only, got M={scheme.m}")

        def count(rng, size):
            return _mqam_errors(scheme, gamma_bar, fading, rng, size)
    elif isinstance(scheme, Ook):
        def count(rng, size):
            return _ook_errors(scheme, gamma_bar, fading, rng, size, detector)
    elif isinstance(scheme, DiffOqpsk):
        raise ValueError("Differential OQPSK has no waveform simulator; use its bound")
    else:
        raise ValueError(f"Unknown scheme: {scheme!r}")

    n_chunks = -(-n_symbols // CHUNK_SIZE)
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    n_errors = 0
    for i, stream in enumerate(streams):
        size = min(CHUNK_SIZE, n_symbols - i * CHUNK_SIZE)
        n_errors += count(np.random.default_rng(stream), size)

    estimate = SerEstimate.from_counts(n_errors, n_symbols, seed)
    logger.debug(
        f"simulate_ser {scheme.label} {fading.label} gamma={gamma_bar:g}: "
        f"{n_errors}/{n_symbols} = {estimate.p_hat:.4e} (+/- {estimate.ci_halfwidth:.1e})"
    )
    return estimate


def fading_expectation(
    conditional: Callable[[float], float],
    fading: FadingModel,
    gamma_bar: float,
) -> float:
    """E_h[conditional(|h|^2/omega * gamma_bar)] by adaptive quadrature.

    Integrates over the amplitude pdf on [0, A + 12*sigma], with breakpoints
    where an exponentially decaying conditional SER concentrates its mass.
    """
    dist = fading.amplitude_distribution()
    snr_per_power = gamma_bar / fading.omega
    upper = fading.los_amplitude + 12.0 * fading.sigma

    def integrand(r):
        return conditional(r * r * snr_per_power) * dist.pdf(r)

    points = []
    if snr_per_power > 0:
        width = 1.0 / math.sqrt(snr_per_power)
        points = [p for p in (0.5 * width, 3.0 * width) if 0 < p < upper]
    if 0 < fading.los_amplitude < upper:
        points.append(fading.los_amplitude)

    value, abserr = integrate.quad(
        integrand, 0.0, upper,
        points=sorted(points) or None,
        epsabs=0.0, epsrel=QUAD_EPSREL, limit=200,
    )
    return value


def bound_by_integration(scheme: Scheme, gamma_bar: float, fading: FadingModel) -> float:
    """Unclamped SER bound with its fading average computed numerically."""
    rate = scheme.chernoff_rate
    q = fading_expectation(lambda g: math.exp(-rate * g), fading, gamma_bar)
    return scheme.bound_from_expectation(q)


def bisect_decreasing(
    f: Callable[[float], float],
    target: float,
    lo: float = 0.0,
    hi: float = 1.0,
    rel_tol: float = 1e-6,
    max_iter: int = 200,
) -> float:
    """Solve f(x) = target for a nonincreasing f on x >= 0.

    The bracket keeps f(lo) > target >= f(hi) at every step; hi is grown
    geometrically until it brackets the root, then the interval is halved
    (geometrically once lo > 0) until (hi - lo) <= rel_tol * hi.

    Raises:
        ConvergenceError: If bracketing or bisection exceeds max_iter steps.
    """
    if rel_tol <= 0:
        raise ValueError(f"tolerance must be > 0, got {rel_tol}")
    if f(lo) <= target:
        return lo

    iterations = 0
    while f(hi) > target:
        lo, hi = hi, hi * 4.0
        iterations += 1
        if iterations > max_iter:
            raise ConvergenceError(
                f"Could not bracket target {target:g}: f({hi:g}) still above it"
            )

    while hi - lo > rel_tol * hi:
        mid = math.sqrt(lo * hi) if lo > 0 else hi / 2.0
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
        iterations += 1
        if iterations > max_iter:
            raise ConvergenceError(
                f"Bisection did not converge in {max_iter} iterations "
                f"(bracket [{lo:g}, {hi:g}])"
            )
    return 0.5 * (lo + hi)


@lru_cache(maxsize=4096)
def _invert_by_integration(scheme: Scheme, p_s_target: float, fading: FadingModel,
                           tolerance: float, max_iter: int) -> float:
    return bisect_decreasing(
        lambda g: bound_by_integration(scheme, g, fading),
        p_s_target, rel_tol=tolerance, max_iter=max_iter,
    )


def simulation_budget(p_s_target: float, tolerance: float, n_max: int = 2_000_000) -> int:
    """Symbols per bisection step so that the 95% half-width is tolerance * p."""
    needed = math.ceil(Z_95 ** 2 * (1.0 - p_s_target) / (p_s_target * tolerance ** 2))
    return int(min(max(needed, MIN_SYMBOLS), n_max))


def invert_ser_numeric(
    scheme: Scheme,
    p_s_target: float,
    fading: FadingModel,
    tolerance: float = 1e-6,
    seed: Optional[int] = None,
    method: str = "integration",
    max_iter: int = 200,
    n_max: int = 2_000_000,
) -> float:
    """Average SNR at which scheme's SER meets p_s_target under fading.

    With method "integration" the bound's fading average is evaluated by
    quadrature (deterministic; seed unused). With "simulation" each step
    runs simulate_ser on a common seed, with the per-step trial count set by
    simulation_budget, so tolerance also sets the Monte Carlo precision.

    Raises:
        UnattainableTargetError: If p_s_target is outside the bound's range.
        ConvergenceError: If the iteration budget is exhausted.
    """
    if method not in INVERSION_METHODS:
        raise ValueError(f"method must be one of {INVERSION_METHODS}, got {method!r}")
    scheme.check_target(p_s_target)

    if method == "integration":
        gamma_bar = _invert_by_integration(scheme, p_s_target, fading, tolerance, max_iter)
    else:
        n_symbols = simulation_budget(p_s_target, tolerance, n_max)
        stream = 0 if seed is None else seed
        gamma_bar = bisect_decreasing(
            lambda g: simulate_ser(scheme, g, fading, n_symbols, stream).p_hat,
            p_s_target, rel_tol=tolerance, max_iter=max_iter,
        )

    logger.debug(
        f"Inverted {scheme.label} under {fading.label} ({method}): "
        f"P_s={p_s_target:g} -> gamma_bar={gamma_bar:.6g}"
    )
    return gamma_bar

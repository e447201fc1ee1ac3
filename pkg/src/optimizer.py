"""
Constellation-size optimization and distance-based scheme selection.

Optimization is an exhaustive scan over the feasible constellation sizes,
bounded by the largest M whose active-mode duration still fits the frame.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Type, Union

from scipy import optimize

from src.channel import FadingModel, LinkBudget, Rayleigh, path_loss_gain
from src.frame import EnergyBreakdown, FrameOverrunError, FrameTiming
from src.schemes import (
    DiffOqpsk,
    Mqam,
    NcMfsk,
    Ook,
    RadioParameters,
    Scheme,
    total_frame_energy,
)

logger = logging.getLogger(__name__)

REGIMES = ("lower_bound", "interior", "m_max")
MAX_SCAN_EXPONENT = 40


@dataclass(frozen=True)
class Scenario:
    """Timing and radio of one bandwidth regime plus the link's fixed gains."""
    timing: FrameTiming
    radio: RadioParameters
    margin_db: float = 40.0
    l1_db: float = 30.0

    @classmethod
    def carrier_defaults(cls) -> "Scenario":
        return cls(
            timing=FrameTiming(n_bits=8192, frame_period=1.4, transient=5e-6, bandwidth=62.5e3),
            radio=RadioParameters.carrier_defaults(),
        )

    @classmethod
    def ook_defaults(cls) -> "Scenario":
        return cls(
            timing=FrameTiming(n_bits=20000, frame_period=0.1, transient=2e-9, bandwidth=500e6),
            radio=RadioParameters.ook_defaults(),
        )

    def link(self, d: float, eta: float) -> LinkBudget:
        return LinkBudget(d=d, eta=eta, margin_db=self.margin_db, l1_db=self.l1_db)


@dataclass(frozen=True)
class OptimizationResult:
    """Best constellation for one scheme family at one operating point.

    Attributes:
        scheme: Scheme instance at the chosen M.
        e_total: Frame energy at the chosen M (J).
        breakdown: Energy split at the chosen M.
        m_max: Timing bound on M used by the scan.
        regime: "lower_bound" (smallest M wins), "interior", or "m_max".
        scan: (M, e_total) for every feasible candidate, in scan order.
    """
    scheme: Scheme
    e_total: float
    breakdown: EnergyBreakdown
    m_max: int
    regime: str = "interior"
    scan: Tuple[Tuple[int, float], ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.e_total != self.breakdown.e_total:
            raise ValueError("e_total does not match the breakdown it came from")
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")

    @property
    def m(self) -> int:
        return self.scheme.m


@dataclass(frozen=True)
class IntersectionEstimate:
    """Root of the MQAM term-balance equation.

    interior is False when the root falls outside (4, m_max), which is the
    "no interior root" case: the scanned optimum then sits on a boundary.
    """
    m_root: float
    m_clipped: float
    interior: bool


@dataclass(frozen=True)
class RankedEntry:
    label: str
    scheme: Scheme
    e_total: float
    breakdown: EnergyBreakdown
    regime: str = "interior"


@dataclass(frozen=True)
class SelectionResult:
    winner: RankedEntry
    ranking: Tuple[RankedEntry, ...]


@dataclass(frozen=True)
class PerBitRow:
    d: float
    eta: float
    m_hat_fs: int
    eb_fs: float
    eb_ook: float

    @property
    def ratio(self) -> float:
        return self.eb_fs / self.eb_ook


def max_constellation(timing: FrameTiming, zeta: int = 1) -> int:
    """Largest power-of-two M with M/log2(M) <= (zeta*B/N)(T_N - T_tr).

    Raises:
        FrameOverrunError: If even M = 2 does not fit.
    """
    rhs = zeta * timing.bandwidth / timing.n_bits * timing.available_active_time
    if rhs < 2.0:
        raise FrameOverrunError(
            f"No constellation fits: M/log2(M) must be <= {rhs:.4g}, but M=2 needs 2"
        )
    m = 2
    for exponent in range(2, MAX_SCAN_EXPONENT + 1):
        candidate = 2 ** exponent
        if candidate / exponent > rhs:
            break
        m = candidate
    return m


def _family_class(family: Union[str, Type]) -> Type:
    if family in (NcMfsk, "nc-mfsk"):
        return NcMfsk
    if family in (Mqam, "mqam"):
        return Mqam
    raise ValueError(f"Only NC-MFSK and MQAM have a free constellation size, got {family!r}")


def candidate_schemes(family: Union[str, Type], m_max: int, zeta: int = 1) -> List[Scheme]:
    """Constellations scanned for a family: powers of two for NC-MFSK, all integers for MQAM."""
    cls = _family_class(family)
    if cls is NcMfsk:
        return [NcMfsk(2 ** k, zeta) for k in range(1, int(math.log2(m_max)) + 1)]
    return [Mqam(m) for m in range(4, m_max + 1)]


def optimize_constellation(
    family: Union[str, Type],
    p_s_target: float,
    link: LinkBudget,
    fading: FadingModel,
    timing: FrameTiming,
    radio: RadioParameters,
    zeta: int = 1,
    m_max: Optional[int] = None,
) -> OptimizationResult:
    """Minimum-energy constellation size for NC-MFSK or MQAM.

    Candidates whose active duration overruns the frame are skipped. Ties
    keep the smaller M.

    Raises:
        FrameOverrunError: If no candidate fits the frame.
    """
    if m_max is None:
        m_max = max_constellation(timing, zeta)

    scan = []
    best_scheme, best = None, None
    for scheme in candidate_schemes(family, m_max, zeta):
        try:
            breakdown = total_frame_energy(scheme, p_s_target, link, fading, timing, radio)
        except FrameOverrunError as e:
            logger.debug(f"Skipping {scheme.label}: {e}")
            continue
        scan.append((scheme.m, breakdown.e_total))
        if best is None or breakdown.e_total < best.e_total:
            best_scheme, best = scheme, breakdown

    if best is None:
        raise FrameOverrunError(f"No {family} constellation up to M={m_max} fits the frame")

    if best_scheme.m == scan[0][0]:
        regime = "lower_bound"
    elif best_scheme.m == scan[-1][0]:
        regime = "m_max"
    else:
        regime = "interior"

    return OptimizationResult(
        scheme=best_scheme,
        e_total=best.e_total,
        breakdown=best,
        m_max=m_max,
        regime=regime,
        scan=tuple(scan),
    )


def intersection_lhs(m: float) -> float:
    """M - 1 - sqrt(M) + 1/sqrt(M), the constellation side of the balance equation."""
    root = math.sqrt(m)
    return m - 1.0 - root + 1.0 / root


def _mqam_alpha(m: float, vartheta: float) -> float:
    root = math.sqrt(m)
    return 3.0 * (root - 1.0) / ((root + 1.0) * vartheta) - 1.0


def mqam_intersection_m(
    link: LinkBudget,
    radio: RadioParameters,
    p_s_target: float,
    timing: FrameTiming,
    fading: FadingModel = Rayleigh(),
    m_max: Optional[int] = None,
) -> IntersectionEstimate:
    """Constellation size where MQAM's RF and circuit terms balance.

    Solves M - 1 - sqrt(M) + 1/sqrt(M) = phi / (1 + alpha(M)) with
    phi = ((P_c - P_Amp)/(2B)) * (3 P_s Omega / (4 L_d N0)). The left side
    increases and the right side decreases in M, so the root is unique on
    (1, inf) and is found with brentq.
    """
    if m_max is None:
        m_max = max_constellation(timing)

    p_ct, p_cr = Mqam(4).circuit_powers(radio)
    p_circuit = radio.coherent_circuit_scale * (p_ct + p_cr)
    phi = (p_circuit / (2 * timing.bandwidth)) * (
        3 * p_s_target * fading.omega / (4 * path_loss_gain(link) * radio.n0)
    )

    if phi == 0:
        m_root = 1.0
    else:
        def balance(m):
            return intersection_lhs(m) - phi / (1.0 + _mqam_alpha(m, radio.vartheta))

        lo, hi = 1.0 + 1e-9, 4.0
        while balance(hi) < 0:
            hi *= 2.0
        m_root = optimize.brentq(balance, lo, hi, xtol=1e-12, rtol=1e-12)

    m_clipped = min(max(m_root, 4.0), float(m_max))
    interior = 4.0 < m_root < m_max
    logger.debug(
        f"MQAM balance at d={link.d:g} eta={link.eta:g}: phi={phi:.4g}, "
        f"root={m_root:.4g}, interior={interior}"
    )
    return IntersectionEstimate(m_root=m_root, m_clipped=m_clipped, interior=interior)


def select_modulation(
    d: float,
    eta: float,
    p_s_target: float,
    fading: FadingModel,
    timing: FrameTiming,
    radio: RadioParameters,
    margin_db: float = 40.0,
    l1_db: float = 30.0,
) -> SelectionResult:
    """Rank optimized NC-MFSK, optimized MQAM and differential OQPSK by frame energy.

    Ranking is by (e_total, label), so equal energies order deterministically.
    """
    link = LinkBudget(d=d, eta=eta, margin_db=margin_db, l1_db=l1_db)
    entries = []

    for family in (NcMfsk, Mqam):
        try:
            result = optimize_constellation(family, p_s_target, link, fading, timing, radio)
        except FrameOverrunError as e:
            logger.warning(f"{family.family} excluded at d={d:g}, eta={eta:g}: {e}")
            continue
        entries.append(RankedEntry(
            label=result.scheme.label,
            scheme=result.scheme,
            e_total=result.e_total,
            breakdown=result.breakdown,
            regime=result.regime,
        ))

    oqpsk = DiffOqpsk()
    try:
        breakdown = total_frame_energy(oqpsk, p_s_target, link, fading, timing, radio)
        entries.append(RankedEntry(oqpsk.label, oqpsk, breakdown.e_total, breakdown))
    except FrameOverrunError as e:
        logger.warning(f"DOQPSK excluded at d={d:g}, eta={eta:g}: {e}")

    if not entries:
        raise FrameOverrunError(f"No scheme fits the frame at d={d:g}, eta={eta:g}")

    ranking = tuple(sorted(entries, key=lambda entry: (entry.e_total, entry.label)))
    return SelectionResult(winner=ranking[0], ranking=ranking)


def compare_per_bit(
    carrier: Scenario,
    ook: Scenario,
    p_s_target: float,
    d_grid: Sequence[float],
    eta: float,
    fading: FadingModel = Rayleigh(),
    ook_scheme: Ook = Ook(),
) -> List[PerBitRow]:
    """Energy per information bit of optimized NC-MFSK against OOK over distance.

    Each scheme runs in its own scenario, since the two occupy very
    different bandwidths; E_b = E_N / N makes them comparable.
    """
    rows = []
    for d in d_grid:
        fs = optimize_constellation(
            NcMfsk, p_s_target, carrier.link(d, eta), fading, carrier.timing, carrier.radio
        )
        ook_energy = total_frame_energy(
            ook_scheme, p_s_target, ook.link(d, eta), fading, ook.timing, ook.radio
        )
        rows.append(PerBitRow(
            d=d,
            eta=eta,
            m_hat_fs=fs.m,
            eb_fs=fs.breakdown.per_bit(carrier.timing.n_bits),
            eb_ook=ook_energy.per_bit(ook.timing.n_bits),
        ))
    return rows

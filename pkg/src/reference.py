"""
Published reference values for the MQAM optimum, the winning scheme and
the Rician frame energies, plus the grids they were tabulated on.
"""

from src.frame import FrameTiming
from src.schemes import DiffOqpsk, RadioParameters

TABLE_D_GRID = (1.0, 10.0, 20.0, 40.0, 80.0, 100.0, 150.0, 200.0)
TABLE_ETA_GRID = (2.5, 3.0, 4.0, 5.0, 6.0)

# optimum MQAM constellation size, rows by distance, columns by TABLE_ETA_GRID
_OPTIMAL_MQAM_ROWS = {
    1.0: (64, 64, 64, 64, 64),
    10.0: (64, 64, 43, 10, 4),
    20.0: (64, 50, 8, 4, 4),
    40.0: (43, 13, 4, 4, 4),
    80.0: (14, 5, 4, 4, 4),
    100.0: (10, 4, 4, 4, 4),
    150.0: (6, 4, 4, 4, 4),
    200.0: (5, 4, 4, 4, 4),
}

OPTIMAL_MQAM_M = {
    (d, eta): m
    for d, row in _OPTIMAL_MQAM_ROWS.items()
    for eta, m in zip(TABLE_ETA_GRID, row)
}

_QAM_WINNER_CELLS = {(1.0, eta) for eta in TABLE_ETA_GRID} | {
    (10.0, 2.5), (10.0, 3.0), (20.0, 2.5),
}

WINNING_SCHEME = {
    cell: ("64QAM" if cell in _QAM_WINNER_CELLS else "NC-BFSK")
    for cell in OPTIMAL_MQAM_M
}

RICIAN_ENERGY_ETA = 3.5
RICIAN_ENERGY_D_GRID = (10.0, 100.0)
RICIAN_ENERGY_K_GRID_DB = (1.0, 10.0, 15.0)
RICIAN_ENERGY_M_GRID = (4, 16, 64)

# (d, K dB) -> {scheme label: joules}
_RICIAN_ENERGY_ROWS = {
    (10.0, 1.0): (1.1241, (0.0173, 0.0769, 0.6558), (0.5621, 0.2819, 0.1924)),
    (10.0, 10.0): (1.1241, (0.0171, 0.0765, 0.6545), (0.5620, 0.2810, 0.1874)),
    (10.0, 15.0): (1.1241, (0.0171, 0.0765, 0.6545), (0.5620, 0.2810, 0.1874)),
    (100.0, 1.0): (1.2236, (0.5835, 1.4920, 4.6199), (0.8873, 3.2049, 16.1010)),
    (100.0, 10.0): (1.1445, (0.0194, 0.0785, 0.6570), (0.5652, 0.2989, 0.2615)),
    (100.0, 15.0): (1.1310, (0.0175, 0.0767, 0.6547), (0.5627, 0.2843, 0.2002)),
}


def _energy_labels(oqpsk, fsk, qam):
    labels = {"DOQPSK": oqpsk}
    for m, fsk_value, qam_value in zip(RICIAN_ENERGY_M_GRID, fsk, qam):
        labels[f"NC-{m}FSK"] = fsk_value
        labels[f"{m}QAM"] = qam_value
    return labels


RICIAN_FRAME_ENERGY = {
    cell: _energy_labels(*values) for cell, values in _RICIAN_ENERGY_ROWS.items()
}

# DOQPSK frame energy at d = 10 m, where the circuit term dominates
CALIBRATION_OQPSK_ENERGY = 1.1241


def calibrated_circuit_scale(
    radio: RadioParameters,
    timing: FrameTiming,
    target_energy: float = CALIBRATION_OQPSK_ENERGY,
) -> float:
    """Multiplier on coherent-scheme circuit energy matching the tabulated DOQPSK energy.

    The block powers alone give (P_ct + P_cr) * N/(2B) / chi_e, about 5.3 mJ
    with the carrier defaults, while the tabulated coherent energies imply
    roughly 1.12 J; the ratio (about 211) is returned.
    """
    p_ct, p_cr = DiffOqpsk().circuit_powers(radio)
    circuit = (p_ct + p_cr) * timing.n_bits / (2 * timing.bandwidth) / radio.chi_e
    if circuit <= 0:
        raise ValueError("Coherent circuit energy is zero; nothing to calibrate")
    return target_energy / circuit

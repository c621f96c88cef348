"""Quantum spatial search on rings with power-law couplings.

Exact search dynamics (peak fidelity, peak time, hopping rate, dephasing
ensembles) next to the large-n spectral predictions they are checked against.
"""

from .analytics import asymptotic_report, s_q, s_q_bar, nu_bar, f_inf_limit
from .dynamics import NoiseSpec, SearchProblem, find_peak, gamma_star, noisy_ensemble
from .spectrum import ChainSpec, spectrum, spectral_gap_exact, gap_asymptotic

__version__ = "0.1.0"

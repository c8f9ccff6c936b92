"""Simulator and verification library for quantum spread-spectrum CDMA."""

from .channel import BroadcastMatrix, balanced_m_user, balanced_two_user, broadcast_map
from .chipgrid import ChipGrid, RectWavepacket, chip_wavepacket, decomposition_weights
from .codes import SpreadingCode, chip_product, correlation, generate_random_code
from .errors import CapacityError, ConfigError, InvariantError
from .filters import (
    CoefficientSeries,
    FilterPair,
    coded_coefficients,
    design_grid_complementary,
    design_windowed,
    correlation_identity_check,
    plain_coefficients,
)

__all__ = [
    "BroadcastMatrix", "balanced_m_user", "balanced_two_user", "broadcast_map",
    "ChipGrid", "RectWavepacket", "chip_wavepacket", "decomposition_weights",
    "SpreadingCode", "chip_product", "correlation", "generate_random_code",
    "CapacityError", "ConfigError", "InvariantError",
    "CoefficientSeries", "FilterPair", "coded_coefficients", "design_grid_complementary",
    "design_windowed", "correlation_identity_check", "plain_coefficients",
]

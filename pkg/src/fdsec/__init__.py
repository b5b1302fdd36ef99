"""Robust secure resource allocation for full-duplex multiuser MIMO.

A full-duplex base station serves downlink and uplink users on the same
band while injecting artificial noise to defend against multi-antenna
eavesdroppers.  Beamformers, artificial-noise covariance, and uplink
powers are designed jointly by semidefinite relaxation under worst-case
(norm-bounded) channel uncertainty, with a weighted min-max scalarization
trading downlink against uplink transmit power.
"""

__version__ = "0.1.0"

from .scenario import SystemConfig, ChannelRealization, generate_drop
from .engine import solve_problem, FEAS_TOL, GAP_TOL
from .phy import AllocationPolicy, secrecy_rates, zf_receivers
from .sweep import ParetoPoint, sweep, tradeoff_point, frontier_violations
from .baseline import zf_directions, solve_baseline, baseline_sweep, baseline_point
from .oracle import adversarial_check, restricted_grid_bound
from .harness import RunRecord, run_experiment, emit_csv, read_csv

__all__ = [
    "SystemConfig", "ChannelRealization", "generate_drop",
    "solve_problem", "FEAS_TOL", "GAP_TOL",
    "AllocationPolicy", "secrecy_rates", "zf_receivers",
    "ParetoPoint", "sweep", "tradeoff_point", "frontier_violations",
    "zf_directions", "solve_baseline", "baseline_sweep", "baseline_point",
    "adversarial_check", "restricted_grid_bound",
    "RunRecord", "run_experiment", "emit_csv", "read_csv",
]

"""FDA + RIS integrated sensing and communication simulator and optimizer."""

from .ao import (FpAuxiliaries, ScnrInfeasible, SolveResult, SolverOptions,
                 SolverTrace, solve, solve_radar_centric)
from .channels import (CascadedChannels, ChannelSet, FrequencyOffsets,
                       build_channel_set, cascade, load_channel_set,
                       save_channel_set, with_offsets)
from .experiments import SweepSpec, SweepResult, run_scheme, run_sweep
from .metrics import IsacDesign, scnr, sum_rate, user_sinr
from .numerics import (IllConditioned, Infeasible, Qcqp1Problem,
                       cos_quadratic_majorizer, generalized_max_eigvec,
                       min_quadratic_on_constrained_interval, solve_qcqp1)
from .scenario import (C_LIGHT, Geometry, LinkGeometry, ScenarioConfig,
                       dbm_to_watt, db_to_linear, linear_to_db, load_config,
                       path_loss, sample_scenario)
from .sust import (SustResult, SustScenario, analyze, closed_form_scnr_fda,
                   closed_form_scnr_pa, dirichlet_kernel_sq, optimal_increment,
                   oracle_scnr, random_sust_scenario, scnr_increment_max,
                   sust_from_channels)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

"""Energy-efficient power allocation equilibria for two-tier networks.

A macro cell (leader) and several small cells (followers) share K
orthogonal carriers and independently maximize bits-per-joule.  The
package solves the hierarchical equilibrium in closed form when small-cell
interference is negligible (:func:`solve_sparse`) and by per-carrier
candidate search when it is not (:func:`solve_dense`), provides Nash and
best-channel baselines, certifies every equilibrium with brute-force
deviation oracles, and drives seeded Monte-Carlo sweeps from the
``hetnet-ee`` CLI.
"""

from .baselines import IterationReport, solve_best_channel, solve_nash
from .dense import CarrierCandidates, follower_best_response, respond_all, solve_dense
from .efficiency import (
    EfficiencyModel,
    ExistenceReport,
    NoRootError,
    check_existence,
    optimal_sinr,
    optimal_sinr_with_feedback,
)
from .harness import (
    ScenarioConfig,
    SummaryRow,
    SweepRecord,
    carrier_trend,
    paired_gap,
    run_sweep,
    summarize,
    write_records,
)
from .model import (
    CarrierRank,
    EquilibriumResult,
    NetworkInstance,
    all_utilities,
    empty_allocation,
    follower_sinr,
    leader_sinr_dense,
    leader_sinr_sparse,
    make_result,
    rank_carriers,
    sample_instance,
    sinr_row,
    utility,
)
from .oracle import (
    DeviationReport,
    brute_force_stackelberg,
    verify_follower,
    verify_leader_stackelberg,
    verify_nash,
)
from .sparse import solve_sparse

__version__ = "0.1.0"

__all__ = [
    "CarrierCandidates",
    "CarrierRank",
    "DeviationReport",
    "EfficiencyModel",
    "EquilibriumResult",
    "ExistenceReport",
    "IterationReport",
    "NetworkInstance",
    "NoRootError",
    "ScenarioConfig",
    "SummaryRow",
    "SweepRecord",
    "all_utilities",
    "brute_force_stackelberg",
    "carrier_trend",
    "check_existence",
    "empty_allocation",
    "follower_best_response",
    "follower_sinr",
    "leader_sinr_dense",
    "leader_sinr_sparse",
    "make_result",
    "optimal_sinr",
    "optimal_sinr_with_feedback",
    "paired_gap",
    "rank_carriers",
    "respond_all",
    "run_sweep",
    "sample_instance",
    "sinr_row",
    "solve_best_channel",
    "solve_dense",
    "solve_nash",
    "solve_sparse",
    "summarize",
    "utility",
    "verify_follower",
    "verify_leader_stackelberg",
    "verify_nash",
    "write_records",
]

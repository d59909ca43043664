"""Volume-efficient online interval prediction over [0, 1].

An online player posts a closed interval each day before a value in
[0, 1] is revealed. The reset-and-dilate predictor here tracks the
minimum-volume interval that stays within a miss-rate schedule, keeping
every played volume within a mu factor of the hindsight optimum
max(Opt(alpha), minwidth) while missing at most an alpha-ish fraction
of days. Companions: exact hindsight oracles, seeded sequence
constructions (adversarial ladders, an atom-plus-tail distribution,
exchangeable permutations), post-hoc audits, and a reproducible CLI.
"""

from .analysis import (
    PhaseAuditReport,
    ScheduleMismatchError,
    UcReport,
    VolumeCapReport,
    always_feasible_misses,
    mistake_bound,
    mistake_bound_check,
    phase_audit,
    reset_count_bound,
    uc_max_deviation,
    uc_profile,
    volume_cap_check,
)
from .core import (
    InfeasibleWindowError,
    Interval,
    RankedMultiset,
    min_window_interval,
    min_window_sorted,
)
from .generators import (
    CustomSpec,
    DkIidSpec,
    DkParams,
    DkThenConstantSpec,
    PermutationSpec,
    PhasedSpec,
    SequenceSpec,
    UnsupportedVariantError,
    derive_seed,
    dk_cdf,
    dk_inverse_cdf,
    dk_vstar,
    gen_dk_iid,
    gen_dk_then_constant,
    gen_permutation,
    gen_phased,
    generate,
    read_sequence,
    symmetrize,
    write_sequence,
)
from .oracle import Metrics, allowed_misses, brute_force_opt, compute_metrics, opt_volume
from .predictor import (
    ArbitraryOrderSchedule,
    ExchangeableSchedule,
    OnlinePredictor,
    PredictorConfig,
    ProtocolError,
    RunTrace,
    Schedule,
    TableSchedule,
    halfway_conformal_set,
    run,
)

__all__ = [
    "ArbitraryOrderSchedule",
    "CustomSpec",
    "DkIidSpec",
    "DkParams",
    "DkThenConstantSpec",
    "ExchangeableSchedule",
    "InfeasibleWindowError",
    "Interval",
    "Metrics",
    "OnlinePredictor",
    "PermutationSpec",
    "PhaseAuditReport",
    "PhasedSpec",
    "PredictorConfig",
    "ProtocolError",
    "RankedMultiset",
    "RunTrace",
    "Schedule",
    "ScheduleMismatchError",
    "SequenceSpec",
    "TableSchedule",
    "UcReport",
    "UnsupportedVariantError",
    "VolumeCapReport",
    "allowed_misses",
    "always_feasible_misses",
    "brute_force_opt",
    "compute_metrics",
    "derive_seed",
    "dk_cdf",
    "dk_inverse_cdf",
    "dk_vstar",
    "gen_dk_iid",
    "gen_dk_then_constant",
    "gen_permutation",
    "gen_phased",
    "generate",
    "halfway_conformal_set",
    "min_window_interval",
    "min_window_sorted",
    "mistake_bound",
    "mistake_bound_check",
    "opt_volume",
    "phase_audit",
    "read_sequence",
    "reset_count_bound",
    "run",
    "symmetrize",
    "uc_max_deviation",
    "uc_profile",
    "volume_cap_check",
    "write_sequence",
]

__version__ = "0.1.0"

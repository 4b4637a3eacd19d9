"""Unilateral enforcement of payoff constraints in discounted repeated games.

The package decides whether a payoff constraint (an objective matrix over
joint actions, required to average to zero) can be enforced by one player
regardless of the opponent, computes the minimum discount factor at which
this is possible, synthesizes the enforcing strategy, and audits the
result by exact and Monte Carlo simulation.
"""

from .errors import (
    AutocratError,
    InputError,
    NotEnforceableError,
    SolverFailure,
    SynthesisError,
)
from .game import (
    ActionSet,
    LinearRelationSpec,
    MixedAction,
    ObjectiveMatrix,
    StageGame,
    build_linear_phi,
    decompose_additive,
    eval_mixed,
    mix,
    row_envelope,
)
from .enforce import (
    EnforceabilityReport,
    SeparationWitness,
    analyze,
    enforce_interval,
    find_trivial,
    is_enforceable,
    lambda_min,
    lambda_min_pure,
    separation_witnesses,
)
from .synth import (
    ReactiveStrategy,
    TwoPointStrategy,
    combine_convex,
    reconstruct_potential,
    respond,
    synthesize_reactive,
    synthesize_two_point,
    synthesize_undiscounted,
    verify_correction_condition,
)
from .sim import (
    Adversarial,
    Exogenous,
    MemoryOne,
    PayoffPair,
    Trace,
    UniformRandom,
    adversarial_step,
    cesaro_check,
    exact_discounted_sum,
    monte_carlo_payoffs,
    payoff_region,
    sample_memory_one,
)
from .games import (
    HeatmapRecord,
    equalizer_interval,
    heatmap,
    make_game,
    pd_lambda_min_closed_form,
    pd_trivial_params,
    symmetric_dichotomy,
    zero_sum_enforceable,
)

__version__ = "0.1.0"

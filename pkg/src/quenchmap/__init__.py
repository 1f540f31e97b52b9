"""Exact free/trapped quantum maps, reference propagators and a benchmark CLI."""
from .core import (
    EPS_SINGULAR,
    FreeCoords,
    Grid,
    GridMismatchError,
    GridSizeError,
    GridState,
    InvalidBoundsError,
    MapParams,
    PhysicalParams,
    QuenchMapError,
    ResourceCapError,
    SingularTimeError,
    SolutionEvaluator,
    TrapCoords,
    TrapSpec,
    make_grid,
    sample,
    sample_many,
    shift_time,
)
from .maps import (
    compose_trapped_to_trapped,
    concat_coords,
    free_coords_from_trap,
    map_free_to_trapped,
    map_trapped_to_free,
    map_trapped_to_trapped,
    phase_factor_f,
    trap_coords_from_free,
)
from .states import (
    GaussianSpec,
    SuperpositionSpec,
    fig1_spec,
    gaussian_packet,
    hermite_functions,
    oscillator_eigenstate,
    superposition,
)
from .propagators import (
    SplitStepConfig,
    eigenbasis,
    evolve_free_spectral,
    evolve_projected,
    evolve_split_step,
    project_onto_eigenbasis,
)
from .verify import (
    LITERAL_SIGNS,
    STANDARD_SIGNS,
    l2_distance,
    observables,
    resolve_sign_convention,
    residual_free,
    residual_trapped,
)
from .config import ConfigError, Scenario, load_fixture, parse_config, parse_text
from .runner import SolverSettings, evolve
from .bench import BenchReport, run_bench

__version__ = "0.1.0"

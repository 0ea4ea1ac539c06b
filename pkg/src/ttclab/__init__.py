"""ttclab: collision stimuli, mask-sweep TTC simulation, and human-alignment metrics."""

from .errors import (
    EmptyIntersection,
    EmptyMask,
    GenerationExhausted,
    MissingCell,
    NoCollision,
    NoCollisionWithinHorizon,
    PairConstructionFailed,
    SchemaError,
    TooFewObjects,
    TooFewPoints,
    TtclabError,
    UnknownVideo,
)
from .geometry import Polygon, first_contact_time
from .masks import (
    BinaryMask,
    CoarseningOp,
    ProbabilityMap,
    coarsen,
    connected_components,
    convex_hull_mask,
    mask_from_probability,
    masks_equal,
    overlap,
    rasterize,
    translate,
    two_largest,
)
from .metrics import (
    AlignmentReport,
    ConditionTable,
    HumanResponseTable,
    SweepResult,
    alignment_error,
    concavity_effect,
    condition_average,
    detect_u_shape,
    load_human_csv,
    per_video_mean,
    run_sweep,
)
from .rng import SplitMix64, derive_seed
from .stimulus import (
    GeneratorConfig,
    Kinematics,
    Scenario,
    generate_polygon,
    ground_truth_ttc,
    make_matched_pair,
    render_dataset,
)
from .ttc import TtcQuery, TtcResult, scenario_ttc, simulate_ttc

__version__ = "0.1.0"

"""densitylab: a buoyancy serious game as a deterministic, headless engine.

Physics statics and dynamics, the staged game session, the 13-item
pre/post questionnaire, session telemetry, and the analytics over it.
"""

from .assessment import (
    AnswerProfile,
    AssessmentResult,
    Question,
    QuestionBank,
    Response,
    TestInstance,
    TestKind,
    build_test,
    cluster_profiles,
    cohort_stats,
    grade,
    pre_post_delta,
    profile_similarity,
)
from .engine import (
    BalanceReading,
    CubeCatalog,
    GameContent,
    GameEngine,
    GameSession,
    Prediction,
    PredictionResult,
)
from .physics import (
    BodyState,
    Cube,
    DynamicsParams,
    FlotationOutcome,
    Liquid,
    ReleaseResult,
    classify_flotation,
    density,
    equilibrium_submerged_fraction,
    relative_density,
    simulate_release,
    step_dynamics,
)
from .telemetry import Event, EventKind, EventLog, StageId, stage_durations, timing_report

__version__ = "0.1.0"

"""Staged game sessions: catalogs per condition, prediction scoring, the
Roberval balance, the pre/post questionnaire flow, and event logging.

A :class:`GameEngine` holds the immutable content (cubes, liquids, item
bank, strings); a :class:`GameSession` is the mutable per-player state.
All randomness comes from the session seed (it only feeds the post-test
reordering), so a session is a pure function of its inputs and any event
log replays to an identical session.

Timestamps are supplied by the caller as milliseconds since session start;
the engine never reads a clock.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from . import assessment, config, physics
from .assessment import AssessmentResult, QuestionBank, Response, TestInstance, TestKind
from .physics import (
    BodyState,
    Cube,
    DynamicsParams,
    FlotationOutcome,
    Liquid,
    ReleaseResult,
    classify_flotation,
    simulate_release,
)
from .telemetry import STAGE_ORDER, Event, EventKind, EventLog, StageId

# Looser than the physics-test tolerance so catalog densities rounded to a
# few decimals still land on the intended outcome.
GAMEPLAY_EPSILON = 1e-3

SCORED_STAGES = (StageId.C1, StageId.C2, StageId.C3)
DROP_STAGES = (StageId.C1, StageId.C2, StageId.C3, StageId.BONUS)
BALANCE_STAGES = (StageId.TRAINING, StageId.C1)

CORRECT_POINTS = 2
WRONG_POINTS = -1


class EngineError(Exception):
    """Base class for rejected session operations."""


class WrongStageError(EngineError):
    pass


class IncompleteStageError(EngineError):
    pass


class SessionFinalizedError(EngineError):
    pass


class DuplicateActionError(EngineError):
    pass


class UnknownEntityError(EngineError):
    pass


class Prediction(Enum):
    SINK = "sink"
    STAY_MIDDLE = "stay_middle"
    FLOAT = "float"


PREDICTION_FOR_OUTCOME = {
    FlotationOutcome.SINKS: Prediction.SINK,
    FlotationOutcome.SUSPENDS: Prediction.STAY_MIDDLE,
    FlotationOutcome.FLOATS: Prediction.FLOAT,
}


class BalanceReading(Enum):
    LEFT_HEAVIER = "left_heavier"
    BALANCED = "balanced"
    RIGHT_HEAVIER = "right_heavier"


@dataclass(frozen=True)
class CubeCatalog:
    stage: StageId
    cubes: tuple[Cube, ...]


@dataclass(frozen=True)
class PredictionResult:
    observed: FlotationOutcome
    score_delta: int
    new_score: int
    release: ReleaseResult


class GameContent:
    """Everything a session needs besides its own state."""

    def __init__(
        self,
        catalog: config.CatalogConfig,
        bank: QuestionBank,
        strings: dict[str, str],
        dynamics: DynamicsParams = DynamicsParams(),
        epsilon: float = GAMEPLAY_EPSILON,
    ):
        self.liquids = catalog.liquids
        self.stage_cubes = catalog.cubes
        self.bank = bank
        self.strings = strings
        self.dynamics = dynamics
        self.epsilon = epsilon
        self._validate()

    @classmethod
    def default(cls) -> "GameContent":
        return cls(
            catalog=config.default_catalog(),
            bank=config.default_question_bank(),
            strings=config.default_strings(),
        )

    def _validate(self) -> None:
        water = self.liquids["water"]
        oil = self.liquids["oil"]
        if oil.density >= water.density:
            raise config.ConfigError("oil must be less dense than water")
        # c3 needs at least one cube whose water and oil outcomes differ,
        # otherwise the two tanks teach nothing.
        discriminating = [
            cube
            for cube in self.stage_cubes[StageId.C1]
            if classify_flotation(cube, water, self.epsilon) != classify_flotation(cube, oil, self.epsilon)
        ]
        if not discriminating:
            raise config.ConfigError("c1 set has no cube that behaves differently in oil and water")
        for stage in STAGE_ORDER:
            if stage in self.stage_cubes:
                for cube in self.stage_cubes[stage]:
                    if cube.edge >= self.dynamics.tank_depth:
                        raise config.ConfigError(f"cube {cube.id} does not fit in the tank")

    def catalog_for(self, stage: StageId) -> tuple[CubeCatalog, list[Liquid]]:
        """Cubes and tanks for a play stage; test stages have no catalog."""
        if stage is StageId.TRAINING:
            return CubeCatalog(stage, tuple(self.stage_cubes[StageId.TRAINING])), [self.liquids["water"]]
        if stage is StageId.C1:
            return CubeCatalog(stage, tuple(self.stage_cubes[StageId.C1])), [self.liquids["water"]]
        if stage is StageId.C2:
            return CubeCatalog(stage, tuple(self.stage_cubes[StageId.C2])), [self.liquids["water"]]
        if stage is StageId.C3:
            return CubeCatalog(stage, tuple(self.stage_cubes[StageId.C1])), [
                self.liquids["water"],
                self.liquids["oil"],
            ]
        if stage is StageId.BONUS:
            return CubeCatalog(stage, tuple(self.stage_cubes[StageId.C1])), [
                self.liquids["water"],
                self.liquids["quicksilver"],
            ]
        raise WrongStageError(f"stage {stage.short} has no cube catalog")

    def instructions_for(self, stage: StageId) -> str:
        if not isinstance(stage, StageId):
            raise UnknownEntityError(f"unknown stage {stage!r}")
        key = f"instructions_{stage.value}"
        if key not in self.strings:
            raise UnknownEntityError(f"no instructions for stage {stage.short}")
        return self.strings[key]


@dataclass
class GameSession:
    session_id: str
    participant_id: str
    rng_seed: int
    stage: StageId = StageId.PRE_TEST
    score: int = 0
    finalized: bool = False
    clock_ms: int = 0
    stage_entered_at: dict[StageId, int] = field(default_factory=dict)
    tested: dict[StageId, set[tuple[str, str]]] = field(default_factory=dict)
    answers: dict[TestKind, dict[str, Response]] = field(default_factory=dict)
    log: EventLog = field(default_factory=EventLog)

    def to_dict(self) -> dict:
        """Canonical snapshot; equal snapshots mean equal sessions."""
        return {
            "session_id": self.session_id,
            "participant_id": self.participant_id,
            "rng_seed": self.rng_seed,
            "stage": self.stage.value,
            "score": self.score,
            "finalized": self.finalized,
            "clock_ms": self.clock_ms,
            "stage_entered_at": {stage.value: t for stage, t in self.stage_entered_at.items()},
            "tested": {
                stage.value: sorted(pairs) for stage, pairs in self.tested.items()
            },
            "answers": {
                kind.value: {
                    qid: [r.chosen_index, r.confidence] for qid, r in sorted(per_kind.items())
                }
                for kind, per_kind in self.answers.items()
            },
            "events": self.log.to_lines(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


class GameEngine:
    """Stateless operations over sessions; safe to share across sessions."""

    def __init__(self, content: GameContent | None = None):
        self.content = content if content is not None else GameContent.default()

    # -- session lifecycle -------------------------------------------------

    def new_session(self, participant_id: str, seed: int) -> GameSession:
        if seed < 0:
            raise EngineError("seed must be a non-negative integer")
        session = GameSession(
            session_id=f"{participant_id}-{seed:08x}",
            participant_id=participant_id,
            rng_seed=seed,
        )
        session.stage_entered_at[StageId.PRE_TEST] = 0
        self._append(
            session,
            EventKind.STAGE_ENTER,
            {"session_id": session.session_id, "participant_id": participant_id, "rng_seed": seed},
        )
        return session

    def advance_stage(self, session: GameSession, t_ms: int | None = None) -> GameSession:
        if session.finalized:
            raise SessionFinalizedError("session is finalized")
        self._touch(session, t_ms)
        unmet = self._unmet_conditions(session)
        if unmet:
            raise IncompleteStageError("; ".join(unmet))
        current = session.stage
        self._append(session, EventKind.STAGE_EXIT, {})
        if current is StageId.POST_TEST:
            session.finalized = True
            return session
        session.stage = STAGE_ORDER[STAGE_ORDER.index(current) + 1]
        session.stage_entered_at[session.stage] = session.clock_ms
        self._append(session, EventKind.STAGE_ENTER, {})
        return session

    def _unmet_conditions(self, session: GameSession) -> list[str]:
        stage = session.stage
        if stage in (StageId.PRE_TEST, StageId.POST_TEST):
            kind = TestKind.PRE if stage is StageId.PRE_TEST else TestKind.POST
            answered = session.answers.get(kind, {})
            return [f"item {qid} unanswered" for qid in self.content.bank.canonical_order if qid not in answered]
        if stage in (StageId.C1, StageId.C2, StageId.C3):
            catalog, tanks = self.content.catalog_for(stage)
            done = session.tested.get(stage, set())
            unmet = []
            for cube in catalog.cubes:
                for tank in tanks:
                    if (cube.id, tank.id) not in done:
                        if len(tanks) == 1:
                            unmet.append(f"cube {cube.id} untested")
                        else:
                            unmet.append(f"cube {cube.id} untested in {tank.id}")
            return unmet
        return []  # training and bonus have no completion condition

    # -- play operations ---------------------------------------------------

    def catalog_for(self, stage: StageId) -> tuple[CubeCatalog, list[Liquid]]:
        return self.content.catalog_for(stage)

    def instructions_for(self, stage: StageId) -> str:
        return self.content.instructions_for(stage)

    def submit_prediction(
        self,
        session: GameSession,
        cube_id: str,
        tank_id: str,
        prediction: Prediction | None,
        t_ms: int | None = None,
    ) -> PredictionResult:
        """Record a prediction, drop the cube, and score the trial.

        This is the only way to trigger a drop, so the outcome can never be
        observed before a prediction exists. In the bonus stage the
        prediction argument is ignored and the trial is unscored.
        """
        if session.finalized:
            raise SessionFinalizedError("session is finalized")
        if session.stage not in DROP_STAGES:
            raise WrongStageError(f"no drop task in stage {session.stage.short}")
        self._touch(session, t_ms)
        catalog, tanks = self.content.catalog_for(session.stage)
        cube = self._cube_in(catalog, cube_id)
        tank = self._tank_in(tanks, tank_id)
        done = session.tested.setdefault(session.stage, set())
        if (cube_id, tank_id) in done:
            raise DuplicateActionError(f"cube {cube_id} already tested in {tank_id}")
        scored = session.stage in SCORED_STAGES
        if scored and prediction is None:
            raise EngineError("a prediction is required before the drop")
        recorded = prediction.value if scored and prediction is not None else None

        observed = classify_flotation(cube, tank, self.content.epsilon)
        if scored:
            delta = CORRECT_POINTS if PREDICTION_FOR_OUTCOME[observed] is prediction else WRONG_POINTS
        else:
            delta = 0
        release = simulate_release(cube, tank, self._release_state(cube), self.content.dynamics)

        done.add((cube_id, tank_id))
        session.score += delta
        self._append(
            session,
            EventKind.PREDICTION_SUBMITTED,
            {"cube_id": cube_id, "tank_id": tank_id, "prediction": recorded},
        )
        self._append(
            session,
            EventKind.OUTCOME_OBSERVED,
            {
                "cube_id": cube_id,
                "tank_id": tank_id,
                "observed": observed.value,
                "score_delta": delta,
                "score": session.score,
                "surface_breach": release.surface_breach,
            },
        )
        return PredictionResult(observed=observed, score_delta=delta, new_score=session.score, release=release)

    def _release_state(self, cube: Cube) -> BodyState:
        """Drops start fully submerged at mid-tank, so neutral cubes visibly
        stay in the middle and dense liquids can eject light cubes."""
        depth = self.content.dynamics.tank_depth
        return BodyState(submersion=min(max(cube.edge, depth / 2.0), depth), velocity=0.0)

    def weigh(self, session: GameSession, left_id: str, right_id: str, t_ms: int | None = None) -> BalanceReading:
        if session.finalized:
            raise SessionFinalizedError("session is finalized")
        if session.stage not in BALANCE_STAGES:
            raise WrongStageError(f"balance not available in stage {session.stage.short}")
        self._touch(session, t_ms)
        catalog, _ = self.content.catalog_for(session.stage)
        left = self._cube_in(catalog, left_id)
        right = self._cube_in(catalog, right_id)
        if left.mass > right.mass:
            reading = BalanceReading.LEFT_HEAVIER
        elif left.mass < right.mass:
            reading = BalanceReading.RIGHT_HEAVIER
        else:
            reading = BalanceReading.BALANCED
        self._append(
            session,
            EventKind.BALANCE_USED,
            {"left": left_id, "right": right_id, "reading": reading.value},
        )
        return reading

    def answer_item(
        self,
        session: GameSession,
        item_id: str,
        choice: int,
        confidence: int,
        t_ms: int | None = None,
    ) -> bool:
        """Record one questionnaire answer; returns whether it was correct."""
        if session.finalized:
            raise SessionFinalizedError("session is finalized")
        if session.stage not in (StageId.PRE_TEST, StageId.POST_TEST):
            raise WrongStageError(f"no questionnaire in stage {session.stage.short}")
        self._touch(session, t_ms)
        question = self.content.bank.by_id.get(item_id)
        if question is None:
            raise UnknownEntityError(f"unknown item {item_id}")
        if not 0 <= choice < len(question.options):
            raise EngineError(f"item {item_id}: choice {choice} out of range")
        kind = TestKind.PRE if session.stage is StageId.PRE_TEST else TestKind.POST
        per_kind = session.answers.setdefault(kind, {})
        if item_id in per_kind:
            raise DuplicateActionError(f"item {item_id} already answered")
        response = Response(question_id=item_id, chosen_index=choice, confidence=confidence)
        per_kind[item_id] = response
        correct = choice == question.correct_index
        self._append(
            session,
            EventKind.ITEM_ANSWERED,
            {
                "test": kind.value,
                "item_id": item_id,
                "choice": choice,
                "confidence": confidence,
                "correct": correct,
            },
        )
        return correct

    def test_instance_for(self, session: GameSession, kind: TestKind) -> TestInstance:
        return assessment.build_test(self.content.bank, kind, session.rng_seed)

    def grade_session(self, session: GameSession, kind: TestKind) -> AssessmentResult:
        responses = list(session.answers.get(kind, {}).values())
        return assessment.grade(responses, self.content.bank)

    # -- replay ------------------------------------------------------------

    def replay(self, log: EventLog) -> GameSession:
        """Re-run a logged session from scratch; the result must match it."""
        events = list(log)
        if not events or events[0].kind is not EventKind.STAGE_ENTER:
            raise EngineError("log does not start with a session opening event")
        opening = events[0].payload
        session = self.new_session(opening["participant_id"], opening["rng_seed"])
        for event in events[1:]:
            if event.kind is EventKind.STAGE_EXIT:
                self.advance_stage(session, t_ms=event.t_ms)
            elif event.kind is EventKind.PREDICTION_SUBMITTED:
                payload = event.payload
                prediction = Prediction(payload["prediction"]) if payload["prediction"] else None
                self.submit_prediction(
                    session, payload["cube_id"], payload["tank_id"], prediction, t_ms=event.t_ms
                )
            elif event.kind is EventKind.BALANCE_USED:
                self.weigh(session, event.payload["left"], event.payload["right"], t_ms=event.t_ms)
            elif event.kind is EventKind.ITEM_ANSWERED:
                payload = event.payload
                self.answer_item(
                    session, payload["item_id"], payload["choice"], payload["confidence"], t_ms=event.t_ms
                )
            # STAGE_ENTER and OUTCOME_OBSERVED are regenerated by the calls above.
        return session

    # -- internals ----------------------------------------------------------

    def _touch(self, session: GameSession, t_ms: int | None) -> None:
        if t_ms is None:
            return
        if t_ms < session.clock_ms:
            raise EngineError(f"time went backwards: {t_ms} < {session.clock_ms}")
        session.clock_ms = int(t_ms)

    def _append(self, session: GameSession, kind: EventKind, payload: dict) -> None:
        session.log.append(
            Event(
                seq=session.log.next_seq(),
                t_ms=session.clock_ms,
                stage=session.stage,
                kind=kind,
                payload=payload,
            )
        )

    def _cube_in(self, catalog: CubeCatalog, cube_id: str) -> Cube:
        for cube in catalog.cubes:
            if cube.id == cube_id:
                return cube
        raise UnknownEntityError(f"cube {cube_id} is not in the {catalog.stage.short} catalog")

    def _tank_in(self, tanks: list[Liquid], tank_id: str) -> Liquid:
        for tank in tanks:
            if tank.id == tank_id:
                return tank
        raise UnknownEntityError(f"tank {tank_id} is not present in this stage")


def score_from_log(log: EventLog) -> int:
    """Recompute the score from outcome events alone (replay check)."""
    score = 0
    for event in log:
        if event.kind is EventKind.OUTCOME_OBSERVED and event.stage in SCORED_STAGES:
            score += event.payload["score_delta"]
    return score

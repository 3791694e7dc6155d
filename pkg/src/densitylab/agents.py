"""Scripted agents that play full sessions headlessly.

Agents stand in for human participants: they answer both questionnaires,
poke the balance, and run every drop trial, advancing stage by stage. Their
logs use the same format as live sessions, so the analytics cannot tell
them apart. Everything is driven by explicit seeds; the same seed always
produces the same log bytes.
"""

from __future__ import annotations

import random
from pathlib import Path

from . import config
from .assessment import Question, TestKind
from .engine import PREDICTION_FOR_OUTCOME, GameEngine, GameSession, Prediction
from .physics import Cube, FlotationOutcome, Liquid, classify_flotation
from .telemetry import StageId

POLICY_NAMES = ("oracle", "contrarian", "random", "scripted")

# A wrong answer for each outcome, chosen fixed so runs are reproducible.
_WRONG_PREDICTION = {
    FlotationOutcome.SINKS: Prediction.FLOAT,
    FlotationOutcome.SUSPENDS: Prediction.SINK,
    FlotationOutcome.FLOATS: Prediction.STAY_MIDDLE,
}


class AgentError(Exception):
    pass


class OraclePolicy:
    """Predicts the true outcome and answers every question correctly."""

    name = "oracle"

    def predict(self, cube: Cube, tank: Liquid, truth: FlotationOutcome) -> Prediction:
        return PREDICTION_FOR_OUTCOME[truth]

    def answer(self, question: Question, kind: TestKind) -> tuple[int, int]:
        return question.correct_index, 4


class ContrarianPolicy:
    """Always predicts and answers wrong."""

    name = "contrarian"

    def predict(self, cube: Cube, tank: Liquid, truth: FlotationOutcome) -> Prediction:
        return _WRONG_PREDICTION[truth]

    def answer(self, question: Question, kind: TestKind) -> tuple[int, int]:
        return (question.correct_index + 1) % len(question.options), 2


class RandomPolicy:
    """Uniform seeded choices for predictions and answers."""

    name = "random"

    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def predict(self, cube: Cube, tank: Liquid, truth: FlotationOutcome) -> Prediction:
        return self.rng.choice(list(Prediction))

    def answer(self, question: Question, kind: TestKind) -> tuple[int, int]:
        return self.rng.randrange(len(question.options)), self.rng.randint(1, 4)


class ScriptedPolicy:
    """Replays predictions and answers from a script file.

    Script lines use the shared record format:

        prediction cube_id=A tank_id=water prediction=float
        answer item_id=q01 choice=1 confidence=3

    Every trial and item the session will encounter must be covered.
    """

    name = "scripted"

    def __init__(self, predictions: dict[tuple[str, str], Prediction], answers: dict[str, tuple[int, int]]):
        self.predictions = predictions
        self.answers = answers

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedPolicy":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise config.ConfigError(f"cannot read script {path}: {exc}") from exc
        predictions: dict[tuple[str, str], Prediction] = {}
        answers: dict[str, tuple[int, int]] = {}
        for lineno, kind, fields in config._parse_records(text, str(path)):
            if kind == "prediction":
                try:
                    prediction = Prediction(fields["prediction"])
                    predictions[(fields["cube_id"], fields["tank_id"])] = prediction
                except (KeyError, ValueError) as exc:
                    raise config.ConfigError(f"{path}:{lineno}: bad prediction record: {exc}") from exc
            elif kind == "answer":
                try:
                    answers[fields["item_id"]] = (int(fields["choice"]), int(fields["confidence"]))
                except (KeyError, ValueError) as exc:
                    raise config.ConfigError(f"{path}:{lineno}: bad answer record: {exc}") from exc
            else:
                raise config.ConfigError(f"{path}:{lineno}: unknown record kind {kind!r}")
        return cls(predictions, answers)

    def predict(self, cube: Cube, tank: Liquid, truth: FlotationOutcome) -> Prediction:
        key = (cube.id, tank.id)
        if key not in self.predictions:
            raise AgentError(f"script has no prediction for cube {cube.id} in {tank.id}")
        return self.predictions[key]

    def answer(self, question: Question, kind: TestKind) -> tuple[int, int]:
        if question.id not in self.answers:
            raise AgentError(f"script has no answer for item {question.id}")
        return self.answers[question.id]


def make_policy(name: str, seed: int, script: str | Path | None = None):
    if name == "oracle":
        return OraclePolicy()
    if name == "contrarian":
        return ContrarianPolicy()
    if name == "random":
        return RandomPolicy(seed)
    if name == "scripted":
        if script is None:
            raise AgentError("scripted policy needs a script file")
        return ScriptedPolicy.from_file(script)
    raise AgentError(f"unknown policy {name!r} (choose from {', '.join(POLICY_NAMES)})")


def play_session(engine: GameEngine, participant_id: str, seed: int, policy) -> GameSession:
    """Play a full session under a policy, pre-test through post-test.

    Dwell times between actions are drawn from a seeded generator so the
    logs carry plausible, reproducible stage durations.
    """
    dwell_rng = random.Random(f"dwell-{seed}")
    session = engine.new_session(participant_id, seed)
    clock = 0

    def tick() -> int:
        nonlocal clock
        clock += dwell_rng.randint(800, 4000)
        return clock

    bank = engine.content.bank
    while not session.finalized:
        stage = session.stage
        if stage in (StageId.PRE_TEST, StageId.POST_TEST):
            kind = TestKind.PRE if stage is StageId.PRE_TEST else TestKind.POST
            instance = engine.test_instance_for(session, kind)
            for item_id in instance.ordering:
                choice, confidence = policy.answer(bank.by_id[item_id], kind)
                engine.answer_item(session, item_id, choice, confidence, t_ms=tick())
        elif stage is StageId.TRAINING:
            catalog, _ = engine.catalog_for(stage)
            if len(catalog.cubes) >= 2:
                engine.weigh(session, catalog.cubes[0].id, catalog.cubes[1].id, t_ms=tick())
        else:
            catalog, tanks = engine.catalog_for(stage)
            if stage is StageId.C1 and len(catalog.cubes) >= 2:
                engine.weigh(session, catalog.cubes[0].id, catalog.cubes[-1].id, t_ms=tick())
            scored = stage is not StageId.BONUS  # bonus takes no predictions
            for cube in catalog.cubes:
                for tank in tanks:
                    prediction = None
                    if scored:
                        truth = classify_flotation(cube, tank, engine.content.epsilon)
                        prediction = policy.predict(cube, tank, truth)
                    engine.submit_prediction(session, cube.id, tank.id, prediction, t_ms=tick())
        engine.advance_stage(session, t_ms=tick())
    return session


def scored_trial_count(engine: GameEngine) -> int:
    """Number of scored (cube, tank) trials a full session contains."""
    total = 0
    for stage in (StageId.C1, StageId.C2, StageId.C3):
        catalog, tanks = engine.catalog_for(stage)
        total += len(catalog.cubes) * len(tanks)
    return total

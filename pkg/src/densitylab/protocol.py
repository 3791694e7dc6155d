"""Newline-delimited command/event protocol spoken by UIs and harnesses.

One JSON object per line. Commands carry a ``cmd`` field plus the
command's own fields; every response line carries ``ok`` and an ``event``
name, echoing the operation's results. The five commands:

    {"cmd": "new_session", "participant_id": "...", "seed": 42}
    {"cmd": "advance_stage"}
    {"cmd": "submit_prediction", "cube_id": "A", "tank_id": "water", "prediction": "float"}
    {"cmd": "weigh", "left": "A", "right": "D"}
    {"cmd": "answer_item", "item_id": "q01", "choice": 1, "confidence": 3}

Prediction results echo ``observed``, ``score_delta`` and the ``trajectory``
as an array of ``{t, submersion, velocity}`` points for the UI to animate.
Timestamps come from an injectable clock so transports can use wall time
while tests stay deterministic.
"""

from __future__ import annotations

import json
import time
from typing import Callable

from .assessment import TestKind
from .engine import EngineError, GameEngine, GameSession, Prediction
from .telemetry import StageId

TEST_STAGES = (StageId.PRE_TEST, StageId.POST_TEST)


def _monotonic_ms_clock() -> Callable[[], int]:
    start = time.monotonic()
    return lambda: int((time.monotonic() - start) * 1000)


class ProtocolSession:
    """One engine session driven line-by-line over any transport."""

    def __init__(self, engine: GameEngine | None = None, clock: Callable[[], int] | None = None):
        self.engine = engine if engine is not None else GameEngine()
        self.clock = clock if clock is not None else _monotonic_ms_clock()
        self.session: GameSession | None = None

    def handle_line(self, line: str) -> str:
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            return self._error(f"invalid message: {exc}")
        if not isinstance(message, dict) or "cmd" not in message:
            return self._error("message must be an object with a 'cmd' field")
        cmd = message["cmd"]
        handler = {
            "new_session": self._cmd_new_session,
            "advance_stage": self._cmd_advance_stage,
            "submit_prediction": self._cmd_submit_prediction,
            "weigh": self._cmd_weigh,
            "answer_item": self._cmd_answer_item,
        }.get(cmd)
        if handler is None:
            return self._error(f"unknown command {cmd!r}")
        if cmd != "new_session" and self.session is None:
            return self._error("no session; send new_session first")
        try:
            return handler(message)
        except EngineError as exc:
            return self._error(str(exc))
        except (KeyError, TypeError, ValueError) as exc:
            return self._error(f"bad command fields: {exc}")

    # -- commands ------------------------------------------------------------

    def _cmd_new_session(self, message: dict) -> str:
        if self.session is not None:
            return self._error("session already started")
        self.session = self.engine.new_session(str(message["participant_id"]), int(message["seed"]))
        return self._ok(
            "session_created",
            {
                "session_id": self.session.session_id,
                "participant_id": self.session.participant_id,
                "rng_seed": self.session.rng_seed,
            },
        )

    def _cmd_advance_stage(self, message: dict) -> str:
        self.engine.advance_stage(self.session, t_ms=self.clock())
        return self._ok("stage_advanced", {"finalized": self.session.finalized})

    def _cmd_submit_prediction(self, message: dict) -> str:
        raw = message.get("prediction")
        prediction = Prediction(raw) if raw is not None else None
        result = self.engine.submit_prediction(
            self.session,
            str(message["cube_id"]),
            str(message["tank_id"]),
            prediction,
            t_ms=self.clock(),
        )
        return self._ok(
            "prediction_result",
            {
                "cube_id": message["cube_id"],
                "tank_id": message["tank_id"],
                "observed": result.observed.value,
                "score_delta": result.score_delta,
                "surface_breach": result.release.surface_breach,
                "trajectory": [
                    {"t": sample.t, "submersion": sample.submersion, "velocity": sample.velocity}
                    for sample in result.release.samples
                ],
            },
        )

    def _cmd_weigh(self, message: dict) -> str:
        reading = self.engine.weigh(
            self.session, str(message["left"]), str(message["right"]), t_ms=self.clock()
        )
        return self._ok("balance_read", {"left": message["left"], "right": message["right"], "reading": reading.value})

    def _cmd_answer_item(self, message: dict) -> str:
        self.engine.answer_item(
            self.session,
            str(message["item_id"]),
            int(message["choice"]),
            int(message["confidence"]),
            t_ms=self.clock(),
        )
        kind = TestKind.PRE if self.session.stage is StageId.PRE_TEST else TestKind.POST
        answered = len(self.session.answers.get(kind, {}))
        return self._ok("item_recorded", {"answered": answered, "total": len(self.engine.content.bank)})

    # -- views ---------------------------------------------------------------

    def state_view(self) -> dict:
        """Full snapshot a UI needs to (re)build its scene after a refresh."""
        if self.session is None:
            raise EngineError("no session")
        return {
            "session_id": self.session.session_id,
            "participant_id": self.session.participant_id,
            "rng_seed": self.session.rng_seed,
            "stage": self.session.stage.value,
            "score": self.session.score,
            "finalized": self.session.finalized,
            "stages": {stage.value: self.stage_view(stage) for stage in StageId},
            "tank_depth_cm": self.engine.content.dynamics.tank_depth,
            "log": self.session.log.to_lines(),
        }

    def stage_view(self, stage: StageId) -> dict:
        """Static description of one stage: instructions plus catalog or items."""
        content = self.engine.content
        view: dict = {
            "stage": stage.value,
            "instructions": content.instructions_for(stage),
            "scored": stage.value in ("c1", "c2", "c3"),
        }
        if stage in TEST_STAGES:
            kind = TestKind.PRE if stage is StageId.PRE_TEST else TestKind.POST
            instance = self.engine.test_instance_for(self.session, kind)
            view["items"] = [
                {
                    "item_id": qid,
                    "prompt": content.strings.get(content.bank.by_id[qid].prompt_key, qid),
                    "options": [
                        content.strings.get(opt, opt) for opt in content.bank.by_id[qid].options
                    ],
                }
                for qid in instance.ordering
            ]
        else:
            catalog, tanks = content.catalog_for(stage)
            view["cubes"] = [
                {
                    "id": cube.id,
                    "volume_cm3": cube.volume,
                    "mass_g": cube.mass,
                    "dot_level": cube.dot_level,
                }
                for cube in catalog.cubes
            ]
            view["tanks"] = [
                {"id": tank.id, "name": tank.name, "density_g_cm3": tank.density} for tank in tanks
            ]
            view["balance"] = stage.value in ("training", "c1")
        return view

    # -- helpers ---------------------------------------------------------------

    def _ok(self, event: str, payload: dict) -> str:
        body = {"ok": True, "event": event, "stage": self.session.stage.value, "score": self.session.score}
        body.update(payload)
        return json.dumps(body, sort_keys=True, separators=(",", ":"))

    def _error(self, message: str) -> str:
        return json.dumps({"ok": False, "error": message}, sort_keys=True, separators=(",", ":"))

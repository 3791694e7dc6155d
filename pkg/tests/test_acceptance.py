"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line. Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import json
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from densitylab import agents
from densitylab.assessment import (
    AssessmentResult,
    Response,
    cluster_profiles,
    grade,
)
from densitylab.config import default_catalog, default_question_bank
from densitylab.engine import GameEngine
from densitylab.physics import (
    BodyState,
    Cube,
    DynamicsParams,
    FlotationOutcome,
    Liquid,
    classify_flotation,
    equilibrium_submerged_fraction,
    relative_density,
    simulate_release,
)
from densitylab.telemetry import EventLog

from test_assessment import blob_fixture, make_profile, oracle_average_linkage
from test_telemetry import PRE_TEST_MINUTES, full_log
from densitylab.telemetry import timing_report


class criterion:
    """Prints the one-line verdict the acceptance report is made of."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        verdict = "PASS" if exc_type is None else "FAIL"
        print(f"\nACCEPTANCE {verdict}: {self.name}")
        return False


def test_physics_statics_on_1000_random_pairs():
    with criterion("physics statics: classification + exact scale invariance, < 1 s"):
        rng = random.Random(20240811)
        epsilon = 1e-6
        start = time.perf_counter()
        for _ in range(1000):
            volume = rng.uniform(1.0, 1e5)
            liquid = Liquid("l", "l", rng.uniform(0.1, 20.0))
            rho = rng.uniform(0.05, 5.0)
            cube = Cube("c", volume, rho * volume)
            r = relative_density(cube, liquid)
            outcome = classify_flotation(cube, liquid, epsilon)
            if abs(r - 1.0) > epsilon:  # random draws never hit the band, but guard it
                expected = FlotationOutcome.FLOATS if r < 1.0 else FlotationOutcome.SINKS
                assert outcome is expected
            for scale in (2.0**-7, 0.5, 2.0, 1024.0):  # exact in binary floating point
                scaled = Cube("s", scale * cube.volume, scale * cube.mass)
                assert classify_flotation(scaled, liquid, epsilon) is outcome
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_dynamics_agree_with_statics_on_200_random_releases():
    with criterion("dynamics settle to the statics outcome (200 runs), < 10 s"):
        rng = random.Random(7)
        params = DynamicsParams()
        epsilon = 1e-3
        start = time.perf_counter()
        runs = 0
        while runs < 200:
            edge = rng.uniform(2.0, 15.0)
            volume = edge**3
            liquid = Liquid("l", "l", rng.uniform(0.5, 14.0))
            r = rng.uniform(0.05, 2.5)
            if abs(r - 1.0) <= 10 * epsilon:
                continue
            runs += 1
            cube = Cube("c", volume, r * liquid.density * volume)
            release = simulate_release(cube, liquid, BodyState(max(edge, 25.0), 0.0), params)
            assert release.settled, (edge, liquid.density, r)
            assert release.outcome is classify_flotation(cube, liquid, epsilon)
            if release.outcome is FlotationOutcome.FLOATS:
                fraction = release.final.submersion / cube.edge
                expected = equilibrium_submerged_fraction(cube, liquid)
                assert abs(fraction - expected) < 1e-3
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.2f}s"


def test_mercury_behavior():
    with criterion("quicksilver: everything floats, and a dense cube shoots out"):
        catalog = default_catalog()
        quicksilver = catalog.liquids["quicksilver"]
        assert quicksilver.density == 13.534
        for cubes in catalog.cubes.values():
            for cube in cubes:
                assert classify_flotation(cube, quicksilver, 1e-3) is FlotationOutcome.FLOATS
        dense = Cube("dense", 1000.0, 1200.0)  # relative density 1.2 vs water
        release = simulate_release(dense, quicksilver, BodyState(25.0, 0.0), DynamicsParams())
        assert release.surface_breach, "expected the cube to shoot out of the liquid"
        assert release.outcome is FlotationOutcome.FLOATS


def test_scoring_oracle_and_contrarian():
    with criterion("oracle scores +30, contrarian -15, bonus contributes 0"):
        engine = GameEngine()
        trials = agents.scored_trial_count(engine)
        assert trials == 15  # c1: 4, c2: 3, c3: 4 cubes x 2 tanks
        oracle = agents.play_session(engine, "oracle", 1, agents.OraclePolicy())
        contrarian = agents.play_session(engine, "contrarian", 1, agents.ContrarianPolicy())
        assert oracle.score == 30
        assert contrarian.score == -15
        from densitylab.telemetry import EventKind, StageId

        for session in (oracle, contrarian):
            bonus = [
                event.payload["score_delta"]
                for event in session.log
                if event.kind is EventKind.OUTCOME_OBSERVED and event.stage is StageId.BONUS
            ]
            assert bonus and all(delta == 0 for delta in bonus)


def test_assessment_grading_and_clustering():
    with criterion("grading fixtures exact; 3-blob clustering matches the oracle"):
        bank = default_question_bank()
        all_correct = [Response(q.id, q.correct_index, 4) for q in bank]
        assert grade(all_correct, bank).success_rate * 100 == 100.0

        eight = [
            Response(
                q.id,
                q.correct_index if i < 8 else (q.correct_index + 1) % len(q.options),
                3,
            )
            for i, q in enumerate(bank)
        ]
        expected_pct = float(Fraction(8, 13) * 100)
        assert abs(grade(eight, bank).success_rate * 100 - expected_pct) < 1e-9

        profiles = blob_fixture(bank)
        result = cluster_profiles(profiles, threshold=0.75)
        assert len(result.clusters) == 3
        assert result.outliers == frozenset({"out1", "out2"})

        rng = random.Random(13)
        for _ in range(20):
            n = rng.randint(2, 6)
            small = [
                make_profile(f"p{i}", [rng.randrange(4) for _ in range(13)], bank) for i in range(n)
            ]
            threshold = rng.choice([0.25, 0.5, 0.75])
            mine = cluster_profiles(small, threshold)
            oracle_clusters, oracle_outliers = oracle_average_linkage(small, threshold)
            assert set(mine.clusters) == oracle_clusters
            assert mine.outliers == oracle_outliers


def test_telemetry_table_and_replay():
    with criterion("timing table renders '3,62 33,04 10,15'; replay is identical"):
        logs = [full_log(minutes) for minutes in PRE_TEST_MINUTES]
        report = timing_report(logs)
        assert " ".join(report.row("Pre-test").cells(",")) == "3,62 33,04 10,15"
        rendered = report.render(",")
        pre_row = next(line for line in rendered.splitlines() if line.startswith("Pre-test"))
        assert pre_row.endswith("3,62 33,04 10,15")

        engine = GameEngine()
        session = agents.play_session(engine, "replayed", 77, agents.RandomPolicy(77))
        replayed = engine.replay(session.log)
        assert replayed.to_json() == session.to_json()


def test_end_to_end_pipeline(tmp_path):
    with criterion("simulate -> analyze -> grade, one command each, < 30 s"):
        start = time.perf_counter()
        logs_dir = tmp_path / "logs"
        env_cmd = [sys.executable, "-m", "densitylab.cli"]

        for seed in (101, 102, 103):
            proc = subprocess.run(
                env_cmd
                + ["simulate", "--policy", "random", "--seed", str(seed), "--out", str(logs_dir / f"s{seed}.log")],
                capture_output=True,
                text=True,
            )
            assert proc.returncode == 0, proc.stderr

        proc = subprocess.run(
            env_cmd + ["analyze", "--in", str(logs_dir), "--format", "machine"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        payload = json.loads(proc.stdout)
        assert payload["sessions"] == 3

        # responses file distilled from the simulated logs' item events
        lines = []
        for log_path in sorted(logs_dir.iterdir()):
            log = EventLog.read(log_path)
            participant = log.events[0].payload["participant_id"]
            for event in log:
                if event.kind.value == "item_answered" and event.payload["test"] == "pre":
                    payload_item = event.payload
                    lines.append(
                        "response "
                        f"participant_id={participant} question_id={payload_item['item_id']} "
                        f"chosen_index={payload_item['choice']} confidence={payload_item['confidence']}"
                    )
        responses = tmp_path / "responses.txt"
        responses.write_text("\n".join(lines) + "\n")

        proc = subprocess.run(
            env_cmd + ["grade", "--responses", str(responses)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert "cohort (3 participants)" in proc.stdout

        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"pipeline took {elapsed:.2f}s"

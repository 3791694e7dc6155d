"""Scripted agents and the command-line pipeline."""

import json
import random

import pytest

from densitylab import agents, cli
from densitylab.config import parse_catalog
from densitylab.engine import GameContent, GameEngine
from densitylab.telemetry import EventKind, EventLog, StageId
from densitylab import config as config_module


@pytest.fixture(scope="module")
def engine():
    return GameEngine()


# --- policies ----------------------------------------------------------------


def test_oracle_scores_two_points_per_scored_trial(engine):
    session = agents.play_session(engine, "oracle-1", 5, agents.OraclePolicy())
    assert session.finalized
    assert session.score == 2 * agents.scored_trial_count(engine)


def test_contrarian_loses_one_point_per_scored_trial(engine):
    session = agents.play_session(engine, "contrarian-1", 5, agents.ContrarianPolicy())
    assert session.score == -agents.scored_trial_count(engine)


def test_default_catalog_has_fifteen_scored_trials(engine):
    # 4 cubes in water (c1) + 3 in water (c2) + 4 in water and oil (c3)
    assert agents.scored_trial_count(engine) == 15


def test_bonus_never_moves_the_score(engine):
    for policy in (agents.OraclePolicy(), agents.ContrarianPolicy(), agents.RandomPolicy(3)):
        session = agents.play_session(engine, "x", 8, policy)
        bonus_deltas = [
            event.payload["score_delta"]
            for event in session.log
            if event.kind is EventKind.OUTCOME_OBSERVED and event.stage is StageId.BONUS
        ]
        assert bonus_deltas and set(bonus_deltas) == {0}


def test_play_session_is_bit_deterministic(engine):
    a = agents.play_session(engine, "p", 12, agents.RandomPolicy(12))
    b = agents.play_session(engine, "p", 12, agents.RandomPolicy(12))
    assert a.log.to_lines() == b.log.to_lines()
    assert a.to_json() == b.to_json()


def test_oracle_score_property_on_random_catalogs(engine):
    rng = random.Random(41)
    for trial in range(10):
        c1_masses = rng.sample(range(200, 1500, 7), k=rng.randint(2, 5))
        c2_volumes = rng.sample(range(300, 1400, 11), k=rng.randint(2, 4))
        lines = [
            "liquid id=water name=water density_g_cm3=1.0",
            "liquid id=oil name=oil density_g_cm3=0.92",
            "liquid id=quicksilver name=quicksilver density_g_cm3=13.534",
            "cube id=t1 stage=training volume_cm3=1000 mass_g=400",
            "cube id=t2 stage=training volume_cm3=1000 mass_g=900",
            "cube id=w stage=c1 volume_cm3=1000 mass_g=960",  # floats in water, sinks in oil
        ]
        lines += [
            f"cube id=m{i} stage=c1 volume_cm3=1000 mass_g={m}" for i, m in enumerate(c1_masses)
        ]
        lines += [
            f"cube id=v{i} stage=c2 volume_cm3={v} mass_g=700" for i, v in enumerate(c2_volumes)
        ]
        catalog = parse_catalog("\n".join(lines))
        content = GameContent(
            catalog=catalog,
            bank=config_module.default_question_bank(),
            strings=config_module.default_strings(),
        )
        custom_engine = GameEngine(content)
        session = agents.play_session(custom_engine, "o", trial, agents.OraclePolicy())
        assert session.score == 2 * agents.scored_trial_count(custom_engine), f"trial {trial}"


def test_scripted_policy_round_trip(engine, tmp_path):
    oracle_session = agents.play_session(engine, "oracle", 2, agents.OraclePolicy())
    lines = []
    for event in oracle_session.log:
        if event.kind is EventKind.PREDICTION_SUBMITTED and event.payload["prediction"]:
            payload = event.payload
            lines.append(
                f"prediction cube_id={payload['cube_id']} tank_id={payload['tank_id']} prediction={payload['prediction']}"
            )
    for question in engine.content.bank:
        lines.append(f"answer item_id={question.id} choice={question.correct_index} confidence=4")
    script = tmp_path / "script.txt"
    script.write_text("\n".join(sorted(set(lines))) + "\n")
    policy = agents.ScriptedPolicy.from_file(script)
    session = agents.play_session(engine, "scripted", 2, policy)
    assert session.score == oracle_session.score


def test_scripted_policy_missing_entry_is_an_error(engine, tmp_path):
    script = tmp_path / "script.txt"
    script.write_text("answer item_id=q01 choice=0 confidence=1\n")
    policy = agents.ScriptedPolicy.from_file(script)
    with pytest.raises(agents.AgentError):
        agents.play_session(engine, "s", 1, policy)


# --- cli ---------------------------------------------------------------------


def run_cli(*argv):
    return cli.main(list(argv))


def test_simulate_writes_log_and_prints_score(tmp_path, capsys):
    out = tmp_path / "logs" / "session1.log"
    code = run_cli("simulate", "--policy", "oracle", "--seed", "7", "--out", str(out))
    assert code == 0
    captured = capsys.readouterr()
    assert "final score 30" in captured.out
    log = EventLog.read(out)
    assert len(log) > 40


def test_simulate_is_bit_deterministic(tmp_path):
    out_a = tmp_path / "a.log"
    out_b = tmp_path / "b.log"
    run_cli("simulate", "--policy", "random", "--seed", "19", "--out", str(out_a))
    run_cli("simulate", "--policy", "random", "--seed", "19", "--out", str(out_b))
    assert out_a.read_bytes() == out_b.read_bytes()


def test_analyze_single_log(tmp_path, capsys):
    out = tmp_path / "logs" / "s.log"
    run_cli("simulate", "--policy", "oracle", "--seed", "3", "--out", str(out))
    capsys.readouterr()
    code = run_cli("analyze", "--in", str(tmp_path / "logs"), "--format", "table")
    assert code == 0
    captured = capsys.readouterr()
    assert "Pre-test" in captured.out
    assert "Total game time" in captured.out
    report = [line for line in captured.out.splitlines() if line.startswith("Scenario 1")]
    cells = report[0].split()[-3:]
    assert cells[0] == cells[1] == cells[2]  # single session: min = max = avg


def test_analyze_machine_format(tmp_path, capsys):
    logs = tmp_path / "logs"
    for seed in (1, 2):
        run_cli("simulate", "--policy", "random", "--seed", str(seed), "--out", str(logs / f"{seed}.log"))
    capsys.readouterr()
    code = run_cli("analyze", "--in", str(logs), "--format", "machine")
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["sessions"] == 2
    assert payload["timing"]["rows"][0]["label"] == "Pre-test"
    assert payload["pre_post"]["sessions"] == 2


def test_analyze_lists_corrupt_logs_but_processes_valid_ones(tmp_path, capsys):
    logs = tmp_path / "logs"
    run_cli("simulate", "--policy", "oracle", "--seed", "4", "--out", str(logs / "good.log"))
    (logs / "bad.log").write_text("{ not json }\n")
    capsys.readouterr()
    code = run_cli("analyze", "--in", str(logs), "--format", "table")
    captured = capsys.readouterr()
    assert code == 0
    assert "bad.log" in captured.err
    assert "Pre-test" in captured.out


def test_analyze_empty_dir_is_a_data_error(tmp_path, capsys):
    empty = tmp_path / "none"
    empty.mkdir()
    assert run_cli("analyze", "--in", str(empty)) == 2
    assert "no valid session logs" in capsys.readouterr().err


def write_responses(path, participants):
    """participants: {pid: n_correct} over the default bank; 12 marks incomplete."""
    bank = config_module.default_question_bank()
    lines = []
    for pid, n_correct in participants.items():
        for index, question in enumerate(bank):
            if n_correct == "incomplete" and index == 12:
                continue
            correct = isinstance(n_correct, int) and index < n_correct
            choice = question.correct_index if correct else (question.correct_index + 1) % len(question.options)
            lines.append(
                f"response participant_id={pid} question_id={question.id} chosen_index={choice} confidence=3"
            )
    path.write_text("\n".join(lines) + "\n")


def test_grade_reports_participants_and_cohort(tmp_path, capsys):
    responses = tmp_path / "responses.txt"
    write_responses(responses, {"p1": 13, "p2": 5})
    code = run_cli("grade", "--responses", str(responses))
    assert code == 0
    captured = capsys.readouterr()
    assert "p1: success 100.00% (13/13)" in captured.out
    assert "cohort (2 participants)" in captured.out
    assert "above 50%: 50.00%" in captured.out


def test_grade_excludes_incomplete_participants_with_warning(tmp_path, capsys):
    responses = tmp_path / "responses.txt"
    write_responses(responses, {"p1": 13, "p9": "incomplete"})
    code = run_cli("grade", "--responses", str(responses))
    captured = capsys.readouterr()
    assert code == 0
    assert "p9" in captured.err and "excluded" in captured.err
    assert "p9" not in captured.out


def test_cluster_command(tmp_path, capsys):
    bank = config_module.default_question_bank()
    lines = []
    for pid, base in (("a1", 0), ("a2", 0), ("b1", 1), ("b2", 1)):
        for question in bank:
            lines.append(
                f"response participant_id={pid} question_id={question.id} chosen_index={base} confidence=2"
            )
    for question in bank:
        lines.append(f"response participant_id=lone question_id={question.id} chosen_index=3 confidence=2")
    responses = tmp_path / "responses.txt"
    responses.write_text("\n".join(lines) + "\n")
    code = run_cli("cluster", "--responses", str(responses), "--threshold", "0.75")
    assert code == 0
    captured = capsys.readouterr()
    assert "cluster 1: a1, a2" in captured.out
    assert "cluster 2: b1, b2" in captured.out
    assert "outliers: lone" in captured.out


def test_usage_errors_exit_one(tmp_path, capsys):
    assert run_cli("simulate", "--policy", "oracle", "--seed", "1") == 1  # missing --out
    assert run_cli("cluster", "--responses", "x", "--threshold", "1.5") == 1
    assert run_cli("nonsense") == 1


def test_data_errors_exit_two(tmp_path, capsys):
    missing = tmp_path / "nope.txt"
    assert run_cli("grade", "--responses", str(missing)) == 2
    bad_catalog = tmp_path / "catalog.txt"
    bad_catalog.write_text("liquid id=water density_g_cm3=zero\n")
    assert (
        run_cli("simulate", "--policy", "oracle", "--seed", "1", "--out", str(tmp_path / "o.log"), "--catalog", str(bad_catalog))
        == 2
    )

"""Questionnaire engine: item bank, pre/post test instances, grading,
confidence stats, and answer-profile similarity clustering.

The item bank is 13 single-choice density questions with a 1-4 confidence
rating per answer. The post test presents the same items reordered. The
clustering groups participants whose answer patterns agree (agreement
fraction, average linkage), the tool used to surface shared misconceptions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

CONFIDENCE_MIN = 1
CONFIDENCE_MAX = 4
CONFIDENCE_SPAN = CONFIDENCE_MAX - CONFIDENCE_MIN


class AssessmentError(Exception):
    """Invalid bank, responses, or clustering input."""


class TestKind(Enum):
    PRE = "pre"
    POST = "post"


@dataclass(frozen=True)
class Question:
    id: str
    prompt_key: str
    options: tuple[str, ...]  # option string-table keys
    correct_index: int

    def __post_init__(self) -> None:
        if len(self.options) < 2:
            raise AssessmentError(f"question {self.id}: needs at least 2 options")
        if not 0 <= self.correct_index < len(self.options):
            raise AssessmentError(f"question {self.id}: correct_index out of range")


class QuestionBank:
    def __init__(self, questions: list[Question]):
        if not questions:
            raise AssessmentError("question bank is empty")
        ids = [q.id for q in questions]
        if len(set(ids)) != len(ids):
            raise AssessmentError("question bank has duplicate ids")
        self.questions = list(questions)
        self.by_id = {q.id: q for q in questions}

    def __len__(self) -> int:
        return len(self.questions)

    def __iter__(self):
        return iter(self.questions)

    @property
    def canonical_order(self) -> list[str]:
        return [q.id for q in self.questions]


@dataclass(frozen=True)
class Response:
    question_id: str
    chosen_index: int
    confidence: int

    def __post_init__(self) -> None:
        if not CONFIDENCE_MIN <= self.confidence <= CONFIDENCE_MAX:
            raise AssessmentError(
                f"confidence must be in [{CONFIDENCE_MIN}, {CONFIDENCE_MAX}], got {self.confidence}"
            )
        if self.chosen_index < 0:
            raise AssessmentError("chosen_index must be non-negative")


@dataclass(frozen=True)
class TestInstance:
    kind: TestKind
    ordering: tuple[str, ...]
    seed: int


def build_test(bank: QuestionBank, kind: TestKind, seed: int) -> TestInstance:
    """Pre test in canonical order; post test in a seeded non-identity shuffle."""
    canonical = bank.canonical_order
    if kind is TestKind.PRE:
        return TestInstance(kind=kind, ordering=tuple(canonical), seed=seed)
    if len(canonical) < 2:
        raise AssessmentError("cannot reorder a single-question bank")
    rng = random.Random(seed)
    ordering = list(canonical)
    while ordering == canonical:
        rng.shuffle(ordering)
    return TestInstance(kind=kind, ordering=tuple(ordering), seed=seed)


@dataclass(frozen=True)
class AssessmentResult:
    success_rate: float  # fraction of bank answered correctly
    mean_confidence: float
    per_question_correct: tuple[bool, ...]  # canonical bank order


def grade(responses: list[Response], bank: QuestionBank) -> AssessmentResult:
    """Grade one complete response set (exactly one response per bank item)."""
    by_id: dict[str, Response] = {}
    duplicates = []
    for response in responses:
        if response.question_id in by_id:
            duplicates.append(response.question_id)
        by_id[response.question_id] = response
    if duplicates:
        raise AssessmentError(f"duplicate responses for: {', '.join(sorted(set(duplicates)))}")
    unknown = sorted(set(by_id) - set(bank.by_id))
    if unknown:
        raise AssessmentError(f"responses for unknown questions: {', '.join(unknown)}")
    missing = [qid for qid in bank.canonical_order if qid not in by_id]
    if missing:
        raise AssessmentError(f"missing responses for: {', '.join(missing)}")

    correct = []
    for question in bank:
        response = by_id[question.id]
        if response.chosen_index >= len(question.options):
            raise AssessmentError(f"question {question.id}: chosen_index out of range")
        correct.append(response.chosen_index == question.correct_index)
    mean_confidence = sum(by_id[qid].confidence for qid in bank.canonical_order) / len(bank)
    return AssessmentResult(
        success_rate=sum(correct) / len(bank),
        mean_confidence=mean_confidence,
        per_question_correct=tuple(correct),
    )


def pre_post_delta(pre: AssessmentResult, post: AssessmentResult) -> dict[str, float]:
    """Accuracy delta in percent points; confidence delta as percent of the 1-4 span."""
    return {
        "accuracy_delta_pct": (post.success_rate - pre.success_rate) * 100.0,
        "confidence_delta_pct": (post.mean_confidence - pre.mean_confidence) / CONFIDENCE_SPAN * 100.0,
    }


@dataclass(frozen=True)
class AnswerProfile:
    """One participant's chosen option per question, in canonical bank order."""

    participant_id: str
    question_ids: tuple[str, ...]
    choices: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.question_ids) != len(self.choices):
            raise AssessmentError("profile choices do not match its question ids")

    @classmethod
    def from_responses(cls, participant_id: str, responses: list[Response], bank: QuestionBank) -> "AnswerProfile":
        by_id = {r.question_id: r for r in responses}
        missing = [qid for qid in bank.canonical_order if qid not in by_id]
        if missing:
            raise AssessmentError(f"participant {participant_id}: missing answers for {', '.join(missing)}")
        return cls(
            participant_id=participant_id,
            question_ids=tuple(bank.canonical_order),
            choices=tuple(by_id[qid].chosen_index for qid in bank.canonical_order),
        )


def profile_similarity(a: AnswerProfile, b: AnswerProfile) -> float:
    """Fraction of questions with identical chosen option."""
    if a.question_ids != b.question_ids:
        raise AssessmentError("profiles come from different banks")
    matches = sum(1 for x, y in zip(a.choices, b.choices) if x == y)
    return matches / len(a.choices)


@dataclass(frozen=True)
class ClusterResult:
    clusters: list[frozenset[str]]
    outliers: frozenset[str]


def cluster_profiles(profiles: list[AnswerProfile], threshold: float) -> ClusterResult:
    """Agglomerative average-linkage clustering over pairwise profile agreement.

    Merging continues while the best inter-cluster average similarity is at
    least ``threshold``. A singleton whose best similarity to any other
    profile is below the threshold is reported as an outlier rather than a
    cluster. Ties are broken by lexicographic participant id so the result
    is deterministic.
    """
    if not 0.0 < threshold < 1.0:
        raise AssessmentError(f"threshold must be in (0, 1), got {threshold}")
    if len(profiles) < 2:
        raise AssessmentError("clustering needs at least 2 profiles")
    ids = [p.participant_id for p in profiles]
    if len(set(ids)) != len(ids):
        raise AssessmentError("duplicate participant ids")

    by_id = {p.participant_id: p for p in profiles}
    ordered = sorted(by_id)
    sim = {
        (a, b): profile_similarity(by_id[a], by_id[b])
        for i, a in enumerate(ordered)
        for b in ordered[i + 1 :]
    }

    def pair_sim(a: str, b: str) -> float:
        return sim[(a, b)] if (a, b) in sim else sim[(b, a)]

    clusters: list[tuple[str, ...]] = [(pid,) for pid in ordered]
    while len(clusters) > 1:
        best_avg = None
        best_pair = None
        for i, left in enumerate(clusters):
            for right in clusters[i + 1 :]:
                total = sum(pair_sim(a, b) for a in left for b in right)
                avg = total / (len(left) * len(right))
                key = (left, right)
                if best_avg is None or avg > best_avg or (avg == best_avg and key < best_pair):
                    best_avg = avg
                    best_pair = key
        if best_avg is None or best_avg < threshold:
            break
        left, right = best_pair
        clusters.remove(left)
        clusters.remove(right)
        clusters.append(tuple(sorted(left + right)))
        clusters.sort()

    outliers = set()
    final = []
    for cluster in sorted(clusters):
        if len(cluster) == 1:
            pid = cluster[0]
            best = max(pair_sim(pid, other) for other in ordered if other != pid)
            if best < threshold:
                outliers.add(pid)
                continue
        final.append(frozenset(cluster))
    return ClusterResult(clusters=final, outliers=frozenset(outliers))


def cohort_stats(results: list[AssessmentResult]) -> dict[str, float]:
    """Cohort mean success percentage and the share scoring strictly above 50%."""
    if not results:
        raise AssessmentError("cohort_stats needs at least one result")
    mean_success = sum(r.success_rate for r in results) / len(results)
    above = sum(1 for r in results if r.success_rate > 0.5)
    return {
        "mean_success_pct": mean_success * 100.0,
        "share_above_50_pct": above / len(results) * 100.0,
    }

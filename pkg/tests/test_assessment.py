"""Questionnaire grading, deltas, and profile clustering."""

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from densitylab.assessment import (
    AnswerProfile,
    AssessmentError,
    AssessmentResult,
    Question,
    QuestionBank,
    Response,
    build_test,
    cluster_profiles,
    cohort_stats,
    grade,
    pre_post_delta,
    profile_similarity,
)
from densitylab import assessment as assessment_module
from densitylab.config import default_question_bank


@pytest.fixture(scope="module")
def bank():
    return default_question_bank()


def make_profile(pid, choices, bank):
    return AnswerProfile(
        participant_id=pid, question_ids=tuple(bank.canonical_order), choices=tuple(choices)
    )


def responses_with_correct(bank, n_correct, confidence=3):
    responses = []
    for index, question in enumerate(bank):
        if index < n_correct:
            choice = question.correct_index
        else:
            choice = (question.correct_index + 1) % len(question.options)
        responses.append(Response(question.id, choice, confidence))
    return responses


# --- test instances -------------------------------------------------------------


def test_bank_has_thirteen_items(bank):
    assert len(bank) == 13


def test_pre_test_uses_canonical_order(bank):
    instance = build_test(bank, assessment_module.TestKind.PRE, seed=123)
    assert list(instance.ordering) == bank.canonical_order


def test_post_test_is_deterministic_per_seed(bank):
    a = build_test(bank, assessment_module.TestKind.POST, seed=5)
    b = build_test(bank, assessment_module.TestKind.POST, seed=5)
    assert a.ordering == b.ordering


def test_post_test_is_a_non_identity_permutation(bank):
    for seed in range(25):
        instance = build_test(bank, assessment_module.TestKind.POST, seed=seed)
        assert sorted(instance.ordering) == sorted(bank.canonical_order)
        assert list(instance.ordering) != bank.canonical_order


def test_empty_bank_rejected():
    with pytest.raises(AssessmentError):
        QuestionBank([])


# --- grading ---------------------------------------------------------------------


def test_all_correct_full_confidence(bank):
    responses = [Response(q.id, q.correct_index, 4) for q in bank]
    result = grade(responses, bank)
    assert result.success_rate == 1.0
    assert result.mean_confidence == 4.0
    assert all(result.per_question_correct)


def test_eight_of_thirteen(bank):
    result = grade(responses_with_correct(bank, 8), bank)
    assert result.success_rate == pytest.approx(float(Fraction(8, 13)), abs=1e-12)


def test_duplicate_response_rejected(bank):
    responses = [Response(q.id, q.correct_index, 4) for q in bank]
    responses[-1] = Response(responses[0].question_id, 0, 1)
    with pytest.raises(AssessmentError) as excinfo:
        grade(responses, bank)
    assert "q01" in str(excinfo.value)


def test_missing_response_rejected(bank):
    responses = [Response(q.id, q.correct_index, 4) for q in bank][:-1]
    with pytest.raises(AssessmentError) as excinfo:
        grade(responses, bank)
    assert "q13" in str(excinfo.value)


def test_confidence_range_enforced():
    with pytest.raises(AssessmentError):
        Response("q01", 0, 0)
    with pytest.raises(AssessmentError):
        Response("q01", 0, 5)


def test_grading_is_presentation_order_invariant(bank):
    responses = responses_with_correct(bank, 9)
    shuffled = list(responses)
    random.Random(4).shuffle(shuffled)
    assert grade(responses, bank) == grade(shuffled, bank)


# --- deltas ----------------------------------------------------------------------


def test_identical_results_give_zero_deltas(bank):
    result = grade(responses_with_correct(bank, 6), bank)
    deltas = pre_post_delta(result, result)
    assert deltas == {"accuracy_delta_pct": 0.0, "confidence_delta_pct": 0.0}


def test_accuracy_delta_two_items(bank):
    pre = grade(responses_with_correct(bank, 10), bank)
    post = grade(responses_with_correct(bank, 12), bank)
    expected = float(Fraction(2, 13) * 100)
    assert pre_post_delta(pre, post)["accuracy_delta_pct"] == pytest.approx(expected, abs=1e-9)


def test_confidence_delta_normalized_to_span():
    pre = AssessmentResult(0.5, 2.0, (True,) * 13)
    post = AssessmentResult(0.5, 3.5, (True,) * 13)
    assert pre_post_delta(pre, post)["confidence_delta_pct"] == pytest.approx(50.0)


# --- similarity --------------------------------------------------------------------


def test_similarity_examples(bank):
    a = make_profile("a", [0] * 13, bank)
    b = make_profile("b", [0] * 13, bank)
    c = make_profile("c", [1] * 13, bank)
    assert profile_similarity(a, b) == 1.0
    assert profile_similarity(a, c) == 0.0
    d_choices = [0] * 13
    d_choices[0] = d_choices[5] = d_choices[9] = 2
    d = make_profile("d", d_choices, bank)
    assert profile_similarity(a, d) == pytest.approx(float(Fraction(10, 13)), abs=1e-12)


def test_mismatched_banks_rejected(bank):
    a = make_profile("a", [0] * 13, bank)
    other = AnswerProfile("b", tuple(f"x{i}" for i in range(13)), tuple([0] * 13))
    with pytest.raises(AssessmentError):
        profile_similarity(a, other)


@given(st.lists(st.integers(0, 3), min_size=13, max_size=13), st.lists(st.integers(0, 3), min_size=13, max_size=13))
def test_similarity_is_symmetric_and_complements_hamming(xs, ys):
    ids = tuple(f"q{i}" for i in range(13))
    a = AnswerProfile("a", ids, tuple(xs))
    b = AnswerProfile("b", ids, tuple(ys))
    assert profile_similarity(a, b) == profile_similarity(b, a)
    assert profile_similarity(a, a) == 1.0
    hamming = sum(1 for x, y in zip(xs, ys) if x != y) / 13
    assert profile_similarity(a, b) == pytest.approx(1.0 - hamming, abs=1e-12)


# --- clustering ------------------------------------------------------------------


def oracle_average_linkage(profiles, threshold):
    """Naive re-derivation: recompute every inter-cluster average each round."""
    clusters = [frozenset([p.participant_id]) for p in profiles]
    by_id = {p.participant_id: p for p in profiles}

    def avg(a, b):
        sims = [profile_similarity(by_id[x], by_id[y]) for x in sorted(a) for y in sorted(b)]
        return sum(sims) / len(sims)

    while len(clusters) > 1:
        candidates = []
        for a, b in itertools.combinations(sorted(clusters, key=sorted), 2):
            candidates.append((avg(a, b), tuple(sorted(a)), tuple(sorted(b)), a, b))
        # max by avg; break ties by smallest lexicographic pair
        top = max(c[0] for c in candidates)
        tied = sorted([c for c in candidates if c[0] == top], key=lambda item: (item[1], item[2]))
        best = tied[0]
        if best[0] < threshold:
            break
        clusters.remove(best[3])
        clusters.remove(best[4])
        clusters.append(best[3] | best[4])
    outliers = set()
    final = []
    for cluster in clusters:
        if len(cluster) == 1:
            (pid,) = cluster
            top = max(
                profile_similarity(by_id[pid], other)
                for key, other in by_id.items()
                if key != pid
            )
            if top < threshold:
                outliers.add(pid)
                continue
        final.append(cluster)
    return set(final), frozenset(outliers)


def blob_fixture(bank, members_per_blob=3, with_outliers=True):
    """Three tight answer-pattern groups, optionally plus two loners."""
    profiles = []
    for blob_index, base in enumerate((0, 1, 2)):
        for member in range(members_per_blob):
            choices = [base] * 13
            choices[blob_index * 3 + member] = (base + 1) % 4  # one private flip each
            profiles.append(make_profile(f"g{blob_index}m{member}", choices, bank))
    if with_outliers:
        profiles.append(make_profile("out1", [3, 0, 3, 0, 3, 0, 3, 0, 3, 0, 3, 0, 3], bank))
        profiles.append(make_profile("out2", [3] * 13, bank))
    return profiles


def test_two_identical_plus_disagreeing_gives_cluster_and_outlier(bank):
    profiles = [
        make_profile("a", [0] * 13, bank),
        make_profile("b", [0] * 13, bank),
        make_profile("c", [1] * 13, bank),
    ]
    result = cluster_profiles(profiles, threshold=0.75)
    assert result.clusters == [frozenset({"a", "b"})]
    assert result.outliers == frozenset({"c"})


def test_all_identical_profiles_form_one_cluster(bank):
    profiles = [make_profile(f"p{i}", [2] * 13, bank) for i in range(5)]
    result = cluster_profiles(profiles, threshold=0.75)
    assert result.clusters == [frozenset({f"p{i}" for i in range(5)})]
    assert not result.outliers


def test_three_blob_fixture_yields_three_clusters_and_outliers(bank):
    profiles = blob_fixture(bank)
    result = cluster_profiles(profiles, threshold=0.75)
    assert len(result.clusters) == 3
    assert result.outliers == frozenset({"out1", "out2"})
    members = {frozenset(c) for c in result.clusters}
    assert members == {
        frozenset({"g0m0", "g0m1", "g0m2"}),
        frozenset({"g1m0", "g1m1", "g1m2"}),
        frozenset({"g2m0", "g2m1", "g2m2"}),
    }


def test_clustering_matches_oracle_on_small_inputs(bank):
    profiles_six = blob_fixture(bank, members_per_blob=2, with_outliers=False)
    for threshold in (0.3, 0.5, 0.75, 0.9):
        result = cluster_profiles(profiles_six, threshold)
        oracle_clusters, oracle_outliers = oracle_average_linkage(profiles_six, threshold)
        assert set(result.clusters) == oracle_clusters
        assert result.outliers == oracle_outliers

    rng = random.Random(77)
    for trial in range(30):
        n = rng.randint(2, 6)
        profiles = [
            make_profile(f"p{index}", [rng.randrange(4) for _ in range(13)], bank)
            for index in range(n)
        ]
        threshold = rng.choice([0.2, 0.4, 0.6, 0.8])
        result = cluster_profiles(profiles, threshold)
        oracle_clusters, oracle_outliers = oracle_average_linkage(profiles, threshold)
        assert set(result.clusters) == oracle_clusters, f"trial {trial}"
        assert result.outliers == oracle_outliers, f"trial {trial}"


def test_threshold_limits(bank):
    rng = random.Random(11)
    profiles = []
    for index in range(6):
        choices = [0] + [rng.randrange(4) for _ in range(12)]  # all agree on q01
        profiles.append(make_profile(f"p{index}", choices, bank))
    low = cluster_profiles(profiles, threshold=1e-9)
    assert len(low.clusters) == 1 and not low.outliers
    high = cluster_profiles(profiles, threshold=1.0 - 1e-9)
    groups = {}
    for profile in profiles:
        groups.setdefault(profile.choices, set()).add(profile.participant_id)
    expected_clusters = {frozenset(g) for g in groups.values() if len(g) > 1}
    assert {frozenset(c) for c in high.clusters} == expected_clusters


def test_threshold_out_of_range_rejected(bank):
    profiles = [make_profile("a", [0] * 13, bank), make_profile("b", [0] * 13, bank)]
    with pytest.raises(AssessmentError):
        cluster_profiles(profiles, threshold=0.0)
    with pytest.raises(AssessmentError):
        cluster_profiles(profiles, threshold=1.0)


# --- cohort stats -----------------------------------------------------------------


def test_cohort_stats_examples():
    perfect = AssessmentResult(1.0, 4.0, (True,) * 13)
    assert cohort_stats([perfect]) == {"mean_success_pct": 100.0, "share_above_50_pct": 100.0}
    pair = [AssessmentResult(0.4, 2.0, (False,) * 13), AssessmentResult(0.6, 2.0, (False,) * 13)]
    stats = cohort_stats(pair)
    assert stats["mean_success_pct"] == pytest.approx(50.0)
    assert stats["share_above_50_pct"] == pytest.approx(50.0)


def test_share_above_50_is_strict():
    exactly_half = [AssessmentResult(0.5, 2.0, (False,) * 13)] * 3
    assert cohort_stats(exactly_half)["share_above_50_pct"] == 0.0


def test_cohort_stats_empty_rejected():
    with pytest.raises(AssessmentError):
        cohort_stats([])

from __future__ import annotations

import json
import math
import random
import statistics

import pytest

from emorette.analytics import (
    ComponentRating,
    ConversationRecord,
    Z_80,
    ab_test,
    component_rating,
    components_report,
    daily_means,
    filter_min_turns,
    load_records,
    record_to_dict,
    render_ab_table,
    render_components_table,
    rolling_average,
    rolling_csv,
)

from oracles import permutation_p_value


def record(cid, rating=None, turns=5, components=("covid",), variant=None, date=""):
    return ConversationRecord(
        conversation_id=cid,
        rating=rating,
        turn_count=turns,
        components=set(components),
        variant=variant,
        date=date,
    )


# --- filtering -----------------------------------------------------------------


def test_filter_min_turns_boundary():
    records = [record("a", 4.0, turns=3), record("b", 4.0, turns=4)]
    kept = filter_min_turns(records, 3)
    assert [r.conversation_id for r in kept] == ["b"]


def test_filter_empty_input():
    assert filter_min_turns([], 3) == []


# --- component ratings -----------------------------------------------------------


def test_component_rating_example():
    records = [record(str(i), r) for i, r in enumerate([5, 4, 3, 4])]
    result = component_rating(records, "covid")
    assert result.mean == pytest.approx(4.0)
    assert result.ci80_low == pytest.approx(3.477, abs=1e-3)
    assert result.ci80_high == pytest.approx(4.523, abs=1e-3)
    assert result.n == 4


def test_component_rating_single_record_degenerate():
    result = component_rating([record("a", 5.0)], "covid")
    assert result.mean == 5.0
    assert result.degenerate
    assert result.ci80_low is None


def test_component_rating_absent_component_empty():
    result = component_rating([record("a", 5.0)], "pets")
    assert result.empty
    assert result.mean is None


def test_component_rating_ignores_unrated():
    records = [record("a", 4.0), record("b", None)]
    assert component_rating(records, "covid").n == 1


def test_component_rating_matches_brute_force_on_random_sets():
    rng = random.Random(321)
    tags = ["covid", "pets", "movies", "life"]
    for _ in range(500):
        records = []
        for i in range(rng.randint(0, 30)):
            rating = rng.choice([None, rng.uniform(1, 5)])
            comps = {t for t in tags if rng.random() < 0.4}
            records.append(record(f"c{i}", rating, components=comps))
        tag = rng.choice(tags)
        expected = [r.rating for r in records if tag in r.components and r.rating is not None]
        result = component_rating(records, tag)
        assert result.n == len(expected)
        if expected:
            assert result.mean == sum(expected) / len(expected)  # exact
        else:
            assert result.empty


def test_ci_width_shrinks_as_sqrt_n():
    rng = random.Random(1234)
    widths = {}
    for n in (16, 64, 256):
        ratings = [rng.uniform(1, 5) for _ in range(n)]
        records = [record(str(i), r) for i, r in enumerate(ratings)]
        result = component_rating(records, "covid")
        widths[n] = result.ci80_high - result.ci80_low
    assert widths[64] == pytest.approx(widths[16] / 2, rel=0.15)
    assert widths[256] == pytest.approx(widths[64] / 2, rel=0.15)


# --- A/B testing -----------------------------------------------------------------


def test_identical_arms_degenerate_not_significant():
    result = ab_test([4, 4, 4], [4, 4, 4])
    assert result.degenerate
    assert not result.significant
    assert result.p_value is None


def test_ab_example_case():
    result = ab_test([5, 4, 5, 4], [2, 3, 2, 3])
    assert result.t_stat == pytest.approx(4.899, abs=1e-3)
    assert result.p_value == pytest.approx(0.003, abs=2e-3)
    assert result.significant


def test_ab_symmetry():
    a = [4.1, 3.5, 4.4, 3.9, 4.6]
    b = [3.2, 3.8, 3.1, 3.6, 3.3]
    left = ab_test(a, b)
    right = ab_test(b, a)
    assert left.p_value == pytest.approx(right.p_value, abs=1e-12)
    assert left.mean_a - left.mean_b == pytest.approx(-(right.mean_a - right.mean_b))


def test_ab_small_arm_degenerate():
    assert ab_test([4.0], [3.0, 3.5]).degenerate


def test_ab_close_to_permutation_oracle():
    # Balanced normal arms: the regime where the t reference distribution and
    # the permutation null coincide, so 0.01 sits above the 10k-resample noise.
    rng = random.Random(1)
    for trial in range(12):
        n = rng.randint(60, 150)
        shift = rng.uniform(0.1, 0.6)
        arm_a = [rng.gauss(3.5, 0.6) for _ in range(n)]
        arm_b = [rng.gauss(3.5 + shift, 0.6) for _ in range(n)]
        result = ab_test(arm_a, arm_b)
        oracle = permutation_p_value(arm_a, arm_b, resamples=10_000, seed=trial)
        assert result.p_value == pytest.approx(oracle, abs=0.01)
        assert result.significant == (result.p_value < 0.10)


def test_planted_means_reported_exactly():
    # Synthetic log built to hit the target means exactly.
    fact = [3.59 + d for d in (-0.5, 0.5, -0.25, 0.25, 0.0)]
    opinion = [3.73 + d for d in (-0.4, 0.4, -0.2, 0.2, 0.0)]
    result = ab_test(fact, opinion)
    assert result.mean_a == pytest.approx(3.59, abs=1e-12)
    assert result.mean_b == pytest.approx(3.73, abs=1e-12)
    table = render_ab_table("fact", "opinion", result)
    assert "3.59" in table and "3.73" in table


# --- rolling averages -------------------------------------------------------------


def test_rolling_constant_series():
    daily = [(f"2020-04-{day:02d}", 3.5, 10) for day in range(1, 15)]
    rolling = rolling_average(daily, 7)
    assert all(value == pytest.approx(3.5) for _, value in rolling)


def test_rolling_single_day():
    assert rolling_average([("2020-04-01", 4.2, 7)], 7) == [("2020-04-01", pytest.approx(4.2))]


def test_rolling_weighted_mean():
    daily = [("2020-04-01", 4.0, 10), ("2020-04-03", 3.0, 30)]
    rolling = rolling_average(daily, 7)
    assert rolling[-1][1] == pytest.approx(3.25)


def test_rolling_window_excludes_old_days():
    daily = [("2020-04-01", 5.0, 10), ("2020-04-20", 3.0, 10)]
    rolling = rolling_average(daily, 7)
    assert rolling[-1][1] == pytest.approx(3.0)


def test_rolling_requires_sorted_dates():
    with pytest.raises(ValueError):
        rolling_average([("2020-04-02", 4.0, 1), ("2020-04-01", 4.0, 1)], 7)


def test_rolling_invariant_to_batch_split():
    merged = [("2020-04-01", 4.0, 10), ("2020-04-02", 3.0, 20)]
    # The same day's traffic split into two batches, recombined via daily_means.
    records = (
        [record(f"a{i}", 4.0, date="2020-04-01") for i in range(10)]
        + [record(f"b{i}", 3.0, date="2020-04-02") for i in range(20)]
    )
    assert rolling_average(daily_means(records), 7) == rolling_average(merged, 7)


def test_daily_means_aggregates_by_date():
    records = [
        record("a", 4.0, date="2020-04-02"),
        record("b", 2.0, date="2020-04-02"),
        record("c", 5.0, date="2020-04-01"),
    ]
    assert daily_means(records) == [("2020-04-01", 5.0, 1), ("2020-04-02", 3.0, 2)]


# --- log IO and report formats -------------------------------------------------------


def test_load_records_dedupes_last_rating_wins():
    lines = [
        json.dumps(record_to_dict(record("c1", 3.0))),
        json.dumps(record_to_dict(record("c1", 4.0))),
        json.dumps(record_to_dict(record("c2", 5.0))),
    ]
    records = load_records("\n".join(lines))
    ratings = {r.conversation_id: r.rating for r in records}
    assert ratings == {"c1": 4.0, "c2": 5.0}


def test_load_records_reports_bad_line():
    with pytest.raises(ValueError, match="line 2"):
        load_records('{"conversation_id": "a"}\nnot json\n')


def test_rating_bounds_validated():
    with pytest.raises(ValueError):
        record("x", 5.5)


def test_components_report_table_format():
    records = [record("a", 4.0), record("b", 5.0, components=("covid", "pets"))]
    rows = components_report(records)
    table = render_components_table(rows)
    lines = table.splitlines()
    assert lines[0].split() == ["component", "n", "mean", "ci80_low", "ci80_high"]
    assert len(lines) == 2 + len(rows)


def test_rolling_csv_shape():
    records = [record("a", 4.0, date="2020-04-01"), record("b", 3.0, date="2020-04-02")]
    csv = rolling_csv(daily_means(records))
    lines = csv.splitlines()
    assert lines[0] == "date,daily_mean,rolling_mean"
    assert lines[1].startswith("2020-04-01,4.0000,")

"""Conversation-log analytics: component-conditioned ratings with confidence
intervals, two-arm experiments, turn filtering, and rolling averages.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta

from scipy.stats import t as t_dist

Z_80 = 1.2816  # two-sided 80% normal quantile
SIGNIFICANCE_LEVEL = 0.10
DEFAULT_MIN_TURNS = 3
ROLLING_WINDOW_DAYS = 7


@dataclass
class ConversationRecord:
    conversation_id: str
    user_id: str = ""
    rating: float | None = None
    turn_count: int = 0
    components: set[str] = field(default_factory=set)
    variant: str | None = None
    date: str = ""  # ISO yyyy-mm-dd

    def __post_init__(self):
        if self.rating is not None and not (1.0 <= self.rating <= 5.0):
            raise ValueError(f"rating out of range: {self.rating}")
        if self.turn_count < 0:
            raise ValueError("turn_count must be non-negative")


def record_from_dict(doc: dict) -> ConversationRecord:
    return ConversationRecord(
        conversation_id=doc["conversation_id"],
        user_id=doc.get("user_id", ""),
        rating=doc.get("rating"),
        turn_count=doc.get("turn_count", 0),
        components=set(doc.get("components", [])),
        variant=doc.get("variant"),
        date=doc.get("date", ""),
    )


def record_to_dict(record: ConversationRecord) -> dict:
    return {
        "conversation_id": record.conversation_id,
        "user_id": record.user_id,
        "rating": record.rating,
        "turn_count": record.turn_count,
        "components": sorted(record.components),
        "variant": record.variant,
        "date": record.date,
    }


def load_records(text: str, *, dedupe: bool = True) -> list[ConversationRecord]:
    """Parse newline-delimited JSON records; re-rated conversations keep the
    last record only."""
    records: list[ConversationRecord] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            records.append(record_from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise ValueError(f"bad log record on line {lineno}: {exc}") from exc
    if not dedupe:
        return records
    by_id: dict[str, ConversationRecord] = {}
    for record in records:
        by_id[record.conversation_id] = record
    return list(by_id.values())


def filter_min_turns(
    records: list[ConversationRecord], min_exclusive: int = DEFAULT_MIN_TURNS
) -> list[ConversationRecord]:
    """Keep conversations with strictly more than `min_exclusive` turns."""
    return [r for r in records if r.turn_count > min_exclusive]


@dataclass
class ComponentRating:
    component: str
    n: int
    mean: float | None
    ci80_low: float | None
    ci80_high: float | None
    degenerate: bool = False  # n == 1: spread undefined, no interval

    @property
    def empty(self) -> bool:
        return self.n == 0


def component_rating(records: list[ConversationRecord], component: str) -> ComponentRating:
    """Mean rating over conversations containing the component, with an 80% CI
    (mean +/- 1.2816 * s / sqrt(n), s the sample standard deviation)."""
    ratings = [r.rating for r in records if component in r.components and r.rating is not None]
    n = len(ratings)
    if n == 0:
        return ComponentRating(component, 0, None, None, None)
    mean = sum(ratings) / n
    if n == 1:
        return ComponentRating(component, 1, mean, None, None, degenerate=True)
    variance = sum((r - mean) ** 2 for r in ratings) / (n - 1)
    half_width = Z_80 * math.sqrt(variance) / math.sqrt(n)
    return ComponentRating(component, n, mean, mean - half_width, mean + half_width)


@dataclass
class AbTestResult:
    mean_a: float
    mean_b: float
    n_a: int
    n_b: int
    t_stat: float | None
    p_value: float | None
    significant: bool
    degenerate: bool = False


def ab_test(arm_a: list[float], arm_b: list[float]) -> AbTestResult:
    """Two-tailed Welch t-test between two rating arms; significance at p < 0.10.

    Arms smaller than 2 or with zero pooled variance are flagged degenerate and
    never significant; no p-value is fabricated for them.
    """
    n_a, n_b = len(arm_a), len(arm_b)
    mean_a = sum(arm_a) / n_a if n_a else float("nan")
    mean_b = sum(arm_b) / n_b if n_b else float("nan")
    if n_a < 2 or n_b < 2:
        return AbTestResult(mean_a, mean_b, n_a, n_b, None, None, False, degenerate=True)
    var_a = sum((x - mean_a) ** 2 for x in arm_a) / (n_a - 1)
    var_b = sum((x - mean_b) ** 2 for x in arm_b) / (n_b - 1)
    if var_a == 0.0 and var_b == 0.0:
        return AbTestResult(mean_a, mean_b, n_a, n_b, None, None, False, degenerate=True)
    se_sq = var_a / n_a + var_b / n_b
    t_stat = (mean_a - mean_b) / math.sqrt(se_sq)
    df = se_sq**2 / (
        (var_a / n_a) ** 2 / (n_a - 1) + (var_b / n_b) ** 2 / (n_b - 1)
    )
    p_value = 2.0 * float(t_dist.sf(abs(t_stat), df))
    return AbTestResult(
        mean_a, mean_b, n_a, n_b, t_stat, p_value, p_value < SIGNIFICANCE_LEVEL
    )


def daily_means(records: list[ConversationRecord]) -> list[tuple[str, float, int]]:
    """(date, mean rating, n) per day, ascending, over rated records."""
    by_day: dict[str, list[float]] = {}
    for record in records:
        if record.rating is None or not record.date:
            continue
        by_day.setdefault(record.date, []).append(record.rating)
    out = []
    for day in sorted(by_day):
        ratings = by_day[day]
        out.append((day, sum(ratings) / len(ratings), len(ratings)))
    return out


def rolling_average(
    daily: list[tuple[str, float, int]], window: int = ROLLING_WINDOW_DAYS
) -> list[tuple[str, float]]:
    """n-weighted mean over the trailing `window` calendar days (inclusive)."""
    parsed = [(date.fromisoformat(day), mean, n) for day, mean, n in daily]
    if any(parsed[i][0] > parsed[i + 1][0] for i in range(len(parsed) - 1)):
        raise ValueError("daily series must be sorted by date ascending")
    out: list[tuple[str, float]] = []
    for day, _, _ in parsed:
        lo = day - timedelta(days=window - 1)
        total = 0.0
        count = 0
        for other_day, mean, n in parsed:
            if lo <= other_day <= day:
                total += mean * n
                count += n
        if count:
            out.append((day.isoformat(), total / count))
    return out


# --- report rendering ---------------------------------------------------------


def components_report(records: list[ConversationRecord]) -> list[ComponentRating]:
    tags = sorted({c for r in records for c in r.components})
    return [component_rating(records, tag) for tag in tags]


def render_components_table(rows: list[ComponentRating]) -> str:
    header = f"{'component':<20} {'n':>5} {'mean':>6} {'ci80_low':>9} {'ci80_high':>10}"
    lines = [header, "-" * len(header)]
    for row in rows:
        mean = f"{row.mean:.2f}" if row.mean is not None else "-"
        low = f"{row.ci80_low:.3f}" if row.ci80_low is not None else "-"
        high = f"{row.ci80_high:.3f}" if row.ci80_high is not None else "-"
        lines.append(f"{row.component:<20} {row.n:>5} {mean:>6} {low:>9} {high:>10}")
    return "\n".join(lines)


def render_ab_table(label_a: str, label_b: str, result: AbTestResult) -> str:
    star = "*" if result.significant else ""
    lines = [
        f"{'arm':<12} {'n':>5} {'mean':>6}",
        "-" * 25,
        f"{label_a:<12} {result.n_a:>5} {result.mean_a:>6.2f}",
        f"{label_b:<12} {result.n_b:>5} {result.mean_b:>6.2f}{star}",
    ]
    if result.degenerate:
        lines.append("degenerate: insufficient data or zero variance")
    else:
        lines.append(f"p = {result.p_value:.4f} ({'' if result.significant else 'not '}significant at p < {SIGNIFICANCE_LEVEL})")
    return "\n".join(lines)


def rolling_csv(daily: list[tuple[str, float, int]], window: int = ROLLING_WINDOW_DAYS) -> str:
    rolling = dict(rolling_average(daily, window))
    lines = ["date,daily_mean,rolling_mean"]
    for day, mean, _ in daily:
        lines.append(f"{day},{mean:.4f},{rolling[day]:.4f}")
    return "\n".join(lines)

"""Three-test skill-vs-chance battery and quantile summaries.

Persistence: Pearson correlation of a per-player skill variable across two
disjoint time periods, with a seeded bootstrap CI. Learning: least-squares
power-law and exponential fits to the cohort-mean metric across experience
bins. Normality: a QQ comparison of standardized per-player win rates
against standard normal quantiles. classify() combines the three into a
verdict, with every threshold recorded in the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import curve_fit

from .metrics import (
    QuantilePoint,
    SkillSeries,
    percentile_position,
    rank_average,
    theoretical_quantile,
)
from .records import Outcome, PlayerTimeline


class StatTestError(ValueError):
    pass


class LengthMismatch(StatTestError):
    pass


class ZeroVariance(StatTestError):
    pass


class InsufficientPlayers(StatTestError):
    pass


class TooFewPlayers(StatTestError):
    pass


class FitDiverged(StatTestError):
    pass


DEFAULT_THRESHOLDS: Dict[str, float] = {
    "r_min": 0.3,            # minimum persistence correlation for skill
    "threshold_r2": 0.98,    # QQ linearity floor for normal-consistency
    "threshold_dev": 0.15,   # QQ max absolute deviation ceiling
    "trend_epsilon": 0.01,   # relative change below which a trend is Flat
}

IMPROVING = "Improving"
FLAT = "Flat"
WORSENING = "Worsening"

SKILL_DOMINANT = "SkillDominant"
CHANCE_DOMINANT = "ChanceDominant"
INCONCLUSIVE = "Inconclusive"


# ---------------------------------------------------------------------------
# Per-window metric functions. Each maps a slice of outcomes to a value,
# or None when the metric is undefined on that slice (e.g. no losses).

def _win_rate(outcomes: Sequence[Outcome]) -> Optional[float]:
    return sum(1 for o in outcomes if o.won) / len(outcomes)


def _bb_per_100(outcomes: Sequence[Outcome]) -> Optional[float]:
    return 100.0 * sum(o.value_delta for o in outcomes) / len(outcomes)


def _avg_points_lost_losing(outcomes: Sequence[Outcome]) -> Optional[float]:
    losses = [-o.value_delta for o in outcomes if not o.won]
    return sum(losses) / len(losses) if losses else None


def _avg_loss_magnitude(outcomes: Sequence[Outcome]) -> Optional[float]:
    losses = [-o.value_delta for o in outcomes if o.value_delta < 0]
    return sum(losses) / len(losses) if losses else None


def _tightness(outcomes: Sequence[Outcome]) -> Optional[float]:
    flags = [o.voluntary_entry for o in outcomes]
    if any(f is None for f in flags):
        return None
    return 1.0 - sum(1 for f in flags if f) / len(flags)


def _net_positive(outcomes: Sequence[Outcome]) -> Optional[float]:
    return 1.0 if sum(o.value_delta for o in outcomes) > 0 else 0.0


METRICS: Dict[str, Callable[[Sequence[Outcome]], Optional[float]]] = {
    "win_rate": _win_rate,
    "bb_per_100": _bb_per_100,
    "avg_points_lost_losing": _avg_points_lost_losing,
    "avg_blind_lost": _avg_loss_magnitude,
    "tightness": _tightness,
    "net_positive_share": _net_positive,
}

# +1: larger is better (Improving when rising); -1: smaller is better.
METRIC_POLARITY: Dict[str, int] = {
    "win_rate": +1,
    "bb_per_100": +1,
    "avg_points_lost_losing": -1,
    "avg_blind_lost": -1,
    "tightness": +1,
    "net_positive_share": +1,
}


@dataclass(frozen=True)
class PersistenceResult:
    r: float
    n_players: int
    period_a: Tuple[int, int]  # (start_ms, end_ms) of observed period A
    period_b: Tuple[int, int]
    min_games: int
    bootstrap_ci95: Tuple[float, float]
    metric: str = "win_rate"
    pairs: Tuple[Tuple[str, float, float], ...] = ()

    def ci_covers_zero(self) -> bool:
        lo, hi = self.bootstrap_ci95
        return lo <= 0.0 <= hi

    def as_dict(self) -> dict:
        return {
            "r": self.r,
            "n_players": self.n_players,
            "period_a": list(self.period_a),
            "period_b": list(self.period_b),
            "min_games": self.min_games,
            "bootstrap_ci95": list(self.bootstrap_ci95),
            "metric": self.metric,
        }


@dataclass(frozen=True)
class CurveFitResult:
    a: float
    b: float
    alpha: float
    sse: float
    aic: float

    def as_dict(self) -> dict:
        return {"A": self.a, "B": self.b, "alpha": self.alpha,
                "sse": self.sse, "aic": self.aic}


@dataclass(frozen=True)
class LearningCurveResult:
    binned: SkillSeries
    power_fit: Optional[CurveFitResult]
    exp_fit: Optional[CurveFitResult]
    preferred: str  # "Power" or "Exponential"
    trend_direction: str
    fit_errors: Tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "binned": [list(p) for p in self.binned.points],
            "metric": self.binned.metric_name,
            "power_fit": self.power_fit.as_dict() if self.power_fit else None,
            "exp_fit": self.exp_fit.as_dict() if self.exp_fit else None,
            "preferred": self.preferred,
            "trend_direction": self.trend_direction,
            "fit_errors": list(self.fit_errors),
        }


@dataclass(frozen=True)
class QQResult:
    points: Tuple[QuantilePoint, ...]
    r_squared: float
    max_abs_deviation: float
    normal_consistent: bool
    cohort_mean: float
    cohort_sd: float

    def as_dict(self) -> dict:
        return {
            "n": len(self.points),
            "r_squared": self.r_squared,
            "max_abs_deviation": self.max_abs_deviation,
            "normal_consistent": self.normal_consistent,
            "cohort_mean": self.cohort_mean,
            "cohort_sd": self.cohort_sd,
        }


@dataclass(frozen=True)
class QuantileSummary:
    groups: Tuple[Tuple[int, float, float], ...]  # (cumulative n, mean, std)
    k: int
    ordering: str = "experience"

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "ordering": self.ordering,
            "groups": [
                {"cumulative_players": n, "mean_win_rate": m, "std_win_rate": s}
                for n, m, s in self.groups
            ],
        }


@dataclass(frozen=True)
class VerdictReport:
    persistence: PersistenceResult
    learning: LearningCurveResult
    normality: QQResult
    quantiles: Optional[QuantileSummary]
    verdict: str
    thresholds_used: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "persistence": self.persistence.as_dict(),
            "learning": self.learning.as_dict(),
            "normality": self.normality.as_dict(),
            "quantiles": self.quantiles.as_dict() if self.quantiles else None,
            "verdict": self.verdict,
            "thresholds_used": dict(sorted(self.thresholds_used.items())),
        }


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(xs) != len(ys):
        raise LengthMismatch(f"lengths differ: {len(xs)} vs {len(ys)}")
    if len(xs) < 3:
        raise StatTestError("need at least 3 pairs")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(np.dot(dx, dx)))
    sy = float(np.sqrt(np.dot(dy, dy)))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVariance("an argument has zero variance")
    r = float(np.dot(dx, dy) / (sx * sy))
    return max(-1.0, min(1.0, r))


def _month_start_ms(ms: int) -> int:
    from datetime import datetime, timezone

    dt = datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc)
    return int(dt.replace(day=1, hour=0, minute=0, second=0, microsecond=0)
               .timestamp() * 1000)


def _next_month_ms(ms: int) -> int:
    from datetime import datetime, timezone

    dt = datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc)
    y, m = (dt.year + 1, 1) if dt.month == 12 else (dt.year, dt.month + 1)
    return int(dt.replace(year=y, month=m, day=1, hour=0, minute=0,
                          second=0, microsecond=0).timestamp() * 1000)


def resolve_split(
    timelines: Mapping[str, PlayerTimeline],
    split: Union[int, str] = "month",
) -> int:
    """Split timestamp (ms). "month": the calendar-month boundary nearest
    the midpoint of the observed range; "midpoint": the raw midpoint;
    an int is used verbatim."""
    if isinstance(split, int):
        return split
    stamps = [o.timestamp for tl in timelines.values() for o in tl.outcomes]
    if not stamps:
        raise InsufficientPlayers("no outcomes to split")
    lo, hi = min(stamps), max(stamps)
    mid = (lo + hi) // 2
    if split == "midpoint":
        return mid
    if split == "month":
        floor = _month_start_ms(mid)
        ceil = _next_month_ms(mid)
        snapped = floor if mid - floor <= ceil - mid else ceil
        if lo < snapped <= hi:
            return snapped
        return mid
    raise ValueError(f"unknown split rule: {split!r}")


def persistence_test(
    timelines: Mapping[str, PlayerTimeline],
    split: Union[int, str] = "month",
    metric: str = "win_rate",
    min_games: int = 30,
    n_boot: int = 1000,
    seed: int = 0,
) -> PersistenceResult:
    """Correlate a per-player skill variable across the two periods either
    side of the split, over players with >= min_games in each period."""
    metric_fn = METRICS[metric]
    split_ms = resolve_split(timelines, split)

    pairs: List[Tuple[str, float, float]] = []
    a_lo = b_lo = None
    a_hi = b_hi = None
    for user_id in sorted(timelines):
        tl = timelines[user_id]
        part_a = [o for o in tl.outcomes if o.timestamp < split_ms]
        part_b = [o for o in tl.outcomes if o.timestamp >= split_ms]
        if len(part_a) < min_games or len(part_b) < min_games:
            continue
        va = metric_fn(part_a)
        vb = metric_fn(part_b)
        if va is None or vb is None:
            continue
        pairs.append((user_id, va, vb))
        ta = [o.timestamp for o in part_a]
        tb = [o.timestamp for o in part_b]
        a_lo = min(ta) if a_lo is None else min(a_lo, min(ta))
        a_hi = max(ta) if a_hi is None else max(a_hi, max(ta))
        b_lo = min(tb) if b_lo is None else min(b_lo, min(tb))
        b_hi = max(tb) if b_hi is None else max(b_hi, max(tb))

    if len(pairs) < 3:
        raise InsufficientPlayers(
            f"only {len(pairs)} players qualify with >= {min_games} games "
            f"in both periods"
        )
    xs = np.array([p[1] for p in pairs])
    ys = np.array([p[2] for p in pairs])
    r = pearson(xs, ys)

    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    n = len(pairs)
    idx = rng.integers(0, n, size=(n_boot, n))
    bx = xs[idx]
    by = ys[idx]
    bx = bx - bx.mean(axis=1, keepdims=True)
    by = by - by.mean(axis=1, keepdims=True)
    denom = np.sqrt((bx * bx).sum(axis=1) * (by * by).sum(axis=1))
    with np.errstate(invalid="ignore", divide="ignore"):
        rs = (bx * by).sum(axis=1) / denom
    rs = rs[np.isfinite(rs)]
    lo, hi = (float(np.quantile(rs, 0.025)), float(np.quantile(rs, 0.975)))
    lo, hi = min(lo, r), max(hi, r)

    return PersistenceResult(
        r=r,
        n_players=n,
        period_a=(a_lo, a_hi),
        period_b=(b_lo, b_hi),
        min_games=min_games,
        bootstrap_ci95=(lo, hi),
        metric=metric,
        pairs=tuple(pairs),
    )


def _power_model(x, a, b, alpha):
    return a + b * np.power(x, -alpha)


def _exp_model(x, a, b, alpha):
    return a + b * np.exp(-alpha * x)


def _aic(sse: float, n: int, k: int = 3) -> float:
    return n * math.log(max(sse, 1e-300) / n) + 2 * k


def fit_power(xs: Sequence[float], ys: Sequence[float]) -> CurveFitResult:
    """Least squares for y = A + B*x^(-alpha), x >= 1."""
    return _fit(_power_model, xs, ys, log_x=True)


def fit_exponential(xs: Sequence[float], ys: Sequence[float]) -> CurveFitResult:
    """Least squares for y = A + B*exp(-alpha*x)."""
    return _fit(_exp_model, xs, ys, log_x=False)


def _fit(model, xs, ys, log_x: bool) -> CurveFitResult:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(x) < 4:
        raise FitDiverged("need at least 4 bins to fit a 3-parameter curve")
    spread = float(y.max() - y.min())
    if spread < 1e-12:
        # Constant series: both families degenerate to y = A.
        a = float(y.mean())
        sse = float(((y - a) ** 2).sum())
        return CurveFitResult(a, 0.0, 1.0, sse, _aic(sse, len(y)))

    # Asymptote guess slightly beyond the last value, in the trend direction.
    a0 = float(y[-1] + 0.1 * (y[-1] - y[0]))
    b0 = float(y[0] - a0)
    resid = np.abs(y - a0)
    resid = np.where(resid < 1e-12, 1e-12, resid)
    t = np.log(x) if log_x else x
    slope = np.polyfit(t, np.log(resid), 1)[0]
    alpha0 = float(min(max(-slope, 1e-3), 20.0))
    try:
        params, _ = curve_fit(
            model, x, y, p0=[a0, b0, alpha0],
            bounds=([-np.inf, -np.inf, 1e-8], [np.inf, np.inf, 50.0]),
            maxfev=20000,
        )
    except (RuntimeError, ValueError) as exc:
        raise FitDiverged(str(exc)) from exc
    yhat = model(x, *params)
    sse = float(((y - yhat) ** 2).sum())
    if not math.isfinite(sse):
        raise FitDiverged("non-finite residual")
    a, b, alpha = (float(v) for v in params)
    return CurveFitResult(a, b, alpha, sse, _aic(sse, len(y)))


def learning_curve_test(
    timelines: Mapping[str, PlayerTimeline],
    metric: str = "win_rate",
    bin_width: int = 10,
    trend_epsilon: float = DEFAULT_THRESHOLDS["trend_epsilon"],
) -> LearningCurveResult:
    """Cohort-mean metric per experience bin, with power/exponential fits.

    Bin b covers each player's games (b*w, (b+1)*w]; only players with the
    full bin contribute, and bins where the metric is undefined for every
    player emit no point.
    """
    if bin_width < 1:
        raise ValueError("bin_width must be >= 1")
    if not timelines:
        raise InsufficientPlayers("empty cohort")
    metric_fn = METRICS[metric]
    max_bins = max(len(tl.outcomes) for tl in timelines.values()) // bin_width
    points: List[Tuple[float, float]] = []
    for b in range(max_bins):
        vals = []
        for user_id in sorted(timelines):
            tl = timelines[user_id]
            if len(tl.outcomes) < (b + 1) * bin_width:
                continue
            v = metric_fn(tl.outcomes[b * bin_width : (b + 1) * bin_width])
            if v is not None:
                vals.append(v)
        if vals:
            points.append((b + 1, sum(vals) / len(vals)))
    if not points:
        raise InsufficientPlayers("no complete experience bins")
    binned = SkillSeries(metric, tuple(points), "cohort")

    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    fit_errors: List[str] = []
    power = expo = None
    try:
        power = fit_power(xs, ys)
    except FitDiverged as exc:
        fit_errors.append(f"power: {exc}")
    try:
        expo = fit_exponential(xs, ys)
    except FitDiverged as exc:
        fit_errors.append(f"exponential: {exc}")
    if power is None and expo is None:
        raise FitDiverged("; ".join(fit_errors))
    if power is not None and (expo is None or power.aic <= expo.aic):
        preferred, best, model = "Power", power, _power_model
    else:
        preferred, best, model = "Exponential", expo, _exp_model

    y_first = float(model(np.array([xs[0]]), best.a, best.b, best.alpha)[0])
    y_last = float(model(np.array([xs[-1]]), best.a, best.b, best.alpha)[0])
    scale = max(abs(sum(ys) / len(ys)), 1e-12)
    rel_change = (y_last - y_first) / scale
    polarity = METRIC_POLARITY.get(metric, +1)
    # A constant model beating the curve on AIC means the apparent trend is
    # noise, regardless of the fitted endpoints.
    y_arr = np.asarray(ys)
    const_sse = float(((y_arr - y_arr.mean()) ** 2).sum())
    const_wins = _aic(const_sse, len(ys), k=1) <= best.aic
    if const_wins or abs(rel_change) < trend_epsilon:
        trend = FLAT
    elif rel_change * polarity > 0:
        trend = IMPROVING
    else:
        trend = WORSENING

    return LearningCurveResult(
        binned=binned,
        power_fit=power,
        exp_fit=expo,
        preferred=preferred,
        trend_direction=trend,
        fit_errors=tuple(fit_errors),
    )


def qq_test(
    win_rates: Sequence[float],
    threshold_r2: float = DEFAULT_THRESHOLDS["threshold_r2"],
    threshold_dev: float = DEFAULT_THRESHOLDS["threshold_dev"],
    min_players: int = 20,
) -> QQResult:
    """QQ comparison of standardized values against normal quantiles.

    Percentiles come from the ordinal position (i - 0.5)/n on the sorted
    values, so the sequence is strictly increasing and pairwise symmetric;
    tie-averaged ranks are carried alongside on each point.
    """
    n = len(win_rates)
    if n < min_players:
        raise TooFewPlayers(f"need >= {min_players} players, got {n}")
    values = sorted(float(v) for v in win_rates)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    sd = math.sqrt(var)
    if sd == 0.0:
        raise ZeroVariance("all win rates identical")
    ranks = rank_average(values)
    points = []
    for i, v in enumerate(values, start=1):
        p = percentile_position(i, n)
        points.append(QuantilePoint(
            rank=ranks[i - 1],
            percentile=p,
            theoretical_q=theoretical_quantile(p),
            observed_q=(v - mean) / sd,
        ))
    theo = [pt.theoretical_q for pt in points]
    obs = [pt.observed_q for pt in points]
    r_squared = pearson(theo, obs) ** 2
    max_dev = max(abs(o - t) for o, t in zip(obs, theo))
    consistent = r_squared >= threshold_r2 and max_dev <= threshold_dev
    return QQResult(
        points=tuple(points),
        r_squared=r_squared,
        max_abs_deviation=max_dev,
        normal_consistent=consistent,
        cohort_mean=mean,
        cohort_sd=sd,
    )


def quantile_summary(
    players: Sequence[Tuple[int, float]],
    k: int,
    ordering: str = "experience",
) -> QuantileSummary:
    """Cumulative-prefix summary of win rates over players ordered by
    experience (games played) ascending; group j is the first
    ceil(j*n/k) players."""
    n = len(players)
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise TooFewPlayers(f"need >= {k} players, got {n}")
    if ordering == "experience":
        ordered = sorted(players, key=lambda p: p[0])
    elif ordering == "win_rate":
        ordered = sorted(players, key=lambda p: p[1])
    elif ordering == "input":
        ordered = list(players)
    else:
        raise ValueError(f"unknown ordering: {ordering!r}")
    rates = [p[1] for p in ordered]
    groups = []
    for j in range(1, k + 1):
        size = math.ceil(j * n / k)
        chunk = rates[:size]
        mean = sum(chunk) / size
        if size > 1:
            std = math.sqrt(sum((v - mean) ** 2 for v in chunk) / (size - 1))
        else:
            std = 0.0
        groups.append((size, mean, std))
    return QuantileSummary(groups=tuple(groups), k=k, ordering=ordering)


def classify(
    persistence: PersistenceResult,
    learning: LearningCurveResult,
    normality: QQResult,
    thresholds: Optional[Mapping[str, float]] = None,
    quantiles: Optional[QuantileSummary] = None,
) -> VerdictReport:
    """Combine the three tests into a verdict.

    SkillDominant: persistent correlation at or above r_min with a CI
    excluding zero, an improving learning trend, and win rates deviating
    from normal. ChanceDominant: no persistence (CI covers zero) and a
    flat trend. Anything else is Inconclusive.
    """
    th = dict(DEFAULT_THRESHOLDS)
    if thresholds:
        th.update(thresholds)
    covers_zero = persistence.ci_covers_zero()
    if (
        persistence.r >= th["r_min"]
        and not covers_zero
        and learning.trend_direction == IMPROVING
        and not normality.normal_consistent
    ):
        verdict = SKILL_DOMINANT
    elif covers_zero and learning.trend_direction == FLAT:
        verdict = CHANCE_DOMINANT
    else:
        verdict = INCONCLUSIVE
    return VerdictReport(
        persistence=persistence,
        learning=learning,
        normality=normality,
        quantiles=quantiles,
        verdict=verdict,
        thresholds_used=th,
    )

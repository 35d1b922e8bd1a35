"""Skill variables and derived statistics computed from player timelines.

Covers the per-player trajectories (cumulative win probability, binned
blind amounts won/lost, tightness, BB/100), the rummy skill variables,
and the quantile machinery (tie-averaged ranks, percentile positions,
inverse normal CDF, standardization) that feeds the QQ normality test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .records import Outcome, PlayerTimeline


class MetricError(ValueError):
    pass


class EmptyTimeline(MetricError):
    pass


class NotPoker(MetricError):
    pass


class EmptyWindow(MetricError):
    pass


class MissingVoluntaryEntry(MetricError):
    pass


class NoLosingDeals(MetricError):
    pass


class NoWinningDeals(MetricError):
    pass


class ZeroSd(MetricError):
    pass


class OutOfRange(MetricError):
    pass


class DomainError(MetricError):
    pass


WON = "Won"
LOST = "Lost"


@dataclass(frozen=True)
class SkillSeries:
    """A named metric trajectory: (x, y) points with strictly increasing x."""

    metric_name: str
    points: Tuple[Tuple[float, float], ...]
    player_scope: str  # a user_id or "cohort"

    def __post_init__(self):
        xs = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("series x values must be strictly increasing")
        if any(not math.isfinite(p[1]) for p in self.points):
            raise ValueError("series y values must be finite")


@dataclass(frozen=True)
class QuantilePoint:
    rank: float          # tie-averaged rank of the value
    percentile: float    # (position - 0.5) / n, strictly increasing
    theoretical_q: float
    observed_q: float


def _require_outcomes(timeline: PlayerTimeline) -> Sequence[Outcome]:
    if not timeline.outcomes:
        raise EmptyTimeline(f"player {timeline.user_id} has no outcomes")
    return timeline.outcomes


def win_probability_series(timeline: PlayerTimeline) -> SkillSeries:
    """Cumulative wins/games after each game, k = 1..n."""
    outcomes = _require_outcomes(timeline)
    points = []
    wins = 0
    for k, o in enumerate(outcomes, start=1):
        wins += 1 if o.won else 0
        points.append((k, wins / k))
    return SkillSeries("WinProbability", tuple(points), timeline.user_id)


def avg_blind_amount(
    timeline: PlayerTimeline, side: str, bin_width: int
) -> SkillSeries:
    """Per-bin mean big blinds won (over winning hands) or lost (as a
    positive magnitude over losing hands). Bins with no qualifying hands
    emit no point rather than a zero."""
    if side not in (WON, LOST):
        raise ValueError(f"side must be {WON!r} or {LOST!r}")
    if bin_width < 1:
        raise ValueError("bin_width must be >= 1")
    outcomes = _require_outcomes(timeline)
    if any(o.voluntary_entry is None for o in outcomes):
        raise NotPoker("blind amounts are defined for poker timelines only")
    points = []
    for b in range(0, len(outcomes), bin_width):
        chunk = outcomes[b : b + bin_width]
        if side == WON:
            vals = [o.value_delta for o in chunk if o.value_delta > 0]
        else:
            vals = [-o.value_delta for o in chunk if o.value_delta < 0]
        if vals:
            points.append((b // bin_width + 1, sum(vals) / len(vals)))
    name = "AvgBlindWon" if side == WON else "AvgBlindLost"
    return SkillSeries(name, tuple(points), timeline.user_id)


def bb_per_100(
    timeline: PlayerTimeline, window: Optional[Tuple[int, int]] = None
) -> float:
    """Average big blinds won per 100 hands over the window (default: all)."""
    outcomes = _require_outcomes(timeline)
    if any(o.voluntary_entry is None for o in outcomes):
        raise NotPoker("BB/100 is defined for poker timelines only")
    if window is not None:
        start, stop = window
        if not (0 <= start < stop <= len(outcomes)):
            raise EmptyWindow(f"window {window} out of bounds for n={len(outcomes)}")
        outcomes = outcomes[start:stop]
    if not outcomes:
        raise EmptyWindow("window contains no hands")
    return 100.0 * sum(o.value_delta for o in outcomes) / len(outcomes)


def tightness(
    timeline: PlayerTimeline, window: Optional[Tuple[int, int]] = None
) -> float:
    """1 - VPIP: the fraction of hands the player stayed out of voluntarily."""
    outcomes = _require_outcomes(timeline)
    if window is not None:
        start, stop = window
        if not (0 <= start < stop <= len(outcomes)):
            raise EmptyWindow(f"window {window} out of bounds for n={len(outcomes)}")
        outcomes = outcomes[start:stop]
    flags = [o.voluntary_entry for o in outcomes]
    if any(f is None for f in flags):
        raise MissingVoluntaryEntry("timeline lacks voluntary_entry flags")
    vpip = sum(1 for f in flags if f) / len(flags)
    return 1.0 - vpip


def rummy_skill_variables(
    timeline: PlayerTimeline,
    opponents_view: Mapping[str, Sequence[float]],
) -> Tuple[float, float, float]:
    """(win_rate, avg_points_lost_losing, avg_points_lost_by_opponent).

    opponents_view maps a deal key to the loss points conceded by the
    player's opponents in that deal; only deals the player won contribute
    to the opponent-side mean.
    """
    outcomes = _require_outcomes(timeline)
    n = len(outcomes)
    wins = [o for o in outcomes if o.won]
    losses = [o for o in outcomes if not o.won]
    win_rate = len(wins) / n
    if not losses:
        raise NoLosingDeals(f"player {timeline.user_id} has no losing deals")
    avg_lost = sum(-o.value_delta for o in losses) / len(losses)
    opp_points: List[float] = []
    for o in wins:
        opp_points.extend(opponents_view.get(o.key, ()))
    if not opp_points:
        raise NoWinningDeals(
            f"player {timeline.user_id} has no winning deals with opponent data"
        )
    avg_opp = sum(opp_points) / len(opp_points)
    return win_rate, avg_lost, avg_opp


def opponent_loss_view(records, user_id: str) -> Dict[str, List[float]]:
    """Build the opponents_view for one player from a full rummy record set."""
    view: Dict[str, List[float]] = {}
    for rec in records:
        if rec.user_id != user_id and not rec.is_winner:
            view.setdefault(rec.deal_id, []).append(float(rec.loss_points))
    return view


def rank_average(values: Sequence[float]) -> List[float]:
    """Ascending ranks 1..n; tied values get the mean of their positions."""
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j + 2) / 2.0  # mean of 1-based positions i+1..j+1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def percentile_position(rank: float, n: int) -> float:
    """(rank - 0.5) / n, the plotting position for rank within n values."""
    if not (1 <= rank <= n):
        raise OutOfRange(f"rank {rank} outside [1, {n}]")
    return (rank - 0.5) / n


_SQRT2 = math.sqrt(2.0)

# Acklam's rational approximation coefficients for the inverse normal CDF.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / _SQRT2)


def _normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def theoretical_quantile(p: float) -> float:
    """Inverse standard normal CDF, |error| <= 1e-9 on (0, 1).

    Rational initial estimate refined by two Halley steps against an
    erfc-based CDF; the refinement drives the residual to machine level.
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must be in (0, 1), got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((( _C[0]*q + _C[1])*q + _C[2])*q + _C[3])*q + _C[4])*q + _C[5]) / \
            (((( _D[0]*q + _D[1])*q + _D[2])*q + _D[3])*q + 1.0)
    elif p > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((( _C[0]*q + _C[1])*q + _C[2])*q + _C[3])*q + _C[4])*q + _C[5]) / \
             (((( _D[0]*q + _D[1])*q + _D[2])*q + _D[3])*q + 1.0)
    else:
        q = p - 0.5
        r = q * q
        x = ((((( _A[0]*r + _A[1])*r + _A[2])*r + _A[3])*r + _A[4])*r + _A[5])*q / \
            ((((( _B[0]*r + _B[1])*r + _B[2])*r + _B[3])*r + _B[4])*r + 1.0)
    for _ in range(2):
        e = normal_cdf(x) - p
        u = e / _normal_pdf(x)
        x -= u / (1.0 + 0.5 * x * u)
    return x


def standardize(x: float, mean: float, sd: float) -> float:
    if sd <= 0:
        raise ZeroSd("standard deviation must be > 0")
    return (x - mean) / sd


def sample_mean_std(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and sample (n-1 denominator) standard deviation."""
    n = len(values)
    if n < 2:
        raise MetricError("need at least 2 values for a sample std")
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)

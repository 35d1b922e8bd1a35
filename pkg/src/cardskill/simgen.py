"""Synthetic poker/rummy log generator with planted ground truth.

Chance mode: every game's winner is uniform over the seated players.
Skill mode: player i has base skill s_i ~ Normal(0, skill_sd^2), plus a
learning increment that follows the configured power or exponential
curve of games played; the winner of each game is drawn with probability
proportional to exp(effective skill) among the seated players (sampled
via the Gumbel-argmax trick, which is exactly that softmax).

Output is byte-identical for a given config (seed included) across runs;
it round-trips the ingest CSV formats with zero rejected rows.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .records import (
    POKER_COLUMNS,
    RUMMY_COLUMNS,
    Outcome,
    PlayerTimeline,
    format_timestamp,
    parse_timestamp,
)

POKER = "poker"
RUMMY = "rummy"
CHANCE = "chance"
SKILL = "skill"
POWER = "power"
EXPONENTIAL = "exponential"

BASE_START = parse_timestamp("2022-12-01T00:00:00Z")
SPAN_MS = 62 * 86_400_000  # Dec 2022 + Jan 2023
GAME_DURATION_MS = 60_000


class ConfigInvalid(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


@dataclass(frozen=True)
class SimConfig:
    game: str = POKER
    table_size: int = 2
    n_players: int = 100
    games_per_player: int = 100
    mode: str = CHANCE
    skill_sd: float = 0.0
    learning_curve: str = POWER
    learning_b: float = 0.0
    learning_alpha: float = 0.5
    # rummy loss-points model: Normal(points_mu - points_skill_coeff * skill,
    # points_sd), rounded and clamped to points_cap
    points_mu: float = 40.0
    points_sd: float = 10.0
    points_skill_coeff: float = 10.0
    points_cap: Tuple[int, int] = (2, 80)
    value_per_point: float = 1.0
    # poker: VPIP interpolates start -> end over a player's experience
    vpip_start: float = 0.6
    vpip_end: float = 0.3
    big_blind: float = 2.0
    # experience heterogeneity knobs
    min_games_per_player: Optional[int] = None  # spread quotas min..games
    stagger_starts: bool = False  # offset players' first games in time
    skill_overrides: Optional[Tuple[float, ...]] = None
    seed: int = 0

    def validate(self) -> None:
        if self.game not in (POKER, RUMMY):
            raise ConfigInvalid("game", f"must be {POKER!r} or {RUMMY!r}")
        if self.table_size not in (2, 3, 6):
            raise ConfigInvalid("table_size", "must be 2, 3, or 6")
        if self.n_players < self.table_size:
            raise ConfigInvalid("n_players", "fewer players than one table")
        if self.games_per_player < 1:
            raise ConfigInvalid("games_per_player", "must be >= 1")
        if self.mode not in (CHANCE, SKILL):
            raise ConfigInvalid("mode", f"must be {CHANCE!r} or {SKILL!r}")
        if self.mode == CHANCE and (
            self.skill_sd != 0.0 or self.learning_b != 0.0
            or self.skill_overrides is not None
        ):
            raise ConfigInvalid(
                "mode", "chance mode requires skill_sd=0, learning_b=0, "
                "and no skill overrides"
            )
        if self.skill_sd < 0:
            raise ConfigInvalid("skill_sd", "must be >= 0")
        if self.learning_curve not in (POWER, EXPONENTIAL):
            raise ConfigInvalid("learning_curve",
                                f"must be {POWER!r} or {EXPONENTIAL!r}")
        if self.learning_alpha <= 0:
            raise ConfigInvalid("learning_alpha", "must be > 0")
        if not (0 <= self.vpip_end <= 1 and 0 <= self.vpip_start <= 1):
            raise ConfigInvalid("vpip_start", "VPIP bounds must lie in [0, 1]")
        if self.points_cap[0] >= self.points_cap[1]:
            raise ConfigInvalid("points_cap", "low bound must be < high bound")
        if self.points_sd <= 0:
            raise ConfigInvalid("points_sd", "must be > 0")
        if self.big_blind <= 0:
            raise ConfigInvalid("big_blind", "must be > 0")
        if self.min_games_per_player is not None and not (
            1 <= self.min_games_per_player <= self.games_per_player
        ):
            raise ConfigInvalid("min_games_per_player",
                                "must be in [1, games_per_player]")
        if self.skill_overrides is not None and \
                len(self.skill_overrides) != self.n_players:
            raise ConfigInvalid("skill_overrides",
                                "length must equal n_players")
        if not (0 <= self.seed < 2**64):
            raise ConfigInvalid("seed", "must be an unsigned 64-bit integer")

    def as_dict(self) -> dict:
        d = {
            "game": self.game, "table_size": self.table_size,
            "n_players": self.n_players,
            "games_per_player": self.games_per_player, "mode": self.mode,
            "skill_sd": self.skill_sd, "learning_curve": self.learning_curve,
            "learning_b": self.learning_b, "learning_alpha": self.learning_alpha,
            "points_mu": self.points_mu, "points_sd": self.points_sd,
            "points_skill_coeff": self.points_skill_coeff,
            "points_cap": list(self.points_cap),
            "value_per_point": self.value_per_point,
            "vpip_start": self.vpip_start, "vpip_end": self.vpip_end,
            "big_blind": self.big_blind,
            "min_games_per_player": self.min_games_per_player,
            "stagger_starts": self.stagger_starts,
            "seed": self.seed,
        }
        return d


@dataclass(frozen=True)
class GroundTruth:
    config: SimConfig
    skills: Tuple[float, ...]
    quotas: Tuple[int, ...]
    expected_win_rate_chance: Optional[float]

    def heads_up_probability(self, skill_a: float, skill_b: float) -> float:
        """Closed-form P(A beats B) under the softmax winner model."""
        return 1.0 / (1.0 + math.exp(-(skill_a - skill_b)))

    def learning_delta(self, games_played: int) -> float:
        return _learning_delta(self.config, np.array([games_played]))[0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config.as_dict(),
                "skills": list(self.skills),
                "quotas": list(self.quotas),
                "expected_win_rate_chance": self.expected_win_rate_chance,
            },
            sort_keys=True,
            indent=2,
        )


def _learning_delta(config: SimConfig, n: np.ndarray) -> np.ndarray:
    """Skill gained after n games; 0 at n=0, saturates at learning_b."""
    if config.learning_b == 0.0:
        return np.zeros_like(n, dtype=float)
    if config.learning_curve == POWER:
        return config.learning_b * (1.0 - np.power(n + 1.0, -config.learning_alpha))
    return config.learning_b * (1.0 - np.exp(-config.learning_alpha * n))


def _planted(config: SimConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(skills, quotas, start offsets), reproducible from the seed alone."""
    n = config.n_players
    rng = np.random.default_rng(np.random.SeedSequence(entropy=config.seed))
    if config.mode == CHANCE:
        skills = np.zeros(n)
        rng.standard_normal(n)  # keep the draw order aligned with skill mode
    elif config.skill_overrides is not None:
        skills = np.asarray(config.skill_overrides, dtype=float)
        rng.standard_normal(n)
    else:
        skills = config.skill_sd * rng.standard_normal(n)
    if config.min_games_per_player is not None:
        quotas = np.rint(np.linspace(
            config.min_games_per_player, config.games_per_player, n
        )).astype(int)
        quotas = rng.permutation(quotas)
    else:
        quotas = np.full(n, config.games_per_player, dtype=int)
    if config.stagger_starts and n > 1:
        offsets = np.rint(np.linspace(0, config.games_per_player, n)).astype(int)
        offsets = rng.permutation(offsets)
    else:
        offsets = np.zeros(n, dtype=int)
    return skills, quotas, offsets


def ground_truth(config: SimConfig) -> GroundTruth:
    config.validate()
    skills, quotas, _ = _planted(config)
    expected = 1.0 / config.table_size if config.mode == CHANCE else None
    return GroundTruth(
        config=config,
        skills=tuple(float(s) for s in skills),
        quotas=tuple(int(q) for q in quotas),
        expected_win_rate_chance=expected,
    )


@dataclass
class _Round:
    index: int
    timestamp: int
    seated: np.ndarray        # (tables, size) player indices
    experience: np.ndarray    # (tables, size) games played before this one
    winner_col: np.ndarray    # (tables,)
    voluntary: Optional[np.ndarray] = None   # poker (tables, size) bool
    contrib: Optional[np.ndarray] = None     # poker (tables, size) in chips
    loss_points: Optional[np.ndarray] = None  # rummy (tables, size) int


def _generate(config: SimConfig) -> Tuple[List[_Round], np.ndarray, np.ndarray]:
    """Run the matchmaking/game loop once; both CSV emission and direct
    timeline construction consume the same rounds."""
    config.validate()
    skills, quotas, offsets = _planted(config)
    size = config.table_size
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=config.seed).spawn(1)[0]
    )
    total_rounds = int((offsets + quotas).max())
    step = max(SPAN_MS // max(total_rounds, 1), 1)
    played = np.zeros(config.n_players, dtype=int)
    rounds: List[_Round] = []

    for r in range(total_rounds):
        active = np.nonzero((offsets <= r) & (played < quotas))[0]
        if len(active) < size:
            continue
        perm = active[rng.permutation(len(active))]
        n_tables = len(perm) // size
        seated = perm[: n_tables * size].reshape(n_tables, size)
        exp_before = played[seated]
        eff = skills[seated] + _learning_delta(config, exp_before.astype(float))
        gumbel = rng.gumbel(size=seated.shape)
        winner_col = np.argmax(eff + gumbel, axis=1)

        rnd = _Round(
            index=r,
            timestamp=BASE_START + r * step,
            seated=seated,
            experience=exp_before,
            winner_col=winner_col,
        )
        if config.game == POKER:
            frac = exp_before / np.maximum(quotas[seated] - 1, 1)
            vpip = config.vpip_start + (config.vpip_end - config.vpip_start) * frac
            rnd.voluntary = rng.random(seated.shape) < vpip
            # everyone posts one blind; a voluntary entry adds four more
            rnd.contrib = config.big_blind * (1.0 + 4.0 * rnd.voluntary)
        else:
            mu = config.points_mu - config.points_skill_coeff * eff
            raw = rng.normal(mu, config.points_sd)
            pts = np.clip(np.rint(raw), *config.points_cap).astype(int)
            pts[np.arange(n_tables), winner_col] = 0
            rnd.loss_points = pts
        played[seated] += 1
        rounds.append(rnd)
    return rounds, skills, quotas


def _id_widths(config: SimConfig) -> Tuple[int, int]:
    return (max(5, len(str(config.n_players))),
            max(5, len(str(config.games_per_player * 2))))


def player_id(config: SimConfig, i: int) -> str:
    w, _ = _id_widths(config)
    return f"p{i:0{w}d}"


def _game_id(config: SimConfig, round_index: int, table: int) -> str:
    _, w = _id_widths(config)
    return f"g{round_index:0{w}d}t{table:05d}"


def simulate(config: SimConfig) -> Tuple[bytes, GroundTruth]:
    """Generate a CSV log (ingest's exact schema) plus the ground truth."""
    rounds, skills, quotas = _generate(config)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if config.game == POKER:
        writer.writerow(POKER_COLUMNS)
        bb = config.big_blind
        for rnd in rounds:
            start = format_timestamp(rnd.timestamp)
            end = format_timestamp(rnd.timestamp + GAME_DURATION_MS)
            pots = rnd.contrib.sum(axis=1)
            for t in range(rnd.seated.shape[0]):
                gid = _game_id(config, rnd.index, t)
                for s in range(rnd.seated.shape[1]):
                    i = rnd.seated[t, s]
                    placed = rnd.contrib[t, s]
                    won = pots[t] if s == rnd.winner_col[t] else 0.0
                    writer.writerow([
                        player_id(config, i), gid, "Ring", "TexasHoldem",
                        _num(bb), _num(placed), _num(won),
                        str(config.table_size), str(config.table_size), "2",
                        "1" if rnd.voluntary[t, s] else "0", start, end,
                    ])
    else:
        writer.writerow(RUMMY_COLUMNS)
        for rnd in rounds:
            start = format_timestamp(rnd.timestamp)
            end = format_timestamp(rnd.timestamp + GAME_DURATION_MS)
            for t in range(rnd.seated.shape[0]):
                gid = _game_id(config, rnd.index, t)
                deal_id = gid + "d1"
                winner_points = int(rnd.loss_points[t].sum())
                for s in range(rnd.seated.shape[1]):
                    i = rnd.seated[t, s]
                    is_winner = s == rnd.winner_col[t]
                    writer.writerow([
                        player_id(config, i), gid, "Points",
                        _num(config.value_per_point),
                        str(config.table_size), str(config.table_size),
                        start, end, start, end,
                        "0",
                        _num(winner_points * config.value_per_point)
                        if is_winner else "0",
                        deal_id, "1",
                        "1" if is_winner else "0",
                        str(winner_points) if is_winner else "0",
                        "0" if is_winner else str(int(rnd.loss_points[t, s])),
                    ])
    truth = GroundTruth(
        config=config,
        skills=tuple(float(s) for s in skills),
        quotas=tuple(int(q) for q in quotas),
        expected_win_rate_chance=(
            1.0 / config.table_size if config.mode == CHANCE else None
        ),
    )
    return buf.getvalue().encode("utf-8"), truth


def simulate_timelines(config: SimConfig) -> Dict[str, PlayerTimeline]:
    """Build player timelines directly from the game loop, bypassing CSV.

    Produces exactly the timelines that simulate() + ingest would, at a
    fraction of the cost; used for large validation cohorts.
    """
    rounds, _, _ = _generate(config)
    staged: Dict[int, List[Outcome]] = {}
    poker = config.game == POKER
    bb = config.big_blind
    for rnd in rounds:
        ts = rnd.timestamp
        n_tables, size = rnd.seated.shape
        if poker:
            pots = rnd.contrib.sum(axis=1)
        for t in range(n_tables):
            gid = _game_id(config, rnd.index, t)
            wcol = rnd.winner_col[t]
            if not poker:
                winner_points = float(rnd.loss_points[t].sum())
            for s in range(size):
                i = int(rnd.seated[t, s])
                if poker:
                    delta = ((pots[t] if s == wcol else 0.0)
                             - rnd.contrib[t, s]) / bb
                    o = Outcome(
                        won=delta > 0, value_delta=delta, timestamp=ts,
                        key=gid, voluntary_entry=bool(rnd.voluntary[t, s]),
                    )
                else:
                    if s == wcol:
                        o = Outcome(won=True, value_delta=winner_points,
                                    timestamp=ts, key=gid + "d1", sort_minor=1)
                    else:
                        o = Outcome(won=False,
                                    value_delta=-float(rnd.loss_points[t, s]),
                                    timestamp=ts, key=gid + "d1", sort_minor=1)
                staged.setdefault(i, []).append(o)
    return {
        player_id(config, i): PlayerTimeline(
            user_id=player_id(config, i),
            table_size=config.table_size,
            outcomes=tuple(outs),
        )
        for i, outs in sorted(staged.items())
    }


def _num(x: float) -> str:
    if float(x) == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))

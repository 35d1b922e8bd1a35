"""Validated record types for poker hands and rummy deals.

Raw log rows arrive as text field mappings; the validate_* functions
coerce and check them, raising a structured error that identifies the
offending field so callers can report line-accurate diagnostics.

All records are immutable after construction and safe to share across
threads. Timestamps are ISO-8601 UTC text in files and integer epoch
milliseconds internally.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Optional, Sequence, Union


class RecordError(ValueError):
    """Base for row-level validation failures."""

    def __init__(self, message: str, field_name: Optional[str] = None):
        super().__init__(message)
        self.field_name = field_name


class MissingField(RecordError):
    def __init__(self, name: str):
        super().__init__(f"missing field: {name}", name)


class FieldTypeError(RecordError):
    """A field's text could not be coerced to its declared type."""

    def __init__(self, name: str, text: str, expected: str):
        super().__init__(f"field {name}: cannot parse {text!r} as {expected}", name)
        self.text = text


class InvariantViolation(RecordError):
    pass


class WinnerContradiction(InvariantViolation):
    def __init__(self):
        super().__init__("is_winner=1 but loss_points > 0")


class PokerGameType(enum.Enum):
    RING = "Ring"
    TOURNAMENT = "Tournament"


class PokerVariant(enum.Enum):
    TEXAS_HOLDEM = "TexasHoldem"
    PLO = "PLO"


class RummyGameType(enum.Enum):
    POINTS = "Points"
    POOL = "Pool"
    DEAL = "Deal"


POKER_COLUMNS = [
    "user_id", "game_id", "game_type", "game_variant", "big_blind",
    "chips_placed", "chips_won", "num_players", "max_players",
    "min_players", "voluntary_entry", "game_start", "game_end",
]

RUMMY_COLUMNS = [
    "user_id", "game_id", "game_type", "game_variant", "max_players",
    "actual_players", "game_start", "game_end", "deal_start", "deal_end",
    "buy_in", "win_amt", "deal_id", "deal_number", "is_winner",
    "winner_points", "loss_points",
]


def parse_timestamp(text: str) -> int:
    """ISO-8601 UTC text -> epoch milliseconds. Naive times are taken as UTC."""
    try:
        dt = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    except ValueError:
        raise FieldTypeError("timestamp", text, "ISO-8601 timestamp") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(round(dt.timestamp() * 1000))


def format_timestamp(ms: int) -> str:
    dt = datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"


@dataclass(frozen=True)
class PokerHandRecord:
    user_id: str
    game_id: str
    game_type: PokerGameType
    game_variant: PokerVariant
    big_blind: float
    chips_placed: float
    chips_won: float
    num_players: int
    max_players: int
    min_players: int
    voluntary_entry: bool
    game_start: int
    game_end: int

    @property
    def value_delta_bb(self) -> float:
        """Net result of the hand, normalized to big-blind units."""
        return (self.chips_won - self.chips_placed) / self.big_blind

    def to_row(self) -> list:
        return [
            self.user_id, self.game_id, self.game_type.value,
            self.game_variant.value, _fmt(self.big_blind),
            _fmt(self.chips_placed), _fmt(self.chips_won),
            str(self.num_players), str(self.max_players),
            str(self.min_players), "1" if self.voluntary_entry else "0",
            format_timestamp(self.game_start), format_timestamp(self.game_end),
        ]


@dataclass(frozen=True)
class RummyDealRecord:
    user_id: str
    game_id: str
    game_type: RummyGameType
    game_variant: float
    max_players: int
    actual_players: int
    game_start: int
    game_end: int
    deal_start: int
    deal_end: int
    buy_in: float
    win_amt: float
    deal_id: str
    deal_number: int
    is_winner: bool
    winner_points: int
    loss_points: int

    def to_row(self) -> list:
        return [
            self.user_id, self.game_id, self.game_type.value,
            _fmt(self.game_variant), str(self.max_players),
            str(self.actual_players), format_timestamp(self.game_start),
            format_timestamp(self.game_end), format_timestamp(self.deal_start),
            format_timestamp(self.deal_end), _fmt(self.buy_in),
            _fmt(self.win_amt), self.deal_id, str(self.deal_number),
            "1" if self.is_winner else "0", str(self.winner_points),
            str(self.loss_points),
        ]


@dataclass(frozen=True)
class Outcome:
    """One game/deal result for one player, the unit of all metric work.

    value_delta is in big blinds for poker (chips_won - chips_placed over
    big_blind) and in points for rummy (+winner_points or -loss_points).
    key carries the game_id (poker) or deal_id (rummy) for joins.
    """

    won: bool
    value_delta: float
    timestamp: int
    key: str
    voluntary_entry: Optional[bool] = None
    sort_minor: int = 0  # deal_number tiebreak within identical timestamps


@dataclass(frozen=True)
class PlayerTimeline:
    """Per-player, time-ordered outcome sequence for one table-size bucket."""

    user_id: str
    table_size: Union[int, str]
    outcomes: tuple = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.outcomes)


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _get(raw: Mapping[str, str], name: str) -> str:
    try:
        value = raw[name]
    except KeyError:
        raise MissingField(name) from None
    if value is None or value == "":
        raise MissingField(name)
    return value


def _parse_float(raw: Mapping[str, str], name: str) -> float:
    text = _get(raw, name)
    try:
        x = float(text)
    except ValueError:
        raise FieldTypeError(name, text, "number") from None
    if x != x or x in (float("inf"), float("-inf")):
        raise FieldTypeError(name, text, "finite number")
    return x


def _parse_int(raw: Mapping[str, str], name: str) -> int:
    text = _get(raw, name)
    try:
        return int(text)
    except ValueError:
        raise FieldTypeError(name, text, "integer") from None


def _parse_bool01(raw: Mapping[str, str], name: str) -> bool:
    text = _get(raw, name).strip()
    if text == "1":
        return True
    if text == "0":
        return False
    raise FieldTypeError(name, text, "0/1 flag")


def _parse_enum(raw: Mapping[str, str], name: str, enum_cls) -> enum.Enum:
    text = _get(raw, name).strip()
    try:
        return enum_cls(text)
    except ValueError:
        allowed = "/".join(m.value for m in enum_cls)
        raise FieldTypeError(name, text, allowed) from None


def _parse_ts(raw: Mapping[str, str], name: str) -> int:
    text = _get(raw, name)
    try:
        return parse_timestamp(text)
    except FieldTypeError:
        raise FieldTypeError(name, text, "ISO-8601 timestamp") from None


def validate_poker_record(raw: Mapping[str, str]) -> PokerHandRecord:
    rec = PokerHandRecord(
        user_id=_get(raw, "user_id"),
        game_id=_get(raw, "game_id"),
        game_type=_parse_enum(raw, "game_type", PokerGameType),
        game_variant=_parse_enum(raw, "game_variant", PokerVariant),
        big_blind=_parse_float(raw, "big_blind"),
        chips_placed=_parse_float(raw, "chips_placed"),
        chips_won=_parse_float(raw, "chips_won"),
        num_players=_parse_int(raw, "num_players"),
        max_players=_parse_int(raw, "max_players"),
        min_players=_parse_int(raw, "min_players"),
        voluntary_entry=_parse_bool01(raw, "voluntary_entry"),
        game_start=_parse_ts(raw, "game_start"),
        game_end=_parse_ts(raw, "game_end"),
    )
    if rec.big_blind <= 0:
        raise InvariantViolation("big_blind > 0 violated")
    if rec.chips_placed < 0 or rec.chips_won < 0:
        raise InvariantViolation("chip amounts must be >= 0")
    if not (rec.min_players <= rec.num_players <= rec.max_players):
        raise InvariantViolation(
            "min_players <= num_players <= max_players violated"
        )
    if rec.game_start > rec.game_end:
        raise InvariantViolation("game_start <= game_end violated")
    return rec


def validate_rummy_record(raw: Mapping[str, str]) -> RummyDealRecord:
    rec = RummyDealRecord(
        user_id=_get(raw, "user_id"),
        game_id=_get(raw, "game_id"),
        game_type=_parse_enum(raw, "game_type", RummyGameType),
        game_variant=_parse_float(raw, "game_variant"),
        max_players=_parse_int(raw, "max_players"),
        actual_players=_parse_int(raw, "actual_players"),
        game_start=_parse_ts(raw, "game_start"),
        game_end=_parse_ts(raw, "game_end"),
        deal_start=_parse_ts(raw, "deal_start"),
        deal_end=_parse_ts(raw, "deal_end"),
        buy_in=_parse_float(raw, "buy_in"),
        win_amt=_parse_float(raw, "win_amt"),
        deal_id=_get(raw, "deal_id"),
        deal_number=_parse_int(raw, "deal_number"),
        is_winner=_parse_bool01(raw, "is_winner"),
        winner_points=_parse_int(raw, "winner_points"),
        loss_points=_parse_int(raw, "loss_points"),
    )
    if rec.is_winner and rec.loss_points > 0:
        raise WinnerContradiction()
    if not rec.is_winner and rec.winner_points > 0:
        raise InvariantViolation("is_winner=0 but winner_points > 0")
    if rec.winner_points < 0 or rec.loss_points < 0:
        raise InvariantViolation("points must be >= 0")
    if rec.buy_in < 0 or rec.win_amt < 0:
        raise InvariantViolation("amounts must be >= 0")
    if rec.actual_players > rec.max_players:
        raise InvariantViolation("actual_players <= max_players violated")
    if rec.deal_number < 1:
        raise InvariantViolation("deal_number >= 1 violated")
    if rec.game_start > rec.game_end or rec.deal_start > rec.deal_end:
        raise InvariantViolation("start <= end violated")
    return rec


def poker_outcome(rec: PokerHandRecord) -> Outcome:
    delta = rec.value_delta_bb
    return Outcome(
        won=delta > 0,
        value_delta=delta,
        timestamp=rec.game_start,
        key=rec.game_id,
        voluntary_entry=rec.voluntary_entry,
    )


def rummy_outcome(rec: RummyDealRecord) -> Outcome:
    delta = float(rec.winner_points) if rec.is_winner else -float(rec.loss_points)
    return Outcome(
        won=rec.is_winner,
        value_delta=delta,
        timestamp=rec.game_start,
        key=rec.deal_id,
        sort_minor=rec.deal_number,
    )


Record = Union[PokerHandRecord, RummyDealRecord]
Records = Sequence[Record]

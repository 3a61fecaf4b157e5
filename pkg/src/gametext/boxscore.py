"""Parsing and validation of basketball box-score JSON, plus schedule queries.

Two input layouts are accepted: the box-score dataset convention (parallel
per-stat maps keyed by player index, ``MM_DD_YY`` date strings) and this
package's own normalized layout (explicit per-side player lists, ISO dates).
Files hold either a JSON array of game objects or one object per line.
"""

import json
from dataclasses import dataclass, fields
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Iterable, Literal, Optional


class GameDataError(ValueError):
    """Base class for everything raised while ingesting game data."""


class ParseError(GameDataError):
    """Malformed input that never made it to a game record."""


class ValidationError(GameDataError):
    """A structurally sound record that violates a data invariant."""


class ScheduleAmbiguityError(GameDataError):
    """One team with two different games on the same date."""


class Position(Enum):
    GUARD = "Guard"
    FORWARD = "Forward"
    CENTER = "Center"
    BENCH = "Bench"


class Weekday(Enum):
    MONDAY = 0
    TUESDAY = 1
    WEDNESDAY = 2
    THURSDAY = 3
    FRIDAY = 4
    SATURDAY = 5
    SUNDAY = 6


class Venue(Enum):
    HOME = "HOME"
    VIS = "VIS"


# Starting-position codes as they appear in the source files. Empty or
# missing codes mean the player came off the bench.
_POSITION_CODES = {
    "G": Position.GUARD,
    "F": Position.FORWARD,
    "C": Position.CENTER,
}


@dataclass(frozen=True)
class PlayerLine:
    """One player's box-score row.

    Turnovers are parsed (the team fallback sum needs them) but are never
    emitted by the linearizer.
    """

    name: str
    position: Position = Position.BENCH
    pts: int = 0
    reb: int = 0
    ast: int = 0
    stl: int = 0
    blk: int = 0
    pf: int = 0
    to: int = 0
    fg_made: int = 0
    fg_att: int = 0
    fg3_made: int = 0
    fg3_att: int = 0
    ft_made: int = 0
    ft_att: int = 0


@dataclass(frozen=True)
class TeamLine:
    """One team's line: identity, result, record, and whatever aggregate
    stats the source file carried (``None`` when the file had no value)."""

    name: str
    city: str
    points: int
    wins: int
    losses: int
    reb: Optional[int] = None
    ast: Optional[int] = None
    to: Optional[int] = None
    fg_made: Optional[int] = None
    fg_att: Optional[int] = None
    fg3_made: Optional[int] = None
    fg3_att: Optional[int] = None
    ft_made: Optional[int] = None
    ft_att: Optional[int] = None

    @property
    def surface(self) -> str:
        """Full display name, e.g. ``Oklahoma City Thunder``."""
        return f"{self.city} {self.name}"


@dataclass(frozen=True)
class TeamAggregates:
    reb: int
    ast: int
    to: int
    fg_made: int
    fg_att: int
    fg3_made: int
    fg3_att: int
    ft_made: int
    ft_att: int


@dataclass(frozen=True)
class GameRecord:
    game_id: str
    date: date
    home: TeamLine
    visitor: TeamLine
    home_players: tuple[PlayerLine, ...]
    visitor_players: tuple[PlayerLine, ...]
    summary: tuple[str, ...] = ()


@dataclass(frozen=True)
class NextGameInfo:
    """A team's next scheduled game. ``opponent_role`` is the *opponent's*
    venue role in that game (HOME when the opponent hosts)."""

    date: date
    opponent_name: str
    opponent_role: Venue


def parse_date(text: str) -> date:
    """Parse ``YYYY-MM-DD`` or the dataset's ``MM_DD_YY`` form."""
    text = text.strip()
    try:
        if "_" in text:
            mm, dd, yy = text.split("_")
            return date(2000 + int(yy), int(mm), int(dd))
        return date.fromisoformat(text)
    except ValueError as exc:
        raise ParseError(f"bad date {text!r}: {exc}") from None


_SAKAMOTO_OFFSETS = (0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4)


def weekday_of(d: date) -> Weekday:
    """Weekday of a Gregorian date via the closed-form congruence; no
    locale or clock involved."""
    y, m, day = d.year, d.month, d.day
    if m < 3:
        y -= 1
    dow_sun0 = (y + y // 4 - y // 100 + y // 400 + _SAKAMOTO_OFFSETS[m - 1] + day) % 7
    return Weekday((dow_sun0 + 6) % 7)


def _as_count(value, *, game_id: str, field_name: str) -> int:
    """Numeric stat values: absent / empty / N/A count as zero."""
    if value is None:
        return 0
    if isinstance(value, str):
        value = value.strip()
        if value in ("", "N/A"):
            return 0
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise ValidationError(
            f"game {game_id}: {field_name} is not a count: {value!r}"
        ) from None
    if n < 0:
        raise ValidationError(f"game {game_id}: {field_name} is negative ({n})")
    return n


def _opt_count(value, *, game_id: str, field_name: str) -> Optional[int]:
    if value is None or (isinstance(value, str) and value.strip() in ("", "N/A")):
        return None
    return _as_count(value, game_id=game_id, field_name=field_name)


def _position_from_code(code) -> Position:
    if code is None:
        return Position.BENCH
    code = str(code).strip()
    if code in ("", "N/A"):
        return Position.BENCH
    if code in _POSITION_CODES:
        return _POSITION_CODES[code]
    # normalized layout spells positions out
    for pos in Position:
        if code == pos.value:
            return pos
    raise ValidationError(f"unknown starting position {code!r}")


def validate_game(game: GameRecord) -> GameRecord:
    """Check every record invariant; returns the record for chaining."""
    gid = game.game_id
    if game.home.points == game.visitor.points:
        raise ValidationError(
            f"game {gid}: points: tie {game.home.points}-{game.visitor.points}"
            " is impossible"
        )
    for side, players in (("home", game.home_players), ("visitor", game.visitor_players)):
        if not players:
            raise ValidationError(f"game {gid}: {side}_players: side has no players")
        for p in players:
            for made, att in (("fg_made", "fg_att"), ("fg3_made", "fg3_att"), ("ft_made", "ft_att")):
                if getattr(p, made) > getattr(p, att):
                    raise ValidationError(
                        f"game {gid}: player {p.name!r}: {made} > {att}"
                        f" ({getattr(p, made)} > {getattr(p, att)})"
                    )
            if p.fg3_made > p.fg_made:
                raise ValidationError(
                    f"game {gid}: player {p.name!r}: fg3_made > fg_made"
                )
            if p.fg3_att > p.fg_att:
                raise ValidationError(
                    f"game {gid}: player {p.name!r}: fg3_att > fg_att"
                )
    return game


_PLAYER_STAT_KEYS = {
    "pts": "PTS",
    "reb": "REB",
    "ast": "AST",
    "stl": "STL",
    "blk": "BLK",
    "pf": "PF",
    "to": "TO",
    "fg_made": "FGM",
    "fg_att": "FGA",
    "fg3_made": "FG3M",
    "fg3_att": "FG3A",
    "ft_made": "FTM",
    "ft_att": "FTA",
}

_TEAM_OPT_KEYS = {
    "reb": "TEAM-REB",
    "ast": "TEAM-AST",
    "to": "TEAM-TOV",
    "fg_made": "TEAM-FGM",
    "fg_att": "TEAM-FGA",
    "fg3_made": "TEAM-FG3M",
    "fg3_att": "TEAM-FG3A",
    "ft_made": "TEAM-FTM",
    "ft_att": "TEAM-FTA",
}


def _team_from_line(line: dict, name: str, city: str, game_id: str) -> TeamLine:
    opt = {
        f: _opt_count(line.get(k), game_id=game_id, field_name=k)
        for f, k in _TEAM_OPT_KEYS.items()
    }
    return TeamLine(
        name=name,
        city=city,
        points=_as_count(line.get("TEAM-PTS"), game_id=game_id, field_name="TEAM-PTS"),
        wins=_as_count(line.get("TEAM-WINS"), game_id=game_id, field_name="TEAM-WINS"),
        losses=_as_count(line.get("TEAM-LOSSES"), game_id=game_id, field_name="TEAM-LOSSES"),
        **opt,
    )


def _players_from_box(box: dict, game_id: str) -> dict[str, list[PlayerLine]]:
    """Split the parallel stat maps into per-city player lists, preserving
    roster (index) order."""
    names = box.get("PLAYER_NAME", {})
    by_city: dict[str, list[PlayerLine]] = {}
    for idx in sorted(names, key=int):
        name = names[idx]
        stats = {
            f: _as_count(box.get(k, {}).get(idx), game_id=game_id, field_name=f"{k}[{idx}]")
            for f, k in _PLAYER_STAT_KEYS.items()
        }
        try:
            pos = _position_from_code(box.get("START_POSITION", {}).get(idx))
        except ValidationError as exc:
            raise ValidationError(f"game {game_id}: player {name!r}: {exc}") from None
        city = box.get("TEAM_CITY", {}).get(idx)
        if city is None:
            raise ValidationError(f"game {game_id}: player {name!r}: no TEAM_CITY")
        by_city.setdefault(city, []).append(PlayerLine(name=name, position=pos, **stats))
    return by_city


def _game_from_dataset_layout(obj: dict, game_id: str) -> GameRecord:
    home_city, home_name = obj["home_city"], obj["home_name"]
    vis_city, vis_name = obj["vis_city"], obj["vis_name"]
    if home_city == vis_city:
        raise ValidationError(
            f"game {game_id}: TEAM_CITY cannot split players: both sides are {home_city!r}"
        )
    by_city = _players_from_box(obj.get("box_score", {}), game_id)
    unknown = set(by_city) - {home_city, vis_city}
    if unknown:
        raise ValidationError(f"game {game_id}: players with unknown TEAM_CITY {sorted(unknown)}")
    return GameRecord(
        game_id=game_id,
        date=parse_date(obj["day"]),
        home=_team_from_line(obj.get("home_line", {}), home_name, home_city, game_id),
        visitor=_team_from_line(obj.get("vis_line", {}), vis_name, vis_city, game_id),
        home_players=tuple(by_city.get(home_city, ())),
        visitor_players=tuple(by_city.get(vis_city, ())),
        summary=tuple(obj.get("summary", ())),
    )


def _player_from_dict(d: dict, game_id: str) -> PlayerLine:
    stats = {
        f.name: _as_count(d.get(f.name), game_id=game_id, field_name=f.name)
        for f in fields(PlayerLine)
        if f.name not in ("name", "position")
    }
    try:
        pos = _position_from_code(d.get("position"))
    except ValidationError as exc:
        raise ValidationError(f"game {game_id}: player {d.get('name')!r}: {exc}") from None
    return PlayerLine(name=d["name"], position=pos, **stats)


def _team_from_dict(d: dict, game_id: str) -> TeamLine:
    opt = {
        f: _opt_count(d.get(f), game_id=game_id, field_name=f)
        for f in _TEAM_OPT_KEYS
    }
    return TeamLine(
        name=d["name"],
        city=d["city"],
        points=_as_count(d.get("points"), game_id=game_id, field_name="points"),
        wins=_as_count(d.get("wins"), game_id=game_id, field_name="wins"),
        losses=_as_count(d.get("losses"), game_id=game_id, field_name="losses"),
        **opt,
    )


def _game_from_normalized_layout(obj: dict, game_id: str) -> GameRecord:
    return GameRecord(
        game_id=obj.get("game_id", game_id),
        date=parse_date(obj["date"]),
        home=_team_from_dict(obj["home"], game_id),
        visitor=_team_from_dict(obj["visitor"], game_id),
        home_players=tuple(_player_from_dict(p, game_id) for p in obj["home_players"]),
        visitor_players=tuple(_player_from_dict(p, game_id) for p in obj["visitor_players"]),
        summary=tuple(obj.get("summary", ())),
    )


def parse_game_json(raw, game_id: Optional[str] = None) -> GameRecord:
    """Parse and validate one game object from JSON text or bytes.

    ``game_id`` is used when the object itself does not carry one.
    """
    if isinstance(raw, (bytes, bytearray)):
        raw = raw.decode("utf-8")
    if isinstance(raw, str):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON at byte offset {exc.pos}: {exc.msg}") from None
    else:
        obj = raw
    if not isinstance(obj, dict):
        raise ParseError(f"expected a JSON object, got {type(obj).__name__}")
    gid = obj.get("game_id") or game_id or "<unknown>"
    if "box_score" in obj:
        game = _game_from_dataset_layout(obj, gid)
    elif "home_players" in obj:
        game = _game_from_normalized_layout(obj, gid)
    else:
        raise ParseError(f"game {gid}: unrecognized game layout")
    return validate_game(game)


def game_to_dict(game: GameRecord) -> dict:
    """Normalized, JSON-ready form; ``parse_game_json`` round-trips it."""

    def player(p: PlayerLine) -> dict:
        d = {f.name: getattr(p, f.name) for f in fields(PlayerLine)}
        d["position"] = p.position.value
        return d

    def team(t: TeamLine) -> dict:
        return {k: v for k, v in (
            (f.name, getattr(t, f.name)) for f in fields(TeamLine)
        ) if v is not None}

    return {
        "game_id": game.game_id,
        "date": game.date.isoformat(),
        "home": team(game.home),
        "visitor": team(game.visitor),
        "home_players": [player(p) for p in game.home_players],
        "visitor_players": [player(p) for p in game.visitor_players],
        "summary": list(game.summary),
    }


def read_games(path) -> list[GameRecord]:
    """Read a games file: a JSON array or one JSON object per line.

    Games without their own id get ``<file>:<index>``.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    stripped = text.lstrip()
    if not stripped:
        return []
    if stripped.startswith("["):
        try:
            objs = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(
                f"{path.name}: malformed JSON at byte offset {exc.pos}: {exc.msg}"
            ) from None
        if not isinstance(objs, list):
            raise ParseError(f"{path.name}: expected a JSON array")
    else:
        objs = []
        for lineno, line in enumerate(text.splitlines()):
            if not line.strip():
                continue
            try:
                objs.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(
                    f"{path.name}:{lineno + 1}: malformed JSON at byte offset"
                    f" {exc.pos}: {exc.msg}"
                ) from None
    return [
        parse_game_json(obj, game_id=f"{path.name}:{i}") for i, obj in enumerate(objs)
    ]


def aggregate_team_stats(game: GameRecord, side: Literal["home", "visitor"]) -> TeamAggregates:
    """Team totals for one side.

    Values the source file carried on the team line win; anything else is
    the sum over that side's player lines.
    """
    if side == "home":
        line, players = game.home, game.home_players
    elif side == "visitor":
        line, players = game.visitor, game.visitor_players
    else:
        raise ValueError(f"side must be 'home' or 'visitor', got {side!r}")
    values = {}
    for f in fields(TeamAggregates):
        file_value = getattr(line, f.name)
        values[f.name] = (
            file_value if file_value is not None else sum(getattr(p, f.name) for p in players)
        )
    return TeamAggregates(**values)


@dataclass(frozen=True)
class _ScheduleEntry:
    date: date
    home_surface: str
    visitor_surface: str
    game: GameRecord


class ScheduleIndex:
    """Per-team, date-sorted view over a set of games.

    Read-only after :func:`build_schedule_index`; safe to share across
    threads.
    """

    def __init__(self, by_team: dict[str, tuple[_ScheduleEntry, ...]]):
        self._by_team = by_team

    def teams(self) -> list[str]:
        return sorted(self._by_team)

    def entries(self, team: str) -> tuple[_ScheduleEntry, ...]:
        return self._by_team.get(team, ())

    def games_of(self, team: str) -> list[tuple[date, GameRecord, Venue]]:
        """(date, game, role-of-`team`) triples in date order."""
        out = []
        for e in self.entries(team):
            role = Venue.HOME if e.home_surface == team else Venue.VIS
            out.append((e.date, e.game, role))
        return out

    def next_game(self, team: str, after: date) -> Optional[NextGameInfo]:
        """The team's earliest game strictly after ``after``, if any.

        Unknown teams simply have no next game.
        """
        for e in self.entries(team):
            if e.date > after:
                if e.home_surface == team:
                    return NextGameInfo(e.date, e.visitor_surface, Venue.VIS)
                return NextGameInfo(e.date, e.home_surface, Venue.HOME)
        return None


def build_schedule_index(games: Iterable[GameRecord]) -> ScheduleIndex:
    """Index games by team.

    Re-tellings of the same game (same date and teams, as happens across
    dataset splits) collapse to one entry; a team with two *different*
    games on one date is a data error.
    """
    by_key: dict[tuple, GameRecord] = {}
    for g in games:
        key = (g.date, g.home.surface, g.visitor.surface)
        prev = by_key.get(key)
        if prev is None or g.game_id < prev.game_id:
            by_key[key] = g

    by_team: dict[str, list[_ScheduleEntry]] = {}
    for (d, home, vis), g in by_key.items():
        entry = _ScheduleEntry(d, home, vis, g)
        by_team.setdefault(home, []).append(entry)
        by_team.setdefault(vis, []).append(entry)

    frozen: dict[str, tuple[_ScheduleEntry, ...]] = {}
    for team, entries in by_team.items():
        entries.sort(key=lambda e: (e.date, e.home_surface, e.visitor_surface))
        for a, b in zip(entries, entries[1:]):
            if a.date == b.date:
                raise ScheduleAmbiguityError(
                    f"team {team!r} has two games on {a.date.isoformat()}:"
                    f" {a.game.game_id!r} and {b.game.game_id!r}"
                )
        frozen[team] = tuple(entries)
    return ScheduleIndex(frozen)

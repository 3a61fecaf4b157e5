"""Encode a parsed game as a compact token sequence.

Block order: the date, the home team block, the visiting team block, then
the winning side's selected players and finally the losing side's. Each
team block is introduced by ``<WINNER>`` or ``<LOSER>``, and the same bare
marker re-introduces each side's player group. Stats keep one fixed slot
per score type and, with full tags, all-zero values are dropped.
"""

import random
from dataclasses import dataclass, replace
from datetime import date
from enum import Enum
from typing import Optional, Sequence

from .boxscore import (
    GameRecord,
    NextGameInfo,
    PlayerLine,
    Position,
    ScheduleIndex,
    TeamAggregates,
    TeamLine,
    Venue,
    aggregate_team_stats,
    weekday_of,
)

TokenSeq = list[str]


class TagMode(Enum):
    FULL = "full"
    MINIMAL = "minimal"


class Lang(Enum):
    EN = "en"
    DE = "de"


class LocalizationError(ValueError):
    """A word sitting in a translatable slot is not in the label table."""


@dataclass(frozen=True)
class LinearizationConfig:
    """Every knob of the encoding.

    ``n_players=None`` keeps all players, ``0`` drops the player blocks
    entirely. ``shuffle_seed`` only matters when ``sort_players`` is off.
    ``TagMode.MINIMAL`` drops the per-stat tags and therefore prints
    all-zero stats so that slot positions stay aligned across players.
    """

    n_players: Optional[int] = 3
    sort_players: bool = True
    include_next_game: bool = True
    include_weekday: bool = True
    include_position: bool = True
    include_team_sums: bool = True
    tag_mode: TagMode = TagMode.FULL
    label_language: Lang = Lang.EN
    shuffle_seed: Optional[int] = None

    def __post_init__(self):
        if self.n_players is not None and self.n_players < 0:
            raise ValueError(f"n_players must be >= 0, got {self.n_players}")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["tag_mode"] = self.tag_mode.value
        d["label_language"] = self.label_language.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LinearizationConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        kwargs = dict(d)
        if "tag_mode" in kwargs:
            kwargs["tag_mode"] = TagMode(kwargs["tag_mode"])
        if "label_language" in kwargs:
            kwargs["label_language"] = Lang(kwargs["label_language"])
        return cls(**kwargs)


_WEEKDAYS = {
    Lang.EN: ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"),
    Lang.DE: ("Montag", "Dienstag", "Mittwoch", "Donnerstag", "Freitag", "Samstag", "Sonntag"),
}

_MONTHS = {
    Lang.EN: ("January", "February", "March", "April", "May", "June", "July",
              "August", "September", "October", "November", "December"),
    Lang.DE: ("Januar", "Februar", "März", "April", "Mai", "Juni", "Juli",
              "August", "September", "Oktober", "November", "Dezember"),
}

# Guard/Forward/Center read the same in both languages; only the bench
# label differs.
_POSITIONS = {
    Lang.EN: {
        Position.GUARD: "Guard",
        Position.FORWARD: "Forward",
        Position.CENTER: "Center",
        Position.BENCH: "Bench",
    },
    Lang.DE: {
        Position.GUARD: "Guard",
        Position.FORWARD: "Forward",
        Position.CENTER: "Center",
        Position.BENCH: "Bank",
    },
}

# Fixed emission order of the player stat slots.
_PLAYER_SCALARS = (("<PTS>", "pts"), ("<REB>", "reb"), ("<AST>", "ast"),
                   ("<STL>", "stl"), ("<BLK>", "blk"), ("<PF>", "pf"))
_SHOOTING = (("<FG>", "fg_made", "fg_att"), ("<FG3>", "fg3_made", "fg3_att"),
             ("<FT>", "ft_made", "ft_att"))

PLAYER_TAG_ORDER = tuple(tag for tag, _ in _PLAYER_SCALARS) + tuple(t for t, _, _ in _SHOOTING)


def format_percent(made: int, att: int) -> int:
    """Integer shooting percentage, rounding halves up; 0 attempts -> 0."""
    if made > att:
        raise ValueError(f"made > attempted ({made} > {att})")
    if att == 0:
        return 0
    return (200 * made + att) // (2 * att)


def select_players(
    players: Sequence[PlayerLine],
    n: Optional[int],
    sort: bool,
    seed: Optional[int] = None,
) -> list[PlayerLine]:
    """Pick the players to encode.

    Sorted mode orders by points, then rebounds, then assists, descending;
    ties keep roster order. Unsorted mode is a seeded shuffle. ``n=None``
    keeps everyone.
    """
    if sort:
        ordered = sorted(players, key=lambda p: (-p.pts, -p.reb, -p.ast))
    else:
        ordered = list(players)
        random.Random(0 if seed is None else seed).shuffle(ordered)
    return ordered if n is None else ordered[:n]


def encode_player(p: PlayerLine, cfg: LinearizationConfig) -> TokenSeq:
    """One player block. Full tags skip zero stats; minimal tags print
    every slot so values stay position-aligned."""
    out = ["<PLAYER>", *p.name.split()]
    minimal = cfg.tag_mode is TagMode.MINIMAL
    for tag, attr in _PLAYER_SCALARS:
        v = getattr(p, attr)
        if minimal:
            out.append(str(v))
        elif v != 0:
            out += [tag, str(v)]
    for tag, made_attr, att_attr in _SHOOTING:
        made, att = getattr(p, made_attr), getattr(p, att_attr)
        if minimal:
            out += [str(made), str(att), str(format_percent(made, att))]
        elif made != 0 or att != 0:
            out += [tag, str(made), str(att), str(format_percent(made, att))]
    if cfg.include_position:
        label = _POSITIONS[cfg.label_language][p.position]
        out += [label] if minimal else ["<POS>", label]
    return out


def _date_words(d: date, cfg: LinearizationConfig) -> TokenSeq:
    words = []
    if cfg.include_weekday:
        words.append(_WEEKDAYS[cfg.label_language][weekday_of(d).value])
    words.append(_MONTHS[cfg.label_language][d.month - 1])
    words.append(str(d.year))
    return words


def encode_date(d: date, cfg: LinearizationConfig) -> TokenSeq:
    """``<DATE> weekday month year`` — weekday and month as words, no
    day-of-month."""
    return ["<DATE>", *_date_words(d, cfg)]


def encode_team(
    t: TeamLine,
    agg: TeamAggregates,
    won: bool,
    next_game: Optional[NextGameInfo],
    cfg: LinearizationConfig,
) -> TokenSeq:
    """One team block: result marker, name, record, optional totals,
    optional next-game info."""
    minimal = cfg.tag_mode is TagMode.MINIMAL
    out = ["<WINNER>" if won else "<LOSER>", *t.surface.split()]

    def scalar(tag: str, v: int):
        if minimal:
            out.append(str(v))
        else:
            out.extend([tag, str(v)])

    scalar("<PTS>", t.points)
    scalar("<WINS>", t.wins)
    scalar("<LOSSES>", t.losses)
    if cfg.include_team_sums:
        scalar("<REB>", agg.reb)
        scalar("<AST>", agg.ast)
        scalar("<TO>", agg.to)
        for tag, made, att in (
            ("<FG>", agg.fg_made, agg.fg_att),
            ("<FG3>", agg.fg3_made, agg.fg3_att),
            ("<FT>", agg.ft_made, agg.ft_att),
        ):
            triple = [str(made), str(att), str(format_percent(made, att))]
            out.extend(triple if minimal else [tag, *triple])
    if cfg.include_next_game and next_game is not None:
        out.extend(["<NEXT>", *_date_words(next_game.date, cfg)])
        out.append("<HOME>" if next_game.opponent_role is Venue.HOME else "<VIS>")
        out.extend(next_game.opponent_name.split())
    return out


def linearize_game(
    game: GameRecord,
    index: Optional[ScheduleIndex],
    cfg: LinearizationConfig,
) -> TokenSeq:
    """Full encoding of one game.

    ``index`` supplies next-game lookups; pass ``None`` (or turn the flag
    off) to omit them.
    """
    home_won = game.home.points > game.visitor.points

    def next_for(team: TeamLine) -> Optional[NextGameInfo]:
        if index is None or not cfg.include_next_game:
            return None
        return index.next_game(team.surface, game.date)

    seq = encode_date(game.date, cfg)
    seq += encode_team(game.home, aggregate_team_stats(game, "home"),
                       home_won, next_for(game.home), cfg)
    seq += encode_team(game.visitor, aggregate_team_stats(game, "visitor"),
                       not home_won, next_for(game.visitor), cfg)

    if cfg.n_players == 0:
        return seq
    winner_players, loser_players = (
        (game.home_players, game.visitor_players)
        if home_won
        else (game.visitor_players, game.home_players)
    )
    for marker, players in (("<WINNER>", winner_players), ("<LOSER>", loser_players)):
        seq.append(marker)
        for p in select_players(players, cfg.n_players, cfg.sort_players, cfg.shuffle_seed):
            seq += encode_player(p, cfg)
    return seq


def _is_tag(token: str) -> bool:
    return token.startswith("<") and token.endswith(">") and len(token) > 2


def _build_label_maps():
    date_words: dict[str, tuple[str, int]] = {}
    for lang, words in _WEEKDAYS.items():
        for i, w in enumerate(words):
            date_words[w] = ("weekday", i)
    for lang, words in _MONTHS.items():
        for i, w in enumerate(words):
            date_words[w] = ("month", i)
    pos_words = {}
    for lang in Lang:
        for pos, w in _POSITIONS[lang].items():
            pos_words[w] = pos
    return date_words, pos_words


_DATE_WORDS, _POS_WORDS = _build_label_maps()


def localize_labels(seq: Sequence[str], lang: Lang) -> TokenSeq:
    """Rewrite weekday, month, and position words into ``lang``.

    Only the slots after ``<DATE>``, ``<NEXT>``, and ``<POS>`` are touched,
    so team and player names survive untouched. Expects tagged (full-mode)
    sequences; an unrecognized word in a slot is an error rather than a
    silent passthrough.
    """
    out: TokenSeq = []
    i = 0
    while i < len(seq):
        tok = seq[i]
        out.append(tok)
        i += 1
        if tok in ("<DATE>", "<NEXT>"):
            while i < len(seq) and not _is_tag(seq[i]):
                word = seq[i]
                if word.isdigit():
                    out.append(word)
                elif word in _DATE_WORDS:
                    kind, idx = _DATE_WORDS[word]
                    table = _WEEKDAYS if kind == "weekday" else _MONTHS
                    out.append(table[lang][idx])
                else:
                    raise LocalizationError(f"unknown date word in {tok} slot: {word!r}")
                i += 1
        elif tok == "<POS>":
            if i >= len(seq) or _is_tag(seq[i]):
                raise LocalizationError("<POS> tag with no position word")
            word = seq[i]
            if word not in _POS_WORDS:
                raise LocalizationError(f"unknown position word: {word!r}")
            out.append(_POSITIONS[lang][_POS_WORDS[word]])
            i += 1
    return out


class SweepKind(Enum):
    PLAYER_COUNT = "players"
    FEATURE_ABLATIONS = "ablations"


def sweep_configs(kind: SweepKind) -> list[tuple[str, LinearizationConfig]]:
    """Named config grids for the two standard experiments: the player-count
    sweep (0..8 and all) and the feature ablations off the 3-player baseline."""
    baseline = LinearizationConfig()
    if kind is SweepKind.PLAYER_COUNT:
        configs = [(f"players-{n}", replace(baseline, n_players=n)) for n in range(9)]
        configs.append(("players-all", replace(baseline, n_players=None)))
        return configs
    if kind is SweepKind.FEATURE_ABLATIONS:
        return [
            ("Baseline", baseline),
            ("No player", replace(baseline, n_players=0)),
            ("All players, sorted", replace(baseline, n_players=None)),
            ("All players, shuffled",
             replace(baseline, n_players=None, sort_players=False, shuffle_seed=0)),
            ("No next game", replace(baseline, include_next_game=False)),
            ("No week day", replace(baseline, include_weekday=False)),
            ("No player position", replace(baseline, include_position=False)),
            ("No team-level sums", replace(baseline, include_team_sums=False)),
            ("Remove most tags", replace(baseline, tag_mode=TagMode.MINIMAL)),
            ("Combined ablations",
             replace(baseline, include_next_game=False, include_weekday=False,
                     include_position=False, include_team_sums=False,
                     tag_mode=TagMode.MINIMAL)),
        ]
    raise ValueError(f"unknown sweep kind: {kind!r}")

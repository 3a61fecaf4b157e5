"""Document-level BLEU and train/test overlap analysis.

The scorer treats each aligned candidate/reference pair as one segment (a
whole document), takes pre-tokenized input verbatim (no tokenizer, case
kept), clips n-gram matches per segment, aggregates counts corpus-wide,
and applies exponential smoothing: a smoothing multiplier starts at 1 and
doubles at every order with zero matches, where the precision becomes
1 / (multiplier * total). The brevity penalty is exp(1 - r/c) for c < r,
with an all-empty candidate corpus scoring 0.
"""

import math
import re
import warnings
from collections import Counter
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Optional, Sequence, Union

from . import __version__
from .boxscore import GameRecord
from .corpus import Document

NGRAM_ORDER = 4

SIGNATURE = f"BLEU+case.mixed+numrefs.1+smooth.exp+tok.none+version.{__version__}"

Segment = Union[Document, Sequence[str]]


@dataclass(frozen=True)
class BleuReport:
    """Score plus everything needed to recompute it. ``precisions`` are
    fractions in [0, 1]; ``score`` is on the 0-100 scale."""

    score: float
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    candidate_len: int
    reference_len: int
    signature: str = SIGNATURE

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "precisions": list(self.precisions),
            "brevity_penalty": self.brevity_penalty,
            "candidate_len": self.candidate_len,
            "reference_len": self.reference_len,
            "signature": self.signature,
        }

    def summary(self) -> str:
        pcts = "/".join(f"{100 * p:.1f}" for p in self.precisions)
        return (
            f"BLEU = {self.score:.2f} {pcts}"
            f" (BP = {self.brevity_penalty:.3f}"
            f" cand_len = {self.candidate_len} ref_len = {self.reference_len})"
            f" [{self.signature}]"
        )


def _tokens(segment: Segment) -> list[str]:
    if isinstance(segment, Document):
        return segment.tokens()
    return list(segment)


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(candidates: Sequence[Segment], references: Sequence[Segment]) -> BleuReport:
    """Corpus BLEU over aligned whole-document segments.

    Raises on length mismatch; empty candidate segments are allowed and
    simply contribute nothing.
    """
    if len(candidates) != len(references):
        raise ValueError(
            f"candidate/reference counts differ: {len(candidates)} vs {len(references)}"
        )
    correct = [0] * NGRAM_ORDER
    total = [0] * NGRAM_ORDER
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_toks, ref_toks = _tokens(cand), _tokens(ref)
        cand_len += len(cand_toks)
        ref_len += len(ref_toks)
        for n in range(1, NGRAM_ORDER + 1):
            cand_counts = _ngram_counts(cand_toks, n)
            if not cand_counts:
                continue
            ref_counts = _ngram_counts(ref_toks, n)
            for gram, count in cand_counts.items():
                total[n - 1] += count
                correct[n - 1] += min(count, ref_counts.get(gram, 0))
    return bleu_from_counts(correct, total, cand_len, ref_len)


def bleu_from_counts(
    correct: Sequence[int],
    total: Sequence[int],
    candidate_len: int,
    reference_len: int,
) -> BleuReport:
    """Assemble a report from sufficient statistics (exposed for tests)."""
    precisions = [0.0] * NGRAM_ORDER
    smooth = 1.0
    for n in range(NGRAM_ORDER):
        if total[n] == 0:
            break
        if correct[n] == 0:
            smooth *= 2.0
            precisions[n] = 1.0 / (smooth * total[n])
        else:
            precisions[n] = correct[n] / total[n]

    if candidate_len == 0:
        bp = 0.0
    elif candidate_len < reference_len:
        bp = math.exp(1.0 - reference_len / candidate_len)
    else:
        bp = 1.0

    if any(p == 0.0 for p in precisions):
        score = 0.0
    else:
        score = bp * math.exp(sum(math.log(p) for p in precisions) / NGRAM_ORDER) * 100.0
    return BleuReport(score, tuple(precisions), bp, candidate_len, reference_len)


@dataclass(frozen=True)
class FixRule:
    pattern: str
    replacement: str

    def compiled(self) -> re.Pattern:
        return re.compile(self.pattern)


# The dataset's tokenizer splits hyphenated number compounds that model
# output (tokenized differently) keeps glued; hyphenated word compounds
# like "29-point" stay as they are.
DEFAULT_FIX_RULES = (
    FixRule(r"^(\d+)-of-(\d+)$", r"\1 - of - \2"),
    FixRule(r"^(\d+)-(\d+)$", r"\1 - \2"),
)


def apply_output_fixes(
    tokens: Sequence[str],
    rules: Optional[Sequence[FixRule]] = None,
) -> list[str]:
    """Rewrite token shapes with the first matching rule, one pass over
    the sequence; a replacement may expand into several tokens."""
    if rules is None:
        rules = DEFAULT_FIX_RULES
    compiled = [(r.compiled(), r.replacement) for r in rules]
    out: list[str] = []
    for tok in tokens:
        for pattern, replacement in compiled:
            m = pattern.match(tok)
            if m:
                out.extend(m.expand(replacement).split())
                break
        else:
            out.append(tok)
    return out


def load_fix_rules(path) -> list[FixRule]:
    import json
    from pathlib import Path

    entries = json.loads(Path(path).read_text(encoding="utf-8"))
    return [FixRule(e["pattern"], e["replacement"]) for e in entries]


@dataclass(frozen=True, order=True)
class GameKey:
    """Identity of a game for overlap purposes: date plus both full team
    names, totally ordered for stable reporting."""

    date: date
    home_name: str
    visitor_name: str


def game_key(game: GameRecord) -> GameKey:
    return GameKey(game.date, game.home.surface, game.visitor.surface)


def find_overlap(train: Iterable[GameRecord], test: Iterable[GameRecord]) -> list[GameKey]:
    """Keys of test games that also appear in the training set.

    Multiset-aware on the test side: every matched test game contributes
    one entry, so ``len()`` counts overlapping test games directly.
    """
    train_keys = {game_key(g) for g in train}
    return sorted(game_key(g) for g in test if game_key(g) in train_keys)


def filter_overlap(
    train: Iterable[GameRecord], exclude: Iterable[GameRecord]
) -> list[GameRecord]:
    """Training games whose key does not occur in ``exclude``."""
    drop = {game_key(g) for g in exclude}
    return [g for g in train if game_key(g) not in drop]


def stories_from_games(games: Iterable[GameRecord]) -> list[tuple[GameKey, tuple[str, ...]]]:
    """(key, story tokens) pairs for games that carry a summary."""
    return [(game_key(g), g.summary) for g in games if g.summary]


def overlap_reference_bleu(
    train_stories: Sequence[tuple[GameKey, Sequence[str]]],
    test_stories: Sequence[tuple[GameKey, Sequence[str]]],
    overlap: Sequence[GameKey],
    fixes: Optional[Sequence[FixRule]] = None,
) -> BleuReport:
    """Score training stories against the test stories of the same games.

    For every overlapping test story, the candidate is the first training
    story with that key (stable order; duplicates warn). ``fixes``
    normalizes token shapes on both sides before scoring; pass ``()`` to
    skip and ``None`` for the default rule set.
    """
    first_train: dict[GameKey, Sequence[str]] = {}
    for key, story in train_stories:
        if key in first_train:
            warnings.warn(f"multiple training stories for {key}; keeping the first")
            continue
        first_train[key] = story
    wanted = Counter(overlap)
    candidates: list[list[str]] = []
    references: list[list[str]] = []
    for key, story in test_stories:
        if wanted.get(key, 0) <= 0 or key not in first_train:
            continue
        wanted[key] -= 1
        cand, ref = list(first_train[key]), list(story)
        if fixes is None or fixes:
            cand = apply_output_fixes(cand, fixes)
            ref = apply_output_fixes(ref, fixes)
        candidates.append(cand)
        references.append(ref)
    return corpus_bleu(candidates, references)

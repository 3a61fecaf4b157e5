"""Joint subword segmentation with an apply-time vocabulary threshold.

Learning merges the most frequent adjacent symbol pair inside words, never
across word boundaries; the word-initial symbol carries a boundary marker
so segmentation is reversible by plain concatenation. At apply time, any
produced subword rarer than the model threshold is recursively undone into
the parts it was merged from (or single characters), which keeps the open
vocabulary small. Angle-bracket special tokens pass through everything
verbatim.

Inline casing is the companion lossless lowercasing: a titlecase or
all-caps token becomes its lowercase form followed by a ``<T>`` or ``<U>``
tag; anything with irregular casing is left alone.
"""

import re
from collections import Counter, defaultdict
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ._io import atomic_write_text

MARKER = "▁"  # word-boundary marker carried by word-initial symbols
CASE_TITLE = "<T>"
CASE_UPPER = "<U>"
CASE_TAGS = (CASE_TITLE, CASE_UPPER)

_SPECIAL_RE = re.compile(r"^<[^<>\s]+>$")


def is_special_token(token: str) -> bool:
    """Angle-bracket tokens (tags, corpus tags, case tags) are protected
    from segmentation and casing."""
    return bool(_SPECIAL_RE.match(token))


class BpeModel:
    """An ordered merge list plus the post-merge symbol frequencies.

    Immutable after learning; apply results are cached per (threshold,
    token).
    """

    def __init__(self, merges: Sequence[tuple[str, str]], vocab: dict[str, int],
                 threshold: int = 100):
        self.merges = tuple((l, r) for l, r in merges)
        self.vocab = dict(vocab)
        self.threshold = threshold
        self._ranks = {pair: i for i, pair in enumerate(self.merges)}
        if len(self._ranks) != len(self.merges):
            raise ValueError("duplicate merge in model")
        # which pair a merged symbol came from, for threshold re-splitting
        self._parents = {l + r: (l, r) for l, r in self.merges}
        self._cache: dict[tuple[int, str], tuple[str, ...]] = {}

    def __eq__(self, other):
        return (isinstance(other, BpeModel)
                and self.merges == other.merges
                and self.vocab == other.vocab
                and self.threshold == other.threshold)


def _word_symbols(word: str) -> list[str]:
    return [MARKER + word[0]] + list(word[1:])


def _merge_in_word(syms: list[str], pair: tuple[str, str]) -> list[str]:
    left, right = pair
    out = []
    i = 0
    while i < len(syms):
        if i < len(syms) - 1 and syms[i] == left and syms[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(syms[i])
            i += 1
    return out


def learn_bpe(
    corpus: Iterable[Sequence[str]],
    n_merges: int = 32000,
    threshold: int = 100,
    protected: Optional[set[str]] = None,
) -> BpeModel:
    """Learn merges from an iterable of token sequences.

    Ties on pair frequency break lexicographically, so the merge list is a
    pure function of the corpus. Special tokens (and anything in
    ``protected``) are never counted.
    """
    protected = protected or set()
    word_freqs: Counter[str] = Counter()
    for sent in corpus:
        for tok in sent:
            if tok in protected or is_special_token(tok):
                continue
            if MARKER in tok:
                raise ValueError(f"token contains the boundary marker: {tok!r}")
            word_freqs[tok] += 1
    if not word_freqs:
        raise ValueError("empty corpus: nothing to learn from")

    words: list[tuple[list[str], int]] = [
        (_word_symbols(w), f) for w, f in sorted(word_freqs.items())
    ]
    stats: Counter[tuple[str, str]] = Counter()
    where: dict[tuple[str, str], set[int]] = defaultdict(set)
    for wi, (syms, f) in enumerate(words):
        for pair in zip(syms, syms[1:]):
            stats[pair] += f
            where[pair].add(wi)

    merges: list[tuple[str, str]] = []
    for _ in range(n_merges):
        if not stats:
            break
        top = max(stats.values())
        if top < 1:
            break
        best = min(p for p, c in stats.items() if c == top)
        merges.append(best)
        for wi in sorted(where[best]):
            syms, f = words[wi]
            new = _merge_in_word(syms, best)
            for pair in zip(syms, syms[1:]):
                stats[pair] -= f
                if stats[pair] <= 0:
                    del stats[pair]
                where[pair].discard(wi)
            for pair in zip(new, new[1:]):
                stats[pair] += f
                where[pair].add(wi)
            words[wi] = (new, f)

    vocab: Counter[str] = Counter()
    for syms, f in words:
        for s in syms:
            vocab[s] += f
    return BpeModel(merges, dict(vocab), threshold)


def _atomic(sym: str) -> bool:
    return len(sym) == 1 or (len(sym) == 2 and sym[0] == MARKER)


def _segment(model: BpeModel, token: str, threshold: int) -> tuple[str, ...]:
    key = (threshold, token)
    cached = model._cache.get(key)
    if cached is not None:
        return cached
    syms = _word_symbols(token)
    while len(syms) > 1:
        ranked = [
            (model._ranks[p], i)
            for i, p in enumerate(zip(syms, syms[1:]))
            if p in model._ranks
        ]
        if not ranked:
            break
        rank, _ = min(ranked)
        syms = _merge_in_word(syms, model.merges[rank])

    out: list[str] = []

    def resplit(sym: str):
        if model.vocab.get(sym, 0) >= threshold or _atomic(sym):
            out.append(sym)
            return
        parent = model._parents.get(sym)
        if parent is None:
            out.append(sym)
            return
        resplit(parent[0])
        resplit(parent[1])

    for s in syms:
        resplit(s)
    result = tuple(out)
    model._cache[key] = result
    return result


def apply_bpe(
    model: BpeModel,
    seq: Sequence[str],
    protected: Optional[set[str]] = None,
    threshold: Optional[int] = None,
) -> list[str]:
    """Segment each token of ``seq``; special tokens and anything in
    ``protected`` pass through whole."""
    protected = protected or set()
    thr = model.threshold if threshold is None else threshold
    out: list[str] = []
    for tok in seq:
        if tok in protected or is_special_token(tok):
            out.append(tok)
            continue
        if MARKER in tok:
            raise ValueError(f"token contains the boundary marker: {tok!r}")
        out.extend(_segment(model, tok, thr))
    return out


def detok_bpe(seq: Sequence[str]) -> list[str]:
    """Undo segmentation: exact inverse of :func:`apply_bpe`."""
    words: list[str] = []
    current: Optional[str] = None

    def flush():
        nonlocal current
        if current is not None:
            words.append(current)
            current = None

    for tok in seq:
        if is_special_token(tok):
            flush()
            words.append(tok)
        elif tok.startswith(MARKER):
            flush()
            current = tok[len(MARKER):]
        else:
            if current is None:
                raise ValueError(f"continuation subword with no word start: {tok!r}")
            current += tok
    flush()
    return words


def _restore_title(word: str) -> str:
    return word[:1].upper() + word[1:]


def apply_inline_casing(seq: Sequence[str]) -> list[str]:
    """Lowercase tokens reversibly, tagging titlecase with ``<T>`` and
    all-caps with ``<U>``. A token only gets rewritten if the rewrite
    provably inverts; anything else stays verbatim."""
    out: list[str] = []
    for tok in seq:
        if tok in CASE_TAGS:
            raise ValueError(f"input already contains case tag {tok}")
        if is_special_token(tok):
            out.append(tok)
            continue
        low = tok.lower()
        if tok == low:
            out.append(tok)
        elif len(tok) > 1 and tok == tok.upper() and low.upper() == tok:
            out.extend([low, CASE_UPPER])
        elif _restore_title(low) == tok:
            out.extend([low, CASE_TITLE])
        else:
            out.append(tok)
    return out


def revert_inline_casing(seq: Sequence[str]) -> list[str]:
    """Exact inverse of :func:`apply_inline_casing` on its output."""
    out: list[str] = []
    for tok in seq:
        if tok in CASE_TAGS:
            if not out or is_special_token(out[-1]):
                raise ValueError(f"stray case tag {tok} with no preceding word")
            out[-1] = out[-1].upper() if tok == CASE_UPPER else _restore_title(out[-1])
        else:
            out.append(tok)
    return out


_FORMAT_VERSION = "1"


def write_bpe_model(model: BpeModel, path) -> None:
    """Line-oriented model file, byte-stable for a given model."""
    lines = [
        f"bpe-model v{_FORMAT_VERSION}",
        f"threshold {model.threshold}",
        f"merges {len(model.merges)}",
    ]
    lines += [f"{l} {r}" for l, r in model.merges]
    lines.append(f"vocab {len(model.vocab)}")
    lines += [
        f"{sym} {count}"
        for sym, count in sorted(model.vocab.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_bpe_model(path) -> BpeModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != f"bpe-model v{_FORMAT_VERSION}":
        raise ValueError(f"{path}: not a bpe model file")
    threshold = int(lines[1].split()[1])
    n_merges = int(lines[2].split()[1])
    pos = 3
    merges = []
    for line in lines[pos:pos + n_merges]:
        left, right = line.split(" ")
        merges.append((left, right))
    pos += n_merges
    n_vocab = int(lines[pos].split()[1])
    pos += 1
    vocab = {}
    for line in lines[pos:pos + n_vocab]:
        sym, count = line.rsplit(" ", 1)
        vocab[sym] = int(count)
    return BpeModel(merges, vocab, threshold)


def write_dictionary(model: BpeModel, path) -> None:
    """Plain ``symbol frequency`` list, most frequent first, for consumers
    that want a ready-made vocabulary file."""
    lines = [
        f"{sym} {count}"
        for sym, count in sorted(model.vocab.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))

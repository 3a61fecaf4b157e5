"""Document-level training corpus construction.

Covers parallel-pair cleaning, assembling and truncating documents,
span-based upsampling, corpus tags, text+metadata source construction,
token masking, and splitting synthetic data into per-epoch shards. Every
randomized operation takes an explicit seed and is reproducible bit for
bit.

File formats: the *block* format is one sentence per line with a blank
line between documents; the *flat* format is one whole document per line.
"""

import random
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ._io import atomic_write_text
from .subword import BpeModel, apply_bpe

MASK_TOKEN = "<MASK>"

_TAG_RE = re.compile(r"^<[^<>\s]+>$")

# Corpus tags seen so far; tag_corpus() adds to this so that re-tagging a
# sequence replaces the old tag instead of stacking a second one.
CORPUS_TAGS: set[str] = {"<DGT>", "<ROTOWIRE>", "<NEWS-CRAWL>", "<PARACRAWL>", "<WMT>"}


def register_corpus_tag(tag: str) -> str:
    if not _TAG_RE.match(tag or ""):
        raise ValueError(f"corpus tag must be a single <...> token, got {tag!r}")
    CORPUS_TAGS.add(tag)
    return tag


@dataclass(frozen=True)
class Document:
    """An ordered list of sentences (token tuples) under one id.

    ``flagged`` marks a document that could not be truncated below the
    subword budget because it is one oversized sentence.
    """

    doc_id: str
    sentences: tuple[tuple[str, ...], ...]
    corpus_tag: Optional[str] = None
    flagged: bool = False

    def __post_init__(self):
        object.__setattr__(
            self, "sentences", tuple(tuple(s) for s in self.sentences)
        )
        if not self.sentences:
            raise ValueError(f"document {self.doc_id!r} has no sentences")
        if self.corpus_tag is not None and not _TAG_RE.match(self.corpus_tag):
            raise ValueError(f"bad corpus tag {self.corpus_tag!r}")

    def tokens(self) -> list[str]:
        """All tokens in order, sentence boundaries dropped."""
        return [tok for sent in self.sentences for tok in sent]

    def n_sentences(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class ParallelPair:
    source: tuple[str, ...]
    target: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))


@dataclass(frozen=True)
class FilterReport:
    examined: int
    kept: int
    removed_empty: int
    removed_length: int
    removed_ratio: int


def filter_pairs(
    pairs: Iterable[ParallelPair],
    max_len: int = 175,
    max_ratio: float = 1.5,
) -> tuple[list[ParallelPair], FilterReport]:
    """Drop pairs with an empty side, a side longer than ``max_len``
    tokens, or a length ratio above ``max_ratio``. Both bounds are
    inclusive on the keep side."""
    kept: list[ParallelPair] = []
    empty = length = ratio = 0
    examined = 0
    for pair in pairs:
        examined += 1
        ls, lt = len(pair.source), len(pair.target)
        if ls == 0 or lt == 0:
            empty += 1
        elif ls > max_len or lt > max_len:
            length += 1
        elif max(ls, lt) / min(ls, lt) > max_ratio:
            ratio += 1
        else:
            kept.append(pair)
    return kept, FilterReport(examined, len(kept), empty, length, ratio)


def split_document(
    doc: Document,
    model: BpeModel,
    max_subwords: int = 1100,
    protected: Optional[set[str]] = None,
) -> list[Document]:
    """Greedily split a document at sentence boundaries so each piece
    measures at most ``max_subwords`` once segmented.

    A single sentence that alone exceeds the budget is kept whole and
    flagged. Concatenating the pieces reproduces the input exactly.
    """
    sizes = [len(apply_bpe(model, s, protected)) for s in doc.sentences]
    chunks: list[tuple[list[tuple[str, ...]], bool]] = []
    current: list[tuple[str, ...]] = []
    current_size = 0
    for sent, size in zip(doc.sentences, sizes):
        if size > max_subwords:
            if current:
                chunks.append((current, False))
                current, current_size = [], 0
            chunks.append(([sent], True))
            continue
        if current and current_size + size > max_subwords:
            chunks.append((current, False))
            current, current_size = [], 0
        current.append(sent)
        current_size += size
    if current:
        chunks.append((current, False))
    if len(chunks) == 1 and not chunks[0][1]:
        return [doc]
    return [
        Document(f"{doc.doc_id}/{i}", tuple(sents), doc.corpus_tag, flagged)
        for i, (sents, flagged) in enumerate(chunks)
    ]


def make_pseudo_documents(
    sentences: Sequence[Sequence[str]],
    seed: int,
    min_len: int = 3,
    max_len: int = 30,
    shuffle: bool = True,
) -> list[Document]:
    """Group sentences into documents of random length (uniform in
    ``[min_len, max_len]``). The corpus is shuffled first unless the
    caller already did. The last document takes whatever remains."""
    if min_len < 1 or max_len < min_len:
        raise ValueError(f"bad length range [{min_len}, {max_len}]")
    rng = random.Random(seed)
    pool = [tuple(s) for s in sentences]
    if shuffle:
        rng.shuffle(pool)
    docs: list[Document] = []
    i = 0
    while i < len(pool):
        run = rng.randint(min_len, max_len)
        docs.append(Document(f"pseudo-{len(docs)}", tuple(pool[i:i + run])))
        i += run
    return docs


def upsample_by_spans(
    docs: Sequence[Document],
    factor: int = 8,
    seed: int = 0,
) -> list[Document]:
    """Grow a document collection to ``factor`` times its sentence count.

    The originals are kept; random spans of consecutive sentences (uniform
    document, uniform start, uniform length >= 1) are appended until the
    total crosses the target, stopping at the first crossing.
    """
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    rng = random.Random(seed)
    out = list(docs)
    total = sum(d.n_sentences() for d in docs)
    target = factor * total
    count = total
    i = 0
    while count < target:
        src = docs[rng.randrange(len(docs))]
        start = rng.randrange(src.n_sentences())
        length = rng.randint(1, src.n_sentences() - start)
        span = src.sentences[start:start + length]
        out.append(Document(f"span-{i}", span, src.corpus_tag))
        count += length
        i += 1
    return out


def tag_corpus(seqs: Iterable[Sequence[str]], tag: str) -> list[list[str]]:
    """Prepend ``tag`` to every sequence. A known corpus tag already in
    front is replaced, never stacked."""
    register_corpus_tag(tag)
    out = []
    for seq in seqs:
        seq = list(seq)
        if seq and seq[0] in CORPUS_TAGS:
            seq = seq[1:]
        out.append([tag] + seq)
    return out


def tag_document(doc: Document, tag: str) -> Document:
    register_corpus_tag(tag)
    return replace(doc, corpus_tag=tag)


def build_mtnlg_source(text: Document, metadata: Sequence[str]) -> list[str]:
    """Source side for translation-with-metadata: the flattened document
    followed by the metadata tokens, no separator in between."""
    return text.tokens() + list(metadata)


def mask_tokens(
    seq: Sequence[str],
    rate: float,
    seed: int,
    epoch: int,
    protected: Optional[set[str]] = None,
    key: str = "",
) -> list[str]:
    """Independently replace each unprotected token with ``<MASK>`` with
    probability ``rate``.

    The random stream is keyed by (seed, epoch, key) so every epoch
    resamples and every document (pass its id as ``key``) draws its own
    stream. Rate 0 is the identity, as used at test time.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"mask rate must be in [0, 1], got {rate}")
    protected = protected or set()
    if rate == 0.0:
        return list(seq)
    rng = random.Random(f"{seed}:{epoch}:{key}")
    return [
        tok if tok in protected or rng.random() >= rate else MASK_TOKEN
        for tok in seq
    ]


@dataclass(frozen=True)
class EpochShardPlan:
    """Assignment of each document to one of ``n_shards`` near-equal
    shards; shard k becomes the epoch-k training file."""

    n_shards: int
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(self.assignment))
        sizes = self.sizes()
        if sizes and max(sizes) - min(sizes) > 1:
            raise ValueError("shard sizes differ by more than one")

    def sizes(self) -> list[int]:
        counts = [0] * self.n_shards
        for s in self.assignment:
            counts[s] += 1
        return counts

    def shard(self, docs: Sequence[Document], k: int) -> list[Document]:
        if not 0 <= k < self.n_shards:
            raise ValueError(f"shard index {k} out of range")
        return [d for d, s in zip(docs, self.assignment) if s == k]


def shard_for_epochs(docs: Sequence[Document], n: int = 20, seed: int = 0) -> EpochShardPlan:
    """Deterministic near-equal partition of documents into ``n`` shards."""
    if n < 1:
        raise ValueError(f"need at least one shard, got {n}")
    order = list(range(len(docs)))
    random.Random(seed).shuffle(order)
    assignment = [0] * len(docs)
    for position, doc_index in enumerate(order):
        assignment[doc_index] = position % n
    return EpochShardPlan(n, tuple(assignment))


def read_documents(path, fmt: str = "blocks", id_prefix: Optional[str] = None) -> list[Document]:
    """Read documents from a text file in ``blocks`` or ``flat`` format."""
    path = Path(path)
    prefix = id_prefix if id_prefix is not None else path.name
    text = path.read_text(encoding="utf-8")
    docs: list[Document] = []
    if fmt == "blocks":
        block: list[tuple[str, ...]] = []
        for line in text.splitlines():
            if line.strip():
                block.append(tuple(line.split()))
            elif block:
                docs.append(Document(f"{prefix}:{len(docs)}", tuple(block)))
                block = []
        if block:
            docs.append(Document(f"{prefix}:{len(docs)}", tuple(block)))
    elif fmt == "flat":
        for line in text.splitlines():
            if line.strip():
                docs.append(Document(f"{prefix}:{len(docs)}", (tuple(line.split()),)))
    else:
        raise ValueError(f"unknown document format {fmt!r}")
    return docs


def write_documents(docs: Sequence[Document], path, fmt: str = "blocks") -> None:
    """Write documents atomically in ``blocks`` or ``flat`` format.

    A document's corpus tag, when set, leads its first sentence (blocks)
    or its line (flat).
    """
    lines: list[str] = []
    for doc in docs:
        if fmt == "blocks":
            for i, sent in enumerate(doc.sentences):
                toks = list(sent)
                if i == 0 and doc.corpus_tag:
                    toks = [doc.corpus_tag] + toks
                lines.append(" ".join(toks))
            lines.append("")
        elif fmt == "flat":
            toks = doc.tokens()
            if doc.corpus_tag:
                toks = [doc.corpus_tag] + toks
            lines.append(" ".join(toks))
        else:
            raise ValueError(f"unknown document format {fmt!r}")
    if fmt == "blocks" and lines:
        lines.pop()  # no trailing blank block
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_token_lines(path) -> list[list[str]]:
    return [line.split() for line in Path(path).read_text(encoding="utf-8").splitlines()]


def write_token_lines(seqs: Sequence[Sequence[str]], path) -> None:
    atomic_write_text(path, "\n".join(" ".join(s) for s in seqs) + ("\n" if seqs else ""))


def read_pairs(src_path, tgt_path) -> list[ParallelPair]:
    src = read_token_lines(src_path)
    tgt = read_token_lines(tgt_path)
    if len(src) != len(tgt):
        raise ValueError(
            f"parallel files differ in length: {len(src)} vs {len(tgt)} lines"
        )
    return [ParallelPair(s, t) for s, t in zip(src, tgt)]

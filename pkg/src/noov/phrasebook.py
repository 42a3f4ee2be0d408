"""Bilingual phrase look-up table with longest-source-match queries.

The table holds curated source-phrase -> target-phrase pairs (for
example UMLS preferred terms exported to TSV). The repetition fix in
decoding asks: given a just-emitted target word (the trigger) and the
source sentence, which entry has the trigger in its target phrase and
the longest source phrase contained in the sentence?
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence


class PhraseTableError(ValueError):
    """Raised for malformed phrase table files."""


@dataclass(frozen=True)
class PhraseEntry:
    source: tuple[str, ...]
    target: tuple[str, ...]


@dataclass(frozen=True)
class PhraseMatch:
    """A table hit: which entry, where in the sentence, where the trigger
    sits inside the target phrase."""

    entry_id: int
    source_span: tuple[int, int]
    trigger_pos: int


class PhraseTable:
    """Deduplicated phrase pairs plus case-folded containment indexes."""

    def __init__(self, entries: Sequence[PhraseEntry]):
        self.entries: list[PhraseEntry] = []
        seen = set()
        for e in entries:
            if not e.source or not e.target:
                raise PhraseTableError("phrase entries must be non-empty on both sides")
            key = (e.source, e.target)
            if key in seen:
                continue
            seen.add(key)
            self.entries.append(e)
        self.by_target_token: dict[str, set[int]] = defaultdict(set)
        self.by_source_first: dict[str, set[int]] = defaultdict(set)
        for i, e in enumerate(self.entries):
            for tok in e.target:
                self.by_target_token[tok.lower()].add(i)
            self.by_source_first[e.source[0].lower()].add(i)
        self.by_target_token = dict(self.by_target_token)
        self.by_source_first = dict(self.by_source_first)

    def __len__(self):
        return len(self.entries)

    @classmethod
    def from_pairs(cls, pairs) -> "PhraseTable":
        return cls(
            [PhraseEntry(tuple(s.split()), tuple(t.split())) for s, t in pairs]
        )

    @classmethod
    def load(cls, path) -> "PhraseTable":
        """Read TSV `source_phrase<TAB>target_phrase`, space-tokenized."""
        entries = []
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise PhraseTableError(
                        "%s line %d: expected exactly one TAB" % (path, lineno)
                    )
                src, tgt = parts[0].split(), parts[1].split()
                if not src or not tgt:
                    raise PhraseTableError(
                        "%s line %d: empty phrase side" % (path, lineno)
                    )
                entries.append(PhraseEntry(tuple(src), tuple(tgt)))
        return cls(entries)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for e in self.entries:
                f.write("%s\t%s\n" % (" ".join(e.source), " ".join(e.target)))


def _find_subsequence(haystack: list[str], needle: tuple[str, ...]) -> int:
    """Leftmost start of needle as a contiguous run in haystack, or -1."""
    n, m = len(haystack), len(needle)
    for start in range(n - m + 1):
        if haystack[start : start + m] == list(needle):
            return start
    return -1


def find_match(
    src_tokens: Sequence[str], trigger: str, table: PhraseTable
) -> PhraseMatch | None:
    """Best entry whose target contains the trigger and whose source phrase
    occurs contiguously in src_tokens (all matching case-insensitive).

    Longest source phrase wins; ties go to the leftmost occurrence, then
    the smallest entry id.
    """
    trigger_l = trigger.lower()
    candidate_ids = table.by_target_token.get(trigger_l)
    if not candidate_ids:
        return None
    src_l = [t.lower() for t in src_tokens]
    best = None
    for eid in sorted(candidate_ids):
        entry = table.entries[eid]
        needle = tuple(t.lower() for t in entry.source)
        start = _find_subsequence(src_l, needle)
        if start < 0:
            continue
        key = (-len(entry.source), start, eid)
        if best is None or key < best[0]:
            trigger_pos = next(
                i for i, t in enumerate(entry.target) if t.lower() == trigger_l
            )
            best = (key, PhraseMatch(eid, (start, start + len(entry.source)), trigger_pos))
    return best[1] if best else None


def continuation(match: PhraseMatch, table: PhraseTable) -> str | None:
    """Target-phrase token following the trigger; None if the trigger is
    the last token of the phrase."""
    target = table.entries[match.entry_id].target
    nxt = match.trigger_pos + 1
    if nxt >= len(target):
        return None
    return target[nxt]

"""Rule-based noun phrase extraction from captions.

A deterministic stand-in for a full POS chunker: captions are split into
segments at verbs, prepositions/conjunctions and sentence punctuation; within
each segment, stopwords and determiners are stripped and the remaining
contiguous token runs become candidates (multi-word candidates preserved).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import FrozenSet, List, Tuple

_TOKEN_RE = re.compile(r"[a-z0-9][a-z0-9'\-]*", re.IGNORECASE)
_SENTENCE_PUNCT = set(".,;:!?")

# Common nouns ending in -ing that the gerund heuristic must not treat as verbs.
_ING_NOUNS = frozenset(
    "string ring king thing something nothing anything everything building "
    "painting ceiling morning evening wedding spring wing swing lightning duckling".split()
)


@dataclass(frozen=True)
class Candidate:
    phrase: str
    source_span: Tuple[int, int]


@dataclass(frozen=True)
class ChunkerLexicon:
    stopwords: FrozenSet[str] = frozenset()
    determiners: FrozenSet[str] = frozenset()
    verbs_aux: FrozenSet[str] = frozenset()
    prepositions: FrozenSet[str] = frozenset()  # incl. conjunctions; both split segments

    @classmethod
    def from_file(cls, path) -> "ChunkerLexicon":
        """Load a sectioned plain-text lexicon ([stopwords] etc., one token per line)."""
        sections = {"stopwords": set(), "determiners": set(), "verbs_aux": set(), "prepositions": set()}
        current = None
        with open(path, "r", encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if line.startswith("[") and line.endswith("]"):
                    name = line[1:-1]
                    if name not in sections:
                        raise ValueError(f"unknown lexicon section {name!r}")
                    current = sections[name]
                    continue
                if current is None:
                    raise ValueError(f"token {line!r} before any section header")
                token = line.lower()
                if token in current:
                    raise ValueError(f"duplicate token {token!r} in lexicon section")
                current.add(token)
        return cls(**{k: frozenset(v) for k, v in sections.items()})

    @classmethod
    def default(cls) -> "ChunkerLexicon":
        path = resources.files("avszero.data") / "lexicon.txt"
        with resources.as_file(path) as p:
            return cls.from_file(p)


def normalize_phrase(phrase: str, determiners: FrozenSet[str] = frozenset({"a", "an", "the"})) -> str:
    """Lowercase, collapse whitespace, strip leading determiners and trailing punctuation.

    Runs to a fixpoint so the result is idempotent even when punctuation
    stripping exposes a new leading determiner.
    """
    out = phrase.lower()
    prev = None
    while out != prev:
        prev = out
        words = out.split()
        while words and words[0] in determiners:
            words = words[1:]
        out = " ".join(words).rstrip(".,;:!?\"'").strip()
    return out


def _is_boundary(token: str, lexicon: ChunkerLexicon) -> bool:
    if token in lexicon.verbs_aux or token in lexicon.prepositions:
        return True
    # Gerund/participle heuristic: treat -ing forms as verbs unless whitelisted.
    if len(token) > 4 and token.endswith("ing") and token not in _ING_NOUNS:
        return True
    return False


def extract_noun_phrases(caption: str, lexicon: ChunkerLexicon = None) -> List[Candidate]:
    """Deterministic candidate list in order of first appearance, deduplicated."""
    if lexicon is None:
        lexicon = _default_lexicon()
    tokens = []  # (text, start, end)
    pos = 0
    for match in _TOKEN_RE.finditer(caption):
        gap = caption[pos:match.start()]
        if any(ch in _SENTENCE_PUNCT for ch in gap):
            tokens.append((None, match.start(), match.start()))  # segment break marker
        tokens.append((match.group().lower(), match.start(), match.end()))
        pos = match.end()

    candidates: List[Candidate] = []
    seen = set()
    run: List[Tuple[str, int, int]] = []

    def flush():
        nonlocal run
        if run:
            phrase = normalize_phrase(" ".join(t[0] for t in run), lexicon.determiners)
            span = (run[0][1], run[-1][2])
            if phrase and phrase not in seen:
                seen.add(phrase)
                candidates.append(Candidate(phrase=phrase, source_span=span))
        run = []

    for text, start, end in tokens:
        if text is None or _is_boundary(text, lexicon):
            flush()
        elif text in lexicon.stopwords or text in lexicon.determiners:
            flush()
        else:
            run.append((text, start, end))
    flush()
    return candidates


_LEXICON_CACHE: List[ChunkerLexicon] = []


def _default_lexicon() -> ChunkerLexicon:
    if not _LEXICON_CACHE:
        _LEXICON_CACHE.append(ChunkerLexicon.default())
    return _LEXICON_CACHE[0]

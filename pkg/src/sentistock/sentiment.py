"""Per-tweet sentiment scoring.

Two scorer kinds are supported: a deterministic lexicon scorer (useful for
tests and offline experiments) and a pass-through loader for scores computed
externally by transformer models. Externally computed scores arrive as CSV
with header ``tweet_id,variant,p_pos,p_neg,p_neu``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    MissingVariantTextError,
    ProbabilityRowInvalidError,
    ScorerUnavailableError,
    UnknownTweetIdError,
)
from .ingest import TweetCorpus

# Canonical scoring variants, in the order used for result-table features 1-4.
VARIANTS = ("cleaned_prosus", "cleaned_yiyanghkust", "pos_prosus", "pos_yiyanghkust")

# Variants that score the POS-tagged text form instead of the cleaned text.
POS_VARIANTS = frozenset(("pos_prosus", "pos_yiyanghkust"))

LABELS = ("positive", "negative", "neutral")

DEFAULT_POSITIVE_WORDS = frozenset(
    """
    gain gains growth profit profits rally surge soar boom bullish upgrade
    beat record strong rise rising recovery rebound outperform optimistic
    positive expansion win wins success breakthrough high
    """.split()
)

DEFAULT_NEGATIVE_WORDS = frozenset(
    """
    loss losses crash collapse plunge plummet slump bearish downgrade miss
    weak fall falling decline drop recession layoffs fraud scandal default
    negative fear risk selloff bankruptcy low
    """.split()
)


def _argmax_label(p_pos: float, p_neg: float, p_neu: float) -> str:
    """Argmax class with ties broken neutral > positive > negative."""
    label = "neutral"
    best = p_neu
    if p_pos > best:
        label, best = "positive", p_pos
    if p_neg > best:
        label, best = "negative", p_neg
    return label


@dataclass(frozen=True)
class SentimentScore:
    """Class probabilities and the argmax label for one scored text."""

    p_pos: float
    p_neg: float
    p_neu: float
    label: str

    def __post_init__(self):
        total = self.p_pos + self.p_neg + self.p_neu
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"probabilities sum to {total}, not 1")
        expected = _argmax_label(self.p_pos, self.p_neg, self.p_neu)
        if self.label != expected:
            raise ValueError(f"label {self.label!r} is not the argmax ({expected!r})")

    @classmethod
    def from_probabilities(cls, p_pos: float, p_neg: float, p_neu: float) -> "SentimentScore":
        """Build a score with the argmax label (ties: neutral > positive > negative)."""
        return cls(p_pos=p_pos, p_neg=p_neg, p_neu=p_neu,
                   label=_argmax_label(p_pos, p_neg, p_neu))


@dataclass
class ScoreTable:
    """Scores keyed by (tweet id, variant)."""

    entries: dict[tuple[str, str], SentimentScore] = field(default_factory=dict)
    variants: list[str] = field(default_factory=list)

    def get(self, tweet_id: str, variant: str) -> SentimentScore | None:
        return self.entries.get((tweet_id, variant))


@dataclass
class ScorerConfig:
    """Selects and parameterizes a scorer.

    ``kind`` is ``"lexicon"`` or ``"precomputed"``; the latter requires
    ``source`` to point at a score CSV.
    """

    kind: str = "lexicon"
    source: str | Path | None = None
    positive_words: frozenset[str] = DEFAULT_POSITIVE_WORDS
    negative_words: frozenset[str] = DEFAULT_NEGATIVE_WORDS

    def __post_init__(self):
        if self.kind not in ("lexicon", "precomputed"):
            raise ValueError(f"unknown scorer kind {self.kind!r}")
        if self.kind == "precomputed" and self.source is None:
            raise ValueError("precomputed scorer needs a source file")


def score_tweet(config: ScorerConfig, text: str) -> SentimentScore:
    """Score a single text with the lexicon scorer.

    With hit counts c+ and c- among whitespace tokens and n tokens total:
    u = (c+ - c-) / max(1, c+ + c-), s = (c+ + c-) / n, p_pos = s*max(u, 0),
    p_neg = s*max(-u, 0), p_neu = 1 - p_pos - p_neg. No hits (or empty text)
    scores neutral. Deterministic for fixed config and text.
    """
    if config.kind != "lexicon":
        raise ScorerUnavailableError(
            "per-text scoring needs the lexicon scorer; precomputed scores are "
            "looked up by tweet id via load_precomputed_scores"
        )
    tokens = text.split()
    if not tokens:
        return SentimentScore.from_probabilities(0.0, 0.0, 1.0)
    c_pos = sum(1 for t in tokens if t in config.positive_words)
    c_neg = sum(1 for t in tokens if t in config.negative_words)
    hits = c_pos + c_neg
    u = (c_pos - c_neg) / max(1, hits)
    s = hits / len(tokens)
    p_pos = s * max(0.0, u)
    p_neg = s * max(0.0, -u)
    return SentimentScore.from_probabilities(p_pos, p_neg, 1.0 - p_pos - p_neg)


def score_corpus(
    config: ScorerConfig, corpus: TweetCorpus, variants: list[str] | tuple[str, ...] = VARIANTS
) -> ScoreTable:
    """Score every (tweet, variant) pair, returning a complete table.

    POS-tagged variants require every tweet to carry pos_tagged_text;
    otherwise MissingVariantTextError is raised. With a precomputed config the
    table is loaded from file and checked for completeness
    (ScorerUnavailableError on gaps).
    """
    for variant in variants:
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")

    if config.kind == "precomputed":
        table = load_precomputed_scores(config.source, corpus)
        for tweet in corpus:
            for variant in variants:
                if (tweet.id, variant) not in table.entries:
                    raise ScorerUnavailableError(
                        f"no precomputed score for tweet {tweet.id!r}, variant {variant!r}"
                    )
        table.variants = list(variants)
        return table

    table = ScoreTable(variants=list(variants))
    for tweet in corpus:
        for variant in variants:
            if variant in POS_VARIANTS:
                if tweet.pos_tagged_text is None:
                    raise MissingVariantTextError(tweet.id, variant)
                text = tweet.pos_tagged_text
            else:
                text = tweet.cleaned_text
            table.entries[(tweet.id, variant)] = score_tweet(config, text)
    return table


def load_precomputed_scores(path: str | Path, corpus: TweetCorpus) -> ScoreTable:
    """Load externally computed scores, validating probability rows.

    Rows whose probabilities sum within 1e-3 of 1 are renormalized; larger
    deviations raise ProbabilityRowInvalidError. Rows referencing unknown
    tweet ids raise UnknownTweetIdError.
    """
    known_ids = {tweet.id for tweet in corpus}
    table = ScoreTable()
    seen_variants: list[str] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            tweet_id = row["tweet_id"]
            variant = row["variant"]
            if tweet_id not in known_ids:
                raise UnknownTweetIdError(f"tweet id {tweet_id!r} not in corpus")
            if variant not in VARIANTS:
                raise ValueError(f"unknown variant {variant!r}")
            p = [float(row[k]) for k in ("p_pos", "p_neg", "p_neu")]
            total = sum(p)
            if abs(total - 1.0) > 1e-3:
                raise ProbabilityRowInvalidError(
                    f"tweet {tweet_id!r}, variant {variant!r}: probabilities sum to {total}"
                )
            p = [v / total for v in p]
            table.entries[(tweet_id, variant)] = SentimentScore.from_probabilities(*p)
            if variant not in seen_variants:
                seen_variants.append(variant)
    table.variants = [v for v in VARIANTS if v in seen_variants]
    return table


def write_scores_csv(table: ScoreTable, corpus: TweetCorpus, path: str | Path) -> None:
    """Write a score table in the precomputed-score CSV format."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("tweet_id", "variant", "p_pos", "p_neg", "p_neu"))
        for tweet in corpus:
            for variant in table.variants:
                score = table.get(tweet.id, variant)
                if score is None:
                    continue
                writer.writerow(
                    (tweet.id, variant, repr(score.p_pos), repr(score.p_neg), repr(score.p_neu))
                )

"""Synthetic data generators for demos and verification runs.

All generators take a seed and produce valid StockSeries / MasterDataset /
tweet structures, so the full pipeline can be exercised without any
proprietary market or social-media data.
"""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np

from .ingest import StockSeries, Tweet, TweetCorpus, clean_tweet
from .mapping import MasterDataset

_WEEKDAY_FRIDAY = 4


def trading_calendar(start: date, n_days: int) -> list[date]:
    """n_days consecutive weekdays starting at (or after) start."""
    days = []
    current = start
    while len(days) < n_days:
        if current.weekday() <= _WEEKDAY_FRIDAY:
            days.append(current)
        current += timedelta(days=1)
    return days


def _ohlcv_from_close(close: np.ndarray, seed: int) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)
    spread = 0.01 * np.abs(close) + 0.01
    open_ = close + rng.uniform(-1, 1, close.size) * spread
    high = np.maximum(open_, close) + rng.uniform(0, 1, close.size) * spread
    low = np.minimum(open_, close) - rng.uniform(0, 1, close.size) * spread
    low = np.maximum(low, 1e-3)
    volume = np.floor(rng.uniform(1e4, 1e6, close.size))
    return {"Open": open_, "High": high, "Low": low, "Close": close, "Volume": volume}


def sine_stock(n_days: int = 200, seed: int = 0, symbol: str = "SINE") -> StockSeries:
    """A noiseless sine-wave close price (period ~40 days) around level 100."""
    t = np.arange(n_days, dtype=float)
    close = 100.0 + 10.0 * np.sin(2.0 * np.pi * t / 40.0)
    cols = _ohlcv_from_close(close, seed)
    return StockSeries(
        symbol=symbol,
        dates=trading_calendar(date(2020, 1, 1), n_days),
        open=cols["Open"],
        high=cols["High"],
        low=cols["Low"],
        close=cols["Close"],
        volume=cols["Volume"],
    )


def random_walk_stock(n_days: int = 300, seed: int = 0, symbol: str = "WALK") -> StockSeries:
    """A positive random-walk close with mild daily moves."""
    rng = np.random.default_rng(seed)
    close = 100.0 + np.cumsum(rng.normal(0.0, 1.0, n_days))
    close = np.maximum(close, 5.0)
    cols = _ohlcv_from_close(close, seed + 1)
    return StockSeries(
        symbol=symbol,
        dates=trading_calendar(date(2020, 1, 1), n_days),
        open=cols["Open"],
        high=cols["High"],
        low=cols["Low"],
        close=cols["Close"],
        volume=cols["Volume"],
    )


def sentiment_driven_master(
    n_days: int = 400,
    signal_strength: float = 0.8,
    noise_sigma: float = 0.02,
    seed: int = 0,
) -> MasterDataset:
    """Master dataset whose next-day price move is driven by today's sentiment.

    close[d+1] - close[d] = signal_strength * (sent_pos[d] - sent_neg[d]) +
    noise. With the sentiment columns present the next move is largely
    predictable; without them it is noise, which is what makes this series
    useful for measuring the value of the sentiment channels.
    """
    rng = np.random.default_rng(seed)
    sent_pos = rng.uniform(0.0, 0.1, n_days)
    sent_neg = rng.uniform(0.0, 0.1, n_days)
    sent_neu = rng.uniform(0.0, 0.1, n_days)
    noise = rng.normal(0.0, noise_sigma, n_days)
    close = np.empty(n_days)
    close[0] = 10.0
    for d in range(n_days - 1):
        close[d + 1] = close[d] + signal_strength * (sent_pos[d] - sent_neg[d]) + noise[d]
    cols = _ohlcv_from_close(close, seed + 1)
    cols["sent_pos"] = sent_pos
    cols["sent_neg"] = sent_neg
    cols["sent_neu"] = sent_neu
    return MasterDataset(
        calendar=trading_calendar(date(2020, 1, 1), n_days),
        columns=cols,
        target_column="Close",
    )


_SAMPLE_PHRASES = (
    "strong growth rally",
    "record profit surge",
    "gains rally boom",
    "earnings beat optimistic outlook",
    "crash selloff deepens",
    "losses slump recession",
    "weak decline bearish mood",
    "markets quiet before the holiday",
    "index unchanged in thin trading",
    "growth hopes fade amid recession risk",
)


def random_tweets(calendar: list[date], per_day: float = 1.5, seed: int = 0) -> TweetCorpus:
    """A corpus of template tweets scattered over (and between) trading days."""
    rng = np.random.default_rng(seed)
    tweets = []
    for day in calendar:
        for _ in range(rng.poisson(per_day)):
            raw = str(rng.choice(_SAMPLE_PHRASES))
            offset = int(rng.integers(0, 2))  # some tweets land on weekends
            tweet_date = day - timedelta(days=offset)
            tweets.append(
                Tweet(
                    id=str(len(tweets)),
                    date=tweet_date,
                    raw_text=raw,
                    cleaned_text=clean_tweet(raw),
                    pos_tagged_text=raw,
                )
            )
    tweets.sort(key=lambda t: t.date)
    return TweetCorpus(tweets=tweets, handle="@synthetic")

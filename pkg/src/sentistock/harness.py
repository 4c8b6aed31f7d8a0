"""Experiment orchestration: single pipeline runs, grid sweeps, reporting.

A run wires the stages together: load stock and tweets, score, aggregate to
daily channels, memory-map, join, scale, split, window, train, predict,
inverse-scale, evaluate. A grid sweeps (variant, lookback) cells with
per-cell derived seeds, isolating failures so one bad cell cannot take down
the sweep.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, asdict
from datetime import date, datetime, timezone
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import evalmetrics as em
from . import neuralnet as nn
from .errors import ConfigError, PipelineError
from .ingest import StockSeries, TweetCorpus, load_stock_csv, load_tweets
from .mapping import (
    MasterDataset,
    MemoryKernel,
    daily_aggregate,
    join_with_stock,
    memory_weighted_map,
    stock_only_master,
)
from .sentiment import VARIANTS, ScorerConfig, score_corpus

logger = logging.getLogger(__name__)

CONFIG_VERSION = 1
SUMMARY_COLUMNS = ("scrip", "variant", "lookback", "val_score", "r2", "rmse", "mae", "T", "acc", "units")
DEFAULT_LOOKBACKS = (5, 10, 20, 30, 60, 90)


@dataclass
class ExperimentConfig:
    """Everything a run or grid needs, overridable from a JSON config file."""

    stock_file: str | None = None
    tweet_files: list[str] = field(default_factory=list)
    scorer_kind: str = "lexicon"
    scores_file: str | None = None
    variants: list[str] = field(default_factory=lambda: list(VARIANTS))
    memory_days: int = 30
    kernel_mode: str = "recency"
    split_ratio: float = 0.8
    fit_scope: str = "train_only"
    lookbacks: list[int] = field(default_factory=lambda: list(DEFAULT_LOOKBACKS))
    hidden_units: int = 50
    epochs: int = 100
    batch_size: int = 32
    validation_split: float = 0.1
    patience: int = 10
    learning_rate: float = 1e-3
    with_sentiment: bool = True
    metric_units: str = "data"
    max_lag: int = 14
    output_dir: str | None = None
    scrip: str | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.lookbacks or any(w < 1 for w in self.lookbacks):
            raise ConfigError("lookbacks must be a non-empty list of integers >= 1")
        if not 0 < self.split_ratio < 1:
            raise ConfigError("split_ratio must be in (0, 1)")
        if self.metric_units not in ("data", "scaled"):
            raise ConfigError(f"metric_units must be 'data' or 'scaled', not {self.metric_units!r}")

    def scorer_config(self) -> ScorerConfig:
        return ScorerConfig(kind=self.scorer_kind, source=self.scores_file)

    def train_config(self) -> nn.TrainConfig:
        return nn.TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            validation_split=self.validation_split,
            patience=self.patience,
            learning_rate=self.learning_rate,
            seed=self.seed,
        )


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a JSON config file, applying overrides on top."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    version = raw.pop("config_version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config_version {version}")
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class ExperimentRecord:
    """Outcome of one grid cell."""

    scrip: str
    variant: str
    lookback: int
    seed: int
    fingerprint: str
    started_at: str
    finished_at: str
    report: em.EvalReport | None = None
    history: nn.TrainingHistory | None = None
    test_dates: list[date] = field(default_factory=list)
    actual: np.ndarray | None = None
    predicted: np.ndarray | None = None
    error: str | None = None
    failed_stage: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def _hash_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def fingerprint(cfg: ExperimentConfig, variant: str, lookback: int, seed: int,
                extra_data_hash: str | None = None) -> str:
    """Stable identity for (config, data, cell). Tweet files are hashed only
    when the sentiment path actually reads them."""
    payload = {k: v for k, v in asdict(cfg).items()}
    payload.update({"cell_variant": variant, "cell_lookback": lookback, "cell_seed": seed})
    hashes = {}
    if cfg.stock_file:
        hashes["stock"] = _hash_file(cfg.stock_file)
    if cfg.with_sentiment:
        hashes["tweets"] = [_hash_file(f) for f in cfg.tweet_files]
        if cfg.scores_file:
            hashes["scores"] = _hash_file(cfg.scores_file)
    if extra_data_hash:
        hashes["inline_data"] = extra_data_hash
    payload["data_hashes"] = hashes
    blob = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def master_data_hash(master: MasterDataset) -> str:
    digest = hashlib.sha256()
    digest.update(",".join(d.isoformat() for d in master.calendar).encode())
    for name in master.columns:
        digest.update(name.encode())
        digest.update(np.ascontiguousarray(master.columns[name]).tobytes())
    return digest.hexdigest()


class _Stage:
    """Context manager tagging failures with the pipeline stage name."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


def merge_corpora(corpora: list[TweetCorpus]) -> TweetCorpus:
    """Concatenate corpora; with several sources, ids get a source prefix."""
    if len(corpora) == 1:
        return corpora[0]
    tweets = []
    for index, corpus in enumerate(corpora):
        for tweet in corpus:
            renamed = type(tweet)(
                id=f"{index}:{tweet.id}",
                date=tweet.date,
                raw_text=tweet.raw_text,
                cleaned_text=tweet.cleaned_text,
                pos_tagged_text=tweet.pos_tagged_text,
            )
            tweets.append(renamed)
    tweets.sort(key=lambda t: t.date)
    handles = ",".join(c.handle for c in corpora if c.handle)
    return TweetCorpus(tweets=tweets, handle=handles)


def build_master(cfg: ExperimentConfig, variant: str, stock: StockSeries,
                 tweet_loader=load_tweets) -> MasterDataset:
    """Produce the master dataset for one variant (stage-tagged)."""
    if not cfg.with_sentiment:
        with _Stage("join"):
            return stock_only_master(stock)
    with _Stage("load_tweets"):
        if not cfg.tweet_files:
            raise ConfigError("with_sentiment=true requires at least one tweet file")
        corpus = merge_corpora([tweet_loader(f) for f in cfg.tweet_files])
    with _Stage("score"):
        table = score_corpus(cfg.scorer_config(), corpus, [variant])
    with _Stage("aggregate"):
        daily = daily_aggregate(table, variant, corpus, stock.calendar)
    with _Stage("map"):
        mapped = memory_weighted_map(daily, MemoryKernel(cfg.memory_days, cfg.kernel_mode))
    with _Stage("join"):
        return join_with_stock(mapped, stock)


def run_master(master: MasterDataset, cfg: ExperimentConfig, variant: str, lookback: int,
               seed: int, scrip: str, data_hash: str | None = None) -> ExperimentRecord:
    """Scale, window, train, predict and evaluate a ready master dataset."""
    started = _utcnow()
    fp = fingerprint(cfg, variant, lookback, seed, extra_data_hash=data_hash)
    with _Stage("scale"):
        scalers = ds.fit_scalers(master, cfg.split_ratio, cfg.fit_scope)
        scaled = ds.transform(scalers, master)
    with _Stage("split"):
        train_part, test_part = ds.chronological_split(scaled, cfg.split_ratio)
    with _Stage("window"):
        train_windows = ds.make_windows(train_part, lookback)
        test_windows = ds.make_windows(test_part, lookback)
    with _Stage("create_model"):
        model_cfg = nn.ModelConfig(
            hidden_units=cfg.hidden_units,
            input_shape=(lookback, len(master.columns)),
            seed=seed,
        )
        model = nn.init_model(model_cfg)
    with _Stage("train"):
        train_cfg = cfg.train_config()
        history = nn.train(model, train_windows, train_cfg)
    with _Stage("predict"):
        pred_scaled = np.asarray(nn.predict(model, test_windows))
        actual_scaled = test_windows.y
    with _Stage("inverse_scale"):
        target = master.target_column
        pred_data = ds.inverse_transform(scalers, target, pred_scaled)
        actual_data = ds.inverse_transform(scalers, target, actual_scaled)
    with _Stage("evaluate"):
        if cfg.metric_units == "scaled":
            pred_eval, actual_eval = pred_scaled, actual_scaled
        else:
            pred_eval, actual_eval = pred_data, actual_data
        mae, rmse, r2 = em.compute_metrics(pred_eval, actual_eval)
        max_lag = min(cfg.max_lag, len(pred_eval) - 2)
        offset, acc = em.best_time_offset(pred_eval, actual_eval, max_lag)
        report = em.EvalReport(
            mae=mae,
            rmse=rmse,
            r2=r2,
            val_score=em.validation_score(history),
            time_offset=offset,
            acc=acc,
            n_samples=len(pred_eval),
            units=cfg.metric_units,
        )
    record = ExperimentRecord(
        scrip=scrip,
        variant=variant,
        lookback=lookback,
        seed=seed,
        fingerprint=fp,
        started_at=started,
        finished_at=_utcnow(),
        report=report,
        history=history,
        test_dates=test_part.calendar[lookback:],
        actual=actual_data,
        predicted=pred_data,
    )
    return record


def run_pipeline(cfg: ExperimentConfig, variant: str, lookback: int, seed: int | None = None,
                 tweet_loader=load_tweets, write_artifacts: bool = True) -> ExperimentRecord:
    """Execute the full pipeline for one (variant, lookback) cell."""
    seed = cfg.seed if seed is None else seed
    with _Stage("load_stock"):
        if cfg.stock_file is None:
            raise ConfigError("stock_file is required")
        stock = load_stock_csv(cfg.stock_file, symbol=cfg.scrip)
    master = build_master(cfg, variant, stock, tweet_loader=tweet_loader)
    record = run_master(master, cfg, variant, lookback, seed, scrip=stock.symbol)
    if write_artifacts and cfg.output_dir is not None:
        write_record_artifacts(record, cfg.output_dir)
    return record


def run_grid(cfg: ExperimentConfig, tweet_loader=load_tweets) -> list[ExperimentRecord]:
    """Sweep every (variant, lookback) cell, isolating per-cell failures.

    Lookbacks of at least half the test-set length are skipped with a
    warning. Writes summary and per-record artifacts when output_dir is set.
    """
    with _Stage("load_stock"):
        if cfg.stock_file is None:
            raise ConfigError("stock_file is required")
        stock = load_stock_csv(cfg.stock_file, symbol=cfg.scrip)
    n = len(stock)
    n_test = n - math.floor(cfg.split_ratio * n)
    usable = []
    for w in cfg.lookbacks:
        if w >= n_test / 2:
            logger.warning("skipping lookback %d: test set has only %d rows", w, n_test)
        else:
            usable.append(w)
    variants = list(cfg.variants) if cfg.with_sentiment else ["none"]

    records = []
    cell_index = 0
    for variant in variants:
        master = None
        master_error: PipelineError | None = None
        try:
            master = build_master(cfg, variant, stock, tweet_loader=tweet_loader)
        except PipelineError as exc:
            master_error = exc
        for lookback in usable:
            seed = cfg.seed + cell_index
            cell_index += 1
            started = _utcnow()
            if master_error is not None:
                record = _failure_record(cfg, stock.symbol, variant, lookback, seed,
                                         started, master_error)
            else:
                try:
                    record = run_master(master, cfg, variant, lookback, seed, scrip=stock.symbol)
                except PipelineError as exc:
                    logger.warning("cell (%s, %d) failed at %s: %s", variant, lookback, exc.stage, exc.cause)
                    record = _failure_record(cfg, stock.symbol, variant, lookback, seed,
                                             started, exc)
            records.append(record)
    if cfg.output_dir is not None and records:
        emit_report(records, cfg.output_dir)
        for record in records:
            write_record_artifacts(record, cfg.output_dir)
    return records


def _failure_record(cfg, scrip, variant, lookback, seed, started, exc: PipelineError):
    try:
        fp = fingerprint(cfg, variant, lookback, seed)
    except OSError:
        fp = ""
    return ExperimentRecord(
        scrip=scrip, variant=variant, lookback=lookback, seed=seed,
        fingerprint=fp, started_at=started, finished_at=_utcnow(),
        error=str(exc.cause), failed_stage=exc.stage,
    )


def _fmt(value: float) -> str:
    return repr(float(value))


def _record_stem(record: ExperimentRecord) -> str:
    return f"{record.scrip}_{record.variant}_w{record.lookback}"


def _write_loss_and_pred(record: ExperimentRecord, out_dir: Path) -> list[Path]:
    """Loss-curve and prediction CSVs for a successful record."""
    written = []
    stem = _record_stem(record)
    loss_path = out_dir / f"{stem}_loss.csv"
    with open(loss_path, "w", newline="") as fh:
        fh.write("epoch,train_loss,val_loss\n")
        for epoch, (tl, vl) in enumerate(zip(record.history.train_loss, record.history.val_loss)):
            fh.write(f"{epoch},{_fmt(tl)},{_fmt(vl)}\n")
    written.append(loss_path)

    pred_path = out_dir / f"{stem}_pred.csv"
    with open(pred_path, "w", newline="") as fh:
        fh.write("date,actual,predicted\n")
        for d, a, p in zip(record.test_dates, record.actual, record.predicted):
            fh.write(f"{d.isoformat()},{_fmt(a)},{_fmt(p)}\n")
    written.append(pred_path)
    return written


def write_record_artifacts(record: ExperimentRecord, out_dir: str | Path) -> list[Path]:
    """Write the loss-curve and prediction CSVs plus a JSON record."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    stem = _record_stem(record)
    if record.ok:
        written.extend(_write_loss_and_pred(record, out_dir))

    record_path = out_dir / f"{stem}_record.json"
    blob = {
        "scrip": record.scrip,
        "variant": record.variant,
        "lookback": record.lookback,
        "seed": record.seed,
        "fingerprint": record.fingerprint,
        "started_at": record.started_at,
        "finished_at": record.finished_at,
        "error": record.error,
        "failed_stage": record.failed_stage,
    }
    if record.ok:
        blob["report"] = asdict(record.report)
        blob["history"] = {
            "n_epochs": record.history.n_epochs,
            "best_epoch": record.history.best_epoch,
            "stopped_early": record.history.stopped_early,
        }
        blob["artifacts"] = [str(p) for p in written]
    with open(record_path, "w") as fh:
        json.dump(blob, fh, indent=2)
    written.append(record_path)
    return written


def emit_report(records: list[ExperimentRecord], out_dir: str | Path) -> list[Path]:
    """Write per-scrip summary CSVs plus loss-curve and prediction CSVs."""
    if not records:
        raise ValueError("no records to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    scrips = []
    for record in records:
        if record.scrip not in scrips:
            scrips.append(record.scrip)
    for scrip in scrips:
        path = out_dir / f"summary_{scrip}.csv"
        with open(path, "w", newline="") as fh:
            fh.write(",".join(SUMMARY_COLUMNS) + "\n")
            for record in records:
                if record.scrip != scrip:
                    continue
                if record.ok:
                    r = record.report
                    row = [
                        record.scrip, record.variant, str(record.lookback),
                        _fmt(r.val_score), _fmt(r.r2), _fmt(r.rmse), _fmt(r.mae),
                        str(r.time_offset), _fmt(r.acc), r.units,
                    ]
                else:
                    row = [record.scrip, record.variant, str(record.lookback),
                           "", "", "", "", "", "", f"failed:{record.failed_stage}"]
                fh.write(",".join(row) + "\n")
        written.append(path)
    for record in records:
        if record.ok:
            written.extend(_write_loss_and_pred(record, out_dir))
    return written

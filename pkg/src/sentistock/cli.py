"""Command-line interface.

Subcommands compose via the documented CSV formats: clean -> score -> map ->
train -> evaluate, with grid running the whole sweep from a JSON config.
Exit codes: 0 success, 1 some grid cells failed, 2 config or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import dataset as ds
from . import evalmetrics as em
from . import harness
from . import neuralnet as nn
from .errors import SentiStockError
from .ingest import clean_tweet, load_stock_csv, load_tweets
from .mapping import (
    MemoryKernel,
    daily_aggregate,
    join_with_stock,
    load_master_csv,
    memory_weighted_map,
    write_master_csv,
)
from .sentiment import VARIANTS, ScorerConfig, score_corpus, write_scores_csv


def _add_clean(sub):
    p = sub.add_parser("clean", help="normalize tweet text")
    p.add_argument("--tweets", required=True, help="input tweets (JSON lines)")
    p.add_argument("--out", required=True, help="output JSON lines with cleaned text")


def _add_score(sub):
    p = sub.add_parser("score", help="score tweets into a score CSV")
    p.add_argument("--tweets", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scorer", default="lexicon", choices=["lexicon", "precomputed"])
    p.add_argument("--scores-file", default=None, help="source CSV for precomputed scores")
    p.add_argument("--variants", default=",".join(VARIANTS), help="comma-separated variant names")


def _add_map(sub):
    p = sub.add_parser("map", help="map scores onto the trading calendar and join with stock")
    p.add_argument("--stock", required=True)
    p.add_argument("--tweets", required=True)
    p.add_argument("--scores", default=None, help="precomputed score CSV (default: lexicon scorer)")
    p.add_argument("--variant", default="cleaned_prosus", choices=list(VARIANTS))
    p.add_argument("--memory-days", type=int, default=30)
    p.add_argument("--mode", default="recency", choices=["recency", "literal"])
    p.add_argument("--out", required=True, help="output master CSV")


def _add_train(sub):
    p = sub.add_parser("train", help="train a model on a master CSV")
    p.add_argument("--master", required=True)
    p.add_argument("--lookback", type=int, required=True)
    p.add_argument("--hidden-units", type=int, default=50)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--validation-split", type=float, default=0.1)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--split-ratio", type=float, default=0.8)
    p.add_argument("--fit-scope", default="train_only", choices=["train_only", "full"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-out", required=True, help="output model .npz")
    p.add_argument("--history-out", default=None, help="optional loss-curve CSV")


def _add_evaluate(sub):
    p = sub.add_parser("evaluate", help="evaluate a trained model on a master CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--master", required=True)
    p.add_argument("--split-ratio", type=float, default=0.8)
    p.add_argument("--fit-scope", default="train_only", choices=["train_only", "full"])
    p.add_argument("--units", default="data", choices=["data", "scaled"])
    p.add_argument("--max-lag", type=int, default=14)
    p.add_argument("--out", required=True, help="output report CSV row")
    p.add_argument("--pred-out", default=None, help="optional prediction CSV")


def _add_grid(sub):
    p = sub.add_parser("grid", help="run the full (variant x lookback) sweep")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--stock", default=None)
    p.add_argument("--tweets", default=None, help="comma-separated tweet files")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lookbacks", default=None, help="comma-separated lookbacks")
    p.add_argument("--with-sentiment", dest="with_sentiment", action="store_true", default=None)
    p.add_argument("--without-sentiment", dest="with_sentiment", action="store_false")


def _cmd_clean(args) -> int:
    corpus = load_tweets(args.tweets)
    with open(args.out, "w") as fh:
        for tweet in corpus:
            record = {"id": tweet.id, "date": tweet.date.isoformat(), "text": tweet.cleaned_text}
            if tweet.pos_tagged_text is not None:
                record["pos_text"] = tweet.pos_tagged_text
            fh.write(json.dumps(record) + "\n")
    print(f"cleaned {len(corpus)} tweets -> {args.out}")
    return 0


def _cmd_score(args) -> int:
    corpus = load_tweets(args.tweets)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    config = ScorerConfig(kind=args.scorer, source=args.scores_file)
    table = score_corpus(config, corpus, variants)
    write_scores_csv(table, corpus, args.out)
    print(f"scored {len(corpus)} tweets x {len(variants)} variants -> {args.out}")
    return 0


def _cmd_map(args) -> int:
    stock = load_stock_csv(args.stock)
    corpus = load_tweets(args.tweets)
    if args.scores:
        config = ScorerConfig(kind="precomputed", source=args.scores)
    else:
        config = ScorerConfig(kind="lexicon")
    table = score_corpus(config, corpus, [args.variant])
    daily = daily_aggregate(table, args.variant, corpus, stock.calendar)
    mapped = memory_weighted_map(daily, MemoryKernel(args.memory_days, args.mode))
    master = join_with_stock(mapped, stock)
    write_master_csv(master, args.out)
    print(f"mapped {len(corpus)} tweets onto {len(stock)} trading days -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    master = load_master_csv(args.master)
    scalers = ds.fit_scalers(master, args.split_ratio, args.fit_scope)
    scaled = ds.transform(scalers, master)
    train_part, _ = ds.chronological_split(scaled, args.split_ratio)
    windows = ds.make_windows(train_part, args.lookback)
    model = nn.init_model(
        nn.ModelConfig(
            hidden_units=args.hidden_units,
            input_shape=(args.lookback, len(master.columns)),
            seed=args.seed,
        )
    )
    cfg = nn.TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        validation_split=args.validation_split,
        patience=args.patience,
        learning_rate=args.learning_rate,
        seed=args.seed,
    )
    history = nn.train(model, windows, cfg)
    nn.save_model(model, args.model_out)
    if args.history_out:
        with open(args.history_out, "w") as fh:
            fh.write("epoch,train_loss,val_loss\n")
            for epoch, (tl, vl) in enumerate(zip(history.train_loss, history.val_loss)):
                fh.write(f"{epoch},{tl!r},{vl!r}\n")
    print(
        f"trained {history.n_epochs} epochs (best {history.best_epoch}, "
        f"stopped_early={history.stopped_early}) -> {args.model_out}"
    )
    return 0


def _cmd_evaluate(args) -> int:
    model = nn.load_model(args.model)
    lookback = model.config.input_shape[0]
    master = load_master_csv(args.master)
    scalers = ds.fit_scalers(master, args.split_ratio, args.fit_scope)
    scaled = ds.transform(scalers, master)
    _, test_part = ds.chronological_split(scaled, args.split_ratio)
    windows = ds.make_windows(test_part, lookback)
    pred_scaled = nn.predict(model, windows)
    target = master.target_column
    pred_data = ds.inverse_transform(scalers, target, pred_scaled)
    actual_data = ds.inverse_transform(scalers, target, windows.y)
    if args.units == "scaled":
        pred_eval, actual_eval = pred_scaled, windows.y
    else:
        pred_eval, actual_eval = pred_data, actual_data
    mae, rmse, r2 = em.compute_metrics(pred_eval, actual_eval)
    offset, acc = em.best_time_offset(pred_eval, actual_eval, min(args.max_lag, len(pred_eval) - 2))
    with open(args.out, "w") as fh:
        fh.write(",".join(harness.SUMMARY_COLUMNS) + "\n")
        fh.write(
            f"{Path(args.master).stem},external,{lookback},,"
            f"{r2!r},{rmse!r},{mae!r},{offset},{acc!r},{args.units}\n"
        )
    if args.pred_out:
        with open(args.pred_out, "w") as fh:
            fh.write("date,actual,predicted\n")
            for d, a, p in zip(test_part.calendar[lookback:], actual_data, pred_data):
                fh.write(f"{d.isoformat()},{float(a)!r},{float(p)!r}\n")
    print(f"evaluated {len(pred_eval)} predictions -> {args.out}")
    return 0


def _cmd_grid(args) -> int:
    overrides = {
        "stock_file": args.stock,
        "output_dir": args.out_dir,
        "seed": args.seed,
        "epochs": args.epochs,
        "with_sentiment": args.with_sentiment,
    }
    if args.tweets is not None:
        overrides["tweet_files"] = [f.strip() for f in args.tweets.split(",") if f.strip()]
    if args.lookbacks is not None:
        overrides["lookbacks"] = [int(w) for w in args.lookbacks.split(",")]
    cfg = harness.load_config(args.config, overrides)
    records = harness.run_grid(cfg)
    n_failed = sum(1 for r in records if not r.ok)
    print(f"grid finished: {len(records) - n_failed} ok, {n_failed} failed")
    return 1 if n_failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="sentistock", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_clean(sub)
    _add_score(sub)
    _add_map(sub)
    _add_train(sub)
    _add_evaluate(sub)
    _add_grid(sub)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)

    handlers = {
        "clean": _cmd_clean,
        "score": _cmd_score,
        "map": _cmd_map,
        "train": _cmd_train,
        "evaluate": _cmd_evaluate,
        "grid": _cmd_grid,
    }
    try:
        return handlers[args.command](args)
    except (SentiStockError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

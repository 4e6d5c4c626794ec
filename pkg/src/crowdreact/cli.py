"""Command-line entry points: dataset builds, training, evaluation, serving.

Every invocation appends a run record (config digest, input digest, output
digests) to the state directory, so builds can be audited and replayed.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from contextlib import contextmanager
from dataclasses import replace
from datetime import date
from pathlib import Path

import click

from .config import EngineConfig, load_config
from .corpus import RemoteTagger, annotate_topics, ingest_tweets, read_tweet_dump
from .errors import (
    CoverageMismatch,
    CrowdReactError,
    MissingPrediction,
    ModelNotLoaded,
    ParaphraserUnavailable,
    ProviderUnavailable,
    RecordError,
    RemoteScorerUnavailable,
    RequestInvalid,
    TaggerUnavailable,
    UnmatchedPairId,
)
from .evaluation import (
    PredictionEntry,
    PredictionSet,
    evaluate,
    read_predictions,
    render_report,
    significance,
    write_predictions,
)
from .generator import explain
from .pairing import (
    build_pairs,
    corpus_stats,
    read_pairs,
    render_stats_table,
    temporal_split,
    write_pairs,
)
from .runlog import RunLog
from .scorer import AssemblyMode, load_model, predict, save_model, train
from .service import Engine, create_app

_EXIT_CODES: tuple[tuple[type, int], ...] = (
    (CoverageMismatch, 4),
    (UnmatchedPairId, 4),
    (MissingPrediction, 4),
    (ProviderUnavailable, 3),
    (ParaphraserUnavailable, 3),
    (RemoteScorerUnavailable, 3),
    (TaggerUnavailable, 3),
    (ModelNotLoaded, 3),
    (RecordError, 2),
    (RequestInvalid, 2),
)


def _exit_code(error: CrowdReactError) -> int:
    for cls, code in _EXIT_CODES:
        if isinstance(error, cls):
            return code
    return 1


def _fail(error: CrowdReactError) -> None:
    click.echo(f"error[{error.code}]: {error.message}", err=True)
    sys.exit(_exit_code(error))


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _combined_digest(digests: dict[str, str]) -> str:
    lines = "\n".join(f"{name}:{digest}" for name, digest in sorted(digests.items()))
    return hashlib.sha256(lines.encode("utf-8")).hexdigest()


def _runlog(config: EngineConfig) -> RunLog:
    return RunLog(Path(config.state_dir) / "runs.ldjson")


@contextmanager
def _train_lock(config: EngineConfig):
    """At most one train run at a time, enforced via a lock record on disk."""

    lock_path = Path(config.state_dir) / "train.lock"
    lock_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise RequestInvalid(
            f"another train run holds {lock_path}; remove the lock if it is stale"
        ) from None
    try:
        os.write(fd, f"pid {os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        lock_path.unlink(missing_ok=True)


@click.group()
@click.option("--config", "config_path", default=None, help="Engine config JSON file.")
@click.option("--cache-dir", default=None, help="Response cache directory.")
@click.option("--state-dir", default=None, help="Run log / state directory.")
@click.option("--model-path", default=None, help="Pairwise model file.")
@click.pass_context
def main(ctx: click.Context, config_path, cache_dir, state_dir, model_path) -> None:
    """Crowd-reaction assessment engine."""

    ctx.obj = load_config(
        config_path,
        overrides={"cache_dir": cache_dir, "state_dir": state_dir, "model_path": model_path},
    )


@main.group()
def cred() -> None:
    """Pair dataset commands."""


@cred.command("build")
@click.option("--tweets", "tweets_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--tagger", "tagger_endpoint", default=None, help="Topic tagger endpoint.")
@click.option("--strict", is_flag=True, help="Fail on the first invalid record.")
@click.option("--split-date", default=None, help="Train/valid boundary (YYYY-MM-DD).")
@click.option("--order-seed", default=None, type=int, help="Presentation-order seed.")
@click.pass_obj
def cred_build(config: EngineConfig, tweets_path, out_dir, tagger_endpoint, strict, split_date, order_seed) -> None:
    """Ingest a tweet dump, build labeled pairs, split, and report statistics."""

    try:
        records, provenance = read_tweet_dump(tweets_path)
        result = ingest_tweets(records, config.ingest_config(strict=strict), provenance=provenance)
        corpus = result.corpus

        endpoint = tagger_endpoint or config.tagger_endpoint
        if any(t.topic is None for t in corpus):
            if not endpoint:
                raise RequestInvalid(
                    "corpus has unannotated tweets and no tagger endpoint is configured"
                )
            corpus = annotate_topics(
                corpus, RemoteTagger(endpoint), vocabulary=config.topic_vocabulary
            )

        pairing = config.pairing
        if order_seed is not None:
            pairing = replace(pairing, order_seed=order_seed)
        pairs = build_pairs(corpus, pairing)
        boundary = date.fromisoformat(split_date) if split_date else config.split_date
        train_pairs, valid_pairs = temporal_split(pairs, boundary)
        stats = corpus_stats(pairs)

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_pairs(out / "pairs.ldjson", pairs)
        write_pairs(out / "train_pairs.ldjson", train_pairs)
        write_pairs(out / "valid_pairs.ldjson", valid_pairs)
        (out / "stats.txt").write_text(render_stats_table(stats) + "\n", encoding="utf-8")
        (out / "stats.json").write_text(
            json.dumps(stats.as_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        (out / "ingest_report.json").write_text(
            json.dumps(result.report.as_dict(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )

        digests = {
            name: _file_digest(out / name)
            for name in (
                "pairs.ldjson",
                "train_pairs.ldjson",
                "valid_pairs.ldjson",
                "stats.txt",
                "stats.json",
                "ingest_report.json",
            )
        }
        combined = _combined_digest(digests)
        with _runlog(config).record(
            "build", config_digest=config.digest(), inputs_digest=_combined_digest(provenance)
        ) as record:
            record.outputs = {"dir": str(out), "files": digests, "combined": combined}

        click.echo(
            f"accepted {result.report.accepted} tweets, rejected {result.report.rejected}; "
            f"{len(pairs)} pairs ({len(train_pairs)} train / {len(valid_pairs)} valid)"
        )
        for name, digest in sorted(digests.items()):
            click.echo(f"{digest}  {name}")
        click.echo(f"{combined}  (combined)")
    except CrowdReactError as err:
        _fail(err)


@main.group()
def ggea() -> None:
    """Generator-guided scorer commands."""


def _pairs_and_tweets(config: EngineConfig, pairs_path: str):
    pairs = read_pairs(pairs_path, config.ingest_config())
    tweets = {}
    for pair in pairs:
        tweets.setdefault(pair.t1.id, pair.t1)
        tweets.setdefault(pair.t2.id, pair.t2)
    return pairs, tweets


def _explanations_for(config: EngineConfig, engine: Engine, tweets: dict, provider_name):
    provider = config.provider(provider_name)
    return {
        tweet_id: explain(tweet, provider, engine.cache)
        for tweet_id, tweet in sorted(tweets.items())
    }


@ggea.command("explain")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--provider", "provider_name", default=None)
@click.pass_obj
def ggea_explain(config: EngineConfig, pairs_path, provider_name) -> None:
    """Generate (or replay) engagement explanations for every tweet in a pair file."""

    try:
        engine = Engine(config)
        _, tweets = _pairs_and_tweets(config, pairs_path)
        explanations = _explanations_for(config, engine, tweets, provider_name)
        with _runlog(config).record(
            "explain", config_digest=config.digest(), inputs_digest=_file_digest(Path(pairs_path))
        ) as record:
            record.outputs = {"tweets": len(explanations), "cache_dir": config.cache_dir}
        click.echo(f"explanations cached for {len(explanations)} tweets in {config.cache_dir}")
    except CrowdReactError as err:
        _fail(err)


@ggea.command("train")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--mode", default=None, help="pair_only | pair_plus_explanations | explanations_only")
@click.option("--provider", "provider_name", default=None)
@click.option("--seed", default=None, type=int)
@click.pass_obj
def ggea_train(config: EngineConfig, pairs_path, out_path, mode, provider_name, seed) -> None:
    """Train the pairwise scorer and write the model file plus manifest."""

    try:
        engine = Engine(config)
        pairs, tweets = _pairs_and_tweets(config, pairs_path)
        assembly = AssemblyMode.parse(mode) if mode else config.assembly_mode
        train_config = config.train
        if seed is not None:
            train_config = replace(train_config, seed=seed)

        with _train_lock(config):
            explanations = {}
            if assembly.needs_explanations:
                explanations = _explanations_for(config, engine, tweets, provider_name)
            model = train(pairs, explanations, train_config, assembly)
            save_model(model, out_path)

        digest = _file_digest(Path(out_path))
        with _runlog(config).record(
            "train", config_digest=config.digest(), inputs_digest=_file_digest(Path(pairs_path))
        ) as record:
            record.outputs = {"model": str(out_path), "digest": digest, "mode": assembly.value}
        click.echo(f"trained on {len(pairs)} pairs (mode={assembly.value})")
        click.echo(f"final epoch loss: {model.epoch_losses[-1]:.6f}")
        click.echo(f"{digest}  {out_path}")
    except CrowdReactError as err:
        _fail(err)


@ggea.command("eval")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--predictions", "predictions_path", default=None, type=click.Path(exists=True))
@click.option("--model", "model_path", default=None, type=click.Path(exists=True))
@click.option("--mode", default=None)
@click.option("--provider", "provider_name", default=None)
@click.option("--baseline", "baseline_path", default=None, type=click.Path(exists=True))
@click.option("--iterations", default=10_000, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--out-prefix", default=None, help="Write <prefix>.txt and <prefix>.json reports.")
@click.option("--emit-predictions", "emit_path", default=None, type=click.Path())
@click.pass_obj
def ggea_eval(
    config: EngineConfig, pairs_path, predictions_path, model_path, mode,
    provider_name, baseline_path, iterations, seed, out_prefix, emit_path,
) -> None:
    """Evaluate a prediction file or a model over a pair file."""

    try:
        pairs, tweets = _pairs_and_tweets(config, pairs_path)
        if predictions_path:
            preds = read_predictions(predictions_path)
        elif model_path:
            engine = Engine(config)
            model = load_model(model_path)
            assembly = AssemblyMode.parse(mode) if mode else config.assembly_mode
            explanations = {}
            if assembly.needs_explanations:
                explanations = _explanations_for(config, engine, tweets, provider_name)
            entries = []
            for pair in pairs:
                e1 = explanations[pair.t1.id].text if explanations else None
                e2 = explanations[pair.t2.id].text if explanations else None
                scored = predict(model, pair.t1.text, pair.t2.text, e1, e2, assembly)
                entries.append(
                    PredictionEntry(pair_id=pair.pair_id, verdict=scored.verdict, p_t1=scored.p_t1)
                )
            preds = PredictionSet(system_id=f"model:{Path(model_path).name}", entries=entries)
        else:
            raise RequestInvalid("provide --predictions or --model")

        if emit_path:
            write_predictions(emit_path, preds)
        report = evaluate(preds, pairs, vocabulary=config.topic_vocabulary)
        if baseline_path:
            baseline = read_predictions(baseline_path)
            report.significance = significance(preds, baseline, pairs, iterations, seed)

        text = render_report(report)
        click.echo(text, nl=False)
        if out_prefix:
            Path(f"{out_prefix}.txt").write_text(text, encoding="utf-8")
            Path(f"{out_prefix}.json").write_text(
                json.dumps(report.as_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
            )
        with _runlog(config).record(
            "eval", config_digest=config.digest(), inputs_digest=_file_digest(Path(pairs_path))
        ) as record:
            record.outputs = {"system_id": preds.system_id, "overall": report.overall.__dict__}
    except CrowdReactError as err:
        _fail(err)


@ggea.command("assess")
@click.option("--t1", required=True)
@click.option("--t2", required=True)
@click.option("--with-explanations", is_flag=True)
@click.pass_obj
def ggea_assess(config: EngineConfig, t1, t2, with_explanations) -> None:
    """Score one comparison with the configured scorer."""

    try:
        response = Engine(config).assess(t1, t2, with_explanations)
        click.echo(json.dumps(response, indent=2, sort_keys=True))
    except CrowdReactError as err:
        _fail(err)


@main.command("compose")
@click.option("--draft", required=True)
@click.option("--n", "n_candidates", default=None, type=int)
@click.pass_obj
def compose(config: EngineConfig, draft, n_candidates) -> None:
    """Paraphrase a draft and pick the candidate predicted to react best."""

    try:
        response = Engine(config).compose(draft, n_candidates)
        click.echo(json.dumps(response, indent=2, sort_keys=True))
        click.echo(f"winner: {response['winner']}")
    except CrowdReactError as err:
        _fail(err)


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8080, type=int)
@click.pass_obj
def serve(config: EngineConfig, host, port) -> None:
    """Run the /v1 HTTP service."""

    import uvicorn

    engine = Engine(config)
    with _runlog(config).record("serve", config_digest=config.digest()) as record:
        record.outputs = {"host": host, "port": port}
        uvicorn.run(create_app(engine), host=host, port=port)


if __name__ == "__main__":
    main()

"""Command-line entry point: download / extract / stats / train / nn / eval.

One tool with subcommands sharing a flat key=value config file; values from
the file are overridden by explicit flags. Progress goes to standard error,
data to files; exit status is 0 on success, 1 when some filings failed, and
2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import defaultdict
from pathlib import Path
from typing import Callable, Optional

from . import __version__
from .cleaning import RawFiling, clean
from .edgar_client import CrawlConfig, EdgarClient, select_filings
from .embeddings import (
    TextCorpus,
    TrainConfig,
    export_vectors,
    import_vectors,
    nearest_neighbors,
    train,
)
from .errors import ConfigError, DownloadError, EdgarTextError, ExtractionError
from .hypernyms import ClassifierConfig, cross_validate, load_hypernym_dataset
from .items import (
    ALL_ITEMS,
    SCHEMA_VERSION,
    extract,
    iter_item_texts,
    write_records_jsonl,
)
from .stats import report, summarize, summarize_dir, write_coverage_csv

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2


def _bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _int_list(value: str) -> list[int]:
    return [int(v) for v in value.replace(",", " ").split()]


def _str_list(value: str) -> list[str]:
    return [v for v in value.replace(",", " ").split()]


# Every key a config file may set, with its parser. Unknown keys are rejected.
KEY_TYPES: dict[str, Callable] = {
    "start_year": int,
    "end_year": int,
    "ciks": _int_list,
    "forms": _str_list,
    "include_variants": _bool,
    "rate_limit": float,
    "user_agent": str,
    "cache_dir": str,
    "output_dir": str,
    "input_dir": str,
    "base_url": str,
    "index_url_pattern": str,
    "timeout": float,
    "workers": int,
    "items": _str_list,
    "pretty": _bool,
    "csv": str,
    "out": str,
    "dim": int,
    "vocab": int,
    "window": int,
    "negatives": int,
    "epochs": int,
    "lr": float,
    "subsample": float,
    "min_count": int,
    "seed": int,
    "deterministic": _bool,
    "vectors": str,
    "dataset": str,
    "folds": int,
    "k": int,
    "query": str,
    "exclude_inflections": _bool,
    "report": str,
    "l2": float,
    "max_iter": int,
}


def load_config_file(path: Path) -> dict:
    """Parse a flat key = value config file; '#' starts a comment."""
    values: dict = {}
    for line_no, raw in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KEY_TYPES:
            raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
        try:
            values[key] = KEY_TYPES[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{line_no}: bad value for {key}: {exc}") from exc
    return values


def _require(resolved: dict, *keys: str) -> None:
    missing = [k for k in keys if resolved.get(k) in (None, "")]
    if missing:
        raise ConfigError(f"missing required option(s): {', '.join(missing)}")


def _log_resolved(command: str, resolved: dict) -> None:
    shown = " ".join(f"{k}={resolved[k]!r}" for k in sorted(resolved))
    log.info("%s config: %s", command, shown)


# -- subcommand implementations --------------------------------------------------


_DOWNLOAD_DEFAULTS = {
    "start_year": 1993,
    "end_year": 2020,
    "ciks": None,
    "forms": ["10-K"],
    "include_variants": False,
    "rate_limit": 10.0,
    "user_agent": "",
    "cache_dir": "cache",
    "output_dir": "output",
    "base_url": None,
    "index_url_pattern": None,
    "timeout": 30.0,
    # capped: beyond ~8 workers the shared rate limiter dominates anyway
    "workers": min(os.cpu_count() or 1, 8),
}


def cmd_download(resolved: dict) -> int:
    _require(resolved, "user_agent", "output_dir")
    kwargs = dict(
        start_year=resolved["start_year"],
        end_year=resolved["end_year"],
        cik_filter=frozenset(resolved["ciks"]) if resolved["ciks"] else None,
        form_types=frozenset(resolved["forms"]),
        rate_limit=resolved["rate_limit"],
        user_agent=resolved["user_agent"],
        cache_dir=Path(resolved["cache_dir"]),
        output_dir=Path(resolved["output_dir"]),
        timeout=resolved["timeout"],
        workers=resolved["workers"],
    )
    if resolved["base_url"]:
        kwargs["base_url"] = resolved["base_url"]
    if resolved["index_url_pattern"]:
        kwargs["index_url_pattern"] = resolved["index_url_pattern"]
    config = CrawlConfig(**kwargs)
    if resolved["include_variants"]:
        config = config.with_variants()
    config.validate()
    client = EdgarClient(config)

    rows = []
    index_failures = 0
    for year in range(config.start_year, config.end_year + 1):
        for quarter in (1, 2, 3, 4):
            try:
                rows.extend(client.fetch_index(year, quarter))
            except DownloadError as exc:
                index_failures += 1
                log.error("index %d-QTR%d failed: %s", year, quarter, exc)
    selected = select_filings(rows, config)
    log.info("selected %d filing(s) from %d index row(s)", len(selected), len(rows))

    config.output_dir.mkdir(parents=True, exist_ok=True)
    outcome = client.download_many(
        selected, failures_path=config.output_dir / "failures.jsonl"
    )
    manifest = config.output_dir / "downloads.jsonl"
    with manifest.open("w", encoding="utf-8") as fh:
        for filing in outcome.filings:
            meta = filing.meta
            fh.write(
                json.dumps(
                    {
                        "cik": meta.cik,
                        "company_name": meta.company_name,
                        "form_type": meta.form_type,
                        "date_filed": meta.date_filed.isoformat(),
                        "archive_path": meta.archive_path,
                        "accession": meta.accession,
                        "cache_path": str(
                            config.cache_dir / "filings" / f"{meta.accession}.txt"
                        ),
                    }
                )
                + "\n"
            )
    log.info(
        "downloaded %d filing(s), %d failure(s); manifest at %s",
        len(outcome.filings), len(outcome.failures), manifest,
    )
    return EXIT_PARTIAL if (outcome.failures or index_failures) else EXIT_OK


_EXTRACT_DEFAULTS = {
    "input_dir": None,
    "output_dir": None,
    "items": None,
    "pretty": False,
}


def cmd_extract(resolved: dict) -> int:
    _require(resolved, "input_dir", "output_dir")
    wanted = None
    if resolved["items"]:
        wanted = [code.upper().removeprefix("ITEM_") for code in resolved["items"]]
        unknown = set(wanted) - ALL_ITEMS
        if unknown:
            raise ConfigError(f"unknown item code(s): {', '.join(sorted(unknown))}")
    input_dir = Path(resolved["input_dir"])
    output_dir = Path(resolved["output_dir"])
    sources = sorted(input_dir.rglob("*.txt"))
    if not sources:
        raise ConfigError(f"no .txt filings under {input_dir}")
    output_dir.mkdir(parents=True, exist_ok=True)

    by_year = defaultdict(list)
    failed = 0
    for path in sources:
        try:
            raw = RawFiling.from_bytes(path.read_bytes(), source_name=path.name)
            record = extract(clean(raw), wanted)
        except ExtractionError as exc:
            failed += 1
            log.error("extraction failed for %s: %s", path.name, exc)
            continue
        by_year[record.year].append(record)
        if resolved["pretty"]:
            pretty_path = output_dir / f"{path.stem}.json"
            pretty_path.write_text(
                json.dumps(record.to_dict(), indent=2, ensure_ascii=False) + "\n",
                "utf-8",
            )
    for year, records in sorted(by_year.items()):
        out_path = output_dir / f"{year}.jsonl"
        out_path.unlink(missing_ok=True)
        write_records_jsonl(records, out_path)
        write_coverage_csv(summarize(records), output_dir / f"{year}.items.csv")
        log.info("wrote %d record(s) to %s", len(records), out_path)
    log.info("extracted %d filing(s), %d failure(s)", len(sources) - failed, failed)
    return EXIT_PARTIAL if failed else EXIT_OK


_STATS_DEFAULTS = {"input_dir": None, "csv": None}


def cmd_stats(resolved: dict) -> int:
    _require(resolved, "input_dir")
    summary = summarize_dir(Path(resolved["input_dir"]))
    print(report(summary))
    if resolved["csv"]:
        write_coverage_csv(summary, Path(resolved["csv"]))
    return EXIT_OK


_TRAIN_DEFAULTS = {
    "input_dir": None,
    "out": "vectors.txt",
    "dim": 200,
    "vocab": 100_000,
    "window": 5,
    "negatives": 5,
    "epochs": 5,
    "lr": 0.025,
    "subsample": 1e-3,
    "min_count": 5,
    "seed": 1,
    "deterministic": False,
    "workers": 1,
}


def cmd_train(resolved: dict) -> int:
    _require(resolved, "input_dir", "out")
    config = TrainConfig(
        dim=resolved["dim"],
        window=resolved["window"],
        negatives=resolved["negatives"],
        epochs=resolved["epochs"],
        initial_lr=resolved["lr"],
        subsample_t=resolved["subsample"],
        min_count=resolved["min_count"],
        max_vocab=resolved["vocab"],
        seed=resolved["seed"],
        workers=resolved["workers"],
        deterministic=resolved["deterministic"] or resolved["workers"] == 1,
    )
    config.validate()
    input_dir = Path(resolved["input_dir"])
    corpus = TextCorpus(lambda: iter_item_texts(input_dir))
    model = train(corpus, config)
    export_vectors(model, Path(resolved["out"]))
    log.info(
        "trained %d vectors of dim %d; wrote %s",
        len(model.vocab), model.dim, resolved["out"],
    )
    return EXIT_OK


_NN_DEFAULTS = {"vectors": None, "query": None, "k": 5, "exclude_inflections": False}


def cmd_nn(resolved: dict) -> int:
    _require(resolved, "vectors", "query")
    model = import_vectors(Path(resolved["vectors"]))
    neighbors = nearest_neighbors(
        model,
        resolved["query"],
        k=resolved["k"],
        exclude_inflections=resolved["exclude_inflections"],
    )
    for token, score in neighbors:
        print(f"{token}\t{score:.4f}")
    return EXIT_OK


_EVAL_DEFAULTS = {
    "vectors": None,
    "dataset": None,
    "folds": 10,
    "seed": 13,
    "report": None,
    "l2": 1e-4,
    "max_iter": 2000,
}


def cmd_eval(resolved: dict) -> int:
    _require(resolved, "vectors", "dataset")
    model = import_vectors(Path(resolved["vectors"]))
    dataset = load_hypernym_dataset(Path(resolved["dataset"]))
    result = cross_validate(
        dataset,
        model,
        k=resolved["folds"],
        seed=resolved["seed"],
        config=ClassifierConfig(l2=resolved["l2"], max_iter=resolved["max_iter"]),
    )
    print(f"accuracy  {result.accuracy:.4f}")
    print(f"mean_rank {result.mean_rank:.4f}")
    print(f"folds     {result.n_folds}")
    if result.oov_terms:
        print(f"oov_terms {result.oov_terms}")
    if resolved["report"]:
        out = Path(resolved["report"])
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(result.to_dict(), indent=2) + "\n", "utf-8")
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------

_COMMANDS = {
    "download": (cmd_download, _DOWNLOAD_DEFAULTS),
    "extract": (cmd_extract, _EXTRACT_DEFAULTS),
    "stats": (cmd_stats, _STATS_DEFAULTS),
    "train": (cmd_train, _TRAIN_DEFAULTS),
    "nn": (cmd_nn, _NN_DEFAULTS),
    "eval": (cmd_eval, _EVAL_DEFAULTS),
}

S = argparse.SUPPRESS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgartext",
        description="Download SEC 10-K filings, build an item-split text "
        "corpus, train skip-gram word vectors, and evaluate them.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"edgartext {__version__} (record schema v{SCHEMA_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(sp, *names, **kwargs):
        kwargs.setdefault("default", S)
        sp.add_argument(*names, **kwargs)

    p = sub.add_parser("download", help="fetch 10-K filings from the archive")
    add(p, "--start-year", dest="start_year", type=int)
    add(p, "--end-year", dest="end_year", type=int)
    add(p, "--ciks", dest="ciks", type=_int_list, metavar="CIK[,CIK...]")
    add(p, "--forms", dest="forms", type=_str_list, metavar="FORM[,FORM...]")
    add(p, "--include-variants", dest="include_variants", action="store_true",
        help="also accept 10-K405 / 10-KSB / 10-K/A")
    add(p, "--rate-limit", dest="rate_limit", type=float)
    add(p, "--user-agent", dest="user_agent")
    add(p, "--cache-dir", dest="cache_dir")
    add(p, "--output-dir", dest="output_dir")
    add(p, "--base-url", dest="base_url",
        help="archive base URL; file:// URLs replay a local mirror offline")
    add(p, "--index-url-pattern", dest="index_url_pattern")
    add(p, "--timeout", dest="timeout", type=float)
    add(p, "--workers", dest="workers", type=int)

    p = sub.add_parser("extract", help="split raw filings into item JSON records")
    add(p, "--input-dir", dest="input_dir")
    add(p, "--output-dir", dest="output_dir")
    add(p, "--items", dest="items", type=_str_list, metavar="1A,7,7A")
    add(p, "--pretty", dest="pretty", action="store_true",
        help="also write one indented JSON file per filing")

    p = sub.add_parser("stats", help="summarize an extracted corpus")
    add(p, "--input-dir", dest="input_dir")
    add(p, "--csv", dest="csv", help="write per-item coverage CSV here")

    p = sub.add_parser("train", help="train skip-gram vectors on a corpus")
    add(p, "--input-dir", dest="input_dir")
    add(p, "--out", dest="out")
    add(p, "--dim", dest="dim", type=int)
    add(p, "--vocab", dest="vocab", type=int)
    add(p, "--window", dest="window", type=int)
    add(p, "--negatives", dest="negatives", type=int)
    add(p, "--epochs", dest="epochs", type=int)
    add(p, "--lr", dest="lr", type=float)
    add(p, "--subsample", dest="subsample", type=float)
    add(p, "--min-count", dest="min_count", type=int)
    add(p, "--seed", dest="seed", type=int)
    add(p, "--deterministic", dest="deterministic", action="store_true")
    add(p, "--workers", dest="workers", type=int)

    p = sub.add_parser("nn", help="cosine nearest neighbors of a word")
    add(p, "--vectors", dest="vectors")
    add(p, "--query", dest="query")
    add(p, "--k", dest="k", type=int)
    add(p, "--exclude-inflections", dest="exclude_inflections", action="store_true",
        help="filter bare singular/plural variants of the query")

    p = sub.add_parser("eval", help="hypernym classification cross-validation")
    add(p, "--vectors", dest="vectors")
    add(p, "--dataset", dest="dataset")
    add(p, "--folds", dest="folds", type=int)
    add(p, "--seed", dest="seed", type=int)
    add(p, "--report", dest="report", help="write a JSON report here")
    add(p, "--l2", dest="l2", type=float)
    add(p, "--max-iter", dest="max_iter", type=int)

    for name, sp in sub.choices.items():
        sp.add_argument("--config", default=None, help="flat key=value config file")
        sp.add_argument("--verbose", action="store_true", default=False)
    return parser


def run(argv: Optional[list[str]] = None) -> int:
    """Dispatch one CLI invocation; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    ns = vars(args)
    command = ns.pop("command")
    verbose = ns.pop("verbose", False)
    config_path = ns.pop("config", None)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler, defaults = _COMMANDS[command]
    try:
        file_values = load_config_file(Path(config_path)) if config_path else {}
        resolved = dict(defaults)
        resolved.update({k: v for k, v in file_values.items() if k in defaults})
        resolved.update(ns)
        _log_resolved(command, resolved)
        return handler(resolved)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except EdgarTextError as exc:
        log.error("%s", exc)
        return EXIT_PARTIAL
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_PARTIAL


def main() -> None:  # console-script entry point
    sys.exit(run())


if __name__ == "__main__":
    main()

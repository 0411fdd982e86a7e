"""edgartext: SEC 10-K corpus construction, word vectors, and evaluation.

The pipeline: download raw filings from the EDGAR archive, clean them into
plain text, split the text into the 20 canonical item sections as JSON
records, compute corpus statistics, train skip-gram word vectors, and
evaluate embeddings on hypernym classification.
"""

__version__ = "0.1.0"

from .cleaning import CleanDocument, RawFiling, clean, remove_tables, strip_markup
from .edgar_client import (
    CrawlConfig,
    EdgarClient,
    FilingMetadata,
    HttpTransport,
    RateLimiter,
    parse_master_index,
    select_filings,
)
from .embeddings import (
    EmbeddingModel,
    TextCorpus,
    TrainConfig,
    Vocabulary,
    build_vocab,
    export_vectors,
    import_vectors,
    nearest_neighbors,
    tokenize,
    train,
)
from .errors import (
    ConfigError,
    DownloadError,
    EdgarTextError,
    ExtractionError,
    HttpStatusError,
    OutOfVocabularyError,
    TrainingError,
    TransportError,
    VectorFormatError,
)
from .hypernyms import (
    ClassifierConfig,
    EvalReport,
    HypernymDataset,
    SoftmaxClassifier,
    cross_validate,
    embed_term,
    load_hypernym_dataset,
    rank_of_correct,
    train_classifier,
)
from .items import (
    ITEM_CODES,
    FilingRecord,
    ItemCode,
    extract,
    find_heading_candidates,
    resolve_sections,
    validate_record,
)
from .stats import CorpusSummary, report, summarize

__all__ = [
    "CleanDocument",
    "ClassifierConfig",
    "ConfigError",
    "CorpusSummary",
    "CrawlConfig",
    "DownloadError",
    "EdgarClient",
    "EdgarTextError",
    "EmbeddingModel",
    "EvalReport",
    "ExtractionError",
    "FilingMetadata",
    "FilingRecord",
    "HttpStatusError",
    "HttpTransport",
    "HypernymDataset",
    "ITEM_CODES",
    "ItemCode",
    "OutOfVocabularyError",
    "RateLimiter",
    "RawFiling",
    "SoftmaxClassifier",
    "TextCorpus",
    "TrainConfig",
    "TrainingError",
    "TransportError",
    "VectorFormatError",
    "Vocabulary",
    "build_vocab",
    "clean",
    "cross_validate",
    "embed_term",
    "export_vectors",
    "extract",
    "find_heading_candidates",
    "import_vectors",
    "load_hypernym_dataset",
    "nearest_neighbors",
    "parse_master_index",
    "rank_of_correct",
    "remove_tables",
    "report",
    "resolve_sections",
    "select_filings",
    "strip_markup",
    "summarize",
    "tokenize",
    "train",
    "train_classifier",
    "validate_record",
]

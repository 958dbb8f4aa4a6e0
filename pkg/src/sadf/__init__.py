"""Flow-record anomaly detection: ingestion, encoding, classifiers,
chunked near-real-time detection and benchmarking."""

from .encoding import (
    EncoderConfig,
    FeatureVector,
    FlowEncoder,
    default_config,
    encode_batch,
    encode_record,
    fit_encoder,
    hash_feature,
    select_features,
)
from .engine import (
    AlertSink,
    Chunk,
    ChunkReport,
    DetectionRun,
    PhaseTimings,
    archive_input,
    chunk_stream,
    detect_encoded,
    raise_alert,
    run_detection,
)
from .models import (
    DecisionTree,
    EvalMetrics,
    GaussianNaiveBayes,
    KNearestNeighbors,
    MODEL_REGISTRY,
    PegasosSVM,
    RandomForest,
    evaluate,
    make_model,
)
from .persistence import load_encoder, load_model, save_encoder, save_model
from .schema import (
    DatasetSchema,
    FeatureSpec,
    FlowRecord,
    HeadCounts,
    OfficialFiles,
    RandomSplit,
    RecordPartition,
    load_schema,
    parse_csv,
    select_rows,
    split_by_time,
)

__version__ = "0.1.0"

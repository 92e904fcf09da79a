from .core import (
    BINARY,
    MULTICLASS,
    REGRESSION,
    DataError,
    Dataset,
    EmbeddingMatrix,
    EventSequence,
    TargetLabels,
)
from .folds import FoldPlan, split_folds
from .ingest import (
    IngestError,
    export_embeddings,
    export_labels,
    import_embeddings,
    import_labels,
    ingest_events,
    write_embeddings_csv,
)
from .schema import CATEGORICAL, MISSING_CATEGORY, NUMERIC, EventSchema, FieldSpec, SchemaError
from .store import load_store, save_store

__all__ = [
    "BINARY",
    "CATEGORICAL",
    "MISSING_CATEGORY",
    "MULTICLASS",
    "NUMERIC",
    "DataError",
    "Dataset",
    "EmbeddingMatrix",
    "EventSchema",
    "EventSequence",
    "FieldSpec",
    "FoldPlan",
    "IngestError",
    "SchemaError",
    "TargetLabels",
    "export_embeddings",
    "export_labels",
    "import_embeddings",
    "import_labels",
    "ingest_events",
    "load_store",
    "save_store",
    "split_folds",
    "write_embeddings_csv",
]

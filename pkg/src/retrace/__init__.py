"""Forensic event reconstruction from digital footprints.

The package parses raw footprint records into a typed knowledge base of
subjects, objects, and events, enriches it through monotone inference rules,
scores pairwise event correlations, and renders a provenance-tracked,
correlation-annotated timeline of the incident.
"""

from .correlation import (
    CorrelationConfig,
    CorrelationScore,
    ExpertRule,
    PairCondition,
    TemporalMode,
    correlate_all,
    correlation,
    correlation_KBR,
    correlation_O,
    correlation_S,
    correlation_T,
)
from .errors import InputError, IntegrityError, RetraceError, ValidationError
from .extract import (
    ExtractorRegistry,
    FieldSpec,
    SourceDescriptor,
    SourceFormat,
    extract,
    extract_all,
)
from .inference import (
    Derivation,
    SessionAttributionRule,
    SessionWindow,
    run_inference,
    session_windows,
)
from .intervals import AllenClass, Interval, Timestamp, before_decay, classify
from .kb import (
    AttributeCondition,
    CrimeSceneConfig,
    DigitalScene,
    EventEntity,
    Footprint,
    IllicitPattern,
    KnowledgeBase,
    ObjectEntity,
    Provenance,
    Relation,
    RelationEdge,
    SubjectEntity,
)
from .mapping import (
    DEFAULT_RULES,
    EdgeProduction,
    EntityProduction,
    LookupRef,
    MappingRule,
    map_footprints,
)
from .timeline import (
    PartitionLabel,
    RenderFormat,
    Timeline,
    TimelineEntry,
    build_timeline,
    partition,
    render,
)
from .config import RunConfig, load_config

__version__ = "0.1.0"

__all__ = [
    "AllenClass",
    "AttributeCondition",
    "CorrelationConfig",
    "CorrelationScore",
    "CrimeSceneConfig",
    "DEFAULT_RULES",
    "Derivation",
    "DigitalScene",
    "EdgeProduction",
    "EntityProduction",
    "EventEntity",
    "ExpertRule",
    "ExtractorRegistry",
    "FieldSpec",
    "Footprint",
    "IllicitPattern",
    "InputError",
    "IntegrityError",
    "Interval",
    "KnowledgeBase",
    "LookupRef",
    "MappingRule",
    "ObjectEntity",
    "PairCondition",
    "PartitionLabel",
    "Provenance",
    "Relation",
    "RelationEdge",
    "RenderFormat",
    "RetraceError",
    "RunConfig",
    "SessionAttributionRule",
    "SessionWindow",
    "SourceDescriptor",
    "SourceFormat",
    "SubjectEntity",
    "TemporalMode",
    "Timeline",
    "TimelineEntry",
    "Timestamp",
    "ValidationError",
    "before_decay",
    "build_timeline",
    "classify",
    "correlate_all",
    "correlation",
    "correlation_KBR",
    "correlation_O",
    "correlation_S",
    "correlation_T",
    "extract",
    "extract_all",
    "load_config",
    "map_footprints",
    "partition",
    "render",
    "run_inference",
    "session_windows",
]

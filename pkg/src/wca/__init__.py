"""Zero-shot image classification by weighted visual-text cross alignment.

Localized crops of a query image are cross-aligned with class description
embeddings; a softmax-weighted sum over the resulting similarity matrix
scores each class. Everything runs from precomputed embedding files; no
model runtime is required.
"""

from .backend import DemoEncoder, EncoderBackend, LinearEncoder
from .classify import (
    ClassificationReport,
    DatasetManifest,
    EvaluationReport,
    RunConfig,
    bench_timing,
    classify,
    evaluate,
    explain,
    load_manifest,
    precompute_cache,
)
from .descriptions import DescriptionSet, LabelCatalog, label_prompt, load_descriptions
from .errors import (
    BoundsError,
    CacheInvalidError,
    ConfigError,
    ConstructionError,
    DimensionError,
    DomainError,
    ExplanationUnavailableError,
    FormatError,
    IngestionError,
    MissingEmbeddingError,
    WcaError,
)
from .prompts import (
    CropSpec,
    ImageBuffer,
    PromptConfig,
    apply_alt_prompt,
    apply_crop,
    crop_specs_for_image,
    load_image,
    sample_crop_specs,
)
from .scoring import (
    augmented_image_embedding,
    augmented_text_embedding,
    avg_score,
    clip_score,
    cross_matrix,
    desc_weights,
    llm_score,
    max_score,
    mixed_score,
    patch_weights,
    wca_score,
)
from .theorem import TheoremInstance, construct_instance, counterexample_probe, verify_theorem
from .vecmath import cosine, normalize, softmax
from .wem import PrecomputedStore, read_embedding_file, read_embedding_files, write_embedding_file

__version__ = "0.1.0"

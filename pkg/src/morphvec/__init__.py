"""Skip-gram embeddings with a learnable morphological-neighbor input blend."""

from morphvec.corpus import (
    EmptyVocabularyError,
    NoiseTable,
    TokenStream,
    Vocabulary,
    build_noise_table,
    build_vocab,
    encode_tokens,
    preprocess_text,
    sample_noise,
)
from morphvec.morphology import (
    HyphenationPatterns,
    MorphKind,
    MorphResources,
    SegmentationRules,
    default_resources,
    edit_distance,
    hyphenate,
    lcs_length,
    load_resources,
    segment_morphemes,
    sim_edit,
    sim_lcs,
    sim_morpheme,
    sim_syllable,
    similarity,
)

__all__ = [
    "EmptyVocabularyError",
    "HyphenationPatterns",
    "MorphKind",
    "MorphResources",
    "NoiseTable",
    "SegmentationRules",
    "TokenStream",
    "Vocabulary",
    "build_noise_table",
    "build_vocab",
    "default_resources",
    "edit_distance",
    "encode_tokens",
    "hyphenate",
    "lcs_length",
    "load_resources",
    "preprocess_text",
    "sample_noise",
    "segment_morphemes",
    "sim_edit",
    "sim_lcs",
    "sim_morpheme",
    "sim_syllable",
    "similarity",
]

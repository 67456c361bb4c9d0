//! Content-based recommendation of documentary films by filmmaking
//! dispositif.
//!
//! Films are indexed with descriptors drawn from a faceted thesaurus
//! ([`thesaurus`]), loaded into a [`catalog`], compared through
//! hierarchy-expanded descriptor vectors ([`similarity`]) and recommended in
//! panels of `k` neighbours plus one zero-overlap control film
//! ([`recommender`]). Panel reception is scored by [`evaluation`].

pub mod catalog;
pub mod config;
pub mod evaluation;
pub mod recommender;
pub mod similarity;
pub mod thesaurus;

pub use catalog::{descriptor_vector, ingest_catalog, Catalog, CatalogError, FilmRecord};
pub use config::{ConfigError, Metric, WeightingConfig};
pub use evaluation::{
    coherence_rate, indexing_convergence, load_judgments, CoherenceJudgment, ConvergenceRecord,
    EvaluationError, EvaluationReport, Verdict,
};
pub use recommender::{
    compose_panel_list, explain, recommend, select_control, Explanation, PanelList, RecommendError,
    DEFAULT_K,
};
pub use similarity::{
    pairwise_matrix, shared_descriptors, similarity, DescriptorVector, SimilarityMatrix,
    SimilarityScore,
};
pub use thesaurus::{
    ancestors, parse_thesaurus, validate_thesaurus, Concept, Facet, Thesaurus, ThesaurusError,
    ValidationReport, Violation,
};

//! Top-k recommendation with a zero-overlap control film.
//!
//! Ties are always broken by ascending film id, and rankings compare scores
//! at their published 9-decimal precision.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;
use serde_json::value::RawValue;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::catalog::{Catalog, FilmRecord};
use crate::config::WeightingConfig;
use crate::similarity::{shared_descriptors, similarity, SimilarityScore};
use crate::thesaurus::Facet;

/// Films recommended per panel in the viewing protocol.
pub const DEFAULT_K: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecommendError {
    #[error("unknown film {0:?}")]
    FilmNotFound(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("catalog has {size} films, need more than {k} to recommend {k}")]
    CatalogTooSmall { size: usize, k: usize },
    #[error("no film shares zero descriptors with {0:?}")]
    NoControl(String),
}

impl RecommendError {
    /// Stable machine-readable code used by the CLI and the HTTP API.
    pub fn code(&self) -> &'static str {
        match self {
            RecommendError::FilmNotFound(_) => "film_not_found",
            RecommendError::InvalidK => "invalid_k",
            RecommendError::CatalogTooSmall { .. } => "catalog_too_small",
            RecommendError::NoControl(_) => "no_control",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SharedConcept {
    pub id: String,
    pub label: String,
    pub definition: String,
    pub facet: Facet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    /// In the input film's descriptor order.
    pub shared: Vec<SharedConcept>,
    pub score: SimilarityScore,
}

impl Explanation {
    pub fn shared_ids(&self) -> BTreeSet<String> {
        self.shared.iter().map(|c| c.id.clone()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ExplanationJson::from(self)).expect("explanation serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelList {
    pub input_film: String,
    pub recommended: Vec<(String, SimilarityScore)>,
    pub control: String,
    /// Recommended films plus the control, ordered by title.
    pub presented: Vec<String>,
    pub explanations: BTreeMap<String, Explanation>,
}

impl PanelList {
    /// Compact JSON. `blind` drops the `control` key and the control's
    /// explanation so the control is indistinguishable in `presented`.
    pub fn to_json(&self, blind: bool) -> String {
        let explanations = self
            .explanations
            .iter()
            .filter(|(id, _)| !(blind && **id == self.control))
            .map(|(id, e)| (id.as_str(), ExplanationJson::from(e)))
            .collect();
        let doc = PanelJson {
            input: &self.input_film,
            recommended: self
                .recommended
                .iter()
                .map(|(film, score)| ScoredJson {
                    film,
                    score: score_json(*score),
                })
                .collect(),
            control: (!blind).then_some(self.control.as_str()),
            presented: &self.presented,
            explanations,
        };
        serde_json::to_string(&doc).expect("panel list serializes")
    }

    pub fn is_control(&self, film: &str) -> bool {
        self.control == film
    }
}

#[derive(Serialize)]
struct PanelJson<'a> {
    input: &'a str,
    recommended: Vec<ScoredJson<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    control: Option<&'a str>,
    presented: &'a [String],
    explanations: BTreeMap<&'a str, ExplanationJson<'a>>,
}

#[derive(Serialize)]
struct ScoredJson<'a> {
    film: &'a str,
    score: Box<RawValue>,
}

#[derive(Serialize)]
struct ExplanationJson<'a> {
    shared: &'a [SharedConcept],
    score: Box<RawValue>,
}

impl<'a> From<&'a Explanation> for ExplanationJson<'a> {
    fn from(e: &'a Explanation) -> Self {
        ExplanationJson {
            shared: &e.shared,
            score: score_json(e.score),
        }
    }
}

fn score_json(score: SimilarityScore) -> Box<RawValue> {
    RawValue::from_string(format!("{:.9}", score.value())).expect("decimal literal is valid JSON")
}

fn film<'c>(catalog: &'c Catalog, id: &str) -> Result<&'c FilmRecord, RecommendError> {
    catalog
        .get(id)
        .ok_or_else(|| RecommendError::FilmNotFound(id.to_string()))
}

/// Published similarity of every other film to `input`, in catalog order.
fn scores_against<'c>(
    catalog: &'c Catalog,
    input: &FilmRecord,
    w: &WeightingConfig,
) -> Vec<(&'c FilmRecord, SimilarityScore)> {
    let query = catalog.vector(input, w);
    catalog
        .films()
        .iter()
        .filter(|f| f.id != input.id)
        .map(|f| {
            let s = similarity(&query, &catalog.vector(f, w), w.metric)
                .expect("catalog films have at least one descriptor");
            (f, s.published())
        })
        .collect()
}

/// The `k` films closest to `input`, best first.
pub fn recommend(
    catalog: &Catalog,
    input: &str,
    k: usize,
    w: &WeightingConfig,
) -> Result<Vec<(String, SimilarityScore)>, RecommendError> {
    let input = film(catalog, input)?;
    if k == 0 {
        return Err(RecommendError::InvalidK);
    }
    if catalog.len() <= k {
        return Err(RecommendError::CatalogTooSmall {
            size: catalog.len(),
            k,
        });
    }
    let mut scored = scores_against(catalog, input, w);
    scored.sort_by(|(fa, sa), (fb, sb)| sb.total_cmp(sa).then_with(|| fa.id.cmp(&fb.id)));
    Ok(scored
        .into_iter()
        .take(k)
        .map(|(f, s)| (f.id.clone(), s))
        .collect())
}

/// The least similar film among those sharing no raw descriptor with
/// `input`.
pub fn select_control(
    catalog: &Catalog,
    input: &str,
    w: &WeightingConfig,
) -> Result<String, RecommendError> {
    select_control_excluding(catalog, input, w, &HashSet::new())
}

fn select_control_excluding(
    catalog: &Catalog,
    input: &str,
    w: &WeightingConfig,
    exclude: &HashSet<&str>,
) -> Result<String, RecommendError> {
    let input = film(catalog, input)?;
    scores_against(catalog, input, w)
        .into_iter()
        .filter(|(f, _)| !exclude.contains(f.id.as_str()))
        .filter(|(f, _)| shared_descriptors(input, f).is_empty())
        .min_by(|(fa, sa), (fb, sb)| sa.total_cmp(sb).then_with(|| fa.id.cmp(&fb.id)))
        .map(|(f, _)| f.id.clone())
        .ok_or_else(|| RecommendError::NoControl(input.id.clone()))
}

pub fn explain(
    catalog: &Catalog,
    input: &str,
    output: &str,
    w: &WeightingConfig,
) -> Result<Explanation, RecommendError> {
    let a = film(catalog, input)?;
    let b = film(catalog, output)?;
    let t = catalog.thesaurus();
    let common = shared_descriptors(a, b);
    let shared = a
        .descriptors
        .iter()
        .filter(|d| common.contains(*d))
        .map(|d| {
            let c = t.get(d).expect("catalog descriptors resolve");
            SharedConcept {
                id: c.id.clone(),
                label: c.pref_label.clone(),
                definition: c.definition.clone(),
                facet: t.facet(d).expect("valid thesaurus resolves facets"),
            }
        })
        .collect();
    let score = similarity(&catalog.vector(a, w), &catalog.vector(b, w), w.metric)
        .expect("catalog films have at least one descriptor");
    Ok(Explanation { shared, score })
}

/// Sort key for alphabetical presentation: case and accents folded, with
/// the raw title and id as tie-breakers.
pub fn title_key(title: &str) -> String {
    title
        .nfd()
        .filter(|c| !unicode_normalization::char::is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect()
}

/// The full viewing-protocol panel: `k` recommendations plus one control,
/// presented alphabetically by title.
///
/// The control is chosen among zero-overlap films outside the top `k`.
pub fn compose_panel_list(
    catalog: &Catalog,
    input: &str,
    k: usize,
    w: &WeightingConfig,
) -> Result<PanelList, RecommendError> {
    let recommended = recommend(catalog, input, k, w)?;
    let taken: HashSet<&str> = recommended.iter().map(|(id, _)| id.as_str()).collect();
    let control = select_control_excluding(catalog, input, w, &taken)?;

    let mut presented: Vec<&FilmRecord> = recommended
        .iter()
        .map(|(id, _)| id.as_str())
        .chain(std::iter::once(control.as_str()))
        .map(|id| catalog.get(id).expect("ranked films exist"))
        .collect();
    presented.sort_by_cached_key(|f| (title_key(&f.title), f.title.clone(), f.id.clone()));

    let mut explanations = BTreeMap::new();
    for f in &presented {
        explanations.insert(f.id.clone(), explain(catalog, input, &f.id, w)?);
    }

    Ok(PanelList {
        input_film: input.to_string(),
        recommended,
        control,
        presented: presented.into_iter().map(|f| f.id.clone()).collect(),
        explanations,
    })
}

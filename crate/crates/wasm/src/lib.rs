//! Browser demo over the shipped thesaurus and catalog.
//!
//! The exported functions take and return JSON strings. Each wraps a plain
//! Rust function so the logic is testable without a JS host.

use std::sync::{Arc, OnceLock};

use drec_core::recommender::title_key;
use drec_core::{
    compose_panel_list, explain, ingest_catalog, parse_thesaurus, similarity, Catalog,
    WeightingConfig,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const THESAURUS: &str = include_str!("../../../fixtures/thesaurus.json");
const CATALOG: &str = include_str!("../../../fixtures/catalog.jsonl");

fn corpus() -> &'static Catalog {
    static CORPUS: OnceLock<Catalog> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let t = parse_thesaurus(THESAURUS.as_bytes()).expect("embedded thesaurus is valid");
        ingest_catalog(CATALOG.as_bytes(), Arc::new(t)).expect("embedded catalog is valid")
    })
}

/// An empty string means the default weighting.
fn weights(json: &str) -> Result<WeightingConfig, String> {
    if json.trim().is_empty() {
        return Ok(WeightingConfig::default());
    }
    WeightingConfig::from_json(json.as_bytes()).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct FilmEntry<'a> {
    id: &'a str,
    title: &'a str,
    director: &'a str,
    year: i32,
}

/// Films of the embedded catalog, sorted by title.
pub fn film_list() -> String {
    let mut films: Vec<FilmEntry> = corpus()
        .films()
        .iter()
        .map(|f| FilmEntry {
            id: &f.id,
            title: &f.title,
            director: &f.director,
            year: f.year,
        })
        .collect();
    films.sort_by_cached_key(|f| (title_key(f.title), f.id));
    serde_json::to_string(&films).expect("film list serializes")
}

pub fn panel_json(
    film: &str,
    k: usize,
    weights_json: &str,
    unblind: bool,
) -> Result<String, String> {
    let w = weights(weights_json)?;
    let panel = compose_panel_list(corpus(), film, k, &w).map_err(|e| e.to_string())?;
    Ok(panel.to_json(!unblind))
}

pub fn explain_json(film: &str, other: &str, weights_json: &str) -> Result<String, String> {
    let w = weights(weights_json)?;
    explain(corpus(), film, other, &w)
        .map(|e| e.to_json())
        .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ProfileEntry<'a> {
    id: &'a str,
    title: &'a str,
    score: f64,
    shared: usize,
}

/// Every other film scored against `film`, best first.
pub fn similarity_profile_json(film: &str, weights_json: &str) -> Result<String, String> {
    let w = weights(weights_json)?;
    let cat = corpus();
    let input = cat
        .get(film)
        .ok_or_else(|| format!("unknown film {film:?}"))?;
    let q = cat.vector(input, &w);
    let mut rows: Vec<ProfileEntry> = cat
        .films()
        .iter()
        .filter(|f| f.id != input.id)
        .map(|f| {
            let s = similarity(&q, &cat.vector(f, &w), w.metric).expect("films have descriptors");
            ProfileEntry {
                id: &f.id,
                title: &f.title,
                score: s.published().value(),
                shared: drec_core::shared_descriptors(input, f).len(),
            }
        })
        .collect();
    rows.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(b.id)));
    Ok(serde_json::to_string(&rows).expect("profile serializes"))
}

#[wasm_bindgen]
pub fn films() -> String {
    film_list()
}

#[wasm_bindgen]
pub fn panel(film: &str, k: usize, weights_json: &str, unblind: bool) -> Result<String, JsError> {
    panel_json(film, k, weights_json, unblind).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = explainLink)]
pub fn explain_link(film: &str, other: &str, weights_json: &str) -> Result<String, JsError> {
    explain_json(film, other, weights_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = similarityProfile)]
pub fn similarity_profile(film: &str, weights_json: &str) -> Result<String, JsError> {
    similarity_profile_json(film, weights_json).map_err(|e| JsError::new(&e))
}

//! Film corpus and its descriptor-based indexation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::WeightingConfig;
use crate::similarity::DescriptorVector;
use crate::thesaurus::{Thesaurus, ThesaurusError};

pub const MIN_DESCRIPTORS: usize = 1;
pub const MAX_DESCRIPTORS: usize = 16;
/// Descriptor count used throughout the reference corpus.
pub const CANONICAL_DESCRIPTORS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilmRecord {
    pub id: String,
    pub title: String,
    pub director: String,
    pub year: i32,
    pub duration_min: u32,
    pub synopsis: String,
    pub descriptors: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("line {line}: malformed film record: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate film id {id:?}")]
    DuplicateFilm { line: usize, id: String },
    #[error("line {line}: film {film:?} has unknown descriptor {descriptor:?}")]
    UnknownDescriptor {
        line: usize,
        film: String,
        descriptor: String,
    },
    #[error("line {line}: film {film:?} lists descriptor {descriptor:?} twice")]
    RepeatedDescriptor {
        line: usize,
        film: String,
        descriptor: String,
    },
    #[error("line {line}: film {film:?} has {count} descriptors, expected {MIN_DESCRIPTORS}..={MAX_DESCRIPTORS}")]
    DescriptorCount {
        line: usize,
        film: String,
        count: usize,
    },
    #[error("line {line}: film {film:?}: {message}")]
    InvalidField {
        line: usize,
        film: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestWarning {
    pub line: usize,
    pub film: String,
    pub message: String,
}

/// Validated films bound to the thesaurus they were indexed against.
#[derive(Debug, Clone)]
pub struct Catalog {
    films: Vec<FilmRecord>,
    index: HashMap<String, usize>,
    thesaurus: Arc<Thesaurus>,
    warnings: Vec<IngestWarning>,
}

impl Catalog {
    /// Films in file order.
    pub fn films(&self) -> &[FilmRecord] {
        &self.films
    }

    pub fn len(&self) -> usize {
        self.films.len()
    }

    pub fn is_empty(&self) -> bool {
        self.films.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&FilmRecord> {
        self.index.get(id).map(|&i| &self.films[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn thesaurus(&self) -> &Thesaurus {
        &self.thesaurus
    }

    pub fn thesaurus_arc(&self) -> &Arc<Thesaurus> {
        &self.thesaurus
    }

    /// Soft-bound notices such as a descriptor count other than ten.
    pub fn warnings(&self) -> &[IngestWarning] {
        &self.warnings
    }

    pub fn vector(&self, film: &FilmRecord, w: &WeightingConfig) -> DescriptorVector {
        descriptor_vector(film, &self.thesaurus, w)
            .expect("catalog descriptors resolve in the bound thesaurus")
    }

    /// Vectors for every film, in catalog order.
    pub fn vectors(&self, w: &WeightingConfig) -> Vec<DescriptorVector> {
        self.films.iter().map(|f| self.vector(f, w)).collect()
    }
}

/// Builds a catalog from already-parsed records, applying the same checks as
/// [`ingest_catalog`]. Line numbers in errors are 1-based record positions.
pub fn catalog_from_records(
    records: Vec<FilmRecord>,
    thesaurus: Arc<Thesaurus>,
) -> Result<Catalog, CatalogError> {
    let mut catalog = Catalog {
        films: Vec::with_capacity(records.len()),
        index: HashMap::new(),
        thesaurus,
        warnings: Vec::new(),
    };
    for (i, film) in records.into_iter().enumerate() {
        admit(&mut catalog, film, i + 1)?;
    }
    Ok(catalog)
}

/// Reads a JSON-lines catalog. Blank lines are skipped but still counted.
pub fn ingest_catalog(source: &[u8], thesaurus: Arc<Thesaurus>) -> Result<Catalog, CatalogError> {
    let text = std::str::from_utf8(source).map_err(|e| CatalogError::Parse {
        line: 1 + source[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count(),
        message: "invalid UTF-8".into(),
    })?;
    let mut catalog = Catalog {
        films: Vec::new(),
        index: HashMap::new(),
        thesaurus,
        warnings: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let film: FilmRecord = serde_json::from_str(raw).map_err(|e| CatalogError::Parse {
            line,
            message: e.to_string(),
        })?;
        admit(&mut catalog, film, line)?;
    }
    Ok(catalog)
}

fn admit(catalog: &mut Catalog, film: FilmRecord, line: usize) -> Result<(), CatalogError> {
    let invalid = |message: &str| CatalogError::InvalidField {
        line,
        film: film.id.clone(),
        message: message.to_string(),
    };
    if film.id.is_empty() {
        return Err(invalid("id must not be empty"));
    }
    if film.title.trim().is_empty() {
        return Err(invalid("title must not be empty"));
    }
    if film.duration_min == 0 {
        return Err(invalid("duration_min must be positive"));
    }
    if catalog.index.contains_key(&film.id) {
        return Err(CatalogError::DuplicateFilm {
            line,
            id: film.id.clone(),
        });
    }
    let count = film.descriptors.len();
    if !(MIN_DESCRIPTORS..=MAX_DESCRIPTORS).contains(&count) {
        return Err(CatalogError::DescriptorCount {
            line,
            film: film.id.clone(),
            count,
        });
    }
    let mut seen = HashSet::new();
    for d in &film.descriptors {
        if !seen.insert(d.as_str()) {
            return Err(CatalogError::RepeatedDescriptor {
                line,
                film: film.id.clone(),
                descriptor: d.clone(),
            });
        }
        if !catalog.thesaurus.contains(d) {
            return Err(CatalogError::UnknownDescriptor {
                line,
                film: film.id.clone(),
                descriptor: d.clone(),
            });
        }
    }
    if count != CANONICAL_DESCRIPTORS {
        catalog.warnings.push(IngestWarning {
            line,
            film: film.id.clone(),
            message: format!(
                "{count} descriptors (reference indexation uses {CANONICAL_DESCRIPTORS})"
            ),
        });
    }
    catalog.index.insert(film.id.clone(), catalog.films.len());
    catalog.films.push(film);
    Ok(())
}

/// Hierarchy-expanded weights for one film.
///
/// Each descriptor puts its facet weight on itself and `weight * decay^d` on
/// the ancestor `d` hops up (up to `max_depth` hops). A concept reached from
/// several descriptors keeps the largest contribution.
pub fn descriptor_vector(
    film: &FilmRecord,
    thesaurus: &Thesaurus,
    w: &WeightingConfig,
) -> Result<DescriptorVector, ThesaurusError> {
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    let mut keep_max = |id: &str, value: f64| {
        if value > 0.0 {
            let slot = weights.entry(id.to_string()).or_insert(0.0);
            if value > *slot {
                *slot = value;
            }
        }
    };
    for d in &film.descriptors {
        let base = w.facet_weight(thesaurus.facet(d)?);
        keep_max(d, base);
        for (ancestor, depth) in thesaurus.ancestors(d)? {
            if w.max_depth.is_some_and(|m| depth > m as usize) {
                break;
            }
            keep_max(&ancestor, base * w.ancestor_decay.powi(depth as i32));
        }
    }
    Ok(DescriptorVector::new(
        weights.into_iter().collect(),
        film.descriptors.iter().cloned().collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thesaurus::{Concept, Facet};

    fn chain_thesaurus() -> Arc<Thesaurus> {
        let c = |id: &str, facet: Option<Facet>, broader: Option<&str>| Concept {
            id: id.into(),
            pref_label: id.into(),
            definition: String::new(),
            facet,
            broader: broader.map(Into::into),
            related: Default::default(),
        };
        Arc::new(
            Thesaurus::new(vec![
                c("a", Some(Facet::FilmingPerson), None),
                c("b", None, Some("a")),
                c("l", None, Some("b")),
                c("m", None, Some("b")),
                c("z", Some(Facet::Audience), None),
                c("y", None, Some("z")),
            ])
            .unwrap(),
        )
    }

    fn film(id: &str, descriptors: &[&str]) -> FilmRecord {
        FilmRecord {
            id: id.into(),
            title: id.to_uppercase(),
            director: "Someone".into(),
            year: 2001,
            duration_min: 24,
            synopsis: String::new(),
            descriptors: descriptors.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn line(f: &FilmRecord) -> String {
        serde_json::to_string(f).unwrap()
    }

    #[test]
    fn empty_file() {
        let c = ingest_catalog(b"", chain_thesaurus()).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn keeps_file_order_and_warns_on_count() {
        let src = format!(
            "{}\n\n{}\n",
            line(&film("f2", &["l"])),
            line(&film("f1", &["y", "m"]))
        );
        let c = ingest_catalog(src.as_bytes(), chain_thesaurus()).unwrap();
        let ids: Vec<_> = c.films().iter().map(|f| f.id.as_str()).collect();
        assert_eq!(ids, ["f2", "f1"]);
        assert_eq!(c.warnings().len(), 2);
        assert_eq!(c.warnings()[1].line, 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let t = chain_thesaurus();
        let src = format!("{}\n{{not json\n", line(&film("f", &["l"])));
        assert!(matches!(
            ingest_catalog(src.as_bytes(), t.clone()),
            Err(CatalogError::Parse { line: 2, .. })
        ));

        let src = format!(
            "{}\n{}\n",
            line(&film("f", &["l"])),
            line(&film("f", &["m"]))
        );
        assert!(matches!(
            ingest_catalog(src.as_bytes(), t.clone()),
            Err(CatalogError::DuplicateFilm { line: 2, .. })
        ));

        let src = line(&film("bad", &["l", "no-such-concept"]));
        match ingest_catalog(src.as_bytes(), t.clone()) {
            Err(CatalogError::UnknownDescriptor {
                film, descriptor, ..
            }) => {
                assert_eq!(film, "bad");
                assert_eq!(descriptor, "no-such-concept");
            }
            other => panic!("{other:?}"),
        }

        let src = line(&film("none", &[]));
        assert!(matches!(
            ingest_catalog(src.as_bytes(), t.clone()),
            Err(CatalogError::DescriptorCount { count: 0, .. })
        ));
        let many: Vec<String> = (0..17).map(|i| format!("d{i}")).collect();
        let refs: Vec<&str> = many.iter().map(String::as_str).collect();
        assert!(matches!(
            ingest_catalog(line(&film("many", &refs)).as_bytes(), t.clone()),
            Err(CatalogError::DescriptorCount { count: 17, .. })
        ));

        assert!(matches!(
            ingest_catalog(line(&film("rep", &["l", "l"])).as_bytes(), t.clone()),
            Err(CatalogError::RepeatedDescriptor { .. })
        ));

        let mut untitled = film("u", &["l"]);
        untitled.title = " ".into();
        assert!(matches!(
            ingest_catalog(line(&untitled).as_bytes(), t),
            Err(CatalogError::InvalidField { .. })
        ));
    }

    #[test]
    fn zero_decay_keeps_only_descriptors() {
        let t = chain_thesaurus();
        let cfg = WeightingConfig {
            ancestor_decay: 0.0,
            ..Default::default()
        };
        let v = descriptor_vector(&film("f", &["l", "y"]), &t, &cfg).unwrap();
        assert_eq!(
            v.weights(),
            [("l".to_string(), 1.0), ("y".to_string(), 1.0)]
        );
    }

    #[test]
    fn chain_expansion_halves_per_hop() {
        let t = chain_thesaurus();
        let v = descriptor_vector(&film("f", &["l"]), &t, &WeightingConfig::default()).unwrap();
        assert_eq!(
            v.weights(),
            [
                ("a".to_string(), 0.25),
                ("b".to_string(), 0.5),
                ("l".to_string(), 1.0)
            ]
        );
    }

    #[test]
    fn max_depth_and_max_aggregation() {
        let t = chain_thesaurus();
        let cfg = WeightingConfig {
            max_depth: Some(1),
            ..Default::default()
        };
        let v = descriptor_vector(&film("f", &["l", "m", "b"]), &t, &cfg).unwrap();
        // b is both a descriptor (1.0) and the parent of l and m (0.5 each);
        // a is one hop above b but two above l and m
        assert_eq!(
            v.weights(),
            [
                ("a".to_string(), 0.5),
                ("b".to_string(), 1.0),
                ("l".to_string(), 1.0),
                ("m".to_string(), 1.0)
            ]
        );
    }

    #[test]
    fn facet_weights_scale_contributions() {
        let t = chain_thesaurus();
        let mut cfg = WeightingConfig::default();
        cfg.facet_weights.insert(Facet::Audience, 4.0);
        let v = descriptor_vector(&film("f", &["y"]), &t, &cfg).unwrap();
        assert_eq!(
            v.weights(),
            [("y".to_string(), 4.0), ("z".to_string(), 2.0)]
        );
    }
}

//! Pairwise film similarity over descriptor vectors.
//!
//! Supports are kept sorted by concept id and every sum runs in that order,
//! so `similarity(a, b)` and `similarity(b, a)` are bit-identical.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::catalog::{Catalog, FilmRecord};
use crate::config::{Metric, WeightingConfig};

/// Sparse concept -> weight map plus the raw descriptor set it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorVector {
    weights: Vec<(String, f64)>,
    descriptors: BTreeSet<String>,
}

impl DescriptorVector {
    /// Entries with non-positive weight are dropped and duplicates keep the
    /// larger weight.
    pub fn new(mut weights: Vec<(String, f64)>, descriptors: BTreeSet<String>) -> Self {
        weights.retain(|(_, w)| *w > 0.0);
        weights.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
        weights.dedup_by(|later, earlier| later.0 == earlier.0);
        DescriptorVector {
            weights,
            descriptors,
        }
    }

    /// Sorted by concept id.
    pub fn weights(&self) -> &[(String, f64)] {
        &self.weights
    }

    pub fn descriptors(&self) -> &BTreeSet<String> {
        &self.descriptors
    }

    pub fn get(&self, concept: &str) -> Option<f64> {
        self.weights
            .binary_search_by(|(id, _)| id.as_str().cmp(concept))
            .ok()
            .map(|i| self.weights[i].1)
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn squared_norm(&self) -> f64 {
        self.weights.iter().map(|(_, w)| w * w).sum()
    }
}

/// A similarity in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub const ZERO: SimilarityScore = SimilarityScore(0.0);
    pub const ONE: SimilarityScore = SimilarityScore(1.0);

    /// Clamps into [0, 1]; NaN maps to 0.
    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            SimilarityScore(0.0)
        } else {
            SimilarityScore(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The score at the 9-decimal precision it is published with. Rankings
    /// compare these so that last-ulp noise cannot reorder tied films.
    pub fn published(self) -> Self {
        SimilarityScore((self.0 * 1e9).round() / 1e9)
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("cannot compare an empty descriptor vector")]
    EmptyVector,
}

pub fn similarity(
    a: &DescriptorVector,
    b: &DescriptorVector,
    metric: Metric,
) -> Result<SimilarityScore, SimilarityError> {
    if a.is_empty() || b.is_empty() {
        return Err(SimilarityError::EmptyVector);
    }
    Ok(match metric {
        Metric::Cosine => cosine(a, b),
        Metric::Jaccard => jaccard(&a.descriptors, &b.descriptors),
    })
}

fn cosine(a: &DescriptorVector, b: &DescriptorVector) -> SimilarityScore {
    let (mut i, mut j) = (0, 0);
    let mut dot = 0.0;
    while i < a.weights.len() && j < b.weights.len() {
        let (ka, wa) = &a.weights[i];
        let (kb, wb) = &b.weights[j];
        match ka.cmp(kb) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                dot += wa * wb;
                i += 1;
                j += 1;
            }
        }
    }
    // sqrt(x*x) == x exactly, so identical vectors score exactly 1
    let denom = (a.squared_norm() * b.squared_norm()).sqrt();
    SimilarityScore::new(dot / denom)
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> SimilarityScore {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return SimilarityScore::ZERO;
    }
    SimilarityScore::new(inter as f64 / union as f64)
}

/// Raw descriptors both films carry, without hierarchy expansion.
pub fn shared_descriptors(a: &FilmRecord, b: &FilmRecord) -> BTreeSet<String> {
    let theirs: BTreeSet<&str> = b.descriptors.iter().map(String::as_str).collect();
    a.descriptors
        .iter()
        .filter(|d| theirs.contains(d.as_str()))
        .cloned()
        .collect()
}

/// All-pairs similarity in catalog order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub film_ids: Vec<String>,
    pub scores: Vec<Vec<SimilarityScore>>,
}

impl SimilarityMatrix {
    pub fn get(&self, i: usize, j: usize) -> SimilarityScore {
        self.scores[i][j]
    }

    /// Header row and first column hold film ids; values use 9 decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("film");
        for id in &self.film_ids {
            out.push(',');
            out.push_str(&csv_field(id));
        }
        out.push('\n');
        for (id, row) in self.film_ids.iter().zip(&self.scores) {
            out.push_str(&csv_field(id));
            for s in row {
                write!(out, ",{:.9}", s.value()).expect("write to string");
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn pairwise_matrix(catalog: &Catalog, w: &WeightingConfig) -> SimilarityMatrix {
    let vectors = catalog.vectors(w);
    let n = vectors.len();
    let mut scores = vec![vec![SimilarityScore::ONE; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = similarity(&vectors[i], &vectors[j], w.metric)
                .expect("catalog films have at least one descriptor");
            scores[i][j] = s;
            scores[j][i] = s;
        }
    }
    SimilarityMatrix {
        film_ids: catalog.films().iter().map(|f| f.id.clone()).collect(),
        scores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(ids: &[&str]) -> DescriptorVector {
        DescriptorVector::new(
            ids.iter().map(|s| (s.to_string(), 1.0)).collect(),
            ids.iter().map(|s| s.to_string()).collect(),
        )
    }

    #[test]
    fn self_similarity_is_one() {
        let v = DescriptorVector::new(
            vec![("a".into(), 0.3), ("b".into(), 0.7), ("c".into(), 1.9)],
            ["a".to_string()].into(),
        );
        assert_eq!(
            similarity(&v, &v, Metric::Cosine).unwrap(),
            SimilarityScore::ONE
        );
        assert_eq!(
            similarity(&v, &v, Metric::Jaccard).unwrap(),
            SimilarityScore::ONE
        );
    }

    #[test]
    fn half_overlap_of_ten() {
        let a: Vec<String> = (0..10).map(|i| format!("c{i:02}")).collect();
        let b: Vec<String> = (5..15).map(|i| format!("c{i:02}")).collect();
        let va = flat(&a.iter().map(String::as_str).collect::<Vec<_>>());
        let vb = flat(&b.iter().map(String::as_str).collect::<Vec<_>>());
        let s = similarity(&va, &vb, Metric::Cosine).unwrap().value();
        assert!((s - 0.5).abs() < 1e-12);
        let j = similarity(&va, &vb, Metric::Jaccard).unwrap().value();
        assert!((j - 5.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn disjoint_supports_score_zero() {
        let s = similarity(&flat(&["a", "b"]), &flat(&["c"]), Metric::Cosine).unwrap();
        assert_eq!(s, SimilarityScore::ZERO);
    }

    #[test]
    fn empty_vector_is_a_domain_error() {
        let empty = DescriptorVector::new(vec![], BTreeSet::new());
        assert_eq!(
            similarity(&empty, &flat(&["a"]), Metric::Cosine),
            Err(SimilarityError::EmptyVector)
        );
    }

    #[test]
    fn vector_construction_normalizes() {
        let v = DescriptorVector::new(
            vec![
                ("b".into(), 0.5),
                ("a".into(), 1.0),
                ("b".into(), 0.9),
                ("c".into(), 0.0),
            ],
            BTreeSet::new(),
        );
        assert_eq!(
            v.weights(),
            [("a".to_string(), 1.0), ("b".to_string(), 0.9)]
        );
        assert_eq!(v.get("b"), Some(0.9));
        assert_eq!(v.get("c"), None);
    }

    #[test]
    fn published_rounds_to_nine_decimals() {
        assert_eq!(
            SimilarityScore::new(0.1234567894).published().value(),
            0.123456789
        );
        assert_eq!(SimilarityScore::new(1.5).value(), 1.0);
        assert_eq!(SimilarityScore::new(f64::NAN).value(), 0.0);
    }

    #[test]
    fn csv_export() {
        let m = SimilarityMatrix {
            film_ids: vec!["a".into(), "b,c".into()],
            scores: vec![
                vec![SimilarityScore::ONE, SimilarityScore::new(0.25)],
                vec![SimilarityScore::new(0.25), SimilarityScore::ONE],
            ],
        };
        assert_eq!(
            m.to_csv(),
            "film,a,\"b,c\"\na,1.000000000,0.250000000\n\"b,c\",0.250000000,1.000000000\n"
        );
    }
}

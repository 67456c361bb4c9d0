//! Synthetic thesauri and corpora, plus brute-force oracles.
//!
//! The oracles work on plain index arrays produced by the generator and never
//! call the library's hierarchy walk, vector expansion or similarity code.

use std::collections::BTreeSet;
use std::sync::Arc;

use drec_core::catalog::catalog_from_records;
use drec_core::{Catalog, Concept, Facet, FilmRecord, Thesaurus, WeightingConfig};
use rand::seq::SliceRandom;
use rand::Rng;

/// A generated mono-hierarchy with its parent array kept alongside.
#[derive(Debug, Clone)]
pub struct SyntheticThesaurus {
    pub concepts: Vec<Concept>,
    pub parent: Vec<Option<usize>>,
    pub facet: Vec<Facet>,
}

impl SyntheticThesaurus {
    /// `n` concepts (at least 6), six facet roots, at most `levels` levels
    /// (roots are level 1). Some symmetric `related` pairs are sprinkled in.
    pub fn generate(rng: &mut impl Rng, n: usize, levels: usize) -> Self {
        assert!(n >= 6 && levels >= 1);
        let mut parent: Vec<Option<usize>> = Vec::with_capacity(n);
        let mut level: Vec<usize> = Vec::with_capacity(n);
        let mut facet: Vec<Facet> = Vec::with_capacity(n);
        for f in Facet::ALL {
            parent.push(None);
            level.push(1);
            facet.push(f);
        }
        while parent.len() < n {
            let eligible: Vec<usize> = (0..parent.len()).filter(|&i| level[i] < levels).collect();
            let p = if eligible.is_empty() {
                rng.gen_range(0..6)
            } else {
                *eligible.choose(rng).unwrap()
            };
            // with a single level every concept is a root
            if levels == 1 {
                parent.push(None);
                level.push(1);
                facet.push(*Facet::ALL.choose(rng).unwrap());
            } else {
                parent.push(Some(p));
                level.push(level[p] + 1);
                facet.push(facet[p]);
            }
        }
        let id = |i: usize| format!("c{i:03}");
        let mut concepts: Vec<Concept> = (0..n)
            .map(|i| Concept {
                id: id(i),
                pref_label: format!("Concept {i}"),
                definition: format!("Synthetic concept number {i}."),
                // roots declare their facet, some descendants restate it
                facet: (parent[i].is_none() || rng.gen_bool(0.1)).then_some(facet[i]),
                broader: parent[i].map(id),
                related: BTreeSet::new(),
            })
            .collect();
        for _ in 0..n / 10 {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b {
                concepts[a].related.insert(id(b));
                concepts[b].related.insert(id(a));
            }
        }
        SyntheticThesaurus {
            concepts,
            parent,
            facet,
        }
    }

    pub fn thesaurus(&self) -> Thesaurus {
        Thesaurus::new(self.concepts.clone()).expect("generator builds valid thesauri")
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn index_of(&self, id: &str) -> usize {
        id[1..].parse().expect("synthetic ids are c###")
    }

    /// Leaves (concepts with no children).
    pub fn leaves(&self) -> Vec<usize> {
        let mut has_child = vec![false; self.len()];
        for p in self.parent.iter().flatten() {
            has_child[*p] = true;
        }
        (0..self.len()).filter(|&i| !has_child[i]).collect()
    }

    /// Parent-following walk: (ancestor index, hops), nearest first.
    pub fn naive_ancestors(&self, i: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut cur = i;
        let mut hops = 0;
        while let Some(p) = self.parent[cur] {
            hops += 1;
            out.push((p, hops));
            cur = p;
        }
        out
    }
}

/// A random corpus of `n_films` films, each with 1..=`max_descriptors`
/// distinct descriptors drawn from all concepts.
pub fn random_films(
    rng: &mut impl Rng,
    thes: &SyntheticThesaurus,
    n_films: usize,
    max_descriptors: usize,
) -> Vec<FilmRecord> {
    let all: Vec<usize> = (0..thes.len()).collect();
    (0..n_films)
        .map(|i| {
            let count = rng.gen_range(1..=max_descriptors.min(thes.len()));
            let descriptors = all
                .choose_multiple(rng, count)
                .map(|&c| thes.concepts[c].id.clone())
                .collect();
            FilmRecord {
                id: format!("film-{i:03}"),
                title: format!("Title {:03}", (i * 37) % 101),
                director: format!("Director {}", i % 7),
                year: 1950 + i as i32,
                duration_min: 10 + i as u32,
                synopsis: String::new(),
                descriptors,
            }
        })
        .collect()
}

pub fn catalog(thes: &SyntheticThesaurus, films: Vec<FilmRecord>) -> Catalog {
    catalog_from_records(films, Arc::new(thes.thesaurus())).expect("generated films are valid")
}

/// Random weighting: decay in [0, 1], optional depth cap, facet weights in
/// (0.1, 5).
pub fn random_config(rng: &mut impl Rng) -> WeightingConfig {
    let mut cfg = WeightingConfig {
        ancestor_decay: if rng.gen_bool(0.2) {
            0.0
        } else {
            rng.gen_range(0.0..=1.0)
        },
        max_depth: if rng.gen_bool(0.3) {
            Some(rng.gen_range(0..4))
        } else {
            None
        },
        ..Default::default()
    };
    for f in Facet::ALL {
        if rng.gen_bool(0.7) {
            cfg.facet_weights.insert(f, rng.gen_range(0.1..5.0));
        }
    }
    cfg
}

/// Dense expansion over the whole concept inventory, elementwise max.
pub fn dense_vector(
    thes: &SyntheticThesaurus,
    film: &FilmRecord,
    cfg: &WeightingConfig,
) -> Vec<f64> {
    let mut dense = vec![0.0; thes.len()];
    for d in &film.descriptors {
        let i = thes.index_of(d);
        let base = cfg
            .facet_weights
            .get(&thes.facet[i])
            .copied()
            .unwrap_or(1.0);
        dense[i] = f64::max(dense[i], base);
        for (a, hops) in thes.naive_ancestors(i) {
            if let Some(m) = cfg.max_depth {
                if hops > m as usize {
                    break;
                }
            }
            let mut w = base;
            for _ in 0..hops {
                w *= cfg.ancestor_decay;
            }
            dense[a] = f64::max(dense[a], w);
        }
    }
    dense
}

pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Nested-loop intersection of raw descriptor lists.
pub fn naive_shared(a: &FilmRecord, b: &FilmRecord) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for x in &a.descriptors {
        for y in &b.descriptors {
            if x == y {
                out.insert(x.clone());
            }
        }
    }
    out
}

pub fn round9(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// Dense cosine of every film against `input`, published at 9 decimals.
pub fn dense_scores(
    thes: &SyntheticThesaurus,
    films: &[FilmRecord],
    input: &FilmRecord,
    cfg: &WeightingConfig,
) -> Vec<(String, f64)> {
    let q = dense_vector(thes, input, cfg);
    films
        .iter()
        .filter(|f| f.id != input.id)
        .map(|f| {
            (
                f.id.clone(),
                round9(dense_cosine(&q, &dense_vector(thes, f, cfg))),
            )
        })
        .collect()
}

/// Brute-force zero-overlap control: lowest score, then smallest id.
pub fn naive_control(
    thes: &SyntheticThesaurus,
    films: &[FilmRecord],
    input: &FilmRecord,
    cfg: &WeightingConfig,
) -> Option<String> {
    let mut best: Option<(f64, String)> = None;
    for (id, s) in dense_scores(thes, films, input, cfg) {
        let f = films.iter().find(|f| f.id == id).unwrap();
        if !naive_shared(input, f).is_empty() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bs, bid)) => s < *bs || (s == *bs && id < *bid),
        };
        if better {
            best = Some((s, id));
        }
    }
    best.map(|(_, id)| id)
}

/// Path of a file under the workspace `fixtures/` directory.
pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// The shipped thesaurus and 30-film catalog.
pub fn fixture_catalog() -> Catalog {
    let t = drec_core::parse_thesaurus(&std::fs::read(fixture("thesaurus.json")).unwrap()).unwrap();
    drec_core::ingest_catalog(
        &std::fs::read(fixture("catalog.jsonl")).unwrap(),
        Arc::new(t),
    )
    .unwrap()
}

/// The ten descriptors indexed on *Lift* (Isaacs, 2001).
pub const LIFT_DESCRIPTORS: [&str; 10] = [
    "filmant-en-performance",
    "huis-clos",
    "coherence-formelle",
    "protagoniste-multiple",
    "regard-camera-du-filme",
    "filmant-off",
    "filmant-complice",
    "dialogue-filmant-filme",
    "filmant-operateur",
    "camera-portee",
];

pub const LIFT_ID: &str = "lift-isaacs-2001";

//! Faceted controlled vocabulary of documentary dispositifs.
//!
//! Concepts form a mono-hierarchy (one optional `broader` link each) rooted
//! in six facets. `related` links are symmetric and only used for display.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The six entities of the dispositif model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    FilmingPerson,
    FilmedPerson,
    FilmedSituation,
    FilmicMaterials,
    FilmicText,
    Audience,
}

impl Facet {
    pub const ALL: [Facet; 6] = [
        Facet::FilmingPerson,
        Facet::FilmedPerson,
        Facet::FilmedSituation,
        Facet::FilmicMaterials,
        Facet::FilmicText,
        Facet::Audience,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Facet::FilmingPerson => "filming_person",
            Facet::FilmedPerson => "filmed_person",
            Facet::FilmedSituation => "filmed_situation",
            Facet::FilmicMaterials => "filmic_materials",
            Facet::FilmicText => "filmic_text",
            Facet::Audience => "audience",
        }
    }
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown facet {0:?}")]
pub struct UnknownFacet(pub String);

impl FromStr for Facet {
    type Err = UnknownFacet;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Facet::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| UnknownFacet(s.to_string()))
    }
}

/// One entry of the controlled vocabulary.
///
/// `facet` is the facet declared in the source document. Roots must declare
/// one; other concepts inherit it from their root and may only restate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Concept {
    pub id: String,
    pub pref_label: String,
    pub definition: String,
    pub facet: Option<Facet>,
    pub broader: Option<String>,
    #[serde(default)]
    pub related: BTreeSet<String>,
}

impl Concept {
    pub fn is_root(&self) -> bool {
        self.broader.is_none()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThesaurusDocument {
    concepts: Vec<Concept>,
}

/// A single invariant violation found by [`validate_thesaurus`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyId {
        index: usize,
    },
    DuplicateId {
        id: String,
    },
    DanglingBroader {
        id: String,
        broader: String,
    },
    DanglingRelated {
        id: String,
        related: String,
    },
    /// Members are listed in hierarchy order, starting from the smallest id.
    Cycle {
        members: Vec<String>,
    },
    MissingRootFacet {
        id: String,
    },
    FacetMismatch {
        id: String,
        declared: Facet,
        inherited: Facet,
    },
    SelfRelated {
        id: String,
    },
    AsymmetricRelated {
        from: String,
        to: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId { index } => write!(f, "concept #{index} has an empty id"),
            Violation::DuplicateId { id } => write!(f, "duplicate concept id {id:?}"),
            Violation::DanglingBroader { id, broader } => {
                write!(f, "concept {id:?} has unknown broader concept {broader:?}")
            }
            Violation::DanglingRelated { id, related } => {
                write!(
                    f,
                    "concept {id:?} is related to unknown concept {related:?}"
                )
            }
            Violation::Cycle { members } => {
                write!(f, "broader cycle through {}", members.join(" -> "))
            }
            Violation::MissingRootFacet { id } => {
                write!(f, "root concept {id:?} declares no facet")
            }
            Violation::FacetMismatch {
                id,
                declared,
                inherited,
            } => write!(
                f,
                "concept {id:?} declares facet {declared} but its root is {inherited}"
            ),
            Violation::SelfRelated { id } => write!(f, "concept {id:?} is related to itself"),
            Violation::AsymmetricRelated { from, to } => write!(
                f,
                "concept {from:?} is related to {to:?} but not the other way round"
            ),
        }
    }
}

/// Every violation in a thesaurus. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ThesaurusError {
    #[error("malformed thesaurus at line {line}, column {column} (field `{path}`): {message}")]
    Parse {
        line: usize,
        column: usize,
        path: String,
        message: String,
    },
    #[error("invalid thesaurus: {0}")]
    Invalid(ValidationReport),
    #[error("unknown concept {0:?}")]
    NotFound(String),
}

/// The controlled vocabulary.
///
/// May be built unchecked with [`Thesaurus::from_concepts_unchecked`] so that
/// [`validate_thesaurus`] can report on it; [`parse_thesaurus`] and
/// [`Thesaurus::new`] only hand out valid ones.
#[derive(Debug, Clone)]
pub struct Thesaurus {
    concepts: Vec<Concept>,
    index: HashMap<String, usize>,
    narrower: HashMap<String, Vec<String>>,
}

impl PartialEq for Thesaurus {
    fn eq(&self, other: &Self) -> bool {
        self.concepts == other.concepts
    }
}

impl Eq for Thesaurus {}

impl Thesaurus {
    pub fn new(concepts: Vec<Concept>) -> Result<Self, ThesaurusError> {
        let t = Self::from_concepts_unchecked(concepts);
        let report = validate_thesaurus(&t);
        if report.is_valid() {
            Ok(t)
        } else {
            Err(ThesaurusError::Invalid(report))
        }
    }

    pub fn from_concepts_unchecked(concepts: Vec<Concept>) -> Self {
        let mut index = HashMap::with_capacity(concepts.len());
        for (i, c) in concepts.iter().enumerate() {
            index.entry(c.id.clone()).or_insert(i);
        }
        let mut narrower: HashMap<String, Vec<String>> = HashMap::new();
        for c in &concepts {
            if let Some(parent) = &c.broader {
                narrower
                    .entry(parent.clone())
                    .or_default()
                    .push(c.id.clone());
            }
        }
        for children in narrower.values_mut() {
            children.sort();
            children.dedup();
        }
        Thesaurus {
            concepts,
            index,
            narrower,
        }
    }

    /// Concepts in document order.
    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Concept> {
        self.index.get(id).map(|&i| &self.concepts[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Direct children, sorted by id.
    pub fn narrower(&self, id: &str) -> &[String] {
        self.narrower.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn roots(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.iter().filter(|c| c.is_root())
    }

    pub fn ancestors(&self, id: &str) -> Result<Vec<(String, usize)>, ThesaurusError> {
        ancestors(self, id)
    }

    /// Hops from `id` to its facet root.
    pub fn depth(&self, id: &str) -> Result<usize, ThesaurusError> {
        Ok(ancestors(self, id)?.len())
    }

    /// The facet of the root `id` hangs under.
    pub fn facet(&self, id: &str) -> Result<Facet, ThesaurusError> {
        let root = match ancestors(self, id)?.pop() {
            Some((root, _)) => root,
            None => id.to_string(),
        };
        self.get(&root)
            .and_then(|c| c.facet)
            .ok_or(ThesaurusError::NotFound(root))
    }

    pub fn to_json(&self) -> String {
        let doc = ThesaurusDocument {
            concepts: self.concepts.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("thesaurus serializes")
    }
}

/// Parses only the JSON syntax and field shapes; no invariant checks.
pub fn parse_thesaurus_unchecked(source: &[u8]) -> Result<Thesaurus, ThesaurusError> {
    let mut de = serde_json::Deserializer::from_slice(source);
    let doc: ThesaurusDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ThesaurusError::Parse {
            line: inner.line(),
            column: inner.column(),
            path,
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| ThesaurusError::Parse {
        line: e.line(),
        column: e.column(),
        path: ".".into(),
        message: e.to_string(),
    })?;
    Ok(Thesaurus::from_concepts_unchecked(doc.concepts))
}

pub fn parse_thesaurus(source: &[u8]) -> Result<Thesaurus, ThesaurusError> {
    let t = parse_thesaurus_unchecked(source)?;
    let report = validate_thesaurus(&t);
    if report.is_valid() {
        Ok(t)
    } else {
        Err(ThesaurusError::Invalid(report))
    }
}

/// Broader chain of `id`, nearest first, each with its hop count.
pub fn ancestors(t: &Thesaurus, id: &str) -> Result<Vec<(String, usize)>, ThesaurusError> {
    let mut current = t
        .get(id)
        .ok_or_else(|| ThesaurusError::NotFound(id.to_string()))?;
    let mut out = Vec::new();
    // bounded so unchecked (cyclic) thesauri terminate
    while let Some(parent) = &current.broader {
        if out.len() >= t.len() {
            break;
        }
        match t.get(parent) {
            Some(p) => {
                out.push((p.id.clone(), out.len() + 1));
                current = p;
            }
            None => break,
        }
    }
    Ok(out)
}

pub fn validate_thesaurus(t: &Thesaurus) -> ValidationReport {
    let mut violations = Vec::new();
    let concepts = t.concepts();

    let mut seen = HashMap::new();
    for (i, c) in concepts.iter().enumerate() {
        if c.id.is_empty() {
            violations.push(Violation::EmptyId { index: i });
        }
        let n = seen.entry(c.id.as_str()).or_insert(0usize);
        *n += 1;
        if *n == 2 {
            violations.push(Violation::DuplicateId { id: c.id.clone() });
        }
    }

    for c in concepts {
        if let Some(parent) = &c.broader {
            if !t.contains(parent) {
                violations.push(Violation::DanglingBroader {
                    id: c.id.clone(),
                    broader: parent.clone(),
                });
            }
        }
    }

    violations.extend(find_cycles(t));

    // Facet resolution: walk to the root; concepts that never reach one
    // (dangling or cyclic chains) were already reported above.
    for c in concepts {
        if c.is_root() {
            if c.facet.is_none() {
                violations.push(Violation::MissingRootFacet { id: c.id.clone() });
            }
            continue;
        }
        let Some(declared) = c.facet else { continue };
        if let Some(inherited) = root_facet(t, c) {
            if inherited != declared {
                violations.push(Violation::FacetMismatch {
                    id: c.id.clone(),
                    declared,
                    inherited,
                });
            }
        }
    }

    for c in concepts {
        for r in &c.related {
            if *r == c.id {
                violations.push(Violation::SelfRelated { id: c.id.clone() });
            } else {
                match t.get(r) {
                    None => violations.push(Violation::DanglingRelated {
                        id: c.id.clone(),
                        related: r.clone(),
                    }),
                    Some(other) if !other.related.contains(&c.id) => {
                        violations.push(Violation::AsymmetricRelated {
                            from: c.id.clone(),
                            to: r.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
        }
    }

    ValidationReport { violations }
}

/// Facet declared on the root of `c`'s chain, or `None` when the chain
/// dangles, loops, or ends on a root without a facet.
fn root_facet(t: &Thesaurus, c: &Concept) -> Option<Facet> {
    let mut current = c;
    for _ in 0..=t.len() {
        match &current.broader {
            None => return current.facet,
            Some(parent) => current = t.get(parent)?,
        }
    }
    None
}

fn find_cycles(t: &Thesaurus) -> Vec<Violation> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        OnPath,
        Done,
    }
    let concepts = t.concepts();
    let mut mark = vec![Mark::New; concepts.len()];
    let mut out = Vec::new();

    for start in 0..concepts.len() {
        let mut path: Vec<usize> = Vec::new();
        let mut cur = Some(start);
        while let Some(i) = cur {
            match mark[i] {
                Mark::Done => break,
                Mark::OnPath => {
                    let pos = path.iter().position(|&p| p == i).expect("on path");
                    let mut members: Vec<String> = path[pos..]
                        .iter()
                        .map(|&p| concepts[p].id.clone())
                        .collect();
                    let min = members
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.cmp(b.1))
                        .map(|(k, _)| k)
                        .unwrap_or(0);
                    members.rotate_left(min);
                    out.push(Violation::Cycle { members });
                    break;
                }
                Mark::New => {
                    mark[i] = Mark::OnPath;
                    path.push(i);
                    cur = concepts[i]
                        .broader
                        .as_deref()
                        .and_then(|p| t.index.get(p).copied());
                }
            }
        }
        for p in path {
            mark[p] = Mark::Done;
        }
    }
    out
}

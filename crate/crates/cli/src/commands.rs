use std::fmt;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use drec_core::thesaurus::parse_thesaurus_unchecked;
use drec_core::{
    coherence_rate, compose_panel_list, explain, ingest_catalog, load_judgments, pairwise_matrix,
    validate_thesaurus, Catalog, ThesaurusError, WeightingConfig, DEFAULT_K,
};
use drec_service::{Settings, StartupError, DEFAULT_PORT};

#[derive(Debug, Parser)]
#[command(
    name = "drec",
    version,
    about = "Dispositif-based documentary recommender"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a thesaurus and optionally a catalog indexed against it.
    Validate {
        #[arg(long)]
        thesaurus: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Print the hierarchy-expanded descriptor vector of a film.
    Index {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        film: String,
        #[arg(long)]
        json: bool,
    },
    /// Build the k-nearest + control panel for a film.
    Recommend {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        film: String,
        #[arg(short, default_value_t = DEFAULT_K)]
        k: usize,
        /// Reveal scores, shared descriptors and which film is the control.
        #[arg(long)]
        unblind: bool,
        /// Print the full panel list as JSON (always unblind).
        #[arg(long)]
        json: bool,
    },
    /// Explain the link between two films.
    Explain {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        film: String,
        #[arg(long)]
        other: String,
        #[arg(long)]
        json: bool,
    },
    /// Export the all-pairs similarity matrix as CSV.
    Matrix {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute coherence statistics from a judgment file.
    Evaluate {
        #[arg(long)]
        judgments: PathBuf,
        #[arg(long)]
        json: bool,
        /// Also write the JSON report to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "DREC_THESAURUS")]
        thesaurus: PathBuf,
        #[arg(long, env = "DREC_CATALOG")]
        catalog: PathBuf,
        #[arg(long, env = "DREC_JUDGMENTS")]
        judgments: Option<PathBuf>,
        #[arg(long, env = "DREC_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    thesaurus: PathBuf,
    #[arg(long)]
    catalog: PathBuf,
    /// Weighting config JSON; defaults to cosine, decay 0.5, uniform facets.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    pub fn json_errors(&self) -> bool {
        matches!(
            self.command,
            Command::Validate { json: true, .. }
                | Command::Index { json: true, .. }
                | Command::Recommend { json: true, .. }
                | Command::Explain { json: true, .. }
                | Command::Evaluate { json: true, .. }
        )
    }
}

#[derive(Debug)]
pub enum CliError {
    Domain { code: &'static str, message: String },
    Usage(String),
    Io { path: PathBuf, message: String },
}

impl CliError {
    fn domain(code: &'static str, message: impl fmt::Display) -> Self {
        CliError::Domain {
            code,
            message: message.to_string(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Domain { code, .. } => code,
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain { message, .. } | CliError::Usage(message) => f.write_str(message),
            CliError::Io { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn load_config(path: Option<&Path>) -> Result<WeightingConfig, CliError> {
    match path {
        None => Ok(WeightingConfig::default()),
        Some(p) => WeightingConfig::from_json(&read(p)?)
            .map_err(|e| CliError::domain("invalid_config", format!("{}: {e}", p.display()))),
    }
}

fn load_catalog(thesaurus: &Path, catalog: &Path) -> Result<Catalog, CliError> {
    let t = drec_core::parse_thesaurus(&read(thesaurus)?).map_err(|e| {
        CliError::domain("invalid_thesaurus", format!("{}: {e}", thesaurus.display()))
    })?;
    ingest_catalog(&read(catalog)?, Arc::new(t))
        .map_err(|e| CliError::domain("invalid_catalog", format!("{}: {e}", catalog.display())))
}

impl DataArgs {
    fn load(&self) -> Result<(Catalog, WeightingConfig), CliError> {
        let config = load_config(self.config.as_deref())?;
        Ok((load_catalog(&self.thesaurus, &self.catalog)?, config))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate {
            thesaurus,
            catalog,
            json,
        } => validate(&thesaurus, catalog.as_deref(), json),
        Command::Index { data, film, json } => index(&data, &film, json),
        Command::Recommend {
            data,
            film,
            k,
            unblind,
            json,
        } => recommend(&data, &film, k, unblind, json),
        Command::Explain {
            data,
            film,
            other,
            json,
        } => explain_pair(&data, &film, &other, json),
        Command::Matrix { data, out } => {
            let (catalog, config) = data.load()?;
            let csv = pairwise_matrix(&catalog, &config).to_csv();
            match out {
                Some(path) => write(&path, &csv),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
        Command::Evaluate {
            judgments,
            json,
            out,
        } => evaluate(&judgments, json, out.as_deref()),
        Command::Serve {
            thesaurus,
            catalog,
            judgments,
            port,
            host,
            config,
        } => {
            let config = load_config(config.as_deref())?;
            let settings = Settings {
                thesaurus,
                catalog,
                judgments,
                port,
            };
            let state = Arc::new(settings.load(config).map_err(|e| match e {
                StartupError::Io { path, source } => CliError::Io {
                    path,
                    message: source.to_string(),
                },
                StartupError::Store(e) => CliError::Io {
                    path: settings.judgments.clone().unwrap_or_default(),
                    message: e.to_string(),
                },
                other => CliError::domain("invalid_input", other),
            })?);
            let addr = SocketAddr::new(host, port);
            eprintln!("listening on http://{addr}");
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io {
                path: PathBuf::from("<runtime>"),
                message: e.to_string(),
            })?;
            runtime
                .block_on(drec_service::serve(state, addr))
                .map_err(|e| CliError::Io {
                    path: PathBuf::from(addr.to_string()),
                    message: e.to_string(),
                })
        }
    }
}

fn validate(thesaurus: &Path, catalog: Option<&Path>, json: bool) -> Result<(), CliError> {
    let t = match parse_thesaurus_unchecked(&read(thesaurus)?) {
        Ok(t) => t,
        Err(e @ ThesaurusError::Parse { .. }) => {
            return Err(CliError::domain(
                "invalid_thesaurus",
                format!("{}: {e}", thesaurus.display()),
            ))
        }
        Err(e) => return Err(CliError::domain("invalid_thesaurus", e)),
    };
    let report = validate_thesaurus(&t);

    let mut catalog_summary = None;
    if let (true, Some(path)) = (report.is_valid(), catalog) {
        let c = ingest_catalog(&read(path)?, Arc::new(t.clone()));
        catalog_summary = Some((path, c));
    }

    if json {
        let mut doc = serde_json::json!({
            "thesaurus": {
                "path": thesaurus.display().to_string(),
                "valid": report.is_valid(),
                "concepts": t.len(),
                "roots": t.roots().count(),
                "violations": report.violations,
            }
        });
        if let Some((path, c)) = &catalog_summary {
            doc["catalog"] = match c {
                Ok(c) => serde_json::json!({
                    "path": path.display().to_string(),
                    "valid": true,
                    "films": c.len(),
                    "warnings": c.warnings(),
                }),
                Err(e) => serde_json::json!({
                    "path": path.display().to_string(),
                    "valid": false,
                    "error": e.to_string(),
                }),
            };
        }
        println!("{doc}");
    } else if report.is_valid() {
        println!(
            "OK thesaurus {}: {} concepts, {} facet roots",
            thesaurus.display(),
            t.len(),
            t.roots().count()
        );
        if let Some((path, Ok(c))) = &catalog_summary {
            println!(
                "OK catalog {}: {} films, {} warnings",
                path.display(),
                c.len(),
                c.warnings().len()
            );
            for w in c.warnings() {
                println!("  warning line {}: {}: {}", w.line, w.film, w.message);
            }
        }
    } else {
        println!("INVALID thesaurus {}:", thesaurus.display());
        for v in &report.violations {
            println!("  - {v}");
        }
    }

    if !report.is_valid() {
        return Err(CliError::domain(
            "invalid_thesaurus",
            format!("{} violation(s)", report.violations.len()),
        ));
    }
    if let Some((path, Err(e))) = catalog_summary {
        return Err(CliError::domain(
            "invalid_catalog",
            format!("{}: {e}", path.display()),
        ));
    }
    Ok(())
}

fn index(data: &DataArgs, film: &str, json: bool) -> Result<(), CliError> {
    let (catalog, config) = data.load()?;
    let record = catalog
        .get(film)
        .ok_or_else(|| CliError::domain("film_not_found", format!("unknown film {film:?}")))?;
    let v = catalog.vector(record, &config);
    if json {
        let weights: serde_json::Map<String, serde_json::Value> = v
            .weights()
            .iter()
            .map(|(id, w)| (id.clone(), serde_json::json!(w)))
            .collect();
        println!(
            "{}",
            serde_json::json!({ "film": film, "weights": weights })
        );
    } else {
        for (id, w) in v.weights() {
            let marker = if v.descriptors().contains(id) {
                "*"
            } else {
                " "
            };
            println!("{marker} {w:.9}  {id}");
        }
    }
    Ok(())
}

fn recommend(
    data: &DataArgs,
    film: &str,
    k: usize,
    unblind: bool,
    json: bool,
) -> Result<(), CliError> {
    if k == 0 {
        return Err(CliError::Usage("-k must be at least 1".into()));
    }
    let (catalog, config) = data.load()?;
    let panel = compose_panel_list(&catalog, film, k, &config)
        .map_err(|e| CliError::domain(e.code(), &e))?;
    // the JSON form is the full panel list, as served with `unblind=true`
    if json {
        println!("{}", panel.to_json(false));
        return Ok(());
    }
    for (i, id) in panel.presented.iter().enumerate() {
        let f = catalog.get(id).expect("panel films exist");
        if !unblind {
            println!("{}. {} ({}, {})", i + 1, f.title, f.director, f.year);
            continue;
        }
        let e = &panel.explanations[id];
        let marker = if panel.is_control(id) {
            "  [control]"
        } else {
            ""
        };
        let shared: Vec<&str> = e.shared.iter().map(|c| c.id.as_str()).collect();
        println!(
            "{}. {} ({}, {})  score {:.9}{marker}\n   shared: {}",
            i + 1,
            f.title,
            f.director,
            f.year,
            e.score.value(),
            if shared.is_empty() {
                "(none)".to_string()
            } else {
                shared.join(", ")
            }
        );
    }
    Ok(())
}

fn explain_pair(data: &DataArgs, film: &str, other: &str, json: bool) -> Result<(), CliError> {
    let (catalog, config) = data.load()?;
    let e = explain(&catalog, film, other, &config).map_err(|e| CliError::domain(e.code(), &e))?;
    if json {
        println!("{}", e.to_json());
        return Ok(());
    }
    println!("score {:.9}", e.score.value());
    if e.shared.is_empty() {
        println!("no shared descriptors");
    }
    for c in &e.shared {
        println!("[{}] {}: {}", c.facet, c.label, c.definition);
    }
    Ok(())
}

fn evaluate(path: &Path, json: bool, out: Option<&Path>) -> Result<(), CliError> {
    let judgments = load_judgments(&read(path)?)
        .map_err(|e| CliError::domain("invalid_judgments", format!("{}: {e}", path.display())))?;
    let report = coherence_rate(&judgments).map_err(|e| CliError::domain("no_judgments", e))?;
    if let Some(out) = out {
        write(out, &report.to_json())?;
    }
    if json {
        println!("{}", report.to_json());
    } else {
        println!("{report}");
    }
    Ok(())
}

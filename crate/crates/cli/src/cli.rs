use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use libdex_core::reference::reference_weights;
use libdex_core::scoring::{compute_index, rank_libraries, weight_sensitivity};
use libdex_core::store::{
    import_grade_report, load_evidence, load_profile_with_warnings, load_weights, ProfileStore,
    WeightsDocument,
};
use libdex_core::weighting::{default_tolerance, derive_reference_weights, validate_weights};
use libdex_core::{builtin_catalog, report, Catalog, Error, LibraryProfile, Result, WeightVector};

use crate::engine::{parse_pin, parse_range, rebalance};

/// Validation failures.
pub const EXIT_INVALID: i32 = 1;
/// Bad command lines.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "libdex", version, about = "Weighted comparison index for software libraries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect the built-in attribute and criterion catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Score one profile.
    Score {
        profile: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Rank several profiles by index.
    Rank {
        #[arg(required = true)]
        profiles: Vec<PathBuf>,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Derive, check or rebalance weight vectors.
    Weights {
        #[command(subcommand)]
        action: WeightsAction,
    },
    /// Where does varying one weight flip the order of two libraries?
    Whatif {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Attribute id or name.
        #[arg(long)]
        attr: String,
        #[arg(long, default_value = "0:3")]
        range: String,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Revisioned profile store.
    Store {
        #[arg(long, env = "LIBDEX_STORE", default_value = "libdex-store")]
        store: PathBuf,
        #[command(subcommand)]
        action: StoreAction,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "LIBDEX_ADDR", default_value = "127.0.0.1:8080")]
        addr: String,
        #[arg(long, env = "LIBDEX_STORE", default_value = "libdex-store")]
        store: PathBuf,
        /// Directory of static UI assets served at `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    Show,
    Export,
}

#[derive(Subcommand, Debug)]
enum WeightsAction {
    /// Reference weights from evidence files (counts, ballots or ranks).
    Derive {
        #[arg(long, num_args = 1.., required = true)]
        evidence: Vec<PathBuf>,
    },
    Validate {
        weights: PathBuf,
    },
    /// Set pinned weights and rescale the rest to keep the sum.
    Rebalance {
        weights: PathBuf,
        /// `attribute=value`; repeatable.
        #[arg(long = "pin")]
        pins: Vec<String>,
        /// Attribute held at its current value; repeatable.
        #[arg(long = "hold")]
        hold: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
enum StoreAction {
    /// Latest revision of every stored library.
    List,
    /// One library, latest revision unless `--revision` is given.
    Get {
        library_id: String,
        #[arg(long)]
        revision: Option<u64>,
    },
    /// Validate a profile file and store it as a new revision.
    Put {
        profile: PathBuf,
        /// Write a new revision even if nothing changed.
        #[arg(long)]
        force: bool,
    },
    /// Apply a static-analysis grade report to the stored profile.
    ImportGrades {
        library_id: String,
        grades: PathBuf,
        #[arg(long, default_value = "")]
        assessor: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Md,
}

/// Runs the tool on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.code());
            EXIT_INVALID
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn profile_file(catalog: &Catalog, path: &Path, err: &mut dyn Write) -> Result<LibraryProfile> {
    let (profile, warnings) = load_profile_with_warnings(catalog, &read(path)?).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            context: path.display().to_string(),
            message,
        },
        other => other,
    })?;
    for w in warnings {
        let _ = writeln!(err, "warning: {}: {}: {}", path.display(), w.criterion, w.message);
    }
    Ok(profile)
}

fn weights_file(catalog: &Catalog, path: Option<&Path>) -> Result<WeightVector> {
    match path {
        Some(p) => Ok(load_weights(catalog, &read(p)?)?.weights),
        None => Ok(reference_weights()),
    }
}

/// Pretty JSON in declaration order, attributes numerically.
fn pretty_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    text
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let catalog = builtin_catalog();
    match command {
        Command::Catalog { action: CatalogAction::Export } => emit(out, &catalog.to_json()),
        Command::Catalog { action: CatalogAction::Show } => emit(out, &show_catalog(&catalog)),
        Command::Score { profile, weights, format } => {
            let p = profile_file(&catalog, &profile, err)?;
            let w = weights_file(&catalog, weights.as_deref())?;
            let r = compute_index(&catalog, &p, &w)?;
            let text = match format {
                Format::Json => report::to_json(&r),
                Format::Csv => report::to_csv(&r),
                Format::Md => report::to_markdown(&catalog, std::slice::from_ref(&r)),
            };
            emit(out, &text)
        }
        Command::Rank { profiles, weights, format } => {
            let ps = profiles
                .iter()
                .map(|p| profile_file(&catalog, p, err))
                .collect::<Result<Vec<_>>>()?;
            let w = weights_file(&catalog, weights.as_deref())?;
            let ranked = rank_libraries(&catalog, &ps, &w)?;
            match format {
                Format::Md => emit(out, &report::to_markdown(&catalog, &ranked)),
                Format::Csv => {
                    let mut text = String::from("position,library,total,achievable_min,achievable_max\n");
                    for (i, r) in ranked.iter().enumerate() {
                        text.push_str(&format!(
                            "{},{},{},{},{}\n",
                            i + 1,
                            r.library.name,
                            r.total_display,
                            libdex_core::exact::fmt_fixed(&r.achievable_min, 2),
                            libdex_core::exact::fmt_fixed(&r.achievable_max, 2)
                        ));
                    }
                    emit(out, &text)
                }
                Format::Json => emit(out, &pretty_json(&ranked)),
            }
        }
        Command::Weights { action } => weights_command(&catalog, action, out, err),
        Command::Whatif { a, b, attr, range, weights } => {
            let pa = profile_file(&catalog, &a, err)?;
            let pb = profile_file(&catalog, &b, err)?;
            let w = weights_file(&catalog, weights.as_deref())?;
            let attr = catalog.resolve_attribute(&attr)?;
            let (lo, hi) = parse_range(&range)?;
            let report = weight_sensitivity(&catalog, &pa, &pb, &w, attr, &lo, &hi)?;
            emit(out, &pretty_json(&report))
        }
        Command::Store { store, action } => store_command(&catalog, &store, action, out, err),
        Command::Serve { addr, store, static_dir } => {
            let store = ProfileStore::open(store)?;
            let runtime = tokio::runtime::Runtime::new().map_err(|source| Error::Io {
                path: "<runtime>".into(),
                source,
            })?;
            runtime.block_on(crate::api::serve(&addr, store, static_dir, err))
        }
    }
}

fn show_catalog(catalog: &Catalog) -> String {
    let mut text = format!("catalog {}\n", catalog.version);
    for attr in &catalog.attributes {
        text.push_str(&format!("{:>2}  {}\n", attr.id, attr.name));
        if attr.criteria.is_empty() {
            text.push_str("      (no criteria)\n");
        }
        for c in &attr.criteria {
            let kind = serde_json::to_value(c.rubric.kind).expect("kind serializes");
            text.push_str(&format!("    {:<4}{} [{}]\n", c.id.as_str(), c.name, kind.as_str().unwrap_or_default()));
        }
    }
    text
}

fn weights_command(catalog: &Catalog, action: WeightsAction, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match action {
        WeightsAction::Derive { evidence } => {
            let mut ranked = Vec::new();
            for path in &evidence {
                let source = load_evidence(catalog, &read(path)?)?;
                for d in source.discrepancies()? {
                    let _ = writeln!(
                        err,
                        "warning: {}: attribute {} ranks {} but {} is stated",
                        source.label,
                        d.attribute_id,
                        libdex_core::exact::fmt_exact(&d.computed),
                        libdex_core::exact::fmt_exact(&d.stated)
                    );
                }
                ranked.push(source.ranked()?);
            }
            let derivation = derive_reference_weights(&ranked)?;
            let doc = WeightsDocument {
                catalog_version: Some(catalog.version.clone()),
                weights: derivation.weights,
                trace: Some(derivation.trace),
            };
            emit(out, &pretty_json(&doc))
        }
        WeightsAction::Validate { weights } => {
            let doc = load_weights(catalog, &read(&weights)?)?;
            libdex_core::scoring::check_weight_coverage(catalog, &doc.weights)?;
            validate_weights(&doc.weights, &default_tolerance())?;
            emit(
                out,
                &format!(
                    "ok: {} weights, sum {}\n",
                    doc.weights.n(),
                    libdex_core::exact::fmt_exact(&doc.weights.sum())
                ),
            )
        }
        WeightsAction::Rebalance { weights, pins, hold } => {
            let doc = load_weights(catalog, &read(&weights)?)?;
            let pins = pins
                .iter()
                .map(|p| parse_pin(catalog, p))
                .collect::<Result<BTreeMap<_, _>>>()?;
            let hold = hold
                .iter()
                .map(|h| catalog.resolve_attribute(h))
                .collect::<Result<BTreeSet<_>>>()?;
            let w = rebalance(catalog, &doc.weights, &pins, &hold)?;
            let doc = WeightsDocument {
                catalog_version: Some(catalog.version.clone()),
                weights: w,
                trace: None,
            };
            emit(out, &pretty_json(&doc))
        }
    }
}

fn store_command(
    catalog: &Catalog,
    root: &Path,
    action: StoreAction,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let store = ProfileStore::open(root)?;
    match action {
        StoreAction::List => emit(out, &pretty_json(&store.list_profiles()?)),
        StoreAction::Get { library_id, revision } => emit(out, &pretty_json(&store.get_profile(&library_id, revision)?)),
        StoreAction::Put { profile, force } => {
            let p = profile_file(catalog, &profile, err)?;
            emit(out, &pretty_json(&store.save_profile(catalog, &p, force)?))
        }
        StoreAction::ImportGrades {
            library_id,
            grades,
            assessor,
        } => {
            let mut p = store.get_profile(&library_id, None)?.library_profile();
            for a in import_grade_report(&read(&grades)?, &assessor, None)? {
                p.upsert(a);
            }
            emit(out, &pretty_json(&store.save_profile(catalog, &p, false)?))
        }
    }
}

//! The `dupaudit` command-line interface.
//!
//! Pipeline stages communicate only through files, so every intermediate
//! artifact can be inspected and diffed: `tokenize` produces a token
//! corpus, `detect` produces a duplication index, and the remaining
//! subcommands consume those. Diagnostics go to stderr; data goes to
//! files or stdout. Exit codes: 0 success, 1 data error, 2 usage error.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis;
use crate::bias;
use crate::corpus::{self, TokenDocument};
use crate::detector::{self, DuplicateGroup, DuplicationReport};
use crate::error::{Error, Result};
use crate::fingerprint::DetectionParams;
use crate::lab::{self, CopiesDist, LabGenConfig};
use crate::lexer::{self, SourceLanguage};

#[derive(Parser)]
#[command(
    name = "dupaudit",
    version,
    about = "Near-duplicate detection and duplication-bias auditing for code corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for parallel stages (default: logical cores).
    #[arg(long, global = true, env = "DUPAUDIT_JOBS")]
    jobs: Option<usize>,

    /// Suppress diagnostics on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,

    /// Extra diagnostics on stderr (e.g. per-file skip reasons).
    #[arg(long, short, global = true, conflicts_with = "quiet")]
    verbose: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LangArg {
    Java,
    Javascript,
    Python,
    Csharp,
}

impl From<LangArg> for SourceLanguage {
    fn from(lang: LangArg) -> Self {
        match lang {
            LangArg::Java => SourceLanguage::Java,
            LangArg::Javascript => SourceLanguage::JavaScript,
            LangArg::Python => SourceLanguage::Python,
            LangArg::Csharp => SourceLanguage::CSharp,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize a source tree into a JSONL token corpus.
    Tokenize {
        /// Input language.
        #[arg(long)]
        lang: LangArg,
        /// Root directory to scan.
        #[arg(long)]
        input: PathBuf,
        /// Token corpus to write (JSONL).
        #[arg(long)]
        output: PathBuf,
    },
    /// Detect near-duplicate files and write the duplication index.
    Detect {
        /// Token corpus (JSONL).
        #[arg(long)]
        tokens: PathBuf,
        /// Cluster file to write (JSON array of arrays).
        #[arg(long)]
        output: PathBuf,
        /// Distinct-token (set) Jaccard threshold.
        #[arg(long, default_value_t = 0.8)]
        t0: f64,
        /// Token-multiset Jaccard threshold.
        #[arg(long, default_value_t = 0.7)]
        t1: f64,
        /// Admission floor: documents with fewer tokens are ignored.
        #[arg(long, default_value_t = 20)]
        min_tokens: usize,
    },
    /// Corpus duplication statistics as a JSON object.
    Stats {
        /// Token corpus (JSONL).
        #[arg(long)]
        tokens: PathBuf,
        /// Duplication index produced by `detect`.
        #[arg(long)]
        clusters: PathBuf,
        /// Train fraction for the expected cross-set column.
        #[arg(long, default_value_t = 0.6)]
        train_fraction: f64,
        /// Admission floor used when the index was built.
        #[arg(long, default_value_t = 20)]
        min_tokens: usize,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Classify duplicates against a train/valid/test split.
    Audit {
        /// Duplication index.
        #[arg(long)]
        clusters: PathBuf,
        /// Split file (JSONL of filename/fold records).
        #[arg(long)]
        split: PathBuf,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write the deduplication keep-list (one id per line).
    Dedup {
        /// Duplication index.
        #[arg(long)]
        clusters: PathBuf,
        /// Token corpus defining the universe of files.
        #[arg(long)]
        tokens: PathBuf,
        /// Keep-list to write.
        #[arg(long)]
        output: PathBuf,
    },
    /// Per-sample down-weights (1 / group size) as JSONL.
    Weights {
        /// Duplication index.
        #[arg(long)]
        clusters: PathBuf,
        /// Optional token corpus; when given, singleton files are
        /// emitted too (weight 1), otherwise only duplicated files
        /// appear.
        #[arg(long)]
        tokens: Option<PathBuf>,
        /// Weights file to write.
        #[arg(long)]
        output: PathBuf,
    },
    /// Decompose a per-sample metric into unbiased estimate and
    /// duplication bias.
    Bias {
        /// Metric records (JSONL of filename/value).
        #[arg(long)]
        metrics: PathBuf,
        /// Duplication index.
        #[arg(long)]
        clusters: PathBuf,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Synthetic bias-inflation experiment with a memorization baseline.
    Lab {
        /// Generation and split seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of base documents.
        #[arg(long, default_value_t = 200)]
        n_base: usize,
        /// Vocabulary budget (default: n_base × doc_len).
        #[arg(long)]
        vocab_size: Option<usize>,
        /// Tokens per document.
        #[arg(long, default_value_t = 100)]
        doc_len: usize,
        /// Fraction of base documents that get copies.
        #[arg(long, default_value_t = 0.3)]
        dup_rate: f64,
        /// Fraction of tokens replaced per copy.
        #[arg(long, default_value_t = 0.02)]
        perturb_rate: f64,
        /// Number of class labels.
        #[arg(long, default_value_t = 10)]
        n_labels: u32,
        /// Truncation cap of the geometric extra-copies distribution.
        #[arg(long, default_value_t = 10)]
        copies_cap: u32,
        /// Train fraction of the i.i.d. split.
        #[arg(long, default_value_t = 0.5)]
        train_fraction: f64,
        /// Validation fraction of the i.i.d. split.
        #[arg(long, default_value_t = 0.1)]
        valid_fraction: f64,
        /// Write the result JSON here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Entry point used by the binary.
pub fn run() -> ExitCode {
    let cli = Cli::parse();

    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        // Ignore the error if a pool already exists (e.g. repeated calls
        // in-process); the CLI binary only gets here once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }

    if let Err(code) = validate_flags(&cli.command) {
        return code;
    }

    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Flag-value validation; violations are usage errors (exit 2), not data
/// errors.
fn validate_flags(command: &Command) -> std::result::Result<(), ExitCode> {
    let usage = |msg: String| {
        eprintln!("error: {msg}");
        Err(ExitCode::from(2))
    };
    match command {
        Command::Detect {
            t0, t1, min_tokens, ..
        } => {
            if let Err(e) = DetectionParams::new(*t0, *t1, *min_tokens) {
                return usage(e.to_string());
            }
        }
        Command::Stats {
            train_fraction,
            min_tokens,
            ..
        } => {
            if !(train_fraction.is_finite() && 0.0 < *train_fraction && *train_fraction < 1.0) {
                return usage(format!(
                    "--train-fraction must lie strictly between 0 and 1, got {train_fraction}"
                ));
            }
            if *min_tokens == 0 {
                return usage("--min-tokens must be at least 1".into());
            }
        }
        Command::Lab {
            dup_rate,
            perturb_rate,
            train_fraction,
            valid_fraction,
            n_base,
            doc_len,
            n_labels,
            ..
        } => {
            if !(0.0..=1.0).contains(dup_rate) || !(0.0..=1.0).contains(perturb_rate) {
                return usage("--dup-rate and --perturb-rate must lie in [0, 1]".into());
            }
            if !(*train_fraction > 0.0
                && *valid_fraction > 0.0
                && train_fraction + valid_fraction < 1.0)
            {
                return usage("split fractions must be positive with train + valid < 1".into());
            }
            if *n_base == 0 || *doc_len == 0 || *n_labels == 0 {
                return usage("--n-base, --doc-len and --n-labels must be positive".into());
            }
        }
        _ => {}
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let diag = Diagnostics {
        quiet: cli.quiet,
        verbose: cli.verbose,
    };
    match cli.command {
        Command::Tokenize {
            lang,
            input,
            output,
        } => cmd_tokenize(lang.into(), &input, &output, &diag),
        Command::Detect {
            tokens,
            output,
            t0,
            t1,
            min_tokens,
        } => cmd_detect(&tokens, &output, t0, t1, min_tokens, &diag),
        Command::Stats {
            tokens,
            clusters,
            train_fraction,
            min_tokens,
            output,
        } => cmd_stats(
            &tokens,
            &clusters,
            train_fraction,
            min_tokens,
            output.as_deref(),
        ),
        Command::Audit {
            clusters,
            split,
            output,
        } => cmd_audit(&clusters, &split, output.as_deref()),
        Command::Dedup {
            clusters,
            tokens,
            output,
        } => cmd_dedup(&clusters, &tokens, &output),
        Command::Weights {
            clusters,
            tokens,
            output,
        } => cmd_weights(&clusters, tokens.as_deref(), &output),
        Command::Bias {
            metrics,
            clusters,
            output,
        } => cmd_bias(&metrics, &clusters, output.as_deref()),
        Command::Lab {
            seed,
            n_base,
            vocab_size,
            doc_len,
            dup_rate,
            perturb_rate,
            n_labels,
            copies_cap,
            train_fraction,
            valid_fraction,
            output,
        } => {
            let cfg = LabGenConfig {
                seed,
                n_base,
                vocab_size: vocab_size.unwrap_or(n_base.saturating_mul(doc_len)),
                doc_len,
                dup_rate,
                copies_dist: CopiesDist::Geometric {
                    success_prob: 0.5,
                    cap: copies_cap,
                },
                perturb_rate,
                n_labels,
            };
            cmd_lab(
                &cfg,
                train_fraction,
                valid_fraction,
                output.as_deref(),
                &diag,
            )
        }
    }
}

struct Diagnostics {
    quiet: bool,
    verbose: bool,
}

impl Diagnostics {
    fn note(&self, message: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", message.as_ref());
        }
    }

    fn detail(&self, message: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", message.as_ref());
        }
    }
}

fn open_reader(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))
}

fn create_writer(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))
}

fn write_output(data: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => {
            let mut w = create_writer(path)?;
            w.write_all(data.as_bytes())?;
            w.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(data.as_bytes())?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn read_tokens_file(path: &Path) -> Result<Vec<TokenDocument>> {
    corpus::read_token_documents(open_reader(path)?)
}

fn read_clusters_file(path: &Path) -> Result<Vec<DuplicateGroup>> {
    corpus::read_clusters(open_reader(path)?)
}

/// Builds a report from cluster groups over `universe`, reporting all
/// group members outside the universe at once.
fn report_over_universe(
    groups: Vec<DuplicateGroup>,
    universe: BTreeSet<String>,
    context: &'static str,
) -> Result<DuplicationReport> {
    let mut missing: Vec<String> = groups
        .iter()
        .flat_map(|g| g.members())
        .filter(|m| !universe.contains(*m))
        .cloned()
        .collect();
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(Error::IdMismatch {
            context,
            missing,
            unexpected: Vec::new(),
        });
    }
    DuplicationReport::new(universe, groups)
}

fn cmd_tokenize(
    lang: SourceLanguage,
    input: &Path,
    output: &Path,
    diag: &Diagnostics,
) -> Result<ExitCode> {
    let (docs, skipped) = lexer::scan_tree(input, lang)?;
    for skip in &skipped {
        diag.detail(format!("skipped {}: {}", skip.path, skip.reason));
    }
    diag.note(format!(
        "tokenized {} {} file(s), skipped {}",
        docs.len(),
        lang.name(),
        skipped.len()
    ));
    if docs.is_empty() {
        eprintln!(
            "error: no files tokenized under {} ({} skipped)",
            input.display(),
            skipped.len()
        );
        return Ok(ExitCode::from(1));
    }
    let mut writer = create_writer(output)?;
    corpus::write_token_documents(&docs, &mut writer)?;
    writer.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_detect(
    tokens: &Path,
    output: &Path,
    t0: f64,
    t1: f64,
    min_tokens: usize,
    diag: &Diagnostics,
) -> Result<ExitCode> {
    let params = DetectionParams::new(t0, t1, min_tokens)?;
    let docs = read_tokens_file(tokens)?;
    let (report, undersized) = detector::detect(&docs, &params)?;

    let mut writer = create_writer(output)?;
    corpus::write_clusters(&report, &mut writer)?;
    writer.flush()?;

    let d_text = analysis::duplication_factor(&report)
        .map(|d| format!("{d:.4}"))
        .unwrap_or_else(|_| "n/a".to_string());
    diag.note(format!(
        "admitted {} file(s) ({} undersized), {} duplicate group(s), d={}",
        report.universe().len(),
        undersized.len(),
        report.groups().len(),
        d_text
    ));
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(
    tokens: &Path,
    clusters: &Path,
    train_fraction: f64,
    min_tokens: usize,
    output: Option<&Path>,
) -> Result<ExitCode> {
    let docs = read_tokens_file(tokens)?;
    let universe: BTreeSet<String> = docs
        .iter()
        .filter(|d| d.tokens.len() >= min_tokens)
        .map(|d| d.id.clone())
        .collect();
    let groups = read_clusters_file(clusters)?;
    let report = report_over_universe(groups, universe, "clusters vs. admitted tokens")?;
    let stats = analysis::corpus_stats(&report, train_fraction)?;
    let json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    write_output(&format!("{json}\n"), output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_audit(clusters: &Path, split: &Path, output: Option<&Path>) -> Result<ExitCode> {
    let split = corpus::read_split(open_reader(split)?)?;
    let groups = read_clusters_file(clusters)?;
    let universe: BTreeSet<String> = split.iter().map(|(id, _)| id.to_string()).collect();
    let report = report_over_universe(groups, universe, "clusters vs. split")?;
    let audit = analysis::audit_split(&report, &split)?;
    let json = serde_json::to_string_pretty(&audit).expect("audit serialize");
    write_output(&format!("{json}\n"), output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_dedup(clusters: &Path, tokens: &Path, output: &Path) -> Result<ExitCode> {
    let docs = read_tokens_file(tokens)?;
    // The keep-list covers every file: undersized files cannot be
    // duplicates, so they are trivially kept.
    let universe: BTreeSet<String> = docs.iter().map(|d| d.id.clone()).collect();
    let groups = read_clusters_file(clusters)?;
    let report = report_over_universe(groups, universe, "clusters vs. tokens")?;
    let keep = analysis::select_representatives(&report);
    let mut writer = create_writer(output)?;
    for id in &keep {
        writer.write_all(id.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_weights(clusters: &Path, tokens: Option<&Path>, output: &Path) -> Result<ExitCode> {
    let groups = read_clusters_file(clusters)?;
    let universe: BTreeSet<String> = match tokens {
        Some(path) => read_tokens_file(path)?
            .iter()
            .map(|d| d.id.clone())
            .collect(),
        None => groups.iter().flat_map(|g| g.members()).cloned().collect(),
    };
    let context = if tokens.is_some() {
        "clusters vs. tokens"
    } else {
        "clusters"
    };
    let report = report_over_universe(groups, universe, context)?;
    let weights = bias::sample_weights(&report);
    let mut writer = create_writer(output)?;
    for w in &weights {
        let line = serde_json::json!({ "filename": w.id, "weight": w.weight });
        writer.write_all(line.to_string().as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bias(metrics: &Path, clusters: &Path, output: Option<&Path>) -> Result<ExitCode> {
    let records = corpus::read_metrics(open_reader(metrics)?)?;
    let universe: BTreeSet<String> = records.iter().map(|r| r.id.clone()).collect();
    if universe.len() != records.len() {
        return Err(Error::InvalidParams(
            "metric file contains repeated ids".into(),
        ));
    }
    let groups = read_clusters_file(clusters)?;
    let report = report_over_universe(groups, universe, "clusters vs. metrics")?;
    let decomposition = bias::decompose(&records, &report)?;
    let json = serde_json::to_string_pretty(&decomposition).expect("decomposition serialize");
    write_output(&format!("{json}\n"), output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_lab(
    cfg: &LabGenConfig,
    train_fraction: f64,
    valid_fraction: f64,
    output: Option<&Path>,
    diag: &Diagnostics,
) -> Result<ExitCode> {
    let outcome = lab::run_experiment(cfg, train_fraction, valid_fraction, cfg.seed)?;
    let r = &outcome.result;

    diag.note(format!(
        "corpus        {} doc(s), {} detected group(s), d={:.4}",
        outcome.corpus_size, outcome.detected_groups, r.d
    ));
    diag.note(format!(
        "split         train={} valid={} test={}",
        outcome.train_size, outcome.valid_size, outcome.test_size
    ));
    diag.note(format!(
        "test variants no_dups={} cross_set_only={} all_dups={}",
        outcome.test_no_dups, outcome.test_cross_set_only, outcome.test_all_dups
    ));
    diag.note(format!(
        "accuracy      fully_biased={:.4} cross_set_biased={:.4} unbiased_test={:.4} fully_unbiased={:.4}",
        r.fully_biased_acc, r.cross_set_biased_acc, r.unbiased_test_acc, r.fully_unbiased_acc
    ));
    if let Some(acc) = outcome.cross_set_subset_acc {
        diag.note(format!("cross-set subset accuracy {acc:.4}"));
    }

    let json = serde_json::to_string_pretty(&outcome.result).expect("lab serialize");
    write_output(&format!("{json}\n"), output)?;
    Ok(ExitCode::SUCCESS)
}

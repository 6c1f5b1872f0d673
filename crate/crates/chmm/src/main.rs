//! Command-line surface: generate synthetic corpora, train models,
//! evaluate bits-per-symbol, decode (optionally scrambled) text, prune
//! transitions and export transition graphs.
//!
//! Data files hold one sequence per line, tokens separated by spaces
//! (`--chars` switches to raw-text mode: lines are normalized and read
//! character by character). Generated files get a `.meta` JSON sidecar
//! recording the parameters, seed and alphabet.
//!
//! Exit codes: 0 success, 1 runtime/data error, 2 usage error.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use chmm::analysis::{
    decode_scrambled, export_graph, permutation_baseline_accuracy, prune_sweep, prune_transitions,
    scramble, encode_scrambled, word_boundaries, GraphFormat,
};
use chmm::datasets::{
    bracket_alphabet, bracket_generate, concat_ab_alphabet, concat_ab_generate, normalize_text,
    toy_alphabet, toy_generate, AlphaMix, BracketParams, ToyFsmParams,
};
use chmm::inference::{bits_per_symbol, EvidenceSequence};
use chmm::learning::{
    fit_batch_em, fit_dense_hmm, fit_online_em, fit_with_early_stopping, EmConfig, OnlineEmConfig,
    TrainReport,
};
use chmm::model::{
    allocate_clones_by_frequency, load_model, save_model, Alphabet, BlockTransitionModel,
    CloneLayout,
};
use chmm::ChmmError;

#[derive(Parser)]
#[command(name = "chmm", version, about = "Cloned hidden Markov model toolkit")]
struct Cli {
    /// Worker threads for the E-step (default: machine parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic corpus and a .meta parameter sidecar
    Generate(GenerateArgs),
    /// Fit a model and write it plus a per-iteration CSV report
    Train(TrainArgs),
    /// Bits per symbol of a model on data
    Eval(EvalArgs),
    /// MAP-decode data; --scrambled shuffles word interiors first and
    /// reports recovery accuracy
    Decode(DecodeArgs),
    /// Zero small transition entries and rescore
    Prune(PruneArgs),
    /// Write the transition graph as an edge list or DOT
    Export(ExportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Toy,
    Bracket,
    ConcatAb,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Nesting depth (toy: number of noise groups; bracket: max depth)
    #[arg(long)]
    k: Option<usize>,
    /// Number of symbols to emit
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Toy only: longer-variant continuation probability
    #[arg(long)]
    alpha_u: Option<f64>,
    /// Toy only: shorter-variant continuation probability
    #[arg(long)]
    alpha_d: Option<f64>,
    /// Toy only: probability of drawing the longer variant per block
    #[arg(long)]
    p_u: Option<f64>,
    /// Bracket only: depth-0 probabilities "p_paren,p_square"
    /// (remainder terminates the sentence; default 5/12,5/12)
    #[arg(long, value_delimiter = ',')]
    alpha0: Option<Vec<f64>>,
    /// Bracket only: inner-depth probabilities "p_paren,p_square,p_close"
    /// (default uniform)
    #[arg(long, value_delimiter = ',')]
    alpha1: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Batch,
    Online,
    EarlyStop,
    DenseHmm,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    algo: Algo,
    /// key = value file; any key here can be overridden by its flag
    #[arg(long)]
    config: Option<PathBuf>,
    /// Treat the data file as raw text (lowercase a-z + space alphabet)
    #[arg(long)]
    chars: bool,
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Per-iteration CSV trace
    #[arg(long)]
    report: Option<PathBuf>,
    /// Clones per symbol [default: 1]
    #[arg(long)]
    clones: Option<usize>,
    /// Total state budget, split across symbols by frequency
    /// (overrides --clones)
    #[arg(long)]
    capacity: Option<usize>,
    /// Clone floor per symbol under --capacity [default: 1]
    #[arg(long)]
    min_clones: Option<usize>,
    /// Dense-HMM hidden state count [default: 16]
    #[arg(long)]
    hidden: Option<usize>,
    /// Batch-EM iteration cap [default: 1000]
    #[arg(long)]
    max_iters: Option<usize>,
    /// Relative log-likelihood gain below which EM stops [default: 1e-6]
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluation-time smoothing floor [default: 1e-5]
    #[arg(long)]
    smoothing_floor: Option<f64>,
    /// Online EM forgetting factor [default: 0.9]
    #[arg(long)]
    lambda: Option<f64>,
    /// Online EM batch size [default: 400]
    #[arg(long)]
    batch_size: Option<usize>,
    /// Batches absorbed between matrix refreshes [default: 1]
    #[arg(long)]
    update_every: Option<usize>,
    /// Online EM epoch cap [default: 100]
    #[arg(long)]
    epochs: Option<usize>,
    /// Early stopping: tail fraction held out [default: 0.1]
    #[arg(long)]
    validation_fraction: Option<f64>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    chars: bool,
    /// Evaluation smoothing floor; 0 scores the raw model and reports
    /// "inf" on any unseen transition
    #[arg(long, default_value_t = 1e-5)]
    eps_eval: f64,
    /// Per-sequence CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    chars: bool,
    /// Shuffle word interiors (keeping first/last letters) before
    /// decoding, then score the recovery
    #[arg(long)]
    scrambled: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Word separator token [default: the space symbol when present]
    #[arg(long)]
    separator: Option<String>,
    /// Decoded output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accuracy CSV (scrambled mode)
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct PruneArgs {
    #[arg(long)]
    model: PathBuf,
    /// Threshold below which in-support entries are zeroed; repeat for
    /// a sweep
    #[arg(long, required = true)]
    threshold: Vec<f64>,
    /// Score each pruned model on this data
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    chars: bool,
    #[arg(long, default_value_t = 1e-5)]
    eps_eval: f64,
    /// Save the model pruned at the last threshold
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Sweep CSV (threshold,fraction_zeroed,bps); needs --data
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    EdgeList,
    Dot,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value_t = ExportFormat::EdgeList)]
    format: ExportFormat,
    /// Drop edges with probability below this
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    /// Output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runtime failure (exit 1) vs bad parameters (exit 2).
enum CliError {
    Runtime(String),
    Usage(String),
}

impl From<ChmmError> for CliError {
    fn from(e: ChmmError) -> Self {
        match e {
            ChmmError::InvalidParameter(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(t) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .is_err()
        {
            eprintln!("error: could not configure {t} worker threads");
            return ExitCode::from(1);
        }
    }
    #[cfg(not(feature = "parallel"))]
    if let Some(t) = cli.threads {
        if t > 1 {
            eprintln!("note: built without the parallel feature; --threads {t} ignored");
        }
    }
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Prune(a) => cmd_prune(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

// ---------------------------------------------------------------- generate

#[derive(Serialize)]
struct Meta {
    kind: String,
    params: serde_json::Value,
    alphabet: Vec<String>,
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let need_k = || {
        args.k
            .ok_or_else(|| CliError::Usage("--k is required for this generator".into()))
    };
    let (seq, alphabet, kind, params) = match args.kind {
        Kind::Toy => {
            let k = need_k()?;
            let alpha_mix = match (args.alpha_u, args.alpha_d, args.p_u) {
                (None, None, None) => None,
                (Some(alpha_u), Some(alpha_d), Some(p_u)) => Some(AlphaMix {
                    alpha_u,
                    alpha_d,
                    p_u,
                }),
                _ => {
                    return Err(CliError::Usage(
                        "--alpha-u, --alpha-d and --p-u must be given together".into(),
                    ))
                }
            };
            let params = ToyFsmParams {
                k,
                alpha_mix,
                seed: args.seed,
            };
            let seq = toy_generate(&params, args.n)?;
            let json = serde_json::json!({
                "k": k, "n": args.n, "seed": args.seed,
                "alpha_u": args.alpha_u, "alpha_d": args.alpha_d, "p_u": args.p_u,
            });
            (seq, toy_alphabet(k), "toy", json)
        }
        Kind::Bracket => {
            let k = need_k()?;
            let mut params = BracketParams::uniform(k, args.seed);
            if let Some(a0) = &args.alpha0 {
                if a0.len() != 2 {
                    return Err(CliError::Usage(
                        "--alpha0 takes exactly 2 comma-separated values".into(),
                    ));
                }
                params.alpha0 = (a0[0], a0[1]);
            }
            if let Some(a1) = &args.alpha1 {
                if a1.len() != 3 {
                    return Err(CliError::Usage(
                        "--alpha1 takes exactly 3 comma-separated values".into(),
                    ));
                }
                params.alpha1 = (a1[0], a1[1], a1[2]);
            }
            let seq = bracket_generate(&params, args.n)?;
            let json = serde_json::json!({
                "k": k, "n": args.n, "seed": args.seed,
                "alpha0": [params.alpha0.0, params.alpha0.1],
                "alpha1": [params.alpha1.0, params.alpha1.1, params.alpha1.2],
            });
            (seq, bracket_alphabet(), "bracket", json)
        }
        Kind::ConcatAb => {
            if args.k.is_some() {
                return Err(CliError::Usage("--k does not apply to concat-ab".into()));
            }
            let seq = concat_ab_generate(args.n, args.seed);
            let json = serde_json::json!({ "n": args.n, "seed": args.seed });
            (seq, concat_ab_alphabet(), "concat-ab", json)
        }
    };
    let tokens: Vec<&str> = seq.iter().map(|&s| alphabet.symbol(s)).collect();
    fs::write(&args.out, tokens.join(" ") + "\n")?;
    let meta = Meta {
        kind: kind.into(),
        params,
        alphabet: alphabet.symbols().to_vec(),
    };
    let meta_path = sidecar_path(&args.out);
    fs::write(
        &meta_path,
        serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n",
    )?;
    println!("wrote {} symbols to {}", seq.len(), args.out.display());
    Ok(())
}

fn sidecar_path(data: &Path) -> PathBuf {
    let mut os = data.as_os_str().to_owned();
    os.push(".meta");
    PathBuf::from(os)
}

// ------------------------------------------------------------------- data

/// Sequences plus the alphabet they are encoded against.
struct Corpus {
    alphabet: Alphabet,
    sequences: Vec<Vec<usize>>,
}

impl Corpus {
    fn concat(&self) -> Vec<usize> {
        self.sequences.concat()
    }

    fn n_symbols(&self) -> usize {
        self.sequences.iter().map(Vec::len).sum()
    }
}

/// Read a data file. Token mode splits each line on whitespace; the
/// alphabet comes from `fixed` (a loaded model), else the `.meta`
/// sidecar, else the sorted set of distinct tokens. Char mode
/// normalizes each line and uses the a-z + space alphabet.
fn read_corpus(path: &Path, chars: bool, fixed: Option<&Alphabet>) -> Result<Corpus, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    if chars {
        let alphabet = match fixed {
            Some(a) => a.clone(),
            None => Alphabet::lowercase_text(),
        };
        let sequences = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| alphabet.encode_chars(&normalize_text(l)))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Corpus {
            alphabet,
            sequences,
        });
    }
    let lines: Vec<Vec<&str>> = text
        .lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect();
    let alphabet = match fixed {
        Some(a) => a.clone(),
        None => match read_sidecar_alphabet(path)? {
            Some(a) => a,
            None => {
                let distinct: BTreeSet<&str> = lines.iter().flatten().copied().collect();
                Alphabet::new(distinct)?
            }
        },
    };
    let sequences = lines
        .iter()
        .map(|tokens| {
            tokens
                .iter()
                .map(|t| alphabet.index_of(t))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Corpus {
        alphabet,
        sequences,
    })
}

fn read_sidecar_alphabet(data: &Path) -> Result<Option<Alphabet>, CliError> {
    let meta_path = sidecar_path(data);
    if !meta_path.exists() {
        return Ok(None);
    }
    let raw = fs::read_to_string(&meta_path)?;
    let value: serde_json::Value = serde_json::from_str(&raw)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", meta_path.display())))?;
    let symbols = value
        .get("alphabet")
        .and_then(|a| a.as_array())
        .ok_or_else(|| {
            CliError::Runtime(format!("{}: missing alphabet list", meta_path.display()))
        })?
        .iter()
        .map(|s| s.as_str().map(str::to_owned))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| {
            CliError::Runtime(format!("{}: non-string alphabet entry", meta_path.display()))
        })?;
    Ok(Some(Alphabet::new(symbols)?))
}

// ------------------------------------------------------------------ train

/// Flat `key = value` file; `#` starts a comment. Every key corresponds
/// to a flag of the same name and the flag wins on conflict.
fn load_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "{} line {}: expected key = value",
                path.display(),
                lineno + 1
            ))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_key<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config key {key}: bad value {value:?}")))
}

/// Merge config-file keys into unset flags; unknown keys are rejected.
fn apply_train_config(args: &mut TrainArgs, pairs: &[(String, String)]) -> Result<(), CliError> {
    fn fill<T: std::str::FromStr>(
        slot: &mut Option<T>,
        key: &str,
        value: &str,
    ) -> Result<(), CliError> {
        if slot.is_none() {
            *slot = Some(parse_key(key, value)?);
        }
        Ok(())
    }
    for (key, value) in pairs {
        match key.as_str() {
            "clones" => fill(&mut args.clones, key, value)?,
            "capacity" => fill(&mut args.capacity, key, value)?,
            "min_clones" => fill(&mut args.min_clones, key, value)?,
            "hidden" => fill(&mut args.hidden, key, value)?,
            "max_iters" => fill(&mut args.max_iters, key, value)?,
            "rel_tol" => fill(&mut args.rel_tol, key, value)?,
            "seed" => fill(&mut args.seed, key, value)?,
            "smoothing_floor" => fill(&mut args.smoothing_floor, key, value)?,
            "lambda" => fill(&mut args.lambda, key, value)?,
            "batch_size" => fill(&mut args.batch_size, key, value)?,
            "update_every" => fill(&mut args.update_every, key, value)?,
            "epochs" => fill(&mut args.epochs, key, value)?,
            "validation_fraction" => fill(&mut args.validation_fraction, key, value)?,
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
    }
    Ok(())
}

fn cmd_train(mut args: TrainArgs) -> Result<(), CliError> {
    if let Some(path) = args.config.clone() {
        let pairs = load_config(&path)?;
        apply_train_config(&mut args, &pairs)?;
    }
    let corpus = read_corpus(&args.data, args.chars, None)?;
    if corpus.sequences.is_empty() {
        return Err(CliError::Runtime(format!(
            "{}: no sequences",
            args.data.display()
        )));
    }
    let em_config = EmConfig {
        max_iters: args.max_iters.unwrap_or(1000),
        rel_tol: args.rel_tol.unwrap_or(1e-6),
        seed: args.seed.unwrap_or(0),
        smoothing_floor: args.smoothing_floor.unwrap_or(1e-5),
    };
    let online_config = OnlineEmConfig {
        batch_size: args.batch_size.unwrap_or(400),
        lambda: args.lambda.unwrap_or(0.9),
        epochs: args.epochs.unwrap_or(100),
        update_every: args.update_every.unwrap_or(1),
    };

    if args.algo == Algo::DenseHmm {
        let hidden = args.hidden.unwrap_or(16);
        let (model, report) =
            fit_dense_hmm(hidden, corpus.alphabet.len(), &corpus.sequences, &em_config)
                .map_err(annotate_impossible)?;
        let bps = model
            .smoothed_for_eval(em_config.smoothing_floor)
            .bits_per_symbol(&corpus.sequences)
            .ok_or_else(|| CliError::Runtime("train corpus impossible under model".into()))?;
        println!("train_bps {bps:.6}");
        println!("stop {}", report.stop_reason);
        if args.model_out.is_some() {
            return Err(CliError::Usage(
                "--model-out only applies to cloned models; dense HMMs are a baseline".into(),
            ));
        }
        write_report(&report, args.report.as_deref())?;
        return Ok(());
    }

    let layout = match args.capacity {
        Some(capacity) => allocate_clones_by_frequency(
            &corpus.concat(),
            corpus.alphabet.len(),
            capacity,
            args.min_clones.unwrap_or(1),
        )?,
        None => CloneLayout::uniform(corpus.alphabet.len(), args.clones.unwrap_or(1))?,
    };

    let (model, report) = match args.algo {
        Algo::Batch => fit_batch_em(&corpus.alphabet, &layout, &corpus.sequences, &em_config)
            .map_err(annotate_impossible)?,
        Algo::Online => {
            let seq = corpus.concat();
            fit_online_em(
                &corpus.alphabet,
                &layout,
                &seq,
                &online_config,
                em_config.seed,
            )
            .map_err(annotate_impossible)?
        }
        Algo::EarlyStop => {
            let seq = corpus.concat();
            let frac = args.validation_fraction.unwrap_or(0.1);
            if !(0.0..1.0).contains(&frac) || frac == 0.0 {
                return Err(CliError::Usage(format!(
                    "validation_fraction {frac} outside (0, 1)"
                )));
            }
            let val_len = ((seq.len() as f64 * frac).round() as usize).clamp(1, seq.len() - 1);
            let split = seq.len() - val_len;
            fit_with_early_stopping(
                &corpus.alphabet,
                &layout,
                &seq[..split],
                &seq[split..],
                &online_config,
                &em_config,
            )
            .map_err(annotate_impossible)?
        }
        Algo::DenseHmm => unreachable!("handled above"),
    };

    let eval = model.smoothed_for_eval(em_config.smoothing_floor);
    let mut loglik = 0.0;
    for seq in &corpus.sequences {
        loglik += bits_per_symbol(&eval, &EvidenceSequence::hard(seq))?.value * seq.len() as f64;
    }
    println!("train_bps {:.6}", loglik / corpus.n_symbols() as f64);
    if let Some(last_val) = report.val_bps.iter().flatten().last() {
        println!("val_bps {last_val:.6}");
    }
    if let Some((it1, it2)) = report.selected_iters {
        println!("selected_epochs {it1}");
        println!("selected_batch_iters {it2}");
    }
    println!("stop {}", report.stop_reason);
    if let Some(path) = &args.model_out {
        save_model(&model, path)?;
    }
    write_report(&report, args.report.as_deref())?;
    Ok(())
}

/// Exit-1 message carrying the failing sequence index when EM hits an
/// impossible sequence.
fn annotate_impossible(e: ChmmError) -> CliError {
    match e {
        ChmmError::ImpossibleSequence { index } => {
            CliError::Runtime(format!("sequence {index} is impossible under the model"))
        }
        other => other.into(),
    }
}

fn write_report(report: &TrainReport, path: Option<&Path>) -> Result<(), CliError> {
    if let Some(path) = path {
        let mut w = fs::File::create(path)?;
        report.write_csv(&mut w)?;
    }
    Ok(())
}

// ------------------------------------------------------------------- eval

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let corpus = read_corpus(&args.data, args.chars, Some(model.alphabet()))?;
    if corpus.sequences.is_empty() {
        return Err(CliError::Runtime(format!(
            "{}: no sequences",
            args.data.display()
        )));
    }
    if !(0.0..1.0).contains(&args.eps_eval) {
        return Err(CliError::Usage(format!(
            "eps_eval {} outside [0, 1)",
            args.eps_eval
        )));
    }
    let eval = model.smoothed_for_eval(args.eps_eval);
    let mut csv = String::from("sequence,n_symbols,bps\n");
    let mut total_bits = 0.0;
    let mut impossible = 0usize;
    for (i, seq) in corpus.sequences.iter().enumerate() {
        let bps = bits_per_symbol(&eval, &EvidenceSequence::hard(seq))?;
        if bps.impossible {
            impossible += 1;
            csv.push_str(&format!("{},{},inf\n", i, seq.len()));
        } else {
            total_bits += bps.value * seq.len() as f64;
            csv.push_str(&format!("{},{},{}\n", i, seq.len(), bps.value));
        }
    }
    if impossible > 0 {
        println!("bps inf");
    } else {
        println!("bps {:.6}", total_bits / corpus.n_symbols() as f64);
    }
    println!("impossible {impossible}");
    if let Some(path) = &args.csv {
        fs::write(path, csv)?;
    }
    Ok(())
}

// ------------------------------------------------------------------ decode

fn cmd_decode(args: DecodeArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let alphabet = model.alphabet().clone();
    let corpus = read_corpus(&args.data, args.chars, Some(&alphabet))?;
    let separator = match &args.separator {
        Some(tok) => Some(alphabet.index_of(tok)?),
        None => alphabet.index_of(" ").ok(),
    };
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };

    if !args.scrambled {
        // identity decode: hard evidence pins every step, so the MAP
        // path re-emits the input symbols
        for seq in &corpus.sequences {
            let path = chmm::inference::viterbi(&model, &EvidenceSequence::hard(seq))
                .map_err(annotate_impossible)?;
            writeln!(out, "{}", render(&alphabet, &path.symbols, args.chars))?;
        }
        return Ok(());
    }

    let mut words = 0usize;
    let mut words_correct = 0.0;
    let mut syms = 0usize;
    let mut syms_correct = 0.0;
    let mut baseline_words = 0.0;
    let mut impossible = 0usize;
    for (i, seq) in corpus.sequences.iter().enumerate() {
        // a missing separator makes the whole line one word
        let boundaries = match separator {
            Some(sep) => word_boundaries(seq, sep),
            None => vec![(0, seq.len())],
        };
        let shuffled = scramble(seq, &boundaries, args.seed.wrapping_add(i as u64))?;
        let encoding = encode_scrambled(&shuffled, &boundaries, alphabet.len())?;
        let report = decode_scrambled(&model, &encoding, seq)?;
        writeln!(out, "{}", render(&alphabet, &report.decoded, args.chars))?;
        let n_words = boundaries.len();
        words += n_words;
        words_correct += report.word_accuracy * n_words as f64;
        syms += seq.len();
        syms_correct += report.char_accuracy * seq.len() as f64;
        baseline_words += permutation_baseline_accuracy(seq, &boundaries) * n_words as f64;
        impossible += report.impossible_words;
    }
    if words == 0 {
        return Err(CliError::Runtime("no words to decode".into()));
    }
    let word_acc = words_correct / words as f64;
    let char_acc = syms_correct / syms as f64;
    let baseline = baseline_words / words as f64;
    println!("word_accuracy {word_acc:.6}");
    println!("char_accuracy {char_acc:.6}");
    println!("permutation_baseline {baseline:.6}");
    println!("impossible_words {impossible}");
    if let Some(path) = &args.csv {
        fs::write(
            path,
            format!(
                "word_accuracy,char_accuracy,permutation_baseline,impossible_words\n{},{},{},{}\n",
                word_acc, char_acc, baseline, impossible
            ),
        )?;
    }
    Ok(())
}

fn render(alphabet: &Alphabet, seq: &[usize], chars: bool) -> String {
    if chars {
        alphabet.decode(seq)
    } else {
        seq.iter()
            .map(|&s| alphabet.symbol(s))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

// ------------------------------------------------------------------- prune

fn cmd_prune(args: PruneArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    if let Some(t) = args.threshold.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(CliError::Usage(format!("threshold {t} must be >= 0")));
    }
    match &args.data {
        Some(data) => {
            let corpus = read_corpus(data, args.chars, Some(model.alphabet()))?;
            let eval = EvidenceSequence::hard(&corpus.concat());
            let (models, report) = prune_sweep(&model, &args.threshold, &eval, args.eps_eval)?;
            for row in &report.rows {
                println!(
                    "threshold {} fraction_zeroed {:.6} bps {:.6}",
                    row.threshold, row.fraction_zeroed, row.bps
                );
            }
            if let Some(path) = &args.report {
                let mut w = fs::File::create(path)?;
                report.write_csv(&mut w)?;
            }
            if let Some(path) = &args.model_out {
                save_model(models.last().expect("one model per threshold"), path)?;
            }
        }
        None => {
            if args.report.is_some() {
                return Err(CliError::Usage("--report needs --data for scoring".into()));
            }
            let mut last = None;
            for &t in &args.threshold {
                let pruned = prune_transitions(&model, t);
                println!(
                    "threshold {} fraction_zeroed {:.6}",
                    t,
                    fraction_zeroed_of(&pruned)
                );
                last = Some(pruned);
            }
            if let Some(path) = &args.model_out {
                save_model(&last.expect("at least one threshold"), path)?;
            }
        }
    }
    Ok(())
}

fn fraction_zeroed_of(model: &BlockTransitionModel) -> f64 {
    let mut zero = 0usize;
    let mut total = 0usize;
    for (i, j) in model.present_blocks() {
        let block = model.block(i, j).expect("present block");
        total += block.len();
        zero += block.iter().filter(|&&p| p == 0.0).count();
    }
    if total == 0 {
        0.0
    } else {
        zero as f64 / total as f64
    }
}

// ------------------------------------------------------------------ export

fn cmd_export(args: ExportArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    if !args.threshold.is_finite() || args.threshold < 0.0 {
        return Err(CliError::Usage(format!(
            "threshold {} must be >= 0",
            args.threshold
        )));
    }
    let format = match args.format {
        ExportFormat::EdgeList => GraphFormat::EdgeList,
        ExportFormat::Dot => GraphFormat::Dot,
    };
    match &args.out {
        Some(path) => {
            let mut w = fs::File::create(path)?;
            export_graph(&model, args.threshold, format, &mut w)?;
        }
        None => {
            let mut w = std::io::stdout().lock();
            export_graph(&model, args.threshold, format, &mut w)?;
        }
    }
    Ok(())
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use declfix_core::driver::{
    self, export_fixtures, run_eval, run_fix, run_train, write_ast_json, Detector, FixOptions,
};
use declfix_core::neuralnet::{format, ModelConfig, Nonlinearity, OutputMode, TrainedModel};
use declfix_core::{DriverError, Vocabulary};

#[derive(Parser)]
#[command(name = "declfix", version, about = "Find and declare undeclared variables in C programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DetectorArgs {
    /// Use scope analysis only (the default).
    #[arg(long, conflicts_with = "model")]
    oracle: bool,
    /// Trained model file; its `<model>.vocab.json` sidecar must exist.
    #[arg(long, value_name = "M")]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct BindArgs {
    /// Type used when no binding rule applies.
    #[arg(long, value_name = "T", default_value = "int")]
    fallback_type: String,
    /// Size of synthesized array declarations.
    #[arg(long, value_name = "N", default_value_t = 1000)]
    array_size: u64,
    /// Vote across all uses instead of taking the first matching use.
    #[arg(long)]
    best_evidence: bool,
}

impl BindArgs {
    fn options(&self) -> FixOptions {
        FixOptions {
            fallback_type: self.fallback_type.clone(),
            array_size: self.array_size,
            best_evidence: self.best_evidence,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Repair a file by declaring its undeclared variables.
    Fix {
        file: PathBuf,
        #[command(flatten)]
        detector: DetectorArgs,
        #[command(flatten)]
        bind: BindArgs,
        /// Write the repaired source here instead of stdout.
        #[arg(short, long, value_name = "OUT")]
        output: Option<PathBuf>,
        /// Write the input and repaired trees as JSON into this directory.
        #[arg(long, value_name = "DIR")]
        emit_ast_json: Option<PathBuf>,
        /// Print the JSON report on stdout instead of the repaired source.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report to this file.
        #[arg(long, value_name = "R")]
        report: Option<PathBuf>,
    },
    /// List undeclared identifiers without repairing.
    Detect {
        file: PathBuf,
        #[command(flatten)]
        detector: DetectorArgs,
    },
    /// Train the declaration model on a directory of C files.
    Train {
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        #[arg(long, value_name = "N")]
        epochs: usize,
        #[arg(long, value_name = "S", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "M")]
        out: PathBuf,
        /// Use 512 embedding and hidden units instead of 64.
        #[arg(long)]
        full_size: bool,
        /// Override the embedding and hidden sizes.
        #[arg(long, value_name = "K")]
        units: Option<usize>,
        #[arg(long, value_name = "P")]
        dropout: Option<f64>,
        /// Candidate input nonlinearity: sigmoid or tanh.
        #[arg(long, value_name = "F", value_parser = parse_nonlinearity)]
        candidate: Option<Nonlinearity>,
        /// Single softmax head trained along the ID→Decl→TypeDecl chain.
        #[arg(long)]
        chained: bool,
        /// Write the per-epoch loss history as JSON.
        #[arg(long, value_name = "H")]
        history: Option<PathBuf>,
    },
    /// Score a corpus against truth annotations.
    Eval {
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        #[arg(long, value_name = "DIR")]
        truth: PathBuf,
        #[command(flatten)]
        detector: DetectorArgs,
        #[command(flatten)]
        bind: BindArgs,
        #[arg(long, value_name = "R")]
        report: Option<PathBuf>,
    },
    /// Work with the checked-in fixture programs.
    #[command(subcommand)]
    Fixtures(FixturesCommand),
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Write `corpus/<id>.c` and `truth/<id>.truth.json` under DIR.
    Export {
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Include the fixtures without a golden repair.
        #[arg(long)]
        all: bool,
    },
    /// Print a random well-formed program.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        size: usize,
    },
}

fn parse_nonlinearity(s: &str) -> Result<Nonlinearity, String> {
    match s {
        "sigmoid" => Ok(Nonlinearity::Sigmoid),
        "tanh" => Ok(Nonlinearity::Tanh),
        _ => Err(format!("expected sigmoid or tanh, got {s}")),
    }
}

fn load_model(args: &DetectorArgs) -> anyhow::Result<Option<(TrainedModel, Vocabulary)>> {
    match &args.model {
        None => Ok(None),
        Some(path) => format::load(path)
            .map(Some)
            .with_context(|| format!("loading model {}", path.display())),
    }
}

fn detector(loaded: &Option<(TrainedModel, Vocabulary)>) -> Detector<'_> {
    match loaded {
        None => Detector::Oracle,
        Some((model, vocab)) => Detector::Neural { model, vocab },
    }
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Fix {
            file,
            detector: det,
            bind,
            output,
            emit_ast_json,
            json,
            report,
        } => {
            let loaded = load_model(&det)?;
            let outcome = run_fix(&file, detector(&loaded), &bind.options())?;
            if let Some(dir) = &emit_ast_json {
                write_ast_json(dir, &file, &outcome)?;
            }
            let r = &outcome.report;
            if let Some(path) = &report {
                write(path, &r.to_json())?;
            }
            if let Some(err) = &r.error {
                eprintln!("{err}");
            }
            for u in &r.undeclared {
                let size = u.array_size.map(|n| format!("[{n}]")).unwrap_or_default();
                eprintln!(
                    "{}: note: declared '{} {}{}' in '{}' (case {}, from {})",
                    u.site, u.ctype, u.name, size, u.function, u.case_id, u.bound_from
                );
            }
            for w in &r.warnings {
                eprintln!("{}: warning: {}", w.site, w.message);
            }
            for c in &r.unresolved_callees {
                eprintln!("{}: warning: call to undeclared function '{}'", c.site, c.name);
            }
            match (&outcome.repaired, &output) {
                (Some(text), Some(path)) => write(path, text)?,
                (Some(text), None) if !json => print!("{text}"),
                _ => {}
            }
            if json {
                print!("{}", r.to_json());
            }
            Ok(exit(r.status.exit_code()))
        }
        Command::Detect { file, detector: det } => {
            let loaded = load_model(&det)?;
            let source = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let root = match declfix_core::parse_source(&source, &file.to_string_lossy()) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(exit(1));
                }
            };
            let (uses, _) = driver::detect(&root, detector(&loaded))?;
            for u in uses {
                println!(
                    "{}: undeclared identifier '{}' in function '{}'",
                    u.first_use, u.name, u.enclosing_function
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Train {
            corpus,
            epochs,
            seed,
            out,
            full_size,
            units,
            dropout,
            candidate,
            chained,
            history,
        } => {
            let mut config = if full_size { ModelConfig::full_size() } else { ModelConfig::desk() };
            config.epochs = epochs;
            config.rng_seed = seed;
            if let Some(k) = units {
                config.embedding_dim = k;
                config.hidden_units = k;
            }
            if let Some(p) = dropout {
                config.dropout = p;
            }
            if let Some(c) = candidate {
                config.candidate_nonlinearity = c;
            }
            if chained {
                config.output_mode = OutputMode::Chained;
            }
            let summary = run_train(&corpus, &config, &out)?;
            if let Some(path) = &history {
                let mut text = serde_json::to_string_pretty(&summary.history)?;
                text.push('\n');
                write(path, &text)?;
            }
            println!("files: {}", summary.files);
            println!("vocabulary size V: {}", summary.vocab_size);
            println!(
                "training pairs: {} ({} train, {} held out)",
                summary.pairs, summary.train_keys, summary.heldout_keys
            );
            println!("epochs: {}", summary.epochs);
            println!("final loss: {:.6}", summary.final_loss);
            println!("training-key recall: {:.1}%", 100.0 * summary.training_recall);
            println!("model: {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            corpus,
            truth,
            detector: det,
            bind,
            report,
        } => {
            let loaded = load_model(&det)?;
            let r = run_eval(&corpus, &truth, detector(&loaded), &bind.options())?;
            if let Some(path) = &report {
                let mut text = serde_json::to_string_pretty(&r)?;
                text.push('\n');
                write(path, &text)?;
            }
            print!("{}", r.table());
            Ok(ExitCode::SUCCESS)
        }
        Command::Fixtures(FixturesCommand::Export { out, all }) => {
            let cases = export_fixtures(&out, all)?;
            println!("exported {} fixtures to {}", cases.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Fixtures(FixturesCommand::Generate { seed, size }) => {
            print!("{}", declfix_core::generate_program(seed, size));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("declfix: error: {e:#}");
            let frontend = e
                .downcast_ref::<DriverError>()
                .is_some_and(|d| matches!(d, DriverError::Frontend(_)));
            exit(if frontend { 1 } else { 2 })
        }
    }
}

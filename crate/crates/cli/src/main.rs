//! `abusivetext`: train, apply and score abusive-comment classifiers.

mod error;

use std::fs::{self, File};
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abusivetext::bundle::ModelBundle;
use abusivetext::corpus::{
    compute_stats, parse_dataset, read_label_table, DatasetSplit, DatasetStats, Label, ParseOptions, SplitName,
    TableFormat,
};
use abusivetext::pipeline::{self, RunConfig, TrainSummary};
use abusivetext::textprep::preprocess;
use abusivetext::ModelKind;
use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "abusivetext",
    version,
    about = "Abusive-comment classification for code-mixed text"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print label counts for a dataset file.
    Stats {
        input: PathBuf,
        #[arg(long, default_value = "tsv")]
        format: TableFormat,
    },
    /// Clean stdin line by line onto stdout.
    Preprocess {
        /// Run config whose `preprocessing` table sets the policy.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit a model and write a bundle.
    Train(TrainArgs),
    /// Score a dataset with a saved bundle.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "tsv")]
        format: TableFormat,
    },
    /// Score predictions against gold labels.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Where to write the JSON report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Format of the gold file; predictions are always TSV.
        #[arg(long, default_value = "tsv")]
        format: TableFormat,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// TOML run config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    model_kind: Option<ModelKind>,
    /// Output bundle path.
    #[arg(long, alias = "out")]
    model: Option<PathBuf>,
    #[arg(long)]
    format: Option<TableFormat>,
    #[arg(long)]
    language_tag: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    subword_vocab_size: Option<usize>,
}

impl TrainArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_toml(&read_text(path)?)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($flag:expr, $field:expr) => {
                if let Some(v) = $flag {
                    $field = v;
                }
            };
        }
        if self.train.is_some() {
            cfg.train = self.train;
        }
        if self.dev.is_some() {
            cfg.dev = self.dev;
        }
        if self.model.is_some() {
            cfg.model = self.model;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        set!(self.model_kind, cfg.model_kind);
        set!(self.format, cfg.format);
        set!(self.language_tag, cfg.language_tag);
        set!(self.subword_vocab_size, cfg.subword_vocab_size);
        match cfg.model_kind {
            ModelKind::TfidfLr => {
                set!(self.lr, cfg.lr.learning_rate);
                set!(self.epochs, cfg.lr.epochs);
                set!(self.batch_size, cfg.lr.batch_size);
            }
            ModelKind::MicroEncoder => {
                set!(self.lr, cfg.encoder_train.learning_rate);
                set!(self.epochs, cfg.encoder_train.epochs);
                set!(self.batch_size, cfg.encoder_train.batch_size);
            }
        }
        cfg.resolve_seed()?;
        Ok(cfg)
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_out(err: io::Error) -> CliError {
    CliError::new("IO_ERROR", err.to_string())
}

fn load_split(path: &Path, format: TableFormat, split: SplitName, tag: &str) -> Result<DatasetSplit, CliError> {
    let opts = ParseOptions {
        format,
        has_labels: split != SplitName::Test,
        split,
        language_tag: tag.to_owned(),
    };
    parse_dataset(open(path)?, &opts).map_err(|e| CliError::new("PARSE_ERROR", format!("{}: {e}", path.display())))
}

fn stats_line(name: &str, s: &DatasetStats) -> String {
    format!(
        "{name:<6} total={} Non-Abusive={} Abusive={} unlabeled={}",
        s.total,
        s.count(Label::NonAbusive),
        s.count(Label::Abusive),
        s.unlabeled
    )
}

fn cmd_stats(input: &Path, format: TableFormat) -> Result<(), CliError> {
    let split = load_split(input, format, SplitName::Test, "")?;
    println!("{}", stats_line("file", &compute_stats(&split)));
    Ok(())
}

fn cmd_preprocess(config: Option<&Path>) -> Result<(), CliError> {
    let policy = match config {
        Some(path) => RunConfig::from_toml(&read_text(path)?)?.preprocessing,
        None => Default::default(),
    };
    let stdin = io::stdin().lock();
    let mut out = BufWriter::new(io::stdout().lock());
    for line in stdin.lines() {
        let line = line.map_err(write_out)?;
        writeln!(out, "{}", preprocess(&line, &policy)).map_err(write_out)?;
    }
    out.flush().map_err(write_out)
}

fn print_summary(summary: &TrainSummary) {
    println!("model_kind {}", summary.model_kind);
    println!("{}", stats_line("train", &summary.train_stats));
    if let Some(dev) = &summary.dev_stats {
        println!("{}", stats_line("dev", dev));
    }
    for (k, loss) in summary.epoch_losses.iter().enumerate() {
        match summary.epoch_dev_macro_f1.get(k) {
            Some(f1) => println!("epoch {:>3}  loss {loss:.6}  dev_macro_f1 {f1:.4}", k + 1),
            None => println!("epoch {:>3}  loss {loss:.6}", k + 1),
        }
    }
    if let Some(report) = &summary.dev_report {
        println!("dev report");
        print!("{report}");
    }
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let cfg = args.resolve()?;
    if cfg.model_kind == ModelKind::MicroEncoder && cfg.dev.is_none() {
        return Err(pipeline::PipelineError::DevRequired.into());
    }
    let train_path = cfg
        .train
        .clone()
        .ok_or_else(|| CliError::new("CONFIG_ERROR", "no train file (set `train` or pass --train)"))?;
    let model_path = cfg
        .model
        .clone()
        .ok_or_else(|| CliError::new("CONFIG_ERROR", "no bundle path (set `model` or pass --model)"))?;
    let train = load_split(&train_path, cfg.format, SplitName::Train, &cfg.language_tag)?;
    let dev = match &cfg.dev {
        Some(p) => Some(load_split(p, cfg.format, SplitName::Dev, &cfg.language_tag)?),
        None => None,
    };
    let (bundle, summary) = pipeline::train_bundle(&cfg, &train, dev.as_ref())?;
    fs::write(&model_path, bundle.to_json()).map_err(|e| CliError::io(&model_path, e))?;
    print_summary(&summary);
    println!("wrote {}", model_path.display());
    Ok(())
}

fn cmd_predict(model: &Path, input: &Path, output: Option<&Path>, format: TableFormat) -> Result<(), CliError> {
    let bundle = ModelBundle::from_json(&read_text(model)?)?;
    let classifier = bundle.classifier()?;
    let split = load_split(input, format, SplitName::Test, &bundle.language_tag)?;
    let predictions = pipeline::predict(&classifier, &split)?;
    match output {
        Some(path) => {
            let mut out = create(path)?;
            pipeline::write_predictions(&predictions, &mut out).map_err(write_out)?;
            out.flush().map_err(write_out)
        }
        None => pipeline::write_predictions(&predictions, io::stdout().lock()).map_err(write_out),
    }
}

fn cmd_evaluate(gold: &Path, pred: &Path, report: Option<&Path>, format: TableFormat) -> Result<(), CliError> {
    let read = |path: &Path, format| {
        read_label_table(open(path)?, format)
            .map_err(|e| CliError::new("PARSE_ERROR", format!("{}: {e}", path.display())))
    };
    let gold_pairs = read(gold, format)?;
    let pred_pairs = read(pred, TableFormat::Tsv)?;
    let result = pipeline::evaluate_pairs(&gold_pairs, &pred_pairs)?;
    print!("{result}");
    if let Some(path) = report {
        fs::write(path, pipeline::report_json(&result)).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Stats { input, format } => cmd_stats(&input, format),
        Command::Preprocess { config } => cmd_preprocess(config.as_deref()),
        Command::Train(args) => cmd_train(args),
        Command::Predict {
            model,
            input,
            output,
            format,
        } => cmd_predict(&model, &input, output.as_deref(), format),
        Command::Evaluate {
            gold,
            pred,
            report,
            format,
        } => cmd_evaluate(&gold, &pred, report.as_deref(), format),
    }
}

fn main() -> ExitCode {
    // Usage errors exit 1; clap's own default of 2 is taken by FILE_NOT_FOUND.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

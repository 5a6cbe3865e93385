use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rulemine::commands;
use rulemine::experiments;
use rulemine::{Error, Result};
use rulemine_core::miner::MineOptions;
use rulemine_core::synth::GenConfig;
use rulemine_core::{SearchParams, WindowChoice};

/// Mine sequential rules from event sequences by minimum description length.
#[derive(Parser)]
#[command(name = "rulemine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BestWindow {
    /// Fewest tail gaps, then smallest delay.
    MinGaps,
    /// First qualifying tail window after the head.
    Nearest,
}

#[derive(Args)]
struct SearchFlags {
    /// Allowed gaps per pattern event.
    #[arg(long, default_value_t = 2.0)]
    max_gap: f64,
    /// Allowed delay between head and tail, per tail event.
    #[arg(long, default_value_t = 2.0)]
    max_delay: f64,
    /// Significance level; the required gain is ceil(log2(1/alpha)) bits.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = BestWindow::MinGaps)]
    best_window: BestWindow,
}

impl SearchFlags {
    fn params(&self) -> Result<SearchParams> {
        let window_choice = match self.best_window {
            BestWindow::MinGaps => WindowChoice::MinGaps,
            BestWindow::Nearest => WindowChoice::Nearest,
        };
        let params = SearchParams { max_gap: self.max_gap, max_delay: self.max_delay, alpha: self.alpha, window_choice };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Grow a rule set from the data by significance-tested extension.
    Mine {
        database: PathBuf,
        /// Model file to write; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        search: SearchFlags,
        /// Upper bound on full passes over the model.
        #[arg(long, default_value_t = 1000)]
        pass_cap: usize,
        /// Write every generated candidate to this file.
        #[arg(long)]
        dump_candidates: Option<PathBuf>,
        /// Unused by mining, which is deterministic; accepted for uniformity.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build a rule set from a file of patterns, one per line.
    Candidates {
        database: PathBuf,
        patterns: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Encoded lengths of a model on a database.
    Score {
        database: PathBuf,
        model: PathBuf,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// The windows a model uses to cover a database.
    Cover {
        database: PathBuf,
        model: PathBuf,
        #[command(flatten)]
        search: SearchFlags,
    },
    /// Generate a synthetic database with planted rules.
    Gen {
        /// Writes <prefix>.db, <prefix>.truth and <prefix>.config.
        prefix: PathBuf,
        #[command(flatten)]
        gen: GenFlags,
    },
    /// Recall, precision and F1 of a mined model against a ground truth.
    Eval {
        mined: PathBuf,
        truth: PathBuf,
        /// Keep singleton rules of the mined model.
        #[arg(long)]
        keep_singletons: bool,
    },
    /// Run one of the synthetic experiments and print a table.
    Experiment {
        #[arg(value_enum)]
        name: Experiment,
        /// Number of datasets per setting.
        #[arg(long, default_value_t = 5)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        search: SearchFlags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Sanity,
    NoStructure,
    Noise,
    Confidence,
    RandomTrigger,
}

#[derive(Args)]
struct GenFlags {
    #[arg(long, default_value_t = 500)]
    alphabet_size: usize,
    #[arg(long, default_value_t = 20)]
    num_rules: usize,
    #[arg(long, default_value_t = 2)]
    head_size: usize,
    #[arg(long, default_value_t = 3)]
    tail_size: usize,
    #[arg(long, default_value_t = 0.75)]
    confidence: f64,
    /// Do not plant the rule heads as patterns of their own.
    #[arg(long)]
    no_head_patterns: bool,
    #[arg(long, default_value_t = 10_000)]
    length: usize,
    #[arg(long, default_value_t = 0.5)]
    noise_fraction: f64,
    #[arg(long, default_value_t = 0.2)]
    delay_prob: f64,
    #[arg(long, default_value_t = 0.1)]
    gap_prob: f64,
    /// Per-event probability of replacing an event by a random one.
    #[arg(long, default_value_t = 0.0)]
    destructive_noise: f64,
    #[arg(long, default_value_t = 2.0)]
    max_gap: f64,
    #[arg(long, default_value_t = 2.0)]
    max_delay: f64,
    /// Sort the events within every rule.
    #[arg(long)]
    lexicographic: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GenFlags {
    fn config(&self) -> Result<GenConfig> {
        let config = GenConfig {
            alphabet_size: self.alphabet_size,
            num_rules: self.num_rules,
            head_size: self.head_size,
            tail_size: self.tail_size,
            confidence: commands::check_probability("confidence", self.confidence)?,
            heads_as_patterns: !self.no_head_patterns,
            initial_length: self.length,
            noise_fraction: commands::check_probability("noise fraction", self.noise_fraction)?,
            delay_prob: commands::check_probability("delay probability", self.delay_prob)?,
            gap_prob: commands::check_probability("gap probability", self.gap_prob)?,
            destructive_noise_prob: commands::check_probability("destructive noise", self.destructive_noise)?,
            max_gap: self.max_gap,
            max_delay: self.max_delay,
            lexicographic: self.lexicographic,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io { path: path.clone(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_experiment(name: Experiment, runs: u64, seed: u64, params: &SearchParams) -> Result<()> {
    let seeds: Vec<u64> = (seed..seed + runs).collect();
    match name {
        Experiment::Sanity => {
            println!("seed\ttruth\tseparate\tjoined\tnested\ttruth_wins");
            for &s in &seeds {
                let t = experiments::sanity_trial(&experiments::sanity_config(6, s), params)?;
                println!("{s}\t{:.1}\t{:.1}\t{:.1}\t{:.1}\t{}", t.truth, t.separate, t.joined, t.nested, t.truth_wins());
            }
        }
        Experiment::NoStructure => {
            println!("seed\tlength\trules\tmax_conf");
            for (n, &s) in seeds.iter().enumerate() {
                let length = 5000 + (n * 10_000) / (seeds.len().max(2) - 1);
                let run = experiments::no_structure_run(500, length, s, params)?;
                let max_conf = run.rules.iter().map(|r| r.1).fold(0.0, f64::max);
                println!("{s}\t{length}\t{}\t{max_conf:.3}", run.rules.len());
            }
        }
        Experiment::Noise => {
            println!("noise\tmean_f1\tmean_rules");
            for noise in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
                let make = |s| GenConfig { destructive_noise_prob: noise, ..experiments::desk_config(s) };
                let (f1, rules) = experiments::mean_recovery(make, &seeds, params)?;
                println!("{noise}\t{f1:.3}\t{rules:.1}");
            }
        }
        Experiment::Confidence => {
            println!("confidence\tmean_f1\tmean_rules");
            for conf in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let make = |s| GenConfig { confidence: conf, ..experiments::desk_config(s) };
                let (f1, rules) = experiments::mean_recovery(make, &seeds, params)?;
                println!("{conf}\t{f1:.3}\t{rules:.1}");
            }
        }
        Experiment::RandomTrigger => {
            println!("mean_f1\tmean_rules");
            let (f1, rules) = experiments::mean_recovery(experiments::random_trigger_config, &seeds, params)?;
            println!("{f1:.3}\t{rules:.1}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mine { database, output, search, pass_cap, dump_candidates, seed: _ } => {
            let options = MineOptions { pass_cap, record_candidates: dump_candidates.is_some() };
            let (out, vocab) = commands::mine(&database, &search.params()?, &options)?;
            emit(output.as_ref(), &out.model.to_string())?;
            if let Some(path) = dump_candidates {
                emit(Some(&path), &out.candidate_dump(&vocab))?;
            }
            eprintln!("{}", out.summary());
        }
        Command::Candidates { database, patterns, output, search } => {
            let out = commands::candidates(&database, &patterns, &search.params()?)?;
            emit(output.as_ref(), &out.model.to_string())?;
            eprintln!("{}", out.summary());
        }
        Command::Score { database, model, search } => {
            let footer = commands::score(&database, &model, &search.params()?)?;
            print!("{}", commands::format_score(&footer));
        }
        Command::Cover { database, model, search } => {
            print!("{}", commands::cover(&database, &model, &search.params()?)?);
        }
        Command::Gen { prefix, gen } => {
            let truth = commands::gen(&gen.config()?, &prefix)?;
            eprintln!("planted {} rules, {} tail insertions", truth.rules.rules.len(), truth.planted_windows.len());
        }
        Command::Eval { mined, truth, keep_singletons } => {
            let report = commands::eval(&mined, &truth, !keep_singletons)?;
            print!("{}", commands::format_eval(&report));
        }
        Command::Experiment { name, runs, seed, search } => {
            run_experiment(name, runs, seed, &search.params()?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rulemine: {e}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use voltage_cli::io::WORKSPACE_ENV;
use voltage_cli::stages::{
    cmd_annotate, cmd_augment, cmd_evaluate, cmd_extract, cmd_gen_synthetic, cmd_recognize, cmd_train,
};
use voltage_cli::{init_jobs, PipelineConfig, Result, Workspace};

#[derive(Parser, Debug)]
#[command(name = "voltage", version, about = "Unsupervised OCR pipeline for low-resource scripts")]
struct Cli {
    /// Pipeline configuration (default: voltage.toml in the workspace, if present).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides every stage seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Workspace directory holding the stage outputs.
    #[arg(long, global = true, env = WORKSPACE_ENV, default_value = ".")]
    workspace: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a synthetic corpus with ground truth.
    GenSynthetic {
        /// Output directory (default: the configured input directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        pages: Option<usize>,
        #[arg(long)]
        lines: Option<usize>,
        #[arg(long)]
        words: Option<usize>,
        /// Noise and overlap preset: clean or paper-like.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        overlap: Option<f64>,
    },
    /// Segment the input pages into symbols.
    Extract,
    /// Cluster the symbols and map clusters to labels.
    Annotate {
        /// Fill the label map from the ground-truth manifest.
        #[arg(long)]
        ground_truth: bool,
    },
    /// Label the symbols and add augmented copies.
    Augment,
    /// Train the contrastive recognizer.
    Train,
    /// Recognize pages and apply the post-rules.
    Recognize {
        /// Page directory (default: the configured input directory).
        #[arg(long)]
        pages: Option<PathBuf>,
    },
    /// Compare the recognized symbols with ground truth.
    Evaluate {
        /// Ground-truth symbol manifest (default: the configured truth file).
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Print the effective configuration.
    Config {
        /// Print the documented defaults instead.
        #[arg(long)]
        emit_default: bool,
    },
}

fn run(cli: Cli) -> Result<String> {
    if let Some(j) = cli.jobs {
        init_jobs(j)?;
    }
    if let Command::Config { emit_default: true } = cli.command {
        return Ok(PipelineConfig::emit_default());
    }
    let ws = Workspace::new(&cli.workspace);
    let mut cfg = PipelineConfig::load(cli.config.as_deref(), ws.root())?;
    if let Some(s) = cli.seed {
        cfg.apply_seed(s);
    }
    match cli.command {
        Command::GenSynthetic {
            out,
            pages,
            lines,
            words,
            preset,
            noise,
            overlap,
        } => {
            let s = &mut cfg.synthetic;
            if let Some(p) = preset {
                s.apply_preset(&p)?;
            }
            s.pages = pages.unwrap_or(s.pages);
            s.lines = lines.unwrap_or(s.lines);
            s.words_per_line = words.unwrap_or(s.words_per_line);
            s.noise = noise.unwrap_or(s.noise);
            s.overlap = overlap.unwrap_or(s.overlap);
            cfg.validate()?;
            cmd_gen_synthetic(&ws, &cfg, out.as_deref())
        }
        Command::Extract => cmd_extract(&ws, &cfg),
        Command::Annotate { ground_truth } => cmd_annotate(&ws, &cfg, ground_truth).map(|s| s.to_string()),
        Command::Augment => cmd_augment(&ws, &cfg),
        Command::Train => cmd_train(&ws, &cfg),
        Command::Recognize { pages } => cmd_recognize(&ws, &cfg, pages.as_deref()),
        Command::Evaluate { truth } => cmd_evaluate(&ws, &cfg, truth.as_deref()).map(|r| r.summary()),
        Command::Config { .. } => Ok(cfg.to_toml()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(msg) => {
            println!("{}", msg.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

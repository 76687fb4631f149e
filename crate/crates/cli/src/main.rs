use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod common;
mod encode;
mod evaluate;
mod matching;
mod noise;
mod skeleton;
mod synth;
mod timings;

/// SSR-VLAD place recognition from semantic segmentation maps.
#[derive(Debug, Parser)]
#[command(name = "ssrvpr", version, about)]
struct Cli {
    /// Worker threads for encoding (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode a directory of label images into a descriptor database.
    Encode(encode::Args),
    /// Rank reference frames for every query frame.
    Match(matching::Args),
    /// Compute AUC, Recall@100%Precision and Recall@1 from match results.
    Eval(evaluate::Args),
    /// Skeleton-jitter robustness experiment.
    Noise(noise::Args),
    /// Per-stage wall-clock timings over a corpus.
    Timings(timings::Args),
    /// Write a debug overlay of layers, skeletons and keypoints.
    Skeleton(skeleton::Args),
    /// Generate a synthetic label-image corpus.
    Synth(synth::Args),
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("failed to configure worker pool")?;
    }
    match cli.command {
        Command::Encode(a) => encode::run(a),
        Command::Match(a) => matching::run(a),
        Command::Eval(a) => evaluate::run(a),
        Command::Noise(a) => noise::run(a),
        Command::Timings(a) => timings::run(a),
        Command::Skeleton(a) => skeleton::run(a),
        Command::Synth(a) => synth::run(a),
    }
}

pub(crate) fn create_parent(path: &std::path::Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    Ok(())
}

